//! Oriented triangle meshes with boundary.
//!
//! The mesh itself only stores positions and index triples. Everything else
//! (edge enumeration, adjacency, boundary loops) is derived on demand through
//! [`Connectivity`], so a [`SurfaceMesh`] stays trivially serializable and
//! immutable once built.

mod io;
mod topology;

pub use io::{read_obj, read_off, write_obj, write_off};
pub use topology::{build_topology, Topology};

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::MeshError;

pub type Point3 = Vector3<f64>;

/// Triangles with area at or below this value are reported as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;
/// Vertices closer than this are reported as duplicates.
pub const DUPLICATE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
}

impl SurfaceMesh {
    /// Builds a mesh without validating it; see [`validate_mesh`].
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        for (f, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(MeshError::IndexOutOfRange { triangle: f, vertex_count: n });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedIndex { triangle: f });
            }
        }
        Ok(Self { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn position(&self, v: usize) -> Point3 {
        self.vertices[v]
    }

    pub fn corners(&self, f: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized normal, twice the area in length.
    pub fn face_area_vector(&self, f: usize) -> Point3 {
        let [p0, p1, p2] = self.corners(f);
        (p1 - p0).cross(&(p2 - p0))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_area_vector(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Point3 {
        self.face_area_vector(f).normalize()
    }

    pub fn barycenter(&self, f: usize) -> Point3 {
        let [p0, p1, p2] = self.corners(f);
        (p0 + p1 + p2) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|f| self.face_area(f)).sum()
    }

    /// Longest edge length; the mesh size `h` used in convergence studies.
    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .map(|(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn connectivity(&self) -> Connectivity {
        Connectivity::new(self)
    }
}

/// Derived adjacency for a [`SurfaceMesh`].
///
/// Edges are enumerated in lexicographic order of their (low, high) vertex
/// pair, and each edge is oriented from the lower to the higher vertex index.
/// This is the edge order used by every edge cochain in the crate.
#[derive(Debug, Clone)]
pub struct Connectivity {
    pub edges: Vec<[usize; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    /// Faces incident to each edge (two for interior edges, one on the boundary).
    pub edge_faces: Vec<Vec<usize>>,
    /// For each face, its three edges opposite to local corners 2, 0, 1, i.e.
    /// the directed sides (v0→v1, v1→v2, v2→v0), together with +1 if the side
    /// agrees with the edge orientation and −1 otherwise.
    pub face_edges: Vec<[(usize, f64); 3]>,
    pub vertex_faces: Vec<Vec<usize>>,
    pub vertex_neighbors: Vec<Vec<usize>>,
    pub is_boundary_edge: Vec<bool>,
    pub is_boundary_vertex: Vec<bool>,
}

impl Connectivity {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        let nv = mesh.vertex_count();
        let mut pairs: Vec<(usize, usize)> = mesh
            .triangles()
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();

        let edge_lookup: HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let edges: Vec<[usize; 2]> = pairs.iter().map(|&(a, b)| [a, b]).collect();

        let mut edge_faces = vec![Vec::new(); edges.len()];
        let mut vertex_faces = vec![Vec::new(); nv];
        let mut face_edges = Vec::with_capacity(mesh.triangle_count());
        for (f, t) in mesh.triangles().iter().enumerate() {
            let mut fe = [(0usize, 0.0f64); 3];
            for (slot, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].into_iter().enumerate() {
                let e = edge_lookup[&(a.min(b), a.max(b))];
                edge_faces[e].push(f);
                fe[slot] = (e, if a < b { 1.0 } else { -1.0 });
            }
            face_edges.push(fe);
            for &v in t {
                vertex_faces[v].push(f);
            }
        }

        let mut vertex_neighbors = vec![Vec::new(); nv];
        for &[a, b] in &edges {
            vertex_neighbors[a].push(b);
            vertex_neighbors[b].push(a);
        }
        for n in &mut vertex_neighbors {
            n.sort_unstable();
        }

        let is_boundary_edge: Vec<bool> = edge_faces.iter().map(|f| f.len() == 1).collect();
        let mut is_boundary_vertex = vec![false; nv];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if is_boundary_edge[e] {
                is_boundary_vertex[a] = true;
                is_boundary_vertex[b] = true;
            }
        }

        Self {
            edges,
            edge_lookup,
            edge_faces,
            face_edges,
            vertex_faces,
            vertex_neighbors,
            is_boundary_edge,
            is_boundary_vertex,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Index of the undirected edge {a, b}, if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn boundary_edge_indices(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.is_boundary_edge[e]).collect()
    }

    pub fn interior_vertex_indices(&self) -> Vec<usize> {
        (0..self.is_boundary_vertex.len()).filter(|&v| !self.is_boundary_vertex[v]).collect()
    }

    /// Vertices within `rings` edge hops of any boundary vertex (ring 0 is the
    /// boundary itself).
    pub fn boundary_strip(&self, rings: usize) -> Vec<bool> {
        let mut marked = self.is_boundary_vertex.clone();
        for _ in 0..rings {
            let prev = marked.clone();
            for (v, nbrs) in self.vertex_neighbors.iter().enumerate() {
                if !prev[v] && nbrs.iter().any(|&w| prev[w]) {
                    marked[v] = true;
                }
            }
        }
        marked
    }

    /// Vertices reachable from `v` in at most `rings` hops, including `v`.
    pub fn k_ring(&self, v: usize, rings: usize) -> Vec<usize> {
        let mut seen = vec![v];
        let mut frontier = vec![v];
        for _ in 0..rings {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in &self.vertex_neighbors[u] {
                    if !seen.contains(&w) {
                        seen.push(w);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen
    }

    /// Faces touching any vertex of the `rings`-ring around `v`.
    /// `rings = 0` is the one-ring fan of `v`.
    pub fn face_patch(&self, v: usize, rings: usize) -> Vec<usize> {
        let mut faces: Vec<usize> = self
            .k_ring(v, rings)
            .into_iter()
            .flat_map(|u| self.vertex_faces[u].iter().copied())
            .collect();
        faces.sort_unstable();
        faces.dedup();
        faces
    }
}

/// Boundary loops as ordered vertex cycles, oriented so the surface lies to
/// the left (the orientation induced by the triangles).
pub fn boundary_loops(mesh: &SurfaceMesh) -> Result<Vec<Vec<usize>>, MeshError> {
    let conn = mesh.connectivity();
    let mut next: HashMap<usize, usize> = HashMap::new();
    for (f, t) in mesh.triangles().iter().enumerate() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let e = conn.edge_index(a, b).expect("edge of own triangle");
            if conn.is_boundary_edge[e] && next.insert(a, b).is_some() {
                return Err(MeshError::PinchedBoundary { vertex: a, triangle: f });
            }
        }
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut visited: HashMap<usize, bool> = HashMap::new();
    let mut loops = Vec::new();
    for s in starts {
        if visited.contains_key(&s) {
            continue;
        }
        let mut cycle = vec![s];
        visited.insert(s, true);
        let mut cur = s;
        loop {
            let nxt = *next.get(&cur).ok_or(MeshError::OpenBoundary { vertex: cur })?;
            if nxt == s {
                break;
            }
            if visited.insert(nxt, true).is_some() {
                return Err(MeshError::PinchedBoundary { vertex: nxt, triangle: usize::MAX });
            }
            cycle.push(nxt);
            cur = nxt;
        }
        loops.push(cycle);
    }
    Ok(loops)
}

/// Diagnostic report from [`validate_mesh`]. Nothing here is fatal by itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshDiagnostics {
    /// Edges with more than two incident triangles.
    pub non_manifold_edges: Vec<[usize; 2]>,
    /// Edges traversed in the same direction by two triangles.
    pub orientation_conflicts: Vec<[usize; 2]>,
    pub degenerate_triangles: Vec<usize>,
    pub duplicate_vertices: Vec<(usize, usize)>,
    /// Vertices where boundary loops touch or fail to close.
    pub boundary_defects: Vec<usize>,
    pub isolated_vertices: Vec<usize>,
}

impl MeshDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.non_manifold_edges.is_empty()
            && self.orientation_conflicts.is_empty()
            && self.degenerate_triangles.is_empty()
            && self.duplicate_vertices.is_empty()
            && self.boundary_defects.is_empty()
            && self.isolated_vertices.is_empty()
    }
}

pub fn validate_mesh(mesh: &SurfaceMesh) -> MeshDiagnostics {
    let conn = mesh.connectivity();
    let mut diag = MeshDiagnostics::default();

    for (e, faces) in conn.edge_faces.iter().enumerate() {
        if faces.len() > 2 {
            diag.non_manifold_edges.push(conn.edges[e]);
        }
    }

    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in mesh.triangles() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *directed.entry((a, b)).or_default() += 1;
        }
    }
    let mut conflicts: Vec<[usize; 2]> = directed
        .iter()
        .filter(|(_, &c)| c > 1)
        .map(|(&(a, b), _)| [a.min(b), a.max(b)])
        .collect();
    conflicts.sort_unstable();
    conflicts.dedup();
    diag.orientation_conflicts = conflicts;

    diag.degenerate_triangles =
        (0..mesh.triangle_count()).filter(|&f| mesh.face_area(f) <= DEGENERATE_AREA).collect();

    let mut order: Vec<usize> = (0..mesh.vertex_count()).collect();
    let vs = mesh.vertices();
    order.sort_by(|&a, &b| vs[a].x.total_cmp(&vs[b].x));
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if vs[b].x - vs[a].x > DUPLICATE_DISTANCE {
                break;
            }
            if (vs[a] - vs[b]).norm() <= DUPLICATE_DISTANCE {
                diag.duplicate_vertices.push((a.min(b), a.max(b)));
            }
        }
    }
    diag.duplicate_vertices.sort_unstable();

    // A boundary vertex of a manifold-with-boundary has exactly one outgoing
    // and one incoming boundary half-edge.
    let mut out_deg = vec![0usize; mesh.vertex_count()];
    let mut in_deg = vec![0usize; mesh.vertex_count()];
    for (f, t) in mesh.triangles().iter().enumerate() {
        for (slot, &(e, _)) in conn.face_edges[f].iter().enumerate() {
            if conn.is_boundary_edge[e] {
                out_deg[t[slot]] += 1;
                in_deg[t[(slot + 1) % 3]] += 1;
            }
        }
    }
    diag.boundary_defects = (0..mesh.vertex_count())
        .filter(|&v| out_deg[v] != in_deg[v] || out_deg[v] > 1)
        .collect();

    diag.isolated_vertices =
        (0..mesh.vertex_count()).filter(|&v| conn.vertex_faces[v].is_empty()).collect();
    diag
}

/// Moves refined vertices back onto an analytic surface.
pub trait Projector {
    /// Maps a point near the surface onto it. Points flagged `on_boundary`
    /// must land on the boundary curve. `None` signals non-convergence.
    fn project(&self, p: &Point3, on_boundary: bool) -> Option<Point3>;
}

/// 1-to-4 midpoint subdivision. With a projector, every new vertex is
/// reprojected; new vertices on boundary edges stay on the boundary.
pub fn refine(mesh: &SurfaceMesh, projector: Option<&dyn Projector>) -> Result<SurfaceMesh, MeshError> {
    let conn = mesh.connectivity();
    let nv = mesh.vertex_count();
    let mut vertices = mesh.vertices().to_vec();
    vertices.reserve(conn.edge_count());
    for (e, &[a, b]) in conn.edges.iter().enumerate() {
        let mid = 0.5 * (mesh.position(a) + mesh.position(b));
        let p = match projector {
            Some(pr) => pr
                .project(&mid, conn.is_boundary_edge[e])
                .ok_or(MeshError::Projection { vertex: nv + e, edge: [a, b] })?,
            None => mid,
        };
        vertices.push(p);
    }
    let mut triangles = Vec::with_capacity(4 * mesh.triangle_count());
    for (f, t) in mesh.triangles().iter().enumerate() {
        let [(e01, _), (e12, _), (e20, _)] = conn.face_edges[f];
        let (m01, m12, m20) = (nv + e01, nv + e12, nv + e20);
        triangles.push([t[0], m01, m20]);
        triangles.push([m01, t[1], m12]);
        triangles.push([m20, m12, t[2]]);
        triangles.push([m01, m12, m20]);
    }
    SurfaceMesh::new(vertices, triangles)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Square [0,1]² split into 2·n² triangles, counter-clockwise.
    pub fn square(n: usize) -> SurfaceMesh {
        let mut vertices = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point3::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::new();
        for j in 0..n {
            for i in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        SurfaceMesh::new(vertices, triangles).unwrap()
    }

    /// Flat annulus with `nr` radial and `nt` angular cells.
    pub fn annulus(nr: usize, nt: usize) -> SurfaceMesh {
        let mut vertices = Vec::new();
        for j in 0..=nr {
            let r = 0.5 + 0.5 * j as f64 / nr as f64;
            for i in 0..nt {
                let th = std::f64::consts::TAU * i as f64 / nt as f64;
                vertices.push(Point3::new(r * th.cos(), r * th.sin(), 0.0));
            }
        }
        let id = |i: usize, j: usize| j * nt + (i % nt);
        let mut triangles = Vec::new();
        for j in 0..nr {
            for i in 0..nt {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        SurfaceMesh::new(vertices, triangles).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn square_is_valid_with_one_loop() {
        let m = square(4);
        assert!(validate_mesh(&m).is_valid());
        let loops = boundary_loops(&m).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 16);
    }

    #[test]
    fn duplicated_triangle_is_non_manifold() {
        let m = square(3);
        let mut tris = m.triangles().to_vec();
        tris.push(tris[7]);
        let bad = SurfaceMesh::new(m.vertices().to_vec(), tris).unwrap();
        let d = validate_mesh(&bad);
        assert!(!d.non_manifold_edges.is_empty());
        assert!(!d.is_valid());
    }

    #[test]
    fn flipped_triangle_is_reported() {
        let m = square(3);
        let mut tris = m.triangles().to_vec();
        tris[8].swap(1, 2);
        let bad = SurfaceMesh::new(m.vertices().to_vec(), tris).unwrap();
        let d = validate_mesh(&bad);
        assert!(!d.orientation_conflicts.is_empty());
        assert!(d.non_manifold_edges.is_empty());
    }

    #[test]
    fn degenerate_and_duplicate_vertices() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 1e-13),
        ];
        let m = SurfaceMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        let d = validate_mesh(&m);
        assert_eq!(d.degenerate_triangles, vec![0]);
        assert_eq!(d.duplicate_vertices, vec![(3, 4)]);
    }

    #[test]
    fn edges_are_lexicographic_and_cover_boundary_once() {
        let m = annulus(3, 12);
        let conn = m.connectivity();
        assert!(conn.edges.windows(2).all(|w| w[0] < w[1]));
        let loops = boundary_loops(&m).unwrap();
        assert_eq!(loops.len(), 2);
        let mut seen = Vec::new();
        for l in &loops {
            for i in 0..l.len() {
                seen.push(conn.edge_index(l[i], l[(i + 1) % l.len()]).unwrap());
            }
        }
        seen.sort_unstable();
        assert_eq!(seen, conn.boundary_edge_indices());
    }

    #[test]
    fn refinement_quadruples_faces_and_doubles_loops() {
        let m = annulus(2, 10);
        let r = refine(&m, None).unwrap();
        assert_eq!(r.triangle_count(), 4 * m.triangle_count());
        assert!(validate_mesh(&r).is_valid());
        let before: Vec<usize> = boundary_loops(&m).unwrap().iter().map(Vec::len).collect();
        let after: Vec<usize> = boundary_loops(&r).unwrap().iter().map(Vec::len).collect();
        assert_eq!(after.len(), before.len());
        let mut b2: Vec<usize> = before.iter().map(|n| 2 * n).collect();
        let mut a2 = after.clone();
        b2.sort_unstable();
        a2.sort_unstable();
        assert_eq!(a2, b2);
        let (tr, tm) = (build_topology(&r).unwrap(), build_topology(&m).unwrap());
        assert_eq!((tr.genus, tr.boundary_components, tr.euler_char), (tm.genus, tm.boundary_components, tm.euler_char));
        assert_eq!(tr.v_count, tm.v_count + tm.e_count);
    }

    struct Never;
    impl Projector for Never {
        fn project(&self, _: &Point3, _: bool) -> Option<Point3> {
            None
        }
    }

    #[test]
    fn failing_projector_aborts_with_vertex() {
        let m = square(1);
        let err = refine(&m, Some(&Never)).unwrap_err();
        assert!(matches!(err, MeshError::Projection { vertex: 4, .. }));
    }
}
