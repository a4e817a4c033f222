//! Discrete differential geometry on a [`SurfaceMesh`]: normals and shape
//! operators, cotangent stiffness and mass, boundary mass, the Steklov
//! residual of the coordinate functions, and local quadratic patch fits.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2};

use crate::error::GeometryError;
use crate::mesh::{Connectivity, Point3, SurfaceMesh, DEGENERATE_AREA};
use crate::sparse::{self, SparseMat};
use crate::surfaces::AnalyticSurface;

/// Per-vertex normal, tangent frame, shape operator and `‖A‖²`.
#[derive(Debug, Clone)]
pub struct ShapeField {
    pub normals: Vec<Point3>,
    pub frames: Vec<[Point3; 2]>,
    /// Symmetric, in the basis `frames[v]`.
    pub shape: Vec<Matrix2<f64>>,
    pub a2: Vec<f64>,
}

impl ShapeField {
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// `S` at vertex `v` as a 3×3 map on ambient vectors (kills the normal).
    pub fn shape_ambient(&self, v: usize) -> Matrix3<f64> {
        let [e1, e2] = self.frames[v];
        let s = self.shape[v];
        let es = [e1, e2];
        let mut m = Matrix3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m += s[(i, j)] * es[i] * es[j].transpose();
            }
        }
        m
    }

    /// Tangential projection at vertex `v`.
    pub fn project(&self, v: usize, x: &Point3) -> Point3 {
        x - self.normals[v] * self.normals[v].dot(x)
    }
}

/// Convex body seen through its boundary second fundamental form `h(p, U)`.
#[derive(Clone, Copy)]
pub struct BodyModel {
    pub name: &'static str,
    h: fn(&Point3, &Point3) -> f64,
}

impl std::fmt::Debug for BodyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BodyModel").field("name", &self.name).finish()
    }
}

impl BodyModel {
    pub fn new(name: &'static str, h: fn(&Point3, &Point3) -> f64) -> Self {
        BodyModel { name, h }
    }

    /// The unit ball, `h(p, U) = −|U|²` with the outward normal.
    pub fn unit_ball() -> Self {
        BodyModel { name: "unit-ball", h: |_, u| -u.norm_squared() }
    }

    pub fn h(&self, p: &Point3, u: &Point3) -> f64 {
        (self.h)(p, u)
    }
}

impl Default for BodyModel {
    fn default() -> Self {
        BodyModel::unit_ball()
    }
}

/// Which degrees of freedom a matrix pair acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DofMap {
    Vertices,
    Edges,
    /// A subset of vertices, listed in matrix order.
    VertexSubset(Vec<usize>),
    /// A subset of edges, listed in matrix order.
    EdgeSubset(Vec<usize>),
}

impl DofMap {
    /// Scatters a reduced vector into a full one of length `full`.
    pub fn expand(&self, x: &[f64], full: usize) -> Vec<f64> {
        match self {
            DofMap::Vertices | DofMap::Edges => x.to_vec(),
            DofMap::VertexSubset(ids) | DofMap::EdgeSubset(ids) => {
                let mut out = vec![0.0; full];
                for (k, &i) in ids.iter().enumerate() {
                    out[i] = x[k];
                }
                out
            }
        }
    }
}

/// A symmetric pair `(A, B)` with `B` positive definite.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub a: SparseMat,
    pub b: SparseMat,
    pub dofs: DofMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassKind {
    #[default]
    Lumped,
    Consistent,
}

/// Cotangent stiffness, area mass and lumped boundary length mass.
#[derive(Debug, Clone)]
pub struct ScalarOperators {
    pub stiffness: SparseMat,
    pub mass: SparseMat,
    pub boundary_mass: SparseMat,
    /// Lumped (barycentric) vertex areas, whatever `mass` is.
    pub vertex_area: Vec<f64>,
    /// Lumped boundary lengths per vertex; zero in the interior.
    pub boundary_length: Vec<f64>,
}

fn cot(a: &Point3, b: &Point3) -> f64 {
    a.dot(b) / a.cross(b).norm()
}

pub fn assemble_scalar_operators(mesh: &SurfaceMesh, kind: MassKind) -> Result<ScalarOperators, GeometryError> {
    let n = mesh.vertex_count();
    let mut k = Vec::with_capacity(12 * mesh.triangle_count());
    let mut m = Vec::new();
    let mut vertex_area = vec![0.0; n];
    for (f, t) in mesh.triangles().iter().enumerate() {
        let area = mesh.face_area(f);
        if area <= DEGENERATE_AREA {
            return Err(GeometryError::DegenerateTriangle { triangle: f });
        }
        let p = mesh.corners(f);
        for c in 0..3 {
            let (i, j, o) = (t[(c + 1) % 3], t[(c + 2) % 3], c);
            let w = 0.5 * cot(&(p[(o + 1) % 3] - p[o]), &(p[(o + 2) % 3] - p[o]));
            k.extend([(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
        }
        for &v in t {
            vertex_area[v] += area / 3.0;
        }
        if kind == MassKind::Consistent {
            for &a in t {
                for &b in t {
                    m.push((a, b, if a == b { area / 6.0 } else { area / 12.0 }));
                }
            }
        }
    }
    let mass = match kind {
        MassKind::Lumped => sparse::diagonal(&vertex_area),
        MassKind::Consistent => sparse::from_triplets(n, n, &m),
    };
    let conn = mesh.connectivity();
    let mut boundary_length = vec![0.0; n];
    for e in conn.boundary_edge_indices() {
        let [a, b] = conn.edges[e];
        let l = (mesh.position(a) - mesh.position(b)).norm();
        boundary_length[a] += 0.5 * l;
        boundary_length[b] += 0.5 * l;
    }
    Ok(ScalarOperators {
        stiffness: sparse::from_triplets(n, n, &k),
        mass,
        boundary_mass: sparse::diagonal(&boundary_length),
        vertex_area,
        boundary_length,
    })
}

/// Area-weighted vertex normals.
pub fn vertex_normals(mesh: &SurfaceMesh) -> Vec<Point3> {
    let mut n = vec![Point3::zeros(); mesh.vertex_count()];
    for (f, t) in mesh.triangles().iter().enumerate() {
        let a = mesh.face_area_vector(f);
        for &v in t {
            n[v] += a;
        }
    }
    n.into_iter().map(|v| v.normalize()).collect()
}

/// An orthonormal tangent basis `(e1, e2)` with `e1 × e2 = n`.
pub fn tangent_frame(n: &Point3) -> [Point3; 2] {
    let axis = if n.x.abs() < 0.6 { Point3::x() } else if n.y.abs() < 0.6 { Point3::y() } else { Point3::z() };
    let e1 = (axis - n * n.dot(&axis)).normalize();
    [e1, n.cross(&e1)]
}

/// Normals from a quadratic height fit over each vertex patch. Area-weighted
/// normals are only first-order accurate on irregular stars, which is not
/// enough to difference them.
pub fn fitted_normals(mesh: &SurfaceMesh, conn: &Connectivity) -> Result<Vec<Point3>, GeometryError> {
    let n0 = vertex_normals(mesh);
    let frames: Vec<[Point3; 2]> = n0.iter().map(tangent_frame).collect();
    let fit = PatchFit::new(mesh, conn, &frames, PatchSamples::Vertices, 1)?;
    Ok((0..mesh.vertex_count())
        .map(|v| {
            let o = mesh.position(v);
            let h: Vec<f64> = fit.samples[v].iter().map(|&w| (mesh.position(w) - o).dot(&n0[v])).collect();
            let y = DVector::from_vec(h);
            let c = &fit.pinv[v] * y;
            let [e1, e2] = frames[v];
            (n0[v] - e1 * c[1] - e2 * c[2]).normalize()
        })
        .collect())
}

/// Exact fields sampled at the vertices when `analytic` is given; otherwise
/// fitted normals and a least-squares fit of the normal differential over
/// the one-ring (two-ring where the one-ring is too small).
pub fn shape_field(mesh: &SurfaceMesh, analytic: Option<&AnalyticSurface>) -> Result<ShapeField, GeometryError> {
    if let Some(s) = analytic {
        let mut out = ShapeField { normals: vec![], frames: vec![], shape: vec![], a2: vec![] };
        for p in mesh.vertices() {
            let f = s.frame_at(p);
            out.normals.push(f.normal);
            out.frames.push(f.tangents);
            out.shape.push(f.shape);
            out.a2.push(f.a2);
        }
        return Ok(out);
    }
    let conn = mesh.connectivity();
    let normals = fitted_normals(mesh, &conn)?;
    let frames: Vec<[Point3; 2]> = normals.iter().map(tangent_frame).collect();
    let mut shape = Vec::with_capacity(normals.len());
    for v in 0..mesh.vertex_count() {
        let [e1, e2] = frames[v];
        let mut fitted = None;
        for rings in 1..=2 {
            let nbrs: Vec<usize> = conn.k_ring(v, rings).into_iter().filter(|&w| w != v).collect();
            if nbrs.len() < 3 {
                continue;
            }
            let mut dd = Matrix2::zeros();
            let mut nd = Matrix2::zeros();
            for &w in &nbrs {
                let dx = mesh.position(w) - mesh.position(v);
                let dn = normals[w] - normals[v];
                let d = Vector2::new(dx.dot(&e1), dx.dot(&e2));
                let q = Vector2::new(dn.dot(&e1), dn.dot(&e2));
                dd += d * d.transpose();
                nd += q * d.transpose();
            }
            let eig = dd.symmetric_eigenvalues();
            if eig.min() <= 1e-8 * eig.max() {
                continue;
            }
            let g = -nd * dd.try_inverse().expect("well conditioned");
            fitted = Some(0.5 * (g + g.transpose()));
            break;
        }
        shape.push(fitted.ok_or(GeometryError::IllConditionedStar { vertex: v })?);
    }
    let a2 = shape.iter().map(|s| s.norm_squared()).collect();
    Ok(ShapeField { normals, frames, shape, a2 })
}

/// `‖A‖²` per vertex from the edge curvature tensor
/// `(1/|B_v|) Σ_e β_e (|e|/2) ê êᵀ`, with `β_e` the signed dihedral angle.
/// Cross-check for [`shape_field`]; boundary edges carry no bending.
pub fn dihedral_a2(mesh: &SurfaceMesh) -> Vec<f64> {
    let conn = mesh.connectivity();
    let normals = vertex_normals(mesh);
    let mut area = vec![0.0; mesh.vertex_count()];
    for (f, t) in mesh.triangles().iter().enumerate() {
        for &v in t {
            area[v] += mesh.face_area(f) / 3.0;
        }
    }
    let mut tensor = vec![Matrix3::<f64>::zeros(); mesh.vertex_count()];
    for (e, [a, b]) in conn.edges.iter().enumerate() {
        if conn.edge_faces[e].len() != 2 {
            continue;
        }
        let (f0, f1) = (conn.edge_faces[e][0], conn.edge_faces[e][1]);
        let (n0, n1) = (mesh.face_normal(f0), mesh.face_normal(f1));
        let d = mesh.position(*b) - mesh.position(*a);
        let len = d.norm();
        let u = d / len;
        let angle = n0.cross(&n1).dot(&u).atan2(n0.dot(&n1)).abs();
        // Sign: positive where the surface bends towards its normal.
        let o1 = mesh.triangles()[f1].iter().copied().find(|&w| w != *a && w != *b).unwrap();
        let sign = if (mesh.position(o1) - mesh.position(*a)).dot(&n0) > 0.0 { 1.0 } else { -1.0 };
        let c = sign * angle * 0.5 * len * (u * u.transpose());
        tensor[*a] += c;
        tensor[*b] += c;
    }
    (0..mesh.vertex_count())
        .map(|v| {
            let [e1, e2] = tangent_frame(&normals[v]);
            let t = tensor[v] / area[v];
            let s = Matrix2::new(e1.dot(&(t * e1)), e1.dot(&(t * e2)), e2.dot(&(t * e1)), e2.dot(&(t * e2)));
            s.norm_squared()
        })
        .collect()
}

/// Outward unit conormal at each boundary vertex: the length-weighted mean of
/// the in-plane edge normals of its two boundary edges. Zero in the interior.
pub fn boundary_conormals(mesh: &SurfaceMesh, conn: &Connectivity) -> Vec<Point3> {
    let mut eta = vec![Point3::zeros(); mesh.vertex_count()];
    for e in conn.boundary_edge_indices() {
        let [a, b] = conn.edges[e];
        let f = conn.edge_faces[e][0];
        let o = mesh.triangles()[f].iter().copied().find(|&w| w != a && w != b).unwrap();
        let d = mesh.position(b) - mesh.position(a);
        let w = mesh.position(a) - mesh.position(o);
        let out = w - d * (w.dot(&d) / d.norm_squared());
        let c = out.normalize() * d.norm();
        eta[a] += c;
        eta[b] += c;
    }
    eta.into_iter().map(|v| if v.norm() > 0.0 { v.normalize() } else { v }).collect()
}

/// Per-boundary-vertex `max_k |∂_η x_k − x_k|`, with `∂_η` the area-weighted
/// one-sided gradient over the vertex fan. Interior entries are zero.
#[derive(Debug, Clone)]
pub struct SteklovResidual {
    pub per_vertex: Vec<f64>,
    pub max: f64,
}

pub fn steklov_residual(mesh: &SurfaceMesh) -> SteklovResidual {
    let conn = mesh.connectivity();
    let eta = boundary_conormals(mesh, &conn);
    let mut per_vertex = vec![0.0; mesh.vertex_count()];
    for v in 0..mesh.vertex_count() {
        if !conn.is_boundary_vertex[v] {
            continue;
        }
        // Gradient of the linear interpolant of x_k on a face is e_k
        // projected onto the face plane.
        let mut g = Matrix3::zeros();
        let mut w = 0.0;
        for &f in &conn.vertex_faces[v] {
            let n = mesh.face_normal(f);
            let a = mesh.face_area(f);
            g += a * (Matrix3::identity() - n * n.transpose());
            w += a;
        }
        let d = (g / w) * eta[v] - mesh.position(v);
        per_vertex[v] = d.amax();
    }
    let max = per_vertex.iter().copied().fold(0.0, f64::max);
    SteklovResidual { per_vertex, max }
}

/// A quadratic `c0 + c1 u + c2 v + c3 u² + c4 uv + c5 v²` in tangent
/// coordinates about a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub c: [f64; 6],
}

impl Quadratic {
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn gradient(&self) -> Vector2<f64> {
        Vector2::new(self.c[1], self.c[2])
    }

    /// Gradient at local coordinates `(u, v)`.
    pub fn gradient_at(&self, u: f64, v: f64) -> Vector2<f64> {
        Vector2::new(self.c[1] + 2.0 * self.c[3] * u + self.c[4] * v, self.c[2] + self.c[4] * u + 2.0 * self.c[5] * v)
    }

    pub fn hessian(&self) -> Matrix2<f64> {
        Matrix2::new(2.0 * self.c[3], self.c[4], self.c[4], 2.0 * self.c[5])
    }
}

/// Least-squares quadratic fits over per-vertex patches. The pseudo-inverse
/// of every patch is formed once; fitting a field is then a gather and a
/// small product per vertex.
#[derive(Debug, Clone)]
pub struct PatchFit {
    pub origins: Vec<Point3>,
    pub frames: Vec<[Point3; 2]>,
    samples: Vec<Vec<usize>>,
    pinv: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchSamples {
    /// Field values at vertices, patch = k-ring.
    Vertices,
    /// Field values at face barycenters, patch = faces touching the k-ring.
    Faces,
}

impl PatchFit {
    /// `rings` is the starting patch radius; patches grow until the fit is
    /// well posed.
    pub fn new(
        mesh: &SurfaceMesh,
        conn: &Connectivity,
        frames: &[[Point3; 2]],
        kind: PatchSamples,
        rings: usize,
    ) -> Result<Self, GeometryError> {
        let points: Vec<Point3> = match kind {
            PatchSamples::Vertices => mesh.vertices().to_vec(),
            PatchSamples::Faces => (0..mesh.triangle_count()).map(|f| mesh.barycenter(f)).collect(),
        };
        let mut samples = Vec::with_capacity(mesh.vertex_count());
        let mut pinv = Vec::with_capacity(mesh.vertex_count());
        for v in 0..mesh.vertex_count() {
            let origin = mesh.position(v);
            let [e1, e2] = frames[v];
            let mut done = false;
            for r in rings..rings + 4 {
                let ids = match kind {
                    PatchSamples::Vertices => conn.k_ring(v, r),
                    PatchSamples::Faces => conn.face_patch(v, r.saturating_sub(1)),
                };
                if ids.len() < 9 {
                    continue;
                }
                // Scaled columns keep the fit well conditioned.
                let h = ids.iter().map(|&i| (points[i] - origin).norm()).fold(0.0, f64::max);
                let a = DMatrix::from_fn(ids.len(), 6, |row, col| {
                    let d = points[ids[row]] - origin;
                    let (u, w) = (d.dot(&e1) / h, d.dot(&e2) / h);
                    [1.0, u, w, u * u, u * w, w * w][col]
                });
                let svd = a.clone().svd(true, true);
                let smin = svd.singular_values.min();
                let smax = svd.singular_values.max();
                if smin < 1e-6 * smax {
                    continue;
                }
                let mut p = svd.pseudo_inverse(0.0).expect("full rank");
                let scale = [1.0, 1.0 / h, 1.0 / h, 1.0 / (h * h), 1.0 / (h * h), 1.0 / (h * h)];
                for (row, s) in scale.iter().enumerate() {
                    let mut r = p.row_mut(row);
                    r *= *s;
                }
                samples.push(ids);
                pinv.push(p);
                done = true;
                break;
            }
            if !done {
                return Err(GeometryError::IllConditionedStar { vertex: v });
            }
        }
        Ok(PatchFit { origins: mesh.vertices().to_vec(), frames: frames.to_vec(), samples, pinv })
    }

    pub fn fit_at(&self, v: usize, values: &[f64]) -> Quadratic {
        let y = DVector::from_iterator(self.samples[v].len(), self.samples[v].iter().map(|&i| values[i]));
        let c = &self.pinv[v] * y;
        Quadratic { c: [c[0], c[1], c[2], c[3], c[4], c[5]] }
    }

    pub fn fit(&self, values: &[f64]) -> Vec<Quadratic> {
        (0..self.samples.len()).map(|v| self.fit_at(v, values)).collect()
    }

    /// Fitted tangential gradient at each vertex as an ambient vector.
    pub fn gradient(&self, values: &[f64]) -> Vec<Point3> {
        (0..self.samples.len())
            .map(|v| {
                let g = self.fit_at(v, values).gradient();
                let [e1, e2] = self.frames[v];
                e1 * g.x + e2 * g.y
            })
            .collect()
    }

    /// Fitted value at each vertex.
    pub fn value(&self, values: &[f64]) -> Vec<f64> {
        (0..self.samples.len()).map(|v| self.fit_at(v, values).value()).collect()
    }
}

/// `M⁻¹ K f` with the lumped mass: the positive (geometer's) Laplacian.
pub fn laplacian(ops: &ScalarOperators, f: &[f64]) -> Vec<f64> {
    sparse::matvec(&ops.stiffness, f).into_iter().zip(&ops.vertex_area).map(|(k, a)| k / a).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::square;
    use crate::surfaces::{make_surface, SurfaceKind};
    use proptest::prelude::*;

    #[test]
    fn constants_are_in_the_stiffness_kernel() {
        let (m, _) = make_surface(SurfaceKind::Catenoid, 5).unwrap();
        let ops = assemble_scalar_operators(&m, MassKind::Lumped).unwrap();
        let k1 = sparse::matvec(&ops.stiffness, &vec![1.0; m.vertex_count()]);
        assert!(k1.iter().all(|v| v.abs() < 1e-12));
        assert!(sparse::symmetry_error(&ops.stiffness) < 1e-13);
        let total: f64 = ops.vertex_area.iter().sum();
        assert!((total - m.total_area()).abs() < 1e-12);
    }

    #[test]
    fn consistent_and_lumped_mass_integrate_constants_alike() {
        let m = square(4);
        let lumped = assemble_scalar_operators(&m, MassKind::Lumped).unwrap();
        let cons = assemble_scalar_operators(&m, MassKind::Consistent).unwrap();
        let one = vec![1.0; m.vertex_count()];
        let a = sparse::bilinear(&lumped.mass, &one, &one);
        let b = sparse::bilinear(&cons.mass, &one, &one);
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
        let perimeter: f64 = lumped.boundary_length.iter().sum();
        assert!((perimeter - 4.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn linear_functions_have_exact_dirichlet_energy(a in -3.0f64..3.0, b in -3.0f64..3.0, jitter in 0.0f64..0.15) {
            // Perturbed flat grid: uᵀKu = |∇u|² · area for linear u.
            let base = square(5);
            let verts: Vec<Point3> = base.vertices().iter().enumerate().map(|(i, p)| {
                let interior = p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
                let s = if interior { jitter * 0.2 * ((i * 7 % 5) as f64 / 5.0 - 0.4) } else { 0.0 };
                Point3::new(p.x + s, p.y - s, 0.0)
            }).collect();
            let m = SurfaceMesh::new(verts, base.triangles().to_vec()).unwrap();
            let ops = assemble_scalar_operators(&m, MassKind::Lumped).unwrap();
            let u: Vec<f64> = m.vertices().iter().map(|p| a * p.x + b * p.y).collect();
            let e = sparse::bilinear(&ops.stiffness, &u, &u);
            prop_assert!((e - (a * a + b * b)).abs() < 1e-12 * (1.0 + a * a + b * b));
        }
    }

    #[test]
    fn flat_disk_has_vanishing_estimated_shape() {
        let (m, _) = make_surface(SurfaceKind::Disk, 4).unwrap();
        let s = shape_field(&m, None).unwrap();
        assert!(s.shape.iter().all(|x| x.norm() < 1e-10));
        assert!(s.normals.iter().all(|n| (n - Point3::z()).norm() < 1e-14));
        assert!(dihedral_a2(&m).iter().all(|&x| x < 1e-20));
    }

    #[test]
    fn analytic_shape_field_reproduces_exact_a2() {
        let (m, a) = make_surface(SurfaceKind::Catenoid, 4).unwrap();
        let a = a.unwrap();
        let s = shape_field(&m, Some(&a)).unwrap();
        for (v, p) in m.vertices().iter().enumerate() {
            assert!((s.a2[v] - a.frame_at(p).a2).abs() < 1e-12);
            assert!((s.a2[v] - s.shape[v].norm_squared()).abs() < 1e-12 * s.a2[v]);
            assert!(s.shape_ambient(v) * s.normals[v] == Point3::zeros() || (s.shape_ambient(v) * s.normals[v]).norm() < 1e-14);
        }
    }

    #[test]
    fn estimated_a2_improves_under_refinement() {
        let (m0, a) = make_surface(SurfaceKind::Catenoid, 6).unwrap();
        let a = a.unwrap();
        let m1 = crate::mesh::refine(&m0, Some(&a)).unwrap();
        let err = |m: &SurfaceMesh| {
            let s = shape_field(m, None).unwrap();
            let strip = m.connectivity().boundary_strip(1);
            (0..m.vertex_count())
                .filter(|&v| !strip[v])
                .map(|v| (s.a2[v] - a.frame_at(&m.position(v)).a2).abs() / a.frame_at(&m.position(v)).a2)
                .fold(0.0, f64::max)
        };
        let (e0, e1) = (err(&m0), err(&m1));
        assert!(e1 < 0.7 * e0, "{e0} -> {e1}");
        let d = dihedral_a2(&m1);
        let exact: f64 = a.frame_at(&m1.position(m1.vertex_count() / 2)).a2;
        assert!((d[m1.vertex_count() / 2] - exact).abs() < 0.2 * exact);
    }

    #[test]
    fn steklov_residual_separates_minimal_from_synthetic() {
        let (d, _) = make_surface(SurfaceKind::Disk, 4).unwrap();
        assert!(steklov_residual(&d).max < 1e-12);
        let (c0, a) = make_surface(SurfaceKind::Catenoid, 6).unwrap();
        let c1 = crate::mesh::refine(&c0, a.as_ref().map(|s| s as &dyn crate::mesh::Projector)).unwrap();
        let (r0, r1) = (steklov_residual(&c0).max, steklov_residual(&c1).max);
        assert!(r1 < 0.6 * r0, "{r0} -> {r1}");
        let (s, _) = make_surface(SurfaceKind::Synthetic { genus: 0, boundaries: 1 }, 4).unwrap();
        assert!(steklov_residual(&s).max > 0.1);
    }

    #[test]
    fn patch_fit_reproduces_quadratics() {
        let (m, a) = make_surface(SurfaceKind::Disk, 5).unwrap();
        let s = shape_field(&m, a.as_ref()).unwrap();
        let conn = m.connectivity();
        let f = |p: &Point3| 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.x + 3.0 * p.x * p.y;
        let fit = PatchFit::new(&m, &conn, &s.frames, PatchSamples::Vertices, 1).unwrap();
        let vals: Vec<f64> = m.vertices().iter().map(f).collect();
        for (v, g) in fit.gradient(&vals).iter().enumerate() {
            let p = m.position(v);
            let exact = Point3::new(2.0 + p.x + 3.0 * p.y, -1.0 + 3.0 * p.x, 0.0);
            assert!((g - exact).norm() < 1e-10);
        }
        let ffit = PatchFit::new(&m, &conn, &s.frames, PatchSamples::Faces, 1).unwrap();
        let fvals: Vec<f64> = (0..m.triangle_count()).map(|t| f(&m.barycenter(t))).collect();
        for (v, val) in ffit.value(&fvals).iter().enumerate() {
            assert!((val - f(&m.position(v))).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_ball_is_convex() {
        let b = BodyModel::unit_ball();
        assert_eq!(b.h(&Point3::x(), &Point3::y()), -1.0);
        assert!(b.h(&Point3::x(), &(0.5 * Point3::z())) < 0.0);
    }
}
