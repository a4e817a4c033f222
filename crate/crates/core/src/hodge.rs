//! The Hodge Laplacian on 1-forms with absolute or relative boundary
//! conditions.
//!
//! One-forms are edge cochains in the lexicographic edge order of
//! [`Connectivity`], each edge oriented from its lower to its higher vertex.
//! The operator is the Whitney (lowest-order edge element) Galerkin form of
//! `dδ + δd` in mixed form, with the auxiliary 0-form `σ = δω` eliminated
//! through the lumped vertex mass:
//!
//! ```text
//! A = M₁ D₀ M₀⁻¹ D₀ᵀ M₁ + D₁ᵀ M₂ D₁,   B = M₁.
//! ```
//!
//! Absolute conditions are natural. Relative conditions drop boundary edges
//! and boundary vertices of `σ`. Since `D₀ᵀ M₁ D₀` is exactly the cotangent
//! stiffness, exact forms `D₀f` reproduce the scalar Neumann spectrum
//! of `(K, M₀)` without discretization error between the two.

use std::fmt::Write as _;

use crate::error::SpectralError;
use crate::geometry::{assemble_scalar_operators, DofMap, MassKind, OperatorPair};
use crate::linalg::{self, EigenOptions, SpectralResult};
use crate::mesh::build_topology;
use crate::mesh::{boundary_loops, Connectivity, Point3, SurfaceMesh};
use crate::sparse::{self, SparseMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Absolute,
    Relative,
}

#[derive(Debug, Clone)]
pub struct HodgeProblem {
    pub bc: BoundaryCondition,
    /// On the retained edges (`pair.dofs`).
    pub pair: OperatorPair,
    /// Vertices → edges, all edges and vertices.
    pub d0: SparseMat,
    /// Edges → triangles.
    pub d1: SparseMat,
    /// Lumped vertex areas.
    pub m0: Vec<f64>,
    /// Whitney edge mass.
    pub m1: SparseMat,
    /// `1/area` per triangle.
    pub m2: Vec<f64>,
    pub edge_dofs: Vec<usize>,
    pub vertex_dofs: Vec<usize>,
}

/// Barycentric gradients of a triangle, `∇λᵢ = N × (p_{i+2} − p_{i+1}) / 2|T|`.
pub fn barycentric_gradients(p: &[Point3; 3]) -> [Point3; 3] {
    let area_vec = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let two_area = area_vec.norm();
    let n = area_vec / two_area;
    std::array::from_fn(|i| n.cross(&(p[(i + 2) % 3] - p[(i + 1) % 3])) / two_area)
}

/// Local directed sides `v0→v1, v1→v2, v2→v0`, matching `face_edges`.
const SIDES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// `∫_T W_s · W_t` for the local Whitney forms of directed sides.
fn local_whitney_mass(g: &[Point3; 3], area: f64) -> [[f64; 3]; 3] {
    let m = |i: usize, j: usize| area * if i == j { 2.0 } else { 1.0 } / 12.0;
    let mut out = [[0.0; 3]; 3];
    for (s, &(i, j)) in SIDES.iter().enumerate() {
        for (t, &(k, l)) in SIDES.iter().enumerate() {
            out[s][t] = m(i, k) * g[j].dot(&g[l]) - m(i, l) * g[j].dot(&g[k]) - m(j, k) * g[i].dot(&g[l])
                + m(j, l) * g[i].dot(&g[k]);
        }
    }
    out
}

pub fn incidence_d0(conn: &Connectivity, vertex_count: usize) -> SparseMat {
    let t: Vec<_> = conn.edges.iter().enumerate().flat_map(|(e, &[a, b])| [(e, a, -1.0), (e, b, 1.0)]).collect();
    sparse::from_triplets(conn.edge_count(), vertex_count, &t)
}

pub fn incidence_d1(conn: &Connectivity) -> SparseMat {
    let t: Vec<_> =
        conn.face_edges.iter().enumerate().flat_map(|(f, fe)| fe.iter().map(move |&(e, s)| (f, e, s))).collect();
    sparse::from_triplets(conn.face_edges.len(), conn.edge_count(), &t)
}

pub fn whitney_mass(mesh: &SurfaceMesh, conn: &Connectivity) -> SparseMat {
    let mut t = Vec::with_capacity(9 * mesh.triangle_count());
    for f in 0..mesh.triangle_count() {
        let g = barycentric_gradients(&mesh.corners(f));
        let local = local_whitney_mass(&g, mesh.face_area(f));
        let fe = conn.face_edges[f];
        for s in 0..3 {
            for r in 0..3 {
                t.push((fe[s].0, fe[r].0, fe[s].1 * fe[r].1 * local[s][r]));
            }
        }
    }
    sparse::from_triplets(conn.edge_count(), conn.edge_count(), &t)
}

pub fn assemble_one_form_laplacian(mesh: &SurfaceMesh, bc: BoundaryCondition) -> Result<HodgeProblem, SpectralError> {
    let topo = build_topology(mesh)?;
    debug_assert!(topo.e_count > 0);
    let conn = mesh.connectivity();
    let scalar = assemble_scalar_operators(mesh, MassKind::Lumped)?;
    let d0 = incidence_d0(&conn, mesh.vertex_count());
    let d1 = incidence_d1(&conn);
    let m1 = whitney_mass(mesh, &conn);
    let m0 = scalar.vertex_area;
    let m2: Vec<f64> = (0..mesh.triangle_count()).map(|f| 1.0 / mesh.face_area(f)).collect();

    let (edge_dofs, vertex_dofs): (Vec<usize>, Vec<usize>) = match bc {
        BoundaryCondition::Absolute => ((0..conn.edge_count()).collect(), (0..mesh.vertex_count()).collect()),
        BoundaryCondition::Relative => (
            (0..conn.edge_count()).filter(|&e| !conn.is_boundary_edge[e]).collect(),
            conn.interior_vertex_indices(),
        ),
    };
    let all_faces: Vec<usize> = (0..mesh.triangle_count()).collect();
    let m1r = sparse::select(&m1, &edge_dofs, &edge_dofs);
    let d0r = sparse::select(&d0, &edge_dofs, &vertex_dofs);
    let d1r = sparse::select(&d1, &all_faces, &edge_dofs);
    let inv_m0: Vec<f64> = vertex_dofs.iter().map(|&v| 1.0 / m0[v]).collect();

    // δ-part: (M₁D₀) M₀⁻¹ (M₁D₀)ᵀ.
    let g = sparse::product(&m1r, &d0r);
    let gs = sparse::product(&g, &sparse::diagonal(&inv_m0));
    let grad_part = sparse::product(&gs, &sparse::transpose(&g));
    let curl_part = sparse::product(&sparse::transpose(&d1r), &sparse::product(&sparse::diagonal(&m2), &d1r));
    let a = sparse::axpby(1.0, &grad_part, 1.0, &curl_part);
    let a = sparse::axpby(0.5, &a, 0.5, &sparse::transpose(&a));
    let dofs = match bc {
        BoundaryCondition::Absolute => DofMap::Edges,
        BoundaryCondition::Relative => DofMap::EdgeSubset(edge_dofs.clone()),
    };
    Ok(HodgeProblem { bc, pair: OperatorPair { a, b: m1r, dofs }, d0, d1, m0, m1, m2, edge_dofs, vertex_dofs })
}

impl HodgeProblem {
    /// Full edge cochain from a vector on the retained edges.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.pair.dofs.expand(x, self.d0.nrows())
    }

    /// `‖ω‖²` in the Whitney inner product (full edge cochain).
    pub fn norm2(&self, omega: &[f64]) -> f64 {
        sparse::bilinear(&self.m1, omega, omega)
    }

    /// `ωᵀ A ω / ωᵀ M₁ ω` for a full edge cochain.
    pub fn rayleigh(&self, omega: &[f64]) -> f64 {
        let x: Vec<f64> = self.edge_dofs.iter().map(|&e| omega[e]).collect();
        sparse::bilinear(&self.pair.a, &x, &x) / sparse::bilinear(&self.pair.b, &x, &x)
    }
}

/// The `count` lowest eigenpairs; eigenvectors are returned as full edge
/// cochains (zeros on dropped boundary edges).
pub fn eigen_one_form(problem: &HodgeProblem, count: usize, opts: &EigenOptions) -> Result<SpectralResult, SpectralError> {
    let (vals, vecs, res) = linalg::smallest_eigenpairs(&problem.pair.a, &problem.pair.b, count, opts)?;
    let vecs = vecs.iter().map(|x| problem.expand(x)).collect();
    Ok(SpectralResult::new(vals, vecs, res, None))
}

/// Kernel size with the spectral gap that separates it from the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Betti {
    pub betti: usize,
    /// `λ_{β+1} / max(|λ_β|, tiny)`; infinite when the kernel is empty.
    pub gap_ratio: f64,
    pub eigenvalues: Vec<f64>,
}

pub const KERNEL_REL_TOL: f64 = 1e-6;
pub const KERNEL_GAP: f64 = 10.0;

/// Dimension of the numerical kernel of `Δ₁`, requesting more eigenvalues
/// until the spectrum leaves the kernel.
pub fn betti_one(mesh: &SurfaceMesh, bc: BoundaryCondition, opts: &EigenOptions) -> Result<Betti, SpectralError> {
    let problem = assemble_one_form_laplacian(mesh, bc)?;
    betti_of(&problem, opts)
}

pub fn betti_of(problem: &HodgeProblem, opts: &EigenOptions) -> Result<Betti, SpectralError> {
    let n = problem.pair.a.nrows();
    if n == 0 {
        return Ok(Betti { betti: 0, gap_ratio: f64::INFINITY, eigenvalues: vec![] });
    }
    let mut count = n.min(12);
    loop {
        let (vals, _, _) = linalg::smallest_eigenpairs(&problem.pair.a, &problem.pair.b, count, opts)?;
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = KERNEL_REL_TOL * top;
        let k = vals.iter().take_while(|v| **v <= tol).count();
        if k == count && count < n {
            count = n.min(2 * count);
            continue;
        }
        let gap_ratio = match (k, vals.get(k)) {
            (0, _) | (_, None) => f64::INFINITY,
            (k, Some(&next)) => next / vals[k - 1].abs().max(f64::MIN_POSITIVE),
        };
        if gap_ratio < KERNEL_GAP {
            return Err(SpectralError::AmbiguousKernel { ratio: gap_ratio });
        }
        return Ok(Betti { betti: k, gap_ratio, eigenvalues: vals });
    }
}

/// The absolute spectrum assembled from scalar problems: nonzero Neumann
/// eigenvalues of `(K, M)`, Dirichlet eigenvalues of the interior block, and
/// `2g+k−1` zeros. The lowest `count` values are returned.
pub fn spectrum_via_scalar_reduction(mesh: &SurfaceMesh, count: usize, opts: &EigenOptions) -> Result<Vec<f64>, SpectralError> {
    let topo = build_topology(mesh)?;
    let scalar = assemble_scalar_operators(mesh, MassKind::Lumped)?;
    let n = mesh.vertex_count();
    let (neu, _, _) = linalg::smallest_eigenpairs(&scalar.stiffness, &scalar.mass, (count + 1).min(n), opts)?;
    let mut out: Vec<f64> = neu.into_iter().skip(1).collect();
    let interior = mesh.connectivity().interior_vertex_indices();
    if !interior.is_empty() && topo.boundary_components > 0 {
        let k = sparse::select(&scalar.stiffness, &interior, &interior);
        let m = sparse::select(&scalar.mass, &interior, &interior);
        let (dir, _, _) = linalg::smallest_eigenpairs(&k, &m, count.min(interior.len()), opts)?;
        out.extend(dir);
    } else if topo.boundary_components == 0 {
        // Closed surface: co-exact forms ⋆dg pair with the nonzero Neumann
        // spectrum a second time.
        out.extend(out.clone());
    }
    out.extend(std::iter::repeat_n(0.0, topo.first_betti()));
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    Ok(out)
}

/// `k−1` exact harmonic forms with vanishing tangential boundary part: the
/// differentials of harmonic functions equal to `+1` on boundary loop `a`,
/// `−1` on the last loop and `0` on the others.
pub fn dirichlet_exact_basis(mesh: &SurfaceMesh) -> Result<Vec<Vec<f64>>, SpectralError> {
    let loops = boundary_loops(mesh)?;
    if loops.len() < 2 {
        return Ok(Vec::new());
    }
    let conn = mesh.connectivity();
    let scalar = assemble_scalar_operators(mesh, MassKind::Lumped)?;
    let interior = conn.interior_vertex_indices();
    let boundary: Vec<usize> = (0..mesh.vertex_count()).filter(|&v| conn.is_boundary_vertex[v]).collect();
    let k_ii = sparse::select(&scalar.stiffness, &interior, &interior);
    let k_ib = sparse::select(&scalar.stiffness, &interior, &boundary);
    let last = loops.len() - 1;
    let mut boundary_values = Vec::new();
    for a in 0..last {
        let mut u = vec![0.0; mesh.vertex_count()];
        for &v in &loops[a] {
            u[v] = 1.0;
        }
        for &v in &loops[last] {
            u[v] = -1.0;
        }
        boundary_values.push(u);
    }
    let rhs: Vec<Vec<f64>> = boundary_values
        .iter()
        .map(|u| {
            let ub: Vec<f64> = boundary.iter().map(|&v| u[v]).collect();
            sparse::matvec(&k_ib, &ub).into_iter().map(|x| -x).collect()
        })
        .collect();
    let sol = if interior.is_empty() { vec![vec![]; rhs.len()] } else { linalg::solve_spd(&k_ii, &rhs)? };
    let d0 = incidence_d0(&conn, mesh.vertex_count());
    Ok(boundary_values
        .into_iter()
        .zip(sol)
        .map(|(mut u, ui)| {
            for (&v, x) in interior.iter().zip(ui) {
                u[v] = x;
            }
            sparse::matvec(&d0, &u)
        })
        .collect())
}

/// The Whitney interpolant of a 1-form on one triangle.
#[derive(Debug, Clone, Copy)]
pub struct FaceWhitney {
    /// Values on the directed sides `v0→v1, v1→v2, v2→v0`.
    pub side_values: [f64; 3],
    pub gradients: [Point3; 3],
}

impl FaceWhitney {
    /// `ξ` at barycentric coordinates `l`.
    pub fn value(&self, l: [f64; 3]) -> Point3 {
        let g = &self.gradients;
        SIDES
            .iter()
            .zip(self.side_values)
            .fold(Point3::zeros(), |acc, (&(i, j), c)| acc + c * (l[i] * g[j] - l[j] * g[i]))
    }

    pub fn at_barycenter(&self) -> Point3 {
        self.value([1.0 / 3.0; 3])
    }

    /// Value at local corner `c`.
    pub fn at_corner(&self, c: usize) -> Point3 {
        let mut l = [0.0; 3];
        l[c] = 1.0;
        self.value(l)
    }
}

/// Per-triangle vector fields dual to `ω` via Whitney interpolation.
pub fn sharp(mesh: &SurfaceMesh, conn: &Connectivity, omega: &[f64]) -> Vec<FaceWhitney> {
    (0..mesh.triangle_count())
        .map(|f| {
            let fe = conn.face_edges[f];
            FaceWhitney {
                side_values: std::array::from_fn(|s| fe[s].1 * omega[fe[s].0]),
                gradients: barycentric_gradients(&mesh.corners(f)),
            }
        })
        .collect()
}

/// Vertex values of the Whitney field: area-weighted mean of the corner
/// values of incident faces, projected onto the plane orthogonal to `normals`.
pub fn vertex_field(mesh: &SurfaceMesh, conn: &Connectivity, omega: &[f64], normals: &[Point3]) -> Vec<Point3> {
    let faces = sharp(mesh, conn, omega);
    let mut acc = vec![Point3::zeros(); mesh.vertex_count()];
    let mut w = vec![0.0; mesh.vertex_count()];
    for (f, t) in mesh.triangles().iter().enumerate() {
        let a = mesh.face_area(f);
        for (c, &v) in t.iter().enumerate() {
            acc[v] += a * faces[f].at_corner(c);
            w[v] += a;
        }
    }
    acc.iter()
        .zip(&w)
        .zip(normals)
        .map(|((x, &w), n)| {
            let x = x / w;
            x - n * n.dot(&x)
        })
        .collect()
}

/// A tangent field and its first derivatives at a vertex, recovered from a
/// 1-form.
#[derive(Debug, Clone, Copy)]
pub struct RecoveredField {
    pub value: Point3,
    /// `∂ξ/∂u`, `∂ξ/∂w` along the two frame directions.
    pub derivatives: [Point3; 2],
    pub frame: [Point3; 2],
}

impl RecoveredField {
    /// `D_X ξ` for a tangent direction `X`.
    pub fn derivative(&self, x: &Point3) -> Point3 {
        self.derivatives[0] * x.dot(&self.frame[0]) + self.derivatives[1] * x.dot(&self.frame[1])
    }
}

/// Least-squares fit of a quadratic tangent field to the edge integrals of a
/// 1-form over a vertex patch, in the tangent plane of the vertex. Line
/// integrals of a quadratic along a straight edge are exact by Simpson's rule.
#[derive(Debug, Clone)]
pub struct FieldRecovery {
    frames: Vec<[Point3; 2]>,
    scale: Vec<f64>,
    edges: Vec<Vec<usize>>,
    pinv: Vec<nalgebra::DMatrix<f64>>,
}

impl FieldRecovery {
    pub fn new(mesh: &SurfaceMesh, conn: &Connectivity, frames: &[[Point3; 2]], rings: usize) -> Result<Self, SpectralError> {
        let mono = |u: f64, w: f64| [1.0, u, w, u * u, u * w, w * w];
        let mut out = FieldRecovery { frames: frames.to_vec(), scale: vec![], edges: vec![], pinv: vec![] };
        for v in 0..mesh.vertex_count() {
            let o = mesh.position(v);
            let [e1, e2] = frames[v];
            let mut done = false;
            for r in rings..rings + 4 {
                let mut inside = vec![false; mesh.vertex_count()];
                let ring = conn.k_ring(v, r);
                for &w in &ring {
                    inside[w] = true;
                }
                let ids: Vec<usize> = ring
                    .iter()
                    .flat_map(|&w| conn.vertex_neighbors[w].iter().map(move |&x| (w, x)))
                    .filter(|&(a, b)| a < b && inside[b])
                    .map(|(a, b)| conn.edge_index(a, b).expect("neighbors share an edge"))
                    .collect();
                if ids.len() < 18 {
                    continue;
                }
                let h = ring.iter().map(|&w| (mesh.position(w) - o).norm()).fold(0.0, f64::max);
                let local = |p: Point3| ((p - o).dot(&e1) / h, (p - o).dot(&e2) / h);
                let a = nalgebra::DMatrix::from_fn(ids.len(), 12, |row, col| {
                    let [pa, pb] = conn.edges[ids[row]];
                    let (ua, wa) = local(mesh.position(pa));
                    let (ub, wb) = local(mesh.position(pb));
                    let (k, comp) = (col % 6, col / 6);
                    let simpson =
                        (mono(ua, wa)[k] + 4.0 * mono(0.5 * (ua + ub), 0.5 * (wa + wb))[k] + mono(ub, wb)[k]) / 6.0;
                    simpson * if comp == 0 { ub - ua } else { wb - wa } * h
                });
                let svd = a.svd(true, true);
                let (smin, smax) = (svd.singular_values.min(), svd.singular_values.max());
                if smin < 1e-6 * smax {
                    continue;
                }
                out.pinv.push(svd.pseudo_inverse(0.0).expect("full rank"));
                out.edges.push(ids);
                out.scale.push(h);
                done = true;
                break;
            }
            if !done {
                return Err(SpectralError::Geometry(crate::error::GeometryError::IllConditionedStar { vertex: v }));
            }
        }
        Ok(out)
    }

    pub fn fit_at(&self, v: usize, omega: &[f64]) -> RecoveredField {
        let y = nalgebra::DVector::from_iterator(self.edges[v].len(), self.edges[v].iter().map(|&e| omega[e]));
        let c = &self.pinv[v] * y;
        let [e1, e2] = self.frames[v];
        let h = self.scale[v];
        let vec = |k: usize| e1 * c[k] + e2 * c[6 + k];
        RecoveredField { value: vec(0), derivatives: [vec(1) / h, vec(2) / h], frame: self.frames[v] }
    }

    pub fn fit(&self, omega: &[f64]) -> Vec<RecoveredField> {
        (0..self.edges.len()).map(|v| self.fit_at(v, omega)).collect()
    }
}

/// Edge cochain of `df` for a vertex function `f`.
pub fn exterior_derivative(conn: &Connectivity, f: &[f64]) -> Vec<f64> {
    conn.edges.iter().map(|&[a, b]| f[b] - f[a]).collect()
}

/// Edge-indexed CSV: `edge,v0,v1,omega1,...`, one row per edge in OFF edge
/// order.
pub fn one_forms_csv(conn: &Connectivity, forms: &[Vec<f64>]) -> String {
    let mut s = String::from("edge,v0,v1");
    for k in 0..forms.len() {
        write!(s, ",omega{}", k + 1).unwrap();
    }
    s.push('\n');
    for (e, &[a, b]) in conn.edges.iter().enumerate() {
        write!(s, "{e},{a},{b}").unwrap();
        for w in forms {
            write!(s, ",{:.15e}", w[e]).unwrap();
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures;
    use crate::reference;
    use crate::surfaces::{make_surface, SurfaceKind};

    fn octahedron() -> SurfaceMesh {
        let v = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, -1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
        ];
        let t = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
        SurfaceMesh::new(v, t).unwrap()
    }

    #[test]
    fn chain_complex_and_gradient_mass() {
        let m = fixtures::annulus(3, 12);
        let conn = m.connectivity();
        let d0 = incidence_d0(&conn, m.vertex_count());
        let d1 = incidence_d1(&conn);
        let dd = sparse::product(&d1, &d0);
        assert!(dd.val().iter().all(|v| *v == 0.0));
        // Whitney mass of gradients is the cotangent stiffness.
        let k = assemble_scalar_operators(&m, MassKind::Lumped).unwrap().stiffness;
        let g = sparse::product(&sparse::transpose(&d0), &sparse::product(&whitney_mass(&m, &conn), &d0));
        let diff = sparse::axpby(1.0, &g, -1.0, &k);
        assert!(diff.val().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradients_of_reference_triangle() {
        let p = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        let g = barycentric_gradients(&p);
        assert_eq!(g[0], Point3::new(-1.0, -1.0, 0.0));
        assert_eq!(g[1], Point3::new(1.0, 0.0, 0.0));
        assert_eq!(g[2], Point3::new(0.0, 1.0, 0.0));
    }

    /// Gauss-Legendre line integral of the Whitney field along each side, and
    /// the L² norm by the edge-midpoint rule (exact for quadratics).
    #[test]
    fn sharp_reproduces_pairings_and_norm() {
        let m = fixtures::annulus(2, 10);
        let conn = m.connectivity();
        let omega: Vec<f64> = (0..conn.edge_count()).map(|e| ((e * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let faces = sharp(&m, &conn, &omega);
        let gl = [(0.5 - 0.5 / 3f64.sqrt(), 0.5), (0.5 + 0.5 / 3f64.sqrt(), 0.5)];
        let mut l2 = 0.0;
        for (f, fw) in faces.iter().enumerate() {
            let p = m.corners(f);
            for (s, &(i, j)) in SIDES.iter().enumerate() {
                let mut integral = 0.0;
                for &(t, w) in &gl {
                    let mut l = [0.0; 3];
                    l[i] = 1.0 - t;
                    l[j] = t;
                    integral += w * fw.value(l).dot(&(p[j] - p[i]));
                }
                assert!((integral - fw.side_values[s]).abs() < 1e-12);
            }
            let mids = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
            l2 += m.face_area(f) / 3.0 * mids.iter().map(|&l| fw.value(l).norm_squared()).sum::<f64>();
        }
        let m1 = whitney_mass(&m, &conn);
        assert!((l2 - sparse::bilinear(&m1, &omega, &omega)).abs() < 1e-10 * l2);
    }

    #[test]
    fn sharp_of_linear_differential_is_gradient() {
        let m = fixtures::square(4);
        let conn = m.connectivity();
        let f: Vec<f64> = m.vertices().iter().map(|p| 2.0 * p.x - 0.5 * p.y + 1.0).collect();
        let omega = exterior_derivative(&conn, &f);
        for fw in sharp(&m, &conn, &omega) {
            for l in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]] {
                assert!((fw.value(l) - Point3::new(2.0, -0.5, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kernels_match_topology() {
        let opts = EigenOptions::default();
        let disk = make_surface(SurfaceKind::Disk, 4).unwrap().0;
        let annulus = fixtures::annulus(3, 16);
        for (m, beta) in [(&disk, 0), (&annulus, 1)] {
            for bc in [BoundaryCondition::Absolute, BoundaryCondition::Relative] {
                let b = betti_one(m, bc, &opts).unwrap();
                assert_eq!(b.betti, beta, "{bc:?}");
                assert!(b.eigenvalues.iter().all(|&l| l > -1e-9));
            }
        }
    }

    #[test]
    fn closed_surface_ignores_boundary_condition() {
        let m = octahedron();
        let opts = EigenOptions::default();
        let a = eigen_one_form(&assemble_one_form_laplacian(&m, BoundaryCondition::Absolute).unwrap(), 6, &opts).unwrap();
        let r = eigen_one_form(&assemble_one_form_laplacian(&m, BoundaryCondition::Relative).unwrap(), 6, &opts).unwrap();
        assert_eq!(a.eigenvalues, r.eigenvalues);
        assert_eq!(betti_one(&m, BoundaryCondition::Absolute, &opts).unwrap().betti, 0);
    }

    #[test]
    fn disk_spectrum_matches_bessel_and_scalar_reduction() {
        let (mut m, a) = make_surface(SurfaceKind::Disk, 4).unwrap();
        m = crate::mesh::refine(&m, a.as_ref().map(|x| x as &dyn crate::mesh::Projector)).unwrap();
        let opts = EigenOptions::default();
        let p = assemble_one_form_laplacian(&m, BoundaryCondition::Absolute).unwrap();
        let r = eigen_one_form(&p, 6, &opts).unwrap();
        let exact = reference::j1_prime_first_zero().powi(2);
        assert!((r.eigenvalues[0] - exact).abs() < 0.02 * exact, "{:?}", r.eigenvalues);
        let s = spectrum_via_scalar_reduction(&m, 6, &opts).unwrap();
        // Exact forms agree to solver precision.
        assert!((r.eigenvalues[0] - s[0]).abs() < 1e-8 * s[0]);
        assert!((s[2] - reference::j0_first_zero().powi(2)).abs() < 0.03 * s[2]);
    }

    #[test]
    fn exact_dirichlet_basis_is_relative_harmonic() {
        let m = fixtures::annulus(3, 14);
        let conn = m.connectivity();
        let basis = dirichlet_exact_basis(&m).unwrap();
        assert_eq!(basis.len(), 1);
        let p = assemble_one_form_laplacian(&m, BoundaryCondition::Relative).unwrap();
        for w in &basis {
            for e in conn.boundary_edge_indices() {
                assert!(w[e].abs() < 1e-13);
            }
            assert!(p.rayleigh(w) < 1e-10);
        }
        let disk = make_surface(SurfaceKind::Disk, 4).unwrap().0;
        assert!(dirichlet_exact_basis(&disk).unwrap().is_empty());
    }

    #[test]
    fn three_boundary_loops_give_two_independent_forms() {
        let m = make_surface(SurfaceKind::Synthetic { genus: 0, boundaries: 3 }, 6).unwrap().0;
        let conn = m.connectivity();
        let basis = dirichlet_exact_basis(&m).unwrap();
        assert_eq!(basis.len(), 2);
        let m1 = whitney_mass(&m, &conn);
        let g = |a: &[f64], b: &[f64]| sparse::bilinear(&m1, a, b);
        let (a, b) = (&basis[0], &basis[1]);
        let det = g(a, a) * g(b, b) - g(a, b).powi(2);
        assert!(det > 1e-3 * g(a, a) * g(b, b));
    }

    #[test]
    fn recovery_reproduces_quadratic_fields() {
        let m = fixtures::square(6);
        let conn = m.connectivity();
        let frames = vec![[Point3::x(), Point3::y()]; m.vertex_count()];
        let rec = FieldRecovery::new(&m, &conn, &frames, 1).unwrap();
        // ξ = ∇(x²y + y³/3 − x) sampled as exact edge integrals of the potential.
        let pot: Vec<f64> = m.vertices().iter().map(|p| p.x * p.x * p.y + p.y.powi(3) / 3.0 - p.x).collect();
        let omega = exterior_derivative(&conn, &pot);
        for v in [0, 10, 24, 48] {
            let p = m.position(v);
            let f = rec.fit_at(v, &omega);
            let exact = Point3::new(2.0 * p.x * p.y - 1.0, p.x * p.x + p.y * p.y, 0.0);
            assert!((f.value - exact).norm() < 1e-10, "{v}");
            let dx = Point3::new(2.0 * p.y, 2.0 * p.x, 0.0);
            assert!((f.derivative(&Point3::x()) - dx).norm() < 1e-9);
        }
    }

    #[test]
    fn edge_csv_layout() {
        let m = fixtures::square(1);
        let conn = m.connectivity();
        let csv = one_forms_csv(&conn, &[vec![1.0; conn.edge_count()]]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("edge,v0,v1,omega1"));
        assert!(lines.next().unwrap().starts_with("0,0,1,"));
    }
}
