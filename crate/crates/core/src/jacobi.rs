//! The Jacobi (stability) form `Q(u) = ∫|∇u|² − ‖A‖²u² + ∫_∂ h(N,N) u²`,
//! its spectrum over the `L²` norm, and the Morse index.

use std::fmt::Write as _;

use crate::error::SpectralError;
use crate::geometry::{assemble_scalar_operators, BodyModel, DofMap, MassKind, OperatorPair, ScalarOperators, ShapeField};
use crate::linalg::{self, EigenOptions, SpectralResult};
use crate::mesh::{Point3, SurfaceMesh};
use nalgebra::{DMatrix, DVector};
use crate::sparse::{self, SparseMat};

#[derive(Debug, Clone)]
pub struct JacobiProblem {
    /// `A = K − M_{A2} + M_∂h`, `B = M`.
    pub pair: OperatorPair,
    pub scalar: ScalarOperators,
    pub shape: ShapeField,
    pub body: BodyModel,
    /// `h(N, N)` per vertex (used on boundary vertices only).
    pub h_nn: Vec<f64>,
}

pub fn assemble_jacobi(mesh: &SurfaceMesh, shape: &ShapeField, body: BodyModel) -> Result<JacobiProblem, SpectralError> {
    assemble_jacobi_with(mesh, shape, body, MassKind::Lumped)
}

pub fn assemble_jacobi_with(
    mesh: &SurfaceMesh,
    shape: &ShapeField,
    body: BodyModel,
    mass: MassKind,
) -> Result<JacobiProblem, SpectralError> {
    let n = mesh.vertex_count();
    if shape.len() != n {
        return Err(SpectralError::Dimension(format!("shape field has {} vertices, mesh has {n}", shape.len())));
    }
    let scalar = assemble_scalar_operators(mesh, mass)?;
    let h_nn: Vec<f64> = (0..n).map(|v| body.h(&mesh.position(v), &shape.normals[v])).collect();
    let potential: Vec<f64> = (0..n).map(|v| shape.a2[v] * scalar.vertex_area[v]).collect();
    let robin: Vec<f64> = (0..n).map(|v| h_nn[v] * scalar.boundary_length[v]).collect();
    let diag: Vec<f64> = potential.iter().zip(&robin).map(|(p, r)| r - p).collect();
    let a = sparse::axpby(1.0, &scalar.stiffness, 1.0, &sparse::diagonal(&diag));
    let pair = OperatorPair { a, b: scalar.mass.clone(), dofs: DofMap::Vertices };
    Ok(JacobiProblem { pair, scalar, shape: shape.clone(), body, h_nn })
}

impl JacobiProblem {
    /// `Q(u) = uᵀ A u`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        sparse::bilinear(&self.pair.a, u, u)
    }

    /// `Q(u, w)`.
    pub fn bilinear_form(&self, u: &[f64], w: &[f64]) -> f64 {
        sparse::bilinear(&self.pair.a, u, w)
    }

    pub fn mass_norm2(&self, u: &[f64]) -> f64 {
        sparse::bilinear(&self.pair.b, u, u)
    }

    pub fn matrix(&self) -> &SparseMat {
        &self.pair.a
    }
}

/// The `count` lowest Jacobi eigenpairs.
pub fn eigen_jacobi(
    problem: &JacobiProblem,
    count: usize,
    opts: &EigenOptions,
    kernel_tol: Option<f64>,
) -> Result<SpectralResult, SpectralError> {
    let (vals, vecs, res) = linalg::smallest_eigenpairs(&problem.pair.a, &problem.pair.b, count, opts)?;
    Ok(SpectralResult::new(vals, vecs, res, kernel_tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseIndex {
    pub index: usize,
    pub nullity: usize,
    pub kernel_tol: f64,
}

/// Eigenvalues whose magnitude falls in `(tol/10, 10·tol]` cannot be sorted
/// into "zero" or "nonzero" with confidence.
pub const AMBIGUITY_BAND: f64 = 10.0;

/// Number of eigenvalues below `−kernel_tol`.
///
/// Errors when an eigenvalue sits in the ambiguity band around the tolerance,
/// or when the returned spectrum does not reach past zero.
pub fn morse_index(result: &SpectralResult) -> Result<MorseIndex, SpectralError> {
    let tol = result.kernel_tol;
    if let Some(&v) = result.eigenvalues.iter().find(|l| l.abs() > tol / AMBIGUITY_BAND && l.abs() <= tol * AMBIGUITY_BAND) {
        return Err(SpectralError::AmbiguousZero { value: v, tol });
    }
    if result.eigenvalues.last().is_none_or(|&l| l <= tol) {
        return Err(SpectralError::NotEnoughEigenpairs { needed: result.len() + 1, got: result.len() });
    }
    Ok(MorseIndex { index: result.negative, nullity: result.zero, kernel_tol: tol })
}

/// Splits zero from nonzero eigenvalues using two refinement levels.
///
/// The discrete images of exact Jacobi fields move by `O(h²)` between
/// levels, so an eigenvalue of the finer level is treated as zero when its
/// magnitude is within twice its change from the coarser level (or below
/// `floor`). The declared tolerance is the geometric mean of the largest
/// zero and the smallest nonzero magnitude; overlapping classes are
/// reported as ambiguous.
pub fn refinement_kernel_tol(fine: &[f64], coarse: &[f64], floor: f64) -> Result<f64, SpectralError> {
    let mut zero_max = floor;
    let mut nonzero_min = f64::INFINITY;
    for (i, &l) in fine.iter().enumerate() {
        let drift = coarse.get(i).map_or(f64::INFINITY, |c| (l - c).abs());
        if l.abs() <= floor.max(2.0 * drift) {
            zero_max = zero_max.max(l.abs());
        } else {
            nonzero_min = nonzero_min.min(l.abs());
        }
    }
    if zero_max >= nonzero_min {
        return Err(SpectralError::AmbiguousZero { value: nonzero_min, tol: zero_max });
    }
    if nonzero_min.is_infinite() {
        return Ok(zero_max);
    }
    Ok((zero_max.max(1e-300) * nonzero_min).sqrt())
}

/// Coefficients `ω` of a combination of 1-forms whose dual field `ξ` makes
/// every `u = ⟨X_{V,W}, ξ⟩` mass-orthogonal to the given Jacobi
/// eigenfunctions.
#[derive(Debug, Clone)]
pub struct TestForm {
    /// Unit-norm coefficients over the supplied forms.
    pub coefficients: Vec<f64>,
    /// `max |Cω| / ‖C‖` over the constraints (zero when unconstrained).
    pub constraint_residual: f64,
    /// Smallest singular value of the constraint matrix.
    pub sigma_min: f64,
}

/// `u = ⟨X_{eₐ,e_b}, ξ⟩ = Nₐ ξ_b − N_b ξₐ` for the three basis pairs `a < b`.
pub fn pair_functions(xi: &[Point3], normals: &[Point3]) -> [Vec<f64>; 3] {
    [(0, 1), (0, 2), (1, 2)].map(|(a, b)| xi.iter().zip(normals).map(|(x, n)| n[a] * x[b] - n[b] * x[a]).collect())
}

/// Builds the `3(j−1) × m` system `Σ_v M_vv φᵢ(v) u_{pair}^{(k)}(v)` from the
/// vertex fields of `m` forms and the first `j−1` eigenfunctions, and returns
/// a unit null vector. With `m ≥ 3(j−1)+1` the null space is never trivial.
pub fn select_test_form(
    fields: &[Vec<Point3>],
    phis: &[Vec<f64>],
    normals: &[Point3],
    mass: &[f64],
) -> Result<TestForm, SpectralError> {
    let m = fields.len();
    if m == 0 {
        return Err(SpectralError::NotEnoughEigenpairs { needed: 1, got: 0 });
    }
    let rows = 3 * phis.len();
    if rows == 0 {
        let mut coefficients = vec![0.0; m];
        coefficients[0] = 1.0;
        return Ok(TestForm { coefficients, constraint_residual: 0.0, sigma_min: 0.0 });
    }
    let us: Vec<[Vec<f64>; 3]> = fields.iter().map(|xi| pair_functions(xi, normals)).collect();
    // Padded with zero rows to at least m so the SVD exposes the full V.
    let mut c = DMatrix::zeros(rows.max(m), m);
    for (i, phi) in phis.iter().enumerate() {
        for p in 0..3 {
            for (k, u) in us.iter().enumerate() {
                c[(3 * i + p, k)] = phi.iter().zip(&u[p]).zip(mass).map(|((a, b), w)| a * b * w).sum();
            }
        }
    }
    let svd = c.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (kmin, &sigma_min) =
        svd.singular_values.iter().enumerate().min_by(|a: &(usize, &f64), b: &(usize, &f64)| a.1.total_cmp(b.1)).expect("nonempty");
    let sigma_max = svd.singular_values.max();
    if sigma_min > 1e-8 * sigma_max && rows >= m {
        return Err(SpectralError::TrivialNullSpace { sigma_min });
    }
    let coefficients: Vec<f64> = v_t.row(kmin).iter().copied().collect();
    let w = DVector::from_column_slice(&coefficients);
    let cw = &c * &w;
    let constraint_residual = if sigma_max > 0.0 { cw.amax() / sigma_max } else { 0.0 };
    Ok(TestForm { coefficients, constraint_residual, sigma_min })
}

/// Scalar field per vertex aligned with the OFF vertex order: one header
/// line, then one row per vertex with one column per eigenvector.
pub fn eigenvectors_csv(result: &SpectralResult) -> String {
    let mut s = String::from("vertex");
    for k in 0..result.len() {
        write!(s, ",phi{}", k + 1).unwrap();
    }
    s.push('\n');
    let n = result.eigenvectors.first().map_or(0, Vec::len);
    for v in 0..n {
        write!(s, "{v}").unwrap();
        for x in &result.eigenvectors {
            write!(s, ",{:.15e}", x[v]).unwrap();
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shape_field;
    use crate::surfaces::{make_surface, SurfaceKind};

    fn disk(rings: usize) -> (SurfaceMesh, JacobiProblem) {
        let (m, a) = make_surface(SurfaceKind::Disk, rings).unwrap();
        let s = shape_field(&m, a.as_ref()).unwrap();
        let p = assemble_jacobi(&m, &s, BodyModel::unit_ball()).unwrap();
        (m, p)
    }

    #[test]
    fn flat_disk_operator_is_stiffness_minus_boundary_mass() {
        let (_, p) = disk(4);
        let expect = sparse::axpby(1.0, &p.scalar.stiffness, -1.0, &p.scalar.boundary_mass);
        let diff = sparse::axpby(1.0, &p.pair.a, -1.0, &expect);
        assert!(diff.val().iter().all(|v| v.abs() < 1e-15));
        assert!(sparse::symmetry_error(&p.pair.a) < 1e-13);
    }

    #[test]
    fn q_of_one_is_minus_perimeter_on_disk() {
        let (m, p) = disk(8);
        let one = vec![1.0; m.vertex_count()];
        let q = p.quadratic_form(&one);
        let n = 48.0;
        // Inscribed 48-gon perimeter.
        assert!((q + 2.0 * n * (std::f64::consts::PI / n).sin()).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_quotients_match_eigenvalues() {
        let (_, p) = disk(5);
        let r = eigen_jacobi(&p, 6, &EigenOptions::default(), None).unwrap();
        for (l, x) in r.eigenvalues.iter().zip(&r.eigenvectors) {
            let rq = p.quadratic_form(x) / p.mass_norm2(x);
            assert!((rq - l).abs() <= 1e-8 * l.abs().max(1e-8));
        }
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn refinement_tolerance_separates_classes() {
        let tol = refinement_kernel_tol(&[-2.6, -0.002, -0.002, 1.1], &[-2.5, -0.008, -0.008, 1.2], 1e-9).unwrap();
        assert!(tol > 0.002 && tol < 1.1);
        assert!(refinement_kernel_tol(&[-0.3, 0.5], &[-0.1, 0.1], 1e-9).is_ok());
        assert!(refinement_kernel_tol(&[-0.3, 0.2], &[-0.1, 0.19], 1e-9).is_err());
    }

    #[test]
    fn test_form_satisfies_constraints() {
        let normals = vec![Point3::new(0.0, 0.6, 0.8), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.0, 1.0)];
        let f = |s: f64| -> Vec<Point3> { (0..3).map(|v| Point3::new(s + v as f64, 1.0 - s * v as f64, s * s)).collect() };
        let fields: Vec<Vec<Point3>> = [0.1, 0.7, -0.4, 1.3].iter().map(|&s| f(s)).collect();
        let phis = vec![vec![1.0, 2.0, -1.0]];
        let mass = vec![0.5, 1.0, 2.0];
        let t = select_test_form(&fields, &phis, &normals, &mass).unwrap();
        assert!((t.coefficients.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(t.constraint_residual < 1e-10);
        // Direct evaluation of the three constraints.
        let xi: Vec<Point3> =
            (0..3).map(|v| fields.iter().zip(&t.coefficients).map(|(x, c)| x[v] * *c).sum()).collect();
        for u in pair_functions(&xi, &normals) {
            let dot: f64 = (0..3).map(|v| mass[v] * phis[0][v] * u[v]).sum();
            assert!(dot.abs() < 1e-10);
        }
        let t1 = select_test_form(&fields, &[], &normals, &mass).unwrap();
        assert_eq!(t1.coefficients, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ambiguous_zero_is_flagged() {
        let r = SpectralResult::new(vec![-1.0, 2e-3, 1.0], vec![vec![]; 3], vec![0.0; 3], Some(1e-3));
        assert!(matches!(morse_index(&r), Err(SpectralError::AmbiguousZero { .. })));
        let r = SpectralResult::new(vec![-1.0, 1e-6, 1.0], vec![vec![]; 3], vec![0.0; 3], Some(1e-3));
        assert_eq!(morse_index(&r).unwrap(), MorseIndex { index: 1, nullity: 1, kernel_tol: 1e-3 });
    }
}
