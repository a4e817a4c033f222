//! Smallest eigenpairs of symmetric generalized problems `A x = λ B x`.
//!
//! Small problems go through a dense Cholesky reduction. Larger ones use a
//! restarted block Krylov iteration on `(A − σB)⁻¹B`, with `σ` pushed below
//! the spectrum until `A − σB` admits a sparse Cholesky factorization, and
//! Rayleigh-Ritz on `A` over the B-orthonormal basis.

use faer::linalg::solvers::Solve;
use faer::{Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolverError;
use crate::sparse::{self, SparseMat};

pub const DENSE_THRESHOLD: usize = 400;
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Fraction of `(‖A‖ + |λ|‖B‖)|x|` below which a residual counts as
/// converged even when `|Ax|` itself is tiny (kernel vectors).
pub const RESIDUAL_FLOOR: f64 = 1e-4;

/// Switches faer between sequential and rayon-parallel kernels.
pub fn set_deterministic(on: bool) {
    faer::set_global_parallelism(if on { Par::Seq } else { Par::rayon(0) });
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub dense_threshold: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { dense_threshold: DENSE_THRESHOLD, tol: RESIDUAL_TOL, max_restarts: 60, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// B-orthonormal eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Scaled residuals, see [`scaled_residual`].
    pub residuals: Vec<f64>,
    pub kernel_tol: f64,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl SpectralResult {
    /// Classifies eigenvalues; the default tolerance is `1e-6 · max |λ|`.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>, residuals: Vec<f64>, kernel_tol: Option<f64>) -> Self {
        let tol = kernel_tol.unwrap_or_else(|| 1e-6 * eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let mut r = SpectralResult { eigenvalues, eigenvectors, residuals, kernel_tol: tol, negative: 0, zero: 0, positive: 0 };
        r.reclassify(tol);
        r
    }

    pub fn reclassify(&mut self, tol: f64) {
        self.kernel_tol = tol;
        self.negative = self.eigenvalues.iter().filter(|&&l| l < -tol).count();
        self.zero = self.eigenvalues.iter().filter(|&&l| l.abs() <= tol).count();
        self.positive = self.eigenvalues.len() - self.negative - self.zero;
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// CSV with header `index,eigenvalue,residual`, 1-based index.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue,residual\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            s.push_str(&format!("{},{:.15e},{:.3e}\n", i + 1, l, r));
        }
        s
    }
}

/// `|Ax − λBx| / max(|Ax|, |λ||Bx|, RESIDUAL_FLOOR·(‖A‖ + |λ|‖B‖)|x|)`.
pub fn scaled_residual(a: &SparseMat, b: &SparseMat, norms: (f64, f64), lambda: f64, x: &[f64]) -> f64 {
    let ax = sparse::matvec(a, x);
    let bx = sparse::matvec(b, x);
    let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
    let floor = RESIDUAL_FLOOR * (norms.0 + lambda.abs() * norms.1) * sparse::norm(x);
    let scale = sparse::norm(&ax).max(lambda.abs() * sparse::norm(&bx)).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        sparse::norm(&r) / scale
    }
}

/// The `count` smallest eigenpairs, ascending.
pub fn smallest_eigenpairs(
    a: &SparseMat,
    b: &SparseMat,
    count: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>), SolverError> {
    let n = a.nrows();
    if count > n || count == 0 {
        return Err(SolverError::TooManyEigenpairs { requested: count, dofs: n });
    }
    let norms = (sparse::norm_inf(a), sparse::norm_inf(b));
    let (vals, vecs) = if n <= opts.dense_threshold || 2 * count + 10 >= n {
        dense_eigenpairs(a, b, count)?
    } else {
        krylov_eigenpairs(a, b, count, opts, norms)?
    };
    let res = vals.iter().zip(&vecs).map(|(&l, x)| scaled_residual(a, b, norms, l, x)).collect();
    Ok((vals, vecs, res))
}

fn dense_eigenpairs(a: &SparseMat, b: &SparseMat, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolverError> {
    let n = a.nrows();
    let bd = sparse::to_dense(b);
    let llt = bd.llt(Side::Lower).map_err(|_| SolverError::IndefiniteMass)?;
    let l = llt.L();
    // C = L⁻¹ A L⁻ᵀ, formed as L⁻¹ (L⁻¹ A)ᵀ using symmetry of A.
    let mut x = sparse::to_dense(a);
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut c = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|_| SolverError::Dense)?;
    let s = evd.S().column_vector();
    let mut y = evd.U().subcols(0, count).to_owned();
    l.transpose().solve_upper_triangular_in_place(y.as_mut());
    let vals = (0..count).map(|i| s[i]).collect();
    let vecs = (0..count).map(|k| (0..n).map(|i| y[(i, k)]).collect()).collect();
    Ok((vals, vecs))
}

/// Finds `σ` with `A − σB` positive definite, starting at −1 and growing by 4×.
pub fn shift_below_spectrum(a: &SparseMat, b: &SparseMat) -> Result<(f64, faer::sparse::linalg::solvers::Llt<usize, f64>), SolverError> {
    let scale = (sparse::norm_inf(a) / sparse::norm_inf(b)).max(1.0);
    let mut sigma = -1.0;
    for _ in 0..40 {
        let shifted = sparse::axpby(1.0, a, -sigma, b);
        if let Ok(f) = shifted.sp_cholesky(Side::Lower) {
            return Ok((sigma, f));
        }
        sigma *= 4.0;
        if -sigma > 1e6 * scale {
            break;
        }
    }
    Err(SolverError::NoShift { attempts: 40 })
}

/// Solves `A X = R` for symmetric positive definite `A`, one column per
/// right-hand side.
pub fn solve_spd(a: &SparseMat, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SolverError> {
    let n = a.nrows();
    let factor = a.sp_cholesky(Side::Lower).map_err(|_| SolverError::IndefiniteMass)?;
    let mut x = Mat::from_fn(n, rhs.len(), |i, j| rhs[j][i]);
    factor.solve_in_place(x.as_mut());
    Ok((0..rhs.len()).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect())
}

struct Basis {
    v: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
}

impl Basis {
    /// B-orthogonalizes `w` against the basis (two passes), then appends it
    /// unless it collapsed. Returns whether it was kept.
    fn push(&mut self, b: &SparseMat, mut w: Vec<f64>) -> bool {
        let mut bw = sparse::matvec(b, &w);
        let before = sparse::dot(&w, &bw).max(0.0).sqrt();
        if before == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for (v, bv) in self.v.iter().zip(&self.bv) {
                let c = sparse::dot(bv, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        bw = sparse::matvec(b, &w);
        let nrm = sparse::dot(&w, &bw).max(0.0).sqrt();
        if nrm < 1e-10 * before {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        bw.iter_mut().for_each(|x| *x /= nrm);
        self.v.push(w);
        self.bv.push(bw);
        true
    }
}

fn krylov_eigenpairs(
    a: &SparseMat,
    b: &SparseMat,
    count: usize,
    opts: &EigenOptions,
    norms: (f64, f64),
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolverError> {
    let n = a.nrows();
    let (mut sigma, factor) = shift_below_spectrum(a, b)?;
    let mut factor = factor;
    let keep = (count + (count / 2).max(4)).min(n);
    let dim = (keep + (3 * count).max(60)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut frontier: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_restarts {
        let apply = |x: &[f64]| -> Vec<f64> {
            let bx = sparse::matvec(b, x);
            let mut rhs = Mat::from_fn(n, 1, |i, _| bx[i]);
            factor.solve_in_place(rhs.as_mut());
            (0..n).map(|i| rhs[(i, 0)]).collect()
        };
        // Thick restart: previous Ritz vectors stay in the basis and a short
        // block chain grows from the least converged of them.
        let mut basis = Basis { v: Vec::with_capacity(dim), bv: Vec::with_capacity(dim) };
        for w in kept.drain(..) {
            basis.push(b, w);
        }
        while basis.v.len() < dim && !frontier.is_empty() {
            let mut next = Vec::new();
            for x in &frontier {
                if basis.v.len() >= dim {
                    break;
                }
                if basis.push(b, apply(x)) {
                    next.push(basis.v.last().unwrap().clone());
                }
            }
            if next.is_empty() {
                // Invariant subspace reached; refresh with random directions.
                next = (0..frontier.len()).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
                next.retain(|w: &Vec<f64>| basis.push(b, w.clone()));
                next = basis.v[basis.v.len() - next.len()..].to_vec();
            }
            frontier = next;
        }
        let m = basis.v.len();
        let av: Vec<Vec<f64>> = basis.v.iter().map(|v| sparse::matvec(a, v)).collect();
        let h = Mat::from_fn(m, m, |i, j| 0.5 * (sparse::dot(&basis.v[i], &av[j]) + sparse::dot(&basis.v[j], &av[i])));
        let evd = h.self_adjoint_eigen(Side::Lower).map_err(|_| SolverError::Dense)?;
        let (theta, y) = (evd.S().column_vector(), evd.U());
        let ritz: Vec<Vec<f64>> = (0..keep.min(m))
            .map(|k| {
                let mut x = vec![0.0; n];
                for (j, v) in basis.v.iter().enumerate() {
                    let c = y[(j, k)];
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi += c * vi;
                    }
                }
                x
            })
            .collect();
        let res: Vec<f64> = (0..count).map(|k| scaled_residual(a, b, norms, theta[k], &ritz[k])).collect();
        worst = res.iter().copied().fold(0.0, f64::max);
        if worst <= opts.tol {
            let vals = (0..count).map(|k| theta[k]).collect();
            return Ok((vals, ritz.into_iter().take(count).collect()));
        }
        let mut order: Vec<usize> = (0..count).filter(|&k| res[k] > opts.tol).collect();
        order.sort_by(|&p, &q| res[q].total_cmp(&res[p]));
        frontier = order.iter().take(3).map(|&k| ritz[k].clone()).collect();
        // Ritz values bound the spectrum from above; move the shift up to a
        // margin below the lowest one when that is a real gain.
        let gap = (theta[count - 1] - theta[0]).max(1e-12) / count as f64;
        let target = theta[0] - gap;
        if res[0] < 1e-2 && target - sigma > 0.5 * (theta[0] - sigma) {
            if let Ok(f) = sparse::axpby(1.0, a, -target, b).sp_cholesky(Side::Lower) {
                sigma = target;
                factor = f;
            }
        }
        kept = ritz;
    }
    Err(SolverError::NotConverged { worst_residual: worst })
}
