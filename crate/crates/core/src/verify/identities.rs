//! Pointwise identities for constant ambient fields and a test vector field,
//! evaluated at interior vertices.
//!
//! Derivatives of sampled fields come from least-squares quadratic patch
//! fits in tangent coordinates; there the metric is Euclidean to first order
//! at the vertex, so `f_uu + f_vv` is the Laplace-Beltrami operator and the
//! fitted gradient is the covariant one. `Δ` is the positive Laplacian.

use super::{relative_residuals, CheckId, CheckReport, Discretization};
use crate::error::VerifyError;
use crate::geometry::{assemble_scalar_operators, laplacian, MassKind, PatchFit, PatchSamples};
use crate::mesh::Point3;
use nalgebra::Matrix3;

/// `ξ = ∇f + N × ∇g` for the ambient polynomials `f = xz + y²/2`, `g = xy`
/// restricted to the surface.
#[derive(Debug, Clone, Copy, Default)]
pub struct TestField;

impl TestField {
    fn grad_f(p: &Point3) -> Point3 {
        Point3::new(p.z, p.y, p.x)
    }

    fn grad_g(p: &Point3) -> Point3 {
        Point3::new(p.y, p.x, 0.0)
    }

    pub fn value(&self, p: &Point3, n: &Point3) -> Point3 {
        let gf = Self::grad_f(p);
        gf - n * n.dot(&gf) + n.cross(&Self::grad_g(p))
    }

    /// `Δf` on a minimal surface: `−tr_T D²F = 2n_x n_z + n_y² − 1`.
    pub fn laplacian_f(&self, n: &Point3) -> f64 {
        2.0 * n.x * n.z + n.y * n.y - 1.0
    }

    /// `Δg = 2n_x n_y`.
    pub fn laplacian_g(&self, n: &Point3) -> f64 {
        2.0 * n.x * n.y
    }

    /// Hodge Laplacian `Δξ = ∇(Δf) + N × ∇(Δg)`. Both `Δf` and `Δg` are
    /// functions of `N`, and `dN = −S`, so `∇(Δf) = −S (∂Δf/∂N)`.
    pub fn hodge_laplacian(&self, n: &Point3, s: &Matrix3<f64>) -> Point3 {
        let a = Point3::new(2.0 * n.z, 2.0 * n.y, 2.0 * n.x);
        let b = Point3::new(2.0 * n.y, 2.0 * n.x, 0.0);
        -(s * a) + n.cross(&(-(s * b)))
    }
}

struct Context {
    fit: PatchFit,
    keep: Vec<bool>,
    area: Vec<f64>,
    s: Vec<Matrix3<f64>>,
}

impl Context {
    /// Positive Laplace-Beltrami from the fitted Hessian trace.
    fn laplacian(&self, values: &[f64]) -> Vec<f64> {
        (0..values.len()).map(|v| -self.fit.fit_at(v, values).hessian().trace()).collect()
    }

    /// Fitted gradients of the three ambient components of a vertex field.
    fn component_gradients(&self, field: &[Point3]) -> [Vec<Point3>; 3] {
        std::array::from_fn(|c| self.fit.gradient(&field.iter().map(|x| x[c]).collect::<Vec<_>>()))
    }
}

/// Accumulates `L − R` and a dominant-term scale over several field choices.
#[derive(Default)]
struct Residual {
    diff: Vec<f64>,
    scale: Vec<f64>,
    weight: Vec<f64>,
    keep: Vec<bool>,
}

impl Residual {
    fn push(&mut self, ctx: &Context, v: usize, diff: f64, terms: &[f64]) {
        self.diff.push(diff);
        self.scale.push(terms.iter().fold(0.0f64, |m, t| m.max(t.abs())));
        self.weight.push(ctx.area[v]);
        self.keep.push(ctx.keep[v]);
    }

    fn finish(&self) -> (f64, f64) {
        relative_residuals(&self.diff, &self.scale, &self.weight, &self.keep)
    }
}

/// Runs one interior identity on one discretization.
pub fn run_identity_check(id: CheckId, d: &Discretization, tolerance: f64) -> Result<CheckReport, VerifyError> {
    if !id.is_interior() {
        return Err(VerifyError::MissingAnalytic(id.name()));
    }
    if d.analytic.is_none() {
        return Err(VerifyError::MissingAnalytic(id.name()));
    }
    let fit = PatchFit::new(&d.mesh, &d.conn, &d.shape.frames, PatchSamples::Vertices, 1)?;
    let keep: Vec<bool> = d.conn.boundary_strip(1).into_iter().map(|b| !b).collect();
    let ops = assemble_scalar_operators(&d.mesh, MassKind::Lumped)?;
    let s = (0..d.mesh.vertex_count()).map(|v| d.shape.shape_ambient(v)).collect();
    let ctx = Context { fit, keep, area: ops.vertex_area.clone(), s };
    let n = d.mesh.vertex_count();
    let normals = &d.shape.normals;
    let basis = [Point3::x(), Point3::y(), Point3::z()];
    let mut res = Residual::default();

    match id {
        CheckId::PpcA => {
            for e in &basis {
                let f: Vec<f64> = normals.iter().map(|nv| nv.dot(e)).collect();
                let grad = ctx.fit.gradient(&f);
                for v in 0..n {
                    let rhs = -(ctx.s[v] * d.shape.project(v, e));
                    res.push(&ctx, v, (grad[v] - rhs).norm(), &[grad[v].norm(), rhs.norm()]);
                }
            }
        }
        CheckId::PpcB => {
            for e in &basis {
                let f: Vec<f64> = normals.iter().map(|nv| nv.dot(e)).collect();
                let lap = ctx.laplacian(&f);
                for v in 0..n {
                    let rhs = d.shape.a2[v] * f[v];
                    res.push(&ctx, v, lap[v] - rhs, &[lap[v], rhs]);
                }
            }
        }
        CheckId::Pc1 => {
            // δ of the pullback dxₐ is Δxₐ (cotangent); it vanishes on a
            // minimal surface while its two halves ⟨V̄,N⟩ tr S do not
            // individually: the scale is |⟨V̄,N⟩|·|S|.
            for (c, e) in basis.iter().enumerate() {
                let x: Vec<f64> = d.mesh.vertices().iter().map(|p| p[c]).collect();
                let delta = laplacian(&ops, &x);
                for v in 0..n {
                    let dominant = normals[v].dot(e).abs() * d.shape.a2[v].sqrt();
                    res.push(&ctx, v, delta[v], &[dominant]);
                }
            }
        }
        CheckId::Lapip | CheckId::Jc => {
            let field = TestField;
            let xi: Vec<Point3> = (0..n).map(|v| field.value(&d.mesh.position(v), &normals[v])).collect();
            let lap_xi: Vec<Point3> = (0..n).map(|v| field.hodge_laplacian(&normals[v], &ctx.s[v])).collect();
            let grads = ctx.component_gradients(&xi);
            // (∇_Y ξ)·W for tangent Y, W.
            let cov = |v: usize, y: &Point3, w: &Point3| (0..3).map(|c| w[c] * grads[c][v].dot(y)).sum::<f64>();
            // ⟨S, ∇ξ⟩ = Σ_c ⟨∇ξ^c, S e_c⟩.
            let s_dot_grad = |v: usize| (0..3).map(|c| grads[c][v].dot(&ctx.s[v].column(c).into_owned())).sum::<f64>();
            if id == CheckId::Lapip {
                for (a, e) in basis.iter().enumerate() {
                    let u: Vec<f64> = xi.iter().map(|x| x[a]).collect();
                    let lap = ctx.laplacian(&u);
                    for v in 0..n {
                        let vv = d.shape.project(v, e);
                        let t1 = 2.0 * (ctx.s[v] * vv).dot(&(ctx.s[v] * xi[v]));
                        let t2 = vv.dot(&lap_xi[v]);
                        let t3 = -2.0 * normals[v][a] * s_dot_grad(v);
                        res.push(&ctx, v, lap[v] - (t1 + t2 + t3), &[lap[v], t1, t2, t3]);
                    }
                }
            } else {
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    let u: Vec<f64> = (0..n).map(|v| normals[v][a] * xi[v][b] - normals[v][b] * xi[v][a]).collect();
                    let lap = ctx.laplacian(&u);
                    for v in 0..n {
                        let vv = d.shape.project(v, &basis[a]);
                        let ww = d.shape.project(v, &basis[b]);
                        let x = normals[v][a] * ww - normals[v][b] * vv;
                        let ju = lap[v] - d.shape.a2[v] * u[v];
                        let t1 = x.dot(&lap_xi[v]);
                        let t2 = 2.0 * (cov(v, &(ctx.s[v] * vv), &ww) - cov(v, &(ctx.s[v] * ww), &vv));
                        res.push(&ctx, v, ju - (t1 + t2), &[lap[v], d.shape.a2[v] * u[v], t1, t2]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    let (rmax, rl2) = res.finish();
    Ok(CheckReport::on(id, d, rmax, rl2, tolerance))
}
