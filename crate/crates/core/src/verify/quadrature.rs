//! Quadrature on the unit sphere with total mass 3, and the averaging
//! identity `∫ ⟨V,X⟩⟨V,Y⟩ dV = ⟨X,Y⟩`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CheckId, CheckReport};
use crate::mesh::Point3;

/// Mass of the normalized measure on `S²`.
pub const SPHERE_MASS: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub nodes: Vec<Point3>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly; `None` for Monte Carlo.
    pub degree: Option<usize>,
}

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 0 { 1.0 } else { p1 };
                dp = n as f64 * (x * p - p0) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

impl SphereQuadrature {
    /// Gauss-Legendre in `z` times `2n` equispaced azimuths: exact for
    /// polynomials of degree `2n − 1`.
    pub fn product_gauss(n: usize) -> Self {
        assert!(n >= 1);
        let az = 2 * n;
        let mut nodes = Vec::with_capacity(n * az);
        let mut weights = Vec::with_capacity(n * az);
        for (z, w) in gauss_legendre(n) {
            let r = (1.0 - z * z).sqrt();
            for k in 0..az {
                let phi = std::f64::consts::TAU * (k as f64 + 0.5) / az as f64;
                nodes.push(Point3::new(r * phi.cos(), r * phi.sin(), z));
                weights.push(SPHERE_MASS * w / (2.0 * az as f64));
            }
        }
        SphereQuadrature { nodes, weights, degree: Some(2 * n - 1) }
    }

    /// Uniform random nodes (uniform `z` and azimuth), equal weights.
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..samples)
            .map(|_| {
                let z: f64 = rng.random_range(-1.0..1.0);
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                Point3::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect();
        SphereQuadrature { nodes, weights: vec![SPHERE_MASS / samples as f64; samples], degree: None }
    }

    pub fn integrate(&self, f: impl Fn(&Point3) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(v, w)| w * f(v)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `max |∫⟨V,eₐ⟩⟨V,e_b⟩ − δ_ab|` over all nine basis pairs.
pub fn check_ic(quad: &SphereQuadrature, tolerance: f64) -> CheckReport {
    let basis = [Point3::x(), Point3::y(), Point3::z()];
    let mut worst = 0.0f64;
    let mut sum2 = 0.0;
    let mut table = Vec::new();
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            let value = quad.integrate(|v| v.dot(x) * v.dot(y));
            let err = (value - if a == b { 1.0 } else { 0.0 }).abs();
            worst = worst.max(err);
            sum2 += err * err;
            table.push(serde_json::json!({"x": a + 1, "y": b + 1, "integral": value}));
        }
    }
    let mut r = CheckReport::new(CheckId::Ic, "S2", quad.nodes.len(), worst, (sum2 / 9.0).sqrt(), tolerance);
    r.details = serde_json::json!({ "degree": quad.degree, "pairs": table });
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..6 {
            let rule = gauss_legendre(n);
            for k in 0..2 * n {
                let num: f64 = rule.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn product_rule_weights_and_exactness() {
        let q = SphereQuadrature::product_gauss(3);
        assert!((q.total_mass() - 3.0).abs() < 1e-14);
        assert!(q.weights.iter().all(|w| *w > 0.0));
        // ∫ z⁴ over S² with mass 3 = 3/5.
        assert!((q.integrate(|v| v.z.powi(4)) - 0.6).abs() < 1e-14);
        let r = check_ic(&q, 1e-12);
        assert!(r.pass, "{}", r.residual_max);
        // The smallest rule of degree ≥ 2.
        assert!(check_ic(&SphereQuadrature::product_gauss(2), 1e-12).pass);
    }

    #[test]
    fn monte_carlo_fallback_within_one_percent() {
        let q = SphereQuadrature::monte_carlo(100_000, 7);
        assert!((q.total_mass() - 3.0).abs() < 1e-9);
        assert!(check_ic(&q, 0.01).pass);
    }
}
