//! Closed-form spectra of the flat unit disk from Bessel functions.
//!
//! Power series are used throughout; they are accurate to about 1e-10 for
//! arguments below 20, which covers every eigenvalue needed here.

/// `J_n(x)` by its power series.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    series(n, x, -1.0)
}

/// `I_n(x)` by its power series.
pub fn bessel_i(n: u32, x: f64) -> f64 {
    series(n, x, 1.0)
}

fn series(n: u32, x: f64, sign: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |t, k| t * half / k as f64);
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        term *= sign * q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

pub fn bessel_i_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        bessel_i(1, x)
    } else {
        0.5 * (bessel_i(n - 1, x) + bessel_i(n + 1, x))
    }
}

/// Root of `f` on `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Positive roots of `f` below `limit`, found by scanning then bisection.
fn roots(f: impl Fn(f64) -> f64, start: f64, limit: f64) -> Vec<f64> {
    let step = 1e-2;
    let mut out = Vec::new();
    let mut x = start;
    let mut fx = f(x);
    while x < limit {
        let y = x + step;
        let fy = f(y);
        if fx == 0.0 || fx * fy < 0.0 {
            out.push(bisect(&f, x, y, 1e-14));
        }
        x = y;
        fx = fy;
    }
    out
}

/// `κ*`, the root of `κ I₁(κ) = I₀(κ)` on `[1.5, 1.7]`. The lowest Jacobi
/// eigenvalue of the equatorial disk is `−κ*²`.
pub fn kappa_star() -> f64 {
    bisect(|k| k * bessel_i(1, k) - bessel_i(0, k), 1.5, 1.7, 1e-15)
}

/// First zero of `J₁'`.
pub fn j1_prime_first_zero() -> f64 {
    bisect(|x| bessel_j_prime(1, x), 1.5, 2.0, 1e-15)
}

/// First zero of `J₀`.
pub fn j0_first_zero() -> f64 {
    bisect(|x| bessel_j(0, x), 2.0, 3.0, 1e-15)
}

fn with_multiplicity(mut pairs: Vec<(f64, u32)>, count: usize) -> Vec<f64> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    for (v, n) in pairs {
        out.push(v);
        if n > 0 {
            out.push(v);
        }
    }
    out.truncate(count);
    out
}

/// Neumann eigenvalues of the positive Laplacian on the unit disk, with
/// multiplicity, starting from the constant mode 0.
pub fn disk_neumann_eigenvalues(count: usize) -> Vec<f64> {
    let mut pairs = vec![(0.0, 0)];
    for n in 0..12u32 {
        for r in roots(|x| bessel_j_prime(n, x), 0.5, 16.0) {
            pairs.push((r * r, n));
        }
    }
    with_multiplicity(pairs, count)
}

/// Dirichlet eigenvalues of the positive Laplacian on the unit disk.
pub fn disk_dirichlet_eigenvalues(count: usize) -> Vec<f64> {
    let mut pairs = Vec::new();
    for n in 0..12u32 {
        for r in roots(|x| bessel_j(n, x), 0.5, 16.0) {
            pairs.push((r * r, n));
        }
    }
    with_multiplicity(pairs, count)
}

/// Eigenvalues of `Δu = λu`, `∂_r u = u` on the unit disk: the Jacobi
/// spectrum of the equatorial disk in the unit ball.
pub fn disk_robin_eigenvalues(count: usize) -> Vec<f64> {
    let mut pairs = Vec::new();
    for n in 0..12u32 {
        // Negative branch: u = I_n(κr), κ I_n'(κ) = I_n(κ). Only n = 0 has a
        // positive root; n = 1 has κ = 0 (the coordinate functions).
        if n == 0 {
            pairs.push((-kappa_star().powi(2), 0));
        }
        if n == 1 {
            pairs.push((0.0, 1));
        }
        for r in roots(|x| x * bessel_j_prime(n, x) - bessel_j(n, x), 0.05, 16.0) {
            pairs.push((r * r, n));
        }
    }
    with_multiplicity(pairs, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ` by composite Simpson.
    fn j_integral(n: u32, x: f64) -> f64 {
        let m = 2000;
        let h = PI / m as f64;
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        let mut s = f(0.0) + f(PI);
        for i in 1..m {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 / PI
    }

    /// `I_n(x) = (1/π) ∫₀^π e^{x cos τ} cos(nτ) dτ`.
    fn i_integral(n: u32, x: f64) -> f64 {
        let m = 2000;
        let h = PI / m as f64;
        let f = |t: f64| (x * t.cos()).exp() * (n as f64 * t).cos();
        let mut s = f(0.0) + f(PI);
        for i in 1..m {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 / PI
    }

    #[test]
    fn series_match_integral_representations() {
        for n in 0..4 {
            for &x in &[0.3, 1.6, 4.0, 9.5] {
                assert!((bessel_j(n, x) - j_integral(n, x)).abs() < 1e-11);
                assert!((bessel_i(n, x) - i_integral(n, x)).abs() < 1e-10 * i_integral(n, x).max(1.0));
            }
        }
    }

    #[test]
    fn oracle_roots() {
        // Independent: bisection on the integral representations.
        let jp = |x: f64| 0.5 * (j_integral(0, x) - j_integral(2, x));
        let r = bisect(jp, 1.5, 2.0, 1e-12);
        assert!((j1_prime_first_zero() - r).abs() < 1e-9);
        assert!((j1_prime_first_zero() - 1.841_183_781_340_659).abs() < 1e-10);
        assert!((j0_first_zero() - 2.404_825_557_695_773).abs() < 1e-10);
        let k = bisect(|k| k * i_integral(1, k) - i_integral(0, k), 1.5, 1.7, 1e-12);
        assert!((kappa_star() - k).abs() < 1e-9);
        assert!((kappa_star() - 1.608_279_471_726_879).abs() < 1e-9);
    }

    #[test]
    fn disk_spectra_start_as_expected() {
        let neu = disk_neumann_eigenvalues(4);
        assert_eq!(neu[0], 0.0);
        assert!((neu[1] - 3.389_957_3).abs() < 1e-6 && (neu[2] - neu[1]).abs() < 1e-12);
        let dir = disk_dirichlet_eigenvalues(3);
        assert!((dir[0] - 5.783_185_9).abs() < 1e-6);
        let rob = disk_robin_eigenvalues(4);
        assert!((rob[0] + 2.586_562_859_178_09).abs() < 1e-9);
        assert_eq!((rob[1], rob[2]), (0.0, 0.0));
        assert!(rob[3] > 0.0);
    }
}
