//! The eigenvalue comparison `λ_j(J) ≤ λ_{3(j−1)+1}(Δ₁)`, the index lower
//! bound, and the min-max step behind the comparison.

use super::{CheckId, CheckReport, Discretization};
use crate::error::VerifyError;
use crate::hodge::vertex_field;
use crate::jacobi::{pair_functions, select_test_form, JacobiProblem};
use crate::linalg::SpectralResult;
use crate::sparse::matvec;

/// Lowest eigenvalues of the Jacobi form and of the absolute Hodge
/// Laplacian on one mesh, with the absolute first Betti number.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTable {
    pub jacobi: Vec<f64>,
    pub hodge: Vec<f64>,
    pub betti: usize,
}

/// Number of forms needed against `j − 1` eigenfunctions.
pub fn forms_needed(j: usize) -> usize {
    3 * (j - 1) + 1
}

/// `⌊(2g+k+1)/3⌋`.
pub fn index_lower_bound(genus: usize, boundaries: usize) -> usize {
    (2 * genus + boundaries + 1) / 3
}

/// ER for `j = 1..=j_max`. The slack is
/// `max(0.05|λ_m(Δ₁)|, 0.05|λ₁(J)|)`; when `m ≤ β` the inequality must be
/// strict, `λ_j(J) < 0`. The residual is the largest violation.
pub fn check_eigenvalue_inequality(
    surface: &str,
    resolution: usize,
    table: &EigenTable,
    j_max: usize,
) -> Result<CheckReport, VerifyError> {
    let needed = forms_needed(j_max.max(1));
    if table.jacobi.len() < j_max || table.hodge.len() < needed {
        return Err(VerifyError::InsufficientEigenpairs { check: "ER", needed: needed.max(j_max) });
    }
    let l1 = table.jacobi[0];
    let mut worst = 0.0f64;
    let mut sum2 = 0.0;
    let mut rows = Vec::new();
    for j in 1..=j_max {
        let m = forms_needed(j);
        let (lj, hm) = (table.jacobi[j - 1], table.hodge[m - 1]);
        let eps = 0.05 * hm.abs().max(l1.abs());
        let strict = m <= table.betti;
        let violation = if strict { lj.max(0.0) } else { (lj - hm - eps).max(0.0) };
        let holds = if strict { lj < 0.0 } else { violation == 0.0 };
        worst = worst.max(violation);
        sum2 += violation * violation;
        rows.push(serde_json::json!({
            "j": j, "m": m, "lambda_j": lj, "hodge_m": hm, "slack": eps, "strict": strict, "holds": holds,
        }));
    }
    let mut r = CheckReport::new(CheckId::Er, surface, resolution, worst, (sum2 / j_max as f64).sqrt(), 0.0);
    r.pass = rows.iter().all(|row| row["holds"] == true);
    r.details = serde_json::json!({ "betti": table.betti, "table": rows });
    Ok(r)
}

/// IB from the Morse index at successive levels (coarsest first). Unstable
/// indices or a Betti number off `2g+k−1` give an inconclusive failure.
pub fn check_index_bounds(
    surface: &str,
    resolution: usize,
    indices: &[usize],
    genus: usize,
    boundaries: usize,
    betti: usize,
) -> CheckReport {
    let index = indices.last().copied().unwrap_or(0);
    let stable = matches!(indices, [.., a, b] if a == b);
    let expected_betti = 2 * genus + boundaries - 1;
    let bound = index_lower_bound(genus, boundaries).max(1);
    let shortfall = bound.saturating_sub(index) as f64;
    let mut r = CheckReport::new(CheckId::Ib, surface, resolution, shortfall, shortfall, 0.0);
    let conclusive = stable && betti == expected_betti;
    r.pass &= conclusive;
    r.details = serde_json::json!({
        "index": index, "indices": indices, "bound": bound, "betti": betti,
        "expected_betti": expected_betti, "stable": stable, "conclusive": conclusive,
    });
    r
}

/// MMI for `j = 1..=j_max`: the test form built from the first `m(j)`
/// absolute eigenforms gives `Σ Q(u) / Σ ‖u‖² ≥ λ_j(J)` over the three
/// basis pairs, up to `tolerance` relative to `max(|λ_j|, 1)`.
pub fn check_mmi(
    d: &Discretization,
    jacobi: &JacobiProblem,
    jacobi_spectrum: &SpectralResult,
    hodge_forms: &[Vec<f64>],
    j_max: usize,
    tolerance: f64,
) -> Result<CheckReport, VerifyError> {
    let needed = forms_needed(j_max);
    if hodge_forms.len() < needed || jacobi_spectrum.eigenvalues.len() < j_max {
        return Err(VerifyError::InsufficientEigenpairs { check: "MMI", needed });
    }
    let normals = &d.shape.normals;
    let fields: Vec<_> = hodge_forms[..needed].iter().map(|w| vertex_field(&d.mesh, &d.conn, w, normals)).collect();
    let n = d.mesh.vertex_count();
    let ones = vec![1.0; n];
    let b = &jacobi.pair.b;
    let weighted: Vec<Vec<f64>> = jacobi_spectrum.eigenvectors.iter().take(j_max).map(|phi| matvec(b, phi)).collect();
    let mut worst = 0.0f64;
    let mut sum2 = 0.0;
    let mut rows = Vec::new();
    for j in 1..=j_max {
        let m = forms_needed(j);
        let form = select_test_form(&fields[..m], &weighted[..j - 1], normals, &ones)?;
        let xi: Vec<_> = (0..n)
            .map(|v| fields[..m].iter().zip(&form.coefficients).map(|(f, c)| f[v] * *c).sum())
            .collect();
        let (mut q, mut norm) = (0.0, 0.0);
        for u in pair_functions(&xi, normals) {
            q += jacobi.quadratic_form(&u);
            norm += jacobi.mass_norm2(&u);
        }
        let lj = jacobi_spectrum.eigenvalues[j - 1];
        let ratio = q / norm;
        let violation = (lj - ratio).max(0.0) / lj.abs().max(1.0);
        worst = worst.max(violation);
        sum2 += violation * violation;
        rows.push(serde_json::json!({
            "j": j, "m": m, "lambda_j": lj, "rayleigh": ratio,
            "constraint_residual": form.constraint_residual,
        }));
    }
    let mut r = CheckReport::on(CheckId::Mmi, d, worst, (sum2 / j_max as f64).sqrt(), tolerance);
    r.details = serde_json::json!({ "table": rows });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_values() {
        assert_eq!(index_lower_bound(0, 1), 0);
        assert_eq!(index_lower_bound(0, 2), 1);
        assert_eq!(index_lower_bound(4, 3), 4);
        assert_eq!(index_lower_bound(1, 2), 1);
        assert_eq!(index_lower_bound(2, 1), 2);
        assert_eq!(forms_needed(2), 4);
    }

    #[test]
    fn er_table_on_synthetic_spectra() {
        // Disk-like: no kernel, λ₁(J) < λ₁(Δ₁).
        let disk = EigenTable { jacobi: vec![-2.6, 0.0, 0.0, 5.0], hodge: (1..=10).map(|i| i as f64).collect(), betti: 0 };
        let r = check_eigenvalue_inequality("disk", 4, &disk, 4).unwrap();
        assert!(r.pass);
        assert_eq!(r.residual_max, 0.0);
        // λ₄(J) = 10.5 exceeds λ₁₀(Δ₁) = 10 by less than the slack 0.5.
        let edge = EigenTable { jacobi: vec![-2.6, 0.0, 0.0, 10.5], ..disk.clone() };
        assert!(check_eigenvalue_inequality("disk", 4, &edge, 4).unwrap().pass);
        let over = EigenTable { jacobi: vec![-2.6, 0.0, 0.0, 10.6], ..disk.clone() };
        let r = check_eigenvalue_inequality("disk", 4, &over, 4).unwrap();
        assert!(!r.pass);
        assert!((r.residual_max - 0.1).abs() < 1e-12);
        // With a kernel the first inequality is strict.
        let annulus = EigenTable { jacobi: vec![0.0, 1.0], hodge: vec![0.0, 2.0, 3.0, 4.0], betti: 1 };
        assert!(!check_eigenvalue_inequality("a", 1, &annulus, 2).unwrap().pass);
        assert!(check_eigenvalue_inequality("a", 1, &disk, 5).is_err());
    }

    #[test]
    fn index_bounds_need_stability() {
        let ok = check_index_bounds("catenoid", 6, &[4, 4], 0, 2, 1);
        assert!(ok.pass);
        assert!(!check_index_bounds("catenoid", 6, &[3, 4], 0, 2, 1).pass);
        assert!(!check_index_bounds("catenoid", 6, &[4, 4], 0, 2, 0).pass);
        let low = check_index_bounds("x", 6, &[1, 1], 2, 1, 4);
        assert!(!low.pass);
        assert_eq!(low.residual_max, 1.0);
        assert!(check_index_bounds("disk", 4, &[1, 1], 0, 1, 0).pass);
    }
}
