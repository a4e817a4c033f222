//! Numerical checks of the identities and inequalities behind the index
//! estimates, each producing a [`CheckReport`].

mod boundary;
mod identities;
mod quadrature;
mod theorems;

pub use boundary::{check_bc, check_ros, vertex_recovery};
pub use identities::{run_identity_check, TestField};
pub use quadrature::{check_ic, SphereQuadrature};
pub use theorems::{check_eigenvalue_inequality, check_index_bounds, check_mmi, forms_needed, index_lower_bound, EigenTable};

use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::geometry::{shape_field, ShapeField};
use crate::mesh::{Connectivity, SurfaceMesh};
use crate::surfaces::{refined_surface, AnalyticSurface, SurfaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckId {
    #[serde(rename = "PPC_A")]
    PpcA,
    #[serde(rename = "PPC_B")]
    PpcB,
    Pc1,
    Lapip,
    Jc,
    Bc,
    Ic,
    Ros,
    Er,
    Ib,
    Mmi,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::PpcA,
        CheckId::PpcB,
        CheckId::Pc1,
        CheckId::Lapip,
        CheckId::Jc,
        CheckId::Bc,
        CheckId::Ic,
        CheckId::Ros,
        CheckId::Er,
        CheckId::Ib,
        CheckId::Mmi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckId::PpcA => "PPC_A",
            CheckId::PpcB => "PPC_B",
            CheckId::Pc1 => "PC1",
            CheckId::Lapip => "LAPIP",
            CheckId::Jc => "JC",
            CheckId::Bc => "BC",
            CheckId::Ic => "IC",
            CheckId::Ros => "ROS",
            CheckId::Er => "ER",
            CheckId::Ib => "IB",
            CheckId::Mmi => "MMI",
        }
    }

    pub fn parse(s: &str) -> Option<CheckId> {
        CheckId::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s.trim()))
    }

    /// Pointwise identities evaluated away from the boundary.
    pub fn is_interior(&self) -> bool {
        matches!(self, CheckId::PpcA | CheckId::PpcB | CheckId::Pc1 | CheckId::Lapip | CheckId::Jc)
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            CheckId::Ic => 1e-12,
            CheckId::Bc | CheckId::Ros => 0.10,
            CheckId::Er | CheckId::Ib => 0.0,
            CheckId::Mmi => 1e-8,
            _ => 0.05,
        }
    }
}

/// One check on one surface. `pass` is `residual_max ≤ tolerance`, and for a
/// refinement ladder additionally requires the residuals in `history` to
/// decrease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub surface: String,
    /// Base resolution of the surface family (node count for IC).
    pub resolution: usize,
    /// Refinement level, for checks evaluated on one mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    pub residual_max: f64,
    pub residual_l2: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Observed order `log₂(r_{L−1}/r_L)` over the last refinement.
    pub rate: Option<f64>,
    /// Residuals per level, coarsest first, when run on a ladder.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl CheckReport {
    pub fn new(check_id: CheckId, surface: &str, resolution: usize, residual_max: f64, residual_l2: f64, tolerance: f64) -> Self {
        CheckReport {
            check_id,
            surface: surface.to_string(),
            resolution,
            level: None,
            residual_max,
            residual_l2,
            tolerance,
            pass: residual_max <= tolerance,
            rate: None,
            history: Vec::new(),
            details: serde_json::Value::Null,
        }
    }
}

impl CheckReport {
    /// A report on one discretization.
    pub fn on(check_id: CheckId, d: &Discretization, residual_max: f64, residual_l2: f64, tolerance: f64) -> Self {
        let mut r = CheckReport::new(check_id, &d.label(), d.resolution, residual_max, residual_l2, tolerance);
        r.level = Some(d.level);
        r
    }
}

/// Folds per-level reports (coarsest first) into one report for the finest
/// level, with history, rate, and the monotone-decrease requirement.
pub fn ladder_report(reports: &[CheckReport]) -> Option<CheckReport> {
    let last = reports.last()?;
    let mut out = last.clone();
    out.history = reports.iter().map(|r| r.residual_max).collect();
    if let [.., a, b] = reports {
        out.rate = (a.residual_max > 0.0 && b.residual_max > 0.0).then(|| (a.residual_max / b.residual_max).log2());
        let decreasing = out.history.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0);
        out.pass = last.pass && decreasing;
    }
    Some(out)
}

/// A surface at one refinement level with its geometric data.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub kind: SurfaceKind,
    pub resolution: usize,
    pub level: usize,
    pub mesh: SurfaceMesh,
    pub analytic: Option<AnalyticSurface>,
    pub conn: Connectivity,
    pub shape: ShapeField,
}

impl Discretization {
    pub fn new(kind: SurfaceKind, resolution: usize, level: usize) -> Result<Self, VerifyError> {
        let (mesh, analytic) = refined_surface(kind, resolution, level)?;
        Self::from_mesh(kind, resolution, level, mesh, analytic)
    }

    pub fn from_mesh(
        kind: SurfaceKind,
        resolution: usize,
        level: usize,
        mesh: SurfaceMesh,
        analytic: Option<AnalyticSurface>,
    ) -> Result<Self, VerifyError> {
        let conn = mesh.connectivity();
        let shape = shape_field(&mesh, analytic.as_ref())?;
        Ok(Discretization { kind, resolution, level, mesh, analytic, conn, shape })
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }
}

/// Term sizes at or below this are roundoff.
pub const SCALE_FLOOR: f64 = 1e-10;

/// `max|L − R| / max scale` and the area-weighted `‖L − R‖₂ / ‖scale‖₂` over
/// the selected vertices; `scale` is the pointwise size of the dominant term.
pub(crate) fn relative_residuals(diff: &[f64], scale: &[f64], weight: &[f64], keep: &[bool]) -> (f64, f64) {
    let mut dmax = 0.0f64;
    let mut smax = 0.0f64;
    let mut d2 = 0.0;
    let mut s2 = 0.0;
    for i in 0..diff.len() {
        if !keep[i] {
            continue;
        }
        dmax = dmax.max(diff[i].abs());
        smax = smax.max(scale[i].abs());
        d2 += weight[i] * diff[i] * diff[i];
        s2 += weight[i] * scale[i] * scale[i];
    }
    if smax <= SCALE_FLOOR {
        // Both sides vanish to roundoff: the identity holds exactly.
        if dmax <= SCALE_FLOOR {
            return (0.0, 0.0);
        }
        return (dmax / SCALE_FLOOR, f64::INFINITY);
    }
    (dmax / smax, (d2 / s2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_ids_round_trip() {
        for c in CheckId::ALL {
            assert_eq!(CheckId::parse(c.name()), Some(c));
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.name()));
        }
        assert_eq!(CheckId::parse("ppc_b"), Some(CheckId::PpcB));
    }

    #[test]
    fn ladder_requires_decrease() {
        let mk = |r: f64, l| CheckReport::new(CheckId::Jc, "catenoid", l, r, r, 0.05);
        let ok = ladder_report(&[mk(0.2, 0), mk(0.08, 1), mk(0.03, 2)]).unwrap();
        assert!(ok.pass);
        assert!((ok.rate.unwrap() - (0.08f64 / 0.03).log2()).abs() < 1e-14);
        let bad = ladder_report(&[mk(0.02, 0), mk(0.03, 1), mk(0.01, 2)]).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.history, vec![0.02, 0.03, 0.01]);
    }

    #[test]
    fn residual_zero_over_zero_is_zero() {
        assert_eq!(relative_residuals(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[true, true]), (0.0, 0.0));
        assert_eq!(relative_residuals(&[1e-15], &[2e-15], &[1.0], &[true]), (0.0, 0.0));
        assert!(relative_residuals(&[1e-3], &[2e-15], &[1.0], &[true]).0 > 1.0);
        let (m, _) = relative_residuals(&[0.1, 5.0], &[1.0, 100.0], &[1.0, 1.0], &[true, false]);
        assert_eq!(m, 0.1);
    }
}
