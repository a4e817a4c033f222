//! Pointwise and boundary identities on the catenoid over levels 0..2, the
//! sphere averaging identity, and the stability of harmonic fields.
//!
//!     cargo run --release --example identity_suite

use fbms_lab::geometry::BodyModel;
use fbms_lab::hodge::{assemble_one_form_laplacian, betti_of, eigen_one_form, BoundaryCondition};
use fbms_lab::jacobi::assemble_jacobi;
use fbms_lab::linalg::EigenOptions;
use fbms_lab::surfaces::SurfaceKind;
use fbms_lab::verify::{check_bc, check_ic, check_ros, ladder_report, run_identity_check, CheckId, Discretization, SphereQuadrature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = EigenOptions::default();
    let levels: Vec<Discretization> = (0..=2).map(|l| Discretization::new(SurfaceKind::Catenoid, 6, l)).collect::<Result<_, _>>()?;
    let mut all = Vec::new();
    for id in [CheckId::PpcA, CheckId::PpcB, CheckId::Pc1, CheckId::Lapip, CheckId::Jc] {
        let per = levels.iter().map(|d| run_identity_check(id, d, id.default_tolerance())).collect::<Result<Vec<_>, _>>()?;
        all.extend(ladder_report(&per));
    }
    let (mut bc, mut ros) = (Vec::new(), Vec::new());
    for d in &levels {
        let hodge = assemble_one_form_laplacian(&d.mesh, BoundaryCondition::Absolute)?;
        let forms = eigen_one_form(&hodge, 4, &opts)?;
        let betti = betti_of(&hodge, &opts)?.betti;
        let jacobi = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball())?;
        bc.push(check_bc(d, &forms.eigenvectors, &BodyModel::unit_ball(), 0.10)?);
        ros.push(check_ros(d, &jacobi, &forms.eigenvectors[..betti], 0.10)?);
    }
    all.extend(ladder_report(&bc));
    all.extend(ladder_report(&ros));
    all.push(check_ic(&SphereQuadrature::product_gauss(2), 1e-12));
    all.push(check_ic(&SphereQuadrature::monte_carlo(100_000, 7), 0.01));
    for r in &all {
        let history: Vec<String> = r.history.iter().map(|h| format!("{h:.4}")).collect();
        println!("{:6} {:5} final {:.3e}  history [{}]", r.check_id.name(), if r.pass { "pass" } else { "FAIL" }, r.residual_max, history.join(", "));
    }
    Ok(())
}
