//! Table of λ_j(J) against λ_{3(j−1)+1}(Δ₁) with absolute conditions, plus
//! the min-max check on the constructed test forms.
//!
//!     cargo run --release --example eigenvalue_relation -- catenoid

use fbms_lab::geometry::BodyModel;
use fbms_lab::hodge::{assemble_one_form_laplacian, betti_of, eigen_one_form, BoundaryCondition};
use fbms_lab::jacobi::{assemble_jacobi, eigen_jacobi};
use fbms_lab::linalg::EigenOptions;
use fbms_lab::surfaces::SurfaceKind;
use fbms_lab::verify::{check_eigenvalue_inequality, check_mmi, Discretization, EigenTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (kind, res) = match std::env::args().nth(1).as_deref() {
        Some("disk") => (SurfaceKind::Disk, 4),
        _ => (SurfaceKind::Catenoid, 6),
    };
    let opts = EigenOptions::default();
    let d = Discretization::new(kind, res, 2)?;
    let jacobi = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball())?;
    let js = eigen_jacobi(&jacobi, 6, &opts, None)?;
    let hodge = assemble_one_form_laplacian(&d.mesh, BoundaryCondition::Absolute)?;
    let hs = eigen_one_form(&hodge, 14, &opts)?;
    let betti = betti_of(&hodge, &opts)?.betti;
    let table = EigenTable { jacobi: js.eigenvalues.clone(), hodge: hs.eigenvalues.clone(), betti };
    let er = check_eigenvalue_inequality(&d.label(), res, &table, 5)?;
    println!("{} level 2, betti {betti}", d.label());
    println!("  j   m   lambda_j(J)   lambda_m(hodge)   holds");
    for row in er.details["table"].as_array().into_iter().flatten() {
        println!(
            "  {}  {:2}   {:11.5}   {:15.5}   {}",
            row["j"], row["m"], row["lambda_j"].as_f64().unwrap_or(f64::NAN), row["hodge_m"].as_f64().unwrap_or(f64::NAN), row["holds"]
        );
    }
    let mmi = check_mmi(&d, &jacobi, &js, &hs.eigenvectors, 5, 1e-8)?;
    println!("min-max: worst shortfall {:.2e}, pass {}", mmi.residual_max, mmi.pass);
    for row in mmi.details["table"].as_array().into_iter().flatten() {
        println!("  j = {}: Rayleigh quotient {:.4} >= {:.4}", row["j"], row["rayleigh"].as_f64().unwrap_or(f64::NAN), row["lambda_j"].as_f64().unwrap_or(f64::NAN));
    }
    Ok(())
}
