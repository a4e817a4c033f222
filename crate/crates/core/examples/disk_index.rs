//! Morse index and lowest Jacobi eigenvalues of the equatorial disk over a
//! refinement ladder, with the zero class fixed by refinement.
//!
//!     cargo run --release --example disk_index -- 4

use fbms_lab::geometry::BodyModel;
use fbms_lab::jacobi::{assemble_jacobi, eigen_jacobi, morse_index, refinement_kernel_tol};
use fbms_lab::linalg::EigenOptions;
use fbms_lab::reference::kappa_star;
use fbms_lab::surfaces::SurfaceKind;
use fbms_lab::verify::Discretization;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rings: usize = std::env::args().nth(1).map_or(Ok(4), |s| s.parse())?;
    let opts = EigenOptions::default();
    let exact = -kappa_star().powi(2);
    println!("exact lambda1 = {exact:.6}");
    let mut previous: Option<Vec<f64>> = None;
    for level in 0..=3 {
        let start = std::time::Instant::now();
        let d = Discretization::new(SurfaceKind::Disk, rings, level)?;
        let problem = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball())?;
        let mut spec = eigen_jacobi(&problem, 6, &opts, None)?;
        let q_one = problem.quadratic_form(&vec![1.0; d.mesh.vertex_count()]);
        let index = match &previous {
            Some(coarse) => {
                let tol = refinement_kernel_tol(&spec.eigenvalues, coarse, 1e-8)?;
                spec.reclassify(tol);
                morse_index(&spec).map(|m| format!("{} (nullity {})", m.index, m.nullity)).unwrap_or_else(|e| e.to_string())
            }
            None => "needs a coarser level".into(),
        };
        println!(
            "level {level}: n = {:5}  lambda = {:?}  Q(1) = {q_one:.4}  index {index}  [{:.2}s]",
            d.mesh.vertex_count(),
            spec.eigenvalues.iter().map(|l| (l * 1e4).round() / 1e4).collect::<Vec<_>>(),
            start.elapsed().as_secs_f64()
        );
        previous = Some(spec.eigenvalues);
    }
    Ok(())
}
