//! Jacobi spectrum of the critical catenoid, its Morse index across levels,
//! and the lowest eigenfunctions written as CSV.
//!
//!     cargo run --release --example catenoid_spectrum -- out_dir

use fbms_lab::geometry::BodyModel;
use fbms_lab::jacobi::{assemble_jacobi, eigen_jacobi, eigenvectors_csv, morse_index, refinement_kernel_tol};
use fbms_lab::linalg::EigenOptions;
use fbms_lab::surfaces::{critical_catenoid, SurfaceKind};
use fbms_lab::verify::Discretization;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1);
    let p = critical_catenoid();
    println!("critical catenoid: t0 = {:.6}, neck c = {:.6}", p.t0, p.neck);
    let opts = EigenOptions::default();
    let mut coarse: Option<Vec<f64>> = None;
    for level in 0..=2 {
        let d = Discretization::new(SurfaceKind::Catenoid, 6, level)?;
        let problem = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball())?;
        let mut spec = eigen_jacobi(&problem, 8, &opts, None)?;
        print!("level {level} (n = {}): ", d.mesh.vertex_count());
        for l in &spec.eigenvalues {
            print!("{l:9.4}");
        }
        if let Some(c) = &coarse {
            spec.reclassify(refinement_kernel_tol(&spec.eigenvalues, c, 1e-8)?);
            match morse_index(&spec) {
                Ok(m) => print!("  index {} nullity {}", m.index, m.nullity),
                Err(e) => print!("  {e}"),
            }
        }
        println!();
        if let (Some(dir), 2) = (&out, level) {
            std::fs::create_dir_all(dir)?;
            std::fs::write(format!("{dir}/catenoid_eigenvectors.csv"), eigenvectors_csv(&spec))?;
            std::fs::write(format!("{dir}/catenoid_spectrum.csv"), spec.to_csv())?;
        }
        coarse = Some(spec.eigenvalues);
    }
    Ok(())
}
