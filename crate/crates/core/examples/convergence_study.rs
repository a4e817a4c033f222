//! Observed orders of disk and catenoid quantities against their exact
//! values, through the same code path as `fbms-lab study`.
//!
//!     cargo run --release --example convergence_study

use fbms_lab::config::{KindName, RunConfig, SurfaceConfig};
use fbms_lab::pipeline::{convergence_study, Quantity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (kind, resolution, quantities) in [
        (KindName::Disk, 4, vec![Quantity::NeumannLambda1, Quantity::Area, Quantity::JacobiLambda1]),
        (KindName::Catenoid, 6, vec![Quantity::A2Max]),
    ] {
        let mut cfg = RunConfig::new(SurfaceConfig { kind, resolution, genus: None, boundaries: None });
        cfg.run.levels = vec![0, 1, 2, 3];
        for q in quantities {
            let t = convergence_study(&cfg, q)?;
            println!("{} on {} (exact {:?})", t.quantity, t.surface, t.oracle);
            print!("{}", t.to_csv());
            println!("observed order: {}\n", t.observed_order.map_or("n/a".into(), |o| format!("{o:.2}")));
        }
    }
    Ok(())
}
