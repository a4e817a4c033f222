//! The whole pipeline from a TOML configuration, as `fbms-lab verify` runs
//! it, with the exit status rule applied.
//!
//!     cargo run --release --example run_config -- config.toml out_dir

use fbms_lab::config::RunConfig;
use fbms_lab::pipeline::run_config;

const DEFAULT: &str = r#"
[surface]
kind = "catenoid"
resolution = 6

[run]
levels = [0, 1, 2]
deterministic = true
seed = 7
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => RunConfig::load(std::path::Path::new(&path))?,
        None => RunConfig::parse(DEFAULT)?,
    };
    let out = args.next().unwrap_or_else(|| "run_out".into());
    let outcome = run_config(&cfg, std::path::Path::new(&out))?;
    for r in &outcome.reports {
        println!("{:6} level {:?}: {:.3e} <= {:.1e}? {}", r.check_id.name(), r.level, r.residual_max, r.tolerance, r.pass);
    }
    println!("exit status would be {}", outcome.exit_code());
    Ok(())
}
