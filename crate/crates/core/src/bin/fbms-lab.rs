use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbms_lab::config::{KindName, RunConfig, SurfaceConfig};
use fbms_lab::pipeline::{run_stages, run_study, Quantity, Stages};

#[derive(Parser)]
#[command(name = "fbms-lab", version, about = "Spectra, Morse index and identity checks for free boundary minimal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the meshes of the ladder as OFF.
    Generate(Common),
    /// Jacobi spectra and Morse index per level.
    Spectrum(Common),
    /// Absolute Hodge spectra and first Betti number per level.
    Hodge(Common),
    /// Full pipeline with checks; exit status 0 iff every check passes.
    Verify(Common),
    /// Convergence table of a scalar over the ladder.
    Study {
        #[command(flatten)]
        common: Common,
        /// neumann_lambda1, area, a2_max, jacobi_lambda1 or hodge_lambda1;
        /// repeatable, default all that have an oracle.
        #[arg(long = "quantity")]
        quantities: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Disk,
    Catenoid,
    Synthetic,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Sequential kernels and fixed summation order.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Refinement levels, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Surface when no config is given.
    #[arg(long, value_enum, default_value = "disk")]
    surface: Kind,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    genus: Option<usize>,
    #[arg(long)]
    boundaries: Option<usize>,
    /// Comma-separated check names (verify only).
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?,
            None => {
                let (kind, res) = match self.surface {
                    Kind::Disk => (KindName::Disk, 4),
                    Kind::Catenoid => (KindName::Catenoid, 6),
                    Kind::Synthetic => (KindName::Synthetic, 6),
                };
                let synthetic = kind == KindName::Synthetic;
                RunConfig::new(SurfaceConfig {
                    kind,
                    resolution: self.resolution.unwrap_or(res),
                    genus: self.genus.filter(|_| synthetic),
                    boundaries: self.boundaries.filter(|_| synthetic),
                })
            }
        };
        if self.deterministic {
            cfg.run.deterministic = true;
        }
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(l) = &self.levels {
            cfg.run.levels = l.clone();
        }
        if let Some(c) = &self.checks {
            cfg.run.checks = c.clone();
        }
        cfg.validate().map_err(|(key, msg)| format!("{key}: {msg}"))?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, stages) = match &cli.command {
        Command::Generate(c) => (c, Stages::Generate),
        Command::Spectrum(c) => (c, Stages::Spectrum),
        Command::Hodge(c) => (c, Stages::Hodge),
        Command::Verify(c) => (c, Stages::All),
        Command::Study { common, .. } => (common, Stages::All),
    };
    let cfg = match common.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cfg.run.out.clone().filter(|_| common.out == PathBuf::from("out")).unwrap_or(common.out.clone());

    if let Command::Study { quantities, .. } = &cli.command {
        let qs: Result<Vec<Quantity>, String> = if quantities.is_empty() {
            Ok(Quantity::ALL.into_iter().filter(|q| q.oracle(cfg.kind()).is_some()).collect())
        } else {
            quantities.iter().map(|s| Quantity::parse(s).ok_or_else(|| format!("unknown quantity {s:?}"))).collect()
        };
        let qs = match qs {
            Ok(q) if !q.is_empty() => q,
            Ok(_) => {
                eprintln!("error: no quantity has an oracle on this surface; name one with --quantity");
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        return match run_study(&cfg, &out, &qs) {
            Ok(tables) => {
                for t in tables {
                    let order = t.observed_order.map_or("n/a".into(), |o| format!("{o:.2}"));
                    println!("{} on {}: observed order {order}", t.quantity, t.surface);
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }

    match run_stages(&cfg, &out, stages) {
        Ok(outcome) => {
            for l in &outcome.levels {
                let index = l.morse_index.map_or("n/a".into(), |i| i.to_string());
                println!(
                    "level {}: {} vertices, lambda1(J) = {:.6}, index {index}, betti {}, lambda1(hodge) = {:.6}",
                    l.level, l.vertices, l.jacobi_lambda1, l.betti_abs, l.hodge_lambda1
                );
            }
            for r in &outcome.reports {
                println!(
                    "{:<6} {:<8} residual {:.3e} (tol {:.1e})",
                    r.check_id.name(),
                    if r.pass { "pass" } else { "FAIL" },
                    r.residual_max,
                    r.tolerance
                );
            }
            println!("artifacts in {}", out.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
