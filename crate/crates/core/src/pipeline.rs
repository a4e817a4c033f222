//! Generate → assemble → solve → verify over a refinement ladder, with file
//! output and convergence studies.
//!
//! Artifacts of a run, all in the output directory:
//!
//! | file | content |
//! |---|---|
//! | `mesh_L{l}.off` | mesh at level `l` |
//! | `jacobi_L{l}.csv` | `index,eigenvalue,residual` of the Jacobi form |
//! | `hodge_L{l}.csv` | `index,eigenvalue,residual` of the absolute `Δ₁` |
//! | `jacobi_L{l}_{A,B}.mtx` | operator pair, when `matrix_market` is set |
//! | `levels.csv` | one summary row per level, see [`LEVELS_HEADER`] |
//! | `reports.json` | array of check reports |
//! | `checks.csv` | one row per report, see [`CHECKS_HEADER`] |
//! | `manifest.json` | config, config hash, artifact hashes, outcome |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::PipelineError;
use crate::geometry::{assemble_scalar_operators, shape_field, BodyModel, MassKind};
use crate::hodge::{assemble_one_form_laplacian, betti_of, eigen_one_form, BoundaryCondition, HodgeProblem};
use crate::jacobi::{assemble_jacobi, eigen_jacobi, morse_index, refinement_kernel_tol, JacobiProblem, MorseIndex};
use crate::linalg::{self, EigenOptions, SpectralResult};
use crate::mesh::write_off;
use crate::reference;
use crate::sparse::write_matrix_market;
use crate::surfaces::{critical_catenoid, refined_surface, SurfaceKind};
use crate::verify::{
    check_bc, check_eigenvalue_inequality, check_ic, check_index_bounds, check_mmi, check_ros, forms_needed,
    ladder_report, run_identity_check, CheckId, CheckReport, Discretization, EigenTable, SphereQuadrature,
};

pub const LEVELS_HEADER: &str =
    "level,vertices,edges,triangles,h_max,q_one,jacobi_lambda1,morse_index,nullity,kernel_tol,betti_abs,hodge_lambda1";
pub const CHECKS_HEADER: &str = "check,surface,resolution,level,residual_max,residual_l2,tolerance,pass,rate";

/// Absolute eigenforms handed to the boundary identity.
const BC_FORMS: usize = 4;
/// Nodes per axis of the product rule on `S²` (exact to degree 3).
const IC_NODES: usize = 2;

fn stage<E: std::error::Error + Send + Sync + 'static>(name: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage { stage: name, source: Box::new(e) }
}

/// Everything computed at one level.
pub struct LevelData {
    pub d: Discretization,
    pub jacobi: JacobiProblem,
    pub jacobi_spectrum: SpectralResult,
    pub morse: Result<MorseIndex, String>,
    pub hodge: HodgeProblem,
    pub hodge_spectrum: SpectralResult,
    pub betti: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub h_max: f64,
    pub q_one: f64,
    pub jacobi_lambda1: f64,
    pub morse_index: Option<usize>,
    pub nullity: Option<usize>,
    pub kernel_tol: f64,
    pub betti_abs: usize,
    pub hodge_lambda1: f64,
}

fn options(cfg: &RunConfig) -> EigenOptions {
    EigenOptions { seed: cfg.run.seed, ..EigenOptions::default() }
}

fn jacobi_eigenvalues(kind: SurfaceKind, res: usize, level: usize, count: usize, opts: &EigenOptions) -> Result<Vec<f64>, PipelineError> {
    let d = Discretization::new(kind, res, level).map_err(stage("generate"))?;
    let j = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball()).map_err(stage("assemble"))?;
    Ok(eigen_jacobi(&j, count, opts, None).map_err(stage("solve"))?.eigenvalues)
}

/// Solves every level of the ladder. The Jacobi kernel tolerance at level
/// `l` comes from the pair `(l, l−1)`; level 0 borrows the tolerance of the
/// pair `(1, 0)`.
pub fn solve_ladder(cfg: &RunConfig) -> Result<Vec<LevelData>, PipelineError> {
    linalg::set_deterministic(cfg.run.deterministic);
    let opts = options(cfg);
    let kind = cfg.kind();
    let res = cfg.surface.resolution;
    let count = cfg.run.jacobi_count.max(cfg.run.j_max);
    let hodge_count = cfg.run.hodge_count.max(forms_needed(cfg.run.j_max));
    let mut spectra: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut out = Vec::new();
    for &level in &cfg.run.levels {
        let d = Discretization::new(kind, res, level).map_err(stage("generate"))?;
        let jacobi = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball()).map_err(stage("assemble"))?;
        let mut jacobi_spectrum = eigen_jacobi(&jacobi, count, &opts, None).map_err(stage("solve"))?;
        spectra.insert(level, jacobi_spectrum.eigenvalues.clone());
        let (fine, coarse) = if level == 0 { (1, 0) } else { (level, level - 1) };
        for l in [fine, coarse] {
            if let std::collections::btree_map::Entry::Vacant(e) = spectra.entry(l) {
                e.insert(jacobi_eigenvalues(kind, res, l, count, &opts)?);
            }
        }
        let floor = 1e-6 * spectra[&fine].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let morse = refinement_kernel_tol(&spectra[&fine], &spectra[&coarse], floor)
            .and_then(|tol| {
                jacobi_spectrum.reclassify(tol);
                morse_index(&jacobi_spectrum)
            })
            .map_err(|e| e.to_string());
        let hodge = assemble_one_form_laplacian(&d.mesh, BoundaryCondition::Absolute).map_err(stage("assemble"))?;
        let hodge_spectrum = eigen_one_form(&hodge, hodge_count, &opts).map_err(stage("solve"))?;
        let betti = betti_of(&hodge, &opts).map_err(stage("hodge"))?.betti;
        out.push(LevelData { d, jacobi, jacobi_spectrum, morse, hodge, hodge_spectrum, betti });
    }
    Ok(out)
}

impl LevelData {
    pub fn summary(&self) -> LevelSummary {
        let n = self.d.mesh.vertex_count();
        let q_one = self.jacobi.quadratic_form(&vec![1.0; n]);
        let morse = self.morse.as_ref().ok();
        LevelSummary {
            level: self.d.level,
            vertices: n,
            edges: self.d.conn.edge_count(),
            triangles: self.d.mesh.triangle_count(),
            h_max: self.d.mesh.max_edge_length(),
            q_one,
            jacobi_lambda1: self.jacobi_spectrum.eigenvalues[0],
            morse_index: morse.map(|m| m.index),
            nullity: morse.map(|m| m.nullity),
            kernel_tol: self.jacobi_spectrum.kernel_tol,
            betti_abs: self.betti,
            hodge_lambda1: self.hodge_spectrum.eigenvalues.get(self.betti).copied().unwrap_or(f64::NAN),
        }
    }
}

pub fn levels_csv(rows: &[LevelSummary]) -> String {
    let mut s = format!("{LEVELS_HEADER}\n");
    let opt = |x: Option<usize>| x.map_or("n/a".to_string(), |v| v.to_string());
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6e},{:.12e},{:.12e},{},{},{:.6e},{},{:.12e}",
            r.level,
            r.vertices,
            r.edges,
            r.triangles,
            r.h_max,
            r.q_one,
            r.jacobi_lambda1,
            opt(r.morse_index),
            opt(r.nullity),
            r.kernel_tol,
            r.betti_abs,
            r.hodge_lambda1
        );
    }
    s
}

pub fn checks_csv(reports: &[CheckReport]) -> String {
    let mut s = format!("{CHECKS_HEADER}\n");
    for r in reports {
        let rate = r.rate.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6e},{:.6e},{:e},{},{}",
            r.check_id.name(),
            r.surface,
            r.resolution,
            r.level.map_or("n/a".to_string(), |l| l.to_string()),
            r.residual_max,
            r.residual_l2,
            r.tolerance,
            r.pass,
            rate
        );
    }
    s
}

fn not_applicable(id: CheckId, label: &str, res: usize, tol: f64, why: &str) -> CheckReport {
    let mut r = CheckReport::new(id, label, res, f64::INFINITY, f64::INFINITY, tol);
    r.pass = false;
    r.details = serde_json::json!({ "not_applicable": why });
    r
}

/// Runs the configured checks over solved levels. Interior identities, BC
/// and ROS are folded over the ladder (see [`ladder_report`]); ER and MMI
/// are reported per level; IB once for the ladder.
pub fn run_checks(cfg: &RunConfig, levels: &[LevelData]) -> Result<Vec<CheckReport>, PipelineError> {
    let explicit = !cfg.run.checks.is_empty();
    let label = cfg.kind().label();
    let res = cfg.surface.resolution;
    let j_max = cfg.run.j_max;
    let mut reports = Vec::new();
    for id in cfg.checks() {
        let tol = cfg.tolerance(id);
        match id {
            CheckId::Ic => reports.push(check_ic(&SphereQuadrature::product_gauss(IC_NODES), tol)),
            _ if id.is_interior() => {
                if levels[0].d.analytic.is_none() {
                    if explicit {
                        reports.push(not_applicable(id, &label, res, tol, "needs an analytic surface"));
                    }
                    continue;
                }
                let per: Vec<CheckReport> = levels
                    .iter()
                    .map(|l| run_identity_check(id, &l.d, tol))
                    .collect::<Result<_, _>>()
                    .map_err(stage("verify"))?;
                reports.extend(ladder_report(&per));
            }
            CheckId::Bc => {
                let per: Vec<CheckReport> = levels
                    .iter()
                    .map(|l| {
                        let k = BC_FORMS.min(l.hodge_spectrum.len());
                        check_bc(&l.d, &l.hodge_spectrum.eigenvectors[..k], &BodyModel::unit_ball(), tol)
                    })
                    .collect::<Result<_, _>>()
                    .map_err(stage("verify"))?;
                reports.extend(ladder_report(&per));
            }
            CheckId::Ros => {
                if levels.iter().all(|l| l.betti == 0) {
                    if explicit {
                        let mut r = CheckReport::new(id, &label, res, 0.0, 0.0, tol);
                        r.details = serde_json::json!({ "harmonic_forms": [], "note": "no harmonic forms" });
                        reports.push(r);
                    }
                    continue;
                }
                let per: Vec<CheckReport> = levels
                    .iter()
                    .map(|l| check_ros(&l.d, &l.jacobi, &l.hodge_spectrum.eigenvectors[..l.betti], tol))
                    .collect::<Result<_, _>>()
                    .map_err(stage("verify"))?;
                reports.extend(ladder_report(&per));
            }
            CheckId::Er => {
                for l in levels {
                    let table = EigenTable {
                        jacobi: l.jacobi_spectrum.eigenvalues.clone(),
                        hodge: l.hodge_spectrum.eigenvalues.clone(),
                        betti: l.betti,
                    };
                    let mut r = check_eigenvalue_inequality(&label, res, &table, j_max).map_err(stage("verify"))?;
                    r.tolerance = tol;
                    r.level = Some(l.d.level);
                    reports.push(r);
                }
            }
            CheckId::Mmi => {
                for l in levels {
                    let r = check_mmi(&l.d, &l.jacobi, &l.jacobi_spectrum, &l.hodge_spectrum.eigenvectors, j_max, tol)
                        .map_err(stage("verify"))?;
                    reports.push(r);
                }
            }
            CheckId::Ib => {
                // Stability is judged on the last two levels only.
                let (g, k) = cfg.topology();
                let last = levels.last().expect("nonempty ladder");
                let tail = &levels[levels.len().saturating_sub(2)..];
                let indices: Result<Vec<usize>, String> =
                    tail.iter().map(|l| l.morse.as_ref().map(|m| m.index).map_err(Clone::clone)).collect();
                let mut r = match indices {
                    Ok(ix) => check_index_bounds(&label, res, &ix, g, k, last.betti),
                    Err(e) => not_applicable(id, &label, res, tol, &format!("inconclusive index: {e}")),
                };
                r.tolerance = tol;
                r.level = Some(last.d.level);
                reports.push(r);
            }
            _ => unreachable!("all checks handled"),
        }
    }
    Ok(reports)
}

/// Writes through a temporary file and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects artifacts for the manifest.
pub struct OutputDir {
    root: PathBuf,
    pub artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        write_atomic(&self.root.join(name), bytes)?;
        self.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    /// Writes `manifest.json`; `failed_stage` marks partial output.
    pub fn finish(&self, cfg: &RunConfig, all_pass: Option<bool>, failed_stage: Option<&str>) -> Result<(), PipelineError> {
        let manifest = serde_json::json!({
            "config": cfg,
            "config_hash": sha256_hex(cfg.canonical_json().as_bytes()),
            "artifacts": self.artifacts,
            "complete": failed_stage.is_none(),
            "failed_stage": failed_stage,
            "all_pass": all_pass,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_atomic(&self.root.join("manifest.json"), text.as_bytes())?;
        Ok(())
    }
}

/// Which artifacts a run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stages {
    /// Meshes only.
    Generate,
    /// Meshes and Jacobi spectra.
    Spectrum,
    /// Meshes and Hodge spectra.
    Hodge,
    /// Everything, including checks.
    All,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub levels: Vec<LevelSummary>,
    pub reports: Vec<CheckReport>,
    /// True iff every report passes.
    pub all_pass: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }
}

/// The full pipeline; see the module docs for the artifacts.
pub fn run_config(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, PipelineError> {
    run_stages(cfg, out, Stages::All)
}

pub fn run_stages(cfg: &RunConfig, out: &Path, stages: Stages) -> Result<RunOutcome, PipelineError> {
    let mut dir = OutputDir::create(out)?;
    match run_into(cfg, &mut dir, stages) {
        Ok(outcome) => {
            dir.finish(cfg, Some(outcome.all_pass), None)?;
            Ok(outcome)
        }
        Err(e) => {
            let name = match &e {
                PipelineError::Stage { stage, .. } => *stage,
                PipelineError::Config { .. } => "config",
                PipelineError::Io(_) => "write",
            };
            dir.finish(cfg, None, Some(name))?;
            Err(e)
        }
    }
}

fn run_into(cfg: &RunConfig, dir: &mut OutputDir, stages: Stages) -> Result<RunOutcome, PipelineError> {
    if let Err((key, message)) = cfg.validate() {
        return Err(PipelineError::Config { line: 0, message: format!("{key}: {message}") });
    }
    linalg::set_deterministic(cfg.run.deterministic);
    if stages == Stages::Generate {
        for &level in &cfg.run.levels {
            let (mesh, _) = refined_surface(cfg.kind(), cfg.surface.resolution, level).map_err(stage("generate"))?;
            let mut buf = Vec::new();
            write_off(&mesh, &mut buf)?;
            dir.write(&format!("mesh_L{level}.off"), &buf)?;
        }
        return Ok(RunOutcome { levels: vec![], reports: vec![], all_pass: true });
    }
    let levels = solve_ladder(cfg)?;
    for l in &levels {
        let lv = l.d.level;
        let mut buf = Vec::new();
        write_off(&l.d.mesh, &mut buf)?;
        dir.write(&format!("mesh_L{lv}.off"), &buf)?;
        if stages != Stages::Hodge {
            dir.write(&format!("jacobi_L{lv}.csv"), l.jacobi_spectrum.to_csv().as_bytes())?;
            if cfg.run.matrix_market {
                for (name, m) in [("A", &l.jacobi.pair.a), ("B", &l.jacobi.pair.b)] {
                    let mut buf = Vec::new();
                    write_matrix_market(m, &mut buf)?;
                    dir.write(&format!("jacobi_L{lv}_{name}.mtx"), &buf)?;
                }
            }
        }
        if stages != Stages::Spectrum {
            dir.write(&format!("hodge_L{lv}.csv"), l.hodge_spectrum.to_csv().as_bytes())?;
            if cfg.run.matrix_market {
                for (name, m) in [("A", &l.hodge.pair.a), ("B", &l.hodge.pair.b)] {
                    let mut buf = Vec::new();
                    write_matrix_market(m, &mut buf)?;
                    dir.write(&format!("hodge_L{lv}_{name}.mtx"), &buf)?;
                }
            }
        }
    }
    let summaries: Vec<LevelSummary> = levels.iter().map(LevelData::summary).collect();
    dir.write("levels.csv", levels_csv(&summaries).as_bytes())?;
    let reports = if stages == Stages::All { run_checks(cfg, &levels)? } else { vec![] };
    if stages == Stages::All {
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";
        dir.write("reports.json", json.as_bytes())?;
        dir.write("checks.csv", checks_csv(&reports).as_bytes())?;
    }
    let all_pass = reports.iter().all(|r| r.pass);
    Ok(RunOutcome { levels: summaries, reports, all_pass })
}

/// Scalars tracked by [`convergence_study`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Lowest nonzero Neumann eigenvalue of the cotangent Laplacian.
    NeumannLambda1,
    /// Total mesh area.
    Area,
    /// Largest `‖A‖²` estimated from the mesh, away from the boundary.
    A2Max,
    /// Lowest Jacobi eigenvalue.
    JacobiLambda1,
    /// Lowest nonzero eigenvalue of the absolute `Δ₁`.
    HodgeLambda1,
}

impl Quantity {
    pub const ALL: [Quantity; 5] =
        [Quantity::NeumannLambda1, Quantity::Area, Quantity::A2Max, Quantity::JacobiLambda1, Quantity::HodgeLambda1];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::NeumannLambda1 => "neumann_lambda1",
            Quantity::Area => "area",
            Quantity::A2Max => "a2_max",
            Quantity::JacobiLambda1 => "jacobi_lambda1",
            Quantity::HodgeLambda1 => "hodge_lambda1",
        }
    }

    pub fn parse(s: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| q.name() == s.trim())
    }

    /// Exact value where one is known.
    pub fn oracle(&self, kind: SurfaceKind) -> Option<f64> {
        match (self, kind) {
            (Quantity::NeumannLambda1 | Quantity::HodgeLambda1, SurfaceKind::Disk) => {
                Some(reference::j1_prime_first_zero().powi(2))
            }
            (Quantity::Area, SurfaceKind::Disk) => Some(std::f64::consts::PI),
            (Quantity::A2Max, SurfaceKind::Disk) => Some(0.0),
            (Quantity::A2Max, SurfaceKind::Catenoid) => Some(2.0 / critical_catenoid().neck.powi(2)),
            (Quantity::JacobiLambda1, SurfaceKind::Disk) => Some(-reference::kappa_star().powi(2)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub level: usize,
    pub h: f64,
    pub value: f64,
    pub error: Option<f64>,
    /// `e_{l−1} / e_l`.
    pub ratio: Option<f64>,
    /// `log₂` of the ratio; `None` ("n/a") when errors do not decrease.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyTable {
    pub quantity: String,
    pub surface: String,
    pub oracle: Option<f64>,
    pub rows: Vec<StudyRow>,
    /// Rate over the last two levels with an error, or `None`.
    pub observed_order: Option<f64>,
}

impl StudyTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,value,error,ratio,rate\n");
        let f = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.6e},{:.12e},{},{},{}", r.level, r.h, r.value, f(r.error), f(r.ratio), f(r.rate));
        }
        s
    }
}

fn measure(q: Quantity, d: &Discretization, opts: &EigenOptions) -> Result<f64, PipelineError> {
    Ok(match q {
        Quantity::Area => d.mesh.total_area(),
        Quantity::NeumannLambda1 => {
            let ops = assemble_scalar_operators(&d.mesh, MassKind::Lumped).map_err(stage("assemble"))?;
            let (vals, _, _) = linalg::smallest_eigenpairs(&ops.stiffness, &ops.mass, 2, opts).map_err(stage("solve"))?;
            vals[1]
        }
        Quantity::A2Max => {
            let est = shape_field(&d.mesh, None).map_err(stage("geometry"))?;
            let strip = d.conn.boundary_strip(1);
            (0..d.mesh.vertex_count()).filter(|&v| !strip[v]).map(|v| est.a2[v]).fold(0.0, f64::max)
        }
        Quantity::JacobiLambda1 => {
            let j = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball()).map_err(stage("assemble"))?;
            eigen_jacobi(&j, 1, opts, None).map_err(stage("solve"))?.eigenvalues[0]
        }
        Quantity::HodgeLambda1 => {
            let p = assemble_one_form_laplacian(&d.mesh, BoundaryCondition::Absolute).map_err(stage("assemble"))?;
            let b = betti_of(&p, opts).map_err(stage("hodge"))?;
            let r = eigen_one_form(&p, b.betti + 1, opts).map_err(stage("solve"))?;
            r.eigenvalues[b.betti]
        }
    })
}

/// Tracks `q` over the ladder. Errors are taken against the oracle when one
/// exists, otherwise against the finest level (which then has no error).
/// A rate is reported only while errors decrease.
pub fn convergence_study(cfg: &RunConfig, q: Quantity) -> Result<StudyTable, PipelineError> {
    linalg::set_deterministic(cfg.run.deterministic);
    let opts = options(cfg);
    let kind = cfg.kind();
    let mut values = Vec::new();
    for &level in &cfg.run.levels {
        let d = Discretization::new(kind, cfg.surface.resolution, level).map_err(stage("generate"))?;
        values.push((level, d.mesh.max_edge_length(), measure(q, &d, &opts)?));
    }
    let oracle = q.oracle(kind);
    let reference_value = oracle.unwrap_or_else(|| values.last().map_or(0.0, |v| v.2));
    let last = values.len() - 1;
    let errors: Vec<Option<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (oracle.is_some() || i < last).then(|| (v.2 - reference_value).abs()))
        .collect();
    let mut rows = Vec::new();
    let mut monotone = true;
    for (i, &(level, h, value)) in values.iter().enumerate() {
        let (ratio, rate) = match (i.checked_sub(1).and_then(|p| errors[p]), errors[i]) {
            (Some(prev), Some(cur)) if cur > 0.0 => {
                monotone &= cur < prev;
                let ratio = prev / cur;
                (Some(ratio), monotone.then(|| ratio.log2()))
            }
            (Some(_), Some(_)) => (None, None),
            _ => (None, None),
        };
        rows.push(StudyRow { level, h, value, error: errors[i], ratio, rate });
    }
    let observed_order = rows.iter().rev().find_map(|r| r.rate).filter(|_| monotone);
    Ok(StudyTable { quantity: q.name().into(), surface: kind.label(), oracle, rows, observed_order })
}

/// Runs [`convergence_study`] for each quantity and writes
/// `study_{quantity}.csv`, `study.json` and the manifest. Quantities that
/// fail (for example no nonzero Hodge eigenvalue) abort the study.
pub fn run_study(cfg: &RunConfig, out: &Path, quantities: &[Quantity]) -> Result<Vec<StudyTable>, PipelineError> {
    let mut dir = OutputDir::create(out)?;
    let mut tables = Vec::new();
    let result = (|| {
        for &q in quantities {
            let t = convergence_study(cfg, q)?;
            dir.write(&format!("study_{}.csv", q.name()), t.to_csv().as_bytes())?;
            tables.push(t);
        }
        let json = serde_json::to_string_pretty(&tables).expect("tables serialize") + "\n";
        dir.write("study.json", json.as_bytes())
    })();
    match result {
        Ok(()) => {
            dir.finish(cfg, Some(true), None)?;
            Ok(tables)
        }
        Err(e) => {
            dir.finish(cfg, None, Some("study"))?;
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{KindName, SurfaceConfig};

    fn disk(levels: Vec<usize>) -> RunConfig {
        let mut c = RunConfig::new(SurfaceConfig { kind: KindName::Disk, resolution: 4, genus: None, boundaries: None });
        c.run.levels = levels;
        c.run.deterministic = true;
        c
    }

    #[test]
    fn disk_area_converges_at_second_order() {
        let t = convergence_study(&disk(vec![0, 1, 2]), Quantity::Area).unwrap();
        let order = t.observed_order.unwrap();
        assert!((order - 2.0).abs() < 0.2, "{order}");
        assert!(t.to_csv().starts_with("level,h,value,error,ratio,rate\n"));
    }

    #[test]
    fn non_monotone_errors_give_no_rate() {
        // Without an oracle the finest level has no error and no rate.
        let mut c = disk(vec![0, 1]);
        c.surface.kind = KindName::Catenoid;
        c.surface.resolution = 6;
        let t = convergence_study(&c, Quantity::Area).unwrap();
        assert!(t.rows[1].error.is_none());
        assert!(t.observed_order.is_none());
        assert!(t.to_csv().contains("n/a"));
    }

    #[test]
    fn disk_run_writes_artifacts_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = disk(vec![1, 2]);
        c.run.checks = vec!["ER".into(), "IB".into()];
        let out = run_config(&c, dir.path()).unwrap();
        assert!(out.all_pass, "{:?}", out.reports);
        assert_eq!(out.exit_code(), 0);
        assert_eq!(out.levels[1].morse_index, Some(1));
        assert!(out.levels[1].jacobi_lambda1 < 0.0 && out.levels[1].hodge_lambda1 > 0.0);
        for f in ["mesh_L1.off", "jacobi_L2.csv", "hodge_L2.csv", "levels.csv", "reports.json", "checks.csv", "manifest.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["complete"], true);
        assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
        assert!(!dir.path().join("levels.csv.tmp").exists());
    }

    #[test]
    fn generate_only_writes_meshes() {
        let dir = tempfile::tempdir().unwrap();
        run_stages(&disk(vec![0]), dir.path(), Stages::Generate).unwrap();
        assert!(dir.path().join("mesh_L0.off").exists());
        assert!(!dir.path().join("levels.csv").exists());
    }
}
