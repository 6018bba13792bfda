//! Config-driven command line front end.
//!
//! Every run reads a JSON config (`"schema": 1`), writes its artifacts
//! atomically into the output directory and finishes with `manifest.json`
//! listing them together with the SHA-256 of the config bytes.
//!
//! Exit codes: 0 success, 1 a verified inequality failed, 2 configuration
//! error, 3 numerical failure (divergence, no bisection bracket).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{
    killerinterp_check, lemma1_check, obstacle_min_1d, obstacle_qp, poincare_check, reports_to_csv,
    theorem2_bounds_calibrated, wopper_check, BoundReport,
};
use crate::calibration::Calibration;
use crate::constructions::{
    branched_seed, nucleation_bump, potential_seed, BranchedSpec, BumpSpec, PotentialSpec,
};
use crate::energy::{b_geometry, energy, EnergyParams, Variant};
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};
use crate::landscape::{
    area_probe, build_start, critical_delta, local_minimality_probe, minimize, scaling_sweep, CriticalDeltaResult,
    MinimizeConfig, Start,
};
use crate::wsf;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "wellscape", version, about = "Energy landscape experiments on the strip [0, L] x [0, 1]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    ConstructBranched,
    ConstructBump,
    ConstructPotential,
    Energy,
    Minimize,
    CriticalDelta,
    SweepDelta,
    VerifyInequalities,
    ProbeLocalMin,
    #[command(name = "obstacle-1d")]
    Obstacle1d,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ConstructBranched => "construct-branched",
            Command::ConstructBump => "construct-bump",
            Command::ConstructPotential => "construct-potential",
            Command::Energy => "energy",
            Command::Minimize => "minimize",
            Command::CriticalDelta => "critical-delta",
            Command::SweepDelta => "sweep-delta",
            Command::VerifyInequalities => "verify-inequalities",
            Command::ProbeLocalMin => "probe-local-min",
            Command::Obstacle1d => "obstacle-1d",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_variant")]
    pub variant: Variant,
}

fn default_variant() -> Variant {
    Variant::E1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionConfig {
    pub a: Option<f64>,
    pub delta_x: Option<f64>,
    pub lambda: Option<f64>,
    pub j: Option<u32>,
    pub n_r: Option<usize>,
    #[serde(default)]
    pub eta_cutoff: bool,
    /// Periods of the branched seed; chosen automatically when absent.
    pub periods: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_tol_rel")]
    pub tol_rel: f64,
}

fn default_tol_rel() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// Norm cap; calibrated `r` when absent.
    pub norm_cap: Option<f64>,
    /// Area cap; calibrated `s` when absent.
    pub area_cap: Option<f64>,
}

fn default_samples() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub intervals: Vec<(f64, f64)>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    512
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub command: Option<String>,
    pub grid: Option<GridConfig>,
    pub params: Option<ParamsConfig>,
    pub construction: Option<ConstructionConfig>,
    pub sweep: Option<SweepConfig>,
    pub minimize: Option<MinimizeConfig>,
    /// Start for `minimize` when no input field is given.
    pub start: Option<Start>,
    /// WSF1 file read by `energy`, `minimize` and `verify-inequalities`.
    pub input_field: Option<PathBuf>,
    pub probe: Option<ProbeConfig>,
    pub obstacle: Option<ObstacleConfig>,
    /// Threshold `M` for the truncated interpolation check.
    pub truncation_m: Option<f64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config does not parse: {e}")))?;
        if cfg.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema {} (expected {SCHEMA})", cfg.schema)));
        }
        Ok(cfg)
    }

    fn grid(&self) -> Result<Grid> {
        let g = self.grid.ok_or_else(|| Error::Config("missing \"grid\"".into()))?;
        Grid::new(g.l, g.nx, g.ny).map_err(|e| Error::Config(e.to_string()))
    }

    fn params(&self) -> Result<EnergyParams> {
        let p = self.params.ok_or_else(|| Error::Config("missing \"params\"".into()))?;
        EnergyParams::new(p.epsilon, p.delta, p.variant).map_err(|e| Error::Config(e.to_string()))
    }

    fn construction(&self) -> ConstructionConfig {
        self.construction.clone().unwrap_or_default()
    }

    fn minimize_config(&self) -> MinimizeConfig {
        let mut m = self.minimize.clone().unwrap_or_default();
        m.seed = self.seed;
        m
    }
}

/// Collects artifacts and writes each one via temp file + rename.
pub struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub status: String,
}

/// Outcome of a subcommand that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    InequalityFailed,
}

pub fn exit_code(r: &Result<Verdict>) -> i32 {
    match r {
        Ok(Verdict::Ok) => 0,
        Ok(Verdict::InequalityFailed) => 1,
        Err(e) if e.is_numerical() => 3,
        Err(Error::Io(_)) => 2,
        Err(Error::Config(_) | Error::Json(_)) => 2,
        Err(_) => 2,
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let r = run(&cli);
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    exit_code(&r)
}

pub fn run(cli: &Cli) -> Result<Verdict> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let bytes = fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Config("config is not UTF-8".into()))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(c) = &cfg.command {
        if c != cli.command.name() {
            return Err(Error::Config(format!("config is for \"{c}\", not \"{}\"", cli.command.name())));
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(input) = &cfg.input_field {
        if input.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.input_field = Some(base.join(input));
        }
        let f = cfg.input_field.as_ref().expect("set above");
        if !f.exists() {
            return Err(Error::Config(format!("input field {} does not exist", f.display())));
        }
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set \"output_dir\"".into()))?;
    if cli.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let cal = Calibration::load().map_err(|e| Error::Config(format!("calibration: {e}")))?;
    let mut out = Output::new(&out_dir)?;
    let verdict = dispatch(cli.command, &cfg, &cal, &mut out)?;
    let manifest = Manifest {
        schema: SCHEMA,
        command: cli.command.name().into(),
        config_sha256: hex::encode(Sha256::digest(&bytes)),
        seed: cfg.seed,
        artifacts: out.artifacts().iter().cloned().chain(["manifest.json".to_string()]).collect(),
        status: match verdict {
            Verdict::Ok => "ok".into(),
            Verdict::InequalityFailed => "inequality_failed".into(),
        },
    };
    out.json("manifest.json", &manifest)?;
    Ok(verdict)
}

fn read_field(cfg: &ExperimentConfig) -> Result<Option<ScalarField>> {
    match &cfg.input_field {
        Some(p) => Ok(Some(wsf::read(fs::File::open(p)?)?)),
        None => Ok(None),
    }
}

fn write_field_and_breakdown(out: &mut Output, u: &ScalarField, p: Option<&EnergyParams>) -> Result<()> {
    out.write("field.wsf", wsf::to_string(u).as_bytes())?;
    if let Some(p) = p {
        out.json("breakdown.json", &energy(u, p)?)?;
    }
    Ok(())
}

fn bump_spec(cfg: &ExperimentConfig, grid: &Grid) -> Result<BumpSpec> {
    let c = cfg.construction();
    let need = |v: Option<f64>, k: &str| v.ok_or_else(|| Error::Config(format!("construction.{k} is required")));
    BumpSpec::new(need(c.a, "a")?, need(c.delta_x, "delta_x")?, need(c.lambda, "lambda")?, grid.l)
}

fn potential_spec(cfg: &ExperimentConfig, grid: &Grid) -> Result<PotentialSpec> {
    let c = cfg.construction();
    let mut s = PotentialSpec::new(c.j.ok_or_else(|| Error::Config("construction.j is required".into()))?, grid.l)?;
    if let Some(n) = c.n_r {
        s.n_r = n;
    }
    s.eta_cutoff = c.eta_cutoff;
    Ok(s)
}

fn branched_spec(cfg: &ExperimentConfig, grid: &Grid, epsilon: f64) -> Result<BranchedSpec> {
    match cfg.construction().periods {
        Some(n) if n > 0 => Ok(BranchedSpec::with_periods(epsilon, grid.l, n)),
        _ => BranchedSpec::new(epsilon, grid.l),
    }
}

fn dispatch(cmd: Command, cfg: &ExperimentConfig, cal: &Calibration, out: &mut Output) -> Result<Verdict> {
    match cmd {
        Command::ConstructBranched => {
            let grid = cfg.grid()?;
            let p = cfg.params()?;
            let spec = branched_spec(cfg, &grid, p.epsilon)?;
            let u = branched_seed(&spec, &grid)?;
            out.json("spec.json", &spec)?;
            write_field_and_breakdown(out, &u, Some(&p))?;
        }
        Command::ConstructBump => {
            let grid = cfg.grid()?;
            let spec = bump_spec(cfg, &grid)?;
            let u = nucleation_bump(&spec, &grid)?;
            out.json("spec.json", &spec)?;
            write_field_and_breakdown(out, &u, cfg.params.is_some().then(|| cfg.params()).transpose()?.as_ref())?;
        }
        Command::ConstructPotential => {
            let grid = cfg.grid()?;
            let spec = potential_spec(cfg, &grid)?;
            let u = potential_seed(&spec, &grid)?;
            out.json("spec.json", &spec)?;
            write_field_and_breakdown(out, &u, cfg.params.is_some().then(|| cfg.params()).transpose()?.as_ref())?;
        }
        Command::Energy => {
            let u = read_field(cfg)?.ok_or_else(|| Error::Config("\"input_field\" is required".into()))?;
            let p = cfg.params()?;
            out.json("breakdown.json", &energy(&u, &p)?)?;
            let geo = b_geometry(&u);
            out.json(
                "b_geometry.json",
                &serde_json::json!({
                    "area_B": geo.area_b,
                    "len_Pi": geo.len_pi,
                    "tau": geo.tau,
                    "pi_columns": geo.pi_columns.len(),
                }),
            )?;
        }
        Command::Minimize => {
            let p = cfg.params()?;
            let mut mcfg = cfg.minimize_config();
            mcfg.record_trace = true;
            let start = match read_field(cfg)? {
                Some(u) => u,
                None => {
                    let grid = cfg.grid()?;
                    let s = cfg.start.unwrap_or(Start::Branched { scale: 1.0 });
                    build_start(&s, &p, &grid, cfg.seed).ok_or_else(|| {
                        Error::Config(format!("start {} cannot be built on this grid", s.label()))
                    })?
                }
            };
            let r = minimize(&start, &p, &mcfg)?;
            out.write("field.wsf", wsf::to_string(&r.field).as_bytes())?;
            out.json("breakdown.json", &r.breakdown)?;
            out.json("stages.json", &r.stages)?;
            out.write("trace.jsonl", r.trace_jsonl().as_bytes())?;
        }
        Command::CriticalDelta => {
            let grid = cfg.grid()?;
            let p = cfg.params()?;
            let tol = cfg.sweep.as_ref().map_or(default_tol_rel(), |s| s.tol_rel);
            let r = critical_delta(p.epsilon, p.variant, &grid, &cfg.minimize_config(), tol, cal)?;
            out.json("critical_delta.json", &r)?;
            out.write("critical_delta.csv", sweep_csv(std::slice::from_ref(&r)).as_bytes())?;
        }
        Command::SweepDelta => {
            let grid = cfg.grid()?;
            let p = cfg.params()?;
            let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("missing \"sweep\"".into()))?;
            let s = scaling_sweep(&sweep.epsilons, p.variant, &grid, &cfg.minimize_config(), sweep.tol_rel, cal)
                .map_err(|e| match e {
                    Error::InvalidParams(m) => Error::Config(m),
                    other => other,
                })?;
            out.write("sweep.csv", sweep_csv(&s.results).as_bytes())?;
            out.json("fit.json", &s.fit)?;
        }
        Command::VerifyInequalities => {
            let reports = verify_inequalities(cfg, cal)?;
            out.write("reports.csv", reports_to_csv(&reports).as_bytes())?;
            if reports.iter().any(|r| !r.holds) {
                return Ok(Verdict::InequalityFailed);
            }
        }
        Command::ProbeLocalMin => {
            let grid = cfg.grid()?;
            let p = cfg.params()?;
            let (r, s) = theorem2_bounds_calibrated(p.epsilon, p.delta.max(f64::MIN_POSITIVE), grid.l, cal);
            let pc = cfg.probe.clone().unwrap_or(ProbeConfig { n_samples: default_samples(), norm_cap: None, area_cap: None });
            let norm = local_minimality_probe(&p, &grid, pc.n_samples, pc.norm_cap.unwrap_or(r), cfg.seed)?;
            let area = area_probe(&p, &grid, pc.n_samples, pc.area_cap.unwrap_or(s), cfg.seed)?;
            out.json("probe.json", &serde_json::json!({ "r": r, "s": s, "norm": norm, "area": area }))?;
        }
        Command::Obstacle1d => {
            let oc = cfg.obstacle.clone().ok_or_else(|| Error::Config("missing \"obstacle\"".into()))?;
            let mut csv = String::from("y1,y2,analytic,qp,rel_err\n");
            let mut profiles = String::from("y1,y2,y,f_qp,f_analytic\n");
            for &(y1, y2) in &oc.intervals {
                let a = obstacle_min_1d(y1, y2).map_err(|e| Error::Config(e.to_string()))?;
                let q = obstacle_qp(y1, y2, oc.nodes).map_err(|e| Error::Config(e.to_string()))?;
                csv.push_str(&format!("{y1:e},{y2:e},{:e},{:e},{:e}\n", a.value, q.value, (q.value - a.value) / a.value));
                // the analytic profile is shifted to share f(y1) = 0 with the QP
                let shift = a.profile(y1);
                for (y, f) in q.nodes.iter().zip(&q.profile) {
                    profiles.push_str(&format!("{y1:e},{y2:e},{y:e},{f:e},{:e}\n", a.profile(*y) - shift));
                }
            }
            out.write("obstacle.csv", csv.as_bytes())?;
            out.write("profiles.csv", profiles.as_bytes())?;
        }
    }
    Ok(Verdict::Ok)
}

pub fn sweep_csv(results: &[CriticalDeltaResult]) -> String {
    let mut s = String::from(CriticalDeltaResult::CSV_HEADER);
    s.push('\n');
    for r in results {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Runs every checker on the configured field, or on the three constructions
/// when no field is given.
pub fn verify_inequalities(cfg: &ExperimentConfig, cal: &Calibration) -> Result<Vec<BoundReport>> {
    let p = cfg.params()?;
    let m = cfg.truncation_m.unwrap_or(1e30);
    let mut fields: Vec<(String, ScalarField)> = Vec::new();
    if let Some(u) = read_field(cfg)? {
        fields.push(("input".into(), u));
    } else {
        let grid = cfg.grid()?;
        fields.push(("branched".into(), branched_seed(&branched_spec(cfg, &grid, p.epsilon)?, &grid)?));
        let c = cfg.construction();
        if c.a.is_some() {
            fields.push(("bump".into(), nucleation_bump(&bump_spec(cfg, &grid)?, &grid)?));
        }
        if c.j.is_some() {
            fields.push(("potential".into(), potential_seed(&potential_spec(cfg, &grid)?, &grid)?));
        }
    }
    let mut reports = Vec::new();
    for (name, u) in &fields {
        let tag = |mut r: BoundReport| {
            r.context = format!("field={name} {}", r.context);
            r
        };
        match lemma1_check(u) {
            Ok(r) => reports.push(tag(r)),
            Err(Error::EmptyB | Error::TauOne) => {}
            Err(e) => return Err(e),
        }
        reports.push(tag(poincare_check(u)));
        reports.push(tag(wopper_check(u, p.epsilon)));
        match killerinterp_check(u, m, cal) {
            Ok(r) => reports.push(tag(r)),
            Err(Error::EmptyB | Error::EmptyPiM) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_match_clap() {
        for c in [
            Command::ConstructBranched,
            Command::ConstructBump,
            Command::ConstructPotential,
            Command::Energy,
            Command::Minimize,
            Command::CriticalDelta,
            Command::SweepDelta,
            Command::VerifyInequalities,
            Command::ProbeLocalMin,
            Command::Obstacle1d,
        ] {
            let parsed = Cli::try_parse_from(["wellscape", c.name()]).unwrap();
            assert_eq!(parsed.command, c);
        }
    }

    #[test]
    fn schema_is_checked() {
        assert!(ExperimentConfig::parse(r#"{"schema": 1}"#).is_ok());
        assert!(matches!(ExperimentConfig::parse(r#"{"schema": 2}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse(r#"{"schema": 1, "bogus": 3}"#), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(Verdict::Ok)), 0);
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::Diverged { energy: 1.0, limit: 0.5 })), 3);
        assert_eq!(exit_code(&Err(Error::BracketNotFound { lo: 1.0, hi: 2.0 })), 3);
    }
}
