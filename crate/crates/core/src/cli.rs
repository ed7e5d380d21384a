//! Command-line front end: argument parsing, configuration and the six
//! subcommands. `main.rs` only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 a property check failed, 2 bad input, 3 the
//! integration left its valid region or the step was unusable.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::austere::{
    check_hypersurface_austere, check_stark, classify, complex_compatibility_defect, hypersurface_residuals,
    lift_charpoly_identity_check, lift_odd_functions, matrix_rows, ShapeError, ShapeOperatorRep,
};
use crate::canonform::{reduce_to_canonical, Kind};
use crate::helix::{self, closure, spectrum, sweep, write_points_csv, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL};
use crate::matcore::ComplexMatrix3;
use crate::starkflow::{
    first_integrals, integrate_flow, to_reduced, write_flow_csv, FlowConfig, FlowError, FrameScalars,
};
use crate::surface::{build_surface, write_grid_csv, SurfaceError};
use crate::DEFAULT_TOL;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Property(String),
    #[error("{0}")]
    Region(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Property(_) => 1,
            CliError::Input(_) => 2,
            CliError::Region(_) => 3,
        }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::NotStark | ShapeError::ToleranceBreach { .. } => CliError::Property(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::OutsideValidRegion { .. } | FlowError::StepUnderflow { .. } | FlowError::UDegenerate => {
                CliError::Region(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Flow(f) => f.into(),
            SurfaceError::MuZero | SurfaceError::NonUnitaryDrift(_) => CliError::Region(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "stark", version, about = "Austere and stark shape operators, reduced flow, and hypersurface construction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Austere, stark and Hopf-lift checks on a matrix file.
    Check(CheckArgs),
    /// Reduce a stark matrix to canonical form.
    Canon(CanonArgs),
    /// Integrate the reduced flow and export it as CSV.
    Flow(RunArgs),
    /// Full construction: flow, surface frames, helix sweep.
    Construct(RunArgs),
    /// Helix spectrum and closure for given frame scalars.
    Helix(HelixArgs),
    /// Built-in self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub matrix: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Subset of checks that decide the exit code.
    #[arg(long, value_delimiter = ',', default_values_t = vec![CheckKind::Austere, CheckKind::Stark, CheckKind::Lift])]
    pub checks: Vec<CheckKind>,
    /// Write the JSON report here as well.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Austere,
    Stark,
    Lift,
}

impl std::fmt::Display for CheckKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckKind::Austere => "austere",
            CheckKind::Stark => "stark",
            CheckKind::Lift => "lift",
        })
    }
}

#[derive(Debug, Args)]
pub struct CanonArgs {
    pub matrix: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HelixArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEN)]
    pub max_den: u64,
    #[arg(long, default_value_t = DEFAULT_RATIO_TOL)]
    pub ratio_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Flow and construct share the configuration file plus per-field overrides.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Flat JSON configuration; every field is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: PipelineConfig,
}

/// Every field optional; see [`ResolvedConfig`] for defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    /// Flow integration step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Node spacing of the surface grid (construct).
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub s_count: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub ratio_tol: Option<f64>,
    #[arg(long)]
    pub max_den: Option<u64>,
    /// Largest acceptable first-integral and ratio drift.
    #[arg(long)]
    pub drift_tol: Option<f64>,
    #[arg(long)]
    pub flow_out: Option<PathBuf>,
    #[arg(long)]
    pub points_out: Option<PathBuf>,
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    /// Fields set in `other` win.
    pub fn merged(&self, other: &PipelineConfig) -> PipelineConfig {
        macro_rules! pick {
            ($($f:ident),*) => { PipelineConfig { $($f: other.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        pick!(
            c0, d0, v0, beta0, mu0, kappa0, x_min, x_max, y_min, y_max, step, grid_step, s_min, s_max, s_count, tol,
            ratio_tol, max_den, drift_tol, flow_out, points_out, grid_out, report_out
        )
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, CliError> {
        let frame_seed = [self.beta0, self.mu0, self.kappa0];
        let fi_seed = [self.c0, self.d0, self.v0];
        let (c0, d0, v0) = if frame_seed.iter().any(Option::is_some) {
            if fi_seed.iter().any(Option::is_some) {
                return Err(CliError::Input("give either (c0, d0, v0) or (beta0, mu0, kappa0), not both".into()));
            }
            let [Some(beta), Some(mu), Some(kappa)] = frame_seed else {
                return Err(CliError::Input("beta0, mu0 and kappa0 must all be set".into()));
            };
            let fs = FrameScalars::new(beta, mu, kappa)?;
            let rs = to_reduced(fs)?;
            let fi = first_integrals(rs);
            (fi.c, fi.d, rs.v)
        } else {
            // default seed: (t, u, v) = (1, 1, 1)
            (self.c0.unwrap_or(-1.0 / 3.0), self.d0.unwrap_or(2.0 / 3.0), self.v0.unwrap_or(1.0))
        };
        let r = ResolvedConfig {
            flow: FlowConfig {
                c0,
                d0,
                v0,
                x_min: self.x_min.unwrap_or(0.0),
                x_max: self.x_max.unwrap_or(0.1),
                y_min: self.y_min.unwrap_or(0.0),
                y_max: self.y_max.unwrap_or(0.1),
                step: self.step.unwrap_or(1e-3),
            },
            grid_step: self.grid_step.unwrap_or(0.02),
            s_min: self.s_min.unwrap_or(0.0),
            s_max: self.s_max.unwrap_or(2.0 * PI),
            s_count: self.s_count.unwrap_or(16),
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            ratio_tol: self.ratio_tol.unwrap_or(DEFAULT_RATIO_TOL),
            max_den: self.max_den.unwrap_or(DEFAULT_MAX_DEN),
            drift_tol: self.drift_tol.unwrap_or(1e-7),
            flow_out: self.flow_out.clone(),
            points_out: self.points_out.clone(),
            grid_out: self.grid_out.clone(),
            report_out: self.report_out.clone(),
        };
        for (name, v) in [("step", r.flow.step), ("grid_step", r.grid_step), ("tol", r.tol), ("ratio_tol", r.ratio_tol), ("drift_tol", r.drift_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if r.s_count == 0 || r.max_den == 0 {
            return Err(CliError::Input("s_count and max_den must be positive".into()));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub flow: FlowConfig,
    pub grid_step: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_count: usize,
    pub tol: f64,
    pub ratio_tol: f64,
    pub max_den: u64,
    pub drift_tol: f64,
    pub flow_out: Option<PathBuf>,
    pub points_out: Option<PathBuf>,
    pub grid_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
}

impl ResolvedConfig {
    pub fn s_samples(&self) -> Vec<f64> {
        if self.s_count == 1 {
            return vec![self.s_min];
        }
        let h = (self.s_max - self.s_min) / (self.s_count - 1) as f64;
        (0..self.s_count).map(|i| self.s_min + h * i as f64).collect()
    }
}

/// Result of a subcommand: text for stdout and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub code: i32,
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn load_rep(path: &Path) -> Result<ShapeOperatorRep, CliError> {
    Ok(ShapeOperatorRep::from_json(&read_to_string(path)?)?)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome, CliError> {
    let rep = load_rep(&args.matrix)?;
    let tol = args.tol;
    let austere = check_hypersurface_austere(&rep, tol);
    let stark = check_stark(&rep, tol);
    let odd = lift_odd_functions(&rep);
    let lift_vanish = odd.iter().all(|x| x.abs() < tol);
    let lift_identity = lift_charpoly_identity_check(&rep, tol);
    let lift = lift_identity && lift_vanish == austere;
    let classification = if stark { classify(&rep, tol).ok() } else { None };

    let verdict = |k: CheckKind| match k {
        CheckKind::Austere => austere,
        CheckKind::Stark => stark,
        CheckKind::Lift => lift,
    };
    let passed = args.checks.iter().all(|&k| verdict(k));
    let report = json!({
        "n": rep.n(),
        "austere": austere,
        "austere_residuals": hypersurface_residuals(&rep),
        "stark": stark,
        "compatibility_defect": complex_compatibility_defect(&rep),
        "hopf_lift": {
            "identity": lift_identity,
            "odd_functions": odd,
            "odd_vanish": lift_vanish,
        },
        "classification": classification,
        "checks": args.checks,
        "passed": passed,
    });
    if let Some(p) = &args.json {
        write_file(p, pretty(&report).as_bytes())?;
    }
    let mut s = String::new();
    s += &format!("austere: {austere}\n");
    s += &format!("stark: {stark}\n");
    s += &format!("hopf-lift: {lift} (identity {lift_identity}, odd functions vanish {lift_vanish})\n");
    if let Some(c) = &classification {
        s += &format!(
            "hopf: {} (violation {:e}), reducible: {}, blocks: {:?}{}\n",
            c.is_hopf,
            c.hopf_violation,
            c.reducible,
            c.invariant_block_dims,
            if c.degenerate { ", degenerate" } else { "" }
        );
    }
    s += &pretty(&report);
    s.push('\n');
    Ok(Outcome { summary: s, code: if passed { 0 } else { 1 } })
}

pub fn cmd_canon(args: &CanonArgs) -> Result<Outcome, CliError> {
    let rep = load_rep(&args.matrix)?;
    let form = reduce_to_canonical(&rep, args.tol)?;
    let (k, l) = form.dims;
    let report = json!({
        "kind": form.kind,
        "k": k,
        "l": l,
        "residual": form.residual,
        "phi_residual": form.phi_residual,
        "degenerate": form.degenerate,
        "S": matrix_rows(&form.s),
        "d": form.d.iter().copied().collect::<Vec<f64>>(),
        "P": form.p.as_ref().map(matrix_rows),
        "Q": form.q.as_ref().map(matrix_rows),
        "transform": matrix_rows(&form.transform),
    });
    let text = pretty(&report);
    if let Some(p) = &args.out {
        write_file(p, text.as_bytes())?;
    }
    let head = match form.kind {
        Kind::Irreducible => "kind: irreducible".to_string(),
        Kind::Reducible => format!("kind: reducible (k = {k}, l = {l})"),
    };
    Ok(Outcome { summary: format!("{head}\n{text}\n"), code: 0 })
}

fn load_config(args: &RunArgs) -> Result<ResolvedConfig, CliError> {
    let base = match &args.config {
        Some(p) => PipelineConfig::from_json(&read_to_string(p)?)?,
        None => PipelineConfig::default(),
    };
    base.merged(&args.overrides).resolve()
}

pub fn cmd_flow(args: &RunArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(args)?;
    let field = integrate_flow(&cfg.flow)?;
    let drift = field.drift();
    let mut csv_bytes = Vec::new();
    write_flow_csv(&field, &mut csv_bytes).map_err(|e| CliError::Input(e.to_string()))?;
    let out = cfg.flow_out.clone().unwrap_or_else(|| PathBuf::from("flow.csv"));
    write_file(&out, &csv_bytes)?;
    let ratio_ok = drift.ratio.is_none_or(|r| r < cfg.drift_tol);
    let passed = drift.first_integral < cfg.drift_tol && ratio_ok;
    let summary = format!(
        "flow: {} x {} samples -> {}\nfirst-integral drift: {:e}\nratio drift: {}\n",
        field.nx(),
        field.ny(),
        out.display(),
        drift.first_integral,
        drift.ratio.map_or("n/a (B near 0)".into(), |r| format!("{r:e}")),
    );
    Ok(Outcome { summary, code: if passed { 0 } else { 1 } })
}

/// Everything `construct` produces, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub points_csv: Vec<u8>,
    pub grid_csv: Vec<u8>,
    pub report: serde_json::Value,
    pub passed: bool,
}

pub fn construct(cfg: &ResolvedConfig) -> Result<Construction, CliError> {
    let flow_cfg = FlowConfig { step: cfg.grid_step, ..cfg.flow };
    let (field, grid) = build_surface(&flow_cfg, &ComplexMatrix3::identity())?;
    let drift = field.drift();
    let points = sweep(&grid, &cfg.s_samples());

    let closures: Vec<serde_json::Value> = (0..grid.ny())
        .flat_map(|iy| (0..grid.nx()).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| {
            let fs = grid.scalars[grid.index(ix, iy)];
            let c = closure(spectrum(fs), cfg.max_den, cfg.ratio_tol);
            json!({
                "x": grid.xs[ix], "y": grid.ys[iy],
                "beta": fs.beta, "mu": fs.mu, "kappa": fs.kappa,
                "nu": c.nu, "closed": c.closed, "L": c.length, "n1": c.n1, "n2": c.n2,
            })
        })
        .collect();

    let ratio_ok = drift.ratio.is_none_or(|r| r < cfg.drift_tol);
    let passed = drift.first_integral < cfg.drift_tol && ratio_ok && grid.max_unitarity_defect() < cfg.tol;
    let report = json!({
        "seed": { "c0": cfg.flow.c0, "d0": cfg.flow.d0, "v0": cfg.flow.v0 },
        "nodes": [grid.nx(), grid.ny()],
        "grid_step": cfg.grid_step,
        "s_samples": cfg.s_count,
        "points": points.len(),
        "max_first_integral_drift": drift.first_integral,
        "seed_ratio": drift.seed_ratio,
        "max_ratio_drift": drift.ratio,
        "max_frame_residual": grid.max_residual(),
        "max_unitarity_defect": grid.max_unitarity_defect(),
        "real_plane_defect": grid.real_plane_defect(),
        "closure": closures,
        "passed": passed,
    });
    let mut points_csv = Vec::new();
    write_points_csv(&points, &mut points_csv).map_err(|e| CliError::Input(e.to_string()))?;
    let mut grid_csv = Vec::new();
    write_grid_csv(&grid, &mut grid_csv).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Construction { points_csv, grid_csv, report, passed })
}

pub fn cmd_construct(args: &RunArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(args)?;
    let built = construct(&cfg)?;
    let points = cfg.points_out.clone().unwrap_or_else(|| PathBuf::from("points.csv"));
    let grid = cfg.grid_out.clone().unwrap_or_else(|| PathBuf::from("grid.csv"));
    let report = cfg.report_out.clone().unwrap_or_else(|| PathBuf::from("report.json"));
    write_file(&points, &built.points_csv)?;
    write_file(&grid, &built.grid_csv)?;
    write_file(&report, pretty(&built.report).as_bytes())?;
    let r = &built.report;
    let summary = format!(
        "construct: {} points -> {}\ngrid -> {}\nreport -> {}\nfirst-integral drift: {}\nratio drift: {}\nframe residual: {}\npassed: {}\n",
        r["points"],
        points.display(),
        grid.display(),
        report.display(),
        r["max_first_integral_drift"],
        r["max_ratio_drift"],
        r["max_frame_residual"],
        built.passed
    );
    Ok(Outcome { summary, code: if built.passed { 0 } else { 1 } })
}

pub fn cmd_helix(args: &HelixArgs) -> Result<Outcome, CliError> {
    let fs = FrameScalars::new(args.beta, args.mu, args.kappa)?;
    let spec = helix::helix_spec(fs, args.max_den, args.ratio_tol);
    let text = serde_json::to_string_pretty(&spec.closure).expect("closure report serializes");
    if let Some(p) = &args.out {
        write_file(p, text.as_bytes())?;
    }
    let verdict = match spec.closure.length {
        Some(l) => format!("closed, L = {l}"),
        None if spec.closure.closed => "closed at every length".into(),
        None => "not closed at this resolution".into(),
    };
    Ok(Outcome {
        summary: format!("nu: {:?} (sum {:e})\n{verdict}\n{text}\n", spec.nu, spec.nu.iter().sum::<f64>()),
        code: 0,
    })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    use crate::sample;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let mut lines = Vec::new();
    let mut all = true;
    let mut record = |name: &str, ok: bool, detail: String| {
        all &= ok;
        lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
    };

    let mut worst_lift: f64 = 0.0;
    let mut worst_canon: f64 = 0.0;
    let mut kinds_ok = true;
    for n in 1..=4 {
        for _ in 0..50 {
            let (m, kind, dims) = sample::random_stark(n, &mut rng);
            let rep = ShapeOperatorRep::standard(m)?;
            worst_lift = lift_odd_functions(&rep).iter().fold(worst_lift, |a, x| a.max(x.abs()));
            match reduce_to_canonical(&rep, DEFAULT_TOL) {
                Ok(f) => {
                    worst_canon = worst_canon.max(f.residual);
                    kinds_ok &= f.kind == kind && f.dims == dims;
                }
                Err(_) => kinds_ok = false,
            }
        }
    }
    record("hopf lift", worst_lift < 1e-9, format!("max odd function {worst_lift:e}"));
    record("canonical form", kinds_ok && worst_canon < 1e-9, format!("max residual {worst_canon:e}"));

    let flow = integrate_flow(&FlowConfig {
        c0: -1.0 / 3.0,
        d0: 2.0 / 3.0,
        v0: 1.0,
        x_min: 0.0,
        x_max: 0.0,
        y_min: 0.0,
        y_max: 0.5,
        step: 1e-3,
    })?;
    let d = flow.drift();
    let ratio = d.ratio.unwrap_or(f64::INFINITY);
    record("first integrals", d.first_integral < 1e-8 && ratio < 1e-7, format!("drift {:e}, ratio drift {ratio:e}", d.first_integral));

    let fs = FrameScalars::new(3.0, 0.0, 0.0)?;
    let c = closure(spectrum(fs), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
    let l = c.length.unwrap_or(f64::NAN);
    let f = helix::frenet_integrate(&ComplexMatrix3::identity(), fs, &[l]);
    let defect = f.first().map_or(f64::INFINITY, |fl| helix::phase_closure_defect(&ComplexMatrix3::identity(), fl));
    record("helix closure", (l - PI).abs() < 1e-9 && defect < 1e-8, format!("L = {l}, phase defect {defect:e}"));

    let base = FlowConfig { x_max: 0.2, y_max: 0.2, ..flow_cfg_seed() };
    let r1 = build_surface(&FlowConfig { step: 0.02, ..base }, &ComplexMatrix3::identity())?.1.max_residual();
    let r2 = build_surface(&FlowConfig { step: 0.01, ..base }, &ComplexMatrix3::identity())?.1.max_residual();
    record("frobenius", r1 / r2 >= 3.5, format!("residual {r1:e} -> {r2:e}"));

    Ok(Outcome { summary: lines.join("\n") + "\n", code: if all { 0 } else { 1 } })
}

fn flow_cfg_seed() -> FlowConfig {
    FlowConfig {
        c0: -1.0 / 3.0,
        d0: 2.0 / 3.0,
        v0: 1.0,
        x_min: 0.0,
        x_max: 0.0,
        y_min: 0.0,
        y_max: 0.0,
        step: 1e-3,
    }
}

/// Parse-free entry point used by the binary.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Canon(a) => cmd_canon(a),
        Command::Flow(a) => cmd_flow(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Helix(a) => cmd_helix(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            print!("{}", o.summary);
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
