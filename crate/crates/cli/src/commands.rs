use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use qetu::cheb::{self, EtaTauGrid, GaussianParts, Parity, PolyDocument, SampleMode};
use qetu::gsprep::{
    self, AdiabaticSchedule, ErrorModel, ErrorSample, EvolverKind, FilterSpec, GsReport, InitialState, Problem,
};
use qetu::models::{self, Basis, Model, ModelFile, WindowPreset};
use qetu::qsp::{self, PhaseDocument};
use qetu::sim::QetuMode;
use qetu::wavepacket::{self, Method, WavepacketRow, WavepacketSpec};

use crate::error::CliError;
use crate::output::{emit, manifest_hash, manifest_path_for, num, RunManifest, Table};
use crate::ranges;
use crate::Common;

/// Bookkeeping shared by all subcommands: parameter capture, hashing,
/// output and manifest writing.
struct Run {
    name: &'static str,
    params: Value,
    common: Common,
    hash: String,
    start: Instant,
}

impl Run {
    fn new<T: Serialize>(name: &'static str, args: &T, common: &Common) -> Result<Self, CliError> {
        let mut params = serde_json::to_value(args)?;
        if let Value::Object(m) = &mut params {
            m.remove("common");
        }
        Self::with_params(name, params, common)
    }

    fn with_params(name: &'static str, params: Value, common: &Common) -> Result<Self, CliError> {
        if common.jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        let hash = manifest_hash(name, &params, common.seed);
        Ok(Run { name, params, common: common.clone(), hash, start: Instant::now() })
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.common.jobs)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))
    }

    fn finish_table(self, table: &Table) -> Result<(), CliError> {
        let text = table.render(&self.hash);
        self.finish(&text)
    }

    fn finish_json(self, value: &Value) -> Result<(), CliError> {
        let mut v = value.clone();
        if let Value::Object(m) = &mut v {
            m.insert("manifest_sha256".into(), Value::String(self.hash.clone()));
        }
        let text = serde_json::to_string_pretty(&v)? + "\n";
        self.finish(&text)
    }

    fn finish(self, text: &str) -> Result<(), CliError> {
        emit(self.common.out.as_deref(), text)?;
        let manifest_path = self.common.manifest.clone().or_else(|| self.common.out.as_deref().map(manifest_path_for));
        if let Some(path) = manifest_path {
            let manifest = RunManifest {
                subcommand: self.name.to_string(),
                params: self.params,
                seed: self.common.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                hash: self.hash,
                outputs: self.common.out.iter().cloned().collect(),
                wall_time_s: self.start.elapsed().as_secs_f64(),
            };
            emit(Some(&path), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| CliError::usage(format!("--{what}: {e}")))
}

// ---------------------------------------------------------------------------
// solve-step

#[derive(Args, Debug, Serialize)]
pub struct SolveStepArgs {
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta_proj: f64,
    #[arg(long, default_value_t = 1.3)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.6)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = cheb::DEFAULT_C)]
    pub c: f64,
    /// Even polynomial degree.
    #[arg(long, short = 'd', default_value_t = 22)]
    pub degree: usize,
    /// Chebyshev grid size (defaults to max(2001, 40 d)).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also solve for the symmetric phase factors.
    #[arg(long)]
    pub phases: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn solve_step(a: SolveStepArgs) -> Result<(), CliError> {
    let run = Run::new("solve-step", &a, &a.common)?;
    let window = cheb::sigma_window(a.eta, a.eta_proj, a.mu, a.delta, a.tau, a.c)?;
    let (poly, report) = cheb::solve_step_poly(&window, a.degree, a.samples)?;
    let doc = PolyDocument {
        parity: poly.parity,
        degree: poly.degree,
        coeffs: poly.coeffs.clone(),
        epsilon: report.epsilon,
        window: Some(window),
        eta: None,
        tau: None,
    };
    let mut out = json!({ "poly": doc, "report": report });
    if a.phases {
        let sol = qsp::solve_phases(&poly)?;
        out["phases"] = serde_json::to_value(PhaseDocument::from(&sol))?;
    }
    run.finish_json(&out)
}

// ---------------------------------------------------------------------------
// solve-gaussian

#[derive(Args, Debug, Serialize)]
pub struct SolveGaussianArgs {
    #[arg(long, default_value_t = 4)]
    pub nq: usize,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    /// Width as a fraction of x_max.
    #[arg(long, default_value_t = 0.4)]
    pub sigma_ratio: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// `even` (one even polynomial) or `split` (even and odd parts).
    #[arg(long, default_value = "even")]
    pub parts: String,
    /// Chebyshev coefficients per part.
    #[arg(long, default_value_t = 5)]
    pub nch: usize,
    /// `all-x` or `eigenvalues-only`.
    #[arg(long, default_value = "eigenvalues-only")]
    pub mode: String,
    /// Fixed eta; searched when absent.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Fixed tau; searched when absent.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Also solve phases (even fits only).
    #[arg(long)]
    pub phases: bool,
    #[command(flatten)]
    pub common: Common,
}

fn sample_mode(s: &str) -> Result<SampleMode, CliError> {
    match s {
        "all-x" | "all_x" => Ok(SampleMode::AllX),
        "eigenvalues-only" | "eigenvalues_only" => Ok(SampleMode::EigenvaluesOnly),
        _ => Err(CliError::usage(format!("--mode: unknown sample mode {s:?}"))),
    }
}

fn gaussian_parts(s: &str) -> Result<GaussianParts, CliError> {
    match s {
        "even" => Ok(GaussianParts::Even),
        "split" => Ok(GaussianParts::Split),
        _ => Err(CliError::usage(format!("--parts: expected even or split, got {s:?}"))),
    }
}

pub fn solve_gaussian(a: SolveGaussianArgs) -> Result<(), CliError> {
    let run = Run::new("solve-gaussian", &a, &a.common)?;
    let spec = WavepacketSpec::new(a.nq, a.x_max, a.sigma_ratio * a.x_max, a.x0, 0.0)?;
    let parts = gaussian_parts(&a.parts)?;
    let mode = sample_mode(&a.mode)?;
    if parts == GaussianParts::Split && a.tau.is_some_and(|t| (t - 2.0).abs() < 1e-12) {
        return Err(CliError::usage("tau = 2 makes the target even; use --parts even"));
    }
    let pool = run.pool()?;
    let fit = match a.eta {
        Some(eta) => {
            let tau = a.tau.unwrap_or(if parts == GaussianParts::Even { 2.0 } else { 1.0 });
            cheb::fit_gaussian(&spec, parts, a.nch, eta, tau, mode)?
        }
        None => pool.install(|| cheb::optimize_eta_tau(&spec, parts, a.nch, a.tau, mode, &EtaTauGrid::default()))?,
    };
    let docs: Vec<PolyDocument> = fit
        .parts
        .iter()
        .zip(&fit.reports)
        .map(|(p, r)| PolyDocument {
            parity: p.parity,
            degree: p.degree,
            coeffs: p.coeffs.clone(),
            epsilon: r.epsilon,
            window: None,
            eta: Some(fit.eta),
            tau: Some(fit.tau),
        })
        .collect();
    let mut out = json!({
        "eta": fit.eta,
        "tau": fit.tau,
        "epsilon": fit.epsilon,
        "grid_residual": fit.grid_residual,
        "on_grid_boundary": fit.on_grid_boundary,
        "parts": docs,
    });
    if a.phases {
        let mut phases = Vec::new();
        for p in &fit.parts {
            if p.parity == Parity::None {
                return Err(CliError::usage("phases need definite-parity parts"));
            }
            phases.push(PhaseDocument::from(&qsp::solve_phases(p)?));
        }
        out["phases"] = serde_json::to_value(phases)?;
    }
    run.finish_json(&out)
}

// ---------------------------------------------------------------------------
// model selection shared by gsprep and scan-dtau

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    /// `sho` or `u1`.
    #[arg(long, default_value = "u1")]
    pub model: String,
    /// JSON model description; overrides the model flags.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long = "np", default_value_t = 3)]
    pub np: usize,
    #[arg(long, default_value_t = 2)]
    pub nq: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// `original` or `weaved`.
    #[arg(long, default_value = "original")]
    pub basis: String,
    /// Position cutoff of the oscillator grid.
    #[arg(long, default_value_t = 3.275)]
    pub x_max: f64,
    /// Margin of the rescaled spectrum inside [0, pi].
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    /// `midpoint` or `two-thirds`; ignored when --mu and --delta are given.
    #[arg(long, default_value = "two-thirds")]
    pub window: String,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

impl ModelArgs {
    fn model(&self) -> Result<Model, CliError> {
        if let Some(path) = &self.model_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("model file {}: {e}", path.display())))?;
            let file: ModelFile = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("model file {}: {e}", path.display())))?;
            return Ok(file.build()?);
        }
        match self.model.as_str() {
            "sho" => Ok(Model::Sho(models::sho_model(self.nq, self.g, self.x_max)?)),
            "u1" => {
                let basis: Basis = parse(&self.basis, "basis")?;
                Ok(Model::U1(models::u1_model(self.np, self.nq, self.g, basis)?))
            }
            other => Err(CliError::usage(format!("--model: expected sho or u1, got {other:?}"))),
        }
    }

    fn preset(&self) -> Result<WindowPreset, CliError> {
        match (self.mu, self.delta) {
            (Some(mu), Some(delta)) => Ok(WindowPreset::Custom { mu, delta }),
            (None, None) => match self.window.as_str() {
                "midpoint" => Ok(WindowPreset::Midpoint),
                "two-thirds" => Ok(WindowPreset::TwoThirdsGap),
                other => Err(CliError::usage(format!("--window: unknown preset {other:?}"))),
            },
            _ => Err(CliError::usage("--mu and --delta must be given together")),
        }
    }

    fn problem(&self) -> Result<Problem, CliError> {
        let h = self.model()?.hamiltonian()?;
        Ok(Problem::new(&h, self.eta, self.preset()?)?)
    }

    /// Parameters for the manifest, with the model file contents inlined.
    fn params<T: Serialize>(&self, args: &T) -> Result<Value, CliError> {
        let mut v = serde_json::to_value(args)?;
        if let Value::Object(m) = &mut v {
            m.remove("common");
            if let Some(path) = &self.model_file {
                let text = std::fs::read_to_string(path)?;
                let parsed: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("model file {}: {e}", path.display())))?;
                m.insert("model_file_contents".into(), parsed);
            }
        }
        Ok(v)
    }
}

const SCAN_COLUMNS: [(&str, &str); 9] = [
    ("d", "calls"),
    ("tau", "1/E_rescaled"),
    ("dtau", "1/E_rescaled"),
    ("n_steps", "steps/call"),
    ("mode", ""),
    ("error", ""),
    ("success_prob", ""),
    ("cnot", "gates"),
    ("rot", "gates"),
];

fn mode_name(m: QetuMode) -> &'static str {
    match m {
        QetuMode::Controlled => "controlled",
        QetuMode::ControlFree => "control-free",
    }
}

fn scan_row(r: &GsReport) -> Vec<String> {
    vec![
        r.d.to_string(),
        num(r.tau),
        num(r.dtau),
        r.n_steps.to_string(),
        mode_name(r.mode).to_string(),
        num(r.error),
        num(r.success_prob),
        r.gates.cnot.to_string(),
        r.gates.rotations().to_string(),
    ]
}

fn evolver_kind(evolver: &str, steps: Option<usize>, dtau: Option<f64>, t_call: f64) -> Result<EvolverKind, CliError> {
    match evolver {
        "exact" => {
            if steps.is_some() || dtau.is_some() {
                return Err(CliError::usage("--steps/--dtau need --evolver trotter"));
            }
            Ok(EvolverKind::Exact)
        }
        "trotter" => {
            let n = match (steps, dtau) {
                (Some(_), Some(_)) => return Err(CliError::usage("give either --steps or --dtau")),
                (Some(n), None) => n,
                (None, Some(dt)) if dt > 0.0 => ((t_call / dt) - 1e-9).ceil().max(1.0) as usize,
                (None, Some(_)) => return Err(CliError::usage("--dtau must be positive")),
                (None, None) => 1,
            };
            if n == 0 {
                return Err(CliError::usage("--steps must be positive"));
            }
            Ok(EvolverKind::Trotter { n_steps: n })
        }
        other => Err(CliError::usage(format!("--evolver: expected exact or trotter, got {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// gsprep

#[derive(Args, Debug, Serialize)]
pub struct GsprepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub eta_proj: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// `start:stop:step` or list; tau_max is added when it falls inside.
    #[arg(long)]
    pub tau_scan: Option<String>,
    /// Degrees as `start:stop[:step]` or list.
    #[arg(long)]
    pub degree_range: String,
    /// `exact` or `trotter`.
    #[arg(long, default_value = "exact")]
    pub evolver: String,
    /// Trotter steps per call.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Target Trotter step; steps = ceil(t_call / dtau).
    #[arg(long)]
    pub dtau: Option<f64>,
    /// `controlled` or `control-free`.
    #[arg(long, default_value = "controlled")]
    pub mode: String,
    /// `uniform`, `eigen-equal` or `random` (uses --seed).
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn gsprep(a: GsprepArgs) -> Result<(), CliError> {
    let run = Run::with_params("gsprep", a.model.params(&a)?, &a.common)?;
    let degrees = ranges::ints(&a.degree_range)?;
    let mode: QetuMode = parse(&a.mode, "mode")?;
    let init: InitialState = parse(&a.init, "init")?;
    let problem = a.model.problem()?;
    let mut taus = match &a.tau_scan {
        Some(s) => ranges::floats(s)?,
        None => vec![a.tau],
    };
    if a.tau_scan.is_some() {
        let tm = problem.params.tau_max;
        let (lo, hi) = (taus[0], taus[taus.len() - 1]);
        if tm >= lo && tm <= hi && !taus.iter().any(|t| (t - tm).abs() < 1e-9) {
            taus.push(tm);
        }
    }
    taus.sort_by(f64::total_cmp);
    let psi = problem.initial_state(init, a.common.seed)?;
    let mut jobs = Vec::new();
    for &d in &degrees {
        for &tau in &taus {
            let kind = evolver_kind(&a.evolver, a.steps, a.dtau, gsprep::time_per_call(tau, mode))?;
            jobs.push((d, tau, kind));
        }
    }
    let pool = run.pool()?;
    let reports: Vec<GsReport> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, tau, kind)| {
                let spec = FilterSpec { eta_proj: a.eta_proj, ..FilterSpec::new(tau, d) };
                gsprep::prepare_ground_state(&problem, &psi, &spec, kind, mode)
            })
            .collect::<qetu::Result<Vec<_>>>()
    })?;
    let mut reports = reports;
    reports.sort_by(|x, y| (x.d, x.n_steps).cmp(&(y.d, y.n_steps)).then(x.tau.total_cmp(&y.tau)));
    let mut table = Table::new(&SCAN_COLUMNS);
    for r in &reports {
        table.push(scan_row(r));
    }
    run.finish_table(&table)
}

// ---------------------------------------------------------------------------
// scan-dtau

#[derive(Args, Debug, Serialize)]
pub struct ScanDtauArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Degrees as `start:stop[:step]` or list.
    #[arg(long, default_value = "20,40,60")]
    pub degree_range: String,
    #[arg(long, default_value_t = 1.5)]
    pub tau: f64,
    /// Trotter steps per call.
    #[arg(long, default_value = "1,2,4")]
    pub steps_range: String,
    #[arg(long, default_value = "control-free")]
    pub mode: String,
    #[arg(long, default_value = "uniform")]
    pub init: String,
    /// Fit the two-term error model and tabulate N_tot at this error.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Step sizes for the N_tot table.
    #[arg(long, default_value = "0.05:1.5:0.05")]
    pub dtau_grid: String,
    /// Output for the N_tot table (required with --eps).
    #[arg(long)]
    pub ntot_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

pub fn scan_dtau(a: ScanDtauArgs) -> Result<(), CliError> {
    let params = a.model.params(&a)?;
    let run = Run::with_params("scan-dtau", params, &a.common)?;
    let degrees = ranges::ints(&a.degree_range)?;
    let steps = ranges::ints(&a.steps_range)?;
    if steps.contains(&0) {
        return Err(CliError::usage("--steps-range entries must be positive"));
    }
    let mode: QetuMode = parse(&a.mode, "mode")?;
    let init: InitialState = parse(&a.init, "init")?;
    if a.eps.is_some() && a.ntot_out.is_none() {
        return Err(CliError::usage("--eps needs --ntot-out"));
    }
    let dtau_grid = ranges::floats(&a.dtau_grid)?;
    let problem = a.model.problem()?;
    let psi = problem.initial_state(init, a.common.seed)?;
    let jobs: Vec<(usize, usize)> = degrees.iter().flat_map(|&d| steps.iter().map(move |&n| (d, n))).collect();
    let pool = run.pool()?;
    let mut reports: Vec<GsReport> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, n)| {
                gsprep::prepare_ground_state(
                    &problem,
                    &psi,
                    &FilterSpec::new(a.tau, d),
                    EvolverKind::Trotter { n_steps: n },
                    mode,
                )
            })
            .collect::<qetu::Result<Vec<_>>>()
    })?;
    reports.sort_by_key(|x| (x.d, x.n_steps));
    let mut table = Table::new(&SCAN_COLUMNS);
    for r in &reports {
        table.push(scan_row(r));
    }
    if let (Some(eps), Some(path)) = (a.eps, a.ntot_out.as_deref()) {
        let samples: Vec<ErrorSample> = reports
            .iter()
            .map(|r| ErrorSample { d: r.d, n_steps: r.n_steps, dtau: r.dtau, error: r.error })
            .collect();
        let delta = problem.params.delta;
        let fit = gsprep::fit_error_model(&samples, delta)?;
        let m = fit.model;
        let mut nt = Table::new(&[
            ("dtau", "1/E_rescaled"),
            ("n_tot", "steps"),
            ("eps", ""),
            ("a", ""),
            ("b", ""),
            ("c", ""),
            ("p", ""),
        ]);
        for &dt in &dtau_grid {
            let n = m.n_tot(eps, delta, dt);
            let n = if n.is_finite() && n > 0.0 { num(n) } else { "inf".into() };
            nt.push(vec![num(dt), n, num(eps), num(m.a), num(m.b), num(m.c), num(m.p)]);
        }
        emit(Some(path), &nt.render(&run.hash))?;
    }
    run.finish_table(&table)
}

// ---------------------------------------------------------------------------
// bounds

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long = "np", default_value = "3")]
    pub np: String,
    #[arg(long, default_value = "1:3")]
    pub nq: String,
    #[arg(long, default_value = "0.2,0.6,1.0,1.4,2.0")]
    pub g: String,
    #[arg(long, default_value = "original,weaved")]
    pub basis: String,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone)]
pub struct BoundRow {
    pub n_p: usize,
    pub n_q: usize,
    pub g: f64,
    pub basis: Basis,
    pub e0: f64,
    pub e1: f64,
    pub emax: f64,
    pub emax_upper: f64,
    pub delta_exact: f64,
    pub delta_lower: f64,
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Original => "original",
        Basis::Weaved => "weaved",
        Basis::Custom => "custom",
    }
}

fn bound_row(n_p: usize, n_q: usize, g: f64, basis: Basis, eta: f64) -> qetu::Result<BoundRow> {
    let m = models::u1_model(n_p, n_q, g, basis)?;
    let s = models::spectrum_summary(&m.hamiltonian()?)?;
    let b = models::emax_upper_bound(&m)?;
    let width = std::f64::consts::PI - 2.0 * eta;
    Ok(BoundRow {
        n_p,
        n_q,
        g,
        basis,
        e0: s.e0,
        e1: s.e1,
        emax: s.emax,
        emax_upper: b.emax_upper,
        delta_exact: (s.e1 - s.e0) * width / (s.emax - s.e0),
        delta_lower: b.delta_lower(s.e0, s.e1, eta),
    })
}

pub fn bounds(a: BoundsArgs) -> Result<(), CliError> {
    let run = Run::new("bounds", &a, &a.common)?;
    let nps = ranges::ints(&a.np)?;
    let nqs = ranges::ints(&a.nq)?;
    let gs = ranges::floats(&a.g)?;
    let bases: Vec<Basis> = ranges::list(&a.basis)?;
    let mut jobs = Vec::new();
    for &np in &nps {
        for &nq in &nqs {
            for &g in &gs {
                for &b in &bases {
                    jobs.push((np, nq, g, b));
                }
            }
        }
    }
    let pool = run.pool()?;
    let rows: Vec<BoundRow> = pool.install(|| {
        jobs.par_iter().map(|&(np, nq, g, b)| bound_row(np, nq, g, b, a.eta)).collect::<qetu::Result<Vec<_>>>()
    })?;
    let mut table = Table::new(&[
        ("n_p", ""),
        ("n_q", ""),
        ("g", ""),
        ("basis", ""),
        ("e0", "E"),
        ("e1", "E"),
        ("emax", "E"),
        ("emax_upper", "E"),
        ("delta_exact", "E_rescaled"),
        ("delta_lower", "E_rescaled"),
        ("rel_gap", ""),
    ]);
    for r in &rows {
        table.push(vec![
            r.n_p.to_string(),
            r.n_q.to_string(),
            num(r.g),
            basis_name(r.basis).into(),
            num(r.e0),
            num(r.e1),
            num(r.emax),
            num(r.emax_upper),
            num(r.delta_exact),
            num(r.delta_lower),
            num(1.0 - r.delta_lower / r.delta_exact),
        ]);
    }
    run.finish_table(&table)
}

// ---------------------------------------------------------------------------
// adiabatic

#[derive(Args, Debug, Serialize)]
pub struct AdiabaticArgs {
    #[arg(long = "np", default_value = "3")]
    pub np: String,
    #[arg(long, default_value = "2")]
    pub nq: String,
    #[arg(long, default_value = "0.2,0.7,1.2,2,3,5")]
    pub g2: String,
    #[arg(long, default_value_t = 10.0)]
    pub g1: f64,
    /// Total evolution time.
    #[arg(long = "T", default_value_t = 1.0)]
    pub total_time: f64,
    /// Number of first-order steps.
    #[arg(long = "M", default_value_t = 2)]
    pub steps: usize,
    #[arg(long, default_value = "original")]
    pub basis: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn adiabatic(a: AdiabaticArgs) -> Result<(), CliError> {
    let run = Run::new("adiabatic", &a, &a.common)?;
    let nps = ranges::ints(&a.np)?;
    let nqs = ranges::ints(&a.nq)?;
    let g2s = ranges::floats(&a.g2)?;
    let bases: Vec<Basis> = ranges::list(&a.basis)?;
    let mut jobs = Vec::new();
    for &np in &nps {
        for &nq in &nqs {
            for &b in &bases {
                for &g2 in &g2s {
                    jobs.push((np, nq, b, g2));
                }
            }
        }
    }
    let pool = run.pool()?;
    let gammas: Vec<f64> = pool.install(|| {
        jobs.par_iter()
            .map(|&(np, nq, b, g2)| -> qetu::Result<f64> {
                let target = models::u1_model(np, nq, g2, b)?;
                let schedule = AdiabaticSchedule::linear(a.g1, g2, a.total_time, a.steps);
                let psi = gsprep::adiabatic_init(&target, &schedule)?;
                let ground = models::spectrum_summary(&target.hamiltonian()?)?.ground;
                Ok(gsprep::gamma(&psi, &ground))
            })
            .collect::<qetu::Result<Vec<_>>>()
    })?;
    let mut table = Table::new(&[
        ("n_p", ""),
        ("n_q", ""),
        ("basis", ""),
        ("g1", ""),
        ("g2", ""),
        ("total_time", "1/E"),
        ("steps", ""),
        ("gamma", ""),
    ]);
    for (&(np, nq, b, g2), gamma) in jobs.iter().zip(gammas) {
        table.push(vec![
            np.to_string(),
            nq.to_string(),
            basis_name(b).into(),
            num(a.g1),
            num(g2),
            num(a.total_time),
            a.steps.to_string(),
            num(gamma),
        ]);
    }
    run.finish_table(&table)
}

// ---------------------------------------------------------------------------
// wavepacket

#[derive(Args, Debug, Serialize)]
pub struct WavepacketArgs {
    /// Methods I-V as a comma list.
    #[arg(long, default_value = "V")]
    pub method: String,
    #[arg(long, default_value = "4")]
    pub nq: String,
    #[arg(long, default_value = "0.4")]
    pub sigma_ratio: String,
    /// Chebyshev coefficients per part.
    #[arg(long, default_value = "3:8")]
    pub nch_range: String,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    /// Momentum kick applied after the filter.
    #[arg(long, default_value_t = 0.0)]
    pub p0: f64,
    #[command(flatten)]
    pub common: Common,
}

pub fn wavepacket(a: WavepacketArgs) -> Result<(), CliError> {
    let run = Run::new("wavepacket", &a, &a.common)?;
    let methods: Vec<Method> = ranges::list(&a.method)?;
    let nqs = ranges::ints(&a.nq)?;
    let ratios = ranges::floats(&a.sigma_ratio)?;
    let nchs = ranges::ints(&a.nch_range)?;
    if nchs.contains(&0) {
        return Err(CliError::usage("--nch-range entries must be positive"));
    }
    let mut jobs = Vec::new();
    for &m in &methods {
        for &nq in &nqs {
            for &r in &ratios {
                for &n in &nchs {
                    jobs.push((m, nq, r, n));
                }
            }
        }
    }
    let grid = EtaTauGrid::default();
    let pool = run.pool()?;
    let mut rows: Vec<WavepacketRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, nq, r, n)| -> qetu::Result<WavepacketRow> {
                let spec = WavepacketSpec::new(nq, a.x_max, r * a.x_max, 0.0, a.p0)?;
                let prep = wavepacket::prepare_gaussian(&spec, m, n, &grid)?;
                Ok(WavepacketRow::new(&spec, &prep))
            })
            .collect::<qetu::Result<Vec<_>>>()
    })?;
    rows.sort_by(|x, y| {
        (x.method, x.n_q, x.n_ch).cmp(&(y.method, y.n_q, y.n_ch)).then(y.sigma_ratio.total_cmp(&x.sigma_ratio))
    });
    let header: Vec<&'static str> = WavepacketRow::HEADER.split(',').collect();
    let units = ["", "", "", "", "", "", "gates", "gates"];
    let cols: Vec<(&'static str, &'static str)> = header.into_iter().zip(units).collect();
    let mut table = Table::new(&cols);
    for r in &rows {
        let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
        table.push(vec![
            r.method.to_string(),
            r.n_q.to_string(),
            num(r.sigma_ratio),
            r.n_ch.to_string(),
            num(r.error),
            num(r.gamma_inv),
            opt(r.cnot),
            opt(r.rot),
        ]);
    }
    run.finish_table(&table)
}

// ---------------------------------------------------------------------------
// gatecount

#[derive(Args, Debug, Serialize)]
pub struct GatecountArgs {
    #[arg(long, default_value = "1:10")]
    pub nq_range: String,
    /// Controlled calls of the QETU circuit.
    #[arg(long, short = 'd', default_value_t = 4)]
    pub degree: usize,
    /// Include position and momentum shift circuits.
    #[arg(long)]
    pub with_shifts: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn gatecount(a: GatecountArgs) -> Result<(), CliError> {
    let run = Run::new("gatecount", &a, &a.common)?;
    let nqs = ranges::ints(&a.nq_range)?;
    if nqs.contains(&0) || nqs.iter().any(|&n| n > 40) {
        return Err(CliError::usage("--nq-range entries must lie in 1..=40"));
    }
    let mut table = Table::new(&[
        ("n_q", ""),
        ("d", "calls"),
        ("qetu_cnot", "gates"),
        ("qetu_rot", "gates"),
        ("exact_cnot", "gates"),
        ("exact_rot", "gates"),
    ]);
    for &n in &nqs {
        let q = wavepacket::gate_count_qetu(n, a.degree, a.with_shifts);
        let e = wavepacket::gate_count_exact_prep(n);
        table.push(vec![
            n.to_string(),
            a.degree.to_string(),
            q.cnot.to_string(),
            q.rotations().to_string(),
            e.cnot.to_string(),
            e.rotations().to_string(),
        ]);
    }
    run.finish_table(&table)
}

// ---------------------------------------------------------------------------
// optimal-dtau

#[derive(Args, Debug, Serialize)]
pub struct OptimalDtauArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub p: f64,
    /// Spectral gap entering the exponential term.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Also split tau_max into whole steps of the optimal size.
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn optimal_dtau(a: OptimalDtauArgs) -> Result<(), CliError> {
    let run = Run::new("optimal-dtau", &a, &a.common)?;
    let model = ErrorModel { a: a.a, b: a.b, c: a.c, p: a.p };
    let step = gsprep::optimal_dtau(&model, a.eps, a.delta)?;
    let mut out = json!({ "model": model, "eps": a.eps, "delta": a.delta, "result": step });
    if let (Some(tm), Some(dt)) = (a.tau_max, step.dtau_numeric) {
        let (tau, n) = gsprep::choose_tau_steps(dt, tm)?;
        out["tau"] = json!(tau);
        out["n_steps"] = json!(n);
    }
    run.finish_json(&out)
}
