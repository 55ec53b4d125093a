//! Ground-state preparation: filter design, QETU runs, adiabatic initial
//! states and the Trotter step-size budget.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cheb::{self, ApproxReport, ChebyshevPoly, SigmaWindow};
use crate::error::{Error, Result};
use crate::models::{spectrum_summary, rescale, RescaleParams, U1Model, WindowPreset};
use crate::qsp::{self, PhaseSequence};
use crate::sim::circuit::GateCount;
use crate::sim::{
    run_qetu, trotter_step, Direction, Evolver, ExactEvolver, HermitianEigen, QetuMode, SplitHamiltonian, StateVector,
    TrotterEvolver,
};

/// A Hamiltonian mapped into `[eta, pi - eta]` together with its exact
/// low-lying data.
#[derive(Debug, Clone)]
pub struct Problem {
    pub hamiltonian: Arc<SplitHamiltonian>,
    pub eigen: Option<Arc<HermitianEigen>>,
    pub ground: StateVector,
    pub params: RescaleParams,
}

impl Problem {
    pub fn new(h: &SplitHamiltonian, eta: f64, preset: WindowPreset) -> Result<Self> {
        let s = spectrum_summary(h)?;
        let params = rescale(eta, s.e0, s.e1, s.emax, preset)?;
        let (c1, c2) = (params.c1, params.c2);
        let scaled = SplitHamiltonian::new(
            h.n_q,
            h.n_sites,
            h.hx.iter().map(|&v| c1 * v + c2).collect(),
            h.hp.iter().map(|&v| c1 * v).collect(),
        )?;
        let eigen = s.eigen.map(|e| {
            Arc::new(HermitianEigen {
                values: e.values.iter().map(|&v| c1 * v + c2).collect(),
                vectors: e.vectors.clone(),
            })
        });
        Ok(Problem { hamiltonian: Arc::new(scaled), eigen, ground: s.ground, params })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn uniform_state(&self) -> Result<StateVector> {
        StateVector::uniform(self.n_qubits())
    }

    pub fn initial_state(&self, kind: InitialState, seed: u64) -> Result<StateVector> {
        match kind {
            InitialState::Uniform => self.uniform_state(),
            InitialState::Random => StateVector::random(self.n_qubits(), seed),
            InitialState::EigenEqual => {
                let eig = self.eigen.as_ref().ok_or_else(|| Error::DimensionOverflow(self.hamiltonian.dim()))?;
                let n = eig.dim();
                let amps = (0..n).map(|i| (0..n).map(|k| eig.vectors[(i, k)]).sum()).collect();
                StateVector::from_amplitudes(amps)
            }
        }
    }
}

/// Starting state of a filter run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Equal superposition of computational basis states.
    Uniform,
    /// Equal-weight superposition of all eigenstates.
    EigenEqual,
    /// Seeded random state.
    Random,
}

impl std::str::FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InitialState::Uniform),
            "eigen-equal" => Ok(InitialState::EigenEqual),
            "random" => Ok(InitialState::Random),
            _ => Err(Error::InvalidParameter(format!("unknown initial state {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub eta_proj: f64,
    pub tau: f64,
    pub d: usize,
    pub c: f64,
}

impl FilterSpec {
    pub fn new(tau: f64, d: usize) -> Self {
        FilterSpec { eta_proj: 0.0, tau, d, c: cheb::DEFAULT_C }
    }

    pub fn window(&self, params: &RescaleParams) -> Result<SigmaWindow> {
        cheb::sigma_window(params.eta, self.eta_proj, params.mu, params.delta, self.tau, self.c)
    }
}

#[derive(Debug, Clone)]
pub struct FilterDesign {
    pub window: SigmaWindow,
    pub poly: ChebyshevPoly,
    pub approx: ApproxReport,
    pub phases: PhaseSequence,
    pub functional: f64,
}

pub fn design_filter(window: &SigmaWindow, d: usize) -> Result<FilterDesign> {
    let (poly, approx) = cheb::solve_step_poly(window, d, None)?;
    let sol = qsp::solve_phases(&poly)?;
    Ok(FilterDesign { window: *window, poly, approx, phases: sol.phases, functional: sol.functional })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EvolverKind {
    Exact,
    Trotter { n_steps: usize },
}

impl EvolverKind {
    pub fn n_steps(&self) -> usize {
        match self {
            EvolverKind::Exact => 1,
            EvolverKind::Trotter { n_steps } => *n_steps,
        }
    }
}

/// Evolution time per call: the full `tau` with a controlled `U`, half of it
/// for the forward/backward pair, so both modes realise `F(cos(tau H / 2))`.
pub fn time_per_call(tau: f64, mode: QetuMode) -> f64 {
    match mode {
        QetuMode::Controlled => tau,
        QetuMode::ControlFree => tau / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsReport {
    pub d: usize,
    pub tau: f64,
    pub dtau: f64,
    pub n_steps: usize,
    pub mode: QetuMode,
    pub error: f64,
    pub success_prob: f64,
    pub epsilon: f64,
    pub tau_exceeds_max: bool,
    pub gates: GateCount,
}

pub fn run_filter(
    problem: &Problem,
    psi: &StateVector,
    design: &FilterDesign,
    kind: EvolverKind,
    mode: QetuMode,
) -> Result<GsReport> {
    let tau = design.window.tau;
    let t = time_per_call(tau, mode);
    let evolver: Box<dyn Evolver> = match kind {
        EvolverKind::Exact => {
            let eig = problem.eigen.clone().ok_or_else(|| {
                Error::DimensionOverflow(problem.hamiltonian.dim())
            })?;
            Box::new(ExactEvolver::new(eig, t))
        }
        EvolverKind::Trotter { n_steps } => Box::new(TrotterEvolver::new(problem.hamiltonian.clone(), t, n_steps)?),
    };
    let run = run_qetu(psi, &design.phases, evolver.as_ref(), mode)?;
    let n_steps = kind.n_steps();
    let d = design.phases.degree;
    let mut gates = GateCount { rx: d + 1, ..GateCount::default() };
    if let EvolverKind::Trotter { .. } = kind {
        let step = trotter_step_cost(&problem.hamiltonian, mode);
        for _ in 0..d * n_steps {
            gates += step;
        }
    }
    Ok(GsReport {
        d,
        tau,
        dtau: t / n_steps as f64,
        n_steps,
        mode,
        error: 1.0 - gamma(&run.output, &problem.ground),
        success_prob: run.success_prob,
        epsilon: design.approx.epsilon,
        tau_exceeds_max: tau > problem.params.tau_max,
        gates,
    })
}

/// Window, polynomial, phases and circuit in one call.
pub fn prepare_ground_state(
    problem: &Problem,
    psi_init: &StateVector,
    spec: &FilterSpec,
    kind: EvolverKind,
    mode: QetuMode,
) -> Result<GsReport> {
    let design = design_filter(&spec.window(&problem.params)?, spec.d)?;
    run_filter(problem, psi_init, &design, kind, mode)
}

/// Absolute overlap `|<psi0|psi>|`, clamped to `[0, 1]`.
pub fn gamma(psi: &StateVector, psi0: &StateVector) -> f64 {
    psi0.inner(psi).norm().min(1.0)
}

fn walsh_hadamard(values: &[f64]) -> Vec<f64> {
    let mut a = values.to_vec();
    let n = a.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (a[j], a[j + h]);
                a[j] = x + y;
                a[j + h] = x - y;
            }
        }
        h *= 2;
    }
    a.iter_mut().for_each(|v| *v /= n as f64);
    a
}

/// Gates for `exp(-i t diag(values))` written as Z-string rotations:
/// each nonzero non-identity string of weight `w` costs one Rz and a
/// `2 (w - 1)` CNOT ladder. Returns the cost and the number of
/// anticommuting groups (distinct lowest Z qubit).
fn diagonal_cost(values: &[f64]) -> (GateCount, usize) {
    let w = walsh_hadamard(values);
    let scale = w.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut cost = GateCount::default();
    let mut groups = std::collections::BTreeSet::new();
    for (s, v) in w.iter().enumerate().skip(1) {
        if v.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            continue;
        }
        let weight = s.count_ones() as usize;
        cost.rz += 1;
        cost.cnot += 2 * (weight - 1);
        groups.insert(s.trailing_zeros());
    }
    (cost, groups.len())
}

fn qft_cost(n_q: usize) -> GateCount {
    let pairs = n_q * (n_q.saturating_sub(1)) / 2;
    GateCount { cnot: 2 * pairs + 3 * (n_q / 2), rz: 3 * pairs, rx: 0, other: n_q }
}

/// Gate model for one first-order step of a split Hamiltonian: Walsh
/// expansion of both diagonal tables plus a QFT pair per site. Controlled
/// mode turns every rotation into a controlled one (2 extra CNOT, 1 extra
/// Rz); control-free mode adds an anti-controlled `K` pair (2 CNOT) per
/// anticommuting group.
pub fn trotter_step_cost(h: &SplitHamiltonian, mode: QetuMode) -> GateCount {
    let (cx, gx) = diagonal_cost(&h.hx);
    let (cp, gp) = diagonal_cost(&h.hp);
    let mut total = cx + cp;
    let q = qft_cost(h.n_q);
    for _ in 0..2 * h.n_sites {
        total += q;
    }
    match mode {
        QetuMode::Controlled => {
            let r = cx.rz + cp.rz;
            total.cnot += 2 * r;
            total.rz += r;
        }
        QetuMode::ControlFree => {
            total.cnot += 2 * (gx + gp);
            total.other += 4 * (gx + gp);
        }
    }
    total
}

/// One row of a ground-state scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub d: usize,
    pub tau: f64,
    pub dtau: f64,
    pub n_steps: usize,
    pub mode: QetuMode,
    pub error: f64,
    pub success_prob: f64,
    pub cnot: usize,
    pub rot: usize,
}

impl From<&GsReport> for ScanRow {
    fn from(r: &GsReport) -> Self {
        ScanRow {
            d: r.d,
            tau: r.tau,
            dtau: r.dtau,
            n_steps: r.n_steps,
            mode: r.mode,
            error: r.error,
            success_prob: r.success_prob,
            cnot: r.gates.cnot,
            rot: r.gates.rotations(),
        }
    }
}

/// Plateau level of an error-vs-degree curve: geometric mean over the
/// `tail` largest degrees.
pub fn saturation_error(points: &[(usize, f64)], tail: usize) -> Result<f64> {
    if points.is_empty() || tail == 0 {
        return Err(Error::InvalidParameter("need at least one point".into()));
    }
    let mut p = points.to_vec();
    p.sort_by_key(|&(d, _)| d);
    let k = tail.min(p.len());
    let logs: f64 = p[p.len() - k..].iter().map(|&(_, e)| e.max(f64::MIN_POSITIVE).ln()).sum();
    Ok((logs / k as f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum Ramp {
    /// `u(t) = t / T`.
    Linear,
    /// Values of `u` on `M + 1` equally spaced nodes, linearly interpolated.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSchedule {
    pub g1: f64,
    pub g2: f64,
    pub total_time: f64,
    pub steps: usize,
    pub ramp: Ramp,
}

impl AdiabaticSchedule {
    pub fn linear(g1: f64, g2: f64, total_time: f64, steps: usize) -> Self {
        AdiabaticSchedule { g1, g2, total_time, steps, ramp: Ramp::Linear }
    }

    /// `(dt1, dt2)` per step with `dt1 = int (1 - u)` and `dt2 = int u`.
    pub fn intervals(&self) -> Result<Vec<(f64, f64)>> {
        if self.steps == 0 || !(self.total_time > 0.0) {
            return Err(Error::InvalidParameter("need T > 0 and M >= 1".into()));
        }
        let m = self.steps;
        let t = self.total_time;
        let node = |k: usize| t * k as f64 / m as f64;
        let u_at: Box<dyn Fn(usize) -> f64> = match &self.ramp {
            Ramp::Linear => Box::new(|k| k as f64 / m as f64),
            Ramp::Table(u) => {
                if u.len() != m + 1 {
                    return Err(Error::LengthMismatch { expected: m + 1, got: u.len() });
                }
                if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidParameter("ramp values must lie in [0, 1]".into()));
                }
                let u = u.clone();
                Box::new(move |k| u[k])
            }
        };
        // The linear ramp is piecewise linear on the nodes, so the
        // trapezoid rule is exact for both cases.
        Ok((0..m)
            .map(|k| {
                let dt = node(k + 1) - node(k);
                let dt2 = dt * (u_at(k) + u_at(k + 1)) / 2.0;
                (dt - dt2, dt2)
            })
            .collect())
    }
}

/// Product of single first-order steps `exp(-i dt2 H2) exp(-i dt1 H1)`
/// starting from the uniform state.
pub fn adiabatic_evolve(h1: &SplitHamiltonian, h2: &SplitHamiltonian, schedule: &AdiabaticSchedule) -> Result<StateVector> {
    if h1.dim() != h2.dim() || h1.n_q != h2.n_q {
        return Err(Error::LengthMismatch { expected: h2.dim(), got: h1.dim() });
    }
    let mut psi = StateVector::uniform(h2.n_qubits())?;
    for (dt1, dt2) in schedule.intervals()? {
        trotter_step(&mut psi.amps, h1, dt1, Direction::Forward)?;
        trotter_step(&mut psi.amps, h2, dt2, Direction::Forward)?;
    }
    Ok(psi)
}

/// Adiabatic state for a U(1) target. `H1` shares the digitization of
/// the target model and differs only in the coupling.
pub fn adiabatic_init(target: &U1Model, schedule: &AdiabaticSchedule) -> Result<StateVector> {
    if (target.g - schedule.g2).abs() > 1e-12 * schedule.g2.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "schedule g2 = {} does not match the target coupling {}",
            schedule.g2, target.g
        )));
    }
    let mut start = target.clone();
    start.g = schedule.g1;
    adiabatic_evolve(&start.hamiltonian()?, &target.hamiltonian()?, schedule)
}

/// Two-term error budget `a exp(-b Delta N_tot dtau) + c dtau^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
}

impl ErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.c >= 0.0 && self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!("invalid error model {self:?}")));
        }
        Ok(())
    }

    pub fn error(&self, delta: f64, n_tot: f64, dtau: f64) -> f64 {
        self.a * (-self.b * delta * n_tot * dtau).exp() + self.c * dtau.powf(self.p)
    }

    /// Continuous number of calls reaching `eps` at step `dtau`.
    pub fn n_tot(&self, eps: f64, delta: f64, dtau: f64) -> f64 {
        (self.a / (eps - self.c * dtau.powf(self.p))).ln() / (self.b * delta * dtau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRegime {
    Interior,
    /// `N_tot = 1` already suffices; shrink `dtau` instead of optimising.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalStep {
    pub regime: StepRegime,
    pub dtau_numeric: Option<f64>,
    pub dtau_approx: Option<f64>,
    /// `|approx - numeric| / numeric`.
    pub relative_gap: Option<f64>,
    /// Stationarity condition evaluated at the numeric root.
    pub residual: Option<f64>,
    pub n_tot: u64,
    pub second_derivative: Option<f64>,
}

fn stationarity(x: f64, p: f64, log_eps_a: f64) -> f64 {
    p * x / (1.0 - x) + log_eps_a + (1.0 - x).ln()
}

/// Step size minimising `N_tot` at target error `eps`.
pub fn optimal_dtau(model: &ErrorModel, eps: f64, delta: f64) -> Result<OptimalStep> {
    model.validate()?;
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter("eps and delta must be positive".into()));
    }
    let boundary = OptimalStep {
        regime: StepRegime::Boundary,
        dtau_numeric: None,
        dtau_approx: None,
        relative_gap: None,
        residual: None,
        n_tot: 1,
        second_derivative: None,
    };
    if model.a <= eps || model.c == 0.0 {
        return Ok(boundary);
    }
    let (p, c) = (model.p, model.c);
    let log_eps_a = (eps / model.a).ln();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stationarity(mid, p, log_eps_a) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if stationarity(lo, p, log_eps_a).abs() <= stationarity(hi, p, log_eps_a).abs() { lo } else { hi };
    let residual = stationarity(x, p, log_eps_a);
    let to_dtau = |x: f64| (eps * x / c).powf(1.0 / p);
    let dtau = to_dtau(x);
    let l = -log_eps_a;
    let dtau_approx = to_dtau(1.0 - p / (p + l));
    let n = model.n_tot(eps, delta, dtau);
    if !(n > 1.0) {
        return Ok(boundary);
    }
    let cd = c * dtau.powf(p);
    let second = c * p * dtau.powf(p) / (model.b * delta * dtau.powi(3)) / (eps - cd).powi(2) * (eps * (p - 1.0) + cd);
    Ok(OptimalStep {
        regime: StepRegime::Interior,
        dtau_numeric: Some(dtau),
        dtau_approx: Some(dtau_approx),
        relative_gap: Some((dtau_approx - dtau).abs() / dtau),
        residual: Some(residual),
        n_tot: n.ceil() as u64,
        second_derivative: Some(second),
    })
}

/// Largest multiple of `dtau_star` not exceeding `tau_max`.
pub fn choose_tau_steps(dtau_star: f64, tau_max: f64) -> Result<(f64, usize)> {
    if !(dtau_star > 0.0) || !(tau_max > 0.0) {
        return Err(Error::InvalidParameter("dtau and tau_max must be positive".into()));
    }
    let n = (tau_max / dtau_star + 1e-9).floor();
    if n < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "dtau* = {dtau_star} exceeds tau_max = {tau_max}; shrink the step"
        )));
    }
    Ok((n * dtau_star, n as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub d: usize,
    pub n_steps: usize,
    pub dtau: f64,
    pub error: f64,
}

impl ErrorSample {
    pub fn n_tot(&self) -> f64 {
        (self.d * self.n_steps) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorFit {
    pub model: ErrorModel,
    /// RMS of `ln(model) - ln(error)` over the samples.
    pub log_rms: f64,
    pub iterations: usize,
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v.len()
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Levenberg-Marquardt on log residuals with a forward-difference Jacobian.
fn levenberg_marquardt(theta0: &[f64], resid: &dyn Fn(&[f64]) -> Vec<f64>, max_iter: usize) -> (Vec<f64>, f64, usize) {
    let sse = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut theta = theta0.to_vec();
    let mut r = resid(&theta);
    let mut cost = sse(&r);
    let mut lambda = 1e-3;
    let k = theta.len();
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let mut jac = vec![vec![0.0; k]; r.len()];
        for j in 0..k {
            let h = 1e-7 * theta[j].abs().max(1e-3);
            let mut t = theta.clone();
            t[j] += h;
            let rj = resid(&t);
            for i in 0..r.len() {
                jac[i][j] = (rj[i] - r[i]) / h;
            }
        }
        let mut jtj = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut jtr = nalgebra::DVector::<f64>::zeros(k);
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..k {
                jtr[a] += row[a] * ri;
                for b in 0..k {
                    jtj[(a, b)] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj.clone();
            for a in 0..k {
                m[(a, a)] += lambda * jtj[(a, a)].max(1e-12);
            }
            let Some(step) = m.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            let rc = resid(&cand);
            let cc = sse(&rc);
            if cc.is_finite() && cc < cost {
                let rel = (cost - cc) / cost.max(f64::MIN_POSITIVE);
                theta = cand;
                r = rc;
                cost = cc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || cost < 1e-28 {
            break;
        }
    }
    (theta, cost, it)
}

/// Least-squares fit of the two-term budget in log space. A pure
/// `c dtau^p` model is also fitted and kept when it explains the data
/// as well.
pub fn fit_error_model(scan: &[ErrorSample], delta: f64) -> Result<ErrorFit> {
    if distinct(scan.iter().map(|s| s.d as f64)) < 3 || distinct(scan.iter().map(|s| s.dtau)) < 3 {
        return Err(Error::InvalidParameter("scan needs at least 3 distinct d and 3 distinct dtau".into()));
    }
    if !(delta > 0.0) || scan.iter().any(|s| !(s.error > 0.0) || !(s.dtau > 0.0)) {
        return Err(Error::InvalidParameter("errors, steps and delta must be positive".into()));
    }
    let logs: Vec<f64> = scan.iter().map(|s| s.error.ln()).collect();
    // Floor per step size: its smallest error.
    let mut floors: Vec<(f64, f64)> = Vec::new();
    for s in scan {
        match floors.iter_mut().find(|(t, _)| (*t - s.dtau).abs() <= 1e-12 * s.dtau) {
            Some(f) => f.1 = f.1.min(s.error),
            None => floors.push((s.dtau, s.error)),
        }
    }
    let (p0, lnc0) = linear_fit(
        &floors.iter().map(|f| f.0.ln()).collect::<Vec<_>>(),
        &floors.iter().map(|f| f.1.ln()).collect::<Vec<_>>(),
    );
    let p0 = p0.max(1.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = scan
        .iter()
        .filter(|s| {
            let floor = floors.iter().find(|(t, _)| (*t - s.dtau).abs() <= 1e-12 * s.dtau).map_or(0.0, |f| f.1);
            s.error > 10.0 * floor
        })
        .map(|s| (delta * s.n_tot() * s.dtau, s.error.ln()))
        .unzip();
    let (lna0, b0) = if xs.len() >= 2 {
        let (slope, icpt) = linear_fit(&xs, &ys);
        (icpt, (-slope).max(1e-3))
    } else {
        (0.0, 0.1)
    };

    let full = |th: &[f64]| -> Vec<f64> {
        let m = ErrorModel { a: th[0].exp(), b: th[1], c: th[2].exp(), p: th[3] };
        scan.iter()
            .zip(&logs)
            .map(|(s, l)| m.error(delta, s.n_tot(), s.dtau).max(f64::MIN_POSITIVE).ln() - l)
            .collect()
    };
    let pure = |th: &[f64]| -> Vec<f64> {
        scan.iter().zip(&logs).map(|(s, l)| th[0] + th[1] * s.dtau.ln() - l).collect()
    };
    let (tf, cf, itf) = levenberg_marquardt(&[lna0, b0, lnc0, p0], &full, 500);
    let (tp, cp, itp) = levenberg_marquardt(&[lnc0, p0], &pure, 200);
    let n = scan.len() as f64;
    let (model, cost, iterations) = if cp <= cf * (1.0 + 1e-6) + 1e-20 {
        (ErrorModel { a: 0.0, b: 0.0, c: tp[0].exp(), p: tp[1] }, cp, itp)
    } else {
        (ErrorModel { a: tf[0].exp(), b: tf[1], c: tf[2].exp(), p: tf[3] }, cf, itf)
    };
    if !model.c.is_finite() || !model.p.is_finite() {
        return Err(Error::NoConvergence("error-model fit diverged".into()));
    }
    Ok(ErrorFit { model, log_rms: (cost / n).sqrt(), iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sho_model, u1_model, Basis};
    use crate::sim::QetuMode;

    fn sho_problem() -> Problem {
        let h = sho_model(3, 1.0, 3.275).unwrap().hamiltonian().unwrap();
        Problem::new(&h, 0.05, WindowPreset::Custom { mu: 0.233, delta: 0.244 }).unwrap()
    }

    #[test]
    fn eigen_equal_state_has_equal_weights() {
        let pr = sho_problem();
        let psi = pr.initial_state(InitialState::EigenEqual, 0).unwrap();
        let eig = pr.eigen.as_ref().unwrap();
        for k in 0..eig.dim() {
            let w = eig.eigenvector(k).inner(&psi).norm_sqr();
            assert!((w - 1.0 / 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaled_problem_spans_window() {
        let pr = sho_problem();
        let e = &pr.eigen.as_ref().unwrap().values;
        assert!((e[0] - 0.05).abs() < 1e-12);
        assert!((e[e.len() - 1] - (std::f64::consts::PI - 0.05)).abs() < 1e-12);
        let dense = HermitianEigen::new(&pr.hamiltonian.dense().unwrap()).unwrap();
        for (a, b) in dense.values.iter().zip(e) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((pr.params.tau_max - 1.823).abs() < 1e-3);
    }

    #[test]
    fn ground_state_passes_through() {
        let pr = sho_problem();
        let spec = FilterSpec::new(1.5, 12);
        let r = prepare_ground_state(&pr, &pr.ground, &spec, EvolverKind::Exact, QetuMode::Controlled).unwrap();
        assert!(r.error < 1e-12, "{}", r.error);
        assert!(!r.tau_exceeds_max);
    }

    #[test]
    fn modes_agree_with_exact_evolver() {
        let pr = sho_problem();
        let psi = pr.uniform_state().unwrap();
        let spec = FilterSpec::new(1.5, 10);
        let a = prepare_ground_state(&pr, &psi, &spec, EvolverKind::Exact, QetuMode::Controlled).unwrap();
        let b = prepare_ground_state(&pr, &psi, &spec, EvolverKind::Exact, QetuMode::ControlFree).unwrap();
        assert!((a.error - b.error).abs() < 1e-10);
        assert!((a.success_prob - b.success_prob).abs() < 1e-10);
        assert_eq!(b.dtau, 0.75);
    }

    #[test]
    fn trotter_error_shrinks_with_steps() {
        let pr = sho_problem();
        let psi = pr.uniform_state().unwrap();
        let design = design_filter(&FilterSpec::new(1.5, 16).window(&pr.params).unwrap(), 16).unwrap();
        let exact = run_filter(&pr, &psi, &design, EvolverKind::Exact, QetuMode::Controlled).unwrap();
        let mut last = f64::INFINITY;
        for n in [1, 4, 16] {
            let r = run_filter(&pr, &psi, &design, EvolverKind::Trotter { n_steps: n }, QetuMode::Controlled).unwrap();
            let gap = (r.error - exact.error).abs();
            assert!(gap < last, "n = {n}: {gap} vs {last}");
            last = gap;
            assert_eq!(r.gates.rx, 17);
            assert!(r.gates.cnot > 0);
        }
    }

    #[test]
    fn gamma_extremes() {
        let a = StateVector::basis(2, 1).unwrap();
        let b = StateVector::basis(2, 2).unwrap();
        assert_eq!(gamma(&a, &a), 1.0);
        assert_eq!(gamma(&a, &b), 0.0);
    }

    #[test]
    fn linear_schedule_intervals() {
        let s = AdiabaticSchedule::linear(10.0, 1.0, 1.0, 2);
        let iv = s.intervals().unwrap();
        assert!((iv[0].0 - 0.375).abs() < 1e-15 && (iv[0].1 - 0.125).abs() < 1e-15);
        assert!((iv[1].0 - 0.125).abs() < 1e-15 && (iv[1].1 - 0.375).abs() < 1e-15);
    }

    #[test]
    fn table_schedule_checks_length() {
        let s = AdiabaticSchedule { g1: 1.0, g2: 2.0, total_time: 1.0, steps: 3, ramp: Ramp::Table(vec![0.0, 1.0]) };
        assert!(s.intervals().is_err());
    }

    #[test]
    fn zero_ramp_keeps_h1_eigenstate() {
        // Kinetic-only H1: the uniform state is its zero-momentum eigenstate.
        let h1 = SplitHamiltonian::new(2, 1, vec![0.0; 4], vec![0.0, 1.0, 2.0, 1.0]).unwrap();
        let h2 = SplitHamiltonian::new(2, 1, vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 4]).unwrap();
        let s = AdiabaticSchedule { g1: 1.0, g2: 1.0, total_time: 2.0, steps: 4, ramp: Ramp::Table(vec![0.0; 5]) };
        let out = adiabatic_evolve(&h1, &h2, &s).unwrap();
        let start = StateVector::uniform(2).unwrap();
        assert!((gamma(&out, &start) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_strong_coupling_overlap() {
        let m = u1_model(3, 2, 3.0, Basis::Weaved).unwrap();
        let s = AdiabaticSchedule::linear(10.0, 3.0, 1.0, 2);
        let psi = adiabatic_init(&m, &s).unwrap();
        let g0 = spectrum_summary(&m.hamiltonian().unwrap()).unwrap().ground;
        assert!(gamma(&psi, &g0) > 0.9);
        assert!(adiabatic_init(&m, &AdiabaticSchedule::linear(10.0, 2.0, 1.0, 2)).is_err());
    }

    #[test]
    fn optimal_step_reference_example() {
        let m = ErrorModel { a: 1.0, b: 1.0, c: 0.1, p: 1.0 };
        let r = optimal_dtau(&m, 1e-3, 0.1).unwrap();
        assert_eq!(r.regime, StepRegime::Interior);
        assert!((r.relative_gap.unwrap() - 0.032).abs() < 0.005, "{:?}", r);
        assert!(r.residual.unwrap().abs() < 1e-12);
        assert!(r.second_derivative.unwrap() > 0.0);
    }

    #[test]
    fn boundary_regime_when_a_le_eps() {
        let m = ErrorModel { a: 1e-3, b: 1.0, c: 0.1, p: 2.0 };
        assert_eq!(optimal_dtau(&m, 1e-3, 0.1).unwrap().regime, StepRegime::Boundary);
    }

    #[test]
    fn tau_steps_floor() {
        let (t, n) = choose_tau_steps(0.5, 1.9).unwrap();
        assert_eq!(n, 3);
        assert!((t - 1.5).abs() < 1e-15);
        assert_eq!(choose_tau_steps(1.9, 1.9).unwrap().1, 1);
        let (t, n) = choose_tau_steps(0.3, 1.823).unwrap();
        assert_eq!(n, 6);
        assert!((t - 1.8).abs() < 1e-12);
        assert!(choose_tau_steps(2.0, 1.9).is_err());
    }

    fn synthetic(m: &ErrorModel, delta: f64) -> Vec<ErrorSample> {
        let mut v = Vec::new();
        for d in [4, 8, 12, 16, 20, 24, 32, 40] {
            for (n, dtau) in [(1, 0.8), (2, 0.4), (4, 0.2), (8, 0.1)] {
                v.push(ErrorSample { d, n_steps: n, dtau, error: m.error(delta, (d * n) as f64, dtau) });
            }
        }
        v
    }

    #[test]
    fn fit_recovers_synthetic_model() {
        let truth = ErrorModel { a: 0.8, b: 0.6, c: 0.05, p: 2.0 };
        let fit = fit_error_model(&synthetic(&truth, 0.3), 0.3).unwrap();
        let m = fit.model;
        for (got, want) in [(m.a, truth.a), (m.b, truth.b), (m.c, truth.c), (m.p, truth.p)] {
            assert!((got - want).abs() < 0.05 * want, "{m:?}");
        }
    }

    #[test]
    fn fit_pure_trotter() {
        let mut truth = ErrorModel { a: 1.0, b: 1.0, c: 0.02, p: 1.5 };
        let mut scan = synthetic(&truth, 0.3);
        truth.a = 0.0;
        for s in &mut scan {
            s.error = truth.c * s.dtau.powf(truth.p);
        }
        let m = fit_error_model(&scan, 0.3).unwrap().model;
        assert!((m.c - 0.02).abs() < 1e-3 && (m.p - 1.5).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn fit_rejects_degenerate_scan() {
        let s: Vec<ErrorSample> =
            (0..5).map(|i| ErrorSample { d: 4 + i, n_steps: 1, dtau: 0.5, error: 0.1 }).collect();
        assert!(fit_error_model(&s, 0.1).is_err());
    }

    #[test]
    fn step_cost_counts_walsh_terms() {
        // hx = Z on one qubit, hp = 0: one rotation, no ladder.
        let h = SplitHamiltonian::new(1, 1, vec![1.0, -1.0], vec![0.0, 0.0]).unwrap();
        let c = trotter_step_cost(&h, QetuMode::ControlFree);
        assert_eq!((c.rz, c.cnot), (1, 2));
        let c = trotter_step_cost(&h, QetuMode::Controlled);
        assert_eq!((c.rz, c.cnot), (2, 2));
    }
}
