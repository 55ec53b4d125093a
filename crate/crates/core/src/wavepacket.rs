//! Gaussian wavepacket preparation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cheb::{fit_gaussian, optimize_eta_tau, EtaTauGrid, GaussianFit, GaussianParts, Parity, SampleMode};
use crate::error::{Error, Result};
use crate::qsp::solve_phases;
use crate::sim::{norm, run_qetu, DiagonalEvolver, Dft, GateCount, QetuMode, StateVector, Subregister, MIN_SUCCESS_PROB};
use crate::C64 as C;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    pub n_q: usize,
    pub x_max: f64,
    pub sigma_x: f64,
    pub x0: f64,
    pub p0: f64,
}

impl WavepacketSpec {
    pub fn new(n_q: usize, x_max: f64, sigma_x: f64, x0: f64, p0: f64) -> Result<Self> {
        if n_q == 0 || n_q > 12 {
            return Err(Error::InvalidParameter(format!("n_q = {n_q} outside 1..=12")));
        }
        if !(x_max > 0.0) || !(sigma_x > 0.0) {
            return Err(Error::InvalidParameter("x_max and sigma_x must be positive".into()));
        }
        Ok(WavepacketSpec { n_q, x_max, sigma_x, x0, p0 })
    }

    /// Packet centred at the origin with width `ratio * x_max`.
    pub fn centered(n_q: usize, x_max: f64, ratio: f64) -> Result<Self> {
        Self::new(n_q, x_max, ratio * x_max, 0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_q
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / (self.dim() - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.dim()).map(|j| -self.x_max + dx * j as f64).collect()
    }

    /// (c1, c2) mapping the position grid onto [eta, pi - eta].
    pub fn rescale(&self, eta: f64) -> Result<(f64, f64)> {
        if eta >= PI / 2.0 {
            return Err(Error::InvalidParameter(format!("eta = {eta} must be below pi/2")));
        }
        let c1 = (PI - 2.0 * eta) / (2.0 * self.x_max);
        Ok((c1, eta + c1 * self.x_max))
    }

    pub fn shifted_grid(&self, c1: f64, c2: f64) -> Vec<f64> {
        self.grid().iter().map(|&x| c1 * x + c2).collect()
    }
}

/// Normalized Gaussian amplitudes `exp(-(x - x0)^2 / (2 sigma^2)) e^{i p0 x}` on the grid.
pub fn target_state(spec: &WavepacketSpec) -> Result<StateVector> {
    let amps = spec
        .grid()
        .iter()
        .map(|&x| {
            let z = x - spec.x0;
            C::from_polar((-z * z / (2.0 * spec.sigma_x * spec.sigma_x)).exp(), spec.p0 * x)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Multiplies amplitude `j` by `exp(i p0 x_j)`.
pub fn shift_momentum(spec: &WavepacketSpec, state: &StateVector, p0: f64) -> Result<StateVector> {
    check_dim(spec, state)?;
    let amps = state.amps.iter().zip(spec.grid()).map(|(a, x)| a * C::from_polar(1.0, p0 * x)).collect();
    Ok(StateVector { n: state.n, amps })
}

/// Translates the packet by `x0` through a momentum-space phase. Multiples of
/// `dx` give an exact cyclic permutation.
pub fn shift_position(spec: &WavepacketSpec, state: &StateVector, x0: f64) -> Result<StateVector> {
    check_dim(spec, state)?;
    let n = spec.dim();
    let reg = Subregister { offset: 0, width: spec.n_q };
    let dft = Dft::new(spec.n_q);
    let mut amps = state.amps.clone();
    dft.apply(&mut amps, reg, false)?;
    let m = x0 / spec.dx();
    for (k, a) in amps.iter_mut().enumerate() {
        let ks = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        *a *= C::from_polar(1.0, 2.0 * PI * m * ks / n as f64);
    }
    dft.apply(&mut amps, reg, true)?;
    Ok(StateVector { n: state.n, amps })
}

fn check_dim(spec: &WavepacketSpec, state: &StateVector) -> Result<()> {
    if state.dim() != spec.dim() {
        return Err(Error::LengthMismatch { expected: spec.dim(), got: state.dim() });
    }
    Ok(())
}

/// Post-selection probability of an ideal filter acting on the uniform state.
pub fn gamma_closed_form(spec: &WavepacketSpec, c: f64) -> f64 {
    let s2 = spec.sigma_x * spec.sigma_x;
    let sum: f64 = spec.grid().iter().map(|&x| (-(x - spec.x0).powi(2) / s2).exp()).sum();
    c * c * sum / spec.dim() as f64
}

/// Gates of a QETU circuit with `d` controlled calls of `exp(-i tau x_sh)`.
pub fn gate_count_qetu(n_q: usize, d: usize, with_shifts: bool) -> GateCount {
    let mut g = GateCount { cnot: d * n_q, rz: d * n_q, rx: d + 1, other: 0 };
    if with_shifts {
        // Momentum kick.
        g.rz += n_q;
        // Position shift: QFT, diagonal phase, inverse QFT.
        let cphase = n_q * (n_q - 1) / 2;
        let qft = GateCount { cnot: 2 * cphase + 3 * (n_q / 2), rz: 3 * cphase, rx: 0, other: 0 };
        g += qft + qft;
        g.rz += n_q;
    }
    g
}

/// Multiplexed-rotation amplitude encoding of an arbitrary real state.
pub fn gate_count_exact_prep(n_q: usize) -> GateCount {
    let full = 1usize << (n_q + 1);
    GateCount { cnot: full - 2 * n_q - 2, rz: full - 2, rx: 0, other: 0 }
}

/// Smallest `n_q` in `range` for which QETU with `d` calls needs fewer gates
/// than exact preparation, by CNOT and by rotation count.
pub fn crossovers(d: usize, range: std::ops::RangeInclusive<usize>) -> (Option<usize>, Option<usize>) {
    let mut cnot = None;
    let mut rot = None;
    for n_q in range {
        let (q, e) = (gate_count_qetu(n_q, d, false), gate_count_exact_prep(n_q));
        if cnot.is_none() && q.cnot < e.cnot {
            cnot = Some(n_q);
        }
        if rot.is_none() && q.rotations() < e.rotations() {
            rot = Some(n_q);
        }
    }
    (cnot, rot)
}

/// Filter construction variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Split parity parts, eta = 0, tau = 1.
    I,
    /// Split parts, eta optimized at tau = 1.
    II,
    /// Split parts, joint (eta, tau) optimization.
    III,
    /// Even fit at tau = 2 over the whole image interval.
    IV,
    /// Even fit at tau = 2 over the grid eigenvalues only.
    V,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::I, Method::II, Method::III, Method::IV, Method::V];

    /// Whether the filter is parity-definite and realized as a circuit.
    pub fn is_circuit(self) -> bool {
        matches!(self, Method::IV | Method::V)
    }

    /// Polynomial degree of the (even) circuit filter with `n_ch` coefficients.
    pub fn circuit_degree(n_ch: usize) -> usize {
        2 * n_ch.saturating_sub(1)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::I => "I",
            Method::II => "II",
            Method::III => "III",
            Method::IV => "IV",
            Method::V => "V",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Method::I),
            "II" | "2" => Ok(Method::II),
            "III" | "3" => Ok(Method::III),
            "IV" | "4" => Ok(Method::IV),
            "V" | "5" => Ok(Method::V),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianPrep {
    pub method: Method,
    pub n_ch: usize,
    pub state: StateVector,
    /// `1 - |<state|target>|`.
    pub error: f64,
    /// Squared norm of the filtered uniform state.
    pub gamma: f64,
    pub fit: GaussianFit,
    /// Present for circuit-realized methods.
    pub gates: Option<GateCount>,
}

/// Builds the filter for `method` with `n_ch` Chebyshev coefficients per part
/// and applies it to the uniform state.
pub fn prepare_gaussian(spec: &WavepacketSpec, method: Method, n_ch: usize, grid: &EtaTauGrid) -> Result<GaussianPrep> {
    let fit = match method {
        Method::I => fit_gaussian(spec, GaussianParts::Split, n_ch, 0.0, 1.0, SampleMode::AllX)?,
        Method::II => optimize_eta_tau(spec, GaussianParts::Split, n_ch, Some(1.0), SampleMode::AllX, grid)?,
        Method::III => optimize_eta_tau(spec, GaussianParts::Split, n_ch, None, SampleMode::AllX, grid)?,
        Method::IV => optimize_eta_tau(spec, GaussianParts::Even, n_ch, Some(2.0), SampleMode::AllX, grid)?,
        Method::V => optimize_eta_tau(spec, GaussianParts::Even, n_ch, Some(2.0), SampleMode::EigenvaluesOnly, grid)?,
    };
    apply_fit(spec, method, n_ch, fit)
}

/// Applies an existing fit: exact operator application for split fits, the
/// controlled QETU circuit for even ones.
pub fn apply_fit(spec: &WavepacketSpec, method: Method, n_ch: usize, fit: GaussianFit) -> Result<GaussianPrep> {
    let (c1, c2) = spec.rescale(fit.eta)?;
    let shifted = spec.shifted_grid(c1, c2);
    let uniform = StateVector::uniform(spec.n_q)?;
    let (mut state, gamma, mut gates) = if method.is_circuit() {
        if (fit.tau - 2.0).abs() > 1e-12 || fit.parts.len() != 1 || fit.parts[0].parity != Parity::Even {
            return Err(Error::InvalidParameter("circuit filters need a single even fit at tau = 2".into()));
        }
        let poly = &fit.parts[0];
        let phases = solve_phases(poly)?.phases;
        let evolver = DiagonalEvolver { diag: shifted, t: fit.tau };
        let run = run_qetu(&uniform, &phases, &evolver, QetuMode::Controlled)?;
        (run.output, run.success_prob, Some(gate_count_qetu(spec.n_q, poly.degree, false)))
    } else {
        let mut amps = Vec::with_capacity(shifted.len());
        for (&s, a) in shifted.iter().zip(&uniform.amps) {
            let x = (fit.tau * s / 2.0).cos();
            let mut f = 0.0;
            for p in &fit.parts {
                f += p.eval(x.clamp(-1.0, 1.0))?;
            }
            amps.push(a * f);
        }
        let gamma = norm(&amps).powi(2);
        if !(gamma >= MIN_SUCCESS_PROB) {
            return Err(Error::FilteredToNothing(gamma));
        }
        (StateVector::from_amplitudes(amps)?, gamma, None)
    };
    if spec.p0 != 0.0 {
        state = shift_momentum(spec, &state, spec.p0)?;
        if let Some(g) = gates.as_mut() {
            g.rz += spec.n_q;
        }
    }
    let target = target_state(spec)?;
    let error = (1.0 - target.inner(&state).norm()).max(0.0);
    Ok(GaussianPrep { method, n_ch, state, error, gamma, fit, gates })
}

/// One CSV line of a wavepacket sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketRow {
    pub method: Method,
    pub n_q: usize,
    pub sigma_ratio: f64,
    pub n_ch: usize,
    pub error: f64,
    pub gamma_inv: f64,
    pub cnot: Option<usize>,
    pub rot: Option<usize>,
}

impl WavepacketRow {
    pub const HEADER: &'static str = "method,n_q,sigma_ratio,n_ch,error,gamma_inv,cnot,rot";

    pub fn new(spec: &WavepacketSpec, prep: &GaussianPrep) -> Self {
        WavepacketRow {
            method: prep.method,
            n_q: spec.n_q,
            sigma_ratio: spec.sigma_x / spec.x_max,
            n_ch: prep.n_ch,
            error: prep.error,
            gamma_inv: 1.0 / prep.gamma,
            cnot: prep.gates.map(|g| g.cnot),
            rot: prep.gates.map(|g| g.rotations()),
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
        format!(
            "{},{},{},{},{:e},{},{},{}",
            self.method,
            self.n_q,
            self.sigma_ratio,
            self.n_ch,
            self.error,
            self.gamma_inv,
            opt(self.cnot),
            opt(self.rot)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::DEFAULT_C;

    fn argmax(s: &StateVector) -> usize {
        (0..s.dim()).max_by(|&a, &b| s.amps[a].norm().total_cmp(&s.amps[b].norm())).unwrap()
    }

    #[test]
    fn symmetric_grid_centres_on_half_pi() {
        let spec = WavepacketSpec::centered(4, 5.0, 0.3).unwrap();
        for eta in [-0.4, 0.0, 0.7] {
            let (c1, c2) = spec.rescale(eta).unwrap();
            assert!((c2 - PI / 2.0).abs() < 1e-15);
            let g = spec.shifted_grid(c1, c2);
            assert!((g[0] - eta).abs() < 1e-12 && (g[15] - (PI - eta)).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_identity_at_tau_two() {
        let spec = WavepacketSpec::centered(5, 5.0, 0.2).unwrap();
        let t = crate::cheb::GaussianTarget::new(&spec, 0.3, 2.0, DEFAULT_C).unwrap();
        let pts = t.circuit_points(&spec);
        let n = pts.len();
        for j in 0..n {
            assert!((pts[j] + pts[n - 1 - j]).abs() < 1e-15);
        }
        for x in [0.0, 0.2, 0.55, 0.9] {
            assert!(t.odd_part(x).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_momentum_kick_is_identity() {
        let spec = WavepacketSpec::centered(4, 5.0, 0.3).unwrap();
        let s = target_state(&spec).unwrap();
        let out = shift_momentum(&spec, &s, 0.0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn one_cell_shift_moves_peak_by_one() {
        let spec = WavepacketSpec::centered(5, 5.0, 0.1).unwrap();
        let s = target_state(&spec).unwrap();
        let peak = argmax(&s);
        let out = shift_position(&spec, &s, spec.dx()).unwrap();
        assert_eq!(argmax(&out), peak + 1);
        // Exact cyclic permutation for a commensurate shift.
        let n = s.dim();
        for j in 0..n {
            assert!((out.amps[(j + 1) % n] - s.amps[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_matches_displaced_target() {
        let spec = WavepacketSpec::centered(6, 5.0, 0.1).unwrap();
        let s = target_state(&spec).unwrap();
        let moved = WavepacketSpec { x0: 3.0 * spec.dx(), ..spec };
        let out = shift_position(&spec, &s, moved.x0).unwrap();
        assert!(out.infidelity(&target_state(&moved).unwrap()) < 1e-12);
    }

    #[test]
    fn shift_round_trip() {
        let spec = WavepacketSpec::centered(5, 4.0, 0.2).unwrap();
        let s = StateVector::random(5, 3).unwrap();
        let a = shift_position(&spec, &s, 0.37).unwrap();
        let b = shift_position(&spec, &a, -0.37).unwrap();
        let c = shift_momentum(&spec, &shift_momentum(&spec, &b, 1.3).unwrap(), -1.3).unwrap();
        for (x, y) in c.amps.iter().zip(&s.amps) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_wide_packet_limit() {
        let spec = WavepacketSpec::centered(4, 1.0, 1e6).unwrap();
        assert!((gamma_closed_form(&spec, 0.9) - 0.81).abs() < 1e-9);
    }

    #[test]
    fn gamma_narrow_packet_value() {
        let spec = WavepacketSpec::centered(5, 5.0, 0.1).unwrap();
        let inv = 1.0 / gamma_closed_form(&spec, DEFAULT_C);
        assert!((11.0..=15.0).contains(&inv), "gamma^-1 = {inv}");
    }

    #[test]
    fn gamma_matches_circuit_norm() {
        let spec = WavepacketSpec::centered(4, 5.0, 0.3).unwrap();
        let p = prepare_gaussian(&spec, Method::V, 6, &EtaTauGrid::default()).unwrap();
        let gc = gamma_closed_form(&spec, DEFAULT_C);
        assert!((p.gamma - gc).abs() < 2.0 * p.fit.epsilon + 1e-6, "{} vs {gc}", p.gamma);
    }

    #[test]
    fn qetu_counts() {
        let g = gate_count_qetu(5, 0, false);
        assert_eq!((g.cnot, g.rz, g.rx), (0, 0, 1));
        let g = gate_count_qetu(3, 4, false);
        assert_eq!((g.cnot, g.rz, g.rx), (12, 12, 5));
        // Shifts: 2 QFTs of 3 controlled phases and 1 swap each, plus 2 * n_q Rz.
        let s = gate_count_qetu(3, 4, true);
        assert_eq!(s.cnot - g.cnot, 2 * (3 * 2 + 3));
        assert_eq!(s.rz - g.rz, 2 * 9 + 6);
    }

    #[test]
    fn exact_prep_counts() {
        let g = gate_count_exact_prep(3);
        assert_eq!((g.cnot, g.rotations()), (8, 14));
        let g = gate_count_exact_prep(1);
        assert_eq!((g.cnot, g.rotations()), (0, 2));
    }

    #[test]
    fn crossover_positions() {
        let (cnot, rot) = crossovers(4, 1..=12);
        assert_eq!(cnot, Some(4));
        assert_eq!(rot, Some(4));
    }

    #[test]
    fn method_parsing() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("VI".parse::<Method>().is_err());
    }

    #[test]
    fn method_five_interpolates_small_grid() {
        let spec = WavepacketSpec::centered(3, 5.0, 0.2).unwrap();
        for d in [6, 10] {
            let p = prepare_gaussian(&spec, Method::V, d / 2 + 1, &EtaTauGrid::default()).unwrap();
            assert!(p.error <= 1e-12, "d = {d}: {}", p.error);
            assert_eq!(p.gates.unwrap().cnot, 3 * d);
        }
    }

    #[test]
    fn method_one_is_exact_operator_application() {
        let spec = WavepacketSpec::centered(4, 5.0, 0.4).unwrap();
        let p = prepare_gaussian(&spec, Method::I, 6, &EtaTauGrid::default()).unwrap();
        assert!(p.gates.is_none());
        assert_eq!((p.fit.eta, p.fit.tau), (0.0, 1.0));
        assert!(p.error > 1e-7 && p.error < 1e-3);
    }

    #[test]
    fn momentum_kick_reaches_target() {
        let spec = WavepacketSpec::new(4, 5.0, 2.0, 0.0, 0.8).unwrap();
        let p = prepare_gaussian(&spec, Method::V, 8, &EtaTauGrid::default()).unwrap();
        assert!(p.error < 1e-8);
        assert_eq!(p.gates.unwrap().rz, 4 * 14 + 4);
    }

    #[test]
    fn row_csv_shape() {
        let spec = WavepacketSpec::centered(3, 5.0, 0.2).unwrap();
        let p = prepare_gaussian(&spec, Method::I, 3, &EtaTauGrid::default()).unwrap();
        let line = WavepacketRow::new(&spec, &p).to_csv();
        assert_eq!(line.split(',').count(), WavepacketRow::HEADER.split(',').count());
        assert!(line.starts_with("I,3,0.2,3,") && line.ends_with(",,"));
    }
}
