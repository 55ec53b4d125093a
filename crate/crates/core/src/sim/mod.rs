//! Dense statevector simulation of the QETU ladder.
//!
//! System registers are little-endian: site `p` owns bits
//! `[p * n_q, (p + 1) * n_q)` of the global index. The QETU ancilla is kept
//! as two system-sized halves, one per ancilla value.

pub mod circuit;
pub mod pauli;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::cheb::ChebyshevPoly;
use crate::error::{Error, Result};
use crate::qsp::PhaseSequence;

pub use circuit::{Circuit, Gate, GateCount, GateKind};
pub use pauli::{build_v_circuit, group_pauli, GroupedHamiltonian, PauliGroup, PauliTermSum};

/// Largest system register handled by the dense simulator.
pub const MAX_SYSTEM_QUBITS: usize = 14;
/// Post-selection probabilities below this count as filtered to nothing.
pub const MIN_SUCCESS_PROB: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<C>,
}

impl StateVector {
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        check_qubits(n)?;
        if k >= 1 << n {
            return Err(Error::InvalidParameter(format!("basis index {k} out of range for {n} qubits")));
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[k] = C::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Equal superposition, the image of `|0...0>` under Hadamards.
    pub fn uniform(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let a = C::new((1.0 / (1u64 << n) as f64).sqrt(), 0.0);
        Ok(StateVector { n, amps: vec![a; 1 << n] })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        let nrm = norm(&amps);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(StateVector { n, amps: amps.into_iter().map(|a| a / nrm).collect() })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amps.iter().map(|&a| C::new(a, 0.0)).collect())
    }

    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C {
        inner(&self.amps, &other.amps)
    }

    /// `1 - |<self|other>|`.
    pub fn infidelity(&self, other: &StateVector) -> f64 {
        1.0 - self.inner(other).norm()
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_SYSTEM_QUBITS + 1 {
        Err(Error::DimensionOverflow(1 << n))
    } else {
        Ok(())
    }
}

pub fn norm(v: &[C]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Contiguous block of qubits `[offset, offset + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subregister {
    pub offset: usize,
    pub width: usize,
}

impl Subregister {
    pub fn site(p: usize, n_q: usize) -> Self {
        Subregister { offset: p * n_q, width: n_q }
    }

    fn check(&self, len: usize) -> Result<()> {
        let n = len.trailing_zeros() as usize;
        if self.width == 0 || self.offset + self.width > n || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "subregister [{}, {}) does not fit in {} qubits",
                self.offset,
                self.offset + self.width,
                n
            )));
        }
        Ok(())
    }

    /// Calls `f` with the strided index list of every register fiber.
    fn for_each_fiber(&self, len: usize, mut f: impl FnMut(usize, usize)) {
        let stride = 1usize << self.offset;
        let block = stride << self.width;
        for hi in (0..len).step_by(block) {
            for lo in 0..stride {
                f(hi + lo, stride);
            }
        }
    }
}

/// Multiplies amplitude `j` by `exp(-i angle lambda_j)`.
pub fn apply_diagonal_phase(amps: &mut [C], eigenvalues: &[f64], angle: f64) -> Result<()> {
    if eigenvalues.len() != amps.len() {
        return Err(Error::LengthMismatch { expected: amps.len(), got: eigenvalues.len() });
    }
    for (a, &l) in amps.iter_mut().zip(eigenvalues) {
        *a *= C::from_polar(1.0, -angle * l);
    }
    Ok(())
}

/// Diagonal phase acting on one subregister only.
pub fn apply_register_phase(amps: &mut [C], reg: Subregister, eigenvalues: &[f64], angle: f64) -> Result<()> {
    reg.check(amps.len())?;
    let n = 1usize << reg.width;
    if eigenvalues.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: eigenvalues.len() });
    }
    let ph: Vec<C> = eigenvalues.iter().map(|&l| C::from_polar(1.0, -angle * l)).collect();
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= ph[(i >> reg.offset) & (n - 1)];
    }
    Ok(())
}

/// Cached transforms for `FT_{kj} = exp(2 pi i jk / N) / sqrt(N)` and its inverse.
#[derive(Clone)]
pub struct Dft {
    width: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dft({} qubits)", self.width)
    }
}

impl Dft {
    pub fn new(width: usize) -> Self {
        let mut planner = FftPlanner::new();
        let n = 1usize << width;
        // rustfft's "inverse" direction carries the positive exponent.
        Dft { width, fwd: planner.plan_fft_inverse(n), inv: planner.plan_fft_forward(n) }
    }

    pub fn apply(&self, amps: &mut [C], reg: Subregister, inverse: bool) -> Result<()> {
        reg.check(amps.len())?;
        if reg.width != self.width {
            return Err(Error::InvalidParameter("transform width does not match subregister".into()));
        }
        let n = 1usize << reg.width;
        let scale = 1.0 / (n as f64).sqrt();
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut buf = vec![C::new(0.0, 0.0); n];
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        reg.for_each_fiber(amps.len(), |base, stride| {
            for k in 0..n {
                buf[k] = amps[base + k * stride];
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                amps[base + k * stride] = buf[k] * scale;
            }
        });
        Ok(())
    }

    /// Applies the transform on every site register of width `width`.
    pub fn apply_all(&self, amps: &mut [C], n_sites: usize, inverse: bool) -> Result<()> {
        for p in 0..n_sites {
            self.apply(amps, Subregister::site(p, self.width), inverse)?;
        }
        Ok(())
    }
}

pub fn apply_qft(amps: &mut [C], reg: Subregister) -> Result<()> {
    Dft::new(reg.width).apply(amps, reg, false)
}

pub fn apply_iqft(amps: &mut [C], reg: Subregister) -> Result<()> {
    Dft::new(reg.width).apply(amps, reg, true)
}

/// `H = diag(hx) + FT^dagger diag(hp) FT` with FT on every site register.
#[derive(Debug, Clone)]
pub struct SplitHamiltonian {
    pub n_q: usize,
    pub n_sites: usize,
    pub hx: Vec<f64>,
    pub hp: Vec<f64>,
    dft: Dft,
}

impl SplitHamiltonian {
    pub fn new(n_q: usize, n_sites: usize, hx: Vec<f64>, hp: Vec<f64>) -> Result<Self> {
        if n_q == 0 || n_sites == 0 {
            return Err(Error::InvalidParameter("need at least one qubit and one site".into()));
        }
        let bits = n_q * n_sites;
        if bits > MAX_SYSTEM_QUBITS {
            return Err(Error::DimensionOverflow(1usize << bits.min(63)));
        }
        let dim = 1usize << bits;
        for t in [&hx, &hp] {
            if t.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, got: t.len() });
            }
        }
        Ok(SplitHamiltonian { n_q, n_sites, hx, hp, dft: Dft::new(n_q) })
    }

    pub fn dim(&self) -> usize {
        self.hx.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_q * self.n_sites
    }

    pub fn ft(&self, amps: &mut [C], inverse: bool) {
        self.dft.apply_all(amps, self.n_sites, inverse).expect("register layout fixed at construction");
    }

    /// `H v`.
    pub fn apply(&self, v: &[C]) -> Vec<C> {
        let mut w = v.to_vec();
        self.ft(&mut w, false);
        for (a, &e) in w.iter_mut().zip(&self.hp) {
            *a *= e;
        }
        self.ft(&mut w, true);
        for ((a, &e), &x) in w.iter_mut().zip(&self.hx).zip(v) {
            *a += x * e;
        }
        w
    }

    pub fn dense(&self) -> Result<DMatrix<C>> {
        let dim = self.dim();
        if dim > 1 << 12 {
            return Err(Error::DimensionOverflow(dim));
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut e = vec![C::new(0.0, 0.0); dim];
        for j in 0..dim {
            e.iter_mut().for_each(|a| *a = C::new(0.0, 0.0));
            e[j] = C::new(1.0, 0.0);
            let col = self.apply(&e);
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
        }
        // Symmetrize away rounding from the transforms.
        let h = (&m + m.adjoint()) * C::new(0.5, 0.0);
        Ok(h)
    }
}

/// Which of the two first-order orderings to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `exp(-i dt H_x) FT^dagger exp(-i dt H_p) FT`.
    Forward,
    /// The adjoint of `Forward`.
    Adjoint,
}

pub fn trotter_step(amps: &mut [C], model: &SplitHamiltonian, dtau: f64, direction: Direction) -> Result<()> {
    if amps.len() != model.dim() {
        return Err(Error::LengthMismatch { expected: model.dim(), got: amps.len() });
    }
    match direction {
        Direction::Forward => {
            model.ft(amps, false);
            apply_diagonal_phase(amps, &model.hp, dtau)?;
            model.ft(amps, true);
            apply_diagonal_phase(amps, &model.hx, dtau)?;
        }
        Direction::Adjoint => {
            apply_diagonal_phase(amps, &model.hx, -dtau)?;
            model.ft(amps, false);
            apply_diagonal_phase(amps, &model.hp, -dtau)?;
            model.ft(amps, true);
        }
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C>,
}

impl HermitianEigen {
    pub fn new(h: &DMatrix<C>) -> Result<Self> {
        let n = h.nrows();
        if n != h.ncols() {
            return Err(Error::InvalidParameter("matrix is not square".into()));
        }
        if n > 1 << 12 {
            return Err(Error::DimensionOverflow(n));
        }
        let scale = h.iter().map(|a| a.norm()).fold(0.0, f64::max).max(1.0);
        let herm_err = (h - h.adjoint()).iter().map(|a| a.norm()).fold(0.0, f64::max);
        if herm_err > 1e-10 * scale {
            return Err(Error::InvalidParameter(format!("matrix is not Hermitian (deviation {herm_err:e})")));
        }
        let eig = h.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(HermitianEigen { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_amplitudes(self.vectors.column(k).iter().copied().collect())
            .expect("eigenvectors are normalized")
    }

    /// `V diag(f(E)) V^dagger v`.
    pub fn apply_fn(&self, v: &[C], f: impl Fn(f64) -> C) -> Vec<C> {
        let n = self.dim();
        let mut c = vec![C::new(0.0, 0.0); n];
        for k in 0..n {
            let mut s = C::new(0.0, 0.0);
            for i in 0..n {
                s += self.vectors[(i, k)].conj() * v[i];
            }
            c[k] = s * f(self.values[k]);
        }
        let mut out = vec![C::new(0.0, 0.0); n];
        for k in 0..n {
            let ck = c[k];
            if ck == C::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                out[i] += self.vectors[(i, k)] * ck;
            }
        }
        out
    }
}

/// Something that applies `exp(-i s t H)` for `s = +-1`, or its adjoint.
pub trait Evolver: Sync {
    fn dim(&self) -> usize;
    fn evolve(&self, amps: &mut [C], sign: f64, adjoint: bool);
    /// Primitive steps per call, used for gate tallies.
    fn steps_per_call(&self) -> usize {
        1
    }
}

/// Exact evolution backed by a cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct ExactEvolver {
    eig: Arc<HermitianEigen>,
    t: f64,
}

impl ExactEvolver {
    pub fn new(eig: Arc<HermitianEigen>, t: f64) -> Self {
        ExactEvolver { eig, t }
    }
}

impl Evolver for ExactEvolver {
    fn dim(&self) -> usize {
        self.eig.dim()
    }

    fn evolve(&self, amps: &mut [C], sign: f64, adjoint: bool) {
        let s = if adjoint { -sign } else { sign };
        let t = self.t;
        let out = self.eig.apply_fn(amps, |e| C::from_polar(1.0, -s * t * e));
        amps.copy_from_slice(&out);
    }
}

/// Exact evolution under a diagonal Hamiltonian.
#[derive(Debug, Clone)]
pub struct DiagonalEvolver {
    pub diag: Vec<f64>,
    pub t: f64,
}

impl Evolver for DiagonalEvolver {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn evolve(&self, amps: &mut [C], sign: f64, adjoint: bool) {
        let s = if adjoint { -sign } else { sign };
        apply_diagonal_phase(amps, &self.diag, s * self.t).expect("dimension checked by caller");
    }
}

/// `n_steps` first-order steps of size `t / n_steps`.
#[derive(Debug, Clone)]
pub struct TrotterEvolver {
    model: Arc<SplitHamiltonian>,
    dt: f64,
    n_steps: usize,
}

impl TrotterEvolver {
    pub fn new(model: Arc<SplitHamiltonian>, t: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be positive".into()));
        }
        Ok(TrotterEvolver { model, dt: t / n_steps as f64, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

impl Evolver for TrotterEvolver {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn evolve(&self, amps: &mut [C], sign: f64, adjoint: bool) {
        let dir = if adjoint { Direction::Adjoint } else { Direction::Forward };
        for _ in 0..self.n_steps {
            trotter_step(amps, &self.model, sign * self.dt, dir).expect("dimension checked by caller");
        }
    }

    fn steps_per_call(&self) -> usize {
        self.n_steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QetuMode {
    /// Controlled `U = exp(-i tau H)`; block `F(cos(tau H / 2))`.
    Controlled,
    /// `V = diag(exp(i tau H), exp(-i tau H))`; block `F(cos(tau H))`.
    ControlFree,
}

impl std::str::FromStr for QetuMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "controlled" => Ok(QetuMode::Controlled),
            "control-free" | "control_free" => Ok(QetuMode::ControlFree),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QetuRunReport {
    pub output: StateVector,
    pub success_prob: f64,
    pub calls: usize,
    pub tallies: GateCount,
}

fn rotate_ancilla(a0: &mut [C], a1: &mut [C], phi: f64) {
    let (s, c) = phi.sin_cos();
    let is = C::new(0.0, s);
    for (x, y) in a0.iter_mut().zip(a1.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = u * c + is * v;
        *y = is * u + v * c;
    }
}

/// The unnormalized ancilla-|0> branch after the full ladder, with the
/// `(-1)^{d/2}` sign removed.
pub fn qetu_block_apply(psi: &[C], w_phases: &[f64], evolver: &dyn Evolver, mode: QetuMode) -> Result<Vec<C>> {
    if w_phases.is_empty() {
        return Err(Error::InvalidParameter("empty phase list".into()));
    }
    let d = w_phases.len() - 1;
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("QETU needs an even number of calls, got {d}")));
    }
    if psi.len() != evolver.dim() {
        return Err(Error::LengthMismatch { expected: evolver.dim(), got: psi.len() });
    }
    let mut a0 = psi.to_vec();
    let mut a1 = vec![C::new(0.0, 0.0); psi.len()];
    // Matrix product e^{i phi_0 X} G_1 e^{i phi_1 X} ... G_d e^{i phi_d X},
    // G_j = U for odd j and U^dagger for even j; applied right to left.
    rotate_ancilla(&mut a0, &mut a1, w_phases[d]);
    for j in (1..=d).rev() {
        let adjoint = j % 2 == 0;
        match mode {
            QetuMode::Controlled => evolver.evolve(&mut a1, 1.0, adjoint),
            QetuMode::ControlFree => {
                evolver.evolve(&mut a0, -1.0, adjoint);
                evolver.evolve(&mut a1, 1.0, adjoint);
            }
        }
        rotate_ancilla(&mut a0, &mut a1, w_phases[j - 1]);
    }
    if (d / 2) % 2 == 1 {
        a0.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(a0)
}

pub fn run_qetu(psi: &StateVector, phases: &PhaseSequence, evolver: &dyn Evolver, mode: QetuMode) -> Result<QetuRunReport> {
    let out = qetu_block_apply(&psi.amps, &phases.w_convention, evolver, mode)?;
    let p = norm(&out).powi(2);
    if !(p >= MIN_SUCCESS_PROB) {
        return Err(Error::FilteredToNothing(p));
    }
    let d = phases.degree;
    let steps = evolver.steps_per_call();
    let tallies = GateCount { cnot: 0, rz: 0, rx: d + 1, other: d * steps };
    let s = p.sqrt();
    Ok(QetuRunReport {
        output: StateVector { n: psi.n, amps: out.into_iter().map(|a| a / s).collect() },
        success_prob: p,
        calls: d,
        tallies,
    })
}

/// Reference result: `F(cos(tau E / 2))` (or `F(cos(tau E))` when
/// `half_angle` is false) applied eigenvalue-wise, plus the squared norm.
pub fn exact_filter_oracle(
    h: &DMatrix<C>,
    poly: &ChebyshevPoly,
    tau: f64,
    psi: &StateVector,
    half_angle: bool,
) -> Result<(StateVector, f64)> {
    let eig = HermitianEigen::new(h)?;
    exact_filter_with(&eig, poly, tau, psi, half_angle)
}

pub fn exact_filter_with(
    eig: &HermitianEigen,
    poly: &ChebyshevPoly,
    tau: f64,
    psi: &StateVector,
    half_angle: bool,
) -> Result<(StateVector, f64)> {
    if psi.dim() != eig.dim() {
        return Err(Error::LengthMismatch { expected: eig.dim(), got: psi.dim() });
    }
    let k = if half_angle { 0.5 } else { 1.0 };
    let out = eig.apply_fn(&psi.amps, |e| {
        let x = (tau * k * e).cos().clamp(-1.0, 1.0);
        C::new(poly.eval(x).expect("x clamped to [-1, 1]"), 0.0)
    });
    let p = norm(&out).powi(2);
    if !(p >= MIN_SUCCESS_PROB) {
        return Err(Error::FilteredToNothing(p));
    }
    Ok((StateVector::from_amplitudes(out)?, p))
}

/// Finite-shot estimate of the post-selection probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub shots: u64,
    pub successes: u64,
    pub p_hat: f64,
}

pub fn sample_post_selection(p: f64, shots: u64, seed: u64) -> Result<ShotEstimate> {
    if !(0.0..=1.0).contains(&p) || shots == 0 {
        return Err(Error::InvalidParameter("need p in [0, 1] and at least one shot".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let successes = (0..shots).filter(|_| rng.gen_bool(p)).count() as u64;
    Ok(ShotEstimate { shots, successes, p_hat: successes as f64 / shots as f64 })
}

#[cfg(test)]
mod tests;
