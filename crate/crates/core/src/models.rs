//! Digitized Hamiltonians: the harmonic oscillator and compact U(1) gauge
//! theory on a 2 x L lattice, plus spectral rescaling and bounds.
//!
//! Both models are split as `H = diag(hx) + FT^dagger diag(hp) FT`. For U(1)
//! the state lives in the magnetic basis, so `hx = H_B` and `hp = H_E`.
//! Conjugate-variable tables are stored in FFT order, index `k` carrying
//! `k` for `k < N/2` and `k - N` otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::cheb::tau_max;
use crate::error::{Error, Result};
use crate::sim::{inner, norm, HermitianEigen, SplitHamiltonian, StateVector};

/// Largest dimension handled by dense diagonalization.
pub const DENSE_LIMIT: usize = 1 << 12;

fn fft_index(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Uniform grid `x_j = -x_max + j dx`, `dx = 2 x_max / (N - 1)`, with
/// conjugate spacing `dp = 2 pi / (N dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Digitization {
    pub n_q: usize,
    pub x_max: f64,
}

impl Digitization {
    pub fn new(n_q: usize, x_max: f64) -> Result<Self> {
        if n_q == 0 || n_q > 14 {
            return Err(Error::InvalidParameter(format!("n_q = {n_q} outside 1..=14")));
        }
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!("x_max = {x_max} must be positive")));
        }
        Ok(Digitization { n_q, x_max })
    }

    pub fn n(&self) -> usize {
        1 << self.n_q
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / (self.n() as f64 - 1.0)
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / (self.n() as f64 * self.dx())
    }

    pub fn p_max(&self) -> f64 {
        PI / self.dx()
    }

    pub fn x_grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n()).map(|j| -self.x_max + dx * j as f64).collect()
    }

    /// Momentum values, FFT order.
    pub fn p_table(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|k| self.dp() * fft_index(k, n)).collect()
    }

    /// Momentum values in ascending order, `-p_max + j dp`.
    pub fn p_grid(&self) -> Vec<f64> {
        (0..self.n()).map(|j| -self.p_max() + self.dp() * j as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShoModel {
    pub digitization: Digitization,
    pub g: f64,
}

/// `H = (g^2 / 2) p^2 + x^2 / (2 g^2)`.
pub fn sho_model(n_q: usize, g: f64, x_max: f64) -> Result<ShoModel> {
    if !(g > 0.0) {
        return Err(Error::InvalidParameter(format!("g = {g} must be positive")));
    }
    Ok(ShoModel { digitization: Digitization::new(n_q, x_max)?, g })
}

impl ShoModel {
    pub fn hamiltonian(&self) -> Result<SplitHamiltonian> {
        let g2 = self.g * self.g;
        let hx = self.digitization.x_grid().iter().map(|x| x * x / (2.0 * g2)).collect();
        let hp = self.digitization.p_table().iter().map(|p| g2 * p * p / 2.0).collect();
        SplitHamiltonian::new(self.digitization.n_q, 1, hx, hp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Original,
    Weaved,
    Custom,
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Basis::Original),
            "weaved" => Ok(Basis::Weaved),
            "custom" => Ok(Basis::Custom),
            _ => Err(Error::InvalidParameter(format!("unknown basis {s:?}"))),
        }
    }
}

/// Built-in three-plaquette weave.
pub fn weave_np3() -> DMatrix<f64> {
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    DMatrix::from_row_slice(3, 3, &[s2, -2.0, 0.0, s2, 1.0, -s3, s2, 1.0, s3]) / s6
}

/// Electric coefficient matrix `c` with `H_E = (g^2/2) R^T c R` for the
/// periodic `L x 2` plaquette lattice, `N_p = 2L - 1`, last rotor fixed to 0.
/// Plaquette `p = x + L y`.
pub fn electric_matrix_2xl(n_p: usize) -> Result<DMatrix<f64>> {
    if n_p < 3 || n_p.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "built-in lattices need odd N_p >= 3 (2 x L with L = (N_p + 1) / 2), got {n_p}"
        )));
    }
    let l = n_p.div_ceil(2);
    let total = 2 * l;
    let mut full = DMatrix::<f64>::zeros(total, total);
    let mut add_link = |a: usize, b: usize| {
        full[(a, a)] += 1.0;
        full[(b, b)] += 1.0;
        full[(a, b)] -= 1.0;
        full[(b, a)] -= 1.0;
    };
    for y in 0..2 {
        for x in 0..l {
            let p = x + l * y;
            add_link(p, (x + 1) % l + l * y);
            add_link(p, x + l * ((y + 1) % 2));
        }
    }
    Ok(full.view((0, 0), (n_p, n_p)).into_owned())
}

/// Cosine argument vectors: each unit vector plus the all-ones vector.
pub fn original_cosine_vectors(n_p: usize) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = (0..n_p).map(|p| (0..n_p).map(|q| if p == q { 1.0 } else { 0.0 }).collect()).collect();
    v.push(vec![1.0; n_p]);
    v
}

fn check_orthogonal(w: &DMatrix<f64>) -> Result<()> {
    if !w.is_square() {
        return Err(Error::InvalidParameter("weave matrix is not square".into()));
    }
    let dev = (w * w.transpose() - DMatrix::identity(w.nrows(), w.nrows())).abs().max();
    if dev > 1e-12 {
        return Err(Error::InvalidParameter(format!("weave matrix is not orthogonal (deviation {dev:e})")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U1Model {
    pub n_p: usize,
    pub n_q: usize,
    pub g: f64,
    pub basis: Basis,
    pub weave: DMatrix<f64>,
    /// Electric coefficients in the working basis.
    pub electric: DMatrix<f64>,
    /// Cosine argument vectors in the working basis.
    pub cosine_vectors: Vec<Vec<f64>>,
    pub ceilings: Vec<f64>,
    pub b_max: Vec<f64>,
}

/// Optional inputs for [`u1_model_with`]. Matrices and vectors are given in
/// the original plaquette basis and rotated by the weave.
#[derive(Debug, Clone, Default)]
pub struct U1Options {
    pub weave: Option<DMatrix<f64>>,
    pub electric: Option<DMatrix<f64>>,
    pub cosine_vectors: Option<Vec<Vec<f64>>>,
    pub b_max: Option<Vec<f64>>,
}

pub fn u1_model(n_p: usize, n_q: usize, g: f64, basis: Basis) -> Result<U1Model> {
    u1_model_with(n_p, n_q, g, basis, &U1Options::default())
}

pub fn u1_model_with(n_p: usize, n_q: usize, g: f64, basis: Basis, opts: &U1Options) -> Result<U1Model> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g = {g} must be positive")));
    }
    if n_q == 0 || n_p == 0 || n_p * n_q > crate::sim::MAX_SYSTEM_QUBITS {
        return Err(Error::InvalidParameter(format!("unsupported size N_p = {n_p}, n_q = {n_q}")));
    }
    let c0 = match &opts.electric {
        Some(c) => c.clone(),
        None => electric_matrix_2xl(n_p)?,
    };
    if c0.shape() != (n_p, n_p) || (&c0 - c0.transpose()).abs().max() > 1e-12 {
        return Err(Error::InvalidParameter("electric matrix must be symmetric N_p x N_p".into()));
    }
    let v0 = opts.cosine_vectors.clone().unwrap_or_else(|| original_cosine_vectors(n_p));
    if v0.iter().any(|v| v.len() != n_p) {
        return Err(Error::InvalidParameter("cosine vectors must have N_p entries".into()));
    }
    let weave = match basis {
        Basis::Original => DMatrix::identity(n_p, n_p),
        Basis::Weaved => match &opts.weave {
            Some(w) => w.clone(),
            None if n_p == 3 => weave_np3(),
            None => {
                return Err(Error::InvalidParameter(format!("no built-in weave for N_p = {n_p}; supply one")));
            }
        },
        Basis::Custom => opts
            .weave
            .clone()
            .ok_or_else(|| Error::InvalidParameter("custom basis needs a weave matrix".into()))?,
    };
    if weave.shape() != (n_p, n_p) {
        return Err(Error::InvalidParameter("weave matrix must be N_p x N_p".into()));
    }
    check_orthogonal(&weave)?;
    let electric = weave.transpose() * &c0 * &weave;
    let cosine_vectors: Vec<Vec<f64>> = v0
        .iter()
        .map(|v| {
            let w = weave.transpose() * nalgebra::DVector::from_column_slice(v);
            w.iter().map(|&x| if x.abs() < 1e-15 { 0.0 } else { x }).collect()
        })
        .collect();
    let ceilings = if basis == Basis::Weaved && opts.weave.is_none() && n_p == 3 {
        vec![2f64.sqrt() * PI, 6f64.sqrt() * PI, 3f64.sqrt() * PI]
    } else {
        // pi over the smallest nonzero coefficient of each B_p.
        (0..n_p)
            .map(|p| {
                let m = cosine_vectors.iter().map(|v| v[p].abs()).filter(|&a| a > 1e-12).fold(f64::INFINITY, f64::min);
                if m.is_finite() {
                    PI / m
                } else {
                    PI
                }
            })
            .collect()
    };
    let mut model = U1Model { n_p, n_q, g, basis, weave, electric, cosine_vectors, ceilings, b_max: vec![] };
    model.b_max = match &opts.b_max {
        Some(b) => {
            if b.len() != n_p || b.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidParameter("b_max overrides must be N_p positive values".into()));
            }
            b.clone()
        }
        None => {
            let (br, bb) = beta_match(&model);
            (0..n_p).map(|p| b_max_formula(g, n_q, br[p], bb[p], model.ceilings[p])).collect()
        }
    };
    Ok(model)
}

/// `min(g (N/2) sqrt(beta_R / beta_B) sqrt(2 pi / N), ceiling)`.
pub fn b_max_formula(g: f64, n_q: usize, beta_r: f64, beta_b: f64, ceiling: f64) -> f64 {
    let n = (1usize << n_q) as f64;
    (g * n / 2.0 * (beta_r / beta_b).sqrt() * (2.0 * PI / n).sqrt()).min(ceiling)
}

/// Diagonal quadratic coefficients: `beta_R,p^2 = c_pp`,
/// `beta_B,p^2 = sum over cosines of v_p^2`.
pub fn beta_match(model: &U1Model) -> (Vec<f64>, Vec<f64>) {
    let br = (0..model.n_p).map(|p| model.electric[(p, p)].sqrt()).collect();
    let bb = (0..model.n_p).map(|p| model.cosine_vectors.iter().map(|v| v[p] * v[p]).sum::<f64>().sqrt()).collect();
    (br, bb)
}

impl U1Model {
    pub fn n(&self) -> usize {
        1 << self.n_q
    }

    pub fn dim(&self) -> usize {
        1 << (self.n_p * self.n_q)
    }

    /// `b_{p,j} = -b_max,p + j db_p`, `db_p = 2 b_max,p / N`.
    pub fn b_grid(&self, p: usize) -> Vec<f64> {
        let n = self.n();
        let db = 2.0 * self.b_max[p] / n as f64;
        (0..n).map(|j| -self.b_max[p] + db * j as f64).collect()
    }

    /// Rotor values for plaquette `p` in FFT order, spacing `pi / b_max,p`.
    pub fn r_table(&self, p: usize) -> Vec<f64> {
        let n = self.n();
        let dr = PI / self.b_max[p];
        (0..n).map(|k| dr * fft_index(k, n)).collect()
    }

    fn digits(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.n() - 1;
        (0..self.n_p).map(move |p| (idx >> (p * self.n_q)) & mask)
    }

    pub fn magnetic_table(&self) -> Vec<f64> {
        let grids: Vec<Vec<f64>> = (0..self.n_p).map(|p| self.b_grid(p)).collect();
        let g2 = self.g * self.g;
        let k = self.cosine_vectors.len() as f64;
        (0..self.dim())
            .map(|idx| {
                let b: Vec<f64> = self.digits(idx).enumerate().map(|(p, j)| grids[p][j]).collect();
                let s: f64 = self.cosine_vectors.iter().map(|v| v.iter().zip(&b).map(|(a, x)| a * x).sum::<f64>().cos()).sum();
                (k - s) / g2
            })
            .collect()
    }

    pub fn electric_table(&self) -> Vec<f64> {
        let tables: Vec<Vec<f64>> = (0..self.n_p).map(|p| self.r_table(p)).collect();
        let g2 = self.g * self.g;
        (0..self.dim())
            .map(|idx| {
                let r: Vec<f64> = self.digits(idx).enumerate().map(|(p, j)| tables[p][j]).collect();
                let mut s = 0.0;
                for i in 0..self.n_p {
                    for j in 0..self.n_p {
                        s += self.electric[(i, j)] * r[i] * r[j];
                    }
                }
                g2 / 2.0 * s
            })
            .collect()
    }

    pub fn hamiltonian(&self) -> Result<SplitHamiltonian> {
        SplitHamiltonian::new(self.n_q, self.n_p, self.magnetic_table(), self.electric_table())
    }
}

/// Either model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Sho(ShoModel),
    U1(U1Model),
}

impl Model {
    pub fn hamiltonian(&self) -> Result<SplitHamiltonian> {
        match self {
            Model::Sho(m) => m.hamiltonian(),
            Model::U1(m) => m.hamiltonian(),
        }
    }
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct ModelFile {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "Np", default)]
    pub n_p: Option<usize>,
    pub nq: usize,
    pub g: f64,
    #[serde(default)]
    pub basis: Option<Basis>,
    #[serde(rename = "W", default)]
    pub weave: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub electric_cij: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub cosine_vectors: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub bmax: Option<Vec<f64>>,
    #[serde(default)]
    pub xmax: Option<f64>,
}

fn square(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ModelFile {
    pub fn build(&self) -> Result<Model> {
        match self.kind.as_str() {
            "sho" => {
                let x_max = self.xmax.ok_or_else(|| Error::InvalidParameter("sho model needs xmax".into()))?;
                Ok(Model::Sho(sho_model(self.nq, self.g, x_max)?))
            }
            "u1" => {
                let n_p = self.n_p.ok_or_else(|| Error::InvalidParameter("u1 model needs Np".into()))?;
                let opts = U1Options {
                    weave: self.weave.as_deref().map(|w| square(w, "W")).transpose()?,
                    electric: self.electric_cij.as_deref().map(|c| square(c, "electric_cij")).transpose()?,
                    cosine_vectors: self.cosine_vectors.clone(),
                    b_max: self.bmax.clone(),
                };
                let basis = self.basis.unwrap_or(if opts.weave.is_some() { Basis::Custom } else { Basis::Original });
                Ok(Model::U1(u1_model_with(n_p, self.nq, self.g, basis, &opts)?))
            }
            other => Err(Error::InvalidParameter(format!("unknown model type {other:?}"))),
        }
    }
}

/// Sorted eigenvalues by dense diagonalization.
pub fn exact_spectrum(h: &SplitHamiltonian) -> Result<Vec<f64>> {
    if h.dim() > DENSE_LIMIT {
        return Err(Error::DimensionOverflow(h.dim()));
    }
    Ok(HermitianEigen::new(&h.dense()?)?.values)
}

/// Low-lying data used by ground-state preparation.
#[derive(Debug, Clone)]
pub struct SpectrumSummary {
    pub e0: f64,
    pub e1: f64,
    pub emax: f64,
    pub ground: StateVector,
    /// Full decomposition when the dimension allowed it.
    pub eigen: Option<Arc<HermitianEigen>>,
}

/// Dense when possible, Lanczos otherwise.
pub fn spectrum_summary(h: &SplitHamiltonian) -> Result<SpectrumSummary> {
    if h.dim() <= DENSE_LIMIT {
        let eig = Arc::new(HermitianEigen::new(&h.dense()?)?);
        let n = eig.dim();
        Ok(SpectrumSummary {
            e0: eig.values[0],
            e1: if n > 1 { eig.values[1] } else { eig.values[0] },
            emax: eig.values[n - 1],
            ground: eig.eigenvector(0),
            eigen: Some(eig),
        })
    } else {
        let l = lanczos(h, 400, 1e-10, 7)?;
        Ok(SpectrumSummary { e0: l.lowest[0], e1: l.lowest[1], emax: l.highest, ground: l.ground, eigen: None })
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub lowest: [f64; 2],
    pub highest: f64,
    pub ground: StateVector,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalization. Converged when the Ritz residuals
/// of the two lowest and the highest pairs drop below `tol` (relative to the
/// spectral width).
pub fn lanczos(h: &SplitHamiltonian, max_iter: usize, tol: f64, seed: u64) -> Result<LanczosResult> {
    let dim = h.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<C> = (0..dim).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let n0 = norm(&q);
    q.iter_mut().for_each(|a| *a /= n0);
    let mut basis: Vec<Vec<C>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let kmax = max_iter.min(dim);
    for k in 0..kmax {
        let mut w = h.apply(&basis[k]);
        let a = inner(&basis[k], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = inner(v, &w);
                for (x, y) in w.iter_mut().zip(v) {
                    *x -= c * y;
                }
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let width = (eig.eigenvalues[order[m - 1]] - eig.eigenvalues[order[0]]).abs().max(1.0);
        let resid = |i: usize| (b * eig.eigenvectors[(m - 1, i)]).abs() / width;
        let done = m >= 3 && resid(order[0]) < tol && resid(order[1]) < tol && resid(order[m - 1]) < tol;
        if done || b < 1e-13 * width || k + 1 == kmax {
            if m < 2 {
                return Err(Error::NoConvergence("Krylov space too small".into()));
            }
            if !done && b >= 1e-13 * width {
                return Err(Error::NoConvergence(format!("Lanczos not converged after {m} iterations")));
            }
            let s0 = order[0];
            let mut g = vec![C::new(0.0, 0.0); dim];
            for (i, v) in basis.iter().enumerate() {
                let c = eig.eigenvectors[(i, s0)];
                for (x, y) in g.iter_mut().zip(v) {
                    *x += y * c;
                }
            }
            return Ok(LanczosResult {
                lowest: [eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]],
                highest: eig.eigenvalues[order[m - 1]],
                ground: StateVector::from_amplitudes(g)?,
                iterations: m,
            });
        }
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
    unreachable!("loop returns on its last iteration")
}

/// How the filter window is placed relative to the rescaled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPreset {
    /// `mu` halfway between E0 and E1, `delta` the full gap.
    Midpoint,
    /// `mu` halfway between E0 and E1, `delta` two thirds of the gap.
    TwoThirdsGap,
    Custom { mu: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParams {
    pub c1: f64,
    pub c2: f64,
    pub eta: f64,
    pub e0: f64,
    pub e1: f64,
    pub emax: f64,
    pub mu: f64,
    pub delta: f64,
    pub tau_max: f64,
}

impl RescaleParams {
    pub fn apply(&self, e_phys: f64) -> f64 {
        self.c1 * e_phys + self.c2
    }
}

/// Maps `[e0, emax]` onto `[eta, pi - eta]`.
pub fn rescale(eta: f64, e0: f64, e1: f64, emax: f64, preset: WindowPreset) -> Result<RescaleParams> {
    if !(eta < PI / 2.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("eta = {eta} must be below pi/2")));
    }
    if !(e1 > e0) {
        return Err(Error::InvalidParameter(format!("degenerate gap: E0 = {e0}, E1 = {e1}")));
    }
    if !(emax >= e1) {
        return Err(Error::InvalidParameter(format!("E_max = {emax} below E1 = {e1}")));
    }
    let c1 = (PI - 2.0 * eta) / (emax - e0);
    let c2 = eta - c1 * e0;
    let (r0, r1) = (c1 * e0 + c2, c1 * e1 + c2);
    let gap = r1 - r0;
    let (mu, delta) = match preset {
        WindowPreset::Midpoint => ((r0 + r1) / 2.0, gap),
        WindowPreset::TwoThirdsGap => ((r0 + r1) / 2.0, gap / 1.5),
        WindowPreset::Custom { mu, delta } => (mu, delta),
    };
    if !(delta > 0.0) {
        return Err(Error::InvalidWindow(format!("delta = {delta} must be positive")));
    }
    Ok(RescaleParams { c1, c2, eta, e0: r0, e1: r1, emax: c1 * emax + c2, mu, delta, tau_max: tau_max(eta, mu, delta)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub emax_upper: f64,
    pub electric_max: f64,
    pub magnetic_max: f64,
    /// Per-term maxima: electric pairs `(i, j)` with `i <= j`, then cosines.
    pub electric_terms: Vec<(usize, usize, f64)>,
    pub magnetic_terms: Vec<f64>,
}

impl SpectralBound {
    /// `(E1 - E0)(pi - 2 eta) / (emax_upper - E0)`.
    pub fn delta_lower(&self, e0: f64, e1: f64, eta: f64) -> f64 {
        (e1 - e0) * (PI - 2.0 * eta) / (self.emax_upper - e0)
    }
}

/// Largest support (in qubits) a single term may have for enumeration.
pub const MAX_TERM_QUBITS: usize = 24;

/// Term-by-term upper bound on the largest eigenvalue.
pub fn emax_upper_bound(model: &U1Model) -> Result<SpectralBound> {
    let n = model.n();
    let g2 = model.g * model.g;
    let mut electric_terms = Vec::new();
    for i in 0..model.n_p {
        let ri = model.r_table(i);
        for j in i..model.n_p {
            let c = model.electric[(i, j)];
            if c.abs() < 1e-14 {
                continue;
            }
            let m = if i == j {
                ri.iter().map(|r| g2 / 2.0 * c * r * r).fold(f64::NEG_INFINITY, f64::max)
            } else {
                let rj = model.r_table(j);
                let mut best = f64::NEG_INFINITY;
                for a in &ri {
                    for b in &rj {
                        best = best.max(g2 * c * a * b);
                    }
                }
                best
            };
            electric_terms.push((i, j, m));
        }
    }
    let mut magnetic_terms = Vec::new();
    for v in &model.cosine_vectors {
        let support: Vec<usize> = (0..model.n_p).filter(|&p| v[p].abs() > 1e-14).collect();
        if support.len() * model.n_q > MAX_TERM_QUBITS {
            return Err(Error::DimensionOverflow(1usize << (support.len() * model.n_q).min(63)));
        }
        let grids: Vec<Vec<f64>> = support.iter().map(|&p| model.b_grid(p)).collect();
        let total = n.pow(support.len() as u32);
        let mut min_cos = f64::INFINITY;
        for idx in 0..total {
            let mut arg = 0.0;
            let mut rem = idx;
            for (k, &p) in support.iter().enumerate() {
                arg += v[p] * grids[k][rem % n];
                rem /= n;
            }
            min_cos = min_cos.min(arg.cos());
        }
        // Each cosine contributes (1 - cos) / g^2.
        magnetic_terms.push((1.0 - min_cos) / g2);
    }
    let electric_max: f64 = electric_terms.iter().map(|t| t.2).sum();
    let magnetic_max: f64 = magnetic_terms.iter().sum();
    Ok(SpectralBound { emax_upper: electric_max + magnetic_max, electric_max, magnetic_max, electric_terms, magnetic_terms })
}
