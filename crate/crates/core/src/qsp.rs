//! Symmetric QSP phase factors.
//!
//! `g(x, phi) = Re <0| e^{i phi_0 Z} prod_j [ e^{i arccos(x) X} e^{i phi_j Z} ] |0>`
//! is matched to a definite-parity Chebyshev polynomial at the positive roots
//! of `T_{2 n_ch}` by L-BFGS over the independent half of a symmetric phase
//! list.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::cheb::{ChebyshevPoly, Parity};
use crate::error::{Error, Result};

/// Stop once the functional drops below this value.
pub const FUNCTIONAL_TOL: f64 = 1e-24;
/// Stop once the gradient norm drops below this value.
pub const GRADIENT_TOL: f64 = 1e-14;
const LBFGS_MEMORY: usize = 10;
const STALL_FUNCTIONAL: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq)]
struct M2([C; 4]);

impl M2 {
    const ID: M2 = M2([C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)]);

    fn mul(&self, o: &M2) -> M2 {
        let a = &self.0;
        let b = &o.0;
        M2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    /// `e^{i theta X}`.
    fn rx(theta: f64) -> M2 {
        let (s, c) = theta.sin_cos();
        M2([C::new(c, 0.0), C::new(0.0, s), C::new(0.0, s), C::new(c, 0.0)])
    }

    /// `e^{i phi Z}`.
    fn rz(phi: f64) -> M2 {
        let (s, c) = phi.sin_cos();
        M2([C::new(c, s), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(c, -s)])
    }
}

fn check_x(x: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

/// The QSP response for a full phase list `(phi_0, ..., phi_d)`.
pub fn eval_g(x: f64, phases: &[f64]) -> Result<f64> {
    check_x(x)?;
    let Some((&first, rest)) = phases.split_first() else {
        return Err(Error::InvalidParameter("empty phase list".into()));
    };
    let w = M2::rx(x.acos());
    let mut m = M2::rz(first);
    for &p in rest {
        m = m.mul(&w).mul(&M2::rz(p));
    }
    Ok(m.0[0].re)
}

/// `g` and its gradient with respect to every entry of the full phase list.
fn g_and_grad(theta: f64, phases: &[f64], grad: &mut [f64]) -> f64 {
    let d = phases.len() - 1;
    let w = M2::rx(theta);
    let z: Vec<M2> = phases.iter().map(|&p| M2::rz(p)).collect();
    // prefix[j] = z_0 W z_1 ... W (everything left of z_j)
    let mut prefix = Vec::with_capacity(d + 1);
    let mut acc = M2::ID;
    for j in 0..=d {
        prefix.push(acc);
        acc = acc.mul(&z[j]);
        if j < d {
            acc = acc.mul(&w);
        }
    }
    let g = acc.0[0].re;
    // suffix after z_j, accumulated right to left
    let mut suffix = M2::ID;
    for j in (0..=d).rev() {
        // d/dphi e^{i phi Z} = i Z e^{i phi Z}; only the (0,0) entry matters.
        let left = &prefix[j].0;
        let zj = &z[j].0;
        let s = &suffix.0;
        // (L * iZ z_j * R)[0][0] with iZ z_j = diag(i z00, -i z11)
        let a = C::new(0.0, 1.0) * zj[0];
        let b = C::new(0.0, -1.0) * zj[3];
        let v = left[0] * a * s[0] + left[1] * b * s[2];
        grad[j] = v.re;
        suffix = if j > 0 { w.mul(&z[j]).mul(&suffix) } else { suffix };
    }
    g
}

/// Expand the independent half into the full symmetric list of length `d + 1`.
pub fn expand_symmetric(half: &[f64], d: usize) -> Vec<f64> {
    (0..=d).map(|j| half[j.min(d - j)]).collect()
}

fn n_independent(d: usize) -> usize {
    d / 2 + 1
}

/// Positive roots `cos(pi (2k - 1) / (4 n))`, k = 1..n.
pub fn sample_points(n: usize) -> Vec<f64> {
    (1..=n).map(|k| (PI * (2 * k - 1) as f64 / (4 * n) as f64).cos()).collect()
}

struct Objective<'a> {
    d: usize,
    thetas: Vec<f64>,
    targets: &'a [f64],
    evals: usize,
}

impl Objective<'_> {
    fn value_grad(&mut self, half: &[f64], grad_half: &mut [f64]) -> f64 {
        self.evals += 1;
        let full = expand_symmetric(half, self.d);
        let n = self.thetas.len() as f64;
        let mut gfull = vec![0.0; self.d + 1];
        let mut acc = vec![0.0; self.d + 1];
        let mut f = 0.0;
        grad_half.iter_mut().for_each(|v| *v = 0.0);
        for (k, &th) in self.thetas.iter().enumerate() {
            let g = g_and_grad(th, &full, &mut gfull);
            let r = g - self.targets[k];
            f += r * r;
            for j in 0..=self.d {
                acc[j] += 2.0 * r * gfull[j];
            }
        }
        for j in 0..=self.d {
            grad_half[j.min(self.d - j)] += acc[j] / n;
        }
        f / n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    pub degree: usize,
    pub reduced: Vec<f64>,
    pub w_convention: Vec<f64>,
}

impl PhaseSequence {
    pub fn from_reduced(reduced: Vec<f64>) -> Result<Self> {
        if reduced.is_empty() {
            return Err(Error::InvalidParameter("empty phase list".into()));
        }
        let d = reduced.len() - 1;
        let w_convention = reduced
            .iter()
            .enumerate()
            .map(|(j, &p)| if j == 0 || j == d { p + FRAC_PI_4 } else { p + FRAC_PI_2 })
            .collect();
        Ok(PhaseSequence { degree: d, reduced, w_convention })
    }

    pub fn from_w_convention(w_convention: Vec<f64>) -> Result<Self> {
        if w_convention.is_empty() {
            return Err(Error::InvalidParameter("empty phase list".into()));
        }
        let d = w_convention.len() - 1;
        let reduced = w_convention
            .iter()
            .enumerate()
            .map(|(j, &p)| if j == 0 || j == d { p - FRAC_PI_4 } else { p - FRAC_PI_2 })
            .collect();
        Ok(PhaseSequence { degree: d, reduced, w_convention })
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.degree;
        (0..=d).all(|j| self.reduced[j] == self.reduced[d - j])
    }
}

pub fn to_w_convention(reduced: &[f64]) -> Result<PhaseSequence> {
    PhaseSequence::from_reduced(reduced.to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSolution {
    pub phases: PhaseSequence,
    pub functional: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Objective evaluations, each costing `n_ch` products of length `d`.
    pub evaluations: usize,
    /// Largest |g - F| at the sample points.
    pub max_sample_error: f64,
}

/// JSON document for solved phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDocument {
    pub degree: usize,
    pub reduced: Vec<f64>,
    pub w_convention: Vec<f64>,
    pub functional_residual: f64,
}

impl From<&PhaseSolution> for PhaseDocument {
    fn from(s: &PhaseSolution) -> Self {
        PhaseDocument {
            degree: s.phases.degree,
            reduced: s.phases.reduced.clone(),
            w_convention: s.phases.w_convention.clone(),
            functional_residual: s.functional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: Option<usize>,
    /// Added to the independent phases of the standard initial guess.
    pub perturbation: Option<(u64, f64)>,
    /// Seeded restarts from perturbed guesses after a failed first attempt.
    pub restarts: usize,
}

/// Scale of the uniform perturbation used by restarts.
pub const RESTART_SCALE: f64 = 0.5;

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iterations: None, perturbation: None, restarts: 8 }
    }
}

pub fn solve_phases(poly: &ChebyshevPoly) -> Result<PhaseSolution> {
    solve_phases_with(poly, &SolveOptions::default())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs from the configured guess; on non-convergence retries from guesses
/// perturbed with seeds `1..=restarts` and returns the first success.
pub fn solve_phases_with(poly: &ChebyshevPoly, opts: &SolveOptions) -> Result<PhaseSolution> {
    let first = solve_from(poly, opts);
    let Err(Error::NoConvergence(msg)) = first else {
        return first;
    };
    for seed in 1..=opts.restarts as u64 {
        let retry = SolveOptions { perturbation: Some((seed, RESTART_SCALE)), restarts: 0, ..*opts };
        if let Ok(sol) = solve_from(poly, &retry) {
            return Ok(sol);
        }
    }
    Err(Error::NoConvergence(format!("{msg} (also after {} restarts)", opts.restarts)))
}

fn solve_from(poly: &ChebyshevPoly, opts: &SolveOptions) -> Result<PhaseSolution> {
    if poly.parity == Parity::None {
        return Err(Error::InvalidParameter("phase solving needs a definite-parity polynomial".into()));
    }
    let d = poly.degree;
    let n_ch = poly.n_ch();
    let xs = sample_points(n_ch);
    let targets = poly.eval_many(&xs)?;
    let mut obj = Objective { d, thetas: xs.iter().map(|x| x.acos()).collect(), targets: &targets, evals: 0 };

    let nh = n_independent(d);
    let mut x = vec![0.0; nh];
    x[0] = FRAC_PI_4;
    if let Some((seed, scale)) = opts.perturbation {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for v in x.iter_mut() {
            *v += scale * rng.gen_range(-1.0..1.0);
        }
    }
    let max_iter = opts.max_iterations.unwrap_or((10 * d * d).max(100));

    let mut g = vec![0.0; nh];
    let mut f = obj.value_grad(&x, &mut g);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;
    let mut xn = vec![0.0; nh];
    let mut gn = vec![0.0; nh];
    while f >= FUNCTIONAL_TOL && norm(&g) >= GRADIENT_TOL {
        if iterations >= max_iter {
            return Err(Error::NoConvergence(format!(
                "phase solver stopped after {iterations} iterations with functional {f:e}"
            )));
        }
        iterations += 1;
        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let k = s_hist.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dotp(&y_hist[i], &s_hist[i]);
            alpha[i] = rho * dotp(&s_hist[i], &q);
            for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
                *qj -= alpha[i] * yj;
            }
        }
        let gamma = if k > 0 { dotp(&s_hist[k - 1], &y_hist[k - 1]) / dotp(&y_hist[k - 1], &y_hist[k - 1]) } else { 1.0 };
        q.iter_mut().for_each(|v| *v *= gamma);
        for i in 0..k {
            let rho = 1.0 / dotp(&y_hist[i], &s_hist[i]);
            let beta = rho * dotp(&y_hist[i], &q);
            for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
                *qj += (alpha[i] - beta) * sj;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dotp(&dir, &g);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dotp(&dir, &g);
        }
        // Backtracking line search with the Armijo condition.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for j in 0..nh {
                xn[j] = x[j] + step * dir[j];
            }
            let fnew = obj.value_grad(&xn, &mut gn);
            if fnew <= f + 1e-4 * step * slope {
                let s: Vec<f64> = (0..nh).map(|j| xn[j] - x[j]).collect();
                let y: Vec<f64> = (0..nh).map(|j| gn[j] - g[j]).collect();
                if dotp(&s, &y) > 1e-300 {
                    if s_hist.len() == LBFGS_MEMORY {
                        s_hist.remove(0);
                        y_hist.remove(0);
                    }
                    s_hist.push(s);
                    y_hist.push(y);
                }
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                f = fnew;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if s_hist.is_empty() {
                // Steepest descent made no progress: at the precision floor.
                break;
            }
            s_hist.clear();
            y_hist.clear();
        }
    }

    // Gauge: phi_0 and phi_d both shift by pi without changing g.
    if d > 0 {
        let mut p0 = x[0].rem_euclid(PI);
        if p0 > FRAC_PI_2 {
            p0 -= PI;
        }
        x[0] = p0;
    }
    let full = expand_symmetric(&x, d);
    let max_sample_error = xs
        .iter()
        .zip(&targets)
        .map(|(&xx, &t)| (eval_g(xx, &full).expect("sample in domain") - t).abs())
        .fold(0.0, f64::max);
    // A vanishing gradient away from a zero functional means the target is
    // not realizable (for instance |F| > 1 somewhere).
    if f > STALL_FUNCTIONAL {
        return Err(Error::NoConvergence(format!(
            "phase solver stalled with sample error {max_sample_error:e} (functional {f:e})"
        )));
    }
    Ok(PhaseSolution {
        phases: PhaseSequence::from_reduced(full)?,
        functional: f,
        gradient_norm: norm(&g),
        iterations,
        evaluations: obj.evals,
        max_sample_error,
    })
}
