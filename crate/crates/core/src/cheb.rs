//! Definite-parity Chebyshev minimax fits for QETU filters.
//!
//! Step filters keep the image of the low-energy region under `cos(tau E / 2)`
//! and reject the rest; Gaussian filters reproduce a Gaussian profile of the
//! shifted position operator. Both are solved as discrete minimax problems on
//! the Chebyshev-extrema grid `x_j = -cos(j pi / (M - 1))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_minimax, Row};
use crate::wavepacket::WavepacketSpec;

/// Default filter height.
pub const DEFAULT_C: f64 = 0.999;
/// Minimum number of grid samples required inside each constrained region.
pub const MIN_REGION_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    fn order(self, k: usize) -> usize {
        match self {
            Parity::Even => 2 * k,
            Parity::Odd => 2 * k + 1,
            Parity::None => k,
        }
    }

    /// Number of coefficients of a degree-`d` polynomial with this parity.
    pub fn n_coeffs(self, d: usize) -> Result<usize> {
        match self {
            Parity::Even if d.is_multiple_of(2) => Ok(d / 2 + 1),
            Parity::Odd if d % 2 == 1 => Ok(d.div_ceil(2)),
            Parity::None => Ok(d + 1),
            _ => Err(Error::InvalidParameter(format!("degree {d} does not match {self:?} parity"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPoly {
    pub parity: Parity,
    pub degree: usize,
    /// Coefficients over the parity-matching orders only.
    pub coeffs: Vec<f64>,
}

impl ChebyshevPoly {
    pub fn new(parity: Parity, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let n = parity.n_coeffs(degree)?;
        if coeffs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: coeffs.len() });
        }
        Ok(ChebyshevPoly { parity, degree, coeffs })
    }

    pub fn n_ch(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients over all orders `0..=degree`.
    pub fn dense(&self) -> Vec<f64> {
        let mut full = vec![0.0; self.degree + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            full[self.parity.order(k)] = c;
        }
        full
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain(x));
        }
        Ok(clenshaw(&self.dense(), x))
    }

    /// Evaluate at many points without allocating the dense form each time.
    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let full = self.dense();
        xs.iter()
            .map(|&x| {
                if (-1.0..=1.0).contains(&x) {
                    Ok(clenshaw(&full, x))
                } else {
                    Err(Error::Domain(x))
                }
            })
            .collect()
    }

    /// Largest |F| on an `n`-point uniform grid of [-1, 1].
    pub fn max_abs_on_grid(&self, n: usize) -> f64 {
        let full = self.dense();
        (0..n)
            .map(|i| clenshaw(&full, -1.0 + 2.0 * i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Clenshaw recurrence for `sum_k c_k T_k(x)`.
pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => c0 + x * b1 - b2,
        None => 0.0,
    }
}

pub fn eval_cheb(poly: &ChebyshevPoly, x: f64) -> Result<f64> {
    poly.eval(x)
}

/// `T_0(x) .. T_kmax(x)` by the three-term recurrence.
fn chebyshev_values(x: f64, kmax: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(kmax + 1);
    t.push(1.0);
    if kmax >= 1 {
        t.push(x);
    }
    for k in 2..=kmax {
        let v = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(v);
    }
    t
}

fn basis_row(parity: Parity, degree: usize, x: f64) -> Vec<f64> {
    let t = chebyshev_values(x, degree);
    let n = parity.n_coeffs(degree).expect("degree checked by caller");
    (0..n).map(|k| t[parity.order(k)]).collect()
}

/// Chebyshev-extrema grid `x_j = -cos(j pi / (M - 1))`, ascending.
/// Chebyshev extrema on [-1, 1], ascending and exactly antisymmetric (the
/// middle point of an odd-sized grid is exactly 0).
pub fn chebyshev_grid(m: usize) -> Vec<f64> {
    let half = |j: usize| (j as f64 * PI / (m - 1) as f64).cos();
    (0..m)
        .map(|j| {
            let k = m - 1 - j;
            if 2 * j + 1 == m {
                0.0
            } else if j < k {
                -half(j)
            } else {
                half(k)
            }
        })
        .collect()
}

pub fn default_samples(d: usize) -> usize {
    2001.max(40 * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaWindow {
    pub eta: f64,
    pub eta_proj: f64,
    pub mu: f64,
    pub delta: f64,
    pub tau: f64,
    pub c: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Image of the energy windows under `cos(tau E / 2)`.
pub fn sigma_window(eta: f64, eta_proj: f64, mu: f64, delta: f64, tau: f64, c: f64) -> Result<SigmaWindow> {
    if !(delta > 0.0) {
        return Err(Error::InvalidWindow(format!("gap must be positive, got {delta}")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidWindow(format!("tau must be positive, got {tau}")));
    }
    if eta_proj > eta {
        return Err(Error::InvalidWindow(format!("eta_proj {eta_proj} exceeds eta {eta}")));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidWindow(format!("filter height {c} outside (0, 1]")));
    }
    Ok(SigmaWindow {
        eta,
        eta_proj,
        mu,
        delta,
        tau,
        c,
        sigma_plus: (tau * (mu - delta / 2.0) / 2.0).cos(),
        sigma_minus: (tau * (mu + delta / 2.0) / 2.0).cos(),
        sigma_min: (tau * (PI - eta_proj) / 2.0).cos(),
        sigma_max: (tau * eta_proj / 2.0).cos(),
    })
}

/// Largest tau for which `cos(tau E / 2)` keeps the ground state isolated.
pub fn tau_max(eta: f64, mu: f64, delta: f64) -> Result<f64> {
    let den = PI - eta + mu + delta / 2.0;
    if !(den > 0.0) {
        return Err(Error::InvalidParameter(format!("tau_max denominator {den} is not positive")));
    }
    Ok(2.0 * PI / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionResidual {
    pub region: String,
    pub samples: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub epsilon: f64,
    pub samples_used: usize,
    pub regions: Vec<RegionResidual>,
}

fn in_interval(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

/// Grid points representing `[lo, hi]` for a fit of the given parity; for
/// definite parity each point stands for itself and its mirror image.
fn region_points(grid: &[f64], parity: Parity, lo: f64, hi: f64) -> Vec<f64> {
    grid.iter()
        .copied()
        .filter(|&x| match parity {
            Parity::None => in_interval(x, lo, hi),
            _ => x >= 0.0 && (in_interval(x, lo, hi) || in_interval(-x, lo, hi)),
        })
        .collect()
}

fn cap_points(grid: &[f64], parity: Parity) -> Vec<f64> {
    match parity {
        Parity::None => grid.to_vec(),
        _ => grid.iter().copied().filter(|&x| x >= 0.0).collect(),
    }
}

/// Even minimax approximation to `c` on the keep region and `0` on the reject
/// region, capped by `|F| <= c` on the whole grid.
pub fn solve_step_poly(window: &SigmaWindow, d: usize, m: Option<usize>) -> Result<(ChebyshevPoly, ApproxReport)> {
    let parity = Parity::Even;
    let n = parity.n_coeffs(d)?;
    if window.sigma_plus > window.sigma_max {
        return Err(Error::InvalidWindow(format!(
            "keep region [{}, {}] is empty",
            window.sigma_plus, window.sigma_max
        )));
    }
    let m = m.unwrap_or_else(|| default_samples(d));
    if m < 3 {
        return Err(Error::Sampling(format!("{m} samples is too few")));
    }
    let grid = chebyshev_grid(m);
    let keep = region_points(&grid, parity, window.sigma_plus, window.sigma_max);
    // For tau > 1 sigma_min can drop below zero; the even extension of
    // [sigma_min, sigma_minus] would then reach past sigma_minus into the
    // transition band, so the reject region starts at zero instead.
    let reject = region_points(&grid, parity, window.sigma_min.max(0.0), window.sigma_minus);
    for (name, pts) in [("keep", &keep), ("reject", &reject)] {
        if pts.len() < MIN_REGION_SAMPLES {
            return Err(Error::Sampling(format!(
                "only {} samples in the {name} region; increase M",
                pts.len()
            )));
        }
    }
    let mut rows = Vec::with_capacity(keep.len() + reject.len() + m);
    rows.extend(keep.iter().map(|&x| Row::fit(basis_row(parity, d, x), window.c)));
    rows.extend(reject.iter().map(|&x| Row::fit(basis_row(parity, d, x), 0.0)));
    rows.extend(cap_points(&grid, parity).iter().map(|&x| Row::cap(basis_row(parity, d, x), window.c)));
    let sol = solve_minimax(n, &rows)?;
    let poly = ChebyshevPoly::new(parity, d, sol.coeffs)?;
    let residual = |pts: &[f64], target: f64| -> Result<f64> {
        Ok(poly.eval_many(pts)?.iter().map(|v| (v - target).abs()).fold(0.0, f64::max))
    };
    let keep_res = residual(&keep, window.c)?;
    let reject_res = residual(&reject, 0.0)?;
    let report = ApproxReport {
        epsilon: keep_res.max(reject_res),
        samples_used: m,
        regions: vec![
            RegionResidual { region: "keep".into(), samples: keep.len(), max_residual: keep_res },
            RegionResidual { region: "reject".into(), samples: reject.len(), max_residual: reject_res },
        ],
    };
    Ok((poly, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// The whole image interval of the shifted spectrum range.
    AllX,
    /// Only the images of the grid eigenvalues.
    EigenvaluesOnly,
}

/// Parameters of the cosine-transformed Gaussian target at a given (eta, tau).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTarget {
    pub c: f64,
    pub eta: f64,
    pub tau: f64,
    pub c1: f64,
    pub c2: f64,
    pub x0_qetu: f64,
    pub sigma_qetu: f64,
}

impl GaussianTarget {
    pub fn new(spec: &WavepacketSpec, eta: f64, tau: f64, c: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        let (c1, c2) = spec.rescale(eta)?;
        Ok(GaussianTarget {
            c,
            eta,
            tau,
            c1,
            c2,
            x0_qetu: c1 * spec.x0 + c2,
            sigma_qetu: c1 * spec.sigma_x,
        })
    }

    /// The target as a function of the circuit variable `x = cos(tau x_sh / 2)`.
    pub fn eval(&self, x: f64) -> f64 {
        let z = (2.0 / self.tau) * x.clamp(-1.0, 1.0).acos() - self.x0_qetu;
        self.c * (-z * z / (2.0 * self.sigma_qetu * self.sigma_qetu)).exp()
    }

    /// The desired filter value at a shifted eigenvalue.
    pub fn at_shifted(&self, x_sh: f64) -> f64 {
        let z = x_sh - self.x0_qetu;
        self.c * (-z * z / (2.0 * self.sigma_qetu * self.sigma_qetu)).exp()
    }

    pub fn even_part(&self, x: f64) -> f64 {
        0.5 * (self.eval(x) + self.eval(-x))
    }

    pub fn odd_part(&self, x: f64) -> f64 {
        0.5 * (self.eval(x) - self.eval(-x))
    }

    /// Circuit variables of the shifted grid eigenvalues.
    pub fn circuit_points(&self, spec: &WavepacketSpec) -> Vec<f64> {
        spec.shifted_grid(self.c1, self.c2).iter().map(|&s| (self.tau * s / 2.0).cos()).collect()
    }

    /// Range of `cos(tau s / 2)` over `s` in `[eta, pi - eta]`.
    pub fn image_interval(&self) -> (f64, f64) {
        cos_image(self.tau * self.eta / 2.0, self.tau * (PI - self.eta) / 2.0)
    }
}

/// Range of `cos` over the closed interval between `a` and `b`.
pub fn cos_image(a: f64, b: f64) -> (f64, f64) {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (ca, cb) = (lo.cos(), hi.cos());
    let mut min = ca.min(cb);
    let mut max = ca.max(cb);
    // Any multiple of pi inside (lo, hi) is an extremum.
    let k0 = (lo / PI).floor() as i64 + 1;
    let mut k = k0;
    while (k as f64) * PI < hi {
        if k.rem_euclid(2) == 0 {
            max = 1.0;
        } else {
            min = -1.0;
        }
        k += 1;
    }
    (min, max)
}

/// Minimax fit of the Gaussian filter (or one of its parity parts).
///
/// `Even`/`Odd` in all-x mode fit the corresponding parity part of the target;
/// `None` fits the full target with every Chebyshev order up to `d`. In
/// eigenvalue mode the desired values at the grid eigenvalues are fitted
/// directly with the requested polynomial family, and `|F| <= 1` is enforced on
/// the dense grid.
pub fn solve_gaussian_poly(
    spec: &WavepacketSpec,
    parity: Parity,
    d: usize,
    eta: f64,
    tau: f64,
    mode: SampleMode,
) -> Result<(ChebyshevPoly, ApproxReport)> {
    solve_gaussian_poly_with(spec, parity, d, eta, tau, mode, DEFAULT_C, None)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_gaussian_poly_with(
    spec: &WavepacketSpec,
    parity: Parity,
    d: usize,
    eta: f64,
    tau: f64,
    mode: SampleMode,
    c: f64,
    m: Option<usize>,
) -> Result<(ChebyshevPoly, ApproxReport)> {
    if parity == Parity::None && (tau - 2.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter("tau = 2 requires an even fit".into()));
    }
    let n = parity.n_coeffs(d)?;
    let target = GaussianTarget::new(spec, eta, tau, c)?;
    let m = m.unwrap_or_else(|| default_samples(d));
    let grid = chebyshev_grid(m);
    let (points, values): (Vec<f64>, Vec<f64>) = match mode {
        SampleMode::AllX => {
            let (lo, hi) = target.image_interval();
            let pts = region_points(&grid, parity, lo, hi);
            if pts.len() < MIN_REGION_SAMPLES {
                return Err(Error::Sampling(format!("only {} samples in [{lo}, {hi}]", pts.len())));
            }
            let vals = pts
                .iter()
                .map(|&x| match parity {
                    Parity::Even => target.even_part(x),
                    Parity::Odd => target.odd_part(x),
                    Parity::None => target.eval(x),
                })
                .collect();
            (pts, vals)
        }
        SampleMode::EigenvaluesOnly => {
            let shifted = spec.shifted_grid(target.c1, target.c2);
            shifted
                .iter()
                .map(|&s| ((tau * s / 2.0).cos(), target.at_shifted(s)))
                .unzip()
        }
    };
    let mut rows: Vec<Row> = points
        .iter()
        .zip(&values)
        .map(|(&x, &v)| Row::fit(basis_row(parity, d, x), v))
        .collect();
    rows.extend(cap_points(&grid, parity).iter().map(|&x| Row::cap(basis_row(parity, d, x), 1.0)));
    let sol = solve_minimax(n, &rows)?;
    if sol.max_cap_excess > 1e-9 {
        return Err(Error::Infeasible("no coefficients keep |F| <= 1".into()));
    }
    let poly = ChebyshevPoly::new(parity, d, sol.coeffs)?;
    let fitted = poly.eval_many(&points)?;
    let eps = fitted.iter().zip(&values).map(|(f, v)| (f - v).abs()).fold(0.0, f64::max);
    let region = match mode {
        SampleMode::AllX => "interval",
        SampleMode::EigenvaluesOnly => "eigenvalues",
    };
    let report = ApproxReport {
        epsilon: eps,
        samples_used: m,
        regions: vec![RegionResidual { region: region.into(), samples: points.len(), max_residual: eps }],
    };
    Ok((poly, report))
}

/// Which polynomial family a Gaussian fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaussianParts {
    /// A single even polynomial (circuit-realizable).
    Even,
    /// Even and odd parity parts with `n_ch` coefficients each.
    Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub eta: f64,
    pub tau: f64,
    pub parts: Vec<ChebyshevPoly>,
    pub reports: Vec<ApproxReport>,
    /// Largest of the per-part residuals and `grid_residual`.
    pub epsilon: f64,
    /// Largest deviation of the summed parts from the desired filter values
    /// at the shifted grid eigenvalues.
    pub grid_residual: f64,
    /// True when the best coarse-grid point sits on the grid edge.
    pub on_grid_boundary: bool,
}

/// Fit with `n_ch` coefficients per part at fixed (eta, tau).
pub fn fit_gaussian(
    spec: &WavepacketSpec,
    parts: GaussianParts,
    n_ch: usize,
    eta: f64,
    tau: f64,
    mode: SampleMode,
) -> Result<GaussianFit> {
    if n_ch == 0 {
        return Err(Error::InvalidParameter("n_ch must be at least 1".into()));
    }
    let mut polys = Vec::new();
    let mut reports = Vec::new();
    match parts {
        GaussianParts::Even => {
            let (p, r) = solve_gaussian_poly(spec, Parity::Even, 2 * (n_ch - 1), eta, tau, mode)?;
            polys.push(p);
            reports.push(r);
        }
        GaussianParts::Split => {
            if mode == SampleMode::EigenvaluesOnly {
                let (p, r) = solve_gaussian_poly(spec, Parity::None, 2 * n_ch - 1, eta, tau, mode)?;
                polys.push(p);
                reports.push(r);
            } else {
                for (parity, d) in [(Parity::Even, 2 * (n_ch - 1)), (Parity::Odd, 2 * n_ch - 1)] {
                    let (p, r) = solve_gaussian_poly(spec, parity, d, eta, tau, mode)?;
                    polys.push(p);
                    reports.push(r);
                }
            }
        }
    }
    // The arccos form of the target only matches the filter at the grid when
    // tau s / 2 stays inside [0, pi]; checking the grid catches the rest.
    let target = GaussianTarget::new(spec, eta, tau, DEFAULT_C)?;
    let mut grid_residual: f64 = 0.0;
    for s in spec.shifted_grid(target.c1, target.c2) {
        let x = (tau * s / 2.0).cos().clamp(-1.0, 1.0);
        let mut f = 0.0;
        for p in &polys {
            f += p.eval(x)?;
        }
        grid_residual = grid_residual.max((f - target.at_shifted(s)).abs());
    }
    let epsilon = reports.iter().map(|r| r.epsilon).fold(grid_residual, f64::max);
    Ok(GaussianFit { eta, tau, parts: polys, reports, epsilon, grid_residual, on_grid_boundary: false })
}

/// Search grid and refinement settings for [`optimize_eta_tau`].
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTauGrid {
    pub eta: (f64, f64, f64),
    pub tau: (f64, f64, f64),
    pub min_step: f64,
}

impl Default for EtaTauGrid {
    fn default() -> Self {
        EtaTauGrid { eta: (-1.0, 1.5, 0.05), tau: (0.5, 6.0, 0.1), min_step: 1e-4 }
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// Brute-force (eta, tau) grid followed by coordinate descent on the best
/// grid point; `tau_fixed` restricts the search to eta.
pub fn optimize_eta_tau(
    spec: &WavepacketSpec,
    parts: GaussianParts,
    n_ch: usize,
    tau_fixed: Option<f64>,
    mode: SampleMode,
    grid: &EtaTauGrid,
) -> Result<GaussianFit> {
    use rayon::prelude::*;
    let etas = axis(grid.eta.0, grid.eta.1, grid.eta.2);
    let taus = match tau_fixed {
        Some(t) => vec![t],
        None => axis(grid.tau.0, grid.tau.1, grid.tau.2),
    };
    let objective = |eta: f64, tau: f64| -> f64 {
        if eta >= PI / 2.0 || tau <= 0.0 {
            return f64::INFINITY;
        }
        fit_gaussian(spec, parts, n_ch, eta, tau, mode).map_or(f64::INFINITY, |f| f.epsilon)
    };
    let points: Vec<(usize, usize)> = (0..etas.len()).flat_map(|i| (0..taus.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = points.par_iter().map(|&(i, j)| objective(etas[i], taus[j])).collect();
    let (best_k, best_v) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
    if !best_v.is_finite() {
        return Err(Error::Infeasible("no (eta, tau) grid point admits a fit".into()));
    }
    let (bi, bj) = points[best_k];
    let on_boundary = bi == 0 || bi + 1 == etas.len() || (tau_fixed.is_none() && (bj == 0 || bj + 1 == taus.len()));
    let (mut eta, mut tau, mut val) = (etas[bi], taus[bj], best_v);
    let mut step_eta = grid.eta.2;
    let mut step_tau = if tau_fixed.is_some() { 0.0 } else { grid.tau.2 };
    while step_eta.max(step_tau) >= grid.min_step {
        let mut improved = false;
        for (de, dt) in [(step_eta, 0.0), (-step_eta, 0.0), (0.0, step_tau), (0.0, -step_tau)] {
            if de == 0.0 && dt == 0.0 {
                continue;
            }
            let v = objective(eta + de, tau + dt);
            if v < val {
                eta += de;
                tau += dt;
                val = v;
                improved = true;
                break;
            }
        }
        if !improved {
            step_eta /= 2.0;
            step_tau /= 2.0;
        }
    }
    let mut fit = fit_gaussian(spec, parts, n_ch, eta, tau, mode)?;
    fit.on_grid_boundary = on_boundary;
    Ok(fit)
}

/// JSON document for a solved polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDocument {
    pub parity: Parity,
    pub degree: usize,
    pub coeffs: Vec<f64>,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<SigmaWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl PolyDocument {
    pub fn poly(&self) -> Result<ChebyshevPoly> {
        ChebyshevPoly::new(self.parity, self.degree, self.coeffs.clone())
    }
}
