//! Discrete minimax fitting as a linear program.
//!
//! Given rows `a_i` with either a fit target `f_i` or a magnitude cap `C_i`,
//! find `c` minimizing `t` subject to `|a_i . c - f_i| <= t` on fit rows and
//! `|a_i . c| <= C_i` on capped rows. The epigraph LP is solved through its
//! dual with a dense revised simplex; an outer exchange loop keeps the working
//! row set small and adds the most violated rows until none remain.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Optimality tolerance on reduced costs and on the final violation check.
pub const OPT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowKind {
    Fit(f64),
    Cap(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub a: Vec<f64>,
    pub kind: RowKind,
}

impl Row {
    pub fn fit(a: Vec<f64>, target: f64) -> Self {
        Row { a, kind: RowKind::Fit(target) }
    }

    pub fn cap(a: Vec<f64>, bound: f64) -> Self {
        Row { a, kind: RowKind::Cap(bound) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution {
    pub coeffs: Vec<f64>,
    /// Epigraph value returned by the LP.
    pub t: f64,
    /// Maximum fit residual recomputed over all fit rows.
    pub max_residual: f64,
    /// Largest excess `|a.c| - C` over capped rows (<= 0 when satisfied).
    pub max_cap_excess: f64,
    pub pivots: usize,
    pub rounds: usize,
}

fn dot(a: &[f64], c: &[f64]) -> f64 {
    a.iter().zip(c).map(|(x, y)| x * y).sum()
}

/// Solve the discrete minimax problem over `rows` with `n` unknowns.
pub fn solve_minimax(n: usize, rows: &[Row]) -> Result<MinimaxSolution> {
    if n == 0 {
        return Err(Error::InvalidParameter("minimax needs at least one unknown".into()));
    }
    for r in rows {
        if r.a.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: r.a.len() });
        }
        if let RowKind::Cap(c) = r.kind {
            if !(c >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative cap {c}")));
            }
        }
    }
    let fit_idx: Vec<usize> = (0..rows.len()).filter(|&i| matches!(rows[i].kind, RowKind::Fit(_))).collect();
    let cap_idx: Vec<usize> = (0..rows.len()).filter(|&i| matches!(rows[i].kind, RowKind::Cap(_))).collect();
    if fit_idx.is_empty() {
        return Err(Error::InvalidParameter("minimax needs at least one fit row".into()));
    }

    let mut active = vec![false; rows.len()];
    let mut working: Vec<usize> = Vec::new();
    let push = |i: usize, active: &mut Vec<bool>, working: &mut Vec<usize>| {
        if !active[i] {
            active[i] = true;
            working.push(i);
        }
    };
    for &i in &stride_pick(&fit_idx, 8 * (n + 1)) {
        push(i, &mut active, &mut working);
    }
    for &i in &stride_pick(&cap_idx, 4 * (n + 1)) {
        push(i, &mut active, &mut working);
    }

    let scale = rows
        .iter()
        .map(|r| match r.kind {
            RowKind::Fit(f) => f.abs(),
            RowKind::Cap(c) => c.abs(),
        })
        .fold(1.0_f64, f64::max);
    let add_tol = OPT_TOL * scale;
    let batch = 2 * (n + 1);

    let mut pivots = 0;
    for round in 1..=500 {
        let (coeffs, t, p) = dual_simplex(n, rows, &working)?;
        pivots += p;
        let mut viol: Vec<(f64, usize)> = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if active[i] {
                continue;
            }
            let v = match r.kind {
                RowKind::Fit(f) => (dot(&r.a, &coeffs) - f).abs() - t,
                RowKind::Cap(c) => dot(&r.a, &coeffs).abs() - c,
            };
            if v > add_tol {
                viol.push((v, i));
            }
        }
        if viol.is_empty() {
            let mut max_residual = 0.0_f64;
            let mut max_cap_excess = f64::NEG_INFINITY;
            for r in rows {
                match r.kind {
                    RowKind::Fit(f) => max_residual = max_residual.max((dot(&r.a, &coeffs) - f).abs()),
                    RowKind::Cap(c) => max_cap_excess = max_cap_excess.max(dot(&r.a, &coeffs).abs() - c),
                }
            }
            return Ok(MinimaxSolution { coeffs, t, max_residual, max_cap_excess, pivots, rounds: round });
        }
        viol.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for &(_, i) in viol.iter().take(batch) {
            push(i, &mut active, &mut working);
        }
    }
    Err(Error::NoConvergence("minimax exchange loop did not settle".into()))
}

fn stride_pick(idx: &[usize], k: usize) -> Vec<usize> {
    if idx.len() <= k {
        return idx.to_vec();
    }
    (0..k).map(|j| idx[j * (idx.len() - 1) / (k - 1)]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Col {
    /// Working-row position and sign.
    Real(usize, bool),
    Art(usize),
}

/// Revised simplex on the dual of the epigraph LP restricted to `working`.
///
/// Dual: min h.l  s.t.  sum_i l_i (g_i, s_i) = (0, 1), l >= 0, where each row
/// contributes two columns (+a, s, h) and (-a, s, h'). Returns (c, t, pivots)
/// with `c` and `-t` read off the simplex multipliers.
fn dual_simplex(n: usize, rows: &[Row], working: &[usize]) -> Result<(Vec<f64>, f64, usize)> {
    let m = n + 1;
    let col_vec = |col: Col| -> (DVector<f64>, f64) {
        match col {
            Col::Art(k) => {
                let mut v = DVector::zeros(m);
                v[k] = 1.0;
                (v, 0.0)
            }
            Col::Real(w, plus) => {
                let r = &rows[working[w]];
                let sg = if plus { 1.0 } else { -1.0 };
                let mut v = DVector::zeros(m);
                for k in 0..n {
                    v[k] = sg * r.a[k];
                }
                let h = match r.kind {
                    RowKind::Fit(f) => {
                        v[n] = 1.0;
                        sg * f
                    }
                    RowKind::Cap(c) => c,
                };
                (v, h)
            }
        }
    };

    // Starting basis: both signed columns of one fit row at 1/2 plus unit
    // artificials on every coefficient row except a pivot row where a != 0.
    let start = working
        .iter()
        .enumerate()
        .filter(|(_, &i)| matches!(rows[i].kind, RowKind::Fit(_)))
        .filter_map(|(w, &i)| {
            let (k, v) = rows[i]
                .a
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))?;
            (v.abs() > 1e-8).then_some((w, k, v.abs()))
        })
        .max_by(|x, y| x.2.total_cmp(&y.2))
        .ok_or_else(|| Error::Infeasible("no usable fit row to start the simplex".into()))?;
    let (w0, k0, _) = start;
    let mut basis: Vec<Col> = vec![Col::Real(w0, true), Col::Real(w0, false)];
    for k in 0..n {
        if k != k0 {
            basis.push(Col::Art(k));
        }
    }

    let mut b = DVector::zeros(m);
    b[n] = 1.0;
    let ncols = 2 * working.len();
    let mut in_basis = vec![false; ncols];
    let col_id = |c: Col| match c {
        Col::Real(w, plus) => Some(2 * w + usize::from(!plus)),
        Col::Art(_) => None,
    };
    for &c in &basis {
        if let Some(id) = col_id(c) {
            in_basis[id] = true;
        }
    }

    let max_pivots = 50 * (ncols + m) + 1000;
    let mut degenerate_run = 0usize;
    let mut pivots = 0usize;
    loop {
        let mut bm = DMatrix::zeros(m, m);
        let mut hb = DVector::zeros(m);
        for (j, &c) in basis.iter().enumerate() {
            let (v, h) = col_vec(c);
            bm.set_column(j, &v);
            hb[j] = h;
        }
        let lu = bm.clone().full_piv_lu();
        let singular = || Error::NoConvergence("singular simplex basis".into());
        let xb = lu.solve(&b).ok_or_else(singular)?;
        let y = bm.transpose().full_piv_lu().solve(&hb).ok_or_else(singular)?;
        let coeffs: Vec<f64> = (0..n).map(|k| y[k]).collect();
        let t = -y[n];

        let hscale = 1.0 + hb.amax();
        let bland = degenerate_run > 30;
        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for id in 0..ncols {
            if in_basis[id] {
                continue;
            }
            let w = id / 2;
            let plus = id % 2 == 0;
            let r = &rows[working[w]];
            let sg = if plus { 1.0 } else { -1.0 };
            let ay = sg * dot(&r.a, &coeffs);
            let rc = match r.kind {
                RowKind::Fit(f) => sg * f - ay + t,
                RowKind::Cap(c) => c - ay,
            };
            if rc < -OPT_TOL * hscale {
                candidates.push((id, rc));
            }
        }
        if candidates.is_empty() {
            return Ok((coeffs, t, pivots));
        }
        if !bland {
            candidates.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::NoConvergence(format!(
                "simplex pivot limit reached at t = {t:e}; targets this close to zero hit the conditioning floor"
            )));
        }

        // Try entering columns in pricing order and skip those whose ratio
        // test only offers a tiny pivot; fall back to the best one seen.
        // Degenerate vertices of these fits are common and poorly conditioned.
        let mut chosen: Option<(usize, usize, f64, f64)> = None;
        for &(q, _) in candidates.iter() {
            let (aq, _) = col_vec(Col::Real(q / 2, q % 2 == 0));
            let u = lu.solve(&aq).ok_or_else(singular)?;
            let Some((lj, step)) = ratio_test(&u, &xb, &basis, bland, &col_id) else {
                return Err(Error::Infeasible("fit problem is unbounded below".into()));
            };
            let quality = u[lj].abs() / (1.0 + u.amax());
            if chosen.is_none_or(|c| quality > c.3) {
                chosen = Some((q, lj, step, quality));
            }
            if quality > 1e-6 {
                break;
            }
        }
        let (q, lj, step, _) = chosen.expect("at least one candidate");
        let qcol = Col::Real(q / 2, q % 2 == 0);
        if step <= 1e-14 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        if let Some(id) = col_id(basis[lj]) {
            in_basis[id] = false;
        }
        in_basis[q] = true;
        basis[lj] = qcol;
    }
}

/// Leaving position for direction `u`: artificial rows leave first (largest
/// pivot), otherwise a Harris two-pass test preferring large pivots.
fn ratio_test(
    u: &DVector<f64>,
    xb: &DVector<f64>,
    basis: &[Col],
    bland: bool,
    col_id: &dyn Fn(Col) -> Option<usize>,
) -> Option<(usize, f64)> {
    let m = u.len();
    let piv_tol = 1e-9 * (1.0 + u.amax());
    let mut leave: Option<(usize, f64)> = None;
    let mut best_art = piv_tol;
    for (j, &c) in basis.iter().enumerate() {
        if matches!(c, Col::Art(_)) && u[j].abs() > best_art {
            best_art = u[j].abs();
            leave = Some((j, 0.0));
        }
    }
    if leave.is_some() {
        return leave;
    }
    let delta = 1e-10;
    let theta = (0..m)
        .filter(|&j| u[j] > piv_tol)
        .map(|j| (xb[j].max(0.0) + delta) / u[j])
        .fold(f64::INFINITY, f64::min);
    for j in 0..m {
        if u[j] > piv_tol && xb[j].max(0.0) / u[j] <= theta {
            let better = match leave {
                None => true,
                Some((lj, _)) if bland => col_id(basis[j]) < col_id(basis[lj]),
                Some((lj, _)) => u[j] > u[lj],
            };
            if better {
                leave = Some((j, xb[j].max(0.0) / u[j]));
            }
        }
    }
    leave
}
