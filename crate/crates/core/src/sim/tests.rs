use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};

use super::*;
use crate::cheb::{ChebyshevPoly, Parity};
use crate::qsp::{solve_phases, PhaseSequence};

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn diag_matrix(d: &[f64]) -> DMatrix<C> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| C::new(x, 0.0))))
}

fn random_even_poly(d: usize, seed: u64) -> ChebyshevPoly {
    let mut r = rng(seed);
    let coeffs: Vec<f64> = (0..d / 2 + 1).map(|_| r.gen_range(-1.0..1.0)).collect();
    let p = ChebyshevPoly::new(Parity::Even, d, coeffs).unwrap();
    let m = p.max_abs_on_grid(10_000);
    let scale = 0.9 / m;
    ChebyshevPoly::new(Parity::Even, d, p.coeffs.iter().map(|c| c * scale).collect()).unwrap()
}

#[test]
fn constructors_are_normalized() {
    assert!((StateVector::uniform(4).unwrap().norm() - 1.0).abs() < 1e-15);
    assert!((StateVector::random(5, 1).unwrap().norm() - 1.0).abs() < 1e-14);
    assert!(StateVector::from_amplitudes(vec![C::new(0.0, 0.0); 4]).is_err());
    assert!(StateVector::from_amplitudes(vec![C::new(1.0, 0.0); 3]).is_err());
    assert!(StateVector::basis(2, 4).is_err());
}

#[test]
fn diagonal_phase_identity_and_additivity() {
    let s = StateVector::random(3, 2).unwrap();
    let lam: Vec<f64> = (0..8).map(|j| 0.3 * j as f64).collect();
    let mut a = s.amps.clone();
    apply_diagonal_phase(&mut a, &lam, 0.0).unwrap();
    assert_eq!(a, s.amps);
    let mut b = s.amps.clone();
    apply_diagonal_phase(&mut a, &lam, 0.4).unwrap();
    apply_diagonal_phase(&mut a, &lam, 0.9).unwrap();
    apply_diagonal_phase(&mut b, &lam, 1.3).unwrap();
    assert!(max_diff(&a, &b) < 1e-13);
    assert!(apply_diagonal_phase(&mut b, &lam[..4], 1.0).is_err());
}

#[test]
fn diagonal_phase_ramp() {
    let u = StateVector::uniform(3).unwrap();
    let lam: Vec<f64> = (0..8).map(|j| j as f64).collect();
    let mut a = u.amps.clone();
    apply_diagonal_phase(&mut a, &lam, 0.25).unwrap();
    for (j, z) in a.iter().enumerate() {
        let want = C::from_polar(1.0 / 8f64.sqrt(), -0.25 * j as f64);
        assert!((z - want).norm() < 1e-15);
    }
    assert!((norm(&a) - 1.0).abs() < 1e-12);
}

#[test]
fn register_phase_acts_on_one_site() {
    let s = StateVector::random(4, 3).unwrap();
    let mut a = s.amps.clone();
    apply_register_phase(&mut a, Subregister { offset: 2, width: 2 }, &[0.0, 1.0, 2.0, 3.0], 0.5).unwrap();
    for i in 0..16 {
        let want = s.amps[i] * C::from_polar(1.0, -0.5 * ((i >> 2) & 3) as f64);
        assert!((a[i] - want).norm() < 1e-15);
    }
}

#[test]
fn qft_of_zero_is_uniform() {
    let mut a = StateVector::basis(3, 0).unwrap().amps;
    apply_qft(&mut a, Subregister { offset: 0, width: 3 }).unwrap();
    assert!(max_diff(&a, &StateVector::uniform(3).unwrap().amps) < 1e-15);
}

#[test]
fn qft_columns() {
    let n = 8;
    for k in 0..n {
        let mut a = StateVector::basis(3, k).unwrap().amps;
        apply_qft(&mut a, Subregister { offset: 0, width: 3 }).unwrap();
        for j in 0..n {
            let want = C::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * (j * k) as f64 / n as f64);
            assert!((a[j] - want).norm() < 1e-14);
        }
    }
}

#[test]
fn qft_squared_is_index_reversal() {
    let s = StateVector::random(4, 7).unwrap();
    let mut a = s.amps.clone();
    let reg = Subregister { offset: 0, width: 4 };
    apply_qft(&mut a, reg).unwrap();
    apply_qft(&mut a, reg).unwrap();
    for j in 0..16 {
        assert!((a[j] - s.amps[(16 - j) % 16]).norm() < 1e-12);
    }
}

#[test]
fn qft_inverse_and_subregisters() {
    let s = StateVector::random(6, 9).unwrap();
    let mut a = s.amps.clone();
    let reg = Subregister { offset: 2, width: 3 };
    apply_qft(&mut a, reg).unwrap();
    assert!((norm(&a) - 1.0).abs() < 1e-12);
    apply_iqft(&mut a, reg).unwrap();
    assert!(max_diff(&a, &s.amps) < 1e-12);
    assert!(apply_qft(&mut a, Subregister { offset: 5, width: 3 }).is_err());
    // Product state: transform on site 1 only touches site 1.
    let mut prod = vec![C::new(0.0, 0.0); 16];
    prod[1 | (2 << 2)] = C::new(1.0, 0.0);
    apply_qft(&mut prod, Subregister::site(1, 2)).unwrap();
    for hi in 0..4 {
        let want = C::from_polar(0.5, 2.0 * PI * (2 * hi) as f64 / 4.0);
        assert!((prod[1 | (hi << 2)] - want).norm() < 1e-14);
    }
}

fn small_split(seed: u64) -> SplitHamiltonian {
    let mut r = rng(seed);
    let hx = (0..16).map(|_| r.gen_range(0.0..2.0)).collect();
    let hp = (0..16).map(|_| r.gen_range(0.0..2.0)).collect();
    SplitHamiltonian::new(2, 2, hx, hp).unwrap()
}

#[test]
fn split_hamiltonian_dense_matches_apply() {
    let h = small_split(1);
    let m = h.dense().unwrap();
    let s = StateVector::random(4, 4).unwrap();
    let v = nalgebra::DVector::from_vec(s.amps.clone());
    let mv = &m * v;
    assert!(max_diff(mv.as_slice(), &h.apply(&s.amps)) < 1e-13);
    assert!((&m - m.adjoint()).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn trotter_step_identities() {
    let h = small_split(2);
    let s = StateVector::random(4, 5).unwrap();
    let mut a = s.amps.clone();
    trotter_step(&mut a, &h, 0.0, Direction::Forward).unwrap();
    assert!(max_diff(&a, &s.amps) < 1e-14);
    trotter_step(&mut a, &h, 0.3, Direction::Forward).unwrap();
    assert!((norm(&a) - 1.0).abs() < 1e-12);
    trotter_step(&mut a, &h, 0.3, Direction::Adjoint).unwrap();
    assert!(max_diff(&a, &s.amps) < 1e-13);

    // H_p = 0: the step is exact for any dt.
    let hz = SplitHamiltonian::new(2, 2, h.hx.clone(), vec![0.0; 16]).unwrap();
    let mut b = s.amps.clone();
    trotter_step(&mut b, &hz, 1.7, Direction::Forward).unwrap();
    let mut c = s.amps.clone();
    apply_diagonal_phase(&mut c, &h.hx, 1.7).unwrap();
    assert!(max_diff(&b, &c) < 1e-13);
}

#[test]
fn trotter_converges_to_exact() {
    let h = Arc::new(small_split(3));
    let eig = Arc::new(HermitianEigen::new(&h.dense().unwrap()).unwrap());
    let s = StateVector::random(4, 6).unwrap();
    let mut exact = s.amps.clone();
    ExactEvolver::new(eig, 1.0).evolve(&mut exact, 1.0, false);
    let mut errs = Vec::new();
    for n in [4, 8, 16, 32] {
        let mut a = s.amps.clone();
        TrotterEvolver::new(h.clone(), 1.0, n).unwrap().evolve(&mut a, 1.0, false);
        errs.push(max_diff(&a, &exact));
    }
    for w in errs.windows(2) {
        assert!(w[1] < 0.6 * w[0], "{errs:?}");
    }
}

#[test]
fn hermitian_eigen_rejects_non_hermitian() {
    let mut m = DMatrix::<C>::identity(2, 2);
    m[(0, 1)] = C::new(1.0, 0.0);
    assert!(HermitianEigen::new(&m).is_err());
}

#[test]
fn oracle_identity_filter() {
    let h = small_split(4).dense().unwrap();
    let one = ChebyshevPoly::new(Parity::Even, 0, vec![1.0]).unwrap();
    let s = StateVector::random(4, 1).unwrap();
    let (out, p) = exact_filter_oracle(&h, &one, 1.0, &s, true).unwrap();
    assert!((p - 1.0).abs() < 1e-12);
    assert!(max_diff(&out.amps, &s.amps) < 1e-12);
}

#[test]
fn oracle_ideal_projector() {
    // cos(tau E / 2) is 1 on E = 0 and 0 elsewhere; x^2 then projects exactly.
    let tau = 1.0;
    let evals = [0.0, PI, PI, PI];
    let h = diag_matrix(&evals);
    let x2 = ChebyshevPoly::new(Parity::Even, 2, vec![0.5, 0.5]).unwrap();
    let s = StateVector::random(2, 8).unwrap();
    let (out, p) = exact_filter_oracle(&h, &x2, tau, &s, true).unwrap();
    assert!((p - s.amps[0].norm_sqr()).abs() < 1e-12);
    assert!((out.amps[0].norm() - 1.0).abs() < 1e-12);
    let zero = ChebyshevPoly::new(Parity::Even, 0, vec![0.0]).unwrap();
    assert!(matches!(exact_filter_oracle(&h, &zero, tau, &s, true), Err(Error::FilteredToNothing(_))));
}

fn block_of(evolver: &dyn Evolver, w: &[f64], mode: QetuMode, dim: usize) -> DMatrix<C> {
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut e = vec![C::new(0.0, 0.0); dim];
        e[j] = C::new(1.0, 0.0);
        let col = qetu_block_apply(&e, w, evolver, mode).unwrap();
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
    }
    m
}

#[test]
fn block_encodings_match_polynomial() {
    for case in 0..8u64 {
        let mut r = rng(100 + case);
        let n = 1 + (case as usize % 3);
        let dim = 1 << n;
        let d = 2 * r.gen_range(1..6);
        let poly = random_even_poly(d, case);
        let phases = solve_phases(&poly).unwrap().phases;
        let tau = r.gen_range(0.3..2.5);
        let evals: Vec<f64> = (0..dim).map(|_| r.gen_range(-2.0..3.0)).collect();
        for (mode, k) in [(QetuMode::Controlled, 0.5), (QetuMode::ControlFree, 1.0)] {
            let ev = DiagonalEvolver { diag: evals.clone(), t: tau };
            let b = block_of(&ev, &phases.w_convention, mode, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { poly.eval((k * tau * evals[i]).cos()).unwrap() } else { 0.0 };
                    assert!((b[(i, j)] - C::new(want, 0.0)).norm() < 1e-9, "case {case} {mode:?}");
                }
            }
        }
    }
}

#[test]
fn eigenstate_passes_through() {
    let h = Arc::new(small_split(5));
    let eig = Arc::new(HermitianEigen::new(&h.dense().unwrap()).unwrap());
    let poly = random_even_poly(6, 11);
    let phases = solve_phases(&poly).unwrap().phases;
    let tau = 0.8;
    let psi0 = eig.eigenvector(0);
    let rep = run_qetu(&psi0, &phases, &ExactEvolver::new(eig.clone(), tau), QetuMode::Controlled).unwrap();
    assert!(rep.output.infidelity(&psi0) < 1e-12);
    let f = poly.eval((tau * eig.values[0] / 2.0).cos()).unwrap();
    assert!((rep.success_prob - f * f).abs() < 1e-10);
    assert_eq!(rep.calls, 6);
    assert_eq!(rep.tallies.rx, 7);
}

#[test]
fn run_matches_oracle_on_random_hamiltonians() {
    for seed in 0..4 {
        let h = Arc::new(small_split(20 + seed));
        let dense = h.dense().unwrap();
        let eig = Arc::new(HermitianEigen::new(&dense).unwrap());
        let poly = random_even_poly(8, seed);
        let phases = solve_phases(&poly).unwrap().phases;
        let psi = StateVector::random(4, seed).unwrap();
        for (mode, half) in [(QetuMode::Controlled, true), (QetuMode::ControlFree, false)] {
            let rep = run_qetu(&psi, &phases, &ExactEvolver::new(eig.clone(), 1.1), mode).unwrap();
            let (want, p) = exact_filter_with(&eig, &poly, 1.1, &psi, half).unwrap();
            assert!(max_diff(&rep.output.amps, &want.amps) < 1e-10);
            assert!((rep.success_prob - p).abs() < 1e-10);
            assert!((rep.output.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn reversed_ladder_gives_same_even_filter() {
    let mut r = rng(77);
    let evals: Vec<f64> = (0..8).map(|_| r.gen_range(0.0..3.0)).collect();
    let poly = random_even_poly(8, 3);
    let ph = solve_phases(&poly).unwrap().phases;
    let neg = PhaseSequence::from_w_convention(ph.w_convention.iter().map(|p| -p).collect()).unwrap();
    let a = block_of(&DiagonalEvolver { diag: evals.clone(), t: 1.2 }, &ph.w_convention, QetuMode::Controlled, 8);
    let neg_evals: Vec<f64> = evals.iter().map(|e| -e).collect();
    let b = block_of(&DiagonalEvolver { diag: neg_evals, t: 1.2 }, &neg.w_convention, QetuMode::Controlled, 8);
    assert!((a - b).iter().all(|z| z.norm() < 1e-10));
}

#[test]
fn odd_call_count_rejected() {
    let ev = DiagonalEvolver { diag: vec![0.0, 1.0], t: 1.0 };
    assert!(qetu_block_apply(&[C::new(1.0, 0.0), C::new(0.0, 0.0)], &[0.1, 0.2], &ev, QetuMode::Controlled).is_err());
}

#[test]
fn shot_sampling_is_deterministic_and_close() {
    let a = sample_post_selection(0.3, 20_000, 4).unwrap();
    let b = sample_post_selection(0.3, 20_000, 4).unwrap();
    assert_eq!(a, b);
    assert!((a.p_hat - 0.3).abs() < 0.02);
    assert!(sample_post_selection(1.2, 10, 0).is_err());
}

#[test]
fn mode_parsing() {
    assert_eq!("control-free".parse::<QetuMode>().unwrap(), QetuMode::ControlFree);
    assert!("both".parse::<QetuMode>().is_err());
}
