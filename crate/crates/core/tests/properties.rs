use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C;
use proptest::prelude::*;

use qetu::cheb::{self, clenshaw, ChebyshevPoly, Parity, DEFAULT_C};
use qetu::gsprep::{choose_tau_steps, gamma, optimal_dtau, ErrorModel, StepRegime};
use qetu::lp::{solve_minimax, Row};
use qetu::qsp::{eval_g, solve_phases, PhaseSequence};
use qetu::sim::{
    apply_diagonal_phase, sample_post_selection, trotter_step, Direction, SplitHamiltonian, StateVector,
};
use qetu::wavepacket::{gate_count_exact_prep, gate_count_qetu, shift_position, target_state, WavepacketSpec};

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scaled_even(coeffs: Vec<f64>) -> ChebyshevPoly {
    let d = 2 * (coeffs.len() - 1);
    let p = ChebyshevPoly::new(Parity::Even, d, coeffs).unwrap();
    let s = 0.9 / p.max_abs_on_grid(4001).max(1e-3);
    ChebyshevPoly::new(Parity::Even, d, p.coeffs.iter().map(|c| c * s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clenshaw_matches_trigonometric_sum(c in prop::collection::vec(-1.0f64..1.0, 1..12), x in -1.0f64..1.0) {
        let direct: f64 = c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * x.acos()).cos()).sum();
        prop_assert!((clenshaw(&c, x) - direct).abs() < 1e-12);
    }

    #[test]
    fn definite_parity_is_respected(c in prop::collection::vec(-1.0f64..1.0, 1..8), x in -1.0f64..1.0, odd in any::<bool>()) {
        let (parity, d) = if odd { (Parity::Odd, 2 * c.len() - 1) } else { (Parity::Even, 2 * (c.len() - 1)) };
        let p = ChebyshevPoly::new(parity, d, c).unwrap();
        let s = if odd { -1.0 } else { 1.0 };
        prop_assert!((p.eval(-x).unwrap() - s * p.eval(x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_grid_is_sorted_and_symmetric(m in 2usize..400) {
        let g = cheb::chebyshev_grid(m);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert!((0..m).all(|j| g[j] == -g[m - 1 - j]));
    }

    #[test]
    fn tau_max_makes_top_of_spectrum_mirror_the_gap_edge(
        eta in 0.0f64..0.5, mu in 0.1f64..1.0, delta in 0.01f64..0.5,
    ) {
        let t = cheb::tau_max(eta, mu, delta).unwrap();
        let w = cheb::sigma_window(eta, eta, mu, delta, t, DEFAULT_C).unwrap();
        prop_assert!((w.sigma_min + w.sigma_minus).abs() < 1e-12);
        prop_assert!(w.sigma_minus < w.sigma_plus);
    }

    #[test]
    fn minimax_beats_perturbations(
        targets in prop::collection::vec(-1.0f64..1.0, 8..20),
        dir in prop::collection::vec(-1.0f64..1.0, 3),
        h in 1e-3f64..0.1,
    ) {
        let m = targets.len();
        let rows: Vec<Row> = (0..m)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / (m - 1) as f64;
                Row::fit(vec![1.0, x, 2.0 * x * x - 1.0], targets[i])
            })
            .collect();
        let sol = solve_minimax(3, &rows).unwrap();
        let resid = |c: &[f64]| {
            rows.iter().map(|r| match r.kind {
                qetu::lp::RowKind::Fit(f) => (r.a.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() - f).abs(),
                qetu::lp::RowKind::Cap(_) => 0.0,
            }).fold(0.0, f64::max)
        };
        let moved: Vec<f64> = sol.coeffs.iter().zip(&dir).map(|(c, d)| c + h * d).collect();
        prop_assert!((resid(&sol.coeffs) - sol.max_residual).abs() < 1e-12);
        prop_assert!(resid(&moved) >= sol.max_residual - 1e-10);
    }

    #[test]
    fn w_convention_round_trips(reduced in prop::collection::vec(-PI..PI, 1..20)) {
        let a = PhaseSequence::from_reduced(reduced.clone()).unwrap();
        let b = PhaseSequence::from_w_convention(a.w_convention.clone()).unwrap();
        for (x, y) in b.reduced.iter().zip(&reduced) {
            prop_assert!((x - y).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solved_phases_reproduce_polynomial(c in prop::collection::vec(-1.0f64..1.0, 2..6), x in -1.0f64..1.0) {
        let poly = scaled_even(c);
        let sol = solve_phases(&poly).unwrap();
        prop_assert!(sol.phases.is_symmetric());
        let g = eval_g(x, &sol.phases.reduced).unwrap();
        prop_assert!((g - poly.eval(x).unwrap()).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_states_are_normalized(n in 1usize..8, seed in any::<u64>()) {
        prop_assert!((StateVector::random(n, seed).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_phases_preserve_norm(
        n in 1usize..6, seed in any::<u64>(), angle in -5.0f64..5.0, scale in 0.1f64..3.0,
    ) {
        let psi = StateVector::random(n, seed).unwrap();
        let evals: Vec<f64> = (0..1usize << n).map(|k| scale * k as f64).collect();
        let mut a = psi.amps.clone();
        apply_diagonal_phase(&mut a, &evals, angle).unwrap();
        prop_assert!((norm(&a) - 1.0).abs() < 1e-12);
        apply_diagonal_phase(&mut a, &evals, -angle).unwrap();
        prop_assert!(a.iter().zip(&psi.amps).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn trotter_step_is_unitary_and_inverted_by_adjoint(
        n_q in 1usize..4, sites in 1usize..3, seed in any::<u64>(), dt in -1.0f64..1.0,
    ) {
        let n = 1usize << n_q;
        let hx: Vec<f64> = (0..n.pow(sites as u32)).map(|k| ((k * 7 + 3) % 11) as f64 * 0.1).collect();
        let hp: Vec<f64> = (0..n.pow(sites as u32)).map(|k| ((k * 5 + 1) % 13) as f64 * 0.1).collect();
        let h = Arc::new(SplitHamiltonian::new(n_q, sites, hx, hp).unwrap());
        let psi = StateVector::random(n_q * sites, seed).unwrap();
        let mut a = psi.amps.clone();
        trotter_step(&mut a, &h, dt, Direction::Forward).unwrap();
        prop_assert!((norm(&a) - 1.0).abs() < 1e-12);
        trotter_step(&mut a, &h, dt, Direction::Adjoint).unwrap();
        prop_assert!(a.iter().zip(&psi.amps).all(|(x, y)| (x - y).norm() < 1e-11));
    }

    #[test]
    fn overlap_is_a_probability_amplitude(n in 1usize..6, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = StateVector::random(n, s1).unwrap();
        let b = StateVector::random(n, s2).unwrap();
        let g = gamma(&a, &b);
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!((gamma(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shot_sampling_is_seeded(p in 0.0f64..1.0, shots in 1u64..2000, seed in any::<u64>()) {
        let a = sample_post_selection(p, shots, seed).unwrap();
        let b = sample_post_selection(p, shots, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.successes <= shots);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_step_minimizes_call_count(
        a in 0.5f64..5.0, b in 0.2f64..3.0, c in 0.01f64..1.0, p in 1.0f64..3.0, log_eps in -6.0f64..-2.5,
    ) {
        let eps = 10f64.powf(log_eps);
        let model = ErrorModel { a, b, c, p };
        let delta = 0.1;
        let s = optimal_dtau(&model, eps, delta).unwrap();
        prop_assume!(s.regime == StepRegime::Interior);
        let dt = s.dtau_numeric.unwrap();
        let n = |x: f64| model.n_tot(eps, delta, x);
        prop_assert!(n(dt) <= n(dt * 0.99) + 1e-9 * n(dt));
        prop_assert!(n(dt) <= n(dt * 1.01) + 1e-9 * n(dt));
        prop_assert!((model.error(delta, n(dt), dt) - eps).abs() < 1e-9 * eps.max(1e-12) + 1e-15);
        prop_assert!(s.second_derivative.unwrap() > 0.0);
    }

    #[test]
    fn tau_split_fits_below_maximum(dtau in 0.01f64..2.0, tau_max in 0.01f64..4.0) {
        match choose_tau_steps(dtau, tau_max) {
            Ok((tau, n)) => {
                prop_assert!(n >= 1);
                prop_assert!((tau - n as f64 * dtau).abs() < 1e-12);
                prop_assert!(tau <= tau_max * (1.0 + 1e-9));
                prop_assert!(tau + dtau > tau_max);
            }
            Err(_) => prop_assert!(dtau > tau_max * (1.0 - 1e-9)),
        }
    }

    #[test]
    fn exact_preparation_eventually_costs_more(n_q in 6usize..16, d in 2usize..8) {
        let d = 2 * d;
        let q = gate_count_qetu(n_q, d, false);
        let e = gate_count_exact_prep(n_q);
        let e_next = gate_count_exact_prep(n_q + 1);
        prop_assert!(e_next.cnot > 2 * e.cnot);
        prop_assert!(gate_count_qetu(n_q + 1, d, false).cnot == q.cnot + d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn position_shift_is_invertible(n_q in 3usize..7, ratio in 0.05f64..0.4, steps in -5i32..5) {
        let spec = WavepacketSpec::centered(n_q, 5.0, ratio).unwrap();
        let psi = target_state(&spec).unwrap();
        let x0 = steps as f64 * spec.dx();
        let there = shift_position(&spec, &psi, x0).unwrap();
        prop_assert!((there.norm() - 1.0).abs() < 1e-12);
        let back = shift_position(&spec, &there, -x0).unwrap();
        prop_assert!(back.amps.iter().zip(&psi.amps).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
