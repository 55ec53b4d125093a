//! Pauli-string Hamiltonians, anticommuting grouping, and the control-free
//! `V` circuit built from anti-controlled `K_j` sandwiches.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

/// Sum of `coefficient * P` with `P` over `{I, X, Y, Z}^n`. Character `i`
/// acts on qubit `i`, the leftmost tensor factor being qubit 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTermSum {
    pub n: usize,
    pub terms: Vec<(f64, String)>,
}

impl PauliTermSum {
    pub fn new(n: usize, terms: Vec<(f64, String)>) -> Result<Self> {
        for (c, s) in &terms {
            if s.len() != n || !s.chars().all(|ch| matches!(ch, 'I' | 'X' | 'Y' | 'Z')) {
                return Err(Error::InvalidParameter(format!("bad Pauli string {s:?} for {n} qubits")));
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(PauliTermSum { n, terms })
    }

    /// `n_terms` distinct non-identity strings with coefficients in [-1, 1].
    pub fn random(n: usize, n_terms: usize, seed: u64) -> Result<Self> {
        let total = 4usize.pow(n as u32) - 1;
        if n_terms > total {
            return Err(Error::InvalidParameter(format!("only {total} non-identity strings on {n} qubits")));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut seen = std::collections::BTreeSet::new();
        let mut terms = Vec::new();
        while terms.len() < n_terms {
            let code = rng.gen_range(1..=total);
            if seen.insert(code) {
                let s: String = (0..n).map(|q| ['I', 'X', 'Y', 'Z'][(code >> (2 * q)) & 3]).collect();
                terms.push((rng.gen_range(-1.0..1.0), s));
            }
        }
        Self::new(n, terms)
    }

    pub fn dense(&self) -> DMatrix<C> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            m += pauli_matrix(s) * C::new(*c, 0.0);
        }
        m
    }
}

fn single(ch: char) -> [C; 4] {
    let (z, o, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    match ch {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => unreachable!("validated Pauli character"),
    }
}

/// Dense matrix of a Pauli string, qubit 0 as the high bit.
pub fn pauli_matrix(s: &str) -> DMatrix<C> {
    let mut m = DMatrix::from_element(1, 1, C::new(1.0, 0.0));
    for ch in s.chars() {
        let p = single(ch);
        let k = DMatrix::from_row_slice(2, 2, &p);
        m = m.kronecker(&k);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliGroup {
    pub terms: PauliTermSum,
    /// Qubit carrying `K_j`.
    pub k_qubit: usize,
    /// `'X'` or `'Z'`.
    pub k_axis: char,
}

impl PauliGroup {
    pub fn k_string(&self) -> String {
        (0..self.terms.n).map(|q| if q == self.k_qubit { self.k_axis } else { 'I' }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedHamiltonian {
    pub n: usize,
    pub groups: Vec<PauliGroup>,
    /// Sum of identity-only coefficients, a global phase.
    pub identity: f64,
}

/// Two passes: `{I, Z}` strings go to the lowest qubit carrying `Z` with
/// `K = X` there; the rest go to the lowest qubit carrying `X` or `Y` with
/// `K = Z` there.
pub fn group_pauli(terms: &PauliTermSum) -> Result<GroupedHamiltonian> {
    let mut identity = 0.0;
    let mut first: BTreeMap<usize, Vec<(f64, String)>> = BTreeMap::new();
    let mut rest = Vec::new();
    for (c, s) in &terms.terms {
        if s.chars().all(|ch| ch == 'I') {
            identity += c;
        } else if s.chars().all(|ch| ch == 'I' || ch == 'Z') {
            let q = s.find('Z').expect("non-identity");
            first.entry(q).or_default().push((*c, s.clone()));
        } else {
            rest.push((*c, s.clone()));
        }
    }
    let mut second: BTreeMap<usize, Vec<(f64, String)>> = BTreeMap::new();
    let mut leftover = Vec::new();
    for (c, s) in rest {
        match s.find(['X', 'Y']) {
            Some(q) => second.entry(q).or_default().push((c, s)),
            None => leftover.push(s),
        }
    }
    if !leftover.is_empty() {
        return Err(Error::Grouping(format!("unassigned strings {leftover:?}")));
    }
    let mut groups = Vec::new();
    for (map, axis) in [(first, 'X'), (second, 'Z')] {
        for (q, ts) in map {
            groups.push(PauliGroup { terms: PauliTermSum { n: terms.n, terms: ts }, k_qubit: q, k_axis: axis });
        }
    }
    Ok(GroupedHamiltonian { n: terms.n, groups, identity })
}

/// `exp(-i theta P)` on circuit qubits `offset + i`.
fn push_pauli_rotation(c: &mut Circuit, s: &str, theta: f64, offset: usize) {
    let active: Vec<(usize, char)> =
        s.chars().enumerate().filter(|&(_, ch)| ch != 'I').map(|(q, ch)| (q + offset, ch)).collect();
    let Some(&(last, _)) = active.last() else { return };
    let half_pi = std::f64::consts::FRAC_PI_2;
    for &(q, ch) in &active {
        match ch {
            'X' => c.push(GateKind::H, &[q], &[]),
            'Y' => c.push(GateKind::Rx, &[q], &[half_pi]),
            _ => {}
        }
    }
    for w in active.windows(2) {
        c.push(GateKind::Cnot, &[w[0].0, w[1].0], &[]);
    }
    c.push(GateKind::Rz, &[last], &[2.0 * theta]);
    for w in active.windows(2).rev() {
        c.push(GateKind::Cnot, &[w[0].0, w[1].0], &[]);
    }
    for &(q, ch) in &active {
        match ch {
            'X' => c.push(GateKind::H, &[q], &[]),
            'Y' => c.push(GateKind::Rx, &[q], &[-half_pi]),
            _ => {}
        }
    }
}

fn push_anti_controlled_k(c: &mut Circuit, g: &PauliGroup) {
    let target = g.k_qubit + 1;
    c.push(GateKind::X, &[0], &[]);
    let kind = if g.k_axis == 'X' { GateKind::Cnot } else { GateKind::Cz };
    c.push(kind, &[0, target], &[]);
    c.push(GateKind::X, &[0], &[]);
}

/// Circuit on `n + 1` qubits (ancilla = qubit 0) implementing
/// `diag(exp(i dtau H), exp(-i dtau H))` group by group.
pub fn build_v_circuit(grouped: &GroupedHamiltonian, dtau: f64) -> Circuit {
    let mut c = Circuit::new(grouped.n + 1);
    for g in &grouped.groups {
        push_anti_controlled_k(&mut c, g);
        for (coef, s) in &g.terms.terms {
            push_pauli_rotation(&mut c, s, dtau * coef, 1);
        }
        push_anti_controlled_k(&mut c, g);
    }
    c
}

/// Dense `diag(P(+dtau), P(-dtau))` with `P(t)` the ordered product of the
/// per-term exponentials `exp(-i t c P)` used by [`build_v_circuit`].
pub fn v_reference(grouped: &GroupedHamiltonian, dtau: f64) -> DMatrix<C> {
    let dim = 1usize << grouped.n;
    let prod = |t: f64| {
        let mut m = DMatrix::<C>::identity(dim, dim);
        for g in &grouped.groups {
            for (coef, s) in &g.terms.terms {
                let (sn, cs) = (t * coef).sin_cos();
                let e = DMatrix::<C>::identity(dim, dim) * C::new(cs, 0.0) - pauli_matrix(s) * C::new(0.0, sn);
                m = e * m;
            }
        }
        m
    };
    let mut v = DMatrix::zeros(2 * dim, 2 * dim);
    v.view_mut((0, 0), (dim, dim)).copy_from(&prod(-dtau));
    v.view_mut((dim, dim), (dim, dim)).copy_from(&prod(dtau));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::HermitianEigen;

    fn max_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn two_qubit_example_groups() {
        let h = PauliTermSum::new(2, vec![(0.3, "IZ".into()), (-0.7, "ZI".into()), (0.45, "ZZ".into())]).unwrap();
        let g = group_pauli(&h).unwrap();
        assert_eq!(g.groups.len(), 2);
        assert_eq!(g.groups[0].k_string(), "XI");
        assert_eq!(g.groups[0].terms.terms, vec![(-0.7, "ZI".to_string()), (0.45, "ZZ".to_string())]);
        assert_eq!(g.groups[1].k_string(), "IX");
        assert_eq!(g.groups[1].terms.terms, vec![(0.3, "IZ".to_string())]);
    }

    #[test]
    fn two_qubit_example_circuit_is_v() {
        let h = PauliTermSum::new(2, vec![(0.3, "IZ".into()), (-0.7, "ZI".into()), (0.45, "ZZ".into())]).unwrap();
        let g = group_pauli(&h).unwrap();
        let dtau = 0.37;
        let u = build_v_circuit(&g, dtau).unitary().unwrap();
        let eig = HermitianEigen::new(&h.dense()).unwrap();
        let mut v = DMatrix::zeros(8, 8);
        for j in 0..4 {
            let mut e = vec![C::new(0.0, 0.0); 4];
            e[j] = C::new(1.0, 0.0);
            let plus = eig.apply_fn(&e, |x| C::from_polar(1.0, dtau * x));
            let minus = eig.apply_fn(&e, |x| C::from_polar(1.0, -dtau * x));
            for i in 0..4 {
                v[(i, j)] = plus[i];
                v[(i + 4, j + 4)] = minus[i];
            }
        }
        assert!(max_diff(&u, &v) < 1e-12);
        // Two anti-controlled K pairs.
        let zz_cnots = 2;
        assert_eq!(build_v_circuit(&g, dtau).tally().cnot, 4 + zz_cnots);
    }

    #[test]
    fn single_z_term() {
        let h = PauliTermSum::new(1, vec![(1.3, "Z".into())]).unwrap();
        let g = group_pauli(&h).unwrap();
        assert_eq!(g.groups.len(), 1);
        assert_eq!(g.groups[0].k_axis, 'X');
        let u = build_v_circuit(&g, 0.2).unitary().unwrap();
        assert!(max_diff(&u, &v_reference(&g, 0.2)) < 1e-13);
    }

    #[test]
    fn random_groups_anticommute_and_partition() {
        for seed in 0..5 {
            let h = PauliTermSum::random(3, 12, seed).unwrap();
            let g = group_pauli(&h).unwrap();
            let mut all: Vec<String> = g.groups.iter().flat_map(|gr| gr.terms.terms.iter().map(|t| t.1.clone())).collect();
            all.sort();
            let mut want: Vec<String> = h.terms.iter().map(|t| t.1.clone()).collect();
            want.sort();
            assert_eq!(all, want);
            for gr in &g.groups {
                let k = pauli_matrix(&gr.k_string());
                let hj = gr.terms.dense();
                let s = &k * &hj * &k + &hj;
                assert!(s.iter().all(|z| z.norm() < 1e-14));
            }
            let u = build_v_circuit(&g, 0.41).unitary().unwrap();
            assert!(max_diff(&u, &v_reference(&g, 0.41)) < 1e-12);
        }
    }

    #[test]
    fn identity_terms_set_aside() {
        let h = PauliTermSum::new(2, vec![(2.0, "II".into()), (0.5, "XY".into())]).unwrap();
        let g = group_pauli(&h).unwrap();
        assert_eq!(g.identity, 2.0);
        assert_eq!(g.groups.len(), 1);
        assert_eq!(g.groups[0].k_string(), "ZI");
    }

    #[test]
    fn malformed_strings_rejected() {
        assert!(PauliTermSum::new(2, vec![(1.0, "XQ".into())]).is_err());
        assert!(PauliTermSum::new(2, vec![(1.0, "X".into())]).is_err());
    }
}
