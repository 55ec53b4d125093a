//! Gate lists with a dense reference simulator. Qubit 0 is the most
//! significant bit of the matrix index.

use std::ops::{Add, AddAssign};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub cnot: usize,
    pub rz: usize,
    pub rx: usize,
    pub other: usize,
}

impl GateCount {
    pub fn rotations(&self) -> usize {
        self.rz + self.rx
    }
}

impl Add for GateCount {
    type Output = GateCount;
    fn add(self, o: GateCount) -> GateCount {
        GateCount { cnot: self.cnot + o.cnot, rz: self.rz + o.rz, rx: self.rx + o.rx, other: self.other + o.other }
    }
}

impl AddAssign for GateCount {
    fn add_assign(&mut self, o: GateCount) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    H,
    X,
    Z,
    /// `exp(-i theta X / 2)`.
    Rx,
    /// `exp(-i theta Z / 2)`.
    Rz,
    /// Control first, target second.
    Cnot,
    Cz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, ops: Vec::new() }
    }

    pub fn push(&mut self, kind: GateKind, qubits: &[usize], params: &[f64]) {
        self.ops.push(Gate { kind, qubits: qubits.to_vec(), params: params.to_vec() });
    }

    pub fn tally(&self) -> GateCount {
        let mut t = GateCount::default();
        for g in &self.ops {
            match g.kind {
                GateKind::Cnot | GateKind::Cz => t.cnot += 1,
                GateKind::Rz => t.rz += 1,
                GateKind::Rx => t.rx += 1,
                GateKind::H | GateKind::X | GateKind::Z => t.other += 1,
            }
        }
        t
    }

    fn validate(&self, g: &Gate) -> Result<()> {
        let arity = match g.kind {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        };
        let nparams = matches!(g.kind, GateKind::Rx | GateKind::Rz) as usize;
        if g.qubits.len() != arity || g.params.len() != nparams || g.qubits.iter().any(|&q| q >= self.n_qubits) {
            return Err(Error::InvalidParameter(format!("malformed gate {g:?}")));
        }
        if arity == 2 && g.qubits[0] == g.qubits[1] {
            return Err(Error::InvalidParameter("control equals target".into()));
        }
        Ok(())
    }

    pub fn apply(&self, amps: &mut [C]) -> Result<()> {
        if amps.len() != 1 << self.n_qubits {
            return Err(Error::LengthMismatch { expected: 1 << self.n_qubits, got: amps.len() });
        }
        let n = self.n_qubits;
        let bit = |q: usize| 1usize << (n - 1 - q);
        for g in &self.ops {
            self.validate(g)?;
            match g.kind {
                GateKind::Cnot | GateKind::Cz => {
                    let (cb, tb) = (bit(g.qubits[0]), bit(g.qubits[1]));
                    for i in 0..amps.len() {
                        if i & cb == 0 || i & tb != 0 {
                            continue;
                        }
                        if g.kind == GateKind::Cnot {
                            amps.swap(i, i | tb);
                        } else {
                            amps[i | tb] = -amps[i | tb];
                        }
                    }
                }
                kind => {
                    let m = single_qubit(kind, g.params.first().copied().unwrap_or(0.0));
                    let b = bit(g.qubits[0]);
                    for i in 0..amps.len() {
                        if i & b != 0 {
                            continue;
                        }
                        let (u, v) = (amps[i], amps[i | b]);
                        amps[i] = m[0] * u + m[1] * v;
                        amps[i | b] = m[2] * u + m[3] * v;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn unitary(&self) -> Result<DMatrix<C>> {
        if self.n_qubits > 12 {
            return Err(Error::DimensionOverflow(1 << self.n_qubits));
        }
        let dim = 1usize << self.n_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut v = vec![C::new(0.0, 0.0); dim];
            v[j] = C::new(1.0, 0.0);
            self.apply(&mut v)?;
            for i in 0..dim {
                u[(i, j)] = v[i];
            }
        }
        Ok(u)
    }
}

fn single_qubit(kind: GateKind, theta: f64) -> [C; 4] {
    let z = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    match kind {
        GateKind::H => {
            let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [s, s, s, -s]
        }
        GateKind::X => [z, one, one, z],
        GateKind::Z => [one, z, z, -one],
        GateKind::Rx => {
            let (s, c) = (theta / 2.0).sin_cos();
            [C::new(c, 0.0), C::new(0.0, -s), C::new(0.0, -s), C::new(c, 0.0)]
        }
        GateKind::Rz => [C::from_polar(1.0, -theta / 2.0), z, z, C::from_polar(1.0, theta / 2.0)],
        GateKind::Cnot | GateKind::Cz => unreachable!("two-qubit gate"),
    }
}
