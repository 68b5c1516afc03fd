//! Dense statevector simulation of parametrized Pauli-rotation circuits and
//! exact expectation values of Pauli-sum observables.
//!
//! Qubit `q` corresponds to bit `1 << q` of a basis index, and character `q`
//! of a Pauli string. The initial state is always `|0...0>`; any fixed state
//! preparation must appear as leading fixed gates.

mod observable;
mod parse;

pub use observable::{Observable, PauliOp, PauliString};
pub use parse::{load_problem, parse_problem, Problem};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on simulated qubits (dense amplitudes).
pub const MAX_QUBITS: usize = 12;
/// Largest qubit count for which dense diagonalization is attempted.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Rotation generator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

type Matrix2 = [[Complex64; 2]; 2];
type Matrix4 = [[Complex64; 4]; 4];

/// One circuit element: a parametrized Pauli rotation `exp(-i theta sigma / 2)`
/// or a fixed unitary on at most two qubits.
#[derive(Debug, Clone)]
pub enum Gate {
    Rotation {
        axis: Axis,
        qubit: usize,
        param: usize,
    },
    Hadamard {
        qubit: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Cz {
        control: usize,
        target: usize,
    },
    Unitary1 {
        qubit: usize,
        matrix: Matrix2,
    },
    /// Dense two-qubit unitary; local basis index is
    /// `bit(qubits[0]) + 2 * bit(qubits[1])`.
    Unitary2 {
        qubits: [usize; 2],
        matrix: Box<Matrix4>,
    },
}

const UNITARITY_TOL: f64 = 1e-10;

impl Gate {
    pub fn unitary1(qubit: usize, matrix: Matrix2) -> Result<Self> {
        let dev = unitary_deviation_2(&matrix);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Gate::Unitary1 { qubit, matrix })
    }

    pub fn unitary2(qubits: [usize; 2], matrix: Matrix4) -> Result<Self> {
        let dev = unitary_deviation_4(&matrix);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Gate::Unitary2 {
            qubits,
            matrix: Box::new(matrix),
        })
    }

    fn max_qubit(&self) -> usize {
        match self {
            Gate::Rotation { qubit, .. } | Gate::Hadamard { qubit } | Gate::Unitary1 { qubit, .. } => {
                *qubit
            }
            Gate::Cnot { control, target } | Gate::Cz { control, target } => {
                (*control).max(*target)
            }
            Gate::Unitary2 { qubits, .. } => qubits[0].max(qubits[1]),
        }
    }

    fn param_index(&self) -> Option<usize> {
        match self {
            Gate::Rotation { param, .. } => Some(*param),
            _ => None,
        }
    }
}

fn unitary_deviation_2(m: &Matrix2) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                s += m[k][i].conj() * m[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((s - expect).norm());
        }
    }
    dev
}

fn unitary_deviation_4(m: &Matrix4) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                s += m[k][i].conj() * m[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((s - expect).norm());
        }
    }
    dev
}

/// Pure state over `qubit_count` qubits; `2^n` complex amplitudes.
#[derive(Debug, Clone)]
pub struct Statevector {
    amps: Vec<Complex64>,
    qubit_count: usize,
}

impl Statevector {
    /// The all-zeros computational basis state.
    pub fn zero(qubit_count: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amps[0] = Complex64::new(1.0, 0.0);
        Statevector { amps, qubit_count }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn apply_1q(&mut self, qubit: usize, m: &Matrix2) {
        let mask = 1usize << qubit;
        let dim = self.amps.len();
        let mut i = 0usize;
        while i < dim {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            i += 1;
        }
    }

    fn apply_2q(&mut self, qa: usize, qb: usize, m: &Matrix4) {
        let ma = 1usize << qa;
        let mb = 1usize << qb;
        let dim = self.amps.len();
        for i in 0..dim {
            if i & ma == 0 && i & mb == 0 {
                let idx = [i, i | ma, i | mb, i | ma | mb];
                let a: Vec<Complex64> = idx.iter().map(|&k| self.amps[k]).collect();
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] =
                        m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
                }
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let mc = 1usize << control;
        let mt = 1usize << target;
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
    }

    fn apply_cz(&mut self, control: usize, target: usize) {
        let mc = 1usize << control;
        let mt = 1usize << target;
        for amp in self
            .amps
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| i & mc != 0 && i & mt != 0)
            .map(|(_, a)| a)
        {
            *amp = -*amp;
        }
    }
}

fn rotation_matrix(axis: Axis, theta: f64) -> Matrix2 {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let zero = Complex64::new(0.0, 0.0);
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::new(c, -s), zero],
            [zero, Complex64::new(c, s)],
        ],
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn hadamard_matrix() -> Matrix2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Ordered gate list over a fixed qubit register, with `param_dim` free
/// rotation angles. Every parameter index is bound to exactly one rotation.
#[derive(Debug, Clone)]
pub struct ParamCircuit {
    qubit_count: usize,
    gates: Vec<Gate>,
    param_dim: usize,
}

impl ParamCircuit {
    pub fn new(qubit_count: usize, gates: Vec<Gate>) -> Result<Self> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count {qubit_count} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut param_indices: Vec<usize> = gates.iter().filter_map(|g| g.param_index()).collect();
        for g in &gates {
            if g.max_qubit() >= qubit_count {
                return Err(Error::Config(format!(
                    "gate targets qubit {} but register has {} qubits",
                    g.max_qubit(),
                    qubit_count
                )));
            }
            if let Gate::Cnot { control, target } | Gate::Cz { control, target } = g {
                if control == target {
                    return Err(Error::Config(
                        "two-qubit gate with identical control and target".into(),
                    ));
                }
            }
        }
        param_indices.sort_unstable();
        let param_dim = param_indices.len();
        for (expect, &got) in param_indices.iter().enumerate() {
            if expect != got {
                return Err(Error::Config(format!(
                    "parameter indices must each appear exactly once and cover 0..d; \
                     found index {got} where {expect} was expected"
                )));
            }
        }
        Ok(ParamCircuit {
            qubit_count,
            gates,
            param_dim,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Runs the circuit on `|0...0>` with the given parameter vector.
pub fn apply_circuit(circuit: &ParamCircuit, theta: &[f64]) -> Result<Statevector> {
    if theta.len() != circuit.param_dim {
        return Err(Error::ParamShape {
            expected: circuit.param_dim,
            got: theta.len(),
        });
    }
    let mut state = Statevector::zero(circuit.qubit_count);
    for gate in &circuit.gates {
        match gate {
            Gate::Rotation { axis, qubit, param } => {
                state.apply_1q(*qubit, &rotation_matrix(*axis, theta[*param]));
            }
            Gate::Hadamard { qubit } => state.apply_1q(*qubit, &hadamard_matrix()),
            Gate::Cnot { control, target } => state.apply_cnot(*control, *target),
            Gate::Cz { control, target } => state.apply_cz(*control, *target),
            Gate::Unitary1 { qubit, matrix } => state.apply_1q(*qubit, matrix),
            Gate::Unitary2 { qubits, matrix } => state.apply_2q(qubits[0], qubits[1], matrix),
        }
    }
    Ok(state)
}

/// `<psi|H|psi>` with the imaginary residue checked and discarded.
pub fn expectation(state: &Statevector, obs: &Observable) -> Result<f64> {
    obs.expectation(state)
}

/// Noise-free objective `f(theta)`.
pub fn objective(circuit: &ParamCircuit, obs: &Observable, theta: &[f64]) -> Result<f64> {
    expectation(&apply_circuit(circuit, theta)?, obs)
}
