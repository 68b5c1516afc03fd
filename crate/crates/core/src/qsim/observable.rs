use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{Statevector, MAX_DENSE_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

/// One Pauli operator per qubit; character `q` acts on qubit `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString(pub Vec<PauliOp>);

impl PauliString {
    pub fn parse(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| match c {
                'I' | 'i' => Ok(PauliOp::I),
                'X' | 'x' => Ok(PauliOp::X),
                'Y' | 'y' => Ok(PauliOp::Y),
                'Z' | 'z' => Ok(PauliOp::Z),
                other => Err(Error::Config(format!(
                    "invalid Pauli character `{other}` in string `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString(ops))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Applies the string to `amps`, writing into `out`.
    fn apply(&self, amps: &[Complex64], out: &mut [Complex64]) {
        let mut flip = 0usize;
        for (q, op) in self.0.iter().enumerate() {
            if matches!(op, PauliOp::X | PauliOp::Y) {
                flip |= 1 << q;
            }
        }
        for (i, amp) in amps.iter().enumerate() {
            let mut factor = Complex64::new(1.0, 0.0);
            for (q, op) in self.0.iter().enumerate() {
                let bit = (i >> q) & 1;
                match op {
                    PauliOp::I | PauliOp::X => {}
                    PauliOp::Y => {
                        // Y|0> = i|1>, Y|1> = -i|0>
                        factor *= if bit == 0 {
                            Complex64::new(0.0, 1.0)
                        } else {
                            Complex64::new(0.0, -1.0)
                        };
                    }
                    PauliOp::Z => {
                        if bit == 1 {
                            factor = -factor;
                        }
                    }
                }
            }
            out[i ^ flip] += factor * amp;
        }
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for op in &self.0 {
            let c = match op {
                PauliOp::I => 'I',
                PauliOp::X => 'X',
                PauliOp::Y => 'Y',
                PauliOp::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub(crate) struct Eigensystem {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: DMatrix<Complex64>,
}

/// Hermitian observable as a real-weighted Pauli-string sum, with an optional
/// explicit dense form and cached spectral data.
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
    qubit_count: usize,
    explicit_dense: Option<DMatrix<Complex64>>,
    dense: OnceLock<DMatrix<Complex64>>,
    eigen: OnceLock<Eigensystem>,
}

impl std::fmt::Debug for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observable")
            .field("terms", &self.terms)
            .field("qubit_count", &self.qubit_count)
            .finish()
    }
}

impl Clone for Observable {
    fn clone(&self) -> Self {
        Observable {
            terms: self.terms.clone(),
            qubit_count: self.qubit_count,
            explicit_dense: self.explicit_dense.clone(),
            dense: OnceLock::new(),
            eigen: OnceLock::new(),
        }
    }
}

const HERMITICITY_TOL: f64 = 1e-10;

impl Observable {
    pub fn from_terms(qubit_count: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            if p.len() != qubit_count {
                return Err(Error::Config(format!(
                    "Pauli string `{p}` has length {}, expected {qubit_count}",
                    p.len()
                )));
            }
        }
        Ok(Observable {
            terms,
            qubit_count,
            explicit_dense: None,
            dense: OnceLock::new(),
            eigen: OnceLock::new(),
        })
    }

    /// Builds from an explicit dense matrix, checked Hermitian to 1e-10.
    pub fn from_dense(qubit_count: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << qubit_count;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                state: dim,
                operator: matrix.nrows(),
            });
        }
        let mut residue: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                residue = residue.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if residue > HERMITICITY_TOL {
            return Err(Error::NonHermitian { residue });
        }
        Ok(Observable {
            terms: Vec::new(),
            qubit_count,
            explicit_dense: Some(matrix),
            dense: OnceLock::new(),
            eigen: OnceLock::new(),
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn expectation(&self, state: &Statevector) -> Result<f64> {
        let dim = 1usize << self.qubit_count;
        if state.amplitudes().len() != dim {
            return Err(Error::DimensionMismatch {
                state: state.amplitudes().len(),
                operator: dim,
            });
        }
        let amps = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        if let Some(dense) = &self.explicit_dense {
            for i in 0..dim {
                let mut row = Complex64::new(0.0, 0.0);
                for j in 0..dim {
                    row += dense[(i, j)] * amps[j];
                }
                acc += amps[i].conj() * row;
            }
        } else {
            let mut work = vec![Complex64::new(0.0, 0.0); dim];
            for (coeff, pauli) in &self.terms {
                work.iter_mut().for_each(|w| *w = Complex64::new(0.0, 0.0));
                pauli.apply(amps, &mut work);
                let inner: Complex64 = amps
                    .iter()
                    .zip(work.iter())
                    .map(|(a, w)| a.conj() * w)
                    .sum();
                acc += coeff * inner;
            }
        }
        if acc.im.abs() > HERMITICITY_TOL {
            return Err(Error::NonHermitian { residue: acc.im.abs() });
        }
        Ok(acc.re)
    }

    /// Dense matrix form, built once on demand.
    pub fn dense(&self) -> &DMatrix<Complex64> {
        if let Some(m) = &self.explicit_dense {
            return m;
        }
        self.dense.get_or_init(|| {
            let dim = 1usize << self.qubit_count;
            let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            let mut basis = vec![Complex64::new(0.0, 0.0); dim];
            let mut col = vec![Complex64::new(0.0, 0.0); dim];
            for j in 0..dim {
                basis.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
                basis[j] = Complex64::new(1.0, 0.0);
                col.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
                for (coeff, pauli) in &self.terms {
                    let mut term_col = vec![Complex64::new(0.0, 0.0); dim];
                    pauli.apply(&basis, &mut term_col);
                    for (c, t) in col.iter_mut().zip(term_col.iter()) {
                        *c += coeff * t;
                    }
                }
                for i in 0..dim {
                    m[(i, j)] = col[i];
                }
            }
            m
        })
    }

    pub(crate) fn eigensystem(&self) -> Result<&Eigensystem> {
        if self.qubit_count > MAX_DENSE_QUBITS {
            return Err(Error::UnsupportedNoiseMode {
                qubits: self.qubit_count,
            });
        }
        Ok(self.eigen.get_or_init(|| {
            let eig = self.dense().clone().symmetric_eigen();
            Eigensystem {
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            }
        }))
    }

    /// Exact spectral bounds `(lambda_min, lambda_max)` via dense
    /// diagonalization, both clipped at zero. Requires <= 10 qubits.
    pub fn exact_spectral_bounds(&self) -> Result<(f64, f64)> {
        let eig = self.eigensystem()?;
        let lo = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(((-lo).max(0.0), hi.max(0.0)))
    }

    /// Outer bounds from coefficient magnitudes: `(sum |c|, sum |c|)`.
    /// Valid at any qubit count.
    pub fn coeff_spectral_bounds(&self) -> (f64, f64) {
        let s: f64 = self.terms.iter().map(|(c, _)| c.abs()).sum();
        (s, s)
    }

    /// Exact bounds when dense diagonalization is feasible, coefficient
    /// bounds otherwise.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        if self.qubit_count <= MAX_DENSE_QUBITS {
            self.exact_spectral_bounds().expect("dense mode available")
        } else {
            self.coeff_spectral_bounds()
        }
    }

    /// `max(lambda_min, lambda_max)` — the spectral radius bound used in the
    /// shot-variance estimate.
    pub fn lambda_bar(&self) -> f64 {
        let (lo, hi) = self.spectral_bounds();
        lo.max(hi)
    }
}
