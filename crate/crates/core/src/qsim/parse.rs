//! Plain-text circuit/observable description files.
//!
//! ```text
//! qubits = 2
//!
//! [gates]
//! ry q=0 p=0
//! cnot c=0 t=1
//!
//! [observable]
//! 0.5 ZZ
//! 0.3 XI
//! ```

use std::path::Path;

use crate::error::{Error, Result};

use super::{Axis, Gate, Observable, ParamCircuit, PauliString};

/// A parsed circuit together with its measured observable.
#[derive(Debug, Clone)]
pub struct Problem {
    pub circuit: ParamCircuit,
    pub observable: Observable,
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    enum Section {
        Preamble,
        Gates,
        Observable,
    }

    let mut qubits: Option<usize> = None;
    let mut gates: Vec<Gate> = Vec::new();
    let mut terms: Vec<(f64, PauliString)> = Vec::new();
    let mut section = Section::Preamble;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match content {
            "[gates]" => {
                section = Section::Gates;
                continue;
            }
            "[observable]" => {
                section = Section::Observable;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble => {
                let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                })?;
                match key.trim() {
                    "qubits" => {
                        qubits = Some(value.trim().parse().map_err(|_| Error::Parse {
                            line,
                            msg: format!("invalid qubit count `{}`", value.trim()),
                        })?);
                    }
                    other => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown key `{other}`"),
                        })
                    }
                }
            }
            Section::Gates => gates.push(parse_gate(content, line)?),
            Section::Observable => {
                let (coeff_str, pauli_str) =
                    content.split_once(char::is_whitespace).ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("expected `coefficient PAULI`, got `{content}`"),
                    })?;
                let coeff: f64 = coeff_str.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("invalid coefficient `{coeff_str}`"),
                })?;
                let pauli = PauliString::parse(pauli_str.trim()).map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
                terms.push((coeff, pauli));
            }
        }
    }

    let qubits = qubits.ok_or_else(|| Error::Parse {
        line: 1,
        msg: "missing `qubits = <n>`".into(),
    })?;
    let circuit = ParamCircuit::new(qubits, gates)?;
    let observable = Observable::from_terms(qubits, terms)?;
    Ok(Problem {
        circuit,
        observable,
    })
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    parse_problem(&std::fs::read_to_string(path)?)
}

fn parse_gate(content: &str, line: usize) -> Result<Gate> {
    let mut parts = content.split_whitespace();
    let name = parts.next().unwrap_or_default();
    let mut q = None;
    let mut p = None;
    let mut c = None;
    let mut t = None;
    for tok in parts {
        let (key, value) = tok.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key=value` argument, got `{tok}`"),
        })?;
        let value: usize = value.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid index `{value}` in `{tok}`"),
        })?;
        match key {
            "q" => q = Some(value),
            "p" => p = Some(value),
            "c" => c = Some(value),
            "t" => t = Some(value),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown gate argument `{other}`"),
                })
            }
        }
    }
    let need = |v: Option<usize>, key: &str| {
        v.ok_or_else(|| Error::Parse {
            line,
            msg: format!("gate `{name}` requires `{key}=<index>`"),
        })
    };
    match name {
        "rx" | "ry" | "rz" => {
            let axis = match name {
                "rx" => Axis::X,
                "ry" => Axis::Y,
                _ => Axis::Z,
            };
            Ok(Gate::Rotation {
                axis,
                qubit: need(q, "q")?,
                param: need(p, "p")?,
            })
        }
        "h" => Ok(Gate::Hadamard { qubit: need(q, "q")? }),
        "cnot" => Ok(Gate::Cnot {
            control: need(c, "c")?,
            target: need(t, "t")?,
        }),
        "cz" => Ok(Gate::Cz {
            control: need(c, "c")?,
            target: need(t, "t")?,
        }),
        other => Err(Error::Parse {
            line,
            msg: format!("unknown gate `{other}`"),
        }),
    }
}
