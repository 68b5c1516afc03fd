//! Stochastic objective estimates with exact execution and shot accounting.
//!
//! Three noise modes: exact values, additive Gaussian noise, and finite-shot
//! sampling of observable eigenvalues with Born probabilities. Shot sampling
//! draws eigenvalues of the full observable in its joint eigenbasis, so a
//! single shot has variance at most `lambda_bar^2`.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::qsim::{self, Observable, ParamCircuit, Statevector};

/// Noise model applied to every estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    Exact,
    /// Additive zero-mean Gaussian noise with the given standard deviation.
    Gaussian(f64),
    /// Mean of `n` eigenvalue samples drawn with Born probabilities.
    Shots(u64),
}

impl NoiseMode {
    /// The variance bound `sigma^2` this mode guarantees for an observable.
    pub fn sigma_sq(&self, obs: &Observable) -> f64 {
        match self {
            NoiseMode::Exact => 0.0,
            NoiseMode::Gaussian(sigma) => sigma * sigma,
            NoiseMode::Shots(n) => variance_bound(obs, *n),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub mode: NoiseMode,
    pub seed: u64,
}

impl OracleConfig {
    pub fn exact() -> Self {
        OracleConfig {
            mode: NoiseMode::Exact,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            NoiseMode::Gaussian(sigma) if sigma < 0.0 => Err(crate::error::Error::Config(
                format!("gaussian sigma must be >= 0, got {sigma}"),
            )),
            NoiseMode::Shots(0) => Err(crate::error::Error::Config(
                "shot count must be >= 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Monotone execution/shot bookkeeping. Exact and Gaussian estimates count
/// one circuit execution and no shots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    pub circuit_executions: u64,
    pub total_shots: u64,
}

/// A seeded estimator stream. One oracle belongs to one trial; trials get
/// independent RNG streams via [`Oracle::for_trial`].
pub struct Oracle {
    config: OracleConfig,
    rng: ChaCha8Rng,
    pub counter: EvalCounter,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(Oracle {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            counter: EvalCounter::default(),
        })
    }

    /// Independent stream for trial `trial` of a master seed: same key,
    /// distinct counter-based stream index.
    pub fn for_trial(mode: NoiseMode, master_seed: u64, trial: u64) -> Result<Self> {
        let config = OracleConfig {
            mode,
            seed: master_seed,
        };
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trial);
        Ok(Oracle {
            config,
            rng,
            counter: EvalCounter::default(),
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn mode(&self) -> NoiseMode {
        self.config.mode
    }

    /// One noisy objective estimate; counts one circuit execution.
    pub fn estimate(
        &mut self,
        circuit: &ParamCircuit,
        obs: &Observable,
        theta: &[f64],
    ) -> Result<f64> {
        let state = qsim::apply_circuit(circuit, theta)?;
        self.estimate_state(&state, obs)
    }

    /// Noisy estimate from an already-simulated state.
    pub fn estimate_state(&mut self, state: &Statevector, obs: &Observable) -> Result<f64> {
        self.counter.circuit_executions += 1;
        match self.config.mode {
            NoiseMode::Exact => qsim::expectation(state, obs),
            NoiseMode::Gaussian(sigma) => {
                let noise: f64 = self.rng.sample(StandardNormal);
                Ok(qsim::expectation(state, obs)? + sigma * noise)
            }
            NoiseMode::Shots(n) => {
                self.counter.total_shots += n;
                let (values, cdf) = born_distribution(state, obs)?;
                let mut sum = 0.0;
                for _ in 0..n {
                    sum += sample_eigenvalue(&values, &cdf, &mut self.rng);
                }
                Ok(sum / n as f64)
            }
        }
    }

    /// `count` repeated estimates at a fixed point, sharing one simulation.
    /// Counts `count` executions.
    pub fn estimate_repeated(
        &mut self,
        circuit: &ParamCircuit,
        obs: &Observable,
        theta: &[f64],
        count: usize,
    ) -> Result<Vec<f64>> {
        let state = qsim::apply_circuit(circuit, theta)?;
        self.counter.circuit_executions += count as u64;
        match self.config.mode {
            NoiseMode::Exact => Ok(vec![qsim::expectation(&state, obs)?; count]),
            NoiseMode::Gaussian(sigma) => {
                let f = qsim::expectation(&state, obs)?;
                Ok((0..count)
                    .map(|_| f + sigma * self.rng.sample::<f64, _>(StandardNormal))
                    .collect())
            }
            NoiseMode::Shots(n) => {
                self.counter.total_shots += n * count as u64;
                let (values, cdf) = born_distribution(&state, obs)?;
                Ok((0..count)
                    .map(|_| {
                        let mut sum = 0.0;
                        for _ in 0..n {
                            sum += sample_eigenvalue(&values, &cdf, &mut self.rng);
                        }
                        sum / n as f64
                    })
                    .collect())
            }
        }
    }
}

/// Born probabilities of observable eigenvalues in the given state, as an
/// eigenvalue list and a cumulative distribution.
fn born_distribution(state: &Statevector, obs: &Observable) -> Result<(Vec<f64>, Vec<f64>)> {
    let eig = obs.eigensystem()?;
    let dim = state.amplitudes().len();
    let mut cdf = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for k in 0..dim {
        let mut overlap = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            overlap += eig.vectors[(i, k)].conj() * state.amplitudes()[i];
        }
        acc += overlap.norm_sqr();
        cdf.push(acc);
    }
    // normalize away float drift
    let total = acc;
    for p in cdf.iter_mut() {
        *p /= total;
    }
    Ok((eig.values.clone(), cdf))
}

fn sample_eigenvalue(values: &[f64], cdf: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    let idx = cdf.partition_point(|&p| p < u).min(values.len() - 1);
    values[idx]
}

/// Shot-noise variance bound `lambda_bar^2 / n`.
pub fn variance_bound(obs: &Observable, n: u64) -> f64 {
    let lb = obs.lambda_bar();
    lb * lb / n as f64
}

/// A stochastic objective that optimizers and fit routines evaluate. One
/// `estimate` call corresponds to a fixed number of circuit executions
/// recorded on the oracle's counter.
pub trait CostFn: Sync {
    fn dim(&self) -> usize;
    /// Noise-free value, not counted against any budget.
    fn exact(&self, theta: &[f64]) -> Result<f64>;
    /// Noisy estimate, counted on the oracle.
    fn estimate(&self, theta: &[f64], oracle: &mut Oracle) -> Result<f64>;
}

/// The plain circuit expectation objective.
#[derive(Clone, Copy)]
pub struct CircuitCost<'a> {
    pub circuit: &'a ParamCircuit,
    pub obs: &'a Observable,
}

impl<'a> CircuitCost<'a> {
    pub fn new(circuit: &'a ParamCircuit, obs: &'a Observable) -> Self {
        CircuitCost { circuit, obs }
    }
}

impl CostFn for CircuitCost<'_> {
    fn dim(&self) -> usize {
        self.circuit.param_dim()
    }

    fn exact(&self, theta: &[f64]) -> Result<f64> {
        qsim::objective(self.circuit, self.obs, theta)
    }

    fn estimate(&self, theta: &[f64], oracle: &mut Oracle) -> Result<f64> {
        oracle.estimate(self.circuit, self.obs, theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Axis, Gate, ParamCircuit, PauliString};

    fn rx_z() -> (ParamCircuit, Observable) {
        let c = ParamCircuit::new(
            1,
            vec![Gate::Rotation {
                axis: Axis::X,
                qubit: 0,
                param: 0,
            }],
        )
        .unwrap();
        let o = Observable::from_terms(1, vec![(1.0, PauliString::parse("Z").unwrap())]).unwrap();
        (c, o)
    }

    #[test]
    fn exact_mode_returns_objective() {
        let (c, o) = rx_z();
        let mut oracle = Oracle::new(OracleConfig::exact()).unwrap();
        assert_eq!(oracle.estimate(&c, &o, &[0.0]).unwrap(), 1.0);
        assert_eq!(oracle.counter.circuit_executions, 1);
        assert_eq!(oracle.counter.total_shots, 0);
    }

    #[test]
    fn zero_sigma_gaussian_equals_exact() {
        let (c, o) = rx_z();
        let mut oracle = Oracle::new(OracleConfig {
            mode: NoiseMode::Gaussian(0.0),
            seed: 3,
        })
        .unwrap();
        let theta = [0.731];
        let est = oracle.estimate(&c, &o, &theta).unwrap();
        assert_eq!(est, qsim::objective(&c, &o, &theta).unwrap());
    }

    #[test]
    fn shots_mean_approaches_exact_value() {
        // mean of 200 repeated Shots(1e5) estimates at theta = pi/3 within
        // 4 * lambda_bar / sqrt(n * reps) of cos(pi/3) = 0.5
        let (c, o) = rx_z();
        let n = 100_000u64;
        let reps = 200usize;
        let mut oracle = Oracle::new(OracleConfig {
            mode: NoiseMode::Shots(n),
            seed: 42,
        })
        .unwrap();
        let theta = [std::f64::consts::FRAC_PI_3];
        let ests = oracle.estimate_repeated(&c, &o, &theta, reps).unwrap();
        let mean = ests.iter().sum::<f64>() / reps as f64;
        let tol = 4.0 * o.lambda_bar() / ((n as f64 * reps as f64).sqrt());
        assert!((mean - 0.5).abs() < tol, "mean {mean}, tol {tol}");
        assert_eq!(oracle.counter.total_shots, n * reps as u64);
    }

    #[test]
    fn variance_bound_values() {
        let (_, o) = rx_z();
        assert!((variance_bound(&o, 100) - 0.01).abs() < 1e-15);
        let o2 =
            Observable::from_terms(1, vec![(2.0, PauliString::parse("Z").unwrap())]).unwrap();
        assert!((variance_bound(&o2, 1) - 4.0).abs() < 1e-12);
        let mixed = Observable::from_terms(
            2,
            vec![
                (0.5, PauliString::parse("ZZ").unwrap()),
                (0.5, PauliString::parse("XX").unwrap()),
            ],
        )
        .unwrap();
        // spectral radius 1 by dense eigensolve
        assert!((variance_bound(&mixed, 10) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn equal_seeds_reproduce_identical_sequences() {
        let (c, o) = rx_z();
        let cfg = OracleConfig {
            mode: NoiseMode::Shots(64),
            seed: 9,
        };
        let run = |cfg| {
            let mut oracle = Oracle::new(cfg).unwrap();
            (0..20)
                .map(|i| oracle.estimate(&c, &o, &[0.1 * i as f64]).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(cfg), run(cfg));
    }

    #[test]
    fn trial_streams_differ() {
        let (c, o) = rx_z();
        let mut a = Oracle::for_trial(NoiseMode::Gaussian(1.0), 7, 0).unwrap();
        let mut b = Oracle::for_trial(NoiseMode::Gaussian(1.0), 7, 1).unwrap();
        let ea = a.estimate(&c, &o, &[0.3]).unwrap();
        let eb = b.estimate(&c, &o, &[0.3]).unwrap();
        assert_ne!(ea, eb);
    }

    #[test]
    fn shots_mode_rejected_above_dense_limit() {
        // 11 qubits: statevector fine, dense eigendecomposition refused
        let gates = (0..11)
            .map(|q| Gate::Rotation {
                axis: Axis::Y,
                qubit: q,
                param: q,
            })
            .collect();
        let c = ParamCircuit::new(11, gates).unwrap();
        let o = Observable::from_terms(
            11,
            vec![(1.0, PauliString::parse("ZIIIIIIIIII").unwrap())],
        )
        .unwrap();
        let mut oracle = Oracle::new(OracleConfig {
            mode: NoiseMode::Shots(10),
            seed: 0,
        })
        .unwrap();
        let err = oracle.estimate(&c, &o, &vec![0.1; 11]).unwrap_err();
        assert!(err.to_string().contains("gaussian"));
    }

    #[test]
    fn counters_are_monotone() {
        let (c, o) = rx_z();
        let mut oracle = Oracle::new(OracleConfig {
            mode: NoiseMode::Shots(5),
            seed: 1,
        })
        .unwrap();
        let mut prev = oracle.counter;
        for i in 0..10 {
            oracle.estimate(&c, &o, &[i as f64]).unwrap();
            assert!(oracle.counter.circuit_executions >= prev.circuit_executions);
            assert!(oracle.counter.total_shots >= prev.total_shots);
            prev = oracle.counter;
        }
        assert_eq!(prev.circuit_executions, 10);
        assert_eq!(prev.total_shots, 50);
    }
}
