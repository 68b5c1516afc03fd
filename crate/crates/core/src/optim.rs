//! Five optimizers behind one interface: sinusoid-fit coordinate
//! minimization (Rotosolve), randomized coordinate descent (RCD), full
//! parameter-shift SGD, SPSA, and Gaussian-smoothing RSGF.
//!
//! Per-iteration circuit executions: Rotosolve 3, RCD 2, SGD 2d, SPSA 2,
//! RSGF 2. Updates consume noisy estimates only; the recorded objective at
//! each iterate is computed noise-free for reporting.

use std::f64::consts::FRAC_PI_2;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oracle::{CostFn, NoiseMode, Oracle};
use crate::trig::{self, wrap_angle};

/// Which optimizer, with its numeric hyperparameters. Sinusoid-fit
/// coordinate minimization deliberately carries none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Rotosolve,
    Rcd { alpha: f64 },
    Sgd { alpha: f64 },
    Spsa { alpha: f64, c: f64 },
    Rsgf { alpha: f64, nu: f64 },
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Rotosolve => "rotosolve",
            OptimizerKind::Rcd { .. } => "rcd",
            OptimizerKind::Sgd { .. } => "sgd",
            OptimizerKind::Spsa { .. } => "spsa",
            OptimizerKind::Rsgf { .. } => "rsgf",
        }
    }

    /// Circuit executions per iteration for a `d`-parameter problem.
    pub fn executions_per_iter(&self, d: usize) -> u64 {
        match self {
            OptimizerKind::Rotosolve => 3,
            OptimizerKind::Rcd { .. } => 2,
            OptimizerKind::Sgd { .. } => 2 * d as u64,
            OptimizerKind::Spsa { .. } => 2,
            OptimizerKind::Rsgf { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be > 0, got {v}")))
            }
        };
        match *self {
            OptimizerKind::Rotosolve => Ok(()),
            OptimizerKind::Rcd { alpha } | OptimizerKind::Sgd { alpha } => {
                positive(alpha, "step size")
            }
            OptimizerKind::Spsa { alpha, c } => {
                positive(alpha, "step size")?;
                positive(c, "perturbation")
            }
            OptimizerKind::Rsgf { alpha, nu } => {
                positive(alpha, "step size")?;
                positive(nu, "smoothing radius")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Iteration budget `T >= 1`.
    pub iterations: usize,
    pub seed: u64,
    /// Optional circuit-execution budget; iterations stop once reached.
    pub max_executions: Option<u64>,
}

/// One row of a trace: state after iteration `t` (`t = 0` is the start).
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub t: usize,
    /// Coordinate updated at this iteration, if the step is coordinate-local.
    pub coordinate: Option<usize>,
    pub theta: Vec<f64>,
    /// Noise-free objective at `theta`, for reporting only.
    pub f_exact: f64,
    pub circuit_executions: u64,
    pub total_shots: u64,
    /// A flat direction made this step a no-op.
    pub stalled: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    pub kind: OptimizerKind,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
}

impl OptimizerTrace {
    pub fn final_f(&self) -> f64 {
        self.records.last().expect("trace is never empty").f_exact
    }

    pub fn final_theta(&self) -> &[f64] {
        &self.records.last().expect("trace is never empty").theta
    }
}

/// Outcome of one step: the new point plus what the trace needs to log.
struct StepOutcome {
    theta: Vec<f64>,
    coordinate: Option<usize>,
    stalled: bool,
}

/// One sinusoid-fit coordinate-minimization step: sample `j`, fit the
/// univariate restriction at `theta[j]` from three estimates, and move the
/// coordinate to the fitted minimizer
/// `theta'_j = theta_j - pi/2 - atan2(a, b)`.
pub fn rotosolve_step(
    cost: &dyn CostFn,
    theta: &[f64],
    oracle: &mut Oracle,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Option<usize>, bool)> {
    let j = rng.gen_range(0..cost.dim());
    let fit = trig::fit_univariate_cost(cost, theta, j, oracle)?;
    let mut next = theta.to_vec();
    if fit.is_flat() {
        return Ok((next, Some(j), true));
    }
    let (a, b, _) = fit.raw;
    next[j] = wrap_angle(theta[j] - FRAC_PI_2 - a.atan2(b));
    Ok((next, Some(j), false))
}

/// One randomized coordinate descent step with a parameter-shift gradient.
pub fn rcd_step(
    cost: &dyn CostFn,
    theta: &[f64],
    alpha: f64,
    oracle: &mut Oracle,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Option<usize>)> {
    let j = rng.gen_range(0..cost.dim());
    let g = trig::psr_first_cost(cost, theta, j, oracle)?;
    let mut next = theta.to_vec();
    next[j] = wrap_angle(theta[j] - alpha * g);
    Ok((next, Some(j)))
}

/// Full-gradient step assembled from `d` parameter-shift pairs.
pub fn sgd_step(cost: &dyn CostFn, theta: &[f64], alpha: f64, oracle: &mut Oracle) -> Result<Vec<f64>> {
    let mut next = theta.to_vec();
    let mut grad = vec![0.0; cost.dim()];
    for (j, g) in grad.iter_mut().enumerate() {
        *g = trig::psr_first_cost(cost, theta, j, oracle)?;
    }
    for (x, g) in next.iter_mut().zip(grad.iter()) {
        *x = wrap_angle(*x - alpha * g);
    }
    Ok(next)
}

/// Simultaneous-perturbation step: one Rademacher direction, two estimates.
pub fn spsa_step(
    cost: &dyn CostFn,
    theta: &[f64],
    alpha: f64,
    c: f64,
    oracle: &mut Oracle,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let d = cost.dim();
    let delta: Vec<f64> = (0..d)
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(x, dl)| x + c * dl).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(x, dl)| x - c * dl).collect();
    let diff = (cost.estimate(&plus, oracle)? - cost.estimate(&minus, oracle)?) / (2.0 * c);
    // delta_i in {+-1} so delta_i^{-1} = delta_i
    Ok(theta
        .iter()
        .zip(&delta)
        .map(|(x, dl)| wrap_angle(x - alpha * diff * dl))
        .collect())
}

/// Gaussian-smoothing gradient-free step: forward difference along a
/// standard normal direction, two estimates.
pub fn rsgf_step(
    cost: &dyn CostFn,
    theta: &[f64],
    alpha: f64,
    nu: f64,
    oracle: &mut Oracle,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let d = cost.dim();
    let u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let shifted: Vec<f64> = theta.iter().zip(&u).map(|(x, ui)| x + nu * ui).collect();
    let scale = (cost.estimate(&shifted, oracle)? - cost.estimate(theta, oracle)?) / nu;
    Ok(theta
        .iter()
        .zip(&u)
        .map(|(x, ui)| wrap_angle(x - alpha * scale * ui))
        .collect())
}

fn step(
    kind: OptimizerKind,
    cost: &dyn CostFn,
    theta: &[f64],
    oracle: &mut Oracle,
    rng: &mut ChaCha8Rng,
) -> Result<StepOutcome> {
    let (theta, coordinate, stalled) = match kind {
        OptimizerKind::Rotosolve => rotosolve_step(cost, theta, oracle, rng)?,
        OptimizerKind::Rcd { alpha } => {
            let (t, j) = rcd_step(cost, theta, alpha, oracle, rng)?;
            (t, j, false)
        }
        OptimizerKind::Sgd { alpha } => (sgd_step(cost, theta, alpha, oracle)?, None, false),
        OptimizerKind::Spsa { alpha, c } => {
            (spsa_step(cost, theta, alpha, c, oracle, rng)?, None, false)
        }
        OptimizerKind::Rsgf { alpha, nu } => {
            (rsgf_step(cost, theta, alpha, nu, oracle, rng)?, None, false)
        }
    };
    Ok(StepOutcome {
        theta,
        coordinate,
        stalled,
    })
}

/// Runs `config.iterations` steps from `theta0`, recording every iterate.
/// The oracle drawn from `(noise, config.seed)` feeds the updates; the
/// optimizer's own coordinate/direction randomness uses a separate stream of
/// the same seed, so traces are reproducible end to end.
pub fn run(
    config: &OptimizerConfig,
    cost: &dyn CostFn,
    theta0: &[f64],
    noise: NoiseMode,
) -> Result<OptimizerTrace> {
    config.kind.validate()?;
    if config.iterations == 0 {
        return Err(Error::Config("iteration budget must be >= 1".into()));
    }
    if theta0.len() != cost.dim() {
        return Err(Error::ParamShape {
            expected: cost.dim(),
            got: theta0.len(),
        });
    }
    let mut oracle = Oracle::for_trial(noise, config.seed, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(u64::MAX); // keep optimizer randomness off the oracle stream

    let mut theta = theta0.to_vec();
    let mut records = Vec::with_capacity(config.iterations + 1);
    records.push(TraceRecord {
        t: 0,
        coordinate: None,
        theta: theta.clone(),
        f_exact: cost.exact(&theta)?,
        circuit_executions: 0,
        total_shots: 0,
        stalled: false,
    });
    for t in 1..=config.iterations {
        if let Some(budget) = config.max_executions {
            if oracle.counter.circuit_executions >= budget {
                break;
            }
        }
        let outcome = step(config.kind, cost, &theta, &mut oracle, &mut rng)?;
        theta = outcome.theta;
        records.push(TraceRecord {
            t,
            coordinate: outcome.coordinate,
            theta: theta.clone(),
            f_exact: cost.exact(&theta)?,
            circuit_executions: oracle.counter.circuit_executions,
            total_shots: oracle.counter.total_shots,
            stalled: outcome.stalled,
        });
    }
    Ok(OptimizerTrace {
        kind: config.kind,
        seed: config.seed,
        records,
    })
}
