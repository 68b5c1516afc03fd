//! Three-point sinusoid reconstruction of the univariate restriction of the
//! objective, parameter-shift derivatives, and smoothness/PL constants.
//!
//! Restricting the objective to one Pauli-rotation angle gives
//! `f_j(phi) = A sin(phi + B) + C`. Three evaluations at the anchor and at
//! `anchor +- pi/2` determine the coefficients:
//! `c = (f+ + f-)/2`, `a = 2 f(anchor) - 2c`, `b = f+ - f-`,
//! `A = sqrt(a^2 + b^2)/2`, `B = atan2(a, b) - anchor`, `C = c`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{CircuitCost, CostFn, Oracle, OracleConfig};
use crate::qsim::{Observable, ParamCircuit};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Coefficients of the fitted univariate sinusoid, plus the raw anchor
/// evaluations they came from.
#[derive(Debug, Clone, Copy)]
pub struct SinusoidFit {
    /// `A >= 0`.
    pub amplitude: f64,
    /// `B`, normalized to `(-pi, pi]`; zero by convention for a flat fit.
    pub phase: f64,
    /// `C`.
    pub offset: f64,
    /// Raw `(a, b, c)` at the anchor.
    pub raw: (f64, f64, f64),
    /// The anchor angle the three evaluations were taken at.
    pub anchor: f64,
}

impl SinusoidFit {
    /// Builds the fit from three evaluations `f(anchor)`, `f(anchor + pi/2)`,
    /// `f(anchor - pi/2)`.
    pub fn from_evals(anchor: f64, f0: f64, f_plus: f64, f_minus: f64) -> Self {
        let c = 0.5 * (f_plus + f_minus);
        let a = 2.0 * f0 - 2.0 * c;
        let b = f_plus - f_minus;
        let amplitude = 0.5 * (a * a + b * b).sqrt();
        let phase = if a == 0.0 && b == 0.0 {
            0.0
        } else {
            wrap_angle(a.atan2(b) - anchor)
        };
        SinusoidFit {
            amplitude,
            phase,
            offset: c,
            raw: (a, b, c),
            anchor,
        }
    }

    pub fn is_flat(&self) -> bool {
        self.raw.0 == 0.0 && self.raw.1 == 0.0
    }

    pub fn reconstruct(&self, phi: f64) -> f64 {
        self.amplitude * (phi + self.phase).sin() + self.offset
    }
}

/// First/second derivative pair from the same three anchor evaluations.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeEstimate {
    /// Parameter-shift first derivative `(f+ - f-)/2`.
    pub g: f64,
    /// Diagonal second-derivative proxy `(f+ + f- - 2 f)/2 = -a/2`.
    pub h: f64,
    pub shots_used: u64,
}

/// Fits the restriction of `cost` to coordinate `j`, anchored at `theta[j]`.
/// Three oracle calls.
pub fn fit_univariate_cost(
    cost: &dyn CostFn,
    theta: &[f64],
    j: usize,
    oracle: &mut Oracle,
) -> Result<SinusoidFit> {
    let f0 = cost.estimate(theta, oracle)?;
    let mut shifted = theta.to_vec();
    shifted[j] = theta[j] + FRAC_PI_2;
    let f_plus = cost.estimate(&shifted, oracle)?;
    shifted[j] = theta[j] - FRAC_PI_2;
    let f_minus = cost.estimate(&shifted, oracle)?;
    Ok(SinusoidFit::from_evals(theta[j], f0, f_plus, f_minus))
}

pub fn fit_univariate(
    circuit: &ParamCircuit,
    obs: &Observable,
    theta: &[f64],
    j: usize,
    oracle: &mut Oracle,
) -> Result<SinusoidFit> {
    fit_univariate_cost(&CircuitCost::new(circuit, obs), theta, j, oracle)
}

/// Global minimizer of the fitted sinusoid and its value `-A + C`.
pub fn univariate_min(fit: &SinusoidFit) -> (f64, f64) {
    let phi_star = wrap_angle(-FRAC_PI_2 - fit.phase);
    (phi_star, -fit.amplitude + fit.offset)
}

/// Parameter-shift first derivative along `j`; two oracle calls.
pub fn psr_first_cost(
    cost: &dyn CostFn,
    theta: &[f64],
    j: usize,
    oracle: &mut Oracle,
) -> Result<f64> {
    let mut shifted = theta.to_vec();
    shifted[j] = theta[j] + FRAC_PI_2;
    let f_plus = cost.estimate(&shifted, oracle)?;
    shifted[j] = theta[j] - FRAC_PI_2;
    let f_minus = cost.estimate(&shifted, oracle)?;
    Ok(0.5 * (f_plus - f_minus))
}

pub fn psr_first(
    circuit: &ParamCircuit,
    obs: &Observable,
    theta: &[f64],
    j: usize,
    oracle: &mut Oracle,
) -> Result<f64> {
    psr_first_cost(&CircuitCost::new(circuit, obs), theta, j, oracle)
}

/// First and second derivatives from the three shared anchor evaluations.
pub fn psr_derivatives_cost(
    cost: &dyn CostFn,
    theta: &[f64],
    j: usize,
    oracle: &mut Oracle,
) -> Result<DerivativeEstimate> {
    let shots_before = oracle.counter.total_shots;
    let fit = fit_univariate_cost(cost, theta, j, oracle)?;
    let (a, b, _) = fit.raw;
    Ok(DerivativeEstimate {
        g: 0.5 * b,
        h: -0.5 * a,
        shots_used: oracle.counter.total_shots - shots_before,
    })
}

/// Diagonal second derivative `h_j`; three oracle calls.
pub fn psr_second_diag(
    circuit: &ParamCircuit,
    obs: &Observable,
    theta: &[f64],
    j: usize,
    oracle: &mut Oracle,
) -> Result<f64> {
    let est = psr_derivatives_cost(&CircuitCost::new(circuit, obs), theta, j, oracle)?;
    Ok(est.h)
}

/// Largest coordinate-wise PL constant valid at `phi` for the fitted
/// sinusoid: `A cos^2(phi+B) / (2 (1 + sin(phi+B)))`. At the minimizer the
/// expression is a 0/0 form whose limit is `A`.
pub fn pl_bound_at(fit: &SinusoidFit, phi: f64) -> Result<f64> {
    if fit.amplitude == 0.0 {
        return Err(Error::FlatDirection);
    }
    let s = (phi + fit.phase).sin();
    let c = (phi + fit.phase).cos();
    if 1.0 + s < 1e-12 {
        // limit at the minimizer; equals A by the half-angle identity
        // cos^2 / (2 (1 + sin)) = (1 - sin) / 2
        return Ok(fit.amplitude);
    }
    Ok(fit.amplitude * c * c / (2.0 * (1.0 + s)))
}

/// Per-coordinate smoothness estimates and derived aggregates.
#[derive(Debug, Clone)]
pub struct LandscapeConstants {
    /// `L_j` per coordinate.
    pub per_coord: Vec<f64>,
    /// `L = sum_j L_j`.
    pub total: f64,
    /// `L_max`.
    pub max: f64,
    /// `L / d`.
    pub mean: f64,
    /// Spectral constant `u = (1 + sqrt 2) lambda_max`.
    pub u: f64,
}

impl LandscapeConstants {
    pub fn from_per_coord(per_coord: Vec<f64>, lambda_max: f64) -> Self {
        let total: f64 = per_coord.iter().sum();
        let max = per_coord.iter().copied().fold(0.0, f64::max);
        let mean = total / per_coord.len().max(1) as f64;
        LandscapeConstants {
            per_coord,
            total,
            max,
            mean,
            u: (1.0 + std::f64::consts::SQRT_2) * lambda_max,
        }
    }
}

/// Estimates `L_j` as the largest fitted amplitude over `trials` random
/// frozen-coordinate settings. The amplitude bounds `|f_j''|`, which is the
/// coordinate-wise Lipschitz constant of the gradient.
pub fn estimate_smoothness(
    circuit: &ParamCircuit,
    obs: &Observable,
    j: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = Oracle::new(OracleConfig::exact())?;
    let d = circuit.param_dim();
    let mut best: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-PI..PI)).collect();
        let fit = fit_univariate(circuit, obs, &theta, j, &mut oracle)?;
        best = best.max(fit.amplitude);
    }
    Ok(best)
}

/// Runs [`estimate_smoothness`] for every coordinate and assembles the
/// aggregate constants.
pub fn landscape_constants(
    circuit: &ParamCircuit,
    obs: &Observable,
    trials: usize,
    seed: u64,
) -> Result<LandscapeConstants> {
    let per_coord = (0..circuit.param_dim())
        .map(|j| estimate_smoothness(circuit, obs, j, trials, seed.wrapping_add(j as u64)))
        .collect::<Result<Vec<_>>>()?;
    let (_, lambda_max) = obs.spectral_bounds();
    Ok(LandscapeConstants::from_per_coord(per_coord, lambda_max))
}
