//! Coordinate minimization for finite-sum losses from binary classification,
//! plus the synthetic two-blob benchmark.
//!
//! The loss is `L(theta) = (1/2K) sum_k (1 - y_k f(x_k, theta))` with circuit
//! scores `f in [-1, 1]`. Restricted to one coordinate, each per-sample loss
//! is `a sin(theta_j) + b cos(theta_j) + c`; the coefficients come from
//! evaluations at the absolute angles `{0, pi/2, pi}` and the coordinate
//! update is `theta_j = atan2(a_j, b_j) + pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oracle::{CostFn, NoiseMode, Oracle};
use crate::optim::{OptimizerTrace, TraceRecord};
use crate::qsim::{self, Axis, Gate, Observable, ParamCircuit, PauliString};
use crate::trig::wrap_angle;

/// Labeled feature vectors; labels are strictly +1 / -1.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<(Vec<f64>, i8)>,
}

impl Dataset {
    pub fn new(samples: Vec<(Vec<f64>, i8)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("dataset must contain at least one sample".into()));
        }
        for (x, y) in &samples {
            if *y != 1 && *y != -1 {
                return Err(Error::Config(format!("label must be +1 or -1, got {y}")));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("features must be finite".into()));
            }
        }
        Ok(Dataset { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(Vec<f64>, i8)] {
        &self.samples
    }

    /// CSV with header `x1,x2,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,y\n");
        for (x, y) in &self.samples {
            out.push_str(&format!("{},{},{}\n", x[0], x[1], y));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 {
                continue; // header
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("invalid number `{s}`"),
                })
            };
            let y = fields[2].trim().parse::<i8>().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid label `{}`", fields[2]),
            })?;
            samples.push((vec![parse(fields[0])?, parse(fields[1])?], y));
        }
        Dataset::new(samples)
    }
}

/// Angle-encoding classifier: RY(x_i) per feature qubit, then `layers`
/// blocks of per-qubit RY/RZ rotations and a CNOT ring, read out by Z on
/// qubit 0.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    qubit_count: usize,
    layers: usize,
    readout: Observable,
}

impl ClassifierModel {
    pub fn new(feature_dim: usize, layers: usize) -> Result<Self> {
        if feature_dim == 0 || layers == 0 {
            return Err(Error::Config("feature_dim and layers must be >= 1".into()));
        }
        let mut z = vec!['I'; feature_dim];
        z[0] = 'Z';
        let readout = Observable::from_terms(
            feature_dim,
            vec![(1.0, PauliString::parse(&z.iter().collect::<String>())?)],
        )?;
        Ok(ClassifierModel {
            qubit_count: feature_dim,
            layers,
            readout,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn param_dim(&self) -> usize {
        2 * self.qubit_count * self.layers
    }

    pub fn readout(&self) -> &Observable {
        &self.readout
    }

    /// Encoder prefix (fixed RY(x_i) gates) followed by the ansatz.
    pub fn circuit_for(&self, x: &[f64]) -> Result<ParamCircuit> {
        if x.len() != self.qubit_count {
            return Err(Error::ParamShape {
                expected: self.qubit_count,
                got: x.len(),
            });
        }
        let n = self.qubit_count;
        let mut gates = Vec::new();
        for (q, &xi) in x.iter().enumerate() {
            let c = (xi / 2.0).cos();
            let s = (xi / 2.0).sin();
            let m = [
                [num_complex::Complex64::new(c, 0.0), num_complex::Complex64::new(-s, 0.0)],
                [num_complex::Complex64::new(s, 0.0), num_complex::Complex64::new(c, 0.0)],
            ];
            gates.push(Gate::unitary1(q, m)?);
        }
        let mut p = 0;
        for _ in 0..self.layers {
            for q in 0..n {
                gates.push(Gate::Rotation { axis: Axis::Y, qubit: q, param: p });
                p += 1;
                gates.push(Gate::Rotation { axis: Axis::Z, qubit: q, param: p });
                p += 1;
            }
            if n > 1 {
                for q in 0..n {
                    gates.push(Gate::Cnot { control: q, target: (q + 1) % n });
                }
            }
        }
        ParamCircuit::new(n, gates)
    }

    /// Circuit score `f(x, theta) in [-1, 1]`.
    pub fn score(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        qsim::objective(&self.circuit_for(x)?, &self.readout, theta)
    }
}

/// Full-batch training loss; one circuit execution per sample when counted
/// through an oracle.
pub fn loss(
    model: &ClassifierModel,
    theta: &[f64],
    dataset: &Dataset,
    oracle: &mut Oracle,
) -> Result<f64> {
    let k = dataset.len() as f64;
    let mut acc = 0.0;
    for (x, y) in dataset.samples() {
        let circuit = model.circuit_for(x)?;
        let f = oracle.estimate(&circuit, &model.readout, theta)?;
        acc += 1.0 - *y as f64 * f;
    }
    Ok(acc / (2.0 * k))
}

/// Noise-free loss, not counted anywhere.
pub fn exact_loss(model: &ClassifierModel, theta: &[f64], dataset: &Dataset) -> Result<f64> {
    let k = dataset.len() as f64;
    let mut acc = 0.0;
    for (x, y) in dataset.samples() {
        acc += 1.0 - *y as f64 * model.score(x, theta)?;
    }
    Ok(acc / (2.0 * k))
}

/// Per-sample sinusoid coefficients for the active coordinate, plus their
/// aggregates `a_j`, `b_j` (means over samples).
#[derive(Debug, Clone)]
pub struct PerSampleCoeffs {
    pub per_sample: Vec<(f64, f64, f64)>,
    pub a: f64,
    pub b: f64,
}

/// Evaluates each sample's loss with `theta_j` set to 0, pi/2, pi
/// (3K executions) and extracts the per-sample and aggregated coefficients.
pub fn fit_coeffs(
    model: &ClassifierModel,
    theta: &[f64],
    j: usize,
    dataset: &Dataset,
    oracle: &mut Oracle,
) -> Result<PerSampleCoeffs> {
    let mut per_sample = Vec::with_capacity(dataset.len());
    let mut probe = theta.to_vec();
    for (x, y) in dataset.samples() {
        let circuit = model.circuit_for(x)?;
        let eval = |angle: f64, probe: &mut Vec<f64>, oracle: &mut Oracle| -> Result<f64> {
            probe[j] = angle;
            let f = oracle.estimate(&circuit, &model.readout, probe)?;
            Ok(0.5 * (1.0 - *y as f64 * f))
        };
        let l0 = eval(0.0, &mut probe, oracle)?;
        let l_half = eval(FRAC_PI_2, &mut probe, oracle)?;
        let l_pi = eval(PI, &mut probe, oracle)?;
        let a = (2.0 * l_half - l0 - l_pi) / 2.0;
        let b = (l0 - l_pi) / 2.0;
        let c = (l0 + l_pi) / 2.0;
        per_sample.push((a, b, c));
    }
    let k = dataset.len() as f64;
    let a = per_sample.iter().map(|(a, _, _)| a).sum::<f64>() / k;
    let b = per_sample.iter().map(|(_, b, _)| b).sum::<f64>() / k;
    Ok(PerSampleCoeffs { per_sample, a, b })
}

/// One coordinate-minimization step on the finite-sum loss:
/// `theta_j = atan2(a_j, b_j) + pi`, the global minimizer of
/// `a sin + b cos`. Returns `(theta', j, stalled)`.
pub fn finitesum_rotosolve_step(
    model: &ClassifierModel,
    theta: &[f64],
    dataset: &Dataset,
    oracle: &mut Oracle,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, usize, bool)> {
    let j = rng.gen_range(0..model.param_dim());
    let coeffs = fit_coeffs(model, theta, j, dataset, oracle)?;
    let mut next = theta.to_vec();
    if coeffs.a == 0.0 && coeffs.b == 0.0 {
        return Ok((next, j, true));
    }
    next[j] = wrap_angle(coeffs.a.atan2(coeffs.b) + PI);
    Ok((next, j, false))
}

/// Runs finite-sum coordinate minimization, producing a trace comparable to
/// the generic optimizer runs. Stops early once `max_executions` is hit.
pub fn run_finitesum_rotosolve(
    model: &ClassifierModel,
    dataset: &Dataset,
    theta0: &[f64],
    iterations: usize,
    noise: NoiseMode,
    seed: u64,
    max_executions: Option<u64>,
) -> Result<OptimizerTrace> {
    if iterations == 0 {
        return Err(Error::Config("iteration budget must be >= 1".into()));
    }
    let mut oracle = Oracle::for_trial(noise, seed, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut theta = theta0.to_vec();
    let mut records = Vec::with_capacity(iterations + 1);
    records.push(TraceRecord {
        t: 0,
        coordinate: None,
        theta: theta.clone(),
        f_exact: exact_loss(model, &theta, dataset)?,
        circuit_executions: 0,
        total_shots: 0,
        stalled: false,
    });
    for t in 1..=iterations {
        if let Some(budget) = max_executions {
            if oracle.counter.circuit_executions >= budget {
                break;
            }
        }
        let (next, j, stalled) = finitesum_rotosolve_step(model, &theta, dataset, &mut oracle, &mut rng)?;
        theta = next;
        records.push(TraceRecord {
            t,
            coordinate: Some(j),
            theta: theta.clone(),
            f_exact: exact_loss(model, &theta, dataset)?,
            circuit_executions: oracle.counter.circuit_executions,
            total_shots: oracle.counter.total_shots,
            stalled,
        });
    }
    Ok(OptimizerTrace {
        kind: crate::optim::OptimizerKind::Rotosolve,
        seed,
        records,
    })
}

/// The finite-sum loss as a generic cost function, so the baseline
/// optimizers run against it with full-batch estimates.
pub struct FinitesumCost<'a> {
    pub model: &'a ClassifierModel,
    pub dataset: &'a Dataset,
}

impl CostFn for FinitesumCost<'_> {
    fn dim(&self) -> usize {
        self.model.param_dim()
    }

    fn exact(&self, theta: &[f64]) -> Result<f64> {
        exact_loss(self.model, theta, self.dataset)
    }

    fn estimate(&self, theta: &[f64], oracle: &mut Oracle) -> Result<f64> {
        loss(self.model, theta, self.dataset, oracle)
    }
}

/// Two Gaussian blobs at (+1, +1) / (-1, -1) with spread 0.3, K/2 samples
/// per label, angle-encoded on two qubits. Deterministic under `seed`.
pub fn make_benchmark(seed: u64, k: usize, layers: usize) -> Result<(ClassifierModel, Dataset)> {
    if k < 2 {
        return Err(Error::Config("benchmark needs K >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 0.3;
    let mut samples = Vec::with_capacity(k);
    for i in 0..k {
        let (center, y) = if i < k / 2 { (1.0, 1) } else { (-1.0, -1) };
        let x: Vec<f64> = (0..2)
            .map(|_| center + spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        samples.push((x, y));
    }
    let model = ClassifierModel::new(2, layers)?;
    Ok((model, Dataset::new(samples)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::OracleConfig;
    use std::f64::consts::TAU;

    fn exact_oracle() -> Oracle {
        Oracle::new(OracleConfig::exact()).unwrap()
    }

    /// Single-sample model whose score is cos(theta): 1 qubit, 1 layer but
    /// with the RZ parameter irrelevant to the Z readout.
    fn cosine_model() -> (ClassifierModel, Dataset) {
        let model = ClassifierModel::new(1, 1).unwrap();
        let dataset = Dataset::new(vec![(vec![0.0], 1)]).unwrap();
        (model, dataset)
    }

    #[test]
    fn loss_of_perfect_and_neutral_scores() {
        let (model, _) = cosine_model();
        // y=+1, f = cos(theta_0) with theta_1 (RZ) irrelevant
        let dataset = Dataset::new(vec![(vec![0.0], 1)]).unwrap();
        // theta = 0 -> f = 1 -> loss 0
        assert!(exact_loss(&model, &[0.0, 0.0], &dataset).unwrap().abs() < 1e-12);
        // f = 0 at theta_0 = pi/2 -> loss 0.5
        assert!(
            (exact_loss(&model, &[FRAC_PI_2, 0.0], &dataset).unwrap() - 0.5).abs() < 1e-12
        );
    }

    #[test]
    fn single_sample_cosine_loss_value() {
        // K=1, y=+1, f = cos theta, theta = pi/3 -> (1 - 0.5)/2 = 0.25
        let (model, dataset) = cosine_model();
        let l = exact_loss(&model, &[PI / 3.0, 0.0], &dataset).unwrap();
        assert!((l - 0.25).abs() < 1e-12);
    }

    #[test]
    fn loss_stays_in_unit_interval() {
        let (model, dataset) = make_benchmark(3, 16, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..model.param_dim()).map(|_| rng.gen_range(-PI..PI)).collect();
            let l = exact_loss(&model, &theta, &dataset).unwrap();
            assert!((0.0..=1.0).contains(&l), "loss {l}");
        }
    }

    #[test]
    fn fit_coeffs_on_cosine_sample() {
        // L = (1 - cos theta)/2: L(0)=0, L(pi/2)=0.5, L(pi)=1 -> a=0, b=-0.5
        let (model, dataset) = cosine_model();
        let coeffs = fit_coeffs(&model, &[0.3, 0.0], 0, &dataset, &mut exact_oracle()).unwrap();
        assert!(coeffs.a.abs() < 1e-12);
        assert!((coeffs.b + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_coeffs_all_zero_losses() {
        // constant readout I: f = 1 so with y=+1 the loss is identically 0
        let mut model = cosine_model().0;
        model.readout =
            Observable::from_terms(1, vec![(1.0, PauliString::parse("I").unwrap())]).unwrap();
        let dataset = Dataset::new(vec![(vec![0.0], 1)]).unwrap();
        let coeffs = fit_coeffs(&model, &[0.3, 0.0], 0, &dataset, &mut exact_oracle()).unwrap();
        assert_eq!(coeffs.a, 0.0);
        assert_eq!(coeffs.b, 0.0);
    }

    #[test]
    fn aggregated_sinusoid_reconstructs_loss_on_grid() {
        let (model, dataset) = make_benchmark(5, 32, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta: Vec<f64> = (0..model.param_dim()).map(|_| rng.gen_range(-PI..PI)).collect();
        let j = 1;
        let coeffs = fit_coeffs(&model, &theta, j, &dataset, &mut exact_oracle()).unwrap();
        let c_mean =
            coeffs.per_sample.iter().map(|(_, _, c)| c).sum::<f64>() / dataset.len() as f64;
        let mut probe = theta.clone();
        for k in 0..50 {
            let phi = -PI + TAU * k as f64 / 50.0;
            probe[j] = phi;
            let direct = exact_loss(&model, &probe, &dataset).unwrap();
            let recon = coeffs.a * phi.sin() + coeffs.b * phi.cos() + c_mean;
            assert!((direct - recon).abs() < 1e-9, "phi {phi}: {direct} vs {recon}");
        }
    }

    #[test]
    fn per_sample_sinusoid_reconstructs_each_loss() {
        let (model, dataset) = make_benchmark(7, 8, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta: Vec<f64> = (0..model.param_dim()).map(|_| rng.gen_range(-PI..PI)).collect();
        let j = 2;
        let coeffs = fit_coeffs(&model, &theta, j, &dataset, &mut exact_oracle()).unwrap();
        let mut probe = theta.clone();
        for (k, (x, y)) in dataset.samples().iter().enumerate() {
            let (a, b, c) = coeffs.per_sample[k];
            for g in 0..20 {
                let phi = -PI + TAU * g as f64 / 20.0;
                probe[j] = phi;
                let direct = 0.5 * (1.0 - *y as f64 * model.score(x, &probe).unwrap());
                let recon = a * phi.sin() + b * phi.cos() + c;
                assert!((direct - recon).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn aggregation_is_mean_of_per_sample() {
        let (model, dataset) = make_benchmark(9, 16, 1).unwrap();
        let theta = vec![0.2; model.param_dim()];
        let coeffs = fit_coeffs(&model, &theta, 0, &dataset, &mut exact_oracle()).unwrap();
        let a_mean =
            coeffs.per_sample.iter().map(|(a, _, _)| a).sum::<f64>() / dataset.len() as f64;
        let b_mean =
            coeffs.per_sample.iter().map(|(_, b, _)| b).sum::<f64>() / dataset.len() as f64;
        assert!((coeffs.a - a_mean).abs() < 1e-12);
        assert!((coeffs.b - b_mean).abs() < 1e-12);
    }

    #[test]
    fn update_angle_examples() {
        // a=0, b=-0.5 -> atan2(0,-0.5) + pi = 2 pi = 0
        assert!(wrap_angle(0.0f64.atan2(-0.5) + PI).abs() < 1e-12);
        // a=1, b=0 -> pi/2 + pi = -pi/2
        assert!((wrap_angle(1.0f64.atan2(0.0) + PI) + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn update_is_globally_optimal_on_grid() {
        let (model, dataset) = make_benchmark(11, 16, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let theta: Vec<f64> = (0..model.param_dim()).map(|_| rng.gen_range(-PI..PI)).collect();
        let mut step_rng = ChaCha8Rng::seed_from_u64(1);
        let (next, j, stalled) =
            finitesum_rotosolve_step(&model, &theta, &dataset, &mut exact_oracle(), &mut step_rng)
                .unwrap();
        assert!(!stalled);
        let best = exact_loss(&model, &next, &dataset).unwrap();
        let mut probe = next.clone();
        for g in 0..360 {
            let phi = -PI + TAU * g as f64 / 360.0;
            probe[j] = phi;
            let l = exact_loss(&model, &probe, &dataset).unwrap();
            assert!(best <= l + 1e-9, "grid point {phi} beats update: {l} < {best}");
        }
    }

    #[test]
    fn exact_mode_monotone_descent() {
        let (model, dataset) = make_benchmark(13, 32, 2).unwrap();
        let theta0 = vec![0.1; model.param_dim()];
        let trace = run_finitesum_rotosolve(
            &model,
            &dataset,
            &theta0,
            100,
            NoiseMode::Exact,
            21,
            None,
        )
        .unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].f_exact <= w[0].f_exact + 1e-9);
        }
    }

    #[test]
    fn trained_model_separates_blobs() {
        let (model, dataset) = make_benchmark(17, 32, 2).unwrap();
        let theta0 = vec![0.1; model.param_dim()];
        let trace = run_finitesum_rotosolve(
            &model,
            &dataset,
            &theta0,
            150,
            NoiseMode::Exact,
            33,
            None,
        )
        .unwrap();
        assert!(trace.final_f() < 0.15, "final loss {}", trace.final_f());
    }

    #[test]
    fn benchmark_is_deterministic_and_minimal_k_works() {
        let (_, d1) = make_benchmark(99, 32, 1).unwrap();
        let (_, d2) = make_benchmark(99, 32, 1).unwrap();
        assert_eq!(d1.to_csv(), d2.to_csv());
        let (model, tiny) = make_benchmark(1, 2, 1).unwrap();
        assert!(exact_loss(&model, &vec![0.0; model.param_dim()], &tiny).is_ok());
    }

    #[test]
    fn dataset_csv_round_trip_and_label_validation() {
        let (_, d) = make_benchmark(3, 8, 1).unwrap();
        let csv = d.to_csv();
        let back = Dataset::from_csv(&csv).unwrap();
        assert_eq!(back.to_csv(), csv);
        assert!(Dataset::new(vec![(vec![0.0], 2)]).is_err());
        assert!(Dataset::new(vec![(vec![f64::NAN], 1)]).is_err());
    }

    #[test]
    fn execution_accounting_3k_per_fit() {
        let (model, dataset) = make_benchmark(5, 8, 1).unwrap();
        let mut oracle = exact_oracle();
        let theta = vec![0.0; model.param_dim()];
        fit_coeffs(&model, &theta, 0, &dataset, &mut oracle).unwrap();
        assert_eq!(oracle.counter.circuit_executions, 3 * 8);
        loss(&model, &theta, &dataset, &mut oracle).unwrap();
        assert_eq!(oracle.counter.circuit_executions, 4 * 8);
    }
}
