//! Implementations behind the command-line subcommands. Each command takes
//! a parsed [`ExperimentConfig`] plus flags and returns a process exit code,
//! so the binary itself stays a thin argument-parsing shell.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, LoadedProblem};
use crate::error::{Error, Result};
use crate::finitesum::{self, FinitesumCost};
use crate::oracle::{CircuitCost, CostFn, NoiseMode, Oracle, OracleConfig};
use crate::optim::{self, OptimizerConfig, OptimizerKind, OptimizerTrace};
use crate::trig;
use crate::verify::{self, RateTarget, TheoryReport};

/// Fits every coordinate of the objective at the configured initial point
/// and reports amplitude, phase, offset, both derivatives, and the residuals
/// of the amplitude/offset identities. Returns the rendered table.
pub fn cmd_fit(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<String> {
    let problem = config.problem.load()?;
    let LoadedProblem::Circuit(p) = &problem else {
        return Err(Error::Config("fit requires a circuit problem file".into()));
    };
    let cost = CircuitCost::new(&p.circuit, &p.observable);
    let theta = config.problem.initial_theta(cost.dim())?;
    let mut oracle = Oracle::new(OracleConfig::exact())?;
    let f0 = cost.exact(&theta)?;

    let mut table = String::from("j,amplitude,phase,offset,g,h,residual_amplitude,residual_offset\n");
    for j in 0..cost.dim() {
        let fit = trig::fit_univariate_cost(&cost, &theta, j, &mut oracle)?;
        let deriv = trig::psr_derivatives_cost(&cost, &theta, j, &mut oracle)?;
        let res_a = (fit.amplitude - (deriv.h * deriv.h + deriv.g * deriv.g).sqrt()).abs();
        let res_c = (fit.offset - (deriv.h + f0)).abs();
        table.push_str(&format!(
            "{j},{},{},{},{},{},{res_a},{res_c}\n",
            fit.amplitude, fit.phase, fit.offset, deriv.g, deriv.h
        ));
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("fit.csv"), &table)?;
    }
    Ok(table)
}

fn trace_csv(trace: &OptimizerTrace) -> String {
    let mut out = String::from("t,j,f_exact,circuit_executions,total_shots\n");
    for r in &trace.records {
        let j = r.coordinate.map(|j| j.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.t, j, r.f_exact, r.circuit_executions, r.total_shots
        ));
    }
    out
}

fn run_one(
    problem: &LoadedProblem,
    kind: OptimizerKind,
    theta0: &[f64],
    iterations: usize,
    noise: NoiseMode,
    seed: u64,
    max_executions: Option<u64>,
) -> Result<OptimizerTrace> {
    match problem {
        LoadedProblem::Circuit(p) => optim::run(
            &OptimizerConfig { kind, iterations, seed, max_executions },
            &CircuitCost::new(&p.circuit, &p.observable),
            theta0,
            noise,
        ),
        LoadedProblem::Benchmark { model, dataset } => {
            if kind == OptimizerKind::Rotosolve {
                // coordinate minimization on a finite sum uses the absolute
                // three-anchor fit rather than relative +-pi/2 shifts
                finitesum::run_finitesum_rotosolve(
                    model, dataset, theta0, iterations, noise, seed, max_executions,
                )
            } else {
                optim::run(
                    &OptimizerConfig { kind, iterations, seed, max_executions },
                    &FinitesumCost { model, dataset },
                    theta0,
                    noise,
                )
            }
        }
    }
}

/// Runs the optimizer grid over all seeds and writes one trace CSV per
/// (optimizer, seed) plus a per-iteration mean/std summary. Returns the
/// names of the written files.
pub fn cmd_optimize(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>> {
    let problem = config.problem.load()?;
    let theta0 = config.problem.initial_theta(problem.param_dim())?;
    let noise = config.oracle.noise_mode()?;
    let kinds = config.optim.kinds()?;
    let seeds = &config.optim.seeds;

    let jobs: Vec<(OptimizerKind, u64)> = kinds
        .iter()
        .flat_map(|&k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let traces: Vec<OptimizerTrace> = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            run_one(
                &problem,
                kind,
                &theta0,
                config.optim.iterations,
                noise,
                seed,
                config.optim.max_executions,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for trace in &traces {
        let name = format!("trace_{}_{}.csv", trace.kind.name(), trace.seed);
        fs::write(out_dir.join(&name), trace_csv(trace))?;
        written.push(name);
    }

    let mut summary = String::from("optimizer,t,mean_f,std_f,mean_executions\n");
    for &kind in &kinds {
        let group: Vec<&OptimizerTrace> = traces.iter().filter(|t| t.kind == kind).collect();
        let t_len = group.iter().map(|t| t.records.len()).min().unwrap_or(0);
        for t in 0..t_len {
            let fs_at: Vec<f64> = group.iter().map(|tr| tr.records[t].f_exact).collect();
            let n = fs_at.len() as f64;
            let mean = fs_at.iter().sum::<f64>() / n;
            let std = if fs_at.len() > 1 {
                (fs_at.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let execs = group
                .iter()
                .map(|tr| tr.records[t].circuit_executions as f64)
                .sum::<f64>()
                / n;
            summary.push_str(&format!("{},{t},{mean},{std},{execs}\n", kind.name()));
        }
    }
    fs::write(out_dir.join("summary.csv"), summary)?;
    written.push("summary.csv".into());
    Ok(written)
}

/// Runs the selected theory checks and writes `report.csv` / `report.txt`.
/// Returns the report; the caller maps any FAIL to a nonzero exit code.
pub fn cmd_verify(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    negative_control: bool,
) -> Result<TheoryReport> {
    let problem = config.problem.load()?;
    let LoadedProblem::Circuit(p) = &problem else {
        return Err(Error::Config(
            "verify requires a circuit problem file".into(),
        ));
    };
    let cost = CircuitCost::new(&p.circuit, &p.observable);
    let theta0 = config.problem.initial_theta(cost.dim())?;
    let noise = config.oracle.noise_mode()?;
    let mut sigma_sq = noise.sigma_sq(&p.observable);
    if negative_control {
        sigma_sq /= 10.0;
    }
    let vc = &config.verify;
    let seeds: Vec<u64> = (0..vc.seeds as u64).collect();

    let mut report = TheoryReport::default();
    if vc.checks.is_empty() {
        return Ok(report);
    }
    let constants = trig::landscape_constants(&p.circuit, &p.observable, 32, config.oracle.seed)?;
    let needs_ensemble = vc.checks.iter().any(|c| c != "coordinate");
    let ensemble = if needs_ensemble {
        verify::run_ensemble(
            OptimizerKind::Rotosolve,
            &cost,
            &theta0,
            vc.iterations,
            noise,
            &seeds,
        )?
    } else {
        Vec::new()
    };

    for check in &vc.checks {
        match check.as_str() {
            "descent" => report.push(verify::check_rotosolve_descent(
                &cost, &ensemble, &constants, sigma_sq,
            )?),
            "coordinate" => report.push(verify::check_coordinate_descent_lemma(
                &cost,
                &constants,
                vc.samples,
                config.oracle.seed,
            )?),
            "stationarity" => {
                let f_star = verify::estimate_fstar(&cost, 32, 40 * cost.dim(), config.oracle.seed)?;
                report.push(verify::check_stationarity_rate(
                    &cost,
                    &ensemble,
                    &constants,
                    sigma_sq,
                    vc.eps,
                    f_star,
                    RateTarget::Rotosolve,
                )?);
                let alpha = 1.0 / constants.max;
                let rcd = verify::run_ensemble(
                    OptimizerKind::Rcd { alpha },
                    &cost,
                    &theta0,
                    vc.iterations,
                    noise,
                    &seeds,
                )?;
                report.push(verify::check_stationarity_rate(
                    &cost,
                    &rcd,
                    &constants,
                    sigma_sq,
                    vc.eps,
                    f_star,
                    RateTarget::Rcd { alpha },
                )?);
            }
            "suboptimality" => {
                let f_star = verify::estimate_fstar(&cost, 32, 40 * cost.dim(), config.oracle.seed)?;
                let mu = verify::estimate_mu(&cost, &ensemble)?;
                report.push(verify::check_suboptimality_rate(
                    &cost,
                    &ensemble,
                    &constants,
                    sigma_sq,
                    mu,
                    vc.eps,
                    f_star,
                    RateTarget::Rotosolve,
                )?);
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown check `{other}` (expected descent, coordinate, stationarity, or suboptimality)"
                )))
            }
        }
    }

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), report.to_csv())?;
        fs::write(dir.join("report.txt"), report.to_text())?;
    }
    Ok(report)
}

/// Writes the synthetic benchmark dataset as CSV and returns its contents.
pub fn cmd_dataset(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<String> {
    let LoadedProblem::Benchmark { dataset, .. } = config.problem.load()? else {
        return Err(Error::Config(
            "dataset requires `benchmark = true` in the problem section".into(),
        ));
    };
    let csv = dataset.to_csv();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("dataset.csv"), &csv)?;
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    const DEMO_PROBLEM: &str = "\
qubits = 1

[gates]
rx q=0 p=0

[observable]
1.0 Z
";

    fn circuit_config(dir: &Path) -> ExperimentConfig {
        let path = dir.join("problem.txt");
        fs::write(&path, DEMO_PROBLEM).unwrap();
        ExperimentConfig::from_toml(&format!(
            "[problem]\nfile = \"{}\"\ntheta0 = [0.4]\n",
            path.display()
        ))
        .unwrap()
    }

    #[test]
    fn fit_reports_unit_amplitude_and_tiny_residuals() {
        let dir = tempdir().unwrap();
        let cfg = circuit_config(dir.path());
        let table = cmd_fit(&cfg, Some(dir.path())).unwrap();
        let row: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "0");
        assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        assert!(row[6].parse::<f64>().unwrap() < 1e-9);
        assert!(row[7].parse::<f64>().unwrap() < 1e-9);
        assert!(dir.path().join("fit.csv").exists());
    }

    #[test]
    fn fit_rejects_bad_pauli_with_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "qubits = 2\n\n[gates]\nrx q=0 p=0\n\n[observable]\n1.0 ZQ\n").unwrap();
        let cfg = ExperimentConfig::from_toml(&format!(
            "[problem]\nfile = \"{}\"\n",
            path.display()
        ))
        .unwrap();
        match cmd_fit(&cfg, None) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 7);
                assert!(msg.contains('Q'), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn optimize_single_step_reaches_cos_minimum() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("problem.txt");
        fs::write(&path, DEMO_PROBLEM).unwrap();
        let cfg = ExperimentConfig::from_toml(&format!(
            "[problem]\nfile = \"{}\"\n[optim]\noptimizers = [\"rotosolve\"]\niterations = 1\nseeds = [7]\n",
            path.display()
        ))
        .unwrap();
        let out = dir.path().join("out");
        let files = cmd_optimize(&cfg, &out).unwrap();
        assert!(files.contains(&"trace_rotosolve_7.csv".to_string()));
        let trace = fs::read_to_string(out.join("trace_rotosolve_7.csv")).unwrap();
        let last: Vec<&str> = trace.lines().last().unwrap().split(',').collect();
        assert!((last[2].parse::<f64>().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimize_reruns_byte_identically() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("problem.txt");
        fs::write(&path, DEMO_PROBLEM).unwrap();
        let cfg = ExperimentConfig::from_toml(&format!(
            "[problem]\nfile = \"{}\"\n[oracle]\nmode = \"shots\"\nshots = 64\n[optim]\noptimizers = [\"rotosolve\", \"sgd\"]\niterations = 10\nseeds = [1, 2]\n",
            path.display()
        ))
        .unwrap();
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        cmd_optimize(&cfg, &out_a).unwrap();
        cmd_optimize(&cfg, &out_b).unwrap();
        for name in ["trace_rotosolve_1.csv", "trace_sgd_2.csv", "summary.csv"] {
            let a = fs::read(out_a.join(name)).unwrap();
            let b = fs::read(out_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }

    #[test]
    fn dataset_command_round_trips() {
        let cfg = ExperimentConfig::from_toml("[problem]\nbenchmark = true\nk = 8\n").unwrap();
        let dir = tempdir().unwrap();
        let csv = cmd_dataset(&cfg, Some(dir.path())).unwrap();
        assert!(csv.starts_with("x1,x2,y\n"));
        assert_eq!(csv.lines().count(), 9);
        assert_eq!(fs::read_to_string(dir.path().join("dataset.csv")).unwrap(), csv);
        let circuit_cfg = ExperimentConfig::from_toml("[problem]\nfile = \"x\"\n").unwrap();
        assert!(cmd_dataset(&circuit_cfg, None).is_err());
    }

    #[test]
    fn verify_empty_check_selection_is_noop() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("problem.txt");
        fs::write(&path, DEMO_PROBLEM).unwrap();
        let cfg = ExperimentConfig::from_toml(&format!(
            "[problem]\nfile = \"{}\"\n[verify]\nchecks = []\n",
            path.display()
        ))
        .unwrap();
        let report = cmd_verify(&cfg, None, false).unwrap();
        assert!(report.checks.is_empty());
        assert!(report.all_passed());
    }

    #[test]
    fn verify_demo_circuit_all_pass() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("problem.txt");
        fs::write(&path, DEMO_PROBLEM).unwrap();
        let cfg = ExperimentConfig::from_toml(&format!(
            "[problem]\nfile = \"{}\"\ntheta0 = [0.9]\n[verify]\nseeds = 30\niterations = 12\nsamples = 100\n",
            path.display()
        ))
        .unwrap();
        let report = cmd_verify(&cfg, Some(dir.path()), false).unwrap();
        assert!(!report.checks.is_empty());
        assert!(report.all_passed(), "{}", report.to_text());
        assert!(dir.path().join("report.csv").exists());
        assert!(dir.path().join("report.txt").exists());
    }
}
