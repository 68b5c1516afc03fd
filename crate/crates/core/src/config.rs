//! Experiment configuration: a TOML file fully determines an experiment, so
//! a stored config re-runs to identical outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitesum::{make_benchmark, ClassifierModel, Dataset};
use crate::oracle::NoiseMode;
use crate::optim::OptimizerKind;
use crate::qsim::{load_problem, Problem};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub optim: OptimSection,
    #[serde(default)]
    pub verify: VerifySection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Either a circuit/observable file or the synthetic classification
/// benchmark (two Gaussian blobs, angle-encoding classifier).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub benchmark: bool,
    /// benchmark: number of training samples
    #[serde(default = "default_k")]
    pub k: usize,
    /// benchmark: ansatz depth
    #[serde(default = "default_layers")]
    pub layers: usize,
    /// benchmark: dataset seed
    #[serde(default)]
    pub seed: u64,
    /// shared initial parameter vector; a scalar fill is applied when the
    /// list has a single entry and the problem has more parameters
    pub theta0: Option<Vec<f64>>,
}

fn default_k() -> usize {
    32
}

fn default_layers() -> usize {
    2
}

/// The concrete objective built from a [`ProblemSection`].
pub enum LoadedProblem {
    Circuit(Problem),
    Benchmark { model: ClassifierModel, dataset: Dataset },
}

impl LoadedProblem {
    pub fn param_dim(&self) -> usize {
        match self {
            LoadedProblem::Circuit(p) => p.circuit.param_dim(),
            LoadedProblem::Benchmark { model, .. } => model.param_dim(),
        }
    }
}

impl ProblemSection {
    pub fn load(&self) -> Result<LoadedProblem> {
        match (&self.file, self.benchmark) {
            (Some(path), false) => Ok(LoadedProblem::Circuit(load_problem(path)?)),
            (None, true) => {
                let (model, dataset) = make_benchmark(self.seed, self.k, self.layers)?;
                Ok(LoadedProblem::Benchmark { model, dataset })
            }
            _ => Err(Error::Config(
                "problem must set exactly one of `file` or `benchmark = true`".into(),
            )),
        }
    }

    pub fn initial_theta(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.theta0 {
            None => Ok(vec![0.0; dim]),
            Some(v) if v.len() == dim => Ok(v.clone()),
            Some(v) if v.len() == 1 => Ok(vec![v[0]; dim]),
            Some(v) => Err(Error::ParamShape {
                expected: dim,
                got: v.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    pub sigma: Option<f64>,
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> String {
    "exact".into()
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            mode: default_mode(),
            sigma: None,
            shots: None,
            seed: 0,
        }
    }
}

impl OracleSection {
    pub fn noise_mode(&self) -> Result<NoiseMode> {
        match self.mode.as_str() {
            "exact" => Ok(NoiseMode::Exact),
            "gaussian" => {
                let sigma = self
                    .sigma
                    .ok_or_else(|| Error::Config("gaussian mode requires `sigma`".into()))?;
                if sigma <= 0.0 {
                    return Err(Error::Config("sigma must be positive".into()));
                }
                Ok(NoiseMode::Gaussian(sigma))
            }
            "shots" => {
                let shots = self
                    .shots
                    .ok_or_else(|| Error::Config("shots mode requires `shots`".into()))?;
                if shots == 0 {
                    return Err(Error::Config("shots must be positive".into()));
                }
                Ok(NoiseMode::Shots(shots))
            }
            other => Err(Error::Config(format!(
                "unknown oracle mode `{other}` (expected exact, gaussian, or shots)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimSection {
    #[serde(default = "default_optimizers")]
    pub optimizers: Vec<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// SPSA perturbation magnitude
    #[serde(default = "default_c")]
    pub c: f64,
    /// RSGF smoothing radius
    #[serde(default = "default_c")]
    pub nu: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub max_executions: Option<u64>,
}

fn default_optimizers() -> Vec<String> {
    vec!["rotosolve".into()]
}

fn default_alpha() -> f64 {
    0.1
}

fn default_c() -> f64 {
    0.01
}

fn default_iterations() -> usize {
    100
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl Default for OptimSection {
    fn default() -> Self {
        OptimSection {
            optimizers: default_optimizers(),
            alpha: default_alpha(),
            c: default_c(),
            nu: default_c(),
            iterations: default_iterations(),
            seeds: default_seeds(),
            max_executions: None,
        }
    }
}

impl OptimSection {
    pub fn kinds(&self) -> Result<Vec<OptimizerKind>> {
        self.optimizers
            .iter()
            .map(|name| match name.as_str() {
                "rotosolve" => Ok(OptimizerKind::Rotosolve),
                "rcd" => Ok(OptimizerKind::Rcd { alpha: self.alpha }),
                "sgd" => Ok(OptimizerKind::Sgd { alpha: self.alpha }),
                "spsa" => Ok(OptimizerKind::Spsa {
                    alpha: self.alpha,
                    c: self.c,
                }),
                "rsgf" => Ok(OptimizerKind::Rsgf {
                    alpha: self.alpha,
                    nu: self.nu,
                }),
                other => Err(Error::UnknownOptimizer(other.to_string())),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// subset of: descent, coordinate, stationarity, suboptimality
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_check_seeds")]
    pub seeds: usize,
    #[serde(default = "default_check_iterations")]
    pub iterations: usize,
    /// samples for the coordinate-wise descent inequality
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_checks() -> Vec<String> {
    vec![
        "descent".into(),
        "coordinate".into(),
        "stationarity".into(),
        "suboptimality".into(),
    ]
}

fn default_eps() -> f64 {
    0.5
}

fn default_check_seeds() -> usize {
    30
}

fn default_check_iterations() -> usize {
    60
}

fn default_samples() -> usize {
    500
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            checks: default_checks(),
            eps: default_eps(),
            seeds: default_check_seeds(),
            iterations: default_check_iterations(),
            samples: default_samples(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_benchmark_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "[problem]\nbenchmark = true\n",
        )
        .unwrap();
        assert!(cfg.problem.benchmark);
        assert_eq!(cfg.problem.k, 32);
        assert_eq!(cfg.optim.seeds, vec![0]);
        assert!(matches!(cfg.oracle.noise_mode().unwrap(), NoiseMode::Exact));
        let problem = cfg.problem.load().unwrap();
        assert_eq!(problem.param_dim(), 2 * 2 * 2);
    }

    #[test]
    fn oracle_modes_validate() {
        let mut sec = OracleSection::default();
        sec.mode = "gaussian".into();
        assert!(sec.noise_mode().is_err());
        sec.sigma = Some(1e-4);
        assert!(matches!(sec.noise_mode().unwrap(), NoiseMode::Gaussian(_)));
        sec.mode = "shots".into();
        sec.shots = Some(100);
        assert!(matches!(sec.noise_mode().unwrap(), NoiseMode::Shots(100)));
        sec.mode = "banana".into();
        assert!(sec.noise_mode().is_err());
    }

    #[test]
    fn optimizer_grid_resolves_kinds() {
        let cfg = ExperimentConfig::from_toml(
            "[problem]\nbenchmark = true\n[optim]\noptimizers = [\"rotosolve\", \"rcd\", \"sgd\", \"spsa\", \"rsgf\"]\nalpha = 0.2\n",
        )
        .unwrap();
        let kinds = cfg.optim.kinds().unwrap();
        assert_eq!(kinds.len(), 5);
        assert!(matches!(kinds[1], OptimizerKind::Rcd { alpha } if alpha == 0.2));
        let bad = ExperimentConfig::from_toml(
            "[problem]\nbenchmark = true\n[optim]\noptimizers = [\"newton\"]\n",
        )
        .unwrap();
        assert!(matches!(
            bad.optim.kinds(),
            Err(Error::UnknownOptimizer(name)) if name == "newton"
        ));
    }

    #[test]
    fn theta0_fill_and_shape_check() {
        let sec = ProblemSection {
            file: None,
            benchmark: true,
            k: 8,
            layers: 1,
            seed: 0,
            theta0: Some(vec![0.3]),
        };
        assert_eq!(sec.initial_theta(4).unwrap(), vec![0.3; 4]);
        let bad = ProblemSection {
            theta0: Some(vec![0.1, 0.2, 0.3]),
            ..sec
        };
        assert!(bad.initial_theta(4).is_err());
    }

    #[test]
    fn problem_section_requires_exactly_one_source() {
        let cfg = ExperimentConfig::from_toml("[problem]\n").unwrap();
        assert!(cfg.problem.load().is_err());
        let both = ExperimentConfig::from_toml(
            "[problem]\nfile = \"x.txt\"\nbenchmark = true\n",
        )
        .unwrap();
        assert!(both.problem.load().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[problem]\nbenchmark = true\nfrobnicate = 1\n").is_err());
    }
}
