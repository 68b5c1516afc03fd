//! A desk-scale laboratory for coordinate minimization of parametrized
//! quantum circuits: an exact statevector simulator, a noise-injectable
//! measurement oracle, sinusoid fitting and parameter-shift derivatives,
//! five optimizers (coordinate minimization plus RCD/SGD/SPSA/RSGF
//! baselines), a finite-sum classification benchmark, and executable checks
//! of the published convergence guarantees.

pub mod cli;
pub mod config;
pub mod error;
pub mod finitesum;
pub mod optim;
pub mod oracle;
pub mod qsim;
pub mod trig;
pub mod verify;
