//! Two-market chain-store reputation game with partial cross-market
//! observability: thresholds, posteriors, equilibrium regimes, noisy
//! reports, costly observation, an N-market simulator, and an exact
//! enumeration oracle that certifies the constructed equilibria.

pub mod acquisition;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod multimarket;
pub mod noisy;
pub mod scalar;
pub mod sweep;
pub mod verifier;

pub use equilibrium::{
    solve, solve_sequential, solve_simultaneous, Axis, EquilibriumOutcome, FightChoice, Protocol,
    Regime, SolveOptions,
};
pub use error::{Error, Result};
pub use model::{Observation, Payoffs, Posterior, Probability, Thresholds};
pub use noisy::{solve_sequential_noisy, NoiseSpec};
pub use scalar::{Comparator, Rational, Scalar};
pub use verifier::{verify_pbe, DeviationReport, VerifyOptions};
pub use acquisition::{solve_with_acquisition, value_of_information, AcquisitionProblem};
pub use multimarket::{simulate, IncumbentPolicy, SimulationConfig, SimulationStats};
