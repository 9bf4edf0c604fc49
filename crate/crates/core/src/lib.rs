//! Quantum and classical correlations in the effective two-qubit description
//! of a spin-3/2 nucleus, and their decay under quadrupolar relaxation.

mod eigen;
pub mod config;
pub mod correlations;
pub mod error;
pub mod fitting;
pub mod fixtures;
pub mod io;
pub mod optimizer;
pub mod pipeline;
pub mod relaxation;
pub mod state;
pub mod states;

pub use config::RunConfig;
pub use correlations::{CorrelationReport, MeasurementBasis, Mode, Units};
pub use error::{Error, Result};
pub use eigen::HermitianEigen;
pub use fitting::{add_noise, estimate_parameters, FitConfig, FitReport};
pub use optimizer::OptimizerConfig;
pub use relaxation::{evolve, time_series, RelaxationParams};
pub use state::{DeviationMatrix, Party, ThermalState};
pub use states::BellState;
