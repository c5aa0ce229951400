//! Delay-differential fluid models of two parallel queues whose customers
//! pick a queue by a multinomial logit rule on delayed queue-length
//! information.
//!
//! * [`dde`]: fixed-step RK4 method-of-steps integrator with Hermite dense output.
//! * [`models`]: the constant-delay and moving-average models.
//! * [`stability`]: critical delays, characteristic residuals, root tracking.
//! * [`analysis`]: regime classification, conservation check, sweeps.
//! * [`output`] and [`cli`]: CSV formats and the `delayq` command line.

pub mod analysis;
pub mod cli;
pub mod dde;
pub mod error;
pub mod models;
pub mod output;
pub mod stability;
pub mod verify;

pub use analysis::{classify_stability, conservation_check, sweep, ClassifyConfig, Regime, SimConfig, StabilityVerdict, SweepRow};
pub use dde::{integrate, DdeSystem, History, IntegrationConfig, Trajectory};
pub use error::{Error, Result};
pub use models::{ModelKind, ModelParams};
pub use stability::HopfPoint;
