//! Frameless ALOHA with k-multi-user detection: exact finite-length analysis
//! of the successive-interference-cancellation decoder, a Monte Carlo
//! simulator, an exhaustive oracle for tiny instances, and a grid-search
//! optimizer for the slot-access scale `beta`.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exec;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod simulator;

pub use analysis::{analyze, analyze_with, AnalysisOptions, AnalysisResult, Analyzer};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{degree_distribution, DegreeDistribution, SystemParams};
pub use optimizer::{optimize_beta, peak_throughput, OptimizeConfig, Optimum, Peak, SlotSearch};
pub use oracle::exact_per;
pub use simulator::{simulate, ContentionGraph, SimStats};
