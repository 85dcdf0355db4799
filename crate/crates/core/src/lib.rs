//! Robust nurse rostering with reserve shifts, roster repair after
//! absences, and a simulation harness for classifier-driven reserve
//! planning.
//!
//! The model layer is generic over [`Scalar`]; the aliases below fix the
//! common choices.

pub mod absence;
pub mod experiment;
pub mod generator;
pub mod instance;
pub mod mip;
pub mod reroster;
pub mod rng;
pub mod roster;
pub mod scalar;
pub mod scenario;
pub mod simml;

pub use absence::{AbsenceScenario, ReserveRequirement};
pub use generator::{generate_instance, GeneratorConfig, SkillMode};
pub use instance::{load_instance, save_instance, Employee, InstanceError, ProblemInstance, ShiftCatalog};
pub use mip::{EnumerationBackend, HighsBackend, MipBackend, MipError, MipModel, SolveControls, SolveOutcome, SolveStatus};
pub use reroster::{solve_rerostering, RerosterOptions, RerosterResult};
pub use roster::{check_conversion_safety, oracle_enumerate, solve_rostering, Roster, RosterError, RosterOptions};
pub use scalar::Scalar;

/// Exact rational scalar used by the oracles.
pub type Rational = num_rational::Ratio<i64>;

pub type Model = MipModel<f64>;
pub type ExactModel = MipModel<Rational>;
