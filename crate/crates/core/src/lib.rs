//! Certified finite-dimensional truncation of weakly-coupled quantum control
//! systems: dimension estimates from energy-growth and factorial tail bounds,
//! exact piecewise-constant Schrödinger propagation, a monotonically
//! convergent optimal-control solver, and a verification suite that confronts
//! every bound with measured trajectories.

pub mod bounds;
pub mod error;
pub mod field;
pub mod linalg;
pub mod mathutil;
pub mod optimize;
pub mod propagate;
pub mod system;
pub mod verify;

pub use bounds::{FieldBudget, TruncationReport};
pub use error::{Error, Result};
pub use field::ControlField;
pub use optimize::{OptimizationResult, OptimizerConfig};
pub use propagate::{StateVector, Trajectory};
pub use system::{builtin_oscillator, builtin_rotor, load_system, QuantumSystem};
pub use verify::{SuiteConfig, VerificationReport};
