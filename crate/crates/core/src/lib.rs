pub mod behavior;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod optimizer;
pub mod quantum;
pub mod scalar;
pub mod scenario;
pub mod spacetime;

pub use behavior::{Behavior, DeterministicStrategy, DoubleBehavior, RationalBehavior};
pub use error::{Error, Result};
pub use scalar::{NumericMode, Rational, Scalar};
pub use scenario::Scenario;
