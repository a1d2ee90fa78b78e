//! Exact solver and certification toolkit for simultaneous optimal transport
//! between d-tuples of finite discrete measures.

pub mod bounds;
pub mod duality;
pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod io;
pub mod measures;
pub mod monge;
pub mod oracles;
pub mod parity;
pub mod random;
pub mod ratlp;
pub mod scalar;
pub mod solver;
pub mod twoway;

pub use error::{Error, Result};
pub use measures::{DerivativeLaw, DerivativeProfile, DiscreteVectorMeasure, ReferenceMeasure, SupportPoint};
pub use scalar::{parse_rational, Extended, Rational, Scalar};
pub use solver::{solve_sot, CostMatrix, SolveResult, SotInstance, SotOutcome, TransportKernel};
