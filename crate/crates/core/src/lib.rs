//! Computable objects around Tsirelson's space and greedy bases: exact
//! Tsirelson norms, sequence-space combinators, the fast growing hierarchy,
//! Haar systems, greedy diagnostics and the DKK conditional-basis factory.

pub mod descriptor;
pub mod dkk;
pub mod error;
pub mod experiments;
pub mod finvec;
pub mod greedy;
pub mod haar;
pub mod hierarchy;
pub mod spaces;
pub mod trig;
pub mod tsirelson;

pub use error::{Error, Result};
pub use finvec::{BlockIndex, BlockVec, FinVec, Rational, Scalar};
pub use hierarchy::GrowthFunction;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
