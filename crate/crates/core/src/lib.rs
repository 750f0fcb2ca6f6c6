//! Verification and construction workbench for graphical and cubical small
//! cancellation over free groups: Stallings graphs and fiber products,
//! square complexes and their hyperplanes, piece enumeration and small
//! cancellation checkers, noise words for cyclic relators, wallspaces with
//! their Sageev duals, and the Rips-type presentation pipeline.

pub mod complexes;
pub mod error;
pub mod graph;
pub mod noise;
pub mod rips;
pub mod smallcancel;
pub mod wallspace;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, FreeWord, Letter};

/// Positive rational numbers such as `α`.
pub type Rational = num_rational::Ratio<u64>;
