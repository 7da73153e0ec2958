//! Perfect-distinguishability structures of polytope state spaces.
//!
//! Given an independence system on `[n]`, [`construction::build`] produces a
//! polytope whose simplex vertices `s_1..s_n` are jointly perfectly
//! distinguishable on exactly the members of the system. The
//! [`distinguish`] module decides joint perfect distinguishability and the
//! minimum symmetric error for any polytope given by generators, using the
//! exact simplex solver in [`lp`]. [`verifier`] ties these together.

pub mod construction;
pub mod distinguish;
pub mod geometry;
pub mod indep_system;
pub mod lp;
pub mod rational;
pub mod verifier;

pub use construction::{build, ConstructionOutput};
pub use distinguish::{is_jpd, jpd_family, symmetric_error, ErrorReport, Measurement};
pub use geometry::{RPoint, StateSpace};
pub use indep_system::{IndependenceSystem, IndexSubset};
pub use lp::{LinearProgram, LpResult, LpStatus, Relation};
pub use rational::Rational;
pub use verifier::{verify_realization, RealizationReport};
