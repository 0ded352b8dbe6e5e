//! Proper r-harmonic CMC isoparametric hypersurfaces of the unit sphere.
//!
//! * [`family`]: isoparametric families `M_s` and their curvature invariants.
//! * [`criterion`]: the algebraic r-harmonicity criterion and its solution per degree.
//! * [`quartic`]: the exact degree-four quartic `P_{b,r}` with certified roots.
//! * [`thresholds`]: critical orders `r*(b)`, `r**(b)` and their closed-form bounds.
//! * [`geomlab`]: a finite-difference geometry oracle on explicit charts.

pub mod criterion;
pub mod error;
pub mod family;
pub mod geomlab;
pub mod poly;
pub mod quartic;
pub mod rational;
pub mod thresholds;

pub use error::{Error, Result};
pub use family::{CurvatureInvariants, Degree, IsoparametricFamily};
