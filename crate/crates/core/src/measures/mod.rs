//! Empirical measures along orbit segments, reference ergodic measures, and
//! integration of catalog observables against both.

mod empirical;
mod export;
mod observable;
mod reference;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::systems::StateSpace;

pub use empirical::{birkhoff_average, empirical, invariance_defect, EmpiricalMeasure, Provenance};
pub use export::{histogram, histogram_csv, EmpiricalExport, ExportedAtom};
pub use observable::{Observable, Trig};
pub use reference::{ReferenceKind, ReferenceMeasure};

/// A probability measure on a catalog state space.
pub trait Measure {
    fn space(&self) -> StateSpace;
    fn integrate<S: Scalar>(&self, phi: &Observable) -> Result<S>;
}

/// `int phi d mu`.
pub fn integrate<S: Scalar, M: Measure + ?Sized>(mu: &M, phi: &Observable) -> Result<S> {
    mu.integrate(phi)
}
