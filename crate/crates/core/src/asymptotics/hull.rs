use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;
use crate::scalar::Scalar;
use crate::weakstar::{FamilyDescriptor, TestFamily};

/// A window chosen as a net center, with its integrals against the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullCenter<S> {
    pub m: u64,
    pub n: u64,
    /// Windows assigned to this center (including itself).
    pub windows: u64,
    pub integrals: Vec<S>,
}

/// Greedy net over the scanned windows: a finite-scale picture of the set of
/// limit statistics of the orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hull<S> {
    pub family: FamilyDescriptor,
    pub radius: S,
    pub centers: Vec<HullCenter<S>>,
    pub windows: u64,
    /// Fraction of windows within `radius` of a center.
    pub coverage: f64,
    /// Largest distance between two centers (zero with one center).
    pub diameter: S,
}

pub struct HullBuilder<'f, S: Scalar> {
    family: &'f TestFamily,
    radius: S,
    centers: Vec<HullCenter<S>>,
    windows: u64,
}

impl<'f, S: Scalar> HullBuilder<'f, S> {
    pub fn new(family: &'f TestFamily, radius: S) -> Result<Self> {
        let floor = family.tail_bound::<S>() * S::from_u64(2);
        if radius <= floor {
            return Err(Error::validation(
                "radius",
                format!("{radius} must exceed twice the tail bound ({floor})"),
            ));
        }
        Ok(HullBuilder {
            family,
            radius,
            centers: Vec::new(),
            windows: 0,
        })
    }

    /// Adds one window; it becomes a center unless some earlier center is
    /// within `radius`. Returns the index of its center.
    pub fn offer(&mut self, m: u64, n: u64, integrals: Vec<S>) -> usize {
        self.windows += 1;
        for (i, c) in self.centers.iter_mut().enumerate() {
            if self.family.distance_within(&c.integrals, &integrals, &self.radius).is_some() {
                c.windows += 1;
                return i;
            }
        }
        self.centers.push(HullCenter {
            m,
            n,
            windows: 1,
            integrals,
        });
        self.centers.len() - 1
    }

    pub fn offer_measure(&mut self, mu: &EmpiricalMeasure) -> Result<usize> {
        let ints = self.family.integrals(mu)?;
        let p = mu.provenance();
        Ok(self.offer(p.m, p.n, ints))
    }

    pub fn centers(&self) -> &[HullCenter<S>] {
        &self.centers
    }

    pub fn finish(self) -> Hull<S> {
        let mut diameter = S::zero();
        for i in 0..self.centers.len() {
            for j in i + 1..self.centers.len() {
                let d = self
                    .family
                    .distance_between(&self.centers[i].integrals, &self.centers[j].integrals)
                    .value;
                if d > diameter {
                    diameter = d;
                }
            }
        }
        Hull {
            family: self.family.descriptor(),
            radius: self.radius,
            centers: self.centers,
            windows: self.windows,
            coverage: if self.windows == 0 { 0.0 } else { 1.0 },
            diameter,
        }
    }
}

/// Greedy net over windows given as `(m, n, integrals)`, in order.
pub fn estimate_hull<S: Scalar>(
    family: &TestFamily,
    radius: S,
    windows: impl IntoIterator<Item = (u64, u64, Vec<S>)>,
) -> Result<Hull<S>> {
    let mut b = HullBuilder::new(family, radius)?;
    for (m, n, ints) in windows {
        b.offer(m, n, ints);
    }
    Ok(b.finish())
}
