use std::sync::Arc;

use super::empirical::average;
use super::observable::{unit_phase, Trig};
use super::{Measure, Observable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::{
    sequence_validate_distribution, BlockKind, DynamicalSystem, State, StateSpace, SymbolSequence,
};

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceKind {
    /// Uniform weights on one periodic orbit, listed in orbit order.
    PeriodicAtomic { atoms: Vec<State> },
    /// Product measure on a shift space.
    Bernoulli { p: Vec<f64> },
    /// Haar measure of the circle or torus (uniform Bernoulli on a shift,
    /// which for two symbols is Lebesgue measure in binary coordinates).
    Lebesgue { space: StateSpace },
}

/// An ergodic measure with closed-form integrals against catalog observables.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceMeasure {
    label: String,
    kind: ReferenceKind,
}

impl ReferenceMeasure {
    /// The measure on the periodic orbit of `x`; fails unless
    /// `f^period(x) = x` and `period` is minimal.
    pub fn periodic_orbit(
        sys: &DynamicalSystem,
        x: &State,
        period: u64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if period == 0 {
            return Err(Error::validation("period", "must be at least 1"));
        }
        let mut atoms = vec![x.clone()];
        let mut cur = x.clone();
        for k in 1..=period {
            cur = sys.step(&cur)?;
            if k < period && cur.same_point(x) {
                return Err(Error::validation(
                    "period",
                    format!("orbit closes after {k} steps, not {period}"),
                ));
            }
            if k < period {
                atoms.push(cur.clone());
            }
        }
        if !cur.same_point(x) {
            return Err(Error::validation(
                "period",
                format!("point does not return after {period} steps"),
            ));
        }
        Ok(ReferenceMeasure {
            label: label.into(),
            kind: ReferenceKind::PeriodicAtomic { atoms },
        })
    }

    /// The periodic-orbit measure of `cycle^infinity` on a shift space.
    pub fn periodic_word(alphabet: u8, cycle: Vec<u8>, label: impl Into<String>) -> Result<Self> {
        let period = primitive_period(&cycle);
        let cycle = cycle[..period].to_vec();
        let seq = Arc::new(SymbolSequence::periodic(alphabet, cycle)?);
        let sys = DynamicalSystem::full_shift(alphabet)?;
        Self::periodic_orbit(&sys, &State::symbolic(seq), period as u64, label)
    }

    pub fn bernoulli(p: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if p.len() < 2 || p.len() > 256 {
            return Err(Error::validation("bernoulli", "needs between 2 and 256 symbols"));
        }
        sequence_validate_distribution(&p)?;
        Ok(ReferenceMeasure {
            label: label.into(),
            kind: ReferenceKind::Bernoulli { p },
        })
    }

    pub fn lebesgue(space: StateSpace, label: impl Into<String>) -> Self {
        ReferenceMeasure {
            label: label.into(),
            kind: ReferenceKind::Lebesgue { space },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &ReferenceKind {
        &self.kind
    }

    /// A word pattern whose long stretches make windows look like this measure.
    pub fn typical_block(&self) -> Result<BlockKind> {
        match &self.kind {
            ReferenceKind::PeriodicAtomic { atoms } => {
                let cycle = atoms
                    .iter()
                    .map(|a| match a {
                        State::Symbolic(p) => p.symbol(0),
                        _ => Err(Error::Incompatible("typical blocks need a shift space".into())),
                    })
                    .collect::<Result<Vec<u8>>>()?;
                Ok(BlockKind::Periodic { cycle })
            }
            ReferenceKind::Bernoulli { p } => Ok(BlockKind::Iid {
                distribution: p.clone(),
            }),
            ReferenceKind::Lebesgue {
                space: StateSpace::Shift { alphabet },
            } => Ok(BlockKind::Iid {
                distribution: vec![1.0 / *alphabet as f64; *alphabet as usize],
            }),
            ReferenceKind::Lebesgue { .. } => {
                Err(Error::Incompatible("typical blocks need a shift space".into()))
            }
        }
    }
}

fn primitive_period(word: &[u8]) -> usize {
    (1..=word.len())
        .find(|&p| word.len().is_multiple_of(p) && (p..word.len()).all(|i| word[i] == word[i - p]))
        .unwrap_or(word.len())
}

/// Fourier coefficient `E[exp(2 pi i k x)]` of the Bernoulli measure on
/// binary expansions `x = sum b_j 2^-j`: the product over digits of
/// `p0 + p1 exp(2 pi i k 2^-j)`. Factors past 64 digits equal 1 to double
/// precision for the frequencies in use.
fn bernoulli_fourier(p: &[f64], k: i64) -> (f64, f64) {
    let (mut re, mut im) = (1.0f64, 0.0f64);
    for j in 1..=64u32 {
        let phase = (k as u64).wrapping_shl(64 - j);
        let (c, s) = unit_phase(phase);
        let (fr, fi) = (p[0] + p[1] * c, p[1] * s);
        (re, im) = (re * fr - im * fi, re * fi + im * fr);
    }
    (re, im)
}

impl Measure for ReferenceMeasure {
    fn space(&self) -> StateSpace {
        match &self.kind {
            ReferenceKind::PeriodicAtomic { atoms } => atoms[0].space(),
            ReferenceKind::Bernoulli { p } => StateSpace::Shift {
                alphabet: p.len() as u8,
            },
            ReferenceKind::Lebesgue { space } => *space,
        }
    }

    fn integrate<S: Scalar>(&self, phi: &Observable) -> Result<S> {
        phi.check_space(self.space())?;
        if let Observable::Constant { value } = phi {
            return Ok(S::from_f64(*value));
        }
        match (&self.kind, phi) {
            (ReferenceKind::PeriodicAtomic { atoms }, _) => average(atoms, phi),
            (ReferenceKind::Bernoulli { p }, Observable::Cylinder { word, .. }) => {
                Ok(word.iter().fold(S::one(), |acc, &s| acc * S::from_f64(p[s as usize])))
            }
            (ReferenceKind::Bernoulli { p }, Observable::Fourier { freq, trig }) => {
                let (re, im) = bernoulli_fourier(p, freq[0]);
                Ok(S::from_f64(match trig {
                    Trig::Cos => re,
                    Trig::Sin => im,
                }))
            }
            (ReferenceKind::Lebesgue { space }, Observable::Cylinder { word, .. }) => {
                let StateSpace::Shift { alphabet } = space else {
                    unreachable!("space checked above")
                };
                let one_symbol = S::ratio(1, *alphabet as u64);
                Ok(word.iter().fold(S::one(), |acc, _| acc * one_symbol.clone()))
            }
            (ReferenceKind::Lebesgue { .. }, Observable::Fourier { freq, trig }) => {
                let constant = freq.iter().all(|&k| k == 0) && *trig == Trig::Cos;
                Ok(if constant { S::one() } else { S::zero() })
            }
            (_, Observable::Constant { .. }) => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Fixed;

    #[test]
    fn lebesgue_fourier_modes() {
        let leb = ReferenceMeasure::lebesgue(StateSpace::Circle, "leb");
        assert_eq!(leb.integrate::<f64>(&Observable::cos(1)).unwrap(), 0.0);
        assert_eq!(leb.integrate::<f64>(&Observable::sin(3)).unwrap(), 0.0);
        assert_eq!(leb.integrate::<f64>(&Observable::cos(0)).unwrap(), 1.0);
        assert!(leb.integrate::<f64>(&Observable::cylinder(vec![0])).is_err());
    }

    #[test]
    fn bernoulli_cylinder_product() {
        let b = ReferenceMeasure::bernoulli(vec![0.5, 0.5], "fair").unwrap();
        assert_eq!(b.integrate::<f64>(&Observable::cylinder(vec![0, 1])).unwrap(), 0.25);
        let skew = ReferenceMeasure::bernoulli(vec![0.25, 0.75], "skew").unwrap();
        assert_eq!(skew.integrate::<f64>(&Observable::cylinder(vec![1, 1, 0])).unwrap(), 0.140625);
    }

    #[test]
    fn fair_bernoulli_is_lebesgue_in_binary_coordinates() {
        let b = ReferenceMeasure::bernoulli(vec![0.5, 0.5], "fair").unwrap();
        for k in 1..=16 {
            assert_eq!(b.integrate::<f64>(&Observable::cos(k)).unwrap(), 0.0);
            assert_eq!(b.integrate::<f64>(&Observable::sin(k)).unwrap(), 0.0);
        }
        let lebesgue_shift = ReferenceMeasure::lebesgue(StateSpace::Shift { alphabet: 2 }, "leb");
        assert_eq!(lebesgue_shift.integrate::<f64>(&Observable::cylinder(vec![1, 0, 1])).unwrap(), 0.125);
    }

    #[test]
    fn skew_bernoulli_fourier_matches_point_mass_limit() {
        // p = (1, 0) is the point mass at 0
        let b = ReferenceMeasure::bernoulli(vec![1.0, 0.0], "zero").unwrap();
        assert_eq!(b.integrate::<f64>(&Observable::cos(3)).unwrap(), 1.0);
        // p = (0, 1) codes 0.111... = 1
        let b = ReferenceMeasure::bernoulli(vec![0.0, 1.0], "one").unwrap();
        assert!((b.integrate::<f64>(&Observable::cos(1)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_orbit_measures() {
        let mu = ReferenceMeasure::periodic_word(2, vec![0, 1, 0, 1], "alt").unwrap();
        let ReferenceKind::PeriodicAtomic { atoms } = mu.kind() else { panic!() };
        assert_eq!(atoms.len(), 2);
        let v: f64 = mu.integrate(&Observable::cos(1)).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        assert_eq!(mu.typical_block().unwrap(), BlockKind::Periodic { cycle: vec![0, 1] });

        let rot = DynamicalSystem::rotation(Fixed::from_ratio(1, 3));
        let orbit = ReferenceMeasure::periodic_orbit(&rot, &State::Circle(Fixed::ZERO), 3, "r3");
        // 1/3 is not dyadic so the fixed-point rotation does not close up
        assert!(orbit.is_err());
        let rot = DynamicalSystem::rotation(Fixed::from_ratio(1, 4));
        assert!(ReferenceMeasure::periodic_orbit(&rot, &State::Circle(Fixed::ZERO), 4, "r4").is_ok());
        assert!(ReferenceMeasure::periodic_orbit(&rot, &State::Circle(Fixed::ZERO), 8, "r8").is_err());

        let cat = DynamicalSystem::cat_map([[2, 1], [1, 1]]).unwrap();
        let origin = State::Torus(Fixed::ZERO, Fixed::ZERO);
        assert!(ReferenceMeasure::periodic_orbit(&cat, &origin, 1, "fixed").is_ok());
    }

    #[test]
    fn bernoulli_validation() {
        assert!(ReferenceMeasure::bernoulli(vec![0.5, 0.6], "bad").is_err());
        assert!(ReferenceMeasure::bernoulli(vec![1.0], "bad").is_err());
    }
}
