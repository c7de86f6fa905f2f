use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{Fixed, State, StateSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

/// A continuous test function from the closed catalog: Fourier modes on the
/// circle and torus, cylinder indicators on shift spaces, constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    /// `cos(2 pi k.x)` or `sin(2 pi k.x)`; `freq` has one entry on the circle
    /// (or a binary shift, read as binary expansions) and two on the torus.
    Fourier { freq: Vec<i64>, trig: Trig },
    /// Indicator of `{y : y[offset..offset + word.len()] = word}`.
    Cylinder { word: Vec<u8>, offset: u32 },
    Constant { value: f64 },
}

/// `(cos, sin)` of `2 pi phase / 2^64`, exact at quarter turns.
pub(crate) fn unit_phase(phase: u64) -> (f64, f64) {
    match phase {
        0 => (1.0, 0.0),
        0x4000_0000_0000_0000 => (0.0, 1.0),
        0x8000_0000_0000_0000 => (-1.0, 0.0),
        0xC000_0000_0000_0000 => (0.0, -1.0),
        _ => {
            let angle = (phase as i64) as f64 * (TAU / 18_446_744_073_709_551_616.0);
            (angle.cos(), angle.sin())
        }
    }
}

impl Observable {
    pub fn cos(k: i64) -> Self {
        Observable::Fourier {
            freq: vec![k],
            trig: Trig::Cos,
        }
    }

    pub fn sin(k: i64) -> Self {
        Observable::Fourier {
            freq: vec![k],
            trig: Trig::Sin,
        }
    }

    pub fn torus_mode(k1: i64, k2: i64, trig: Trig) -> Self {
        Observable::Fourier {
            freq: vec![k1, k2],
            trig,
        }
    }

    pub fn cylinder(word: Vec<u8>) -> Self {
        Observable::Cylinder { word, offset: 0 }
    }

    pub fn constant(value: f64) -> Self {
        Observable::Constant { value }
    }

    /// Upper bound on `sup |phi|`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Observable::Fourier { .. } | Observable::Cylinder { .. } => 1.0,
            Observable::Constant { value } => value.abs(),
        }
    }

    /// Upper bound on `sup phi - inf phi`.
    pub fn range_bound(&self) -> f64 {
        match self {
            Observable::Fourier { .. } => 2.0,
            Observable::Cylinder { .. } => 1.0,
            Observable::Constant { .. } => 0.0,
        }
    }

    /// Lipschitz constant with respect to the max-coordinate circle distance,
    /// where one exists. Cylinder indicators are only continuous on shift
    /// spaces and have none.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Observable::Fourier { freq, .. } => {
                Some(TAU * freq.iter().map(|k| k.unsigned_abs() as f64).sum::<f64>())
            }
            Observable::Cylinder { .. } => None,
            Observable::Constant { .. } => Some(0.0),
        }
    }

    /// Number of symbols of a point, counted from its first, that evaluation
    /// reads.
    pub fn lookahead(&self) -> u64 {
        match self {
            Observable::Fourier { .. } => 64,
            Observable::Cylinder { word, offset } => *offset as u64 + word.len() as u64,
            Observable::Constant { .. } => 0,
        }
    }

    pub fn check_space(&self, space: StateSpace) -> Result<()> {
        let ok = match (self, space) {
            (Observable::Constant { .. }, _) => true,
            (Observable::Fourier { freq, .. }, s) => match freq.len() {
                1 => s.has_circle_coordinate(),
                2 => s == StateSpace::Torus,
                _ => false,
            },
            (Observable::Cylinder { word, .. }, StateSpace::Shift { alphabet }) => {
                word.iter().all(|&s| s < alphabet)
            }
            (Observable::Cylinder { .. }, _) => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Incompatible(format!("{self:?} is not defined on {space}")))
        }
    }

    pub fn eval(&self, x: &State) -> Result<f64> {
        match (self, x) {
            (Observable::Constant { value }, _) => Ok(*value),
            (Observable::Cylinder { word, offset }, State::Symbolic(p)) => {
                let mut buf = vec![0u8; word.len()];
                p.read(*offset as u64, &mut buf)?;
                Ok(if buf == *word { 1.0 } else { 0.0 })
            }
            (Observable::Fourier { freq, trig }, _) => {
                let phase = match (freq.as_slice(), x) {
                    ([k], State::Circle(t)) => t.wrapping_mul(*k),
                    ([k], State::Symbolic(p)) => p.dyadic()?.wrapping_mul(*k),
                    ([k1, k2], State::Torus(a, b)) => a.wrapping_mul(*k1).wrapping_add(b.wrapping_mul(*k2)),
                    _ => return Err(Error::Incompatible(format!("{self:?} at {}", x.describe()))),
                };
                Ok(self.trig_at(phase, *trig))
            }
            _ => Err(Error::Incompatible(format!("{self:?} at {}", x.describe()))),
        }
    }

    fn trig_at(&self, phase: Fixed, trig: Trig) -> f64 {
        let (c, s) = unit_phase(phase.0);
        match trig {
            Trig::Cos => c,
            Trig::Sin => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SymbolSequence;
    use std::sync::Arc;

    #[test]
    fn fourier_on_circle_and_binary_shift_agree() {
        let third = State::Circle(Fixed::from_ratio(1, 3));
        let coded = State::symbolic(Arc::new(SymbolSequence::periodic(2, vec![0, 1]).unwrap()));
        let a = Observable::cos(1).eval(&third).unwrap();
        let b = Observable::cos(1).eval(&coded).unwrap();
        assert!((a + 0.5).abs() < 1e-15);
        assert!((b + 0.5).abs() < 1e-15);
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(Observable::cos(1).eval(&State::Circle(Fixed::HALF)).unwrap(), -1.0);
        assert_eq!(Observable::sin(1).eval(&State::Circle(Fixed::from_ratio(1, 4))).unwrap(), 1.0);
        assert_eq!(Observable::cos(2).eval(&State::Circle(Fixed::HALF)).unwrap(), 1.0);
    }

    #[test]
    fn cylinder_indicator() {
        let x = State::symbolic(Arc::new(SymbolSequence::periodic(3, vec![0, 2, 1]).unwrap()));
        assert_eq!(Observable::cylinder(vec![0, 2]).eval(&x).unwrap(), 1.0);
        assert_eq!(Observable::cylinder(vec![2]).eval(&x).unwrap(), 0.0);
        let shifted = Observable::Cylinder { word: vec![2], offset: 1 };
        assert_eq!(shifted.eval(&x).unwrap(), 1.0);
        assert!(Observable::cylinder(vec![0]).eval(&State::Circle(Fixed::ZERO)).is_err());
    }

    #[test]
    fn space_checks() {
        assert!(Observable::cos(1).check_space(StateSpace::Shift { alphabet: 2 }).is_ok());
        assert!(Observable::cos(1).check_space(StateSpace::Shift { alphabet: 3 }).is_err());
        assert!(Observable::cos(1).check_space(StateSpace::Torus).is_err());
        assert!(Observable::torus_mode(1, 1, Trig::Sin).check_space(StateSpace::Torus).is_ok());
        assert!(Observable::cylinder(vec![2]).check_space(StateSpace::Shift { alphabet: 2 }).is_err());
        assert!(Observable::constant(0.3).check_space(StateSpace::Circle).is_ok());
    }

    #[test]
    fn bounds() {
        assert_eq!(Observable::constant(-2.0).sup_bound(), 2.0);
        assert_eq!(Observable::torus_mode(2, -3, Trig::Cos).lipschitz(), Some(5.0 * TAU));
        assert_eq!(Observable::cylinder(vec![0]).lipschitz(), None);
    }
}
