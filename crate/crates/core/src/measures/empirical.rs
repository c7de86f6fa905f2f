use serde::{Deserialize, Serialize};

use super::{Measure, Observable};
use crate::error::{Error, Result};
use crate::scalar::{ExactSum, Scalar};
use crate::systems::{DynamicalSystem, State, StateSpace};
use crate::weakstar::TestFamily;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub system: String,
    pub point: String,
    pub m: u64,
    pub n: u64,
}

/// The uniform atomic measure on a finite orbit segment: atom `j` is
/// `f^(m+j)(x)` and carries weight `1/n`. Repeated atoms are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<State>,
    space: StateSpace,
    provenance: Provenance,
}

impl EmpiricalMeasure {
    pub fn atoms(&self) -> &[State] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Replaces one atom, keeping provenance (used to probe continuity).
    pub fn with_atom(&self, j: usize, atom: State) -> Result<EmpiricalMeasure> {
        if atom.space() != self.space {
            return Err(Error::Incompatible("replacement atom lives on another space".into()));
        }
        let mut out = self.clone();
        *out.atoms.get_mut(j).ok_or_else(|| Error::validation("atom index", format!("{j} out of range")))? = atom;
        Ok(out)
    }

    /// The push-forward under `sys`: every atom moved one step.
    pub fn image(&self, sys: &DynamicalSystem) -> Result<EmpiricalMeasure> {
        let atoms = self.atoms.iter().map(|a| sys.step(a)).collect::<Result<Vec<_>>>()?;
        Ok(EmpiricalMeasure {
            atoms,
            space: self.space,
            provenance: Provenance {
                m: self.provenance.m + 1,
                ..self.provenance.clone()
            },
        })
    }
}

/// `(1/n) sum phi(atom)` accumulated exactly, rounded once.
pub(crate) fn average<S: Scalar>(atoms: &[State], phi: &Observable) -> Result<S> {
    let mut sum = S::Sum::default();
    for a in atoms {
        sum.add(&S::from_f64(phi.eval(a)?));
    }
    Ok(sum.value() / S::from_u64(atoms.len() as u64))
}

impl Measure for EmpiricalMeasure {
    fn space(&self) -> StateSpace {
        self.space
    }

    fn integrate<S: Scalar>(&self, phi: &Observable) -> Result<S> {
        phi.check_space(self.space)?;
        average(&self.atoms, phi)
    }
}

/// `sigma_{m,n}(x)`: the empirical measure of the orbit segment
/// `f^m(x), ..., f^(m+n-1)(x)`.
pub fn empirical(sys: &DynamicalSystem, x: &State, m: u64, n: u64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::validation("n", "window length must be at least 1"));
    }
    let mut cursor = sys.cursor(x.clone())?;
    cursor.advance(m)?;
    let mut atoms = Vec::with_capacity(n as usize);
    atoms.push(cursor.state().clone());
    for _ in 1..n {
        atoms.push(cursor.advance(1)?.clone());
    }
    Ok(EmpiricalMeasure {
        atoms,
        space: sys.space(),
        provenance: Provenance {
            system: sys.id(),
            point: x.describe(),
            m,
            n,
        },
    })
}

/// Birkhoff average `(1/n) sum_{j<n} phi(f^(m+j)(x))`; identical to
/// integrating `phi` against [`empirical`].
pub fn birkhoff_average<S: Scalar>(
    sys: &DynamicalSystem,
    x: &State,
    m: u64,
    n: u64,
    phi: &Observable,
) -> Result<S> {
    empirical(sys, x, m, n)?.integrate(phi)
}

/// `max_k |int phi_k d mu - int phi_k o f d mu|` over the family.
pub fn invariance_defect<S: Scalar>(
    mu: &EmpiricalMeasure,
    sys: &DynamicalSystem,
    family: &TestFamily,
) -> Result<S> {
    let image = mu.image(sys)?;
    let mut worst = S::zero();
    for phi in family.observables() {
        let d = (mu.integrate::<S>(phi)? - image.integrate::<S>(phi)?).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}
