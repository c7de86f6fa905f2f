//! A fixed metric for the weak-star topology on probability measures.
//!
//! Entry `k` (counting from 1) of a [`TestFamily`] carries weight `2^-k` and
//!
//! ```text
//! dist(mu, nu) = sum_k 2^-k |int phi_k d mu - int phi_k d nu| / width_k
//! ```
//!
//! where `width_k` is 1 for cylinder indicators and 2 for Fourier modes (whose
//! values span `[-1, 1]`). Every term is then at most `2^-k`, so distances are
//! below `1 - 2^-K` and the truncation error is below `2^-K`.
//!
//! Sums are accumulated exactly and rounded once, which makes the result
//! independent of summation order and lets incremental updates reproduce
//! from-scratch values bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Measure, Observable, ReferenceMeasure, Trig};
use crate::scalar::{ExactSum, Scalar};
use crate::systems::StateSpace;

/// Families larger than this are rejected.
pub const MAX_ENTRIES: usize = 4096;

/// Entry budget used to pick the default word length on shift spaces.
const DEFAULT_SHIFT_ENTRIES: usize = 510;
const DEFAULT_MAX_FREQUENCY: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum FamilyRule {
    /// Cylinder indicators of all words of length `1..=max_len` at offset 0,
    /// shortest first, each length in lexicographic order.
    Words { max_len: usize },
    /// Circle: `cos`, `sin` of frequency 1, then 2, up to `max_freq`.
    /// Torus: frequency vectors by max-norm shell `1..=max_freq`; within a
    /// shell one representative of each `+-k` pair (first nonzero coordinate
    /// positive) in lexicographic order, `cos` before `sin`.
    Fourier { max_freq: usize },
    /// An explicit list.
    Custom { observables: Vec<Observable> },
}

/// Everything needed to rebuild a family bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub space: StateSpace,
    #[serde(flatten)]
    pub rule: FamilyRule,
    /// Number of entries `K`.
    pub entries: usize,
}

/// An ordered list of test functions defining the metric.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFamily {
    space: StateSpace,
    rule: FamilyRule,
    observables: Vec<Observable>,
    /// Per entry, `e` with term weight `2^-e` (entry weight over width).
    term_exps: Vec<u32>,
}

impl TestFamily {
    fn from_parts(space: StateSpace, rule: FamilyRule, observables: Vec<Observable>) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::validation("family", "has no entries"));
        }
        if observables.len() > MAX_ENTRIES {
            return Err(Error::validation(
                "family",
                format!("{} entries, at most {MAX_ENTRIES} supported", observables.len()),
            ));
        }
        let mut term_exps = Vec::with_capacity(observables.len());
        for (i, phi) in observables.iter().enumerate() {
            phi.check_space(space)?;
            if phi.sup_bound() > 1.0 {
                return Err(Error::validation(
                    "family",
                    format!("entry {} has sup bound {} > 1", i + 1, phi.sup_bound()),
                ));
            }
            let widen = u32::from(phi.range_bound() > 1.0);
            term_exps.push(i as u32 + 1 + widen);
        }
        Ok(TestFamily {
            space,
            rule,
            observables,
            term_exps,
        })
    }

    /// A family from an explicit observable list (each with sup bound at most 1).
    pub fn custom(space: StateSpace, observables: Vec<Observable>) -> Result<Self> {
        Self::from_parts(
            space,
            FamilyRule::Custom {
                observables: observables.clone(),
            },
            observables,
        )
    }

    pub fn from_descriptor(d: &FamilyDescriptor) -> Result<Self> {
        let family = match &d.rule {
            FamilyRule::Words { max_len } => build_family(d.space, *max_len)?,
            FamilyRule::Fourier { max_freq } => build_family(d.space, *max_freq)?,
            FamilyRule::Custom { observables } => Self::custom(d.space, observables.clone())?,
        };
        if family.rule != d.rule {
            return Err(Error::validation(
                "family",
                format!("rule {:?} does not apply to {}", d.rule, d.space),
            ));
        }
        if family.len() != d.entries {
            return Err(Error::validation(
                "family",
                format!("descriptor declares {} entries, rule gives {}", d.entries, family.len()),
            ));
        }
        Ok(family)
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor {
            space: self.space,
            rule: self.rule.clone(),
            entries: self.len(),
        }
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    /// Weight `2^-(i+1)` of entry `i` (from 0).
    pub fn weight<S: Scalar>(&self, i: usize) -> S {
        S::pow2_neg(i as u32 + 1)
    }

    /// Factor applied to `|int phi_i d mu - int phi_i d nu|` in the distance.
    pub fn term_scale<S: Scalar>(&self, i: usize) -> S {
        S::pow2_neg(self.term_exps[i])
    }

    /// `2^-K`.
    pub fn tail_bound<S: Scalar>(&self) -> S {
        S::pow2_neg(self.len() as u32)
    }

    /// Longest cylinder word, when this is a `Words` family.
    pub(crate) fn word_depth(&self) -> Option<usize> {
        match (&self.rule, self.space) {
            (FamilyRule::Words { max_len }, StateSpace::Shift { .. }) => Some(*max_len),
            _ => None,
        }
    }

    /// Largest number of symbols any entry reads from a point.
    pub fn lookahead(&self) -> u64 {
        self.observables.iter().map(Observable::lookahead).max().unwrap_or(0)
    }

    /// `int phi_k d mu` for every entry.
    pub fn integrals<S: Scalar, M: Measure + ?Sized>(&self, mu: &M) -> Result<Vec<S>> {
        if mu.space() != self.space {
            return Err(Error::Incompatible(format!(
                "measure on {} against a family on {}",
                mu.space(),
                self.space
            )));
        }
        self.observables.iter().map(|phi| mu.integrate(phi)).collect()
    }

    /// Distance between two measures given by their integral vectors.
    pub fn distance_between<S: Scalar>(&self, a: &[S], b: &[S]) -> DistanceValue<S> {
        let mut acc = S::Sum::default();
        for i in 0..self.len() {
            push_term(&mut acc, &self.term_scale(i), &a[i], &b[i], false);
        }
        DistanceValue {
            value: acc.value(),
            tail_bound: self.tail_bound(),
        }
    }

    /// [`Self::distance_between`] if its value is at most `limit`, else
    /// `None`. Stops early once the partial sum is already past `limit`.
    pub fn distance_within<S: Scalar>(&self, a: &[S], b: &[S], limit: &S) -> Option<DistanceValue<S>> {
        let mut acc = S::Sum::default();
        for i in 0..self.len() {
            push_term(&mut acc, &self.term_scale(i), &a[i], &b[i], false);
            if i % 16 == 15 && acc.value() > *limit {
                return None;
            }
        }
        let value = acc.value();
        (value <= *limit).then(|| DistanceValue {
            value,
            tail_bound: self.tail_bound(),
        })
    }

    /// Fails if two catalog measures are not told apart, i.e. their distance
    /// is at most the tail bound.
    pub fn check_separation(&self, catalog: &[ReferenceMeasure]) -> Result<()> {
        let integrals = catalog
            .iter()
            .map(|mu| self.integrals::<f64, _>(mu))
            .collect::<Result<Vec<_>>>()?;
        let tail: f64 = self.tail_bound();
        for i in 0..catalog.len() {
            for j in i + 1..catalog.len() {
                let d = self.distance_between(&integrals[i], &integrals[j]);
                if d.value <= tail {
                    return Err(Error::validation(
                        "targets",
                        format!(
                            "'{}' and '{}' are not separated by the family (distance {})",
                            catalog[i].label(),
                            catalog[j].label(),
                            d.value
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Adds (or removes) `scale |a - b|` exactly.
pub(crate) fn push_term<S: Scalar>(acc: &mut S::Sum, scale: &S, a: &S, b: &S, remove: bool) {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let hi = scale.clone() * hi.clone();
    let lo = scale.clone() * lo.clone();
    if remove {
        acc.sub(&hi);
        acc.add(&lo);
    } else {
        acc.add(&hi);
        acc.sub(&lo);
    }
}

/// Default truncation: words up to the longest length keeping at most 510
/// entries on shift spaces (length 8 for two symbols), frequencies up to 16
/// on the circle and torus.
pub fn default_depth(space: StateSpace) -> usize {
    match space {
        StateSpace::Shift { alphabet } => {
            let a = alphabet as usize;
            let (mut len, mut total, mut level) = (0, 0usize, 1usize);
            loop {
                level *= a;
                if total + level > DEFAULT_SHIFT_ENTRIES {
                    break;
                }
                total += level;
                len += 1;
            }
            len.max(1)
        }
        StateSpace::Circle | StateSpace::Torus => DEFAULT_MAX_FREQUENCY,
    }
}

pub fn default_family(space: StateSpace) -> Result<TestFamily> {
    build_family(space, default_depth(space))
}

/// The standard family: cylinder words up to length `depth` on shift spaces,
/// Fourier modes up to frequency `depth` on the circle and torus.
pub fn build_family(space: StateSpace, depth: usize) -> Result<TestFamily> {
    if depth == 0 {
        return Err(Error::validation("family depth", "must be at least 1"));
    }
    match space {
        StateSpace::Shift { alphabet } => {
            if alphabet < 2 {
                return Err(Error::validation("family", "shift alphabet must have 2 symbols or more"));
            }
            let a = alphabet as usize;
            let mut total = 0usize;
            let mut level = 1usize;
            for _ in 0..depth {
                level = level.saturating_mul(a);
                total = total.saturating_add(level);
            }
            if total > MAX_ENTRIES {
                return Err(Error::validation(
                    "family depth",
                    format!("words up to length {depth} give {total} entries, at most {MAX_ENTRIES} supported"),
                ));
            }
            let mut observables = Vec::with_capacity(total);
            for len in 1..=depth {
                let mut word = vec![0u8; len];
                loop {
                    observables.push(Observable::cylinder(word.clone()));
                    if !next_word(&mut word, alphabet) {
                        break;
                    }
                }
            }
            TestFamily::from_parts(space, FamilyRule::Words { max_len: depth }, observables)
        }
        StateSpace::Circle => {
            let observables = (1..=depth as i64)
                .flat_map(|k| [Observable::cos(k), Observable::sin(k)])
                .collect();
            TestFamily::from_parts(space, FamilyRule::Fourier { max_freq: depth }, observables)
        }
        StateSpace::Torus => {
            let r = depth as i64;
            let mut observables = Vec::new();
            for shell in 1..=r {
                for k1 in 0..=shell {
                    for k2 in -shell..=shell {
                        let on_shell = k1.abs().max(k2.abs()) == shell;
                        let positive = k1 > 0 || (k1 == 0 && k2 > 0);
                        if on_shell && positive {
                            observables.push(Observable::torus_mode(k1, k2, Trig::Cos));
                            observables.push(Observable::torus_mode(k1, k2, Trig::Sin));
                        }
                    }
                }
                if observables.len() > MAX_ENTRIES {
                    return Err(Error::validation(
                        "family depth",
                        format!("torus frequencies up to {depth} exceed {MAX_ENTRIES} entries"),
                    ));
                }
            }
            TestFamily::from_parts(space, FamilyRule::Fourier { max_freq: depth }, observables)
        }
    }
}

/// Lexicographic successor; false after the last word.
fn next_word(word: &mut [u8], alphabet: u8) -> bool {
    for s in word.iter_mut().rev() {
        if *s + 1 < alphabet {
            *s += 1;
            return true;
        }
        *s = 0;
    }
    false
}

/// A truncated distance: the untruncated one lies in
/// `[value, value + tail_bound]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceValue<S> {
    pub value: S,
    pub tail_bound: S,
}

impl<S: Scalar> DistanceValue<S> {
    pub fn upper(&self) -> S {
        self.value.clone() + self.tail_bound.clone()
    }
}

pub fn distance<S: Scalar, A: Measure + ?Sized, B: Measure + ?Sized>(
    mu: &A,
    nu: &B,
    family: &TestFamily,
) -> Result<DistanceValue<S>> {
    let a = family.integrals(mu)?;
    let b = family.integrals(nu)?;
    Ok(family.distance_between(&a, &b))
}

/// Whether the last `window` distances are all below `tol`.
pub fn detect_convergence<S: Scalar>(seq: &[DistanceValue<S>], window: usize, tol: &S) -> Result<bool> {
    if seq.is_empty() {
        return Err(Error::validation("sequence", "is empty"));
    }
    if window == 0 || window > seq.len() {
        return Err(Error::validation(
            "window",
            format!("{window} must lie in 1..={}", seq.len()),
        ));
    }
    Ok(seq[seq.len() - window..].iter().all(|d| d.value < *tol))
}
