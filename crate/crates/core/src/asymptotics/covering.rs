use serde::{Deserialize, Serialize};

use super::hull::Hull;
use crate::error::{Error, Result};
use crate::measures::ReferenceMeasure;
use crate::scalar::Scalar;
use crate::weakstar::{DistanceValue, TestFamily};

/// Catalog members chosen greedily so that every member lies within `1/k`
/// of one of them.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringNet {
    pub k: u64,
    pub centers: Vec<ReferenceMeasure>,
    /// For every catalog member, the index of the center covering it.
    pub assignment: Vec<usize>,
}

pub fn build_covering<S: Scalar>(
    catalog: &[ReferenceMeasure],
    k: u64,
    family: &TestFamily,
) -> Result<CoveringNet> {
    if catalog.is_empty() {
        return Err(Error::validation("catalog", "is empty"));
    }
    if k == 0 {
        return Err(Error::validation("k", "must be at least 1"));
    }
    let radius = S::ratio(1, k);
    let integrals = catalog
        .iter()
        .map(|mu| family.integrals::<S, _>(mu))
        .collect::<Result<Vec<_>>>()?;
    let mut chosen: Vec<usize> = Vec::new();
    let mut assignment = Vec::with_capacity(catalog.len());
    for i in 0..catalog.len() {
        let near = chosen
            .iter()
            .position(|&c| family.distance_between(&integrals[c], &integrals[i]).value <= radius);
        match near {
            Some(c) => assignment.push(c),
            None => {
                chosen.push(i);
                assignment.push(chosen.len() - 1);
            }
        }
    }
    Ok(CoveringNet {
        k,
        centers: chosen.iter().map(|&i| catalog[i].clone()).collect(),
        assignment,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillationClass {
    Convergent,
    Oscillating,
    ExtremelyOscillatingRelativeToCatalog,
}

impl std::fmt::Display for OscillationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OscillationClass::Convergent => "convergent",
            OscillationClass::Oscillating => "oscillating",
            OscillationClass::ExtremelyOscillatingRelativeToCatalog => {
                "extremely-oscillating-relative-to-catalog"
            }
        })
    }
}

/// The hull center closest to one covering center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterMatch<S> {
    pub target: String,
    pub hull_center: usize,
    pub distance: DistanceValue<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification<S> {
    pub class: OscillationClass,
    pub epsilon: S,
    pub matches: Vec<CenterMatch<S>>,
}

/// Convergent with a single hull center; extremely oscillating when every
/// covering center has a hull center closer than `epsilon` (with the tail
/// bound counted against it); oscillating otherwise.
pub fn classify<S: Scalar>(
    hull: &Hull<S>,
    covering: &CoveringNet,
    family: &TestFamily,
    epsilon: S,
) -> Result<Classification<S>> {
    if hull.family != family.descriptor() {
        return Err(Error::Incompatible("hull was built with another family".into()));
    }
    if hull.centers.is_empty() || hull.coverage < 1.0 {
        return Err(Error::validation("hull", "is empty or incomplete"));
    }
    let floor = S::ratio(2, covering.k);
    if epsilon <= floor {
        return Err(Error::validation(
            "epsilon",
            format!("{epsilon} must exceed twice the covering radius ({floor})"),
        ));
    }
    let mut matches = Vec::with_capacity(covering.centers.len());
    for target in &covering.centers {
        let t = family.integrals::<S, _>(target)?;
        let mut best: Option<(usize, DistanceValue<S>)> = None;
        for (i, c) in hull.centers.iter().enumerate() {
            let d = family.distance_between(&c.integrals, &t);
            if best.as_ref().is_none_or(|(_, b)| d.value < b.value) {
                best = Some((i, d));
            }
        }
        let (hull_center, distance) = best.expect("hull has centers");
        matches.push(CenterMatch {
            target: target.label().to_string(),
            hull_center,
            distance,
        });
    }
    let class = if hull.centers.len() == 1 {
        OscillationClass::Convergent
    } else if matches.iter().all(|m| m.distance.upper() < epsilon) {
        OscillationClass::ExtremelyOscillatingRelativeToCatalog
    } else {
        OscillationClass::Oscillating
    };
    Ok(Classification {
        class,
        epsilon,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::hull::estimate_hull;
    use crate::systems::StateSpace;
    use crate::weakstar::build_family;

    fn shift2() -> StateSpace {
        StateSpace::Shift { alphabet: 2 }
    }

    fn catalog() -> Vec<ReferenceMeasure> {
        vec![
            ReferenceMeasure::periodic_word(2, vec![0], "zero").unwrap(),
            ReferenceMeasure::periodic_word(2, vec![1], "one").unwrap(),
        ]
    }

    #[test]
    fn coverings() {
        let fam = build_family(shift2(), 1).unwrap();
        let net = build_covering::<f64>(&catalog(), 10, &fam).unwrap();
        assert_eq!(net.centers.len(), 2);
        let net = build_covering::<f64>(&catalog(), 1, &fam).unwrap();
        assert_eq!(net.centers.len(), 1);
        assert_eq!(net.assignment, vec![0, 0]);
        assert!(build_covering::<f64>(&[], 3, &fam).is_err());
    }

    #[test]
    fn classes() {
        let fam = build_family(shift2(), 2).unwrap();
        let cat = catalog();
        let net = build_covering::<f64>(&cat, 10, &fam).unwrap();
        let ints: Vec<Vec<f64>> = cat.iter().map(|c| fam.integrals(c).unwrap()).collect();

        let one = estimate_hull(&fam, 0.1, vec![(0, 1, ints[0].clone())]).unwrap();
        assert_eq!(classify(&one, &net, &fam, 0.3).unwrap().class, OscillationClass::Convergent);

        let both = estimate_hull(&fam, 0.1, vec![(0, 1, ints[0].clone()), (1, 1, ints[1].clone())]).unwrap();
        let c = classify(&both, &net, &fam, 0.3).unwrap();
        assert_eq!(c.class, OscillationClass::ExtremelyOscillatingRelativeToCatalog);
        assert_eq!(c.matches[1].hull_center, 1);

        let half: Vec<f64> = ints[0].iter().zip(&ints[1]).map(|(a, b)| (a + b) / 2.0).collect();
        let mixed = estimate_hull(&fam, 0.1, vec![(0, 1, ints[0].clone()), (1, 1, half)]).unwrap();
        assert_eq!(classify(&mixed, &net, &fam, 0.3).unwrap().class, OscillationClass::Oscillating);

        assert!(classify(&both, &net, &fam, 0.2).is_err());
    }
}
