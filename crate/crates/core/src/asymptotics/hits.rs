use serde::{Deserialize, Serialize};

use super::scan::{ScanRecord, ScanTable};
use crate::error::Result;
use crate::scalar::Scalar;

/// Windows whose distance to one target is below `epsilon` even after adding
/// the truncation bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitSet<S> {
    pub target: String,
    pub epsilon: S,
    /// `(m, n)` of every hit, in scan order.
    pub hits: Vec<(u64, u64)>,
    pub m_max: u64,
    pub n_list: Vec<u64>,
    pub scanned: u64,
}

impl<S: Scalar> HitSet<S> {
    pub fn new(target: impl Into<String>, epsilon: S, m_max: u64, n_list: Vec<u64>) -> Self {
        HitSet {
            target: target.into(),
            epsilon,
            hits: Vec::new(),
            m_max,
            n_list,
            scanned: 0,
        }
    }

    /// Counts `record` and keeps it if its distance to target `index` is a hit.
    pub fn offer(&mut self, record: &ScanRecord<S>, index: usize) {
        self.scanned += 1;
        if record.distances[index].upper() < self.epsilon {
            self.hits.push((record.m, record.n));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }
}

pub fn find_hits<S: Scalar>(table: &ScanTable<S>, target: &str, epsilon: S) -> Result<HitSet<S>> {
    let index = table.target_index(target)?;
    let mut set = HitSet::new(target, epsilon, table.m_max, vec![table.n]);
    for r in &table.records {
        set.offer(r, index);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weakstar::DistanceValue;

    fn table(values: &[f64]) -> ScanTable<f64> {
        ScanTable {
            labels: vec!["t".into()],
            n: 4,
            m_max: values.len() as u64 - 1,
            records: values
                .iter()
                .enumerate()
                .map(|(m, &v)| ScanRecord {
                    m: m as u64,
                    n: 4,
                    distances: vec![DistanceValue { value: v, tail_bound: 1.0 / 64.0 }],
                })
                .collect(),
        }
    }

    #[test]
    fn extremes() {
        let t = table(&[0.0, 0.3, 0.9]);
        assert_eq!(find_hits(&t, "t", 1.5).unwrap().len(), 3);
        assert!(find_hits(&t, "t", 0.0).unwrap().is_empty());
        assert!(find_hits(&t, "u", 0.5).is_err());
    }

    #[test]
    fn conservative_rule() {
        let t = table(&[0.0, 0.1, 0.2]);
        let h = find_hits(&t, "t", 0.1 + 1.0 / 64.0).unwrap();
        assert_eq!(h.hits, vec![(0, 4)]);
        assert_eq!(h.scanned, 3);
    }
}
