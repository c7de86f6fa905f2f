use serde::{Deserialize, Serialize};

use super::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::systems::State;

pub const EMPIRICAL_SCHEMA: &str = "oscstat.empirical.v1";

/// JSON form of an atom: symbolic atoms as their sequence offset and leading
/// symbols, torus and circle atoms as raw 64-bit fixed-point integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExportedAtom {
    Symbolic { offset: u64, prefix: String },
    Fixed(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalExport {
    pub schema: String,
    pub provenance: super::Provenance,
    pub n: u64,
    pub atoms: Vec<ExportedAtom>,
}

fn symbol_char(s: u8) -> char {
    char::from_digit(s as u32, 36).unwrap_or('?')
}

impl EmpiricalMeasure {
    /// Export record; symbolic atoms carry `prefix_len` leading symbols.
    pub fn export(&self, prefix_len: usize) -> Result<EmpiricalExport> {
        let atoms = self
            .atoms()
            .iter()
            .map(|a| {
                Ok(match a {
                    State::Symbolic(p) => {
                        let mut buf = vec![0u8; prefix_len];
                        p.read(0, &mut buf)?;
                        ExportedAtom::Symbolic {
                            offset: p.offset(),
                            prefix: buf.into_iter().map(symbol_char).collect(),
                        }
                    }
                    State::Circle(x) => ExportedAtom::Fixed(vec![x.0]),
                    State::Torus(x, y) => ExportedAtom::Fixed(vec![x.0, y.0]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EmpiricalExport {
            schema: EMPIRICAL_SCHEMA.to_string(),
            provenance: self.provenance().clone(),
            n: self.len() as u64,
            atoms,
        })
    }
}

/// Mass per bin. Circle: `bins` equal arcs. Torus: a `bins x bins` grid,
/// index `i * bins + j`. Shift over `a` symbols: cylinders of depth `d` where
/// `bins = a^d`, indexed by the base-`a` value of the leading word (for a
/// binary shift these are dyadic arcs of the circle).
pub fn histogram(mu: &EmpiricalMeasure, bins: usize) -> Result<Vec<(usize, f64)>> {
    if bins == 0 {
        return Err(Error::validation("bins", "must be positive"));
    }
    let total = if matches!(mu.atoms().first(), Some(State::Torus(..))) {
        bins * bins
    } else {
        bins
    };
    let mut counts = vec![0u64; total];
    let bin_of = |x: u64| ((x as u128 * bins as u128) >> 64) as usize;
    for atom in mu.atoms() {
        let idx = match atom {
            State::Circle(x) => bin_of(x.0),
            State::Torus(x, y) => bin_of(x.0) * bins + bin_of(y.0),
            State::Symbolic(p) => {
                let a = p.alphabet() as usize;
                let mut depth = 0;
                let mut size = 1usize;
                while size < bins {
                    size *= a;
                    depth += 1;
                }
                if size != bins {
                    return Err(Error::validation(
                        "bins",
                        format!("{bins} is not a power of the alphabet size {a}"),
                    ));
                }
                let mut buf = vec![0u8; depth];
                p.read(0, &mut buf)?;
                buf.iter().fold(0usize, |acc, &s| acc * a + s as usize)
            }
        };
        counts[idx] += 1;
    }
    let n = mu.len() as f64;
    Ok(counts.into_iter().enumerate().map(|(i, c)| (i, c as f64 / n)).collect())
}

pub fn histogram_csv(mu: &EmpiricalMeasure, bins: usize) -> Result<String> {
    let mut out = String::from("bin,mass\n");
    for (i, mass) in histogram(mu, bins)? {
        out.push_str(&format!("{i},{mass}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::empirical;
    use crate::systems::{DynamicalSystem, Fixed, SymbolSequence};
    use std::sync::Arc;

    #[test]
    fn export_symbolic_window() {
        let x = State::symbolic(Arc::new(SymbolSequence::periodic(2, vec![0, 1, 1]).unwrap()));
        let mu = empirical(&DynamicalSystem::full_shift(2).unwrap(), &x, 1, 2).unwrap();
        let e = mu.export(3).unwrap();
        assert_eq!(e.n, 2);
        assert_eq!(
            e.atoms,
            vec![
                ExportedAtom::Symbolic { offset: 1, prefix: "110".into() },
                ExportedAtom::Symbolic { offset: 2, prefix: "101".into() },
            ]
        );
        let json = serde_json::to_string(&e).unwrap();
        let back: EmpiricalExport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn histograms() {
        let rot = DynamicalSystem::rotation(Fixed::from_ratio(1, 4));
        let mu = empirical(&rot, &State::Circle(Fixed::ZERO), 0, 8).unwrap();
        let h = histogram(&mu, 4).unwrap();
        assert_eq!(h, vec![(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]);
        assert!(histogram_csv(&mu, 2).unwrap().starts_with("bin,mass\n0,0.5\n"));

        let x = State::symbolic(Arc::new(SymbolSequence::periodic(2, vec![0, 0, 1]).unwrap()));
        let mu = empirical(&DynamicalSystem::doubling(), &x, 0, 3).unwrap();
        // atoms 001.., 010.., 100..
        let h = histogram(&mu, 4).unwrap();
        assert_eq!(h.iter().map(|p| p.1).collect::<Vec<_>>(), vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!(histogram(&mu, 3).is_err());
    }
}
