use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A run of `len` symbols produced by repeating `word` cyclically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub word: Vec<u8>,
    pub len: u64,
}

impl Segment {
    pub fn explicit(word: Vec<u8>) -> Segment {
        let len = word.len() as u64;
        Segment { word, len }
    }

    fn symbol(&self, i: u64) -> u8 {
        self.word[(i % self.word.len() as u64) as usize]
    }
}

/// How the symbols of a [`SymbolSequence`] are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// `preamble` followed by `cycle` repeated forever.
    EventuallyPeriodic { preamble: Vec<u8>, cycle: Vec<u8> },
    /// The concatenation of `segments`, then an eventually periodic tail.
    BlockProgram {
        segments: Vec<Segment>,
        tail_preamble: Vec<u8>,
        tail_cycle: Vec<u8>,
    },
    /// Independent symbols drawn from `distribution`. Symbol `i` is a pure
    /// function of `(seed, i)`: the `i`-th 64-bit output of ChaCha8 seeded with
    /// `seed_from_u64(seed)`, mapped through the cumulative distribution.
    SeededIid { distribution: Vec<f64>, seed: u64 },
}

/// A one-sided infinite symbol sequence, readable up to an explicit horizon.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SequenceSpec", into = "SequenceSpec")]
pub struct SymbolSequence {
    alphabet: u8,
    generator: Generator,
    horizon: u64,
    label: String,
    // block programs: start index of every segment, then the tail start
    starts: Vec<u64>,
    cumulative: Vec<f64>,
}

impl PartialEq for SymbolSequence {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.horizon == other.horizon
            && self.generator == other.generator
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceSpec {
    alphabet: u8,
    #[serde(default)]
    label: String,
    horizon: Option<u64>,
    generator: Generator,
}

impl TryFrom<SequenceSpec> for SymbolSequence {
    type Error = Error;
    fn try_from(spec: SequenceSpec) -> Result<Self> {
        let horizon = spec.horizon.unwrap_or(u64::MAX);
        SymbolSequence::new(spec.alphabet, spec.generator, horizon)
            .map(|s| s.with_label(spec.label))
    }
}

impl From<SymbolSequence> for SequenceSpec {
    fn from(s: SymbolSequence) -> Self {
        SequenceSpec {
            alphabet: s.alphabet,
            label: s.label,
            horizon: (s.horizon != u64::MAX).then_some(s.horizon),
            generator: s.generator,
        }
    }
}

impl SymbolSequence {
    /// Builds and validates a sequence. Deterministic generators have no
    /// natural end, so their horizon may be `u64::MAX`; seeded-iid sequences
    /// are only as long as the caller declares.
    pub fn new(alphabet: u8, generator: Generator, horizon: u64) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::validation("alphabet", "size must be at least 2"));
        }
        let check_word = |what: &'static str, w: &[u8]| -> Result<()> {
            match w.iter().position(|&s| s >= alphabet) {
                Some(i) => Err(Error::validation(
                    what,
                    format!("symbol {} at position {i} outside alphabet of size {alphabet}", w[i]),
                )),
                None => Ok(()),
            }
        };
        let mut starts = Vec::new();
        let mut cumulative = Vec::new();
        match &generator {
            Generator::EventuallyPeriodic { preamble, cycle } => {
                check_word("preamble", preamble)?;
                check_word("cycle", cycle)?;
                if cycle.is_empty() {
                    return Err(Error::validation("cycle", "must be nonempty"));
                }
            }
            Generator::BlockProgram {
                segments,
                tail_preamble,
                tail_cycle,
            } => {
                let mut at = 0u64;
                for seg in segments {
                    check_word("segment", &seg.word)?;
                    if seg.word.is_empty() && seg.len > 0 {
                        return Err(Error::validation("segment", "empty word with nonzero length"));
                    }
                    starts.push(at);
                    at = at
                        .checked_add(seg.len)
                        .ok_or_else(|| Error::validation("segment", "total length overflows"))?;
                }
                starts.push(at);
                check_word("tail preamble", tail_preamble)?;
                check_word("tail cycle", tail_cycle)?;
                if tail_cycle.is_empty() {
                    return Err(Error::validation("tail cycle", "must be nonempty"));
                }
            }
            Generator::SeededIid { distribution, .. } => {
                if distribution.len() != alphabet as usize {
                    return Err(Error::validation(
                        "distribution",
                        format!("has {} entries for alphabet {alphabet}", distribution.len()),
                    ));
                }
                validate_distribution(distribution)?;
                let mut acc = 0.0;
                for p in distribution {
                    acc += p;
                    cumulative.push(acc);
                }
            }
        }
        Ok(SymbolSequence {
            alphabet,
            generator,
            horizon,
            label: String::new(),
            starts,
            cumulative,
        })
    }

    pub fn eventually_periodic(alphabet: u8, preamble: Vec<u8>, cycle: Vec<u8>) -> Result<Self> {
        Self::new(alphabet, Generator::EventuallyPeriodic { preamble, cycle }, u64::MAX)
    }

    pub fn periodic(alphabet: u8, cycle: Vec<u8>) -> Result<Self> {
        Self::eventually_periodic(alphabet, Vec::new(), cycle)
    }

    pub fn seeded_iid(distribution: Vec<f64>, seed: u64, horizon: u64) -> Result<Self> {
        let alphabet = u8::try_from(distribution.len())
            .map_err(|_| Error::validation("distribution", "too many symbols"))?;
        Self::new(alphabet, Generator::SeededIid { distribution, seed }, horizon)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// Period of the sequence from `periodic_from()` on, if it is eventually
    /// periodic by construction.
    pub fn eventual_period(&self) -> Option<(u64, u64)> {
        match &self.generator {
            Generator::EventuallyPeriodic { preamble, cycle } => {
                Some((preamble.len() as u64, cycle.len() as u64))
            }
            Generator::BlockProgram {
                tail_preamble,
                tail_cycle,
                ..
            } => Some((
                self.tail_start() + tail_preamble.len() as u64,
                tail_cycle.len() as u64,
            )),
            Generator::SeededIid { .. } => None,
        }
    }

    fn tail_start(&self) -> u64 {
        self.starts.last().copied().unwrap_or(0)
    }

    fn check(&self, index: u64) -> Result<()> {
        if index > self.horizon {
            Err(Error::Horizon {
                index,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    pub fn symbol(&self, index: u64) -> Result<u8> {
        let mut out = [0u8];
        self.read(index, &mut out)?;
        Ok(out[0])
    }

    /// Fills `out` with the symbols at `start, start + 1, ...`.
    pub fn read(&self, start: u64, out: &mut [u8]) -> Result<()> {
        if out.is_empty() {
            return Ok(());
        }
        let last = start
            .checked_add(out.len() as u64 - 1)
            .ok_or(Error::Horizon {
                index: u64::MAX,
                horizon: self.horizon,
            })?;
        self.check(last)?;
        match &self.generator {
            Generator::EventuallyPeriodic { preamble, cycle } => {
                read_eventually_periodic(preamble, cycle, start, out)
            }
            Generator::BlockProgram {
                segments,
                tail_preamble,
                tail_cycle,
            } => {
                let tail = self.tail_start();
                let mut pos = start;
                let mut filled = 0;
                // first segment containing `pos`
                let mut seg = self.starts.partition_point(|&s| s <= pos).saturating_sub(1);
                while filled < out.len() && pos < tail {
                    while self.starts[seg + 1] <= pos {
                        seg += 1;
                    }
                    let s = &segments[seg];
                    let seg_end = self.starts[seg + 1];
                    let take = ((seg_end - pos) as usize).min(out.len() - filled);
                    let local = pos - self.starts[seg];
                    for (j, slot) in out[filled..filled + take].iter_mut().enumerate() {
                        *slot = s.symbol(local + j as u64);
                    }
                    filled += take;
                    pos += take as u64;
                }
                if filled < out.len() {
                    read_eventually_periodic(tail_preamble, tail_cycle, pos - tail, &mut out[filled..]);
                }
            }
            Generator::SeededIid { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(2 * start as u128);
                for slot in out.iter_mut() {
                    *slot = self.draw(rng.next_u64());
                }
            }
        }
        Ok(())
    }

    fn draw(&self, raw: u64) -> u8 {
        let u = (raw >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1) as u8
    }

    pub fn word(&self, start: u64, len: usize) -> Result<Vec<u8>> {
        let mut out = vec![0; len];
        self.read(start, &mut out)?;
        Ok(out)
    }
}

fn read_eventually_periodic(preamble: &[u8], cycle: &[u8], start: u64, out: &mut [u8]) {
    let p = preamble.len() as u64;
    let c = cycle.len() as u64;
    for (j, slot) in out.iter_mut().enumerate() {
        let i = start + j as u64;
        *slot = if i < p {
            preamble[i as usize]
        } else {
            cycle[((i - p) % c) as usize]
        };
    }
}

pub(crate) fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::validation("distribution", "entries must lie in [0, 1]"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::validation(
            "distribution",
            format!("entries sum to {total}, not 1"),
        ));
    }
    Ok(())
}

/// Derives the seed of stream `stream` from a master seed: the first output of
/// ChaCha8 seeded with `seed_from_u64(master)` and switched to stream `stream`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}
