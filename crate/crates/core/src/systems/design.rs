//! Construction of points with dense orbits and long statistically typical
//! stretches.
//!
//! A designed point is a block program: every finite (admissible) word up to
//! some length, enumerated by length and then lexicographically, interleaved
//! with long blocks that look typical for chosen reference measures. The
//! position of every block is recorded so scans can be checked against it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sequence::{derive_seed, Generator, Segment, SymbolSequence};
use super::transitive::Adjacency;
use crate::error::{Error, Result};

/// Upper bound on the symbols a single dense item may expand to.
const MAX_DENSE_SYMBOLS: u64 = 1 << 28;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockKind {
    /// `cycle` repeated: typical for the measure on that periodic orbit.
    Periodic { cycle: Vec<u8> },
    /// A seeded i.i.d. word: typical for the Bernoulli measure.
    Iid { distribution: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalBlock {
    pub label: String,
    pub kind: BlockKind,
    pub length: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "kebab-case")]
pub enum DesignItem {
    /// All words of each length in `min_len..=max_len`, shortest first, each
    /// length in lexicographic order.
    Dense { min_len: usize, max_len: usize },
    Block(TypicalBlock),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDesign {
    pub alphabet: u8,
    pub items: Vec<DesignItem>,
    /// Cycle repeated forever after the last item.
    pub tail: Vec<u8>,
    /// Transition constraint; `None` for the full shift.
    #[serde(default)]
    pub adjacency: Option<Adjacency>,
    /// The i.i.d. word of block number `j` (counting all items from 0) uses
    /// seed `derive_seed(seed, j)`.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub label: String,
    pub start: u64,
    pub length: u64,
}

impl BlockRecord {
    pub fn end(&self) -> u64 {
        self.start + self.length
    }

    pub fn contains(&self, index: u64) -> bool {
        (self.start..self.end()).contains(&index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseRecord {
    pub min_len: usize,
    pub max_len: usize,
    pub start: u64,
    pub length: u64,
}

#[derive(Clone, Debug)]
pub struct DesignedPoint {
    pub sequence: Arc<SymbolSequence>,
    pub blocks: Vec<BlockRecord>,
    pub dense: Vec<DenseRecord>,
    /// Index where the periodic tail (including any bridge into it) begins.
    pub tail_start: u64,
}

impl DesignedPoint {
    pub fn block(&self, label: &str) -> Option<&BlockRecord> {
        self.blocks.iter().find(|b| b.label == label)
    }
}

/// Dense levels `1..=dense_max_len`, with the `j`-th block placed right after
/// level `j + 1`; leftover blocks follow the last level.
pub fn interleaved_schedule(dense_max_len: usize, blocks: Vec<TypicalBlock>) -> Vec<DesignItem> {
    let mut items = Vec::new();
    let mut blocks = blocks.into_iter();
    for len in 1..=dense_max_len {
        items.push(DesignItem::Dense {
            min_len: len,
            max_len: len,
        });
        if let Some(b) = blocks.next() {
            items.push(DesignItem::Block(b));
        }
    }
    items.extend(blocks.map(DesignItem::Block));
    items
}

struct Builder<'a> {
    adjacency: Option<&'a Adjacency>,
    segments: Vec<Segment>,
    len: u64,
    last: Option<u8>,
}

impl Builder<'_> {
    fn bridge_to(&mut self, first: u8) -> Result<()> {
        let (Some(adj), Some(last)) = (self.adjacency, self.last) else {
            return Ok(());
        };
        let bridge = adj.bridge(last, first).ok_or_else(|| {
            Error::validation(
                "design",
                format!("no admissible path from symbol {last} to symbol {first}"),
            )
        })?;
        if !bridge.is_empty() {
            self.last = bridge.last().copied();
            self.push_raw(Segment::explicit(bridge));
        }
        Ok(())
    }

    fn push_raw(&mut self, seg: Segment) {
        self.len += seg.len;
        self.segments.push(seg);
    }

    /// Appends `seg`, bridging into it if needed; returns its start index.
    fn push(&mut self, seg: Segment) -> Result<u64> {
        if seg.len == 0 {
            return Ok(self.len);
        }
        self.bridge_to(seg.word[0])?;
        let start = self.len;
        let last_index = (seg.len - 1) % seg.word.len() as u64;
        self.last = Some(seg.word[last_index as usize]);
        self.push_raw(seg);
        Ok(start)
    }
}

fn dense_level(alphabet: u8, len: usize, adjacency: Option<&Adjacency>) -> Result<Vec<u8>> {
    let count = (alphabet as u64).checked_pow(len as u32);
    match count.and_then(|c| c.checked_mul(len as u64)) {
        Some(total) if total <= MAX_DENSE_SYMBOLS => {}
        _ => {
            return Err(Error::validation(
                "design",
                format!("dense words of length {len} over {alphabet} symbols are too many"),
            ))
        }
    }
    let mut out = Vec::new();
    let mut word = vec![0u8; len];
    loop {
        let admissible = adjacency.is_none_or(|a| a.check_word(&word, 0).is_ok());
        if admissible {
            if let (Some(adj), Some(&last)) = (adjacency, out.last()) {
                let bridge = adj.bridge(last, word[0]).ok_or_else(|| {
                    Error::validation(
                        "design",
                        format!("no admissible path from symbol {last} to symbol {}", word[0]),
                    )
                })?;
                out.extend(bridge);
            }
            out.extend_from_slice(&word);
        }
        // next word in lexicographic order
        let mut i = len;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            word[i] += 1;
            if word[i] < alphabet {
                break;
            }
            word[i] = 0;
        }
    }
}

/// Builds the block program described by `design`.
pub fn design_transitive_point(design: &PointDesign) -> Result<DesignedPoint> {
    let alphabet = design.alphabet;
    if alphabet < 2 {
        return Err(Error::validation("alphabet", "size must be at least 2"));
    }
    let adjacency = design.adjacency.as_ref();
    if let Some(adj) = adjacency {
        if adj.size() != alphabet as usize {
            return Err(Error::validation(
                "adjacency",
                format!("has {} symbols, alphabet has {alphabet}", adj.size()),
            ));
        }
    }
    let in_alphabet = |what: &'static str, w: &[u8]| -> Result<()> {
        match w.iter().find(|&&s| s >= alphabet) {
            Some(s) => Err(Error::validation(what, format!("symbol {s} outside alphabet"))),
            None => Ok(()),
        }
    };
    let mut b = Builder {
        adjacency,
        segments: Vec::new(),
        len: 0,
        last: None,
    };
    let mut blocks = Vec::new();
    let mut dense = Vec::new();
    for (j, item) in design.items.iter().enumerate() {
        match item {
            DesignItem::Dense { min_len, max_len } => {
                if *min_len == 0 || min_len > max_len {
                    return Err(Error::validation(
                        "dense item",
                        format!("bad length range {min_len}..={max_len}"),
                    ));
                }
                let start = b.len;
                let mut first_start = None;
                for len in *min_len..=*max_len {
                    let words = dense_level(alphabet, len, adjacency)?;
                    if !words.is_empty() {
                        let s = b.push(Segment::explicit(words))?;
                        first_start.get_or_insert(s);
                    }
                }
                dense.push(DenseRecord {
                    min_len: *min_len,
                    max_len: *max_len,
                    start: first_start.unwrap_or(start),
                    length: b.len - first_start.unwrap_or(start),
                });
            }
            DesignItem::Block(block) => {
                if block.length == 0 {
                    return Err(Error::validation(
                        "block",
                        format!("block '{}' has zero length", block.label),
                    ));
                }
                let seg = match &block.kind {
                    BlockKind::Periodic { cycle } => {
                        if cycle.is_empty() {
                            return Err(Error::validation("block", "empty cycle"));
                        }
                        in_alphabet("block cycle", cycle)?;
                        Segment {
                            word: cycle.clone(),
                            len: block.length,
                        }
                    }
                    BlockKind::Iid { distribution } => {
                        let seq = SymbolSequence::new(
                            alphabet,
                            Generator::SeededIid {
                                distribution: distribution.clone(),
                                seed: derive_seed(design.seed, j as u64),
                            },
                            block.length - 1,
                        )?;
                        Segment::explicit(seq.word(0, block.length as usize)?)
                    }
                };
                let start_hint = b.len;
                if let Some(adj) = adjacency {
                    if seg.len > seg.word.len() as u64 {
                        adj.check_cycle(&seg.word, start_hint)?;
                    } else {
                        adj.check_word(&seg.word[..seg.len as usize], start_hint)?;
                    }
                }
                let start = b.push(seg)?;
                blocks.push(BlockRecord {
                    label: block.label.clone(),
                    start,
                    length: block.length,
                });
            }
        }
    }
    if design.tail.is_empty() {
        return Err(Error::validation("tail", "cycle must be nonempty"));
    }
    in_alphabet("tail", &design.tail)?;
    let mut tail_preamble = Vec::new();
    if let (Some(adj), Some(last)) = (adjacency, b.last) {
        adj.check_cycle(&design.tail, b.len)?;
        tail_preamble = adj.bridge(last, design.tail[0]).ok_or_else(|| {
            Error::validation("tail", "no admissible path into the tail cycle")
        })?;
    }
    let tail_start = b.len;
    let sequence = SymbolSequence::new(
        alphabet,
        Generator::BlockProgram {
            segments: b.segments,
            tail_preamble,
            tail_cycle: design.tail.clone(),
        },
        u64::MAX,
    )?
    .with_label("designed");
    Ok(DesignedPoint {
        sequence: Arc::new(sequence),
        blocks,
        dense,
        tail_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(items: Vec<DesignItem>) -> PointDesign {
        PointDesign {
            alphabet: 2,
            items,
            tail: vec![0, 0, 1],
            adjacency: None,
            seed: 11,
        }
    }

    #[test]
    fn dense_enumeration_is_length_lexicographic() {
        let p = design_transitive_point(&design(vec![DesignItem::Dense { min_len: 1, max_len: 3 }])).unwrap();
        let w = p.sequence.word(0, 2 + 8 + 6).unwrap();
        assert_eq!(w, vec![0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1]);
        assert_eq!(p.dense[0].length, 2 + 8 + 24);
        assert_eq!(p.tail_start, 34);
        assert_eq!(p.sequence.word(34, 4).unwrap(), vec![0, 0, 1, 0]);
    }

    #[test]
    fn block_scheduled_first() {
        let items = vec![
            DesignItem::Block(TypicalBlock {
                label: "zeros".into(),
                kind: BlockKind::Periodic { cycle: vec![0] },
                length: 1000,
            }),
            DesignItem::Dense { min_len: 1, max_len: 2 },
        ];
        let p = design_transitive_point(&design(items)).unwrap();
        assert_eq!(p.block("zeros").unwrap(), &BlockRecord { label: "zeros".into(), start: 0, length: 1000 });
        assert!(p.sequence.word(0, 1000).unwrap().iter().all(|&s| s == 0));
        assert_eq!(p.sequence.symbol(1001).unwrap(), 1);
    }

    #[test]
    fn iid_block_is_the_seeded_word() {
        let items = vec![
            DesignItem::Dense { min_len: 1, max_len: 1 },
            DesignItem::Block(TypicalBlock {
                label: "fair".into(),
                kind: BlockKind::Iid { distribution: vec![0.5, 0.5] },
                length: 1000,
            }),
        ];
        let d = design(items);
        let p = design_transitive_point(&d).unwrap();
        let rec = p.block("fair").unwrap();
        assert_eq!(rec.start, 2);
        let block = p.sequence.word(rec.start, 1000).unwrap();
        let oracle = SymbolSequence::seeded_iid(vec![0.5, 0.5], derive_seed(d.seed, 1), 999)
            .unwrap()
            .word(0, 1000)
            .unwrap();
        assert_eq!(block, oracle);
        let ones = block.iter().filter(|&&s| s == 1).count() as f64 / 1000.0;
        assert!((ones - 0.5).abs() < 0.05, "frequency {ones}");
    }

    #[test]
    fn sft_design_is_admissible_and_bridged() {
        let golden = Adjacency::new(&[vec![0, 1], vec![1, 1]]).unwrap();
        let items = interleaved_schedule(
            4,
            vec![TypicalBlock {
                label: "alt".into(),
                kind: BlockKind::Periodic { cycle: vec![0, 1] },
                length: 50,
            }],
        );
        let d = PointDesign {
            alphabet: 2,
            items,
            tail: vec![1],
            adjacency: Some(golden.clone()),
            seed: 0,
        };
        let p = design_transitive_point(&d).unwrap();
        let w = p.sequence.word(0, p.tail_start as usize + 10).unwrap();
        golden.check_word(&w, 0).unwrap();
        let rec = p.block("alt").unwrap();
        assert_eq!(p.sequence.word(rec.start, 4).unwrap(), vec![0, 1, 0, 1]);
    }

    #[test]
    fn inadmissible_block_is_rejected() {
        let golden = Adjacency::new(&[vec![0, 1], vec![1, 1]]).unwrap();
        let d = PointDesign {
            alphabet: 2,
            items: vec![DesignItem::Block(TypicalBlock {
                label: "zeros".into(),
                kind: BlockKind::Periodic { cycle: vec![0] },
                length: 10,
            })],
            tail: vec![1],
            adjacency: Some(golden),
            seed: 0,
        };
        assert!(matches!(design_transitive_point(&d), Err(Error::Inadmissible { from: 0, to: 0, .. })));
    }

    #[test]
    fn interleaving_order() {
        let blocks: Vec<_> = (0..3)
            .map(|i| TypicalBlock {
                label: format!("b{i}"),
                kind: BlockKind::Periodic { cycle: vec![0] },
                length: 5,
            })
            .collect();
        let items = interleaved_schedule(2, blocks);
        let tags: Vec<String> = items
            .iter()
            .map(|i| match i {
                DesignItem::Dense { min_len, .. } => format!("d{min_len}"),
                DesignItem::Block(b) => b.label.clone(),
            })
            .collect();
        assert_eq!(tags, ["d1", "b0", "d2", "b1", "b2"]);
    }
}
