//! State spaces and dynamics of the system catalog.
//!
//! Shift spaces (and the doubling map, through its binary coding) are iterated
//! symbolically. Circle rotations and torus automorphisms act on 64-bit
//! fixed-point fractions, where integer-matrix maps mod 1 are exact.

mod design;
mod fixed;
mod sequence;
mod transitive;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use design::{
    design_transitive_point, interleaved_schedule, BlockKind, BlockRecord, DenseRecord, DesignItem,
    DesignedPoint, PointDesign, TypicalBlock,
};
pub use fixed::Fixed;
pub use sequence::{derive_seed, Generator, Segment, SymbolSequence};
pub use transitive::{check_transitive, Adjacency};
pub(crate) use sequence::validate_distribution as sequence_validate_distribution;

/// The space a state, measure or observable lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "kebab-case")]
pub enum StateSpace {
    /// One-sided sequences over `alphabet` symbols. With `alphabet == 2` this
    /// is also the binary coding of the circle under the doubling map.
    Shift { alphabet: u8 },
    Circle,
    Torus,
}

impl StateSpace {
    /// Whether points of this space have a circle coordinate.
    pub fn has_circle_coordinate(&self) -> bool {
        matches!(self, StateSpace::Circle | StateSpace::Shift { alphabet: 2 })
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpace::Shift { alphabet } => write!(f, "shift({alphabet})"),
            StateSpace::Circle => f.write_str("circle"),
            StateSpace::Torus => f.write_str("torus"),
        }
    }
}

/// A shifted view `(x_offset, x_offset+1, ...)` of a symbol sequence.
#[derive(Clone, Debug)]
pub struct SymbolicPoint {
    sequence: Arc<SymbolSequence>,
    offset: u64,
}

impl PartialEq for SymbolicPoint {
    fn eq(&self, other: &Self) -> bool {
        self.offset == other.offset
            && (Arc::ptr_eq(&self.sequence, &other.sequence) || self.sequence == other.sequence)
    }
}

impl SymbolicPoint {
    pub fn new(sequence: Arc<SymbolSequence>, offset: u64) -> Result<Self> {
        if offset > sequence.horizon() {
            return Err(Error::Horizon {
                index: offset,
                horizon: sequence.horizon(),
            });
        }
        Ok(SymbolicPoint { sequence, offset })
    }

    pub fn sequence(&self) -> &Arc<SymbolSequence> {
        &self.sequence
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn alphabet(&self) -> u8 {
        self.sequence.alphabet()
    }

    pub fn symbol(&self, j: u64) -> Result<u8> {
        self.sequence.symbol(self.index(j)?)
    }

    pub fn read(&self, j: u64, out: &mut [u8]) -> Result<()> {
        self.sequence.read(self.index(j)?, out)
    }

    fn index(&self, j: u64) -> Result<u64> {
        self.offset.checked_add(j).ok_or(Error::Horizon {
            index: u64::MAX,
            horizon: self.sequence.horizon(),
        })
    }

    /// The first 64 binary digits as a fixed-point fraction (binary alphabet
    /// only): the point of the circle this sequence codes, truncated to 2^-64.
    pub fn dyadic(&self) -> Result<Fixed> {
        if self.alphabet() != 2 {
            return Err(Error::Incompatible(format!(
                "dyadic evaluation needs a binary sequence, alphabet is {}",
                self.alphabet()
            )));
        }
        let mut bits = [0u8; 64];
        self.read(0, &mut bits)?;
        Ok(Fixed(bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)))
    }

    /// Whether this and `other` denote the same infinite sequence. Decidable
    /// here for shifts of one eventually periodic sequence.
    pub fn same_point(&self, other: &SymbolicPoint) -> bool {
        if self == other {
            return true;
        }
        if !Arc::ptr_eq(&self.sequence, &other.sequence) && self.sequence != other.sequence {
            return false;
        }
        match self.sequence.eventual_period() {
            Some((start, period)) => {
                let (a, b) = (self.offset, other.offset);
                a >= start && b >= start && (a - start) % period == (b - start) % period
            }
            None => false,
        }
    }

    fn shifted(&self, k: u64) -> Result<SymbolicPoint> {
        SymbolicPoint::new(self.sequence.clone(), self.index(k)?)
    }
}

/// A point of one of the catalog state spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Symbolic(SymbolicPoint),
    Circle(Fixed),
    Torus(Fixed, Fixed),
}

impl State {
    pub fn symbolic(sequence: Arc<SymbolSequence>) -> State {
        State::Symbolic(SymbolicPoint {
            sequence,
            offset: 0,
        })
    }

    pub fn space(&self) -> StateSpace {
        match self {
            State::Symbolic(p) => StateSpace::Shift {
                alphabet: p.alphabet(),
            },
            State::Circle(_) => StateSpace::Circle,
            State::Torus(..) => StateSpace::Torus,
        }
    }

    pub fn as_symbolic(&self) -> Option<&SymbolicPoint> {
        match self {
            State::Symbolic(p) => Some(p),
            _ => None,
        }
    }

    /// Same point of the state space (see [`SymbolicPoint::same_point`]).
    pub fn same_point(&self, other: &State) -> bool {
        match (self, other) {
            (State::Symbolic(a), State::Symbolic(b)) => a.same_point(b),
            _ => self == other,
        }
    }

    /// Short human-readable identifier.
    pub fn describe(&self) -> String {
        match self {
            State::Symbolic(p) => {
                let label = p.sequence.label();
                let label = if label.is_empty() { "seq" } else { label };
                format!("{label}@{}", p.offset)
            }
            State::Circle(x) => format!("circle({:#x})", x.0),
            State::Torus(x, y) => format!("torus({:#x},{:#x})", x.0, y.0),
        }
    }
}

/// An integer 2x2 matrix acting on the torus, `|det| = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[[i64; 2]; 2]", into = "[[i64; 2]; 2]")]
pub struct CatMatrix([[i64; 2]; 2]);

impl TryFrom<[[i64; 2]; 2]> for CatMatrix {
    type Error = Error;
    fn try_from(m: [[i64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128;
        if det.abs() != 1 {
            return Err(Error::validation(
                "cat-map matrix",
                format!("determinant is {det}, expected +1 or -1"),
            ));
        }
        Ok(CatMatrix(m))
    }
}

impl From<CatMatrix> for [[i64; 2]; 2] {
    fn from(m: CatMatrix) -> Self {
        m.0
    }
}

impl CatMatrix {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        m.try_into()
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.0
    }

    fn mul_mod(a: [[u64; 2]; 2], b: [[u64; 2]; 2]) -> [[u64; 2]; 2] {
        let mut c = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0]
                    .wrapping_mul(b[0][j])
                    .wrapping_add(a[i][1].wrapping_mul(b[1][j]));
            }
        }
        c
    }

    /// `A^k` with entries reduced mod 2^64.
    fn power_mod(&self, mut k: u64) -> [[u64; 2]; 2] {
        let mut base = self.0.map(|r| r.map(|v| v as u64));
        let mut acc = [[1, 0], [0, 1]];
        while k > 0 {
            if k & 1 == 1 {
                acc = Self::mul_mod(acc, base);
            }
            base = Self::mul_mod(base, base);
            k >>= 1;
        }
        acc
    }

    fn apply(m: [[u64; 2]; 2], x: Fixed, y: Fixed) -> (Fixed, Fixed) {
        (
            Fixed(m[0][0].wrapping_mul(x.0).wrapping_add(m[0][1].wrapping_mul(y.0))),
            Fixed(m[1][0].wrapping_mul(x.0).wrapping_add(m[1][1].wrapping_mul(y.0))),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemKind {
    FullShift { alphabet: u8 },
    Sft { adjacency: Adjacency },
    /// `x -> 2x mod 1`, iterated as the full 2-shift on binary expansions.
    Doubling,
    CatMap { matrix: CatMatrix },
    Rotation { angle: Fixed },
}

/// A continuous map of one of the catalog state spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemKind", into = "SystemKind")]
pub struct DynamicalSystem {
    kind: SystemKind,
}

impl TryFrom<SystemKind> for DynamicalSystem {
    type Error = Error;
    fn try_from(kind: SystemKind) -> Result<Self> {
        DynamicalSystem::new(kind)
    }
}

impl From<DynamicalSystem> for SystemKind {
    fn from(s: DynamicalSystem) -> Self {
        s.kind
    }
}

impl DynamicalSystem {
    pub fn new(kind: SystemKind) -> Result<Self> {
        if let SystemKind::FullShift { alphabet } = kind {
            if alphabet < 2 {
                return Err(Error::validation("alphabet", "size must be at least 2"));
            }
        }
        Ok(DynamicalSystem { kind })
    }

    pub fn full_shift(alphabet: u8) -> Result<Self> {
        Self::new(SystemKind::FullShift { alphabet })
    }

    pub fn sft(adjacency: Adjacency) -> Self {
        DynamicalSystem {
            kind: SystemKind::Sft { adjacency },
        }
    }

    pub fn doubling() -> Self {
        DynamicalSystem {
            kind: SystemKind::Doubling,
        }
    }

    pub fn cat_map(matrix: [[i64; 2]; 2]) -> Result<Self> {
        Ok(DynamicalSystem {
            kind: SystemKind::CatMap {
                matrix: CatMatrix::new(matrix)?,
            },
        })
    }

    pub fn rotation(angle: Fixed) -> Self {
        DynamicalSystem {
            kind: SystemKind::Rotation { angle },
        }
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn space(&self) -> StateSpace {
        match &self.kind {
            SystemKind::FullShift { alphabet } => StateSpace::Shift {
                alphabet: *alphabet,
            },
            SystemKind::Sft { adjacency } => StateSpace::Shift {
                alphabet: adjacency.size() as u8,
            },
            SystemKind::Doubling => StateSpace::Shift { alphabet: 2 },
            SystemKind::CatMap { .. } => StateSpace::Torus,
            SystemKind::Rotation { .. } => StateSpace::Circle,
        }
    }

    pub fn adjacency(&self) -> Option<&Adjacency> {
        match &self.kind {
            SystemKind::Sft { adjacency } => Some(adjacency),
            _ => None,
        }
    }

    pub fn id(&self) -> String {
        match &self.kind {
            SystemKind::FullShift { alphabet } => format!("full-shift({alphabet})"),
            SystemKind::Sft { adjacency } => format!("sft({:?})", adjacency.rows()),
            SystemKind::Doubling => "doubling".to_string(),
            SystemKind::CatMap { matrix } => format!("cat-map({:?})", matrix.entries()),
            SystemKind::Rotation { angle } => format!("rotation({:#x})", angle.0),
        }
    }

    pub fn check_state(&self, x: &State) -> Result<()> {
        if x.space() != self.space() {
            return Err(Error::Incompatible(format!(
                "state on {} given to a system on {}",
                x.space(),
                self.space()
            )));
        }
        Ok(())
    }

    /// Validates the SFT transitions `offset + i -> offset + i + 1` for
    /// `i < steps`.
    fn check_transitions(&self, p: &SymbolicPoint, steps: u64) -> Result<()> {
        let Some(adj) = self.adjacency() else {
            return Ok(());
        };
        const CHUNK: u64 = 4096;
        let mut done = 0u64;
        let mut buf = vec![0u8; (CHUNK + 1) as usize];
        while done < steps {
            let take = (steps - done).min(CHUNK);
            let slice = &mut buf[..(take + 1) as usize];
            p.read(done, slice)?;
            adj.check_word(slice, p.offset + done)?;
            done += take;
        }
        Ok(())
    }

    /// `f(x)`.
    pub fn step(&self, x: &State) -> Result<State> {
        self.iterate(x, 1)
    }

    /// `f^k(x)`, exact for every system in the catalog.
    pub fn iterate(&self, x: &State, k: u64) -> Result<State> {
        self.check_state(x)?;
        match (&self.kind, x) {
            (SystemKind::FullShift { .. } | SystemKind::Doubling, State::Symbolic(p)) => {
                Ok(State::Symbolic(p.shifted(k)?))
            }
            (SystemKind::Sft { .. }, State::Symbolic(p)) => {
                let next = p.shifted(k)?;
                self.check_transitions(p, k)?;
                Ok(State::Symbolic(next))
            }
            (SystemKind::Rotation { angle }, State::Circle(t)) => {
                Ok(State::Circle(t.wrapping_add(Fixed(angle.0.wrapping_mul(k)))))
            }
            (SystemKind::CatMap { matrix }, State::Torus(a, b)) => {
                let (a, b) = CatMatrix::apply(matrix.power_mod(k), *a, *b);
                Ok(State::Torus(a, b))
            }
            _ => unreachable!("space checked above"),
        }
    }

    pub fn cursor(&self, x: State) -> Result<OrbitCursor<'_>> {
        self.check_state(&x)?;
        Ok(OrbitCursor {
            system: self,
            state: x,
            step: 0,
        })
    }
}

/// A position along one orbit; advancing validates every transition passed.
#[derive(Clone, Debug)]
pub struct OrbitCursor<'a> {
    system: &'a DynamicalSystem,
    state: State,
    step: u64,
}

impl<'a> OrbitCursor<'a> {
    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn system(&self) -> &'a DynamicalSystem {
        self.system
    }

    pub fn advance(&mut self, k: u64) -> Result<&State> {
        self.state = self.system.iterate(&self.state, k)?;
        self.step += k;
        Ok(&self.state)
    }
}
