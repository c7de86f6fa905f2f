use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transition matrix of a subshift of finite type: `allowed(a, b)` iff the
/// symbol `b` may follow `a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct Adjacency {
    size: usize,
    cells: Vec<bool>,
}

impl TryFrom<Vec<Vec<u8>>> for Adjacency {
    type Error = Error;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        Adjacency::new(&rows)
    }
}

impl From<Adjacency> for Vec<Vec<u8>> {
    fn from(a: Adjacency) -> Self {
        a.rows()
    }
}

impl Adjacency {
    /// Validates a square 0/1 matrix without dead states (every row and every
    /// column has a 1).
    pub fn new(rows: &[Vec<u8>]) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::validation("adjacency", "matrix is empty"));
        }
        if size > 256 {
            return Err(Error::validation("adjacency", "more than 256 symbols"));
        }
        let mut cells = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::validation(
                    "adjacency",
                    format!("row {i} has {} entries, expected {size}", row.len()),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => cells.push(false),
                    1 => cells.push(true),
                    _ => {
                        return Err(Error::validation(
                            "adjacency",
                            format!("entry ({i}, {j}) is {v}, expected 0 or 1"),
                        ))
                    }
                }
            }
        }
        let a = Adjacency { size, cells };
        for i in 0..size {
            if !(0..size).any(|j| a.allowed(i as u8, j as u8)) {
                return Err(Error::validation("adjacency", format!("row {i} is all zero")));
            }
            if !(0..size).any(|j| a.allowed(j as u8, i as u8)) {
                return Err(Error::validation("adjacency", format!("column {i} is all zero")));
            }
        }
        Ok(a)
    }

    pub fn full(size: usize) -> Self {
        Adjacency {
            size,
            cells: vec![true; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn allowed(&self, from: u8, to: u8) -> bool {
        self.cells[from as usize * self.size + to as usize]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.cells
            .chunks(self.size)
            .map(|r| r.iter().map(|&b| b as u8).collect())
            .collect()
    }

    /// Checks every transition inside `word`; `first_index` is the sequence
    /// index of `word[0]`, used for error reporting.
    pub fn check_word(&self, word: &[u8], first_index: u64) -> Result<()> {
        for (i, w) in word.windows(2).enumerate() {
            if !self.allowed(w[0], w[1]) {
                return Err(Error::Inadmissible {
                    from: w[0],
                    to: w[1],
                    index: first_index + i as u64,
                });
            }
        }
        Ok(())
    }

    /// Checks `cycle` repeated forever, including the wrap-around transition.
    pub fn check_cycle(&self, cycle: &[u8], first_index: u64) -> Result<()> {
        self.check_word(cycle, first_index)?;
        if let (Some(&last), Some(&first)) = (cycle.last(), cycle.first()) {
            if !self.allowed(last, first) {
                return Err(Error::Inadmissible {
                    from: last,
                    to: first,
                    index: first_index + cycle.len() as u64 - 1,
                });
            }
        }
        Ok(())
    }

    fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.size).filter(move |&w| self.cells[v * self.size + w])
    }

    fn reaches_all(&self, reverse: bool) -> bool {
        let mut seen = vec![false; self.size];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for w in 0..self.size {
                let edge = if reverse {
                    self.cells[w * self.size + v]
                } else {
                    self.cells[v * self.size + w]
                };
                if edge && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Strong connectivity of the transition graph.
    pub fn is_transitive(&self) -> bool {
        self.reaches_all(false) && self.reaches_all(true)
    }

    /// Intermediate symbols of a shortest admissible path from `from` to `to`
    /// (empty when `to` may directly follow `from`).
    pub fn bridge(&self, from: u8, to: u8) -> Option<Vec<u8>> {
        if self.allowed(from, to) {
            return Some(Vec::new());
        }
        let mut parent = vec![usize::MAX; self.size];
        let mut queue = VecDeque::new();
        for s in self.successors(from as usize) {
            if parent[s] == usize::MAX {
                parent[s] = from as usize;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if self.allowed(v as u8, to) {
                let mut path = vec![v as u8];
                let mut cur = v;
                while parent[cur] != from as usize {
                    cur = parent[cur];
                    path.push(cur as u8);
                }
                path.reverse();
                return Some(path);
            }
            for w in self.successors(v) {
                if parent[w] == usize::MAX && w != from as usize {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// Whether the subshift with this transition matrix is topologically
/// transitive, i.e. its transition graph is strongly connected.
pub fn check_transitive(rows: &[Vec<u8>]) -> Result<bool> {
    Ok(Adjacency::new(rows)?.is_transitive())
}
