use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::ReferenceMeasure;
use crate::scalar::{ExactSum, Scalar};
use crate::systems::{Adjacency, DynamicalSystem, OrbitCursor, State, SymbolicPoint};
use crate::weakstar::{push_term, DistanceValue, TestFamily};

/// Distances of one window `sigma_{m,n}(x)` to each target, in target order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord<S> {
    pub m: u64,
    pub n: u64,
    pub distances: Vec<DistanceValue<S>>,
}

/// Records of one scan together with the target labels they refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable<S> {
    pub labels: Vec<String>,
    pub n: u64,
    pub m_max: u64,
    pub records: Vec<ScanRecord<S>>,
}

impl<S: Scalar> ScanTable<S> {
    pub fn target_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::validation("target", format!("no target labelled '{label}'")))
    }
}

/// One scanned window as handed to a sink.
#[derive(Clone, Debug)]
pub struct WindowOutput<S> {
    pub record: ScanRecord<S>,
    /// `int phi_k d sigma` per family entry, if requested.
    pub integrals: Option<Vec<S>>,
}

/// Which windows to scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub n: u64,
    /// Last window start; starts range over `0..=m_max`.
    pub m_max: u64,
    pub stride: u64,
    /// With `Some(eps)` and `stride > 1`, every start within `stride` of a
    /// coarse window whose distance to some target is below `2 eps` is
    /// scanned as well.
    pub refine: Option<f64>,
}

impl ScanPlan {
    pub fn new(n: u64, m_max: u64) -> Self {
        ScanPlan {
            n,
            m_max,
            stride: 1,
            refine: None,
        }
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_refinement(mut self, epsilon: f64) -> Self {
        self.refine = Some(epsilon);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n", "window length must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::validation("stride", "must be at least 1"));
        }
        if let Some(eps) = self.refine {
            if !(eps > 0.0) {
                return Err(Error::validation("refine", "epsilon must be positive"));
            }
        }
        Ok(())
    }

    /// Largest sequence index read when scanning a point with a family whose
    /// entries read `lookahead` symbols.
    pub fn last_index(&self, lookahead: u64) -> u64 {
        self.m_max + self.n - 1 + lookahead.saturating_sub(1)
    }
}

/// Thread count and work split of a scan. Results do not depend on either.
#[derive(Clone, Debug, Default)]
pub struct Execution {
    /// `None` uses rayon's default.
    pub threads: Option<usize>,
    pub keep_integrals: bool,
}

/// `int phi_k d mu` for every target and entry.
pub fn target_integrals<S: Scalar>(family: &TestFamily, targets: &[ReferenceMeasure]) -> Result<Vec<Vec<S>>> {
    targets.iter().map(|t| family.integrals(t)).collect()
}

const CHUNK: usize = 1 << 16;

/// Integral values held per chunk when windows carry their integrals.
const KEPT_VALUES: usize = 1 << 20;

/// Sequential chunked reads of a symbolic point, checking SFT transitions.
struct SymbolReader<'a> {
    point: &'a SymbolicPoint,
    adjacency: Option<&'a Adjacency>,
    base: u64,
    buf: Vec<u8>,
}

impl<'a> SymbolReader<'a> {
    fn new(point: &'a SymbolicPoint, adjacency: Option<&'a Adjacency>) -> Self {
        SymbolReader {
            point,
            adjacency,
            base: 0,
            buf: Vec::new(),
        }
    }

    /// Symbols `j .. j + len` of the point; `j` must not decrease between calls.
    fn window(&mut self, j: u64, len: usize) -> Result<&[u8]> {
        let end = self.base + self.buf.len() as u64;
        if j < self.base || j + len as u64 > end {
            let horizon = self.point.sequence().horizon();
            let first = self.point.offset() + j;
            let available = horizon.saturating_sub(first).saturating_add(1);
            let take = (CHUNK.max(len) as u64).min(available).max(len as u64) as usize;
            self.buf.resize(take, 0);
            self.point.read(j, &mut self.buf)?;
            if let Some(adj) = self.adjacency {
                adj.check_word(&self.buf, first)?;
            }
            self.base = j;
        }
        let at = (j - self.base) as usize;
        Ok(&self.buf[at..at + len])
    }
}

/// Cylinder-count engine for word families on shift spaces: only the
/// `2 L` entries hit by the entering and leaving atoms change per step.
struct WordEngine<'a, S: Scalar> {
    head: SymbolReader<'a>,
    tail: SymbolReader<'a>,
    depth: usize,
    alphabet: u64,
    /// Index of the first word of each length.
    level_start: Vec<usize>,
    counts: Vec<u64>,
    /// Counts the distance accumulators currently reflect.
    synced: Vec<u64>,
    dirty: Vec<usize>,
    is_dirty: Vec<bool>,
    acc: Vec<S::Sum>,
}

impl<'a, S: Scalar> WordEngine<'a, S> {
    fn entries(&self, word: &[u8], out: &mut [usize]) {
        let mut code = 0u64;
        for (l, &s) in word.iter().enumerate() {
            code = code * self.alphabet + s as u64;
            out[l] = self.level_start[l] + code as usize;
        }
    }

    fn bump(&mut self, j: u64, up: bool) -> Result<()> {
        let mut idx = [0usize; 64];
        let depth = self.depth;
        let word = if up {
            self.head.window(j, depth)?
        } else {
            self.tail.window(j, depth)?
        };
        let mut w = [0u8; 64];
        w[..depth].copy_from_slice(word);
        self.entries(&w[..depth], &mut idx[..depth]);
        for &e in &idx[..depth] {
            if up {
                self.counts[e] += 1;
            } else {
                self.counts[e] -= 1;
            }
            if !self.is_dirty[e] {
                self.is_dirty[e] = true;
                self.dirty.push(e);
            }
        }
        Ok(())
    }

    fn sync(&mut self, family: &TestFamily, targets: &[Vec<S>], n: &S) {
        for &e in &self.dirty {
            self.is_dirty[e] = false;
            let (old, new) = (self.synced[e], self.counts[e]);
            if old == new {
                continue;
            }
            let scale = family.term_scale::<S>(e);
            let old_int = S::from_u64(old) / n.clone();
            let new_int = S::from_u64(new) / n.clone();
            for (acc, t) in self.acc.iter_mut().zip(targets) {
                push_term(acc, &scale, &old_int, &t[e], true);
                push_term(acc, &scale, &new_int, &t[e], false);
            }
            self.synced[e] = new;
        }
        self.dirty.clear();
    }
}

/// Running sums of every entry along a pair of orbit cursors.
struct GeneralEngine<'a, S: Scalar> {
    head: OrbitCursor<'a>,
    tail: OrbitCursor<'a>,
    sums: Vec<S::Sum>,
}

enum Engine<'a, S: Scalar> {
    Words(WordEngine<'a, S>),
    General(GeneralEngine<'a, S>),
}

/// An incrementally maintained window `sigma_{m,n}(x)`.
///
/// Sliding by one step adds one atom and removes one. All sums are exact, so
/// integrals and distances after any sequence of slides equal those of a
/// scanner built directly at the same `m`.
pub struct WindowScanner<'a, S: Scalar> {
    family: &'a TestFamily,
    targets: &'a [Vec<S>],
    n: u64,
    n_s: S,
    m: u64,
    engine: Engine<'a, S>,
}

impl<'a, S: Scalar> WindowScanner<'a, S> {
    /// The window `sigma_{m,n}(x)`. `targets` holds per-target integral
    /// vectors (see [`target_integrals`]).
    pub fn new(
        sys: &'a DynamicalSystem,
        x: &'a State,
        family: &'a TestFamily,
        targets: &'a [Vec<S>],
        n: u64,
        m: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("n", "window length must be at least 1"));
        }
        sys.check_state(x)?;
        if family.space() != sys.space() {
            return Err(Error::Incompatible(format!(
                "family on {} for a system on {}",
                family.space(),
                sys.space()
            )));
        }
        if targets.iter().any(|t| t.len() != family.len()) {
            return Err(Error::Incompatible("target integrals do not match the family".into()));
        }
        let n_s = S::from_u64(n);
        let engine = match (family.word_depth(), x) {
            (Some(depth), State::Symbolic(p)) if depth <= 64 => {
                let alphabet = p.alphabet() as u64;
                let mut level_start = Vec::with_capacity(depth);
                let (mut start, mut size) = (0usize, 1usize);
                for _ in 0..depth {
                    level_start.push(start);
                    size *= alphabet as usize;
                    start += size;
                }
                let mut eng = WordEngine {
                    head: SymbolReader::new(p, sys.adjacency()),
                    tail: SymbolReader::new(p, sys.adjacency()),
                    depth,
                    alphabet,
                    level_start,
                    counts: vec![0; family.len()],
                    synced: vec![0; family.len()],
                    dirty: Vec::new(),
                    is_dirty: vec![false; family.len()],
                    acc: vec![S::Sum::default(); targets.len()],
                };
                let zero = S::zero();
                for (acc, t) in eng.acc.iter_mut().zip(targets) {
                    for (e, te) in t.iter().enumerate() {
                        push_term(acc, &family.term_scale::<S>(e), &zero, te, false);
                    }
                }
                for j in m..m + n {
                    eng.bump(j, true)?;
                }
                // the tail reader starts where the window does
                eng.tail.window(m, depth)?;
                eng.sync(family, targets, &n_s);
                Engine::Words(eng)
            }
            _ => {
                let mut tail = sys.cursor(x.clone())?;
                tail.advance(m)?;
                let mut head = tail.clone();
                let mut sums = vec![S::Sum::default(); family.len()];
                for j in 0..n {
                    if j > 0 {
                        head.advance(1)?;
                    }
                    for (sum, phi) in sums.iter_mut().zip(family.observables()) {
                        sum.add(&S::from_f64(phi.eval(head.state())?));
                    }
                }
                head.advance(1)?;
                Engine::General(GeneralEngine { head, tail, sums })
            }
        };
        Ok(WindowScanner {
            family,
            targets,
            n,
            n_s,
            m,
            engine,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Slides the window `k` steps forward.
    pub fn advance(&mut self, k: u64) -> Result<()> {
        match &mut self.engine {
            Engine::Words(eng) => {
                for _ in 0..k {
                    eng.bump(self.m + self.n, true)?;
                    eng.bump(self.m, false)?;
                    self.m += 1;
                }
            }
            Engine::General(eng) => {
                for _ in 0..k {
                    for (sum, phi) in eng.sums.iter_mut().zip(self.family.observables()) {
                        sum.add(&S::from_f64(phi.eval(eng.head.state())?));
                        sum.sub(&S::from_f64(phi.eval(eng.tail.state())?));
                    }
                    eng.head.advance(1)?;
                    eng.tail.advance(1)?;
                    self.m += 1;
                }
            }
        }
        Ok(())
    }

    /// `int phi_k d sigma_{m,n}` per family entry.
    pub fn integrals(&self) -> Vec<S> {
        match &self.engine {
            Engine::Words(eng) => eng
                .counts
                .iter()
                .map(|&c| S::from_u64(c) / self.n_s.clone())
                .collect(),
            Engine::General(eng) => eng
                .sums
                .iter()
                .map(|s| s.value() / self.n_s.clone())
                .collect(),
        }
    }

    /// Distances of the current window to every target.
    pub fn distances(&mut self) -> Vec<DistanceValue<S>> {
        let tail_bound = self.family.tail_bound::<S>();
        match &mut self.engine {
            Engine::Words(eng) => {
                eng.sync(self.family, self.targets, &self.n_s);
                eng.acc
                    .iter()
                    .map(|acc| DistanceValue {
                        value: acc.value(),
                        tail_bound: tail_bound.clone(),
                    })
                    .collect()
            }
            Engine::General(_) => {
                let ints = self.integrals();
                self.targets
                    .iter()
                    .map(|t| self.family.distance_between(&ints, t))
                    .collect()
            }
        }
    }

    pub fn record(&mut self) -> ScanRecord<S> {
        ScanRecord {
            m: self.m,
            n: self.n,
            distances: self.distances(),
        }
    }
}

/// An arithmetic run of window starts `start, start + step, ...` (`count` of them).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Run {
    start: u64,
    step: u64,
    count: u64,
}

/// Runs covering at most `steps_per_chunk` steps and `max_windows` starts
/// each, in order.
fn split_runs(runs: &[Run], steps_per_chunk: u64, max_windows: u64) -> Vec<Run> {
    let mut out = Vec::new();
    for r in runs {
        let per = (steps_per_chunk / r.step).clamp(1, max_windows.max(1));
        let mut done = 0;
        while done < r.count {
            let count = per.min(r.count - done);
            out.push(Run {
                start: r.start + done * r.step,
                step: r.step,
                count,
            });
            done += count;
        }
    }
    out
}

/// Window starts of the plan, given the coarse starts flagged for refinement.
fn plan_runs(plan: &ScanPlan, flagged: &[u64]) -> Vec<Run> {
    let s = plan.stride;
    // refined intervals, merged
    let mut intervals: Vec<(u64, u64)> = Vec::new();
    for &m in flagged {
        let lo = m.saturating_sub(s - 1);
        let hi = (m + s - 1).min(plan.m_max);
        match intervals.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => intervals.push((lo, hi)),
        }
    }
    let mut runs = Vec::new();
    // grid points g = k s with from <= g <= to
    let push_grid = |from: u64, to: u64, runs: &mut Vec<Run>| {
        if from > to {
            return;
        }
        let first = from.div_ceil(s) * s;
        if first > to {
            return;
        }
        let count = (to - first) / s + 1;
        runs.push(Run {
            start: first,
            step: s,
            count,
        });
    };
    let mut next = 0u64;
    for (lo, hi) in intervals {
        if lo > 0 {
            push_grid(next, lo - 1, &mut runs);
        }
        runs.push(Run {
            start: lo,
            step: 1,
            count: hi - lo + 1,
        });
        next = hi + 1;
    }
    if next <= plan.m_max {
        push_grid(next, plan.m_max, &mut runs);
    }
    runs
}

fn scan_run<S: Scalar>(
    sys: &DynamicalSystem,
    x: &State,
    family: &TestFamily,
    targets: &[Vec<S>],
    n: u64,
    run: Run,
    keep_integrals: bool,
) -> Result<Vec<WindowOutput<S>>> {
    let mut scanner = WindowScanner::new(sys, x, family, targets, n, run.start)?;
    let mut out = Vec::with_capacity(run.count as usize);
    for i in 0..run.count {
        if i > 0 {
            scanner.advance(run.step)?;
        }
        out.push(WindowOutput {
            record: scanner.record(),
            integrals: keep_integrals.then(|| scanner.integrals()),
        });
    }
    Ok(out)
}

fn run_chunks<S: Scalar>(
    sys: &DynamicalSystem,
    x: &State,
    family: &TestFamily,
    targets: &[Vec<S>],
    n: u64,
    chunks: &[Run],
    keep_integrals: bool,
    exec: &Execution,
    sink: &mut dyn FnMut(WindowOutput<S>) -> Result<()>,
) -> Result<()> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = exec.threads {
            b = b.num_threads(t);
        }
        b.build()
            .map_err(|e| Error::validation("threads", e.to_string()))?
    };
    let batch = pool.current_num_threads().max(1) * 2;
    for group in chunks.chunks(batch) {
        let results: Vec<Result<Vec<WindowOutput<S>>>> = pool.install(|| {
            group
                .par_iter()
                .map(|&run| scan_run(sys, x, family, targets, n, run, keep_integrals))
                .collect()
        });
        for r in results {
            for w in r? {
                sink(w)?;
            }
        }
    }
    Ok(())
}

/// Streams every planned window, in increasing `m`, to `sink`.
///
/// Work is split into chunks scanned in parallel and merged in order, so the
/// output is identical for any thread count.
pub fn scan_with<S: Scalar>(
    sys: &DynamicalSystem,
    x: &State,
    targets: &[ReferenceMeasure],
    family: &TestFamily,
    plan: &ScanPlan,
    exec: &Execution,
    mut sink: impl FnMut(WindowOutput<S>) -> Result<()>,
) -> Result<()> {
    plan.validate()?;
    let target_ints = target_integrals::<S>(family, targets)?;
    let steps = (CHUNK as u64).max(4 * plan.n);
    let mut flagged = Vec::new();
    if let (Some(eps), true) = (plan.refine, plan.stride > 1) {
        let threshold = S::from_f64(2.0 * eps);
        let coarse = plan_runs(plan, &[]);
        run_chunks(
            sys,
            x,
            family,
            &target_ints,
            plan.n,
            &split_runs(&coarse, steps, u64::MAX),
            false,
            exec,
            &mut |w: WindowOutput<S>| {
                if w.record.distances.iter().any(|d| d.value < threshold) {
                    flagged.push(w.record.m);
                }
                Ok(())
            },
        )?;
    }
    let runs = plan_runs(plan, &flagged);
    let max_windows = if exec.keep_integrals {
        (KEPT_VALUES / family.len().max(1)).max(256) as u64
    } else {
        u64::MAX
    };
    run_chunks(
        sys,
        x,
        family,
        &target_ints,
        plan.n,
        &split_runs(&runs, steps, max_windows),
        exec.keep_integrals,
        exec,
        &mut sink,
    )
}

/// Collects the records of [`scan_with`].
pub fn scan<S: Scalar>(
    sys: &DynamicalSystem,
    x: &State,
    targets: &[ReferenceMeasure],
    family: &TestFamily,
    plan: &ScanPlan,
    exec: &Execution,
) -> Result<ScanTable<S>> {
    let mut records = Vec::new();
    scan_with(sys, x, targets, family, plan, exec, |w: WindowOutput<S>| {
        records.push(w.record);
        Ok(())
    })?;
    Ok(ScanTable {
        labels: targets.iter().map(|t| t.label().to_string()).collect(),
        n: plan.n,
        m_max: plan.m_max,
        records,
    })
}
