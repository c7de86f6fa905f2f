//! Running a validated config end to end and persisting the results.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use oscstat::asymptotics::{
    build_covering, classify, scan_with, Classification, Execution, HitSet, Hull, HullBuilder, WindowOutput,
};
use oscstat::systems::{BlockRecord, DenseRecord};
use oscstat::weakstar::FamilyDescriptor;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{HarnessError, HarnessResult};

pub const REPORT_SCHEMA: &str = "oscstat.report.v1";
pub const HULL_SCHEMA: &str = "oscstat.hull.v1";
pub const DEFAULT_OUT_DIR: &str = "oscstat-out";

pub const SCAN_FILE: &str = "scan.csv";
pub const HULL_FILE: &str = "hull.json";
pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// Hits of one target at one threshold, as maximal runs of consecutive
/// scanned windows that are all hits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitSummary {
    pub target: String,
    pub epsilon: f64,
    pub n: u64,
    pub count: u64,
    pub scanned: u64,
    /// Inclusive ranges of window starts.
    pub runs: Vec<[u64; 2]>,
}

impl HitSummary {
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullSummary {
    pub centers: usize,
    pub radius: f64,
    pub diameter: f64,
    pub windows: u64,
}

/// Results for one window length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub n: u64,
    pub windows: u64,
    pub hits: Vec<HitSummary>,
    pub hull: HullSummary,
    pub classification: Classification<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub blocks: Vec<BlockRecord>,
    pub dense: Vec<DenseRecord>,
    pub tail_start: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringSummary {
    pub k: u64,
    pub centers: Vec<String>,
    /// Covering center of each target, by index.
    pub assignment: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    /// `(n, seconds)` for each window length.
    pub per_length: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub system: String,
    pub point: String,
    pub family: FamilyDescriptor,
    pub tail_bound: f64,
    pub targets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSummary>,
    pub covering: CoveringSummary,
    pub lengths: Vec<LengthReport>,
    /// Classification at the longest window length.
    pub classification: Classification<f64>,
    /// Wall-clock times; written to their own file so reports stay
    /// reproducible.
    #[serde(skip)]
    pub timings: Timings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullFile {
    pub schema: String,
    pub hulls: Vec<Hull<f64>>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; all cores when unset. Outputs do not depend on it.
    pub threads: Option<usize>,
    /// Overrides the config's output directory.
    pub out_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn out_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

struct HitTracker {
    set: HitSet<f64>,
    target: usize,
    runs: Vec<[u64; 2]>,
    open: bool,
}

impl HitTracker {
    fn offer(&mut self, w: &WindowOutput<f64>) {
        let before = self.set.len();
        self.set.offer(&w.record, self.target);
        let m = w.record.m;
        if self.set.len() > before {
            match self.runs.last_mut() {
                Some(r) if self.open => r[1] = m,
                _ => self.runs.push([m, m]),
            }
            self.open = true;
        } else {
            self.open = false;
        }
    }

    fn summary(self) -> HitSummary {
        HitSummary {
            target: self.set.target,
            epsilon: self.set.epsilon,
            n: self.set.n_list.first().copied().unwrap_or(0),
            count: self.set.hits.len() as u64,
            scanned: self.set.scanned,
            runs: self.runs,
        }
    }
}

/// Files written under a temporary name and moved into place together.
struct Staged {
    dir: PathBuf,
    files: Vec<(PathBuf, PathBuf)>,
}

impl Staged {
    fn create(&mut self, name: &str) -> HarnessResult<BufWriter<File>> {
        let final_path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.partial"));
        let f = File::create(&tmp).map_err(|e| HarnessError::runtime(format!("{}: {e}", tmp.display())))?;
        self.files.push((tmp, final_path));
        Ok(BufWriter::new(f))
    }

    fn commit(mut self) -> HarnessResult<()> {
        let files = std::mem::take(&mut self.files);
        for (i, (tmp, path)) in files.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, path) {
                for (_, done) in &files[..i] {
                    let _ = fs::remove_file(done);
                }
                for (rest, _) in &files[i..] {
                    let _ = fs::remove_file(rest);
                }
                return Err(HarnessError::runtime(format!("{}: {e}", path.display())));
            }
        }
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        for (tmp, _) in &self.files {
            let _ = fs::remove_file(tmp);
        }
    }
}

/// Shortest round-trip text for `v`, in exponent form when very small or
/// very large.
pub fn number(v: f64) -> String {
    if v != 0.0 && !(1e-5..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn write_json<T: Serialize>(out: &mut impl Write, value: &T) -> HarnessResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(HarnessError::runtime)?;
    out.write_all(b"\n").map_err(HarnessError::runtime)?;
    out.flush().map_err(HarnessError::runtime)
}

/// Runs every scan of `config`, writes `scan.csv`, `hull.json`, `report.json`
/// and `timings.json` to the output directory and returns the report.
///
/// Nothing is left behind when the run fails.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> HarnessResult<ExperimentReport> {
    let config = config.clone().validated()?;
    let exp = config.build()?;
    let dir = opts.out_dir(&config);
    let created = !dir.exists();
    fs::create_dir_all(&dir).map_err(|e| HarnessError::runtime(format!("{}: {e}", dir.display())))?;
    let result = run_into(&config, &exp, opts, &dir);
    if result.is_err() && created {
        let _ = fs::remove_dir(&dir);
    }
    result
}

fn run_into(
    config: &ExperimentConfig,
    exp: &Experiment,
    opts: &RunOptions,
    dir: &Path,
) -> HarnessResult<ExperimentReport> {
    let started = Instant::now();
    let mut staged = Staged {
        dir: dir.to_path_buf(),
        files: Vec::new(),
    };
    let family = &exp.family;
    let labels: Vec<String> = exp.targets.iter().map(|t| t.label().to_string()).collect();
    let covering = build_covering::<f64>(&exp.targets, config.covering_k(), family).map_err(HarnessError::runtime)?;

    let mut csv = csv::Writer::from_writer(staged.create(SCAN_FILE)?);
    let mut header = vec!["m".to_string(), "n".to_string()];
    header.extend(labels.iter().cloned());
    header.push("tail_bound".into());
    csv.write_record(&header).map_err(HarnessError::runtime)?;

    let exec = Execution {
        threads: opts.threads,
        keep_integrals: true,
    };
    let mut lengths = Vec::new();
    let mut hulls = Vec::new();
    let mut timings = Timings::default();
    for &n in &config.scan.n {
        let t0 = Instant::now();
        let plan = config.plan(n);
        let mut trackers: Vec<HitTracker> = Vec::new();
        for &eps in &config.analysis.epsilons {
            for (t, label) in labels.iter().enumerate() {
                trackers.push(HitTracker {
                    set: HitSet::new(label.clone(), eps, config.scan.m_max, vec![n]),
                    target: t,
                    runs: Vec::new(),
                    open: false,
                });
            }
        }
        let mut hull = HullBuilder::new(family, config.hull_radius()).map_err(HarnessError::runtime)?;
        let mut windows = 0u64;
        let mut row = Vec::with_capacity(header.len());
        let mut io_error = None;
        scan_with(&exp.system, &exp.point, &exp.targets, family, &plan, &exec, |w: WindowOutput<f64>| {
            windows += 1;
            row.clear();
            row.push(w.record.m.to_string());
            row.push(w.record.n.to_string());
            row.extend(w.record.distances.iter().map(|d| number(d.value)));
            row.push(number(w.record.distances.first().map_or(0.0, |d| d.tail_bound)));
            if let Err(e) = csv.write_record(&row) {
                io_error.get_or_insert(e);
            }
            for t in &mut trackers {
                t.offer(&w);
            }
            if let Some(ints) = w.integrals {
                hull.offer(w.record.m, w.record.n, ints);
            }
            Ok(())
        })
        .map_err(HarnessError::runtime)?;
        if let Some(e) = io_error {
            return Err(HarnessError::runtime(e));
        }
        let hull = hull.finish();
        let classification =
            classify(&hull, &covering, family, config.classify_epsilon()).map_err(HarnessError::runtime)?;
        lengths.push(LengthReport {
            n,
            windows,
            hits: trackers.into_iter().map(HitTracker::summary).collect(),
            hull: HullSummary {
                centers: hull.centers.len(),
                radius: hull.radius,
                diameter: hull.diameter,
                windows: hull.windows,
            },
            classification,
        });
        hulls.push(hull);
        timings.per_length.push((n, t0.elapsed().as_secs_f64()));
    }
    let mut file = csv.into_inner().map_err(|e| HarnessError::runtime(e.error()))?;
    file.flush().map_err(HarnessError::runtime)?;

    let longest = config.scan.n.iter().enumerate().max_by_key(|(_, &n)| n).map_or(0, |(i, _)| i);
    let report = ExperimentReport {
        schema: REPORT_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        system: exp.system.id(),
        point: exp.point.describe(),
        family: family.descriptor(),
        tail_bound: family.tail_bound(),
        targets: labels,
        design: exp.design.as_ref().map(|d| DesignSummary {
            blocks: d.blocks.clone(),
            dense: d.dense.clone(),
            tail_start: d.tail_start,
        }),
        covering: CoveringSummary {
            k: covering.k,
            centers: covering.centers.iter().map(|c| c.label().to_string()).collect(),
            assignment: covering.assignment.clone(),
        },
        classification: lengths[longest].classification.clone(),
        lengths,
        timings: Timings::default(),
    };
    write_json(
        &mut staged.create(HULL_FILE)?,
        &HullFile {
            schema: HULL_SCHEMA.into(),
            hulls,
        },
    )?;
    write_json(&mut staged.create(REPORT_FILE)?, &report)?;
    timings.total_seconds = started.elapsed().as_secs_f64();
    write_json(&mut staged.create(TIMINGS_FILE)?, &timings)?;
    staged.commit()?;
    Ok(ExperimentReport { timings, ..report })
}
