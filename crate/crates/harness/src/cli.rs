//! Command line: argument definitions, compact measure/system specs and the
//! subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use oscstat::asymptotics::{scan_with, Execution, WindowOutput};
use oscstat::measures::{empirical, EmpiricalMeasure, Measure, Observable, ReferenceMeasure};
use oscstat::systems::{check_transitive, design_transitive_point, PointDesign, StateSpace};
use oscstat::weakstar::{build_family, default_depth, distance, DistanceValue, TestFamily};
use serde::Serialize;

use crate::config::{
    validate_config, Angle, AnalysisSpec, ExperimentConfig, FamilySpec, NamedAngle, PointSpec, ScanSpec, SystemSpec,
    TargetSpec,
};
use crate::error::{HarnessError, HarnessResult};
use crate::experiment::{number, run_experiment, ExperimentReport, RunOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "oscstat", version, about = "Windowed empirical measures along orbits and their distances to ergodic targets")]
pub struct Cli {
    /// Master seed, overriding the config's.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Where `run` writes its files (default: the config's, else `oscstat-out`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Machine-readable output instead of text.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Scan one point against some targets and print the distances.
    Scan {
        /// e.g. `full-shift:2`, `sft:1,1;1,0`, `doubling`, `cat-map:2,1;1,1`, `rotation:golden`
        #[arg(long)]
        system: String,
        /// e.g. `iid:0.5,0.5`, `periodic:0,1`, `periodic:1,1/0`, `word:0,1,1`, `circle:0.3`, `torus:0.1,0.2`
        #[arg(long)]
        point: String,
        /// e.g. `periodic:0`, `bernoulli:0.5,0.5`, `lebesgue`, `orbit:0.25/4`; repeatable
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        /// Window length.
        #[arg(short, long)]
        n: u64,
        /// Last window start.
        #[arg(long)]
        m_max: u64,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Test family depth (word length or frequency).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Decide whether a 0/1 adjacency matrix defines a transitive subshift.
    CheckTransitive {
        /// `[[1,1],[1,0]]`, `1,1;1,0`, or a file holding either
        matrix: String,
    },
    /// Distance between two measures.
    Distance {
        a: String,
        b: String,
        /// `shift:A`, `circle` or `torus`; taken from `--system` when given
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        /// Keep only the first K test functions.
        #[arg(long)]
        entries: Option<usize>,
        /// System and point for `window:m,n` measures.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        point: Option<String>,
    },
    /// Build a designed point from a TOML or JSON spec and print its program.
    DesignPoint { spec: PathBuf },
}

fn usage(m: impl Into<String>) -> HarnessError {
    HarnessError::Usage(m.into())
}

fn numbers<T: std::str::FromStr>(what: &str, s: &str) -> HarnessResult<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| usage(format!("bad number {t:?} in {what}"))))
        .collect()
}

fn rows<T: std::str::FromStr>(what: &str, s: &str) -> HarnessResult<Vec<Vec<T>>> {
    s.split(';').map(|r| numbers(what, r)).collect()
}

fn split_spec(s: &str) -> (&str, &str) {
    s.split_once(':').unwrap_or((s, ""))
}

pub fn parse_system(s: &str) -> HarnessResult<SystemSpec> {
    let (kind, arg) = split_spec(s);
    Ok(match kind {
        "full-shift" => SystemSpec::FullShift {
            alphabet: arg.parse().map_err(|_| usage(format!("bad alphabet in {s:?}")))?,
        },
        "sft" => SystemSpec::Sft {
            adjacency: rows("sft", arg)?,
        },
        "doubling" => SystemSpec::Doubling,
        "cat-map" => {
            let m: Vec<Vec<i64>> = rows("cat-map", arg)?;
            match m.as_slice() {
                [a, b] if a.len() == 2 && b.len() == 2 => SystemSpec::CatMap {
                    matrix: [[a[0], a[1]], [b[0], b[1]]],
                },
                _ => return Err(usage(format!("cat-map needs a 2x2 matrix, got {arg:?}"))),
            }
        }
        "rotation" => SystemSpec::Rotation {
            angle: if arg == "golden" {
                Angle::Named(NamedAngle::Golden)
            } else {
                Angle::Turns(arg.parse().map_err(|_| usage(format!("bad angle in {s:?}")))?)
            },
        },
        _ => return Err(usage(format!("unknown system {s:?}"))),
    })
}

pub fn parse_point(s: &str) -> HarnessResult<PointSpec> {
    let (kind, arg) = split_spec(s);
    Ok(match kind {
        "iid" => PointSpec::SeededIid {
            distribution: numbers("iid", arg)?,
            horizon: None,
        },
        "periodic" => {
            let (preamble, cycle) = arg.split_once('/').unwrap_or(("", arg));
            PointSpec::Periodic {
                preamble: numbers("periodic", preamble)?,
                cycle: numbers("periodic", cycle)?,
            }
        }
        "word" => PointSpec::Explicit {
            word: numbers("word", arg)?,
        },
        "circle" => PointSpec::Circle {
            x: arg.parse().map_err(|_| usage(format!("bad coordinate in {s:?}")))?,
        },
        "torus" => match numbers::<f64>("torus", arg)?.as_slice() {
            &[x, y] => PointSpec::Torus { x, y },
            _ => return Err(usage(format!("torus needs two coordinates, got {arg:?}"))),
        },
        _ => return Err(usage(format!("unknown point {s:?}"))),
    })
}

/// A target spec; its label is the spec text.
pub fn parse_target(s: &str) -> HarnessResult<TargetSpec> {
    let (kind, arg) = split_spec(s);
    let label = s.to_string();
    Ok(match kind {
        "periodic" => TargetSpec::Periodic {
            label,
            cycle: numbers("periodic", arg)?,
        },
        "bernoulli" => TargetSpec::Bernoulli {
            label,
            p: numbers("bernoulli", arg)?,
        },
        "lebesgue" => TargetSpec::Lebesgue { label },
        "orbit" => {
            let (coords, period) = arg
                .split_once('/')
                .ok_or_else(|| usage(format!("orbit needs a period after '/', got {s:?}")))?;
            let period = period.parse().map_err(|_| usage(format!("bad period in {s:?}")))?;
            match *numbers::<f64>("orbit", coords)?.as_slice() {
                [x] => TargetSpec::PeriodicOrbit { label, x, y: None, period },
                [x, y] => TargetSpec::PeriodicOrbit { label, x, y: Some(y), period },
                _ => return Err(usage(format!("orbit needs one or two coordinates, got {coords:?}"))),
            }
        }
        _ => return Err(usage(format!("unknown target {s:?}"))),
    })
}

fn parse_space(s: &str) -> HarnessResult<StateSpace> {
    let (kind, arg) = split_spec(s);
    match kind {
        "shift" => Ok(StateSpace::Shift {
            alphabet: arg.parse().map_err(|_| usage(format!("bad alphabet in {s:?}")))?,
        }),
        "circle" => Ok(StateSpace::Circle),
        "torus" => Ok(StateSpace::Torus),
        _ => Err(usage(format!("unknown space {s:?}"))),
    }
}

/// `[[1,1],[1,0]]` or `1,1;1,0`.
pub fn parse_matrix(s: &str) -> HarnessResult<Vec<Vec<u8>>> {
    let s = s.trim();
    if s.starts_with('[') {
        serde_json::from_str(s).map_err(|e| usage(format!("bad matrix: {e}")))
    } else {
        rows("matrix", s)
    }
}

enum AnyMeasure {
    Empirical(EmpiricalMeasure),
    Reference(ReferenceMeasure),
}

impl Measure for AnyMeasure {
    fn space(&self) -> StateSpace {
        match self {
            AnyMeasure::Empirical(m) => m.space(),
            AnyMeasure::Reference(r) => r.space(),
        }
    }

    fn integrate<S: oscstat::Scalar>(&self, phi: &Observable) -> oscstat::Result<S> {
        match self {
            AnyMeasure::Empirical(m) => m.integrate(phi),
            AnyMeasure::Reference(r) => r.integrate(phi),
        }
    }
}

fn read_text(path: &Path) -> HarnessResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_out(out: &mut dyn Write, text: &str) -> HarnessResult<()> {
    stdout_result(out.write_all(text.as_bytes()))
}

/// A closed pipe (`oscstat scan ... | head`) ends output quietly.
fn stdout_result(r: std::io::Result<()>) -> HarnessResult<()> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(HarnessError::runtime),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

/// Runs the parsed command line, printing to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> HarnessResult<()> {
    if cli.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    match &cli.command {
        Command::Run { config } => {
            let mut config = validate_config(&read_text(config)?)?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            let opts = RunOptions {
                threads: cli.threads,
                out_dir: cli.out_dir.clone(),
            };
            let report = run_experiment(&config, &opts)?;
            match cli.format {
                Some(Format::Json) => write_out(out, &to_json(&report)),
                Some(Format::Csv) => write_out(out, &report_csv(&report)),
                None => write_out(out, &report_text(&report, &opts.out_dir(&config))),
            }
        }
        Command::Scan {
            system,
            point,
            targets,
            n,
            m_max,
            stride,
            depth,
        } => {
            let config = ExperimentConfig {
                seed: cli.seed.unwrap_or(0),
                output_dir: None,
                system: parse_system(system)?,
                point: parse_point(point)?,
                family: FamilySpec { depth: *depth },
                targets: targets.iter().map(|t| parse_target(t)).collect::<HarnessResult<_>>()?,
                scan: ScanSpec {
                    n: vec![*n],
                    m_max: *m_max,
                    stride: *stride,
                    refine: false,
                },
                analysis: AnalysisSpec {
                    epsilons: vec![0.05],
                    classify_epsilon: None,
                    covering_k: None,
                    hull_radius: None,
                },
            }
            .validated()?;
            scan_command(cli, &config, out)
        }
        Command::CheckTransitive { matrix } => {
            let text = if Path::new(matrix).is_file() {
                read_text(Path::new(matrix))?
            } else {
                matrix.clone()
            };
            let rows = parse_matrix(&text)?;
            let transitive = check_transitive(&rows).map_err(|e| HarnessError::invalid("matrix", e.to_string()))?;
            let text = match cli.format {
                Some(Format::Json) => format!("{{\"transitive\":{transitive}}}\n"),
                Some(Format::Csv) => format!("transitive\n{transitive}\n"),
                None if transitive => "transitive\n".into(),
                None => "not transitive\n".into(),
            };
            write_out(out, &text)
        }
        Command::Distance {
            a,
            b,
            space,
            depth,
            entries,
            system,
            point,
        } => {
            let dv = distance_command(cli, a, b, space.as_deref(), *depth, *entries, system.as_deref(), point.as_deref())?;
            let text = match cli.format {
                Some(Format::Json) => serde_json::to_string(&dv).expect("plain data serializes") + "\n",
                Some(Format::Csv) => format!("value,tail_bound\n{},{}\n", number(dv.value), number(dv.tail_bound)),
                None => format!("{} (tail bound {})\n", number(dv.value), number(dv.tail_bound)),
            };
            write_out(out, &text)
        }
        Command::DesignPoint { spec } => {
            let text = read_text(spec)?;
            let mut design: PointDesign = if spec.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).map_err(|e| {
                    HarnessError::Parse {
                        line: e.line(),
                        column: e.column(),
                        message: e.to_string(),
                    }
                })?
            } else {
                toml::from_str(&text).map_err(|e| {
                    HarnessError::at_offset(&text, e.span().map_or(0, |s| s.start), e.message().trim())
                })?
            };
            if let Some(seed) = cli.seed {
                design.seed = seed;
            }
            let point = design_transitive_point(&design).map_err(|e| HarnessError::invalid("design", e.to_string()))?;
            let text = match cli.format {
                Some(Format::Csv) => {
                    let mut s = String::from("label,start,length\n");
                    for b in &point.blocks {
                        s += &format!("{},{},{}\n", b.label, b.start, b.length);
                    }
                    s
                }
                _ => to_json(&serde_json::json!({
                    "sequence": &*point.sequence,
                    "blocks": point.blocks,
                    "dense": point.dense,
                    "tail_start": point.tail_start,
                })),
            };
            write_out(out, &text)
        }
    }
}

/// Quotes a CSV field when it holds a separator or quote.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scan_command(cli: &Cli, config: &ExperimentConfig, out: &mut dyn Write) -> HarnessResult<()> {
    let exp = config.build()?;
    let labels: Vec<&str> = exp.targets.iter().map(|t| t.label()).collect();
    let exec = Execution {
        threads: cli.threads,
        keep_integrals: false,
    };
    let json = cli.format == Some(Format::Json);
    let mut io = Ok(());
    if !json {
        let header: Vec<String> = labels.iter().map(|l| csv_field(l)).collect();
        io = writeln!(out, "m,n,{},tail_bound", header.join(","));
    }
    scan_with(
        &exp.system,
        &exp.point,
        &exp.targets,
        &exp.family,
        &config.plan(config.scan.n[0]),
        &exec,
        |w: WindowOutput<f64>| {
            if io.is_err() {
                return Ok(());
            }
            let r = &w.record;
            let tail = number(r.distances[0].tail_bound);
            io = if json {
                let fields: Vec<String> = labels
                    .iter()
                    .zip(&r.distances)
                    .map(|(l, d)| format!("{}:{}", serde_json::to_string(l).unwrap_or_default(), number(d.value)))
                    .collect();
                writeln!(out, "{{\"m\":{},\"n\":{},\"distances\":{{{}}},\"tail_bound\":{tail}}}", r.m, r.n, fields.join(","))
            } else {
                let values: Vec<String> = r.distances.iter().map(|d| number(d.value)).collect();
                writeln!(out, "{},{},{},{tail}", r.m, r.n, values.join(","))
            };
            Ok(())
        },
    )
    .map_err(HarnessError::runtime)?;
    stdout_result(io)
}

#[allow(clippy::too_many_arguments)]
fn distance_command(
    cli: &Cli,
    a: &str,
    b: &str,
    space: Option<&str>,
    depth: Option<usize>,
    entries: Option<usize>,
    system: Option<&str>,
    point: Option<&str>,
) -> HarnessResult<DistanceValue<f64>> {
    // a stand-in config holding the system and point for window and orbit measures
    let built = match (system, point) {
        (Some(s), Some(p)) => {
            let spec = parse_system(s)?;
            let sys = spec.build()?;
            let config = ExperimentConfig {
                seed: cli.seed.unwrap_or(0),
                output_dir: None,
                system: spec,
                point: parse_point(p)?,
                family: FamilySpec { depth },
                targets: vec![TargetSpec::Lebesgue { label: "-".into() }],
                scan: ScanSpec {
                    n: vec![1],
                    m_max: 0,
                    stride: 1,
                    refine: false,
                },
                analysis: AnalysisSpec {
                    epsilons: vec![0.05],
                    classify_epsilon: None,
                    covering_k: None,
                    hull_radius: None,
                },
            };
            Some((sys, config))
        }
        (None, None) => None,
        _ => return Err(usage("--system and --point go together")),
    };
    let space = match (&built, space) {
        (Some((sys, _)), _) => sys.space(),
        (None, Some(s)) => parse_space(s)?,
        (None, None) => StateSpace::Shift { alphabet: 2 },
    };
    let depth = depth.unwrap_or_else(|| default_depth(space));
    let mut family = build_family(space, depth).map_err(|e| HarnessError::invalid("depth", e.to_string()))?;
    if let Some(k) = entries {
        if k == 0 || k > family.len() {
            return Err(usage(format!("--entries must be in 1..={}", family.len())));
        }
        family = TestFamily::custom(space, family.observables()[..k].to_vec())
            .map_err(|e| HarnessError::invalid("entries", e.to_string()))?;
    }
    let measure = |spec: &str| -> HarnessResult<AnyMeasure> {
        if let Some(arg) = spec.strip_prefix("window:") {
            let Some((_, config)) = &built else {
                return Err(usage("window measures need --system and --point"));
            };
            let (m, n) = match numbers::<u64>("window", arg)?.as_slice() {
                &[m, n] => (m, n),
                _ => return Err(usage(format!("window needs m,n, got {arg:?}"))),
            };
            let mut config = config.clone();
            config.scan.n = vec![n.max(1)];
            config.scan.m_max = m;
            let exp = config.validated()?.build()?;
            let mu = empirical(&exp.system, &exp.point, m, n).map_err(|e| HarnessError::invalid("window", e.to_string()))?;
            return Ok(AnyMeasure::Empirical(mu));
        }
        let target = parse_target(spec)?;
        let reference = match (&target, &built) {
            (TargetSpec::Periodic { label, cycle }, _) => {
                let StateSpace::Shift { alphabet } = space else {
                    return Err(usage("periodic words need a shift space"));
                };
                ReferenceMeasure::periodic_word(alphabet, cycle.clone(), label.clone())
            }
            (TargetSpec::Bernoulli { label, p }, _) => ReferenceMeasure::bernoulli(p.clone(), label.clone()),
            (TargetSpec::Lebesgue { label }, _) => Ok(ReferenceMeasure::lebesgue(space, label.clone())),
            (TargetSpec::PeriodicOrbit { .. }, Some((_, config))) => {
                let config = ExperimentConfig {
                    targets: vec![target.clone()],
                    ..config.clone()
                };
                return config.build().map(|e| AnyMeasure::Reference(e.targets[0].clone()));
            }
            (TargetSpec::PeriodicOrbit { .. }, None) => return Err(usage("orbit measures need --system and --point")),
        };
        reference
            .map(AnyMeasure::Reference)
            .map_err(|e| HarnessError::invalid("measure", e.to_string()))
    };
    let (ma, mb) = (measure(a)?, measure(b)?);
    distance(&ma, &mb, &family).map_err(|e| HarnessError::invalid("measure", e.to_string()))
}

fn report_text(report: &ExperimentReport, dir: &Path) -> String {
    let mut s = format!("{} on {}\n", report.point, report.system);
    for l in &report.lengths {
        s += &format!(
            "n = {}: {} windows, {} hull centers, diameter {:.6}, {}\n",
            l.n, l.windows, l.hull.centers, l.hull.diameter, l.classification.class
        );
        for h in &l.hits {
            s += &format!("  {} at eps {}: {} hits\n", h.target, h.epsilon, h.count);
        }
    }
    s += &format!("classification: {}\n", report.classification.class);
    s += &format!("outputs in {}\n", dir.display());
    s
}

fn report_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("n,target,epsilon,hits,scanned\n");
    for l in &report.lengths {
        for h in &l.hits {
            s += &format!("{},{},{},{},{}\n", l.n, csv_field(&h.target), h.epsilon, h.count, h.scanned);
        }
    }
    s
}
