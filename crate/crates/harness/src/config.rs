//! Experiment configuration: TOML schema, defaults and cross-validation.
//!
//! A config names a system, a starting point, a test family, a catalog of
//! target measures, the windows to scan and the thresholds of the analysis.
//! [`validate_config`] parses it, fills every default in place and checks the
//! pieces against each other, so a validated config fully determines a run.

use std::path::PathBuf;
use std::sync::Arc;

use oscstat::asymptotics::ScanPlan;
use oscstat::measures::ReferenceMeasure;
use oscstat::systems::{
    derive_seed, design_transitive_point, interleaved_schedule, Adjacency, DesignedPoint, DynamicalSystem, Fixed,
    Generator, PointDesign, State, StateSpace, SymbolSequence, SystemKind, TypicalBlock,
};
use oscstat::weakstar::{build_family, default_depth, TestFamily};
use oscstat::Error;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

/// Stream of the master seed that drives the starting point.
pub const POINT_STREAM: u64 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every random stream is `derive_seed(seed, stream)`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub system: SystemSpec,
    pub point: PointSpec,
    #[serde(default)]
    pub family: FamilySpec,
    pub targets: Vec<TargetSpec>,
    pub scan: ScanSpec,
    pub analysis: AnalysisSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    FullShift { alphabet: u8 },
    Sft { adjacency: Vec<Vec<u8>> },
    Doubling,
    CatMap { matrix: [[i64; 2]; 2] },
    Rotation { angle: Angle },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Named(NamedAngle),
    /// Fraction of a full turn, rounded to the nearest 64-bit fraction.
    Turns(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedAngle {
    /// `(sqrt 5 - 1) / 2`, rounded down to 64 bits.
    Golden,
}

impl Angle {
    pub fn fixed(&self) -> Fixed {
        match self {
            Angle::Named(NamedAngle::Golden) => Fixed::GOLDEN,
            Angle::Turns(t) => Fixed::from_f64(*t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSpec {
    /// Dense words of every length up to `dense_max_len`, with one block of
    /// `block_length` symbols typical for each target, then `tail` forever.
    Designed {
        dense_max_len: usize,
        block_length: u64,
        tail: Vec<u8>,
    },
    /// Independent symbols; the horizon defaults to the last symbol the scan
    /// reads.
    SeededIid {
        distribution: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
    },
    Periodic {
        #[serde(default)]
        preamble: Vec<u8>,
        cycle: Vec<u8>,
    },
    /// A finite word; nothing past its end can be read.
    Explicit { word: Vec<u8> },
    Circle { x: f64 },
    Torus { x: f64, y: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Longest cylinder word on shift spaces, largest frequency otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Orbit measure of `cycle` repeated, on a shift space.
    Periodic { label: String, cycle: Vec<u8> },
    Bernoulli { label: String, p: Vec<f64> },
    Lebesgue { label: String },
    /// Orbit measure of a periodic point of the circle or torus.
    PeriodicOrbit {
        label: String,
        x: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y: Option<f64>,
        period: u64,
    },
}

impl TargetSpec {
    pub fn label(&self) -> &str {
        match self {
            TargetSpec::Periodic { label, .. }
            | TargetSpec::Bernoulli { label, .. }
            | TargetSpec::Lebesgue { label }
            | TargetSpec::PeriodicOrbit { label, .. } => label,
        }
    }
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// Window lengths, each scanned separately.
    pub n: Vec<u64>,
    /// Last window start.
    pub m_max: u64,
    #[serde(default = "one")]
    pub stride: u64,
    /// Rescan with stride one around coarse windows that come close to a
    /// target.
    #[serde(default)]
    pub refine: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Hit thresholds.
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering_k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull_radius: Option<f64>,
}

/// The objects a validated config describes.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub system: DynamicalSystem,
    pub point: State,
    pub design: Option<DesignedPoint>,
    pub family: TestFamily,
    pub targets: Vec<ReferenceMeasure>,
}

/// Parses `text`, fills defaults and cross-checks the result.
pub fn validate_config(text: &str) -> HarnessResult<ExperimentConfig> {
    let raw: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        HarnessError::at_offset(text, offset, e.message().trim())
    })?;
    raw.validated()
}

fn invalid(path: impl Into<String>, e: Error) -> HarnessError {
    HarnessError::invalid(path, e.to_string())
}

fn check_positive(path: &str, v: f64) -> HarnessResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(HarnessError::invalid(path, format!("must be a positive number, got {v}")))
    }
}

impl ExperimentConfig {
    /// Fills defaults and checks the config; the result validates to itself.
    pub fn validated(mut self) -> HarnessResult<Self> {
        let system = self.system.build()?;
        let space = system.space();
        if self.family.depth.is_none() {
            self.family.depth = Some(default_depth(space));
        }
        let a = &mut self.analysis;
        if a.epsilons.is_empty() {
            return Err(HarnessError::invalid("analysis.epsilons", "must not be empty"));
        }
        for (i, &e) in a.epsilons.iter().enumerate() {
            check_positive(&format!("analysis.epsilons[{i}]"), e)?;
        }
        let eps = *a.classify_epsilon.get_or_insert(a.epsilons[0]);
        check_positive("analysis.classify_epsilon", eps)?;
        // smallest k with 2/k < eps
        let k = *a.covering_k.get_or_insert((2.0 / eps).floor() as u64 + 1);
        if k == 0 {
            return Err(HarnessError::invalid("analysis.covering_k", "must be at least 1"));
        }
        if eps <= 2.0 / k as f64 {
            return Err(HarnessError::invalid(
                "analysis.classify_epsilon",
                format!("must exceed 2 / analysis.covering_k = {}", 2.0 / k as f64),
            ));
        }
        let radius = *a.hull_radius.get_or_insert(eps / 4.0);
        check_positive("analysis.hull_radius", radius)?;
        if self.scan.n.is_empty() {
            return Err(HarnessError::invalid("scan.n", "must not be empty"));
        }
        if let Some(i) = self.scan.n.iter().position(|&n| n == 0) {
            return Err(HarnessError::invalid(format!("scan.n[{i}]"), "window length must be at least 1"));
        }
        if self.scan.stride == 0 {
            return Err(HarnessError::invalid("scan.stride", "must be at least 1"));
        }
        if let PointSpec::SeededIid { horizon: None, .. } = self.point {
            let depth = self.family.depth.unwrap_or_default();
            let family = build_family(space, depth).map_err(|e| invalid("family.depth", e))?;
            let last = self.last_index(&family);
            if let PointSpec::SeededIid { horizon, .. } = &mut self.point {
                *horizon = Some(last);
            }
        }
        self.build()?;
        Ok(self)
    }

    /// Plan for window length `n`.
    pub fn plan(&self, n: u64) -> ScanPlan {
        let mut plan = ScanPlan::new(n, self.scan.m_max).with_stride(self.scan.stride);
        if self.scan.refine {
            let eps = self.analysis.epsilons.iter().copied().fold(self.classify_epsilon(), f64::max);
            plan = plan.with_refinement(eps);
        }
        plan
    }

    pub fn classify_epsilon(&self) -> f64 {
        self.analysis.classify_epsilon.unwrap_or(self.analysis.epsilons[0])
    }

    pub fn covering_k(&self) -> u64 {
        self.analysis.covering_k.unwrap_or(1)
    }

    pub fn hull_radius(&self) -> f64 {
        self.analysis.hull_radius.unwrap_or(self.classify_epsilon() / 4.0)
    }

    fn max_n(&self) -> u64 {
        self.scan.n.iter().copied().max().unwrap_or(1)
    }

    /// Last symbol index any scan of this config reads.
    fn last_index(&self, family: &TestFamily) -> u64 {
        self.plan(self.max_n()).last_index(family.lookahead())
    }

    /// Builds every object and checks them against each other.
    pub fn build(&self) -> HarnessResult<Experiment> {
        let system = self.system.build()?;
        let space = system.space();
        let depth = self.family.depth.unwrap_or_else(|| default_depth(space));
        let family = build_family(space, depth).map_err(|e| invalid("family.depth", e))?;

        if self.targets.is_empty() {
            return Err(HarnessError::invalid("targets", "at least one target is needed"));
        }
        let mut targets = Vec::new();
        for (i, t) in self.targets.iter().enumerate() {
            let path = format!("targets[{i}]");
            if self.targets[..i].iter().any(|u| u.label() == t.label()) {
                return Err(HarnessError::invalid(
                    format!("{path}.label"),
                    format!("duplicate label {:?}", t.label()),
                ));
            }
            targets.push(build_target(t, &system, &path)?);
        }
        family.check_separation(&targets).map_err(|e| invalid("targets", e))?;

        let (point, design) = self.build_point(&system, &targets)?;
        if let State::Symbolic(p) = &point {
            let needed = self.last_index(&family);
            let horizon = p.sequence().horizon();
            if needed > horizon {
                let field = match self.point {
                    PointSpec::Explicit { .. } => "point.word (length",
                    _ => "point.horizon (",
                };
                let i = self.scan.n.iter().position(|&n| n == self.max_n()).unwrap_or(0);
                return Err(HarnessError::invalid(
                    format!("scan.n[{i}]"),
                    format!(
                        "windows of length {} up to scan.m_max = {} read symbols up to index {needed}, \
                         beyond {field} {})",
                        self.max_n(),
                        self.scan.m_max,
                        if let PointSpec::Explicit { word } = &self.point { word.len() as u64 } else { horizon },
                    ),
                ));
            }
            if let Some(adj) = system.adjacency() {
                check_admissible(adj, p.sequence(), needed)?;
            }
        }
        Ok(Experiment {
            system,
            point,
            design,
            family,
            targets,
        })
    }

    fn build_point(
        &self,
        system: &DynamicalSystem,
        targets: &[ReferenceMeasure],
    ) -> HarnessResult<(State, Option<DesignedPoint>)> {
        let space = system.space();
        let seed = derive_seed(self.seed, POINT_STREAM);
        let alphabet = match space {
            StateSpace::Shift { alphabet } => Some(alphabet),
            _ => None,
        };
        let need_shift = |kind: &str| -> HarnessResult<u8> {
            alphabet.ok_or_else(|| {
                HarnessError::invalid("point.kind", format!("a {kind} point needs a shift system, not {space}"))
            })
        };
        let symbolic = |seq: SymbolSequence| State::symbolic(Arc::new(seq.with_label("point")));
        Ok(match &self.point {
            PointSpec::Designed {
                dense_max_len,
                block_length,
                tail,
            } => {
                let alphabet = need_shift("designed")?;
                let mut blocks = Vec::new();
                for (i, t) in targets.iter().enumerate() {
                    let kind = t.typical_block().map_err(|e| invalid(format!("targets[{i}]"), e))?;
                    blocks.push(TypicalBlock {
                        label: t.label().to_string(),
                        kind,
                        length: *block_length,
                    });
                }
                let design = PointDesign {
                    alphabet,
                    items: interleaved_schedule(*dense_max_len, blocks),
                    tail: tail.clone(),
                    adjacency: system.adjacency().cloned(),
                    seed,
                };
                let point = design_transitive_point(&design).map_err(|e| invalid("point", e))?;
                (State::symbolic(point.sequence.clone()), Some(point))
            }
            PointSpec::SeededIid { distribution, horizon } => {
                let alphabet = need_shift("seeded-iid")?;
                if distribution.len() != alphabet as usize {
                    return Err(HarnessError::invalid(
                        "point.distribution",
                        format!("has {} entries, the system has {alphabet} symbols", distribution.len()),
                    ));
                }
                let generator = Generator::SeededIid {
                    distribution: distribution.clone(),
                    seed,
                };
                let seq = SymbolSequence::new(alphabet, generator, horizon.unwrap_or(u64::MAX))
                    .map_err(|e| invalid("point.distribution", e))?;
                (symbolic(seq), None)
            }
            PointSpec::Periodic { preamble, cycle } => {
                let alphabet = need_shift("periodic")?;
                let seq = SymbolSequence::eventually_periodic(alphabet, preamble.clone(), cycle.clone())
                    .map_err(|e| invalid("point.cycle", e))?;
                if let Some(adj) = system.adjacency() {
                    let mut word = preamble.clone();
                    word.extend_from_slice(cycle);
                    word.push(cycle[0]);
                    adj.check_word(&word, 0).map_err(|e| invalid("point.cycle", e))?;
                }
                (symbolic(seq), None)
            }
            PointSpec::Explicit { word } => {
                let alphabet = need_shift("explicit")?;
                let Some((&last, head)) = word.split_last() else {
                    return Err(HarnessError::invalid("point.word", "must not be empty"));
                };
                let generator = Generator::EventuallyPeriodic {
                    preamble: head.to_vec(),
                    cycle: vec![last],
                };
                let seq = SymbolSequence::new(alphabet, generator, word.len() as u64 - 1)
                    .map_err(|e| invalid("point.word", e))?;
                if let Some(adj) = system.adjacency() {
                    adj.check_word(word, 0).map_err(|e| invalid("point.word", e))?;
                }
                (symbolic(seq), None)
            }
            PointSpec::Circle { x } => {
                if space != StateSpace::Circle {
                    return Err(HarnessError::invalid("point.kind", format!("a circle point does not fit {space}")));
                }
                finite("point.x", *x)?;
                (State::Circle(Fixed::from_f64(*x)), None)
            }
            PointSpec::Torus { x, y } => {
                if space != StateSpace::Torus {
                    return Err(HarnessError::invalid("point.kind", format!("a torus point does not fit {space}")));
                }
                finite("point.x", *x)?;
                finite("point.y", *y)?;
                (State::Torus(Fixed::from_f64(*x), Fixed::from_f64(*y)), None)
            }
        })
    }

    /// The config as TOML, every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }
}

fn finite(path: &str, v: f64) -> HarnessResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::invalid(path, "must be finite"))
    }
}

/// Checks every transition among the first `last + 1` symbols.
fn check_admissible(adj: &Adjacency, seq: &SymbolSequence, last: u64) -> HarnessResult<()> {
    const STEP: u64 = 1 << 16;
    let mut start = 0;
    while start <= last {
        // overlap by one symbol so transitions across chunks are checked
        let len = (last - start + 1).min(STEP + 1);
        let word = seq.word(start, len as usize).map_err(|e| invalid("point", e))?;
        adj.check_word(&word, start).map_err(|e| invalid("point", e))?;
        if len <= STEP {
            break;
        }
        start += STEP;
    }
    Ok(())
}

fn build_target(t: &TargetSpec, system: &DynamicalSystem, path: &str) -> HarnessResult<ReferenceMeasure> {
    let space = system.space();
    let shift_alphabet = || match space {
        StateSpace::Shift { alphabet } => Ok(alphabet),
        _ => Err(HarnessError::invalid(
            format!("{path}.kind"),
            format!("this target needs a shift system, not {space}"),
        )),
    };
    match t {
        TargetSpec::Periodic { label, cycle } => {
            let alphabet = shift_alphabet()?;
            if let Some(adj) = system.adjacency() {
                let mut word = cycle.clone();
                word.extend(cycle.first());
                adj.check_word(&word, 0).map_err(|e| invalid(format!("{path}.cycle"), e))?;
            }
            if cycle.is_empty() {
                return Err(HarnessError::invalid(format!("{path}.cycle"), "must not be empty"));
            }
            ReferenceMeasure::periodic_word(alphabet, cycle.clone(), label.clone())
                .map_err(|e| invalid(format!("{path}.cycle"), e))
        }
        TargetSpec::Bernoulli { label, p } => {
            let alphabet = shift_alphabet()?;
            if p.len() != alphabet as usize {
                return Err(HarnessError::invalid(
                    format!("{path}.p"),
                    format!("has {} entries, the system has {alphabet} symbols", p.len()),
                ));
            }
            if let Some(adj) = system.adjacency() {
                if !(0..alphabet).all(|i| (0..alphabet).all(|j| adj.allowed(i, j) || p[i as usize] * p[j as usize] == 0.0)) {
                    return Err(HarnessError::invalid(
                        format!("{path}.p"),
                        "gives positive mass to a forbidden transition",
                    ));
                }
            }
            ReferenceMeasure::bernoulli(p.clone(), label.clone()).map_err(|e| invalid(format!("{path}.p"), e))
        }
        TargetSpec::Lebesgue { label } => {
            if let Some(adj) = system.adjacency() {
                if *adj != Adjacency::full(adj.size()) {
                    return Err(HarnessError::invalid(
                        format!("{path}.kind"),
                        "the uniform measure is not carried by a proper subshift",
                    ));
                }
            }
            Ok(ReferenceMeasure::lebesgue(space, label.clone()))
        }
        TargetSpec::PeriodicOrbit { label, x, y, period } => {
            let state = match (space, y) {
                (StateSpace::Circle, None) => State::Circle(Fixed::from_f64(*x)),
                (StateSpace::Torus, Some(y)) => State::Torus(Fixed::from_f64(*x), Fixed::from_f64(*y)),
                _ => {
                    return Err(HarnessError::invalid(
                        path,
                        format!("periodic-orbit needs x on the circle and x, y on the torus; the system is on {space}"),
                    ))
                }
            };
            ReferenceMeasure::periodic_orbit(system, &state, *period, label.clone())
                .map_err(|e| invalid(format!("{path}.period"), e))
        }
    }
}

impl SystemSpec {
    pub fn build(&self) -> HarnessResult<DynamicalSystem> {
        let kind = match self {
            SystemSpec::FullShift { alphabet } => SystemKind::FullShift { alphabet: *alphabet },
            SystemSpec::Sft { adjacency } => SystemKind::Sft {
                adjacency: Adjacency::new(adjacency).map_err(|e| invalid("system.adjacency", e))?,
            },
            SystemSpec::Doubling => SystemKind::Doubling,
            SystemSpec::CatMap { matrix } => {
                return DynamicalSystem::cat_map(*matrix).map_err(|e| invalid("system.matrix", e))
            }
            SystemSpec::Rotation { angle } => {
                if let Angle::Turns(t) = angle {
                    finite("system.angle", *t)?;
                }
                SystemKind::Rotation { angle: angle.fixed() }
            }
        };
        DynamicalSystem::new(kind).map_err(|e| invalid("system", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
kind = "full-shift"
alphabet = 2

[point]
kind = "periodic"
cycle = [0]

[[targets]]
kind = "periodic"
label = "zero"
cycle = [0]

[scan]
n = [10]
m_max = 100

[analysis]
epsilons = [0.1]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = validate_config(MINIMAL).unwrap();
        assert_eq!(c.scan.stride, 1);
        assert!(!c.scan.refine);
        assert_eq!(c.family.depth, Some(8));
        assert_eq!(c.classify_epsilon(), 0.1);
        assert_eq!(c.covering_k(), 21);
        assert_eq!(c.hull_radius(), 0.025);
        assert_eq!(validate_config(&c.to_toml()).unwrap(), c);
    }

    fn edited(from: &str, to: &str) -> HarnessResult<ExperimentConfig> {
        assert!(MINIMAL.contains(from));
        validate_config(&MINIMAL.replace(from, to))
    }

    fn path_of(r: HarnessResult<ExperimentConfig>) -> String {
        match r {
            Err(HarnessError::Invalid { path, .. }) => path,
            other => panic!("expected a semantic error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        match edited("m_max = 100", "m_max = 100\nstrid = 3") {
            Err(HarnessError::Parse { line, message, .. }) => {
                assert_eq!(line, 18);
                assert!(message.contains("strid"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        match edited("kind = \"periodic\"\ncycle", "kind = \"periodic\ncycle") {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_fields() {
        assert_eq!(path_of(edited("n = [10]", "n = [10, 0]")), "scan.n[1]");
        assert_eq!(path_of(edited("epsilons = [0.1]", "epsilons = [-1.0]")), "analysis.epsilons[0]");
        assert_eq!(
            path_of(edited("epsilons = [0.1]", "epsilons = [0.1]\ncovering_k = 5")),
            "analysis.classify_epsilon"
        );
        assert_eq!(path_of(edited("alphabet = 2", "alphabet = 1")), "system");
        assert_eq!(path_of(edited("label = \"zero\"\ncycle = [0]", "label = \"zero\"\ncycle = [2]")), "targets[0].cycle");
    }

    #[test]
    fn window_past_horizon_names_both_fields() {
        let text = MINIMAL.replace("kind = \"periodic\"\ncycle = [0]\n\n[[", "kind = \"explicit\"\nword = [0, 0, 0]\n\n[[");
        match validate_config(&text) {
            Err(HarnessError::Invalid { path, message }) => {
                assert_eq!(path, "scan.n[0]");
                assert!(message.contains("scan.m_max") && message.contains("point.word"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace(
            "kind = \"periodic\"\ncycle = [0]\n\n[[",
            "kind = \"seeded-iid\"\ndistribution = [0.5, 0.5]\nhorizon = 50\n\n[[",
        );
        match validate_config(&text) {
            Err(HarnessError::Invalid { path, message }) => {
                assert_eq!(path, "scan.n[0]");
                assert!(message.contains("point.horizon"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inadmissible_point_cites_transition() {
        let text = MINIMAL
            .replace("kind = \"full-shift\"\nalphabet = 2", "kind = \"sft\"\nadjacency = [[1, 1], [1, 0]]")
            .replace("kind = \"periodic\"\ncycle = [0]\n\n[[", "kind = \"periodic\"\npreamble = [0, 1, 1]\ncycle = [0]\n\n[[");
        match validate_config(&text) {
            Err(HarnessError::Invalid { path, message }) => {
                assert_eq!(path, "point.cycle");
                assert!(message.contains("1 -> 1 at index 1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seeded_horizon_is_filled_from_the_scan() {
        let text = MINIMAL.replace(
            "kind = \"periodic\"\ncycle = [0]\n\n[[",
            "kind = \"seeded-iid\"\ndistribution = [0.5, 0.5]\n\n[[",
        );
        let c = validate_config(&text).unwrap();
        assert!(matches!(c.point, PointSpec::SeededIid { horizon: Some(116), .. }));
        assert_eq!(validate_config(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn targets_must_be_separated() {
        let text = MINIMAL.replace(
            "[scan]",
            "[[targets]]\nkind = \"periodic\"\nlabel = \"zero-again\"\ncycle = [0, 0]\n\n[scan]",
        );
        assert_eq!(path_of(validate_config(&text)), "targets");
    }
}
