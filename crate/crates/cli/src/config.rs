//! Experiment configuration: TOML text in, a fully resolved config or an
//! exhaustive list of problems out.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use pinlab_core::bounds::RegionConstants;
use pinlab_core::renewal::{build_power_law_with, build_srw_returns, RenewalLaw, SlowlyVarying, SrwVariant, Truncation};
use serde::{Deserialize, Serialize};

pub const SUITES: [&str; 6] = ["asymptotics", "homogeneous", "quenched_grid", "bounds_grid", "replica_checks", "acceptance"];
pub const DEFAULT_OUTPUT_DIR: &str = "pinlab-out";
/// Largest accepted kernel support or horizon.
pub const MAX_SIZE: i64 = 1 << 24;

type Unknown = BTreeMap<String, toml::Value>;

#[derive(Debug, Default, Deserialize)]
struct RawConfig {
    suite: Option<String>,
    output_dir: Option<String>,
    law: Option<RawLaw>,
    grid: Option<RawGrid>,
    batch: Option<RawBatch>,
    region: Option<RawRegion>,
    tolerances: Option<RawTolerances>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Default, Deserialize)]
struct RawLaw {
    kind: Option<String>,
    alpha: Option<f64>,
    l: Option<RawSlowlyVarying>,
    n_max: Option<i64>,
    truncation: Option<String>,
    masses: Option<Vec<f64>>,
    tail_mass: Option<f64>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSlowlyVarying {
    Constant(f64),
    Table(RawSlowlyVaryingTable),
}

#[derive(Debug, Default, Deserialize)]
struct RawSlowlyVaryingTable {
    kind: Option<String>,
    value: Option<f64>,
    gamma: Option<f64>,
    offset: Option<f64>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Default, Deserialize)]
struct RawGrid {
    beta: Option<Vec<f64>>,
    delta: Option<Vec<f64>>,
    h: Option<Vec<f64>>,
    n: Option<Vec<i64>>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Default, Deserialize)]
struct RawBatch {
    master_seed: Option<i64>,
    num_samples: Option<i64>,
    pair_samples: Option<i64>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Default, Deserialize)]
struct RawRegion {
    a1: Option<f64>,
    a2: Option<f64>,
    epsilon: Option<f64>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Default, Deserialize)]
struct RawTolerances {
    sigmas: Option<f64>,
    #[serde(flatten)]
    unknown: Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    PowerLaw,
    SrwD1,
    SrwD3,
    Masses,
}

impl LawKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "power_law" => Some(LawKind::PowerLaw),
            "srw_d1" => Some(LawKind::SrwD1),
            "srw_d3" => Some(LawKind::SrwD3),
            "masses" => Some(LawKind::Masses),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowlyVaryingSpec {
    Constant { value: f64 },
    LogPower { gamma: f64, offset: f64 },
}

impl SlowlyVaryingSpec {
    pub fn to_core(&self) -> SlowlyVarying {
        match *self {
            SlowlyVaryingSpec::Constant { value } => SlowlyVarying::Constant(value),
            SlowlyVaryingSpec::LogPower { gamma, offset } => SlowlyVarying::LogPower { gamma, offset },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    pub kind: LawKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<SlowlyVaryingSpec>,
    pub n_max: usize,
    pub truncation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_mass: Option<f64>,
}

impl LawSpec {
    pub fn build(&self) -> pinlab_core::Result<RenewalLaw> {
        match self.kind {
            LawKind::PowerLaw => {
                let truncation =
                    if self.truncation == "renormalize" { Truncation::Renormalize } else { Truncation::ExactTail };
                let l = self.l.as_ref().map(SlowlyVaryingSpec::to_core).unwrap_or(SlowlyVarying::unit());
                build_power_law_with(self.alpha.unwrap_or(f64::NAN), l, self.n_max, truncation)
            }
            LawKind::SrwD1 => build_srw_returns(SrwVariant::D1Recurrent, self.n_max),
            LawKind::SrwD3 => build_srw_returns(SrwVariant::D3Transient, self.n_max),
            LawKind::Masses => {
                RenewalLaw::from_masses(self.masses.as_deref().unwrap_or(&[]), self.tail_mass.unwrap_or(0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub beta: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub master_seed: u64,
    pub num_samples: usize,
    pub pair_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub a1: f64,
    pub a2: f64,
    pub epsilon: f64,
}

impl RegionSpec {
    pub fn to_core(&self) -> RegionConstants {
        RegionConstants { a1: self.a1, a2: self.a2, epsilon: self.epsilon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub sigmas: f64,
}

/// A configuration with every default resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: String,
    pub output_dir: String,
    pub law: LawSpec,
    pub grid: GridSpec,
    pub batch: BatchSpec,
    pub region: RegionSpec,
    pub tolerances: Tolerances,
    /// Advisory remarks, e.g. on inapplicable theorem gates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentConfig {
    /// Canonical TOML text; its hash identifies a run.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }
}

/// One problem with a configuration, keyed by its dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("{} configuration error(s):\n{}", .0.len(), .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue { key: key.into(), message: message.into() });
    }

    fn unknown(&mut self, section: &str, unknown: &Unknown) {
        for k in unknown.keys() {
            let key = if section.is_empty() { k.clone() } else { format!("{section}.{k}") };
            self.push(key, "unknown key");
        }
    }

    fn count(&mut self, key: &str, value: Option<i64>, default: usize, min: i64) -> usize {
        match value {
            None => default,
            Some(v) if v < min || v > MAX_SIZE => {
                self.push(key, format!("must be between {min} and {MAX_SIZE}, got {v}"));
                default
            }
            Some(v) => v as usize,
        }
    }

    fn finite_list(&mut self, key: &str, values: &[f64], nonnegative: bool) {
        if values.is_empty() {
            self.push(key, "must not be empty");
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                self.push(format!("{key}[{i}]"), format!("must be finite, got {v}"));
            } else if nonnegative && *v < 0.0 {
                self.push(format!("{key}[{i}]"), format!("must be nonnegative, got {v}"));
            }
        }
    }
}

/// Reads and resolves a config file; `suite` replaces the file's suite when given.
pub fn load_config(path: &Path, suite: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config_for(&text, suite)
}

/// Parse and resolve; syntax errors carry line numbers, semantic problems are
/// all collected before returning.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_for(text, None)
}

pub fn parse_config_for(text: &str, suite: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve(raw, suite)
}

fn resolve(raw: RawConfig, suite_override: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    let mut issues = Issues(Vec::new());
    issues.unknown("", &raw.unknown);
    let mut notes = Vec::new();

    let from_file = raw.suite;
    let requested = match suite_override {
        Some(s) => {
            if let Some(f) = from_file.as_deref().filter(|f| *f != s) {
                notes.push(format!("suite {f:?} in the file replaced by {s:?} from the command line"));
            }
            Some(s.to_string())
        }
        None => from_file,
    };
    let suite = match requested {
        Some(s) if SUITES.contains(&s.as_str()) => s,
        Some(s) => {
            issues.push("suite", format!("unknown suite {s:?}; expected one of {}", SUITES.join(", ")));
            s
        }
        None => {
            issues.push("suite", "missing");
            String::new()
        }
    };
    let output_dir = raw.output_dir.unwrap_or_else(|| DEFAULT_OUTPUT_DIR.to_string());

    let law = resolve_law(raw.law, &mut issues);
    let grid = resolve_grid(raw.grid.unwrap_or_default(), &mut issues);

    let b = raw.batch.unwrap_or_default();
    issues.unknown("batch", &b.unknown);
    let master_seed = match b.master_seed {
        Some(s) if s < 0 => {
            issues.push("batch.master_seed", format!("must be nonnegative, got {s}"));
            0
        }
        Some(s) => s as u64,
        None => 1,
    };
    let batch = BatchSpec {
        master_seed,
        num_samples: issues.count("batch.num_samples", b.num_samples, 200, 1),
        pair_samples: issues.count("batch.pair_samples", b.pair_samples, 500, 1),
    };

    let r = raw.region.unwrap_or_default();
    issues.unknown("region", &r.unknown);
    let defaults = RegionConstants::default();
    let region = RegionSpec {
        a1: r.a1.unwrap_or(defaults.a1),
        a2: r.a2.unwrap_or(defaults.a2),
        epsilon: r.epsilon.unwrap_or(defaults.epsilon),
    };
    for (key, v) in [("region.a1", region.a1), ("region.a2", region.a2)] {
        if !(v.is_finite() && v > 0.0) {
            issues.push(key, format!("must be finite and positive, got {v}"));
        }
    }
    if !(region.epsilon > 0.0 && region.epsilon < 1.0) {
        issues.push("region.epsilon", format!("must lie in (0, 1), got {}", region.epsilon));
    }

    let t = raw.tolerances.unwrap_or_default();
    issues.unknown("tolerances", &t.unknown);
    let tolerances = Tolerances { sigmas: t.sigmas.unwrap_or(3.0) };
    if !(tolerances.sigmas.is_finite() && tolerances.sigmas > 0.0) {
        issues.push("tolerances.sigmas", format!("must be finite and positive, got {}", tolerances.sigmas));
    }

    if let Some(alpha) = law.alpha {
        if alpha >= 1.0 && matches!(suite.as_str(), "quenched_grid" | "bounds_grid" | "replica_checks") {
            notes.push(format!("alpha = {alpha} lies outside (0, 1): the theorem region gates are inapplicable"));
        }
    }
    if issues.0.is_empty() && law.kind == LawKind::Masses {
        if let Err(e) = law.build() {
            issues.push("law.masses", e.to_string());
        }
    }

    if !issues.0.is_empty() {
        return Err(ConfigError::Invalid(issues.0));
    }
    Ok(ExperimentConfig { suite, output_dir, law, grid, batch, region, tolerances, notes })
}

fn resolve_law(raw: Option<RawLaw>, issues: &mut Issues) -> LawSpec {
    let Some(raw) = raw else {
        issues.push("law", "missing section");
        return LawSpec {
            kind: LawKind::PowerLaw,
            alpha: None,
            l: None,
            n_max: 0,
            truncation: String::new(),
            masses: None,
            tail_mass: None,
        };
    };
    issues.unknown("law", &raw.unknown);
    let kind = match raw.kind.as_deref() {
        None => LawKind::PowerLaw,
        Some(k) => LawKind::parse(k).unwrap_or_else(|| {
            issues.push("law.kind", format!("unknown kind {k:?}; expected power_law, srw_d1, srw_d3 or masses"));
            LawKind::PowerLaw
        }),
    };
    let n_max = issues.count("law.n_max", raw.n_max, 1 << 16, 2);
    let mut spec = LawSpec {
        kind,
        alpha: None,
        l: None,
        n_max,
        truncation: "exact_tail".to_string(),
        masses: None,
        tail_mass: None,
    };
    let unused = |issues: &mut Issues, key: &str, present: bool| {
        if present {
            issues.push(key, format!("not used by law kind {}", kind_name(kind)));
        }
    };
    match kind {
        LawKind::PowerLaw => {
            match raw.alpha {
                None => issues.push("law.alpha", "missing (required for power_law)"),
                Some(a) if !(a.is_finite() && a > 0.0) => {
                    issues.push("law.alpha", format!("must be finite and positive, got {a}"))
                }
                Some(a) => spec.alpha = Some(a),
            }
            spec.l = Some(resolve_l(raw.l, issues));
            match raw.truncation.as_deref() {
                None | Some("exact_tail") => {}
                Some("renormalize") => spec.truncation = "renormalize".to_string(),
                Some(t) => issues.push("law.truncation", format!("unknown truncation {t:?}; expected exact_tail or renormalize")),
            }
            unused(issues, "law.masses", raw.masses.is_some());
            unused(issues, "law.tail_mass", raw.tail_mass.is_some());
        }
        LawKind::SrwD1 | LawKind::SrwD3 => {
            spec.alpha = Some(0.5);
            spec.truncation = "exact_tail".to_string();
            unused(issues, "law.alpha", raw.alpha.is_some());
            unused(issues, "law.l", raw.l.is_some());
            unused(issues, "law.truncation", raw.truncation.is_some());
            unused(issues, "law.masses", raw.masses.is_some());
            unused(issues, "law.tail_mass", raw.tail_mass.is_some());
        }
        LawKind::Masses => {
            match raw.masses {
                None => issues.push("law.masses", "missing (required for masses)"),
                Some(m) if m.is_empty() => issues.push("law.masses", "must not be empty"),
                Some(m) => {
                    spec.n_max = m.len();
                    spec.masses = Some(m);
                }
            }
            spec.tail_mass = Some(raw.tail_mass.unwrap_or(0.0));
            spec.truncation = "explicit".to_string();
            unused(issues, "law.alpha", raw.alpha.is_some());
            unused(issues, "law.l", raw.l.is_some());
            unused(issues, "law.n_max", raw.n_max.is_some());
            unused(issues, "law.truncation", raw.truncation.is_some());
        }
    }
    spec
}

fn kind_name(kind: LawKind) -> &'static str {
    match kind {
        LawKind::PowerLaw => "power_law",
        LawKind::SrwD1 => "srw_d1",
        LawKind::SrwD3 => "srw_d3",
        LawKind::Masses => "masses",
    }
}

fn resolve_l(raw: Option<RawSlowlyVarying>, issues: &mut Issues) -> SlowlyVaryingSpec {
    let spec = match raw {
        None => SlowlyVaryingSpec::Constant { value: 1.0 },
        Some(RawSlowlyVarying::Constant(value)) => SlowlyVaryingSpec::Constant { value },
        Some(RawSlowlyVarying::Table(t)) => {
            issues.unknown("law.l", &t.unknown);
            match t.kind.as_deref().unwrap_or("constant") {
                "constant" => {
                    if t.gamma.is_some() || t.offset.is_some() {
                        issues.push("law.l", "gamma and offset belong to kind log_power");
                    }
                    SlowlyVaryingSpec::Constant { value: t.value.unwrap_or(1.0) }
                }
                "log_power" => {
                    if t.value.is_some() {
                        issues.push("law.l.value", "not used by kind log_power");
                    }
                    if t.gamma.is_none() {
                        issues.push("law.l.gamma", "missing (required for log_power)");
                    }
                    SlowlyVaryingSpec::LogPower { gamma: t.gamma.unwrap_or(0.0), offset: t.offset.unwrap_or(2.0) }
                }
                k => {
                    issues.push("law.l.kind", format!("unknown kind {k:?}; expected constant or log_power"));
                    SlowlyVaryingSpec::Constant { value: 1.0 }
                }
            }
        }
    };
    if let Err(e) = spec.to_core().validate() {
        issues.push("law.l", e.to_string());
    }
    spec
}

fn resolve_grid(raw: RawGrid, issues: &mut Issues) -> GridSpec {
    issues.unknown("grid", &raw.unknown);
    let beta = raw.beta.unwrap_or_else(|| vec![0.1]);
    issues.finite_list("grid.beta", &beta, true);
    let (delta, h) = match (raw.delta, raw.h) {
        (Some(_), Some(h)) => {
            issues.push("grid.h", "conflicts with grid.delta; give one of them");
            (None, Some(h))
        }
        (None, Some(h)) => {
            issues.finite_list("grid.h", &h, false);
            (None, Some(h))
        }
        (d, None) => {
            let d = d.unwrap_or_else(|| vec![0.2]);
            issues.finite_list("grid.delta", &d, false);
            (Some(d), None)
        }
    };
    let n_raw = raw.n.unwrap_or_else(|| vec![1 << 10]);
    if n_raw.is_empty() {
        issues.push("grid.n", "must not be empty");
    }
    let mut n = Vec::with_capacity(n_raw.len());
    for (i, &v) in n_raw.iter().enumerate() {
        if !(1..=MAX_SIZE).contains(&v) {
            issues.push(format!("grid.n[{i}]"), format!("must be between 1 and {MAX_SIZE}, got {v}"));
        } else {
            n.push(v as usize);
        }
    }
    GridSpec { beta, delta, h, n }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "suite = \"homogeneous\"\n[law]\nalpha = 0.3\n";

    #[test]
    fn minimal_config_is_fully_defaulted() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.output_dir, DEFAULT_OUTPUT_DIR);
        assert_eq!(c.law.n_max, 1 << 16);
        assert_eq!(c.law.truncation, "exact_tail");
        assert_eq!(c.law.l, Some(SlowlyVaryingSpec::Constant { value: 1.0 }));
        assert_eq!(c.grid.delta, Some(vec![0.2]));
        assert_eq!(c.batch, BatchSpec { master_seed: 1, num_samples: 200, pair_samples: 500 });
        assert_eq!(c.region, RegionSpec { a1: 1.0, a2: 1.0, epsilon: 0.1 });
        // the echo is itself a valid config
        assert_eq!(parse_config(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn negative_num_samples_is_the_only_issue() {
        let err = parse_config(&format!("{MINIMAL}[batch]\nnum_samples = -5\n")).unwrap_err();
        let keys: Vec<&str> = err.issues().iter().map(|i| i.key.as_str()).collect();
        assert_eq!(keys, ["batch.num_samples"]);
    }

    #[test]
    fn issues_are_exhaustive() {
        let text = "suite = \"nope\"\ncolour = 1\n[law]\nalpha = -1.0\nshape = 2\n[grid]\nbeta = [0.1, inf]\nn = [0]\n[region]\nepsilon = 2.0\n";
        let err = parse_config(text).unwrap_err();
        let keys: Vec<&str> = err.issues().iter().map(|i| i.key.as_str()).collect();
        for k in ["suite", "colour", "law.shape", "law.alpha", "grid.beta[1]", "grid.n[0]", "region.epsilon"] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("suite = \"homogeneous\"\n[law]\nalpha = = 0.3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn large_alpha_is_accepted_with_a_note() {
        let c = parse_config("suite = \"quenched_grid\"\n[law]\nalpha = 1.5\n").unwrap();
        assert_eq!(c.notes.len(), 1);
        assert!(c.notes[0].contains("inapplicable"));
        assert!(c.law.build().is_ok());
    }

    #[test]
    fn explicit_masses() {
        let c = parse_config("suite = \"homogeneous\"\n[law]\nkind = \"masses\"\nmasses = [0.5, 0.5]\n").unwrap();
        assert_eq!(c.law.n_max, 2);
        assert_eq!(c.law.build().unwrap().mass(2), 0.5);
        let err = parse_config("suite = \"homogeneous\"\n[law]\nkind = \"masses\"\nmasses = [0.5, -0.5]\n").unwrap_err();
        assert_eq!(err.issues()[0].key, "law.masses");
    }

    #[test]
    fn slowly_varying_forms() {
        let c = parse_config("suite = \"asymptotics\"\n[law]\nalpha = 0.5\nl = { kind = \"log_power\", gamma = 1.0 }\n").unwrap();
        assert_eq!(c.law.l, Some(SlowlyVaryingSpec::LogPower { gamma: 1.0, offset: 2.0 }));
        let c = parse_config("suite = \"asymptotics\"\n[law]\nalpha = 0.5\nl = 2.0\n").unwrap();
        assert_eq!(c.law.l, Some(SlowlyVaryingSpec::Constant { value: 2.0 }));
        let err = parse_config("suite = \"asymptotics\"\n[law]\nalpha = 0.5\nl = 0.0\n").unwrap_err();
        assert_eq!(err.issues()[0].key, "law.l");
    }

    #[test]
    fn command_line_suite_wins() {
        let c = parse_config_for(MINIMAL, Some("asymptotics")).unwrap();
        assert_eq!(c.suite, "asymptotics");
        assert_eq!(c.notes.len(), 1);
        let c = parse_config_for("[law]\nalpha = 0.3\n", Some("homogeneous")).unwrap();
        assert!(c.notes.is_empty());
        assert_eq!(parse_config("[law]\nalpha = 0.3\n").unwrap_err().issues()[0].key, "suite");
    }

    #[test]
    fn delta_and_h_conflict() {
        let err = parse_config(&format!("{MINIMAL}[grid]\ndelta = [0.1]\nh = [0.1]\n")).unwrap_err();
        assert_eq!(err.issues()[0].key, "grid.h");
    }
}
