//! Experiment configuration files.
//!
//! The format is flat `key = value` text. `experiment`, `seed` and `out` sit
//! at the top; the experiment's parameters go in a section named after it:
//!
//! ```text
//! experiment = restriction-scan
//! seed = 11
//!
//! [restriction-scan]
//! geometry = surface+
//! radii = 16, 32, 64
//! ```
//!
//! `#` starts a comment. Lists are comma separated, floats accept `inf` and
//! fractions such as `22/7`.

use std::fmt;
use std::path::PathBuf;

use ftrlab_core::analysis::TestFamily;
use sha2::{Digest, Sha256};

use crate::table::format_float;

/// Kind and admissible range of a parameter.
#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Int { min: i64, max: i64 },
    /// Inclusive bounds; `max = inf` admits `inf`.
    Float { min: f64, max: f64 },
    /// Like `Float` but zero is rejected.
    NonzeroFloat { min: f64, max: f64 },
    Floats { min: f64, max: f64 },
    Choice(&'static [&'static str]),
    /// Restriction test family ids.
    Families,
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

#[derive(Debug)]
pub struct Experiment {
    pub id: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
}

const fn int(key: &'static str, min: i64, max: i64, default: &'static str, help: &'static str) -> Param {
    Param { key, kind: Kind::Int { min, max }, default, help }
}

const fn float(key: &'static str, min: f64, max: f64, default: &'static str, help: &'static str) -> Param {
    Param { key, kind: Kind::Float { min, max }, default, help }
}

const fn floats(key: &'static str, min: f64, max: f64, default: &'static str, help: &'static str) -> Param {
    Param { key, kind: Kind::Floats { min, max }, default, help }
}

const fn choice(key: &'static str, options: &'static [&'static str], default: &'static str, help: &'static str) -> Param {
    Param { key, kind: Kind::Choice(options), default, help }
}

const INF: f64 = f64::INFINITY;
const GEOMETRIES: &[&str] = &["curve", "surface+", "surface-", "mixed+", "mixed-"];

/// Problem and solver parameters shared by the DNLS experiments, with
/// per-experiment defaults for the data size and the time grid.
macro_rules! dnls_params {
    ($amp:literal, $radius:literal, $horizon:literal, $steps:literal; $($extra:expr),* $(,)?) => {
        &[
            int("d", 1, 2, "1", "lattice dimension"),
            float("alpha", 1.0, 64.0, "8", "nonlinearity power α > 1"),
            choice("mu", &["1", "-1"], "1", "coupling sign"),
            float("p", 1.0, 64.0, "8", "space-time exponent of the well-posedness norm"),
            float("q", 2.0, INF, "2", "Fourier-Lebesgue exponent of the data"),
            choice("initial", &["delta", "bump", "pair", "random"], "delta", "initial data shape"),
            float("amplitude", 0.0, 100.0, $amp, "amplitude of the initial data"),
            int("radius", 1, 4096, $radius, "lattice window radius N"),
            Param {
                key: "horizon",
                kind: Kind::NonzeroFloat { min: -1e4, max: 1e4 },
                default: $horizon,
                help: "end time T, negative to solve backwards",
            },
            int("steps", 16, 1_000_000, $steps, "time steps"),
            float("tolerance", 1e-300, 1.0, "1e-12", "Picard stopping distance"),
            int("max_iterations", 1, 1000, "32", "Picard iteration cap"),
            int("modes", 0, 1 << 20, "0", "FFT grid size, 0 picks the smallest sufficient power of two"),
            $($extra),*
        ]
    };
}

pub static EXPERIMENTS: &[Experiment] = &[
    Experiment {
        id: "omega-table",
        about: "dispersion symbol ω on equispaced nodes of [-π, π]^d",
        params: &[int("d", 1, 2, "1", "dimension"), int("nodes", 2, 4097, "5", "nodes per axis, endpoints included")],
    },
    Experiment {
        id: "propagate",
        about: "free lattice flow e^{itΔ}f on a window",
        params: &[
            int("d", 1, 2, "1", "dimension"),
            int("radius", 1, 4096, "16", "window radius N"),
            floats("times", -1e4, 1e4, "0.5, 1, 2", "evaluation times"),
            choice("initial", &["delta", "random"], "delta", "initial data"),
            int("support", 0, 4096, "2", "support radius of random data"),
            int("modes", 0, 1 << 20, "0", "FFT grid size, 0 picks the smallest sufficient power of two"),
        ],
    },
    Experiment {
        id: "extend",
        about: "extension operator E g at seeded points",
        params: &[
            choice("geometry", GEOMETRIES, "curve", "(t, t³), ξ₁³ ± ξ₂³ or ξ₁² ± ξ₂³"),
            choice("density", &["constant", "random-signs"], "constant", "density g"),
            int("grid", 1, 256, "8", "cells per axis for random signs"),
            int("points", 1, 1_000_000, "16", "number of evaluation points"),
            float("reach", 0.0, 1e6, "50", "points are uniform in [-reach, reach]^n"),
        ],
    },
    Experiment {
        id: "rescale-check",
        about: "intertwining of the extension operator with the rescaling maps",
        params: &[
            choice("geometry", GEOMETRIES, "curve", "curve or slab geometry"),
            choice("phase", &["cubic", "sin"], "cubic", "curve phase: t³ or normalized sin t - t"),
            floats("lambda", 1e-6, 0.5, "0.25, 0.5", "curve scales λ"),
            float("k", 8.0, 1e9, "64", "slab parameter K"),
            int("points", 1, 100_000, "50", "seeded points per case"),
            float("reach", 0.0, 1e6, "100", "points are uniform in [-reach, reach]^n"),
        ],
    },
    Experiment {
        id: "decoupling-check",
        about: "ℓ² decoupling ratios over slab covers, with a K-growth fit",
        params: &[
            choice("geometry", GEOMETRIES, "curve", "slab geometry"),
            floats("k", 8.0, 1e6, "8, 16, 32, 64", "slab parameters K (ball radius K)"),
            floats("p", 2.0, 6.0, "2, 22/7, 6", "exponents"),
            int("draws", 1, 10_000, "8", "random slab-data draws per (K, p)"),
            int("samples", 1024, 1 << 24, "1024", "QMC points per ball"),
            int("balls", 0, 1000, "0", "disjoint balls for the parallel combination, 0 skips it"),
        ],
    },
    Experiment {
        id: "restriction-scan",
        about: "empirical restriction constants over ball radii, with a growth fit",
        params: &[
            choice("geometry", GEOMETRIES, "surface+", "curve or surface"),
            float("p", 1.0, INF, "22/7", "target exponent"),
            float("q", 1.0, INF, "inf", "density exponent"),
            floats("radii", 1.0, 1e7, "16, 32, 64, 128, 256, 512, 1024", "ball radii R"),
            Param { key: "families", kind: Kind::Families, default: "constant, knapp, random-signs:8, dyadic:64", help: "test families" },
            int("samples", 1024, 1 << 24, "1024", "QMC points per dyadic shell"),
        ],
    },
    Experiment {
        id: "equi-check",
        about: "translation averaging between the continuum and discrete extension operators",
        params: &[
            choice("corpus", &["standard", "single"], "standard", "ten built-in bumps, or the single bump below"),
            float("center", -3.2, 3.2, "0", "bump center c"),
            float("width", 1e-3, 1.0, "0.3", "bump width σ"),
            float("modulation", -1e3, 1e3, "0", "bump modulation m"),
            floats("p", 1.0, 64.0, "2, 4", "exponents"),
            float("t", 1e-3, 1e3, "4", "time window T"),
            int("n", 0, 10_000, "40", "space window N"),
        ],
    },
    Experiment {
        id: "dnls-solve",
        about: "Picard and split-step solutions of the lattice NLS",
        params: dnls_params!("0.5", "40", "5", "1000";
            choice("solver", &["picard", "splitstep", "both"], "both", "which solver to run"),
            int("report_every", 1, 1_000_000, "10", "emit every n-th time node"),
        ),
    },
    Experiment {
        id: "contraction",
        about: "contraction ratios of the Duhamel map and Picard convergence",
        params: dnls_params!("0.01", "40", "10", "800";
            float("eta", 0.0, 1e6, "0.05", "smallness threshold η"),
            int("trials", 1, 10_000, "20", "random pairs"),
        ),
    },
    Experiment {
        id: "scatter",
        about: "scattering state and the approach of the free profile to it",
        params: dnls_params!("0.5", "160", "60", "4800";
            float("tail_tolerance", 0.0, 1e6, "1e-4", "required Duhamel tail bound"),
        ),
    },
    Experiment {
        id: "strichartz-scan",
        about: "admissibility and measured L^q_t ℓ^r_x norms of the free flow",
        params: &[
            int("d", 1, 4, "1", "dimension (norms are measured for d ≤ 2)"),
            floats("q", 1.0, INF, "2, 4, 6, 8, inf", "time exponents"),
            floats("r", 1.0, INF, "2, 4, inf", "space exponents"),
            choice("initial", &["delta", "random"], "delta", "initial data"),
            int("radius", 1, 4096, "50", "window radius N"),
            float("horizon", 1e-3, 1e3, "20", "time interval [0, T]"),
            int("steps", 16, 1_000_000, "400", "time steps"),
        ],
    },
    Experiment {
        id: "decay-fit",
        about: "dispersive decay exponent of sup |e^{itΔ}f|",
        params: &[
            int("d", 1, 2, "1", "dimension"),
            float("t0", 10.0, 200.0, "10", "start of the fit window"),
            float("t1", 10.0, 200.0, "200", "end of the fit window"),
            int("modes", 0, 1 << 20, "0", "periodic grid size, 0 picks 2048 (d = 1) or 1024 (d = 2)"),
            choice("window", &["full", "bandpass"], "full", "δ₀, or a smooth band away from the inflection points"),
            float("cutoff", 1e-3, 1.5707963267948966, "1.2", "band-pass half width"),
        ],
    },
];

pub fn experiment(id: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

pub fn experiment_ids() -> Vec<&'static str> {
    EXPERIMENTS.iter().map(|e| e.id).collect()
}

/// A parsed parameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Floats(Vec<f64>),
    Text(String),
    Words(Vec<String>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => f.write_str(&format_float(*v)),
            Value::Text(s) => f.write_str(s),
            Value::Floats(v) => {
                let parts: Vec<String> = v.iter().map(|&x| format_float(x)).collect();
                f.write_str(&parts.join(", "))
            }
            Value::Words(v) => f.write_str(&v.join(", ")),
        }
    }
}

/// Where a resolved value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Default,
    Line(usize),
}

/// A configuration error, positioned when it comes from the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), column: Some(column), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { line: None, column: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Closest candidate by edit distance.
fn nearest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates.into_iter().min_by_key(|c| strsim::levenshtein(word, c))
}

fn suggestion<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> String {
    match nearest(word, candidates) {
        Some(s) => format!("; did you mean `{s}`?"),
        None => String::new(),
    }
}

/// A fully resolved configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: &'static Experiment,
    pub seed: u64,
    pub out: PathBuf,
    values: Vec<(&'static str, Value, Source)>,
}

const TOP_KEYS: &[&str] = &["experiment", "seed", "out"];
const DEFAULT_OUT: &str = "ftrlab-out";

struct Entry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

fn lex(text: &str) -> Result<(Vec<Entry>, Vec<(String, usize, Vec<Entry>)>), ConfigError> {
    let mut top = Vec::new();
    let mut sections: Vec<(String, usize, Vec<Entry>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::at(line, indent, "section header is missing its closing `]`"));
            };
            sections.push((name.trim().to_string(), line, Vec::new()));
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(ConfigError::at(line, indent, format!("expected `key = value` or `[section]`, found `{trimmed}`")));
        };
        let key = body[..eq].trim();
        if key.is_empty() {
            return Err(ConfigError::at(line, eq + 1, "missing key before `=`"));
        }
        let after = &body[eq + 1..];
        let value = after.trim();
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(ConfigError::at(line, value_col, format!("missing value for `{key}`")));
        }
        let entry = Entry { key: key.to_string(), value: value.to_string(), line, key_col: indent, value_col };
        match sections.last_mut() {
            Some(s) => s.2.push(entry),
            None => top.push(entry),
        }
    }
    Ok((top, sections))
}

fn parse_float(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (b != 0.0).then(|| a / b);
    }
    s.parse().ok()
}

fn in_range(x: f64, min: f64, max: f64) -> bool {
    !x.is_nan() && x >= min && x <= max && (x.is_finite() || max.is_infinite() && x > 0.0)
}

fn describe_range(min: f64, max: f64) -> String {
    format!("[{min}, {max}]")
}

fn parse_value(param: &Param, raw: &str) -> Result<Value, String> {
    let key = param.key;
    match param.kind {
        Kind::Int { min, max } => {
            let v: i64 = raw.parse().map_err(|_| format!("`{key}` expects an integer, found `{raw}`"))?;
            if v < min || v > max {
                return Err(format!("`{key}` = {v} is outside [{min}, {max}]"));
            }
            Ok(Value::Int(v))
        }
        Kind::Float { min, max } | Kind::NonzeroFloat { min, max } => {
            let v = parse_float(raw).ok_or_else(|| format!("`{key}` expects a number, found `{raw}`"))?;
            if !in_range(v, min, max) {
                return Err(format!("`{key}` = {v} is outside {}", describe_range(min, max)));
            }
            if matches!(param.kind, Kind::NonzeroFloat { .. }) && v == 0.0 {
                return Err(format!("`{key}` must be nonzero"));
            }
            Ok(Value::Float(v))
        }
        Kind::Floats { min, max } => {
            let mut out = Vec::new();
            for part in raw.split(',') {
                let v = parse_float(part).ok_or_else(|| format!("`{key}` expects numbers, found `{}`", part.trim()))?;
                if !in_range(v, min, max) {
                    return Err(format!("`{key}` entry {v} is outside {}", describe_range(min, max)));
                }
                out.push(v);
            }
            Ok(Value::Floats(out))
        }
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(format!("`{key}` must be one of {}{}", options.join(", "), suggestion(raw, options.iter().copied())))
            }
        }
        Kind::Families => {
            let mut out = Vec::new();
            for part in raw.split(',').map(str::trim) {
                if TestFamily::parse(part).is_none() {
                    return Err(format!(
                        "unknown test family `{part}` (known: zero, constant, knapp, random-signs[:n], dyadic[:k])"
                    ));
                }
                out.push(part.to_string());
            }
            Ok(Value::Words(out))
        }
    }
}

impl ExperimentConfig {
    /// Parse a config file. `requested` is the experiment named on the command
    /// line; the file may then omit the `experiment` key.
    pub fn parse(text: &str, requested: Option<&str>) -> Result<Self, ConfigError> {
        let (top, sections) = lex(text)?;
        let mut exp_entry: Option<&Entry> = None;
        let mut seen: Vec<&str> = Vec::new();
        for e in &top {
            if seen.contains(&e.key.as_str()) {
                return Err(ConfigError::at(e.line, e.key_col, format!("duplicate key `{}`", e.key)));
            }
            seen.push(&e.key);
            if e.key == "experiment" {
                exp_entry = Some(e);
            }
        }

        let id = match (exp_entry, requested) {
            (Some(e), Some(r)) if e.value != r => {
                return Err(ConfigError::at(
                    e.line,
                    e.value_col,
                    format!("file configures `{}` but `{r}` was requested", e.value),
                ))
            }
            (Some(e), _) => e.value.as_str(),
            (None, Some(r)) => r,
            (None, None) => {
                return Err(ConfigError::general(format!(
                    "missing required key `experiment` (required keys: experiment; optional: seed, out; experiments: {})",
                    experiment_ids().join(", ")
                )))
            }
        };
        let Some(exp) = experiment(id) else {
            let msg = format!("unknown experiment `{id}`{}", suggestion(id, experiment_ids()));
            return Err(match exp_entry {
                Some(e) => ConfigError::at(e.line, e.value_col, msg),
                None => ConfigError::general(msg),
            });
        };

        let mut seed = 0u64;
        let mut out = PathBuf::from(DEFAULT_OUT);
        for e in &top {
            match e.key.as_str() {
                "experiment" => {}
                "seed" => {
                    seed = e
                        .value
                        .parse()
                        .map_err(|_| ConfigError::at(e.line, e.value_col, format!("`seed` expects an unsigned 64-bit integer, found `{}`", e.value)))?
                }
                "out" => out = PathBuf::from(&e.value),
                other => {
                    let msg = if exp.params.iter().any(|p| p.key == other) {
                        format!("`{other}` is a parameter of {id} and belongs in the [{id}] section")
                    } else {
                        format!("unknown key `{other}`{}", suggestion(other, TOP_KEYS.iter().copied().chain(exp.params.iter().map(|p| p.key))))
                    };
                    return Err(ConfigError::at(e.line, e.key_col, msg));
                }
            }
        }

        let mut given: Vec<(&'static str, Value, Source)> = Vec::new();
        for (name, line, entries) in &sections {
            if name != id {
                let hint = if experiment(name).is_some() {
                    format!("; this file configures `{id}`")
                } else {
                    suggestion(name, [id])
                };
                return Err(ConfigError::at(*line, 2, format!("unexpected section [{name}]{hint}")));
            }
            for e in entries {
                let Some(param) = exp.params.iter().find(|p| p.key == e.key) else {
                    let msg = if TOP_KEYS.contains(&e.key.as_str()) {
                        format!("`{}` is a top-level key and must precede the sections", e.key)
                    } else {
                        format!("unknown key `{}` in [{id}]{}", e.key, suggestion(&e.key, exp.params.iter().map(|p| p.key)))
                    };
                    return Err(ConfigError::at(e.line, e.key_col, msg));
                };
                if given.iter().any(|g| g.0 == param.key) {
                    return Err(ConfigError::at(e.line, e.key_col, format!("duplicate key `{}`", e.key)));
                }
                let v = parse_value(param, &e.value).map_err(|m| ConfigError::at(e.line, e.value_col, m))?;
                given.push((param.key, v, Source::Line(e.line)));
            }
        }

        let mut values = Vec::with_capacity(exp.params.len());
        for param in exp.params {
            match given.iter().position(|g| g.0 == param.key) {
                Some(i) => values.push(given.swap_remove(i)),
                None => {
                    let v = parse_value(param, param.default).expect("built-in defaults parse");
                    values.push((param.key, v, Source::Default));
                }
            }
        }
        Ok(Self { experiment: exp, seed, out, values })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self
    }

    pub fn with_out(mut self, out: Option<PathBuf>) -> Self {
        if let Some(o) = out {
            self.out = o;
        }
        self
    }

    pub fn values(&self) -> impl Iterator<Item = (&'static str, &Value, Source)> {
        self.values.iter().map(|(k, v, s)| (*k, v, *s))
    }

    fn value(&self, key: &str) -> &Value {
        self.values
            .iter()
            .find(|(k, _, _)| *k == key)
            .map(|(_, v, _)| v)
            .unwrap_or_else(|| panic!("{} has no parameter `{key}`", self.experiment.id))
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.value(key) {
            Value::Int(v) => *v,
            v => panic!("`{key}` is not an integer: {v:?}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.value(key) {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            v => panic!("`{key}` is not a number: {v:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.value(key) {
            Value::Floats(v) => v,
            v => panic!("`{key}` is not a list: {v:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.value(key) {
            Value::Text(s) => s,
            v => panic!("`{key}` is not a choice: {v:?}"),
        }
    }

    pub fn families(&self, key: &str) -> Vec<TestFamily> {
        match self.value(key) {
            Value::Words(w) => w.iter().map(|s| TestFamily::parse(s).expect("validated at parse time")).collect(),
            v => panic!("`{key}` is not a family list: {v:?}"),
        }
    }

    /// Canonical text of everything that determines the results. The output
    /// directory is excluded so that relocated reruns share a run id.
    pub fn canonical(&self) -> String {
        let mut s = format!("experiment = {}\nseed = {}\n\n[{}]\n", self.experiment.id, self.seed, self.experiment.id);
        for (k, v, _) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn run_id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// The resolved config with defaults marked, as printed by `validate`.
    pub fn listing(&self) -> String {
        let mut s = format!(
            "experiment = {}\nseed = {}\nout = {}\n\n[{}]\n",
            self.experiment.id,
            self.seed,
            self.out.display(),
            self.experiment.id
        );
        let width = self.values.iter().map(|(k, v, _)| k.len() + v.to_string().len()).max().unwrap_or(0);
        for (k, v, src) in &self.values {
            let entry = format!("{k} = {v}");
            match src {
                Source::Default => s.push_str(&format!("{entry:<w$}  # default\n", w = width + 3)),
                Source::Line(_) => s.push_str(&format!("{entry}\n")),
            }
        }
        s
    }
}
