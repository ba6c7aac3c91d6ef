//! Experiment configuration: a flat TOML table with per-experiment defaults.

use std::fmt;
use std::str::FromStr;

use toml::{Table, Value};
use xyvqe::ansatz::{AnsatzSpec, Connectivity, Family};
use xyvqe::measure::{EstimateMode, Grouping, DEFAULT_SHOTS};
use xyvqe::optimize::{Method, OptimizerConfig};
use xyvqe::qstate::MAX_QUBITS;
use xyvqe::vqe::{SAMPLED_CALIBRATE_STEP, SAMPLED_MAX_EVALS};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    ExactSweep,
    MfSweep,
    VqeSweep,
    GateOrders,
    Layers,
    EntropyMax,
    EntropyRange,
    EntropyGrowth,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::ExactSweep,
        Experiment::MfSweep,
        Experiment::VqeSweep,
        Experiment::GateOrders,
        Experiment::Layers,
        Experiment::EntropyMax,
        Experiment::EntropyRange,
        Experiment::EntropyGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ExactSweep => "exact-sweep",
            Experiment::MfSweep => "mf-sweep",
            Experiment::VqeSweep => "vqe-sweep",
            Experiment::GateOrders => "gate-orders",
            Experiment::Layers => "layers",
            Experiment::EntropyMax => "entropy-max",
            Experiment::EntropyRange => "entropy-range",
            Experiment::EntropyGrowth => "entropy-growth",
        }
    }

    fn is_entropy(self) -> bool {
        matches!(
            self,
            Experiment::EntropyMax | Experiment::EntropyRange | Experiment::EntropyGrowth
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment {s:?} (expected one of {})", names.join(", "))
            })
    }
}

/// Fully resolved experiment description; every default is filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub j: f64,
    pub h_values: Vec<f64>,
    pub family: Family,
    pub connectivity: Connectivity,
    pub layers: usize,
    pub interleave_mf: bool,
    pub mode: EstimateMode,
    pub shots: u64,
    pub grouping: Grouping,
    pub optimizer: Method,
    pub max_evals: usize,
    pub tolerance_f: f64,
    pub tolerance_x: f64,
    pub initial_step: f64,
    pub spsa_a: f64,
    pub spsa_c: f64,
    /// Zero disables SPSA gain calibration.
    pub spsa_calibrate_step: f64,
    pub restarts: usize,
    pub seed: u64,
    pub orders: usize,
    pub layer_counts: Vec<usize>,
    pub ranges: Vec<usize>,
    pub ansatzes: Vec<String>,
    pub snapshots: Vec<usize>,
    pub timing: bool,
    /// Output path; not part of the echoed configuration.
    pub output: Option<String>,
}

/// Every key the parser accepts, in echo order.
pub const KEYS: &[&str] = &[
    "experiment",
    "n",
    "j",
    "h_values",
    "h_grid",
    "family",
    "connectivity",
    "layers",
    "interleave_mf",
    "mode",
    "shots",
    "grouping",
    "optimizer",
    "max_evals",
    "tolerance_f",
    "tolerance_x",
    "initial_step",
    "spsa_a",
    "spsa_c",
    "spsa_calibrate_step",
    "restarts",
    "seed",
    "orders",
    "layer_counts",
    "ranges",
    "ansatzes",
    "snapshots",
    "timing",
    "output",
];

pub const REQUIRED: &[&str] = &["experiment", "n"];

pub const DEFAULT_H_GRID: (f64, f64, f64) = (-4.0, 4.0, 0.25);

/// Default ansatz list for `entropy-max`.
pub const DEFAULT_ANSATZES: &[&str] = &[
    "MF",
    "CNOT:linear",
    "CNOT:full",
    "CRX:linear",
    "CRX:full",
    "TQR:linear",
    "TQR:full",
];

fn bad(key: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("field `{key}`: {msg}"))
}

struct Reader<'a> {
    t: &'a Table,
}

impl Reader<'_> {
    fn has(&self, key: &str) -> bool {
        self.t.contains_key(key)
    }

    fn float(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.t.get(key) {
            None => Ok(default),
            Some(Value::Float(x)) if x.is_finite() => Ok(*x),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(v) => Err(bad(key, format!("expected a finite number, got {v}"))),
        }
    }

    fn uint(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.t.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(v) => Err(bad(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.t.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(v) => Err(bad(key, format!("expected true or false, got {v}"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.t.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(bad(key, format!("expected a string, got {v}"))),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.string(key)? {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| bad(key, e)),
        }
    }

    fn array(&self, key: &str) -> Result<Option<&Vec<Value>>, CliError> {
        match self.t.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => Ok(Some(a)),
            Some(v) => Err(bad(key, format!("expected an array, got {v}"))),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(a) = self.array(key)? else { return Ok(None) };
        a.iter()
            .map(|v| match v {
                Value::Float(x) if x.is_finite() => Ok(*x),
                Value::Integer(i) => Ok(*i as f64),
                v => Err(bad(key, format!("expected numbers, got {v}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn uints(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        let Some(a) = self.array(key)? else { return Ok(None) };
        a.iter()
            .map(|v| match v {
                Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                v => Err(bad(key, format!("expected non-negative integers, got {v}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        let Some(a) = self.array(key)? else { return Ok(None) };
        a.iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                v => Err(bad(key, format!("expected strings, got {v}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

/// `min, min + step, ..., max` with the endpoint included when it lies on
/// the grid.
pub fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(max >= min) {
        return Err(bad("h_grid", "needs min <= max and step > 0"));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| min + k as f64 * step).collect())
}

pub fn parse_mode(s: &str) -> Result<EstimateMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "exact" => Ok(EstimateMode::Exact),
        "sampled" => Ok(EstimateMode::Sampled),
        _ => Err(format!("unknown mode {s:?} (expected exact or sampled)")),
    }
}

pub fn mode_name(m: EstimateMode) -> &'static str {
    match m {
        EstimateMode::Exact => "exact",
        EstimateMode::Sampled => "sampled",
    }
}

fn parse_grouping(s: &str) -> Result<Grouping, String> {
    match s.to_ascii_lowercase().as_str() {
        "grouped" => Ok(Grouping::Grouped),
        "per-term" | "per_term" => Ok(Grouping::PerTerm),
        _ => Err(format!("unknown grouping {s:?} (expected grouped or per-term)")),
    }
}

fn grouping_name(g: Grouping) -> &'static str {
    match g {
        Grouping::Grouped => "grouped",
        Grouping::PerTerm => "per-term",
    }
}

/// Parses an `entropy-max` entry such as `"TQR:full"`, `"CRX:range:2"` or `"MF"`.
pub fn parse_ansatz_entry(entry: &str, n: usize, layers: usize) -> Result<AnsatzSpec, String> {
    let (fam, conn) = match entry.split_once(':') {
        Some((f, c)) => (f, Some(c)),
        None => (entry, None),
    };
    let family: Family = fam.parse().map_err(|e| format!("{e}"))?;
    if family == Family::MeanField {
        return Ok(AnsatzSpec::mean_field(n));
    }
    let connectivity: Connectivity = conn
        .unwrap_or("full")
        .parse()
        .map_err(|e| format!("{e}"))?;
    Ok(AnsatzSpec::new(family, connectivity, layers, n))
}

impl ExperimentConfig {
    pub fn ansatz(&self) -> AnsatzSpec {
        if self.family == Family::MeanField {
            return AnsatzSpec::mean_field(self.n);
        }
        let mut spec = AnsatzSpec::new(self.family, self.connectivity.clone(), self.layers, self.n);
        spec.interleave_mf = self.interleave_mf;
        spec
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        let mut c = OptimizerConfig::new(self.optimizer);
        c.max_evals = self.max_evals;
        c.tolerance_f = self.tolerance_f;
        c.tolerance_x = self.tolerance_x;
        c.initial_step = self.initial_step;
        c.seed = self.seed;
        c.spsa.a = self.spsa_a;
        c.spsa.c = self.spsa_c;
        c.spsa.calibrate_step = (self.spsa_calibrate_step > 0.0).then_some(self.spsa_calibrate_step);
        c
    }

    /// Serialises every field except `output`; parsing the result yields an
    /// identical configuration.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        let ints = |v: &[usize]| Value::Array(v.iter().map(|&x| Value::Integer(x as i64)).collect());
        t.insert("experiment".into(), self.experiment.name().into());
        t.insert("n".into(), Value::Integer(self.n as i64));
        t.insert("j".into(), self.j.into());
        t.insert(
            "h_values".into(),
            Value::Array(self.h_values.iter().map(|&h| Value::Float(h)).collect()),
        );
        t.insert("family".into(), self.family.name().into());
        t.insert("connectivity".into(), self.connectivity.to_string().into());
        t.insert("layers".into(), Value::Integer(self.layers as i64));
        t.insert("interleave_mf".into(), self.interleave_mf.into());
        t.insert("mode".into(), mode_name(self.mode).into());
        t.insert("shots".into(), Value::Integer(self.shots as i64));
        t.insert("grouping".into(), grouping_name(self.grouping).into());
        t.insert("optimizer".into(), self.optimizer.name().into());
        t.insert("max_evals".into(), Value::Integer(self.max_evals as i64));
        t.insert("tolerance_f".into(), self.tolerance_f.into());
        t.insert("tolerance_x".into(), self.tolerance_x.into());
        t.insert("initial_step".into(), self.initial_step.into());
        t.insert("spsa_a".into(), self.spsa_a.into());
        t.insert("spsa_c".into(), self.spsa_c.into());
        t.insert("spsa_calibrate_step".into(), self.spsa_calibrate_step.into());
        t.insert("restarts".into(), Value::Integer(self.restarts as i64));
        t.insert("seed".into(), Value::Integer(self.seed as i64));
        t.insert("orders".into(), Value::Integer(self.orders as i64));
        t.insert("layer_counts".into(), ints(&self.layer_counts));
        t.insert("ranges".into(), ints(&self.ranges));
        t.insert(
            "ansatzes".into(),
            Value::Array(self.ansatzes.iter().map(|s| Value::String(s.clone())).collect()),
        );
        t.insert("snapshots".into(), ints(&self.snapshots));
        t.insert("timing".into(), self.timing.into());
        t
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_table()).expect("config serialises")
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 || self.n > MAX_QUBITS {
            return Err(bad("n", format!("must be in 2..={MAX_QUBITS}")));
        }
        if self.h_values.is_empty() {
            return Err(bad("h_values", "must not be empty"));
        }
        if self.h_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(bad("h_values", "must be strictly increasing"));
        }
        if self.layers == 0 {
            return Err(bad("layers", "must be >= 1"));
        }
        if self.mode == EstimateMode::Sampled && self.shots == 0 {
            return Err(bad("shots", "must be >= 1 in sampled mode"));
        }
        if self.max_evals == 0 {
            return Err(bad("max_evals", "must be >= 1"));
        }
        for (key, v) in [
            ("tolerance_f", self.tolerance_f),
            ("tolerance_x", self.tolerance_x),
            ("initial_step", self.initial_step),
            ("spsa_a", self.spsa_a),
            ("spsa_c", self.spsa_c),
        ] {
            if !(v > 0.0) {
                return Err(bad(key, "must be positive"));
            }
        }
        if self.spsa_calibrate_step < 0.0 {
            return Err(bad("spsa_calibrate_step", "must be >= 0"));
        }
        if self.restarts == 0 {
            return Err(bad("restarts", "must be >= 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(bad("seed", "must fit in a signed 64-bit integer"));
        }
        if self.orders == 0 {
            return Err(bad("orders", "must be >= 1"));
        }
        if self.layer_counts.is_empty() || self.layer_counts.contains(&0) {
            return Err(bad("layer_counts", "needs positive entries"));
        }
        if self.ranges.iter().any(|&r| r == 0 || r >= self.n) {
            return Err(bad("ranges", format!("entries must lie in 1..={}", self.n - 1)));
        }
        if self.experiment.is_entropy() && self.n % 2 != 0 {
            return Err(bad("n", "entropy experiments need an even chain"));
        }
        if self.experiment == Experiment::EntropyRange && self.ranges.is_empty() {
            return Err(bad("ranges", "must not be empty"));
        }
        for a in &self.ansatzes {
            parse_ansatz_entry(a, self.n, self.layers).map_err(|e| bad("ansatzes", e))?;
        }
        self.ansatz().validate().map_err(|e| bad("connectivity", e))?;
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("malformed TOML: {e}")))?;
    from_table(&table)
}

/// Builds a configuration from an already-parsed table.
pub fn from_table(t: &Table) -> Result<ExperimentConfig, CliError> {
    let unknown: Vec<&str> = t
        .keys()
        .map(String::as_str)
        .filter(|k| !KEYS.contains(k))
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !t.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "missing required keys: {}",
            missing.join(", ")
        )));
    }
    let r = Reader { t };
    let experiment: Experiment = r.parsed("experiment", Experiment::ExactSweep)?;
    let n = r.uint("n", 0)? as usize;

    let h_values = match (r.floats("h_values")?, r.floats("h_grid")?) {
        (Some(_), Some(_)) => return Err(bad("h_grid", "give either h_values or h_grid, not both")),
        (Some(v), None) => v,
        (None, Some(g)) => {
            if g.len() != 3 {
                return Err(bad("h_grid", "expected [min, max, step]"));
            }
            grid(g[0], g[1], g[2])?
        }
        (None, None) => grid(DEFAULT_H_GRID.0, DEFAULT_H_GRID.1, DEFAULT_H_GRID.2)?,
    };

    let default_family = match experiment {
        Experiment::MfSweep => Family::MeanField,
        _ => Family::Tqr,
    };
    let family: Family = r.parsed("family", default_family)?;
    if experiment == Experiment::MfSweep && family != Family::MeanField {
        return Err(bad("family", "mf-sweep always uses the MF ansatz"));
    }
    let connectivity: Connectivity = r.parsed("connectivity", Connectivity::Full)?;
    let mode = match r.string("mode")? {
        None => EstimateMode::Exact,
        Some(s) => parse_mode(&s).map_err(|e| bad("mode", e))?,
    };
    let grouping = match r.string("grouping")? {
        None => Grouping::default(),
        Some(s) => parse_grouping(&s).map_err(|e| bad("grouping", e))?,
    };
    let sampled = mode == EstimateMode::Sampled && !experiment.is_entropy();
    let default_method = if experiment.is_entropy() {
        Method::Powell
    } else if sampled {
        Method::Spsa
    } else {
        Method::NelderMead
    };
    let base = OptimizerConfig::default();
    let optimizer: Method = r.parsed("optimizer", default_method)?;
    let default_evals = if sampled { SAMPLED_MAX_EVALS } else { base.max_evals };
    let default_calibration = if optimizer == Method::Spsa && sampled {
        SAMPLED_CALIBRATE_STEP
    } else {
        0.0
    };
    let default_restarts = if experiment.is_entropy() {
        xyvqe::entropy::DEFAULT_ENTROPY_RESTARTS
    } else {
        xyvqe::vqe::DEFAULT_RESTARTS
    };
    let layers = r.uint("layers", 1)? as usize;
    let default_snapshots: Vec<usize> = match (experiment, n, family) {
        (Experiment::EntropyGrowth, 4, Family::Crx) => xyvqe::entropy::CRX_SNAPSHOTS.to_vec(),
        (Experiment::EntropyGrowth, 4, Family::Tqr) => xyvqe::entropy::TQR_SNAPSHOTS.to_vec(),
        _ => Vec::new(),
    };
    let cfg = ExperimentConfig {
        experiment,
        n,
        j: r.float("j", 1.0)?,
        h_values,
        family,
        connectivity,
        layers,
        interleave_mf: r.boolean("interleave_mf", false)?,
        mode,
        shots: r.uint("shots", DEFAULT_SHOTS)?,
        grouping,
        optimizer,
        max_evals: r.uint("max_evals", default_evals as u64)? as usize,
        tolerance_f: r.float("tolerance_f", base.tolerance_f)?,
        tolerance_x: r.float("tolerance_x", base.tolerance_x)?,
        initial_step: r.float("initial_step", base.initial_step)?,
        spsa_a: r.float("spsa_a", base.spsa.a)?,
        spsa_c: r.float("spsa_c", base.spsa.c)?,
        spsa_calibrate_step: r.float("spsa_calibrate_step", default_calibration)?,
        restarts: r.uint("restarts", default_restarts as u64)? as usize,
        seed: r.uint("seed", 0)?,
        orders: r.uint("orders", 10)? as usize,
        layer_counts: r.uints("layer_counts")?.unwrap_or_else(|| vec![1, 2, 3, 4]),
        ranges: r
            .uints("ranges")?
            .unwrap_or_else(|| (1..n.max(2)).collect()),
        ansatzes: r
            .strings("ansatzes")?
            .unwrap_or_else(|| DEFAULT_ANSATZES.iter().map(|s| s.to_string()).collect()),
        snapshots: r.uints("snapshots")?.unwrap_or(default_snapshots),
        timing: r.boolean("timing", false)?,
        output: r.string("output")?,
    };
    if r.has("h_values") && cfg.h_values.is_empty() {
        return Err(bad("h_values", "must not be empty"));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Applies `key=value` overrides; values use TOML syntax, with bare words
/// taken as strings.
pub fn apply_overrides(t: &mut Table, overrides: &[(String, String)]) -> Result<(), CliError> {
    for (key, raw) in overrides {
        let value = parse_value(raw);
        if key == "h_grid" {
            t.remove("h_values");
        } else if key == "h_values" {
            t.remove("h_grid");
        }
        t.insert(key.clone(), value);
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Recovers the configuration echoed in the header of a CSV produced by
/// this tool.
pub fn config_from_csv(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut doc = String::new();
    let mut inside = false;
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let rest = rest.strip_prefix(' ').unwrap_or(rest);
        if rest == crate::output::CONFIG_BEGIN {
            inside = true;
        } else if rest == crate::output::CONFIG_END {
            inside = false;
        } else if inside {
            doc.push_str(rest);
            doc.push('\n');
        }
    }
    if doc.is_empty() {
        return Err(CliError::Config("no configuration echo in CSV header".into()));
    }
    parse_config(&doc)
}
