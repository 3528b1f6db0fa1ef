//! Sweep configuration: built-in defaults, an optional flat `key = value`
//! file, and command-line flags, applied in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qbeurling::{HalfInt, QParam, Weight, WeightKind};

/// Guard against sweeps that would build enormous representation matrices.
pub const T_MAX_LIMIT: HalfInt = HalfInt::from_twice(24);

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Raw settings as strings, keyed by flag name without the leading dashes.
#[derive(Debug, Clone, Default)]
pub struct Overrides(BTreeMap<String, String>);

const KEYS: [&str; 12] = [
    "q",
    "s-max",
    "t-max",
    "beta",
    "weight",
    "tol",
    "seed",
    "format",
    "out",
    "jobs",
    "fusion-t-max",
    "fusion-tol",
];

impl Overrides {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    /// Parses `key = value` lines; `#` starts a comment, underscores in keys
    /// are read as dashes.
    pub fn parse_file_contents(text: &str) -> Result<Self, String> {
        let mut out = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value, got {raw:?}", lineno + 1))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key {key:?}", lineno + 1));
            }
            out.set(&key, value.trim());
        }
        Ok(out)
    }

    pub fn read_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse_file_contents(&text)
    }

    /// Later entries win.
    pub fn merge(mut self, other: Overrides) -> Self {
        self.0.extend(other.0);
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub q: Vec<QParam>,
    pub s_max: HalfInt,
    pub t_max: HalfInt,
    /// Empty means "derive a grid around each threshold".
    pub beta: Vec<f64>,
    pub weight: Weight,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub fusion_t_max: HalfInt,
    pub fusion_tol: f64,
}

fn parse_list<T>(raw: &str, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(format!("{key}: empty list"));
    }
    items.into_iter().map(|s| parse(s).map_err(|e| format!("{key}: {e}"))).collect()
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_half(s: &str, key: &str) -> Result<HalfInt, String> {
    s.parse::<HalfInt>().map_err(|e| format!("{key}: {e}"))
}

pub fn parse_weight(s: &str) -> Result<Weight, String> {
    let (kind, param) = s
        .split_once(':')
        .ok_or_else(|| format!("weight {s:?} must look like poly:ALPHA or exp:BETA"))?;
    let x = parse_f64(param.trim())?;
    let w = match kind.trim() {
        "poly" => Weight::polynomial(x),
        "exp" => Weight::exponential(x),
        other => return Err(format!("unknown weight kind {other:?}")),
    };
    w.map_err(|e| e.to_string())
}

fn weight_label(w: &Weight) -> String {
    match &w.kind {
        WeightKind::Polynomial(a) => format!("poly:{a}"),
        WeightKind::Exponential(b) => format!("exp:{b}"),
        WeightKind::Table(t) => format!("table:{}", t.len()),
    }
}

impl SweepConfig {
    pub fn resolve(o: &Overrides) -> Result<Self, String> {
        let q = match o.get("q") {
            Some(raw) => parse_list(raw, "q", |s| QParam::new(parse_f64(s)?).map_err(|e| e.to_string()))?,
            None => [0.3, 0.5, 0.7, -0.5].map(|x| QParam::new(x).expect("valid default")).to_vec(),
        };
        let s_max = o.get("s-max").map(|s| parse_half(s, "s-max")).transpose()?.unwrap_or(HalfInt::from_twice(6));
        let t_max = o.get("t-max").map(|s| parse_half(s, "t-max")).transpose()?.unwrap_or(HalfInt::from_twice(16));
        if t_max > T_MAX_LIMIT {
            return Err(format!("t-max {t_max} exceeds the limit {T_MAX_LIMIT}"));
        }
        let beta = match o.get("beta") {
            Some(raw) => parse_list(raw, "beta", |s| {
                let b = parse_f64(s)?;
                if b >= 1.0 {
                    Ok(b)
                } else {
                    Err(format!("beta {b} must be >= 1"))
                }
            })?,
            None => Vec::new(),
        };
        let weight = match o.get("weight") {
            Some(raw) => parse_weight(raw)?,
            None => Weight::exponential(2.0).expect("valid default"),
        };
        let tol = o.get("tol").map(parse_f64).transpose()?.unwrap_or(1e-10);
        if tol <= 0.0 {
            return Err(format!("tol {tol} must be positive"));
        }
        let seed = o
            .get("seed")
            .map(|s| s.parse::<u64>().map_err(|_| format!("seed {s:?} is not a non-negative integer")))
            .transpose()?
            .unwrap_or(0);
        let format = o.get("format").map(str::parse).transpose()?.unwrap_or(Format::Json);
        let out = o.get("out").map(PathBuf::from);
        let jobs = match o.get("jobs") {
            Some(s) => match s.parse::<usize>() {
                Ok(n) if n > 0 => n,
                _ => return Err(format!("jobs {s:?} must be a positive integer")),
            },
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let fusion_t_max = o
            .get("fusion-t-max")
            .map(|s| parse_half(s, "fusion-t-max"))
            .transpose()?
            .unwrap_or(HalfInt::from_twice(3));
        if fusion_t_max > HalfInt::from_twice(6) {
            return Err(format!("fusion-t-max {fusion_t_max} exceeds the limit 3"));
        }
        let fusion_tol = o.get("fusion-tol").map(parse_f64).transpose()?.unwrap_or(1e-8);
        if fusion_tol <= 0.0 {
            return Err(format!("fusion-tol {fusion_tol} must be positive"));
        }
        Ok(Self { q, s_max, t_max, beta, weight, tol, seed, format, out, jobs, fusion_t_max, fusion_tol })
    }

    /// Settings that determine the output rows. `jobs` and `out` are left out
    /// so that the report does not depend on where or how fast it ran.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let join = |xs: Vec<String>| xs.join(",");
        vec![
            ("q", join(self.q.iter().map(|q| q.value().to_string()).collect())),
            ("s_max", self.s_max.to_string()),
            ("t_max", self.t_max.to_string()),
            ("beta", if self.beta.is_empty() { "auto".into() } else { join(self.beta.iter().map(f64::to_string).collect()) }),
            ("weight", weight_label(&self.weight)),
            ("tol", format!("{:e}", self.tol)),
            ("format", self.format.to_string()),
            ("fusion_t_max", self.fusion_t_max.to_string()),
            ("fusion_tol", format!("{:e}", self.fusion_tol)),
        ]
    }
}
