//! Flat key-value experiment configs.
//!
//! One `key = value` pair per line, values in JSON syntax (numbers, strings,
//! booleans, flat arrays of numbers), `#` comments. No nesting: the format
//! stays diff-friendly and language-agnostic. Unknown keys are rejected so
//! typos cannot silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use wpme::mesh::BoundaryKind;
use wpme::weights::{WeightFamily, WeightSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("key `{0}`: {1}")]
    Value(String, String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown experiment kind `{0}`")]
    UnknownKind(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] wpme::Error),
}

/// Experiment families understood by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    BarenblattVerify,
    Smoothing,
    DecayZeroMean,
    DecayMean,
    Spectral,
    SobolevScan,
    PhiCheck,
    Lemma31Check,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "simulate" => ExperimentKind::Simulate,
            "barenblatt-verify" => ExperimentKind::BarenblattVerify,
            "smoothing" => ExperimentKind::Smoothing,
            "decay-zero-mean" => ExperimentKind::DecayZeroMean,
            "decay-mean" => ExperimentKind::DecayMean,
            "spectral" => ExperimentKind::Spectral,
            "sobolev-scan" => ExperimentKind::SobolevScan,
            "phi-check" => ExperimentKind::PhiCheck,
            "lemma31-check" => ExperimentKind::Lemma31Check,
        _ => return Err(ConfigError::UnknownKind(s.into())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::BarenblattVerify => "barenblatt-verify",
            ExperimentKind::Smoothing => "smoothing",
            ExperimentKind::DecayZeroMean => "decay-zero-mean",
            ExperimentKind::DecayMean => "decay-mean",
            ExperimentKind::Spectral => "spectral",
            ExperimentKind::SobolevScan => "sobolev-scan",
            ExperimentKind::PhiCheck => "phi-check",
            ExperimentKind::Lemma31Check => "lemma31-check",
        }
    }
}

/// Initial datum selector.
#[derive(Debug, Clone, PartialEq)]
pub enum DatumSpec {
    Constant { value: f64 },
    /// mean + c1 · ψ₁ with ψ₁ the first Neumann eigenvector.
    EigenPerturbation { mean: f64, c1: f64 },
    Spike { width: f64, height: f64, center: f64 },
    Barenblatt { c: f64, t0: f64 },
    Custom { values: Vec<f64> },
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub family: WeightFamily,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub dim: Option<u32>,
    pub n: usize,
    pub grading: Option<f64>,
    pub bc: BoundaryKind,
    pub m: f64,
    pub newton_tol: f64,
    pub max_newton: u32,
    pub eps_reg: f64,
    /// Fixed step when set; otherwise the ramp below.
    pub dt: Option<f64>,
    pub dt0: f64,
    pub dt_ratio: f64,
    pub dt_max: Option<f64>,
    pub datum: DatumSpec,
    pub output_times: Option<Vec<f64>>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub points_per_decade: usize,
    pub q0: f64,
    pub q0_list: Vec<f64>,
    pub sigma: Option<f64>,
    pub sigma_list: Vec<f64>,
    pub levels: Vec<usize>,
    pub fit_t_lo: Option<f64>,
    pub fit_t_hi: Option<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub scan_radius: f64,
    pub samples: usize,
    pub pairs: usize,
    pub x_max: f64,
    pub per_decade: usize,
    pub ascent_max_iter: usize,
    pub ascent_starts: usize,
    pub seed: u64,
    /// Echo of every key actually supplied, for the report.
    pub echo: BTreeMap<String, Value>,
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, Value>, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let Some(eq) = stripped.find('=') else {
            return Err(ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, got `{stripped}`"),
            });
        };
        let key = stripped[..eq].trim();
        let value_text = stripped[eq + 1..].trim();
        if key.is_empty() || value_text.is_empty() {
            return Err(ConfigError::Parse {
                line,
                msg: "empty key or value".into(),
            });
        }
        let value: Value = serde_json::from_str(value_text).map_err(|e| ConfigError::Parse {
            line,
            msg: format!("value `{value_text}` is not valid JSON: {e}"),
        })?;
        match &value {
            Value::Object(_) => {
                return Err(ConfigError::Parse {
                    line,
                    msg: "nested objects are not allowed".into(),
                })
            }
            Value::Array(items) if items.iter().any(|v| !v.is_number()) => {
                return Err(ConfigError::Parse {
                    line,
                    msg: "arrays may hold numbers only".into(),
                })
            }
            _ => {}
        }
        if map.insert(key.to_string(), value).is_some() {
            return Err(ConfigError::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

struct Extractor {
    map: BTreeMap<String, Value>,
    used: std::collections::BTreeSet<String>,
}

impl Extractor {
    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.used.insert(key.into());
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| ConfigError::Value(key.into(), format!("expected number, got {v}"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.used.insert(key.into());
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| ConfigError::Value(key.into(), format!("expected integer, got {v}"))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.used.insert(key.into());
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| ConfigError::Value(key.into(), format!("expected integer, got {v}"))),
        }
    }

    fn string(&mut self, key: &str, default: &str) -> Result<String, ConfigError> {
        self.used.insert(key.into());
        match self.map.get(key) {
            None => Ok(default.into()),
            Some(v) => v
                .as_str()
                .map(String::from)
                .ok_or_else(|| ConfigError::Value(key.into(), format!("expected string, got {v}"))),
        }
    }

    fn array(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.used.insert(key.into());
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for v in items {
                    out.push(v.as_f64().ok_or_else(|| {
                        ConfigError::Value(key.into(), "array entries must be numbers".into())
                    })?);
                }
                Ok(Some(out))
            }
            Some(v) => Err(ConfigError::Value(
                key.into(),
                format!("expected array, got {v}"),
            )),
        }
    }

    fn reject_unknown(&self) -> Result<(), ConfigError> {
        for key in self.map.keys() {
            if !self.used.contains(key) {
                return Err(ConfigError::UnknownKey(key.clone()));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let map = parse_lines(text)?;
        Self::from_map(map)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn from_map(map: BTreeMap<String, Value>) -> Result<Self, ConfigError> {
        let echo = map.clone();
        let mut ex = Extractor {
            map,
            used: Default::default(),
        };
        let kind_name = ex.string("kind", "")?;
        if kind_name.is_empty() {
            return Err(ConfigError::Missing("kind".into()));
        }
        let kind = ExperimentKind::parse(&kind_name)?;

        let family_name = ex.string("family", "unit")?;
        let alpha = ex.f64("alpha", 0.0)?;
        let beta = ex.f64("beta", 0.0)?;
        let a = ex.f64("a", 0.0)?;
        let b = ex.f64("b", 1.0)?;
        let dim = ex.f64_opt("N")?.map(|v| v as u32);
        let family = match family_name.as_str() {
            "unit" => WeightFamily::Unit,
            "power" => WeightFamily::Power,
            "log_power" => WeightFamily::LogPower,
            "exponential" => WeightFamily::Exponential,
            "radial_power" => WeightFamily::RadialPower,
            other => {
                return Err(ConfigError::Value(
                    "family".into(),
                    format!("unknown family `{other}`"),
                ))
            }
        };

        let bc = match ex.string("bc", "neumann")?.as_str() {
            "neumann" => BoundaryKind::Neumann,
            "dirichlet" => BoundaryKind::Dirichlet,
            other => {
                return Err(ConfigError::Value(
                    "bc".into(),
                    format!("expected neumann|dirichlet, got `{other}`"),
                ))
            }
        };

        let t_hi = ex.f64("t_hi", 1.0)?;
        let datum_name = ex.string("datum", "constant")?;
        let datum = match datum_name.as_str() {
            "constant" => DatumSpec::Constant {
                value: ex.f64("value", 1.0)?,
            },
            "eigen-perturbation" => DatumSpec::EigenPerturbation {
                mean: ex.f64("mean", 0.0)?,
                c1: ex.f64("c1", 0.1)?,
            },
            "spike" => DatumSpec::Spike {
                width: ex.f64("spike_width", 0.05)?,
                height: ex.f64("spike_height", 100.0)?,
                center: ex.f64("spike_center", 0.0)?,
            },
            "barenblatt" => DatumSpec::Barenblatt {
                c: ex.f64("barenblatt_c", 0.05)?,
                t0: ex.f64("t0", 0.01)?,
            },
            "custom" => DatumSpec::Custom {
                values: ex
                    .array("custom_values")?
                    .ok_or_else(|| ConfigError::Missing("custom_values".into()))?,
            },
            other => {
                return Err(ConfigError::Value(
                    "datum".into(),
                    format!("unknown datum `{other}`"),
                ))
            }
        };

        let config = ExperimentConfig {
            kind,
            family,
            alpha,
            beta,
            a,
            b,
            dim,
            n: ex.usize("n", 256)?,
            grading: ex.f64_opt("grading")?,
            bc,
            m: ex.f64("m", 2.0)?,
            newton_tol: ex.f64("newton_tol", 1e-11)?,
            max_newton: ex.u64("max_newton", 50)? as u32,
            eps_reg: ex.f64("eps_reg", 1e-12)?,
            dt: ex.f64_opt("dt")?,
            dt0: ex.f64("dt0", 1e-8)?,
            dt_ratio: ex.f64("dt_ratio", 1.3)?,
            dt_max: ex.f64_opt("dt_max")?,
            datum,
            output_times: ex.array("output_times")?,
            t_lo: ex.f64("t_lo", t_hi / 1e4)?,
            t_hi,
            points_per_decade: ex.usize("points_per_decade", 8)?,
            q0: ex.f64("q0", 1.0)?,
            q0_list: ex.array("q0_list")?.unwrap_or_default(),
            sigma: ex.f64_opt("sigma")?,
            sigma_list: ex.array("sigma_list")?.unwrap_or_default(),
            levels: ex
                .array("levels")?
                .unwrap_or_default()
                .into_iter()
                .map(|v| v as usize)
                .collect(),
            fit_t_lo: ex.f64_opt("fit_t_lo")?,
            fit_t_hi: ex.f64_opt("fit_t_hi")?,
            r_min: ex.f64("r_min", 0.5)?,
            r_max: ex.f64("r_max", 50.0)?,
            scan_radius: ex.f64("R", 2.0)?,
            samples: ex.usize("samples", 1000)?,
            pairs: ex.usize("pairs", 5)?,
            x_max: ex.f64("X", 50.0)?,
            per_decade: ex.usize("per_decade", 12)?,
            ascent_max_iter: ex.usize("ascent_max_iter", 2000)?,
            ascent_starts: ex.usize("ascent_starts", 5)?,
            seed: ex.u64("seed", 0)?,
            echo,
        };
        ex.reject_unknown()?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        // building the weight spec enforces the structural invariants
        self.weight_spec()?;
        if !(self.m > 1.0) {
            return Err(ConfigError::Invalid(format!("m = {} must exceed 1", self.m)));
        }
        if self.n < 2 {
            return Err(ConfigError::Invalid("n must be at least 2".into()));
        }
        if let Some(ts) = &self.output_times {
            let mut prev = 0.0;
            for &t in ts {
                if !(t > prev) {
                    return Err(ConfigError::Invalid(
                        "output_times must be positive and strictly increasing".into(),
                    ));
                }
                prev = t;
            }
        } else if !(self.t_lo > 0.0 && self.t_hi > self.t_lo) {
            return Err(ConfigError::Invalid(format!(
                "need 0 < t_lo < t_hi, got ({}, {})",
                self.t_lo, self.t_hi
            )));
        }
        if self.kind == ExperimentKind::SobolevScan && self.sigma_list.is_empty() && self.sigma.is_none() {
            return Err(ConfigError::Missing("sigma or sigma_list".into()));
        }
        if matches!(self.datum, DatumSpec::Custom { ref values } if values.len() != self.n) {
            return Err(ConfigError::Invalid(
                "custom_values length must equal n".into(),
            ));
        }
        Ok(())
    }

    /// Weight spec described by the config.
    pub fn weight_spec(&self) -> Result<WeightSpec<f64>, ConfigError> {
        let spec = match self.family {
            WeightFamily::Unit => WeightSpec::unit(self.a, self.b)?,
            WeightFamily::Power => WeightSpec::power(self.alpha, self.beta, self.b)?,
            WeightFamily::LogPower => WeightSpec::log_power(self.alpha, self.beta, self.b)?,
            WeightFamily::Exponential => {
                WeightSpec::exponential(self.alpha, self.beta, self.a, self.b)?
            }
            WeightFamily::RadialPower => {
                let dim = self.dim.ok_or_else(|| ConfigError::Missing("N".into()))?;
                WeightSpec::radial_power(dim, self.b)?
            }
        };
        Ok(spec)
    }

    /// Mesh grading: explicit override, else 2 for specs singular at the
    /// left endpoint, else 1.
    pub fn effective_grading(&self) -> Result<f64, ConfigError> {
        if let Some(g) = self.grading {
            return Ok(g);
        }
        Ok(if self.weight_spec()?.singular_at_left() {
            2.0
        } else {
            1.0
        })
    }

    /// Output times: explicit list or a log grid between t_lo and t_hi.
    pub fn effective_output_times(&self) -> Vec<f64> {
        if let Some(ts) = &self.output_times {
            return ts.clone();
        }
        let decades = (self.t_hi / self.t_lo).log10();
        let count = (decades * self.points_per_decade as f64).ceil().max(1.0) as usize;
        (0..=count)
            .map(|j| self.t_lo * 10f64.powf(decades * j as f64 / count as f64))
            .collect()
    }

    /// Deterministic hash for sweep keys (FNV-1a over the canonical echo).
    pub fn hash(&self) -> u64 {
        let canonical = serde_json::to_string(&self.echo).expect("echo serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for byte in canonical.bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}
