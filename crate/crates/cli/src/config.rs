//! Strict parsing of JSON scenario configurations.
//!
//! Parsing walks the raw JSON value instead of deserializing directly so that
//! every violation (unknown key, wrong type, out-of-range value) is reported
//! at once.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Zeno,
    Antizeno,
    Steering,
    SpinSeries,
    SweptWindow,
    Closure,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        Self::Zeno,
        Self::Antizeno,
        Self::Steering,
        Self::SpinSeries,
        Self::SweptWindow,
        Self::Closure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zeno => "zeno",
            Self::Antizeno => "antizeno",
            Self::Steering => "steering",
            Self::SpinSeries => "spin-series",
            Self::SweptWindow => "swept-window",
            Self::Closure => "closure",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn default_dim(self) -> usize {
        match self {
            Self::Zeno | Self::Antizeno => 4,
            Self::Steering | Self::SpinSeries => 2,
            Self::SweptWindow => 8,
            Self::Closure => 3,
        }
    }

    fn default_n(self) -> Vec<usize> {
        match self {
            Self::Zeno => vec![16, 64, 256, 1024],
            Self::Antizeno => vec![16, 64, 256],
            Self::SweptWindow => vec![200],
            Self::Closure => vec![4, 8],
            Self::Steering | Self::SpinSeries => Vec::new(),
        }
    }

    fn uses_schedule(self) -> bool {
        !matches!(self, Self::Steering | Self::SpinSeries)
    }

    fn uses_ode(self) -> bool {
        matches!(self, Self::Antizeno | Self::SpinSeries)
    }

    fn specific_keys(self) -> &'static [&'static str] {
        match self {
            Self::Zeno | Self::Closure => &[],
            Self::Antizeno => &["rank", "omega"],
            Self::Steering => &["k"],
            Self::SpinSeries => &["alpha", "omega", "epsilons", "max_order", "quadrature_points"],
            Self::SweptWindow => &["lower", "upper"],
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSetting {
    Rk4,
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSetting {
    Analytic,
    CentralDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleConfig {
    pub t_start: f64,
    pub t_end: f64,
    /// One run per entry.
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSettings {
    pub step_count: usize,
    pub scheme: SchemeSetting,
    pub derivative: DerivativeSetting,
    pub fd_step: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            step_count: 1000,
            scheme: SchemeSetting::Rk4,
            derivative: DerivativeSetting::Analytic,
            fd_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioParams {
    Zeno,
    Antizeno {
        rank: usize,
        omega: f64,
    },
    Steering {
        k: Vec<usize>,
    },
    SpinSeries {
        alpha: f64,
        omega: f64,
        epsilons: Vec<f64>,
        max_order: usize,
        quadrature_points: usize,
    },
    SweptWindow {
        lower: Vec<(f64, f64)>,
        upper: Vec<(f64, f64)>,
    },
    Closure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub dim: usize,
    pub seed: u64,
    pub instances: usize,
    pub schedule: ScheduleConfig,
    pub ode: OdeSettings,
    pub params: ScenarioParams,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

const COMMON_KEYS: &[&str] = &["scenario", "dim", "seed", "instances", "schedule", "ode"];
const MAX_DIM: usize = 64;
const MAX_INSTANCES: usize = 1000;

struct Reader<'a> {
    obj: &'a Map<String, Value>,
    path: &'a str,
    errors: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn f64(&mut self, k: &str, default: f64) -> f64 {
        match self.obj.get(k) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => x,
                Some(_) => {
                    self.errors.push(format!("{}: number must be finite", self.key(k)));
                    default
                }
                None => {
                    self.errors.push(format!("{}: expected a number", self.key(k)));
                    default
                }
            },
        }
    }

    fn uint(&mut self, k: &str, default: u64) -> u64 {
        match self.obj.get(k) {
            None => default,
            Some(v) => v.as_u64().unwrap_or_else(|| {
                self.errors
                    .push(format!("{}: expected a non-negative integer", self.key(k)));
                default
            }),
        }
    }

    fn usize(&mut self, k: &str, default: usize) -> usize {
        self.uint(k, default as u64) as usize
    }

    fn string(&mut self, k: &str, default: &str) -> String {
        match self.obj.get(k) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                self.errors.push(format!("{}: expected a string", self.key(k)));
                default.to_string()
            }
        }
    }

    fn uint_list(&mut self, k: &str, default: Vec<usize>) -> Vec<usize> {
        match self.obj.get(k) {
            None => default,
            Some(Value::Number(n)) => match n.as_u64() {
                Some(x) => vec![x as usize],
                None => {
                    self.errors
                        .push(format!("{}: expected a non-negative integer", self.key(k)));
                    default
                }
            },
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item.as_u64() {
                        Some(x) => out.push(x as usize),
                        None => self
                            .errors
                            .push(format!("{}[{i}]: expected a non-negative integer", self.key(k))),
                    }
                }
                out
            }
            Some(_) => {
                self.errors
                    .push(format!("{}: expected an integer or a list of integers", self.key(k)));
                default
            }
        }
    }

    fn f64_list(&mut self, k: &str, default: Vec<f64>) -> Vec<f64> {
        match self.obj.get(k) {
            None => default,
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item.as_f64() {
                        Some(x) if x.is_finite() => out.push(x),
                        _ => self
                            .errors
                            .push(format!("{}[{i}]: expected a finite number", self.key(k))),
                    }
                }
                out
            }
            Some(_) => {
                self.errors.push(format!("{}: expected a list of numbers", self.key(k)));
                default
            }
        }
    }

    fn breakpoints(&mut self, k: &str, default: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
        match self.obj.get(k) {
            None => default,
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let pair = item.as_array().filter(|p| p.len() == 2).and_then(|p| {
                        let t = p[0].as_f64()?;
                        let v = p[1].as_f64()?;
                        (t.is_finite() && v.is_finite()).then_some((t, v))
                    });
                    match pair {
                        Some(p) => out.push(p),
                        None => self.errors.push(format!(
                            "{}[{i}]: expected a [t, value] pair of finite numbers",
                            self.key(k)
                        )),
                    }
                }
                out
            }
            Some(_) => {
                self.errors
                    .push(format!("{}: expected a list of [t, value] pairs", self.key(k)));
                default
            }
        }
    }

    fn object(&mut self, k: &str) -> Option<&Map<String, Value>> {
        match self.obj.get(k) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.errors.push(format!("{}: expected an object", self.key(k)));
                None
            }
        }
    }

    fn reject_unknown(&mut self, allowed: &[&str], context: &str) {
        let mut unknown: Vec<&String> = self.obj.keys().filter(|k| !allowed.contains(&k.as_str())).collect();
        unknown.sort();
        for k in unknown {
            self.errors.push(format!("unknown key \"{}\"{context}", self.key(k)));
        }
    }
}

fn contains_non_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(|x| !x.is_finite()),
        Value::Array(a) => a.iter().any(contains_non_finite),
        Value::Object(m) => m.values().any(contains_non_finite),
        _ => false,
    }
}

/// Parses and validates a configuration. `scenario_override` supplies (or must
/// match) the `scenario` key; `seed_override` replaces `seed`.
pub fn parse_config_with(
    text: &[u8],
    scenario_override: Option<ScenarioKind>,
    seed_override: Option<u64>,
) -> Result<ScenarioConfig, ConfigError> {
    let text = std::str::from_utf8(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let Value::Object(obj) = value else {
        return Err(ConfigError::Invalid(vec!["top level must be a JSON object".into()]));
    };
    let mut errors = Vec::new();
    if contains_non_finite(&Value::Object(obj.clone())) {
        errors.push("config contains a non-finite number".into());
    }
    let mut r = Reader {
        obj: &obj,
        path: "",
        errors: &mut errors,
    };

    let named = match obj.get("scenario") {
        None => None,
        Some(Value::String(s)) => match ScenarioKind::from_name(s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                r.errors.push(format!(
                    "scenario: unknown scenario \"{s}\" (expected one of {})",
                    names.join(", ")
                ));
                None
            }
        },
        Some(_) => {
            r.errors.push("scenario: expected a string".into());
            None
        }
    };
    let scenario = match (named, scenario_override) {
        (Some(a), Some(b)) if a != b => {
            r.errors
                .push(format!("scenario: config says \"{a}\" but the command runs \"{b}\""));
            b
        }
        (_, Some(b)) => b,
        (Some(a), None) => a,
        (None, None) => {
            if !obj.contains_key("scenario") {
                r.errors.push("scenario: missing".into());
            }
            return Err(ConfigError::Invalid(errors));
        }
    };

    let mut allowed: Vec<&str> = COMMON_KEYS.to_vec();
    allowed.extend_from_slice(scenario.specific_keys());
    r.reject_unknown(&allowed, "");
    if !scenario.uses_schedule() && obj.contains_key("schedule") {
        r.errors.push(format!("schedule: not used by the {scenario} scenario"));
    }
    if !scenario.uses_ode() && obj.contains_key("ode") {
        r.errors.push(format!("ode: not used by the {scenario} scenario"));
    }

    let dim = r.usize("dim", scenario.default_dim());
    let seed = seed_override.unwrap_or_else(|| r.uint("seed", 0));
    if seed_override.is_some() {
        r.uint("seed", 0);
    }
    let instances = r.usize("instances", 1);

    let schedule = {
        let sub = r.object("schedule").cloned().unwrap_or_default();
        let mut s = Reader {
            obj: &sub,
            path: "schedule",
            errors: r.errors,
        };
        s.reject_unknown(&["t_start", "t_end", "n"], "");
        let t_start = s.f64("t_start", 0.0);
        let t_end = s.f64("t_end", 1.0);
        let n = s.uint_list("n", scenario.default_n());
        ScheduleConfig { t_start, t_end, n }
    };
    let ode = {
        let sub = r.object("ode").cloned().unwrap_or_default();
        let mut s = Reader {
            obj: &sub,
            path: "ode",
            errors: r.errors,
        };
        s.reject_unknown(&["step_count", "scheme", "derivative", "fd_step"], "");
        let d = OdeSettings::default();
        let step_count = s.usize("step_count", d.step_count);
        let scheme = match s.string("scheme", "rk4").as_str() {
            "rk4" => SchemeSetting::Rk4,
            "increment" => SchemeSetting::Increment,
            other => {
                s.errors.push(format!(
                    "ode.scheme: unknown scheme \"{other}\" (expected rk4 or increment)"
                ));
                d.scheme
            }
        };
        let derivative = match s.string("derivative", "analytic").as_str() {
            "analytic" => DerivativeSetting::Analytic,
            "central-difference" => DerivativeSetting::CentralDifference,
            other => {
                s.errors.push(format!(
                    "ode.derivative: unknown mode \"{other}\" (expected analytic or central-difference)"
                ));
                d.derivative
            }
        };
        let fd_step = s.f64("fd_step", d.fd_step);
        OdeSettings {
            step_count,
            scheme,
            derivative,
            fd_step,
        }
    };

    let params = match scenario {
        ScenarioKind::Zeno => ScenarioParams::Zeno,
        ScenarioKind::Closure => ScenarioParams::Closure,
        ScenarioKind::Antizeno => ScenarioParams::Antizeno {
            rank: r.usize("rank", 2.min(dim.max(1))),
            omega: r.f64("omega", 1.0),
        },
        ScenarioKind::Steering => ScenarioParams::Steering {
            k: r.uint_list("k", vec![2, 10, 100]),
        },
        ScenarioKind::SpinSeries => ScenarioParams::SpinSeries {
            alpha: r.f64("alpha", 0.5),
            omega: r.f64("omega", 1.0),
            epsilons: r.f64_list("epsilons", vec![0.4, 0.2, 0.1, 0.05]),
            max_order: r.usize("max_order", 4),
            quadrature_points: r.usize("quadrature_points", 64),
        },
        ScenarioKind::SweptWindow => ScenarioParams::SweptWindow {
            lower: r.breakpoints("lower", vec![(0.0, 2.0), (1.0, 1.0)]),
            upper: r.breakpoints("upper", vec![(0.0, 4.0), (1.0, 5.0)]),
        },
    };

    let cfg = ScenarioConfig {
        scenario,
        dim,
        seed,
        instances,
        schedule,
        ode,
        params,
    };
    check_ranges(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}

/// Parses a configuration that names its own scenario.
pub fn parse_config(text: &[u8]) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, None, None)
}

fn check_ranges(cfg: &ScenarioConfig, errors: &mut Vec<String>) {
    let s = cfg.scenario;
    if cfg.dim == 0 || cfg.dim > MAX_DIM {
        errors.push(format!("dim: must lie in 1..={MAX_DIM}"));
    }
    if cfg.instances == 0 || cfg.instances > MAX_INSTANCES {
        errors.push(format!("instances: must lie in 1..={MAX_INSTANCES}"));
    }
    if s.uses_schedule() {
        let sch = &cfg.schedule;
        if !(sch.t_end > sch.t_start) {
            errors.push("schedule: t_end must exceed t_start".into());
        }
        if sch.n.is_empty() {
            errors.push("schedule.n: at least one value required".into());
        }
        if sch.n.contains(&0) {
            errors.push("schedule.n: values must be positive".into());
        }
        if s == ScenarioKind::Closure && sch.n.iter().any(|&n| n > zenosim_core::chain::MAX_ENUMERATED_HISTORIES) {
            errors.push(format!(
                "schedule.n: history enumeration is limited to n ≤ {}",
                zenosim_core::chain::MAX_ENUMERATED_HISTORIES
            ));
        }
        if matches!(s, ScenarioKind::Antizeno | ScenarioKind::Zeno) && sch.t_start != 0.0 {
            errors.push(format!("schedule.t_start: the {s} scenario starts at t = 0"));
        }
    }
    if s.uses_ode() {
        if cfg.ode.step_count < 2 {
            errors.push("ode.step_count: must be at least 2".into());
        }
        if !(cfg.ode.fd_step > 0.0) {
            errors.push("ode.fd_step: must be positive".into());
        }
    }
    match &cfg.params {
        ScenarioParams::Antizeno { rank, omega } => {
            if *rank == 0 || *rank > cfg.dim {
                errors.push("rank: must lie in 1..=dim".into());
            }
            if *omega == 0.0 {
                errors.push("omega: must be non-zero".into());
            }
        }
        ScenarioParams::Steering { k } => {
            if cfg.dim < 2 {
                errors.push("dim: steering needs at least 2".into());
            }
            if k.is_empty() || k.contains(&0) {
                errors.push("k: need at least one positive value".into());
            }
        }
        ScenarioParams::SpinSeries {
            epsilons,
            max_order,
            quadrature_points,
            alpha,
            omega,
        } => {
            if cfg.dim != 2 {
                errors.push("dim: the spin-series scenario is two-dimensional".into());
            }
            if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) {
                errors.push("epsilons: need at least one positive value".into());
            }
            if !(1..=4).contains(max_order) {
                errors.push("max_order: must lie in 1..=4".into());
            }
            if *quadrature_points < 2 {
                errors.push("quadrature_points: must be at least 2".into());
            }
            if alpha + omega <= 0.0 {
                errors.push("alpha + omega: must be positive so that ε(t) grows".into());
            }
        }
        ScenarioParams::SweptWindow { lower, upper } => {
            if lower.is_empty() {
                errors.push("lower: need at least one breakpoint".into());
            }
            if upper.is_empty() {
                errors.push("upper: need at least one breakpoint".into());
            }
        }
        ScenarioParams::Zeno | ScenarioParams::Closure => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(br#"{"scenario": "zeno"}"#).unwrap();
        assert_eq!(cfg.dim, 4);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.schedule.n, vec![16, 64, 256, 1024]);
        assert_eq!(cfg.ode, OdeSettings::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(br#"{"scenario": "zeno", "foo": 1}"#).unwrap_err();
        assert!(err.to_string().contains("\"foo\""), "{err}");
    }

    #[test]
    fn n_sweep_gives_one_run_per_entry() {
        let cfg = parse_config(br#"{"scenario": "zeno", "schedule": {"n": [16, 64, 256]}}"#).unwrap();
        assert_eq!(cfg.schedule.n, vec![16, 64, 256]);
        let single = parse_config(br#"{"scenario": "closure", "schedule": {"n": 5}}"#).unwrap();
        assert_eq!(single.schedule.n, vec![5]);
    }

    #[test]
    fn every_violation_is_reported() {
        let err = parse_config(
            br#"{"scenario": "antizeno", "dim": "four", "bar": true, "schedule": {"t_end": -1, "m": 3}, "k": [1]}"#,
        )
        .unwrap_err();
        let ConfigError::Invalid(list) = err else {
            panic!("expected a validation error")
        };
        let text = list.join("\n");
        for needle in ["dim", "\"bar\"", "\"k\"", "schedule.m", "t_end"] {
            assert!(text.contains(needle), "missing {needle} in {text}");
        }
    }

    #[test]
    fn syntax_and_overflow_are_rejected() {
        assert!(matches!(parse_config(b"{"), Err(ConfigError::Syntax(_))));
        assert!(parse_config(br#"{"scenario": "spin-series", "alpha": 1e999}"#).is_err());
        assert!(parse_config(b"[1, 2]").is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse_config_with(br#"{"seed": 3}"#, Some(ScenarioKind::Steering), Some(9)).unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::Steering);
        assert_eq!(cfg.seed, 9);
        assert!(parse_config_with(br#"{"scenario": "zeno"}"#, Some(ScenarioKind::Closure), None).is_err());
    }

    #[test]
    fn scenario_specific_keys_are_scoped() {
        assert!(parse_config(br#"{"scenario": "zeno", "k": [2]}"#).is_err());
        assert!(parse_config(br#"{"scenario": "steering", "schedule": {"n": 4}}"#).is_err());
        assert!(parse_config(br#"{"scenario": "closure", "schedule": {"n": 13}}"#).is_err());
    }
}
