//! Flat `key = value` configuration with optional `[command]` sections.
//!
//! Layers, later wins: built-in defaults, preset, file (global keys, then the
//! section named after the running command), `MDP_SEED`, `--set` overrides,
//! `--seed`. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mdp_core::{DistributionSpec, Tail};

use crate::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "dist",
    "rate",
    "mean",
    "sd",
    "p",
    "offset",
    "table",
    "n",
    "exponent",
    "r",
    "replications",
    "t_grid",
    "t_max",
    "t_points",
    "horizon",
    "seed",
    "tail",
    "n_list",
    "x",
    "path",
    "endpoint_a",
    "endpoint_t",
    "segments",
    "sigma2",
];

pub const COMMANDS: &[&str] = &["rate-curve", "clt-check", "lln-check", "legendre", "path-rate", "validate"];

pub const DEFAULT_SEED: u64 = 20_240_101;

/// Raw layered values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn defaults() -> Self {
        let mut c = RawConfig::default();
        for (k, v) in [
            ("dist", "poisson"),
            ("n", "100"),
            ("exponent", "0.9"),
            ("r", "0.25"),
            ("replications", "10000"),
            ("t_max", "auto"),
            ("t_points", "40"),
            ("horizon", "auto"),
            ("tail", "upper"),
            ("n_list", "100,1000,10000"),
            ("x", "0.25,0.5,1,1.5,2,3"),
            ("segments", "8"),
        ] {
            c.values.insert(k.into(), v.into());
        }
        c.values.insert("seed".into(), DEFAULT_SEED.to_string());
        c
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(k, v)
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<(), CliError> {
        let preset: &[(&str, &str)] = match name {
            "example1" => &[("dist", "exponential"), ("rate", "1")],
            "example2" => &[("dist", "poisson"), ("rate", "1")],
            other => return Err(CliError::Config(format!("unknown preset `{other}` (expected example1 or example2)"))),
        };
        for (k, v) in preset.iter().chain(&[
            ("n", "100"),
            ("exponent", "0.9"),
            ("r", "0.25"),
            ("replications", "10000"),
            ("t_max", "1"),
            ("t_points", "40"),
            ("tail", "upper"),
        ]) {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Applies the global keys of `text`, then those under `[command]`.
    pub fn apply_file_text(&mut self, text: &str, command: &str) -> Result<(), CliError> {
        let mut global = Vec::new();
        let mut scoped = Vec::new();
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !COMMANDS.contains(&name) {
                    return Err(CliError::Config(format!("line {}: unknown section [{name}]", lineno + 1)));
                }
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
            }
            match &section {
                None => global.push((k.to_string(), v.to_string())),
                Some(s) if s == command => scoped.push((k.to_string(), v.to_string())),
                Some(_) => {}
            }
        }
        for (k, v) in global.iter().chain(&scoped) {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing key `{key}`")))?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("cannot parse `{key}` = `{raw}`")))
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        if self.get(key).is_some() {
            self.parse(key)
        } else {
            Ok(default)
        }
    }

    fn parse_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        let raw = self
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing key `{key}`")))?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("cannot parse `{key}` entry `{}`", s.trim())))
            })
            .collect()
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let dist = self.resolve_dist()?;
        let n: usize = self.parse("n")?;
        let exponent: f64 = self.parse("exponent")?;
        let r: f64 = self.parse("r")?;
        let replications: usize = self.parse("replications")?;
        let seed: u64 = self.parse("seed")?;
        let tail = match self.get("tail").unwrap_or("upper") {
            "upper" => Tail::Upper,
            "lower" => Tail::Lower,
            "both" => Tail::Both,
            other => return Err(CliError::Config(format!("tail must be upper, lower or both, got `{other}`"))),
        };
        let horizon = match self.get("horizon") {
            None | Some("auto") => mdp_core::trajectory::default_horizon(dist.spec.mu(), r),
            Some(_) => self.parse("horizon")?,
        };
        let t_grid = match self.get("t_grid") {
            Some(s) if s != "auto" => self.parse_list("t_grid")?,
            _ => {
                let points: usize = self.parse("t_points")?;
                if points == 0 {
                    return Err(CliError::Config("t_points must be at least 1".into()));
                }
                match self.get("t_max") {
                    None | Some("auto") => mdp_core::montecarlo::default_t_grid(
                        dist.spec.mu(),
                        dist.spec.sigma2(),
                        r,
                        n,
                        exponent,
                        replications,
                        points,
                    ),
                    Some(_) => {
                        let t_max: f64 = self.parse("t_max")?;
                        (1..=points).map(|k| t_max * k as f64 / points as f64).collect()
                    }
                }
            }
        };
        let endpoint = match (self.get("endpoint_a"), self.get("endpoint_t")) {
            (Some(_), Some(_)) => Some((self.parse("endpoint_a")?, self.parse("endpoint_t")?)),
            (None, None) => None,
            _ => return Err(CliError::Config("endpoint_a and endpoint_t must be given together".into())),
        };
        let sigma2 = match self.get("sigma2") {
            Some(_) => Some(self.parse("sigma2")?),
            None => None,
        };
        Ok(Resolved {
            dist,
            n,
            exponent,
            r,
            replications,
            t_grid,
            horizon,
            seed,
            tail,
            n_list: self.parse_list("n_list")?,
            x: self.parse_list("x")?,
            path: self.get("path").map(PathBuf::from),
            endpoint,
            segments: self.parse("segments")?,
            sigma2,
        })
    }

    fn resolve_dist(&self) -> Result<ResolvedDist, CliError> {
        let kind = self.get("dist").unwrap_or("poisson").to_string();
        let (spec, params) = match kind.as_str() {
            "exponential" | "poisson" => {
                let rate: f64 = self.parse_or("rate", 1.0)?;
                let spec = if kind == "exponential" {
                    DistributionSpec::exponential(rate)
                } else {
                    DistributionSpec::poisson(rate)
                };
                (spec, vec![("rate", fmt_num(rate))])
            }
            "normal" => {
                let mean: f64 = self.parse_or("mean", 1.0)?;
                let sd: f64 = self.parse_or("sd", 1.0)?;
                (DistributionSpec::normal(mean, sd), vec![("mean", fmt_num(mean)), ("sd", fmt_num(sd))])
            }
            "bernoulli" => {
                let p: f64 = self.parse_or("p", 0.5)?;
                let offset: f64 = self.parse_or("offset", 0.0)?;
                (
                    DistributionSpec::shifted_bernoulli(p, offset),
                    vec![("p", fmt_num(p)), ("offset", fmt_num(offset))],
                )
            }
            "table" => {
                let raw = self
                    .get("table")
                    .ok_or_else(|| CliError::Config("dist = table needs `table = v:p,v:p,...`".into()))?;
                let mut atoms = Vec::new();
                for entry in raw.split(',') {
                    let (v, p) = entry
                        .split_once(':')
                        .ok_or_else(|| CliError::Config(format!("table entry `{entry}` is not value:probability")))?;
                    let v: f64 = v.trim().parse().map_err(|_| CliError::Config(format!("bad table value `{v}`")))?;
                    let p: f64 = p.trim().parse().map_err(|_| CliError::Config(format!("bad table probability `{p}`")))?;
                    atoms.push((v, p));
                }
                let text = atoms
                    .iter()
                    .map(|(v, p)| format!("{}:{}", fmt_num(*v), fmt_num(*p)))
                    .collect::<Vec<_>>()
                    .join(",");
                (DistributionSpec::table(atoms), vec![("table", text)])
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown dist `{other}` (expected exponential, poisson, normal, bernoulli or table)"
                )))
            }
        };
        let spec = spec.map_err(|e| CliError::Config(e.to_string()))?;
        Ok(ResolvedDist { kind, params, spec })
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedDist {
    pub kind: String,
    pub params: Vec<(&'static str, String)>,
    pub spec: DistributionSpec,
}

impl ResolvedDist {
    pub fn label(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ");
        format!("{}({params})", self.kind)
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub dist: ResolvedDist,
    pub n: usize,
    pub exponent: f64,
    pub r: f64,
    pub replications: usize,
    pub t_grid: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
    pub tail: Tail,
    pub n_list: Vec<usize>,
    pub x: Vec<f64>,
    pub path: Option<PathBuf>,
    pub endpoint: Option<(f64, f64)>,
    pub segments: usize,
    pub sigma2: Option<f64>,
}

impl Resolved {
    /// Manifest text; loading it as a config reproduces this resolution.
    pub fn manifest(&self, command: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mdp {} manifest", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {command}");
        let _ = writeln!(out, "dist = {}", self.dist.kind);
        for (k, v) in &self.dist.params {
            let _ = writeln!(out, "{k} = {v}");
        }
        let list = |xs: &[f64]| xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",");
        let tail = match self.tail {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
            Tail::Both => "both",
        };
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "exponent = {}", fmt_num(self.exponent));
        let _ = writeln!(out, "r = {}", fmt_num(self.r));
        let _ = writeln!(out, "replications = {}", self.replications);
        let _ = writeln!(out, "t_grid = {}", list(&self.t_grid));
        let _ = writeln!(out, "horizon = {}", fmt_num(self.horizon));
        let _ = writeln!(out, "tail = {tail}");
        let _ = writeln!(
            out,
            "n_list = {}",
            self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(out, "x = {}", list(&self.x));
        if let Some(p) = &self.path {
            let _ = writeln!(out, "path = {}", p.display());
        }
        if let Some((a, t)) = self.endpoint {
            let _ = writeln!(out, "endpoint_a = {}", fmt_num(a));
            let _ = writeln!(out, "endpoint_t = {}", fmt_num(t));
        }
        let _ = writeln!(out, "segments = {}", self.segments);
        if let Some(s) = self.sigma2 {
            let _ = writeln!(out, "sigma2 = {}", fmt_num(s));
        }
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }
}

/// Shortest representation that parses back to the same `f64`; `inf` for `+∞`.
pub fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{}", x + 0.0)
    }
}

/// Builds the layered configuration for `command`.
pub fn load(
    command: &str,
    preset: Option<&str>,
    config_path: Option<&Path>,
    env_seed: Option<&str>,
    overrides: &[String],
    seed_flag: Option<u64>,
) -> Result<RawConfig, CliError> {
    let mut cfg = RawConfig::defaults();
    if let Some(p) = preset {
        cfg.apply_preset(p)?;
    }
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_file_text(&text, command)?;
    }
    if let Some(s) = env_seed {
        let seed: u64 = s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("MDP_SEED is not an unsigned integer: `{s}`")))?;
        cfg.set("seed", &seed.to_string())?;
    }
    for o in overrides {
        cfg.apply_assignment(o)?;
    }
    if let Some(s) = seed_flag {
        cfg.set("seed", &s.to_string())?;
    }
    Ok(cfg)
}
