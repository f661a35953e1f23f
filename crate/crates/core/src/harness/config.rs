use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::controllers::{GuardPolicy, PartnerConvention};
use crate::systems::PresetName;

use super::HarnessError;

/// Whether a simulation applies impulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    Adaptive,
    None,
}

impl ControlMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Adaptive => "adaptive",
            Self::None => "none",
        }
    }
}

impl FromStr for ControlMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "adaptive" | "on" => Ok(Self::Adaptive),
            "none" | "off" => Ok(Self::None),
            _ => Err(format!("expected `adaptive` or `none`, got `{s}`")),
        }
    }
}

fn guard_str(g: GuardPolicy) -> &'static str {
    match g {
        GuardPolicy::Unconditional => "unconditional",
        GuardPolicy::OnlyWhenGrowing => "growing",
    }
}

fn parse_guard(s: &str) -> Result<GuardPolicy, String> {
    match s {
        "unconditional" => Ok(GuardPolicy::Unconditional),
        "growing" => Ok(GuardPolicy::OnlyWhenGrowing),
        _ => Err(format!("expected `unconditional` or `growing`, got `{s}`")),
    }
}

fn convention_str(c: PartnerConvention) -> &'static str {
    match c {
        PartnerConvention::Consistent => "consistent",
        PartnerConvention::AsPrinted => "printed",
    }
}

fn parse_convention(s: &str) -> Result<PartnerConvention, String> {
    match s {
        "consistent" => Ok(PartnerConvention::Consistent),
        "printed" => Ok(PartnerConvention::AsPrinted),
        _ => Err(format!("expected `consistent` or `printed`, got `{s}`")),
    }
}

/// Effective experiment settings.
///
/// Times for `seir-measles` (`dt`, `t0`, `t1`, `t_max`) are in days and `alpha`
/// is per day; the other presets are dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: PresetName,
    pub control: ControlMode,
    pub alpha: f64,
    pub kappa: f64,
    pub kappa_eff: f64,
    pub delta: f64,
    pub c: f64,
    pub dt: f64,
    pub t0: f64,
    pub t1: f64,
    pub t_max: f64,
    pub seed: u64,
    pub convergence_tol: f64,
    pub guard: GuardPolicy,
    pub sync_convention: PartnerConvention,
    pub sample_every: usize,
    pub ds_horizon: f64,
    /// `None` selects 10% of `ds_horizon`.
    pub ds_burn_in: Option<f64>,
    pub out: Option<PathBuf>,
}

pub const KEYS: [&str; 19] = [
    "preset",
    "control",
    "alpha",
    "kappa",
    "kappa_eff",
    "delta",
    "c",
    "dt",
    "t0",
    "t1",
    "t_max",
    "seed",
    "convergence_tol",
    "guard",
    "sync_convention",
    "sample_every",
    "ds_horizon",
    "ds_burn_in",
    "out",
];

impl ExperimentConfig {
    pub fn preset_defaults(preset: PresetName) -> Self {
        let base = Self {
            preset,
            control: ControlMode::Adaptive,
            alpha: 5.0,
            kappa: 3.0,
            kappa_eff: 0.5,
            delta: 0.1,
            c: 5.0,
            dt: 1e-3,
            t0: 0.0,
            t1: 0.01,
            t_max: 10.0,
            seed: 0,
            convergence_tol: 1e-10,
            guard: GuardPolicy::Unconditional,
            sync_convention: PartnerConvention::Consistent,
            sample_every: 10,
            ds_horizon: 50.0,
            ds_burn_in: None,
            out: None,
        };
        match preset {
            PresetName::LorenzOrigin => base,
            PresetName::LorenzSync => Self {
                alpha: 0.4,
                t1: 0.1,
                t_max: 15.0,
                ds_horizon: 200.0,
                ..base
            },
            PresetName::SeirMeasles => Self {
                alpha: 0.002,
                t1: 100.0,
                t_max: 3.0 * 365.0,
                dt: 0.0365,
                convergence_tol: 0.0,
                sample_every: 10,
                ds_horizon: 3650.0,
                ..base
            },
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let err = |msg: String| HarnessError::Config {
            key: key.to_string(),
            message: msg,
        };
        let num = || value.parse::<f64>().map_err(|_| err(format!("expected a number, got `{value}`")));
        match key {
            "preset" => self.preset = value.parse().map_err(err)?,
            "control" => self.control = value.parse().map_err(err)?,
            "alpha" => self.alpha = num()?,
            "kappa" => self.kappa = num()?,
            "kappa_eff" => self.kappa_eff = num()?,
            "delta" => self.delta = num()?,
            "c" => self.c = num()?,
            "dt" => self.dt = num()?,
            "t0" => self.t0 = num()?,
            "t1" => self.t1 = num()?,
            "t_max" => self.t_max = num()?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| err(format!("expected a non-negative integer, got `{value}`")))?
            }
            "convergence_tol" => self.convergence_tol = num()?,
            "guard" => self.guard = parse_guard(value).map_err(err)?,
            "sync_convention" => self.sync_convention = parse_convention(value).map_err(err)?,
            "sample_every" => {
                self.sample_every = value
                    .parse()
                    .map_err(|_| err(format!("expected a positive integer, got `{value}`")))?
            }
            "ds_horizon" => self.ds_horizon = num()?,
            "ds_burn_in" => self.ds_burn_in = if value == "auto" { None } else { Some(num()?) },
            "out" => self.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            _ => return Err(err("unknown key".into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |key: &str, message: String| {
            Err(HarnessError::Config {
                key: key.into(),
                message,
            })
        };
        let finite = [
            ("alpha", self.alpha),
            ("kappa", self.kappa),
            ("kappa_eff", self.kappa_eff),
            ("delta", self.delta),
            ("c", self.c),
            ("dt", self.dt),
            ("t0", self.t0),
            ("t1", self.t1),
            ("t_max", self.t_max),
            ("convergence_tol", self.convergence_tol),
            ("ds_horizon", self.ds_horizon),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return bad(k, format!("must be finite, got {v}"));
            }
        }
        for (k, v) in [
            ("alpha", self.alpha),
            ("kappa", self.kappa),
            ("kappa_eff", self.kappa_eff),
            ("delta", self.delta),
            ("dt", self.dt),
            ("ds_horizon", self.ds_horizon),
        ] {
            if v <= 0.0 {
                return bad(k, format!("must be positive, got {v}"));
            }
        }
        if self.c < 0.0 {
            return bad("c", format!("must be non-negative, got {}", self.c));
        }
        if self.convergence_tol < 0.0 {
            return bad("convergence_tol", format!("must be non-negative, got {}", self.convergence_tol));
        }
        if self.t1 <= self.t0 {
            return bad("t1", format!("must exceed t0 = {}, got {}", self.t0, self.t1));
        }
        if self.t_max <= self.t0 {
            return bad("t_max", format!("must exceed t0 = {}, got {}", self.t0, self.t_max));
        }
        if self.sample_every == 0 {
            return bad("sample_every", "must be at least 1".into());
        }
        if let Some(b) = self.ds_burn_in {
            if !(b >= 0.0 && b < self.ds_horizon) {
                return bad("ds_burn_in", format!("must lie in [0, ds_horizon), got {b}"));
            }
        }
        Ok(())
    }

    /// The effective configuration as `(key, value)` pairs, in `KEYS` order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let f = |v: f64| format!("{v:?}");
        vec![
            ("preset", self.preset.to_string()),
            ("control", self.control.as_str().into()),
            ("alpha", f(self.alpha)),
            ("kappa", f(self.kappa)),
            ("kappa_eff", f(self.kappa_eff)),
            ("delta", f(self.delta)),
            ("c", f(self.c)),
            ("dt", f(self.dt)),
            ("t0", f(self.t0)),
            ("t1", f(self.t1)),
            ("t_max", f(self.t_max)),
            ("seed", self.seed.to_string()),
            ("convergence_tol", f(self.convergence_tol)),
            ("guard", guard_str(self.guard).into()),
            ("sync_convention", convention_str(self.sync_convention).into()),
            ("sample_every", self.sample_every.to_string()),
            ("ds_horizon", f(self.ds_horizon)),
            ("ds_burn_in", self.ds_burn_in.map_or_else(|| "auto".into(), f)),
            (
                "out",
                self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            ),
        ]
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_key_values() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
/// Manifest files are accepted too: `config.`-prefixed keys are read with the
/// prefix stripped and `run.` keys are ignored.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::Config {
                key: line.to_string(),
                message: format!("line {}: expected `key = value`", lineno + 1),
            });
        };
        let k = k.trim();
        if k.starts_with("run.") {
            continue;
        }
        let k = k.strip_prefix("config.").unwrap_or(k);
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Builds a configuration from preset defaults, then the file, then flags.
///
/// The preset is resolved from the flags first, then the file, then `fallback`.
pub fn resolve_config(
    fallback: PresetName,
    file_text: Option<&str>,
    flags: &[(String, String)],
) -> Result<ExperimentConfig, HarnessError> {
    let file = file_text.map(parse_pairs).transpose()?.unwrap_or_default();
    let preset_of = |pairs: &[(String, String)]| -> Result<Option<PresetName>, HarnessError> {
        pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "preset")
            .map(|(_, v)| {
                v.parse().map_err(|message| HarnessError::Config {
                    key: "preset".into(),
                    message,
                })
            })
            .transpose()
    };
    let preset = match preset_of(flags)? {
        Some(p) => p,
        None => preset_of(&file)?.unwrap_or(fallback),
    };
    let mut cfg = ExperimentConfig::preset_defaults(preset);
    let mut t1_set = false;
    for (k, v) in file.iter().chain(flags) {
        if k == "preset" {
            continue;
        }
        t1_set |= k == "t1";
        cfg.set(k, v)?;
    }
    if preset == PresetName::LorenzSync && !t1_set {
        cfg.t1 = cfg.t0 + cfg.delta;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config_file(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
