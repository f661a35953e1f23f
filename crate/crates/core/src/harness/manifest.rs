use std::io::Write;
use std::path::Path;

use super::config::{resolve_config, ExperimentConfig};
use super::HarnessError;
use crate::systems::PresetName;

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Config echo plus run summary, stored as flat `key = value` text.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub status: String,
    pub final_norm: f64,
    pub impulses: usize,
    pub ds_used: Option<f64>,
    pub initial_norm: f64,
    pub max_lambda_h: f64,
    /// Unit of the time columns in the trajectory and impulse CSVs.
    pub time_unit: String,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.config.to_key_values() {
            s.push_str(&format!("config.{k} = {v}\n"));
        }
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"));
        for (k, v) in [
            ("version", self.version.clone()),
            ("wall_clock_seconds", format!("{:?}", self.wall_clock_seconds)),
            ("status", self.status.clone()),
            ("final_norm", format!("{:?}", self.final_norm)),
            ("impulses", self.impulses.to_string()),
            ("ds_used", opt(self.ds_used)),
            ("initial_norm", format!("{:?}", self.initial_norm)),
            ("max_lambda_h", format!("{:?}", self.max_lambda_h)),
            ("time_unit", self.time_unit.clone()),
        ] {
            s.push_str(&format!("run.{k} = {v}\n"));
        }
        s
    }

    /// Writes `manifest.txt` via a temporary file and a rename.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let io = |source| HarnessError::Io {
            path: path.clone(),
            source,
        };
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(self.to_text().as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)
    }

    pub fn read(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Format { message, .. } => HarnessError::Format { path, message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let config = resolve_config(PresetName::LorenzOrigin, Some(text), &[])?;
        let mut run = std::collections::HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                if let Some(k) = k.trim().strip_prefix("run.") {
                    run.insert(k.to_string(), v.trim().to_string());
                }
            }
        }
        let missing = |k: &str| HarnessError::Format {
            path: MANIFEST_FILE.into(),
            message: format!("missing or malformed `run.{k}`"),
        };
        let text_of = |k: &str| run.get(k).cloned().ok_or_else(|| missing(k));
        let num = |k: &str| -> Result<f64, HarnessError> { text_of(k)?.parse().map_err(|_| missing(k)) };
        let ds_used = match text_of("ds_used")?.as_str() {
            "none" => None,
            v => Some(v.parse().map_err(|_| missing("ds_used"))?),
        };
        Ok(Self {
            config,
            version: text_of("version")?,
            wall_clock_seconds: num("wall_clock_seconds")?,
            status: text_of("status")?,
            final_norm: num("final_norm")?,
            impulses: text_of("impulses")?.parse().map_err(|_| missing("impulses"))?,
            ds_used,
            initial_norm: num("initial_norm")?,
            max_lambda_h: num("max_lambda_h")?,
            time_unit: text_of("time_unit")?,
        })
    }
}
