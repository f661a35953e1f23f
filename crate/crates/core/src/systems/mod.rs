//! Bundled model presets.

mod coupled;
mod lorenz;
mod seir;

pub use coupled::{CoupledLorenz, CoupledLorenzParams};
pub use lorenz::{Lorenz, LorenzParams};
pub use seir::{Seir, SeirParams, DAYS_PER_YEAR};

use std::fmt;
use std::str::FromStr;

/// Named experiment presets exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    LorenzOrigin,
    LorenzSync,
    SeirMeasles,
}

impl PresetName {
    pub const ALL: [PresetName; 3] = [Self::LorenzOrigin, Self::LorenzSync, Self::SeirMeasles];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::LorenzOrigin => "lorenz-origin",
            Self::LorenzSync => "lorenz-sync",
            Self::SeirMeasles => "seir-measles",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::LorenzOrigin => {
                "Lorenz system driven to the unstable origin by radial rescaling on a geometric schedule"
            }
            Self::LorenzSync => {
                "two x1-coupled Lorenz systems synchronized by fixed-interval rescaling of x - y"
            }
            Self::SeirMeasles => "SEIR+V measles model with pulse vaccination on a geometric schedule",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}
