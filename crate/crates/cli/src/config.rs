use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use atorus_core::{Executor, Tier};

use crate::error::RunError;

pub const MIN_SAMPLES: usize = 10;
pub const DEFAULT_SAMPLES: usize = 100;
pub const EXACT_TOLERANCE: f64 = 1e-8;
pub const FINITE_DIFFERENCE_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Geometry,
    Killing,
    Bundle,
    Classify,
    Counterexample,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Geometry,
        Suite::Killing,
        Suite::Bundle,
        Suite::Classify,
        Suite::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Killing => "killing",
            Suite::Bundle => "bundle",
            Suite::Classify => "classify",
            Suite::Counterexample => "counterexample",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TierArg {
    #[default]
    Exact,
    FiniteDifference,
}

impl TierArg {
    pub fn tier(self) -> Tier {
        match self {
            TierArg::Exact => Tier::Exact,
            TierArg::FiniteDifference => Tier::FiniteDifference,
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            TierArg::Exact => EXACT_TOLERANCE,
            TierArg::FiniteDifference => FINITE_DIFFERENCE_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// One verification run. An empty suite list selects every suite that
/// applies to the target.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub target: String,
    pub suites: Vec<Suite>,
    pub tier: TierArg,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub executor: Executor,
}

impl SuiteConfig {
    pub fn new(target: impl Into<String>) -> Self {
        SuiteConfig {
            target: target.into(),
            suites: Vec::new(),
            tier: TierArg::Exact,
            samples: DEFAULT_SAMPLES,
            seed: atorus_core::sampling::DEFAULT_SEED,
            tolerance: None,
            executor: Executor::default(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.tier.default_tolerance())
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.samples < MIN_SAMPLES {
            return Err(RunError::Usage(format!(
                "--samples must be at least {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(RunError::Usage(format!("--tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// The part of the configuration echoed into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub target: String,
    pub suites: Vec<Suite>,
    pub tier: TierArg,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl From<&SuiteConfig> for ConfigEcho {
    fn from(c: &SuiteConfig) -> Self {
        ConfigEcho {
            target: c.target.clone(),
            suites: c.suites.clone(),
            tier: c.tier,
            samples: c.samples,
            seed: c.seed,
            tolerance: c.tolerance(),
        }
    }
}
