use std::fmt;
use std::path::{Path, PathBuf};

use birkhoff_spectra::{ChainConfig, Direction, TruncationConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "1";
pub const OUT_ENV: &str = "BIRKHOFF_SPECTRA_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Circular,
    Quarter,
    Potential,
    EntryLaw,
    Singularity,
    HsBound,
    Smallball,
    Concentration,
    TransferenceXcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Circular,
        Experiment::Quarter,
        Experiment::Potential,
        Experiment::EntryLaw,
        Experiment::Singularity,
        Experiment::HsBound,
        Experiment::Smallball,
        Experiment::Concentration,
        Experiment::TransferenceXcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Circular => "circular",
            Experiment::Quarter => "quarter",
            Experiment::Potential => "potential",
            Experiment::EntryLaw => "entry-law",
            Experiment::Singularity => "singularity",
            Experiment::HsBound => "hs-bound",
            Experiment::Smallball => "smallball",
            Experiment::Concentration => "concentration",
            Experiment::TransferenceXcheck => "transference-xcheck",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`; valid experiments: {}", valid_tags())))
    }

    /// `(n, samples)` used when neither a config file nor a flag sets them.
    pub fn default_size(self) -> (usize, usize) {
        match self {
            Experiment::Circular | Experiment::Quarter => (200, 10),
            Experiment::Potential => (200, 5),
            Experiment::EntryLaw => (100, 500),
            Experiment::Singularity | Experiment::HsBound => (100, 200),
            Experiment::Smallball => (20, 100_000),
            Experiment::Concentration => (200, 20),
            Experiment::TransferenceXcheck => (3, 5000),
        }
    }

    pub fn default_z0(self) -> Option<Complex64> {
        match self {
            Experiment::Potential | Experiment::Concentration => Some(Complex64::new(2.0, 0.0)),
            Experiment::Singularity => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn valid_tags() -> String {
    Experiment::ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
}

/// Hit-and-run settings; unset fields fall back to the library defaults for `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chord_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Independent chains the samples are divided between.
    #[serde(default = "one")]
    pub chains: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub experiment: Experiment,
    pub n: usize,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Complex64>,
    pub seed: u64,
    #[serde(default = "default_chain")]
    pub chain: ChainSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_chain() -> ChainSettings {
    ChainSettings {
        chains: 1,
        ..ChainSettings::default()
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        let (n, samples) = experiment.default_size();
        Self {
            schema: SCHEMA.to_string(),
            experiment,
            n,
            samples,
            z0: experiment.default_z0(),
            seed,
            chain: default_chain(),
            truncation: None,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema != SCHEMA {
            return bad(format!(
                "schema `{}` is not supported; expected \"{SCHEMA}\"",
                self.schema
            ));
        }
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.chain.chains == 0 {
            return bad("chain.chains must be positive".into());
        }
        if self.chain.thin == Some(0) {
            return bad("chain.thin must be positive".into());
        }
        if let Some(z) = self.z0 {
            if !z.re.is_finite() || !z.im.is_finite() {
                return bad("z0 must be finite".into());
            }
        }
        if let Some(t) = &self.truncation {
            t.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        match self.experiment {
            Experiment::TransferenceXcheck if self.n > 4 => bad(format!(
                "transference-xcheck needs n <= 4 for the rejection sampler, got {}",
                self.n
            )),
            Experiment::Smallball if self.n > 24 => bad(format!(
                "smallball enumerates 2^n sums; n must be <= 24, got {}",
                self.n
            )),
            Experiment::Concentration if self.samples < 10 => bad("concentration needs at least 10 samples".into()),
            _ => Ok(()),
        }
    }

    pub fn z0_or_default(&self) -> Complex64 {
        self.z0
            .or(self.experiment.default_z0())
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn chain_config(&self) -> ChainConfig {
        let mut c = ChainConfig::new(self.n);
        if self.experiment == Experiment::EntryLaw {
            // One entry moves only a few times per default interval.
            c.thin *= 5;
        }
        if let Some(b) = self.chain.burn_in {
            c.burn_in = b;
        }
        if let Some(t) = self.chain.thin {
            c.thin = t;
        }
        if let Some(t) = self.chain.chord_tol {
            c.chord_tol = t;
        }
        if let Some(d) = self.chain.direction {
            c.direction = d;
        }
        c
    }

    pub fn truncation_config(&self) -> TruncationConfig {
        self.truncation.unwrap_or_else(|| TruncationConfig::for_n(self.n))
    }

    /// `out_dir`, else `$BIRKHOFF_SPECTRA_OUT/<run>`, else `runs/<run>`.
    pub fn resolved_out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        let run = format!("{}-n{}-seed{}", self.experiment, self.n, self.seed);
        match std::env::var_os(OUT_ENV) {
            Some(base) if !base.is_empty() => PathBuf::from(base).join(run),
            _ => PathBuf::from("runs").join(run),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        action: "reading config",
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}
