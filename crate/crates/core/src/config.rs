//! Run configuration: one TOML document, every field defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{PhoneHasher, DEFAULT_HEX_LEN};
use crate::ingest::ObservationWindow;
use crate::kinclass::{AgeBounds, SlotSpecs};
use crate::lifecourse::LifecourseConfig;
use crate::synth::SynthConfig;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "KINCALL_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw call records.
    pub cdr: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    /// Ground-truth relations, for scoring synthetic runs.
    pub relations: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            cdr: None,
            registry: None,
            relations: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub salt: String,
    pub hex_len: usize,
    pub seed: u64,
    pub workers: usize,
    /// Field delimiter of the raw call records.
    pub cdr_delimiter: char,
    /// Field delimiter of every table the pipeline reads or writes.
    pub table_delimiter: char,
    /// Calendar year of the observation window.
    pub year: i32,
    pub age_bounds: AgeBounds,
    pub lifecourse: LifecourseConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            salt: "kincall".into(),
            hex_len: DEFAULT_HEX_LEN,
            seed: 2015,
            workers: 1,
            cdr_delimiter: ',',
            table_delimiter: '\t',
            year: 2015,
            age_bounds: AgeBounds::default(),
            lifecourse: LifecourseConfig::default(),
            synth: SynthConfig::default(),
        }
        .with_seed(2015)
    }
}

fn delimiter_byte(name: &str, c: char) -> Result<u8> {
    if c.is_ascii() && c != '\n' && c != '\r' && c != '"' {
        Ok(c as u8)
    } else {
        Err(Error::Config(format!("{name} must be a single ASCII character other than a quote or newline")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let seed = cfg.seed;
        Ok(cfg.with_seed(seed))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::at(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Sets the run seed and propagates it to the stages that draw random
    /// numbers.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.lifecourse.seed = seed;
        self.synth.seed = seed;
        self
    }

    /// Checks everything that can be checked before touching any input.
    pub fn validate(&self) -> Result<()> {
        self.age_bounds.validate()?;
        self.lifecourse.bins.validate()?;
        if self.lifecourse.min_cohort_size == 0 {
            return Err(Error::Config("min_cohort_size must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.salt.is_empty() {
            return Err(Error::Config("salt must not be empty".into()));
        }
        self.hasher()?;
        delimiter_byte("cdr_delimiter", self.cdr_delimiter)?;
        delimiter_byte("table_delimiter", self.table_delimiter)?;
        if chrono::NaiveDate::from_ymd_opt(self.year, 1, 1).is_none() {
            return Err(Error::Config(format!("year {} out of range", self.year)));
        }
        self.synth.validate()
    }

    pub fn hasher(&self) -> Result<PhoneHasher> {
        PhoneHasher::new(self.salt.as_bytes(), self.hex_len)
    }

    pub fn slot_specs(&self) -> Result<SlotSpecs> {
        SlotSpecs::from_bounds(&self.age_bounds)
    }

    pub fn window(&self) -> ObservationWindow {
        ObservationWindow::calendar_year(self.year)
    }

    pub fn cdr_delim(&self) -> u8 {
        self.cdr_delimiter as u8
    }

    pub fn table_delim(&self) -> u8 {
        self.table_delimiter as u8
    }
}
