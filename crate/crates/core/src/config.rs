//! Training configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evalsuite::{ClassifyOptions, LogRegParams};
use crate::scoring::{ModelKind, TrainMode};

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// SGD step multiplier shared by embedding and topic updates.
    pub rate: f64,
    pub margin: f64,
    pub lambda: f64,
    /// Weight of the topic loss; zero in Standard mode.
    pub mu: f64,
    pub rounds: usize,
    pub mode: TrainMode,
    pub seed: u64,
    pub batch: usize,
    pub rel_corrupt_frac: f64,
    pub min_count: usize,
    pub stopwords: bool,
    pub negatives: usize,
    pub max_retries: usize,
    pub nmf_epochs: usize,
    pub nmf_rate: f64,
    pub checkpoint_every: usize,
    pub unit_ball: bool,
    /// Early stopping patience in checkpoints; 0 disables it.
    pub early_stop: usize,
    pub class_epochs: usize,
    pub class_rate: f64,
    pub class_l2: f64,
    pub fold_in_epochs: usize,
    pub fold_in_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            rate: 0.001,
            margin: 1.0,
            lambda: 0.2,
            mu: 0.0,
            rounds: 2000,
            mode: TrainMode::Standard,
            seed: 0,
            batch: 1,
            rel_corrupt_frac: 0.0,
            min_count: 5,
            stopwords: false,
            negatives: 1,
            max_retries: 100,
            nmf_epochs: 50,
            nmf_rate: 0.01,
            checkpoint_every: 500,
            unit_ball: false,
            early_stop: 0,
            class_epochs: 500,
            class_rate: 0.5,
            class_l2: 1e-4,
            fold_in_epochs: 2000,
            fold_in_rate: 0.001,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for key {key:?}")))
}

impl TrainConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys absent from the
    /// text keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", i + 1)));
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dim" => self.dim = parse_value(key, value)?,
            "rate" => self.rate = parse_value(key, value)?,
            "margin" => self.margin = parse_value(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "mu" => self.mu = parse_value(key, value)?,
            "rounds" => self.rounds = parse_value(key, value)?,
            "mode" => self.mode = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "batch" => self.batch = parse_value(key, value)?,
            "rel_corrupt_frac" => self.rel_corrupt_frac = parse_value(key, value)?,
            "min_count" => self.min_count = parse_value(key, value)?,
            "stopwords" => self.stopwords = parse_value(key, value)?,
            "negatives" => self.negatives = parse_value(key, value)?,
            "max_retries" => self.max_retries = parse_value(key, value)?,
            "nmf_epochs" => self.nmf_epochs = parse_value(key, value)?,
            "nmf_rate" => self.nmf_rate = parse_value(key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse_value(key, value)?,
            "unit_ball" => self.unit_ball = parse_value(key, value)?,
            "early_stop" => self.early_stop = parse_value(key, value)?,
            "class_epochs" => self.class_epochs = parse_value(key, value)?,
            "class_rate" => self.class_rate = parse_value(key, value)?,
            "class_l2" => self.class_l2 = parse_value(key, value)?,
            "fold_in_epochs" => self.fold_in_epochs = parse_value(key, value)?,
            "fold_in_rate" => self.fold_in_rate = parse_value(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical text form: every key, fixed order, shortest round-trip floats.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "rate = {}", self.rate);
        let _ = writeln!(s, "margin = {}", self.margin);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "mu = {}", self.mu);
        let _ = writeln!(s, "rounds = {}", self.rounds);
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "batch = {}", self.batch);
        let _ = writeln!(s, "rel_corrupt_frac = {}", self.rel_corrupt_frac);
        let _ = writeln!(s, "min_count = {}", self.min_count);
        let _ = writeln!(s, "stopwords = {}", self.stopwords);
        let _ = writeln!(s, "negatives = {}", self.negatives);
        let _ = writeln!(s, "max_retries = {}", self.max_retries);
        let _ = writeln!(s, "nmf_epochs = {}", self.nmf_epochs);
        let _ = writeln!(s, "nmf_rate = {}", self.nmf_rate);
        let _ = writeln!(s, "checkpoint_every = {}", self.checkpoint_every);
        let _ = writeln!(s, "unit_ball = {}", self.unit_ball);
        let _ = writeln!(s, "early_stop = {}", self.early_stop);
        let _ = writeln!(s, "class_epochs = {}", self.class_epochs);
        let _ = writeln!(s, "class_rate = {}", self.class_rate);
        let _ = writeln!(s, "class_l2 = {}", self.class_l2);
        let _ = writeln!(s, "fold_in_epochs = {}", self.fold_in_epochs);
        let _ = writeln!(s, "fold_in_rate = {}", self.fold_in_rate);
        s
    }

    /// Hex SHA-256 of [`TrainConfig::to_text`].
    pub fn hash(&self) -> String {
        hex_digest(self.to_text().as_bytes())
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            logreg: LogRegParams {
                epochs: self.class_epochs,
                rate: self.class_rate,
                l2: self.class_l2,
            },
            fold_in_epochs: self.fold_in_epochs,
            fold_in_rate: self.fold_in_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return fail("rate must be positive");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return fail("margin must be positive");
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return fail("lambda must lie in [0, 1)");
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return fail("mu must be nonnegative");
        }
        if self.mode == TrainMode::Standard && self.mu != 0.0 {
            return fail("mu must be 0 in standard mode");
        }
        if self.rounds == 0 {
            return fail("rounds must be at least 1");
        }
        if self.batch == 0 {
            return fail("batch must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.rel_corrupt_frac) {
            return fail("rel_corrupt_frac must lie in [0, 1]");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.max_retries == 0 {
            return fail("max_retries must be at least 1");
        }
        if self.nmf_epochs == 0 {
            return fail("nmf_epochs must be at least 1");
        }
        if !(self.nmf_rate > 0.0 && self.nmf_rate.is_finite()) {
            return fail("nmf_rate must be positive");
        }
        if !(self.class_rate > 0.0 && self.class_rate.is_finite()) {
            return fail("class_rate must be positive");
        }
        if !(self.class_l2 >= 0.0 && self.class_l2.is_finite()) {
            return fail("class_l2 must be nonnegative");
        }
        if !(self.fold_in_rate > 0.0 && self.fold_in_rate.is_finite()) {
            return fail("fold_in_rate must be positive");
        }
        Ok(())
    }

    /// Applies the model choice to the configuration. The model determines the
    /// training mode; a Standard model with a nonzero topic weight is rejected.
    pub fn for_model(mut self, model: ModelKind) -> Result<Self> {
        match model {
            ModelKind::SspStandard if self.mu != 0.0 => {
                return Err(Error::Config(format!(
                    "model ssp-std trains with frozen semantics but mu = {}",
                    self.mu
                )));
            }
            ModelKind::SspJoint => self.mode = TrainMode::Joint,
            _ => self.mode = TrainMode::Standard,
        }
        if model == ModelKind::TransE && self.mu != 0.0 {
            log::warn!("mu = {} is ignored for transe", self.mu);
            self.mu = 0.0;
        }
        self.validate()?;
        Ok(self)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}
