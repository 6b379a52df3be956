use serde::Serialize;

use super::exact::DEFAULT_EXACT_MAX_ORDER;
use super::GedError;

/// Cooling schedule and search budget for [`anneal_match`](super::anneal_match).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealConfig {
    /// Starting temperature as a multiple of the starting matching's cost.
    pub initial_temperature: f64,
    /// Geometric cooling: `T <- cooling_factor * T`.
    pub cooling_factor: f64,
    /// Moves tried per temperature; `None` means 8 per free vertex.
    pub steps_per_temperature: Option<usize>,
    pub minimum_temperature: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Start the first restart from a neighbourhood-propagation matching
    /// instead of a random one.
    pub structural_seed: bool,
    /// Pairs with combined order up to this are solved exhaustively by
    /// `pair_score`; 0 disables exact delegation.
    pub exact_max_order: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            initial_temperature: 1.0,
            cooling_factor: 0.95,
            steps_per_temperature: None,
            minimum_temperature: 1e-3,
            restarts: 3,
            seed: 0,
            structural_seed: true,
            exact_max_order: DEFAULT_EXACT_MAX_ORDER,
        }
    }
}

impl AnnealConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), GedError> {
        let fail = |msg: &str| Err(GedError::Config(msg.to_string()));
        if !(self.initial_temperature > 0.0) {
            return fail("initial_temperature must be positive");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return fail("cooling_factor must lie in (0, 1)");
        }
        if self.steps_per_temperature == Some(0) {
            return fail("steps_per_temperature must be positive");
        }
        if !(self.minimum_temperature > 0.0) {
            return fail("minimum_temperature must be positive");
        }
        if self.minimum_temperature >= self.initial_temperature {
            return fail("minimum_temperature must be below initial_temperature");
        }
        if self.restarts == 0 {
            return fail("restarts must be positive");
        }
        Ok(())
    }

    /// Sets one parameter from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), GedError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, GedError> {
            value
                .parse()
                .map_err(|_| GedError::Config(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "initial_temperature" => self.initial_temperature = parse(key, value)?,
            "cooling_factor" => self.cooling_factor = parse(key, value)?,
            "steps_per_temperature" => {
                self.steps_per_temperature = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "minimum_temperature" => self.minimum_temperature = parse(key, value)?,
            "restarts" => self.restarts = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "structural_seed" => self.structural_seed = parse(key, value)?,
            "exact_max_order" => self.exact_max_order = parse(key, value)?,
            other => return Err(GedError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file (one entry per line, `#` comments) on
    /// top of `self`.
    pub fn apply_key_values(&mut self, text: &str) -> Result<(), GedError> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GedError::Config(format!("line {}: expected key=value", idx + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| GedError::Config(format!("line {}: {e}", idx + 1)))?;
        }
        self.validate()
    }
}
