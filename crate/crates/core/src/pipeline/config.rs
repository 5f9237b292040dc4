use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Syntax(String),
    #[error("invalid configuration: {0}")]
    Value(String),
}

/// Tunable constants of the decision process, read from a `key = value` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub credibility_threshold: f64,
    pub corroboration_min: usize,
    pub match_threshold: f64,
    /// Ascending casualty counts at which severity steps up by one.
    pub severity_buckets: Vec<u32>,
    /// Ticks between crisis selection and the decision-maker's collect request.
    pub awareness_window: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            credibility_threshold: 0.6,
            corroboration_min: 2,
            match_threshold: 0.5,
            severity_buckets: vec![1, 3, 6, 11],
            awareness_window: 2,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::Value(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("credibility_threshold", self.credibility_threshold)?;
        unit("match_threshold", self.match_threshold)?;
        if !self.severity_buckets.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::Value("severity_buckets must be strictly ascending".into()));
        }
        Ok(())
    }

    /// Severity on the 1..=5 scale from the worst damage level and casualty
    /// count on record.
    pub fn severity(&self, damage_level: Option<i64>, casualties: Option<i64>) -> u8 {
        let bucket = casualties.map_or(1, |c| 1 + self.severity_buckets.iter().filter(|&&t| i64::from(t) <= c).count() as i64);
        damage_level.unwrap_or(1).max(bucket).clamp(1, 5) as u8
    }
}
