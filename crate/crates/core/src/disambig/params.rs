use std::path::Path;

use thiserror::Error;

use crate::gazetteer::{PlaceClass, MAX_CLASS};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown parameter {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// Weights of the disambiguation score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringParams<S> {
    /// Score per importance class 0..=6.
    pub class_weights: [S; MAX_CLASS as usize + 1],
    /// Added when the candidate's country is in the document context.
    pub context_bonus: S,
    /// Multiplier of the distance weight.
    pub km_coefficient: S,
    pub inflexion_km: S,
    pub steepness_km: S,
    pub earth_radius_km: S,
}

impl<S: Scalar> Default for ScoringParams<S> {
    fn default() -> Self {
        ScoringParams {
            class_weights: [80.0, 80.0, 80.0, 30.0, 20.0, 10.0, 5.0].map(S::lit),
            context_bonus: S::lit(100.0),
            km_coefficient: S::lit(20.0),
            inflexion_km: S::lit(300.0),
            steepness_km: S::lit(100.0),
            earth_radius_km: S::lit(6371.0),
        }
    }
}

pub const PARAM_KEYS: [&str; 6] = [
    "class_weights",
    "context_bonus",
    "km_coefficient",
    "inflexion_km",
    "steepness_km",
    "earth_radius_km",
];

fn parse_scalar<S: Scalar>(key: &str, value: &str) -> Result<S, ParamsError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(S::lit)
        .ok_or_else(|| ParamsError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        })
}

impl<S: Scalar> ScoringParams<S> {
    pub fn class_weight(&self, class: PlaceClass) -> S {
        self.class_weights[class.get() as usize]
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.class_weights.iter().any(|w| !(*w >= S::zero())) {
            return Err(ParamsError::Invalid("class weights must be >= 0".into()));
        }
        if !(self.context_bonus >= S::zero() && self.km_coefficient >= S::zero()) {
            return Err(ParamsError::Invalid(
                "context_bonus and km_coefficient must be >= 0".into(),
            ));
        }
        for (name, v) in [
            ("inflexion_km", self.inflexion_km),
            ("steepness_km", self.steepness_km),
            ("earth_radius_km", self.earth_radius_km),
        ] {
            if !(v > S::zero()) {
                return Err(ParamsError::Invalid(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }

    /// Sets one parameter from its textual value. `class_weights` takes seven
    /// comma-separated numbers; `class_weight_N` sets a single class.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamsError> {
        let key = key.trim();
        match key {
            "class_weights" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != self.class_weights.len() {
                    return Err(ParamsError::BadValue {
                        key: key.into(),
                        value: value.into(),
                    });
                }
                for (slot, part) in self.class_weights.iter_mut().zip(parts) {
                    *slot = parse_scalar(key, part)?;
                }
            }
            "context_bonus" => self.context_bonus = parse_scalar(key, value)?,
            "km_coefficient" => self.km_coefficient = parse_scalar(key, value)?,
            "inflexion_km" => self.inflexion_km = parse_scalar(key, value)?,
            "steepness_km" => self.steepness_km = parse_scalar(key, value)?,
            "earth_radius_km" => self.earth_radius_km = parse_scalar(key, value)?,
            _ => {
                let class = key
                    .strip_prefix("class_weight_")
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n < self.class_weights.len())
                    .ok_or_else(|| ParamsError::UnknownKey(key.to_string()))?;
                self.class_weights[class] = parse_scalar(key, value)?;
            }
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`; `#` starts a comment.
    pub fn apply_config(&mut self, text: &str) -> Result<(), ParamsError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ParamsError::Syntax { line: i + 1 })?;
            self.set(key, value)?;
        }
        self.validate()
    }

    pub fn from_config_file(path: &Path) -> Result<Self, ParamsError> {
        let text = std::fs::read_to_string(path).map_err(|source| ParamsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut params = ScoringParams::default();
        params.apply_config(&text)?;
        Ok(params)
    }

    /// Multiplies every score term by `factor`. Distances are untouched.
    pub fn scaled(&self, factor: S) -> Self {
        ScoringParams {
            class_weights: self.class_weights.map(|w| w * factor),
            context_bonus: self.context_bonus * factor,
            km_coefficient: self.km_coefficient * factor,
            ..self.clone()
        }
    }
}
