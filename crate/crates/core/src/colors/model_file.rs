//! JSON model files:
//! `{"dim": d, "embedding": [[...], ...], "atoms": [{"coeffs": [...], "prob": "0.25"}, ...]}`.

use serde::{Deserialize, Serialize};

use super::{ColorPoint, Embedding, ModelSpec};
use crate::error::{Result, UrnError};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbValue {
    Text(String),
    Number(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomEntry {
    pub coeffs: Vec<i64>,
    pub prob: ProbValue,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    #[serde(default)]
    pub embedding: Option<Vec<Vec<f64>>>,
    pub atoms: Vec<AtomEntry>,
    #[serde(default)]
    pub name: Option<String>,
}

/// Parses a decimal probability string (`"0.25"`, `"1e-3"`) or a fraction
/// (`"1/6"`).
pub fn parse_probability(text: &str) -> Result<f64> {
    let t = text.trim();
    let value = if let Some((num, den)) = t.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad_prob(t))?;
        let den: f64 = den.trim().parse().map_err(|_| bad_prob(t))?;
        num / den
    } else {
        t.parse::<f64>().map_err(|_| bad_prob(t))?
    };
    if !value.is_finite() {
        return Err(bad_prob(t));
    }
    Ok(value)
}

fn bad_prob(t: &str) -> UrnError {
    UrnError::InvalidSpec(format!("cannot parse probability '{t}'"))
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| UrnError::InvalidSpec(format!("model JSON: {e}")))
    }

    /// Parsed atoms, validated against `dim`.
    pub fn atoms(&self) -> Result<Vec<(ColorPoint, f64)>> {
        self.atoms
            .iter()
            .map(|a| {
                if a.coeffs.len() != self.dim {
                    return Err(UrnError::DimensionMismatch { expected: self.dim, got: a.coeffs.len() });
                }
                let p = match &a.prob {
                    ProbValue::Text(s) => parse_probability(s)?,
                    ProbValue::Number(x) => *x,
                };
                Ok((ColorPoint(a.coeffs.clone()), p))
            })
            .collect()
    }

    pub fn into_spec(self, default_name: &str) -> Result<ModelSpec> {
        let embedding = match &self.embedding {
            Some(rows) => {
                if rows.len() != self.dim {
                    return Err(UrnError::DimensionMismatch { expected: self.dim, got: rows.len() });
                }
                Embedding::from_rows(rows)?
            }
            None => Embedding::identity(self.dim),
        };
        let atoms = self.atoms()?;
        let name = self.name.clone().unwrap_or_else(|| format!("file:{default_name}"));
        Ok(ModelSpec::Custom { name, atoms, embedding })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colors::build_model;

    #[test]
    fn parses_decimal_strings_and_fractions() {
        assert_eq!(parse_probability("0.25").unwrap(), 0.25);
        assert_eq!(parse_probability(" 1/4 ").unwrap(), 0.25);
        assert!((parse_probability("0.1").unwrap() - 0.1).abs() < 1e-15);
        assert!(parse_probability("a quarter").is_err());
    }

    #[test]
    fn lazy_walk_file() {
        let json = r#"{"dim": 1, "embedding": [[1.0]],
            "atoms": [{"coeffs": [-1], "prob": "0.25"}, {"coeffs": [0], "prob": "0.5"}, {"coeffs": [1], "prob": 0.25}]}"#;
        let spec = ModelFile::from_json(json).unwrap().into_spec("lazy.json").unwrap();
        let m = build_model(&spec).unwrap();
        assert_eq!(m.atoms().len(), 3);
        assert_eq!(m.moments().unwrap().sigma[(0, 0)], 0.5);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ModelFile::from_json(r#"{"dim": 1, "atoms": [], "extra": 1}"#).is_err());
        let wrong = r#"{"dim": 2, "atoms": [{"coeffs": [1], "prob": "1"}]}"#;
        assert!(ModelFile::from_json(wrong).unwrap().into_spec("w").is_err());
        let unnormalized = r#"{"dim": 1, "atoms": [{"coeffs": [1], "prob": "0.9"}]}"#;
        let spec = ModelFile::from_json(unnormalized).unwrap().into_spec("u").unwrap();
        assert!(build_model(&spec).is_err());
    }
}
