//! Exact law of `Z_n` through the thinned representation
//! `Z_n = Z_0 + Σ_{j=1}^n I_j X_j`, `I_j ~ Bernoulli(1/(j+1))`.
//!
//! [`exact_law_dp`] convolves the kernels `(1 - q_j) δ_0 + q_j p` with a
//! global pruning budget; [`brute_force_law`] enumerates outcomes directly
//! and [`exact_law_cf`] inverts the product-form characteristic function.
//! The last two exist to cross-check the first.

mod brute;
mod dp;
mod fourier;
mod grid;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::colors::{dot, ColorPoint, Embedding};
use crate::error::{Result, UrnError};
use crate::numeric::{fmt_f64, CompensatedSum};

pub use brute::{brute_force_law, BRUTE_FORCE_MAX_N};
pub use dp::{exact_law_dp, exact_law_dp_with, DpOptions, Schedule, StageReport};
pub use fourier::{exact_law_cf, tail_window, CF_TAIL_TOL};

/// Tolerance on `Σ entries + pruned_mass = 1`.
pub const MASS_TOL: f64 = 1e-12;

/// A finitely supported probability law over colors, with the total mass
/// discarded by pruning.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseLaw {
    dim: usize,
    entries: BTreeMap<ColorPoint, f64>,
    pub pruned_mass: f64,
    /// Time index of the law (`0` for an initial configuration).
    pub n: u64,
    pub model_id: String,
}

impl SparseLaw {
    /// Point mass at `point`.
    pub fn delta(point: ColorPoint) -> Self {
        let dim = point.dim();
        let mut entries = BTreeMap::new();
        entries.insert(point, 1.0);
        SparseLaw { dim, entries, pruned_mass: 0.0, n: 0, model_id: String::new() }
    }

    /// Initial configuration from `(color, mass)` atoms; masses must be
    /// positive and sum to 1.
    pub fn from_atoms(dim: usize, atoms: impl IntoIterator<Item = (ColorPoint, f64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (c, p) in atoms {
            if c.dim() != dim {
                return Err(UrnError::DimensionMismatch { expected: dim, got: c.dim() });
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(UrnError::InvalidSpec(format!("mass {p} at {c:?} must be positive")));
            }
            *entries.entry(c).or_insert(0.0) += p;
        }
        if entries.is_empty() {
            return Err(UrnError::InvalidSpec("initial configuration is empty".into()));
        }
        let law = SparseLaw { dim, entries, pruned_mass: 0.0, n: 0, model_id: String::new() };
        let total = law.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(UrnError::InvalidSpec(format!("initial configuration has mass {total}, not 1")));
        }
        Ok(law)
    }

    pub(crate) fn from_parts(
        dim: usize,
        entries: BTreeMap<ColorPoint, f64>,
        pruned_mass: f64,
        n: u64,
        model_id: impl Into<String>,
    ) -> Self {
        debug_assert!(entries.values().all(|&p| p > 0.0));
        SparseLaw { dim, entries, pruned_mass, n, model_id: model_id.into() }
    }

    /// Parses an initial-configuration reference: `delta:<c1,..,cd>` (with
    /// `delta:0` meaning the origin in any dimension) or `file:<path>` holding
    /// `{"atoms": [{"coeffs": [..], "prob": ..}, ..]}`.
    pub fn parse_initial(reference: &str, dim: usize) -> Result<Self> {
        let r = reference.trim();
        if let Some(body) = r.strip_prefix("delta:") {
            let coeffs = body
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<i64>, _>>()
                .map_err(|_| UrnError::InvalidSpec(format!("bad initial color '{body}'")))?;
            if coeffs == [0] {
                return Ok(SparseLaw::delta(ColorPoint::origin(dim)));
            }
            if coeffs.len() != dim {
                return Err(UrnError::DimensionMismatch { expected: dim, got: coeffs.len() });
            }
            return Ok(SparseLaw::delta(ColorPoint(coeffs)));
        }
        if let Some(path) = r.strip_prefix("file:") {
            #[derive(serde::Deserialize)]
            #[serde(deny_unknown_fields)]
            struct InitialFile {
                atoms: Vec<crate::colors::AtomEntry>,
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| UrnError::InvalidSpec(format!("cannot read initial configuration {path}: {e}")))?;
            let file: InitialFile = serde_json::from_str(&text)
                .map_err(|e| UrnError::InvalidSpec(format!("initial configuration JSON: {e}")))?;
            let atoms = file
                .atoms
                .iter()
                .map(|a| {
                    let p = match &a.prob {
                        crate::colors::ProbValue::Text(s) => crate::colors::parse_probability(s)?,
                        crate::colors::ProbValue::Number(x) => *x,
                    };
                    Ok((ColorPoint(a.coeffs.clone()), p))
                })
                .collect::<Result<Vec<_>>>()?;
            return SparseLaw::from_atoms(dim, atoms);
        }
        Err(UrnError::InvalidSpec(format!("unknown initial configuration '{r}'")))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, c: &ColorPoint) -> f64 {
        self.entries.get(c).copied().unwrap_or(0.0)
    }

    /// Entries in lexicographic coefficient order.
    pub fn iter(&self) -> impl Iterator<Item = (&ColorPoint, f64)> + Clone + '_ {
        self.entries.iter().map(|(c, &p)| (c, p))
    }

    pub fn entries(&self) -> &BTreeMap<ColorPoint, f64> {
        &self.entries
    }

    /// Retained mass (excludes `pruned_mass`).
    pub fn total_mass(&self) -> f64 {
        self.entries.values().copied().collect::<CompensatedSum>().value()
    }

    /// `|Σ entries + pruned_mass - 1|`.
    pub fn conservation_error(&self) -> f64 {
        (self.total_mass() + self.pruned_mass - 1.0).abs()
    }

    /// `Σ_v law(v) exp(<λ, embed(v)>)`.
    pub fn mgf_at(&self, embedding: &Embedding, lambda: &[f64]) -> f64 {
        self.iter().map(|(c, p)| p * dot(lambda, &embedding.embed(c)).exp()).collect::<CompensatedSum>().value()
    }

    /// `Σ_v law(v) exp(i<t, embed(v)>)`.
    pub fn cf_at(&self, embedding: &Embedding, t: &[f64]) -> Complex64 {
        self.iter().map(|(c, p)| Complex64::from_polar(p, dot(t, &embedding.embed(c)))).sum()
    }

    /// Characteristic function of the coefficient vector.
    pub fn cf_coeffs_at(&self, t: &[f64]) -> Complex64 {
        self.iter()
            .map(|(c, p)| {
                let phase: f64 = c.0.iter().zip(t).map(|(&ci, ti)| ci as f64 * ti).sum();
                Complex64::from_polar(p, phase)
            })
            .sum()
    }

    /// Smallest and largest coefficient per axis over the support.
    pub fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for c in self.entries.keys() {
            for (i, &v) in c.0.iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        (lo, hi)
    }

    /// Largest embedded norm over the support.
    pub fn max_embedded_norm(&self, embedding: &Embedding) -> f64 {
        self.entries.keys().map(|c| crate::colors::norm(&embedding.embed(c))).fold(0.0, f64::max)
    }

    /// CSV with header `c1..cd,x1..xd,prob`, rows in coefficient order.
    pub fn to_csv(&self, embedding: &Embedding) -> String {
        let d = self.dim;
        let mut out = String::new();
        let cols: Vec<String> = (1..=d)
            .map(|i| format!("c{i}"))
            .chain((1..=d).map(|i| format!("x{i}")))
            .chain(std::iter::once("prob".to_string()))
            .collect();
        out.push_str(&cols.join(","));
        out.push('\n');
        for (c, p) in self.iter() {
            for v in &c.0 {
                let _ = write!(out, "{v},");
            }
            for x in embedding.embed(c) {
                let _ = write!(out, "{},", fmt_f64(x));
            }
            out.push_str(&fmt_f64(p));
            out.push('\n');
        }
        out
    }
}

/// Embedded mean and covariance (about its own mean) of the retained part
/// of a law, normalized by the retained mass.
pub fn law_moments(law: &SparseLaw, embedding: &Embedding) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let mass = law.total_mass();
    if mass < 1.0 - 1e-6 {
        return Err(UrnError::InvalidArgument(format!("law mass {mass} below 1 - 1e-6")));
    }
    let d = law.dim();
    let points: Vec<(Vec<f64>, f64)> = law.iter().map(|(c, p)| (embedding.embed(c), p)).collect();
    let mean =
        DVector::from_fn(d, |i, _| points.iter().map(|(x, p)| p * x[i]).collect::<CompensatedSum>().value() / mass);
    let cov = DMatrix::from_fn(d, d, |i, j| {
        points.iter().map(|(x, p)| p * (x[i] - mean[i]) * (x[j] - mean[j])).collect::<CompensatedSum>().value() / mass
    });
    Ok((mean, cov))
}
