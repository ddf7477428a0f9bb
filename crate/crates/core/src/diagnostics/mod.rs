//! Distances between (centered, scaled) urn laws and the Gaussian limit.
//!
//! The exact law of `Z_n` is standardized by `x = (v - μ ln n) Σ^{-1/2} / √ln n`
//! and compared with `N_d(0, I_d)` through the Kolmogorov distance (d = 1),
//! a characteristic-function grid distance (any d), and the local-limit
//! sup statistic over lattice points. [`random_config_convergence`] does the
//! same for the random configuration `U_n / (n + 1)` by simulation.

mod clt;
mod llt;
mod random_config;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::colors::{Embedding, MomentSummary};
use crate::error::{Result, UrnError};
use crate::exact_law::SparseLaw;

pub use clt::{cf_distance, default_t_grid, ks_distance_1d, CfDistance, KsDistance};
pub use llt::{lattice_gaussian_law, llt_normalizer, llt_statistic, LltStatistic, PHI_CUTOFF};
pub use random_config::{
    random_config_convergence, RandomConfigOptions, RandomConfigReport, RandomConfigRow, TestFamily, TestFunction,
};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `φ_d(x) = (2π)^{-d/2} exp(-|x|²/2)`.
pub fn gaussian_density(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (-0.5 * r2).exp() / (2.0 * PI).powf(d / 2.0)
}

/// Standard normal distribution function.
pub fn gaussian_cdf_1d(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// The affine map `v ↦ (v - center) · scale_inv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    pub center: Vec<f64>,
    /// `Σ^{-1/2} / √ln n`, applied on the right.
    pub scale_inv: DMatrix<f64>,
    pub n: u64,
}

impl Standardization {
    /// Centering `μ ln n` (or `μ (ln n + γ)` with `use_gamma`).
    pub fn new(moments: &MomentSummary, n: u64, use_gamma: bool) -> Result<Self> {
        if n < 3 {
            return Err(UrnError::TimeTooSmall { n, min: 3 });
        }
        let log_n = (n as f64).ln();
        let shift = if use_gamma { log_n + EULER_GAMMA } else { log_n };
        let inv_sqrt = moments.sigma_inv_sqrt().ok_or(UrnError::DegenerateSigma)?;
        if moments.sigma_sqrt.determinant().abs() <= 1e-12 {
            return Err(UrnError::DegenerateSigma);
        }
        Ok(Standardization {
            center: moments.mu.iter().map(|m| m * shift).collect(),
            scale_inv: inv_sqrt / log_n.sqrt(),
            n,
        })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.center.len();
        (0..d).map(|j| (0..d).map(|i| (x[i] - self.center[i]) * self.scale_inv[(i, j)]).sum()).collect()
    }

    /// Inverse map back to embedded coordinates.
    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        let d = self.center.len();
        let scale = self.scale_inv.clone().try_inverse().expect("scale is nonsingular");
        (0..d).map(|j| (0..d).map(|i| y[i] * scale[(i, j)]).sum::<f64>() + self.center[j]).collect()
    }
}

/// Pushforward of a law under a [`Standardization`].
#[derive(Clone, Debug, Serialize)]
pub struct StandardizedLaw {
    pub n: u64,
    pub dim: usize,
    pub points: Vec<(Vec<f64>, f64)>,
    pub pruned_mass: f64,
}

impl StandardizedLaw {
    pub fn total_mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.points.iter().map(|(_, p)| *p))
    }
}

pub fn standardize(
    law: &SparseLaw,
    embedding: &Embedding,
    moments: &MomentSummary,
    use_gamma: bool,
) -> Result<StandardizedLaw> {
    let st = Standardization::new(moments, law.n, use_gamma)?;
    let points = law.iter().map(|(c, p)| (st.apply(&embedding.embed(c)), p)).collect();
    Ok(StandardizedLaw { n: law.n, dim: law.dim(), points, pruned_mass: law.pruned_mass })
}
