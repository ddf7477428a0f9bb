use num_complex::Complex64;
use serde::Serialize;

use super::{gaussian_cdf_1d, StandardizedLaw};
use crate::error::{Result, UrnError};

#[derive(Clone, Debug, Serialize)]
pub struct KsDistance {
    pub n: u64,
    pub statistic: f64,
    /// `statistic + pruned_mass`: bound on the distance of the unpruned law.
    pub upper_bound: f64,
    pub argmax: f64,
    pub pruned_mass: f64,
}

/// `sup_x |F(x) - Φ(x)|` for a one-dimensional standardized law, checking
/// both one-sided limits at every atom.
pub fn ks_distance_1d(law: &StandardizedLaw) -> Result<KsDistance> {
    if law.dim != 1 {
        return Err(UrnError::DimensionMismatch { expected: 1, got: law.dim });
    }
    let mut atoms: Vec<(f64, f64)> = law.points.iter().map(|(x, p)| (x[0], *p)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    let mut best = (law.pruned_mass, f64::INFINITY);
    for (x, p) in atoms {
        let phi = gaussian_cdf_1d(x);
        let before = (cum - phi).abs();
        cum += p;
        let after = (cum - phi).abs();
        let here = before.max(after);
        if here > best.0 {
            best = (here, x);
        }
    }
    Ok(KsDistance {
        n: law.n,
        statistic: best.0,
        upper_bound: best.0 + law.pruned_mass,
        argmax: best.1,
        pruned_mass: law.pruned_mass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CfDistance {
    pub n: u64,
    pub statistic: f64,
    pub argmax: Vec<f64>,
    pub pruned_mass: f64,
}

/// `points_per_axis^d` grid on `[-3, 3]^d`; the default is 9 per axis.
pub fn default_t_grid(dim: usize, points_per_axis: usize) -> Vec<Vec<f64>> {
    let k = points_per_axis.max(2);
    let axis: Vec<f64> = (0..k).map(|i| -3.0 + 6.0 * i as f64 / (k - 1) as f64).collect();
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}

/// `max_t |Σ p e^{i<t,x>} - e^{-|t|²/2}|` over `t_grid`.
pub fn cf_distance(law: &StandardizedLaw, t_grid: &[Vec<f64>]) -> Result<CfDistance> {
    let mut best = (0.0, vec![0.0; law.dim]);
    for t in t_grid {
        if t.len() != law.dim {
            return Err(UrnError::DimensionMismatch { expected: law.dim, got: t.len() });
        }
        let emp: Complex64 =
            law.points.iter().map(|(x, p)| Complex64::from_polar(*p, x.iter().zip(t).map(|(a, b)| a * b).sum())).sum();
        let r2: f64 = t.iter().map(|v| v * v).sum();
        let dist = (emp - (-0.5 * r2).exp()).norm();
        if dist > best.0 {
            best = (dist, t.clone());
        }
    }
    Ok(CfDistance { n: law.n, statistic: best.0, argmax: best.1, pruned_mass: law.pruned_mass })
}
