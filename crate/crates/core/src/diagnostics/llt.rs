use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{gaussian_density, Standardization};
use crate::colors::{ColorPoint, Embedding, LatticeSpec, MomentSummary};
use crate::error::{Result, UrnError};
use crate::exact_law::SparseLaw;

/// Lattice points with `φ_d(x)` at or below this are not enumerated.
pub const PHI_CUTOFF: f64 = 1e-12;

/// Off-lattice mass tolerated before [`UrnError::LatticeMismatch`].
const OFF_LATTICE_MASS: f64 = 1e-9;
const ON_LATTICE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct LltStatistic {
    pub n: u64,
    pub sup_value: f64,
    /// Standardized coordinates of the maximizing lattice point.
    pub argmax_point: Vec<f64>,
    pub normalizer: f64,
    pub pruned_mass: f64,
}

/// `σ √ln n / h` in one dimension, `det(Σ^{1/2}) (√ln n)^d / l` otherwise,
/// where `h` / `l` is `lattice.det_abs`.
pub fn llt_normalizer(moments: &MomentSummary, lattice: &LatticeSpec, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(UrnError::TimeTooSmall { n, min: 3 });
    }
    let det = moments.sigma_sqrt.determinant().abs();
    if det <= 1e-12 {
        return Err(UrnError::DegenerateSigma);
    }
    let d = moments.dim() as i32;
    Ok(det * (n as f64).ln().sqrt().powi(d) / lattice.det_abs)
}

fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone().try_inverse().ok_or_else(|| UrnError::InvalidArgument("lattice basis is singular".into()))
}

fn row_times(v: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.ncols()).map(|j| v.iter().enumerate().map(|(i, x)| x * m[(i, j)]).sum()).collect()
}

/// `(embedded point, standardized point, φ_d)`.
type BulkPoint = (Vec<f64>, Vec<f64>, f64);

/// Lattice points `anchor + k B` whose standardized image has density above
/// [`PHI_CUTOFF`].
fn lattice_points_in_bulk(
    st: &Standardization,
    moments: &MomentSummary,
    basis: &DMatrix<f64>,
    anchor: &[f64],
) -> Result<Vec<BulkPoint>> {
    let d = anchor.len();
    let binv = inverse(basis)?;
    // |x|² < r2 is exactly φ_d(x) > PHI_CUTOFF
    let r2 = 2.0 * ((2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) / PHI_CUTOFF).ln();
    let log_n = (st.n as f64).ln();
    let sigma_norm = moments.sigma_sqrt.norm(); // Frobenius bound on the operator norm
    let radius = r2.sqrt() * log_n.sqrt() * sigma_norm;
    let centre_k = row_times(&st.center.iter().zip(anchor).map(|(c, a)| c - a).collect::<Vec<_>>(), &binv);
    let half = radius * binv.norm();
    let lo: Vec<i64> = centre_k.iter().map(|c| (c - half).floor() as i64).collect();
    let hi: Vec<i64> = centre_k.iter().map(|c| (c + half).ceil() as i64).collect();
    let cells: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as f64).product();
    if cells > 5e7 {
        return Err(UrnError::TooLarge(format!("{cells} lattice points in the Gaussian bulk")));
    }

    let mut out = Vec::new();
    let mut k = lo.clone();
    loop {
        let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = row_times(&kf, basis).iter().zip(anchor).map(|(s, a)| s + a).collect();
        let x = st.apply(&y);
        let r: f64 = x.iter().map(|v| v * v).sum();
        if r < r2 {
            let phi = gaussian_density(&x);
            out.push((y, x, phi));
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(out);
            }
            k[i] += 1;
            if k[i] <= hi[i] {
                break;
            }
            k[i] = lo[i];
            i += 1;
        }
    }
}

/// `sup_x |N_n P(Z_n = x) - φ_d(standardized x)|` over the lattice carrying
/// the law, including lattice points the law puts no mass on.
///
/// The lattice is re-anchored at the heaviest support point, so `lattice`
/// only has to supply the basis.
pub fn llt_statistic(
    law: &SparseLaw,
    embedding: &Embedding,
    moments: &MomentSummary,
    lattice: &LatticeSpec,
) -> Result<LltStatistic> {
    if law.dim() != lattice.dim || moments.dim() != lattice.dim {
        return Err(UrnError::DimensionMismatch { expected: lattice.dim, got: law.dim() });
    }
    if law.is_empty() {
        return Err(UrnError::InvalidArgument("law is empty".into()));
    }
    let normalizer = llt_normalizer(moments, lattice, law.n)?;
    let st = Standardization::new(moments, law.n, false)?;
    let binv = inverse(&lattice.basis)?;
    let (anchor_color, _) =
        law.iter().fold((None, f64::MIN), |(c, best), (v, p)| if p > best { (Some(v), p) } else { (c, best) });
    let anchor = embedding.embed(anchor_color.expect("law is non-empty"));

    let mut off_mass = 0.0;
    let mut best = (0.0, vec![0.0; law.dim()]);
    for (c, p) in law.iter() {
        let y = embedding.embed(c);
        let rel: Vec<f64> = y.iter().zip(&anchor).map(|(a, b)| a - b).collect();
        if row_times(&rel, &binv).iter().any(|k| (k - k.round()).abs() > ON_LATTICE_TOL) {
            off_mass += p;
            continue;
        }
        let x = st.apply(&y);
        let v = (normalizer * p - gaussian_density(&x)).abs();
        if v > best.0 {
            best = (v, x);
        }
    }
    if off_mass > OFF_LATTICE_MASS {
        return Err(UrnError::LatticeMismatch { off_mass });
    }

    for (y, x, phi) in lattice_points_in_bulk(&st, moments, &lattice.basis, &anchor)? {
        let visited = embedding.locate(&y, ON_LATTICE_TOL).is_some_and(|c| law.get(&c) > 0.0);
        if !visited && phi > best.0 {
            best = (phi, x);
        }
    }

    Ok(LltStatistic { n: law.n, sup_value: best.0, argmax_point: best.1, normalizer, pruned_mass: law.pruned_mass })
}

/// The law with `P(x) ∝ φ_d(standardized x)` on the lattice through `anchor`,
/// truncated at [`PHI_CUTOFF`] and normalized to mass one.
pub fn lattice_gaussian_law(
    embedding: &Embedding,
    moments: &MomentSummary,
    lattice: &LatticeSpec,
    anchor: &ColorPoint,
    n: u64,
) -> Result<SparseLaw> {
    let st = Standardization::new(moments, n, false)?;
    let pts = lattice_points_in_bulk(&st, moments, &lattice.basis, &embedding.embed(anchor))?;
    let total = crate::numeric::compensated_sum(pts.iter().map(|p| p.2));
    let mut entries = BTreeMap::new();
    for (y, _, phi) in pts {
        let c = embedding
            .locate(&y, ON_LATTICE_TOL)
            .ok_or_else(|| UrnError::InvalidArgument("lattice point is not a color".into()))?;
        entries.insert(c, phi / total);
    }
    Ok(SparseLaw::from_parts(lattice.dim, entries, 0.0, n, "lattice-gaussian"))
}
