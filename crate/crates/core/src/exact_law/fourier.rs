//! Fourier inversion of the product-form characteristic function over a
//! Chernoff-sized window of coefficient space.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::colors::{ColorPoint, IncrementModel};
use crate::error::{Result, UrnError};
use crate::product_formula::{cf_product, log_mgf_product};

use super::SparseLaw;

/// Mass allowed outside the inversion window.
pub const CF_TAIL_TOL: f64 = 1e-12;
/// Recovered probabilities below this are treated as round-off.
const NOISE_FLOOR: f64 = 1e-14;

fn coeff_log_mgf(model: &IncrementModel, u0: &SparseLaw, axis: usize, s: f64, n: u64) -> f64 {
    let e: f64 = model.atoms().iter().map(|(c, p)| p * (s * c.0[axis] as f64).exp()).sum();
    let m0: f64 = u0.iter().map(|(c, p)| p * (s * c.0[axis] as f64).exp()).sum();
    m0.ln() + log_mgf_product(e, n)
}

/// Per-axis coefficient window `[lo, hi]` outside which `Z_n` has mass
/// below [`CF_TAIL_TOL`], from Chernoff bounds on the exact MGF.
pub fn tail_window(model: &IncrementModel, u0: &SparseLaw, n: u64) -> (Vec<i64>, Vec<i64>) {
    let d = model.dim();
    let (u_lo, u_hi) = u0.bounding_box();
    let log_tau = (CF_TAIL_TOL / (2.0 * d as f64)).ln();
    let s_grid: Vec<f64> = (1..=300).map(|k| k as f64 * 0.02).collect();
    let mut lo = vec![0; d];
    let mut hi = vec![0; d];
    for i in 0..d {
        let step_min = model.atoms().iter().map(|(c, _)| c.0[i]).min().unwrap().min(0);
        let step_max = model.atoms().iter().map(|(c, _)| c.0[i]).max().unwrap().max(0);
        let hard_lo = u_lo[i] + n as i64 * step_min;
        let hard_hi = u_hi[i] + n as i64 * step_max;
        // P(c >= k) <= exp(log M(s) - s k) <= tau once k >= (log M(s) - log tau) / s
        let upper =
            s_grid.iter().map(|&s| (coeff_log_mgf(model, u0, i, s, n) - log_tau) / s).fold(f64::INFINITY, f64::min);
        let lower =
            s_grid.iter().map(|&s| (coeff_log_mgf(model, u0, i, -s, n) - log_tau) / s).fold(f64::INFINITY, f64::min);
        hi[i] = ((upper.ceil() as i64) - 1).min(hard_hi).max(u_hi[i]);
        lo[i] = (-((lower.ceil() as i64) - 1)).max(hard_lo).min(u_lo[i]);
    }
    (lo, hi)
}

/// Law of `Z_n` recovered by inverting its characteristic function on a
/// `grid`-point lattice per axis (`grid = 0` sizes it to the tail window).
pub fn exact_law_cf(model: &IncrementModel, u0: &SparseLaw, n: u64, grid: usize) -> Result<SparseLaw> {
    let d = model.dim();
    if d > 2 {
        return Err(UrnError::InvalidArgument(format!("Fourier inversion supports d <= 2, got {d}")));
    }
    if u0.dim() != d {
        return Err(UrnError::DimensionMismatch { expected: d, got: u0.dim() });
    }
    let (lo, hi) = tail_window(model, u0, n);
    let widths: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
    let sizes: Vec<usize> = widths
        .iter()
        .map(|&w| match grid {
            0 => Ok(w),
            g if g < w => Err(UrnError::WindowTooSmall { needed: w, grid: g }),
            g => Ok(g),
        })
        .collect::<Result<_>>()?;
    let (n1, n2) = (sizes[0], if d == 2 { sizes[1] } else { 1 });

    let cf_at = |t: &[f64]| -> Complex64 {
        let u0_cf = u0.cf_coeffs_at(t);
        u0_cf * cf_product(model.cf_coeffs(t), n).to_complex()
    };
    // samples at t = 2π m / N per axis
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for m1 in 0..n1 {
        for m2 in 0..n2 {
            let mut t = vec![2.0 * PI * m1 as f64 / n1 as f64];
            if d == 2 {
                t.push(2.0 * PI * m2 as f64 / n2 as f64);
            }
            spectrum[m1 * n2 + m2] = cf_at(&t);
        }
    }
    // inverse transform along axis 2, then axis 1; output index k - lo
    let twiddle = |size: usize, m: usize, k: i64| {
        Complex64::from_polar(1.0, -2.0 * PI * ((m as i64 * k).rem_euclid(size as i64)) as f64 / size as f64)
    };
    let mut partial = vec![Complex64::new(0.0, 0.0); n1 * n2];
    if d == 2 {
        for m1 in 0..n1 {
            for k2 in 0..n2 {
                let kk = lo[1] + k2 as i64;
                partial[m1 * n2 + k2] = (0..n2).map(|m2| spectrum[m1 * n2 + m2] * twiddle(n2, m2, kk)).sum();
            }
        }
    } else {
        partial.copy_from_slice(&spectrum);
    }
    let scale = 1.0 / (n1 * n2) as f64;
    let mut entries = BTreeMap::new();
    let mut kept = 0.0;
    for k1 in 0..n1 {
        let kk1 = lo[0] + k1 as i64;
        for k2 in 0..n2 {
            let v: Complex64 = (0..n1).map(|m1| partial[m1 * n2 + k2] * twiddle(n1, m1, kk1)).sum();
            let p = v.re * scale;
            if p > NOISE_FLOOR {
                let mut c = vec![kk1];
                if d == 2 {
                    c.push(lo[1] + k2 as i64);
                }
                kept += p;
                entries.insert(ColorPoint(c), p);
            }
        }
    }
    let pruned = (1.0 - kept).max(0.0);
    Ok(SparseLaw::from_parts(d, entries, pruned, u0.n + n, model.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colors::{build_model, ModelSpec};
    use crate::exact_law::exact_law_dp;

    #[test]
    fn zero_steps_recovers_initial() {
        let m = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let u0 = SparseLaw::from_atoms(1, [(ColorPoint(vec![-2]), 0.3), (ColorPoint(vec![5]), 0.7)]).unwrap();
        let law = exact_law_cf(&m, &u0, 0, 0).unwrap();
        assert_eq!(law.len(), 2);
        assert!((law.get(&ColorPoint(vec![-2])) - 0.3).abs() < 1e-14);
        assert!((law.get(&ColorPoint(vec![5])) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_dp_on_right_shift() {
        let m = build_model(&ModelSpec::RightShift).unwrap();
        let u0 = SparseLaw::delta(ColorPoint(vec![0]));
        let cf = exact_law_cf(&m, &u0, 100, 0).unwrap();
        let dp = exact_law_dp(&m, &u0, 100, 0.0).unwrap();
        assert!((cf.total_mass() - 1.0).abs() < 1e-10);
        for (c, p) in dp.iter() {
            assert!((p - cf.get(c)).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn agrees_with_dp_on_triangular() {
        let m = build_model(&ModelSpec::Triangular).unwrap();
        let u0 = SparseLaw::delta(ColorPoint(vec![0, 0]));
        let cf = exact_law_cf(&m, &u0, 60, 0).unwrap();
        let dp = exact_law_dp(&m, &u0, 60, 0.0).unwrap();
        assert!((cf.total_mass() - 1.0).abs() < 1e-10);
        for (c, p) in dp.iter() {
            assert!((p - cf.get(c)).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let m = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let u0 = SparseLaw::delta(ColorPoint(vec![0]));
        assert!(matches!(exact_law_cf(&m, &u0, 1000, 8), Err(UrnError::WindowTooSmall { .. })));
        assert!(exact_law_cf(
            &build_model(&ModelSpec::Ssrw(3)).unwrap(),
            &SparseLaw::delta(ColorPoint(vec![0, 0, 0])),
            2,
            0
        )
        .is_err());
    }
}
