use nalgebra::DMatrix;
use serde::Serialize;

use super::hnf::hermite_normal_form;
use super::{ColorPoint, IncrementModel};
use crate::error::{Result, UrnError};

/// Largest denominator accepted when reconstructing rational support values.
pub const RATIONAL_DENOMINATOR_BOUND: i64 = 1_000_000;
const RATIONAL_TOL: f64 = 1e-13;

/// Affine lattice `offset + Z-span(rows of basis)` carrying a lattice-valued
/// variable, in embedded coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub dim: usize,
    pub offset: Vec<f64>,
    #[serde(serialize_with = "serialize_rows")]
    pub basis: DMatrix<f64>,
    /// Span `h` in one dimension, `|det|` of the minimal lattice otherwise.
    pub det_abs: f64,
}

fn serialize_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}

impl LatticeSpec {
    /// Real coordinates of `x - offset` in the lattice basis.
    pub fn lattice_coords(&self, x: &[f64]) -> Vec<f64> {
        let inv = self.basis.clone().try_inverse().expect("lattice basis is nonsingular");
        let d = self.dim;
        (0..d).map(|j| (0..d).map(|i| (x[i] - self.offset[i]) * inv[(i, j)]).sum()).collect()
    }

    /// Whether `x` lies on the lattice within `tol` (in lattice coordinates).
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.lattice_coords(x).iter().all(|k| (k - k.round()).abs() <= tol)
    }

    /// Same lattice, shifted to pass through `anchor`.
    pub fn through(&self, anchor: &[f64]) -> LatticeSpec {
        LatticeSpec { offset: anchor.to_vec(), ..self.clone() }
    }
}

/// Best rational approximation `p/q` of `x` with `q <= max_den`, accepted
/// only if within `1e-9` of `x`.
pub fn rational_approx(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a_i = a as i128;
        let h2 = a_i * h1 + h0;
        let k2 = a_i * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= RATIONAL_TOL * x.abs().max(1.0) {
            return Some((h1 as i64, k1 as i64));
        }
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    (k1 > 0 && (x - h1 as f64 / k1 as f64).abs() <= RATIONAL_TOL * x.abs().max(1.0)).then_some((h1 as i64, k1 as i64))
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Span `h` and offset `a` with `P(X ∈ a + hZ) = 1` for a one-dimensional
/// support. With `include_zero`, `0` is adjoined first (the thinned `I·X`).
pub fn detect_span_1d(support: &[f64], include_zero: bool) -> Result<LatticeSpec> {
    let mut values: Vec<f64> = support.to_vec();
    if include_zero {
        values.push(0.0);
    }
    if values.is_empty() {
        return Err(UrnError::InvalidArgument("empty support".into()));
    }
    let mut fracs = Vec::with_capacity(values.len());
    for &v in &values {
        let (p, q) = rational_approx(v, RATIONAL_DENOMINATOR_BOUND)
            .ok_or_else(|| UrnError::NotLatticeValued(format!("{v} has no rational form with denominator <= 1e6")))?;
        fracs.push((p as i128, q as i128));
    }
    let mut lcm: i128 = 1;
    for &(_, q) in &fracs {
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > 1_000_000_000_000 {
            return Err(UrnError::NotLatticeValued("common denominator exceeds 1e12".into()));
        }
    }
    let ints: Vec<i128> = fracs.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let g = ints.iter().fold(0i128, |g, &v| gcd(g, v - ints[0]));
    if g == 0 {
        return Err(UrnError::DegenerateSupport);
    }
    let h = g as f64 / lcm as f64;
    let a = ints[0].rem_euclid(g) as f64 / lcm as f64;
    Ok(LatticeSpec { dim: 1, offset: vec![a], basis: DMatrix::from_element(1, 1, h), det_abs: h })
}

/// Minimal lattice carrying the model's increment (or the thinned increment
/// when `include_zero`), via the HNF of coefficient differences.
///
/// The offset is the lexicographically smallest support point.
pub fn detect_minimal_lattice(model: &IncrementModel, include_zero: bool) -> Result<LatticeSpec> {
    let d = model.dim();
    let mut support: Vec<ColorPoint> = model.atoms().iter().map(|(c, _)| c.clone()).collect();
    if include_zero && !support.iter().any(ColorPoint::is_origin) {
        support.push(ColorPoint::origin(d));
    }
    support.sort();
    let base = support[0].clone();
    let diffs: Vec<Vec<i64>> = support.iter().skip(1).map(|c| c.sub(&base).0).collect();
    let hnf = hermite_normal_form(&diffs, d);
    if hnf.len() < d {
        return Err(UrnError::RankDeficient { rank: hnf.len(), dim: d });
    }
    let coeff_basis = DMatrix::from_fn(d, d, |i, j| hnf[i][j] as f64);
    let basis = coeff_basis * model.embedding().basis();
    let det_abs = basis.determinant().abs();
    Ok(LatticeSpec { dim: d, offset: model.embedding().embed(&base), basis, det_abs })
}

/// One-dimensional span detection or minimal-lattice detection, by dimension.
pub fn detect_lattice(model: &IncrementModel, include_zero: bool) -> Result<LatticeSpec> {
    if model.dim() == 1 {
        let support: Vec<f64> = model.embedded_atoms().iter().map(|x| x[0]).collect();
        detect_span_1d(&support, include_zero)
    } else {
        detect_minimal_lattice(model, include_zero)
    }
}
