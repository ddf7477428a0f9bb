//! Color index sets, increment distributions and their transforms.
//!
//! Colors are integer coefficient vectors in a generating basis. The
//! [`Embedding`] maps them into `R^d`, so that lattices with irrational
//! coordinates (the triangular lattice) stay exact at the combinatorial
//! level while statistics are computed on embedded points.

mod hnf;
mod lattice;
mod model_file;

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};

pub use hnf::{hermite_normal_form, integer_rank};
pub use lattice::{detect_lattice, detect_minimal_lattice, detect_span_1d, rational_approx, LatticeSpec};
pub use model_file::{parse_probability, AtomEntry, ModelFile, ProbValue};

/// Tolerance on the total probability of an increment distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Eigenvalue floor below which the second-moment matrix is rejected.
pub const SIGMA_EIG_FLOOR: f64 = 1e-10;

/// A color: integer coefficients in the generating basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorPoint(pub Vec<i64>);

impl ColorPoint {
    pub fn new(coeffs: Vec<i64>) -> Self {
        ColorPoint(coeffs)
    }

    pub fn origin(dim: usize) -> Self {
        ColorPoint(vec![0; dim])
    }

    /// Unit coefficient vector along axis `i`, scaled by `sign`.
    pub fn unit(dim: usize, i: usize, sign: i64) -> Self {
        let mut c = vec![0; dim];
        c[i] = sign;
        ColorPoint(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &ColorPoint) -> ColorPoint {
        debug_assert_eq!(self.dim(), other.dim());
        ColorPoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ColorPoint) -> ColorPoint {
        debug_assert_eq!(self.dim(), other.dim());
        ColorPoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for ColorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for ColorPoint {
    fn from(v: Vec<i64>) -> Self {
        ColorPoint(v)
    }
}

/// Linear map from coefficient space to `R^d`; row `i` of `basis` is the
/// generator `b_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Embedding {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() || basis.nrows() == 0 {
            return Err(UrnError::InvalidSpec(format!(
                "embedding must be square and non-empty, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(UrnError::InvalidSpec("embedding has non-finite entries".into()));
        }
        let det = basis.determinant();
        if det.abs() <= 1e-12 {
            return Err(UrnError::InvalidSpec(format!("embedding is singular (det = {det:e})")));
        }
        let inverse =
            basis.clone().try_inverse().ok_or_else(|| UrnError::InvalidSpec("embedding is not invertible".into()))?;
        Ok(Embedding { basis, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Embedding { basis: DMatrix::identity(dim, dim), inverse: DMatrix::identity(dim, dim) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(UrnError::InvalidSpec("embedding rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.basis.row(i).iter().copied().collect()).collect()
    }

    pub fn det(&self) -> f64 {
        self.basis.determinant()
    }

    /// `c · basis` as a point of `R^d`.
    pub fn embed(&self, c: &ColorPoint) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (i, &ci) in c.0.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            let ci = ci as f64;
            for (j, o) in out.iter_mut().enumerate() {
                *o += ci * self.basis[(i, j)];
            }
        }
        out
    }

    /// Real coefficients of `x` in the generating basis (`x · basis^{-1}`).
    pub fn coefficients_of(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|j| (0..d).map(|i| x[i] * self.inverse[(i, j)]).sum()).collect()
    }

    /// Nearest color to `x`, if `x` is within `tol` of an integer combination.
    pub fn locate(&self, x: &[f64], tol: f64) -> Option<ColorPoint> {
        let c = self.coefficients_of(x);
        let rounded: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        let ok = c.iter().zip(&rounded).all(|(v, r)| (v - *r as f64).abs() <= tol);
        ok.then_some(ColorPoint(rounded))
    }
}

/// A finite-support increment distribution `p(v) = P(X_1 = v)`.
#[derive(Clone, Debug)]
pub struct IncrementModel {
    name: String,
    dim: usize,
    atoms: Vec<(ColorPoint, f64)>,
    embedded: Vec<Vec<f64>>,
    embedding: Embedding,
}

impl IncrementModel {
    pub fn new(name: impl Into<String>, atoms: Vec<(ColorPoint, f64)>, embedding: Embedding) -> Result<Self> {
        let dim = embedding.dim();
        if atoms.is_empty() {
            return Err(UrnError::InvalidSpec("increment support must be non-empty".into()));
        }
        let mut total = 0.0;
        for (c, p) in &atoms {
            if c.dim() != dim {
                return Err(UrnError::DimensionMismatch { expected: dim, got: c.dim() });
            }
            if !(p.is_finite() && *p > 0.0 && *p <= 1.0) {
                return Err(UrnError::InvalidSpec(format!("probability {p} at {c:?} is not in (0, 1]")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(UrnError::InvalidSpec(format!("probabilities sum to {total}, not 1")));
        }
        let mut sorted: Vec<&ColorPoint> = atoms.iter().map(|(c, _)| c).collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(UrnError::InvalidSpec("atoms must be distinct".into()));
        }
        let embedded = atoms.iter().map(|(c, _)| embedding.embed(c)).collect();
        Ok(IncrementModel { name: name.into(), dim, atoms, embedded, embedding })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(ColorPoint, f64)] {
        &self.atoms
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    /// Embedded support points, in atom order.
    pub fn embedded_atoms(&self) -> &[Vec<f64>] {
        &self.embedded
    }

    /// Largest `|coefficient|` over the support, per axis.
    pub fn max_step(&self) -> Vec<i64> {
        (0..self.dim).map(|i| self.atoms.iter().map(|(c, _)| c.0[i].abs()).max().unwrap_or(0)).collect()
    }

    /// Largest Euclidean norm of an embedded support point.
    pub fn max_embedded_norm(&self) -> f64 {
        self.embedded.iter().map(|x| norm(x)).fold(0.0, f64::max)
    }

    /// `e(λ) = Σ_v p(v) exp(<λ, embed(v)>)`.
    pub fn mgf(&self, lambda: &[f64]) -> f64 {
        self.atoms.iter().zip(&self.embedded).map(|((_, p), x)| p * dot(lambda, x).exp()).sum()
    }

    /// `E[exp(i<t, embed(X)>)]`.
    pub fn cf(&self, t: &[f64]) -> Complex64 {
        self.atoms.iter().zip(&self.embedded).map(|((_, p), x)| Complex64::from_polar(*p, dot(t, x))).sum()
    }

    /// Characteristic function of the coefficient vector itself, periodic
    /// in each `t_i` with period `2π`.
    pub fn cf_coeffs(&self, t: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|(c, p)| {
                let phase: f64 = c.0.iter().zip(t).map(|(&ci, ti)| ci as f64 * ti).sum();
                Complex64::from_polar(*p, phase)
            })
            .sum()
    }

    pub fn moments(&self) -> Result<MomentSummary> {
        moments(self)
    }
}

/// `μ = E[X_1]`, `Σ = E[X_1^T X_1]` and the symmetric square root of `Σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSummary {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub sigma_sqrt: DMatrix<f64>,
}

impl MomentSummary {
    pub fn from_sigma(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(sigma.clone());
        let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eigenvalue <= SIGMA_EIG_FLOOR {
            return Err(UrnError::SigmaNotPositiveDefinite { min_eigenvalue });
        }
        let sqrt_vals = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let q = &eig.eigenvectors;
        let sigma_sqrt = q * sqrt_vals * q.transpose();
        Ok(MomentSummary { mu, sigma, sigma_sqrt })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `Σ^{-1/2}`; `None` if the square root is singular.
    pub fn sigma_inv_sqrt(&self) -> Option<DMatrix<f64>> {
        self.sigma_sqrt.clone().try_inverse()
    }

    /// Scalar `σ = sqrt(Σ_11)` for one-dimensional models.
    pub fn sigma_1d(&self) -> f64 {
        self.sigma[(0, 0)].sqrt()
    }
}

pub fn moments(model: &IncrementModel) -> Result<MomentSummary> {
    let d = model.dim();
    let mut mu = DVector::zeros(d);
    let mut sigma = DMatrix::zeros(d, d);
    for ((_, p), x) in model.atoms().iter().zip(model.embedded_atoms()) {
        for i in 0..d {
            mu[i] += p * x[i];
            for j in 0..d {
                sigma[(i, j)] += p * x[i] * x[j];
            }
        }
    }
    // symmetrize away rounding in the off-diagonal sums
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    MomentSummary::from_sigma(mu, sigma)
}

pub fn mgf(model: &IncrementModel, lambda: &[f64]) -> f64 {
    model.mgf(lambda)
}

pub fn cf(model: &IncrementModel, t: &[f64]) -> Complex64 {
    model.cf(t)
}

/// Named increment distributions.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    /// `P(X = +1) = 1` on `Z`.
    RightShift,
    /// Simple symmetric walk on `Z^d`.
    Ssrw(usize),
    /// Uniform on the six unit vectors of the triangular lattice.
    Triangular,
    Custom {
        name: String,
        atoms: Vec<(ColorPoint, f64)>,
        embedding: Embedding,
    },
}

impl ModelSpec {
    /// Parses a CLI model reference: `right-shift`, `ssrw<d>`, `triangular`
    /// or `file:<path>`.
    pub fn parse(reference: &str) -> Result<ModelSpec> {
        let r = reference.trim();
        if let Some(path) = r.strip_prefix("file:") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UrnError::InvalidSpec(format!("cannot read model file {path}: {e}")))?;
            let file = ModelFile::from_json(&text)?;
            return file.into_spec(path);
        }
        match r {
            "right-shift" | "right_shift" | "rightshift" => Ok(ModelSpec::RightShift),
            "triangular" => Ok(ModelSpec::Triangular),
            _ => {
                let d = r
                    .strip_prefix("ssrw")
                    .and_then(|s| s.trim_start_matches(['-', '_']).parse::<usize>().ok())
                    .ok_or_else(|| UrnError::InvalidSpec(format!("unknown model '{r}'")))?;
                if d == 0 {
                    return Err(UrnError::InvalidSpec("ssrw dimension must be >= 1".into()));
                }
                Ok(ModelSpec::Ssrw(d))
            }
        }
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<IncrementModel> {
    match spec {
        ModelSpec::RightShift => {
            IncrementModel::new("right-shift", vec![(ColorPoint(vec![1]), 1.0)], Embedding::identity(1))
        }
        ModelSpec::Ssrw(d) => {
            let d = *d;
            if d == 0 {
                return Err(UrnError::InvalidSpec("ssrw dimension must be >= 1".into()));
            }
            let p = 1.0 / (2 * d) as f64;
            let atoms =
                (0..d).flat_map(|i| [ColorPoint::unit(d, i, 1), ColorPoint::unit(d, i, -1)]).map(|c| (c, p)).collect();
            IncrementModel::new(format!("ssrw{d}"), atoms, Embedding::identity(d))
        }
        ModelSpec::Triangular => {
            // generators at 0 and 60 degrees; the six unit vectors are
            // ±b1, ±b2 and ±(b2 - b1)
            let embedding = Embedding::from_rows(&[vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]])?;
            let coeffs = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];
            let atoms = coeffs.iter().map(|c| (ColorPoint(c.to_vec()), 1.0 / 6.0)).collect();
            IncrementModel::new("triangular", atoms, embedding)
        }
        ModelSpec::Custom { name, atoms, embedding } => {
            IncrementModel::new(name.clone(), atoms.clone(), embedding.clone())
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Angle of the `k`-th sixth root of unity.
pub fn triangular_angle(k: usize) -> f64 {
    k as f64 * PI / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ssrw_moments_are_identity_over_d() {
        for d in 1..=3 {
            let m = build_model(&ModelSpec::Ssrw(d)).unwrap();
            assert_eq!(m.atoms().len(), 2 * d);
            let s = m.moments().unwrap();
            for i in 0..d {
                assert_eq!(s.mu[i], 0.0);
                for j in 0..d {
                    let want = if i == j { 1.0 / d as f64 } else { 0.0 };
                    assert_eq!(s.sigma[(i, j)], want);
                }
            }
        }
    }

    #[test]
    fn right_shift_moments() {
        let m = build_model(&ModelSpec::RightShift).unwrap();
        let s = m.moments().unwrap();
        assert_eq!(s.mu[0], 1.0);
        assert_eq!(s.sigma[(0, 0)], 1.0);
        assert_eq!(s.sigma_sqrt[(0, 0)], 1.0);
    }

    #[test]
    fn triangular_atoms_are_unit_vectors_at_sixty_degrees() {
        let m = build_model(&ModelSpec::Triangular).unwrap();
        let mut angles: Vec<f64> = m
            .embedded_atoms()
            .iter()
            .map(|x| {
                assert!(close(norm(x), 1.0, 1e-12));
                x[1].atan2(x[0]).rem_euclid(2.0 * PI)
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        for (k, a) in angles.iter().enumerate() {
            assert!(close(*a, triangular_angle(k), 1e-12), "{a} vs {}", triangular_angle(k));
        }
        let s = m.moments().unwrap();
        assert!(close(s.mu[0], 0.0, 1e-15) && close(s.mu[1], 0.0, 1e-15));
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!(close(s.sigma[(i, j)], want, 1e-12));
            }
        }
    }

    #[test]
    fn sigma_sqrt_squares_back() {
        let emb = Embedding::from_rows(&[vec![1.0, 0.3], vec![-0.2, 0.9]]).unwrap();
        let atoms = vec![(ColorPoint(vec![1, 0]), 0.2), (ColorPoint(vec![0, 1]), 0.3), (ColorPoint(vec![-1, -2]), 0.5)];
        let m = IncrementModel::new("skew", atoms, emb).unwrap();
        let s = m.moments().unwrap();
        let back = &s.sigma_sqrt * &s.sigma_sqrt;
        for (a, b) in back.iter().zip(s.sigma.iter()) {
            assert!(close(*a, *b, 1e-10));
        }
        assert!((s.sigma.clone() - s.sigma.transpose()).abs().max() <= 1e-12);
    }

    #[test]
    fn singular_sigma_is_rejected() {
        let atoms = vec![(ColorPoint(vec![1, 0]), 0.5), (ColorPoint(vec![-1, 0]), 0.5)];
        let m = IncrementModel::new("flat", atoms, Embedding::identity(2)).unwrap();
        assert!(matches!(m.moments(), Err(UrnError::SigmaNotPositiveDefinite { .. })));
    }

    #[test]
    fn mgf_examples() {
        let rs = build_model(&ModelSpec::RightShift).unwrap();
        let s1 = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let s2 = build_model(&ModelSpec::Ssrw(2)).unwrap();
        assert_eq!(s2.mgf(&[0.0, 0.0]), 1.0);
        assert!(close(rs.mgf(&[1.0]), std::f64::consts::E, 1e-15));
        assert!(close(s1.mgf(&[1.0]), 1f64.cosh(), 1e-15));
    }

    #[test]
    fn cf_examples() {
        let rs = build_model(&ModelSpec::RightShift).unwrap();
        let s1 = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let c = s1.cf(&[PI]);
        assert!(close(c.re, -1.0, 1e-15) && close(c.im, 0.0, 1e-15));
        let c = rs.cf(&[PI / 2.0]);
        assert!(close(c.re, 0.0, 1e-15) && close(c.im, 1.0, 1e-15));
        let tri = build_model(&ModelSpec::Triangular).unwrap();
        let c = tri.cf(&[0.0, 0.0]);
        assert!(close(c.re, 1.0, 1e-15) && c.im.abs() < 1e-15);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let e = Embedding::identity(1);
        assert!(IncrementModel::new("x", vec![], e.clone()).is_err());
        let dup = vec![(ColorPoint(vec![1]), 0.5), (ColorPoint(vec![1]), 0.5)];
        assert!(IncrementModel::new("x", dup, e.clone()).is_err());
        let short = vec![(ColorPoint(vec![1]), 0.5), (ColorPoint(vec![2]), 0.4)];
        assert!(IncrementModel::new("x", short, e.clone()).is_err());
        let wrong_dim = vec![(ColorPoint(vec![1, 0]), 1.0)];
        assert!(matches!(IncrementModel::new("x", wrong_dim, e), Err(UrnError::DimensionMismatch { .. })));
        assert!(Embedding::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }

    #[test]
    fn parse_model_names() {
        assert!(matches!(ModelSpec::parse("ssrw2").unwrap(), ModelSpec::Ssrw(2)));
        assert!(matches!(ModelSpec::parse("right-shift").unwrap(), ModelSpec::RightShift));
        assert!(matches!(ModelSpec::parse("triangular").unwrap(), ModelSpec::Triangular));
        assert!(ModelSpec::parse("ssrw0").is_err());
        assert!(ModelSpec::parse("brownian").is_err());
    }

    #[test]
    fn embedding_reproduces_generators() {
        let emb = Embedding::from_rows(&[vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).unwrap();
        assert_eq!(emb.embed(&ColorPoint::unit(2, 1, 1)), vec![0.5, 3f64.sqrt() / 2.0]);
        let x = emb.embed(&ColorPoint(vec![3, -2]));
        assert_eq!(emb.locate(&x, 1e-9), Some(ColorPoint(vec![3, -2])));
        assert_eq!(emb.locate(&[0.25, 0.0], 1e-9), None);
    }
}
