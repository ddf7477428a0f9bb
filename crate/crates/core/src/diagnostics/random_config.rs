use std::collections::HashMap;

use serde::Serialize;

use super::{default_t_grid, gaussian_cdf_1d, gaussian_density, Standardization};
use crate::colors::{dot, IncrementModel};
use crate::error::{Result, UrnError};
use crate::exact_law::SparseLaw;
use crate::numeric::CompensatedSum;
use crate::urn_process::{run_replications, sample_path_with};

/// Bounded Lipschitz test function on standardized coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Cos {
        t: Vec<f64>,
    },
    Sin {
        t: Vec<f64>,
    },
    /// Product of trapezoids: 1 on `[lo, hi]`, falling linearly to 0 over `ramp`.
    SmoothBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
        ramp: f64,
    },
}

fn trapezoid(x: f64, lo: f64, hi: f64, w: f64) -> f64 {
    if x < lo {
        (1.0 - (lo - x) / w).max(0.0)
    } else if x > hi {
        (1.0 - (x - hi) / w).max(0.0)
    } else {
        1.0
    }
}

// ∫_l^u (x - c) φ(x) dx
fn first_moment_piece(l: f64, u: f64, c: f64) -> f64 {
    let phi = |x: f64| gaussian_density(&[x]);
    phi(l) - phi(u) - c * (gaussian_cdf_1d(u) - gaussian_cdf_1d(l))
}

fn trapezoid_expectation(lo: f64, hi: f64, w: f64) -> f64 {
    let left = first_moment_piece(lo - w, lo, lo - w) / w;
    let right = -first_moment_piece(hi, hi + w, hi + w) / w;
    left + (gaussian_cdf_1d(hi) - gaussian_cdf_1d(lo)) + right
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Cos { t } => dot(t, x).cos(),
            TestFunction::Sin { t } => dot(t, x).sin(),
            TestFunction::SmoothBox { lo, hi, ramp } => {
                x.iter().zip(lo.iter().zip(hi)).map(|(&v, (&a, &b))| trapezoid(v, a, b, *ramp)).product()
            }
        }
    }

    /// `E f(Y)` for `Y ~ N_d(0, I_d)`.
    pub fn gaussian_expectation(&self) -> f64 {
        match self {
            TestFunction::Cos { t } => (-0.5 * dot(t, t)).exp(),
            TestFunction::Sin { .. } => 0.0,
            TestFunction::SmoothBox { lo, hi, ramp } => {
                lo.iter().zip(hi).map(|(&a, &b)| trapezoid_expectation(a, b, *ramp)).product()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFamily(pub Vec<TestFunction>);

impl TestFamily {
    /// Real and imaginary parts of `e^{i<t,·>}` on the 9-per-axis grid over
    /// `[-3, 3]^d`, plus unit boxes centred on `{-1, 0, 1}^d` with ramp 1/2.
    pub fn default_for(dim: usize) -> Self {
        let mut fns = Vec::new();
        for t in default_t_grid(dim, 9) {
            fns.push(TestFunction::Cos { t: t.clone() });
            fns.push(TestFunction::Sin { t });
        }
        for centre in default_t_grid(dim, 3).into_iter().map(|g| g.iter().map(|v| v / 3.0).collect::<Vec<f64>>()) {
            fns.push(TestFunction::SmoothBox {
                lo: centre.iter().map(|c| c - 0.5).collect(),
                hi: centre.iter().map(|c| c + 0.5).collect(),
                ramp: 0.5,
            });
        }
        TestFamily(fns)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct RandomConfigOptions {
    pub n_list: Vec<u64>,
    pub reps: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub use_gamma: bool,
    pub family: Option<TestFamily>,
}

impl RandomConfigOptions {
    pub fn new(n_list: Vec<u64>, reps: usize, eps: Vec<f64>, seed: u64) -> Self {
        RandomConfigOptions { n_list, reps, eps, seed, use_gamma: false, family: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomConfigRow {
    pub n: u64,
    pub eps: f64,
    pub exceedance: f64,
    pub mean_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomConfigReport {
    pub model: String,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<RandomConfigRow>,
    /// `distances[k][r]`: distance of replication `r` at `n_list[k]`.
    #[serde(skip)]
    pub distances: Vec<Vec<f64>>,
}

impl RandomConfigReport {
    pub fn exceedance(&self, n: u64, eps: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && r.eps == eps).map(|r| r.exceedance)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,eps,exceedance,mean_distance\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                crate::numeric::fmt_f64(r.eps),
                crate::numeric::fmt_f64(r.exceedance),
                crate::numeric::fmt_f64(r.mean_distance)
            ));
        }
        s
    }
}

/// `max_f |Λ_n(f) - E f(Y)|` where `Λ_n` is the standardized configuration
/// measure `U_n / (n + 1)`, written as `U_0(f) + Σ_v count(v) Σ_u p(u) f(v + u)`
/// over the draw counts of `V_0, …, V_{n-1}`.
fn configuration_distance(
    model: &IncrementModel,
    u0: &SparseLaw,
    counts: &HashMap<Vec<i64>, u64>,
    st: &Standardization,
    family: &TestFamily,
    targets: &[f64],
) -> f64 {
    let emb = model.embedding();
    let steps = model.embedded_atoms();
    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); family.len()];
    for (c, w) in u0.iter() {
        let x = st.apply(&emb.embed(c));
        for (a, f) in acc.iter_mut().zip(&family.0) {
            a.add(w * f.eval(&x));
        }
    }
    let mut keys: Vec<&Vec<i64>> = counts.keys().collect();
    keys.sort();
    for v in keys {
        let k = counts[v] as f64;
        let base = emb.embed(&crate::colors::ColorPoint(v.clone()));
        for (step, (_, p)) in steps.iter().zip(model.atoms()) {
            let y: Vec<f64> = base.iter().zip(step).map(|(a, b)| a + b).collect();
            let x = st.apply(&y);
            for (a, f) in acc.iter_mut().zip(&family.0) {
                a.add(k * p * f.eval(&x));
            }
        }
    }
    let scale = 1.0 / (st.n as f64 + 1.0);
    acc.iter().zip(targets).map(|(a, t)| (a.value() * scale - t).abs()).fold(0.0, f64::max)
}

/// Simulates `reps` independent paths and reports, for every `n` and `eps`,
/// the fraction of paths whose configuration is farther than `eps` from
/// `N_d(0, I_d)` over the test family.
pub fn random_config_convergence(
    model: &IncrementModel,
    u0: &SparseLaw,
    opts: &RandomConfigOptions,
) -> Result<RandomConfigReport> {
    if opts.reps < 100 {
        return Err(UrnError::InvalidArgument(format!("reps must be at least 100, got {}", opts.reps)));
    }
    if opts.n_list.is_empty() || opts.eps.is_empty() {
        return Err(UrnError::InvalidArgument("n_list and eps must be non-empty".into()));
    }
    if u0.dim() != model.dim() {
        return Err(UrnError::DimensionMismatch { expected: model.dim(), got: u0.dim() });
    }
    let moments = model.moments()?;
    let mut n_list = opts.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let standardizations =
        n_list.iter().map(|&n| Standardization::new(&moments, n, opts.use_gamma)).collect::<Result<Vec<_>>>()?;
    let family = opts.family.clone().unwrap_or_else(|| TestFamily::default_for(model.dim()));
    if family.0.iter().any(|f| match f {
        TestFunction::Cos { t } | TestFunction::Sin { t } => t.len() != model.dim(),
        TestFunction::SmoothBox { lo, hi, .. } => lo.len() != model.dim() || hi.len() != model.dim(),
    }) {
        return Err(UrnError::InvalidArgument("test function dimension does not match the model".into()));
    }
    let targets: Vec<f64> = family.0.iter().map(TestFunction::gaussian_expectation).collect();
    let n_max = *n_list.last().expect("non-empty");

    let per_rep: Vec<Result<Vec<f64>>> = run_replications(opts.reps, opts.seed, |rng, _| {
        let path = sample_path_with(model, u0, n_max, rng)?;
        let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
        let mut out = Vec::with_capacity(n_list.len());
        let mut m = 0usize;
        for (n, st) in n_list.iter().zip(&standardizations) {
            while (m as u64) < *n {
                let v = path.draw(m);
                match counts.get_mut(v) {
                    Some(k) => *k += 1,
                    None => {
                        counts.insert(v.to_vec(), 1);
                    }
                }
                m += 1;
            }
            out.push(configuration_distance(model, u0, &counts, st, &family, &targets));
        }
        Ok(out)
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;

    let distances: Vec<Vec<f64>> = (0..n_list.len()).map(|k| per_rep.iter().map(|r| r[k]).collect()).collect();
    let mut rows = Vec::new();
    for (k, &n) in n_list.iter().enumerate() {
        let ds = &distances[k];
        let mean = crate::numeric::compensated_sum(ds.iter().copied()) / ds.len() as f64;
        for &eps in &opts.eps {
            let hits = ds.iter().filter(|&&d| d > eps).count();
            rows.push(RandomConfigRow { n, eps, exceedance: hits as f64 / ds.len() as f64, mean_distance: mean });
        }
    }
    Ok(RandomConfigReport { model: model.name().to_string(), reps: opts.reps, seed: opts.seed, rows, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colors::{build_model, ColorPoint, ModelSpec};

    #[test]
    fn trapezoid_expectation_matches_quadrature() {
        for (lo, hi, w) in [(-0.5, 0.5, 0.5), (0.5, 1.5, 0.5), (-3.0, -1.0, 0.25), (-1.0, 2.0, 1.0)] {
            let h = 1e-4;
            let quad: f64 = (-100_000..100_000)
                .map(|i| (i as f64 + 0.5) * h)
                .map(|x| trapezoid(x, lo, hi, w) * gaussian_density(&[x]) * h)
                .sum();
            assert!((trapezoid_expectation(lo, hi, w) - quad).abs() < 1e-9);
        }
    }

    #[test]
    fn default_family_is_bounded_and_sized() {
        let f = TestFamily::default_for(2);
        assert_eq!(f.len(), 2 * 81 + 9);
        for g in &f.0 {
            for x in [[0.0, 0.0], [1.3, -2.2], [10.0, 0.1]] {
                assert!(g.eval(&x).abs() <= 1.0);
            }
        }
    }

    fn ssrw1() -> (IncrementModel, SparseLaw) {
        (build_model(&ModelSpec::Ssrw(1)).unwrap(), SparseLaw::delta(ColorPoint(vec![0])))
    }

    #[test]
    fn eps_two_never_exceeded() {
        let (m, u0) = ssrw1();
        let r =
            random_config_convergence(&m, &u0, &RandomConfigOptions::new(vec![10, 200], 100, vec![2.0], 5)).unwrap();
        assert!(r.rows.iter().all(|row| row.exceedance == 0.0));
        assert!(r.distances.iter().flatten().all(|&d| d <= 2.0));
    }

    #[test]
    fn reproducible_and_validated() {
        let (m, u0) = ssrw1();
        let opts = RandomConfigOptions::new(vec![50], 100, vec![0.3], 11);
        let a = random_config_convergence(&m, &u0, &opts).unwrap();
        let b = random_config_convergence(&m, &u0, &opts).unwrap();
        assert_eq!(a.distances, b.distances);
        let few = RandomConfigOptions::new(vec![50], 10, vec![0.3], 11);
        assert!(random_config_convergence(&m, &u0, &few).is_err());
        let early = RandomConfigOptions::new(vec![2], 100, vec![0.3], 11);
        assert!(matches!(random_config_convergence(&m, &u0, &early), Err(UrnError::TimeTooSmall { .. })));
    }
}
