//! Simulation of the random urn configuration.
//!
//! `U_{n+1} = U_n + χ_{n+1} R`: draw a color with probability proportional
//! to its mass, then add the replacement row of that color (the increment
//! law shifted to it). Since every row has unit mass,
//! `U_m = U_0 + Σ_{j<m} R_{V_j}`, so the draw at time `m` can be generated
//! by picking `K` uniform on `{0, …, m}`: `K = 0` draws from `U_0`,
//! otherwise the color is `V_{K-1} + X` with a fresh increment `X`.

mod martingale;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::colors::{dot, ColorPoint, Embedding, IncrementModel};
use crate::error::{Result, UrnError};
use crate::exact_law::SparseLaw;
use crate::numeric::CompensatedSum;
use crate::rng::{seeded_rng, stream_rng, StreamRng};

pub use martingale::{
    l2_bound_scan, l2_point, martingale_trace, second_moment_exact, second_moment_exact_log, variance_vanishes,
    L2BoundReport, L2Point, MartingaleTrace, GROWTH_RATIO_LIMIT,
};

/// Largest horizon accepted by the naive sampler.
pub const NAIVE_MAX_N: u64 = 100_000;

/// Drawn colors `V_0, …, V_{n-1}` (`V_m` is the color of draw `m + 1`,
/// distributed as `Z_m`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrnPath {
    dim: usize,
    draws: Vec<i64>,
    pub rng_seed: u64,
}

impl UrnPath {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.draws.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Coefficients of `V_m`.
    pub fn draw(&self, m: usize) -> &[i64] {
        &self.draws[m * self.dim..(m + 1) * self.dim]
    }

    pub fn color(&self, m: usize) -> ColorPoint {
        ColorPoint(self.draw(m).to_vec())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.draws.chunks_exact(self.dim)
    }

    /// CSV `step,c1..cd`, one row per draw.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for i in 1..=self.dim {
            let _ = write!(out, ",c{i}");
        }
        out.push('\n');
        for (m, v) in self.iter().enumerate() {
            let _ = write!(out, "{m}");
            for c in v {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Weighted sampler over a list of colors.
struct ColorSampler {
    colors: Vec<ColorPoint>,
    index: WeightedIndex<f64>,
}

impl ColorSampler {
    fn new(atoms: impl Iterator<Item = (ColorPoint, f64)>) -> Result<Self> {
        let (colors, weights): (Vec<_>, Vec<_>) = atoms.unzip();
        let index = WeightedIndex::new(weights).map_err(|e| UrnError::InvalidSpec(format!("sampler weights: {e}")))?;
        Ok(ColorSampler { colors, index })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &ColorPoint {
        &self.colors[self.index.sample(rng)]
    }
}

fn check_inputs(model: &IncrementModel, u0: &SparseLaw) -> Result<()> {
    if u0.dim() != model.dim() {
        return Err(UrnError::DimensionMismatch { expected: model.dim(), got: u0.dim() });
    }
    if u0.is_empty() {
        return Err(UrnError::InvalidArgument("initial configuration is empty".into()));
    }
    Ok(())
}

/// Path of `n` draws via the uniform-ancestor rule; O(1) per draw.
pub fn sample_path(model: &IncrementModel, u0: &SparseLaw, n: u64, seed: u64) -> Result<UrnPath> {
    let mut rng = seeded_rng(seed);
    let mut path = sample_path_with(model, u0, n, &mut rng)?;
    path.rng_seed = seed;
    Ok(path)
}

/// [`sample_path`] drawing from a caller-supplied generator.
pub fn sample_path_with<R: Rng + ?Sized>(
    model: &IncrementModel,
    u0: &SparseLaw,
    n: u64,
    rng: &mut R,
) -> Result<UrnPath> {
    check_inputs(model, u0)?;
    let d = model.dim();
    let init = ColorSampler::new(u0.iter().map(|(c, p)| (c.clone(), p)))?;
    let step = ColorSampler::new(model.atoms().iter().cloned())?;
    let mut draws: Vec<i64> = Vec::with_capacity(n as usize * d);
    for m in 0..n as usize {
        let k = rng.random_range(0..=m);
        if k == 0 {
            draws.extend_from_slice(&init.sample(rng).0);
        } else {
            let x = step.sample(rng);
            let base = (k - 1) * d;
            for i in 0..d {
                draws.push(draws[base + i] + x.0[i]);
            }
        }
    }
    Ok(UrnPath { dim: d, draws, rng_seed: 0 })
}

/// Path of `n` draws by maintaining `U_n` explicitly and sampling colors
/// in proportion to their mass; O(support) per draw.
pub fn sample_path_naive(model: &IncrementModel, u0: &SparseLaw, n: u64, seed: u64) -> Result<UrnPath> {
    let mut rng = seeded_rng(seed);
    let (path, _) = sample_path_naive_with(model, u0, n, &mut rng, |_| {})?;
    Ok(UrnPath { rng_seed: seed, ..path })
}

/// Naive sampler; `inspect` sees the configuration before every draw.
pub fn sample_path_naive_with<R: Rng + ?Sized>(
    model: &IncrementModel,
    u0: &SparseLaw,
    n: u64,
    rng: &mut R,
    mut inspect: impl FnMut(&UrnState),
) -> Result<(UrnPath, UrnState)> {
    check_inputs(model, u0)?;
    if n > NAIVE_MAX_N {
        return Err(UrnError::TooLarge(format!("naive sampler supports n <= {NAIVE_MAX_N}, got {n}")));
    }
    let d = model.dim();
    let mut state = UrnState::initial(u0);
    let mut draws = Vec::with_capacity(n as usize * d);
    for _ in 0..n {
        inspect(&state);
        let v = state.draw(rng).clone();
        draws.extend_from_slice(&v.0);
        state.add_row(model, &v);
    }
    Ok((UrnPath { dim: d, draws, rng_seed: 0 }, state))
}

/// A sparse urn configuration `U_n` after `n` draws.
#[derive(Clone, Debug)]
pub struct UrnState {
    dim: usize,
    colors: Vec<ColorPoint>,
    masses: Vec<f64>,
    index: HashMap<ColorPoint, usize>,
    /// Number of draws so far.
    pub n: u64,
}

impl UrnState {
    pub fn initial(u0: &SparseLaw) -> Self {
        let mut s = UrnState { dim: u0.dim(), colors: Vec::new(), masses: Vec::new(), index: HashMap::new(), n: 0 };
        for (c, p) in u0.iter() {
            s.add_mass(c, p);
        }
        s
    }

    /// `U_m = U_0 + Σ_{j<m} R_{V_j}` rebuilt from the first `m` draws.
    pub fn from_path(path: &UrnPath, model: &IncrementModel, u0: &SparseLaw, m: usize) -> Self {
        let mut s = UrnState::initial(u0);
        for j in 0..m {
            s.add_row(model, &path.color(j));
        }
        s
    }

    fn add_mass(&mut self, c: &ColorPoint, w: f64) {
        match self.index.get(c) {
            Some(&i) => self.masses[i] += w,
            None => {
                self.index.insert(c.clone(), self.colors.len());
                self.colors.push(c.clone());
                self.masses.push(w);
            }
        }
    }

    /// Adds the replacement row of color `v` and advances the draw count.
    pub fn add_row(&mut self, model: &IncrementModel, v: &ColorPoint) {
        for (b, p) in model.atoms() {
            self.add_mass(&v.add(b), *p);
        }
        self.n += 1;
    }

    /// Samples a color with probability `U_{n,v} / (n + 1)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &ColorPoint {
        let target = rng.random::<f64>() * self.total_mass();
        let mut acc = 0.0;
        for (c, &w) in self.colors.iter().zip(&self.masses) {
            acc += w;
            if target < acc {
                return c;
            }
        }
        self.colors.last().expect("configuration is non-empty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn support(&self) -> usize {
        self.colors.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ColorPoint, f64)> + '_ {
        self.colors.iter().zip(self.masses.iter().copied())
    }

    /// Sorted copy of the configuration.
    pub fn to_map(&self) -> BTreeMap<ColorPoint, f64> {
        self.iter().map(|(c, w)| (c.clone(), w)).collect()
    }

    /// `U_n x(λ) = Σ_v U_{n,v} exp(<λ, embed(v)>)`.
    pub fn eval_x(&self, embedding: &Embedding, lambda: &[f64]) -> f64 {
        self.iter().map(|(c, w)| w * dot(lambda, &embedding.embed(c)).exp()).collect::<CompensatedSum>().value()
    }

    /// `E[U_{n+1} x(λ) | U_n]`, by enumerating the next draw `v` and adding
    /// the row `R_v` explicitly.
    pub fn one_step_expectation(&self, model: &IncrementModel, lambda: &[f64]) -> f64 {
        let emb = model.embedding();
        let ux = self.eval_x(emb, lambda);
        let denom = (self.n + 1) as f64;
        self.iter()
            .map(|(v, w)| {
                let row: f64 = model.atoms().iter().map(|(b, p)| p * dot(lambda, &emb.embed(&v.add(b))).exp()).sum();
                (w / denom) * (ux + row)
            })
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Runs `reps` independent replications, replication `i` drawing from
/// stream `(base_seed, i)`. Results come back in replication order.
pub fn run_replications<T: Send>(reps: usize, base_seed: u64, f: impl Fn(&mut StreamRng, usize) -> T + Sync) -> Vec<T> {
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(base_seed, i as u64);
            f(&mut rng, i)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colors::{build_model, ModelSpec};

    fn delta(d: usize) -> SparseLaw {
        SparseLaw::delta(ColorPoint::origin(d))
    }

    #[test]
    fn right_shift_paths_stay_on_nonnegative_integers() {
        let m = build_model(&ModelSpec::RightShift).unwrap();
        let p = sample_path(&m, &delta(1), 500, 11).unwrap();
        assert_eq!(p.len(), 500);
        assert_eq!(p.draw(0), &[0]);
        for k in 1..500 {
            let v = p.draw(k)[0];
            assert!(v >= 0 && v as usize <= k);
        }
    }

    #[test]
    fn first_draw_comes_from_initial_configuration() {
        let m = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let u0 = SparseLaw::from_atoms(1, [(ColorPoint(vec![7]), 0.5), (ColorPoint(vec![-7]), 0.5)]).unwrap();
        for seed in 0..50 {
            let p = sample_path(&m, &u0, 1, seed).unwrap();
            assert_eq!(p.draw(0)[0].abs(), 7);
        }
    }

    #[test]
    fn paths_are_reproducible() {
        let m = build_model(&ModelSpec::Triangular).unwrap();
        let a = sample_path(&m, &delta(2), 1000, 5).unwrap();
        let b = sample_path(&m, &delta(2), 1000, 5).unwrap();
        let c = sample_path(&m, &delta(2), 1000, 6).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_ne!(a, c);
    }

    #[test]
    fn naive_sampler_mass_and_forced_first_draw() {
        let m = build_model(&ModelSpec::Ssrw(2)).unwrap();
        let mut rng = seeded_rng(3);
        let mut step = 0u64;
        let (path, state) = sample_path_naive_with(&m, &delta(2), 200, &mut rng, |s| {
            assert!((s.total_mass() - (step + 1) as f64).abs() < 1e-9);
            assert_eq!(s.n, step);
            step += 1;
        })
        .unwrap();
        assert_eq!(path.draw(0), &[0, 0]);
        assert!((state.total_mass() - 201.0).abs() < 1e-9);
        // U_1 = δ_0 + R_0
        let u1 = UrnState::from_path(&path, &m, &delta(2), 1);
        assert_eq!(u1.support(), 5);
        assert_eq!(u1.to_map()[&ColorPoint(vec![0, 0])], 1.0);
        assert_eq!(u1.to_map()[&ColorPoint(vec![1, 0])], 0.25);
        assert!(sample_path_naive(&m, &delta(2), NAIVE_MAX_N + 1, 0).is_err());
    }

    #[test]
    fn state_from_path_matches_naive_state() {
        let m = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let mut rng = seeded_rng(9);
        let (path, state) = sample_path_naive_with(&m, &delta(1), 300, &mut rng, |_| {}).unwrap();
        let rebuilt = UrnState::from_path(&path, &m, &delta(1), 300);
        assert_eq!(rebuilt.to_map(), state.to_map());
    }

    #[test]
    fn replications_are_ordered_and_reproducible() {
        let a = run_replications(64, 1, |rng, i| (i, rng.random::<u32>()));
        let b = run_replications(64, 1, |rng, i| (i, rng.random::<u32>()));
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(k, (i, _))| k == *i));
    }
}
