use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use urnlab_core::urn_process::{run_replications, sample_path_naive_with, sample_path_with};
use urnlab_core::{build_model, exact_law_dp, ColorPoint, IncrementModel, ModelSpec, SparseLaw};

const N: u64 = 12;
const REPS: usize = 40_000;

/// Pearson statistic of the last-draw histogram against the exact law of
/// `Z_{N-1}`, pooling cells with expected count below 5.
fn chi_square_p(model: &IncrementModel, counts: &BTreeMap<ColorPoint, u64>) -> f64 {
    let u0 = SparseLaw::delta(ColorPoint::origin(model.dim()));
    let law = exact_law_dp(model, &u0, N - 1, 0.0).unwrap();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    for (c, p) in law.iter() {
        let e = p * REPS as f64;
        let o = *counts.get(c).unwrap_or(&0) as f64;
        if e < 5.0 {
            pooled_e += e;
            pooled_o += o;
        } else {
            stat += (o - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    let extra: u64 = counts.iter().filter(|(c, _)| law.get(c) == 0.0).map(|(_, k)| *k).sum();
    assert_eq!(extra, 0, "sampled a color outside the exact support");
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

fn histogram(draws: Vec<ColorPoint>) -> BTreeMap<ColorPoint, u64> {
    let mut h = BTreeMap::new();
    for c in draws {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

#[test]
fn both_samplers_reproduce_the_exact_law() {
    for spec in [ModelSpec::Ssrw(1), ModelSpec::Triangular] {
        let m = build_model(&spec).unwrap();
        let u0 = SparseLaw::delta(ColorPoint::origin(m.dim()));
        let fast =
            run_replications(REPS, 101, |rng, _| sample_path_with(&m, &u0, N, rng).unwrap().color(N as usize - 1));
        let naive = run_replications(REPS, 202, |rng, _| {
            sample_path_naive_with(&m, &u0, N, rng, |_| {}).unwrap().0.color(N as usize - 1)
        });
        let p_fast = chi_square_p(&m, &histogram(fast));
        let p_naive = chi_square_p(&m, &histogram(naive));
        assert!(p_fast > 1e-4 && p_naive > 1e-4, "{spec:?}: {p_fast} {p_naive}");
    }
}

#[test]
fn paths_stay_within_reach() {
    let m = build_model(&ModelSpec::Ssrw(2)).unwrap();
    let u0 = SparseLaw::delta(ColorPoint::origin(2));
    for seed in 0..20u64 {
        let path = urnlab_core::sample_path(&m, &u0, 500, seed).unwrap();
        for (j, v) in path.iter().enumerate() {
            let l1: i64 = v.iter().map(|x| x.abs()).sum();
            assert!(l1 <= j as i64);
        }
    }
}

#[test]
fn exact_support_growth_is_bounded() {
    for spec in [ModelSpec::RightShift, ModelSpec::Ssrw(1), ModelSpec::Ssrw(2)] {
        let m = build_model(&spec).unwrap();
        let u0 = SparseLaw::delta(ColorPoint::origin(m.dim()));
        for n in [1u64, 5, 20, 50] {
            let law = exact_law_dp(&m, &u0, n, 0.0).unwrap();
            let bound = (2 * n + 1).pow(m.dim() as u32) as usize;
            assert!(law.len() <= bound);
            let (lo, hi) = law.bounding_box();
            assert!(lo.iter().chain(&hi).all(|x| x.unsigned_abs() <= n));
        }
    }
}
