use rand::Rng;
use urnlab_core::rng::seeded_rng;
use urnlab_core::urn_process::{sample_path_with, second_moment_exact, UrnState};
use urnlab_core::{build_model, ColorPoint, ModelSpec, SparseLaw};

#[test]
fn one_step_identity_on_random_states() {
    let mut rng = seeded_rng(2024);
    for spec in [ModelSpec::RightShift, ModelSpec::Ssrw(1), ModelSpec::Ssrw(2), ModelSpec::Triangular] {
        let m = build_model(&spec).unwrap();
        let u0 = SparseLaw::delta(ColorPoint::origin(m.dim()));
        for _ in 0..100 {
            let n = rng.random_range(0..300u64);
            let path = sample_path_with(&m, &u0, n, &mut rng).unwrap();
            let state = UrnState::from_path(&path, &m, &u0, n as usize);
            let lambda: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(-0.5..0.5)).collect();
            let lhs = state.one_step_expectation(&m, &lambda);
            let rhs = (1.0 + m.mgf(&lambda) / (n + 1) as f64) * state.eval_x(m.embedding(), &lambda);
            assert!(((lhs - rhs) / rhs).abs() < 1e-12, "{spec:?} n={n}");
        }
    }
}

#[test]
fn second_moment_exceeds_one_and_is_monotone() {
    // E[M̄²] = 1 + Var(M̄) and the variance of a martingale is non-decreasing
    let m = build_model(&ModelSpec::Ssrw(1)).unwrap();
    let v = second_moment_exact(&m, &SparseLaw::delta(ColorPoint(vec![0])), &[0.4], 2000);
    assert!((v[0] - 1.0).abs() < 1e-15);
    assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}
