use urnlab_core::product_formula::{cf_zn, mgf_zn};
use urnlab_core::{build_model, exact_law_dp, ColorPoint, ModelSpec, SparseLaw};

fn grid(d: usize, k: usize, half: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..k).map(|i| -half + 2.0 * half * i as f64 / (k - 1) as f64).collect();
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

#[test]
fn law_mgf_matches_product_formula() {
    for spec in [ModelSpec::RightShift, ModelSpec::Ssrw(1), ModelSpec::Ssrw(2), ModelSpec::Triangular] {
        let m = build_model(&spec).unwrap();
        let u0 = SparseLaw::from_atoms(
            m.dim(),
            [(ColorPoint::origin(m.dim()), 0.5), (ColorPoint::unit(m.dim(), 0, 1), 0.5)],
        )
        .unwrap();
        let law = exact_law_dp(&m, &u0, 60, 0.0).unwrap();
        for l in grid(m.dim(), 5, 0.3) {
            let direct = law.mgf_at(m.embedding(), &l);
            let formula = mgf_zn(&m, |x| u0.mgf_at(m.embedding(), x), &l, 60).exp();
            assert!(((direct - formula) / formula).abs() < 1e-12, "{spec:?} {l:?}");
        }
    }
}

#[test]
fn law_cf_matches_product_formula() {
    let m = build_model(&ModelSpec::Triangular).unwrap();
    let u0 = SparseLaw::delta(ColorPoint::origin(2));
    let law = exact_law_dp(&m, &u0, 80, 0.0).unwrap();
    for t in grid(2, 7, 2.5) {
        let direct = law.cf_at(m.embedding(), &t);
        let formula = cf_zn(&m, |x| u0.cf_at(m.embedding(), x), &t, 80).to_complex();
        assert!((direct - formula).norm() < 1e-13);
    }
}
