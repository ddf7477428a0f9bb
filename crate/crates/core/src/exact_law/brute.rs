use std::collections::{BTreeMap, HashMap};

use crate::colors::{ColorPoint, IncrementModel};
use crate::error::{Result, UrnError};
use crate::numeric::CompensatedSum;

use super::SparseLaw;

pub const BRUTE_FORCE_MAX_N: u64 = 14;
const MAX_LEAVES: f64 = 2e8;

struct Walker<'a> {
    atoms: &'a [(ColorPoint, f64)],
    n: u64,
    pos: Vec<i64>,
    out: HashMap<Vec<i64>, CompensatedSum>,
}

impl Walker<'_> {
    /// Visits every outcome of `(I_j, X_j)` for `j >= step`.
    fn visit(&mut self, step: u64, weight: f64) {
        if step > self.n {
            self.out.entry(self.pos.clone()).or_default().add(weight);
            return;
        }
        let q = 1.0 / (step + 1) as f64;
        self.visit(step + 1, weight * (1.0 - q));
        for (c, p) in self.atoms {
            for (x, v) in self.pos.iter_mut().zip(&c.0) {
                *x += v;
            }
            self.visit(step + 1, weight * q * p);
            for (x, v) in self.pos.iter_mut().zip(&c.0) {
                *x -= v;
            }
        }
    }
}

/// Law of `Z_n` by enumerating every `(Z_0, I_1, X_1, …, I_n, X_n)`
/// outcome; no convolution code is shared with [`super::exact_law_dp`].
pub fn brute_force_law(model: &IncrementModel, u0: &SparseLaw, n: u64) -> Result<SparseLaw> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(UrnError::TooLarge(format!("brute force needs n <= {BRUTE_FORCE_MAX_N}, got {n}")));
    }
    if u0.dim() != model.dim() {
        return Err(UrnError::DimensionMismatch { expected: model.dim(), got: u0.dim() });
    }
    let leaves = u0.len() as f64 * ((model.atoms().len() + 1) as f64).powi(n as i32);
    if leaves > MAX_LEAVES {
        return Err(UrnError::TooLarge(format!("{leaves:.0} outcomes to enumerate")));
    }
    let mut walker = Walker { atoms: model.atoms(), n, pos: Vec::new(), out: HashMap::new() };
    for (z0, w) in u0.iter() {
        walker.pos = z0.0.clone();
        walker.visit(1, w);
    }
    let entries: BTreeMap<ColorPoint, f64> =
        walker.out.into_iter().map(|(c, p)| (ColorPoint(c), p.value())).filter(|(_, p)| *p > 0.0).collect();
    Ok(SparseLaw::from_parts(model.dim(), entries, 0.0, u0.n + n, model.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colors::{build_model, ModelSpec};

    #[test]
    fn right_shift_all_successes() {
        let m = build_model(&ModelSpec::RightShift).unwrap();
        let law = brute_force_law(&m, &SparseLaw::delta(ColorPoint(vec![0])), 3).unwrap();
        assert!((law.get(&ColorPoint(vec![3])) - 1.0 / 24.0).abs() < 1e-17);
        assert!((law.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_and_limits() {
        let m = build_model(&ModelSpec::Ssrw(1)).unwrap();
        let u0 = SparseLaw::from_atoms(1, [(ColorPoint(vec![4]), 0.5), (ColorPoint(vec![-4]), 0.5)]).unwrap();
        assert_eq!(brute_force_law(&m, &u0, 0).unwrap().entries(), u0.entries());
        assert!(matches!(brute_force_law(&m, &u0, 15), Err(UrnError::TooLarge(_))));
        let tri = build_model(&ModelSpec::Triangular).unwrap();
        assert!(matches!(
            brute_force_law(&tri, &SparseLaw::delta(ColorPoint(vec![0, 0])), 14),
            Err(UrnError::TooLarge(_))
        ));
    }
}
