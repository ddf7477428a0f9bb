use crate::colors::{ColorPoint, IncrementModel};
use crate::error::{Result, UrnError};

use super::grid::Grid;
use super::SparseLaw;

/// How the thinning kernels are grouped into convolution stages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// Stepwise when `prune_eps == 0` or `n <= 4096`, blocked otherwise.
    Auto,
    /// One stage per `j`, kernel `(1 - q_j) δ_0 + q_j p`.
    Stepwise,
    /// `prefix` single steps, then geometric blocks `(a, ⌈growth·a⌉]` whose
    /// kernel is the exact law of `Σ_{j in block} I_j X_j`.
    Blocked { prefix: u64, growth: f64 },
}

#[derive(Clone, Debug)]
pub struct DpOptions {
    /// Total probability mass the engine may discard.
    pub prune_eps: f64,
    /// Largest dense box (in cells) the engine will allocate.
    pub support_cap: usize,
    pub schedule: Schedule,
}

impl DpOptions {
    pub fn new(prune_eps: f64) -> Self {
        DpOptions { prune_eps, support_cap: 20_000_000, schedule: Schedule::Auto }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }
}

/// State after a convolution stage.
#[derive(Clone, Copy, Debug)]
pub struct StageReport {
    /// Largest `j` folded in so far.
    pub step: u64,
    pub retained_mass: f64,
    pub pruned_mass: f64,
    pub support: usize,
}

const AUTO_STEPWISE_MAX_N: u64 = 4096;
const AUTO_PREFIX: u64 = 1024;

fn stages(n: u64, schedule: Schedule, prune_eps: f64) -> Vec<(u64, u64)> {
    let schedule = match schedule {
        Schedule::Auto if prune_eps == 0.0 || n <= AUTO_STEPWISE_MAX_N => Schedule::Stepwise,
        Schedule::Auto => Schedule::Blocked { prefix: AUTO_PREFIX, growth: 2.0 },
        s => s,
    };
    match schedule {
        Schedule::Stepwise | Schedule::Auto => (1..=n).map(|j| (j - 1, j)).collect(),
        Schedule::Blocked { prefix, growth } => {
            let growth = growth.max(1.0 + 1e-9);
            let prefix = prefix.clamp(1, n.max(1)).min(n);
            let mut out: Vec<(u64, u64)> = (1..=prefix).map(|j| (j - 1, j)).collect();
            let mut a = prefix;
            while a < n {
                let b = ((a as f64 * growth).ceil() as u64).max(a + 1).min(n);
                out.push((a, b));
                a = b;
            }
            out
        }
    }
}

/// Kernel `(1 - q) δ_0 + q p` with `q = 1/(j+1)`.
fn step_kernel(model: &IncrementModel, j: u64) -> Vec<(Vec<i64>, f64)> {
    let q = 1.0 / (j + 1) as f64;
    let d = model.dim();
    let mut kernel = vec![(vec![0; d], 1.0 - q)];
    for (c, p) in model.atoms() {
        if c.is_origin() {
            kernel[0].1 += q * p;
        } else {
            kernel.push((c.0.clone(), q * p));
        }
    }
    kernel
}

/// Law of `Σ_{j=a+1}^{b} I_j`, truncated to `0..=K` with discarded tail
/// mass at most `allowance`. Returns the kept weights and the tail.
fn success_count_law(a: u64, b: u64, allowance: f64) -> (Vec<f64>, f64) {
    let len = (b - a) as usize;
    let mut cap = 32usize.min(len);
    loop {
        let mut dist = vec![0.0; cap + 1];
        dist[0] = 1.0;
        let mut overflow = 0.0;
        let mut top = 0usize;
        for j in a + 1..=b {
            let q = 1.0 / (j + 1) as f64;
            if top == cap {
                overflow += dist[cap] * q;
            } else {
                top += 1;
            }
            for k in (1..=top).rev() {
                dist[k] = dist[k] * (1.0 - q) + dist[k - 1] * q;
            }
            dist[0] *= 1.0 - q;
        }
        if overflow <= allowance || cap == len {
            // trim the smallest tail that fits the allowance
            let mut tail = overflow;
            let mut keep = dist.len();
            while keep > 1 && tail + dist[keep - 1] <= allowance {
                tail += dist[keep - 1];
                keep -= 1;
            }
            dist.truncate(keep);
            return (dist, tail);
        }
        cap = (cap * 2).min(len);
    }
}

/// Exact law of `Σ_{j in (a, b]} I_j X_j` up to a discarded tail.
fn block_kernel(model: &IncrementModel, a: u64, b: u64, allowance: f64) -> (Vec<(Vec<i64>, f64)>, f64) {
    let d = model.dim();
    let (weights, tail) = success_count_law(a, b, allowance);
    let top = (weights.len() - 1) as i64;
    let step_kernel: Vec<(Vec<i64>, f64)> = model.atoms().iter().map(|(c, p)| (c.0.clone(), *p)).collect();
    let lo: Vec<i64> = (0..d).map(|i| top * model.atoms().iter().map(|(c, _)| c.0[i]).min().unwrap().min(0)).collect();
    let hi: Vec<i64> = (0..d).map(|i| top * model.atoms().iter().map(|(c, _)| c.0[i]).max().unwrap().max(0)).collect();
    let ext = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
    let mut acc = Grid::zeros(lo, ext);
    let mut power = Grid::point(&ColorPoint::origin(d), 1.0);
    for (k, &w) in weights.iter().enumerate() {
        if k > 0 {
            power = power.convolve(&step_kernel);
        }
        acc.add_scaled(&power, w);
    }
    (acc.to_kernel(), tail)
}

/// Zeroes the smallest cells whose total stays within `allowance`.
fn prune(grid: &mut Grid, allowance: f64) -> f64 {
    if allowance <= 0.0 {
        return 0.0;
    }
    let mut small: Vec<(f64, usize)> =
        grid.data.iter().enumerate().filter(|(_, &p)| p > 0.0 && p <= allowance).map(|(i, &p)| (p, i)).collect();
    small.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut dropped = 0.0;
    for (p, i) in small {
        if dropped + p > allowance {
            break;
        }
        dropped += p;
        grid.data[i] = 0.0;
    }
    dropped
}

/// Exact law of `Z_n` with total pruning budget `prune_eps`.
pub fn exact_law_dp(model: &IncrementModel, u0: &SparseLaw, n: u64, prune_eps: f64) -> Result<SparseLaw> {
    exact_law_dp_with(model, u0, n, &DpOptions::new(prune_eps), None)
}

/// [`exact_law_dp`] with explicit options and an optional per-stage observer.
///
/// Every stage may discard at most `prune_eps / (2m)` of law mass (`m`
/// stages) and, for blocked stages, as much again from the kernel tail, so
/// the total discarded mass never exceeds `prune_eps`. Each retained
/// probability is an underestimate by at most the discarded mass.
pub fn exact_law_dp_with(
    model: &IncrementModel,
    u0: &SparseLaw,
    n: u64,
    opts: &DpOptions,
    mut observer: Option<&mut dyn FnMut(&StageReport)>,
) -> Result<SparseLaw> {
    let eps = opts.prune_eps;
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(UrnError::InvalidArgument(format!("prune_eps must be finite and >= 0, got {eps}")));
    }
    if u0.dim() != model.dim() {
        return Err(UrnError::DimensionMismatch { expected: model.dim(), got: u0.dim() });
    }
    if u0.is_empty() {
        return Err(UrnError::InvalidArgument("initial configuration is empty".into()));
    }
    let mut pruned = u0.pruned_mass;
    if pruned > eps {
        return Err(UrnError::BudgetExceeded { pruned, budget: eps });
    }
    let plan = stages(n, opts.schedule, eps);
    let allowance = if plan.is_empty() { 0.0 } else { eps / (2.0 * plan.len() as f64) };
    let mut grid = Grid::from_entries(model.dim(), u0.iter());
    for &(a, b) in &plan {
        let kernel = if b - a == 1 {
            step_kernel(model, b)
        } else {
            let (k, tail) = block_kernel(model, a, b, allowance);
            // kernel tail removes tail × (current mass)
            pruned += tail * grid.sum();
            k
        };
        let needed: usize = grid
            .ext
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let span =
                    kernel.iter().map(|(k, _)| k[i]).max().unwrap() - kernel.iter().map(|(k, _)| k[i]).min().unwrap();
                e + span as usize
            })
            .product();
        if needed > opts.support_cap {
            return Err(UrnError::SupportTooLarge { cells: needed, cap: opts.support_cap });
        }
        grid = grid.convolve(&kernel);
        pruned += prune(&mut grid, allowance);
        grid.trim();
        if pruned > eps * (1.0 + 1e-9) {
            return Err(UrnError::BudgetExceeded { pruned, budget: eps });
        }
        if let Some(obs) = observer.as_mut() {
            obs(&StageReport { step: b, retained_mass: grid.sum(), pruned_mass: pruned, support: grid.nonzero() });
        }
    }
    let entries = grid.to_entries();
    Ok(SparseLaw::from_parts(model.dim(), entries, pruned, u0.n + n, model.name()))
}
