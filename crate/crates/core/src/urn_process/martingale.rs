//! The martingales `M̄_n(λ) = U_n x(λ) / Π_n(e(λ))` and their exact second
//! moments.

use serde::Serialize;

use crate::colors::{dot, IncrementModel};
use crate::error::{Result, UrnError};
use crate::exact_law::SparseLaw;
use crate::numeric::{log_add_exp, CompensatedSum};

use super::UrnPath;

/// `E[M̄²_{n}] / E[M̄²_{n/2}]` above this flags continued growth.
pub const GROWTH_RATIO_LIMIT: f64 = 1.05;

/// `M̄_0..M̄_n` along one path.
#[derive(Clone, Debug)]
pub struct MartingaleTrace {
    pub lambda: Vec<f64>,
    pub values: Vec<f64>,
    /// `ln(U_j x(λ))`, `j = 0..=n`.
    pub log_u_x: Vec<f64>,
}

impl MartingaleTrace {
    /// CSV `step,m_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,m_value\n");
        for (j, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{j},{}\n", crate::numeric::fmt_f64(*v)));
        }
        out
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("trace has M̄_0")
    }
}

/// Running sum of positive terms `exp(t_k)` kept as `exp(scale) · s` with a
/// compensated mantissa sum.
struct ScaledSum {
    scale: f64,
    sum: CompensatedSum,
}

impl ScaledSum {
    fn new(log_first: f64) -> Self {
        let mut sum = CompensatedSum::new();
        sum.add(1.0);
        ScaledSum { scale: log_first, sum }
    }

    fn add_log(&mut self, t: f64) {
        if t > self.scale + 30.0 {
            let shrink = (self.scale - t).exp();
            let mut rescaled = CompensatedSum::new();
            rescaled.add(self.sum.value() * shrink);
            self.sum = rescaled;
            self.scale = t;
        }
        self.sum.add((t - self.scale).exp());
    }

    fn log_value(&self) -> f64 {
        self.scale + self.sum.value().ln()
    }
}

fn log_u0_x(u0: &SparseLaw, model: &IncrementModel, lambda: &[f64]) -> f64 {
    let emb = model.embedding();
    u0.iter().map(|(c, p)| p.ln() + dot(lambda, &emb.embed(c))).fold(f64::NEG_INFINITY, log_add_exp)
}

/// Evaluates `M̄_j(λ)` along `path` using
/// `U_{j+1} x(λ) = U_j x(λ) + e(λ) exp(<λ, V_j>)`, without materializing `U_j`.
pub fn martingale_trace(
    path: &UrnPath,
    model: &IncrementModel,
    u0: &SparseLaw,
    lambda: &[f64],
) -> Result<MartingaleTrace> {
    if lambda.len() != model.dim() || path.dim() != model.dim() {
        return Err(UrnError::DimensionMismatch { expected: model.dim(), got: lambda.len() });
    }
    let emb = model.embedding();
    let e = model.mgf(lambda);
    let log_e = e.ln();
    let start = log_u0_x(u0, model, lambda);
    let mut acc = ScaledSum::new(start);
    let mut log_pi = CompensatedSum::new();
    let n = path.len();
    let mut values = Vec::with_capacity(n + 1);
    let mut log_u_x = Vec::with_capacity(n + 1);
    values.push(start.exp());
    log_u_x.push(start);
    for j in 0..n {
        let v = crate::colors::ColorPoint(path.draw(j).to_vec());
        acc.add_log(log_e + dot(lambda, &emb.embed(&v)));
        log_pi.add((e / (j + 1) as f64).ln_1p());
        let lux = acc.log_value();
        log_u_x.push(lux);
        values.push((lux - log_pi.value()).exp());
    }
    Ok(MartingaleTrace { lambda: lambda.to_vec(), values, log_u_x })
}

/// `ln E[M̄_j²(λ)]` for `j = 0..=n` from the exact recursion
///
/// `E[(U_{j+1}x)²] = (1 + 2e/(j+1)) E[(U_j x)²] + e²/(j+1) · Π_j(e(2λ)) M̄_0(2λ)`,
///
/// divided through by `Π_{j+1}(e(λ))²` and carried in log space.
pub fn second_moment_exact_log(model: &IncrementModel, u0: &SparseLaw, lambda: &[f64], n: u64) -> Vec<f64> {
    let e = model.mgf(lambda);
    let double: Vec<f64> = lambda.iter().map(|l| 2.0 * l).collect();
    let e2 = model.mgf(&double);
    let log_m0 = log_u0_x(u0, model, lambda);
    let log_m0_2 = log_u0_x(u0, model, &double);
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut log_a = 2.0 * log_m0;
    out.push(log_a);
    let mut log_pi_e = CompensatedSum::new();
    let mut log_pi_e2 = CompensatedSum::new();
    for j in 0..n {
        let jp = (j + 1) as f64;
        let r = e / jp;
        // E[U_j x(2λ)] / Π_j(e)²
        let log_c = log_m0_2 + log_pi_e2.value() - 2.0 * log_pi_e.value();
        let first = (2.0 * r).ln_1p() + log_a;
        let second = 2.0 * e.ln() - jp.ln() + log_c;
        log_a = log_add_exp(first, second) - 2.0 * r.ln_1p();
        out.push(log_a);
        log_pi_e.add(r.ln_1p());
        log_pi_e2.add((e2 / jp).ln_1p());
    }
    out
}

/// `E[M̄_j²(λ)]` for `j = 0..=n`.
pub fn second_moment_exact(model: &IncrementModel, u0: &SparseLaw, lambda: &[f64], n: u64) -> Vec<f64> {
    second_moment_exact_log(model, u0, lambda, n).into_iter().map(f64::exp).collect()
}

/// Second-moment summary at one `λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L2Point {
    pub lambda: Vec<f64>,
    pub max_second_moment: f64,
    /// `E[M̄²_{n_max}] / E[M̄²_{n_max/2}]`.
    pub growth_ratio: f64,
    pub growing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L2BoundReport {
    /// Largest scanned half-width with `2e(λ) - e(2λ) > 0` on the whole box.
    pub delta_star: f64,
    /// True when the scan reached `delta_max` without a violation.
    pub saturated: bool,
    pub resolution: f64,
    pub n_max: u64,
    pub points: Vec<L2Point>,
}

/// Lattice points of `[-k, k]^d` with sup-norm exactly `k`.
fn shell(d: usize, k: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-k; d];
    loop {
        if cur.iter().any(|c| c.abs() == k) {
            out.push(cur.clone());
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            cur[i] += 1;
            if cur[i] <= k {
                break;
            }
            cur[i] = -k;
            i += 1;
        }
    }
}

/// Scans half-widths `δ = k · delta_max / grid` for the region where
/// `2e(λ) - e(2λ) > 0`, then evaluates the exact second moments on a
/// `points_per_axis^d` grid of `[-δ*, δ*]^d` up to `n_max`.
pub fn l2_bound_scan(
    model: &IncrementModel,
    u0: &SparseLaw,
    delta_max: f64,
    n_max: u64,
    grid: usize,
    points_per_axis: usize,
) -> Result<L2BoundReport> {
    if delta_max.is_nan() || delta_max <= 0.0 || grid == 0 {
        return Err(UrnError::InvalidArgument("delta_max must be positive and grid >= 1".into()));
    }
    if n_max < 2 {
        return Err(UrnError::TimeTooSmall { n: n_max, min: 2 });
    }
    let d = model.dim();
    let res = delta_max / grid as f64;
    let positive = |l: &[f64]| {
        let double: Vec<f64> = l.iter().map(|x| 2.0 * x).collect();
        2.0 * model.mgf(l) - model.mgf(&double) > 0.0
    };
    let mut delta_star = delta_max;
    let mut saturated = true;
    for k in 1..=grid as i64 {
        let bad = shell(d, k).iter().any(|idx| {
            let l: Vec<f64> = idx.iter().map(|&i| i as f64 * res).collect();
            !positive(&l)
        });
        if bad {
            delta_star = (k - 1) as f64 * res;
            saturated = false;
            break;
        }
    }
    let ppa = points_per_axis.max(1);
    let axis: Vec<f64> = if ppa == 1 {
        vec![0.0]
    } else {
        (0..ppa).map(|i| -delta_star + 2.0 * delta_star * i as f64 / (ppa - 1) as f64).collect()
    };
    let mut points = Vec::new();
    let total = ppa.pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        let lambda: Vec<f64> = (0..d)
            .map(|_| {
                let v = axis[rem % ppa];
                rem /= ppa;
                v
            })
            .collect();
        points.push(l2_point(model, u0, &lambda, n_max));
    }
    Ok(L2BoundReport { delta_star, saturated, resolution: res, n_max, points })
}

/// Second-moment summary at a single `λ`.
pub fn l2_point(model: &IncrementModel, u0: &SparseLaw, lambda: &[f64], n_max: u64) -> L2Point {
    let logs = second_moment_exact_log(model, u0, lambda, n_max);
    let max_log = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let growth_ratio = (logs[n_max as usize] - logs[(n_max / 2) as usize]).exp();
    L2Point {
        lambda: lambda.to_vec(),
        max_second_moment: max_log.exp(),
        growth_ratio,
        growing: growth_ratio.is_nan() || growth_ratio > GROWTH_RATIO_LIMIT,
    }
}

/// `E[M̄_n²(λ/√ln n)] - 1` for each `n` in `n_list`.
pub fn variance_vanishes(model: &IncrementModel, u0: &SparseLaw, lambda: &[f64], n_list: &[u64]) -> Result<Vec<f64>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(UrnError::InvalidArgument("n_list must be strictly increasing".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            if n < 3 {
                return Err(UrnError::TimeTooSmall { n, min: 3 });
            }
            let scale = (n as f64).ln().sqrt();
            let scaled: Vec<f64> = lambda.iter().map(|l| l / scale).collect();
            let logs = second_moment_exact_log(model, u0, &scaled, n);
            Ok(logs[n as usize].exp_m1())
        })
        .collect()
}
