use serde::Serialize;
use serde_json::json;
use urnlab_core::colors::detect_lattice;
use urnlab_core::diagnostics::{
    cf_distance, default_t_grid, ks_distance_1d, llt_statistic, random_config_convergence, standardize,
    RandomConfigOptions,
};
use urnlab_core::numeric::fmt_f64;
use urnlab_core::urn_process::{l2_bound_scan, martingale_trace, second_moment_exact};
use urnlab_core::{
    brute_force_law, build_model, exact_law_cf, exact_law_dp, sample_path, ColorPoint, IncrementModel, ModelSpec,
    SparseLaw,
};

use crate::config::{Format, RunConfig};
use crate::output::{emit, json_pretty};
use crate::{CliError, MartingaleMode, Method};

const ORACLE_TOL: f64 = 1e-13;

fn load(cfg: &RunConfig) -> Result<(IncrementModel, SparseLaw), CliError> {
    let model = build_model(&ModelSpec::parse(cfg.model_ref()?)?)?;
    let u0 = SparseLaw::parse_initial(&cfg.u0, model.dim())?;
    Ok((model, u0))
}

fn lambda_for(cfg: &RunConfig, dim: usize) -> Result<Vec<f64>, CliError> {
    match &cfg.lambda {
        None => Ok(vec![0.2; dim]),
        Some(l) if l.len() == dim => Ok(l.clone()),
        Some(l) if l.len() == 1 => Ok(vec![l[0]; dim]),
        Some(l) => Err(CliError::Validation(format!("--lambda has {} entries, model dimension is {dim}", l.len()))),
    }
}

fn n_list_or(cfg: &RunConfig, default: &[u64]) -> Vec<u64> {
    cfg.n_list.clone().unwrap_or_else(|| default.to_vec())
}

#[derive(Serialize)]
struct LawAtom {
    coeffs: Vec<i64>,
    x: Vec<f64>,
    prob: f64,
}

pub fn exact_law(cfg: &RunConfig, method: Method, grid: usize) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let n = cfg.n.unwrap_or(100);
    let law = match method {
        Method::Dp => exact_law_dp(&model, &u0, n, cfg.prune_eps.unwrap_or(0.0))?,
        Method::Cf => exact_law_cf(&model, &u0, n, grid)?,
    };
    let emb = model.embedding();
    let artifact = match cfg.format_or(Format::Csv) {
        Format::Csv => law.to_csv(emb),
        Format::Json => {
            let atoms: Vec<LawAtom> =
                law.iter().map(|(c, p)| LawAtom { coeffs: c.0.clone(), x: emb.embed(c), prob: p }).collect();
            json_pretty(&json!({
                "model": model.name(),
                "n": n,
                "pruned_mass": law.pruned_mass,
                "atoms": atoms,
            }))?
        }
    };
    emit(
        cfg.out.as_deref(),
        &artifact,
        json!({
            "command": "exact-law",
            "model": model.name(),
            "n": n,
            "support": law.len(),
            "total_mass": law.total_mass(),
            "pruned_mass": law.pruned_mass,
        }),
    )
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let n = cfg.n.unwrap_or(1000);
    let path = sample_path(&model, &u0, n, cfg.seed)?;
    let artifact = match cfg.format_or(Format::Csv) {
        Format::Csv => path.to_csv(),
        Format::Json => {
            let draws: Vec<&[i64]> = path.iter().collect();
            json_pretty(&json!({ "model": model.name(), "seed": cfg.seed, "n": n, "draws": draws }))?
        }
    };
    let last = (!path.is_empty()).then(|| path.color(path.len() - 1).0);
    emit(
        cfg.out.as_deref(),
        &artifact,
        json!({ "command": "simulate", "model": model.name(), "n": n, "seed": cfg.seed, "last": last }),
    )
}

#[derive(Serialize)]
struct DiagnosticRow {
    n: u64,
    statistic: f64,
    pruned_mass: f64,
    argmax: Vec<f64>,
    normalizer: Option<f64>,
}

fn ladder_artifact(rows: &[DiagnosticRow], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut s = String::from("n,statistic\n");
            for r in rows {
                s.push_str(&format!("{},{}\n", r.n, fmt_f64(r.statistic)));
            }
            Ok(s)
        }
        Format::Json => json_pretty(&rows),
    }
}

fn ladder_summary(command: &str, model: &IncrementModel, rows: &[DiagnosticRow]) -> serde_json::Value {
    let stats: Vec<f64> = rows.iter().map(|r| r.statistic).collect();
    let decreasing = stats.windows(2).all(|w| w[1] < w[0]);
    json!({
        "command": command,
        "model": model.name(),
        "n_list": rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        "statistics": stats,
        "strictly_decreasing": decreasing,
    })
}

pub fn clt(cfg: &RunConfig) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let moments = model.moments()?;
    let prune = cfg.prune_eps.unwrap_or(1e-10);
    let t_grid = default_t_grid(model.dim(), 9);
    let mut rows = Vec::new();
    for n in n_list_or(cfg, &[100, 1000, 10_000]) {
        let law = exact_law_dp(&model, &u0, n, prune)?;
        let st = standardize(&law, model.embedding(), &moments, cfg.use_gamma_centering)?;
        let row = if model.dim() == 1 {
            let ks = ks_distance_1d(&st)?;
            DiagnosticRow {
                n,
                statistic: ks.statistic,
                pruned_mass: ks.pruned_mass,
                argmax: vec![ks.argmax],
                normalizer: None,
            }
        } else {
            let cf = cf_distance(&st, &t_grid)?;
            DiagnosticRow {
                n,
                statistic: cf.statistic,
                pruned_mass: cf.pruned_mass,
                argmax: cf.argmax,
                normalizer: None,
            }
        };
        rows.push(row);
    }
    let artifact = ladder_artifact(&rows, cfg.format_or(Format::Csv))?;
    let mut summary = ladder_summary("clt", &model, &rows);
    summary["distance"] = json!(if model.dim() == 1 { "kolmogorov" } else { "characteristic-function" });
    emit(cfg.out.as_deref(), &artifact, summary)
}

pub fn random_config(cfg: &RunConfig) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let mut opts = RandomConfigOptions::new(
        n_list_or(cfg, &[100, 1000, 10_000]),
        cfg.reps.unwrap_or(200),
        cfg.eps.clone().unwrap_or_else(|| vec![0.3]),
        cfg.seed,
    );
    opts.use_gamma = cfg.use_gamma_centering;
    let report = random_config_convergence(&model, &u0, &opts)?;
    let artifact = match cfg.format_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => json_pretty(&report)?,
    };
    emit(
        cfg.out.as_deref(),
        &artifact,
        json!({
            "command": "clt-random-config",
            "model": model.name(),
            "reps": report.reps,
            "seed": report.seed,
            "rows": report.rows.len(),
        }),
    )
}

pub fn llt(cfg: &RunConfig) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let moments = model.moments()?;
    let lattice = detect_lattice(&model, true)?;
    let prune = cfg.prune_eps.unwrap_or(1e-10);
    let mut rows = Vec::new();
    for n in n_list_or(cfg, &[100, 1000, 10_000]) {
        let law = exact_law_dp(&model, &u0, n, prune)?;
        let s = llt_statistic(&law, model.embedding(), &moments, &lattice)?;
        rows.push(DiagnosticRow {
            n,
            statistic: s.sup_value,
            pruned_mass: s.pruned_mass,
            argmax: s.argmax_point,
            normalizer: Some(s.normalizer),
        });
    }
    let artifact = ladder_artifact(&rows, cfg.format_or(Format::Csv))?;
    emit(cfg.out.as_deref(), &artifact, ladder_summary("llt", &model, &rows))
}

pub fn martingale(cfg: &RunConfig, mode: MartingaleMode, delta_max: f64, scan_grid: usize) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let format = cfg.format_or(Format::Csv);
    match mode {
        MartingaleMode::Trace => {
            let lambda = lambda_for(cfg, model.dim())?;
            let n = cfg.n.unwrap_or(1000);
            let path = sample_path(&model, &u0, n, cfg.seed)?;
            let trace = martingale_trace(&path, &model, &u0, &lambda)?;
            let artifact = match format {
                Format::Csv => trace.to_csv(),
                Format::Json => json_pretty(&json!({ "lambda": trace.lambda, "values": trace.values }))?,
            };
            emit(
                cfg.out.as_deref(),
                &artifact,
                json!({ "command": "martingale", "mode": "trace", "model": model.name(), "n": n, "seed": cfg.seed, "lambda": lambda, "last": trace.last() }),
            )
        }
        MartingaleMode::SecondMoment => {
            let lambda = lambda_for(cfg, model.dim())?;
            let n = cfg.n.unwrap_or(1000);
            let values = second_moment_exact(&model, &u0, &lambda, n);
            let artifact = match format {
                Format::Csv => {
                    let mut s = String::from("n,second_moment\n");
                    for (j, v) in values.iter().enumerate() {
                        s.push_str(&format!("{j},{}\n", fmt_f64(*v)));
                    }
                    s
                }
                Format::Json => json_pretty(&json!({ "lambda": lambda, "second_moment": values }))?,
            };
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            emit(
                cfg.out.as_deref(),
                &artifact,
                json!({ "command": "martingale", "mode": "second-moment", "model": model.name(), "n": n, "lambda": lambda, "max": max }),
            )
        }
        MartingaleMode::L2Scan => {
            let n = cfg.n.unwrap_or(10_000);
            let report = l2_bound_scan(&model, &u0, delta_max, n, scan_grid, 5)?;
            let artifact = match format {
                Format::Csv => {
                    let d = model.dim();
                    let mut s = (1..=d).map(|i| format!("lambda{i},")).collect::<String>();
                    s.push_str("max_second_moment,growth_ratio,growing\n");
                    for p in &report.points {
                        for l in &p.lambda {
                            s.push_str(&fmt_f64(*l));
                            s.push(',');
                        }
                        s.push_str(&format!(
                            "{},{},{}\n",
                            fmt_f64(p.max_second_moment),
                            fmt_f64(p.growth_ratio),
                            p.growing
                        ));
                    }
                    s
                }
                Format::Json => json_pretty(&report)?,
            };
            emit(
                cfg.out.as_deref(),
                &artifact,
                json!({
                    "command": "martingale",
                    "mode": "l2-scan",
                    "model": model.name(),
                    "delta_star": report.delta_star,
                    "saturated": report.saturated,
                    "resolution": report.resolution,
                }),
            )
        }
    }
}

pub fn lattice_info(cfg: &RunConfig) -> Result<(), CliError> {
    let model = build_model(&ModelSpec::parse(cfg.model_ref()?)?)?;
    let thinned = detect_lattice(&model, true)?;
    let plain = detect_lattice(&model, false).ok();
    let (thin_key, plain_key) = if model.dim() == 1 { ("h", "h_tilde") } else { ("l", "l_tilde") };
    let mut info = json!({
        "model": model.name(),
        "dim": model.dim(),
        "thinned": thinned,
        "plain": plain,
    });
    info[thin_key] = json!(thinned.det_abs);
    info[plain_key] = json!(plain.as_ref().map(|p| p.det_abs));
    let artifact = match cfg.format_or(Format::Json) {
        Format::Json => json_pretty(&info)?,
        Format::Csv => {
            let plain_v = plain.as_ref().map(|p| fmt_f64(p.det_abs)).unwrap_or_default();
            format!("key,value\n{thin_key},{}\n{plain_key},{plain_v}\n", fmt_f64(thinned.det_abs))
        }
    };
    let mut summary = json!({ "command": "lattice-info", "model": model.name() });
    summary[thin_key] = info[thin_key].clone();
    summary[plain_key] = info[plain_key].clone();
    emit(cfg.out.as_deref(), &artifact, summary)
}

fn max_abs_diff(a: &SparseLaw, b: &SparseLaw) -> f64 {
    let keys: std::collections::BTreeSet<&ColorPoint> = a.entries().keys().chain(b.entries().keys()).collect();
    keys.into_iter().map(|c| (a.get(c) - b.get(c)).abs()).fold(0.0, f64::max)
}

pub fn oracle_check(cfg: &RunConfig) -> Result<(), CliError> {
    let (model, u0) = load(cfg)?;
    let n_max = cfg.n.unwrap_or(8);
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let dp = exact_law_dp(&model, &u0, n, 0.0)?;
        let brute = brute_force_law(&model, &u0, n)?;
        rows.push((n, max_abs_diff(&dp, &brute)));
    }
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = worst <= ORACLE_TOL;
    let result = if pass { "PASS" } else { "FAIL" };
    let artifact = match cfg.format_or(Format::Json) {
        Format::Csv => {
            let mut s = String::from("n,max_abs_diff\n");
            for (n, d) in &rows {
                s.push_str(&format!("{n},{}\n", fmt_f64(*d)));
            }
            s
        }
        Format::Json => json_pretty(&json!({
            "model": model.name(),
            "n_max": n_max,
            "tolerance": ORACLE_TOL,
            "max_abs_diff": worst,
            "per_n": rows.iter().map(|(n, d)| json!({ "n": n, "max_abs_diff": d })).collect::<Vec<_>>(),
            "result": result,
        }))?,
    };
    emit(
        cfg.out.as_deref(),
        &artifact,
        json!({ "command": "oracle-check", "model": model.name(), "n": n_max, "max_abs_diff": worst, "result": result }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("convolution and brute-force laws differ by {worst:e}")))
    }
}
