use std::path::PathBuf;
use std::sync::Arc;

use hopfforge::averaging::{average_first, average_second};
use hopfforge::reconcile::reconciliation_report;
use hopfforge::solve::{
    closed_form_zero_origin, find_zeros, gamma, groebner_reference, predict_cycle_count,
    printed_three_solutions, stability_eigenvalues_origin,
};
use hopfforge::verify::{continuation_sweep, count_limit_cycles, SweepTable};
use hopfforge::{
    AveragedZero, AveragingError, ChuaParams, EquilibriumKind, Family, ModelError,
    PerturbationOrigin, PerturbationPMinus, SolveError, SolveOptions, TransformError, VerifyError,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{p_family, Resolved, ResolvedFamily, RunConfig};
use crate::report::{complex, ensure_dir, fmt_float, num, to_json, write_csv, write_file, SCHEMA_VERSION};
use crate::{Cli, CliError};

const DETECT_TOL: f64 = 1e-9;

fn load(cli: &Cli) -> Result<Resolved, CliError> {
    let mut raw = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(g) = cli.grid {
        raw.predict.get_or_insert_with(Default::default).grid = Some(g);
        raw.scan.get_or_insert_with(Default::default).grid = Some(g);
    }
    if let Some(e) = &cli.eps {
        raw.verify.get_or_insert_with(Default::default).eps = Some(e.clone());
    }
    if let Some(o) = &cli.out {
        raw.output.get_or_insert_with(Default::default).dir = Some(o.to_string_lossy().into_owned());
    }
    raw.resolve()
}

fn transform_err(e: TransformError) -> CliError {
    match e {
        TransformError::InvalidFamily(m) => CliError::Input(format!("family hypotheses violated: {m}")),
        other => CliError::Input(other.to_string()),
    }
}

fn solve_err(e: SolveError) -> CliError {
    match e {
        SolveError::Averaging(AveragingError::FirstOrderNotZero { .. }) => CliError::Precondition(e.to_string()),
        SolveError::Averaging(AveragingError::Transform(t)) | SolveError::Transform(t) => transform_err(t),
        other => CliError::Input(other.to_string()),
    }
}

fn verify_err(e: VerifyError) -> CliError {
    match e {
        VerifyError::Transform(t) => transform_err(t),
        VerifyError::Solve(s) => solve_err(s),
        other => CliError::Input(other.to_string()),
    }
}

fn natural_order(f: &Family<f64>) -> u8 {
    match f {
        Family::Origin(_) => 1,
        Family::PMinus(_) => 2,
    }
}

fn configured_family(cfg: &Resolved) -> Result<(&ResolvedFamily, Family<f64>), CliError> {
    let rf = cfg
        .family
        .as_ref()
        .ok_or_else(|| CliError::Input("the configuration needs a [family] section".into()))?;
    let fam = rf.family();
    fam.validate().map_err(transform_err)?;
    Ok((rf, fam))
}

/// Creates the output directory and records the resolved configuration in it.
fn prepare_out(cfg: &Resolved) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&cfg.output.dir);
    ensure_dir(&dir)?;
    write_file(&dir.join("config.toml"), &cfg.canonical())?;
    Ok(dir)
}

fn say(cli: &Cli, text: &str) {
    if !cli.quiet && !cli.json {
        println!("{text}");
    }
}

fn emit_json(cli: &Cli, report: &Value) {
    if cli.json && !cli.quiet {
        print!("{}", to_json(report));
    }
}

fn usable(z: &AveragedZero<f64>) -> bool {
    !z.is_degenerate() && z.r > 0.0
}

fn zero_json(z: &AveragedZero<f64>) -> Value {
    json!({
        "r": z.r,
        "w": z.w,
        "jacobian": [[z.jac[0][0], z.jac[0][1]], [z.jac[1][0], z.jac[1][1]]],
        "det": z.det(),
        "trace": z.trace(),
        "eigenvalues": [complex(z.eigenvalues[0]), complex(z.eigenvalues[1])],
        "class": z.classification.label(),
        "residual": z.residual,
    })
}

fn config_json(cfg: &Resolved) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn detect(cli: &Cli, params: &[f64]) -> Result<(), CliError> {
    if params.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Input("parameters must be finite".into()));
    }
    let p = ChuaParams::new(params[0], params[1], params[2], params[3], params[4], params[5]);
    let found = match p.detect_zero_hopf(DETECT_TOL) {
        Ok(f) => f,
        Err(ModelError::AmbiguousDetection { first, second }) => {
            return Err(CliError::Input(format!(
                "ambiguous: both {} and {} are zero-Hopf equilibria",
                first.label(),
                second.label()
            )))
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    let equilibria = p.equilibria().map_err(|e| CliError::Input(e.to_string()))?;
    let eq_json: Vec<Value> = equilibria
        .iter()
        .map(|e| {
            json!({
                "kind": e.kind.label(),
                "position": e.position.to_vec(),
                "eigenvalues": e.eigenvalues.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let zh = found.map(|z| {
        let mut v = json!({
            "kind": z.equilibrium.kind.label(),
            "position": z.equilibrium.position.to_vec(),
            "omega": z.omega,
        });
        if z.equilibrium.kind == EquilibriumKind::PDouble {
            v["reading"] = json!("double equilibrium with b = a2^2/(4 a1), b2 = 0 and a*b1 = omega^2 - 1");
        }
        v
    });
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "detect",
        "params": params,
        "tolerance": DETECT_TOL,
        "equilibria": eq_json,
        "zero_hopf": zh.clone().unwrap_or(Value::Null),
    });
    if let Some(dir) = &cli.out {
        ensure_dir(dir)?;
        write_file(&dir.join("report.json"), &to_json(&report))?;
    }
    emit_json(cli, &report);
    match found {
        Some(z) => {
            let x = z.equilibrium.position;
            say(
                cli,
                &format!(
                    "zero-Hopf equilibrium: {} at ({}, {}, {}), omega = {}",
                    z.equilibrium.kind.label(),
                    fmt_float(x[0]),
                    fmt_float(x[1]),
                    fmt_float(x[2]),
                    fmt_float(z.omega)
                ),
            );
            Ok(())
        }
        None => Err(CliError::NoDetection),
    }
}

fn prediction(fam: &Family<f64>, order: u8, opts: &SolveOptions<f64>) -> Result<Vec<AveragedZero<f64>>, CliError> {
    let sf = Arc::new(fam.standard_form().map_err(transform_err)?);
    let field = match order {
        1 => average_first(sf, opts.grid),
        _ => average_second(sf, opts.grid),
    }
    .map_err(|e| solve_err(e.into()))?;
    find_zeros(&field, &opts.domain, opts.seeds).map_err(solve_err)
}

fn origin_bench() -> PerturbationOrigin<f64> {
    PerturbationOrigin {
        abar0: 1.0,
        abar2: 1.0,
        beta0: 2.0,
        beta2: 1.0,
        omega: 2.0,
        ..Default::default()
    }
}

fn p_bench() -> PerturbationPMinus<f64> {
    PerturbationPMinus {
        abar0: 1.0,
        abar1: 1.0,
        alpha2: -6.0,
        zeta0: -1.0,
        zeta2: -6.0,
        omega: 2.0,
        ..Default::default()
    }
}

fn closed_form_json(fam: &Family<f64>) -> Result<Value, CliError> {
    Ok(match fam {
        Family::Origin(f) => {
            let (printed, indicator) = gamma(f);
            json!({
                "gamma_printed": printed,
                "existence_indicator": indicator,
                "zero": closed_form_zero_origin(f).map(|(r, w)| json!({ "r": r, "w": w })).unwrap_or(Value::Null),
                "eigenvalues": stability_eigenvalues_origin(f).iter().map(|z| complex(*z)).collect::<Vec<_>>(),
            })
        }
        Family::PMinus(f) => {
            let readings = groebner_reference(f).map_err(solve_err)?;
            json!({
                "alpha2_plus_6q": f.alpha2 + 6.0 * f.q(),
                "printed_three_solutions": printed_three_solutions(f)
                    .iter()
                    .map(|(label, s)| json!({
                        "label": label,
                        "value": s.map(|(r, w)| json!({ "r": r, "w": w })).unwrap_or(Value::Null),
                    }))
                    .collect::<Vec<_>>(),
                "g1_readings": readings
                    .iter()
                    .map(|g| json!({
                        "label": g.label,
                        "g1": g.g1.to_vec(),
                        "solutions": g.solutions.iter().map(|(w, r)| json!({ "r": r, "w": w })).collect::<Vec<_>>(),
                    }))
                    .collect::<Vec<_>>(),
            })
        }
    })
}

pub fn predict(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let (rf, fam) = configured_family(&cfg)?;
    let opts = cfg.solve_options();
    let zeros = prediction(&fam, cfg.predict.order, &opts)?;
    let count = zeros.iter().filter(|z| usable(z)).count();

    let dir = prepare_out(&cfg)?;
    let rows: Vec<Vec<String>> = zeros
        .iter()
        .map(|z| {
            vec![
                rf.id().to_string(),
                fmt_float(z.r),
                fmt_float(z.w),
                fmt_float(z.det()),
                fmt_float(z.trace()),
                fmt_float(z.eigenvalues[0].re),
                fmt_float(z.eigenvalues[0].im),
                fmt_float(z.eigenvalues[1].re),
                fmt_float(z.eigenvalues[1].im),
                z.classification.label().to_string(),
            ]
        })
        .collect();
    write_csv(
        &dir.join("zeros.csv"),
        &["family_id", "r", "w", "det", "trace", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "class"],
        &rows,
    )?;

    let own = format!("{} (configured)", rf.id());
    let mut origins = vec![("origin benchmark", origin_bench())];
    let mut ps = vec![("p_minus benchmark", p_bench())];
    match (rf, &fam) {
        (_, Family::Origin(f)) if *f != origin_bench() => origins.insert(0, (own.as_str(), *f)),
        (_, Family::PMinus(f)) if *f != p_bench() => ps.insert(0, (own.as_str(), *f)),
        _ => {}
    }
    let md = reconciliation_report(&origins, &ps, &cfg.verify.eps, &opts).map_err(solve_err)?;
    write_file(&dir.join("reconciliation.md"), &md)?;

    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "predict",
        "config": config_json(&cfg),
        "family_id": rf.id(),
        "order": cfg.predict.order,
        "theta_reversed": false,
        "predicted_cycles": count,
        "zeros": zeros.iter().map(zero_json).collect::<Vec<_>>(),
        "closed_form": closed_form_json(&fam)?,
    });
    write_file(&dir.join("report.json"), &to_json(&report))?;
    emit_json(cli, &report);

    say(cli, &format!("{}: {count} predicted limit cycle(s), averaging order {}", rf.id(), cfg.predict.order));
    for z in zeros.iter().filter(|z| usable(z)) {
        say(cli, &format!("  r = {}  w = {}  {}", fmt_float(z.r), fmt_float(z.w), z.classification.label()));
    }
    say(cli, &format!("reports written to {}", dir.display()));
    Ok(())
}

fn sweep_json(table: &SweepTable<f64>) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let base = json!({
                "eps": row.eps,
                "orbit_id": row.orbit_id,
                "prediction": { "r": row.prediction.0, "w": row.prediction.1 },
            });
            match &row.outcome {
                Ok(o) => {
                    let mut v = base;
                    v["status"] = json!("verified");
                    v["initial_state"] = json!(o.initial_state.to_vec());
                    v["period"] = num(o.period);
                    v["pullback"] = json!({ "r": o.pullback.0, "w": o.pullback.1 });
                    v["dist_to_prediction"] = num(row.distance().unwrap_or(f64::NAN));
                    v["multipliers"] = json!([complex(o.multipliers[0]), complex(o.multipliers[1])]);
                    v["trivial_multiplier"] = complex(o.trivial_multiplier);
                    v["unstable_multipliers"] = json!(o.unstable_multipliers());
                    v["residual"] = num(o.residual);
                    v["amplitude"] = num(o.amplitude);
                    v["iterations"] = json!(o.iterations);
                    v
                }
                Err(e) => {
                    let mut v = base;
                    v["status"] = json!("failed");
                    v["error"] = json!(e.to_string());
                    v
                }
            }
        })
        .collect();
    let ids: Vec<usize> = {
        let mut ids: Vec<usize> = table.rows.iter().map(|r| r.orbit_id).collect();
        ids.dedup();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let ratios: Vec<Value> = ids
        .iter()
        .map(|&id| {
            let opt = |v: Vec<Option<f64>>| v.into_iter().map(|x| num(x.unwrap_or(f64::NAN))).collect::<Vec<_>>();
            json!({
                "orbit_id": id,
                "distance_ratios": opt(table.distance_ratios(id)),
                "amplitude_ratios": opt(table.amplitude_ratios(id)),
            })
        })
        .collect();
    json!({ "eps": table.eps, "rows": rows, "ratios": ratios })
}

pub fn verify(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let (rf, fam) = configured_family(&cfg)?;
    if cfg.predict.order != natural_order(&fam) {
        return Err(CliError::Input(format!(
            "verify uses averaging order {} for this family",
            natural_order(&fam)
        )));
    }
    let opts = cfg.solve_options();
    let vopts = cfg.verify_options();
    let eps = &cfg.verify.eps;
    let smallest = *eps.last().expect("eps list is non-empty");
    let count = count_limit_cycles(&fam, smallest, &opts, &vopts).map_err(verify_err)?;
    let table = continuation_sweep(&fam, eps, &count.zeros, &vopts).map_err(verify_err)?;

    let dir = prepare_out(&cfg)?;
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| {
            let o = row.outcome.as_ref().ok();
            vec![
                fmt_float(row.eps),
                row.orbit_id.to_string(),
                opt(o.map(|o| o.period)),
                opt(o.map(|o| o.pullback.0)),
                opt(o.map(|o| o.pullback.1)),
                opt(row.distance()),
                opt(o.map(|o| o.multipliers[0].norm())),
                opt(o.map(|o| o.multipliers[1].norm())),
            ]
        })
        .collect();
    write_csv(
        &dir.join("sweep.csv"),
        &["eps", "orbit_id", "period", "pullback_r", "pullback_w", "dist_to_prediction", "mult1_abs", "mult2_abs"],
        &rows,
    )?;

    let unverified: Vec<usize> = table
        .rows
        .iter()
        .filter(|r| r.eps == smallest && r.outcome.is_err())
        .map(|r| r.orbit_id)
        .collect();
    let ok = !count.mismatch() && unverified.is_empty();
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "config": config_json(&cfg),
        "family_id": rf.id(),
        "order": cfg.predict.order,
        "theta_reversed": false,
        "predicted_cycles": count.predicted,
        "zeros": count.zeros.iter().map(zero_json).collect::<Vec<_>>(),
        "count": {
            "eps": count.eps,
            "predicted": count.predicted,
            "verified": count.verified(),
            "failures": count.failures.iter().map(|(i, e)| json!({ "orbit_id": i, "error": e.to_string() })).collect::<Vec<_>>(),
        },
        "sweep": sweep_json(&table),
        "status": if ok { "verified" } else { "mismatch" },
    });
    write_file(&dir.join("report.json"), &to_json(&report))?;
    emit_json(cli, &report);

    say(
        cli,
        &format!(
            "{}: {} predicted, {} verified at eps = {}",
            rf.id(),
            count.predicted,
            count.verified(),
            fmt_float(smallest)
        ),
    );
    for row in &table.rows {
        let line = match &row.outcome {
            Ok(o) => format!(
                "  eps = {}  orbit {}  period = {}  |m| = {}, {}",
                fmt_float(row.eps),
                row.orbit_id,
                fmt_float(o.period),
                fmt_float(o.multipliers[0].norm()),
                fmt_float(o.multipliers[1].norm())
            ),
            Err(e) => format!("  eps = {}  orbit {}  failed: {e}", fmt_float(row.eps), row.orbit_id),
        };
        say(cli, &line);
    }
    say(cli, &format!("reports written to {}", dir.display()));
    if ok {
        Ok(())
    } else {
        let detail = count
            .failures
            .iter()
            .map(|(i, e)| format!("orbit {i}: {e}"))
            .collect::<Vec<_>>()
            .join("; ");
        Err(CliError::Mismatch(format!(
            "{} of {} predicted cycles verified at eps = {smallest}{}{detail}",
            count.verified(),
            count.predicted,
            if detail.is_empty() { "" } else { ": " }
        )))
    }
}

struct Cell {
    zeta0: f64,
    zeta2: f64,
    alpha2: f64,
    outcome: Result<usize, String>,
}

pub fn scan(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let s = &cfg.scan;
    if s.zeta0.is_empty() || s.zeta2.is_empty() || s.alpha2.is_empty() {
        return Err(CliError::Input("scan grid is empty".into()));
    }
    let (id, base) = match &cfg.family {
        None => ("p_minus benchmark".to_string(), p_bench()),
        Some(ResolvedFamily::PMinus { id, c }) => (id.clone(), p_family(c, hopfforge::Branch::Minus)),
        Some(ResolvedFamily::PPlus { id, c }) => (id.clone(), p_family(c, hopfforge::Branch::Plus)),
        Some(ResolvedFamily::Origin { .. }) => {
            return Err(CliError::Input("scan needs a p_minus or p_plus family".into()))
        }
    };
    let opts = SolveOptions {
        grid: s.grid,
        seeds: s.seeds,
        ..cfg.solve_options()
    };
    let mut points = Vec::new();
    for &zeta0 in &s.zeta0 {
        for &alpha2 in &s.alpha2 {
            for &zeta2 in &s.zeta2 {
                points.push((zeta0, zeta2, alpha2));
            }
        }
    }
    let cells: Vec<Cell> = points
        .par_iter()
        .map(|&(zeta0, zeta2, alpha2)| {
            let f = PerturbationPMinus { zeta0, alpha2, ..base };
            let outcome = match f.validate() {
                Err(e) => Err(e.to_string()),
                Ok(()) => predict_cycle_count(&f, Some(zeta2), &opts).map(|p| p.count).map_err(|e| e.to_string()),
            };
            Cell { zeta0, zeta2, alpha2, outcome }
        })
        .collect();

    let dir = prepare_out(&cfg)?;
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            let (status, count) = match &c.outcome {
                Ok(n) => ("ok".to_string(), n.to_string()),
                Err(_) => ("invalid".to_string(), String::new()),
            };
            vec![id.clone(), fmt_float(c.zeta0), fmt_float(c.zeta2), fmt_float(c.alpha2), status, count]
        })
        .collect();
    write_csv(&dir.join("scan.csv"), &["family_id", "zeta0", "zeta2", "alpha2", "status", "count"], &rows)?;

    let mut histogram = std::collections::BTreeMap::<String, usize>::new();
    for c in &cells {
        let key = c.outcome.as_ref().map(|n| n.to_string()).unwrap_or_else(|_| "invalid".into());
        *histogram.entry(key).or_default() += 1;
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "scan",
        "config": config_json(&cfg),
        "family_id": id,
        "order": 2,
        "theta_reversed": false,
        "cells": cells.iter().map(|c| {
            let mut v = json!({ "zeta0": c.zeta0, "zeta2": c.zeta2, "alpha2": c.alpha2 });
            match &c.outcome {
                Ok(n) => { v["status"] = json!("ok"); v["count"] = json!(n); }
                Err(e) => { v["status"] = json!("invalid"); v["error"] = json!(e); }
            }
            v
        }).collect::<Vec<_>>(),
        "histogram": histogram,
    });
    write_file(&dir.join("report.json"), &to_json(&report))?;
    emit_json(cli, &report);
    say(cli, &format!("{}: {} cells", id, cells.len()));
    for (k, n) in &histogram {
        say(cli, &format!("  count {k}: {n} cell(s)"));
    }
    say(cli, &format!("reports written to {}", dir.display()));
    Ok(())
}
