//! Command dispatch. Build-phase failures (bad grid, unparseable
//! expressions, precondition violations visible from the config alone) are
//! config errors; failures while computing are numerical errors. Artifacts
//! are written as soon as they exist, so a failing contract check still
//! leaves its evidence on disk.

use crate::config::{CliError, CliResult, FunctionSpec, RunConfig};
use crate::plot::emit_plot;
use num_complex::Complex64;
use semikit_core::chernoff::{
    chernoff_iterate, exact_scheme, integral_scheme, scalar_chernoff, shift_scheme,
    verify_tangency, ChernoffScheme, DEFAULT_HERMITE_ORDER,
};
use semikit_core::grid::{GridFunction, SpatialGrid};
use semikit_core::operators::{
    ConstantSymbols, DenseOracle, EvolutionOracle, MultiplierOracle, OperatorCoefficients,
};
use semikit_core::quasifeynman::{remizov_exponential, SymmetricScheme};
use semikit_core::rates::{error_curve, fit_order, rate_csv, report_json, NormKind, DEFAULT_LADDER};
use semikit_core::resolvent::{
    elliptic_residual, resolvent_solve, QuadratureSpec, ResolventRequest, DEFAULT_ITERATIONS,
    DEFAULT_NODES_PER_PANEL, DEFAULT_PANELS, TRUNCATION_TOL,
};
use serde_json::{json, Value};
use std::path::Path;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn numerical_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn write_file(out_dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::write(out_dir.join(name), contents)
        .map_err(|e| config_err(format!("cannot write {name}: {e}")))
}

fn norm_kind(config: &RunConfig) -> CliResult<NormKind> {
    match config.norm.as_deref() {
        None | Some("sup") => Ok(NormKind::Sup),
        Some("l2") => Ok(NormKind::L2),
        Some(other) => Err(config_err(format!("norm: unknown kind '{other}'"))),
    }
}

fn measure(f: &GridFunction, kind: NormKind) -> f64 {
    match kind {
        NormKind::Sup => f.sup_norm(),
        NormKind::L2 => f.l2_norm(),
    }
}

fn realize_or_zero(
    spec: Option<&FunctionSpec>,
    grid: SpatialGrid,
    field: &str,
) -> CliResult<GridFunction> {
    match spec {
        Some(s) => s.realize(grid, field),
        None => Ok(GridFunction::zero(grid)),
    }
}

struct Operator {
    coeffs: OperatorCoefficients,
    /// Set when every coefficient is constant across the grid.
    symbols: Option<ConstantSymbols>,
}

fn constant_value(values: &[f64]) -> Option<f64> {
    let first = values[0];
    values
        .iter()
        .all(|v| (v - first).abs() <= 1e-12 * (1.0 + first.abs()))
        .then_some(first)
}

fn build_operator(config: &RunConfig, grid: SpatialGrid) -> CliResult<Operator> {
    let section = config.coefficients.as_ref();
    let a = realize_or_zero(section.and_then(|s| s.a.as_ref()), grid, "coefficients.a")?;
    let b = realize_or_zero(section.and_then(|s| s.b.as_ref()), grid, "coefficients.b")?;
    let c = realize_or_zero(section.and_then(|s| s.c.as_ref()), grid, "coefficients.c")?;
    let coeffs = OperatorCoefficients::new(&a, &b, &c)
        .map_err(|e| config_err(format!("coefficients: {e}")))?;
    let symbols = match (
        constant_value(coeffs.a()),
        constant_value(coeffs.b()),
        constant_value(coeffs.c()),
    ) {
        (Some(a0), Some(b0), Some(c0)) => ConstantSymbols::real(a0, b0, c0).ok(),
        _ => None,
    };
    Ok(Operator { coeffs, symbols })
}

fn build_scheme(config: &RunConfig, op: &Operator) -> CliResult<ChernoffScheme> {
    let section = config.scheme.as_ref();
    let kind = section.and_then(|s| s.kind.as_deref()).unwrap_or("shift");
    match kind {
        "shift" => shift_scheme(&op.coeffs).map_err(|e| config_err(format!("scheme: {e}"))),
        "integral" => {
            let order = section
                .and_then(|s| s.hermite_order)
                .unwrap_or(DEFAULT_HERMITE_ORDER);
            integral_scheme(&op.coeffs, order).map_err(|e| config_err(format!("scheme: {e}")))
        }
        "exact" => {
            let symbols = op.symbols.as_ref().ok_or_else(|| {
                config_err("scheme.kind: 'exact' requires constant coefficients")
            })?;
            exact_scheme(symbols).map_err(|e| config_err(format!("scheme: {e}")))
        }
        other => Err(config_err(format!("scheme.kind: unknown kind '{other}'"))),
    }
}

/// Grids above this size make the dense reference slower than the run itself.
const MAX_AUTO_DENSE: usize = 256;

fn pick_oracle(
    config: &RunConfig,
    op: &Operator,
) -> CliResult<Option<(&'static str, Box<dyn EvolutionOracle>)>> {
    let policy = config.oracle.as_deref().unwrap_or("auto");
    let n = op.coeffs.grid().n_points();
    let multiplier = || -> CliResult<Box<dyn EvolutionOracle>> {
        let symbols = op.symbols.as_ref().ok_or_else(|| {
            config_err("oracle: 'multiplier' requires constant coefficients")
        })?;
        Ok(Box::new(MultiplierOracle(*symbols)))
    };
    let dense = || -> CliResult<Box<dyn EvolutionOracle>> {
        DenseOracle::new(&op.coeffs, Complex64::from(1.0))
            .map(|o| Box::new(o) as Box<dyn EvolutionOracle>)
            .map_err(|e| config_err(format!("oracle: {e}")))
    };
    match policy {
        "none" => Ok(None),
        "multiplier" => Ok(Some(("multiplier", multiplier()?))),
        "dense" => Ok(Some(("dense", dense()?))),
        "auto" => {
            if op.symbols.is_some() {
                Ok(Some(("multiplier", multiplier()?)))
            } else if n <= MAX_AUTO_DENSE {
                Ok(Some(("dense", dense()?)))
            } else {
                Ok(None)
            }
        }
        other => Err(config_err(format!("oracle: unknown policy '{other}'"))),
    }
}

fn require_initial(config: &RunConfig, grid: SpatialGrid) -> CliResult<GridFunction> {
    config
        .initial
        .as_ref()
        .ok_or_else(|| config_err("initial: field is required for this command"))?
        .realize(grid, "initial")
}

fn require_time(config: &RunConfig) -> CliResult<(f64, usize)> {
    let section = config
        .time
        .as_ref()
        .ok_or_else(|| config_err("time: section is required for this command"))?;
    let n = section
        .n
        .ok_or_else(|| config_err("time.n: field is required for this command"))?;
    Ok((section.t, n))
}

pub fn execute(command: &str, config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    match command {
        "evolve" => evolve(config, out_dir),
        "schrodinger" => schrodinger(config, out_dir),
        "tangency" => tangency(config, out_dir),
        "rate" => rate(config, out_dir),
        "resolvent" => resolvent(config, out_dir),
        "scalar" => scalar(config, out_dir),
        other => Err(config_err(format!("unknown command '{other}'"))),
    }
}

fn evolve(config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    let grid = config.build_grid()?;
    let op = build_operator(config, grid)?;
    let scheme = build_scheme(config, &op)?;
    let u0 = require_initial(config, grid)?;
    let (t, n) = require_time(config)?;
    let kind = norm_kind(config)?;
    let oracle = pick_oracle(config, &op)?;

    let state = chernoff_iterate(&scheme, t, n, &u0).map_err(numerical_err)?;
    write_file(out_dir, "solution.csv", &state.to_csv())?;

    let mut results = json!({
        "t": t,
        "n": n,
        "scheme": scheme.label(),
        "norm": kind.to_string(),
        "oracle": "none",
        "outputs": ["solution.csv"],
    });
    if let Some((name, reference)) = oracle {
        let truth = reference.evolve(t, &u0).map_err(numerical_err)?;
        let err = measure(&state.try_sub(&truth).map_err(numerical_err)?, kind);
        results["oracle"] = json!(name);
        results["error_vs_oracle"] = json!(err);
    }
    Ok(results)
}

fn schrodinger(config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    let grid = config.build_grid()?;
    let potential = config
        .potential
        .as_ref()
        .ok_or_else(|| config_err("potential: field is required for schrodinger"))?
        .realize(grid, "potential")?;
    let (t, n) = require_time(config)?;
    let weight = config.weight.unwrap_or(1.0);
    let tol = config.series_tolerance();
    let drift_tol = config.norm_drift_tolerance();
    let u0 = require_initial(config, grid)?;
    let s = SymmetricScheme::strang_heat_potential(&potential)
        .map_err(|e| config_err(format!("potential: {e}")))?;

    let base = u0.l2_norm();
    if base == 0.0 {
        return Err(config_err("initial: zero data has no norm to preserve"));
    }
    let step = t / n as f64;
    let mut norms_csv = String::from("step,l2\n");
    norms_csv.push_str(&format!("0,{base:.17e}\n"));
    let mut state = u0;
    let mut drift = 0.0f64;
    for k in 1..=n {
        state = remizov_exponential(&s, step, weight, &state, tol).map_err(numerical_err)?;
        let norm = state.l2_norm();
        norms_csv.push_str(&format!("{k},{norm:.17e}\n"));
        drift = drift.max((norm - base).abs() / base);
    }
    write_file(out_dir, "solution.csv", &state.to_csv())?;
    write_file(out_dir, "norms.csv", &norms_csv)?;
    if drift > drift_tol {
        return Err(CliError::Numerical(format!(
            "norm drift {drift:.3e} exceeds tolerance {drift_tol:.3e}"
        )));
    }
    Ok(json!({
        "t": t,
        "n": n,
        "weight": weight,
        "series_tolerance": tol,
        "norm_drift": drift,
        "norm_drift_tolerance": drift_tol,
        "outputs": ["solution.csv", "norms.csv"],
    }))
}

fn tangency(config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    let grid = config.build_grid()?;
    let op = build_operator(config, grid)?;
    let scheme = build_scheme(config, &op)?;
    let f = require_initial(config, grid)?;
    let ts: Vec<f64> = match &config.ts {
        Some(ts) => ts.clone(),
        // default decade sweep 1e-4 .. 1e-1
        None => (0..10)
            .map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 9.0))
            .collect(),
    };

    let report = verify_tangency(&scheme, &op.coeffs, &f, &ts).map_err(numerical_err)?;
    let mut csv = String::from("t,residual\n");
    for &(t, r) in &report.residuals {
        csv.push_str(&format!("{t:.17e},{r:.17e}\n"));
    }
    write_file(out_dir, "residuals.csv", &csv)?;
    let svg = emit_plot(&report.residuals, None)?;
    write_file(out_dir, "plot.svg", &svg)?;
    Ok(json!({
        "scheme": scheme.label(),
        "order": report.fitted_order,
        "degenerate": report.degenerate,
        "outputs": ["residuals.csv", "plot.svg"],
    }))
}

fn rate(config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    let grid = config.build_grid()?;
    let op = build_operator(config, grid)?;
    let scheme = build_scheme(config, &op)?;
    let u0 = require_initial(config, grid)?;
    let t = config
        .time
        .as_ref()
        .ok_or_else(|| config_err("time: section is required for rate"))?
        .t;
    let ns = config.ns.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
    let kind = norm_kind(config)?;
    let (oracle_name, reference) = pick_oracle(config, &op)?.ok_or_else(|| {
        config_err("oracle: rate needs a reference; grid too large for 'auto' dense fallback")
    })?;

    let curve = error_curve(&scheme, reference.as_ref(), t, &ns, &u0, kind)
        .map_err(numerical_err)?;
    let report = fit_order(&curve);
    write_file(out_dir, "rate.csv", &rate_csv(&curve))?;
    let points: Vec<(f64, f64)> = curve
        .ns()
        .iter()
        .zip(curve.errors())
        .map(|(&n, &e)| (n as f64, e))
        .collect();
    let svg = emit_plot(&points, Some(curve.floor()))?;
    write_file(out_dir, "plot.svg", &svg)?;
    let mut results = report_json(&report);
    results["scheme"] = json!(scheme.label());
    results["oracle"] = json!(oracle_name);
    results["outputs"] = json!(["rate.csv", "plot.svg"]);
    Ok(results)
}

fn resolvent(config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    let grid = config.build_grid()?;
    let op = build_operator(config, grid)?;
    let scheme = build_scheme(config, &op)?;
    let lambda = config
        .lambda
        .as_ref()
        .ok_or_else(|| config_err("lambda: field is required for resolvent"))?
        .value()?;
    let g = config
        .rhs
        .as_ref()
        .ok_or_else(|| config_err("rhs: field is required for resolvent"))?
        .realize(grid, "rhs")?;

    let quad = config.quadrature.as_ref();
    let panels = quad.and_then(|q| q.panels).unwrap_or(DEFAULT_PANELS);
    let nodes = quad
        .and_then(|q| q.nodes_per_panel)
        .unwrap_or(DEFAULT_NODES_PER_PANEL);
    let iterations = quad.and_then(|q| q.iterations).unwrap_or(DEFAULT_ITERATIONS);
    let spec = match quad.and_then(|q| q.t_max) {
        Some(t_max) => QuadratureSpec::new(t_max, panels, nodes),
        None => QuadratureSpec::auto(lambda, scheme.growth_bound_hint())
            .and_then(|s| QuadratureSpec::new(s.t_max(), panels, nodes)),
    }
    .map_err(|e| config_err(format!("quadrature: {e}")))?;

    // both preconditions depend only on the config, so check them up front
    let gap = lambda.re - scheme.growth_bound_hint();
    if gap <= 0.0 {
        return Err(config_err(format!(
            "lambda: Re(lambda) = {} does not exceed the growth bound {}",
            lambda.re,
            scheme.growth_bound_hint()
        )));
    }
    let tail = (-gap * spec.t_max()).exp();
    if tail > TRUNCATION_TOL {
        return Err(config_err(format!(
            "quadrature.t_max: truncated tail {tail:.3e} exceeds {TRUNCATION_TOL:.1e}"
        )));
    }

    let req = ResolventRequest::new(lambda, g.clone(), iterations, spec)
        .map_err(|e| config_err(format!("resolvent request: {e}")))?;
    let f = resolvent_solve(&scheme, &req).map_err(numerical_err)?;
    write_file(out_dir, "solution.csv", &f.to_csv())?;
    let residual = elliptic_residual(&op.coeffs, lambda, &f, &g).map_err(numerical_err)?;
    Ok(json!({
        "lambda": {"re": lambda.re, "im": lambda.im},
        "t_max": spec.t_max(),
        "panels": panels,
        "nodes_per_panel": nodes,
        "iterations": iterations,
        "residual": residual,
        "scheme": scheme.label(),
        "outputs": ["solution.csv"],
    }))
}

fn scalar(config: &RunConfig, out_dir: &Path) -> CliResult<Value> {
    let section = config
        .scalar
        .as_ref()
        .ok_or_else(|| config_err("scalar: section is required for scalar"))?;
    if !(section.l.is_finite() && section.t.is_finite() && section.t >= 0.0) {
        return Err(config_err("scalar: l must be finite and t nonnegative"));
    }
    let ns = section
        .ns
        .clone()
        .unwrap_or_else(|| vec![10, 100, 1_000, 10_000, 100_000, 1_000_000]);
    if ns.is_empty() || ns.contains(&0) {
        return Err(config_err("scalar.ns: ladder must be nonempty and positive"));
    }
    let truth = (section.t * section.l).exp();
    let mut csv = String::from("n,error\n");
    let mut points = Vec::with_capacity(ns.len());
    for &n in &ns {
        let err = (scalar_chernoff(section.l, section.t, n) - truth).abs();
        csv.push_str(&format!("{n},{err:.17e}\n"));
        points.push((n as f64, err));
    }
    write_file(out_dir, "rate.csv", &csv)?;
    let svg = emit_plot(&points, None)?;
    write_file(out_dir, "plot.svg", &svg)?;
    Ok(json!({
        "l": section.l,
        "t": section.t,
        "target": truth,
        "final_error": points.last().map(|p| p.1),
        "outputs": ["rate.csv", "plot.svg"],
    }))
}
