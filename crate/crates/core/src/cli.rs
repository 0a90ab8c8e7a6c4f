//! Batch front door: parse a run configuration, load or build a model, run
//! the requested solver or checker, and emit a JSON or CSV report.
//!
//! Exit codes: 0 — the run's verdict passed (or the command has no verdict),
//! 2 — the check ran and failed, 1 — the input could not be processed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dpp::{
    check_dpp_abel, check_dpp_cesaro, check_subsolution_abel, check_subsolution_cesaro,
    DppReport, SubsolutionReport,
};
use crate::model::{Model, Strategy};
use crate::payoff::Payoff;
use crate::tauberian::{theorem2_report, Tolerances};
use crate::valuemap::{greedy_mean_payoff_policy, ValueFunction, ValueMapHandle};
use crate::zoo;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "uval",
    about = "Averaged-payoff value maps on finite transition systems: \
             evaluation, dynamic-programming checks, and convergence reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate value functions over parameter grids.
    Eval(EvalArgs),
    /// Compare split payoffs against base payoffs in sup norm.
    DppCheck(DppArgs),
    /// Check the one-sided dynamic-programming inequalities.
    SubsolutionCheck(SubsolutionArgs),
    /// Run the uniform-convergence / uniform-optimality equivalence report.
    Tauberian(TauberianArgs),
    /// List or build the named example models.
    Zoo(ZooArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Path to a model file (transition system or trajectory bundle).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Name of a catalog model (see `zoo list`).
    #[arg(long, value_name = "NAME", conflicts_with = "model")]
    pub zoo: Option<String>,
    /// Catalog model parameter, repeatable (`--param n=256`).
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
}

impl ModelArgs {
    pub fn load(&self) -> Result<(Model, String)> {
        match (&self.model, &self.zoo) {
            (Some(path), None) => {
                let m = Model::load(path)?;
                Ok((m, path.display().to_string()))
            }
            (None, Some(name)) => {
                let params = parse_params(&self.params)?;
                let m = zoo::build(name, &params)?;
                Ok((m, format!("zoo:{name}")))
            }
            _ => Err(Error::InvalidParam(
                "exactly one of --model and --zoo is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report file; stdout when omitted.
    #[arg(long, short = 'o', value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HandleKind {
    /// Supremum over strategies / trajectories.
    Best,
    /// Alternating min-max game value.
    Game,
    /// Value of a fixed strategy (requires --strategy).
    Strategy,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Horizon grid: comma list or generator `B*2^k,k<=K`.
    #[arg(long = "T-grid", value_name = "GRID")]
    pub t_grid: Option<String>,
    /// Discount-rate grid: comma list or generator `B*2^-k,k<=K`
    /// (`ln2` accepted as a value or base).
    #[arg(long = "lambda-grid", value_name = "GRID")]
    pub lambda_grid: Option<String>,
    #[arg(long, value_enum, default_value_t = HandleKind::Best)]
    pub handle: HandleKind,
    /// Strategy: `greedy-mean-payoff`, `first`, or comma-separated
    /// successor ids in state order.
    #[arg(long, value_name = "SPEC")]
    pub strategy: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DppArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Split-point grid.
    #[arg(long = "h-grid", value_name = "GRID", default_value = "1,2,5")]
    pub h_grid: String,
    #[arg(long = "T-grid", value_name = "GRID")]
    pub t_grid: Option<String>,
    #[arg(long = "lambda-grid", value_name = "GRID")]
    pub lambda_grid: Option<String>,
    #[arg(long, value_enum, default_value_t = HandleKind::Best)]
    pub handle: HandleKind,
    #[arg(long, value_name = "SPEC")]
    pub strategy: Option<String>,
    /// Deviations above this fail the check.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SubsolutionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Base horizons T; one report per value.
    #[arg(long = "T-grid", value_name = "GRID")]
    pub t_grid: Option<String>,
    /// Base discount rates λ; one report per value.
    #[arg(long = "lambda-grid", value_name = "GRID")]
    pub lambda_grid: Option<String>,
    /// Split depths n.
    #[arg(long = "n-grid", value_name = "GRID", default_value = "1,2,4,10")]
    pub n_grid: String,
    /// Slacks below -tol fail the check.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TauberianArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "T-grid", value_name = "GRID", default_value = "4*2^k,k<=12")]
    pub t_grid: String,
    #[arg(
        long = "lambda-grid",
        value_name = "GRID",
        default_value = "ln2*2^-k,k<=14"
    )]
    pub lambda_grid: String,
    #[arg(long, value_name = "SPEC", default_value = "greedy-mean-payoff")]
    pub strategy: String,
    /// Uniform-convergence tolerance; limits must coincide within 2·tol.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    #[command(subcommand)]
    pub action: ZooAction,
}

#[derive(Debug, Subcommand)]
pub enum ZooAction {
    /// List the catalog entries and their parameters.
    List,
    /// Emit a catalog model as a model file.
    Build {
        name: String,
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        #[arg(long, short = 'o', value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            Error::InvalidParam(format!("parameter '{item}' is not of the form k=v"))
        })?;
        let value = parse_number(v)?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

/// A plain float, or `ln2` / `2^-K`-style factors combined with `*`.
fn parse_number(token: &str) -> Result<f64> {
    let token = token.trim();
    let mut value = 1.0;
    for factor in token.split('*') {
        let factor = factor.trim();
        let part = if factor == "ln2" {
            std::f64::consts::LN_2
        } else if let Some(exp) = factor.strip_prefix("2^") {
            let e: i32 = exp
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad exponent in '{token}'")))?;
            2f64.powi(e)
        } else {
            factor
                .parse::<f64>()
                .map_err(|_| Error::InvalidParam(format!("'{token}' is not a number")))?
        };
        value *= part;
    }
    Ok(value)
}

/// Grids are comma lists of numbers, or generators `B*2^k,k<=K`
/// (ascending) / `B*2^-k,k<=K` (descending).
fn expand_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if let Some(bound) = parts.iter().find_map(|p| p.strip_prefix("k<=")) {
        if parts.len() != 2 {
            return Err(Error::InvalidParam(format!(
                "generator grid must be 'BASE*2^k,k<=K' or 'BASE*2^-k,k<=K', got '{spec}'"
            )));
        }
        let k_max: u32 = bound
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParam(format!("bad bound in '{spec}'")))?;
        let head = parts[0];
        let (base, sign) = if let Some(b) = head.strip_suffix("*2^-k") {
            (b, -1)
        } else if let Some(b) = head.strip_suffix("*2^k") {
            (b, 1)
        } else {
            return Err(Error::InvalidParam(format!(
                "generator grid must end in '*2^k' or '*2^-k', got '{spec}'"
            )));
        };
        let base = parse_number(base)?;
        return Ok((0..=k_max)
            .map(|k| base * 2f64.powi(sign * k as i32))
            .collect());
    }
    parts.iter().map(|p| parse_number(p)).collect()
}

pub fn parse_t_grid(spec: &str) -> Result<Vec<u64>> {
    let raw = expand_grid(spec)?;
    let mut out = Vec::with_capacity(raw.len());
    for v in raw {
        if v < 1.0 {
            return Err(Error::InvalidParam("T must be ≥ 1".into()));
        }
        if v.fract() != 0.0 || v > u64::MAX as f64 {
            return Err(Error::InvalidParam(format!("horizon {v} is not an integer")));
        }
        out.push(v as u64);
    }
    if out.is_empty() || !out.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParam(
            "T grid must be non-empty and strictly increasing".into(),
        ));
    }
    Ok(out)
}

pub fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>> {
    let out = expand_grid(spec)?;
    if out.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParam("lambda must be > 0".into()));
    }
    if out.is_empty() || !out.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::InvalidParam(
            "lambda grid must be non-empty and strictly decreasing".into(),
        ));
    }
    Ok(out)
}

fn parse_positive_int_list(spec: &str) -> Result<Vec<u64>> {
    let raw = expand_grid(spec)?;
    let mut out = Vec::with_capacity(raw.len());
    for v in raw {
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::InvalidParam(format!(
                "grid entry {v} is not a positive integer"
            )));
        }
        out.push(v as u64);
    }
    Ok(out)
}

pub fn parse_strategy(spec: &str, model: &Model) -> Result<Strategy> {
    let s = match spec {
        "greedy-mean-payoff" => greedy_mean_payoff_policy(model.as_system()?)?,
        "first" => match model {
            Model::System(m) => {
                Strategy::Stationary((0..m.n_states()).map(|s| m.successors(s)[0]).collect())
            }
            Model::Bundle(b) => {
                let mut trajs = Vec::with_capacity(b.n_states());
                for s in 0..b.n_states() {
                    let z = b.trajectories_from(s).next().ok_or_else(|| {
                        Error::InvalidStrategy(format!(
                            "Γ({}) empty: no trajectory to select at this state",
                            b.id(s)
                        ))
                    })?;
                    trajs.push(z.clone());
                }
                Strategy::General(trajs)
            }
        },
        literal => {
            let m = model.as_system()?;
            let choices = literal
                .split(',')
                .map(|id| {
                    m.index_of(id.trim()).ok_or_else(|| {
                        Error::InvalidStrategy(format!("unknown state id '{}'", id.trim()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Strategy::Stationary(choices)
        }
    };
    if let Model::System(m) = model {
        s.validate_for(m)?;
    }
    Ok(s)
}

fn make_handle<'a>(
    kind: HandleKind,
    model: &'a Model,
    strategy: &'a Option<Strategy>,
) -> Result<ValueMapHandle<'a>> {
    match kind {
        HandleKind::Best => Ok(ValueMapHandle::Best(model)),
        HandleKind::Game => Ok(ValueMapHandle::Game(model.as_system()?)),
        HandleKind::Strategy => {
            let s = strategy.as_ref().ok_or_else(|| {
                Error::InvalidStrategy("--handle strategy requires --strategy".into())
            })?;
            Ok(ValueMapHandle::Strategy(model, s))
        }
    }
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

fn values_by_id(model: &Model, v: &ValueFunction) -> BTreeMap<String, f64> {
    model
        .ids()
        .iter()
        .cloned()
        .zip(v.values().iter().copied())
        .collect()
}

fn emit(output: &OutputArgs, json: &serde_json::Value, csv: &str) -> Result<()> {
    let text = match output.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(json)?),
        Format::Csv => csv.to_string(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dpp_report_json(model: &Model, r: &DppReport) -> serde_json::Value {
    json!({
        "family": r.family.as_str(),
        "cells": r.cells.iter().map(|c| json!({
            "h": c.h,
            "param": c.param,
            "deviation": c.deviation,
        })).collect::<Vec<_>>(),
        "max_deviation": r.max_deviation(),
        "limit_estimate": values_by_id(model, &r.limit_estimate),
    })
}

fn subsolution_report_json(r: &SubsolutionReport) -> serde_json::Value {
    json!({
        "family": r.family.as_str(),
        "param": r.param,
        "cells": r.cells.iter().map(|c| json!({
            "n": c.n,
            "min_slack": c.min_slack,
        })).collect::<Vec<_>>(),
        "min_slack": r.min_slack(),
    })
}

// ---------------------------------------------------------------------------
// Command runners
// ---------------------------------------------------------------------------

pub fn run(cli: Cli) -> i32 {
    match try_run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn try_run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Eval(args) => run_eval(args),
        Command::DppCheck(args) => run_dpp_check(args),
        Command::SubsolutionCheck(args) => run_subsolution(args),
        Command::Tauberian(args) => run_tauberian(args),
        Command::Zoo(args) => run_zoo(args),
    }
}

fn run_eval(args: EvalArgs) -> Result<i32> {
    let (model, model_desc) = args.model.load()?;
    let report = model.validate();
    if !report.passed() {
        return Err(Error::InvalidModel(report.violations.join("; ")));
    }
    let strategy = args
        .strategy
        .as_deref()
        .map(|s| parse_strategy(s, &model))
        .transpose()?;
    let handle = make_handle(args.handle, &model, &strategy)?;

    let mut results = Vec::new();
    let mut csv = String::from("family,param,state,value\n");
    if args.t_grid.is_none() && args.lambda_grid.is_none() {
        return Err(Error::InvalidParam(
            "eval needs --T-grid and/or --lambda-grid".into(),
        ));
    }
    if let Some(spec) = &args.t_grid {
        for t in parse_t_grid(spec)? {
            let v = handle.apply(&Payoff::Cesaro { horizon: t })?;
            for (id, value) in values_by_id(&model, &v) {
                csv.push_str(&format!("cesaro,{t},{id},{value}\n"));
            }
            results.push(json!({
                "family": "cesaro",
                "param": t,
                "values": values_by_id(&model, &v),
            }));
        }
    }
    if let Some(spec) = &args.lambda_grid {
        for lambda in parse_lambda_grid(spec)? {
            let v = handle.apply(&Payoff::Abel { lambda })?;
            for (id, value) in values_by_id(&model, &v) {
                csv.push_str(&format!("abel,{lambda},{id},{value}\n"));
            }
            results.push(json!({
                "family": "abel",
                "param": lambda,
                "values": values_by_id(&model, &v),
            }));
        }
    }
    let doc = json!({
        "command": "eval",
        "model": model_desc,
        "results": results,
    });
    emit(&args.output, &doc, &csv)?;
    Ok(0)
}

fn run_dpp_check(args: DppArgs) -> Result<i32> {
    let (model, model_desc) = args.model.load()?;
    let strategy = args
        .strategy
        .as_deref()
        .map(|s| parse_strategy(s, &model))
        .transpose()?;
    let handle = make_handle(args.handle, &model, &strategy)?;
    let hs = parse_positive_int_list(&args.h_grid)?;
    if args.t_grid.is_none() && args.lambda_grid.is_none() {
        return Err(Error::InvalidParam(
            "dpp-check needs --T-grid and/or --lambda-grid".into(),
        ));
    }

    let mut reports = Vec::new();
    if let Some(spec) = &args.t_grid {
        reports.push(check_dpp_cesaro(&handle, &hs, &parse_t_grid(spec)?)?);
    }
    if let Some(spec) = &args.lambda_grid {
        reports.push(check_dpp_abel(&handle, &hs, &parse_lambda_grid(spec)?)?);
    }

    let mut csv = String::from("family,h,T_or_lambda,deviation\n");
    for r in &reports {
        for c in &r.cells {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.family.as_str(),
                c.h,
                c.param,
                c.deviation
            ));
        }
    }

    // With both families present the report also carries the separation of
    // the two limit estimates — distinct limits witness the failure's cause.
    let separation = if reports.len() == 2 {
        let d = reports[0].limit_estimate.sup_dist(&reports[1].limit_estimate);
        let per_state: BTreeMap<String, f64> = model
            .ids()
            .iter()
            .enumerate()
            .map(|(s, id)| {
                (
                    id.clone(),
                    (reports[0].limit_estimate.get(s) - reports[1].limit_estimate.get(s)).abs(),
                )
            })
            .collect();
        Some(json!({ "per_state": per_state, "max": d }))
    } else {
        None
    };

    let violated = reports.iter().any(|r| r.violated(args.tol));
    let doc = json!({
        "command": "dpp-check",
        "model": model_desc,
        "tol": args.tol,
        "reports": reports.iter().map(|r| dpp_report_json(&model, r)).collect::<Vec<_>>(),
        "limit_separation": separation,
        "violated": violated,
    });
    emit(&args.output, &doc, &csv)?;
    Ok(if violated { 2 } else { 0 })
}

fn run_subsolution(args: SubsolutionArgs) -> Result<i32> {
    let (model, model_desc) = args.model.load()?;
    let ns = parse_positive_int_list(&args.n_grid)?;
    if args.t_grid.is_none() && args.lambda_grid.is_none() {
        return Err(Error::InvalidParam(
            "subsolution-check needs --T-grid and/or --lambda-grid".into(),
        ));
    }
    let mut reports = Vec::new();
    if let Some(spec) = &args.t_grid {
        for t in parse_t_grid(spec)? {
            reports.push(check_subsolution_cesaro(&model, t, &ns)?);
        }
    }
    if let Some(spec) = &args.lambda_grid {
        for lambda in parse_lambda_grid(spec)? {
            reports.push(check_subsolution_abel(&model, lambda, &ns)?);
        }
    }

    let mut csv = String::from("family,param,n,min_slack\n");
    for r in &reports {
        for c in &r.cells {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.family.as_str(),
                r.param,
                c.n,
                c.min_slack
            ));
        }
    }
    let passed = reports.iter().all(|r| r.passes(args.tol));
    let doc = json!({
        "command": "subsolution-check",
        "model": model_desc,
        "tol": args.tol,
        "reports": reports.iter().map(subsolution_report_json).collect::<Vec<_>>(),
        "passed": passed,
    });
    emit(&args.output, &doc, &csv)?;
    Ok(if passed { 0 } else { 2 })
}

fn run_tauberian(args: TauberianArgs) -> Result<i32> {
    let (model, model_desc) = args.model.load()?;
    let strategy = parse_strategy(&args.strategy, &model)?;
    let ts = parse_t_grid(&args.t_grid)?;
    let lambdas = parse_lambda_grid(&args.lambda_grid)?;
    if !(args.tol > 0.0) {
        return Err(Error::InvalidParam("tolerance must be > 0".into()));
    }
    let tolerances = Tolerances {
        uniform: args.tol,
        coincide: 2.0 * args.tol,
        ..Tolerances::default()
    };
    let report = theorem2_report(&model, &strategy, &ts, &lambdas, tolerances)?;

    let mut csv = String::from("series,param,state_or_metric,value\n");
    for (grid, gaps, name) in [
        (&report.gap_cesaro.grid, &report.gap_cesaro.gaps, "gap_cesaro"),
        (&report.gap_abel.grid, &report.gap_abel.gaps, "gap_abel"),
    ] {
        for (p, g) in grid.iter().zip(gaps) {
            csv.push_str(&format!("{name},{p},sup_gap,{g}\n"));
        }
    }
    for (name, v) in [
        ("limit_best_cesaro", &report.limits.best_cesaro),
        ("limit_best_abel", &report.limits.best_abel),
        ("limit_strategy_cesaro", &report.limits.strategy_cesaro),
        ("limit_strategy_abel", &report.limits.strategy_abel),
    ] {
        for (id, value) in values_by_id(&model, v) {
            csv.push_str(&format!("{name},,{id},{value}\n"));
        }
    }

    let doc = json!({
        "command": "tauberian",
        "model": model_desc,
        "strategy": args.strategy,
        "verdicts": {
            "v": report.v_holds,
            "w": report.w_holds,
            "eq": report.eq_holds,
        },
        "dpp_ok": report.dpp_ok,
        "verdicts_consistent": report.verdicts_consistent,
        "limits": {
            "best_cesaro": values_by_id(&model, &report.limits.best_cesaro),
            "best_abel": values_by_id(&model, &report.limits.best_abel),
            "strategy_cesaro": values_by_id(&model, &report.limits.strategy_cesaro),
            "strategy_abel": values_by_id(&model, &report.limits.strategy_abel),
        },
        "pairwise_limit_distances": report.limits.pairwise_distances(),
        "gap_cesaro": { "grid": report.gap_cesaro.grid, "gaps": report.gap_cesaro.gaps },
        "gap_abel": { "grid": report.gap_abel.grid, "gaps": report.gap_abel.gaps },
        "cauchy_gaps": report.cauchy_gaps,
        "tolerances": {
            "uniform": tolerances.uniform,
            "coincide": tolerances.coincide,
            "exact": tolerances.exact,
            "violation": tolerances.violation,
        },
    });
    emit(&args.output, &doc, &csv)?;
    Ok(if report.all_pass() { 0 } else { 2 })
}

fn run_zoo(args: ZooArgs) -> Result<i32> {
    match args.action {
        ZooAction::List => {
            for entry in zoo::list() {
                let params = if entry.params.is_empty() {
                    String::new()
                } else {
                    format!(" [params: {}]", entry.params.join(", "))
                };
                println!("{:<12} {}{}", entry.name, entry.summary, params);
            }
            Ok(0)
        }
        ZooAction::Build { name, params, out } => {
            let params = parse_params(&params)?;
            let model = zoo::build(&name, &params)?;
            let text = format!("{}\n", model.to_json_string().trim_end());
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}
