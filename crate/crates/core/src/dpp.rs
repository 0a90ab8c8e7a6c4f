//! Checkers for the weak Dynamic Programming Principle and for the
//! one-sided subsolution inequalities.
//!
//! The DPP check compares `V[v_{T+h}]` against `V[ζ_{h,T}]` (resp.
//! `V[w_λ]` against `V[ξ_{h,λ}]`) in sup norm over a finite grid. Reports
//! carry grid evidence only; they never claim the quantified statement
//! itself.

use std::collections::BTreeMap;

use crate::model::Model;
use crate::payoff::Payoff;
use crate::valuemap::{ValueFunction, ValueMapHandle};
use crate::{Error, Result};

/// Deviations above this are reported as genuine violations; below it they
/// count as floating-point noise around an exact identity.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cesaro,
    Abel,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Cesaro => "cesaro",
            Family::Abel => "abel",
        }
    }
}

/// One grid cell: `param` is the horizon `T` (as a float) for the Cesàro
/// family and the discount rate `λ` for the Abel family.
#[derive(Debug, Clone, Copy)]
pub struct DppCell {
    pub h: u64,
    pub param: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct DppReport {
    pub family: Family,
    pub cells: Vec<DppCell>,
    /// `V[v_T]` at the largest `T` (resp. `V[w_λ]` at the smallest `λ`) of
    /// the grid — the report's limit estimate for the base family.
    pub limit_estimate: ValueFunction,
}

impl DppReport {
    pub fn max_deviation(&self) -> f64 {
        self.cells.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    /// Grid-evidence form of the ε/N quantifier: do all cells beyond the
    /// threshold `N` deviate by less than `eps`?
    pub fn verdict_at(&self, eps: f64, n: u64) -> bool {
        self.cells
            .iter()
            .filter(|c| match self.family {
                Family::Cesaro => c.h > n && c.param > n as f64,
                Family::Abel => c.h > n && c.param < 1.0 / n as f64,
            })
            .all(|c| c.deviation < eps)
    }

    pub fn violated(&self, threshold: f64) -> bool {
        self.max_deviation() > threshold
    }
}

fn check_grids(hs: &[u64], params_len: usize) -> Result<()> {
    if hs.is_empty() || params_len == 0 {
        return Err(Error::InvalidParam("grids must be non-empty".into()));
    }
    if hs.iter().any(|&h| h < 1) {
        return Err(Error::InvalidParam("h must be ≥ 1".into()));
    }
    Ok(())
}

/// Deviations `sup_ω |V[v_{T+h}](ω) - V[ζ_{h,T}](ω)|` over the grid.
pub fn check_dpp_cesaro(
    handle: &ValueMapHandle,
    hs: &[u64],
    ts: &[u64],
) -> Result<DppReport> {
    check_grids(hs, ts.len())?;
    if ts.iter().any(|&t| t < 1) {
        return Err(Error::InvalidParam("T must be ≥ 1".into()));
    }
    let mut cache: BTreeMap<u64, ValueFunction> = BTreeMap::new();
    let mut value_at = |t: u64, handle: &ValueMapHandle| -> Result<ValueFunction> {
        if let Some(v) = cache.get(&t) {
            return Ok(v.clone());
        }
        let v = handle.apply(&Payoff::Cesaro { horizon: t })?;
        cache.insert(t, v.clone());
        Ok(v)
    };

    let mut cells = Vec::new();
    for &h in hs {
        for &t in ts {
            let base = value_at(t, handle)?;
            let lhs = value_at(t + h, handle)?;
            let rhs = handle.apply(&Payoff::Zeta {
                h,
                horizon: t,
                value: base,
            })?;
            cells.push(DppCell {
                h,
                param: t as f64,
                deviation: lhs.sup_dist(&rhs),
            });
        }
    }
    let t_max = *ts.iter().max().expect("non-empty grid");
    let limit_estimate = value_at(t_max, handle)?;
    Ok(DppReport {
        family: Family::Cesaro,
        cells,
        limit_estimate,
    })
}

/// Deviations `sup_ω |V[w_λ](ω) - V[ξ_{h,λ}](ω)|` over the grid.
pub fn check_dpp_abel(
    handle: &ValueMapHandle,
    hs: &[u64],
    lambdas: &[f64],
) -> Result<DppReport> {
    check_grids(hs, lambdas.len())?;
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParam("lambda must be > 0".into()));
    }
    let mut cells = Vec::new();
    let mut limit: Option<(f64, ValueFunction)> = None;
    for &lambda in lambdas {
        let base = handle.apply(&Payoff::Abel { lambda })?;
        for &h in hs {
            let rhs = handle.apply(&Payoff::Xi {
                h,
                lambda,
                value: base.clone(),
            })?;
            cells.push(DppCell {
                h,
                param: lambda,
                deviation: base.sup_dist(&rhs),
            });
        }
        if limit.as_ref().map_or(true, |(l, _)| lambda < *l) {
            limit = Some((lambda, base));
        }
    }
    Ok(DppReport {
        family: Family::Abel,
        cells,
        limit_estimate: limit.expect("non-empty grid").1,
    })
}

/// Per-`n` minimum slack of a subsolution inequality.
#[derive(Debug, Clone, Copy)]
pub struct SubsolutionCell {
    pub n: u64,
    pub min_slack: f64,
}

#[derive(Debug, Clone)]
pub struct SubsolutionReport {
    pub family: Family,
    /// `T` for the Cesàro family, `λ` for the Abel family.
    pub param: f64,
    pub cells: Vec<SubsolutionCell>,
}

impl SubsolutionReport {
    pub fn min_slack(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.min_slack)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.min_slack() >= -tol
    }
}

/// Slack of `V_best[v_{T+n}](ω) ≥ sup_s [ (1/(T+n)) Σ_{t<n} g + (T/(T+n))
/// V_best[v_T](s[ω](n)) ]`, per state; the right-hand side is the exact
/// n-step DP over walks.
pub fn check_subsolution_cesaro(
    model: &Model,
    horizon: u64,
    ns: &[u64],
) -> Result<SubsolutionReport> {
    if ns.is_empty() || ns.iter().any(|&n| n < 1) {
        return Err(Error::InvalidParam("n grid must be non-empty with n ≥ 1".into()));
    }
    let handle = ValueMapHandle::Best(model);
    let base = handle.apply(&Payoff::Cesaro { horizon })?;
    let mut cells = Vec::new();
    for &n in ns {
        let lhs = handle.apply(&Payoff::Cesaro { horizon: horizon + n })?;
        let rhs = handle.apply(&Payoff::Zeta {
            h: n,
            horizon,
            value: base.clone(),
        })?;
        cells.push(SubsolutionCell {
            n,
            min_slack: lhs.min_diff(&rhs),
        });
    }
    Ok(SubsolutionReport {
        family: Family::Cesaro,
        param: horizon as f64,
        cells,
    })
}

/// Slack of `V_best[w_λ](ω) ≥ sup_s [ λ∫_0^n e^{-λt} g dt + e^{-λn}
/// V_best[w_λ](s[ω](n)) ]`, per state.
pub fn check_subsolution_abel(model: &Model, lambda: f64, ns: &[u64]) -> Result<SubsolutionReport> {
    if ns.is_empty() || ns.iter().any(|&n| n < 1) {
        return Err(Error::InvalidParam("n grid must be non-empty with n ≥ 1".into()));
    }
    let handle = ValueMapHandle::Best(model);
    let base = handle.apply(&Payoff::Abel { lambda })?;
    let mut cells = Vec::new();
    for &n in ns {
        let rhs = handle.apply(&Payoff::Xi {
            h: n,
            lambda,
            value: base.clone(),
        })?;
        cells.push(SubsolutionCell {
            n,
            min_slack: base.min_diff(&rhs),
        });
    }
    Ok(SubsolutionReport {
        family: Family::Abel,
        param: lambda,
        cells,
    })
}
