//! Game value maps: per-strategy values `V_s`, the best value `V_best` as a
//! supremum over strategies or trajectories, alternating min-max game
//! values, and the max-mean-cycle limit oracle.
//!
//! Solvers are exact where cheap: finite-horizon Cesàro values come from a
//! direct dynamic program, one-player Abel values from policy iteration with
//! closed-form policy evaluation, and only the alternating Abel value falls
//! back to contraction value iteration with an explicit error bound.

use crate::meancycle;
use crate::model::{Model, Player, Strategy, TransitionSystem, TrajectoryBundle};
use crate::payoff::{abel, Payoff};
use crate::trajectory::State;
use crate::{Error, Result};

/// Sup-norm stopping threshold for alternating Abel value iteration; the
/// fixed-point error is bounded by `tol·x/(1-x)` with `x = e^{-λ}`.
pub const GAME_VI_TOL: f64 = 1e-12;

/// Minimal value gain that counts as a strict policy improvement. Keeps
/// policy iteration from cycling on floating-point ties; any analytic
/// improvement on desk-scale models exceeds this by many orders.
const IMPROVE_EPS: f64 = 1e-13;

/// Discount rate used to extract a mean-payoff-optimal stationary policy
/// from discounted policy iteration (Blackwell-style selection): small
/// enough that gain differences dominate bias terms on desk-scale models.
const BLACKWELL_LAMBDA: f64 = 1e-8;

/// A bounded map from states to reals, indexed like the model's state list.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(values: Vec<f64>) -> Self {
        ValueFunction { values }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ValueFunction {
            values: vec![c; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, s: State) -> f64 {
        self.values[s]
    }

    pub fn try_get(&self, s: State) -> Option<f64> {
        self.values.get(s).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `A·V + B`, pointwise.
    pub fn affine(&self, scale: f64, offset: f64) -> ValueFunction {
        ValueFunction {
            values: self.values.iter().map(|v| scale * v + offset).collect(),
        }
    }

    /// Sup-norm distance.
    pub fn sup_dist(&self, other: &ValueFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_ω (self - other)(ω)`, signed.
    pub fn sup_diff(&self, other: &ValueFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `inf_ω (self - other)(ω)`, signed.
    pub fn min_diff(&self, other: &ValueFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .fold(f64::INFINITY, f64::min)
    }
}

fn opt_successor_value(m: &TransitionSystem, s: State, values: &[f64]) -> f64 {
    let mut it = m.successors(s).iter().map(|&w| values[w]);
    let first = it.next().expect("validated model: non-empty successors");
    match m.owner(s) {
        Player::Max => it.fold(first, f64::max),
        Player::Min => it.fold(first, f64::min),
    }
}

fn ensure_valid(m: &TransitionSystem) -> Result<()> {
    let report = m.validate();
    if report.passed() {
        Ok(())
    } else {
        Err(Error::InvalidModel(report.violations.join("; ")))
    }
}

/// One backward step of the undiscounted sum DP: `acc'(ω) = g(ω) + opt acc`.
fn cesaro_dp_steps(m: &TransitionSystem, mut acc: Vec<f64>, steps: u64) -> Vec<f64> {
    for _ in 0..steps {
        let next: Vec<f64> = (0..m.n_states())
            .map(|s| m.cost(s) + opt_successor_value(m, s, &acc))
            .collect();
        acc = next;
    }
    acc
}

/// One backward step of the discounted DP:
/// `acc'(ω) = (1-x) g(ω) + x · opt acc` with `x = e^{-λ}`.
fn abel_dp_steps(m: &TransitionSystem, mut acc: Vec<f64>, lambda: f64, steps: u64) -> Vec<f64> {
    let x = (-lambda).exp();
    let one_minus_x = -(-lambda).exp_m1();
    for _ in 0..steps {
        let next: Vec<f64> = (0..m.n_states())
            .map(|s| one_minus_x * m.cost(s) + x * opt_successor_value(m, s, &acc))
            .collect();
        acc = next;
    }
    acc
}

/// `V_best[v_T]` (min-max over owners): `U_0 ≡ 0`,
/// `U_{k+1}(ω) = opt_{ω'} [g(ω) + U_k(ω')]`, value `U_T / T`.
pub fn value_best_cesaro(m: &TransitionSystem, horizon: u64) -> Result<ValueFunction> {
    if horizon < 1 {
        return Err(Error::InvalidParam("T must be ≥ 1".into()));
    }
    ensure_valid(m)?;
    let u = cesaro_dp_steps(m, vec![0.0; m.n_states()], horizon);
    Ok(ValueFunction::new(
        u.into_iter().map(|v| v / horizon as f64).collect(),
    ))
}

/// `V_best[ζ_{h,T}]`: maximize the h-step head plus the value tail;
/// computed as `M_h / (T+h)` with `M_0 = T·V`.
fn zeta_dp(m: &TransitionSystem, h: u64, horizon: u64, value: &ValueFunction) -> Result<ValueFunction> {
    if value.len() != m.n_states() {
        return Err(Error::InvalidParam(
            "value function domain does not match the model".into(),
        ));
    }
    ensure_valid(m)?;
    let seed: Vec<f64> = value.values().iter().map(|v| v * horizon as f64).collect();
    let acc = cesaro_dp_steps(m, seed, h);
    Ok(ValueFunction::new(
        acc.into_iter()
            .map(|v| v / (horizon + h) as f64)
            .collect(),
    ))
}

/// `V_best[ξ_{h,λ}]`: h discounted backward steps seeded with `V`.
fn xi_dp(m: &TransitionSystem, h: u64, lambda: f64, value: &ValueFunction) -> Result<ValueFunction> {
    if value.len() != m.n_states() {
        return Err(Error::InvalidParam(
            "value function domain does not match the model".into(),
        ));
    }
    ensure_valid(m)?;
    let acc = abel_dp_steps(m, value.values().to_vec(), lambda, h);
    Ok(ValueFunction::new(acc))
}

/// Exact policy iteration for the one-player discounted problem; returns the
/// value function and the optimal stationary policy. Policies are evaluated
/// through the closed-form Abel payoff of their eventually-periodic walks,
/// improvement ties break toward the lowest successor index.
pub(crate) fn abel_policy_iteration(
    m: &TransitionSystem,
    lambda: f64,
) -> Result<(ValueFunction, Vec<State>)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam("lambda must be > 0".into()));
    }
    if !m.is_one_player() {
        return Err(Error::Unsupported(
            "policy iteration requires a one-player model; use the game solver".into(),
        ));
    }
    ensure_valid(m)?;
    let n = m.n_states();
    let mut policy: Vec<State> = (0..n).map(|s| m.successors(s)[0]).collect();
    for _ in 0..10_000 {
        let strat = Strategy::Stationary(policy.clone());
        let mut values = Vec::with_capacity(n);
        for s in 0..n {
            values.push(abel(&strat.unroll(m, s)?, lambda, m.costs())?);
        }
        let mut improved = false;
        for s in 0..n {
            let succ = m.successors(s);
            let mut cand = succ[0];
            for &c in &succ[1..] {
                if values[c] > values[cand] {
                    cand = c;
                }
            }
            if values[cand] > values[policy[s]] + IMPROVE_EPS {
                policy[s] = cand;
                improved = true;
            }
        }
        if !improved {
            return Ok((ValueFunction::new(values), policy));
        }
    }
    Err(Error::Unsupported(
        "policy iteration did not converge within 10000 sweeps".into(),
    ))
}

/// `V_best[w_λ]` on one-player models, exact via policy iteration.
pub fn value_best_abel(m: &TransitionSystem, lambda: f64) -> Result<ValueFunction> {
    Ok(abel_policy_iteration(m, lambda)?.0)
}

/// Alternating discounted value by min-max value iteration; stops when
/// successive iterates differ at most [`GAME_VI_TOL`] in sup norm.
pub fn abel_value_iteration(m: &TransitionSystem, lambda: f64) -> Result<ValueFunction> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam("lambda must be > 0".into()));
    }
    ensure_valid(m)?;
    let mut acc = vec![0.0; m.n_states()];
    for _ in 0..50_000_000u64 {
        let next = abel_dp_steps(m, acc.clone(), lambda, 1);
        let diff = acc
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        acc = next;
        if diff <= GAME_VI_TOL {
            return Ok(ValueFunction::new(acc));
        }
    }
    Err(Error::Unsupported(
        "value iteration did not converge".into(),
    ))
}

/// `V_s[c](ω) = c(s[ω])`, evaluated exactly along the strategy's walks.
pub fn value_strategy(m: &TransitionSystem, s: &Strategy, p: &Payoff) -> Result<ValueFunction> {
    p.validate()?;
    s.validate_for(m)?;
    let mut values = Vec::with_capacity(m.n_states());
    for omega in 0..m.n_states() {
        values.push(p.eval(&s.unroll(m, omega)?, m.costs())?);
    }
    Ok(ValueFunction::new(values))
}

/// `V_best[c](ω) = max_{z ∈ 𝕂, z(0)=ω} c(z)` over an explicit bundle.
/// Every state must carry at least one trajectory so the value function is
/// total on the state space.
pub fn value_bundle(b: &TrajectoryBundle, p: &Payoff) -> Result<ValueFunction> {
    p.validate()?;
    let mut values = Vec::with_capacity(b.n_states());
    for omega in 0..b.n_states() {
        let mut best = f64::NEG_INFINITY;
        let mut seen = false;
        for z in b.trajectories_from(omega) {
            best = best.max(p.eval(z, b.costs())?);
            seen = true;
        }
        if !seen {
            return Err(Error::InvalidModel(format!(
                "Γ({}) empty: no trajectory starts at this state",
                b.id(omega)
            )));
        }
        values.push(best);
    }
    Ok(ValueFunction::new(values))
}

/// The limit-value oracle for one-player transition systems: the maximum
/// over reachable cycles of the cycle's mean cost.
pub fn mean_payoff_limit(m: &TransitionSystem) -> Result<ValueFunction> {
    Ok(ValueFunction::new(meancycle::max_mean_cycle_values(m)?))
}

/// Value map handles: which map `V: 𝔠 → 𝔘` to apply, bound to a model.
#[derive(Debug, Clone, Copy)]
pub enum ValueMapHandle<'a> {
    /// `V_best`, the supremum over strategies / trajectories.
    Best(&'a Model),
    /// The alternating min-max game value (value iteration for Abel).
    Game(&'a TransitionSystem),
    /// `V_s` for a fixed strategy.
    Strategy(&'a Model, &'a Strategy),
}

impl<'a> ValueMapHandle<'a> {
    pub fn n_states(&self) -> usize {
        match self {
            ValueMapHandle::Best(m) => m.n_states(),
            ValueMapHandle::Game(m) => m.n_states(),
            ValueMapHandle::Strategy(m, _) => m.n_states(),
        }
    }

    pub fn apply(&self, p: &Payoff) -> Result<ValueFunction> {
        p.validate()?;
        // Affine payoffs use the affine-equivariance axiom as the
        // implementation identity.
        if let Payoff::Affine {
            scale,
            offset,
            inner,
        } = p
        {
            return Ok(self.apply(inner)?.affine(*scale, *offset));
        }
        match self {
            ValueMapHandle::Best(Model::System(m)) => best_system(m, p),
            ValueMapHandle::Best(Model::Bundle(b)) => value_bundle(b, p),
            ValueMapHandle::Game(m) => game_system(m, p),
            ValueMapHandle::Strategy(model, s) => strategy_values(model, s, p),
        }
    }
}

pub fn apply_value_map(handle: &ValueMapHandle, p: &Payoff) -> Result<ValueFunction> {
    handle.apply(p)
}

fn best_system(m: &TransitionSystem, p: &Payoff) -> Result<ValueFunction> {
    match p {
        Payoff::Cesaro { horizon } => value_best_cesaro(m, *horizon),
        Payoff::Abel { lambda } => {
            if m.is_one_player() {
                value_best_abel(m, *lambda)
            } else {
                abel_value_iteration(m, *lambda)
            }
        }
        Payoff::Zeta { h, horizon, value } => zeta_dp(m, *h, *horizon, value),
        Payoff::Xi { h, lambda, value } => xi_dp(m, *h, *lambda, value),
        Payoff::Affine { .. } => unreachable!("affine handled by apply"),
    }
}

/// The alternating game value. Cesàro shares the exact min-max finite
/// horizon DP; Abel uses contraction value iteration.
pub fn value_game(m: &TransitionSystem, p: &Payoff) -> Result<ValueFunction> {
    game_system(m, p)
}

fn game_system(m: &TransitionSystem, p: &Payoff) -> Result<ValueFunction> {
    match p {
        Payoff::Cesaro { horizon } => value_best_cesaro(m, *horizon),
        Payoff::Abel { lambda } => abel_value_iteration(m, *lambda),
        Payoff::Zeta { h, horizon, value } => zeta_dp(m, *h, *horizon, value),
        Payoff::Xi { h, lambda, value } => xi_dp(m, *h, *lambda, value),
        Payoff::Affine { .. } => unreachable!("affine handled by apply"),
    }
}

fn strategy_values(model: &Model, s: &Strategy, p: &Payoff) -> Result<ValueFunction> {
    match model {
        Model::System(m) => value_strategy(m, s, p),
        Model::Bundle(b) => match s {
            Strategy::General(trajs) => {
                if trajs.len() != b.n_states() {
                    return Err(Error::InvalidStrategy(format!(
                        "selector covers {} states, bundle has {}",
                        trajs.len(),
                        b.n_states()
                    )));
                }
                let mut values = Vec::with_capacity(b.n_states());
                for (omega, z) in trajs.iter().enumerate() {
                    if z.state_at(0) != omega {
                        return Err(Error::InvalidStrategy(format!(
                            "selector at state {} starts elsewhere",
                            b.id(omega)
                        )));
                    }
                    values.push(p.eval(z, b.costs())?);
                }
                Ok(ValueFunction::new(values))
            }
            Strategy::Stationary(_) => Err(Error::Unsupported(
                "stationary strategies need a transition system; bundles take explicit selectors"
                    .into(),
            )),
        },
    }
}

/// A stationary policy whose walk from every state reaches and then follows
/// a maximum-mean cycle, so its Cesàro and Abel values converge to the
/// mean-payoff limit. Extracted by discounted policy iteration at a discount
/// small enough to order policies by gain (Blackwell-style selection).
pub fn greedy_mean_payoff_policy(m: &TransitionSystem) -> Result<Strategy> {
    let (_, policy) = abel_policy_iteration(m, BLACKWELL_LAMBDA)?;
    Ok(Strategy::Stationary(policy))
}
