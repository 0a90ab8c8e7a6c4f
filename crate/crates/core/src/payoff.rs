//! The payoff family: Cesàro averages `v_T`, Abel averages `w_λ`, the
//! split payoffs `ζ_{h,T}` and `ξ_{h,λ}` used by the Dynamic Programming
//! Principle, and affine images of any of these.
//!
//! All evaluations are exact closed forms over the preamble/cycle
//! decomposition of an eventually-periodic trajectory; no numeric
//! integration or truncation is involved.

use crate::trajectory::Trajectory;
use crate::valuemap::ValueFunction;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum Payoff {
    /// `v_T`: running cost averaged uniformly over `[0, T)`.
    Cesaro { horizon: u64 },
    /// `w_λ`: running cost averaged against the density `λ e^{-λt}`.
    Abel { lambda: f64 },
    /// `ζ_{h,T}`: Cesàro head on `[0, h)` plus a value-function tail.
    Zeta {
        h: u64,
        horizon: u64,
        value: ValueFunction,
    },
    /// `ξ_{h,λ}`: discounted head on `[0, h)` plus a discounted tail.
    Xi {
        h: u64,
        lambda: f64,
        value: ValueFunction,
    },
    /// `A·c + B` with `A ≥ 0`.
    Affine {
        scale: f64,
        offset: f64,
        inner: Box<Payoff>,
    },
}

impl Payoff {
    pub fn affine(scale: f64, offset: f64, inner: Payoff) -> Payoff {
        Payoff::Affine {
            scale,
            offset,
            inner: Box::new(inner),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Payoff::Cesaro { horizon } => {
                if *horizon < 1 {
                    return Err(Error::InvalidParam("T must be ≥ 1".into()));
                }
            }
            Payoff::Abel { lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::InvalidParam("lambda must be > 0".into()));
                }
            }
            Payoff::Zeta { h, horizon, .. } => {
                if *h < 1 {
                    return Err(Error::InvalidParam("h must be ≥ 1".into()));
                }
                if *horizon < 1 {
                    return Err(Error::InvalidParam("T must be ≥ 1".into()));
                }
            }
            Payoff::Xi { h, lambda, .. } => {
                if *h < 1 {
                    return Err(Error::InvalidParam("h must be ≥ 1".into()));
                }
                if !(*lambda > 0.0) {
                    return Err(Error::InvalidParam("lambda must be > 0".into()));
                }
            }
            Payoff::Affine { scale, inner, .. } => {
                if !(*scale >= 0.0) {
                    return Err(Error::InvalidParam("affine scale A must be ≥ 0".into()));
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// Exact evaluation of the payoff on a trajectory.
    pub fn eval(&self, z: &Trajectory, costs: &[f64]) -> Result<f64> {
        match self {
            Payoff::Cesaro { horizon } => cesaro(z, *horizon, costs),
            Payoff::Abel { lambda } => abel(z, *lambda, costs),
            Payoff::Zeta { h, horizon, value } => zeta_eval(z, *h, *horizon, value, costs),
            Payoff::Xi { h, lambda, value } => xi_eval(z, *h, *lambda, value, costs),
            Payoff::Affine {
                scale,
                offset,
                inner,
            } => Ok(scale * inner.eval(z, costs)? + offset),
        }
    }
}

/// Sum of `g(z(t))` for `t = 0 .. n-1`, in closed form from the
/// preamble/cycle decomposition.
pub fn cost_sum_prefix(z: &Trajectory, n: u64, costs: &[f64]) -> f64 {
    let p = z.preamble().len() as u64;
    let prefix = |states: &[crate::trajectory::State], k: u64| -> f64 {
        states[..k as usize].iter().map(|&s| costs[s]).sum()
    };
    if n <= p {
        return prefix(z.preamble(), n);
    }
    let q = z.cycle().len() as u64;
    let cycle_sum: f64 = z.cycle().iter().map(|&s| costs[s]).sum();
    let full = (n - p) / q;
    let rest = (n - p) % q;
    prefix(z.preamble(), p) + full as f64 * cycle_sum + prefix(z.cycle(), rest)
}

/// `v_T(z) = (1/T) Σ_{t<T} g(z(t))`.
pub fn cesaro(z: &Trajectory, horizon: u64, costs: &[f64]) -> Result<f64> {
    if horizon < 1 {
        return Err(Error::InvalidParam("T must be ≥ 1".into()));
    }
    Ok(cost_sum_prefix(z, horizon, costs) / horizon as f64)
}

/// `w_λ(z) = λ ∫_0^∞ e^{-λt} g(z(t)) dt`, which on the unit grid equals the
/// discretely discounted sum with factor `x = e^{-λ}` scaled by `1 - x`:
///
/// `w_λ = (1-x) [ Σ_{t<p} g_t x^t + x^p (Σ_{j<q} g_{p+j} x^j) / (1-x^q) ]`.
///
/// `1-x` and `1-x^q` go through `expm1` so tiny discounts keep full relative
/// accuracy.
pub fn abel(z: &Trajectory, lambda: f64, costs: &[f64]) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam("lambda must be > 0".into()));
    }
    let x = (-lambda).exp();
    let one_minus_x = -(-lambda).exp_m1();
    let p = z.preamble().len();
    let q = z.cycle().len();

    let mut xt = 1.0;
    let mut preamble_sum = 0.0;
    for &s in z.preamble() {
        preamble_sum += costs[s] * xt;
        xt *= x;
    }
    let mut xj = 1.0;
    let mut cycle_sum = 0.0;
    for &s in z.cycle() {
        cycle_sum += costs[s] * xj;
        xj *= x;
    }
    let xp = (-lambda * p as f64).exp();
    let one_minus_xq = -(-lambda * q as f64).exp_m1();
    Ok(one_minus_x * (preamble_sum + xp * cycle_sum / one_minus_xq))
}

fn tail_value(z: &Trajectory, h: u64, value: &ValueFunction) -> Result<f64> {
    let s = z.state_at(h);
    value.try_get(s).ok_or_else(|| {
        Error::InvalidParam(format!("value function does not cover state index {s}"))
    })
}

/// `ζ_{h,T}(z) = (1/(T+h)) Σ_{t<h} g(z(t)) + (T/(T+h)) V(z(h))`.
pub fn zeta_eval(
    z: &Trajectory,
    h: u64,
    horizon: u64,
    value: &ValueFunction,
    costs: &[f64],
) -> Result<f64> {
    if h < 1 {
        return Err(Error::InvalidParam("h must be ≥ 1".into()));
    }
    if horizon < 1 {
        return Err(Error::InvalidParam("T must be ≥ 1".into()));
    }
    let head = cost_sum_prefix(z, h, costs);
    let tail = tail_value(z, h, value)?;
    Ok((head + horizon as f64 * tail) / (horizon + h) as f64)
}

/// `ξ_{h,λ}(z) = λ ∫_0^h e^{-λt} g(z(t)) dt + e^{-λh} V(z(h))`, with unit
/// step weight `(e^{-λt} - e^{-λ(t+1)}) = (1-x) x^t`.
pub fn xi_eval(
    z: &Trajectory,
    h: u64,
    lambda: f64,
    value: &ValueFunction,
    costs: &[f64],
) -> Result<f64> {
    if h < 1 {
        return Err(Error::InvalidParam("h must be ≥ 1".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam("lambda must be > 0".into()));
    }
    let x = (-lambda).exp();
    let one_minus_x = -(-lambda).exp_m1();
    let mut xt = 1.0;
    let mut head = 0.0;
    for t in 0..h {
        head += one_minus_x * xt * costs[z.state_at(t)];
        xt *= x;
    }
    let tail = tail_value(z, h, value)?;
    Ok(head + xt * tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn traj(p: &[usize], c: &[usize]) -> Trajectory {
        Trajectory::new(p.to_vec(), c.to_vec()).unwrap()
    }

    /// Independent oracle: plain loop over the first `n` unit steps.
    fn cesaro_brute(z: &Trajectory, t: u64, costs: &[f64]) -> f64 {
        (0..t).map(|i| costs[z.state_at(i)]).sum::<f64>() / t as f64
    }

    /// Independent oracle: truncated discounted sum; tail bounded by x^n.
    fn abel_brute(z: &Trajectory, lambda: f64, costs: &[f64], n: u64) -> f64 {
        let x = (-lambda).exp();
        let mut acc = 0.0;
        let mut xt = 1.0;
        for t in 0..n {
            acc += (xt - xt * x) * costs[z.state_at(t)];
            xt *= x;
        }
        acc
    }

    #[test]
    fn cesaro_constant() {
        let z = Trajectory::constant(0);
        for t in [1, 2, 7, 1000] {
            assert_eq!(cesaro(&z, t, &[0.3]).unwrap(), 0.3);
        }
    }

    #[test]
    fn cesaro_two_cycle() {
        let costs = [0.0, 1.0];
        let z = traj(&[], &[0, 1]);
        assert_eq!(cesaro(&z, 2, &costs).unwrap(), 0.5);
        assert_eq!(cesaro(&z, 3, &costs).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn cesaro_rejects_zero_horizon() {
        assert!(cesaro(&Trajectory::constant(0), 0, &[0.0]).is_err());
    }

    #[test]
    fn abel_constant() {
        let z = Trajectory::constant(0);
        for lambda in [0.01, LN2, 3.0] {
            assert!((abel(&z, lambda, &[0.4]).unwrap() - 0.4).abs() < 1e-14);
        }
    }

    #[test]
    fn abel_two_cycle_half_discount() {
        // (1-x)·x/(1-x²) = x/(1+x) = 1/3 at x = 1/2.
        let costs = [0.0, 1.0];
        let z = traj(&[], &[0, 1]);
        let w = abel(&z, LN2, &costs).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-14);
        let brute = abel_brute(&z, LN2, &costs, 200);
        assert!((w - brute).abs() < 2.0_f64.powi(-190));
    }

    #[test]
    fn abel_single_unit_pulse() {
        // cost 1 on [0,1), 0 after: w = 1 - e^{-λ} = 1/2 at λ = ln 2.
        let costs = [1.0, 0.0];
        let z = traj(&[0], &[1]);
        let w = abel(&z, LN2, &costs).unwrap();
        assert!((w - 0.5).abs() < 1e-14);
        assert!((w - abel_brute(&z, LN2, &costs, 200)).abs() < 1e-14);
    }

    #[test]
    fn abel_rejects_nonpositive_lambda() {
        assert!(abel(&Trajectory::constant(0), 0.0, &[0.0]).is_err());
        assert!(abel(&Trajectory::constant(0), -1.0, &[0.0]).is_err());
    }

    #[test]
    fn zeta_trivial_split() {
        let costs = [1.0, 0.0];
        let z = traj(&[0], &[1]);
        let v = ValueFunction::constant(2, 0.0);
        assert_eq!(zeta_eval(&z, 1, 1, &v, &costs).unwrap(), 0.5);
    }

    #[test]
    fn zeta_large_head_matches_direct_formula() {
        let costs = [0.25, 0.75];
        let z = traj(&[], &[0, 1]);
        let k = 0.4;
        let v = ValueFunction::constant(2, k);
        for h in [1u64, 7, 100] {
            for t in [1u64, 3, 10] {
                let got = zeta_eval(&z, h, t, &v, &costs).unwrap();
                let head: f64 = (0..h).map(|i| costs[z.state_at(i)]).sum();
                let want = (head + t as f64 * k) / (t + h) as f64;
                assert!((got - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn xi_trivial_splits() {
        let costs = [1.0, 0.0];
        // g(z(0)) = 1, V ≡ 0: head only.
        let z = traj(&[0], &[1]);
        let v0 = ValueFunction::constant(2, 0.0);
        assert!((xi_eval(&z, 1, LN2, &v0, &costs).unwrap() - 0.5).abs() < 1e-15);
        // g(z(0)) = 0, V ≡ 1: tail only.
        let z = traj(&[1], &[1]);
        let v1 = ValueFunction::constant(2, 1.0);
        assert!((xi_eval(&z, 1, LN2, &v1, &costs).unwrap() - 0.5).abs() < 1e-15);
        // costs ≡ 1, V ≡ 1, h = 2: conservation, (1 - ¼) + ¼ = 1.
        let z = Trajectory::constant(0);
        assert!((xi_eval(&z, 2, LN2, &v1, &costs).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_eval() {
        let costs = [0.0, 1.0];
        let z = traj(&[], &[0, 1]);
        let base = Payoff::Cesaro { horizon: 2 };
        let id = Payoff::affine(1.0, 0.0, base.clone());
        assert_eq!(id.eval(&z, &costs).unwrap(), 0.5);
        let constant = Payoff::affine(0.0, 0.3, base.clone());
        assert_eq!(constant.eval(&z, &costs).unwrap(), 0.3);
        let scaled = Payoff::affine(2.0, 0.1, base);
        assert!((scaled.eval(&z, &costs).unwrap() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn affine_negative_scale_rejected() {
        let p = Payoff::affine(-1.0, 0.0, Payoff::Cesaro { horizon: 1 });
        assert!(p.validate().is_err());
    }

    fn arb_case() -> impl Strategy<Value = (Trajectory, Vec<f64>)> {
        (
            proptest::collection::vec(0usize..6, 0..8),
            proptest::collection::vec(0usize..6, 1..8),
            proptest::collection::vec(0.0f64..=1.0, 6),
        )
            .prop_map(|(p, c, costs)| (Trajectory::new(p, c).unwrap(), costs))
    }

    proptest! {
        #[test]
        fn averages_stay_in_unit_interval(
            (z, costs) in arb_case(),
            t in 1u64..500,
            lambda in 1e-3f64..4.0,
        ) {
            let v = cesaro(&z, t, &costs).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            let w = abel(&z, lambda, &costs).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&w));
        }

        #[test]
        fn closed_forms_match_brute_force(
            (z, costs) in arb_case(),
            t in 1u64..200,
            lambda in 0.05f64..4.0,
        ) {
            let v = cesaro(&z, t, &costs).unwrap();
            prop_assert!((v - cesaro_brute(&z, t, &costs)).abs() < 1e-12);
            let horizon = 400u64;
            let w = abel(&z, lambda, &costs).unwrap();
            let tail_bound = (-lambda * horizon as f64).exp();
            prop_assert!((w - abel_brute(&z, lambda, &costs, horizon)).abs() <= tail_bound + 1e-12);
        }

        #[test]
        fn both_families_limit_to_cycle_mean((z, costs) in arb_case()) {
            let mean = z.cycle_mean(&costs);
            prop_assert!((abel(&z, 1e-6, &costs).unwrap() - mean).abs() <= 1e-4);
            prop_assert!((cesaro(&z, 1_000_000, &costs).unwrap() - mean).abs() <= 1e-4);
        }
    }
}
