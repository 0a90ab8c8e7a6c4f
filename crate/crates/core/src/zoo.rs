//! Named example models: the small graphs used throughout the test suite,
//! the ladder family with non-uniform convergence, a trajectory bundle whose
//! Cesàro and Abel limits disagree, and seeded random transition systems.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Model, TrajectoryBundle, TransitionSystem};
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Catalog entry for a named builder.
#[derive(Debug, Clone, Copy)]
pub struct ZooEntry {
    pub name: &'static str,
    pub summary: &'static str,
    /// Accepted `--param` keys, with defaults applied when omitted.
    pub params: &'static [&'static str],
}

pub fn list() -> Vec<ZooEntry> {
    vec![
        ZooEntry {
            name: "constant",
            summary: "single state with a self-loop; every average equals the cost",
            params: &["c"],
        },
        ZooEntry {
            name: "two_cycle",
            summary: "two states of cost 0 and 1 alternating on a 2-cycle",
            params: &[],
        },
        ZooEntry {
            name: "graph_a",
            summary: "mean-0.5 cycle with an escape edge to a cost-0.9 self-loop",
            params: &[],
        },
        ZooEntry {
            name: "graph_b",
            summary: "cost-0 state that may stay or jump to an absorbing cost-1 state",
            params: &[],
        },
        ZooEntry {
            name: "ladder",
            summary: "chain of n cost-0 states feeding a cost-1 self-loop; \
                      values converge pointwise but not uniformly",
            params: &["n"],
        },
        ZooEntry {
            name: "oscillating",
            summary: "trajectory bundle of 0-blocks followed by equal 1-blocks; \
                      Cesàro and Abel limits disagree and the DPP fails",
            params: &["n"],
        },
        ZooEntry {
            name: "random",
            summary: "seeded random one-player system with grid costs",
            params: &["seed", "n_states", "out_degree", "resolution"],
        },
    ]
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn param_usize(params: &BTreeMap<String, f64>, key: &str, default: usize) -> Result<usize> {
    let v = param(params, key, default as f64);
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::InvalidParam(format!(
            "parameter '{key}' must be a small non-negative integer, got {v}"
        )));
    }
    Ok(v as usize)
}

fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidParam(format!(
                "unknown parameter '{key}' (accepted: {})",
                if allowed.is_empty() {
                    "none".to_string()
                } else {
                    allowed.join(", ")
                }
            )));
        }
    }
    Ok(())
}

/// Builds a catalog model by name.
pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<Model> {
    match name {
        "constant" => {
            check_keys(params, &["c"])?;
            Ok(Model::System(build_constant(param(params, "c", 0.5))?))
        }
        "two_cycle" => {
            check_keys(params, &[])?;
            Ok(Model::System(build_two_cycle()))
        }
        "graph_a" => {
            check_keys(params, &[])?;
            Ok(Model::System(build_graph_a()))
        }
        "graph_b" => {
            check_keys(params, &[])?;
            Ok(Model::System(build_graph_b()))
        }
        "ladder" => {
            check_keys(params, &["n"])?;
            Ok(Model::System(build_ladder(param_usize(params, "n", 10)?)?))
        }
        "oscillating" => {
            check_keys(params, &["n"])?;
            Ok(Model::Bundle(build_oscillating_bundle(param_usize(
                params, "n", 64,
            )?)?))
        }
        "random" => {
            check_keys(params, &["seed", "n_states", "out_degree", "resolution"])?;
            let seed = param_usize(params, "seed", 0)? as u64;
            let n = param_usize(params, "n_states", 8)?;
            let d = param_usize(params, "out_degree", 2)?;
            let resolution = param(params, "resolution", 1.0 / 16.0);
            Ok(Model::System(build_random_graph(seed, n, d, resolution)?))
        }
        other => Err(Error::InvalidParam(format!(
            "unknown zoo model '{other}' (try: {})",
            list()
                .iter()
                .map(|e| e.name)
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

pub fn build_constant(c: f64) -> Result<TransitionSystem> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParam(format!(
            "constant cost must lie in [0, 1], got {c}"
        )));
    }
    TransitionSystem::one_player(vec!["c".into()], vec![c], vec![vec![0]])
}

pub fn build_two_cycle() -> TransitionSystem {
    TransitionSystem::one_player(
        vec!["a".into(), "b".into()],
        vec![0.0, 1.0],
        vec![vec![1], vec![0]],
    )
    .expect("static model")
}

pub fn build_graph_a() -> TransitionSystem {
    TransitionSystem::one_player(
        vec!["a0".into(), "a1".into(), "a2".into()],
        vec![0.2, 0.8, 0.9],
        vec![vec![1, 2], vec![0], vec![2]],
    )
    .expect("static model")
}

pub fn build_graph_b() -> TransitionSystem {
    TransitionSystem::one_player(
        vec!["s0".into(), "s1".into()],
        vec![0.0, 1.0],
        vec![vec![0, 1], vec![1]],
    )
    .expect("static model")
}

/// `L_0` has cost 1 and a self-loop; `L_k` (k ≥ 1) has cost 0 and the single
/// edge to `L_{k-1}`. Values converge to 1 pointwise but reach only
/// `(T-k)/T` at horizon `T`, so convergence over the whole ladder is not
/// uniform for any fixed grid.
pub fn build_ladder(n: usize) -> Result<TransitionSystem> {
    if n < 1 {
        return Err(Error::InvalidParam("ladder length must be ≥ 1".into()));
    }
    let ids = (0..=n).map(|k| format!("L{k}")).collect();
    let mut costs = vec![0.0; n + 1];
    costs[0] = 1.0;
    let successors = (0..=n)
        .map(|k| if k == 0 { vec![0] } else { vec![k - 1] })
        .collect();
    TransitionSystem::one_player(ids, costs, successors)
}

/// Bundle over two states `w0` (cost 0) and `w1` (cost 1). From `w0` it
/// offers, for each block length `m ≤ n`, the trajectory that plays `m`
/// zeros then `m` ones and parks at `w0`; from `w1` the residual tails.
/// Long horizons can cash a half-and-half block (Cesàro value 1/2) while
/// any fixed discount weights the late ones block down (Abel value at
/// `λ = ln 2 / 2^k` tends to 1/4), so the two limits disagree and the
/// one-step dynamic programming identity fails by a constant.
pub fn build_oscillating_bundle(n: usize) -> Result<TrajectoryBundle> {
    if n < 1 {
        return Err(Error::InvalidParam("block bound must be ≥ 1".into()));
    }
    let mut trajectories = vec![Trajectory::constant(0)];
    for m in 1..=n {
        let mut preamble = vec![0; m];
        preamble.extend(std::iter::repeat(1).take(m));
        trajectories.push(Trajectory::new(preamble, vec![0])?);
        trajectories.push(Trajectory::new(vec![1; m], vec![0])?);
    }
    TrajectoryBundle::new(
        vec!["w0".into(), "w1".into()],
        vec![0.0, 1.0],
        vec![0, 1],
        trajectories,
        false,
    )
}

/// Seeded one-player system: costs drawn from the grid `{0, r, 2r, …, 1}`
/// with `r = resolution`, successor lists of up to `out_degree` distinct
/// targets. Deterministic in the seed.
pub fn build_random_graph(
    seed: u64,
    n_states: usize,
    out_degree: usize,
    resolution: f64,
) -> Result<TransitionSystem> {
    if n_states < 1 {
        return Err(Error::InvalidParam("n_states must be ≥ 1".into()));
    }
    if out_degree < 1 {
        return Err(Error::InvalidParam("out_degree must be ≥ 1".into()));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidParam(
            "resolution must lie in (0, 1]".into(),
        ));
    }
    let k = (1.0 / resolution).round().max(1.0) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = (0..n_states).map(|i| format!("s{i}")).collect();
    let costs = (0..n_states)
        .map(|_| rng.gen_range(0..=k) as f64 / k as f64)
        .collect();
    let successors = (0..n_states)
        .map(|_| {
            let mut succ: Vec<usize> =
                (0..out_degree).map(|_| rng.gen_range(0..n_states)).collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect();
    TransitionSystem::one_player(ids, costs, successors)
}
