//! Strongly connected components and max-mean-cycle values (Karp).
//!
//! Costs sit on states, so an edge `u -> v` carries weight `g(u)` and the
//! mean weight of a cycle equals the mean cost of its states.

use crate::model::TransitionSystem;
use crate::trajectory::State;
use crate::{Error, Result};

/// Tarjan's algorithm, iterative. Components are emitted sinks-first: every
/// component reachable from component `i` appears at an index `< i`.
pub fn strongly_connected_components(m: &TransitionSystem) -> Vec<Vec<State>> {
    const UNVISITED: usize = usize::MAX;
    let n = m.n_states();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<State> = Vec::new();
    let mut next_index = 0usize;
    let mut components = Vec::new();
    let mut call: Vec<(State, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.1 < m.successors(v).len() {
                let w = m.successors(v)[frame.1];
                frame.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(component);
                }
            }
        }
    }
    components
}

/// Karp's algorithm restricted to one strongly connected component.
/// Returns `None` when the component carries no cycle (a single state
/// without a self-loop).
fn max_mean_in_component(m: &TransitionSystem, component: &[State]) -> Option<f64> {
    let k = component.len();
    let mut local = vec![usize::MAX; m.n_states()];
    for (i, &v) in component.iter().enumerate() {
        local[v] = i;
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (i, &u) in component.iter().enumerate() {
        for &w in m.successors(u) {
            if local[w] != usize::MAX {
                edges.push((i, local[w], m.cost(u)));
            }
        }
    }
    if edges.is_empty() {
        return None;
    }

    // d[s][v] = max weight of an s-edge walk from the source to v.
    let mut d = vec![vec![f64::NEG_INFINITY; k]; k + 1];
    d[0][0] = 0.0;
    for s in 1..=k {
        for &(u, v, w) in &edges {
            if d[s - 1][u] > f64::NEG_INFINITY {
                let cand = d[s - 1][u] + w;
                if cand > d[s][v] {
                    d[s][v] = cand;
                }
            }
        }
    }

    let mut best = f64::NEG_INFINITY;
    for v in 0..k {
        if d[k][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for s in 0..k {
            if d[s][v] > f64::NEG_INFINITY {
                worst = worst.min((d[k][v] - d[s][v]) / (k - s) as f64);
            }
        }
        best = best.max(worst);
    }
    if best > f64::NEG_INFINITY {
        Some(best)
    } else {
        None
    }
}

/// For each state, the maximum over reachable cycles of the cycle's mean
/// cost. One-player models only.
pub fn max_mean_cycle_values(m: &TransitionSystem) -> Result<Vec<f64>> {
    if !m.is_one_player() {
        return Err(Error::Unsupported(
            "mean-payoff limit oracle requires a one-player model".into(),
        ));
    }
    let report = m.validate();
    if !report.passed() {
        return Err(Error::InvalidModel(report.violations.join("; ")));
    }

    let components = strongly_connected_components(m);
    let mut component_of = vec![usize::MAX; m.n_states()];
    for (ci, component) in components.iter().enumerate() {
        for &v in component {
            component_of[v] = ci;
        }
    }

    // Sinks-first emission order: successor components are already resolved.
    let mut best = Vec::with_capacity(components.len());
    for (ci, component) in components.iter().enumerate() {
        let mut b = max_mean_in_component(m, component).unwrap_or(f64::NEG_INFINITY);
        for &u in component {
            for &w in m.successors(u) {
                let cw = component_of[w];
                if cw != ci {
                    b = b.max(best[cw]);
                }
            }
        }
        best.push(b);
    }

    let values: Vec<f64> = (0..m.n_states()).map(|v| best[component_of[v]]).collect();
    if values.iter().any(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::InvalidModel(
            "some state cannot reach any cycle".into(),
        ));
    }
    Ok(values)
}
