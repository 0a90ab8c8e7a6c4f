//! Finite models of the dynamics: the state space with its running cost, a
//! concatenation-closed transition system, and explicit trajectory bundles
//! (which need not be closed under concatenation).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::trajectory::{State, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "MAX")]
    Max,
    #[serde(rename = "MIN")]
    Min,
}

/// Finite transition system: states carry costs in `[0, 1]` and a non-empty
/// ordered successor list. The induced trajectory set (all eventually
/// periodic walks) is closed under concatenation.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    ids: Vec<String>,
    costs: Vec<f64>,
    owners: Vec<Player>,
    successors: Vec<Vec<State>>,
}

impl TransitionSystem {
    pub fn new(
        ids: Vec<String>,
        costs: Vec<f64>,
        owners: Vec<Player>,
        successors: Vec<Vec<State>>,
    ) -> Result<Self> {
        if ids.len() != costs.len() || ids.len() != owners.len() || ids.len() != successors.len() {
            return Err(Error::InvalidModel(
                "state, cost, owner and successor lists must have equal length".into(),
            ));
        }
        if ids.is_empty() {
            return Err(Error::InvalidModel("state space must be non-empty".into()));
        }
        Ok(TransitionSystem {
            ids,
            costs,
            owners,
            successors,
        })
    }

    /// One-player shorthand: all states owned by MAX.
    pub fn one_player(
        ids: Vec<String>,
        costs: Vec<f64>,
        successors: Vec<Vec<State>>,
    ) -> Result<Self> {
        let owners = vec![Player::Max; ids.len()];
        Self::new(ids, costs, owners, successors)
    }

    pub fn n_states(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, s: State) -> &str {
        &self.ids[s]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, s: State) -> f64 {
        self.costs[s]
    }

    pub fn owner(&self, s: State) -> Player {
        self.owners[s]
    }

    pub fn successors(&self, s: State) -> &[State] {
        &self.successors[s]
    }

    pub fn index_of(&self, id: &str) -> Option<State> {
        self.ids.iter().position(|i| i == id)
    }

    pub fn is_one_player(&self) -> bool {
        self.owners.iter().all(|&o| o == Player::Max)
    }

    /// Returns a copy with costs replaced (same shape); used by monotonicity
    /// tests that compare pointwise-ordered cost streams.
    pub fn with_costs(&self, costs: Vec<f64>) -> Result<Self> {
        Self::new(self.ids.clone(), costs, self.owners.clone(), self.successors.clone())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for s in 0..self.n_states() {
            if self.successors[s].is_empty() {
                violations.push(format!("Γ({}) empty: state has no successor", self.ids[s]));
            }
            if !(0.0..=1.0).contains(&self.costs[s]) {
                violations.push(format!(
                    "cost out of range at {}: {}",
                    self.ids[s], self.costs[s]
                ));
            }
            for &t in &self.successors[s] {
                if t >= self.n_states() {
                    violations.push(format!(
                        "dangling successor index {} at state {}",
                        t, self.ids[s]
                    ));
                }
            }
        }
        ValidationReport { violations }
    }
}

/// Explicit finite trajectory set over a shared state space. Start states
/// are the states from which values are defined; the set carries a declared
/// (unchecked) concatenation-closure claim.
#[derive(Debug, Clone)]
pub struct TrajectoryBundle {
    ids: Vec<String>,
    costs: Vec<f64>,
    start_states: Vec<State>,
    trajectories: Vec<Trajectory>,
    claims_closure: bool,
}

impl TrajectoryBundle {
    pub fn new(
        ids: Vec<String>,
        costs: Vec<f64>,
        start_states: Vec<State>,
        trajectories: Vec<Trajectory>,
        claims_closure: bool,
    ) -> Result<Self> {
        if ids.len() != costs.len() {
            return Err(Error::InvalidModel(
                "state and cost lists must have equal length".into(),
            ));
        }
        if ids.is_empty() {
            return Err(Error::InvalidModel("state space must be non-empty".into()));
        }
        Ok(TrajectoryBundle {
            ids,
            costs,
            start_states,
            trajectories,
            claims_closure,
        })
    }

    pub fn n_states(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, s: State) -> &str {
        &self.ids[s]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn start_states(&self) -> &[State] {
        &self.start_states
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    /// Trajectories z with z(0) = state.
    pub fn trajectories_from(&self, state: State) -> impl Iterator<Item = &Trajectory> {
        self.trajectories
            .iter()
            .filter(move |z| z.state_at(0) == state)
    }

    pub fn claims_closure(&self) -> bool {
        self.claims_closure
    }

    pub fn index_of(&self, id: &str) -> Option<State> {
        self.ids.iter().position(|i| i == id)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for s in 0..self.n_states() {
            if !(0.0..=1.0).contains(&self.costs[s]) {
                violations.push(format!(
                    "cost out of range at {}: {}",
                    self.ids[s], self.costs[s]
                ));
            }
        }
        for z in &self.trajectories {
            if z.max_state() >= self.n_states() {
                violations.push(format!(
                    "dangling state index {} in a trajectory",
                    z.max_state()
                ));
            }
        }
        for &s in &self.start_states {
            if s >= self.n_states() {
                violations.push(format!("dangling start state index {}", s));
            } else if self.trajectories_from(s).next().is_none() {
                violations.push(format!(
                    "Γ({}) empty: start state has no trajectory",
                    self.ids[s]
                ));
            }
        }
        ValidationReport { violations }
    }
}

/// Either instantiation of the trajectory set.
#[derive(Debug, Clone)]
pub enum Model {
    System(TransitionSystem),
    Bundle(TrajectoryBundle),
}

impl Model {
    pub fn n_states(&self) -> usize {
        match self {
            Model::System(m) => m.n_states(),
            Model::Bundle(b) => b.n_states(),
        }
    }

    pub fn ids(&self) -> &[String] {
        match self {
            Model::System(m) => m.ids(),
            Model::Bundle(b) => b.ids(),
        }
    }

    pub fn costs(&self) -> &[f64] {
        match self {
            Model::System(m) => m.costs(),
            Model::Bundle(b) => b.costs(),
        }
    }

    pub fn index_of(&self, id: &str) -> Option<State> {
        match self {
            Model::System(m) => m.index_of(id),
            Model::Bundle(b) => b.index_of(id),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Model::System(m) => m.validate(),
            Model::Bundle(b) => b.validate(),
        }
    }

    pub fn as_system(&self) -> Result<&TransitionSystem> {
        match self {
            Model::System(m) => Ok(m),
            Model::Bundle(_) => Err(Error::Unsupported(
                "operation requires a transition system, got a trajectory bundle".into(),
            )),
        }
    }
}

/// Report-style validation outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_model(m: &Model) -> ValidationReport {
    m.validate()
}

/// A selector of trajectories: either a stationary successor choice or an
/// explicit trajectory per state.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Chosen successor per state; plays the induced walk.
    Stationary(Vec<State>),
    /// Explicit trajectory per state, with `s[ω](0) = ω`.
    General(Vec<Trajectory>),
}

impl Strategy {
    pub fn validate_for(&self, m: &TransitionSystem) -> Result<()> {
        match self {
            Strategy::Stationary(choice) => {
                if choice.len() != m.n_states() {
                    return Err(Error::InvalidStrategy(format!(
                        "stationary map covers {} states, model has {}",
                        choice.len(),
                        m.n_states()
                    )));
                }
                for (s, &c) in choice.iter().enumerate() {
                    if !m.successors(s).contains(&c) {
                        return Err(Error::InvalidStrategy(format!(
                            "choice {} at state {} is not a declared successor",
                            m.ids.get(c).map(String::as_str).unwrap_or("<dangling>"),
                            m.id(s)
                        )));
                    }
                }
                Ok(())
            }
            Strategy::General(trajs) => {
                if trajs.len() != m.n_states() {
                    return Err(Error::InvalidStrategy(format!(
                        "selector covers {} states, model has {}",
                        trajs.len(),
                        m.n_states()
                    )));
                }
                for (s, z) in trajs.iter().enumerate() {
                    if z.state_at(0) != s {
                        return Err(Error::InvalidStrategy(format!(
                            "selector at state {} starts at {}",
                            m.id(s),
                            m.id(z.state_at(0))
                        )));
                    }
                    if z.max_state() >= m.n_states() {
                        return Err(Error::InvalidStrategy(format!(
                            "selector at state {} references a dangling state index",
                            m.id(s)
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// The trajectory the strategy plays from `start`. Stationary strategies
    /// walk the successor map with visit-time cycle detection, so the result
    /// is the exact eventually-periodic walk.
    pub fn unroll(&self, m: &TransitionSystem, start: State) -> Result<Trajectory> {
        match self {
            Strategy::Stationary(choice) => {
                if start >= m.n_states() {
                    return Err(Error::InvalidStrategy(format!(
                        "start state index {start} out of range"
                    )));
                }
                let mut first_seen: Vec<Option<usize>> = vec![None; m.n_states()];
                let mut path = Vec::new();
                let mut cur = start;
                loop {
                    if let Some(t0) = first_seen[cur] {
                        let cycle = path.split_off(t0);
                        return Trajectory::new(path, cycle);
                    }
                    first_seen[cur] = Some(path.len());
                    path.push(cur);
                    cur = choice[cur];
                }
            }
            Strategy::General(trajs) => trajs
                .get(start)
                .cloned()
                .ok_or_else(|| Error::InvalidStrategy(format!("no trajectory for state {start}"))),
        }
    }
}

/// Checks the shift identity `s[ω](t+1) = s[s[ω](1)](t)` for all states.
/// On eventually-periodic trajectories the identity for all `t` reduces to
/// canonical equality of `shift(s[ω], 1)` and `s[s[ω](1)]`, so the check is
/// exact.
pub fn is_stationary_like(s: &Strategy, m: &TransitionSystem) -> Result<bool> {
    s.validate_for(m)?;
    for omega in 0..m.n_states() {
        let z = s.unroll(m, omega)?;
        let restarted = s.unroll(m, z.state_at(1))?;
        if z.shift(1) != restarted {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// File formats (strict JSON; unknown fields rejected)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    states: Vec<SystemStateDecl>,
    edges: Vec<(String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemStateDecl {
    id: String,
    cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    owner: Option<Player>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleFile {
    states: Vec<BundleStateDecl>,
    start_states: Vec<String>,
    trajectories: Vec<TrajectoryDecl>,
    #[serde(default)]
    claims_closure: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleStateDecl {
    id: String,
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDecl {
    preamble: Vec<String>,
    cycle: Vec<String>,
}

fn index_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Result<HashMap<String, State>> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.to_string(), i).is_some() {
            return Err(Error::InvalidModel(format!("duplicate state id '{id}'")));
        }
    }
    Ok(map)
}

fn resolve(map: &HashMap<String, State>, id: &str, ctx: &str) -> Result<State> {
    map.get(id)
        .copied()
        .ok_or_else(|| Error::InvalidModel(format!("unknown state id '{id}' in {ctx}")))
}

impl Model {
    /// Parses a model document; the file is a transition system when it has
    /// an `edges` field and a bundle when it has `trajectories`.
    pub fn from_json_str(text: &str) -> Result<Model> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidModel("model document must be a JSON object".into()))?;
        if obj.contains_key("edges") {
            let file: SystemFile = serde_json::from_value(value)?;
            let map = index_ids(file.states.iter().map(|s| s.id.as_str()))?;
            let n = file.states.len();
            let mut successors = vec![Vec::new(); n];
            for (from, to) in &file.edges {
                let f = resolve(&map, from, "edges")?;
                let t = resolve(&map, to, "edges")?;
                successors[f].push(t);
            }
            let m = TransitionSystem::new(
                file.states.iter().map(|s| s.id.clone()).collect(),
                file.states.iter().map(|s| s.cost).collect(),
                file.states
                    .iter()
                    .map(|s| s.owner.unwrap_or(Player::Max))
                    .collect(),
                successors,
            )?;
            Ok(Model::System(m))
        } else if obj.contains_key("trajectories") {
            let file: BundleFile = serde_json::from_value(value)?;
            let map = index_ids(file.states.iter().map(|s| s.id.as_str()))?;
            let mut trajectories = Vec::new();
            for decl in &file.trajectories {
                let preamble = decl
                    .preamble
                    .iter()
                    .map(|id| resolve(&map, id, "trajectories"))
                    .collect::<Result<Vec<_>>>()?;
                let cycle = decl
                    .cycle
                    .iter()
                    .map(|id| resolve(&map, id, "trajectories"))
                    .collect::<Result<Vec<_>>>()?;
                trajectories.push(Trajectory::new(preamble, cycle)?);
            }
            let start_states = file
                .start_states
                .iter()
                .map(|id| resolve(&map, id, "start_states"))
                .collect::<Result<Vec<_>>>()?;
            let b = TrajectoryBundle::new(
                file.states.iter().map(|s| s.id.clone()).collect(),
                file.states.iter().map(|s| s.cost).collect(),
                start_states,
                trajectories,
                file.claims_closure,
            )?;
            Ok(Model::Bundle(b))
        } else {
            Err(Error::InvalidModel(
                "model document needs either an 'edges' or a 'trajectories' field".into(),
            ))
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        Model::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        match self {
            Model::System(m) => {
                let mut edges = Vec::new();
                for s in 0..m.n_states() {
                    for &t in m.successors(s) {
                        edges.push((m.id(s).to_string(), m.id(t).to_string()));
                    }
                }
                let file = SystemFile {
                    states: (0..m.n_states())
                        .map(|s| SystemStateDecl {
                            id: m.id(s).to_string(),
                            cost: m.cost(s),
                            owner: match m.owner(s) {
                                Player::Max => None,
                                Player::Min => Some(Player::Min),
                            },
                        })
                        .collect(),
                    edges,
                };
                serde_json::to_string_pretty(&file).expect("serializable")
            }
            Model::Bundle(b) => {
                let file = BundleFile {
                    states: (0..b.n_states())
                        .map(|s| BundleStateDecl {
                            id: b.id(s).to_string(),
                            cost: b.costs()[s],
                        })
                        .collect(),
                    start_states: b
                        .start_states()
                        .iter()
                        .map(|&s| b.id(s).to_string())
                        .collect(),
                    trajectories: b
                        .trajectories()
                        .iter()
                        .map(|z| TrajectoryDecl {
                            preamble: z.preamble().iter().map(|&s| b.id(s).to_string()).collect(),
                            cycle: z.cycle().iter().map(|&s| b.id(s).to_string()).collect(),
                        })
                        .collect(),
                    claims_closure: b.claims_closure(),
                };
                serde_json::to_string_pretty(&file).expect("serializable")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_full() -> TransitionSystem {
        TransitionSystem::one_player(
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0],
            vec![vec![0, 1], vec![0, 1]],
        )
        .unwrap()
    }

    #[test]
    fn validate_passes_on_full_graph() {
        assert!(two_state_full().validate().passed());
    }

    #[test]
    fn validate_flags_empty_successors() {
        let m = TransitionSystem::one_player(
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0],
            vec![vec![1], vec![]],
        )
        .unwrap();
        let report = m.validate();
        assert!(!report.passed());
        assert!(report.violations[0].contains("empty"));
    }

    #[test]
    fn validate_flags_cost_out_of_range() {
        let m = TransitionSystem::one_player(vec!["a".into()], vec![1.5], vec![vec![0]]).unwrap();
        let report = m.validate();
        assert!(report.violations.iter().any(|v| v.contains("cost out of range")));
    }

    #[test]
    fn unroll_two_cycle() {
        let m = TransitionSystem::one_player(
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0],
            vec![vec![1], vec![0]],
        )
        .unwrap();
        let s = Strategy::Stationary(vec![1, 0]);
        let z = s.unroll(&m, 0).unwrap();
        assert_eq!(z.preamble(), &[] as &[State]);
        assert_eq!(z.cycle(), &[0, 1]);
    }

    #[test]
    fn unroll_absorbing() {
        let m = TransitionSystem::one_player(
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0],
            vec![vec![1], vec![1]],
        )
        .unwrap();
        let s = Strategy::Stationary(vec![1, 1]);
        let z = s.unroll(&m, 0).unwrap();
        assert_eq!(z.preamble(), &[0]);
        assert_eq!(z.cycle(), &[1]);
    }

    #[test]
    fn stationary_is_stationary_like() {
        let m = two_state_full();
        let s = Strategy::Stationary(vec![1, 0]);
        assert!(is_stationary_like(&s, &m).unwrap());
    }

    #[test]
    fn general_unroll_of_stationary_map_is_stationary_like() {
        let m = two_state_full();
        let st = Strategy::Stationary(vec![1, 0]);
        let trajs = (0..m.n_states())
            .map(|w| st.unroll(&m, w).unwrap())
            .collect();
        let s = Strategy::General(trajs);
        assert!(is_stationary_like(&s, &m).unwrap());
    }

    #[test]
    fn inconsistent_general_selector_is_not_stationary_like() {
        let m = two_state_full();
        // From a: a,b,b,... but restarted from b it plays b,a,a,...
        let s = Strategy::General(vec![
            Trajectory::new(vec![0], vec![1]).unwrap(),
            Trajectory::new(vec![1], vec![0]).unwrap(),
        ]);
        assert!(!is_stationary_like(&s, &m).unwrap());
    }

    #[test]
    fn strict_parsing_rejects_unknown_fields() {
        let text = r#"{"states":[{"id":"a","cost":0.5}],"edges":[["a","a"]],"extra":1}"#;
        assert!(Model::from_json_str(text).is_err());
    }

    #[test]
    fn system_roundtrip() {
        let m = Model::System(two_state_full());
        let text = m.to_json_string();
        let back = Model::from_json_str(&text).unwrap();
        let sys = back.as_system().unwrap();
        assert_eq!(sys.ids(), two_state_full().ids());
        assert_eq!(sys.costs(), two_state_full().costs());
        assert_eq!(sys.successors(0), &[0, 1]);
    }

    #[test]
    fn bundle_parse_and_validate() {
        let text = r#"{
            "states":[{"id":"w0","cost":0.0},{"id":"w1","cost":1.0}],
            "start_states":["w0"],
            "trajectories":[{"preamble":["w0","w1"],"cycle":["w0"]}]
        }"#;
        let m = Model::from_json_str(text).unwrap();
        assert!(m.validate().passed());
        let text2 = m.to_json_string();
        let again = Model::from_json_str(&text2).unwrap();
        assert!(again.validate().passed());
    }

    #[test]
    fn bundle_start_without_trajectory_flagged() {
        let text = r#"{
            "states":[{"id":"w0","cost":0.0},{"id":"w1","cost":1.0}],
            "start_states":["w1"],
            "trajectories":[{"preamble":[],"cycle":["w0"]}]
        }"#;
        let m = Model::from_json_str(text).unwrap();
        let report = m.validate();
        assert!(report.violations.iter().any(|v| v.contains("Γ(w1) empty")));
    }
}
