//! Networked safety, the bipartite game graph of augmented estimates (NBTS),
//! its largest complete safe subgraph (AINC), and supervisor extraction.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::automaton::{
    is_subautomaton, Automaton, AutomatonBuilder, ControlAction, EventId, ModelError, NetworkedSupervisor, StateId,
};
use crate::channels::DelayBounds;
use crate::comm::{build_gs, psi, CommError, CommEvent, CommState};
use crate::estimator::{dor, dur, fc, AugmentedEstimate, EstimatorError};

/// Largest number of controllable events for which every admissible action
/// is enumerated by default.
pub const MAX_CONTROLLABLE: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("initial state {0:?} is not safe")]
    UnsafeInitial(String),
    #[error("specification is not a subautomaton of the plant")]
    NotSubautomaton,
    #[error("{0} controllable events (at most {MAX_CONTROLLABLE} without an explicit action list)")]
    TooManyControllable(usize),
    #[error("action list is empty")]
    NoActions,
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("policy action {action} is not available at Y-state {y_state}")]
    PolicyUnavailable { action: String, y_state: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

impl From<CommError> for SynthesisError {
    fn from(e: CommError) -> Self {
        match e {
            CommError::BudgetExceeded(n) => SynthesisError::BudgetExceeded(n),
            CommError::Model(m) => SynthesisError::Model(m),
        }
    }
}

/// The safe plant states `Q_H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetySpec {
    safe: Vec<bool>,
}

impl SafetySpec {
    pub fn from_ids(plant: &Automaton, safe: impl IntoIterator<Item = StateId>) -> Result<Self, SynthesisError> {
        let mut flags = vec![false; plant.num_states()];
        for q in safe {
            if q.index() >= flags.len() {
                return Err(ModelError::UnknownState(format!("#{}", q.index())).into());
            }
            flags[q.index()] = true;
        }
        if !flags[plant.initial().index()] {
            return Err(SynthesisError::UnsafeInitial(
                plant.state_name(plant.initial()).to_string(),
            ));
        }
        Ok(SafetySpec { safe: flags })
    }

    pub fn from_names<S: AsRef<str>>(plant: &Automaton, names: &[S]) -> Result<Self, SynthesisError> {
        let ids = names
            .iter()
            .map(|n| {
                plant
                    .state(n.as_ref())
                    .ok_or_else(|| ModelError::UnknownState(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_ids(plant, ids)
    }

    /// `Q_H` from a subautomaton `H ⊑ G`.
    pub fn from_subautomaton(h: &Automaton, plant: &Automaton) -> Result<Self, SynthesisError> {
        if !is_subautomaton(h, plant) {
            return Err(SynthesisError::NotSubautomaton);
        }
        Self::from_names(plant, h.state_names())
    }

    /// Every state safe.
    pub fn all(plant: &Automaton) -> Self {
        SafetySpec {
            safe: vec![true; plant.num_states()],
        }
    }

    pub fn is_safe(&self, q: StateId) -> bool {
        self.safe.get(q.index()).copied().unwrap_or(false)
    }

    pub fn safe_states(&self) -> Vec<StateId> {
        (0..self.safe.len())
            .filter(|i| self.safe[*i])
            .map(StateId::from_index)
            .collect()
    }

    /// `φ_safe(Z) = 1 ⇔ Z ⊆ Q_H`.
    pub fn phi_safe<'a>(&self, z: impl IntoIterator<Item = &'a StateId>) -> bool {
        z.into_iter().all(|q| self.is_safe(*q))
    }
}

/// `φ_safe(z, spec)`.
pub fn phi_safe(z: &BTreeSet<StateId>, spec: &SafetySpec) -> bool {
    spec.phi_safe(z)
}

/// A Z-state: the information state `I(z)` after issuing `Π(z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZState {
    pub info: AugmentedEstimate,
    pub action: ControlAction,
}

/// The bipartite game graph. Y-state 0 is the initial (empty) estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nbts {
    y_states: Vec<AugmentedEstimate>,
    z_states: Vec<ZState>,
    yz: Vec<Vec<(ControlAction, usize)>>,
    zy: Vec<Vec<(EventId, usize)>>,
}

/// The pruned game graph.
pub type Ainc = Nbts;

impl Nbts {
    pub fn num_y(&self) -> usize {
        self.y_states.len()
    }

    pub fn num_z(&self) -> usize {
        self.z_states.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_y() + self.num_z()
    }

    pub fn y_state(&self, i: usize) -> &AugmentedEstimate {
        &self.y_states[i]
    }

    pub fn z_state(&self, i: usize) -> &ZState {
        &self.z_states[i]
    }

    pub fn y_states(&self) -> &[AugmentedEstimate] {
        &self.y_states
    }

    pub fn z_states(&self) -> &[ZState] {
        &self.z_states
    }

    /// Actions available at Y-state `y` with their Z-state targets.
    pub fn yz(&self, y: usize) -> &[(ControlAction, usize)] {
        &self.yz[y]
    }

    /// Observations available at Z-state `z` with their Y-state targets.
    pub fn zy(&self, z: usize) -> &[(EventId, usize)] {
        &self.zy[z]
    }

    pub fn yz_target(&self, y: usize, action: ControlAction) -> Option<usize> {
        self.yz[y].iter().find(|(p, _)| *p == action).map(|(_, z)| *z)
    }

    pub fn zy_target(&self, z: usize, sigma: EventId) -> Option<usize> {
        self.zy[z].iter().find(|(e, _)| *e == sigma).map(|(_, y)| *y)
    }

    pub fn find_y(&self, y: &AugmentedEstimate) -> Option<usize> {
        self.y_states.iter().position(|s| s == y)
    }

    pub fn find_z(&self, z: &ZState) -> Option<usize> {
        self.z_states.iter().position(|s| s == z)
    }

    /// Assembles a graph from tables; edges must point inside the tables.
    pub fn from_parts(
        y_states: Vec<AugmentedEstimate>,
        z_states: Vec<ZState>,
        yz: Vec<Vec<(ControlAction, usize)>>,
        zy: Vec<Vec<(EventId, usize)>>,
    ) -> Option<Self> {
        if y_states.is_empty()
            || yz.len() != y_states.len()
            || zy.len() != z_states.len()
            || yz.iter().flatten().any(|(_, z)| *z >= z_states.len())
            || zy.iter().flatten().any(|(_, y)| *y >= y_states.len())
        {
            return None;
        }
        Some(Nbts {
            y_states,
            z_states,
            yz,
            zy,
        })
    }

    /// The subgraph induced by the kept states. Y-state 0 must be kept.
    pub fn restrict(&self, keep_y: &[bool], keep_z: &[bool]) -> Nbts {
        let remap = |keep: &[bool]| {
            let mut next = 0usize;
            keep.iter()
                .map(|k| {
                    if *k {
                        next += 1;
                        Some(next - 1)
                    } else {
                        None
                    }
                })
                .collect::<Vec<_>>()
        };
        let ry = remap(keep_y);
        let rz = remap(keep_z);
        let mut out = Nbts {
            y_states: Vec::new(),
            z_states: Vec::new(),
            yz: Vec::new(),
            zy: Vec::new(),
        };
        for (i, y) in self.y_states.iter().enumerate() {
            if keep_y[i] {
                out.y_states.push(y.clone());
                out.yz
                    .push(self.yz[i].iter().filter_map(|(p, z)| rz[*z].map(|z| (*p, z))).collect());
            }
        }
        for (i, z) in self.z_states.iter().enumerate() {
            if keep_z[i] {
                out.z_states.push(z.clone());
                out.zy
                    .push(self.zy[i].iter().filter_map(|(e, y)| ry[*y].map(|y| (*e, y))).collect());
            }
        }
        out
    }

    /// States reachable from Y-state 0 through kept states.
    pub fn reachable(&self, keep_y: &[bool], keep_z: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let mut ry = vec![false; self.num_y()];
        let mut rz = vec![false; self.num_z()];
        if !keep_y[0] {
            return (ry, rz);
        }
        ry[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(y) = queue.pop_front() {
            for (_, z) in &self.yz[y] {
                if keep_z[*z] && !rz[*z] {
                    rz[*z] = true;
                    for (_, y2) in &self.zy[*z] {
                        if keep_y[*y2] && !ry[*y2] {
                            ry[*y2] = true;
                            queue.push_back(*y2);
                        }
                    }
                }
            }
        }
        (ry, rz)
    }

    /// Whether this graph is complete: every Y-state has an action and every
    /// Z-state has a transition on each head event of its information state.
    pub fn is_complete(&self) -> bool {
        self.yz.iter().all(|es| !es.is_empty())
            && self
                .z_states
                .iter()
                .enumerate()
                .all(|(i, z)| z.info.head_events().iter().all(|e| self.zy_target(i, *e).is_some()))
    }

    /// Whether every Z-state's plant components are safe.
    pub fn is_safe(&self, spec: &SafetySpec) -> bool {
        self.z_states.iter().all(|z| spec.phi_safe(&fc(&z.info)))
    }

    /// Whether `self` is a subgraph of `other`, matching states by content.
    pub fn is_subgraph_of(&self, other: &Nbts) -> bool {
        let ymap: Option<Vec<usize>> = self.y_states.iter().map(|y| other.find_y(y)).collect();
        let zmap: Option<Vec<usize>> = self.z_states.iter().map(|z| other.find_z(z)).collect();
        let (Some(ymap), Some(zmap)) = (ymap, zmap) else {
            return false;
        };
        self.yz
            .iter()
            .enumerate()
            .all(|(y, es)| es.iter().all(|(p, z)| other.yz_target(ymap[y], *p) == Some(zmap[*z])))
            && self
                .zy
                .iter()
                .enumerate()
                .all(|(z, es)| es.iter().all(|(e, y)| other.zy_target(zmap[z], *e) == Some(ymap[*y])))
    }
}

/// Builds the NBTS from `y0 = ∅`, branching on every admissible action (or
/// on `actions` when given) at Y-states and on every head event at Z-states.
pub fn build_nbts(
    plant: &Automaton,
    actions: Option<&[ControlAction]>,
    b: DelayBounds,
    budget: usize,
) -> Result<Nbts, SynthesisError> {
    let alphabet = plant.alphabet();
    let actions: Vec<ControlAction> = match actions {
        Some(list) => {
            let mut v = Vec::with_capacity(list.len());
            for p in list {
                v.push(ControlAction::new(p.enabled(), alphabet)?);
            }
            v.sort();
            v.dedup();
            if v.is_empty() {
                return Err(SynthesisError::NoActions);
            }
            v
        }
        None => {
            let n = alphabet.controllable().len();
            if n > MAX_CONTROLLABLE {
                return Err(SynthesisError::TooManyControllable(n));
            }
            alphabet.admissible_actions()
        }
    };
    let mut g = Nbts {
        y_states: vec![AugmentedEstimate::new()],
        z_states: Vec::new(),
        yz: vec![Vec::new()],
        zy: Vec::new(),
    };
    let mut y_index: HashMap<AugmentedEstimate, usize> = HashMap::from([(AugmentedEstimate::new(), 0)]);
    let mut z_index: HashMap<ZState, usize> = HashMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(y) = queue.pop_front() {
        for p in &actions {
            let z = ZState {
                info: dur(&g.y_states[y], *p, plant, &b)?,
                action: *p,
            };
            let zi = match z_index.get(&z) {
                Some(i) => *i,
                None => {
                    if g.num_states() >= budget {
                        return Err(SynthesisError::BudgetExceeded(budget));
                    }
                    let zi = g.z_states.len();
                    let heads = z.info.head_events();
                    let mut edges = Vec::with_capacity(heads.len());
                    for sigma in heads {
                        let next = dor(&z.info, sigma);
                        let yi = match y_index.get(&next) {
                            Some(i) => *i,
                            None => {
                                if g.num_states() >= budget {
                                    return Err(SynthesisError::BudgetExceeded(budget));
                                }
                                let yi = g.y_states.len();
                                y_index.insert(next.clone(), yi);
                                g.y_states.push(next);
                                g.yz.push(Vec::new());
                                queue.push_back(yi);
                                yi
                            }
                        };
                        edges.push((sigma, yi));
                    }
                    z_index.insert(z.clone(), zi);
                    g.z_states.push(z);
                    g.zy.push(edges);
                    zi
                }
            };
            g.yz[y].push((*p, zi));
        }
    }
    Ok(g)
}

/// Counters from one pruning run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PruneStats {
    /// Outer iterations of the deletion loop.
    pub iterations: usize,
    pub removed_y: usize,
    pub removed_z: usize,
    /// Surviving Y- plus Z-states before the loop and after each iteration.
    pub kept: Vec<usize>,
}

/// Deletes unsafe Z-states, then repeatedly deletes Y-states without
/// actions and Z-states missing a head-event transition, re-taking the
/// accessible part each round. `None` when the initial Y-state is deleted.
pub fn prune_ainc(t: &Nbts, spec: &SafetySpec) -> Option<Ainc> {
    prune_ainc_with_stats(t, spec).map(|(a, _)| a)
}

pub fn prune_ainc_with_stats(t: &Nbts, spec: &SafetySpec) -> Option<(Ainc, PruneStats)> {
    let mut ky = vec![true; t.num_y()];
    let mut kz: Vec<bool> = t.z_states.iter().map(|z| spec.phi_safe(&fc(&z.info))).collect();
    let (ry, rz) = t.reachable(&ky, &kz);
    ky = ry;
    kz = rz;
    let count = |ky: &[bool], kz: &[bool]| ky.iter().chain(kz).filter(|k| **k).count();
    let mut stats = PruneStats {
        kept: vec![count(&ky, &kz)],
        ..PruneStats::default()
    };
    loop {
        if !ky[0] {
            return None;
        }
        stats.iterations += 1;
        let mut changed = false;
        for (y, alive) in ky.iter_mut().enumerate() {
            if *alive && !t.yz[y].iter().any(|(_, z)| kz[*z]) {
                *alive = false;
                changed = true;
            }
        }
        for (z, alive) in kz.iter_mut().enumerate() {
            if *alive && !t.zy[z].iter().all(|(_, y)| ky[*y]) {
                *alive = false;
                changed = true;
            }
        }
        let (ry, rz) = t.reachable(&ky, &kz);
        ky = ry;
        kz = rz;
        stats.kept.push(count(&ky, &kz));
        if !changed {
            break;
        }
    }
    if !ky[0] {
        return None;
    }
    stats.removed_y = ky.iter().filter(|k| !**k).count();
    stats.removed_z = kz.iter().filter(|k| !**k).count();
    Some((t.restrict(&ky, &kz), stats))
}

/// How an action is picked at each Y-state during extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// An inclusion-maximal action; among several, the smallest bitmask.
    GreedyMax,
    /// The action enabling only uncontrollable events.
    Min,
    /// Always the given action.
    Fixed(ControlAction),
}

/// Inclusion-maximal actions in ascending bitmask order.
pub fn maximal_actions(actions: &[ControlAction]) -> Vec<ControlAction> {
    let mut out: Vec<ControlAction> = actions
        .iter()
        .filter(|p| !actions.iter().any(|o| o != *p && p.is_subset(*o)))
        .copied()
        .collect();
    out.sort();
    out.dedup();
    out
}

impl Policy {
    pub fn choose(&self, available: &[ControlAction], plant: &Automaton) -> Option<ControlAction> {
        match self {
            Policy::GreedyMax => maximal_actions(available).first().copied(),
            Policy::Min => {
                let m = plant.alphabet().minimal_action();
                available.contains(&m).then_some(m)
            }
            Policy::Fixed(p) => available.contains(p).then_some(*p),
        }
    }

    fn describe(&self, plant: &Automaton) -> String {
        match self {
            Policy::GreedyMax => "greedy-max".into(),
            Policy::Min => plant.alphabet().render_action(plant.alphabet().minimal_action()),
            Policy::Fixed(p) => plant.alphabet().render_action(*p),
        }
    }
}

/// A supervisor read off an AINC. `z_state[x]` is the AINC Z-state realised
/// by supervisor state `x`, or `None` for the special sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedSupervisor {
    pub supervisor: NetworkedSupervisor,
    pub z_state: Vec<Option<usize>>,
}

pub const SPECIAL_STATE_NAME: &str = "x_spe";

pub fn extract_supervisor(
    ainc: &Ainc,
    plant: &Automaton,
    policy: Policy,
) -> Result<ExtractedSupervisor, SynthesisError> {
    extract_supervisor_with(ainc, plant, |y, available| {
        policy
            .choose(available, plant)
            .ok_or_else(|| SynthesisError::PolicyUnavailable {
                action: policy.describe(plant),
                y_state: y,
            })
    })
}

/// Extraction with a caller-supplied choice at each reached Y-state.
pub fn extract_supervisor_with(
    ainc: &Ainc,
    plant: &Automaton,
    mut choose: impl FnMut(usize, &[ControlAction]) -> Result<ControlAction, SynthesisError>,
) -> Result<ExtractedSupervisor, SynthesisError> {
    let alphabet = plant.shared_alphabet().clone();
    let mut pick = |y: usize| -> Result<usize, SynthesisError> {
        let available: Vec<ControlAction> = ainc.yz(y).iter().map(|(p, _)| *p).collect();
        let p = choose(y, &available)?;
        ainc.yz_target(y, p).ok_or_else(|| SynthesisError::PolicyUnavailable {
            action: alphabet.render_action(p),
            y_state: y,
        })
    };
    let mut z_of: Vec<usize> = vec![pick(0)?];
    let mut x_of: HashMap<usize, usize> = HashMap::from([(z_of[0], 0)]);
    // (from, event, to) with `usize::MAX` standing for the special state.
    let mut trans: Vec<(usize, EventId, usize)> = Vec::new();
    let mut needs_special = false;
    let mut i = 0;
    while i < z_of.len() {
        let z = z_of[i];
        for sigma in alphabet.observable().iter() {
            match ainc.zy_target(z, sigma) {
                Some(y) => {
                    let z2 = pick(y)?;
                    let x2 = match x_of.get(&z2) {
                        Some(x) => *x,
                        None => {
                            z_of.push(z2);
                            x_of.insert(z2, z_of.len() - 1);
                            z_of.len() - 1
                        }
                    };
                    trans.push((i, sigma, x2));
                }
                None => {
                    needs_special = true;
                    trans.push((i, sigma, usize::MAX));
                }
            }
        }
        i += 1;
    }
    let mut b = AutomatonBuilder::new(alphabet.clone());
    let mut ids: Vec<StateId> = Vec::with_capacity(z_of.len());
    for k in 0..z_of.len() {
        ids.push(b.add_state(&format!("x{k}"))?);
    }
    let special = if needs_special {
        let s = b.add_state(SPECIAL_STATE_NAME)?;
        for sigma in alphabet.observable().iter() {
            b.add_transition_ids(s, sigma, s)?;
        }
        Some(s)
    } else {
        None
    };
    for (f, e, t) in trans {
        let to = if t == usize::MAX {
            special.expect("special state")
        } else {
            ids[t]
        };
        b.add_transition_ids(ids[f], e, to)?;
    }
    let realization = b.build("x0")?;
    let mut gamma: Vec<ControlAction> = z_of.iter().map(|z| ainc.z_state(*z).action).collect();
    let mut z_state: Vec<Option<usize>> = z_of.into_iter().map(Some).collect();
    if special.is_some() {
        gamma.push(alphabet.minimal_action());
        z_state.push(None);
    }
    let supervisor = NetworkedSupervisor::new(realization, gamma, special)?;
    Ok(ExtractedSupervisor { supervisor, z_state })
}

/// Counterexample to networked safety.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// A shortest `G_S` string reaching an unsafe plant state.
    pub mu: Vec<CommEvent>,
    /// `ψ(μ)`.
    pub plant_string: Vec<EventId>,
    pub state: CommState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub witness: Option<Witness>,
    pub gs_states: usize,
}

/// Exhaustive check that no reachable state of `G_S` has an unsafe plant
/// component.
pub fn verify_networked_safety(
    g: &Automaton,
    sup: &NetworkedSupervisor,
    spec: &SafetySpec,
    b: DelayBounds,
    budget: usize,
) -> Result<SafetyVerdict, SynthesisError> {
    let gs = build_gs(g, sup, b, budget)?;
    let witness = gs.shortest_path_to(|s| !spec.is_safe(s.plant)).map(|(mu, i)| Witness {
        plant_string: psi(&mu),
        mu,
        state: gs.state(i).clone(),
    });
    Ok(SafetyVerdict {
        safe: witness.is_none(),
        witness,
        gs_states: gs.num_states(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::DEFAULT_BUDGET;
    use crate::examples;

    fn setting() -> (Automaton, DelayBounds) {
        (examples::plant(), DelayBounds::new(0, 2, 0, 0))
    }

    #[test]
    fn phi_safe_examples() {
        let g = examples::plant();
        let spec = SafetySpec::from_names(&g, &examples::SAFE_STATES).unwrap();
        let ids = |n: &[&str]| n.iter().map(|s| g.state(s).unwrap()).collect::<BTreeSet<_>>();
        assert!(phi_safe(&ids(&["q2", "q3", "q4"]), &spec));
        assert!(phi_safe(&BTreeSet::new(), &spec));
        assert!(!phi_safe(&ids(&["q5"]), &spec));
        assert_eq!(
            SafetySpec::from_names(&g, &["q2"]),
            Err(SynthesisError::UnsafeInitial("q1".into()))
        );
    }

    #[test]
    fn first_z_state_matches_initial_estimate() {
        let (g, b) = setting();
        let t = build_nbts(&g, None, b, DEFAULT_BUDGET).unwrap();
        let pi1 = g.alphabet().action(&["alpha", "lambda"], false).unwrap();
        let z = t.yz_target(0, pi1).unwrap();
        assert_eq!(g.render_states(&fc(&t.z_state(z).info)), "{q1,q2}");
        assert_eq!(t.yz(0).len(), 8);
        // Every Z-state branches exactly on its head events.
        for (i, z) in t.z_states().iter().enumerate() {
            let heads: Vec<EventId> = t.zy(i).iter().map(|(e, _)| *e).collect();
            assert_eq!(heads, z.info.head_events().into_iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn nothing_unsafe_keeps_everything() {
        let (g, b) = setting();
        let t = build_nbts(&g, None, b, DEFAULT_BUDGET).unwrap();
        let a = prune_ainc(&t, &SafetySpec::all(&g)).unwrap();
        assert_eq!(a, t);
        let s = extract_supervisor(&a, &g, Policy::GreedyMax).unwrap();
        let sup = &s.supervisor;
        for x in sup.realization().states() {
            if Some(x) != sup.special_state() {
                assert_eq!(sup.gamma(x), g.alphabet().full_action());
            }
        }
        // The sink is never entered in the closed loop.
        let gs = build_gs(&g, sup, b, DEFAULT_BUDGET).unwrap();
        assert!(gs.states().iter().all(|c| Some(c.sup) != sup.special_state()));
    }

    #[test]
    fn unsafe_q5_is_pruned() {
        let (g, b) = setting();
        let t = build_nbts(&g, None, b, DEFAULT_BUDGET).unwrap();
        let spec = SafetySpec::from_names(&g, &examples::SAFE_STATES).unwrap();
        let a = prune_ainc(&t, &spec).unwrap();
        assert!(a.is_complete());
        assert!(a.is_safe(&spec));
        assert!(a.is_subgraph_of(&t));
        assert!(a.yz_target(0, g.alphabet().full_action()).is_none());
        let s = extract_supervisor(&a, &g, Policy::GreedyMax).unwrap();
        let v = verify_networked_safety(&g, &s.supervisor, &spec, b, DEFAULT_BUDGET).unwrap();
        assert!(v.safe);
    }

    #[test]
    fn forced_unsafe_start_has_no_supervisor() {
        let a = std::sync::Arc::new(
            crate::automaton::Alphabet::new(vec![crate::automaton::EventInfo::new("u", false, true)]).unwrap(),
        );
        let g = Automaton::from_names(a, &["q0", "bad"], "q0", &[("q0", "u", "bad")]).unwrap();
        let t = build_nbts(&g, None, DelayBounds::default(), DEFAULT_BUDGET).unwrap();
        let spec = SafetySpec::from_names(&g, &["q0"]).unwrap();
        assert!(prune_ainc(&t, &spec).is_none());
    }

    #[test]
    fn example_supervisor_is_safe_and_permissive_one_is_not() {
        let (g, b) = setting();
        let spec = SafetySpec::from_names(&g, &examples::SAFE_STATES).unwrap();
        let v = verify_networked_safety(&g, &examples::supervisor(), &spec, b, DEFAULT_BUDGET).unwrap();
        assert!(v.safe);
        let all = NetworkedSupervisor::permissive(g.shared_alphabet().clone());
        let v = verify_networked_safety(&g, &all, &spec, b, DEFAULT_BUDGET).unwrap();
        assert!(!v.safe);
        let w = v.witness.unwrap();
        assert_eq!(g.alphabet().render_word(&w.plant_string), "[alpha,beta,lambda]");
        assert_eq!(g.state_name(w.state.plant), "q5");
        let v = verify_networked_safety(&g, &all, &SafetySpec::all(&g), b, DEFAULT_BUDGET).unwrap();
        assert!(v.safe);
    }

    #[test]
    fn policies() {
        let (g, b) = setting();
        let t = build_nbts(&g, None, b, DEFAULT_BUDGET).unwrap();
        let a = prune_ainc(&t, &SafetySpec::all(&g)).unwrap();
        let min = extract_supervisor(&a, &g, Policy::Min).unwrap();
        assert!(min.supervisor.gammas().iter().all(|p| p.enabled().is_empty()));
        let pi1 = g.alphabet().action(&["alpha", "lambda"], false).unwrap();
        let fixed = extract_supervisor(&a, &g, Policy::Fixed(pi1)).unwrap();
        assert_eq!(fixed.supervisor.initial_action(), pi1);
        let spec = SafetySpec::from_names(&g, &examples::SAFE_STATES).unwrap();
        let pruned = prune_ainc(&t, &spec).unwrap();
        let err = extract_supervisor(&pruned, &g, Policy::Fixed(g.alphabet().full_action())).unwrap_err();
        assert!(matches!(err, SynthesisError::PolicyUnavailable { .. }));
    }

    #[test]
    fn too_many_controllable_events() {
        let events: Vec<_> = (0..13)
            .map(|i| crate::automaton::EventInfo::new(format!("e{i}"), true, true))
            .collect();
        let a = std::sync::Arc::new(crate::automaton::Alphabet::new(events).unwrap());
        let g = Automaton::from_names(a.clone(), &["q"], "q", &[]).unwrap();
        assert_eq!(
            build_nbts(&g, None, DelayBounds::default(), DEFAULT_BUDGET),
            Err(SynthesisError::TooManyControllable(13))
        );
        let t = build_nbts(&g, Some(&[a.full_action()]), DelayBounds::default(), DEFAULT_BUDGET).unwrap();
        assert_eq!(t.num_y(), 1);
    }

    #[test]
    fn maximal_action_tie_break() {
        let g = examples::plant();
        let a = g.alphabet();
        let ab = a.action(&["alpha", "beta"], false).unwrap();
        let l = a.action(&["lambda"], false).unwrap();
        let al = a.action(&["alpha", "lambda"], false).unwrap();
        let a_only = a.action(&["alpha"], false).unwrap();
        let got = maximal_actions(&[a_only, l, ab, al]);
        assert_eq!(got, {
            let mut v = vec![ab, al];
            v.sort();
            v
        });
        assert_eq!(Policy::GreedyMax.choose(&[a_only, l, ab, al], &g), Some(got[0]));
    }
}
