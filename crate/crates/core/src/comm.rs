//! The communication automaton `G_S` of a plant under a networked supervisor,
//! the projections `ψ` and `f⁻¹ ∘ ψ^f`, and the exact networked state estimate
//! computed by an observer of `G_S`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automaton::{
    labelled_step, silent_closure, Alphabet, Automaton, ControlAction, EventId, ModelError, NetworkedSupervisor,
    StateId,
};
use crate::channels::{CtrlChannelConfig, DelayBounds, ObsChannelConfig};

/// Default cap on the number of states explored by a reachability search.
pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommError {
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// An event of `G_S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommEvent {
    /// A plant event occurrence.
    Plant(EventId),
    /// `o(i)`: loss of the i-th queued observation (1-based).
    ObsLoss(usize),
    /// `f(σ)`: delivery of the queued head `σ` to the supervisor.
    Deliver(EventId),
    /// `c(i)`: loss of the i-th queued control action (1-based).
    CtrlLoss(usize),
    /// `g(π)`: execution of the queued head action `π`.
    Execute(ControlAction),
}

impl CommEvent {
    /// `σ`, `obs!i`, `dlv!σ`, `ctl!i`, `exe!{..}`.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        match self {
            CommEvent::Plant(e) => alphabet.name(*e).to_string(),
            CommEvent::ObsLoss(i) => format!("obs!{i}"),
            CommEvent::Deliver(e) => format!("dlv!{}", alphabet.name(*e)),
            CommEvent::CtrlLoss(i) => format!("ctl!{i}"),
            CommEvent::Execute(p) => format!("exe!{}", alphabet.render_set(p.enabled())),
        }
    }

    pub fn is_plant(&self) -> bool {
        matches!(self, CommEvent::Plant(_))
    }

    pub fn is_delivery(&self) -> bool {
        matches!(self, CommEvent::Deliver(_))
    }
}

/// `(q, x, n, φ, y, m, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommState {
    pub plant: StateId,
    pub obs: ObsChannelConfig,
    pub ctrl: CtrlChannelConfig,
    pub sup: StateId,
}

impl CommState {
    pub fn initial(plant: &Automaton, sup: &NetworkedSupervisor) -> Self {
        CommState {
            plant: plant.initial(),
            obs: ObsChannelConfig::empty(),
            ctrl: CtrlChannelConfig::new(sup.initial_action()),
            sup: sup.initial(),
        }
    }

    /// `(q, [(a,0)], n=0, π{..}, [..], m=0, p)`.
    pub fn render(&self, plant: &Automaton, sup: &NetworkedSupervisor) -> String {
        let a = plant.alphabet();
        let obs: Vec<String> = self
            .obs
            .queue
            .iter()
            .map(|(e, age)| format!("({},{})", a.name(*e), age))
            .collect();
        let ctrl: Vec<String> = self
            .ctrl
            .queue
            .iter()
            .map(|(p, age)| format!("({},{})", a.render_action(*p), age))
            .collect();
        format!(
            "({}, [{}], n={}, {}, [{}], m={}, {})",
            plant.state_name(self.plant),
            obs.join(","),
            self.obs.losses,
            a.render_action(self.ctrl.active),
            ctrl.join(","),
            self.ctrl.losses,
            sup.realization().state_name(self.sup)
        )
    }
}

/// One transition of `G_S`, or `None` when its guard fails.
pub fn comm_step(
    s: &CommState,
    e: CommEvent,
    g: &Automaton,
    sup: &NetworkedSupervisor,
    b: &DelayBounds,
) -> Option<CommState> {
    match e {
        CommEvent::Plant(sigma) => {
            let q = g.step(s.plant, sigma)?;
            if !s.ctrl.active.allows(sigma) || s.obs.aged_num() > b.obs_delay || s.ctrl.aged_num() > b.ctrl_delay {
                return None;
            }
            Some(CommState {
                plant: q,
                obs: s.obs.push_event(sigma, g.alphabet()),
                ctrl: s.ctrl.aged(),
                sup: s.sup,
            })
        }
        CommEvent::ObsLoss(i) => Some(CommState {
            obs: s.obs.lose(i, b.obs_loss).ok()?,
            ..s.clone()
        }),
        CommEvent::Deliver(sigma) => {
            if s.obs.head()? != sigma {
                return None;
            }
            let (_, obs) = s.obs.pop().ok()?;
            let p = sup.next(s.sup, sigma);
            Some(CommState {
                plant: s.plant,
                obs,
                ctrl: s.ctrl.issue_unchecked(sup.gamma(p)),
                sup: p,
            })
        }
        CommEvent::CtrlLoss(i) => Some(CommState {
            ctrl: s.ctrl.lose(i, b.ctrl_loss).ok()?,
            ..s.clone()
        }),
        CommEvent::Execute(pi) => {
            if s.ctrl.head()? != pi {
                return None;
            }
            Some(CommState {
                ctrl: s.ctrl.execute().ok()?,
                ..s.clone()
            })
        }
    }
}

/// Every defined transition out of `s`, in canonical event order.
pub fn comm_successors(
    s: &CommState,
    g: &Automaton,
    sup: &NetworkedSupervisor,
    b: &DelayBounds,
) -> Vec<(CommEvent, CommState)> {
    let mut events: Vec<CommEvent> = g.edges(s.plant).iter().map(|(e, _)| CommEvent::Plant(*e)).collect();
    events.extend((1..=s.obs.queue.len()).map(CommEvent::ObsLoss));
    events.extend(s.obs.head().map(CommEvent::Deliver));
    events.extend((1..=s.ctrl.queue.len()).map(CommEvent::CtrlLoss));
    events.extend(s.ctrl.head().map(CommEvent::Execute));
    events
        .into_iter()
        .filter_map(|e| comm_step(s, e, g, sup, b).map(|t| (e, t)))
        .collect()
}

/// `ψ`: the plant events of a `G_S` string.
pub fn psi(mu: &[CommEvent]) -> Vec<EventId> {
    mu.iter()
        .filter_map(|e| match e {
            CommEvent::Plant(s) => Some(*s),
            _ => None,
        })
        .collect()
}

/// `f⁻¹(ψ^f(μ))`: the events delivered to the supervisor.
pub fn psi_f_inv(mu: &[CommEvent]) -> Vec<EventId> {
    mu.iter()
        .filter_map(|e| match e {
            CommEvent::Deliver(s) => Some(*s),
            _ => None,
        })
        .collect()
}

/// The reachable part of `G_S`, explored breadth first.
#[derive(Debug, Clone)]
pub struct CommAutomaton {
    plant: Automaton,
    sup: NetworkedSupervisor,
    bounds: DelayBounds,
    states: Vec<CommState>,
    index: HashMap<CommState, usize>,
    edges: Vec<Vec<(CommEvent, usize)>>,
}

/// Builds `G_S`, failing once more than `budget` states are discovered.
pub fn build_gs(
    g: &Automaton,
    sup: &NetworkedSupervisor,
    b: DelayBounds,
    budget: usize,
) -> Result<CommAutomaton, CommError> {
    if g.alphabet() != sup.alphabet() {
        return Err(ModelError::AlphabetMismatch.into());
    }
    let init = CommState::initial(g, sup);
    let mut states = vec![init.clone()];
    let mut index = HashMap::from([(init, 0usize)]);
    let mut edges: Vec<Vec<(CommEvent, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    if budget == 0 {
        return Err(CommError::BudgetExceeded(budget));
    }
    while let Some(i) = queue.pop_front() {
        for (e, t) in comm_successors(&states[i], g, sup, &b) {
            let j = match index.get(&t) {
                Some(j) => *j,
                None => {
                    let j = states.len();
                    if j >= budget {
                        return Err(CommError::BudgetExceeded(budget));
                    }
                    index.insert(t.clone(), j);
                    states.push(t);
                    edges.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            edges[i].push((e, j));
        }
    }
    Ok(CommAutomaton {
        plant: g.clone(),
        sup: sup.clone(),
        bounds: b,
        states,
        index,
        edges,
    })
}

impl CommAutomaton {
    pub fn plant(&self) -> &Automaton {
        &self.plant
    }

    pub fn supervisor(&self) -> &NetworkedSupervisor {
        &self.sup
    }

    pub fn bounds(&self) -> DelayBounds {
        self.bounds
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// States in discovery order; index 0 is the initial state.
    pub fn states(&self) -> &[CommState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &CommState {
        &self.states[i]
    }

    pub fn index_of(&self, s: &CommState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn edges(&self, i: usize) -> &[(CommEvent, usize)] {
        &self.edges[i]
    }

    /// Successor of state `i` on `e`, if defined.
    pub fn step(&self, i: usize, e: CommEvent) -> Option<usize> {
        self.edges[i].iter().find(|(l, _)| *l == e).map(|(_, t)| *t)
    }

    /// Runs `mu` from the initial state.
    pub fn run(&self, mu: &[CommEvent]) -> Option<usize> {
        mu.iter().try_fold(0usize, |i, e| self.step(i, *e))
    }

    pub fn render_state(&self, i: usize) -> String {
        self.states[i].render(&self.plant, &self.sup)
    }

    pub fn render_event(&self, e: &CommEvent) -> String {
        e.render(self.plant.alphabet())
    }

    /// The set of `G_S` states reachable by strings delivering exactly `t`,
    /// or `None` when no run of `G_S` delivers `t`.
    pub fn delivered_reach(&self, t: &[EventId]) -> Option<Vec<usize>> {
        t.iter()
            .try_fold(self.initial_reach(), |set, sigma| self.deliver_step(&set, *sigma))
    }

    /// Observer state for the empty delivered string.
    pub fn initial_reach(&self) -> Vec<usize> {
        let edges = |s: usize| self.edges[s].iter().copied();
        silent_closure([0usize], edges, CommEvent::is_delivery)
    }

    /// Observer transition on the delivery of `sigma`.
    pub fn deliver_step(&self, set: &[usize], sigma: EventId) -> Option<Vec<usize>> {
        let edges = |s: usize| self.edges[s].iter().copied();
        let moved = labelled_step(set, edges, |e| *e == CommEvent::Deliver(sigma));
        if moved.is_empty() {
            return None;
        }
        Some(silent_closure(moved, edges, CommEvent::is_delivery))
    }

    /// `ℰ_S(t)`: plant states of the observer state of `G_S` reached by
    /// delivering `t`. `None` when `t` is not a delivered string of `G_S`.
    pub fn oracle_nse(&self, t: &[EventId]) -> Option<BTreeSet<StateId>> {
        self.delivered_reach(t)
            .map(|set| set.into_iter().map(|i| self.states[i].plant).collect())
    }

    /// Whether some `μ ∈ L(G_S)` has `ψ(μ) = s`.
    pub fn language_member(&self, s: &[EventId]) -> bool {
        let mut seen = HashSet::from([(0usize, 0usize)]);
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, pos)) = stack.pop() {
            if pos == s.len() {
                return true;
            }
            for (e, j) in &self.edges[i] {
                let next = match e {
                    CommEvent::Plant(sigma) if *sigma == s[pos] => (*j, pos + 1),
                    CommEvent::Plant(_) => continue,
                    _ => (*j, pos),
                };
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        false
    }

    /// `ψ(L(G_S))` restricted to strings of length at most `max_len`.
    pub fn plant_language(&self, max_len: usize) -> BTreeSet<Vec<EventId>> {
        let mut out = BTreeSet::new();
        // Silent closure per state, memoised.
        let mut closures: HashMap<usize, Vec<usize>> = HashMap::new();
        let edges = |s: usize| self.edges[s].iter().copied();
        let mut layer: BTreeSet<(Vec<EventId>, Vec<usize>)> = BTreeSet::new();
        layer.insert((Vec::new(), silent_closure([0usize], edges, CommEvent::is_plant)));
        for depth in 0..=max_len {
            let mut next_layer: HashMap<Vec<EventId>, BTreeSet<usize>> = HashMap::new();
            for (word, set) in &layer {
                out.insert(word.clone());
                if depth == max_len {
                    continue;
                }
                for s in set {
                    for (e, t) in &self.edges[*s] {
                        if let CommEvent::Plant(sigma) = e {
                            let mut w = word.clone();
                            w.push(*sigma);
                            let cl = closures
                                .entry(*t)
                                .or_insert_with(|| silent_closure([*t], edges, CommEvent::is_plant));
                            next_layer.entry(w).or_default().extend(cl.iter().copied());
                        }
                    }
                }
            }
            layer = next_layer
                .into_iter()
                .map(|(w, s)| (w, s.into_iter().collect()))
                .collect();
        }
        out
    }

    /// Samples one defined transition per step with a seeded generator,
    /// stopping early at a deadlock.
    pub fn random_run(&self, steps: usize, seed: u64) -> Vec<(CommEvent, CommState)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut i = 0usize;
        for _ in 0..steps {
            let edges = &self.edges[i];
            if edges.is_empty() {
                break;
            }
            let (e, j) = edges[rng.gen_range(0..edges.len())];
            out.push((e, self.states[j].clone()));
            i = j;
        }
        out
    }

    /// A shortest string from the initial state to a state satisfying `bad`.
    pub fn shortest_path_to(&self, bad: impl Fn(&CommState) -> bool) -> Option<(Vec<CommEvent>, usize)> {
        let mut parent: Vec<Option<(usize, CommEvent)>> = vec![None; self.states.len()];
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            if bad(&self.states[i]) {
                let mut mu = Vec::new();
                let mut k = i;
                while let Some((p, e)) = parent[k] {
                    mu.push(e);
                    k = p;
                }
                mu.reverse();
                return Some((mu, i));
            }
            for (e, j) in &self.edges[i] {
                if !seen[*j] {
                    seen[*j] = true;
                    parent[*j] = Some((i, *e));
                    queue.push_back(*j);
                }
            }
        }
        None
    }
}
