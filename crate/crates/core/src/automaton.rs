//! Deterministic finite automata over a partitioned event alphabet.
//!
//! Events and states are interned: an [`EventId`] indexes into an
//! [`Alphabet`], a [`StateId`] indexes into the state table of one
//! [`Automaton`]. Sets of events are `u64` bitmasks, which caps an alphabet
//! at [`MAX_EVENTS`] events.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported alphabet (events are tracked in a `u64` bitmask).
pub const MAX_EVENTS: usize = 64;

/// Prefixes reserved for the communication events of a networked closed loop.
pub const RESERVED_PREFIXES: [&str; 4] = ["obs!", "ctl!", "dlv!", "exe!"];

// Characters used by the canonical text grammar; names may not contain them.
const DELIMITERS: &[char] = &['(', ')', '[', ']', '{', '}', ',', '=', '"'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid event name {0:?}")]
    InvalidEventName(String),
    #[error("invalid state name {0:?}")]
    InvalidStateName(String),
    #[error("duplicate event {0:?}")]
    DuplicateEvent(String),
    #[error("duplicate state {0:?}")]
    DuplicateState(String),
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("too many events: {0} (at most {MAX_EVENTS} are supported)")]
    TooManyEvents(usize),
    #[error("automaton has no states")]
    NoStates,
    #[error("nondeterministic transitions from {state:?} on {event:?}")]
    Nondeterministic { state: String, event: String },
    #[error("event {0:?} is not observable")]
    NotObservable(String),
    #[error("control action {action} does not enable uncontrollable event {event:?}")]
    NotAdmissible { action: String, event: String },
    #[error("supervisor realization has no transition from {state:?} on observable event {event:?}")]
    IncompleteRealization { state: String, event: String },
    #[error("supervisor realization has a transition on unobservable event {0:?}")]
    UnobservableRealizationEvent(String),
    #[error("no control action given for supervisor state {0:?}")]
    MissingGamma(String),
    #[error("special state {0:?} must enable exactly the uncontrollable events")]
    SpecialStateGamma(String),
    #[error("realization alphabet differs from the plant alphabet")]
    AlphabetMismatch,
}

/// Interned event identifier, an index into an [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(u16);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        EventId(i as u16)
    }
}

/// Interned state identifier, an index into one automaton's state table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        StateId(i as u32)
    }
}

/// A set of events as a bitmask over alphabet indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EventSet(u64);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn from_bits(bits: u64) -> Self {
        EventSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, e: EventId) -> bool {
        self.0 & (1u64 << e.0) != 0
    }

    pub fn with(self, e: EventId) -> Self {
        EventSet(self.0 | (1u64 << e.0))
    }

    pub fn union(self, other: EventSet) -> Self {
        EventSet(self.0 | other.0)
    }

    pub fn intersection(self, other: EventSet) -> Self {
        EventSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: EventSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = EventId> {
        (0..64u16).filter(move |i| self.0 & (1u64 << i) != 0).map(EventId)
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<T: IntoIterator<Item = EventId>>(iter: T) -> Self {
        iter.into_iter().fold(EventSet::EMPTY, EventSet::with)
    }
}

/// An admissible control action: the set of enabled events, always a
/// superset of the uncontrollable events of its alphabet.
///
/// Actions are identified by their bitmask, so two actions enabling the same
/// events are the same action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlAction(EventSet);

impl ControlAction {
    /// Checks admissibility against `alphabet`.
    pub fn new(enabled: EventSet, alphabet: &Alphabet) -> Result<Self, ModelError> {
        let missing = alphabet.uncontrollable().0 & !enabled.0;
        if missing != 0 {
            let event = EventId(missing.trailing_zeros() as u16);
            return Err(ModelError::NotAdmissible {
                action: alphabet.render_set(enabled),
                event: alphabet.name(event).to_string(),
            });
        }
        if enabled.0 & !alphabet.all().0 != 0 {
            return Err(ModelError::UnknownEvent(format!("#{}", 63 - enabled.0.leading_zeros())));
        }
        Ok(ControlAction(enabled))
    }

    /// Wraps a set without checking admissibility.
    #[cfg(test)]
    pub(crate) fn trusted(enabled: EventSet) -> Self {
        ControlAction(enabled)
    }

    pub fn enabled(self) -> EventSet {
        self.0
    }

    pub fn allows(self, e: EventId) -> bool {
        self.0.contains(e)
    }

    pub fn is_subset(self, other: ControlAction) -> bool {
        self.0.is_subset(other.0)
    }
}

/// Static information about one event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventInfo {
    pub name: String,
    pub controllable: bool,
    pub observable: bool,
}

impl EventInfo {
    pub fn new(name: impl Into<String>, controllable: bool, observable: bool) -> Self {
        EventInfo {
            name: name.into(),
            controllable,
            observable,
        }
    }
}

/// Checks that `name` is usable as an event or state name.
pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.chars().any(|c| c.is_whitespace() || DELIMITERS.contains(&c))
        && !RESERVED_PREFIXES.iter().any(|p| name.starts_with(p))
}

/// An ordered event set with its controllability and observability partitions.
#[derive(Debug, Clone)]
pub struct Alphabet {
    events: Vec<EventInfo>,
    index: HashMap<String, EventId>,
    controllable: EventSet,
    observable: EventSet,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(events: Vec<EventInfo>) -> Result<Self, ModelError> {
        if events.len() > MAX_EVENTS {
            return Err(ModelError::TooManyEvents(events.len()));
        }
        let mut index = HashMap::with_capacity(events.len());
        let mut controllable = EventSet::EMPTY;
        let mut observable = EventSet::EMPTY;
        for (i, info) in events.iter().enumerate() {
            if !valid_name(&info.name) {
                return Err(ModelError::InvalidEventName(info.name.clone()));
            }
            let id = EventId::from_index(i);
            if index.insert(info.name.clone(), id).is_some() {
                return Err(ModelError::DuplicateEvent(info.name.clone()));
            }
            if info.controllable {
                controllable = controllable.with(id);
            }
            if info.observable {
                observable = observable.with(id);
            }
        }
        Ok(Alphabet {
            events,
            index,
            controllable,
            observable,
        })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[EventInfo] {
        &self.events
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.events.len()).map(EventId::from_index)
    }

    pub fn event(&self, name: &str) -> Option<EventId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.events[e.index()].name
    }

    pub fn contains(&self, e: EventId) -> bool {
        e.index() < self.events.len()
    }

    pub fn is_observable(&self, e: EventId) -> bool {
        self.observable.contains(e)
    }

    pub fn is_controllable(&self, e: EventId) -> bool {
        self.controllable.contains(e)
    }

    pub fn all(&self) -> EventSet {
        if self.events.len() == 64 {
            EventSet(u64::MAX)
        } else {
            EventSet((1u64 << self.events.len()) - 1)
        }
    }

    pub fn controllable(&self) -> EventSet {
        self.controllable
    }

    pub fn uncontrollable(&self) -> EventSet {
        EventSet(self.all().0 & !self.controllable.0)
    }

    pub fn observable(&self) -> EventSet {
        self.observable
    }

    pub fn unobservable(&self) -> EventSet {
        EventSet(self.all().0 & !self.observable.0)
    }

    /// The action enabling only the uncontrollable events.
    pub fn minimal_action(&self) -> ControlAction {
        ControlAction(self.uncontrollable())
    }

    /// The action enabling every event.
    pub fn full_action(&self) -> ControlAction {
        ControlAction(self.all())
    }

    /// Every admissible action, in ascending bitmask order.
    pub fn admissible_actions(&self) -> Vec<ControlAction> {
        let uc = self.uncontrollable().0;
        let c = self.controllable.0;
        // Enumerate submasks of the controllable events.
        let mut subsets = Vec::with_capacity(1usize << c.count_ones());
        let mut sub = 0u64;
        loop {
            subsets.push(ControlAction(EventSet(uc | sub)));
            if sub == c {
                break;
            }
            sub = (sub.wrapping_sub(c)) & c;
        }
        subsets.sort();
        subsets
    }

    /// Resolves event names, failing on the first unknown one.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<EventId>, ModelError> {
        names
            .iter()
            .map(|n| {
                self.event(n.as_ref())
                    .ok_or_else(|| ModelError::UnknownEvent(n.as_ref().to_string()))
            })
            .collect()
    }

    /// Builds an admissible action from event names. With `add_uncontrollable`
    /// the uncontrollable events are enabled implicitly; otherwise omitting
    /// one is an admissibility error.
    pub fn action<S: AsRef<str>>(&self, names: &[S], add_uncontrollable: bool) -> Result<ControlAction, ModelError> {
        let mut set: EventSet = self.resolve(names)?.into_iter().collect();
        if add_uncontrollable {
            set = set.union(self.uncontrollable());
        }
        ControlAction::new(set, self)
    }

    /// Renders an event set as `{a,b}` in alphabet order.
    pub fn render_set(&self, set: EventSet) -> String {
        let names: Vec<&str> = set.iter().filter(|e| self.contains(*e)).map(|e| self.name(e)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Renders a control action as `π{a,b}`.
    pub fn render_action(&self, action: ControlAction) -> String {
        format!("π{}", self.render_set(action.enabled()))
    }

    pub fn render_word(&self, word: &[EventId]) -> String {
        let names: Vec<&str> = word.iter().map(|e| self.name(*e)).collect();
        format!("[{}]", names.join(","))
    }
}

/// A deterministic finite automaton `(Q, Σ, δ, q0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Arc<Alphabet>,
    states: Vec<String>,
    state_index: HashMap<String, StateId>,
    // Sorted by event for each source state.
    transitions: Vec<Vec<(EventId, StateId)>>,
    initial: StateId,
}

/// Incremental, name-based construction of an [`Automaton`].
#[derive(Debug)]
pub struct AutomatonBuilder {
    alphabet: Arc<Alphabet>,
    states: Vec<String>,
    state_index: HashMap<String, StateId>,
    transitions: Vec<Vec<(EventId, StateId)>>,
}

impl AutomatonBuilder {
    pub fn new(alphabet: Arc<Alphabet>) -> Self {
        AutomatonBuilder {
            alphabet,
            states: Vec::new(),
            state_index: HashMap::new(),
            transitions: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: &str) -> Result<StateId, ModelError> {
        if !valid_name(name) {
            return Err(ModelError::InvalidStateName(name.to_string()));
        }
        if self.state_index.contains_key(name) {
            return Err(ModelError::DuplicateState(name.to_string()));
        }
        let id = StateId::from_index(self.states.len());
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        self.transitions.push(Vec::new());
        Ok(id)
    }

    pub fn state(&self, name: &str) -> Result<StateId, ModelError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn add_transition(&mut self, from: &str, event: &str, to: &str) -> Result<(), ModelError> {
        let from = self.state(from)?;
        let to = self.state(to)?;
        let event = self
            .alphabet
            .event(event)
            .ok_or_else(|| ModelError::UnknownEvent(event.to_string()))?;
        self.add_transition_ids(from, event, to)
    }

    pub fn add_transition_ids(&mut self, from: StateId, event: EventId, to: StateId) -> Result<(), ModelError> {
        let edges = &mut self.transitions[from.index()];
        match edges.binary_search_by_key(&event, |(e, _)| *e) {
            Ok(pos) if edges[pos].1 == to => Ok(()),
            Ok(_) => Err(ModelError::Nondeterministic {
                state: self.states[from.index()].clone(),
                event: self.alphabet.name(event).to_string(),
            }),
            Err(pos) => {
                edges.insert(pos, (event, to));
                Ok(())
            }
        }
    }

    pub fn has_transition(&self, from: StateId, event: EventId) -> bool {
        self.transitions[from.index()]
            .binary_search_by_key(&event, |(e, _)| *e)
            .is_ok()
    }

    pub fn build(self, initial: &str) -> Result<Automaton, ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        let initial = self.state(initial)?;
        Ok(Automaton {
            alphabet: self.alphabet,
            states: self.states,
            state_index: self.state_index,
            transitions: self.transitions,
            initial,
        })
    }
}

impl Automaton {
    /// Convenience constructor from name triples `(from, event, to)`.
    pub fn from_names(
        alphabet: Arc<Alphabet>,
        states: &[&str],
        initial: &str,
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self, ModelError> {
        let mut b = AutomatonBuilder::new(alphabet);
        for s in states {
            b.add_state(s)?;
        }
        for (f, e, t) in transitions {
            b.add_transition(f, e, t)?;
        }
        b.build(initial)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn shared_alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId::from_index)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// `δ(q, σ)` when defined.
    pub fn step(&self, q: StateId, e: EventId) -> Option<StateId> {
        let edges = &self.transitions[q.index()];
        edges
            .binary_search_by_key(&e, |(ev, _)| *ev)
            .ok()
            .map(|pos| edges[pos].1)
    }

    /// Outgoing transitions of `q`, sorted by event.
    pub fn edges(&self, q: StateId) -> &[(EventId, StateId)] {
        &self.transitions[q.index()]
    }

    /// All transitions `(from, event, to)` in canonical order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .flat_map(|(i, es)| es.iter().map(move |(e, t)| (StateId::from_index(i), *e, *t)))
    }

    /// `δ(q, s)` for a whole word.
    pub fn run_from(&self, q: StateId, word: &[EventId]) -> Option<StateId> {
        word.iter().try_fold(q, |q, e| self.step(q, *e))
    }

    pub fn run(&self, word: &[EventId]) -> Option<StateId> {
        self.run_from(self.initial, word)
    }

    pub fn render_states<'a>(&self, states: impl IntoIterator<Item = &'a StateId>) -> String {
        let names: Vec<&str> = states.into_iter().map(|q| self.state_name(*q)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// Natural projection onto the observable events of `alphabet`.
pub fn natural_projection(word: &[EventId], alphabet: &Alphabet) -> Result<Vec<EventId>, ModelError> {
    word.iter()
        .filter_map(|e| {
            if !alphabet.contains(*e) {
                Some(Err(ModelError::UnknownEvent(format!("#{}", e.index()))))
            } else if alphabet.is_observable(*e) {
                Some(Ok(*e))
            } else {
                None
            }
        })
        .collect()
}

/// The sub-automaton of states reachable from the initial state. Surviving
/// states keep their relative order.
pub fn accessible_part(a: &Automaton) -> Automaton {
    let mut seen = vec![false; a.num_states()];
    let mut queue = VecDeque::from([a.initial]);
    seen[a.initial.index()] = true;
    while let Some(q) = queue.pop_front() {
        for (_, t) in a.edges(q) {
            if !seen[t.index()] {
                seen[t.index()] = true;
                queue.push_back(*t);
            }
        }
    }
    let mut remap = vec![None; a.num_states()];
    let mut states = Vec::new();
    for (i, name) in a.states.iter().enumerate() {
        if seen[i] {
            remap[i] = Some(StateId::from_index(states.len()));
            states.push(name.clone());
        }
    }
    let state_index = states
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), StateId::from_index(i)))
        .collect();
    let transitions = a
        .transitions
        .iter()
        .enumerate()
        .filter(|(i, _)| seen[*i])
        .map(|(_, es)| es.iter().map(|(e, t)| (*e, remap[t.index()].unwrap())).collect())
        .collect();
    Automaton {
        alphabet: a.alphabet.clone(),
        states,
        state_index,
        transitions,
        initial: remap[a.initial.index()].unwrap(),
    }
}

/// Closure of `seeds` under invisible labels; returns a sorted, deduplicated
/// state list. Shared by the automaton observer and the closed-loop oracle.
pub(crate) fn silent_closure<L, I, F, V>(seeds: impl IntoIterator<Item = usize>, edges: F, visible: V) -> Vec<usize>
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = (L, usize)>,
    V: Fn(&L) -> bool,
{
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = Vec::new();
    for s in seeds {
        if seen.insert(s) {
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for (label, t) in edges(s) {
            if !visible(&label) && seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen.into_iter().collect()
}

/// States reached from `set` by one transition whose label satisfies `hit`.
pub(crate) fn labelled_step<L, I, F, H>(set: &[usize], edges: F, hit: H) -> Vec<usize>
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = (L, usize)>,
    H: Fn(&L) -> bool,
{
    let mut out = BTreeSet::new();
    for s in set {
        for (label, t) in edges(*s) {
            if hit(&label) {
                out.insert(t);
            }
        }
    }
    out.into_iter().collect()
}

/// Result of a subset construction: the deterministic observer and, for each
/// observer state, the sorted set of original states it stands for.
#[derive(Debug, Clone)]
pub struct Observer {
    pub automaton: Automaton,
    pub members: Vec<Vec<StateId>>,
}

/// Subset construction of `a` over the `visible` events. Each observer state is
/// the invisible-closure of a set of `a`-states, named `{q..}` in ascending
/// state order.
pub fn observer(a: &Automaton, visible: EventSet) -> Observer {
    let edges = |s: usize| a.edges(StateId::from_index(s)).iter().map(|(e, t)| (*e, t.index()));
    let is_visible = |e: &EventId| visible.contains(*e);
    let start = silent_closure([a.initial.index()], edges, is_visible);

    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets: Vec<Vec<usize>> = vec![start.clone()];
    let mut trans: Vec<Vec<(EventId, usize)>> = vec![Vec::new()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let current = subsets[i].clone();
        for e in visible.iter().filter(|e| a.alphabet.contains(*e)) {
            let moved = labelled_step(&current, edges, |l| *l == e);
            if moved.is_empty() {
                continue;
            }
            let next = silent_closure(moved, edges, is_visible);
            let j = match index.get(&next) {
                Some(j) => *j,
                None => {
                    let j = subsets.len();
                    index.insert(next.clone(), j);
                    subsets.push(next);
                    trans.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            trans[i].push((e, j));
        }
    }

    let members: Vec<Vec<StateId>> = subsets
        .iter()
        .map(|s| s.iter().map(|i| StateId::from_index(*i)).collect())
        .collect();
    let states: Vec<String> = members.iter().map(|m| a.render_states(m)).collect();
    let state_index = states
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), StateId::from_index(i)))
        .collect();
    let transitions = trans
        .into_iter()
        .map(|es| es.into_iter().map(|(e, j)| (e, StateId::from_index(j))).collect())
        .collect();
    Observer {
        automaton: Automaton {
            alphabet: a.alphabet.clone(),
            states,
            state_index,
            transitions,
            initial: StateId::from_index(0),
        },
        members,
    }
}

/// `h ⊑ g`: same alphabet and initial state, and `h` is a subgraph of `g`.
/// States are matched by name.
pub fn is_subautomaton(h: &Automaton, g: &Automaton) -> bool {
    if h.alphabet() != g.alphabet() || h.state_name(h.initial) != g.state_name(g.initial) {
        return false;
    }
    let mut map = Vec::with_capacity(h.num_states());
    for name in &h.states {
        match g.state(name) {
            Some(q) => map.push(q),
            None => return false,
        }
    }
    h.transitions()
        .all(|(f, e, t)| g.step(map[f.index()], e) == Some(map[t.index()]))
}

/// A networked supervisor `S = (A, γ)`: a realization automaton over the
/// observable events plus a control action per realization state.
///
/// The realization shares the plant alphabet and only has transitions on
/// observable events. It is complete: every observable event is defined at
/// every state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkedSupervisor {
    realization: Automaton,
    gamma: Vec<ControlAction>,
    special_state: Option<StateId>,
}

impl NetworkedSupervisor {
    pub fn new(
        realization: Automaton,
        gamma: Vec<ControlAction>,
        special_state: Option<StateId>,
    ) -> Result<Self, ModelError> {
        let alphabet = realization.alphabet().clone();
        if gamma.len() < realization.num_states() {
            let missing = realization.state_name(StateId::from_index(gamma.len()));
            return Err(ModelError::MissingGamma(missing.to_string()));
        }
        if gamma.len() > realization.num_states() {
            return Err(ModelError::UnknownState(format!("#{}", realization.num_states())));
        }
        for (_, e, _) in realization.transitions() {
            if !alphabet.is_observable(e) {
                return Err(ModelError::UnobservableRealizationEvent(alphabet.name(e).to_string()));
            }
        }
        for x in realization.states() {
            for e in alphabet.observable().iter() {
                if realization.step(x, e).is_none() {
                    return Err(ModelError::IncompleteRealization {
                        state: realization.state_name(x).to_string(),
                        event: alphabet.name(e).to_string(),
                    });
                }
            }
        }
        for pi in &gamma {
            ControlAction::new(pi.enabled(), &alphabet)?;
        }
        if let Some(x) = special_state {
            if gamma[x.index()] != alphabet.minimal_action() {
                return Err(ModelError::SpecialStateGamma(realization.state_name(x).to_string()));
            }
        }
        Ok(NetworkedSupervisor {
            realization,
            gamma,
            special_state,
        })
    }

    /// The supervisor with a single state that enables every event.
    pub fn permissive(alphabet: Arc<Alphabet>) -> Self {
        let mut b = AutomatonBuilder::new(alphabet.clone());
        let x = b.add_state("x0").expect("valid name");
        for e in alphabet.observable().iter() {
            b.add_transition_ids(x, e, x).expect("fresh transition");
        }
        let realization = b.build("x0").expect("non-empty");
        NetworkedSupervisor {
            realization,
            gamma: vec![alphabet.full_action()],
            special_state: None,
        }
    }

    pub fn realization(&self) -> &Automaton {
        &self.realization
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.realization.alphabet()
    }

    pub fn gamma(&self, x: StateId) -> ControlAction {
        self.gamma[x.index()]
    }

    pub fn gammas(&self) -> &[ControlAction] {
        &self.gamma
    }

    pub fn special_state(&self) -> Option<StateId> {
        self.special_state
    }

    pub fn initial(&self) -> StateId {
        self.realization.initial()
    }

    /// `ξ(x, σ)`; total on observable events.
    pub fn next(&self, x: StateId, e: EventId) -> StateId {
        self.realization
            .step(x, e)
            .expect("realization is complete over observable events")
    }

    /// `ξ(x0, t)`.
    pub fn state_after(&self, t: &[EventId]) -> Result<StateId, ModelError> {
        let alphabet = self.alphabet();
        let mut x = self.initial();
        for e in t {
            if !alphabet.contains(*e) {
                return Err(ModelError::UnknownEvent(format!("#{}", e.index())));
            }
            if !alphabet.is_observable(*e) {
                return Err(ModelError::NotObservable(alphabet.name(*e).to_string()));
            }
            x = self.next(x, *e);
        }
        Ok(x)
    }

    /// `S(t) = γ(ξ(x0, t))`.
    pub fn decision(&self, t: &[EventId]) -> Result<ControlAction, ModelError> {
        Ok(self.gamma(self.state_after(t)?))
    }

    /// `S(ε)`.
    pub fn initial_action(&self) -> ControlAction {
        self.gamma(self.initial())
    }

    /// Same realization, different control actions.
    pub fn with_gamma(&self, gamma: Vec<ControlAction>) -> Result<Self, ModelError> {
        NetworkedSupervisor::new(self.realization.clone(), gamma, self.special_state)
    }
}

/// `supervisor_decision`: the control action issued after observing `t`.
pub fn supervisor_decision(s: &NetworkedSupervisor, t: &[EventId]) -> Result<ControlAction, ModelError> {
    s.decision(t)
}

impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn greek() -> Arc<Alphabet> {
        Arc::new(
            Alphabet::new(vec![
                EventInfo::new("alpha", true, true),
                EventInfo::new("beta", true, false),
                EventInfo::new("lambda", true, false),
            ])
            .unwrap(),
        )
    }

    fn chain_with_isolated() -> Automaton {
        Automaton::from_names(
            greek(),
            &["q1", "q2", "q3"],
            "q1",
            &[("q1", "alpha", "q2"), ("q3", "beta", "q1")],
        )
        .unwrap()
    }

    #[test]
    fn projection_keeps_observable_events_in_order() {
        let a = greek();
        let w = a.resolve(&["alpha", "lambda", "beta"]).unwrap();
        assert_eq!(natural_projection(&w, &a).unwrap(), a.resolve(&["alpha"]).unwrap());
        assert!(natural_projection(&[], &a).unwrap().is_empty());
    }

    #[test]
    fn projection_is_identity_when_everything_is_observable() {
        let a = Alphabet::new(vec![
            EventInfo::new("alpha", true, true),
            EventInfo::new("beta", true, true),
        ])
        .unwrap();
        let w = a.resolve(&["alpha", "alpha"]).unwrap();
        assert_eq!(natural_projection(&w, &a).unwrap(), w);
    }

    #[test]
    fn projection_rejects_unknown_events() {
        let a = greek();
        assert!(natural_projection(&[EventId::from_index(9)], &a).is_err());
        assert!(a.resolve(&["gamma"]).is_err());
    }

    #[test]
    fn accessible_part_drops_unreachable_states() {
        let acc = accessible_part(&chain_with_isolated());
        assert_eq!(acc.state_names(), ["q1", "q2"]);
        assert_eq!(acc.num_transitions(), 1);
        assert_eq!(acc.state_name(acc.initial()), "q1");
    }

    #[test]
    fn accessible_part_is_a_fixpoint_on_reachable_automata() {
        let acc = accessible_part(&chain_with_isolated());
        assert_eq!(accessible_part(&acc), acc);
    }

    #[test]
    fn observer_with_everything_visible_is_the_accessible_part() {
        let g = chain_with_isolated();
        let obs = observer(&g, g.alphabet().all());
        let acc = accessible_part(&g);
        assert_eq!(obs.automaton.num_states(), acc.num_states());
        assert_eq!(obs.automaton.num_transitions(), acc.num_transitions());
        assert!(obs.members.iter().all(|m| m.len() == 1));
    }

    #[test]
    fn observer_without_visible_events_is_one_closure_state() {
        let g = Automaton::from_names(
            greek(),
            &["q1", "q2", "q3"],
            "q1",
            &[("q1", "beta", "q2"), ("q2", "lambda", "q3")],
        )
        .unwrap();
        let obs = observer(&g, EventSet::EMPTY);
        assert_eq!(obs.automaton.num_states(), 1);
        assert_eq!(obs.members[0].len(), 3);
        assert_eq!(obs.automaton.state_names()[0], "{q1,q2,q3}");
    }

    #[test]
    fn subautomaton_relation() {
        let g = chain_with_isolated();
        assert!(is_subautomaton(&g, &g));
        let h = Automaton::from_names(greek(), &["q1", "q2"], "q1", &[("q1", "alpha", "q2")]).unwrap();
        assert!(is_subautomaton(&h, &g));
        let bad = Automaton::from_names(greek(), &["q1", "q2"], "q1", &[("q2", "alpha", "q1")]).unwrap();
        assert!(!is_subautomaton(&bad, &g));
    }

    #[test]
    fn rejects_nondeterminism_and_bad_names() {
        let a = greek();
        let err = Automaton::from_names(
            a.clone(),
            &["q1", "q2"],
            "q1",
            &[("q1", "alpha", "q2"), ("q1", "alpha", "q1")],
        );
        assert!(matches!(err, Err(ModelError::Nondeterministic { .. })));
        assert!(Alphabet::new(vec![EventInfo::new("dlv!x", true, true)]).is_err());
        assert!(Alphabet::new(vec![EventInfo::new("a b", true, true)]).is_err());
        assert!(Automaton::from_names(a, &["q(1)"], "q(1)", &[]).is_err());
    }

    #[test]
    fn admissible_actions_are_supersets_of_uncontrollables() {
        let a = Alphabet::new(vec![
            EventInfo::new("a", true, true),
            EventInfo::new("u", false, true),
            EventInfo::new("b", true, false),
        ])
        .unwrap();
        let acts = a.admissible_actions();
        assert_eq!(acts.len(), 4);
        assert!(acts.iter().all(|p| a.uncontrollable().is_subset(p.enabled())));
        assert!(acts.windows(2).all(|w| w[0] < w[1]));
        assert!(a.action(&["a"], false).is_err());
        assert_eq!(a.action(&["a"], true).unwrap().enabled().len(), 2);
    }

    #[test]
    fn supervisor_must_be_complete_and_admissible() {
        let a = greek();
        let real = Automaton::from_names(a.clone(), &["p1", "p2"], "p1", &[("p1", "alpha", "p2")]).unwrap();
        let gamma = vec![a.full_action(), a.minimal_action()];
        assert!(matches!(
            NetworkedSupervisor::new(real, gamma, None),
            Err(ModelError::IncompleteRealization { .. })
        ));
    }
}
