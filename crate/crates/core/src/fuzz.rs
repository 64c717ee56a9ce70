//! Reproducible random instances (plant, supervisor, bounds, safe states) for
//! property suites and the `fuzz` subcommand.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{
    accessible_part, Alphabet, Automaton, AutomatonBuilder, ControlAction, EventInfo, EventSet, NetworkedSupervisor,
    StateId,
};
use crate::channels::DelayBounds;
use crate::comm::{build_gs, CommAutomaton, CommEvent};
use crate::synthesis::SafetySpec;

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzCaps {
    pub max_states: usize,
    pub max_events: usize,
    pub max_bound: u32,
    pub max_sup_states: usize,
    /// Draws whose communication automaton exceeds this are rejected.
    pub gs_budget: usize,
    /// Only control delays (`N_o = N_lo = N_lc = 0`).
    pub control_delay_only: bool,
}

impl Default for FuzzCaps {
    fn default() -> Self {
        FuzzCaps {
            max_states: 6,
            max_events: 4,
            max_bound: 2,
            max_sup_states: 3,
            gs_budget: 20_000,
            control_delay_only: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FuzzInstance {
    pub index: usize,
    pub plant: Automaton,
    pub supervisor: NetworkedSupervisor,
    pub bounds: DelayBounds,
    pub spec: SafetySpec,
    /// Size of the communication automaton.
    pub gs_states: usize,
}

/// A random plant over `q0..`, `e0..`, restricted to its accessible part.
pub fn random_plant(rng: &mut impl Rng, caps: &FuzzCaps) -> Automaton {
    let n_events = rng.gen_range(1..=caps.max_events.max(1));
    let mut events: Vec<EventInfo> = (0..n_events)
        .map(|i| EventInfo::new(format!("e{i}"), rng.gen_bool(0.6), rng.gen_bool(0.6)))
        .collect();
    if !events.iter().any(|e| e.observable) {
        let k = rng.gen_range(0..n_events);
        events[k].observable = true;
    }
    let alphabet = Arc::new(Alphabet::new(events).expect("generated names are valid"));
    let n_states = rng.gen_range(2..=caps.max_states.max(2));
    let mut b = AutomatonBuilder::new(alphabet.clone());
    let ids: Vec<StateId> = (0..n_states)
        .map(|i| b.add_state(&format!("q{i}")).expect("fresh name"))
        .collect();
    for q in &ids {
        for e in alphabet.ids() {
            if rng.gen_bool(0.45) {
                let t = ids[rng.gen_range(0..n_states)];
                b.add_transition_ids(*q, e, t).expect("one transition per pair");
            }
        }
    }
    if alphabet.ids().all(|e| !b.has_transition(ids[0], e)) {
        let e = alphabet.ids().nth(rng.gen_range(0..alphabet.len())).expect("non-empty");
        b.add_transition_ids(ids[0], e, ids[rng.gen_range(1..n_states)])
            .expect("fresh");
    }
    accessible_part(&b.build("q0").expect("non-empty"))
}

/// A random admissible action.
pub fn random_action(rng: &mut impl Rng, alphabet: &Alphabet) -> ControlAction {
    let mut set = alphabet.uncontrollable();
    for e in alphabet.controllable().iter() {
        if rng.gen_bool(0.5) {
            set = set.with(e);
        }
    }
    ControlAction::new(set, alphabet).expect("admissible by construction")
}

/// A random complete supervisor over `alphabet` with `1..=max_states` states.
pub fn random_supervisor(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, max_states: usize) -> NetworkedSupervisor {
    let n = rng.gen_range(1..=max_states.max(1));
    let mut b = AutomatonBuilder::new(alphabet.clone());
    let ids: Vec<StateId> = (0..n).map(|i| b.add_state(&format!("x{i}")).expect("fresh")).collect();
    for x in &ids {
        for e in alphabet.observable().iter() {
            b.add_transition_ids(*x, e, ids[rng.gen_range(0..n)]).expect("fresh");
        }
    }
    let realization = b.build("x0").expect("non-empty");
    let gamma = (0..n).map(|_| random_action(rng, alphabet)).collect();
    NetworkedSupervisor::new(realization, gamma, None).expect("complete and admissible")
}

/// A supervisor issuing an independently drawn action after every delivered
/// string of length at most `depth`. States are the strings themselves
/// (`w`, `w.e0`, ...); longer strings stay in a final absorbing state.
pub fn random_tree_supervisor(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, depth: usize) -> NetworkedSupervisor {
    let obs: Vec<_> = alphabet.observable().iter().collect();
    let mut b = AutomatonBuilder::new(alphabet.clone());
    let mut gamma = Vec::new();
    let root = b.add_state("w").expect("fresh");
    gamma.push(random_action(rng, alphabet));
    let mut frontier = vec![(root, "w".to_string())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (x, name) in &frontier {
            for e in &obs {
                let child = format!("{name}.{}", alphabet.name(*e));
                let y = b.add_state(&child).expect("fresh");
                gamma.push(random_action(rng, alphabet));
                b.add_transition_ids(*x, *e, y).expect("fresh");
                next.push((y, child));
            }
        }
        frontier = next;
    }
    let tail = b.add_state("tail").expect("fresh");
    gamma.push(random_action(rng, alphabet));
    for (x, _) in frontier.iter().chain([(tail, String::new())].iter()) {
        for e in &obs {
            b.add_transition_ids(*x, *e, tail).expect("fresh");
        }
    }
    let realization = b.build("w").expect("non-empty");
    NetworkedSupervisor::new(realization, gamma, None).expect("complete and admissible")
}

/// The same realization with every action enlarged by random extra events.
pub fn widen(rng: &mut impl Rng, sup: &NetworkedSupervisor) -> NetworkedSupervisor {
    let a = sup.alphabet();
    let gamma = sup
        .gammas()
        .iter()
        .map(|p| {
            let extra: EventSet = a.controllable().iter().filter(|_| rng.gen_bool(0.5)).collect();
            ControlAction::new(p.enabled().union(extra), a).expect("superset of admissible")
        })
        .collect();
    sup.with_gamma(gamma).expect("same realization")
}

pub fn random_bounds(rng: &mut impl Rng, caps: &FuzzCaps) -> DelayBounds {
    let draw = |rng: &mut dyn rand::RngCore| rng.gen_range(0..=caps.max_bound);
    if caps.control_delay_only {
        return DelayBounds::new(0, draw(rng), 0, 0);
    }
    DelayBounds::new(draw(rng), draw(rng), draw(rng), draw(rng))
}

/// Safe states: the initial state plus each other state with probability 0.7.
pub fn random_spec(rng: &mut impl Rng, plant: &Automaton) -> SafetySpec {
    let safe = plant.states().filter(|q| *q == plant.initial() || rng.gen_bool(0.7));
    SafetySpec::from_ids(plant, safe.collect::<Vec<_>>()).expect("initial state is safe")
}

/// Whether `G_S` has a loss transition or a plant event occurring while a
/// notification or an action is still in transit.
pub fn exercises_channels(gs: &CommAutomaton) -> bool {
    (0..gs.num_states()).any(|i| {
        let s = gs.state(i);
        gs.edges(i).iter().any(|(e, _)| match e {
            CommEvent::ObsLoss(_) | CommEvent::CtrlLoss(_) => true,
            CommEvent::Plant(_) => !s.obs.is_empty() || !s.ctrl.is_empty(),
            _ => false,
        })
    })
}

/// `count` instances drawn from `seed`. Draws whose communication automaton
/// exceeds the budget or never uses the channels are rejected.
pub fn fuzz_corpus(seed: u64, count: usize, caps: &FuzzCaps) -> Vec<FuzzInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let plant = random_plant(&mut rng, caps);
        let supervisor = random_supervisor(&mut rng, plant.shared_alphabet(), caps.max_sup_states);
        let bounds = random_bounds(&mut rng, caps);
        let spec = random_spec(&mut rng, &plant);
        let Ok(gs) = build_gs(&plant, &supervisor, bounds, caps.gs_budget) else {
            continue;
        };
        if !exercises_channels(&gs) {
            continue;
        }
        out.push(FuzzInstance {
            index: out.len(),
            gs_states: gs.num_states(),
            plant,
            supervisor,
            bounds,
            spec,
        });
    }
    out
}
