//! Online augmented-state estimation under observation/control delays and
//! losses.
//!
//! After each delivered observation the estimate is updated in two steps: the
//! delayed observable reach [`dor`] keeps the augmented states whose
//! observation channel has the delivered event at its head, and the delayed
//! unobservable reach [`dur`] issues the new control action and closes under
//! plant occurrences, executions and losses.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automaton::{Automaton, ControlAction, EventId, ModelError, StateId};
use crate::channels::{CtrlChannelConfig, DelayBounds, ObsChannelConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("observation {0:?} is inconsistent with the model and the current estimate")]
    InconsistentObservation(String),
}

/// `(q, θ_o, θ_c)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AugmentedState {
    pub plant: StateId,
    pub obs: ObsChannelConfig,
    pub ctrl: CtrlChannelConfig,
}

impl AugmentedState {
    /// `(q0, (ε,0), (π, ε, 0))`.
    pub fn seed(plant: &Automaton, action: ControlAction) -> Self {
        AugmentedState {
            plant: plant.initial(),
            obs: ObsChannelConfig::empty(),
            ctrl: CtrlChannelConfig::new(action),
        }
    }

    /// `(q, ([..], n=0), (π{..}, [..], m=0))`.
    pub fn render(&self, plant: &Automaton) -> String {
        format!(
            "({}, {}, {})",
            plant.state_name(self.plant),
            self.obs.render(plant.alphabet()),
            self.ctrl.render(plant.alphabet())
        )
    }

    /// Successors under the four closure generators: plant occurrence,
    /// control execution, observation loss and control loss.
    pub fn unobservable_successors(&self, plant: &Automaton, b: &DelayBounds) -> Vec<AugmentedState> {
        let mut out = Vec::new();
        if self.obs.aged_num() <= b.obs_delay && self.ctrl.aged_num() <= b.ctrl_delay {
            for (e, q) in plant.edges(self.plant) {
                if self.ctrl.active.allows(*e) {
                    out.push(AugmentedState {
                        plant: *q,
                        obs: self.obs.push_event(*e, plant.alphabet()),
                        ctrl: self.ctrl.aged(),
                    });
                }
            }
        }
        if let Ok(ctrl) = self.ctrl.execute() {
            out.push(AugmentedState { ctrl, ..self.clone() });
        }
        for i in 1..=self.obs.queue.len() {
            if let Ok(obs) = self.obs.lose(i, b.obs_loss) {
                out.push(AugmentedState { obs, ..self.clone() });
            }
        }
        for i in 1..=self.ctrl.queue.len() {
            if let Ok(ctrl) = self.ctrl.lose(i, b.ctrl_loss) {
                out.push(AugmentedState { ctrl, ..self.clone() });
            }
        }
        out
    }
}

/// A canonical set of augmented states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AugmentedEstimate(BTreeSet<AugmentedState>);

impl AugmentedEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, z: &AugmentedState) -> bool {
        self.0.contains(z)
    }

    pub fn insert(&mut self, z: AugmentedState) -> bool {
        self.0.insert(z)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AugmentedState> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &AugmentedEstimate) -> bool {
        self.0.is_subset(&other.0)
    }

    /// `FC`: the plant components.
    pub fn plant_states(&self) -> BTreeSet<StateId> {
        fc(self)
    }

    /// Observable events at the head of some member's observation queue.
    pub fn head_events(&self) -> BTreeSet<EventId> {
        self.0.iter().filter_map(|z| z.obs.head()).collect()
    }

    /// `{z1; z2; ..}` with members in canonical order.
    pub fn render(&self, plant: &Automaton) -> String {
        let items: Vec<String> = self.0.iter().map(|z| z.render(plant)).collect();
        format!("{{{}}}", items.join("; "))
    }
}

impl FromIterator<AugmentedState> for AugmentedEstimate {
    fn from_iter<I: IntoIterator<Item = AugmentedState>>(iter: I) -> Self {
        AugmentedEstimate(iter.into_iter().collect())
    }
}

impl IntoIterator for AugmentedEstimate {
    type Item = AugmentedState;
    type IntoIter = std::collections::btree_set::IntoIter<AugmentedState>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a AugmentedEstimate {
    type Item = &'a AugmentedState;
    type IntoIter = std::collections::btree_set::Iter<'a, AugmentedState>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Order in which the closure worklist is drained. The result does not
/// depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorklistOrder {
    Fifo,
    Lifo,
    Shuffled(u64),
}

/// `DUR(z, π)`: issue `π` (or seed the initial augmented state when `z` is
/// empty) and close under the unobservable generators.
pub fn dur(
    z: &AugmentedEstimate,
    action: ControlAction,
    plant: &Automaton,
    b: &DelayBounds,
) -> Result<AugmentedEstimate, EstimatorError> {
    dur_with(z, action, plant, b, WorklistOrder::Fifo)
}

pub fn dur_with(
    z: &AugmentedEstimate,
    action: ControlAction,
    plant: &Automaton,
    b: &DelayBounds,
    order: WorklistOrder,
) -> Result<AugmentedEstimate, EstimatorError> {
    ControlAction::new(action.enabled(), plant.alphabet())?;
    let seeds: Vec<AugmentedState> = if z.is_empty() {
        vec![AugmentedState::seed(plant, action)]
    } else {
        z.iter()
            .map(|s| AugmentedState {
                ctrl: s.ctrl.issue_unchecked(action),
                ..s.clone()
            })
            .collect()
    };
    Ok(close(seeds, plant, b, order))
}

/// Closure of `seeds` under the unobservable generators.
pub fn close(
    seeds: impl IntoIterator<Item = AugmentedState>,
    plant: &Automaton,
    b: &DelayBounds,
    order: WorklistOrder,
) -> AugmentedEstimate {
    let mut seen: HashSet<AugmentedState> = HashSet::new();
    let mut work: VecDeque<AugmentedState> = VecDeque::new();
    for s in seeds {
        if seen.insert(s.clone()) {
            work.push_back(s);
        }
    }
    let mut rng = match order {
        WorklistOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    loop {
        let next = match (order, rng.as_mut()) {
            (WorklistOrder::Fifo, _) => work.pop_front(),
            (WorklistOrder::Lifo, _) => work.pop_back(),
            (WorklistOrder::Shuffled(_), Some(r)) if !work.is_empty() => {
                let i = r.gen_range(0..work.len());
                work.swap_remove_back(i)
            }
            _ => None,
        };
        let Some(s) = next else { break };
        for t in s.unobservable_successors(plant, b) {
            if seen.insert(t.clone()) {
                work.push_back(t);
            }
        }
    }
    seen.into_iter().collect()
}

/// `DOR(z, σ)`: members whose observation queue has `σ` at its head, with
/// that head removed. Control configurations are kept.
pub fn dor(z: &AugmentedEstimate, sigma: EventId) -> AugmentedEstimate {
    z.iter()
        .filter(|s| s.obs.head() == Some(sigma))
        .map(|s| AugmentedState {
            plant: s.plant,
            obs: s.obs.pop().expect("non-empty queue").1,
            ctrl: s.ctrl.clone(),
        })
        .collect()
}

/// `FC(z)`: the distinct plant components.
pub fn fc(z: &AugmentedEstimate) -> BTreeSet<StateId> {
    z.iter().map(|s| s.plant).collect()
}

/// A running estimator fed with delivered observations and issued actions.
#[derive(Debug, Clone)]
pub struct EstimatorSession {
    plant: Automaton,
    bounds: DelayBounds,
    current: AugmentedEstimate,
    history: Vec<(EventId, ControlAction)>,
}

impl EstimatorSession {
    /// `Ẽ(ε) = DUR(∅, π0)`.
    pub fn init(plant: &Automaton, bounds: DelayBounds, initial_action: ControlAction) -> Result<Self, EstimatorError> {
        let current = dur(&AugmentedEstimate::new(), initial_action, plant, &bounds)?;
        Ok(EstimatorSession {
            plant: plant.clone(),
            bounds,
            current,
            history: Vec::new(),
        })
    }

    /// `Ẽ(tσ) = DUR(DOR(Ẽ(t), σ), π)`. On error the session is unchanged.
    pub fn observe(&mut self, sigma: EventId, action: ControlAction) -> Result<&AugmentedEstimate, EstimatorError> {
        let a = self.plant.alphabet();
        if !a.contains(sigma) {
            return Err(ModelError::UnknownEvent(format!("#{}", sigma.index())).into());
        }
        if !a.is_observable(sigma) {
            return Err(ModelError::NotObservable(a.name(sigma).to_string()).into());
        }
        ControlAction::new(action.enabled(), a)?;
        let popped = dor(&self.current, sigma);
        if popped.is_empty() {
            return Err(EstimatorError::InconsistentObservation(a.name(sigma).to_string()));
        }
        self.current = dur(&popped, action, &self.plant, &self.bounds)?;
        self.history.push((sigma, action));
        Ok(&self.current)
    }

    pub fn plant(&self) -> &Automaton {
        &self.plant
    }

    pub fn bounds(&self) -> DelayBounds {
        self.bounds
    }

    pub fn current(&self) -> &AugmentedEstimate {
        &self.current
    }

    /// The networked state estimate `FC(Ẽ(t))`.
    pub fn nse(&self) -> BTreeSet<StateId> {
        fc(&self.current)
    }

    pub fn history(&self) -> &[(EventId, ControlAction)] {
        &self.history
    }

    /// Delivered events so far.
    pub fn delivered(&self) -> Vec<EventId> {
        self.history.iter().map(|(e, _)| *e).collect()
    }
}

impl fmt::Display for AugmentedEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} augmented states", self.len())
    }
}
