//! The window-based estimator for control delays only.
//!
//! Its language `L_a` admits `sσ` whenever `s ∈ L_a`, `sσ` is defined in the
//! plant, and `σ` is enabled by one of the decisions `S(P(s₋ᵢ))` for
//! `i ∈ [0, N_c]`, where `s₋ᵢ` drops the last `min(i, |s|)` events of `s`.
//! It ignores the order in which delayed actions take effect, so it
//! over-approximates the closed-loop language.

use std::collections::{BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::automaton::{Automaton, ControlAction, EventId, EventSet, ModelError, NetworkedSupervisor, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A plant state with the supervisor state reached by its projection and
/// the decisions of the last `N_c + 1` prefixes, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedState {
    pub plant: StateId,
    pub sup: StateId,
    pub recent_actions: Vec<ControlAction>,
}

impl ExtendedState {
    pub fn initial(g: &Automaton, sup: &NetworkedSupervisor, n_c: u32) -> Self {
        ExtendedState {
            plant: g.initial(),
            sup: sup.initial(),
            recent_actions: vec![sup.initial_action(); n_c as usize + 1],
        }
    }

    /// Union of the windowed decisions.
    pub fn enabled(&self) -> EventSet {
        self.recent_actions
            .iter()
            .fold(EventSet::EMPTY, |acc, p| acc.union(p.enabled()))
    }

    /// Extension by one plant event, if admitted.
    pub fn step(&self, g: &Automaton, sup: &NetworkedSupervisor, e: EventId) -> Option<ExtendedState> {
        if !self.enabled().contains(e) {
            return None;
        }
        let q = g.step(self.plant, e)?;
        let x = if g.alphabet().is_observable(e) {
            sup.next(self.sup, e)
        } else {
            self.sup
        };
        let mut recent = self.recent_actions[1..].to_vec();
        recent.push(sup.gamma(x));
        Some(ExtendedState {
            plant: q,
            sup: x,
            recent_actions: recent,
        })
    }
}

fn check_alphabet(g: &Automaton, sup: &NetworkedSupervisor) -> Result<(), ModelError> {
    if g.alphabet() != sup.alphabet() {
        return Err(ModelError::AlphabetMismatch);
    }
    Ok(())
}

/// Membership in `L_a`, evaluated directly on the recursive definition.
pub fn la_member(g: &Automaton, sup: &NetworkedSupervisor, n_c: u32, s: &[EventId]) -> Result<bool, BaselineError> {
    check_alphabet(g, sup)?;
    let a = g.alphabet();
    for e in s {
        if !a.contains(*e) {
            return Err(ModelError::UnknownEvent(format!("#{}", e.index())).into());
        }
    }
    if g.run(s).is_none() {
        return Ok(false);
    }
    for k in 0..s.len() {
        let sigma = s[k];
        let enabled = (0..=n_c as usize).any(|i| {
            let prefix = &s[..k - i.min(k)];
            let t: Vec<EventId> = prefix.iter().copied().filter(|e| a.is_observable(*e)).collect();
            sup.decision(&t).map(|p| p.allows(sigma)).unwrap_or(false)
        });
        if !enabled {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `{ δ(q0, s) : s ∈ L_a, P(s) = t }` by forward search over extended states.
pub fn baseline_estimate(
    g: &Automaton,
    sup: &NetworkedSupervisor,
    n_c: u32,
    t: &[EventId],
    budget: usize,
) -> Result<BTreeSet<StateId>, BaselineError> {
    check_alphabet(g, sup)?;
    let a = g.alphabet();
    for e in t {
        if !a.contains(*e) {
            return Err(ModelError::UnknownEvent(format!("#{}", e.index())).into());
        }
        if !a.is_observable(*e) {
            return Err(ModelError::NotObservable(a.name(*e).to_string()).into());
        }
    }
    let start = (ExtendedState::initial(g, sup, n_c), 0usize);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut out = BTreeSet::new();
    while let Some((x, pos)) = queue.pop_front() {
        if pos == t.len() {
            out.insert(x.plant);
        }
        for (e, _) in g.edges(x.plant) {
            let next_pos = if a.is_observable(*e) {
                if pos < t.len() && t[pos] == *e {
                    pos + 1
                } else {
                    continue;
                }
            } else {
                pos
            };
            if let Some(y) = x.step(g, sup, *e) {
                let item = (y, next_pos);
                if !seen.contains(&item) {
                    if seen.len() >= budget {
                        return Err(BaselineError::BudgetExceeded(budget));
                    }
                    seen.insert(item.clone());
                    queue.push_back(item);
                }
            }
        }
    }
    Ok(out)
}
