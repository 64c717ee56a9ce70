//! A small worked plant and supervisor, used by the documentation, the test
//! suites and the shipped fixtures.
//!
//! Plant: `q1 -alpha-> q2`, `q2 -lambda-> q3`, `q2 -beta-> q4`,
//! `q3 -beta-> q4`, `q4 -lambda-> q5`. All events are controllable and only
//! `alpha` is observable.
//!
//! Supervisor: `p1 -alpha-> p2 -alpha-> p3 -alpha-> p3` with
//! `γ(p1) = {alpha,lambda}`, `γ(p2) = {beta}`, `γ(p3) = {}`.

use std::sync::Arc;

use crate::automaton::{Alphabet, Automaton, EventInfo, NetworkedSupervisor};

pub fn alphabet() -> Arc<Alphabet> {
    Arc::new(
        Alphabet::new(vec![
            EventInfo::new("alpha", true, true),
            EventInfo::new("beta", true, false),
            EventInfo::new("lambda", true, false),
        ])
        .expect("valid alphabet"),
    )
}

pub fn plant() -> Automaton {
    Automaton::from_names(
        alphabet(),
        &["q1", "q2", "q3", "q4", "q5"],
        "q1",
        &[
            ("q1", "alpha", "q2"),
            ("q2", "lambda", "q3"),
            ("q2", "beta", "q4"),
            ("q3", "beta", "q4"),
            ("q4", "lambda", "q5"),
        ],
    )
    .expect("valid plant")
}

pub fn supervisor() -> NetworkedSupervisor {
    supervisor_over(alphabet())
}

/// The example supervisor over a given (equal) alphabet.
pub fn supervisor_over(a: Arc<Alphabet>) -> NetworkedSupervisor {
    let realization = Automaton::from_names(
        a.clone(),
        &["p1", "p2", "p3"],
        "p1",
        &[("p1", "alpha", "p2"), ("p2", "alpha", "p3"), ("p3", "alpha", "p3")],
    )
    .expect("valid realization");
    let gamma = vec![
        a.action(&["alpha", "lambda"], false).expect("admissible"),
        a.action(&["beta"], false).expect("admissible"),
        a.action::<&str>(&[], false).expect("admissible"),
    ];
    NetworkedSupervisor::new(realization, gamma, None).expect("valid supervisor")
}

/// Every plant state except `q5`.
pub const SAFE_STATES: [&str; 4] = ["q1", "q2", "q3", "q4"];
