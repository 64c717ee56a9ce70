//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use netdes::automaton::{Automaton, ControlAction, EventId, NetworkedSupervisor, StateId};
use netdes::channels::DelayBounds;
use netdes::comm::{build_gs, CommAutomaton};
use netdes::estimator::{EstimatorError, EstimatorSession};
use netdes::fuzz::FuzzInstance;
use netdes::synthesis::{ExtractedSupervisor, Nbts, SafetySpec};

/// Walks every delivered string of length at most `max_len`, comparing the
/// online estimate against the observer of `G_S`. Returns the number of
/// strings compared.
pub fn estimates_match_gs(gs: &CommAutomaton, sup: &NetworkedSupervisor, max_len: usize) -> Result<usize, String> {
    let plant = gs.plant();
    let session = EstimatorSession::init(plant, gs.bounds(), sup.initial_action()).map_err(|e| e.to_string())?;
    let mut count = 0;
    walk(
        gs,
        sup,
        session,
        sup.initial(),
        gs.initial_reach(),
        Vec::new(),
        max_len,
        &mut count,
    )?;
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    gs: &CommAutomaton,
    sup: &NetworkedSupervisor,
    session: EstimatorSession,
    x: StateId,
    reach: Vec<usize>,
    t: Vec<EventId>,
    max_len: usize,
    count: &mut usize,
) -> Result<(), String> {
    let oracle: BTreeSet<StateId> = reach.iter().map(|i| gs.state(*i).plant).collect();
    *count += 1;
    if session.nse() != oracle {
        return Err(format!(
            "t={} estimator={} oracle={}",
            gs.plant().alphabet().render_word(&t),
            gs.plant().render_states(&session.nse()),
            gs.plant().render_states(&oracle)
        ));
    }
    if t.len() == max_len {
        return Ok(());
    }
    for sigma in gs.plant().alphabet().observable().iter() {
        let x2 = sup.next(x, sigma);
        let mut next = session.clone();
        let est = next.observe(sigma, sup.gamma(x2));
        match (gs.deliver_step(&reach, sigma), est) {
            (Some(r), Ok(_)) => {
                let mut t2 = t.clone();
                t2.push(sigma);
                walk(gs, sup, next, x2, r, t2, max_len, count)?;
            }
            (None, Err(EstimatorError::InconsistentObservation(_))) => {}
            (o, e) => {
                return Err(format!(
                    "t={}·{}: oracle defined={} estimator={:?}",
                    gs.plant().alphabet().render_word(&t),
                    gs.plant().alphabet().name(sigma),
                    o.is_some(),
                    e.map(|z| z.len())
                ))
            }
        }
    }
    Ok(())
}

/// The classical closed loop under partial observation with instantaneous
/// channels: the set of plant states reachable by strings `s` with
/// `P(s) = t`, where each event must be enabled by `S(P(prefix))`.
pub fn classical_estimate(g: &Automaton, sup: &NetworkedSupervisor, t: &[EventId]) -> Option<BTreeSet<StateId>> {
    let a = g.alphabet();
    let unobservable_reach = |set: BTreeSet<StateId>, pi: ControlAction| {
        let mut out = set.clone();
        let mut stack: Vec<StateId> = set.into_iter().collect();
        while let Some(q) = stack.pop() {
            for (e, r) in g.edges(q) {
                if !a.is_observable(*e) && pi.allows(*e) && out.insert(*r) {
                    stack.push(*r);
                }
            }
        }
        out
    };
    let mut x = sup.initial();
    let mut est = unobservable_reach(BTreeSet::from([g.initial()]), sup.gamma(x));
    for sigma in t {
        let pi = sup.gamma(x);
        let moved: BTreeSet<StateId> = est
            .iter()
            .filter_map(|q| if pi.allows(*sigma) { g.step(*q, *sigma) } else { None })
            .collect();
        if moved.is_empty() {
            return None;
        }
        x = sup.next(x, *sigma);
        est = unobservable_reach(moved, sup.gamma(x));
    }
    Some(est)
}

/// All strings over the observable events of length at most `n`.
pub fn observable_words(g: &Automaton, n: usize) -> Vec<Vec<EventId>> {
    let obs: Vec<EventId> = g.alphabet().observable().iter().collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for e in &obs {
                let mut v: Vec<EventId> = w.clone();
                v.push(*e);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn gs_of(inst: &FuzzInstance) -> CommAutomaton {
    build_gs(&inst.plant, &inst.supervisor, inst.bounds, usize::MAX).expect("no budget")
}

/// States of a game graph, as (is_y, index).
pub type Node = (bool, usize);

/// The greatest set of Y/Z states from which the supervisor can keep every
/// Z-state safe forever, computed as the complement of the environment's
/// attractor to the unsafe Z-states, then restricted to what is reachable
/// from Y-state 0.
pub fn winning_region(t: &Nbts, spec: &SafetySpec) -> Option<(Vec<bool>, Vec<bool>)> {
    let ny = t.num_y();
    let nz = t.num_z();
    // Predecessor lists.
    let mut pred_of_z: Vec<Vec<usize>> = vec![Vec::new(); nz];
    let mut pred_of_y: Vec<Vec<usize>> = vec![Vec::new(); ny];
    for y in 0..ny {
        for (_, z) in t.yz(y) {
            pred_of_z[*z].push(y);
        }
    }
    for z in 0..nz {
        for (_, y) in t.zy(z) {
            pred_of_y[*y].push(z);
        }
    }
    // Environment attractor: a Z-state is losing if unsafe or some successor
    // Y is losing; a Y-state is losing once all its actions are losing.
    let mut lose_y = vec![false; ny];
    let mut lose_z = vec![false; nz];
    let mut remaining: Vec<usize> = (0..ny).map(|y| t.yz(y).len()).collect();
    let mut queue: VecDeque<Node> = VecDeque::new();
    for (z, lost) in lose_z.iter_mut().enumerate() {
        let fcz: BTreeSet<StateId> = t.z_state(z).info.iter().map(|s| s.plant).collect();
        if !fcz.iter().all(|q| spec.is_safe(*q)) {
            *lost = true;
            queue.push_back((false, z));
        }
    }
    for y in 0..ny {
        if remaining[y] == 0 {
            lose_y[y] = true;
            queue.push_back((true, y));
        }
    }
    while let Some((is_y, i)) = queue.pop_front() {
        if is_y {
            for z in &pred_of_y[i] {
                if !lose_z[*z] {
                    lose_z[*z] = true;
                    queue.push_back((false, *z));
                }
            }
        } else {
            for y in &pred_of_z[i] {
                if lose_y[*y] {
                    continue;
                }
                remaining[*y] -= 1;
                if remaining[*y] == 0 {
                    lose_y[*y] = true;
                    queue.push_back((true, *y));
                }
            }
        }
    }
    if lose_y[0] {
        return None;
    }
    // Accessible part of the winning region.
    let mut ky = vec![false; ny];
    let mut kz = vec![false; nz];
    ky[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(y) = queue.pop_front() {
        for (_, z) in t.yz(y) {
            if !lose_z[*z] && !kz[*z] {
                kz[*z] = true;
                for (_, y2) in t.zy(*z) {
                    if !ky[*y2] {
                        ky[*y2] = true;
                        queue.push_back(*y2);
                    }
                }
            }
        }
    }
    Some((ky, kz))
}

/// The largest accessible, complete, safe induced subgraph, by enumerating
/// every subset of states. Only for graphs with at most 20 states.
pub fn brute_force_ainc(t: &Nbts, spec: &SafetySpec) -> Option<(Vec<bool>, Vec<bool>)> {
    let ny = t.num_y();
    let nz = t.num_z();
    let n = ny + nz;
    assert!(n <= 20, "too many states for exhaustive enumeration");
    let safe_z: Vec<bool> = (0..nz)
        .map(|z| t.z_state(z).info.iter().all(|s| spec.is_safe(s.plant)))
        .collect();
    let mut best: Option<(u32, u64)> = None;
    let mut all_valid: Vec<u64> = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if mask & 1 == 0 {
            continue;
        }
        let ky: Vec<bool> = (0..ny).map(|i| mask >> i & 1 == 1).collect();
        let kz: Vec<bool> = (0..nz).map(|i| mask >> (ny + i) & 1 == 1).collect();
        if (0..nz).any(|z| kz[z] && !safe_z[z]) {
            continue;
        }
        let complete = (0..ny).all(|y| !ky[y] || t.yz(y).iter().any(|(_, z)| kz[*z]))
            && (0..nz).all(|z| !kz[z] || t.zy(z).iter().all(|(_, y)| ky[*y]));
        if !complete {
            continue;
        }
        let (ry, rz) = t.reachable(&ky, &kz);
        if ry != ky || rz != kz {
            continue;
        }
        all_valid.push(mask);
        let size = mask.count_ones();
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, mask));
        }
    }
    let (_, mask) = best?;
    // The maximum contains every other valid subgraph.
    assert!(all_valid.iter().all(|m| m & !mask == 0));
    Some((
        (0..ny).map(|i| mask >> i & 1 == 1).collect(),
        (0..nz).map(|i| mask >> (ny + i) & 1 == 1).collect(),
    ))
}

/// `FuzzInstance` bound overrides used by several suites.
pub fn with_bounds(inst: &FuzzInstance, b: DelayBounds) -> FuzzInstance {
    FuzzInstance {
        bounds: b,
        ..inst.clone()
    }
}

/// Plant-state sets per delivered string, for a whole language of `t`s.
pub fn nse_table(gs: &CommAutomaton, words: &[Vec<EventId>]) -> HashMap<Vec<EventId>, Option<BTreeSet<StateId>>> {
    words.iter().map(|w| (w.clone(), gs.oracle_nse(w))).collect()
}

/// Membership masks of `ainc`'s states within `nbts`, matched by content.
pub fn ainc_masks(nbts: &Nbts, ainc: &Nbts) -> (Vec<bool>, Vec<bool>) {
    let mut ky = vec![false; nbts.num_y()];
    let mut kz = vec![false; nbts.num_z()];
    for y in ainc.y_states() {
        ky[nbts.find_y(y).expect("AINC state comes from the NBTS")] = true;
    }
    for z in ainc.z_states() {
        kz[nbts.find_z(z).expect("AINC state comes from the NBTS")] = true;
    }
    (ky, kz)
}

/// Runs the estimator under an extracted supervisor along every consistent
/// delivered string of length at most `max_len` and checks that it lands on
/// the information state of the Z-state realised by the supervisor.
pub fn tracks_information_states(
    ainc: &Nbts,
    ex: &ExtractedSupervisor,
    plant: &Automaton,
    bounds: DelayBounds,
    max_len: usize,
) -> Result<usize, String> {
    let sup = &ex.supervisor;
    let session = EstimatorSession::init(plant, bounds, sup.initial_action()).map_err(|e| e.to_string())?;
    let mut stack = vec![(session, sup.initial(), 0usize)];
    let mut count = 0;
    while let Some((session, x, depth)) = stack.pop() {
        let Some(z) = ex.z_state[x.index()] else {
            return Err("a consistent delivered string reached the special state".into());
        };
        if session.current() != &ainc.z_state(z).info {
            return Err(format!(
                "after {}: estimator {} but Z-state {}",
                plant.alphabet().render_word(&session.delivered()),
                session.current().render(plant),
                ainc.z_state(z).info.render(plant)
            ));
        }
        count += 1;
        if depth == max_len {
            continue;
        }
        for sigma in plant.alphabet().observable().iter() {
            let x2 = sup.next(x, sigma);
            let mut next = session.clone();
            if next.observe(sigma, sup.gamma(x2)).is_ok() {
                stack.push((next, x2, depth + 1));
            }
        }
    }
    Ok(count)
}
