//! JSON documents for plants, specifications, supervisors, communication
//! automata and AINCs. Every document carries a `kind` field; unknown fields
//! are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{
    Alphabet, Automaton, AutomatonBuilder, ControlAction, EventId, EventInfo, ModelError, NetworkedSupervisor,
};
use crate::channels::DelayBounds;
use crate::comm::{CommAutomaton, CommEvent};
use crate::estimator::AugmentedEstimate;
use crate::grammar::{parse_action, parse_augmented, GrammarError};
use crate::synthesis::{Ainc, Nbts, ZState};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document kind is {found:?}, expected {expected}")]
    Kind { found: String, expected: String },
    #[error("{record}: {source}")]
    Record {
        record: String,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{record}: {source}")]
    Grammar {
        record: String,
        #[source]
        source: GrammarError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDoc {
    pub name: String,
    pub controllable: bool,
    pub observable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub event: String,
    pub to: String,
}

/// Plant (`kind: "plant"`) or specification (`kind: "spec"`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDoc {
    pub kind: String,
    pub states: Vec<String>,
    pub initial: String,
    pub events: Vec<EventDoc>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisorDoc {
    pub kind: String,
    pub states: Vec<String>,
    pub initial: String,
    pub events: Vec<EventDoc>,
    pub transitions: Vec<TransitionDoc>,
    pub gamma: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special_state: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsDoc {
    pub kind: String,
    pub bounds: String,
    pub states: Vec<String>,
    pub initial: String,
    pub events: Vec<EventDoc>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YStateDoc {
    pub id: String,
    pub estimate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZStateDoc {
    pub id: String,
    pub action: String,
    pub info: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub label: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AincDoc {
    pub kind: String,
    pub bounds: String,
    pub plant: AutomatonDoc,
    pub y_states: Vec<YStateDoc>,
    pub z_states: Vec<ZStateDoc>,
    pub yz: Vec<EdgeDoc>,
    pub zy: Vec<EdgeDoc>,
}

/// Reads the `kind` field without validating the rest.
pub fn document_kind(text: &str) -> Result<String, FormatError> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    match v.get("kind").and_then(|k| k.as_str()) {
        Some(k) => Ok(k.to_string()),
        None => Err(FormatError::Invalid("document has no string field \"kind\"".into())),
    }
}

fn check_kind(found: &str, expected: &[&str]) -> Result<(), FormatError> {
    if expected.contains(&found) {
        Ok(())
    } else {
        Err(FormatError::Kind {
            found: found.to_string(),
            expected: expected.join(" or "),
        })
    }
}

fn pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn events_doc(a: &Alphabet) -> Vec<EventDoc> {
    a.events()
        .iter()
        .map(|e| EventDoc {
            name: e.name.clone(),
            controllable: e.controllable,
            observable: e.observable,
        })
        .collect()
}

fn alphabet_from(events: &[EventDoc]) -> Result<Arc<Alphabet>, FormatError> {
    let infos = events
        .iter()
        .map(|e| EventInfo::new(e.name.clone(), e.controllable, e.observable))
        .collect();
    Ok(Arc::new(Alphabet::new(infos)?))
}

fn builder_from(
    alphabet: Arc<Alphabet>,
    states: &[String],
    transitions: &[TransitionDoc],
) -> Result<AutomatonBuilder, FormatError> {
    let mut b = AutomatonBuilder::new(alphabet);
    for (i, s) in states.iter().enumerate() {
        b.add_state(s).map_err(|source| FormatError::Record {
            record: format!("states[{i}]"),
            source,
        })?;
    }
    for (i, t) in transitions.iter().enumerate() {
        b.add_transition(&t.from, &t.event, &t.to)
            .map_err(|source| FormatError::Record {
                record: format!("transitions[{i}] ({} -{}-> {})", t.from, t.event, t.to),
                source,
            })?;
    }
    Ok(b)
}

impl AutomatonDoc {
    pub fn from_automaton(a: &Automaton, kind: &str) -> Self {
        AutomatonDoc {
            kind: kind.to_string(),
            states: a.state_names().to_vec(),
            initial: a.state_name(a.initial()).to_string(),
            events: events_doc(a.alphabet()),
            transitions: a
                .transitions()
                .map(|(f, e, t)| TransitionDoc {
                    from: a.state_name(f).to_string(),
                    event: a.alphabet().name(e).to_string(),
                    to: a.state_name(t).to_string(),
                })
                .collect(),
        }
    }

    pub fn to_automaton(&self) -> Result<Automaton, FormatError> {
        let alphabet = alphabet_from(&self.events)?;
        let b = builder_from(alphabet, &self.states, &self.transitions)?;
        b.build(&self.initial).map_err(|source| FormatError::Record {
            record: "initial".into(),
            source,
        })
    }
}

/// Serializes a plant (`kind = "plant"`) or specification (`kind = "spec"`).
pub fn automaton_to_json(a: &Automaton, kind: &str) -> String {
    pretty(&AutomatonDoc::from_automaton(a, kind))
}

/// Loads a plant or specification document.
pub fn automaton_from_json(text: &str) -> Result<Automaton, FormatError> {
    check_kind(&document_kind(text)?, &["plant", "spec"])?;
    let doc: AutomatonDoc = serde_json::from_str(text)?;
    doc.to_automaton()
}

pub fn supervisor_to_json(s: &NetworkedSupervisor) -> String {
    let r = s.realization();
    let a = r.alphabet();
    let base = AutomatonDoc::from_automaton(r, "supervisor");
    let gamma = r
        .states()
        .map(|x| {
            let names = s.gamma(x).enabled().iter().map(|e| a.name(e).to_string()).collect();
            (r.state_name(x).to_string(), names)
        })
        .collect();
    pretty(&SupervisorDoc {
        kind: base.kind,
        states: base.states,
        initial: base.initial,
        events: base.events,
        transitions: base.transitions,
        gamma,
        special_state: s.special_state().map(|x| r.state_name(x).to_string()),
    })
}

/// Loads a supervisor over `plant`'s alphabet. Observable events without a
/// transition are routed to the special state when one is declared.
pub fn supervisor_from_json(text: &str, plant: &Automaton) -> Result<NetworkedSupervisor, FormatError> {
    check_kind(&document_kind(text)?, &["supervisor"])?;
    let doc: SupervisorDoc = serde_json::from_str(text)?;
    let alphabet = alphabet_from(&doc.events)?;
    if *alphabet != *plant.alphabet() {
        return Err(ModelError::AlphabetMismatch.into());
    }
    let alphabet = plant.shared_alphabet().clone();
    let mut b = builder_from(alphabet.clone(), &doc.states, &doc.transitions)?;
    let special = match &doc.special_state {
        Some(name) => Some(b.state(name).map_err(|source| FormatError::Record {
            record: "special_state".into(),
            source,
        })?),
        None => None,
    };
    if let Some(sp) = special {
        for i in 0..doc.states.len() {
            let x = b.state(&doc.states[i])?;
            for e in alphabet.observable().iter() {
                if !b.has_transition(x, e) {
                    b.add_transition_ids(x, e, sp)?;
                }
            }
        }
    }
    for name in doc.gamma.keys() {
        if !doc.states.contains(name) {
            return Err(FormatError::Record {
                record: format!("gamma[{name:?}]"),
                source: ModelError::UnknownState(name.clone()),
            });
        }
    }
    let realization = b.build(&doc.initial).map_err(|source| FormatError::Record {
        record: "initial".into(),
        source,
    })?;
    let mut gamma = Vec::with_capacity(doc.states.len());
    for name in &doc.states {
        let names = doc
            .gamma
            .get(name)
            .ok_or_else(|| ModelError::MissingGamma(name.clone()))?;
        let p = alphabet.action(names, false).map_err(|source| FormatError::Record {
            record: format!("gamma[{name:?}]"),
            source,
        })?;
        gamma.push(p);
    }
    Ok(NetworkedSupervisor::new(realization, gamma, special)?)
}

fn comm_event_doc(e: &CommEvent, a: &Alphabet) -> EventDoc {
    let (controllable, observable) = match e {
        CommEvent::Plant(s) => (a.is_controllable(*s), a.is_observable(*s)),
        CommEvent::Deliver(_) => (false, true),
        _ => (false, false),
    };
    EventDoc {
        name: e.render(a),
        controllable,
        observable,
    }
}

impl GsDoc {
    pub fn from_gs(gs: &CommAutomaton) -> Self {
        let a = gs.plant().alphabet();
        let mut events: BTreeMap<CommEvent, EventDoc> = BTreeMap::new();
        let mut transitions = Vec::with_capacity(gs.num_transitions());
        for i in 0..gs.num_states() {
            for (e, j) in gs.edges(i) {
                events.entry(*e).or_insert_with(|| comm_event_doc(e, a));
                transitions.push(TransitionDoc {
                    from: gs.render_state(i),
                    event: e.render(a),
                    to: gs.render_state(*j),
                });
            }
        }
        GsDoc {
            kind: "gs".into(),
            bounds: gs.bounds().render(),
            states: (0..gs.num_states()).map(|i| gs.render_state(i)).collect(),
            initial: gs.render_state(0),
            events: events.into_values().collect(),
            transitions,
        }
    }
}

pub fn gs_to_json(gs: &CommAutomaton) -> String {
    pretty(&GsDoc::from_gs(gs))
}

pub fn gs_doc_from_json(text: &str) -> Result<GsDoc, FormatError> {
    check_kind(&document_kind(text)?, &["gs"])?;
    Ok(serde_json::from_str(text)?)
}

fn estimate_doc(z: &AugmentedEstimate, plant: &Automaton) -> Vec<String> {
    z.iter().map(|s| s.render(plant)).collect()
}

impl AincDoc {
    pub fn from_ainc(ainc: &Ainc, plant: &Automaton, bounds: DelayBounds) -> Self {
        let a = plant.alphabet();
        let mut yz = Vec::new();
        let mut zy = Vec::new();
        for y in 0..ainc.num_y() {
            for (p, z) in ainc.yz(y) {
                yz.push(EdgeDoc {
                    from: format!("y{y}"),
                    label: a.render_action(*p),
                    to: format!("z{z}"),
                });
            }
        }
        for z in 0..ainc.num_z() {
            for (e, y) in ainc.zy(z) {
                zy.push(EdgeDoc {
                    from: format!("z{z}"),
                    label: a.name(*e).to_string(),
                    to: format!("y{y}"),
                });
            }
        }
        AincDoc {
            kind: "ainc".into(),
            bounds: bounds.render(),
            plant: AutomatonDoc::from_automaton(plant, "plant"),
            y_states: ainc
                .y_states()
                .iter()
                .enumerate()
                .map(|(i, y)| YStateDoc {
                    id: format!("y{i}"),
                    estimate: estimate_doc(y, plant),
                })
                .collect(),
            z_states: ainc
                .z_states()
                .iter()
                .enumerate()
                .map(|(i, z)| ZStateDoc {
                    id: format!("z{i}"),
                    action: a.render_action(z.action),
                    info: estimate_doc(&z.info, plant),
                })
                .collect(),
            yz,
            zy,
        }
    }
}

pub fn ainc_to_json(ainc: &Ainc, plant: &Automaton, bounds: DelayBounds) -> String {
    pretty(&AincDoc::from_ainc(ainc, plant, bounds))
}

/// An AINC together with the plant and bounds it was computed for.
#[derive(Debug, Clone)]
pub struct LoadedAinc {
    pub plant: Automaton,
    pub bounds: DelayBounds,
    pub ainc: Ainc,
}

fn parse_estimate(items: &[String], plant: &Automaton, record: &str) -> Result<AugmentedEstimate, FormatError> {
    items
        .iter()
        .map(|s| {
            parse_augmented(s, plant).map_err(|source| FormatError::Grammar {
                record: record.to_string(),
                source,
            })
        })
        .collect()
}

fn parse_ids(ids: &[String], prefix: char, what: &str) -> Result<BTreeMap<String, usize>, FormatError> {
    let mut out = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        if !id.starts_with(prefix) || out.insert(id.clone(), i).is_some() {
            return Err(FormatError::Invalid(format!("{what}[{i}]: bad or duplicate id {id:?}")));
        }
    }
    Ok(out)
}

pub fn ainc_from_json(text: &str) -> Result<LoadedAinc, FormatError> {
    check_kind(&document_kind(text)?, &["ainc"])?;
    let doc: AincDoc = serde_json::from_str(text)?;
    let plant = doc.plant.to_automaton()?;
    let bounds: DelayBounds = doc.bounds.parse().map_err(FormatError::Invalid)?;
    let a = plant.alphabet();
    let yid = parse_ids(
        &doc.y_states.iter().map(|y| y.id.clone()).collect::<Vec<_>>(),
        'y',
        "y_states",
    )?;
    let zid = parse_ids(
        &doc.z_states.iter().map(|z| z.id.clone()).collect::<Vec<_>>(),
        'z',
        "z_states",
    )?;
    let mut ys = Vec::new();
    for y in &doc.y_states {
        ys.push(parse_estimate(&y.estimate, &plant, &y.id)?);
    }
    let mut zs = Vec::new();
    for z in &doc.z_states {
        let action = parse_action(&z.action, a).map_err(|source| FormatError::Grammar {
            record: z.id.clone(),
            source,
        })?;
        zs.push(ZState {
            info: parse_estimate(&z.info, &plant, &z.id)?,
            action,
        });
    }
    let lookup = |map: &BTreeMap<String, usize>, id: &str| {
        map.get(id)
            .copied()
            .ok_or_else(|| FormatError::Invalid(format!("edge refers to unknown state {id:?}")))
    };
    let mut yz: Vec<Vec<(ControlAction, usize)>> = vec![Vec::new(); ys.len()];
    for e in &doc.yz {
        let p = parse_action(&e.label, a).map_err(|source| FormatError::Grammar {
            record: format!("yz edge from {}", e.from),
            source,
        })?;
        yz[lookup(&yid, &e.from)?].push((p, lookup(&zid, &e.to)?));
    }
    let mut zy: Vec<Vec<(EventId, usize)>> = vec![Vec::new(); zs.len()];
    for e in &doc.zy {
        let sigma = a.event(&e.label).ok_or_else(|| FormatError::Record {
            record: format!("zy edge from {}", e.from),
            source: ModelError::UnknownEvent(e.label.clone()),
        })?;
        zy[lookup(&zid, &e.from)?].push((sigma, lookup(&yid, &e.to)?));
    }
    if doc.y_states.first().map(|y| y.id.as_str()) != Some("y0") {
        return Err(FormatError::Invalid("first Y-state must be y0".into()));
    }
    let ainc =
        Nbts::from_parts(ys, zs, yz, zy).ok_or_else(|| FormatError::Invalid("inconsistent AINC tables".into()))?;
    Ok(LoadedAinc { plant, bounds, ainc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::{build_gs, DEFAULT_BUDGET};
    use crate::examples;
    use crate::synthesis::{build_nbts, prune_ainc, SafetySpec};

    #[test]
    fn plant_round_trip() {
        let g = examples::plant();
        let text = automaton_to_json(&g, "plant");
        assert_eq!(automaton_from_json(&text).unwrap(), g);
        assert_eq!(automaton_to_json(&automaton_from_json(&text).unwrap(), "plant"), text);
    }

    #[test]
    fn supervisor_round_trip() {
        let g = examples::plant();
        let s = examples::supervisor_over(g.shared_alphabet().clone());
        let text = supervisor_to_json(&s);
        assert_eq!(supervisor_from_json(&text, &g).unwrap(), s);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let g = examples::plant();
        let mut v: serde_json::Value = serde_json::from_str(&automaton_to_json(&g, "plant")).unwrap();
        v["colour"] = serde_json::json!("red");
        assert!(matches!(automaton_from_json(&v.to_string()), Err(FormatError::Json(_))));
    }

    #[test]
    fn bad_endpoint_names_the_record() {
        let g = examples::plant();
        let mut v: serde_json::Value = serde_json::from_str(&automaton_to_json(&g, "plant")).unwrap();
        v["transitions"][2]["to"] = serde_json::json!("q9");
        let err = automaton_from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("transitions[2]"), "{err}");
        assert!(err.to_string().contains("q9"), "{err}");
    }

    #[test]
    fn kind_is_checked() {
        let g = examples::plant();
        let err = supervisor_from_json(&automaton_to_json(&g, "plant"), &g).unwrap_err();
        assert!(matches!(err, FormatError::Kind { .. }));
    }

    #[test]
    fn special_state_completes_the_realization() {
        let g = examples::plant();
        let text = r#"{
            "kind": "supervisor",
            "states": ["p", "spe"],
            "initial": "p",
            "events": [
                {"name": "alpha", "controllable": true, "observable": true},
                {"name": "beta", "controllable": true, "observable": false},
                {"name": "lambda", "controllable": true, "observable": false}
            ],
            "transitions": [],
            "gamma": {"p": ["alpha"], "spe": []},
            "special_state": "spe"
        }"#;
        let s = supervisor_from_json(text, &g).unwrap();
        let alpha = g.alphabet().event("alpha").unwrap();
        assert_eq!(s.state_after(&[alpha]).unwrap(), s.special_state().unwrap());
    }

    #[test]
    fn gs_document_is_deterministic() {
        let g = examples::plant();
        let s = examples::supervisor_over(g.shared_alphabet().clone());
        let gs = build_gs(&g, &s, DelayBounds::new(1, 1, 1, 1), DEFAULT_BUDGET).unwrap();
        let a = gs_to_json(&gs);
        assert_eq!(
            a,
            gs_to_json(&build_gs(&g, &s, DelayBounds::new(1, 1, 1, 1), DEFAULT_BUDGET).unwrap())
        );
        let doc = gs_doc_from_json(&a).unwrap();
        assert_eq!(doc.states.len(), gs.num_states());
        assert_eq!(doc, GsDoc::from_gs(&gs));
    }

    #[test]
    fn ainc_round_trip() {
        let g = examples::plant();
        let b = DelayBounds::new(0, 2, 0, 0);
        let t = build_nbts(&g, None, b, DEFAULT_BUDGET).unwrap();
        let spec = SafetySpec::from_names(&g, &examples::SAFE_STATES).unwrap();
        let ainc = prune_ainc(&t, &spec).unwrap();
        let text = ainc_to_json(&ainc, &g, b);
        let back = ainc_from_json(&text).unwrap();
        assert_eq!(back.ainc, ainc);
        assert_eq!(back.bounds, b);
        assert_eq!(back.plant, g);
    }
}
