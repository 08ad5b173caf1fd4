use serde::{Deserialize, Serialize};

use super::{Plts, PltsError, State};
use crate::pomset::{ActionLabel, Pomset, Poset};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PltsJson {
    pub states: Vec<StateJson>,
    pub initial: usize,
    pub transitions: Vec<TransitionJson>,
    #[serde(default)]
    pub predicates: Vec<PredicateJson>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateJson {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub frontier: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: usize,
    pub pomset: PomsetJson,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateJson {
    pub state: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PomsetJson {
    pub events: Vec<EventJson>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventJson {
    pub id: String,
    pub label: ActionLabel,
}

impl PomsetJson {
    /// Events named `e0..` by canonical position, with covering pairs.
    pub fn from_pomset(p: &Pomset) -> Self {
        PomsetJson {
            events: (0..p.len()).map(|i| EventJson { id: format!("e{i}"), label: p.label(i).clone() }).collect(),
            order: p.covers().into_iter().map(|(i, j)| (format!("e{i}"), format!("e{j}"))).collect(),
        }
    }

    pub fn to_pomset(&self) -> Result<Pomset, PltsError> {
        let poset = Poset::new(
            self.events.iter().map(|e| (e.id.as_str(), e.label.clone())),
            self.order.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
        .map_err(|e| PltsError::Pomset(e.to_string()))?;
        Ok(poset.canonicalize())
    }
}

pub(super) fn to_json(p: &Plts) -> PltsJson {
    PltsJson {
        states: (0..p.len())
            .map(|s| StateJson { id: s, term: p.state(s).text.clone(), frontier: p.is_frontier(s) })
            .collect(),
        initial: p.initial(),
        transitions: p
            .transitions()
            .into_iter()
            .map(|t| TransitionJson { from: t.from, pomset: PomsetJson::from_pomset(&t.label), to: t.to })
            .collect(),
        predicates: (0..p.len())
            .flat_map(|s| p.predicates(s).iter().map(move |n| PredicateJson { state: s, name: n.clone() }))
            .collect(),
        truncated: p.truncated(),
    }
}

pub(super) fn from_json_str(src: &str) -> Result<Plts, PltsError> {
    let j: PltsJson = serde_json::from_str(src).map_err(|e| PltsError::Json(e.to_string()))?;
    // state ids may be sparse; renumber densely in id order
    let mut ids: Vec<usize> = j.states.iter().map(|s| s.id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != j.states.len() {
        return Err(PltsError::Json("duplicate state id".into()));
    }
    let index = |id: usize| ids.binary_search(&id).map_err(|_| PltsError::UnknownState(id));
    let mut p = Plts::new(ids.len(), index(j.initial)?)?;
    for s in &j.states {
        let k = index(s.id)?;
        p.set_state(k, State { term: None, text: s.term.clone() })?;
        if s.frontier {
            p.mark_frontier(k)?;
        }
    }
    for t in &j.transitions {
        p.add_transition(index(t.from)?, t.pomset.to_pomset()?, index(t.to)?)?;
    }
    for q in &j.predicates {
        p.add_predicate(index(q.state)?, &q.name)?;
    }
    if j.truncated {
        p.set_truncated(true);
    }
    Ok(p)
}
