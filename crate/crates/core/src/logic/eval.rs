use std::collections::HashSet;

use super::{Env, Formula, LogicError};
use crate::plts::{ConfigStructure, EventId, NodeId};
use crate::pomset::ActionLabel;

/// A configuration structure prepared for formula evaluation: the events
/// enabled at each node (those with a single-event transition) and the
/// pairs of events that occur together somewhere.
pub struct Model<'a> {
    pub cs: &'a ConfigStructure,
    enabled: Vec<Vec<(EventId, NodeId)>>,
    consistent: HashSet<(EventId, EventId)>,
}

impl<'a> Model<'a> {
    pub fn new(cs: &'a ConfigStructure) -> Model<'a> {
        let enabled = cs
            .nodes()
            .iter()
            .map(|n| {
                let mut v: Vec<(EventId, NodeId)> =
                    n.out.iter().filter(|t| t.events.len() == 1).map(|t| (t.events[0], t.target)).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        Model { cs, enabled, consistent: cs.coexisting() }
    }

    /// Enabled events at `n` with their targets; an event may lead to
    /// several nodes only when states differ.
    pub fn enabled(&self, n: NodeId) -> &[(EventId, NodeId)] {
        &self.enabled[n]
    }

    pub fn enabled_events(&self, n: NodeId) -> Vec<EventId> {
        let mut v: Vec<EventId> = self.enabled[n].iter().map(|p| p.0).collect();
        v.dedup();
        v
    }

    /// Nodes reached from `n` by executing `e`.
    pub fn exec(&self, n: NodeId, e: EventId) -> impl Iterator<Item = NodeId> + '_ {
        self.enabled[n].iter().filter(move |p| p.0 == e).map(|p| p.1)
    }

    pub fn label(&self, e: EventId) -> &ActionLabel {
        self.cs.label(e)
    }

    pub fn less(&self, a: EventId, b: EventId) -> bool {
        self.cs.less(a, b)
    }

    /// Causally unrelated and not in conflict.
    pub fn concurrent(&self, a: EventId, b: EventId) -> bool {
        a != b && !self.cs.less(a, b) && !self.cs.less(b, a) && self.consistent.contains(&(a, b))
    }

    /// Labels of the events enabled at `n`.
    pub fn initials(&self, n: NodeId) -> Vec<&ActionLabel> {
        let mut v: Vec<&ActionLabel> = self.enabled[n].iter().map(|p| self.label(p.0)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Events enabled at `n` labelled `a`, above every event of `causes`
    /// and concurrent with every event of `concurrent`, in that order.
    pub fn candidates(&self, n: NodeId, a: &ActionLabel, causes: &[EventId], conc: &[EventId]) -> Vec<EventId> {
        self.enabled_events(n)
            .into_iter()
            .filter(|&e| {
                self.label(e) == a
                    && causes.iter().all(|&x| self.less(x, e))
                    && conc.iter().all(|&y| self.concurrent(y, e))
            })
            .collect()
    }

    pub fn sat(&self, n: NodeId, env: &Env, f: &Formula) -> Result<bool, LogicError> {
        let look = |v: &String| env.get(v).copied().ok_or_else(|| LogicError::Unbound(v.clone()));
        Ok(match f {
            Formula::True => true,
            Formula::Pred(p) => self.cs.node(n).predicates.contains(p),
            Formula::Not(g) => !self.sat(n, env, g)?,
            Formula::And(g, h) => self.sat(n, env, g)? && self.sat(n, env, h)?,
            Formula::Bind { xs, ys, a, z, body } => {
                let causes = xs.iter().map(look).collect::<Result<Vec<_>, _>>()?;
                let conc = ys.iter().map(look).collect::<Result<Vec<_>, _>>()?;
                let mut env2 = env.clone();
                for e in self.candidates(n, a, &causes, &conc) {
                    env2.insert(z.clone(), e);
                    if self.sat(n, &env2, body)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Exec { z, body } => {
                let e = look(z)?;
                for m in self.exec(n, e) {
                    if self.sat(m, env, body)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }
}

/// Whether configuration `node` of `cs` satisfies `f` under `env`.
/// Negation is evaluated under the current environment, so it may apply
/// to open subformulas.
pub fn satisfies(cs: &ConfigStructure, node: NodeId, env: &Env, f: &Formula) -> Result<bool, LogicError> {
    if node >= cs.nodes().len() {
        return Err(LogicError::UnknownNode(node));
    }
    if let Some(&e) = env.values().find(|&&e| e >= cs.events().len()) {
        return Err(LogicError::UnknownEvent(e));
    }
    if let Some(v) = f.free_vars().into_iter().find(|v| !env.contains_key(v)) {
        return Err(LogicError::Unbound(v));
    }
    Model::new(cs).sat(node, env, f)
}
