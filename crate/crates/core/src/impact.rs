//! Structural diffs between model versions and what a change puts up for
//! review.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{build_graph, EdgeKind, GraphError, TraceabilityGraph};
use crate::model::{Model, NodeKind, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChangeKind {
    Added,
    Removed,
    Modified,
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChangeKind::Added => "ADDED",
            ChangeKind::Removed => "REMOVED",
            ChangeKind::Modified => "MODIFIED",
        })
    }
}

/// One field of a modified node, as canonical JSON. Absent fields are null.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldChange {
    pub field: String,
    pub old: Value,
    pub new: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Change {
    pub kind: ChangeKind,
    pub node: NodeRef,
    /// Empty unless `kind` is `Modified`.
    pub fields: Vec<FieldChange>,
    /// The node as it is in the new model; `None` for removals.
    pub snapshot: Option<Value>,
}

impl Change {
    pub fn to_json(&self) -> Value {
        let fields: Vec<Value> = self
            .fields
            .iter()
            .map(|f| json!({ "field": f.field, "old": f.old, "new": f.new }))
            .collect();
        json!({
            "kind": self.kind.to_string(),
            "node_kind": self.node.kind.keyword(),
            "id": self.node.id.as_str(),
            "fields": fields,
        })
    }
}

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.kind, self.node.kind, self.node.id)?;
        if !self.fields.is_empty() {
            let names: Vec<&str> = self.fields.iter().map(|c| c.field.as_str()).collect();
            write!(f, " ({})", names.join(", "))?;
        }
        Ok(())
    }
}

fn nodes_of(model: &Model) -> BTreeMap<NodeRef, Value> {
    model
        .node_refs()
        .into_iter()
        .filter_map(|n| model.node_value(&n).map(|v| (n, v)))
        .collect()
}

/// Changes turning `old` into `new`, sorted by node kind then id. Renames show
/// up as a removal plus an addition.
pub fn diff(old: &Model, new: &Model) -> Vec<Change> {
    let before = nodes_of(old);
    let after = nodes_of(new);
    let mut changes = Vec::new();
    for (node, old_value) in &before {
        match after.get(node) {
            None => changes.push(Change {
                kind: ChangeKind::Removed,
                node: node.clone(),
                fields: Vec::new(),
                snapshot: None,
            }),
            Some(new_value) if new_value != old_value => changes.push(Change {
                kind: ChangeKind::Modified,
                node: node.clone(),
                fields: field_changes(old_value, new_value),
                snapshot: Some(new_value.clone()),
            }),
            Some(_) => {}
        }
    }
    for (node, new_value) in &after {
        if !before.contains_key(node) {
            changes.push(Change {
                kind: ChangeKind::Added,
                node: node.clone(),
                fields: Vec::new(),
                snapshot: Some(new_value.clone()),
            });
        }
    }
    changes.sort_by(|a, b| a.node.cmp(&b.node).then(a.kind.cmp(&b.kind)));
    changes
}

fn field_changes(old: &Value, new: &Value) -> Vec<FieldChange> {
    let empty = serde_json::Map::new();
    let old = old.as_object().unwrap_or(&empty);
    let new = new.as_object().unwrap_or(&empty);
    let keys: BTreeSet<&String> = old.keys().chain(new.keys()).collect();
    keys.into_iter()
        .filter_map(|k| {
            let o = old.get(k).cloned().unwrap_or(Value::Null);
            let n = new.get(k).cloned().unwrap_or(Value::Null);
            (o != n).then(|| FieldChange {
                field: k.clone(),
                old: o,
                new: n,
            })
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum PatchError {
    #[error("change to {0} carries no snapshot")]
    MissingSnapshot(NodeRef),
    #[error("snapshot of {node} does not decode: {error}")]
    BadSnapshot {
        node: NodeRef,
        error: serde_json::Error,
    },
}

/// Applies changes produced by [`diff`].
pub fn apply(model: &Model, changes: &[Change]) -> Result<Model, PatchError> {
    let mut out = model.clone();
    for change in changes {
        match change.kind {
            ChangeKind::Removed => out.remove_node(&change.node),
            ChangeKind::Added | ChangeKind::Modified => {
                let value = change
                    .snapshot
                    .clone()
                    .ok_or_else(|| PatchError::MissingSnapshot(change.node.clone()))?;
                out.put_node_value(change.node.kind, value)
                    .map_err(|error| PatchError::BadSnapshot {
                        node: change.node.clone(),
                        error,
                    })?;
            }
        }
    }
    Ok(out)
}

/// What a change puts at stake. The four sets are pairwise disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactReport {
    pub change: Change,
    /// Nodes whose every derivation path to a surviving root objective runs
    /// through the removed node.
    pub downstream_orphans: BTreeSet<NodeRef>,
    /// Other nodes derived from the changed one, plus metrics using a changed
    /// base and strategies serving a changed objective.
    pub downstream_review: BTreeSet<NodeRef>,
    /// Objectives the changed node derives from.
    pub upstream_review: BTreeSet<NodeRef>,
    /// DEPENDS_ON / AFFECTS neighbours in either direction.
    pub related: BTreeSet<NodeRef>,
}

impl ImpactReport {
    pub fn to_json(&self) -> Value {
        let ids = |set: &BTreeSet<NodeRef>| -> Vec<Value> {
            set.iter()
                .map(|n| json!({ "kind": n.kind.keyword(), "id": n.id.as_str() }))
                .collect()
        };
        json!({
            "change": self.change.to_json(),
            "downstream_orphans": ids(&self.downstream_orphans),
            "downstream_review": ids(&self.downstream_review),
            "upstream_review": ids(&self.upstream_review),
            "related": ids(&self.related),
        })
    }
}

impl fmt::Display for ImpactReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.change)?;
        for (name, set) in [
            ("downstream orphans", &self.downstream_orphans),
            ("downstream review", &self.downstream_review),
            ("upstream review", &self.upstream_review),
            ("related", &self.related),
        ] {
            let ids: Vec<&str> = set.iter().map(|n| n.id.as_str()).collect();
            let list = if ids.is_empty() { "-".to_string() } else { ids.join(", ") };
            writeln!(f, "  {name}: {list}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImpactError {
    #[error("{0} is not in the model")]
    UnknownNode(NodeRef),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Impact of `change` on `model`: the old model for removals and
/// modifications, the new one for additions.
pub fn impact(model: &Model, change: &Change) -> Result<ImpactReport, ImpactError> {
    let graph = build_graph(model)?;
    impact_on_graph(&graph, change)
}

pub fn impact_on_graph(graph: &TraceabilityGraph, change: &Change) -> Result<ImpactReport, ImpactError> {
    let x = &change.node;
    if !graph.contains(x) {
        return Err(ImpactError::UnknownNode(x.clone()));
    }
    let descendants = graph.descendants(x)?;
    let downstream_orphans: BTreeSet<NodeRef> = if change.kind == ChangeKind::Removed {
        let alive = reachable_from_roots(graph, Some(x));
        descendants.iter().filter(|n| !alive.contains(*n)).cloned().collect()
    } else {
        BTreeSet::new()
    };
    let upstream_review: BTreeSet<NodeRef> = graph
        .ancestors(x)?
        .into_iter()
        .filter(|n| n.kind == NodeKind::Objective)
        .collect();

    let mut downstream_review: BTreeSet<NodeRef> =
        descendants.difference(&downstream_orphans).cloned().collect();
    for (kind, from) in graph.incoming(x) {
        if matches!(kind, EdgeKind::Uses | EdgeKind::StrategyOf) {
            downstream_review.insert(from.clone());
        }
    }
    downstream_review.retain(|n| !upstream_review.contains(n) && !downstream_orphans.contains(n));

    let mut related = BTreeSet::new();
    let lateral = |k: &EdgeKind| matches!(k, EdgeKind::DependsOn | EdgeKind::Affects);
    for (kind, other) in graph.outgoing(x).iter().chain(graph.incoming(x)) {
        if lateral(kind) && other != x {
            related.insert(other.clone());
        }
    }
    related.retain(|n| {
        !downstream_orphans.contains(n) && !downstream_review.contains(n) && !upstream_review.contains(n)
    });

    Ok(ImpactReport {
        change: change.clone(),
        downstream_orphans,
        downstream_review,
        upstream_review,
        related,
    })
}

/// Root objectives refine nothing.
pub fn root_objectives(graph: &TraceabilityGraph) -> Vec<NodeRef> {
    graph
        .nodes()
        .iter()
        .filter(|n| {
            n.kind == NodeKind::Objective
                && !graph.outgoing(n).iter().any(|(k, _)| *k == EdgeKind::Refines)
        })
        .cloned()
        .collect()
}

/// Nodes reachable downwards along derivation edges from some root objective,
/// never passing through `without`.
fn reachable_from_roots(graph: &TraceabilityGraph, without: Option<&NodeRef>) -> BTreeSet<NodeRef> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<NodeRef> = root_objectives(graph)
        .into_iter()
        .filter(|r| Some(r) != without)
        .collect();
    seen.extend(queue.iter().cloned());
    while let Some(node) = queue.pop_front() {
        for (kind, child) in graph.incoming(&node) {
            if kind.is_derivation() && Some(child) != without && seen.insert(child.clone()) {
                queue.push_back(child.clone());
            }
        }
    }
    seen
}
