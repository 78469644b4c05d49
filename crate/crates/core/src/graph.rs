//! The traceability graph: typed edges from metrics up through questions and
//! goals to the business objectives they serve.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::model::{Identifier, Model, NodeKind, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeKind {
    /// Child objective to parent objective.
    Refines,
    /// Goal to objective.
    Measures,
    /// Question to goal.
    Asks,
    /// Metric to question.
    Answers,
    /// Metric to base measurement.
    Uses,
    DependsOn,
    Affects,
    /// Strategy to the objective it serves.
    StrategyOf,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 8] = [
        EdgeKind::Refines,
        EdgeKind::Measures,
        EdgeKind::Asks,
        EdgeKind::Answers,
        EdgeKind::Uses,
        EdgeKind::DependsOn,
        EdgeKind::Affects,
        EdgeKind::StrategyOf,
    ];

    /// Edge kinds that make up the derivation chain used by ancestor and
    /// descendant closure.
    pub fn is_derivation(self) -> bool {
        matches!(
            self,
            EdgeKind::Refines | EdgeKind::Measures | EdgeKind::Asks | EdgeKind::Answers
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::Refines => "REFINES",
            EdgeKind::Measures => "MEASURES",
            EdgeKind::Asks => "ASKS",
            EdgeKind::Answers => "ANSWERS",
            EdgeKind::Uses => "USES",
            EdgeKind::DependsOn => "DEPENDS_ON",
            EdgeKind::Affects => "AFFECTS",
            EdgeKind::StrategyOf => "STRATEGY_OF",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: NodeRef,
    pub to: NodeRef,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unresolved reference to {kind} {id} in {site}")]
    UnresolvedReference {
        id: Identifier,
        kind: NodeKind,
        site: String,
    },
    #[error("refinement cycle through {}", join(.members))]
    RefinesCycle { members: Vec<Identifier> },
    #[error("duplicate node {0}")]
    DuplicateNode(NodeRef),
    #[error("unknown node {0}")]
    UnknownNode(String),
}

fn join(ids: &[Identifier]) -> String {
    ids.iter().map(Identifier::as_str).collect::<Vec<_>>().join(", ")
}

/// Immutable, deterministically ordered graph over all model nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceabilityGraph {
    nodes: BTreeSet<NodeRef>,
    edges: BTreeSet<Edge>,
    outgoing: BTreeMap<NodeRef, Vec<(EdgeKind, NodeRef)>>,
    incoming: BTreeMap<NodeRef, Vec<(EdgeKind, NodeRef)>>,
}

impl TraceabilityGraph {
    /// Assembles a graph from explicit parts. Edges must join listed nodes.
    pub fn from_parts(nodes: BTreeSet<NodeRef>, edges: BTreeSet<Edge>) -> Self {
        let mut outgoing: BTreeMap<NodeRef, Vec<(EdgeKind, NodeRef)>> = BTreeMap::new();
        let mut incoming: BTreeMap<NodeRef, Vec<(EdgeKind, NodeRef)>> = BTreeMap::new();
        for e in &edges {
            outgoing
                .entry(e.from.clone())
                .or_default()
                .push((e.kind, e.to.clone()));
            incoming
                .entry(e.to.clone())
                .or_default()
                .push((e.kind, e.from.clone()));
        }
        Self {
            nodes,
            edges,
            outgoing,
            incoming,
        }
    }

    pub fn nodes(&self) -> &BTreeSet<NodeRef> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains(&self, node: &NodeRef) -> bool {
        self.nodes.contains(node)
    }

    /// Finds a node by bare id. When several kinds share the id the
    /// derivation-chain kinds win, in canonical kind order.
    pub fn find(&self, id: &str) -> Option<NodeRef> {
        let preferred = [
            NodeKind::Objective,
            NodeKind::Goal,
            NodeKind::Question,
            NodeKind::Metric,
        ];
        let all = preferred.iter().chain(NodeKind::ALL.iter());
        for kind in all {
            let Ok(ident) = Identifier::new(id) else {
                return None;
            };
            let node = NodeRef::new(*kind, ident);
            if self.nodes.contains(&node) {
                return Some(node);
            }
        }
        None
    }

    pub fn outgoing(&self, node: &NodeRef) -> &[(EdgeKind, NodeRef)] {
        self.outgoing.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn incoming(&self, node: &NodeRef) -> &[(EdgeKind, NodeRef)] {
        self.incoming.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Everything derived from `node`: closure over reversed derivation edges,
    /// excluding the node itself.
    pub fn descendants(&self, node: &NodeRef) -> Result<BTreeSet<NodeRef>, GraphError> {
        self.closure(node, |g, n| g.incoming(n))
    }

    /// Everything `node` is derived from, excluding the node itself.
    pub fn ancestors(&self, node: &NodeRef) -> Result<BTreeSet<NodeRef>, GraphError> {
        self.closure(node, |g, n| g.outgoing(n))
    }

    fn closure<'a>(
        &'a self,
        start: &NodeRef,
        step: impl Fn(&'a Self, &NodeRef) -> &'a [(EdgeKind, NodeRef)],
    ) -> Result<BTreeSet<NodeRef>, GraphError> {
        if !self.nodes.contains(start) {
            return Err(GraphError::UnknownNode(start.to_string()));
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.clone()];
        while let Some(node) = stack.pop() {
            for (kind, next) in step(self, &node) {
                if kind.is_derivation() && next != start && seen.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Objective ancestors in derivation order: nearest first, ties by id.
    pub fn affected_objectives(&self, node: &NodeRef) -> Result<Vec<Identifier>, GraphError> {
        if !self.nodes.contains(node) {
            return Err(GraphError::UnknownNode(node.to_string()));
        }
        let mut distance: BTreeMap<NodeRef, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([(node.clone(), 0usize)]);
        while let Some((current, d)) = queue.pop_front() {
            for (kind, next) in self.outgoing(&current) {
                if kind.is_derivation() && next != node && !distance.contains_key(next) {
                    distance.insert(next.clone(), d + 1);
                    queue.push_back((next.clone(), d + 1));
                }
            }
        }
        let mut objectives: Vec<(usize, Identifier)> = distance
            .into_iter()
            .filter(|(n, _)| n.kind == NodeKind::Objective)
            .map(|(n, d)| (d, n.id))
            .collect();
        objectives.sort();
        Ok(objectives.into_iter().map(|(_, id)| id).collect())
    }

    /// Deterministic JSON dump: nodes and edges in sorted order.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nodes": self.nodes.iter().map(|n| json!({"kind": n.kind, "id": n.id})).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from.id,
                "from_kind": e.from.kind,
                "kind": e.kind,
                "to": e.to.id,
                "to_kind": e.to.kind,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn canonical_dump(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("JSON value prints");
        text.push('\n');
        text
    }

    /// Graphviz rendering; node shape by kind, edge label by edge kind.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph symbiosis {\n  rankdir=BT;\n");
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{}\\n{}\", shape={}];",
                dot_key(n),
                n.id,
                n.kind,
                dot_shape(n.kind)
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"{}];",
                dot_key(&e.from),
                dot_key(&e.to),
                e.kind,
                if e.kind.is_derivation() { "" } else { ", style=dashed" }
            );
        }
        out.push_str("}\n");
        out
    }
}

fn dot_key(n: &NodeRef) -> String {
    format!("{}:{}", n.kind, n.id)
}

fn dot_shape(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Stakeholder => "egg",
        NodeKind::Universe => "folder",
        NodeKind::Objective => "box",
        NodeKind::Strategy => "hexagon",
        NodeKind::Goal => "ellipse",
        NodeKind::Question => "diamond",
        NodeKind::Base => "cylinder",
        NodeKind::Metric => "note",
    }
}

/// Builds the graph. Fails on duplicate nodes, references that do not
/// resolve, and refinement cycles.
pub fn build_graph(model: &Model) -> Result<TraceabilityGraph, GraphError> {
    let mut nodes = BTreeSet::new();
    for kind in NodeKind::ALL {
        for id in model.ids(kind) {
            let node = NodeRef::new(kind, id.clone());
            if !nodes.insert(node.clone()) {
                return Err(GraphError::DuplicateNode(node));
            }
        }
    }

    let mut edges = BTreeSet::new();
    let mut link = |from: NodeRef, to_kind: NodeKind, to: &Identifier, kind: EdgeKind, field: &str| {
        let target = NodeRef::new(to_kind, to.clone());
        if !nodes.contains(&target) {
            return Err(GraphError::UnresolvedReference {
                id: to.clone(),
                kind: to_kind,
                site: format!("{} {}.{field}", from.kind, from.id),
            });
        }
        edges.insert(Edge {
            from,
            to: target,
            kind,
        });
        Ok(())
    };

    for bo in &model.objectives {
        let me = || NodeRef::new(NodeKind::Objective, bo.id.clone());
        if let Some(parent) = &bo.refines {
            link(me(), NodeKind::Objective, parent, EdgeKind::Refines, "refines")?;
        }
        for other in &bo.depends_on {
            link(me(), NodeKind::Objective, other, EdgeKind::DependsOn, "depends_on")?;
        }
        for other in &bo.affects {
            link(me(), NodeKind::Objective, other, EdgeKind::Affects, "affects")?;
        }
    }
    for s in &model.strategies {
        if let Some(bo) = &s.for_objective {
            let me = NodeRef::new(NodeKind::Strategy, s.id.clone());
            link(me, NodeKind::Objective, bo, EdgeKind::StrategyOf, "for")?;
        }
    }
    for g in &model.goals {
        for bo in &g.measures {
            let me = NodeRef::new(NodeKind::Goal, g.id.clone());
            link(me, NodeKind::Objective, bo, EdgeKind::Measures, "measures")?;
        }
    }
    for q in &model.questions {
        if let Some(goal) = &q.goal {
            let me = NodeRef::new(NodeKind::Question, q.id.clone());
            link(me, NodeKind::Goal, goal, EdgeKind::Asks, "goal")?;
        }
    }
    for m in &model.metrics {
        let me = || NodeRef::new(NodeKind::Metric, m.id.clone());
        for q in &m.answers {
            link(me(), NodeKind::Question, q, EdgeKind::Answers, "answers")?;
        }
        for b in &m.uses {
            link(me(), NodeKind::Base, b, EdgeKind::Uses, "uses")?;
        }
    }

    if let Some(members) = refines_cycle(model) {
        return Err(GraphError::RefinesCycle { members });
    }
    Ok(TraceabilityGraph::from_parts(nodes, edges))
}

/// Members of the first refinement cycle found, sorted, or `None`.
pub fn refines_cycle(model: &Model) -> Option<Vec<Identifier>> {
    let parent: BTreeMap<&str, &str> = model
        .objectives
        .iter()
        .filter_map(|bo| bo.refines.as_ref().map(|p| (bo.id.as_str(), p.as_str())))
        .collect();
    let mut cleared: BTreeSet<&str> = BTreeSet::new();
    for start in parent.keys() {
        let mut path: Vec<&str> = Vec::new();
        let mut current = *start;
        loop {
            if cleared.contains(current) {
                break;
            }
            if let Some(pos) = path.iter().position(|p| *p == current) {
                let mut members: Vec<Identifier> = path[pos..]
                    .iter()
                    .map(|id| Identifier::new(*id).expect("model ids are valid"))
                    .collect();
                members.sort();
                return Some(members);
            }
            path.push(current);
            match parent.get(current) {
                Some(next) => current = next,
                None => break,
            }
        }
        cleared.extend(path);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    const CHAIN: &str = r#"
stakeholder ciso { name: "CISO" }
objective BO1 { viewpoint: ciso }
objective BO1.1 { refines: BO1 depends_on: BO1.1.1 }
objective BO1.1.1 { refines: BO1.1 }
objective ISO { }
goal MG1 { measures: BO1.1.1 }
question Q1 { goal: MG1 }
question Q2 { goal: MG1 }
base a { }
base b { }
metric M { answers: Q1, Q2 uses: a, b }
"#;

    fn node(kind: NodeKind, id: &str) -> NodeRef {
        NodeRef::new(kind, Identifier::new(id).unwrap())
    }

    fn ids(set: &BTreeSet<NodeRef>) -> Vec<&str> {
        set.iter().map(|n| n.id.as_str()).collect()
    }

    #[test]
    fn empty_model() {
        let g = build_graph(&Model::default()).unwrap();
        assert!(g.nodes().is_empty() && g.edges().is_empty());
    }

    #[test]
    fn edges_and_closures() {
        let (model, d) = parse(CHAIN);
        assert!(d.is_empty());
        let g = build_graph(&model).unwrap();
        let uses = g.edges().iter().filter(|e| e.kind == EdgeKind::Uses).count();
        assert_eq!(uses, 2);
        assert_eq!(g.nodes().len(), model.node_count());

        let down = g.descendants(&node(NodeKind::Objective, "BO1")).unwrap();
        assert_eq!(ids(&down), ["BO1.1", "BO1.1.1", "MG1", "Q1", "Q2", "M"]);
        let metric = node(NodeKind::Metric, "M");
        assert!(g.descendants(&metric).unwrap().is_empty());
        assert!(g.descendants(&node(NodeKind::Objective, "ISO")).unwrap().is_empty());
        let up = g.ancestors(&metric).unwrap();
        assert_eq!(up.len(), 6);
        assert!(g.ancestors(&node(NodeKind::Objective, "BO1")).unwrap().is_empty());

        let affected = g.affected_objectives(&metric).unwrap();
        let affected: Vec<&str> = affected.iter().map(Identifier::as_str).collect();
        assert_eq!(affected, ["BO1.1.1", "BO1.1", "BO1"]);
    }

    #[test]
    fn depends_on_cycles_do_not_affect_closure() {
        let text = "objective A { depends_on: B }\nobjective B { depends_on: A }";
        let g = build_graph(&parse(text).0).unwrap();
        assert!(g.ancestors(&node(NodeKind::Objective, "A")).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        let (model, _) = parse("objective A { refines: B }\nobjective B { refines: A }");
        assert!(matches!(build_graph(&model), Err(GraphError::RefinesCycle { members }) if members.len() == 2));
        let (model, _) = parse("goal G { measures: NOPE }");
        assert!(matches!(build_graph(&model), Err(GraphError::UnresolvedReference { .. })));
        let (model, _) = parse("base a { }\nbase a { }");
        assert!(matches!(build_graph(&model), Err(GraphError::DuplicateNode(_))));
        let g = build_graph(&Model::default()).unwrap();
        assert!(g.descendants(&node(NodeKind::Objective, "X")).is_err());
    }

    #[test]
    fn dumps_are_deterministic() {
        let (model, _) = parse(CHAIN);
        let a = build_graph(&model).unwrap();
        let b = build_graph(&model.sorted()).unwrap();
        assert_eq!(a.canonical_dump(), b.canonical_dump());
        assert_eq!(a.to_dot(), b.to_dot());
        assert!(a.to_dot().contains("\"objective:BO1.1\" -> \"objective:BO1\" [label=\"REFINES\"];"));
    }
}
