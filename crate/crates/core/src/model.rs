//! Domain types for business objectives, strategies, measurement goals,
//! questions, base measurements and metrics.

use std::borrow::Borrow;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::diagnostic::SourceSpan;
use crate::expr::FunctionExpr;
use crate::interval::Interval;
use crate::period::Granularity;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid identifier {0:?}")]
pub struct InvalidIdentifier(pub String);

/// A node identifier: `[A-Za-z_][A-Za-z0-9_.]*`. Dots are allowed so
/// hierarchical ids such as `BO1.1.1` are legal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Identifier(String);

impl Identifier {
    pub fn new(text: impl Into<String>) -> Result<Self, InvalidIdentifier> {
        let text = text.into();
        if Self::is_valid(&text) {
            Ok(Self(text))
        } else {
            Err(InvalidIdentifier(text))
        }
    }

    pub fn is_valid(text: &str) -> bool {
        let mut chars = text.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for Identifier {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Identifier::new(text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Identifier {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Identifier {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for Identifier {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Identifier {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// Node kinds, in canonical order. The order is used for serialization, diffs
/// and sorted outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Stakeholder,
    Universe,
    Objective,
    Strategy,
    Goal,
    Question,
    Base,
    Metric,
}

impl NodeKind {
    pub const ALL: [NodeKind; 8] = [
        NodeKind::Stakeholder,
        NodeKind::Universe,
        NodeKind::Objective,
        NodeKind::Strategy,
        NodeKind::Goal,
        NodeKind::Question,
        NodeKind::Base,
        NodeKind::Metric,
    ];

    /// The block keyword in `.sym` sources.
    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Stakeholder => "stakeholder",
            NodeKind::Universe => "universe",
            NodeKind::Objective => "objective",
            NodeKind::Strategy => "strategy",
            NodeKind::Goal => "goal",
            NodeKind::Question => "question",
            NodeKind::Base => "base",
            NodeKind::Metric => "metric",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Key of the collection holding this kind in the canonical dump.
    pub fn collection(self) -> &'static str {
        match self {
            NodeKind::Stakeholder => "stakeholders",
            NodeKind::Universe => "universes",
            NodeKind::Objective => "objectives",
            NodeKind::Strategy => "strategies",
            NodeKind::Goal => "goals",
            NodeKind::Question => "questions",
            NodeKind::Base => "bases",
            NodeKind::Metric => "metrics",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A node reference: ids are unique per kind, so identity is the pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub kind: NodeKind,
    pub id: Identifier,
}

impl NodeRef {
    pub fn new(kind: NodeKind, id: Identifier) -> Self {
        Self { kind, id }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: Identifier,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeUniverse {
    pub id: Identifier,
    pub facets: Vec<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetSelection {
    All,
    Facets(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeRef {
    pub universe: Identifier,
    pub selection: FacetSelection,
    /// Narrative form of the scope, e.g. "company-wide".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl ScopeRef {
    /// The selected facets, expanding `ALL` against the universe.
    pub fn selected<'a>(&'a self, universe: &'a ScopeUniverse) -> Vec<&'a str> {
        match &self.selection {
            FacetSelection::All => universe.facets.iter().map(String::as_str).collect(),
            FacetSelection::Facets(facets) => facets.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusinessObjective {
    pub id: Identifier,
    pub object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<ScopeRef>,
    pub purpose: String,
    pub viewpoint: Vec<Identifier>,
    pub context: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refines: Option<Identifier>,
    #[serde(default)]
    pub depends_on: Vec<Identifier>,
    #[serde(default)]
    pub affects: Vec<Identifier>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority_justification: Option<String>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyStep {
    pub text: String,
    #[serde(default)]
    pub spawns: Vec<Identifier>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub id: Identifier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub for_objective: Option<Identifier>,
    pub steps: Vec<StrategyStep>,
    pub justification: String,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGoal {
    pub id: Identifier,
    pub object: String,
    pub purpose: String,
    pub focus: String,
    pub scope: String,
    pub criteria: Vec<String>,
    pub viewpoint: Vec<Identifier>,
    pub context: String,
    pub measures: Vec<Identifier>,
    #[serde(default)]
    pub related_goals: Vec<Identifier>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionStatus {
    Answered,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementQuestion {
    pub id: Identifier,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Identifier>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<QuestionStatus>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceMode {
    /// Values are submitted directly in the measurement log.
    Direct,
    /// Count of raw log records matching every filter.
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Sum,
    Latest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFilter {
    pub field: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseMeasurementDef {
    pub id: Identifier,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SourceMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<Aggregation>,
    #[serde(default)]
    pub filters: Vec<FieldFilter>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ActionKind {
    Log,
    Notify,
    Escalate,
}

impl ActionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Log => "log",
            ActionKind::Notify => "notify",
            ActionKind::Escalate => "escalate",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Log => "LOG",
            ActionKind::Notify => "NOTIFY",
            ActionKind::Escalate => "ESCALATE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionTarget {
    Stakeholder(Identifier),
    /// Whoever owns the named node: an objective's or goal's viewpoint, or a
    /// metric's stakeholders.
    OwnerOf(Identifier),
}

impl fmt::Display for ActionTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionTarget::Stakeholder(id) => write!(f, "{id}"),
            ActionTarget::OwnerOf(id) => write!(f, "owner_of({id})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub target: ActionTarget,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationBand {
    pub label: String,
    pub interval: Interval,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportingSchedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection: Option<Granularity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reporting: Option<Granularity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDef {
    pub id: Identifier,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modified: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewed: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Identifier>,
    pub answers: Vec<Identifier>,
    pub uses: Vec<Identifier>,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionExpr>,
    /// Declared output domain; `None` means the default `[0, 100]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Interval>,
    pub bands: Vec<InterpretationBand>,
    #[serde(default)]
    pub schedule: ReportingSchedule,
    pub stakeholders: Vec<Identifier>,
    #[serde(skip)]
    pub span: Option<SourceSpan>,
}

impl MetricDef {
    pub const DEFAULT_DOMAIN: (f64, f64) = (0.0, 100.0);

    pub fn effective_domain(&self) -> Interval {
        self.domain.clone().unwrap_or_else(|| {
            Interval::closed(Self::DEFAULT_DOMAIN.0, Self::DEFAULT_DOMAIN.1)
        })
    }
}

/// All nodes of a model, in declaration order. Duplicate ids are kept so the
/// validator can report them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Model {
    #[serde(default)]
    pub stakeholders: Vec<Stakeholder>,
    #[serde(default)]
    pub universes: Vec<ScopeUniverse>,
    #[serde(default)]
    pub objectives: Vec<BusinessObjective>,
    #[serde(default)]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub goals: Vec<MeasurementGoal>,
    #[serde(default)]
    pub questions: Vec<MeasurementQuestion>,
    #[serde(default)]
    pub bases: Vec<BaseMeasurementDef>,
    #[serde(default)]
    pub metrics: Vec<MetricDef>,
}

fn find<'a, T>(items: &'a [T], id: &str, key: impl Fn(&T) -> &Identifier) -> Option<&'a T> {
    items.iter().find(|item| key(item).as_str() == id)
}

impl Model {
    pub fn stakeholder(&self, id: &str) -> Option<&Stakeholder> {
        find(&self.stakeholders, id, |n| &n.id)
    }

    pub fn universe(&self, id: &str) -> Option<&ScopeUniverse> {
        find(&self.universes, id, |n| &n.id)
    }

    pub fn objective(&self, id: &str) -> Option<&BusinessObjective> {
        find(&self.objectives, id, |n| &n.id)
    }

    pub fn strategy(&self, id: &str) -> Option<&Strategy> {
        find(&self.strategies, id, |n| &n.id)
    }

    pub fn goal(&self, id: &str) -> Option<&MeasurementGoal> {
        find(&self.goals, id, |n| &n.id)
    }

    pub fn question(&self, id: &str) -> Option<&MeasurementQuestion> {
        find(&self.questions, id, |n| &n.id)
    }

    pub fn base(&self, id: &str) -> Option<&BaseMeasurementDef> {
        find(&self.bases, id, |n| &n.id)
    }

    pub fn metric(&self, id: &str) -> Option<&MetricDef> {
        find(&self.metrics, id, |n| &n.id)
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    pub fn node_count(&self) -> usize {
        NodeKind::ALL.iter().map(|k| self.ids(*k).len()).sum()
    }

    /// Ids of one kind, in declaration order (duplicates included).
    pub fn ids(&self, kind: NodeKind) -> Vec<&Identifier> {
        match kind {
            NodeKind::Stakeholder => self.stakeholders.iter().map(|n| &n.id).collect(),
            NodeKind::Universe => self.universes.iter().map(|n| &n.id).collect(),
            NodeKind::Objective => self.objectives.iter().map(|n| &n.id).collect(),
            NodeKind::Strategy => self.strategies.iter().map(|n| &n.id).collect(),
            NodeKind::Goal => self.goals.iter().map(|n| &n.id).collect(),
            NodeKind::Question => self.questions.iter().map(|n| &n.id).collect(),
            NodeKind::Base => self.bases.iter().map(|n| &n.id).collect(),
            NodeKind::Metric => self.metrics.iter().map(|n| &n.id).collect(),
        }
    }

    pub fn contains(&self, kind: NodeKind, id: &str) -> bool {
        self.ids(kind).iter().any(|n| n.as_str() == id)
    }

    /// Every node reference, sorted by kind then id.
    pub fn node_refs(&self) -> Vec<NodeRef> {
        let mut refs: Vec<NodeRef> = NodeKind::ALL
            .iter()
            .flat_map(|kind| {
                self.ids(*kind)
                    .into_iter()
                    .map(move |id| NodeRef::new(*kind, id.clone()))
            })
            .collect();
        refs.sort();
        refs.dedup();
        refs
    }

    /// Stakeholders owning a node, for `owner_of(...)` action targets.
    /// Objectives and goals are owned by their viewpoint, metrics by their
    /// stakeholders. Objectives win if several kinds share the id.
    pub fn owners_of(&self, id: &str) -> Option<&[Identifier]> {
        if let Some(bo) = self.objective(id) {
            return Some(&bo.viewpoint);
        }
        if let Some(goal) = self.goal(id) {
            return Some(&goal.viewpoint);
        }
        self.metric(id).map(|m| m.stakeholders.as_slice())
    }

    /// Sorts every collection by id, preserving relative order of duplicates.
    pub fn sorted(&self) -> Model {
        let mut model = self.clone();
        model.stakeholders.sort_by(|a, b| a.id.cmp(&b.id));
        model.universes.sort_by(|a, b| a.id.cmp(&b.id));
        model.objectives.sort_by(|a, b| a.id.cmp(&b.id));
        model.strategies.sort_by(|a, b| a.id.cmp(&b.id));
        model.goals.sort_by(|a, b| a.id.cmp(&b.id));
        model.questions.sort_by(|a, b| a.id.cmp(&b.id));
        model.bases.sort_by(|a, b| a.id.cmp(&b.id));
        model.metrics.sort_by(|a, b| a.id.cmp(&b.id));
        model
    }

    pub fn canonical_value(&self) -> Value {
        serde_json::to_value(self.sorted()).expect("model serializes to JSON")
    }

    /// Deterministic JSON dump with sorted keys and collections sorted by id.
    /// Source spans are not part of the dump.
    pub fn canonical_dump(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(&self.canonical_value()).expect("JSON value prints");
        text.push('\n');
        text
    }

    /// Canonical JSON of one node (first declaration wins).
    pub fn node_value(&self, node: &NodeRef) -> Option<Value> {
        let id = node.id.as_str();
        let value = match node.kind {
            NodeKind::Stakeholder => serde_json::to_value(self.stakeholder(id)?),
            NodeKind::Universe => serde_json::to_value(self.universe(id)?),
            NodeKind::Objective => serde_json::to_value(self.objective(id)?),
            NodeKind::Strategy => serde_json::to_value(self.strategy(id)?),
            NodeKind::Goal => serde_json::to_value(self.goal(id)?),
            NodeKind::Question => serde_json::to_value(self.question(id)?),
            NodeKind::Base => serde_json::to_value(self.base(id)?),
            NodeKind::Metric => serde_json::to_value(self.metric(id)?),
        };
        Some(value.expect("node serializes to JSON"))
    }

    /// Removes every node with this kind and id. References elsewhere are left
    /// untouched.
    pub fn remove_node(&mut self, node: &NodeRef) {
        let id = node.id.as_str();
        match node.kind {
            NodeKind::Stakeholder => self.stakeholders.retain(|n| n.id != id),
            NodeKind::Universe => self.universes.retain(|n| n.id != id),
            NodeKind::Objective => self.objectives.retain(|n| n.id != id),
            NodeKind::Strategy => self.strategies.retain(|n| n.id != id),
            NodeKind::Goal => self.goals.retain(|n| n.id != id),
            NodeKind::Question => self.questions.retain(|n| n.id != id),
            NodeKind::Base => self.bases.retain(|n| n.id != id),
            NodeKind::Metric => self.metrics.retain(|n| n.id != id),
        }
    }

    /// Inserts or replaces a node from its canonical JSON.
    pub fn put_node_value(&mut self, kind: NodeKind, value: Value) -> serde_json::Result<()> {
        fn put<T: serde::de::DeserializeOwned>(
            items: &mut Vec<T>,
            value: Value,
            id: impl Fn(&T) -> &Identifier,
        ) -> serde_json::Result<()> {
            let node: T = serde_json::from_value(value)?;
            match items.iter_mut().find(|n| id(n) == id(&node)) {
                Some(slot) => *slot = node,
                None => items.push(node),
            }
            Ok(())
        }
        match kind {
            NodeKind::Stakeholder => put(&mut self.stakeholders, value, |n| &n.id),
            NodeKind::Universe => put(&mut self.universes, value, |n| &n.id),
            NodeKind::Objective => put(&mut self.objectives, value, |n| &n.id),
            NodeKind::Strategy => put(&mut self.strategies, value, |n| &n.id),
            NodeKind::Goal => put(&mut self.goals, value, |n| &n.id),
            NodeKind::Question => put(&mut self.questions, value, |n| &n.id),
            NodeKind::Base => put(&mut self.bases, value, |n| &n.id),
            NodeKind::Metric => put(&mut self.metrics, value, |n| &n.id),
        }
    }

    /// Source span of the first declaration of a node.
    pub fn span_of(&self, node: &NodeRef) -> Option<&SourceSpan> {
        let id = node.id.as_str();
        match node.kind {
            NodeKind::Stakeholder => self.stakeholder(id)?.span.as_ref(),
            NodeKind::Universe => self.universe(id)?.span.as_ref(),
            NodeKind::Objective => self.objective(id)?.span.as_ref(),
            NodeKind::Strategy => self.strategy(id)?.span.as_ref(),
            NodeKind::Goal => self.goal(id)?.span.as_ref(),
            NodeKind::Question => self.question(id)?.span.as_ref(),
            NodeKind::Base => self.base(id)?.span.as_ref(),
            NodeKind::Metric => self.metric(id)?.span.as_ref(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifier_grammar() {
        for ok in ["BO1", "BO1.1.1", "_x", "ME1.1.1.1.1", "bm_took"] {
            assert!(Identifier::new(ok).is_ok(), "{ok}");
        }
        for bad in ["", "1BO", ".a", "a-b", "a b", "é"] {
            assert!(Identifier::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn empty_model_dump_is_stable() {
        let model = Model::default();
        assert!(model.is_empty());
        assert_eq!(model.canonical_dump(), Model::default().canonical_dump());
        assert!(model.canonical_dump().contains("\"metrics\": []"));
    }

    #[test]
    fn node_value_round_trips_through_put() {
        let mut model = Model::default();
        model.stakeholders.push(Stakeholder {
            id: Identifier::new("ciso").unwrap(),
            name: "CISO".into(),
            role: None,
            span: None,
        });
        let node = NodeRef::new(NodeKind::Stakeholder, Identifier::new("ciso").unwrap());
        let mut value = model.node_value(&node).unwrap();
        value["name"] = Value::String("Chief Information Security Officer".into());
        model.put_node_value(NodeKind::Stakeholder, value).unwrap();
        assert_eq!(model.stakeholders.len(), 1);
        assert_eq!(model.stakeholders[0].name, "Chief Information Security Officer");
        model.remove_node(&node);
        assert!(model.is_empty());
    }
}
