use serde_json::{json, Value};
use thiserror::Error;

use super::aggregate::{aggregate, is_relevant};
use super::ingest::MeasurementRecord;
use crate::expr::{classify, evaluate, Bindings, ClassifiedValue, ClassifyError, EvalError};
use crate::graph::{GraphError, TraceabilityGraph};
use crate::model::{Identifier, Model, NodeKind, NodeRef};
use crate::period::PeriodKey;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationFailure {
    #[error("metric has no measurement function")]
    NoFunction,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Classified(ClassifiedValue),
    Failed(EvaluationFailure),
}

/// One metric evaluated over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub metric: Identifier,
    pub period: PeriodKey,
    pub bindings: Bindings,
    pub outcome: Outcome,
    /// Objective ancestors of the metric, nearest first.
    pub affected_objectives: Vec<Identifier>,
    /// Collection periods inside `period` without any relevant record.
    pub warnings: Vec<String>,
}

impl EvaluationResult {
    pub fn value(&self) -> Option<f64> {
        match &self.outcome {
            Outcome::Classified(c) => Some(c.value),
            Outcome::Failed(_) => None,
        }
    }

    pub fn classification(&self) -> Option<&ClassifiedValue> {
        match &self.outcome {
            Outcome::Classified(c) => Some(c),
            Outcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&EvaluationFailure> {
        match &self.outcome {
            Outcome::Failed(f) => Some(f),
            Outcome::Classified(_) => None,
        }
    }

    pub fn band(&self) -> Option<&str> {
        self.classification().map(|c| c.band.as_str())
    }

    pub fn to_json(&self) -> Value {
        let bindings: serde_json::Map<String, Value> = self
            .bindings
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        json!({
            "metric": self.metric.as_str(),
            "period": self.period.to_string(),
            "bindings": bindings,
            "value": self.value(),
            "band": self.band(),
            "failure": self.failure().map(|f| f.to_string()),
            "affected_objectives": self.affected_objectives.iter().map(Identifier::as_str).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluateError {
    #[error("no metric named {0}")]
    UnknownMetric(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn evaluate_period(
    model: &Model,
    graph: &TraceabilityGraph,
    records: &[MeasurementRecord],
    metric_id: &str,
    period: &PeriodKey,
) -> Result<EvaluationResult, EvaluateError> {
    let metric = model
        .metric(metric_id)
        .ok_or_else(|| EvaluateError::UnknownMetric(metric_id.to_string()))?;
    let node = NodeRef::new(NodeKind::Metric, metric.id.clone());
    let affected_objectives = graph.affected_objectives(&node)?;

    let bindings = aggregate(records, metric, model, period);
    let outcome = match &metric.function {
        None => Outcome::Failed(EvaluationFailure::NoFunction),
        Some(function) => match evaluate(function, &bindings) {
            Err(e) => Outcome::Failed(e.into()),
            Ok(value) => match classify(value, metric) {
                Ok(c) => Outcome::Classified(c),
                Err(e) => Outcome::Failed(e.into()),
            },
        },
    };

    let mut warnings = Vec::new();
    if let Some(collection) = metric.schedule.collection {
        if collection <= period.granularity() {
            for sub in period.subdivide(collection) {
                let any = records.iter().any(|r| {
                    sub.contains(r.timestamp) && period.contains(r.timestamp) && is_relevant(r, metric, model)
                });
                if !any {
                    warnings.push(format!("no records for collection period {sub}"));
                }
            }
        }
    }

    Ok(EvaluationResult {
        metric: metric.id.clone(),
        period: *period,
        bindings,
        outcome,
        affected_objectives,
        warnings,
    })
}

/// Evaluates every period from `from` to `to` inclusive.
pub fn evaluate_range(
    model: &Model,
    graph: &TraceabilityGraph,
    records: &[MeasurementRecord],
    metric_id: &str,
    from: &PeriodKey,
    to: &PeriodKey,
) -> Result<Vec<EvaluationResult>, EvaluateError> {
    from.range_to(to)
        .iter()
        .map(|p| evaluate_period(model, graph, records, metric_id, p))
        .collect()
}
