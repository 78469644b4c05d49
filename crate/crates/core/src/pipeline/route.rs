use serde_json::{json, Value};
use thiserror::Error;

use super::evaluate::EvaluationResult;
use crate::expr::format_number;
use crate::model::{ActionKind, ActionTarget, Identifier, Model};
use crate::period::PeriodKey;

/// A resolved action, emitted as data for whatever delivers it.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDirective {
    pub kind: ActionKind,
    pub stakeholders: Vec<Identifier>,
    pub metric: Identifier,
    pub period: PeriodKey,
    /// None for directives raised by a failed evaluation.
    pub band: Option<String>,
    pub message: String,
}

impl ActionDirective {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.to_string(),
            "stakeholders": self.stakeholders.iter().map(Identifier::as_str).collect::<Vec<_>>(),
            "metric": self.metric.as_str(),
            "period": self.period.to_string(),
            "band": self.band,
            "message": self.message,
        })
    }
}

impl std::fmt::Display for ActionDirective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let who: Vec<&str> = self.stakeholders.iter().map(Identifier::as_str).collect();
        write!(f, "{} {}: {}", self.kind, who.join(", "), self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("result for {metric} {period} has no classification")]
    NoClassification { metric: Identifier, period: PeriodKey },
    #[error("action target {0} does not resolve to stakeholders")]
    UnresolvedTarget(String),
}

/// Resolves the matched band's actions, ordered LOG, NOTIFY, ESCALATE and
/// otherwise in band order.
pub fn route_actions(result: &EvaluationResult, model: &Model) -> Result<Vec<ActionDirective>, RouteError> {
    let classified = result.classification().ok_or_else(|| RouteError::NoClassification {
        metric: result.metric.clone(),
        period: result.period,
    })?;
    let message = format!(
        "{} {}: value {} in band {}; affected objectives: {}",
        result.metric,
        result.period,
        value_text(classified.value),
        classified.band,
        objectives_text(&result.affected_objectives),
    );
    let mut out = Vec::new();
    for action in &classified.actions {
        let stakeholders = match &action.target {
            ActionTarget::Stakeholder(id) if model.stakeholder(id.as_str()).is_some() => vec![id.clone()],
            ActionTarget::OwnerOf(id) => match model.owners_of(id.as_str()) {
                Some(owners) if !owners.is_empty() => dedup(owners),
                _ => return Err(RouteError::UnresolvedTarget(action.target.to_string())),
            },
            _ => return Err(RouteError::UnresolvedTarget(action.target.to_string())),
        };
        out.push(ActionDirective {
            kind: action.kind,
            stakeholders,
            metric: result.metric.clone(),
            period: result.period,
            band: Some(classified.band.clone()),
            message: message.clone(),
        });
    }
    out.sort_by_key(|d| d.kind);
    Ok(out)
}

/// A failed evaluation notifies the metric's stakeholders.
pub fn route_failure(result: &EvaluationResult, model: &Model) -> Vec<ActionDirective> {
    let Some(failure) = result.failure() else {
        return Vec::new();
    };
    let stakeholders = model
        .metric(result.metric.as_str())
        .map(|m| dedup(&m.stakeholders))
        .unwrap_or_default();
    if stakeholders.is_empty() {
        return Vec::new();
    }
    vec![ActionDirective {
        kind: ActionKind::Notify,
        stakeholders,
        metric: result.metric.clone(),
        period: result.period,
        band: None,
        message: format!(
            "{} {}: evaluation failed: {failure}; affected objectives: {}",
            result.metric,
            result.period,
            objectives_text(&result.affected_objectives),
        ),
    }]
}

/// Directives for any result: band actions, or the failure notification.
pub fn directives(result: &EvaluationResult, model: &Model) -> Result<Vec<ActionDirective>, RouteError> {
    if result.classification().is_some() {
        route_actions(result, model)
    } else {
        Ok(route_failure(result, model))
    }
}

/// Numbers as reports show them: always with a decimal point.
pub fn value_text(value: f64) -> String {
    let text = format_number(value);
    if text.contains('.') || !value.is_finite() {
        text
    } else {
        format!("{text}.0")
    }
}

fn objectives_text(ids: &[Identifier]) -> String {
    if ids.is_empty() {
        "none".to_string()
    } else {
        ids.iter().map(Identifier::as_str).collect::<Vec<_>>().join(", ")
    }
}

fn dedup(ids: &[Identifier]) -> Vec<Identifier> {
    let mut out: Vec<Identifier> = Vec::new();
    for id in ids {
        if !out.contains(id) {
            out.push(id.clone());
        }
    }
    out
}
