//! Natural-language formulation of objectives and measurement goals from
//! their template fields.

use thiserror::Error;

use crate::model::{BusinessObjective, FacetSelection, Identifier, MeasurementGoal, Model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("{node}: field `{field}` is empty")]
    MissingField { node: Identifier, field: &'static str },
    #[error("no objective or goal named {0}")]
    UnknownNode(String),
}

/// Renders the objective or goal with this id. Objectives win when both
/// kinds use the id.
pub fn render_formulation(model: &Model, id: &str) -> Result<String, RenderError> {
    if let Some(bo) = model.objective(id) {
        return render_objective(model, bo);
    }
    if let Some(goal) = model.goal(id) {
        return render_goal(model, goal);
    }
    Err(RenderError::UnknownNode(id.to_string()))
}

/// Top-level objectives use the primary-objective sentence, refined ones the
/// sub-objective sentence.
pub fn render_objective(model: &Model, bo: &BusinessObjective) -> Result<String, RenderError> {
    let need = |field: &'static str, value: &str| -> Result<String, RenderError> {
        let value = clause(value);
        if value.is_empty() {
            Err(RenderError::MissingField {
                node: bo.id.clone(),
                field,
            })
        } else {
            Ok(value)
        }
    };
    let object = need("object", &bo.object)?;
    let scope = need("scope", &scope_text(model, bo))?;
    let purpose = need("purpose", &bo.purpose)?;
    let viewpoint = need("viewpoint", &names(model, &bo.viewpoint))?;
    let context = need("context", &bo.context)?;

    let mut relations = Vec::new();
    if !bo.depends_on.is_empty() {
        relations.push(format!("depend on {}", ids(&bo.depends_on)));
    }
    if !bo.affects.is_empty() {
        relations.push(format!("affect {}", ids(&bo.affects)));
    }
    let relations = relations.join(" and ");

    let text = if bo.refines.is_none() {
        let mut s = format!(
            "One of our primary business objectives is to {purpose} with respect to {object} \
             within that {scope}, from the viewpoint of {viewpoint} while taking into account {context}."
        );
        if !relations.is_empty() {
            s.push_str(&format!(" Achieving this business objective will {relations}."));
        }
        s
    } else {
        let mut s = format!(
            "Assess the {object} including all elements within {scope}, for the purpose of {purpose} \
             from the viewpoint of {viewpoint}. When doing so, {context} should be taken into account."
        );
        if !relations.is_empty() {
            s.push_str(&format!(" This objective is expected to {relations}."));
        }
        s
    };
    Ok(text)
}

pub fn render_goal(model: &Model, goal: &MeasurementGoal) -> Result<String, RenderError> {
    let need = |field: &'static str, value: &str| -> Result<String, RenderError> {
        let value = clause(value);
        if value.is_empty() {
            Err(RenderError::MissingField {
                node: goal.id.clone(),
                field,
            })
        } else {
            Ok(value)
        }
    };
    let object = need("object", &goal.object)?;
    let purpose = need("purpose", &goal.purpose)?;
    let focus = need("focus", &goal.focus)?;
    let scope = need("scope", &goal.scope)?;
    let criteria: Vec<String> = goal.criteria.iter().map(|c| clause(c)).collect();
    let criteria = need("criteria", &criteria.join(", "))?;
    let viewpoint = need("viewpoint", &names(model, &goal.viewpoint))?;
    let context = need("context", &goal.context)?;

    let mut text = format!(
        "Analyse {object} for the purpose of {purpose} {focus} of all elements within {scope} \
         with respect to {criteria} from the viewpoint of {viewpoint} in the context of {context}."
    );
    let related: Vec<Identifier> = goal
        .measures
        .iter()
        .chain(&goal.related_goals)
        .cloned()
        .collect();
    if !related.is_empty() {
        text.push_str(&format!(
            " This measurement goal is expected to impact/affect/depend upon {}.",
            ids(&related)
        ));
    }
    Ok(text)
}

/// Field text ready to embed mid-sentence: trimmed, inner whitespace
/// collapsed, trailing full stop dropped.
fn clause(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.trim_end_matches('.').to_string()
}

fn scope_text(model: &Model, bo: &BusinessObjective) -> String {
    let Some(scope) = &bo.scope else {
        return String::new();
    };
    if let Some(d) = &scope.description {
        return d.clone();
    }
    match &scope.selection {
        FacetSelection::All => match model.universe(scope.universe.as_str()) {
            Some(u) => enumerate(u.facets.iter().map(|f| f.replace('_', " ")).collect()),
            None => scope.universe.to_string(),
        },
        FacetSelection::Facets(facets) => {
            enumerate(facets.iter().map(|f| f.replace('_', " ")).collect())
        }
    }
}

fn names(model: &Model, ids: &[Identifier]) -> String {
    enumerate(
        ids.iter()
            .map(|id| match model.stakeholder(id.as_str()) {
                Some(s) if !s.name.trim().is_empty() => s.name.trim().to_string(),
                _ => id.to_string(),
            })
            .collect(),
    )
}

fn ids(ids: &[Identifier]) -> String {
    enumerate(ids.iter().map(Identifier::to_string).collect())
}

/// `a`, `a and b`, `a, b and c`.
fn enumerate(items: Vec<String>) -> String {
    match items.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}
