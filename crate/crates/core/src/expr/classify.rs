use serde::Serialize;
use thiserror::Error;

use crate::model::{Action, Identifier, MetricDef};

/// A metric value together with the interpretation band it falls in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedValue {
    pub value: f64,
    pub band: String,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("value {value} is outside the domain {domain} of metric {metric}")]
    OutOfDomain {
        metric: Identifier,
        value: f64,
        domain: String,
    },
    #[error("value {value} matches no band of metric {metric}")]
    NoBand { metric: Identifier, value: f64 },
    #[error("value {value} matches {count} bands of metric {metric}")]
    Ambiguous {
        metric: Identifier,
        value: f64,
        count: usize,
    },
}

/// Finds the single band of `metric` containing `value`.
///
/// Metrics whose bands partition their domain always yield exactly one band
/// for in-domain values; the `NoBand`/`Ambiguous` errors only arise for
/// metrics that would fail validation.
pub fn classify(value: f64, metric: &MetricDef) -> Result<ClassifiedValue, ClassifyError> {
    let domain = metric.effective_domain();
    if !domain.contains(&value) {
        return Err(ClassifyError::OutOfDomain {
            metric: metric.id.clone(),
            value,
            domain: domain.to_string(),
        });
    }
    let mut matching = metric.bands.iter().filter(|b| b.interval.contains(&value));
    let band = matching.next().ok_or_else(|| ClassifyError::NoBand {
        metric: metric.id.clone(),
        value,
    })?;
    let extra = matching.count();
    if extra > 0 {
        return Err(ClassifyError::Ambiguous {
            metric: metric.id.clone(),
            value,
            count: extra + 1,
        });
    }
    Ok(ClassifiedValue {
        value,
        band: band.label.clone(),
        actions: band.actions.clone(),
    })
}
