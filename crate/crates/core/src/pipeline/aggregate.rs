use chrono::NaiveDate;

use super::ingest::{MeasurementRecord, RecordBody};
use crate::expr::Bindings;
use crate::model::{Aggregation, BaseMeasurementDef, FieldFilter, MetricDef, Model, SourceMode};
use crate::period::PeriodKey;

/// Binds every base measurement the metric uses to its value over `period`.
/// Bases without in-period data, or whose definition is incomplete, are left
/// unbound so evaluation reports them as missing.
pub fn aggregate(
    records: &[MeasurementRecord],
    metric: &MetricDef,
    model: &Model,
    period: &PeriodKey,
) -> Bindings {
    let mut bindings = Bindings::new();
    for id in &metric.uses {
        let Some(base) = model.base(id.as_str()) else {
            continue;
        };
        if let Some(value) = aggregate_base(records, base, period) {
            // Sums that overflow to infinity stay unbound.
            let _ = bindings.insert(id.clone(), value);
        }
    }
    bindings
}

/// Value of one base measurement over `period`, if it has data there.
pub fn aggregate_base(
    records: &[MeasurementRecord],
    base: &BaseMeasurementDef,
    period: &PeriodKey,
) -> Option<f64> {
    let in_period = records.iter().filter(|r| period.contains(r.timestamp));
    match (base.mode?, base.aggregation) {
        (SourceMode::Count, _) => {
            // A period with no raw records at all has no data; one with raw
            // records but no matches counts zero.
            let raw: Vec<_> = in_period
                .filter_map(|r| match &r.body {
                    RecordBody::Raw { fields } => Some(fields),
                    _ => None,
                })
                .collect();
            if raw.is_empty() {
                return None;
            }
            Some(raw.iter().filter(|f| matches_all(f, &base.filters)).count() as f64)
        }
        (SourceMode::Direct, Some(Aggregation::Sum)) => {
            let mut values = direct_values(in_period, base).peekable();
            values.peek()?;
            Some(values.map(|(_, v)| v).sum())
        }
        (SourceMode::Direct, Some(Aggregation::Latest)) => {
            // Ties on the date go to the record that appears last in the log.
            direct_values(in_period, base)
                .fold(None::<(NaiveDate, f64)>, |best, (date, v)| match best {
                    Some((d, _)) if d > date => best,
                    _ => Some((date, v)),
                })
                .map(|(_, v)| v)
        }
        (SourceMode::Direct, None) => None,
    }
}

fn direct_values<'a>(
    records: impl Iterator<Item = &'a MeasurementRecord> + 'a,
    base: &'a BaseMeasurementDef,
) -> impl Iterator<Item = (NaiveDate, f64)> + 'a {
    records.filter_map(move |r| match &r.body {
        RecordBody::Direct { base: b, value } if *b == base.id => Some((r.timestamp, *value)),
        _ => None,
    })
}

pub(crate) fn matches_all(
    fields: &std::collections::BTreeMap<String, String>,
    filters: &[FieldFilter],
) -> bool {
    filters
        .iter()
        .all(|f| fields.get(&f.field).is_some_and(|v| *v == f.value))
}

/// Whether a record can contribute to any base the metric uses. Used for the
/// collection-density warning.
pub(crate) fn is_relevant(record: &MeasurementRecord, metric: &MetricDef, model: &Model) -> bool {
    match &record.body {
        RecordBody::Direct { base, .. } => metric.uses.contains(base),
        RecordBody::Raw { .. } => metric.uses.iter().any(|id| {
            model
                .base(id.as_str())
                .is_some_and(|b| b.mode == Some(SourceMode::Count))
        }),
    }
}
