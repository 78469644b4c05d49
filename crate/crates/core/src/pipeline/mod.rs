//! Measurement logs in, classified results, routed actions and reports out.

mod aggregate;
mod evaluate;
mod ingest;
mod report;
mod route;

pub use aggregate::{aggregate, aggregate_base};
pub use evaluate::{
    evaluate_period, evaluate_range, EvaluateError, EvaluationFailure, EvaluationResult, Outcome,
};
pub use ingest::{ingest, ingest_str, IngestCode, IngestError, MeasurementRecord, RecordBody};
pub use report::{band_colours, generate_report, ReportError, ReportFormat};
pub use route::{directives, route_actions, route_failure, value_text, ActionDirective, RouteError};
