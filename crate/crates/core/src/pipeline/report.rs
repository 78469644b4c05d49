use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde_json::{json, Value};
use thiserror::Error;

use super::evaluate::EvaluationResult;
use super::route::{directives, value_text, ActionDirective, RouteError};
use crate::model::{Identifier, InterpretationBand, MetricDef, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "svg" => Ok(ReportFormat::Svg),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("no results")]
    NoResults,
    #[error("unknown report format {0:?}")]
    UnknownFormat(String),
    #[error(transparent)]
    Route(#[from] RouteError),
}

struct Row<'a> {
    result: &'a EvaluationResult,
    directives: Vec<ActionDirective>,
}

/// Results grouped by metric id, periods ascending.
fn group<'a>(
    results: &'a [EvaluationResult],
    model: &Model,
) -> Result<BTreeMap<&'a Identifier, Vec<Row<'a>>>, ReportError> {
    let mut groups: BTreeMap<&Identifier, Vec<Row>> = BTreeMap::new();
    for result in results {
        groups.entry(&result.metric).or_default().push(Row {
            result,
            directives: directives(result, model)?,
        });
    }
    for rows in groups.values_mut() {
        rows.sort_by_key(|r| r.result.period);
    }
    Ok(groups)
}

pub fn generate_report(
    results: &[EvaluationResult],
    model: &Model,
    format: ReportFormat,
) -> Result<Vec<u8>, ReportError> {
    if results.is_empty() {
        return Err(ReportError::NoResults);
    }
    let groups = group(results, model)?;
    let text = match format {
        ReportFormat::Text => text_report(&groups, model),
        ReportFormat::Json => json_report(&groups),
        ReportFormat::Svg => svg_report(&groups, model),
    };
    Ok(text.into_bytes())
}

fn actions_cell(directives: &[ActionDirective]) -> String {
    if directives.is_empty() {
        return "-".to_string();
    }
    directives
        .iter()
        .map(|d| {
            let who: Vec<&str> = d.stakeholders.iter().map(Identifier::as_str).collect();
            format!("{} {}", d.kind, who.join("+"))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn text_report(groups: &BTreeMap<&Identifier, Vec<Row>>, model: &Model) -> String {
    let mut out = String::new();
    for (i, (metric, rows)) in groups.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match model.metric(metric.as_str()).map(|m| m.description.trim()) {
            Some(d) if !d.is_empty() => {
                let _ = writeln!(out, "metric {metric}: {d}");
            }
            _ => {
                let _ = writeln!(out, "metric {metric}");
            }
        }
        let header = ["period", "value", "band", "actions", "affected objectives"].map(String::from);
        let mut table = vec![header];
        for row in rows {
            let r = row.result;
            table.push([
                r.period.to_string(),
                r.value().map(value_text).unwrap_or_else(|| "-".to_string()),
                r.band().unwrap_or("-").to_string(),
                actions_cell(&row.directives),
                if r.affected_objectives.is_empty() {
                    "-".to_string()
                } else {
                    r.affected_objectives.iter().map(Identifier::as_str).collect::<Vec<_>>().join(", ")
                },
            ]);
        }
        let widths: Vec<usize> = (0..5)
            .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        for cells in &table {
            let mut line = String::new();
            for (c, cell) in cells.iter().enumerate() {
                if c == 4 {
                    line.push_str(cell);
                } else {
                    let _ = write!(line, "{cell:<w$}  ", w = widths[c]);
                }
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        for row in rows {
            let r = row.result;
            if let Some(f) = r.failure() {
                let _ = writeln!(out, "failure {}: {f}", r.period);
            }
            for w in &r.warnings {
                let _ = writeln!(out, "warning {}: {w}", r.period);
            }
        }
    }
    out
}

fn json_report(groups: &BTreeMap<&Identifier, Vec<Row>>) -> String {
    let metrics: Vec<Value> = groups
        .iter()
        .map(|(metric, rows)| {
            let results: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut v = row.result.to_json();
                    v["directives"] = Value::Array(row.directives.iter().map(ActionDirective::to_json).collect());
                    v
                })
                .collect();
            json!({ "metric": metric.as_str(), "results": results })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({ "metrics": metrics })).expect("json");
    text.push('\n');
    text
}

const AMBER_FIRST: [&str; 4] = ["#f0ad4e", "#ffd54f", "#ff8a65", "#ba68c8"];
const RED: &str = "#d9534f";
const GREEN: &str = "#5cb85c";
const NEUTRAL: &str = "#999999";

/// One fixed colour per band ordinal, bands ordered by lower bound: the
/// lowest band is red, the highest green, anything between from a stable
/// palette starting at amber.
pub fn band_colours(bands: &[InterpretationBand]) -> Vec<(String, &'static str)> {
    let mut ordered: Vec<&InterpretationBand> = bands.iter().collect();
    ordered.sort_by(|a, b| {
        a.interval
            .lower
            .total_cmp(&b.interval.lower)
            .then(b.interval.lower_closed.cmp(&a.interval.lower_closed))
    });
    let n = ordered.len();
    ordered
        .into_iter()
        .enumerate()
        .map(|(i, band)| {
            let colour = match (n, i) {
                (1, _) => GREEN,
                (_, 0) => RED,
                (_, i) if i == n - 1 => GREEN,
                (_, i) => AMBER_FIRST[(i - 1) % AMBER_FIRST.len()],
            };
            (band.label.clone(), colour)
        })
        .collect()
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const CHART_HEIGHT: f64 = 260.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 36.0;
const PLOT: f64 = 160.0;
const STEP: f64 = 56.0;
const BAR: f64 = 32.0;

fn svg_report(groups: &BTreeMap<&Identifier, Vec<Row>>, model: &Model) -> String {
    let width = groups
        .values()
        .map(|rows| LEFT + 20.0 + STEP * rows.len() as f64)
        .fold(360.0, f64::max);
    let height = CHART_HEIGHT * groups.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    for (index, (metric, rows)) in groups.iter().enumerate() {
        let y0 = CHART_HEIGHT * index as f64;
        let def = model.metric(metric.as_str());
        chart(&mut out, metric, rows, def, y0);
    }
    out.push_str("</svg>\n");
    out
}

fn chart(out: &mut String, metric: &Identifier, rows: &[Row], def: Option<&MetricDef>, y0: f64) {
    let (lo, hi) = def
        .map(|m| {
            let d = m.effective_domain();
            (d.lower, d.upper)
        })
        .unwrap_or(MetricDef::DEFAULT_DOMAIN);
    let colours = def.map(|m| band_colours(&m.bands)).unwrap_or_default();
    let colour_of = |band: &str| {
        colours
            .iter()
            .find(|(label, _)| label == band)
            .map(|(_, c)| *c)
            .unwrap_or(NEUTRAL)
    };
    let top = y0 + TOP;
    let base = top + PLOT;
    let right = LEFT + STEP * rows.len() as f64;

    let _ = writeln!(out, "  <g class=\"chart\" data-metric=\"{}\">", escape(metric.as_str()));
    let _ = writeln!(out, "    <text x=\"10\" y=\"{:.1}\" font-size=\"13\">{}</text>", y0 + 20.0, escape(metric.as_str()));
    let _ = writeln!(out, "    <line x1=\"{LEFT:.1}\" y1=\"{top:.1}\" x2=\"{LEFT:.1}\" y2=\"{base:.1}\" stroke=\"#333333\"/>");
    let _ = writeln!(out, "    <line x1=\"{LEFT:.1}\" y1=\"{base:.1}\" x2=\"{right:.1}\" y2=\"{base:.1}\" stroke=\"#333333\"/>");
    for (value, y) in [(hi, top), (lo, base)] {
        let _ = writeln!(
            out,
            "    <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 4.0,
            y + 4.0,
            escape(&value_text(value))
        );
    }
    for (i, row) in rows.iter().enumerate() {
        let r = row.result;
        let x = LEFT + 12.0 + STEP * i as f64;
        let centre = x + BAR / 2.0;
        match (r.value(), r.band()) {
            (Some(value), Some(band)) => {
                let span = hi - lo;
                let frac = if span > 0.0 { ((value - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
                let h = frac * PLOT;
                let _ = writeln!(
                    out,
                    "    <rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{BAR:.1}\" height=\"{h:.1}\" fill=\"{}\" data-band=\"{}\"/>",
                    base - h,
                    colour_of(band),
                    escape(band)
                );
                let _ = writeln!(
                    out,
                    "    <text x=\"{centre:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
                    base - h - 4.0,
                    escape(&value_text(value))
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "    <text x=\"{centre:.1}\" y=\"{:.1}\" text-anchor=\"middle\">n/a</text>",
                    base - 4.0
                );
            }
        }
        let _ = writeln!(
            out,
            "    <text x=\"{centre:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            base + 14.0,
            escape(&r.period.to_string())
        );
    }
    for (i, (label, colour)) in colours.iter().enumerate() {
        let x = LEFT + 110.0 * i as f64;
        let y = base + 28.0;
        let _ = writeln!(out, "    <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"10.0\" height=\"10.0\" fill=\"{colour}\"/>");
        let _ = writeln!(out, "    <text x=\"{:.1}\" y=\"{:.1}\">{}</text>", x + 14.0, y + 9.0, escape(label));
    }
    out.push_str("  </g>\n");
}
