use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use symbiosis_core::diagnostic::{has_errors, Diagnostic, Severity};
use symbiosis_core::dsl::{has_includes, parse_file, serialize};
use symbiosis_core::graph::{build_graph, TraceabilityGraph};
use symbiosis_core::impact::{diff, impact, ChangeKind};
use symbiosis_core::model::Model;
use symbiosis_core::period::PeriodKey;
use symbiosis_core::pipeline::{
    directives, evaluate_period, evaluate_range, generate_report, ingest, value_text, EvaluationResult,
    MeasurementRecord, ReportFormat,
};
use symbiosis_core::render::{render_formulation, render_goal, render_objective};
use symbiosis_core::validate::validate;

use crate::{Cli, Command, Global};

/// Exit statuses.
const OK: u8 = 0;
const FAILED: u8 = 1;
const TROUBLE: u8 = 2;

/// A command that cannot complete: message for standard error, exit status.
struct Stop(String, u8);

type Outcome = Result<u8, Stop>;

fn usage(message: impl Into<String>) -> Stop {
    Stop(message.into(), TROUBLE)
}

fn failed(message: impl Into<String>) -> Stop {
    Stop(message.into(), FAILED)
}

pub fn run(cli: Cli) -> u8 {
    let g = &cli.global;
    let result = match &cli.command {
        Command::Check { models } => check(g, models),
        Command::Render { model, id } => render(g, model, id.as_deref()),
        Command::Graph { model } => graph(g, model),
        Command::Eval {
            model,
            measurements,
            metric,
            period,
        } => eval(g, model, measurements, metric, period),
        Command::Report {
            model,
            measurements,
            metric,
            from,
            to,
        } => report(g, model, measurements, metric, from, to),
        Command::Impact { old, new, json } => impact_cmd(g, old, new, *json),
        Command::Fmt { model } => fmt(g, model),
    };
    match result {
        Ok(code) => code,
        Err(Stop(message, code)) => {
            eprintln!("symkit: {message}");
            code
        }
    }
}

fn format_of<'a>(g: &'a Global, default: &'a str, allowed: &[&str]) -> Result<&'a str, Stop> {
    let f = g.format.as_deref().unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(usage(format!("unsupported --format {f:?}; expected one of {}", allowed.join(", "))))
    }
}

fn emit(g: &Global, bytes: &[u8]) -> Result<(), Stop> {
    match &g.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| usage(format!("cannot write output: {e}")))
        }
    }
}

fn print_diagnostics(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{d}");
    }
}

/// Parses a model, printing parse diagnostics. Parse errors stop the command.
fn parse_model(path: &Path) -> Result<(Model, Vec<Diagnostic>), Stop> {
    let (model, diagnostics) =
        parse_file(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    if has_errors(&diagnostics) {
        print_diagnostics(&diagnostics);
        return Err(failed(format!("{} does not parse", path.display())));
    }
    Ok((model, diagnostics))
}

/// A model fit for evaluation: parses and validates without errors.
fn load_valid(path: &Path) -> Result<(Model, TraceabilityGraph), Stop> {
    let (model, _) = parse_model(path)?;
    let diagnostics = validate(&model);
    if has_errors(&diagnostics) {
        print_diagnostics(diagnostics.iter().filter(|d| d.is_error()).cloned().collect::<Vec<_>>().as_slice());
        return Err(failed(format!("{} has validation errors", path.display())));
    }
    let graph = build_graph(&model).map_err(|e| failed(e.to_string()))?;
    Ok((model, graph))
}

fn check(g: &Global, models: &[std::path::PathBuf]) -> Outcome {
    let format = format_of(g, "text", &["text", "json"])?;
    let mut status = OK;
    let mut listing = Vec::new();
    for path in models {
        let (model, mut diagnostics) =
            parse_file(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        if !has_errors(&diagnostics) {
            diagnostics.extend(validate(&model));
        }
        let errors = diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
        let warnings = diagnostics.len() - errors;
        if errors > 0 || (g.strict && warnings > 0) {
            status = FAILED;
        }
        if format == "json" {
            listing.push(json!({ "file": path.display().to_string(), "diagnostics": diagnostics }));
        } else {
            print_diagnostics(&diagnostics);
            if !g.quiet {
                eprintln!("{}: {errors} error(s), {warnings} warning(s)", path.display());
            }
        }
    }
    if format == "json" {
        emit(g, pretty(&Value::Array(listing)).as_bytes())?;
    }
    Ok(status)
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON prints");
    text.push('\n');
    text
}

fn render(g: &Global, path: &Path, id: Option<&str>) -> Outcome {
    format_of(g, "text", &["text"])?;
    let (model, _) = parse_model(path)?;
    let mut text = String::new();
    match id {
        Some(id) => {
            let sentence = render_formulation(&model, id).map_err(|e| failed(e.to_string()))?;
            text.push_str(&sentence);
            text.push('\n');
        }
        None => {
            let sorted = model.sorted();
            let mut problems = Vec::new();
            let rendered = sorted
                .objectives
                .iter()
                .map(|bo| (&bo.id, render_objective(&model, bo)))
                .chain(sorted.goals.iter().map(|goal| (&goal.id, render_goal(&model, goal))));
            for (id, sentence) in rendered {
                match sentence {
                    Ok(s) => text.push_str(&format!("{id}: {s}\n")),
                    Err(e) => problems.push(e.to_string()),
                }
            }
            for p in &problems {
                eprintln!("{p}");
            }
            emit(g, text.as_bytes())?;
            return Ok(if problems.is_empty() { OK } else { FAILED });
        }
    }
    emit(g, text.as_bytes())?;
    Ok(OK)
}

fn graph(g: &Global, path: &Path) -> Outcome {
    let format = format_of(g, "dot", &["dot", "json"])?;
    let (model, _) = parse_model(path)?;
    let graph = build_graph(&model).map_err(|e| failed(e.to_string()))?;
    let text = if format == "dot" { graph.to_dot() } else { pretty(&graph.to_json()) };
    emit(g, text.as_bytes())?;
    Ok(OK)
}

fn read_logs(model: &Model, logs: &[std::path::PathBuf]) -> Result<Vec<MeasurementRecord>, Stop> {
    let mut records = Vec::new();
    for path in logs {
        match ingest(path, model) {
            Ok(r) => records.extend(r),
            Err(e) if e.code().is_none() => return Err(usage(e.to_string())),
            Err(e) => return Err(failed(e.to_string())),
        }
    }
    Ok(records)
}

fn metric_ids(model: &Model, metric: &str) -> Result<Vec<String>, Stop> {
    if metric == "all" {
        let mut ids: Vec<String> = model.metrics.iter().map(|m| m.id.to_string()).collect();
        ids.sort();
        Ok(ids)
    } else if model.metric(metric).is_some() {
        Ok(vec![metric.to_string()])
    } else {
        Err(failed(format!("no metric named {metric}")))
    }
}

fn period(text: &str) -> Result<PeriodKey, Stop> {
    text.parse().map_err(|e: symbiosis_core::period::PeriodParseError| usage(e.to_string()))
}

fn eval(g: &Global, path: &Path, logs: &[std::path::PathBuf], metric: &str, period_text: &str) -> Outcome {
    let format = format_of(g, "text", &["text", "json"])?;
    let key = period(period_text)?;
    let (model, graph) = load_valid(path)?;
    let records = read_logs(&model, logs)?;
    let mut results = Vec::new();
    for id in metric_ids(&model, metric)? {
        let result = evaluate_period(&model, &graph, &records, &id, &key).map_err(|e| failed(e.to_string()))?;
        let routed = directives(&result, &model).map_err(|e| failed(e.to_string()))?;
        results.push((result, routed));
    }
    let text = if format == "json" {
        let items: Vec<Value> = results
            .iter()
            .map(|(r, d)| {
                let mut v = r.to_json();
                v["directives"] = Value::Array(d.iter().map(|d| d.to_json()).collect());
                v
            })
            .collect();
        pretty(&json!({ "results": items }))
    } else {
        let mut out = String::new();
        for (r, d) in &results {
            out.push_str(&result_line(r));
            for w in &r.warnings {
                out.push_str(&format!("  warning: {w}\n"));
            }
            for directive in d {
                out.push_str(&format!("  {directive}\n"));
            }
        }
        out
    };
    emit(g, text.as_bytes())?;
    Ok(OK)
}

fn result_line(r: &EvaluationResult) -> String {
    match (r.value(), r.band(), r.failure()) {
        (Some(v), Some(band), _) => format!("{} {}: {} {band}\n", r.metric, r.period, value_text(v)),
        (_, _, Some(f)) => format!("{} {}: failed: {f}\n", r.metric, r.period),
        _ => format!("{} {}\n", r.metric, r.period),
    }
}

fn report(
    g: &Global,
    path: &Path,
    logs: &[std::path::PathBuf],
    metric: &str,
    from: &str,
    to: &str,
) -> Outcome {
    let format: ReportFormat = format_of(g, "text", &["text", "json", "svg"])?
        .parse()
        .map_err(|e: symbiosis_core::pipeline::ReportError| usage(e.to_string()))?;
    let (from, to) = (period(from)?, period(to)?);
    if from.granularity() != to.granularity() {
        return Err(usage("--from and --to must have the same granularity"));
    }
    let (model, graph) = load_valid(path)?;
    let records = read_logs(&model, logs)?;
    let mut results = Vec::new();
    for id in metric_ids(&model, metric)? {
        results.extend(evaluate_range(&model, &graph, &records, &id, &from, &to).map_err(|e| failed(e.to_string()))?);
    }
    let bytes = generate_report(&results, &model, format).map_err(|e| failed(e.to_string()))?;
    emit(g, &bytes)?;
    Ok(OK)
}

fn impact_cmd(g: &Global, old_path: &Path, new_path: &Path, json_flag: bool) -> Outcome {
    let format = if json_flag { "json" } else { format_of(g, "text", &["text", "json"])? };
    let (old, _) = parse_model(old_path)?;
    let (new, _) = parse_model(new_path)?;
    let changes = diff(&old, &new);
    let mut reports = Vec::new();
    for change in &changes {
        let base = if change.kind == ChangeKind::Added { &new } else { &old };
        reports.push(impact(base, change).map_err(|e| failed(e.to_string()))?);
    }
    let text = if format == "json" {
        pretty(&json!({ "changes": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>() }))
    } else if reports.is_empty() {
        "no changes\n".to_string()
    } else {
        reports.iter().map(|r| r.to_string()).collect()
    };
    emit(g, text.as_bytes())?;
    Ok(OK)
}

fn fmt(g: &Global, path: &Path) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    if has_includes(&text) {
        return Err(failed(format!(
            "{} uses include; format the included files one by one",
            path.display()
        )));
    }
    let (model, _) = parse_model(path)?;
    let canonical = serialize(&model);
    match &g.out {
        Some(_) => emit(g, canonical.as_bytes())?,
        None => std::fs::write(path, canonical.as_bytes())
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
    }
    if !g.quiet {
        eprintln!("formatted {}", path.display());
    }
    Ok(OK)
}
