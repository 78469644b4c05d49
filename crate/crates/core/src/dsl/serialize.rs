use std::fmt::Write;

use crate::expr::format_number;
use crate::interval::Interval;
use crate::model::{FacetSelection, Identifier, Model, ScopeRef};

pub const HEADER: &str = "# symbiosis model, canonical form\n";

/// Canonical `.sym` text: blocks grouped by kind, sorted by id, empty fields
/// left out.
pub fn serialize(model: &Model) -> String {
    let model = model.sorted();
    let mut out = Writer::default();
    out.text.push_str(HEADER);

    for n in &model.stakeholders {
        out.open("stakeholder", &n.id);
        out.string("name", &n.name);
        out.opt_string("role", n.role.as_deref());
        out.close();
    }
    for n in &model.universes {
        out.open("universe", &n.id);
        out.words("facets", n.facets.iter().map(String::as_str));
        out.close();
    }
    for n in &model.objectives {
        out.open("objective", &n.id);
        out.string("object", &n.object);
        if let Some(scope) = &n.scope {
            out.raw("scope", &scope_text(scope));
        }
        out.string("purpose", &n.purpose);
        out.ids("viewpoint", &n.viewpoint);
        out.string("context", &n.context);
        if let Some(parent) = &n.refines {
            out.raw("refines", parent.as_str());
        }
        out.ids("depends_on", &n.depends_on);
        out.ids("affects", &n.affects);
        if let Some(p) = n.priority {
            out.raw("priority", &p.to_string());
        }
        out.opt_string("priority_justification", n.priority_justification.as_deref());
        out.close();
    }
    for n in &model.strategies {
        out.open("strategy", &n.id);
        if let Some(bo) = &n.for_objective {
            out.raw("for", bo.as_str());
        }
        let steps: Vec<String> = n
            .steps
            .iter()
            .map(|s| {
                if s.spawns.is_empty() {
                    quote(&s.text)
                } else {
                    format!("{} -> [{}]", quote(&s.text), join_ids(&s.spawns))
                }
            })
            .collect();
        out.multiline("steps", &steps);
        out.string("justification", &n.justification);
        out.close();
    }
    for n in &model.goals {
        out.open("goal", &n.id);
        out.string("object", &n.object);
        out.string("purpose", &n.purpose);
        out.string("focus", &n.focus);
        out.string("scope", &n.scope);
        let criteria: Vec<String> = n.criteria.iter().map(|c| quote(c)).collect();
        out.multiline("criteria", &criteria);
        out.ids("viewpoint", &n.viewpoint);
        out.string("context", &n.context);
        out.ids("measures", &n.measures);
        out.ids("related", &n.related_goals);
        out.close();
    }
    for n in &model.questions {
        out.open("question", &n.id);
        if let Some(goal) = &n.goal {
            out.raw("goal", goal.as_str());
        }
        out.string("text", &n.text);
        if let Some(status) = n.status {
            out.raw("status", status_keyword(status));
        }
        out.close();
    }
    for n in &model.bases {
        out.open("base", &n.id);
        out.string("description", &n.description);
        if let Some(mode) = n.mode {
            out.raw(
                "mode",
                match mode {
                    crate::model::SourceMode::Direct => "direct",
                    crate::model::SourceMode::Count => "count",
                },
            );
        }
        if let Some(agg) = n.aggregation {
            out.raw(
                "aggregation",
                match agg {
                    crate::model::Aggregation::Sum => "sum",
                    crate::model::Aggregation::Latest => "latest",
                },
            );
        }
        let filters: Vec<String> = n
            .filters
            .iter()
            .map(|f| format!("{} = {}", f.field, quote(&f.value)))
            .collect();
        if !filters.is_empty() {
            out.raw("filters", &filters.join(", "));
        }
        out.close();
    }
    for n in &model.metrics {
        out.open("metric", &n.id);
        out.string("description", &n.description);
        for (name, date) in [("created", n.created), ("modified", n.modified), ("reviewed", n.reviewed)] {
            if let Some(date) = date {
                out.raw(name, &quote(&date.format("%Y-%m-%d").to_string()));
            }
        }
        if let Some(goal) = &n.goal {
            out.raw("goal", goal.as_str());
        }
        out.ids("answers", &n.answers);
        out.ids("uses", &n.uses);
        out.string("method", &n.method);
        if let Some(f) = &n.function {
            out.raw("function", &f.to_string());
        }
        if let Some(domain) = &n.domain {
            out.raw("domain", &interval_text(domain));
        }
        let bands: Vec<String> = n
            .bands
            .iter()
            .map(|b| {
                let actions: Vec<String> = b
                    .actions
                    .iter()
                    .map(|a| format!("{} {}", a.kind.keyword(), a.target))
                    .collect();
                let body = if actions.is_empty() {
                    "{}".to_string()
                } else {
                    format!("{{ {} }}", actions.join(" "))
                };
                format!("{} -> {} {}", interval_text(&b.interval), label_text(&b.label), body)
            })
            .collect();
        out.multiline("bands", &bands);
        if let Some(g) = n.schedule.collection {
            out.raw("collection", g.keyword());
        }
        if let Some(g) = n.schedule.reporting {
            out.raw("reporting", g.keyword());
        }
        out.ids("stakeholders", &n.stakeholders);
        out.close();
    }
    out.text
}

#[derive(Default)]
struct Writer {
    text: String,
}

impl Writer {
    fn open(&mut self, keyword: &str, id: &Identifier) {
        let _ = writeln!(self.text, "\n{keyword} {id} {{");
    }

    fn close(&mut self) {
        self.text.push_str("}\n");
    }

    fn raw(&mut self, name: &str, value: &str) {
        let _ = writeln!(self.text, "  {name}: {value}");
    }

    fn string(&mut self, name: &str, value: &str) {
        if !value.is_empty() {
            self.raw(name, &quote(value));
        }
    }

    fn opt_string(&mut self, name: &str, value: Option<&str>) {
        if let Some(v) = value {
            self.raw(name, &quote(v));
        }
    }

    fn ids(&mut self, name: &str, ids: &[Identifier]) {
        if !ids.is_empty() {
            self.raw(name, &join_ids(ids));
        }
    }

    fn words<'a>(&mut self, name: &str, words: impl Iterator<Item = &'a str>) {
        let words: Vec<&str> = words.collect();
        if !words.is_empty() {
            self.raw(name, &words.join(", "));
        }
    }

    /// One item per line for lists whose items are long.
    fn multiline(&mut self, name: &str, items: &[String]) {
        match items {
            [] => {}
            [one] => self.raw(name, one),
            _ => {
                let _ = writeln!(self.text, "  {name}:");
                for (i, item) in items.iter().enumerate() {
                    let sep = if i + 1 < items.len() { "," } else { "" };
                    let _ = writeln!(self.text, "    {item}{sep}");
                }
            }
        }
    }
}

fn join_ids(ids: &[Identifier]) -> String {
    ids.iter().map(Identifier::as_str).collect::<Vec<_>>().join(", ")
}

fn status_keyword(status: crate::model::QuestionStatus) -> &'static str {
    match status {
        crate::model::QuestionStatus::Answered => "answered",
        crate::model::QuestionStatus::Open => "open",
    }
}

fn scope_text(scope: &ScopeRef) -> String {
    let mut text = format!("{}.", scope.universe);
    match &scope.selection {
        FacetSelection::All => text.push('*'),
        FacetSelection::Facets(facets) => {
            let _ = write!(text, "{{{}}}", facets.join(", "));
        }
    }
    if let Some(d) = &scope.description {
        text.push(' ');
        text.push_str(&quote(d));
    }
    text
}

pub(crate) fn interval_text(interval: &Interval) -> String {
    format!(
        "{}{}, {}{}",
        if interval.lower_closed { '[' } else { '(' },
        format_number(interval.lower),
        format_number(interval.upper),
        if interval.upper_closed { ']' } else { ')' },
    )
}

/// Bare word when the label lexes as a single identifier, quoted otherwise.
fn label_text(label: &str) -> String {
    let mut chars = label.chars();
    let bare = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if bare {
        label.to_string()
    } else {
        quote(label)
    }
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
