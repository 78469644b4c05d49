//! Semantic lint rules V001 to V013 over a parsed model.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostic::{codes, Code, Diagnostic, SourceSpan};
use crate::dsl::interval_text;
use crate::graph::refines_cycle;
use crate::interval::analyze_partition;
use crate::model::{
    ActionTarget, BusinessObjective, FacetSelection, Identifier, Model, NodeKind,
    QuestionStatus, SourceMode,
};

/// Runs every rule. The result is sorted by code, then node id, then
/// message, so validating twice gives identical lists.
pub fn validate(model: &Model) -> Vec<Diagnostic> {
    let mut v = Validator {
        model,
        out: Vec::new(),
    };
    v.duplicates();
    v.references();
    v.refinement_structure();
    v.unmeasured_leaves();
    v.goals_without_questions();
    v.question_status();
    v.metric_bases();
    v.band_partitions();
    v.scope_coverage();
    v.required_fields();
    v.stakeholder_lists();
    v.foreign_questions();
    v.unreciprocated_affects();

    let mut out = v.out;
    out.sort_by(|a, b| {
        (a.code, &a.node, &a.message, &a.span).cmp(&(b.code, &b.node, &b.message, &b.span))
    });
    out.dedup();
    out
}

struct Validator<'a> {
    model: &'a Model,
    out: Vec<Diagnostic>,
}

impl<'a> Validator<'a> {
    fn push(&mut self, d: Diagnostic, id: &Identifier, span: &Option<SourceSpan>) {
        self.out.push(d.with_node(id).with_span(span.clone()));
    }

    fn error(&mut self, code: Code, id: &Identifier, span: &Option<SourceSpan>, msg: String) {
        self.push(Diagnostic::error(code, msg), id, span);
    }

    fn warning(&mut self, code: Code, id: &Identifier, span: &Option<SourceSpan>, msg: String) {
        self.push(Diagnostic::warning(code, msg), id, span);
    }

    /// V001
    fn duplicates(&mut self) {
        let m = self.model;
        for kind in NodeKind::ALL {
            let spans: Vec<(&Identifier, Option<SourceSpan>)> = match kind {
                NodeKind::Stakeholder => m.stakeholders.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Universe => m.universes.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Objective => m.objectives.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Strategy => m.strategies.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Goal => m.goals.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Question => m.questions.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Base => m.bases.iter().map(|n| (&n.id, n.span.clone())).collect(),
                NodeKind::Metric => m.metrics.iter().map(|n| (&n.id, n.span.clone())).collect(),
            };
            let mut first: BTreeMap<&Identifier, Option<SourceSpan>> = BTreeMap::new();
            for (id, span) in spans {
                match first.get(id) {
                    Some(earlier) => {
                        let d = Diagnostic::error(
                            codes::DUPLICATE_ID,
                            format!("duplicate {kind} id {id}"),
                        )
                        .with_related(earlier.clone());
                        self.push(d, id, &span);
                    }
                    None => {
                        first.insert(id, span);
                    }
                }
            }
        }
    }

    fn expect(&mut self, kind: NodeKind, target: &Identifier, owner: &Identifier, span: &Option<SourceSpan>, field: &str) {
        if !self.model.contains(kind, target.as_str()) {
            self.error(
                codes::UNRESOLVED_REFERENCE,
                owner,
                span,
                format!("{field} refers to unknown {kind} {target}"),
            );
        }
    }

    /// V002. Base-measurement references of metrics are V007.
    fn references(&mut self) {
        let m = self.model;
        for bo in &m.objectives {
            for s in &bo.viewpoint {
                self.expect(NodeKind::Stakeholder, s, &bo.id, &bo.span, "viewpoint");
            }
            if let Some(scope) = &bo.scope {
                match m.universe(scope.universe.as_str()) {
                    None => self.expect(NodeKind::Universe, &scope.universe, &bo.id, &bo.span, "scope"),
                    Some(u) => {
                        if let FacetSelection::Facets(facets) = &scope.selection {
                            for f in facets.iter().filter(|f| !u.facets.contains(f)) {
                                self.error(
                                    codes::UNRESOLVED_REFERENCE,
                                    &bo.id,
                                    &bo.span,
                                    format!("scope refers to unknown facet {f} of universe {}", u.id),
                                );
                            }
                        }
                    }
                }
            }
            if let Some(p) = &bo.refines {
                self.expect(NodeKind::Objective, p, &bo.id, &bo.span, "refines");
            }
            for o in &bo.depends_on {
                self.expect(NodeKind::Objective, o, &bo.id, &bo.span, "depends_on");
            }
            for o in &bo.affects {
                self.expect(NodeKind::Objective, o, &bo.id, &bo.span, "affects");
            }
        }
        for s in &m.strategies {
            if let Some(bo) = &s.for_objective {
                self.expect(NodeKind::Objective, bo, &s.id, &s.span, "for");
            }
            for step in &s.steps {
                for bo in &step.spawns {
                    self.expect(NodeKind::Objective, bo, &s.id, &s.span, "steps");
                }
            }
        }
        for g in &m.goals {
            for s in &g.viewpoint {
                self.expect(NodeKind::Stakeholder, s, &g.id, &g.span, "viewpoint");
            }
            for bo in &g.measures {
                self.expect(NodeKind::Objective, bo, &g.id, &g.span, "measures");
            }
            for other in &g.related_goals {
                self.expect(NodeKind::Goal, other, &g.id, &g.span, "related");
            }
        }
        for q in &m.questions {
            if let Some(g) = &q.goal {
                self.expect(NodeKind::Goal, g, &q.id, &q.span, "goal");
            }
        }
        for metric in &m.metrics {
            if let Some(g) = &metric.goal {
                self.expect(NodeKind::Goal, g, &metric.id, &metric.span, "goal");
            }
            for q in &metric.answers {
                self.expect(NodeKind::Question, q, &metric.id, &metric.span, "answers");
            }
            for s in &metric.stakeholders {
                self.expect(NodeKind::Stakeholder, s, &metric.id, &metric.span, "stakeholders");
            }
            for band in &metric.bands {
                for action in &band.actions {
                    match &action.target {
                        ActionTarget::Stakeholder(s) => {
                            self.expect(NodeKind::Stakeholder, s, &metric.id, &metric.span, "band action");
                        }
                        ActionTarget::OwnerOf(x) => {
                            if m.owners_of(x.as_str()).is_none() {
                                self.error(
                                    codes::UNRESOLVED_REFERENCE,
                                    &metric.id,
                                    &metric.span,
                                    format!(
                                        "band action owner_of({x}) names no objective, goal or metric"
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    /// V003: refinement cycles, parents that disagree across duplicate
    /// declarations, and strategies spawning objectives that refine something
    /// else.
    fn refinement_structure(&mut self) {
        let m = self.model;
        if let Some(members) = refines_cycle(m) {
            let first = &members[0];
            let span = m.objective(first.as_str()).and_then(|b| b.span.clone());
            let names: Vec<&str> = members.iter().map(Identifier::as_str).collect();
            self.error(
                codes::REFINES_STRUCTURE,
                first,
                &span,
                format!("refinement cycle through {}", names.join(", ")),
            );
        }
        let mut parents: BTreeMap<&Identifier, BTreeSet<&Identifier>> = BTreeMap::new();
        for bo in &m.objectives {
            if let Some(p) = &bo.refines {
                parents.entry(&bo.id).or_default().insert(p);
            }
        }
        for (id, ps) in parents.iter().filter(|(_, ps)| ps.len() > 1) {
            let span = m.objective(id.as_str()).and_then(|b| b.span.clone());
            let names: Vec<&str> = ps.iter().map(|p| p.as_str()).collect();
            self.error(
                codes::REFINES_STRUCTURE,
                id,
                &span,
                format!("objective has several parents: {}", names.join(", ")),
            );
        }
        for s in &m.strategies {
            let Some(target) = &s.for_objective else { continue };
            for step in &s.steps {
                for spawned in &step.spawns {
                    let Some(bo) = m.objective(spawned.as_str()) else { continue };
                    if bo.refines.as_ref() != Some(target) {
                        self.error(
                            codes::REFINES_STRUCTURE,
                            &s.id,
                            &s.span,
                            format!("step spawns {spawned}, which does not refine {target}"),
                        );
                    }
                }
            }
        }
    }

    fn children(&self, parent: &Identifier) -> Vec<&'a BusinessObjective> {
        self.model
            .objectives
            .iter()
            .filter(|bo| bo.refines.as_ref() == Some(parent))
            .collect()
    }

    /// V004
    fn unmeasured_leaves(&mut self) {
        let m = self.model;
        for bo in &m.objectives {
            if !self.children(&bo.id).is_empty() {
                continue;
            }
            let measured = m.goals.iter().any(|g| g.measures.contains(&bo.id));
            if !measured {
                self.warning(
                    codes::UNMEASURED_LEAF,
                    &bo.id,
                    &bo.span,
                    "leaf objective is not measured by any goal".into(),
                );
            }
        }
    }

    /// V005
    fn goals_without_questions(&mut self) {
        let m = self.model;
        for g in &m.goals {
            if !m.questions.iter().any(|q| q.goal.as_ref() == Some(&g.id)) {
                self.warning(
                    codes::GOAL_WITHOUT_QUESTION,
                    &g.id,
                    &g.span,
                    "measurement goal has no question".into(),
                );
            }
        }
    }

    /// V006
    fn question_status(&mut self) {
        let m = self.model;
        for q in &m.questions {
            let cited = m.metrics.iter().any(|x| x.answers.contains(&q.id));
            match q.status {
                Some(QuestionStatus::Answered) if !cited => self.warning(
                    codes::QUESTION_STATUS,
                    &q.id,
                    &q.span,
                    "question is marked answered but no metric answers it".into(),
                ),
                Some(QuestionStatus::Open) if cited => self.warning(
                    codes::QUESTION_STATUS,
                    &q.id,
                    &q.span,
                    "question is marked open but a metric answers it".into(),
                ),
                _ => {}
            }
        }
    }

    /// V007
    fn metric_bases(&mut self) {
        let m = self.model;
        for metric in &m.metrics {
            for b in &metric.uses {
                if m.base(b.as_str()).is_none() {
                    self.error(
                        codes::UNDECLARED_BASE,
                        &metric.id,
                        &metric.span,
                        format!("uses undeclared base measurement {b}"),
                    );
                }
            }
            if let Some(f) = &metric.function {
                for var in f.variables() {
                    if !metric.uses.contains(var) {
                        self.error(
                            codes::UNDECLARED_BASE,
                            &metric.id,
                            &metric.span,
                            format!("function variable {var} is not listed in uses"),
                        );
                    }
                }
            }
        }
    }

    /// V008
    fn band_partitions(&mut self) {
        let m = self.model;
        for metric in &m.metrics {
            if metric.bands.is_empty() {
                continue;
            }
            let domain = metric.effective_domain();
            let bands: Vec<_> = metric.bands.iter().map(|b| b.interval.clone()).collect();
            let report = analyze_partition(&domain, &bands);
            if report.is_partition() {
                continue;
            }
            let mut parts = Vec::new();
            if !report.gaps.is_empty() {
                let gaps: Vec<String> = report.gaps.iter().map(interval_text).collect();
                parts.push(format!("gap {}", gaps.join(", ")));
            }
            if !report.overlaps.is_empty() {
                let overlaps: Vec<String> = report.overlaps.iter().map(interval_text).collect();
                parts.push(format!("overlap {}", overlaps.join(", ")));
            }
            self.error(
                codes::BAND_PARTITION,
                &metric.id,
                &metric.span,
                format!(
                    "bands do not partition the domain {}: {}",
                    interval_text(&domain),
                    parts.join("; ")
                ),
            );
        }
    }

    /// V009
    fn scope_coverage(&mut self) {
        let m = self.model;
        for parent in &m.objectives {
            let Some(scope) = &parent.scope else { continue };
            let Some(universe) = m.universe(scope.universe.as_str()) else { continue };
            let children = self.children(&parent.id);
            if children.is_empty() {
                continue;
            }
            let same_universe = children
                .iter()
                .all(|c| c.scope.as_ref().is_some_and(|s| s.universe == scope.universe));
            if !same_universe {
                continue;
            }
            let covered: BTreeSet<&str> = children
                .iter()
                .flat_map(|c| c.scope.as_ref().expect("checked above").selected(universe))
                .collect();
            let missing: Vec<&str> = scope
                .selected(universe)
                .into_iter()
                .filter(|f| !covered.contains(f))
                .collect();
            if !missing.is_empty() {
                self.warning(
                    codes::SCOPE_COVERAGE,
                    &parent.id,
                    &parent.span,
                    format!(
                        "refinements do not cover the scope of {}: missing {}",
                        parent.id,
                        missing.join(", ")
                    ),
                );
            }
        }
    }

    fn require(&mut self, id: &Identifier, span: &Option<SourceSpan>, kind: NodeKind, field: &str, present: bool) {
        if !present {
            self.error(
                codes::REQUIRED_FIELD,
                id,
                span,
                format!("{kind} field `{field}` is required"),
            );
        }
    }

    /// V010
    fn required_fields(&mut self) {
        let m = self.model;
        for s in &m.stakeholders {
            self.require(&s.id, &s.span, NodeKind::Stakeholder, "name", !s.name.trim().is_empty());
        }
        for u in &m.universes {
            self.require(&u.id, &u.span, NodeKind::Universe, "facets", !u.facets.is_empty());
            let mut seen = BTreeSet::new();
            for f in &u.facets {
                if !seen.insert(f) {
                    self.error(
                        codes::REQUIRED_FIELD,
                        &u.id,
                        &u.span,
                        format!("facet {f} is listed twice"),
                    );
                }
            }
        }
        for bo in &m.objectives {
            let k = NodeKind::Objective;
            self.require(&bo.id, &bo.span, k, "object", !bo.object.trim().is_empty());
            self.require(&bo.id, &bo.span, k, "scope", bo.scope.is_some());
            self.require(&bo.id, &bo.span, k, "purpose", !bo.purpose.trim().is_empty());
            self.require(&bo.id, &bo.span, k, "viewpoint", !bo.viewpoint.is_empty());
            self.require(&bo.id, &bo.span, k, "context", !bo.context.trim().is_empty());
            if bo.priority.is_some() {
                let justified = bo
                    .priority_justification
                    .as_ref()
                    .is_some_and(|j| !j.trim().is_empty());
                self.require(&bo.id, &bo.span, k, "priority_justification", justified);
            }
        }
        for s in &m.strategies {
            let k = NodeKind::Strategy;
            self.require(&s.id, &s.span, k, "for", s.for_objective.is_some());
            self.require(&s.id, &s.span, k, "steps", !s.steps.is_empty());
            self.require(&s.id, &s.span, k, "justification", !s.justification.trim().is_empty());
        }
        for g in &m.goals {
            let k = NodeKind::Goal;
            self.require(&g.id, &g.span, k, "object", !g.object.trim().is_empty());
            self.require(&g.id, &g.span, k, "purpose", !g.purpose.trim().is_empty());
            self.require(&g.id, &g.span, k, "focus", !g.focus.trim().is_empty());
            self.require(&g.id, &g.span, k, "scope", !g.scope.trim().is_empty());
            self.require(&g.id, &g.span, k, "criteria", !g.criteria.is_empty());
            self.require(&g.id, &g.span, k, "context", !g.context.trim().is_empty());
            self.require(&g.id, &g.span, k, "measures", !g.measures.is_empty());
        }
        for q in &m.questions {
            let k = NodeKind::Question;
            self.require(&q.id, &q.span, k, "goal", q.goal.is_some());
            self.require(&q.id, &q.span, k, "text", !q.text.trim().is_empty());
            self.require(&q.id, &q.span, k, "status", q.status.is_some());
        }
        for b in &m.bases {
            let k = NodeKind::Base;
            self.require(&b.id, &b.span, k, "description", !b.description.trim().is_empty());
            self.require(&b.id, &b.span, k, "mode", b.mode.is_some());
            match b.mode {
                Some(SourceMode::Count) => {
                    self.require(&b.id, &b.span, k, "filters", !b.filters.is_empty());
                }
                Some(SourceMode::Direct) => {
                    self.require(&b.id, &b.span, k, "aggregation", b.aggregation.is_some());
                }
                None => {}
            }
        }
        for x in &m.metrics {
            let k = NodeKind::Metric;
            self.require(&x.id, &x.span, k, "description", !x.description.trim().is_empty());
            self.require(&x.id, &x.span, k, "goal", x.goal.is_some());
            self.require(&x.id, &x.span, k, "answers", !x.answers.is_empty());
            self.require(&x.id, &x.span, k, "uses", !x.uses.is_empty());
            self.require(&x.id, &x.span, k, "method", !x.method.trim().is_empty());
            self.require(&x.id, &x.span, k, "function", x.function.is_some());
            self.require(&x.id, &x.span, k, "bands", !x.bands.is_empty());
            self.require(&x.id, &x.span, k, "collection", x.schedule.collection.is_some());
            self.require(&x.id, &x.span, k, "reporting", x.schedule.reporting.is_some());
            if let (Some(c), Some(r)) = (x.schedule.collection, x.schedule.reporting) {
                if r < c {
                    self.error(
                        codes::REQUIRED_FIELD,
                        &x.id,
                        &x.span,
                        format!("reporting period {r} is shorter than collection period {c}"),
                    );
                }
            }
        }
    }

    /// V011
    fn stakeholder_lists(&mut self) {
        let m = self.model;
        for g in &m.goals {
            if g.viewpoint.is_empty() {
                self.warning(
                    codes::NO_STAKEHOLDERS,
                    &g.id,
                    &g.span,
                    "measurement goal has an empty viewpoint".into(),
                );
            }
        }
        for x in &m.metrics {
            if x.stakeholders.is_empty() {
                self.warning(
                    codes::NO_STAKEHOLDERS,
                    &x.id,
                    &x.span,
                    "metric has no stakeholders".into(),
                );
            }
        }
    }

    /// V012
    fn foreign_questions(&mut self) {
        let m = self.model;
        for x in &m.metrics {
            let Some(goal) = &x.goal else { continue };
            for qid in &x.answers {
                let Some(q) = m.question(qid.as_str()) else { continue };
                if q.goal.as_ref() != Some(goal) {
                    let owner = q
                        .goal
                        .as_ref()
                        .map_or_else(|| "no goal".to_string(), |g| format!("goal {g}"));
                    self.error(
                        codes::FOREIGN_QUESTION,
                        &x.id,
                        &x.span,
                        format!("answers {qid}, which belongs to {owner} rather than {goal}"),
                    );
                }
            }
        }
    }

    /// V013
    fn unreciprocated_affects(&mut self) {
        let m = self.model;
        for bo in &m.objectives {
            for target in &bo.affects {
                let Some(other) = m.objective(target.as_str()) else { continue };
                if !other.depends_on.contains(&bo.id) {
                    self.warning(
                        codes::UNRECIPROCATED_AFFECTS,
                        &bo.id,
                        &bo.span,
                        format!("{} affects {target}, but {target} does not depend on {}", bo.id, bo.id),
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn codes_of(text: &str) -> Vec<String> {
        let (model, d) = parse(text);
        assert!(d.is_empty(), "{d:?}");
        validate(&model).iter().map(|d| d.code.to_string()).collect()
    }

    const BASE: &str = r#"
stakeholder ciso { name: "CISO" }
universe u { facets: a, b, c }
objective P { object: "o" scope: u.* purpose: "p" viewpoint: ciso context: "c" }
goal G { object: "o" purpose: "p" focus: "f" scope: "s" criteria: "c" viewpoint: ciso context: "c" measures: P }
question Q { goal: G text: "?" status: answered }
base n { description: "n" mode: count filters: kind = "x" }
base d { description: "d" mode: direct aggregation: sum }
metric M {
  description: "m" goal: G answers: Q uses: n, d method: "count"
  function: n / d * 100
  bands: [0, 50] -> low { notify ciso }, (50, 100] -> high { log ciso }
  collection: monthly reporting: quarterly
  stakeholders: ciso
}
"#;

    #[test]
    fn clean_model() {
        assert!(codes_of(BASE).is_empty());
    }

    #[test]
    fn duplicate_ids_carry_both_spans() {
        let (model, _) = parse(&format!("{BASE}\nstakeholder ciso {{ name: \"again\" }}"));
        let d = validate(&model);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, codes::DUPLICATE_ID);
        assert_eq!(d[0].span.as_ref().unwrap().line, 17);
        assert_eq!(d[0].related[0].line, 2);
    }

    #[test]
    fn band_gap_is_named() {
        let text = BASE.replace("(50, 100] -> high", "[70, 100] -> high").replace("[0, 50]", "[0, 60]");
        let (model, _) = parse(&text);
        let d = validate(&model);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, codes::BAND_PARTITION);
        assert!(d[0].message.contains("gap (60, 70)"), "{}", d[0].message);
    }

    #[test]
    fn scope_gap_names_missing_facets() {
        let text = format!(
            "{BASE}\nobjective C1 {{ object: \"o\" scope: u.{{a}} purpose: \"p\" viewpoint: ciso context: \"c\" refines: P }}\n\
             goal G2 {{ object: \"o\" purpose: \"p\" focus: \"f\" scope: \"s\" criteria: \"c\" viewpoint: ciso context: \"c\" measures: C1 }}"
        );
        let (model, _) = parse(&text);
        let d: Vec<_> = validate(&model).into_iter().filter(|d| d.code == codes::SCOPE_COVERAGE).collect();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.ends_with("missing b, c"));
    }

    #[test]
    fn reference_and_structure_rules() {
        let text = BASE
            .replace("viewpoint: ciso context: \"c\" }", "viewpoint: ciso, ghost context: \"c\" refines: P }")
            .replace("uses: n, d", "uses: n")
            .replace("status: answered", "status: open");
        let got = codes_of(&text);
        for code in ["V002", "V003", "V006", "V007"] {
            assert!(got.contains(&code.to_string()), "{code} missing from {got:?}");
        }
    }

    #[test]
    fn affects_without_reciprocal() {
        let text = format!(
            "{BASE}\nobjective R {{ object: \"o\" scope: u.* purpose: \"p\" viewpoint: ciso context: \"c\" affects: P }}"
        );
        let got = codes_of(&text);
        assert!(got.contains(&"V013".to_string()));
        assert!(got.contains(&"V004".to_string()));
    }

    #[test]
    fn validation_is_deterministic() {
        let (model, _) = parse(&BASE.replace("stakeholders: ciso", ""));
        assert_eq!(validate(&model), validate(&model));
        assert_eq!(validate(&model)[0].code, codes::NO_STAKEHOLDERS);
    }
}
