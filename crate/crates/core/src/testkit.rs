//! Random generators for property tests: models, band sets, logs and
//! derivation DAGs. Everything is driven by a caller-supplied RNG so suites
//! can seed it.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::{BinaryOp, FunctionExpr};
use crate::interval::Interval;
use crate::model::*;
use crate::period::Granularity;
use crate::pipeline::{MeasurementRecord, RecordBody};

fn id(text: String) -> Identifier {
    Identifier::new(text).expect("generated identifiers are valid")
}

const ALPHABET: &[char] = &[
    'a', 'b', 'e', 'k', 'z', 'A', 'Q', '0', '7', ' ', ' ', '.', ',', '-', '%', '"', '\\', '\n', '\t', 'é', '→', '{', '}', '#',
];

/// Arbitrary text, including characters the serializer must escape.
pub fn text<R: Rng>(rng: &mut R, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn word<R: Rng>(rng: &mut R) -> String {
    const WORDS: &[&str] = &["staff", "hq", "data_at_rest", "branches", "vendors", "cloud", "x1"];
    WORDS.choose(rng).unwrap().to_string()
}

fn pick<R: Rng>(rng: &mut R, pool: &[Identifier], max: usize) -> Vec<Identifier> {
    if pool.is_empty() {
        return Vec::new();
    }
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| pool.choose(rng).unwrap().clone()).collect()
}

fn maybe<R: Rng>(rng: &mut R, pool: &[Identifier]) -> Option<Identifier> {
    if pool.is_empty() || rng.gen_bool(0.3) {
        None
    } else {
        pool.choose(rng).cloned()
    }
}

/// Nonnegative number with a short decimal expansion.
fn number<R: Rng>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(0u32..100_000)) / f64::from([1u32, 10, 100, 1000][rng.gen_range(0..4)])
}

fn date<R: Rng>(rng: &mut R) -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Days::new(rng.gen_range(0..5000))
}

/// Random expression over `vars`; literals are nonnegative since a leading
/// minus parses as negation.
pub fn expression<R: Rng>(rng: &mut R, vars: &[Identifier], depth: usize) -> FunctionExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match vars.choose(rng) {
            Some(v) if rng.gen_bool(0.6) => FunctionExpr::Var(v.clone()),
            _ => FunctionExpr::Number(number(rng)),
        };
    }
    if rng.gen_bool(0.1) {
        return FunctionExpr::negate(expression(rng, vars, depth - 1));
    }
    let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][rng.gen_range(0..4)];
    FunctionExpr::binary(op, expression(rng, vars, depth - 1), expression(rng, vars, depth - 1))
}

fn interval<R: Rng>(rng: &mut R) -> Interval {
    let a = number(rng) - 50.0;
    let b = a + 1.0 + number(rng);
    Interval::new(a, b, rng.gen(), rng.gen())
}

fn granularity<R: Rng>(rng: &mut R) -> Option<Granularity> {
    rng.gen_bool(0.7).then(|| *Granularity::ALL.choose(rng).unwrap())
}

/// A referentially closed model of at most `max_nodes` nodes with every
/// field exercised. It need not validate.
pub fn random_model<R: Rng>(rng: &mut R, max_nodes: usize) -> Model {
    let total = rng.gen_range(0..=max_nodes);
    let mut counts = [0usize; 8];
    for _ in 0..total {
        counts[rng.gen_range(0..8)] += 1;
    }
    let ids = |prefix: &str, n: usize| -> Vec<Identifier> {
        (0..n).map(|i| id(format!("{prefix}{i}"))).collect()
    };
    let sh = ids("sh_", counts[0]);
    let us = ids("U", counts[1]);
    let bo = ids("BO", counts[2]);
    let st = ids("ST", counts[3]);
    let mg = ids("MG", counts[4]);
    let qs = ids("Q1.", counts[5]);
    let bm = ids("bm_", counts[6]);
    let me = ids("ME1.1.", counts[7]);

    let mut model = Model::default();
    for i in &sh {
        model.stakeholders.push(Stakeholder {
            id: i.clone(),
            name: text(rng, 12),
            role: rng.gen_bool(0.5).then(|| text(rng, 8)),
            span: None,
        });
    }
    for i in &us {
        let facets = (0..rng.gen_range(0..4)).map(|_| word(rng)).collect();
        model.universes.push(ScopeUniverse {
            id: i.clone(),
            facets,
            span: None,
        });
    }
    let objective_ids = bo.clone();
    for (n, i) in bo.iter().enumerate() {
        let scope = us.choose(rng).filter(|_| rng.gen_bool(0.8)).map(|u| ScopeRef {
            universe: u.clone(),
            selection: if rng.gen_bool(0.5) {
                FacetSelection::All
            } else {
                FacetSelection::Facets((0..rng.gen_range(1..3)).map(|_| word(rng)).collect())
            },
            description: rng.gen_bool(0.5).then(|| text(rng, 10)),
        });
        let priority = rng.gen_bool(0.3).then(|| rng.gen_range(1..10));
        model.objectives.push(BusinessObjective {
            id: i.clone(),
            object: text(rng, 15),
            scope,
            purpose: text(rng, 10),
            viewpoint: pick(rng, &sh, 2),
            context: text(rng, 10),
            refines: maybe(rng, &objective_ids[..n]),
            depends_on: pick(rng, &objective_ids, 2),
            affects: pick(rng, &objective_ids, 2),
            priority,
            priority_justification: priority.and_then(|_| rng.gen_bool(0.7).then(|| text(rng, 10))),
            span: None,
        });
    }
    for i in &st {
        let steps = (0..rng.gen_range(0..4))
            .map(|_| StrategyStep {
                text: text(rng, 12),
                spawns: pick(rng, &bo, 2),
            })
            .collect();
        model.strategies.push(Strategy {
            id: i.clone(),
            for_objective: maybe(rng, &bo),
            steps,
            justification: text(rng, 10),
            span: None,
        });
    }
    for i in &mg {
        model.goals.push(MeasurementGoal {
            id: i.clone(),
            object: text(rng, 10),
            purpose: text(rng, 10),
            focus: text(rng, 6),
            scope: text(rng, 6),
            criteria: (0..rng.gen_range(0..3)).map(|_| text(rng, 8)).collect(),
            viewpoint: pick(rng, &sh, 2),
            context: text(rng, 8),
            measures: pick(rng, &bo, 2),
            related_goals: pick(rng, &mg, 2),
            span: None,
        });
    }
    for i in &qs {
        model.questions.push(MeasurementQuestion {
            id: i.clone(),
            goal: maybe(rng, &mg),
            text: text(rng, 20),
            status: [None, Some(QuestionStatus::Answered), Some(QuestionStatus::Open)][rng.gen_range(0..3)],
            span: None,
        });
    }
    for i in &bm {
        let fields = ["event", "status", "kind"];
        model.bases.push(BaseMeasurementDef {
            id: i.clone(),
            description: text(rng, 10),
            mode: [None, Some(SourceMode::Direct), Some(SourceMode::Count)][rng.gen_range(0..3)],
            aggregation: [None, Some(Aggregation::Sum), Some(Aggregation::Latest)][rng.gen_range(0..3)],
            filters: (0..rng.gen_range(0..3))
                .map(|_| FieldFilter {
                    field: fields.choose(rng).unwrap().to_string(),
                    value: text(rng, 6),
                })
                .collect(),
            span: None,
        });
    }
    let owners: Vec<Identifier> = bo.iter().chain(&mg).chain(&me).cloned().collect();
    for i in &me {
        let uses = pick(rng, &bm, 3);
        let bands = (0..rng.gen_range(0..4))
            .map(|_| InterpretationBand {
                label: if rng.gen_bool(0.5) { word(rng) } else { text(rng, 6) },
                interval: interval(rng),
                actions: (0..rng.gen_range(0..3))
                    .filter_map(|_| {
                        let kind = [ActionKind::Log, ActionKind::Notify, ActionKind::Escalate][rng.gen_range(0..3)];
                        let target = if rng.gen_bool(0.5) {
                            sh.choose(rng).cloned().map(ActionTarget::Stakeholder)
                        } else {
                            owners.choose(rng).cloned().map(ActionTarget::OwnerOf)
                        };
                        target.map(|target| Action { kind, target })
                    })
                    .collect(),
            })
            .collect();
        model.metrics.push(MetricDef {
            id: i.clone(),
            description: text(rng, 12),
            created: rng.gen_bool(0.5).then(|| date(rng)),
            modified: rng.gen_bool(0.3).then(|| date(rng)),
            reviewed: rng.gen_bool(0.3).then(|| date(rng)),
            goal: maybe(rng, &mg),
            answers: pick(rng, &qs, 2),
            function: rng.gen_bool(0.8).then(|| expression(rng, &uses, 4)),
            uses,
            method: text(rng, 10),
            domain: rng.gen_bool(0.4).then(|| interval(rng)),
            bands,
            schedule: ReportingSchedule {
                collection: granularity(rng),
                reporting: granularity(rng),
            },
            stakeholders: pick(rng, &sh, 2),
            span: None,
        });
    }
    model
}

/// A domain and bands whose bounds lie on a 0.5 grid inside or slightly
/// beyond the domain. About half the sets are exact partitions; the rest
/// have a perturbation that may or may not break the partition.
pub fn random_band_set<R: Rng>(rng: &mut R) -> (Interval, Vec<Interval>) {
    let grid = |k: i32| f64::from(k) * 0.5;
    let lo = rng.gen_range(-4..4);
    let hi = lo + rng.gen_range(1..16);
    let domain = Interval::new(grid(lo), grid(hi), rng.gen_bool(0.8), rng.gen_bool(0.8));

    let mut cuts: Vec<i32> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(lo + 1..hi.max(lo + 2))).collect();
    cuts.sort_unstable();
    cuts.dedup();
    cuts.retain(|c| *c < hi);
    let mut bands = Vec::new();
    let mut start = (lo, domain.lower_closed);
    for c in cuts {
        let upper_closed = rng.gen();
        bands.push(Interval::new(grid(start.0), grid(c), start.1, upper_closed));
        start = (c, !upper_closed);
    }
    bands.push(Interval::new(grid(start.0), grid(hi), start.1, domain.upper_closed));

    if rng.gen_bool(0.5) {
        let i = rng.gen_range(0..bands.len());
        match rng.gen_range(0..5) {
            0 => bands[i].lower_closed = !bands[i].lower_closed,
            1 => bands[i].upper_closed = !bands[i].upper_closed,
            2 => bands[i].lower -= 0.5,
            3 => bands[i].upper += 0.5,
            // An empty band list is a missing field, not a partition error.
            _ if bands.len() > 1 => {
                bands.remove(i);
            }
            _ => bands[i].lower_closed = !bands[i].lower_closed,
        }
        bands.retain(|b| !b.is_empty());
    }
    bands.shuffle(rng);
    (domain, bands)
}

/// Raw records with `event`/`status` fields spread over 2014, plus a few
/// direct entries for `direct_base`.
pub fn random_log<R: Rng>(rng: &mut R, max_records: usize, direct_base: Option<&Identifier>) -> Vec<MeasurementRecord> {
    let n = rng.gen_range(0..=max_records);
    (0..n)
        .map(|line| {
            let timestamp = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() + chrono::Days::new(rng.gen_range(0..365));
            let body = match direct_base {
                Some(base) if rng.gen_bool(0.2) => RecordBody::Direct {
                    base: base.clone(),
                    value: number(rng),
                },
                _ => {
                    let mut fields = BTreeMap::new();
                    for (name, values) in [
                        ("event", &["training", "audit"][..]),
                        ("status", &["completed", "pending", "failed"][..]),
                    ] {
                        if rng.gen_bool(0.85) {
                            fields.insert(name.to_string(), values.choose(rng).unwrap().to_string());
                        }
                    }
                    RecordBody::Raw { fields }
                }
            };
            MeasurementRecord {
                timestamp,
                body,
                line: line + 1,
            }
        })
        .collect()
}

/// A derivation DAG of at most `max_nodes` nodes: an objective forest, goals
/// measuring one or more objectives, questions on goals, metrics answering
/// one or more questions. Every reference resolves.
pub fn random_dag_model<R: Rng>(rng: &mut R, max_nodes: usize) -> Model {
    let total = rng.gen_range(1..=max_nodes);
    let mut model = Model::default();
    let mut bo: Vec<Identifier> = Vec::new();
    let mut mg: Vec<Identifier> = Vec::new();
    let mut qs: Vec<Identifier> = Vec::new();
    for n in 0..total {
        let roll = if bo.is_empty() { 0 } else { rng.gen_range(0..4) };
        match roll {
            0 => {
                let i = id(format!("BO{n}"));
                let refines = (!bo.is_empty() && rng.gen_bool(0.7)).then(|| bo.choose(rng).unwrap().clone());
                let affects = if bo.is_empty() || rng.gen_bool(0.8) { Vec::new() } else { pick(rng, &bo, 1) };
                model.objectives.push(BusinessObjective {
                    id: i.clone(),
                    object: String::new(),
                    scope: None,
                    purpose: String::new(),
                    viewpoint: Vec::new(),
                    context: String::new(),
                    refines,
                    depends_on: Vec::new(),
                    affects,
                    priority: None,
                    priority_justification: None,
                    span: None,
                });
                bo.push(i);
            }
            1 => {
                let i = id(format!("MG{n}"));
                let mut measures = pick(rng, &bo, 3);
                measures.dedup();
                if measures.is_empty() {
                    measures.push(bo.choose(rng).unwrap().clone());
                }
                model.goals.push(MeasurementGoal {
                    id: i.clone(),
                    object: String::new(),
                    purpose: String::new(),
                    focus: String::new(),
                    scope: String::new(),
                    criteria: Vec::new(),
                    viewpoint: Vec::new(),
                    context: String::new(),
                    measures,
                    related_goals: Vec::new(),
                    span: None,
                });
                mg.push(i);
            }
            2 if !mg.is_empty() => {
                let i = id(format!("Q{n}"));
                model.questions.push(MeasurementQuestion {
                    id: i.clone(),
                    goal: mg.choose(rng).cloned(),
                    text: String::new(),
                    status: None,
                    span: None,
                });
                qs.push(i);
            }
            3 if !qs.is_empty() => {
                let mut answers = pick(rng, &qs, 2);
                answers.dedup();
                if answers.is_empty() {
                    answers.push(qs.choose(rng).unwrap().clone());
                }
                model.metrics.push(MetricDef {
                    id: id(format!("ME{n}")),
                    description: String::new(),
                    created: None,
                    modified: None,
                    reviewed: None,
                    goal: None,
                    answers,
                    uses: Vec::new(),
                    method: String::new(),
                    function: None,
                    domain: None,
                    bands: Vec::new(),
                    schedule: ReportingSchedule::default(),
                    stakeholders: Vec::new(),
                    span: None,
                });
            }
            _ => {}
        }
    }
    model
}
