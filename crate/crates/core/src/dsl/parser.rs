use std::collections::BTreeSet;

use chrono::NaiveDate;

use super::lexer::{lex, Tok, Token};
use super::loader::{NoIncludes, SourceLoader};
use crate::diagnostic::{codes, Code, Diagnostic, SourceSpan};
use crate::expr::{BinaryOp, FunctionExpr};
use crate::interval::Interval;
use crate::model::{
    Action, ActionKind, ActionTarget, Aggregation, BaseMeasurementDef, BusinessObjective,
    FacetSelection, FieldFilter, Identifier, InterpretationBand, MeasurementGoal,
    MeasurementQuestion, MetricDef, Model, NodeKind, QuestionStatus, ReportingSchedule,
    ScopeRef, ScopeUniverse, SourceMode, Stakeholder, Strategy, StrategyStep,
};
use crate::period::{parse_date, Granularity};

/// Parses `.sym` text that has no file context. `include` directives are
/// reported as unreadable.
pub fn parse(text: &str) -> (Model, Vec<Diagnostic>) {
    parse_source(text, "<input>", &NoIncludes)
}

/// Parses `.sym` text named `file`, resolving includes through `loader`.
pub fn parse_source(text: &str, file: &str, loader: &dyn SourceLoader) -> (Model, Vec<Diagnostic>) {
    let mut model = Model::default();
    let mut diagnostics = Vec::new();
    let mut stack = vec![loader.identity(file)];
    parse_into(text, file, loader, &mut stack, &mut model, &mut diagnostics);
    (model, diagnostics)
}

fn parse_into(
    text: &str,
    file: &str,
    loader: &dyn SourceLoader,
    stack: &mut Vec<String>,
    model: &mut Model,
    diagnostics: &mut Vec<Diagnostic>,
) {
    let normalized = text.replace("\r\n", "\n");
    let lexed = lex(&normalized, file);
    diagnostics.extend(lexed.diagnostics);
    let mut parser = Parser::new(lexed.tokens, file);
    while !parser.at_eof() {
        let before = parser.pos;
        match parser.item() {
            Ok(Item::Node(node)) => node.add_to(model),
            Ok(Item::Include(path, span)) => {
                parser.flush(diagnostics);
                include(&path, span, file, loader, stack, model, diagnostics);
            }
            Err(()) => {
                if parser.pos == before {
                    parser.advance();
                }
                parser.recover(0);
            }
        }
    }
    parser.flush(diagnostics);
}

fn include(
    path: &str,
    span: SourceSpan,
    from: &str,
    loader: &dyn SourceLoader,
    stack: &mut Vec<String>,
    model: &mut Model,
    diagnostics: &mut Vec<Diagnostic>,
) {
    let resolved = loader.resolve(from, path);
    let identity = loader.identity(&resolved);
    if stack.contains(&identity) {
        diagnostics.push(
            Diagnostic::error(codes::INCLUDE_CYCLE, format!("include cycle through {path:?}"))
                .with_span(Some(span)),
        );
        return;
    }
    match loader.load(&resolved) {
        Ok(text) => {
            stack.push(identity);
            parse_into(&text, &resolved, loader, stack, model, diagnostics);
            stack.pop();
        }
        Err(reason) => diagnostics.push(
            Diagnostic::error(
                codes::INCLUDE_UNREADABLE,
                format!("cannot include {path:?}: {reason}"),
            )
            .with_span(Some(span)),
        ),
    }
}

enum Item {
    Node(Box<Node>),
    Include(String, SourceSpan),
}

enum Node {
    Stakeholder(Stakeholder),
    Universe(ScopeUniverse),
    Objective(BusinessObjective),
    Strategy(Strategy),
    Goal(MeasurementGoal),
    Question(MeasurementQuestion),
    Base(BaseMeasurementDef),
    Metric(Box<MetricDef>),
}

impl Node {
    fn add_to(self, model: &mut Model) {
        match self {
            Node::Stakeholder(n) => model.stakeholders.push(n),
            Node::Universe(n) => model.universes.push(n),
            Node::Objective(n) => model.objectives.push(n),
            Node::Strategy(n) => model.strategies.push(n),
            Node::Goal(n) => model.goals.push(n),
            Node::Question(n) => model.questions.push(n),
            Node::Base(n) => model.bases.push(n),
            Node::Metric(n) => model.metrics.push(*n),
        }
    }
}

type PResult<T> = Result<T, ()>;

pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    file: &'a str,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(tokens: Vec<Token>, file: &'a str) -> Self {
        Self {
            tokens,
            pos: 0,
            depth: 0,
            file,
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn take_diagnostics(&mut self) -> Vec<Diagnostic> {
        std::mem::take(&mut self.diagnostics)
    }

    fn flush(&mut self, into: &mut Vec<Diagnostic>) {
        into.append(&mut self.diagnostics);
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn span(&self) -> SourceSpan {
        let t = &self.tokens[self.pos];
        SourceSpan::new(self.file, t.line, t.column, t.length.max(1))
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        match token.tok {
            Tok::LBrace => self.depth += 1,
            Tok::RBrace => self.depth = self.depth.saturating_sub(1),
            Tok::Eof => return token,
            _ => {}
        }
        self.pos += 1;
        token
    }

    fn error_at<T>(&mut self, code: Code, message: impl Into<String>) -> PResult<T> {
        let span = self.span();
        self.diagnostics
            .push(Diagnostic::error(code, message).with_span(Some(span)));
        Err(())
    }

    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let found = self.peek().describe();
        self.error_at(
            codes::UNEXPECTED_TOKEN,
            format!("expected {expected}, found {found}"),
        )
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            self.unexpected(expected)
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    /// Skips to a point where parsing can resume: past the brace closing the
    /// block open at `base` depth, or to the next block keyword.
    fn recover(&mut self, base: usize) {
        loop {
            if self.at_eof() {
                return;
            }
            if self.depth > base {
                let token = self.advance();
                if token.tok == Tok::RBrace && self.depth == base {
                    return;
                }
                continue;
            }
            if self.at_block_start() {
                return;
            }
            self.advance();
        }
    }

    fn at_block_start(&self) -> bool {
        match self.peek() {
            Tok::Ident(word) => word == "include" || NodeKind::from_keyword(word).is_some(),
            _ => false,
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let keyword = match self.peek().clone() {
            Tok::Ident(word) => word,
            Tok::RBrace => return self.error_at(codes::UNEXPECTED_TOKEN, "unbalanced `}`"),
            _ => return self.unexpected("a block keyword"),
        };
        if keyword == "include" {
            let span = self.span();
            self.advance();
            return match self.peek().clone() {
                Tok::Str(path) => {
                    self.advance();
                    Ok(Item::Include(path, span))
                }
                _ => self.unexpected("an include path string"),
            };
        }
        let Some(kind) = NodeKind::from_keyword(&keyword) else {
            return self.error_at(
                codes::UNKNOWN_BLOCK,
                format!("unknown block kind `{keyword}`"),
            );
        };
        self.advance();
        let id_span = self.span();
        let id = self.identifier("an identifier")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut block = Block {
            seen: BTreeSet::new(),
        };
        let result = match kind {
            NodeKind::Stakeholder => self.stakeholder(id, &mut block).map(Node::Stakeholder),
            NodeKind::Universe => self.universe(id, &mut block).map(Node::Universe),
            NodeKind::Objective => self.objective(id, &mut block).map(Node::Objective),
            NodeKind::Strategy => self.strategy(id, &mut block).map(Node::Strategy),
            NodeKind::Goal => self.goal(id, &mut block).map(Node::Goal),
            NodeKind::Question => self.question(id, &mut block).map(Node::Question),
            NodeKind::Base => self.base(id, &mut block).map(Node::Base),
            NodeKind::Metric => self.metric(id, &mut block).map(|m| Node::Metric(Box::new(m))),
        };
        let mut node = result?;
        node.set_span(id_span);
        Ok(Item::Node(Box::new(node)))
    }

    /// Iterates `name: value` fields until the closing brace. `field` returns
    /// `Ok(false)` for names it does not know.
    fn fields(
        &mut self,
        kind: NodeKind,
        block: &mut Block,
        mut field: impl FnMut(&mut Self, &str) -> PResult<bool>,
    ) -> PResult<()> {
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    return Ok(());
                }
                Tok::Ident(name) => {
                    let name_span = self.span();
                    self.advance();
                    self.expect(Tok::Colon, "`:`")?;
                    if !block.seen.insert(name.clone()) {
                        self.diagnostics.push(
                            Diagnostic::error(
                                codes::DUPLICATE_FIELD,
                                format!("duplicate field `{name}` in {kind} block"),
                            )
                            .with_span(Some(name_span.clone())),
                        );
                    }
                    if !field(self, &name)? {
                        self.diagnostics.push(
                            Diagnostic::error(
                                codes::UNEXPECTED_TOKEN,
                                format!("unknown field `{name}` in {kind} block"),
                            )
                            .with_span(Some(name_span)),
                        );
                        return Err(());
                    }
                }
                _ => return self.unexpected("a field name or `}`"),
            }
        }
    }

    fn identifier(&mut self, expected: &str) -> PResult<Identifier> {
        match self.peek().clone() {
            Tok::Ident(word) => match Identifier::new(word) {
                Ok(id) => {
                    self.advance();
                    Ok(id)
                }
                Err(_) => self.unexpected(expected),
            },
            _ => self.unexpected(expected),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<Identifier>> {
        let mut out = vec![self.identifier("an identifier")?];
        while self.eat(&Tok::Comma) {
            out.push(self.identifier("an identifier")?);
        }
        Ok(out)
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected("a string"),
        }
    }

    fn string_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.string()?];
        while self.eat(&Tok::Comma) {
            out.push(self.string()?);
        }
        Ok(out)
    }

    fn word(&mut self, expected: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(w) => {
                self.advance();
                Ok(w)
            }
            _ => self.unexpected(expected),
        }
    }

    fn keyword_of<T>(&mut self, expected: &str, lookup: impl Fn(&str) -> Option<T>) -> PResult<T> {
        if let Tok::Ident(w) = self.peek() {
            if let Some(v) = lookup(w) {
                self.advance();
                return Ok(v);
            }
        }
        self.unexpected(expected)
    }

    fn date(&mut self) -> PResult<NaiveDate> {
        let span = self.span();
        let text = self.string()?;
        parse_date(&text).ok_or_else(|| {
            self.diagnostics.push(
                Diagnostic::error(
                    codes::UNEXPECTED_TOKEN,
                    format!("expected an ISO date `YYYY-MM-DD`, found {text:?}"),
                )
                .with_span(Some(span)),
            );
        })
    }

    fn stakeholder(&mut self, id: Identifier, block: &mut Block) -> PResult<Stakeholder> {
        let mut node = Stakeholder {
            id,
            name: String::new(),
            role: None,
            span: None,
        };
        self.fields(NodeKind::Stakeholder, block, |p, name| {
            match name {
                "name" => node.name = p.string()?,
                "role" => node.role = Some(p.string()?),
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn universe(&mut self, id: Identifier, block: &mut Block) -> PResult<ScopeUniverse> {
        let mut node = ScopeUniverse {
            id,
            facets: Vec::new(),
            span: None,
        };
        self.fields(NodeKind::Universe, block, |p, name| {
            match name {
                "facets" => {
                    node.facets = p.ident_list()?.into_iter().map(|i| i.as_str().to_string()).collect()
                }
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn scope(&mut self) -> PResult<ScopeRef> {
        let universe = self.identifier("a scope universe")?;
        self.expect(Tok::Dot, "`.` after the scope universe")?;
        let selection = if self.eat(&Tok::Star) {
            FacetSelection::All
        } else {
            self.expect(Tok::LBrace, "`*` or `{`")?;
            let mut facets = vec![self.word("a facet name")?];
            while self.eat(&Tok::Comma) {
                facets.push(self.word("a facet name")?);
            }
            self.expect(Tok::RBrace, "`}`")?;
            FacetSelection::Facets(facets)
        };
        let description = match self.peek() {
            Tok::Str(_) => Some(self.string()?),
            _ => None,
        };
        Ok(ScopeRef {
            universe,
            selection,
            description,
        })
    }

    fn objective(&mut self, id: Identifier, block: &mut Block) -> PResult<BusinessObjective> {
        let mut node = BusinessObjective {
            id,
            object: String::new(),
            scope: None,
            purpose: String::new(),
            viewpoint: Vec::new(),
            context: String::new(),
            refines: None,
            depends_on: Vec::new(),
            affects: Vec::new(),
            priority: None,
            priority_justification: None,
            span: None,
        };
        self.fields(NodeKind::Objective, block, |p, name| {
            match name {
                "object" => node.object = p.string()?,
                "scope" => node.scope = Some(p.scope()?),
                "purpose" => node.purpose = p.string()?,
                "viewpoint" => node.viewpoint = p.ident_list()?,
                "context" => node.context = p.string()?,
                "refines" => node.refines = Some(p.identifier("an objective id")?),
                "depends_on" => node.depends_on = p.ident_list()?,
                "affects" => node.affects = p.ident_list()?,
                "priority" => node.priority = Some(p.priority()?),
                "priority_justification" => node.priority_justification = Some(p.string()?),
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn priority(&mut self) -> PResult<u32> {
        match *self.peek() {
            Tok::Num(v) if v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) => {
                self.advance();
                Ok(v as u32)
            }
            _ => self.unexpected("a positive integer priority"),
        }
    }

    fn strategy(&mut self, id: Identifier, block: &mut Block) -> PResult<Strategy> {
        let mut node = Strategy {
            id,
            for_objective: None,
            steps: Vec::new(),
            justification: String::new(),
            span: None,
        };
        self.fields(NodeKind::Strategy, block, |p, name| {
            match name {
                "for" => node.for_objective = Some(p.identifier("an objective id")?),
                "steps" => {
                    node.steps = vec![p.step()?];
                    while p.eat(&Tok::Comma) {
                        node.steps.push(p.step()?);
                    }
                }
                "justification" => node.justification = p.string()?,
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn step(&mut self) -> PResult<StrategyStep> {
        let text = self.string()?;
        let mut spawns = Vec::new();
        if self.eat(&Tok::Arrow) {
            if self.eat(&Tok::LBracket) {
                spawns = self.ident_list()?;
                self.expect(Tok::RBracket, "`]`")?;
            } else {
                spawns.push(self.identifier("a sub-objective id")?);
            }
        }
        Ok(StrategyStep { text, spawns })
    }

    fn goal(&mut self, id: Identifier, block: &mut Block) -> PResult<MeasurementGoal> {
        let mut node = MeasurementGoal {
            id,
            object: String::new(),
            purpose: String::new(),
            focus: String::new(),
            scope: String::new(),
            criteria: Vec::new(),
            viewpoint: Vec::new(),
            context: String::new(),
            measures: Vec::new(),
            related_goals: Vec::new(),
            span: None,
        };
        self.fields(NodeKind::Goal, block, |p, name| {
            match name {
                "object" => node.object = p.string()?,
                "purpose" => node.purpose = p.string()?,
                "focus" => node.focus = p.string()?,
                "scope" => node.scope = p.string()?,
                "criteria" => node.criteria = p.string_list()?,
                "viewpoint" => node.viewpoint = p.ident_list()?,
                "context" => node.context = p.string()?,
                "measures" => node.measures = p.ident_list()?,
                "related" => node.related_goals = p.ident_list()?,
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn question(&mut self, id: Identifier, block: &mut Block) -> PResult<MeasurementQuestion> {
        let mut node = MeasurementQuestion {
            id,
            goal: None,
            text: String::new(),
            status: None,
            span: None,
        };
        self.fields(NodeKind::Question, block, |p, name| {
            match name {
                "goal" => node.goal = Some(p.identifier("a goal id")?),
                "text" => node.text = p.string()?,
                "status" => {
                    node.status = Some(p.keyword_of("`answered` or `open`", |w| match w {
                        "answered" => Some(QuestionStatus::Answered),
                        "open" => Some(QuestionStatus::Open),
                        _ => None,
                    })?)
                }
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn base(&mut self, id: Identifier, block: &mut Block) -> PResult<BaseMeasurementDef> {
        let mut node = BaseMeasurementDef {
            id,
            description: String::new(),
            mode: None,
            aggregation: None,
            filters: Vec::new(),
            span: None,
        };
        self.fields(NodeKind::Base, block, |p, name| {
            match name {
                "description" => node.description = p.string()?,
                "mode" => {
                    node.mode = Some(p.keyword_of("`direct` or `count`", |w| match w {
                        "direct" => Some(SourceMode::Direct),
                        "count" => Some(SourceMode::Count),
                        _ => None,
                    })?)
                }
                "aggregation" => {
                    node.aggregation = Some(p.keyword_of("`sum` or `latest`", |w| match w {
                        "sum" => Some(Aggregation::Sum),
                        "latest" => Some(Aggregation::Latest),
                        _ => None,
                    })?)
                }
                "filters" => {
                    node.filters = vec![p.filter()?];
                    while p.eat(&Tok::Comma) {
                        node.filters.push(p.filter()?);
                    }
                }
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn filter(&mut self) -> PResult<FieldFilter> {
        let field = self.word("a record field name")?;
        self.expect(Tok::Eq, "`=`")?;
        let value = self.string()?;
        Ok(FieldFilter { field, value })
    }

    fn metric(&mut self, id: Identifier, block: &mut Block) -> PResult<MetricDef> {
        let mut node = MetricDef {
            id,
            description: String::new(),
            created: None,
            modified: None,
            reviewed: None,
            goal: None,
            answers: Vec::new(),
            uses: Vec::new(),
            method: String::new(),
            function: None,
            domain: None,
            bands: Vec::new(),
            schedule: ReportingSchedule::default(),
            stakeholders: Vec::new(),
            span: None,
        };
        self.fields(NodeKind::Metric, block, |p, name| {
            match name {
                "description" => node.description = p.string()?,
                "created" => node.created = Some(p.date()?),
                "modified" => node.modified = Some(p.date()?),
                "reviewed" => node.reviewed = Some(p.date()?),
                "goal" => node.goal = Some(p.identifier("a goal id")?),
                "answers" => node.answers = p.ident_list()?,
                "uses" => node.uses = p.ident_list()?,
                "method" => node.method = p.string()?,
                "function" => node.function = Some(p.expression()?),
                "domain" => node.domain = Some(p.interval()?),
                "bands" => {
                    node.bands = vec![p.band()?];
                    while p.eat(&Tok::Comma) {
                        node.bands.push(p.band()?);
                    }
                }
                "collection" => node.schedule.collection = Some(p.granularity()?),
                "reporting" => node.schedule.reporting = Some(p.granularity()?),
                "stakeholders" => node.stakeholders = p.ident_list()?,
                _ => return Ok(false),
            }
            Ok(true)
        })?;
        Ok(node)
    }

    fn granularity(&mut self) -> PResult<Granularity> {
        self.keyword_of(
            "one of daily, weekly, monthly, quarterly, yearly",
            Granularity::from_keyword,
        )
    }

    fn interval_bound(&mut self) -> PResult<f64> {
        let negative = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Num(v) => {
                self.advance();
                Ok(if negative { -v } else { v })
            }
            _ => {
                let found = self.peek().describe();
                self.error_at(
                    codes::MALFORMED_INTERVAL,
                    format!("malformed interval: expected a number, found {found}"),
                )
            }
        }
    }

    fn interval_punct(&mut self, accepted: &[(Tok, bool)], expected: &str) -> PResult<bool> {
        for (tok, flag) in accepted {
            if self.peek() == tok {
                self.advance();
                return Ok(*flag);
            }
        }
        let found = self.peek().describe();
        self.error_at(
            codes::MALFORMED_INTERVAL,
            format!("malformed interval: expected {expected}, found {found}"),
        )
    }

    fn interval(&mut self) -> PResult<Interval> {
        let start = self.span();
        let lower_closed = self.interval_punct(
            &[(Tok::LBracket, true), (Tok::LParen, false)],
            "`[` or `(`",
        )?;
        let lower = self.interval_bound()?;
        self.interval_punct(&[(Tok::Comma, true)], "`,`")?;
        let upper = self.interval_bound()?;
        let upper_closed = self.interval_punct(
            &[(Tok::RBracket, true), (Tok::RParen, false)],
            "`]` or `)`",
        )?;
        let interval = Interval::new(lower, upper, lower_closed, upper_closed);
        if interval.is_empty() {
            self.diagnostics.push(
                Diagnostic::error(
                    codes::MALFORMED_INTERVAL,
                    format!("malformed interval: {interval} is empty"),
                )
                .with_span(Some(start)),
            );
            return Err(());
        }
        Ok(interval)
    }

    fn band(&mut self) -> PResult<InterpretationBand> {
        let interval = self.interval()?;
        self.expect(Tok::Arrow, "`->` after the band interval")?;
        let label = match self.peek().clone() {
            Tok::Ident(w) => {
                self.advance();
                w
            }
            Tok::Str(s) => {
                self.advance();
                s
            }
            _ => return self.unexpected("a band label"),
        };
        self.expect(Tok::LBrace, "`{`")?;
        let mut actions = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let kind = self.keyword_of("`log`, `notify`, `escalate` or `}`", |w| match w {
                "log" => Some(ActionKind::Log),
                "notify" => Some(ActionKind::Notify),
                "escalate" => Some(ActionKind::Escalate),
                _ => None,
            })?;
            let target = if matches!(self.peek(), Tok::Ident(w) if w == "owner_of")
                && *self.peek_at(1) == Tok::LParen
            {
                self.advance();
                self.advance();
                let id = self.identifier("a node id")?;
                self.expect(Tok::RParen, "`)`")?;
                ActionTarget::OwnerOf(id)
            } else {
                ActionTarget::Stakeholder(self.identifier("a stakeholder id")?)
            };
            actions.push(Action { kind, target });
        }
        Ok(InterpretationBand {
            label,
            interval,
            actions,
        })
    }

    /// `expr := term (('+' | '-') term)*`
    pub(crate) fn expression(&mut self) -> PResult<FunctionExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = FunctionExpr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<FunctionExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = FunctionExpr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<FunctionExpr> {
        if self.eat(&Tok::Minus) {
            return Ok(FunctionExpr::negate(self.unary()?));
        }
        match self.peek().clone() {
            Tok::Num(v) => {
                self.advance();
                Ok(FunctionExpr::Number(v))
            }
            Tok::Ident(_) => Ok(FunctionExpr::Var(self.identifier("a variable")?)),
            Tok::LParen => {
                self.advance();
                let inner = self.expression()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => self.unexpected("a number, variable or `(`"),
        }
    }
}

struct Block {
    seen: BTreeSet<String>,
}

impl Node {
    fn set_span(&mut self, span: SourceSpan) {
        let slot = match self {
            Node::Stakeholder(n) => &mut n.span,
            Node::Universe(n) => &mut n.span,
            Node::Objective(n) => &mut n.span,
            Node::Strategy(n) => &mut n.span,
            Node::Goal(n) => &mut n.span,
            Node::Question(n) => &mut n.span,
            Node::Base(n) => &mut n.span,
            Node::Metric(n) => &mut n.span,
        };
        *slot = Some(span);
    }
}

/// Parses a standalone measurement-function expression.
pub fn parse_expression(text: &str) -> Result<FunctionExpr, Vec<Diagnostic>> {
    let lexed = lex(text, "<expression>");
    let mut diagnostics = lexed.diagnostics;
    let mut parser = Parser::new(lexed.tokens, "<expression>");
    let result = parser.expression();
    if result.is_ok() && !parser.at_eof() {
        let _ = parser.unexpected::<()>("an operator or end of expression");
    }
    diagnostics.extend(parser.take_diagnostics());
    match result {
        Ok(expr) if diagnostics.is_empty() => Ok(expr),
        _ => Err(diagnostics),
    }
}
