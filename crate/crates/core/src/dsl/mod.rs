//! The `.sym` model language: lexer, parser, include resolution and the
//! canonical serializer.

mod lexer;
mod loader;
mod parser;
mod serialize;

use std::path::Path;

use crate::diagnostic::Diagnostic;
use crate::model::Model;

pub use loader::{FsLoader, MemoryLoader, NoIncludes, SourceLoader};
pub use parser::{parse, parse_expression, parse_source};
pub use serialize::{serialize, HEADER};

pub(crate) use serialize::interval_text;

/// Reads and parses a file, following includes relative to it.
pub fn parse_file(path: &Path) -> std::io::Result<(Model, Vec<Diagnostic>)> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    Ok(parse_source(&text, &name, &FsLoader))
}

/// Whether the source has an `include` directive at block level.
pub fn has_includes(text: &str) -> bool {
    lexer::lex(text, "")
        .tokens
        .iter()
        .any(|t| matches!(&t.tok, lexer::Tok::Ident(w) if w == "include"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::codes;
    use crate::expr::{evaluate, BinaryOp, Bindings, FunctionExpr};

    const MINIMAL: &str = r#"
stakeholder ciso { name: "CISO" }
universe org { facets: a, b }
objective BO_X { object: "x" scope: org.* purpose: "p" viewpoint: ciso context: "c" }
"#;

    fn codes_of(d: &[Diagnostic]) -> Vec<String> {
        d.iter().map(|d| d.code.to_string()).collect()
    }

    #[test]
    fn minimal_model() {
        let (model, diags) = parse(MINIMAL);
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(model.objectives.len(), 1);
        let bo = &model.objectives[0];
        assert_eq!(bo.id, "BO_X");
        assert_eq!(bo.viewpoint[0], "ciso");
        let span = bo.span.as_ref().unwrap();
        assert_eq!((span.line, span.column), (4, 11));
    }

    #[test]
    fn missing_bracket_is_p005_at_the_defect() {
        let text = "metric M {\n  bands: [0, 60 -> low {}\n}\n";
        let (_, diags) = parse(text);
        assert_eq!(codes_of(&diags), ["P005"]);
        let span = diags[0].span.as_ref().unwrap();
        assert_eq!((span.line, span.column), (2, 17));
    }

    #[test]
    fn empty_and_reversed_intervals() {
        let (_, diags) = parse("metric M { domain: [5, 1] }");
        assert_eq!(codes_of(&diags), ["P005"]);
        let (_, diags) = parse("metric M { domain: (1, 1] }");
        assert_eq!(codes_of(&diags), ["P005"]);
        let (model, diags) = parse("metric M { domain: [-1, 1] }");
        assert!(diags.is_empty());
        assert_eq!(model.metrics[0].domain.as_ref().unwrap().lower, -1.0);
    }

    #[test]
    fn error_codes() {
        assert_eq!(codes_of(&parse("widget W {}").1), ["P003"]);
        assert_eq!(
            codes_of(&parse("stakeholder s { name: \"a\" name: \"b\" }").1),
            ["P004"]
        );
        assert_eq!(codes_of(&parse("stakeholder s { name: \"a }").1)[0], "P002");
        assert_eq!(codes_of(&parse("stakeholder s { colour: \"red\" }").1), ["P001"]);
        assert_eq!(codes_of(&parse("include \"other.sym\"").1), ["P007"]);
    }

    #[test]
    fn recovery_keeps_later_blocks() {
        let text = "widget W { a: b }\nstakeholder s { name: 5 }\nstakeholder t { name: \"T\" }\n";
        let (model, diags) = parse(text);
        assert_eq!(codes_of(&diags), ["P003", "P001"]);
        assert_eq!(model.stakeholders.len(), 1);
        assert_eq!(model.stakeholders[0].id, "t");
    }

    #[test]
    fn crlf_is_accepted() {
        let (a, _) = parse(MINIMAL);
        let (b, diags) = parse(&MINIMAL.replace('\n', "\r\n"));
        assert!(diags.is_empty());
        assert_eq!(a.canonical_dump(), b.canonical_dump());
    }

    #[test]
    fn includes_and_cycles() {
        let loader = MemoryLoader::default()
            .with("main.sym", "include \"people.sym\"\nobjective B { viewpoint: ciso }")
            .with("people.sym", "stakeholder ciso { name: \"CISO\" }");
        let (model, diags) = parse_source(&loader.files["main.sym"], "main.sym", &loader);
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(model.node_count(), 2);

        let cyclic = MemoryLoader::default()
            .with("a.sym", "include \"b.sym\"")
            .with("b.sym", "include \"a.sym\"");
        let (_, diags) = parse_source(&cyclic.files["a.sym"], "a.sym", &cyclic);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::INCLUDE_CYCLE);
        assert_eq!(diags[0].span.as_ref().unwrap().file, "b.sym");
    }

    #[test]
    fn expressions() {
        let e = parse_expression("(bm_completed / bm_took) * 100").unwrap();
        assert_eq!(
            e,
            FunctionExpr::binary(
                BinaryOp::Mul,
                FunctionExpr::binary(
                    BinaryOp::Div,
                    FunctionExpr::var("bm_completed"),
                    FunctionExpr::var("bm_took")
                ),
                FunctionExpr::number(100.0)
            )
        );
        assert_eq!(parse_expression("a").unwrap(), FunctionExpr::var("a"));
        let p = parse_expression("1 + 2 * 3").unwrap();
        assert_eq!(evaluate(&p, &Bindings::<f64>::new()), Ok(7.0));
        assert_eq!(parse_expression("8 - 2 - 1").unwrap().to_parenthesized(), "((8 - 2) - 1)");
        assert!(parse_expression("1 +").is_err());
        assert!(parse_expression("(1").is_err());
        assert!(parse_expression("1 2").is_err());
    }

    #[test]
    fn empty_model_serializes_to_header() {
        assert_eq!(serialize(&Model::default()), HEADER);
    }

    #[test]
    fn one_stakeholder_one_block() {
        let (model, _) = parse("stakeholder s { name: \"S\" }");
        let text = serialize(&model);
        assert_eq!(text.matches("stakeholder ").count(), 1);
    }

    #[test]
    fn minimal_round_trip() {
        let (model, _) = parse(MINIMAL);
        let (again, diags) = parse(&serialize(&model));
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(model.canonical_dump(), again.canonical_dump());
    }

    #[test]
    fn include_detection() {
        assert!(has_includes("include \"x\""));
        assert!(!has_includes("stakeholder s { name: \"include\" }"));
    }
}
