//! The bundled case-study corpus: models, measurement logs and the golden
//! outputs each one regenerates. Paths are relative to [`corpus_dir`].

use std::path::PathBuf;

/// Which output stream of the CLI a golden file captures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Stdout,
    Stderr,
}

#[derive(Debug, Clone, Copy)]
pub struct Golden {
    pub file: &'static str,
    /// `symkit` arguments, run from the corpus directory.
    pub args: &'static [&'static str],
    pub stream: Stream,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub model: &'static str,
    pub logs: &'static [&'static str],
    pub goldens: &'static [Golden],
}

const fn out(file: &'static str, args: &'static [&'static str]) -> Golden {
    Golden {
        file,
        args,
        stream: Stream::Stdout,
        exit_code: 0,
    }
}

const fn diag(file: &'static str, args: &'static [&'static str]) -> Golden {
    Golden {
        file,
        args,
        stream: Stream::Stderr,
        exit_code: 0,
    }
}

const JPMORGAN: CorpusEntry = CorpusEntry {
    model: "jpmorgan.sym",
    logs: &[
        "jpmorgan_2014_history.jsonl",
        "jpmorgan_2014-03.jsonl",
        "jpmorgan_2014-09.jsonl",
        "jpmorgan_2014-10.jsonl",
    ],
    goldens: &[
        diag("golden/jpmorgan.check.txt", &["check", "jpmorgan.sym"]),
        out("golden/jpmorgan.render.txt", &["render", "jpmorgan.sym"]),
        out("golden/jpmorgan.graph.dot", &["graph", "jpmorgan.sym", "--format", "dot"]),
        out(
            "golden/jpmorgan.eval_2014-09.json",
            &[
                "eval", "jpmorgan.sym", "--measurements", "jpmorgan_2014-09.jsonl",
                "--metric", "ME1.1.1.1.1", "--period", "2014-09", "--format", "json",
            ],
        ),
        out(
            "golden/jpmorgan.report_2014.txt",
            &[
                "report", "jpmorgan.sym", "--measurements", "jpmorgan_2014_history.jsonl",
                "--measurements", "jpmorgan_2014-03.jsonl", "--measurements", "jpmorgan_2014-09.jsonl",
                "--metric", "ME1.1.1.1.1", "--from", "2014-Q1", "--to", "2014-Q3", "--format", "text",
            ],
        ),
        out(
            "golden/jpmorgan.report_2014.json",
            &[
                "report", "jpmorgan.sym", "--measurements", "jpmorgan_2014_history.jsonl",
                "--measurements", "jpmorgan_2014-03.jsonl", "--measurements", "jpmorgan_2014-09.jsonl",
                "--metric", "ME1.1.1.1.1", "--from", "2014-Q1", "--to", "2014-Q3", "--format", "json",
            ],
        ),
        out(
            "golden/jpmorgan.report_2014.svg",
            &[
                "report", "jpmorgan.sym", "--measurements", "jpmorgan_2014_history.jsonl",
                "--measurements", "jpmorgan_2014-03.jsonl", "--measurements", "jpmorgan_2014-09.jsonl",
                "--metric", "ME1.1.1.1.1", "--from", "2014-Q1", "--to", "2014-Q3", "--format", "svg",
            ],
        ),
        out(
            "golden/jpmorgan.impact_remove_BO1.1.1.txt",
            &["impact", "jpmorgan.sym", "changes/jpmorgan_without_BO1.1.1.sym"],
        ),
        out(
            "golden/jpmorgan.impact_refresher.json",
            &["impact", "jpmorgan.sym", "changes/jpmorgan_refresher_6_months.sym", "--json"],
        ),
    ],
};

const ANTHEM: CorpusEntry = CorpusEntry {
    model: "anthem.sym",
    logs: &["anthem_2015.jsonl"],
    goldens: &[
        diag("golden/anthem.check.txt", &["check", "anthem.sym"]),
        out(
            "golden/anthem.eval_2015.json",
            &[
                "eval", "anthem.sym", "--measurements", "anthem_2015.jsonl", "--metric", "ME2",
                "--period", "2015", "--format", "json",
            ],
        ),
        out(
            "golden/anthem.report_2015.txt",
            &[
                "report", "anthem.sym", "--measurements", "anthem_2015.jsonl", "--from", "2015-01",
                "--to", "2015-12", "--format", "text",
            ],
        ),
        out(
            "golden/anthem.report_2015.svg",
            &[
                "report", "anthem.sym", "--measurements", "anthem_2015.jsonl", "--from", "2015-01",
                "--to", "2015-12", "--format", "svg",
            ],
        ),
    ],
};

const HEARTLAND_BROKEN: CorpusEntry = CorpusEntry {
    model: "heartland_broken.sym",
    logs: &[],
    goldens: &[diag("golden/heartland_broken.check.txt", &["check", "heartland_broken.sym"])],
};

const HEARTLAND_FIXED: CorpusEntry = CorpusEntry {
    model: "heartland_fixed.sym",
    logs: &[],
    goldens: &[diag("golden/heartland_fixed.check.txt", &["check", "heartland_fixed.sym"])],
};

pub fn corpus_manifest() -> Vec<CorpusEntry> {
    vec![JPMORGAN, ANTHEM, HEARTLAND_BROKEN, HEARTLAND_FIXED]
}

/// Formulations as printed in the source text, for comparison with
/// `render`. One `ID: sentence` per line.
pub const REFERENCE_FORMULATIONS: &str = "golden/reference_formulations.txt";

/// The `corpus/` directory of this source tree.
pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}
