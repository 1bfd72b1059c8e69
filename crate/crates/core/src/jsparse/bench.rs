//! Parser load-speed benchmark: per-frame wall-clock time to parse a whole
//! corpus, reported one row per parser configuration.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parser::{parse_with, ParseError, ParseOptions};
use super::printer::print_tree;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark corpus is empty")]
    EmptyCorpus,
    #[error("frame count must be at least 1")]
    NoFrames,
    #[error("corpus file {name} does not parse: {error}")]
    Unparseable { name: String, error: ParseError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParserConfig {
    /// Full parse with source spans.
    Spans,
    /// Parse without span bookkeeping.
    NoSpans,
    /// Parse with spans, then print canonically.
    ParsePrint,
}

impl ParserConfig {
    pub const ALL: [ParserConfig; 3] = [
        ParserConfig::Spans,
        ParserConfig::NoSpans,
        ParserConfig::ParsePrint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParserConfig::Spans => "parse+spans",
            ParserConfig::NoSpans => "parse-no-spans",
            ParserConfig::ParsePrint => "parse+print",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub parser: String,
    pub frames_ms: Vec<f64>,
    pub average_ms: f64,
}

impl BenchRow {
    pub fn from_frames(parser: impl Into<String>, frames_ms: Vec<f64>) -> BenchRow {
        let average_ms = mean(&frames_ms);
        BenchRow {
            parser: parser.into(),
            frames_ms,
            average_ms,
        }
    }
}

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

pub struct CorpusFile {
    pub name: String,
    pub source: String,
}

/// Times `frames` sequential full-corpus parses under `config`.
pub fn bench_parse(
    corpus: &[CorpusFile],
    frames: usize,
    config: ParserConfig,
) -> Result<BenchRow, BenchError> {
    if corpus.is_empty() {
        return Err(BenchError::EmptyCorpus);
    }
    if frames == 0 {
        return Err(BenchError::NoFrames);
    }
    for f in corpus {
        parse_with(&f.source, ParseOptions::default()).map_err(|error| {
            BenchError::Unparseable {
                name: f.name.clone(),
                error,
            }
        })?;
    }
    let options = ParseOptions {
        track_spans: config != ParserConfig::NoSpans,
    };
    let mut frames_ms = Vec::with_capacity(frames);
    for _ in 0..frames {
        let start = Instant::now();
        let mut sink = 0usize;
        for f in corpus {
            let tree = parse_with(&f.source, options).expect("corpus checked above");
            sink += match config {
                ParserConfig::ParsePrint => print_tree(&tree).len(),
                _ => tree.size(),
            };
        }
        std::hint::black_box(sink);
        frames_ms.push(start.elapsed().as_secs_f64() * 1000.0);
    }
    Ok(BenchRow::from_frames(config.name(), frames_ms))
}

/// Aligned text table: one row per parser, one column per frame, then the
/// average column.
pub fn render_table(rows: &[BenchRow]) -> String {
    let frames = rows.iter().map(|r| r.frames_ms.len()).max().unwrap_or(0);
    let mut header = vec!["Parser".to_string()];
    header.extend((1..=frames).map(|i| format!("Frame {i} (ms)")));
    header.push("Average (ms)".to_string());

    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.parser.clone()];
            cells.extend(r.frames_ms.iter().map(|v| format!("{v:.3}")));
            cells.resize(frames + 1, String::new());
            cells.push(format!("{:.3}", r.average_ms));
            cells
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            std::iter::once(&header)
                .chain(body.iter())
                .map(|row| row[c].len())
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    for row in std::iter::once(&header).chain(body.iter()) {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
