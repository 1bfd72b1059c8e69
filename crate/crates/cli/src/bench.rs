use std::path::Path;

use debugscope_core::jsparse::bench::{bench_parse, render_table, BenchError, BenchRow, CorpusFile, ParserConfig};

use crate::{CliError, Result};

/// `*.js` files directly inside `dir`, sorted by name.
pub fn read_corpus(dir: &Path) -> Result<Vec<CorpusFile>> {
    let io = |source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "js") && path.is_file() {
            let source = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            files.push(CorpusFile { name, source });
        }
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(files)
}

/// One row per parser configuration.
pub fn cmd_bench(dir: &Path, frames: usize) -> Result<Vec<BenchRow>> {
    let corpus = read_corpus(dir)?;
    if corpus.is_empty() {
        return Err(BenchError::EmptyCorpus.into());
    }
    ParserConfig::ALL
        .iter()
        .map(|c| bench_parse(&corpus, frames, *c).map_err(CliError::from))
        .collect()
}

pub fn render_text(rows: &[BenchRow]) -> String {
    render_table(rows)
}

pub fn render_json(rows: &[BenchRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}
