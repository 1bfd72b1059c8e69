use std::path::Path;

use debugscope_core::stats::{compute_stats, render_stats_table, GroupBy, StatsRow};

use crate::{load_questions, open_store, CliError, Result};

/// One row per group, computed from the session logs alone.
pub fn cmd_stats(root: &Path, by: GroupBy) -> Result<Vec<StatsRow>> {
    let store = open_store(root)?;
    let sessions = store.load_all_sessions().map_err(|source| CliError::StoreUnreadable {
        path: root.to_path_buf(),
        source,
    })?;
    let questions = load_questions(&store)?;
    Ok(compute_stats(&sessions, &questions, by))
}

pub fn render_text(rows: &[StatsRow]) -> String {
    render_stats_table(rows)
}

pub fn render_json(rows: &[StatsRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}
