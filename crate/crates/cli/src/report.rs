//! End-of-session analysis document: labels, directions, per-file line
//! deltas, platform API usage and control-flow changes per function.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use debugscope_core::astdiff::snapshot_line_diff;
use debugscope_core::behavior::{api_stats, cfg_diff, extract_cfg, named_functions, ApiStats, CfgDelta};
use debugscope_core::jsparse::parse_snapshot;
use debugscope_core::{
    BehaviorLabel, DirectionLabel, LineDelta, QuestionId, SessionId, SessionMode, SessionState, Snapshot,
    SnapshotId,
};

use crate::{analysis_of, load_questions, load_session, open_store, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionCfgDiff {
    pub path: String,
    pub function: String,
    pub delta: CfgDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session_id: SessionId,
    pub question_id: Option<QuestionId>,
    pub mode: SessionMode,
    pub state: SessionState,
    pub debug_count: u64,
    pub elapsed_seconds: u64,
    pub label_string: String,
    pub labels: Vec<BehaviorLabel>,
    pub directions: Vec<DirectionLabel>,
    pub initial_snapshot_id: Option<SnapshotId>,
    pub final_snapshot_id: Option<SnapshotId>,
    /// Final snapshot against the initial one.
    pub file_diffs: BTreeMap<String, LineDelta>,
    /// Calls in the final snapshot's parseable Logic files.
    pub api_stats: ApiStats,
    /// Logic files of the final snapshot that did not parse.
    pub unparseable_files: Vec<String>,
    pub cfg_diffs: Vec<FunctionCfgDiff>,
}

pub fn cmd_session_report(root: &Path, session_id: &SessionId, api_prefixes: &[String]) -> Result<SessionReport> {
    let store = open_store(root)?;
    let rec = load_session(&store, session_id)?;
    if rec.state != SessionState::Ended {
        return Err(CliError::SessionNotEnded {
            id: rec.session_id.clone(),
            state: rec.state,
        });
    }
    let questions = load_questions(&store)?;
    let analysis = analysis_of(&store, &rec, &questions)?.unwrap_or_default();
    let get = |id: &SnapshotId| {
        store.get_snapshot(id).map_err(|source| CliError::StoreUnreadable {
            path: root.to_path_buf(),
            source,
        })
    };
    let first_save = rec.saves().next().and_then(|e| e.snapshot_id.clone());
    let initial_id = rec.initial_snapshot_id.clone().or(first_save);
    let final_id = rec
        .latest_save()
        .and_then(|e| e.snapshot_id.clone())
        .or_else(|| initial_id.clone());
    let initial = initial_id.as_ref().map(get).transpose()?;
    let fin = final_id.as_ref().map(get).transpose()?;
    let (file_diffs, api, unparseable, cfg_diffs) = match (&initial, &fin) {
        (Some(i), Some(f)) => compare(i, f, api_prefixes),
        _ => Default::default(),
    };
    Ok(SessionReport {
        session_id: rec.session_id.clone(),
        question_id: rec.question_id.clone(),
        mode: rec.mode,
        state: rec.state,
        debug_count: rec.debug_count,
        elapsed_seconds: rec.elapsed_secs(),
        label_string: analysis.label_string(),
        labels: analysis.labels,
        directions: analysis.directions,
        initial_snapshot_id: initial_id,
        final_snapshot_id: final_id,
        file_diffs,
        api_stats: api,
        unparseable_files: unparseable,
        cfg_diffs,
    })
}

type Comparison = (BTreeMap<String, LineDelta>, ApiStats, Vec<String>, Vec<FunctionCfgDiff>);

fn compare(initial: &Snapshot, fin: &Snapshot, api_prefixes: &[String]) -> Comparison {
    let diffs = snapshot_line_diff(initial, fin);
    let (pi, pf) = (parse_snapshot(initial), parse_snapshot(fin));
    let api = api_stats(pf.logic.values().filter_map(|r| r.as_ref().ok()), api_prefixes);
    let unparseable = pf
        .logic
        .iter()
        .filter(|(_, r)| r.is_err())
        .map(|(p, _)| p.clone())
        .collect();

    let mut cfgs = Vec::new();
    for (path, after) in &pf.logic {
        let (Some(Ok(before)), Ok(after)) = (pi.logic.get(path), after) else {
            continue;
        };
        // First definition wins when a name repeats.
        let mut old = BTreeMap::new();
        for (name, f) in named_functions(before) {
            old.entry(name).or_insert(f);
        }
        let mut seen = std::collections::BTreeSet::new();
        for (name, f) in named_functions(after) {
            if !seen.insert(name.clone()) {
                continue;
            }
            let Some(g) = old.get(&name) else { continue };
            if let (Ok(a), Ok(b)) = (extract_cfg(g), extract_cfg(f)) {
                cfgs.push(FunctionCfgDiff {
                    path: path.clone(),
                    function: name,
                    delta: cfg_diff(&a, &b),
                });
            }
        }
    }
    (diffs, api, unparseable, cfgs)
}

pub fn render_text(r: &SessionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "session {}", r.session_id);
    if let Some(q) = &r.question_id {
        let _ = writeln!(s, "question {q}");
    }
    let _ = writeln!(
        s,
        "mode {:?}  state {:?}  debugs {}  elapsed {}s",
        r.mode, r.state, r.debug_count, r.elapsed_seconds
    );

    let _ = writeln!(s, "\nbehavior labels: {}", if r.label_string.is_empty() { "(none)" } else { &r.label_string });
    for l in &r.labels {
        let detail = l.detail.as_deref().map(|d| format!("  {d}")).unwrap_or_default();
        let _ = writeln!(s, "  #{} -> #{}  {:?}{detail}", l.from_event_id, l.to_event_id, l.label);
    }

    if !r.directions.is_empty() {
        let _ = writeln!(s, "\ndirections:");
        for d in &r.directions {
            let dist = d
                .distance_to_reference
                .map_or("unknown".to_string(), |v| v.to_string());
            let approx = if d.approximate { " (approximate)" } else { "" };
            let _ = writeln!(s, "  #{}  {:?}  distance {dist}{approx}", d.event_id, d.direction);
        }
    }

    let _ = writeln!(s, "\nfile changes (final vs initial):");
    let changed: Vec<_> = r.file_diffs.iter().filter(|(_, d)| !d.is_zero()).collect();
    if changed.is_empty() {
        let _ = writeln!(s, "  (none)");
    }
    for (p, d) in changed {
        let _ = writeln!(s, "  {p}  +{} -{} ~{}", d.added, d.removed, d.changed);
    }

    let _ = writeln!(s, "\nplatform API calls in final code: {}", r.api_stats.total_calls);
    for (name, n) in &r.api_stats.counts {
        let _ = writeln!(s, "  {name}  {n}");
    }
    if !r.unparseable_files.is_empty() {
        let _ = writeln!(s, "  not counted, parse failed: {}", r.unparseable_files.join(", "));
    }

    let _ = writeln!(s, "\ncontrol flow changes:");
    if r.cfg_diffs.is_empty() {
        let _ = writeln!(s, "  (no functions to compare)");
    }
    for c in &r.cfg_diffs {
        let d = &c.delta;
        if d.is_zero() {
            let _ = writeln!(s, "  {}:{}  unchanged", c.path, c.function);
            continue;
        }
        let _ = writeln!(
            s,
            "  {}:{}  nodes {:+} edges {:+} loops +{} -{}{}",
            c.path,
            c.function,
            d.node_count_delta,
            d.edge_count_delta,
            d.added_loops,
            d.removed_loops,
            if d.structure_changed { " reshaped" } else { "" }
        );
        for (a, b) in &d.changed_branch_conditions {
            let _ = writeln!(s, "    condition {a:?} -> {b:?}");
        }
    }
    s
}

pub fn render_json(r: &SessionReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}
