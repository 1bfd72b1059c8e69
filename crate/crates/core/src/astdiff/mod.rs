//! Tree edit distance, edit classification, revert detection and line
//! diffs.

pub mod classify;
pub mod script;
pub mod ted;

use serde::{Deserialize, Serialize};

pub use classify::{classify_edit, ClassifyError, EditClass, EditClassification};
pub use script::{ApplyError, EditOp, EditScript, Label, NodeRef};
pub use ted::{
    edit_distance_with_limit, exact_distance, greedy_distance, node_edit_distance,
    tree_edit_distance, TedResult, EXACT_LIMIT,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{LineDelta, Snapshot};

/// Index of the most recent history entry equal to `candidate`.
pub fn detect_revert<S: AsRef<str>>(history: &[S], candidate: &str) -> Option<usize> {
    history.iter().rposition(|h| h.as_ref() == candidate)
}

fn split_lines(bytes: &[u8]) -> Vec<&[u8]> {
    if bytes.is_empty() {
        return Vec::new();
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|b| *b == b'\n').collect()
}

/// Longest-common-subsequence line diff. Within each run of unmatched
/// lines, removals and additions pair up as changed lines.
pub fn line_diff(a: &[u8], b: &[u8]) -> LineDelta {
    let (la, lb) = (split_lines(a), split_lines(b));
    let (n, m) = (la.len(), lb.len());
    let mut t = vec![0u32; (n + 1) * (m + 1)];
    let w = m + 1;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i * w + j] = if la[i] == lb[j] {
                t[(i + 1) * w + j + 1] + 1
            } else {
                t[(i + 1) * w + j].max(t[i * w + j + 1])
            };
        }
    }
    let mut delta = LineDelta::default();
    let (mut removed, mut added) = (0usize, 0usize);
    let flush = |removed: &mut usize, added: &mut usize, d: &mut LineDelta| {
        let changed = (*removed).min(*added);
        d.changed += changed;
        d.removed += *removed - changed;
        d.added += *added - changed;
        *removed = 0;
        *added = 0;
    };
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && la[i] == lb[j] {
            flush(&mut removed, &mut added, &mut delta);
            i += 1;
            j += 1;
        } else if j == m || (i < n && t[(i + 1) * w + j] >= t[i * w + j + 1]) {
            removed += 1;
            i += 1;
        } else {
            added += 1;
            j += 1;
        }
    }
    flush(&mut removed, &mut added, &mut delta);
    delta
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDelta {
    pub path: String,
    pub delta: LineDelta,
}

/// Per-file line deltas over the union of both sides' paths; a file missing
/// on one side counts as empty there.
pub fn snapshot_line_diff(before: &Snapshot, after: &Snapshot) -> BTreeMap<String, LineDelta> {
    let paths: BTreeSet<&String> = before.files().keys().chain(after.files().keys()).collect();
    paths
        .into_iter()
        .map(|p| {
            let a = before.file(p).map_or(&[][..], |f| &f.bytes[..]);
            let b = after.file(p).map_or(&[][..], |f| &f.bytes[..]);
            (p.clone(), line_diff(a, b))
        })
        .collect()
}
