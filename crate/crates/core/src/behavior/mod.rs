//! Behavior labels, direction annotation, API statistics, control-flow
//! graphs and session clustering.

pub mod cfg;
pub mod cluster;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astdiff::{classify_edit, detect_revert, tree_edit_distance, EditClass};
use crate::jsparse::{parse_snapshot, Node, NodeKind, ParsedSnapshot, SyntaxTree};
use crate::model::{
    Behavior, BehaviorLabel, BehaviorSequence, DebugEvent, Direction, DirectionLabel,
    SessionRecord, Snapshot, SnapshotId,
};

pub use cfg::{cfg_diff, extract_cfg, named_functions, Cfg, CfgDelta, CfgEdge, CfgError, CfgNode, CfgNodeKind, EdgeLabel};
pub use cluster::{cluster_sessions, cluster_strings, levenshtein, ClusterError, Clustering, SessionCluster};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("session has no Save events")]
    EmptySession,
    #[error("snapshot {0} is not available")]
    MissingSnapshot(SnapshotId),
    #[error("reference solution does not parse: {0}")]
    ReferenceUnparseable(String),
}

/// Parses each distinct snapshot once.
struct Parsed<R> {
    resolve: R,
    cache: HashMap<SnapshotId, Rc<ParsedSnapshot>>,
}

impl<R: FnMut(&SnapshotId) -> Option<Snapshot>> Parsed<R> {
    fn new(resolve: R) -> Self {
        Parsed {
            resolve,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, id: &SnapshotId) -> Result<Rc<ParsedSnapshot>, AnalysisError> {
        if let Some(p) = self.cache.get(id) {
            return Ok(p.clone());
        }
        let snap = (self.resolve)(id).ok_or_else(|| AnalysisError::MissingSnapshot(id.clone()))?;
        let parsed = Rc::new(parse_snapshot(&snap));
        self.cache.insert(id.clone(), parsed.clone());
        Ok(parsed)
    }
}

fn save_snapshot(e: &DebugEvent) -> &SnapshotId {
    e.snapshot_id.as_ref().expect("Save events carry a snapshot")
}

/// Classes of the edit from `a` to `b`, both fully parsed. Files present on
/// one side only count as structural.
fn classify_snapshots(a: &ParsedSnapshot, b: &ParsedSnapshot) -> BTreeSet<EditClass> {
    let (ta, tb) = (a.trees().unwrap_or_default(), b.trees().unwrap_or_default());
    let mut classes = BTreeSet::new();
    for path in ta.keys().chain(tb.keys()).collect::<BTreeSet<_>>() {
        match (ta.get(path), tb.get(path)) {
            (Some(x), Some(y)) => {
                let r = tree_edit_distance(x, y);
                let c = classify_edit(&r.script, x, y).expect("script from the same trees");
                classes.extend(c.classes());
            }
            _ => {
                classes.insert(EditClass::StructuralChange);
            }
        }
    }
    classes
}

/// One label per consecutive pair of Save events.
pub fn label_sequence<R>(session: &SessionRecord, resolve: R) -> Result<BehaviorSequence, AnalysisError>
where
    R: FnMut(&SnapshotId) -> Option<Snapshot>,
{
    let saves: Vec<&DebugEvent> = session.saves().collect();
    if saves.is_empty() {
        return Err(AnalysisError::EmptySession);
    }
    let mut parsed = Parsed::new(resolve);
    let mut hashes: Vec<Option<String>> = Vec::with_capacity(saves.len());
    let mut labels = Vec::with_capacity(saves.len() - 1);
    let mut prev = parsed.get(save_snapshot(saves[0]))?;
    hashes.push(prev.structural_hash());
    for pair in saves.windows(2) {
        let cur = parsed.get(save_snapshot(pair[1]))?;
        let cur_hash = cur.structural_hash();
        let prev_hash = hashes.last().expect("pushed above").clone();
        let mut detail = None;
        let label = match (&prev_hash, &cur_hash) {
            (Some(p), Some(c)) if p == c => Behavior::NoChange,
            (Some(_), None) => {
                detail = cur.first_error().map(|(path, e)| format!("{path}: {e}"));
                Behavior::SyntaxBreak
            }
            (None, Some(_)) => Behavior::SyntaxFix,
            (None, None) => {
                if save_snapshot(pair[0]) == save_snapshot(pair[1]) {
                    Behavior::NoChange
                } else {
                    detail = cur.first_error().map(|(path, e)| format!("{path}: {e}"));
                    Behavior::SyntaxBreak
                }
            }
            (Some(_), Some(c)) => {
                let earlier: Vec<(usize, &str)> = hashes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, h)| h.as_deref().map(|h| (i, h)))
                    .collect();
                let only: Vec<&str> = earlier.iter().map(|(_, h)| *h).collect();
                if let Some(k) = detect_revert(&only, c) {
                    detail = Some(format!("restores event {}", saves[earlier[k].0].event_id));
                    Behavior::Revert
                } else {
                    let classes = classify_snapshots(&prev, &cur);
                    detail = Some(
                        classes
                            .iter()
                            .map(|c| format!("{c:?}"))
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                    if classes.contains(&EditClass::StructuralChange) {
                        Behavior::StructEdit
                    } else if classes.contains(&EditClass::ApiCalleeChange) {
                        Behavior::ApiChange
                    } else {
                        Behavior::ParamTweak
                    }
                }
            }
        };
        labels.push(BehaviorLabel {
            label,
            from_event_id: pair[0].event_id,
            to_event_id: pair[1].event_id,
            detail,
        });
        hashes.push(cur_hash);
        prev = cur;
    }
    Ok(BehaviorSequence {
        labels,
        directions: Vec::new(),
    })
}

/// Summed per-file tree edit distance; a file on one side only costs its
/// node count. `None` if either side has a file that failed to parse.
pub fn snapshot_distance(a: &ParsedSnapshot, b: &ParsedSnapshot) -> Option<(u64, bool)> {
    let (ta, tb) = (a.trees()?, b.trees()?);
    let mut total = 0u64;
    let mut approximate = false;
    for path in ta.keys().chain(tb.keys()).collect::<BTreeSet<_>>() {
        total += match (ta.get(path), tb.get(path)) {
            (Some(x), Some(y)) => {
                let r = tree_edit_distance(x, y);
                approximate |= r.approximate;
                r.distance as u64
            }
            (Some(t), None) | (None, Some(t)) => t.size() as u64,
            (None, None) => unreachable!(),
        };
    }
    Some((total, approximate))
}

/// Direction of each Save relative to the previous parseable Save, measured
/// as distance to `reference`.
pub fn annotate_direction<R>(
    session: &SessionRecord,
    resolve: R,
    reference: &Snapshot,
) -> Result<Vec<DirectionLabel>, AnalysisError>
where
    R: FnMut(&SnapshotId) -> Option<Snapshot>,
{
    let reference = parse_snapshot(reference);
    if let Some((path, e)) = reference.first_error() {
        return Err(AnalysisError::ReferenceUnparseable(format!("{path}: {e}")));
    }
    let mut parsed = Parsed::new(resolve);
    let mut distances: HashMap<SnapshotId, Option<(u64, bool)>> = HashMap::new();
    let mut previous: Option<u64> = None;
    let mut out = Vec::new();
    for save in session.saves() {
        let id = save_snapshot(save);
        let d = match distances.get(id) {
            Some(d) => *d,
            None => {
                let d = snapshot_distance(&*parsed.get(id)?, &reference);
                distances.insert(id.clone(), d);
                d
            }
        };
        let label = match d {
            None => DirectionLabel {
                direction: Direction::Unknown,
                event_id: save.event_id,
                distance_to_reference: None,
                approximate: false,
            },
            Some((dist, approximate)) => {
                let direction = match previous {
                    None => Direction::Neutral,
                    Some(p) if dist < p => Direction::Toward,
                    Some(p) if dist > p => Direction::Away,
                    Some(_) => Direction::Neutral,
                };
                previous = Some(dist);
                DirectionLabel {
                    direction,
                    event_id: save.event_id,
                    distance_to_reference: Some(dist),
                    approximate,
                }
            }
        };
        out.push(label);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiStats {
    pub counts: BTreeMap<String, u64>,
    pub total_calls: u64,
}

/// Dotted name of a callee made only of Member nodes over an Identifier.
pub fn callee_chain(callee: &Node) -> Option<(String, &str)> {
    let mut parts = Vec::new();
    let mut cur = callee;
    loop {
        match cur.kind {
            NodeKind::Member => {
                parts.push(cur.value_str());
                cur = cur.children.first()?;
            }
            NodeKind::Identifier => {
                let root = cur.value_str();
                parts.push(root);
                parts.reverse();
                return Some((parts.join("."), root));
            }
            _ => return None,
        }
    }
}

/// Counts calls whose callee is a member chain rooted at one of `prefixes`.
pub fn api_stats<'a, S: AsRef<str>>(
    trees: impl IntoIterator<Item = &'a SyntaxTree>,
    prefixes: &[S],
) -> ApiStats {
    let mut stats = ApiStats::default();
    for tree in trees {
        for node in tree.root.preorder() {
            if node.kind != NodeKind::Call {
                continue;
            }
            let Some(callee) = node.children.first() else { continue };
            if callee.kind != NodeKind::Member {
                continue;
            }
            if let Some((name, root)) = callee_chain(callee) {
                if prefixes.iter().any(|p| p.as_ref() == root) {
                    *stats.counts.entry(name).or_default() += 1;
                    stats.total_calls += 1;
                }
            }
        }
    }
    stats
}
