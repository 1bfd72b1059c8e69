use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use debugscope_core::behavior::{cluster_sessions, Clustering};
use debugscope_core::{SessionId, SessionState};

use crate::{analysis_of, load_questions, open_store, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub seed: u64,
    /// Ended sessions with at least two saves.
    pub sessions_considered: usize,
    pub clustering: Clustering,
}

pub fn cmd_cluster(root: &Path, k: usize, seed: u64) -> Result<ClusterReport> {
    let store = open_store(root)?;
    let questions = load_questions(&store)?;
    let sessions = store.load_all_sessions().map_err(|source| CliError::StoreUnreadable {
        path: root.to_path_buf(),
        source,
    })?;
    let mut sequences = BTreeMap::new();
    for rec in sessions
        .iter()
        .filter(|r| r.state == SessionState::Ended && r.saves().count() >= 2)
    {
        if let Some(seq) = analysis_of(&store, rec, &questions)? {
            sequences.insert(rec.session_id.clone(), seq);
        }
    }
    let clustering = cluster_sessions(&sequences, k, seed)?;
    Ok(ClusterReport {
        k,
        seed,
        sessions_considered: sequences.len(),
        clustering,
    })
}

pub fn render_text(r: &ClusterReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "k={} seed={} sessions={} silhouette={:.4} cost={}",
        r.k, r.seed, r.sessions_considered, r.clustering.silhouette, r.clustering.total_cost
    );
    for c in &r.clustering.clusters {
        let members: Vec<&str> = c.member_session_ids.iter().map(SessionId::as_str).collect();
        let _ = writeln!(
            s,
            "cluster {}: medoid {} labels {:?} size {} mean distance {:.3}",
            c.cluster_id,
            c.medoid_session_id,
            c.medoid_labels,
            c.member_session_ids.len(),
            c.intra_mean_distance
        );
        let _ = writeln!(s, "  members: {}", members.join(" "));
    }
    s
}

pub fn render_json(r: &ClusterReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}
