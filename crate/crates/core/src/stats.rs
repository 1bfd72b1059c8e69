//! Per-group usage totals computed from session logs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{EventKind, Question, QuestionId, SessionMode, SessionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupBy {
    Question,
    QuestionKind,
}

impl std::str::FromStr for GroupBy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "question" => Ok(GroupBy::Question),
            "question-kind" => Ok(GroupBy::QuestionKind),
            other => Err(format!("unknown grouping {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub group: String,
    pub total_users: u64,
    pub total_sessions: u64,
    /// Compile events.
    pub total_debugs: u64,
    /// Compile events that succeeded.
    pub completions: u64,
    /// `total_debugs / completions`; absent when there are no completions.
    pub avg_debugs_per_completion: Option<f64>,
}

pub const RATIO_FOOTNOTE: &str =
    "avg = total debugs / completions; a debug is a compile, a completion is a successful compile";

/// Group label for sessions without a question.
pub const FREE_DEBUG_GROUP: &str = "free-debug";

fn group_of(
    session: &SessionRecord,
    questions: &BTreeMap<QuestionId, Question>,
    by: GroupBy,
) -> String {
    let Some(qid) = &session.question_id else {
        return match session.mode {
            SessionMode::Troubleshoot => "troubleshoot".to_string(),
            _ => FREE_DEBUG_GROUP.to_string(),
        };
    };
    match (by, questions.get(qid)) {
        (GroupBy::Question, Some(q)) => format!("{} {}", q.question_id, q.title),
        (GroupBy::Question, None) => qid.to_string(),
        (GroupBy::QuestionKind, Some(q)) => format!("{:?}", q.kind).to_lowercase(),
        (GroupBy::QuestionKind, None) => "unknown".to_string(),
    }
}

/// One row per group, ordered by group label.
pub fn compute_stats(
    sessions: &[SessionRecord],
    questions: &BTreeMap<QuestionId, Question>,
    by: GroupBy,
) -> Vec<StatsRow> {
    #[derive(Default)]
    struct Acc<'a> {
        users: BTreeSet<&'a str>,
        sessions: u64,
        debugs: u64,
        completions: u64,
    }
    let mut groups: BTreeMap<String, Acc> = BTreeMap::new();
    for s in sessions {
        let acc = groups.entry(group_of(s, questions, by)).or_default();
        acc.users.insert(s.user_id.as_str());
        acc.sessions += 1;
        for e in &s.events {
            if e.kind == EventKind::Compile {
                acc.debugs += 1;
                if e.compile_ok == Some(true) {
                    acc.completions += 1;
                }
            }
        }
    }
    groups
        .into_iter()
        .map(|(group, a)| StatsRow {
            group,
            total_users: a.users.len() as u64,
            total_sessions: a.sessions,
            total_debugs: a.debugs,
            completions: a.completions,
            avg_debugs_per_completion: (a.completions > 0)
                .then(|| a.debugs as f64 / a.completions as f64),
        })
        .collect()
}

/// Aligned text table with a formula footer. Averages print with two
/// decimals, or "-" when undefined.
pub fn render_stats_table(rows: &[StatsRow]) -> String {
    let header = ["Group", "Users", "Sessions", "Debugs", "Avg debugs", "Completions"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.group.clone(),
                r.total_users.to_string(),
                r.total_sessions.to_string(),
                r.total_debugs.to_string(),
                r.avg_debugs_per_completion
                    .map_or("-".to_string(), |v| format!("{v:.2}")),
                r.completions.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header_row = header.map(String::from);
    for row in std::iter::once(&header_row).chain(body.iter()) {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let pad = widths[i] - c.chars().count();
                if i == 0 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    let _ = writeln!(out, "\n{RATIO_FOOTNOTE}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DebugEvent, SessionHeader, SessionId, Timestamp, UserId};

    fn session(id: &str, user: &str, q: Option<&str>, compiles: &[bool]) -> SessionRecord {
        let mut s = SessionRecord::open(SessionHeader {
            session_id: SessionId::new(id),
            user_id: UserId::new(user),
            question_id: q.map(QuestionId::new),
            mode: if q.is_some() { SessionMode::Training } else { SessionMode::FreeDebug },
            source_ticket: None,
            initial_snapshot_id: None,
            started_at: Timestamp(0),
        });
        for (i, ok) in compiles.iter().enumerate() {
            s.push_event(DebugEvent {
                event_id: i as u64 + 1,
                kind: EventKind::Compile,
                snapshot_id: None,
                compile_ok: Some(*ok),
                error_log: None,
                at: Timestamp(i as i64),
            })
            .unwrap();
        }
        s
    }

    #[test]
    fn empty_store_gives_header_only() {
        let rows = compute_stats(&[], &BTreeMap::new(), GroupBy::Question);
        assert!(rows.is_empty());
        let table = render_stats_table(&rows);
        assert!(table.starts_with("Group"));
        assert_eq!(table.lines().next().unwrap().split_whitespace().count(), 7);
    }

    #[test]
    fn single_session_average() {
        let rows = compute_stats(
            &[session("s", "u", Some("q1"), &[false, false, true])],
            &BTreeMap::new(),
            GroupBy::Question,
        );
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].total_debugs, rows[0].completions), (3, 1));
        assert_eq!(rows[0].avg_debugs_per_completion, Some(3.0));
    }

    #[test]
    fn groups_and_undefined_ratio() {
        let sessions = [
            session("a", "u1", Some("q1"), &[true]),
            session("b", "u1", Some("q1"), &[false]),
            session("c", "u2", None, &[false]),
        ];
        let rows = compute_stats(&sessions, &BTreeMap::new(), GroupBy::Question);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].group, FREE_DEBUG_GROUP);
        assert_eq!(rows[0].avg_debugs_per_completion, None);
        assert_eq!((rows[1].total_users, rows[1].total_sessions), (1, 2));
        assert!(render_stats_table(&rows).contains(" - "));
    }
}
