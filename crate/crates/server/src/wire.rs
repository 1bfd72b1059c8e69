//! JSON bodies of the HTTP protocol. Snapshots travel as `{path: base64}`.

use std::collections::{BTreeMap, BTreeSet};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use debugscope_core::{
    BehaviorSequence, ErrorClass, EventKind, ModelError, Question, QuestionId, QuestionKind, SessionId,
    SessionMode, SessionState, Snapshot, SnapshotId, TicketId, Timestamp, UserId, UserRole,
};

pub type WireFiles = BTreeMap<String, String>;

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("file {path}: invalid base64: {message}")]
    Base64 { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn decode_snapshot(files: &WireFiles) -> Result<Snapshot, WireError> {
    let mut decoded = BTreeMap::new();
    for (path, b64) in files {
        let bytes = STANDARD.decode(b64).map_err(|e| WireError::Base64 {
            path: path.clone(),
            message: e.to_string(),
        })?;
        decoded.insert(path.clone(), bytes);
    }
    Ok(Snapshot::new(decoded)?)
}

pub fn encode_snapshot(snapshot: &Snapshot) -> WireFiles {
    snapshot
        .files()
        .iter()
        .map(|(p, f)| (p.clone(), STANDARD.encode(&f.bytes)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotBody {
    pub snapshot_id: SnapshotId,
    pub files: WireFiles,
}

impl SnapshotBody {
    pub fn of(snapshot: &Snapshot) -> SnapshotBody {
        SnapshotBody {
            snapshot_id: snapshot.id().clone(),
            files: encode_snapshot(snapshot),
        }
    }

    pub fn decode(&self) -> Result<Snapshot, WireError> {
        decode_snapshot(&self.files)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<SessionId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoginRequest {
    pub user_id: UserId,
    pub secret: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub user_id: UserId,
    pub role: UserRole,
    pub expires_at: Timestamp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionDraft {
    pub kind: QuestionKind,
    pub title: String,
    pub initial_snapshot: WireFiles,
    #[serde(default)]
    pub reference_snapshot: Option<WireFiles>,
    #[serde(default)]
    pub error_classes: BTreeSet<ErrorClass>,
    #[serde(default = "default_difficulty")]
    pub difficulty: u8,
    #[serde(default = "yes")]
    pub publish: bool,
    #[serde(default)]
    pub rank_enabled: bool,
}

fn default_difficulty() -> u8 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionCreated {
    pub question_id: QuestionId,
}

/// A question as shown to a caller; the reference snapshot id is withheld
/// from students other than the author.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionView {
    pub question_id: QuestionId,
    pub kind: QuestionKind,
    pub author_id: UserId,
    pub title: String,
    pub initial_snapshot_id: SnapshotId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_snapshot_id: Option<SnapshotId>,
    pub error_classes: BTreeSet<ErrorClass>,
    pub difficulty: u8,
    pub published: bool,
    pub rank_enabled: bool,
}

impl QuestionView {
    pub fn of(q: &Question, show_reference: bool) -> QuestionView {
        QuestionView {
            question_id: q.question_id.clone(),
            kind: q.kind,
            author_id: q.author_id.clone(),
            title: q.title.clone(),
            initial_snapshot_id: q.initial_snapshot_id.clone(),
            reference_snapshot_id: q.reference_snapshot_id.clone().filter(|_| show_reference),
            error_classes: q.error_classes.clone(),
            difficulty: q.difficulty,
            published: q.published,
            rank_enabled: q.rank_enabled,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartSessionRequest {
    #[serde(default)]
    pub question_id: Option<QuestionId>,
    pub mode: SessionMode,
    /// Troubleshoot and FreeDebug sessions may start from a ticket's snapshot.
    #[serde(default)]
    pub ticket_id: Option<TicketId>,
    /// FreeDebug sessions may start from local code.
    #[serde(default)]
    pub snapshot: Option<WireFiles>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionStarted {
    pub session_id: SessionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<SnapshotBody>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ResumeRequest {
    #[serde(default)]
    pub question_id: Option<QuestionId>,
    #[serde(default)]
    pub ticket_id: Option<TicketId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionResumed {
    pub session_id: SessionId,
    pub next_event_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<SnapshotBody>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventRequest {
    pub kind: EventKind,
    #[serde(default)]
    pub snapshot: Option<WireFiles>,
    #[serde(default)]
    pub compile_ok: Option<bool>,
    #[serde(default)]
    pub error_log: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventRecorded {
    pub event_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_id: Option<SnapshotId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndRequest {
    #[serde(default)]
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: SessionId,
    pub state: SessionState,
    pub debug_count: u64,
    pub elapsed_seconds: u64,
    /// One symbol per behavior label.
    pub labels: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<BehaviorSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub user_id: UserId,
    pub session_id: SessionId,
    pub debug_count: u64,
    pub elapsed_seconds: u64,
    pub completed_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub question_id: QuestionId,
    pub entries: Vec<LeaderboardEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TicketRequest {
    pub session_id: SessionId,
    pub form_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TicketCreated {
    pub ticket_id: TicketId,
    pub snapshot_id: SnapshotId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub explanation: String,
    pub answer_snapshot: WireFiles,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRequest {
    pub snapshot: WireFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileProblem {
    pub path: String,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// Parse check of a snapshot's Logic and View files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub ok: bool,
    pub problems: Vec<FileProblem>,
    /// Ready to send as a Compile event's `error_log`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_log: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_roundtrip() {
        let s = Snapshot::new([("a.js", b"var a;\n".to_vec()), ("b.png", vec![0, 255, 1])]).unwrap();
        let body = SnapshotBody::of(&s);
        assert_eq!(body.files["b.png"], "AP8B");
        assert_eq!(body.decode().unwrap(), s);
        let bad: WireFiles = [("a.js".to_string(), "!!".to_string())].into();
        assert!(matches!(decode_snapshot(&bad), Err(WireError::Base64 { .. })));
        assert!(matches!(decode_snapshot(&WireFiles::new()), Err(WireError::Model(_))));
    }
}
