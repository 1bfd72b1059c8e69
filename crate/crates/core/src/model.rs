//! Shared domain vocabulary: users, questions, sessions, snapshots, events
//! and the labels produced by analysis.
//!
//! Everything here is a plain value type. Mutation of persisted state goes
//! through [`crate::store`]; the only mutating helpers on these types are the
//! ones the store uses to replay a session log, and they enforce the session
//! state machine and event ordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("snapshot has no files")]
    EmptySnapshot,
    #[error("malformed snapshot encoding: {0}")]
    MalformedEncoding(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("event sequence gap: expected event_id {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("event timestamp {got} precedes previous timestamp {previous}")]
    TimeWentBackwards { previous: Timestamp, got: Timestamp },
    #[error("illegal session transition {from:?} -> {to:?}")]
    IllegalTransition { from: SessionState, to: SessionState },
}

/// Milliseconds since the Unix epoch, UTC.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn now() -> Self {
        let ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0);
        Timestamp(ms)
    }

    pub fn from_millis(ms: i64) -> Self {
        Timestamp(ms)
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn plus_millis(self, ms: i64) -> Self {
        Timestamp(self.0 + ms)
    }

    pub fn plus_secs(self, secs: i64) -> Self {
        Timestamp(self.0 + secs * 1000)
    }

    /// Whole seconds from `earlier` to `self`, floored at zero.
    pub fn secs_since(self, earlier: Timestamp) -> u64 {
        ((self.0 - earlier.0).max(0) / 1000) as u64
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

string_id!(UserId);
string_id!(QuestionId);
string_id!(SessionId);
string_id!(TicketId);
string_id!(
    /// Lowercase hex SHA-256 of a snapshot's canonical file-set encoding.
    SnapshotId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserRole {
    Student,
    TeachingAssistant,
    Teacher,
}

impl UserRole {
    pub fn can_ask_for_help(self) -> bool {
        true
    }

    /// Only teaching assistants hold the right to answer help tickets.
    pub fn can_answer(self) -> bool {
        matches!(self, UserRole::TeachingAssistant)
    }

    pub fn is_staff(self) -> bool {
        matches!(self, UserRole::TeachingAssistant | UserRole::Teacher)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub user_id: UserId,
    pub role: UserRole,
    /// Hex SHA-256 of the login secret.
    pub secret_sha256: String,
}

impl User {
    pub fn new(user_id: UserId, role: UserRole, secret: &str) -> Self {
        User {
            user_id,
            role,
            secret_sha256: hash_secret(secret),
        }
    }

    pub fn verify_secret(&self, secret: &str) -> bool {
        self.secret_sha256 == hash_secret(secret)
    }
}

fn hash_secret(secret: &str) -> String {
    hex::encode(Sha256::digest(secret.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthToken {
    /// 32 random bytes, hex encoded.
    pub token: String,
    pub user_id: UserId,
    pub issued_at: Timestamp,
    pub expires_at: Timestamp,
}

impl AuthToken {
    pub const LIFETIME_MS: i64 = 24 * 60 * 60 * 1000;

    pub fn is_expired(&self, now: Timestamp) -> bool {
        now >= self.expires_at
    }
}

// ---------------------------------------------------------------------------
// Snapshots

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    Logic,
    View,
    Style,
    Other,
}

impl Layer {
    pub fn from_path(path: &str) -> Layer {
        let ext = path
            .rsplit_once('.')
            .map(|(_, ext)| ext.to_ascii_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "js" => Layer::Logic,
            "wxml" => Layer::View,
            "wxss" => Layer::Style,
            _ => Layer::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub layer: Layer,
    pub bytes: Vec<u8>,
}

/// One captured multi-file code state. The id is derived from the content;
/// the capture instant lives on the Save event that references it, since two
/// saves of identical content share one snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    id: SnapshotId,
    files: BTreeMap<String, FileRecord>,
}

impl Snapshot {
    pub fn new<P, B, I>(files: I) -> Result<Snapshot, ModelError>
    where
        P: Into<String>,
        B: Into<Vec<u8>>,
        I: IntoIterator<Item = (P, B)>,
    {
        let files: BTreeMap<String, Vec<u8>> = files
            .into_iter()
            .map(|(p, b)| (p.into(), b.into()))
            .collect();
        let id = compute_snapshot_id(&files)?;
        let files = files
            .into_iter()
            .map(|(path, bytes)| {
                let layer = Layer::from_path(&path);
                (path, FileRecord { layer, bytes })
            })
            .collect();
        Ok(Snapshot { id, files })
    }

    pub fn id(&self) -> &SnapshotId {
        &self.id
    }

    pub fn files(&self) -> &BTreeMap<String, FileRecord> {
        &self.files
    }

    pub fn file(&self, path: &str) -> Option<&FileRecord> {
        self.files.get(path)
    }

    pub fn files_in(&self, layer: Layer) -> impl Iterator<Item = (&str, &[u8])> {
        self.files
            .iter()
            .filter(move |(_, f)| f.layer == layer)
            .map(|(p, f)| (p.as_str(), f.bytes.as_slice()))
    }

    pub fn to_file_map(&self) -> BTreeMap<String, Vec<u8>> {
        self.files
            .iter()
            .map(|(p, f)| (p.clone(), f.bytes.clone()))
            .collect()
    }

    /// The canonical encoding the id is computed over; also the blob format.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        encode_file_set(self.files.iter().map(|(p, f)| (p.as_str(), f.bytes.as_slice())))
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Snapshot, ModelError> {
        let mut files = BTreeMap::new();
        let mut rest = bytes;
        let take = |rest: &mut &[u8]| -> Result<Vec<u8>, ModelError> {
            if rest.len() < 8 {
                return Err(ModelError::MalformedEncoding("truncated length".into()));
            }
            let (len, tail) = rest.split_at(8);
            let len = u64::from_be_bytes(len.try_into().expect("8 bytes")) as usize;
            if tail.len() < len {
                return Err(ModelError::MalformedEncoding("truncated body".into()));
            }
            let (body, tail) = tail.split_at(len);
            *rest = tail;
            Ok(body.to_vec())
        };
        let mut previous: Option<String> = None;
        while !rest.is_empty() {
            let path = String::from_utf8(take(&mut rest)?)
                .map_err(|_| ModelError::MalformedEncoding("path is not utf-8".into()))?;
            let body = take(&mut rest)?;
            if previous.as_deref().is_some_and(|p| p >= path.as_str()) {
                return Err(ModelError::MalformedEncoding("paths not sorted".into()));
            }
            previous = Some(path.clone());
            files.insert(path, body);
        }
        Snapshot::new(files)
    }
}

fn encode_file_set<'a>(entries: impl Iterator<Item = (&'a str, &'a [u8])>) -> Vec<u8> {
    let mut out = Vec::new();
    for (path, bytes) in entries {
        out.extend_from_slice(&(path.len() as u64).to_be_bytes());
        out.extend_from_slice(path.as_bytes());
        out.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
        out.extend_from_slice(bytes);
    }
    out
}

/// SHA-256 over `len(path) ‖ path ‖ len(bytes) ‖ bytes` for every file in
/// byte-wise path order, lengths as 8-byte big-endian integers.
pub fn compute_snapshot_id<P, B>(files: &BTreeMap<P, B>) -> Result<SnapshotId, ModelError>
where
    P: AsRef<str> + Ord,
    B: AsRef<[u8]>,
{
    if files.is_empty() {
        return Err(ModelError::EmptySnapshot);
    }
    // BTreeMap<String,_> orders by byte value already, but P may not be String.
    let mut entries: Vec<(&str, &[u8])> = files
        .iter()
        .map(|(p, b)| (p.as_ref(), b.as_ref()))
        .collect();
    entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
    let encoded = encode_file_set(entries.into_iter());
    Ok(SnapshotId(hex::encode(Sha256::digest(&encoded))))
}

// ---------------------------------------------------------------------------
// Events and sessions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Save,
    Compile,
    Run,
    Help,
    Reset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebugEvent {
    pub event_id: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_id: Option<SnapshotId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_log: Option<String>,
    pub at: Timestamp,
}

impl DebugEvent {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.kind == EventKind::Save && self.snapshot_id.is_none() {
            return Err(ModelError::InvalidEvent("Save event without snapshot".into()));
        }
        if (self.kind == EventKind::Compile) != self.compile_ok.is_some() {
            return Err(ModelError::InvalidEvent(
                "compile_ok must be present exactly on Compile events".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionMode {
    Training,
    Rank,
    FreeDebug,
    Troubleshoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionState {
    Active,
    TimedOut,
    Ended,
}

impl SessionState {
    pub fn can_transition_to(self, to: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, to),
            (Active, TimedOut) | (Active, Ended) | (TimedOut, Active) | (TimedOut, Ended)
        )
    }
}

/// Immutable facts recorded when a session is opened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: SessionId,
    pub user_id: UserId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<QuestionId>,
    pub mode: SessionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_ticket: Option<TicketId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_snapshot_id: Option<SnapshotId>,
    pub started_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: SessionId,
    pub user_id: UserId,
    pub question_id: Option<QuestionId>,
    pub mode: SessionMode,
    pub state: SessionState,
    pub source_ticket: Option<TicketId>,
    pub initial_snapshot_id: Option<SnapshotId>,
    pub events: Vec<DebugEvent>,
    pub started_at: Timestamp,
    pub last_activity_at: Timestamp,
    pub ended_at: Option<Timestamp>,
    /// Whether the user reported the exercise solved when ending the session.
    pub completed: Option<bool>,
    pub debug_count: u64,
    /// End-of-session analysis, once computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<BehaviorSequence>,
}

impl SessionRecord {
    pub fn open(header: SessionHeader) -> Self {
        SessionRecord {
            session_id: header.session_id,
            user_id: header.user_id,
            question_id: header.question_id,
            mode: header.mode,
            state: SessionState::Active,
            source_ticket: header.source_ticket,
            initial_snapshot_id: header.initial_snapshot_id,
            events: Vec::new(),
            started_at: header.started_at,
            last_activity_at: header.started_at,
            ended_at: None,
            completed: None,
            debug_count: 0,
            analysis: None,
        }
    }

    pub fn header(&self) -> SessionHeader {
        SessionHeader {
            session_id: self.session_id.clone(),
            user_id: self.user_id.clone(),
            question_id: self.question_id.clone(),
            mode: self.mode,
            source_ticket: self.source_ticket.clone(),
            initial_snapshot_id: self.initial_snapshot_id.clone(),
            started_at: self.started_at,
        }
    }

    pub fn next_event_id(&self) -> u64 {
        self.events.last().map_or(1, |e| e.event_id + 1)
    }

    /// Checks that `event` may be appended, without mutating.
    pub fn check_event(&self, event: &DebugEvent) -> Result<(), ModelError> {
        event.validate()?;
        let expected = self.next_event_id();
        if event.event_id != expected {
            return Err(ModelError::SequenceGap {
                expected,
                got: event.event_id,
            });
        }
        if let Some(last) = self.events.last() {
            if event.at < last.at {
                return Err(ModelError::TimeWentBackwards {
                    previous: last.at,
                    got: event.at,
                });
            }
        }
        Ok(())
    }

    pub fn push_event(&mut self, event: DebugEvent) -> Result<(), ModelError> {
        self.check_event(&event)?;
        if event.kind == EventKind::Compile {
            self.debug_count += 1;
        }
        self.last_activity_at = self.last_activity_at.max(event.at);
        self.events.push(event);
        Ok(())
    }

    pub fn transition(
        &mut self,
        to: SessionState,
        at: Timestamp,
        completed: Option<bool>,
    ) -> Result<(), ModelError> {
        if !self.state.can_transition_to(to) {
            return Err(ModelError::IllegalTransition {
                from: self.state,
                to,
            });
        }
        match to {
            // Resuming counts as activity, otherwise the next sweep would
            // immediately time the session out again.
            SessionState::Active => self.last_activity_at = self.last_activity_at.max(at),
            SessionState::Ended => {
                self.ended_at = Some(at);
                self.completed = Some(completed.unwrap_or(false));
            }
            SessionState::TimedOut => {}
        }
        self.state = to;
        Ok(())
    }

    pub fn saves(&self) -> impl Iterator<Item = &DebugEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Save)
    }

    pub fn latest_save(&self) -> Option<&DebugEvent> {
        self.events.iter().rev().find(|e| e.kind == EventKind::Save)
    }

    pub fn elapsed_secs(&self) -> u64 {
        self.ended_at
            .unwrap_or(self.last_activity_at)
            .secs_since(self.started_at)
    }
}

// ---------------------------------------------------------------------------
// Questions and help tickets

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestionKind {
    Practice,
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorClass {
    ParameterError,
    AttributeError,
    SyntaxError,
    FunctionalError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: QuestionId,
    pub kind: QuestionKind,
    pub author_id: UserId,
    pub title: String,
    pub initial_snapshot_id: SnapshotId,
    pub reference_snapshot_id: Option<SnapshotId>,
    pub error_classes: BTreeSet<ErrorClass>,
    pub difficulty: u8,
    pub published: bool,
    /// Leaderboard recording for Rank-mode sessions.
    #[serde(default)]
    pub rank_enabled: bool,
}

impl Question {
    pub fn may_publish(kind: QuestionKind, role: UserRole) -> bool {
        match kind {
            QuestionKind::Practice => true,
            QuestionKind::Acceptance => role.is_staff(),
        }
    }
}

/// Per-file line delta between two versions of a file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDelta {
    pub added: usize,
    pub removed: usize,
    pub changed: usize,
}

impl LineDelta {
    pub fn is_zero(&self) -> bool {
        self.added == 0 && self.removed == 0 && self.changed == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TicketStatus {
    Open,
    Answered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TicketAnswer {
    pub answerer_id: UserId,
    pub explanation: String,
    pub answer_snapshot_id: SnapshotId,
    pub changed_file_diff: BTreeMap<String, LineDelta>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpTicket {
    pub ticket_id: TicketId,
    pub session_id: SessionId,
    pub question_id: Option<QuestionId>,
    pub asker_id: UserId,
    pub form_text: String,
    pub snapshot_id: SnapshotId,
    pub status: TicketStatus,
    pub answer: Option<TicketAnswer>,
}

// ---------------------------------------------------------------------------
// Analysis labels

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Behavior {
    NoChange,
    ParamTweak,
    ApiChange,
    StructEdit,
    Revert,
    SyntaxBreak,
    SyntaxFix,
}

impl Behavior {
    pub const ALL: [Behavior; 7] = [
        Behavior::NoChange,
        Behavior::ParamTweak,
        Behavior::ApiChange,
        Behavior::StructEdit,
        Behavior::Revert,
        Behavior::SyntaxBreak,
        Behavior::SyntaxFix,
    ];

    /// One-letter alphabet used for sequence distances.
    pub fn symbol(self) -> char {
        match self {
            Behavior::NoChange => 'N',
            Behavior::ParamTweak => 'P',
            Behavior::ApiChange => 'A',
            Behavior::StructEdit => 'S',
            Behavior::Revert => 'R',
            Behavior::SyntaxBreak => 'B',
            Behavior::SyntaxFix => 'F',
        }
    }

    pub fn from_symbol(c: char) -> Option<Behavior> {
        Behavior::ALL.into_iter().find(|b| b.symbol() == c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorLabel {
    pub label: Behavior,
    pub from_event_id: u64,
    pub to_event_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Toward,
    Away,
    Neutral,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionLabel {
    pub direction: Direction,
    pub event_id: u64,
    /// Absent exactly when the direction is Unknown.
    pub distance_to_reference: Option<u64>,
    /// Set when any per-file distance came from the greedy matcher.
    #[serde(default)]
    pub approximate: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSequence {
    pub labels: Vec<BehaviorLabel>,
    #[serde(default)]
    pub directions: Vec<DirectionLabel>,
}

impl BehaviorSequence {
    pub fn label_string(&self) -> String {
        self.labels.iter().map(|l| l.label.symbol()).collect()
    }
}
