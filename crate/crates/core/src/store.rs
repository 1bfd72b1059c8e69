//! File-backed persistence.
//!
//! Layout under the root directory:
//!
//! ```text
//! meta/version                 "1"
//! blobs/<2 hex>/<digest>       canonical snapshot encoding
//! sessions/<session_id>.log    append-only session log
//! records/users.db             append-only record files, last write wins
//! records/questions.db
//! records/tickets.db
//! records/tokens.db
//! ```
//!
//! Logs and record files share one framing: every record is a single line
//! `LLLLLLLL <json>\n` where `LLLLLLLL` is the JSON byte length as eight
//! lowercase hex digits. A final line without its newline is a torn write
//! and is truncated when the store is opened; any other malformed line is
//! corruption.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    AuthToken, BehaviorSequence, DebugEvent, HelpTicket, ModelError, Question, SessionHeader,
    SessionId, SessionRecord, SessionState, Snapshot, SnapshotId, Timestamp, User,
};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("blob {0} does not match its digest")]
    CorruptBlob(SnapshotId),
    #[error("{file}: line {line}: {reason}")]
    CorruptLog {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("event id {got} does not follow {expected}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("invalid event: {0}")]
    InvalidEvent(ModelError),
    #[error("session {0} already exists")]
    SessionExists(SessionId),
    #[error("invalid identifier {0:?}")]
    InvalidId(String),
    #[error("unsupported store format version {0:?}")]
    UnsupportedVersion(String),
    #[error("injected write fault")]
    InjectedFault,
    #[error("store at {0} is not initialized")]
    Missing(PathBuf),
    #[error("store was opened read-only")]
    ReadOnly,
}

pub type Result<T> = std::result::Result<T, StoreError>;

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Open(SessionHeader),
    Event(DebugEvent),
    State {
        state: SessionState,
        at: Timestamp,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        completed: Option<bool>,
    },
    Analysis(BehaviorSequence),
}

/// Records kept in the `.db` files, keyed for last-write-wins reads.
pub trait Keyed: Serialize + DeserializeOwned {
    const FILE: &'static str;
    fn key(&self) -> String;
}

impl Keyed for User {
    const FILE: &'static str = "users.db";
    fn key(&self) -> String {
        self.user_id.0.clone()
    }
}

impl Keyed for Question {
    const FILE: &'static str = "questions.db";
    fn key(&self) -> String {
        self.question_id.0.clone()
    }
}

impl Keyed for HelpTicket {
    const FILE: &'static str = "tickets.db";
    fn key(&self) -> String {
        self.ticket_id.0.clone()
    }
}

impl Keyed for AuthToken {
    const FILE: &'static str = "tokens.db";
    fn key(&self) -> String {
        self.token.clone()
    }
}

pub fn frame(json: &str) -> String {
    format!("{:08x} {}\n", json.len(), json)
}

/// Splits framed bytes into payloads. Returns the payloads and the length
/// of the valid prefix; bytes after it are a torn final line.
pub fn read_frames<'a>(file: &str, bytes: &'a [u8]) -> Result<(Vec<&'a str>, usize)> {
    let mut out = Vec::new();
    let mut pos = 0;
    let mut line = 0;
    while pos < bytes.len() {
        line += 1;
        let Some(nl) = bytes[pos..].iter().position(|b| *b == b'\n') else {
            break;
        };
        let raw = &bytes[pos..pos + nl];
        let corrupt = |reason: &str| StoreError::CorruptLog {
            file: file.to_string(),
            line,
            reason: reason.to_string(),
        };
        if raw.len() < 9 || raw[8] != b' ' {
            return Err(corrupt("missing length prefix"));
        }
        let len = std::str::from_utf8(&raw[..8])
            .ok()
            .and_then(|h| usize::from_str_radix(h, 16).ok())
            .ok_or_else(|| corrupt("bad length prefix"))?;
        let body = &raw[9..];
        if body.len() != len {
            return Err(corrupt("length prefix does not match record"));
        }
        out.push(std::str::from_utf8(body).map_err(|_| corrupt("record is not UTF-8"))?);
        pos += nl + 1;
    }
    Ok((out, pos))
}

/// Rebuilds a session from its log bytes, ignoring a torn final line.
pub fn replay_log(name: &str, bytes: &[u8]) -> Result<SessionRecord> {
    let (frames, _) = read_frames(name, bytes)?;
    let corrupt = |line: usize, reason: String| StoreError::CorruptLog {
        file: name.to_string(),
        line,
        reason,
    };
    let mut record: Option<SessionRecord> = None;
    for (i, payload) in frames.into_iter().enumerate() {
        let rec: LogRecord =
            serde_json::from_str(payload).map_err(|e| corrupt(i + 1, e.to_string()))?;
        match (rec, record.as_mut()) {
            (LogRecord::Open(h), None) => record = Some(SessionRecord::open(h)),
            (LogRecord::Open(_), Some(_)) => return Err(corrupt(i + 1, "second open record".into())),
            (_, None) => return Err(corrupt(i + 1, "log does not start with an open record".into())),
            (LogRecord::Event(e), Some(r)) => {
                r.push_event(e).map_err(|e| corrupt(i + 1, e.to_string()))?
            }
            (LogRecord::State { state, at, completed }, Some(r)) => r
                .transition(state, at, completed)
                .map_err(|e| corrupt(i + 1, e.to_string()))?,
            (LogRecord::Analysis(a), Some(r)) => r.analysis = Some(a),
        }
    }
    record.ok_or_else(|| corrupt(0, "empty log".into()))
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StoreOptions {
    /// fsync after every write.
    pub durable: bool,
}

impl Default for StoreOptions {
    fn default() -> Self {
        StoreOptions { durable: true }
    }
}

#[cfg(feature = "fault-injection")]
#[derive(Debug, Clone, Copy)]
pub struct FaultPlan {
    /// Writes that complete normally before the faulty one.
    pub writes_before_fault: u64,
    /// Fraction of the faulty write's bytes that reach the file.
    pub partial_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Tail {
    last_event_id: u64,
    last_at: Timestamp,
}

pub struct Store {
    root: PathBuf,
    options: StoreOptions,
    tails: Mutex<HashMap<SessionId, Tail>>,
    records_lock: Mutex<()>,
    temp_counter: AtomicU64,
    read_only: bool,
    #[cfg(feature = "fault-injection")]
    fault: Mutex<FaultState>,
}

#[cfg(feature = "fault-injection")]
#[derive(Default)]
struct FaultState {
    plan: Option<FaultPlan>,
    writes: u64,
    dead: bool,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("root", &self.root).finish()
    }
}

impl Store {
    pub fn open(root: impl AsRef<Path>) -> Result<Store> {
        Store::open_with(root, StoreOptions::default())
    }

    /// Opens or initializes the store, then truncates torn trailing lines and
    /// removes leftover temporary blob files.
    pub fn open_with(root: impl AsRef<Path>, options: StoreOptions) -> Result<Store> {
        let root = root.as_ref().to_path_buf();
        let version_path = root.join("meta").join("version");
        match fs::read_to_string(&version_path) {
            Ok(v) if v.trim() == FORMAT_VERSION => {}
            Ok(v) => return Err(StoreError::UnsupportedVersion(v.trim().to_string())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                for d in ["meta", "blobs", "sessions", "records"] {
                    fs::create_dir_all(root.join(d))?;
                }
                fs::write(&version_path, FORMAT_VERSION)?;
            }
            Err(e) => return Err(e.into()),
        }
        for d in ["blobs", "sessions", "records"] {
            fs::create_dir_all(root.join(d))?;
        }
        let store = Store {
            root,
            options,
            tails: Mutex::new(HashMap::new()),
            records_lock: Mutex::new(()),
            temp_counter: AtomicU64::new(0),
            read_only: false,
            #[cfg(feature = "fault-injection")]
            fault: Mutex::new(FaultState::default()),
        };
        store.recover()?;
        Ok(store)
    }

    /// Opens an existing store for reading while a server may still be
    /// writing to it: nothing is created, truncated or removed, and torn
    /// trailing lines are skipped when read. Every write returns `ReadOnly`.
    pub fn open_read_only(root: impl AsRef<Path>) -> Result<Store> {
        Store::open_existing(root.as_ref(), true)
    }

    /// Opens an existing store for small record writes next to a running
    /// server, skipping crash recovery so in-flight appends are left alone.
    pub fn attach(root: impl AsRef<Path>) -> Result<Store> {
        Store::open_existing(root.as_ref(), false)
    }

    fn open_existing(root: &Path, read_only: bool) -> Result<Store> {
        match fs::read_to_string(root.join("meta").join("version")) {
            Ok(v) if v.trim() == FORMAT_VERSION => {}
            Ok(v) => return Err(StoreError::UnsupportedVersion(v.trim().to_string())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::Missing(root.to_path_buf())),
            Err(e) => return Err(e.into()),
        }
        Ok(Store {
            root: root.to_path_buf(),
            options: StoreOptions::default(),
            tails: Mutex::new(HashMap::new()),
            records_lock: Mutex::new(()),
            temp_counter: AtomicU64::new(0),
            read_only,
            #[cfg(feature = "fault-injection")]
            fault: Mutex::new(FaultState::default()),
        })
    }

    fn writable(&self) -> Result<()> {
        if self.read_only {
            return Err(StoreError::ReadOnly);
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn recover(&self) -> Result<()> {
        for dir in ["sessions", "records"] {
            for entry in fs::read_dir(self.root.join(dir))? {
                let path = entry?.path();
                if path.is_file() && truncate_torn_tail(&path)? == 0 && dir == "sessions" {
                    fs::remove_file(&path)?;
                }
            }
        }
        for entry in fs::read_dir(self.root.join("blobs"))? {
            let path = entry?.path();
            let is_temp = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(".tmp-"));
            if is_temp {
                fs::remove_file(path)?;
            }
        }
        Ok(())
    }

    #[cfg(feature = "fault-injection")]
    pub fn inject_fault(&self, plan: FaultPlan) {
        let mut f = self.fault.lock().unwrap();
        f.plan = Some(plan);
        f.writes = 0;
    }

    /// Decides how many bytes of a write of `len` bytes go through.
    #[cfg(feature = "fault-injection")]
    fn fault_gate(&self, len: usize) -> Result<Option<usize>> {
        let mut f = self.fault.lock().unwrap();
        if f.dead {
            return Err(StoreError::InjectedFault);
        }
        let Some(plan) = f.plan else { return Ok(None) };
        if f.writes < plan.writes_before_fault {
            f.writes += 1;
            return Ok(None);
        }
        f.dead = true;
        let keep = ((len as f64) * plan.partial_fraction.clamp(0.0, 1.0)) as usize;
        Ok(Some(keep.min(len.saturating_sub(1))))
    }

    #[cfg(not(feature = "fault-injection"))]
    fn fault_gate(&self, _len: usize) -> Result<Option<usize>> {
        Ok(None)
    }

    fn write_all(&self, file: &mut File, bytes: &[u8]) -> Result<()> {
        if let Some(keep) = self.fault_gate(bytes.len())? {
            file.write_all(&bytes[..keep])?;
            file.sync_data()?;
            return Err(StoreError::InjectedFault);
        }
        file.write_all(bytes)?;
        if self.options.durable {
            file.sync_data()?;
        }
        Ok(())
    }

    fn append_line(&self, path: &Path, json: &str) -> Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        self.write_all(&mut f, frame(json).as_bytes())
    }

    // -- blobs -------------------------------------------------------------

    fn blob_path(&self, id: &SnapshotId) -> Result<PathBuf> {
        let s = id.as_str();
        if s.len() != 64 || !s.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
            return Err(StoreError::InvalidId(s.to_string()));
        }
        Ok(self.root.join("blobs").join(&s[..2]).join(s))
    }

    /// Idempotent: an existing blob is verified, not rewritten.
    pub fn put_snapshot(&self, snapshot: &Snapshot) -> Result<SnapshotId> {
        self.writable()?;
        let id = snapshot.id().clone();
        let path = self.blob_path(&id)?;
        if path.exists() {
            let bytes = fs::read(&path)?;
            if hex::encode(Sha256::digest(&bytes)) != id.0 {
                return Err(StoreError::CorruptBlob(id));
            }
            return Ok(id);
        }
        fs::create_dir_all(path.parent().expect("blob has a parent"))?;
        let n = self.temp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = self
            .root
            .join("blobs")
            .join(format!(".tmp-{}-{n}", std::process::id()));
        let mut f = File::create(&tmp)?;
        if let Err(e) = self.write_all(&mut f, &snapshot.canonical_bytes()) {
            drop(f);
            if !matches!(e, StoreError::InjectedFault) {
                let _ = fs::remove_file(&tmp);
            }
            return Err(e);
        }
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, &path)?;
        Ok(id)
    }

    pub fn get_snapshot(&self, id: &SnapshotId) -> Result<Snapshot> {
        let path = self.blob_path(id)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(format!("snapshot {id}")))
            }
            Err(e) => return Err(e.into()),
        };
        let snap = Snapshot::from_canonical_bytes(&bytes).map_err(|_| StoreError::CorruptBlob(id.clone()))?;
        if snap.id() != id {
            return Err(StoreError::CorruptBlob(id.clone()));
        }
        Ok(snap)
    }

    pub fn has_snapshot(&self, id: &SnapshotId) -> bool {
        self.blob_path(id).is_ok_and(|p| p.exists())
    }

    /// Every blob digest on disk, sorted.
    pub fn blob_ids(&self) -> Result<Vec<SnapshotId>> {
        let mut out = Vec::new();
        for shard in fs::read_dir(self.root.join("blobs"))? {
            let shard = shard?.path();
            if !shard.is_dir() {
                continue;
            }
            for f in fs::read_dir(&shard)? {
                if let Some(name) = f?.file_name().to_str() {
                    out.push(SnapshotId(name.to_string()));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    // -- session logs ------------------------------------------------------

    fn log_path(&self, id: &SessionId) -> Result<PathBuf> {
        check_id(id.as_str())?;
        Ok(self.root.join("sessions").join(format!("{}.log", id.as_str())))
    }

    pub fn create_session(&self, header: &SessionHeader) -> Result<()> {
        self.writable()?;
        let path = self.log_path(&header.session_id)?;
        if path.exists() {
            return Err(StoreError::SessionExists(header.session_id.clone()));
        }
        let json = serde_json::to_string(&LogRecord::Open(header.clone())).expect("serializable");
        self.append_line(&path, &json)?;
        self.tails.lock().unwrap().insert(
            header.session_id.clone(),
            Tail {
                last_event_id: 0,
                last_at: header.started_at,
            },
        );
        Ok(())
    }

    fn tail(&self, id: &SessionId) -> Result<Tail> {
        if let Some(t) = self.tails.lock().unwrap().get(id) {
            return Ok(*t);
        }
        let rec = self.load_session(id)?;
        let t = Tail {
            last_event_id: rec.events.last().map_or(0, |e| e.event_id),
            last_at: rec.events.last().map_or(rec.started_at, |e| e.at),
        };
        self.tails.lock().unwrap().insert(id.clone(), t);
        Ok(t)
    }

    /// Appends `event`, which must carry the next event id. Durable on
    /// return. Callers serialize writes per session.
    pub fn append_event(&self, id: &SessionId, event: &DebugEvent) -> Result<()> {
        self.writable()?;
        event.validate().map_err(StoreError::InvalidEvent)?;
        let tail = self.tail(id)?;
        if event.event_id != tail.last_event_id + 1 {
            return Err(StoreError::SequenceGap {
                expected: tail.last_event_id + 1,
                got: event.event_id,
            });
        }
        if event.at < tail.last_at {
            return Err(StoreError::InvalidEvent(ModelError::TimeWentBackwards {
                previous: tail.last_at,
                got: event.at,
            }));
        }
        let json = serde_json::to_string(&LogRecord::Event(event.clone())).expect("serializable");
        self.append_line(&self.log_path(id)?, &json)?;
        self.tails.lock().unwrap().insert(
            id.clone(),
            Tail {
                last_event_id: event.event_id,
                last_at: event.at,
            },
        );
        Ok(())
    }

    pub fn append_state(
        &self,
        id: &SessionId,
        state: SessionState,
        at: Timestamp,
        completed: Option<bool>,
    ) -> Result<()> {
        self.writable()?;
        let path = self.log_path(id)?;
        if !path.exists() {
            return Err(StoreError::NotFound(format!("session {id}")));
        }
        let json = serde_json::to_string(&LogRecord::State {
            state,
            at,
            completed,
        })
        .expect("serializable");
        self.append_line(&path, &json)
    }

    pub fn append_analysis(&self, id: &SessionId, analysis: &BehaviorSequence) -> Result<()> {
        self.writable()?;
        let path = self.log_path(id)?;
        if !path.exists() {
            return Err(StoreError::NotFound(format!("session {id}")));
        }
        let json =
            serde_json::to_string(&LogRecord::Analysis(analysis.clone())).expect("serializable");
        self.append_line(&path, &json)
    }

    /// Replays the log; derived fields are recomputed from events.
    pub fn load_session(&self, id: &SessionId) -> Result<SessionRecord> {
        let path = self.log_path(id)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(format!("session {id}")))
            }
            Err(e) => return Err(e.into()),
        };
        if !bytes.contains(&b'\n') {
            // Creation never completed, so the session was never acknowledged.
            return Err(StoreError::NotFound(format!("session {id}")));
        }
        replay_log(&format!("{}.log", id.as_str()), &bytes)
    }

    pub fn session_ids(&self) -> Result<Vec<SessionId>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join("sessions"))? {
            let name = entry?.file_name();
            if let Some(stem) = name.to_str().and_then(|n| n.strip_suffix(".log")) {
                out.push(SessionId(stem.to_string()));
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn load_all_sessions(&self) -> Result<Vec<SessionRecord>> {
        let mut out = Vec::new();
        for id in self.session_ids()? {
            match self.load_session(&id) {
                Ok(r) => out.push(r),
                Err(StoreError::NotFound(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    // -- record files ------------------------------------------------------

    pub fn put_record<T: Keyed>(&self, record: &T) -> Result<()> {
        self.writable()?;
        let json = serde_json::to_string(record).expect("serializable");
        let _guard = self.records_lock.lock().unwrap();
        self.append_line(&self.root.join("records").join(T::FILE), &json)
    }

    /// Latest version of every record, ordered by key.
    pub fn load_records<T: Keyed>(&self) -> Result<Vec<T>> {
        let path = self.root.join("records").join(T::FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let (frames, _) = read_frames(T::FILE, &bytes)?;
        let mut latest = BTreeMap::new();
        for (i, payload) in frames.into_iter().enumerate() {
            let rec: T = serde_json::from_str(payload).map_err(|e| StoreError::CorruptLog {
                file: T::FILE.to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            latest.insert(rec.key(), rec);
        }
        Ok(latest.into_values().collect())
    }
}

/// Returns the length kept.
fn truncate_torn_tail(path: &Path) -> Result<usize> {
    let bytes = fs::read(path)?;
    let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
    if keep < bytes.len() {
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(keep as u64)?;
        f.sync_all()?;
    }
    Ok(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventKind, SessionMode, UserId, UserRole};

    fn header(id: &str) -> SessionHeader {
        SessionHeader {
            session_id: SessionId(id.into()),
            user_id: UserId("u1".into()),
            question_id: None,
            mode: SessionMode::Training,
            source_ticket: None,
            initial_snapshot_id: None,
            started_at: Timestamp(1000),
        }
    }

    fn compile(id: u64, ok: bool) -> DebugEvent {
        DebugEvent {
            event_id: id,
            kind: EventKind::Compile,
            snapshot_id: None,
            compile_ok: Some(ok),
            error_log: (!ok).then(|| "line 1: expected ')'".to_string()),
            at: Timestamp(1000 + id as i64),
        }
    }

    #[test]
    fn read_only_leaves_a_live_store_untouched() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(Store::open_read_only(dir.path()), Err(StoreError::Missing(_))));
        let store = Store::open(dir.path()).unwrap();
        store.create_session(&header("s1")).unwrap();
        store.append_event(&SessionId("s1".into()), &compile(1, true)).unwrap();
        let log = dir.path().join("sessions").join("s1.log");
        // A writer is mid-append.
        let mut f = OpenOptions::new().append(true).open(&log).unwrap();
        f.write_all(b"0000002a {\"type\":").unwrap();
        let before = fs::read(&log).unwrap();

        let ro = Store::open_read_only(dir.path()).unwrap();
        assert_eq!(ro.load_session(&SessionId("s1".into())).unwrap().events.len(), 1);
        assert_eq!(fs::read(&log).unwrap(), before);
        assert!(matches!(ro.create_session(&header("s2")), Err(StoreError::ReadOnly)));
        assert!(matches!(
            ro.append_event(&SessionId("s1".into()), &compile(2, true)),
            Err(StoreError::ReadOnly)
        ));

        let attached = Store::attach(dir.path()).unwrap();
        attached.put_record(&User::new(UserId("u9".into()), UserRole::Student, "pw")).unwrap();
        assert_eq!(fs::read(&log).unwrap(), before);
        assert_eq!(ro.load_records::<User>().unwrap().len(), 1);
    }

    #[test]
    fn never_opened_session_logs_are_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.create_session(&header("s1")).unwrap();
        let torn = dir.path().join("sessions").join("s2.log");
        fs::write(&torn, b"0000004f {\"type\":\"open\"").unwrap();
        assert_eq!(store.load_all_sessions().unwrap().len(), 1);
        assert!(matches!(store.load_session(&SessionId("s2".into())), Err(StoreError::NotFound(_))));
        drop(store);
        let store = Store::open(dir.path()).unwrap();
        assert!(!torn.exists());
        assert_eq!(store.session_ids().unwrap(), [SessionId("s1".into())]);
    }

    #[test]
    fn framing_roundtrip() {
        let f = frame("{\"a\":1}");
        assert_eq!(f, "00000007 {\"a\":1}\n");
        let (frames, valid) = read_frames("x", f.as_bytes()).unwrap();
        assert_eq!(frames, ["{\"a\":1}"]);
        assert_eq!(valid, f.len());
        assert!(read_frames("x", b"00000009 {\"a\":1}\n").is_err());
        assert!(read_frames("x", b"garbage\n").is_err());
        let (frames, valid) = read_frames("x", b"00000002 {}\n0000").unwrap();
        assert_eq!((frames.len(), valid), (1, 12));
    }

    #[test]
    fn blobs_are_content_addressed() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let s = Snapshot::new([("a.js", "x")]).unwrap();
        let id = store.put_snapshot(&s).unwrap();
        assert_eq!(store.put_snapshot(&s).unwrap(), id);
        assert_eq!(store.blob_ids().unwrap(), [id.clone()]);
        assert_eq!(store.get_snapshot(&id).unwrap(), s);
        let t = Snapshot::new([("a.js", "y")]).unwrap();
        store.put_snapshot(&t).unwrap();
        assert_eq!(store.blob_ids().unwrap().len(), 2);
        let raw = fs::read(store.blob_path(&id).unwrap()).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&raw)), id.0);
    }

    #[test]
    fn tampered_blob_detected() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let s = Snapshot::new([("a.js", "x")]).unwrap();
        let id = store.put_snapshot(&s).unwrap();
        fs::write(store.blob_path(&id).unwrap(), b"junk").unwrap();
        assert!(matches!(store.get_snapshot(&id), Err(StoreError::CorruptBlob(_))));
        assert!(matches!(store.put_snapshot(&s), Err(StoreError::CorruptBlob(_))));
    }

    #[test]
    fn events_append_in_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let sid = SessionId("s1".into());
        store.create_session(&header("s1")).unwrap();
        assert!(matches!(store.create_session(&header("s1")), Err(StoreError::SessionExists(_))));
        let empty = store.load_session(&sid).unwrap();
        assert_eq!((empty.events.len(), empty.debug_count), (0, 0));
        store.append_event(&sid, &compile(1, true)).unwrap();
        assert!(matches!(
            store.append_event(&sid, &compile(3, true)),
            Err(StoreError::SequenceGap { expected: 2, got: 3 })
        ));
        store.append_event(&sid, &compile(2, false)).unwrap();
        store.append_event(&sid, &compile(3, true)).unwrap();
        let rec = store.load_session(&sid).unwrap();
        assert_eq!(rec.debug_count, 3);
        assert_eq!(rec.events[1].error_log.as_deref(), Some("line 1: expected ')'"));
        assert_eq!(rec.last_activity_at, Timestamp(1003));
        let text = fs::read_to_string(store.log_path(&sid).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn sequence_checked_after_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let sid = SessionId("s1".into());
        {
            let store = Store::open(dir.path()).unwrap();
            store.create_session(&header("s1")).unwrap();
            store.append_event(&sid, &compile(1, true)).unwrap();
        }
        let store = Store::open(dir.path()).unwrap();
        assert!(matches!(
            store.append_event(&sid, &compile(1, true)),
            Err(StoreError::SequenceGap { expected: 2, got: 1 })
        ));
        store.append_event(&sid, &compile(2, true)).unwrap();
    }

    #[test]
    fn torn_line_truncated_on_open() {
        let dir = tempfile::tempdir().unwrap();
        let sid = SessionId("s1".into());
        let path;
        {
            let store = Store::open(dir.path()).unwrap();
            store.create_session(&header("s1")).unwrap();
            store.append_event(&sid, &compile(1, true)).unwrap();
            store.append_event(&sid, &compile(2, true)).unwrap();
            path = store.log_path(&sid).unwrap();
        }
        let full = fs::read(&path).unwrap();
        let cut = full.len() - 10;
        fs::write(&path, &full[..cut]).unwrap();
        let store = Store::open(dir.path()).unwrap();
        let rec = store.load_session(&sid).unwrap();
        assert_eq!(rec.events.len(), 1);
        let after = fs::read(&path).unwrap();
        assert!(after.ends_with(b"\n"));
        store.append_event(&sid, &compile(2, true)).unwrap();
        assert_eq!(store.load_session(&sid).unwrap().events.len(), 2);
    }

    #[test]
    fn corrupt_complete_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let sid = SessionId("s1".into());
        store.create_session(&header("s1")).unwrap();
        let path = store.log_path(&sid).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"00000003 {x}\n").unwrap();
        assert!(matches!(store.load_session(&sid), Err(StoreError::CorruptLog { line: 2, .. })));
    }

    #[test]
    fn state_and_analysis_replay() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let sid = SessionId("s1".into());
        store.create_session(&header("s1")).unwrap();
        store.append_state(&sid, SessionState::TimedOut, Timestamp(5000), None).unwrap();
        store.append_state(&sid, SessionState::Active, Timestamp(6000), None).unwrap();
        store.append_state(&sid, SessionState::Ended, Timestamp(7000), Some(true)).unwrap();
        store.append_analysis(&sid, &BehaviorSequence::default()).unwrap();
        let rec = store.load_session(&sid).unwrap();
        assert_eq!(rec.state, SessionState::Ended);
        assert_eq!(rec.completed, Some(true));
        assert_eq!(rec.ended_at, Some(Timestamp(7000)));
        assert_eq!(rec.analysis, Some(BehaviorSequence::default()));
    }

    #[test]
    fn records_last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.put_record(&User::new("b".into(), UserRole::Student, "x")).unwrap();
        store.put_record(&User::new("a".into(), UserRole::Student, "x")).unwrap();
        store.put_record(&User::new("b".into(), UserRole::Teacher, "y")).unwrap();
        let users: Vec<User> = store.load_records().unwrap();
        assert_eq!(users.len(), 2);
        assert_eq!(users[0].user_id.0, "a");
        assert_eq!(users[1].role, UserRole::Teacher);
        assert!(users[1].verify_secret("y"));
        assert!(store.load_records::<HelpTicket>().unwrap().is_empty());
    }

    #[test]
    fn version_gate() {
        let dir = tempfile::tempdir().unwrap();
        Store::open(dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("meta/version")).unwrap(), "1");
        fs::write(dir.path().join("meta/version"), "2").unwrap();
        assert!(matches!(Store::open(dir.path()), Err(StoreError::UnsupportedVersion(_))));
    }

    #[test]
    fn ids_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(matches!(
            store.load_session(&SessionId("../etc".into())),
            Err(StoreError::InvalidId(_))
        ));
        assert!(matches!(
            store.get_snapshot(&SnapshotId("zz".into())),
            Err(StoreError::InvalidId(_))
        ));
        assert!(matches!(
            store.load_session(&SessionId("nope".into())),
            Err(StoreError::NotFound(_))
        ));
    }

    #[cfg(feature = "fault-injection")]
    #[test]
    fn injected_fault_leaves_a_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let sid = SessionId("s1".into());
        {
            let store = Store::open(dir.path()).unwrap();
            store.create_session(&header("s1")).unwrap();
            store.inject_fault(FaultPlan {
                writes_before_fault: 1,
                partial_fraction: 0.5,
            });
            store.append_event(&sid, &compile(1, true)).unwrap();
            assert!(matches!(
                store.append_event(&sid, &compile(2, true)),
                Err(StoreError::InjectedFault)
            ));
            assert!(matches!(
                store.append_event(&sid, &compile(2, true)),
                Err(StoreError::InjectedFault)
            ));
        }
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.load_session(&sid).unwrap().events.len(), 1);
    }
}
