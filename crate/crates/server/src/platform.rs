//! The platform service behind the HTTP layer. Every method takes the
//! caller's token first and authenticates before touching any state.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use rand::RngCore;

use debugscope_core::astdiff::snapshot_line_diff;
use debugscope_core::behavior::{annotate_direction, label_sequence, snapshot_distance, AnalysisError};
use debugscope_core::jsparse::parse_snapshot;
use debugscope_core::stats::{compute_stats, GroupBy, StatsRow};
use debugscope_core::store::{Store, StoreError};
use debugscope_core::{
    AuthToken, BehaviorSequence, DebugEvent, EventKind, HelpTicket, Question, QuestionId,
    QuestionKind, SessionHeader, SessionId, SessionMode, SessionRecord, SessionState, Snapshot, SnapshotId,
    TicketAnswer, TicketId, TicketStatus, Timestamp, User, UserId, UserRole,
};

use crate::wire::{
    decode_snapshot, CheckResult, EventRequest, FileProblem, Leaderboard, LeaderboardEntry, QuestionDraft,
    QuestionView, ResumeRequest, SessionResumed, SessionStarted, SessionSummary, SnapshotBody,
    StartSessionRequest, WireError,
};

#[derive(Debug, thiserror::Error)]
pub enum PlatformError {
    #[error("missing authorization token")]
    Unauthenticated,
    #[error("unknown user or wrong secret")]
    AuthFailed,
    #[error("token expired or unknown")]
    AuthExpired,
    #[error("not permitted for role {0:?}")]
    Forbidden(UserRole),
    #[error("session belongs to another user")]
    NotOwner,
    #[error("question {0} not found")]
    QuestionNotFound(QuestionId),
    #[error("session {0} not found")]
    SessionNotFound(SessionId),
    #[error("ticket {0} not found")]
    TicketNotFound(TicketId),
    #[error("an active session {0} already exists")]
    SessionExists(SessionId),
    #[error("timed-out session {0} can be resumed")]
    ResumeAvailable(SessionId),
    #[error("no timed-out session to resume")]
    NothingToResume,
    #[error("session is {0:?}, not Active")]
    SessionNotActive(SessionState),
    #[error("session already ended")]
    AlreadyEnded,
    #[error("Save events must carry a snapshot")]
    MissingSnapshot,
    #[error("session has no saved snapshot yet")]
    NoSnapshotYet,
    #[error("ticket is already answered")]
    TicketNotOpen,
    #[error("reference solution does not parse: {0}")]
    ReferenceUnparseable(String),
    #[error("initial code equals the reference solution")]
    NoSeededError,
    #[error("question does not have rank mode enabled")]
    RankDisabled,
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error("storage failure: {0}")]
    Store(#[from] StoreError),
}

impl From<WireError> for PlatformError {
    fn from(e: WireError) -> Self {
        PlatformError::BadRequest(e.to_string())
    }
}

impl PlatformError {
    pub fn code(&self) -> &'static str {
        match self {
            PlatformError::Unauthenticated => "Unauthenticated",
            PlatformError::AuthFailed => "AuthFailed",
            PlatformError::AuthExpired => "AuthExpired",
            PlatformError::Forbidden(_) => "Forbidden",
            PlatformError::NotOwner => "NotOwner",
            PlatformError::QuestionNotFound(_) => "QuestionNotFound",
            PlatformError::SessionNotFound(_) => "SessionNotFound",
            PlatformError::TicketNotFound(_) => "TicketNotFound",
            PlatformError::SessionExists(_) => "SessionExists",
            PlatformError::ResumeAvailable(_) => "ResumeAvailable",
            PlatformError::NothingToResume => "NothingToResume",
            PlatformError::SessionNotActive(_) => "SessionNotActive",
            PlatformError::AlreadyEnded => "AlreadyEnded",
            PlatformError::MissingSnapshot => "MissingSnapshot",
            PlatformError::NoSnapshotYet => "NoSnapshotYet",
            PlatformError::TicketNotOpen => "TicketNotOpen",
            PlatformError::ReferenceUnparseable(_) => "ReferenceUnparseable",
            PlatformError::NoSeededError => "NoSeededError",
            PlatformError::RankDisabled => "RankDisabled",
            PlatformError::BadRequest(_) => "BadRequest",
            PlatformError::Store(_) => "StoreError",
        }
    }
}

pub type Result<T> = std::result::Result<T, PlatformError>;

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::now()
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicI64);

impl ManualClock {
    pub fn new(start: Timestamp) -> ManualClock {
        ManualClock(AtomicI64::new(start.millis()))
    }

    pub fn advance_secs(&self, secs: i64) {
        self.0.fetch_add(secs * 1000, Ordering::SeqCst);
    }

    pub fn set(&self, t: Timestamp) {
        self.0.store(t.millis(), Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_millis(self.0.load(Ordering::SeqCst))
    }
}

/// Sessions that count as "the same" for the one-active-session rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SessionKey {
    user: UserId,
    question: Option<QuestionId>,
    ticket: Option<TicketId>,
}

impl SessionKey {
    fn of(r: &SessionRecord) -> SessionKey {
        SessionKey {
            user: r.user_id.clone(),
            question: r.question_id.clone(),
            ticket: r.source_ticket.clone(),
        }
    }
}

pub struct PlatformOptions {
    pub session_timeout_secs: u64,
    pub api_prefixes: Vec<String>,
}

impl Default for PlatformOptions {
    fn default() -> Self {
        PlatformOptions {
            session_timeout_secs: 30 * 60,
            api_prefixes: vec!["wx".to_string()],
        }
    }
}

type SessionCell = Arc<Mutex<SessionRecord>>;

pub struct Platform {
    store: Store,
    clock: Arc<dyn Clock>,
    options: PlatformOptions,
    users: RwLock<HashMap<UserId, User>>,
    tokens: RwLock<HashMap<String, AuthToken>>,
    questions: RwLock<BTreeMap<QuestionId, Question>>,
    tickets: RwLock<BTreeMap<TicketId, HelpTicket>>,
    sessions: RwLock<HashMap<SessionId, SessionCell>>,
    /// Serializes session creation and resume so the uniqueness rule holds.
    lifecycle: Mutex<()>,
}

fn random_hex(bytes: usize) -> String {
    let mut buf = vec![0u8; bytes];
    rand::thread_rng().fill_bytes(&mut buf);
    hex::encode(buf)
}

fn lock(cell: &SessionCell) -> std::sync::MutexGuard<'_, SessionRecord> {
    cell.lock().unwrap_or_else(|p| p.into_inner())
}

impl Platform {
    /// Loads users, tokens, questions, tickets and every session log.
    pub fn open(store: Store, clock: Arc<dyn Clock>, options: PlatformOptions) -> Result<Platform> {
        let now = clock.now();
        let users = store
            .load_records::<User>()?
            .into_iter()
            .map(|u| (u.user_id.clone(), u))
            .collect();
        let tokens = store
            .load_records::<AuthToken>()?
            .into_iter()
            .filter(|t| !t.is_expired(now))
            .map(|t| (t.token.clone(), t))
            .collect();
        let questions = store
            .load_records::<Question>()?
            .into_iter()
            .map(|q| (q.question_id.clone(), q))
            .collect();
        let tickets = store
            .load_records::<HelpTicket>()?
            .into_iter()
            .map(|t| (t.ticket_id.clone(), t))
            .collect();
        let sessions = store
            .load_all_sessions()?
            .into_iter()
            .map(|s| (s.session_id.clone(), Arc::new(Mutex::new(s))))
            .collect();
        Ok(Platform {
            store,
            clock,
            options,
            users: RwLock::new(users),
            tokens: RwLock::new(tokens),
            questions: RwLock::new(questions),
            tickets: RwLock::new(tickets),
            sessions: RwLock::new(sessions),
            lifecycle: Mutex::new(()),
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    // -- users and tokens --------------------------------------------------

    /// Creates or replaces a user. Used by the admin tooling, not over HTTP.
    pub fn provision_user(&self, user_id: UserId, role: UserRole, secret: &str) -> Result<User> {
        let user = User::new(user_id, role, secret);
        self.store.put_record(&user)?;
        self.users
            .write()
            .unwrap()
            .insert(user.user_id.clone(), user.clone());
        Ok(user)
    }

    pub fn login(&self, user_id: &UserId, secret: &str) -> Result<(AuthToken, UserRole)> {
        let verify = |users: &HashMap<UserId, User>| {
            users
                .get(user_id)
                .filter(|u| u.verify_secret(secret))
                .map(|u| u.role)
        };
        let found = verify(&self.users.read().unwrap());
        let role = match found {
            Some(r) => r,
            None => {
                // The admin tool may have provisioned the user since startup.
                let fresh: HashMap<UserId, User> = self
                    .store
                    .load_records::<User>()?
                    .into_iter()
                    .map(|u| (u.user_id.clone(), u))
                    .collect();
                let role = verify(&fresh);
                *self.users.write().unwrap() = fresh;
                role.ok_or(PlatformError::AuthFailed)?
            }
        };
        let now = self.now();
        let token = AuthToken {
            token: random_hex(32),
            user_id: user_id.clone(),
            issued_at: now,
            expires_at: now.plus_millis(AuthToken::LIFETIME_MS),
        };
        self.store.put_record(&token)?;
        self.tokens
            .write()
            .unwrap()
            .insert(token.token.clone(), token.clone());
        Ok((token, role))
    }

    /// Resolves a token to its user.
    pub fn authenticate(&self, token: &str) -> Result<User> {
        let user_id = {
            let tokens = self.tokens.read().unwrap();
            match tokens.get(token) {
                Some(t) if !t.is_expired(self.now()) => t.user_id.clone(),
                _ => return Err(PlatformError::AuthExpired),
            }
        };
        self.users
            .read()
            .unwrap()
            .get(&user_id)
            .cloned()
            .ok_or(PlatformError::AuthExpired)
    }

    // -- questions ---------------------------------------------------------

    pub fn publish_question(&self, token: &str, draft: QuestionDraft) -> Result<QuestionId> {
        let user = self.authenticate(token)?;
        if !Question::may_publish(draft.kind, user.role) {
            return Err(PlatformError::Forbidden(user.role));
        }
        if !(1..=5).contains(&draft.difficulty) {
            return Err(PlatformError::BadRequest("difficulty must be 1 to 5".into()));
        }
        let initial = decode_snapshot(&draft.initial_snapshot)?;
        let reference = draft.reference_snapshot.as_ref().map(decode_snapshot).transpose()?;
        if let Some(reference) = &reference {
            let parsed_ref = parse_snapshot(reference);
            if let Some((path, e)) = parsed_ref.first_error() {
                return Err(PlatformError::ReferenceUnparseable(format!("{path}: {e}")));
            }
        }
        if draft.kind == QuestionKind::Acceptance {
            let Some(reference) = &reference else {
                return Err(PlatformError::BadRequest(
                    "an Acceptance question needs a reference snapshot".into(),
                ));
            };
            if !seeds_an_error(&initial, reference) {
                return Err(PlatformError::NoSeededError);
            }
        }
        if draft.rank_enabled && !draft.publish {
            return Err(PlatformError::BadRequest("rank mode needs a published question".into()));
        }
        self.store.put_snapshot(&initial)?;
        if let Some(r) = &reference {
            self.store.put_snapshot(r)?;
        }
        let q = Question {
            question_id: QuestionId::new(format!("q{}", random_hex(8))),
            kind: draft.kind,
            author_id: user.user_id,
            title: draft.title,
            initial_snapshot_id: initial.id().clone(),
            reference_snapshot_id: reference.map(|r| r.id().clone()),
            error_classes: draft.error_classes,
            difficulty: draft.difficulty,
            published: draft.publish,
            rank_enabled: draft.rank_enabled,
        };
        self.store.put_record(&q)?;
        let id = q.question_id.clone();
        self.questions.write().unwrap().insert(id.clone(), q);
        Ok(id)
    }

    fn visible_question(&self, user: &User, id: &QuestionId) -> Result<Question> {
        let qs = self.questions.read().unwrap();
        match qs.get(id) {
            Some(q) if q.published || q.author_id == user.user_id || user.role.is_staff() => Ok(q.clone()),
            _ => Err(PlatformError::QuestionNotFound(id.clone())),
        }
    }

    fn view(user: &User, q: &Question) -> QuestionView {
        QuestionView::of(q, user.role.is_staff() || q.author_id == user.user_id)
    }

    /// Published questions plus the caller's own drafts, by id.
    pub fn list_questions(&self, token: &str) -> Result<Vec<QuestionView>> {
        let user = self.authenticate(token)?;
        let qs = self.questions.read().unwrap();
        Ok(qs
            .values()
            .filter(|q| q.published || q.author_id == user.user_id)
            .map(|q| Self::view(&user, q))
            .collect())
    }

    pub fn get_question(&self, token: &str, id: &QuestionId) -> Result<QuestionView> {
        let user = self.authenticate(token)?;
        let q = self.visible_question(&user, id)?;
        Ok(Self::view(&user, &q))
    }

    pub fn initial_snapshot(&self, token: &str, id: &QuestionId) -> Result<Snapshot> {
        let user = self.authenticate(token)?;
        let q = self.visible_question(&user, id)?;
        Ok(self.store.get_snapshot(&q.initial_snapshot_id)?)
    }

    // -- sessions ----------------------------------------------------------

    fn cell(&self, id: &SessionId) -> Result<SessionCell> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| PlatformError::SessionNotFound(id.clone()))
    }

    fn find_by_key(&self, key: &SessionKey, state: SessionState) -> Option<SessionId> {
        let sessions = self.sessions.read().unwrap();
        let mut found: Vec<(Timestamp, SessionId)> = sessions
            .values()
            .filter_map(|c| {
                let r = lock(c);
                (r.state == state && SessionKey::of(&r) == *key)
                    .then(|| (r.last_activity_at, r.session_id.clone()))
            })
            .collect();
        found.sort();
        found.pop().map(|(_, id)| id)
    }

    pub fn start_session(&self, token: &str, req: StartSessionRequest) -> Result<SessionStarted> {
        let user = self.authenticate(token)?;
        let question = req
            .question_id
            .as_ref()
            .map(|id| self.visible_question(&user, id))
            .transpose()?;
        if let Some(q) = &question {
            if !q.published {
                return Err(PlatformError::QuestionNotFound(q.question_id.clone()));
            }
        }
        let ticket = match &req.ticket_id {
            Some(id) => Some(
                self.tickets
                    .read()
                    .unwrap()
                    .get(id)
                    .cloned()
                    .ok_or_else(|| PlatformError::TicketNotFound(id.clone()))?,
            ),
            None => None,
        };
        let uploaded = req.snapshot.as_ref().map(decode_snapshot).transpose()?;

        let initial: Option<Snapshot> = match req.mode {
            SessionMode::Training | SessionMode::Rank => {
                let q = question
                    .as_ref()
                    .ok_or_else(|| PlatformError::BadRequest("this mode needs a question_id".into()))?;
                if req.mode == SessionMode::Rank && !q.rank_enabled {
                    return Err(PlatformError::RankDisabled);
                }
                if ticket.is_some() || uploaded.is_some() {
                    return Err(PlatformError::BadRequest(
                        "question sessions start from the question's code".into(),
                    ));
                }
                Some(self.store.get_snapshot(&q.initial_snapshot_id)?)
            }
            SessionMode::Troubleshoot => {
                if !user.role.can_answer() {
                    return Err(PlatformError::Forbidden(user.role));
                }
                let t = ticket
                    .as_ref()
                    .ok_or_else(|| PlatformError::BadRequest("Troubleshoot needs a ticket_id".into()))?;
                Some(self.store.get_snapshot(&t.snapshot_id)?)
            }
            SessionMode::FreeDebug => {
                let sources =
                    usize::from(question.is_some()) + usize::from(ticket.is_some()) + usize::from(uploaded.is_some());
                if sources > 1 {
                    return Err(PlatformError::BadRequest(
                        "FreeDebug starts from at most one of question, ticket or snapshot".into(),
                    ));
                }
                if let Some(q) = &question {
                    Some(self.store.get_snapshot(&q.initial_snapshot_id)?)
                } else if let Some(t) = &ticket {
                    Some(self.store.get_snapshot(&t.snapshot_id)?)
                } else {
                    uploaded
                }
            }
        };
        if let Some(s) = &initial {
            self.store.put_snapshot(s)?;
        }

        let key = SessionKey {
            user: user.user_id.clone(),
            question: req.question_id.clone(),
            ticket: req.ticket_id.clone(),
        };
        let _guard = self.lifecycle.lock().unwrap();
        if let Some(id) = self.find_by_key(&key, SessionState::Active) {
            return Err(PlatformError::SessionExists(id));
        }
        if let Some(id) = self.find_by_key(&key, SessionState::TimedOut) {
            return Err(PlatformError::ResumeAvailable(id));
        }
        let header = SessionHeader {
            session_id: SessionId::new(random_hex(16)),
            user_id: user.user_id,
            question_id: req.question_id,
            mode: req.mode,
            source_ticket: req.ticket_id,
            initial_snapshot_id: initial.as_ref().map(|s| s.id().clone()),
            started_at: self.now(),
        };
        self.store.create_session(&header)?;
        let id = header.session_id.clone();
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(SessionRecord::open(header))));
        Ok(SessionStarted {
            session_id: id,
            snapshot: initial.as_ref().map(SnapshotBody::of),
        })
    }

    /// Appends one event; the server assigns the id and timestamp.
    pub fn record_event(&self, token: &str, session_id: &SessionId, req: EventRequest) -> Result<DebugEvent> {
        let user = self.authenticate(token)?;
        let cell = self.cell(session_id)?;
        if req.kind == EventKind::Save && req.snapshot.is_none() {
            return Err(PlatformError::MissingSnapshot);
        }
        if (req.kind == EventKind::Compile) != req.compile_ok.is_some() {
            return Err(PlatformError::BadRequest(
                "compile_ok is required on Compile events and only there".into(),
            ));
        }
        let snapshot = req.snapshot.as_ref().map(decode_snapshot).transpose()?;

        let mut rec = lock(&cell);
        if rec.user_id != user.user_id {
            return Err(PlatformError::NotOwner);
        }
        if rec.state != SessionState::Active {
            return Err(PlatformError::SessionNotActive(rec.state));
        }
        let snapshot_id = match &snapshot {
            Some(s) => Some(self.store.put_snapshot(s)?),
            None => None,
        };
        let last_at = rec.events.last().map_or(rec.started_at, |e| e.at);
        let event = DebugEvent {
            event_id: rec.next_event_id(),
            kind: req.kind,
            snapshot_id,
            compile_ok: req.compile_ok,
            error_log: req.error_log,
            at: self.now().max(last_at),
        };
        self.store.append_event(session_id, &event)?;
        rec.push_event(event.clone())
            .expect("event was validated by the store");
        Ok(event)
    }

    pub fn get_session(&self, token: &str, session_id: &SessionId) -> Result<SessionRecord> {
        let user = self.authenticate(token)?;
        let rec = lock(&self.cell(session_id)?).clone();
        if rec.user_id != user.user_id && !user.role.is_staff() {
            return Err(PlatformError::NotOwner);
        }
        Ok(rec)
    }

    /// Times out every Active session idle for longer than the timeout.
    pub fn sweep_timeouts(&self) -> Result<Vec<SessionId>> {
        let now = self.now();
        let limit = self.options.session_timeout_secs as i64 * 1000;
        let cells: Vec<SessionCell> = self.sessions.read().unwrap().values().cloned().collect();
        let mut out = Vec::new();
        for cell in cells {
            let mut rec = lock(&cell);
            if rec.state == SessionState::Active && now.millis() - rec.last_activity_at.millis() > limit {
                self.store
                    .append_state(&rec.session_id, SessionState::TimedOut, now, None)?;
                rec.transition(SessionState::TimedOut, now, None)
                    .expect("Active may time out");
                out.push(rec.session_id.clone());
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn resume_session(&self, token: &str, req: ResumeRequest) -> Result<SessionResumed> {
        let user = self.authenticate(token)?;
        let key = SessionKey {
            user: user.user_id,
            question: req.question_id,
            ticket: req.ticket_id,
        };
        let _guard = self.lifecycle.lock().unwrap();
        let id = self
            .find_by_key(&key, SessionState::TimedOut)
            .ok_or(PlatformError::NothingToResume)?;
        let cell = self.cell(&id)?;
        let mut rec = lock(&cell);
        if rec.state != SessionState::TimedOut {
            return Err(PlatformError::NothingToResume);
        }
        let latest = rec
            .latest_save()
            .and_then(|e| e.snapshot_id.clone())
            .or_else(|| rec.initial_snapshot_id.clone());
        let snapshot = latest.map(|s| self.store.get_snapshot(&s)).transpose()?;
        let now = self.now();
        self.store.append_state(&id, SessionState::Active, now, None)?;
        rec.transition(SessionState::Active, now, None)
            .expect("TimedOut may resume");
        Ok(SessionResumed {
            session_id: id,
            next_event_id: rec.next_event_id(),
            snapshot: snapshot.as_ref().map(SnapshotBody::of),
        })
    }

    /// Ends the session, then runs the analysis outside the session lock.
    pub fn end_session(&self, token: &str, session_id: &SessionId, completed: bool) -> Result<SessionSummary> {
        let user = self.authenticate(token)?;
        let cell = self.cell(session_id)?;
        let ended = {
            let mut rec = lock(&cell);
            if rec.user_id != user.user_id {
                return Err(PlatformError::NotOwner);
            }
            if rec.state == SessionState::Ended {
                return Err(PlatformError::AlreadyEnded);
            }
            let at = self.now().max(rec.last_activity_at);
            self.store
                .append_state(session_id, SessionState::Ended, at, Some(completed))?;
            rec.transition(SessionState::Ended, at, Some(completed))
                .expect("Active and TimedOut may end");
            rec.clone()
        };

        let analysis = self.analyze(&ended)?;
        if let Some(a) = &analysis {
            self.store.append_analysis(session_id, a)?;
            lock(&cell).analysis = Some(a.clone());
        }
        Ok(SessionSummary {
            session_id: ended.session_id.clone(),
            state: ended.state,
            debug_count: ended.debug_count,
            elapsed_seconds: ended.elapsed_secs(),
            labels: analysis.as_ref().map(|a| a.label_string()).unwrap_or_default(),
            analysis,
        })
    }

    /// Labels plus direction when the question has a reference. `None` for
    /// sessions without saves.
    pub fn analyze(&self, rec: &SessionRecord) -> Result<Option<BehaviorSequence>> {
        let resolve = |id: &SnapshotId| self.store.get_snapshot(id).ok();
        let mut seq = match label_sequence(rec, resolve) {
            Ok(s) => s,
            Err(AnalysisError::EmptySession) => return Ok(None),
            Err(e) => return Err(PlatformError::BadRequest(e.to_string())),
        };
        let reference = rec.question_id.as_ref().and_then(|q| {
            self.questions
                .read()
                .unwrap()
                .get(q)
                .and_then(|q| q.reference_snapshot_id.clone())
        });
        if let Some(ref_id) = reference {
            let reference = self.store.get_snapshot(&ref_id)?;
            if let Ok(dirs) = annotate_direction(rec, resolve, &reference) {
                seq.directions = dirs;
            }
        }
        Ok(Some(seq))
    }

    pub fn leaderboard(&self, token: &str, question_id: &QuestionId) -> Result<Leaderboard> {
        let user = self.authenticate(token)?;
        self.visible_question(&user, question_id)?;
        let sessions = self.sessions.read().unwrap();
        let mut entries: Vec<LeaderboardEntry> = sessions
            .values()
            .filter_map(|c| {
                let r = lock(c);
                let eligible = r.mode == SessionMode::Rank
                    && r.state == SessionState::Ended
                    && r.completed == Some(true)
                    && r.question_id.as_ref() == Some(question_id);
                eligible.then(|| LeaderboardEntry {
                    user_id: r.user_id.clone(),
                    session_id: r.session_id.clone(),
                    debug_count: r.debug_count,
                    elapsed_seconds: r.elapsed_secs(),
                    completed_at: r.ended_at.expect("ended sessions have an end time"),
                })
            })
            .collect();
        entries.sort_by(|a, b| {
            (a.debug_count, a.elapsed_seconds, &a.user_id, &a.session_id)
                .cmp(&(b.debug_count, b.elapsed_seconds, &b.user_id, &b.session_id))
        });
        Ok(Leaderboard {
            question_id: question_id.clone(),
            entries,
        })
    }

    // -- tickets -----------------------------------------------------------

    pub fn create_help_ticket(&self, token: &str, session_id: &SessionId, form_text: String) -> Result<HelpTicket> {
        let user = self.authenticate(token)?;
        if !user.role.can_ask_for_help() {
            return Err(PlatformError::Forbidden(user.role));
        }
        let (question_id, snapshot_id) = {
            let cell = self.cell(session_id)?;
            let rec = lock(&cell);
            if rec.user_id != user.user_id {
                return Err(PlatformError::NotOwner);
            }
            let snap = rec
                .latest_save()
                .and_then(|e| e.snapshot_id.clone())
                .ok_or(PlatformError::NoSnapshotYet)?;
            (rec.question_id.clone(), snap)
        };
        let ticket = HelpTicket {
            ticket_id: TicketId::new(format!("t{}", random_hex(8))),
            session_id: session_id.clone(),
            question_id,
            asker_id: user.user_id,
            form_text,
            snapshot_id,
            status: TicketStatus::Open,
            answer: None,
        };
        self.store.put_record(&ticket)?;
        self.tickets
            .write()
            .unwrap()
            .insert(ticket.ticket_id.clone(), ticket.clone());
        Ok(ticket)
    }

    /// Every ticket is public to authenticated users.
    pub fn list_tickets(&self, token: &str) -> Result<Vec<HelpTicket>> {
        self.authenticate(token)?;
        Ok(self.tickets.read().unwrap().values().cloned().collect())
    }

    pub fn answer_ticket(
        &self,
        token: &str,
        ticket_id: &TicketId,
        explanation: String,
        answer: &Snapshot,
    ) -> Result<HelpTicket> {
        let user = self.authenticate(token)?;
        if !user.role.can_answer() {
            return Err(PlatformError::Forbidden(user.role));
        }
        let asked = {
            let tickets = self.tickets.read().unwrap();
            let t = tickets
                .get(ticket_id)
                .ok_or_else(|| PlatformError::TicketNotFound(ticket_id.clone()))?;
            if t.status != TicketStatus::Open {
                return Err(PlatformError::TicketNotOpen);
            }
            t.snapshot_id.clone()
        };
        let before = self.store.get_snapshot(&asked)?;
        let diff = snapshot_line_diff(&before, answer);
        self.store.put_snapshot(answer)?;

        let mut tickets = self.tickets.write().unwrap();
        let t = tickets
            .get_mut(ticket_id)
            .ok_or_else(|| PlatformError::TicketNotFound(ticket_id.clone()))?;
        if t.status != TicketStatus::Open {
            return Err(PlatformError::TicketNotOpen);
        }
        let mut updated = t.clone();
        updated.status = TicketStatus::Answered;
        updated.answer = Some(TicketAnswer {
            answerer_id: user.user_id,
            explanation,
            answer_snapshot_id: answer.id().clone(),
            changed_file_diff: diff,
        });
        self.store.put_record(&updated)?;
        *t = updated.clone();
        Ok(updated)
    }

    // -- reporting ---------------------------------------------------------

    pub fn stats(&self, token: &str, by: GroupBy) -> Result<Vec<StatsRow>> {
        let user = self.authenticate(token)?;
        if !user.role.is_staff() {
            return Err(PlatformError::Forbidden(user.role));
        }
        let sessions: Vec<SessionRecord> = self
            .sessions
            .read()
            .unwrap()
            .values()
            .map(|c| lock(c).clone())
            .collect();
        let questions = self.questions.read().unwrap().clone();
        Ok(compute_stats(&sessions, &questions, by))
    }

    pub fn api_prefixes(&self) -> &[String] {
        &self.options.api_prefixes
    }

    pub fn check(&self, token: &str, snapshot: &Snapshot) -> Result<CheckResult> {
        self.authenticate(token)?;
        Ok(check_snapshot(snapshot))
    }
}

/// An initial snapshot seeds an error when its files differ from the
/// reference beyond formatting.
fn seeds_an_error(initial: &Snapshot, reference: &Snapshot) -> bool {
    if initial.id() == reference.id() {
        return false;
    }
    let (pi, pr) = (parse_snapshot(initial), parse_snapshot(reference));
    match snapshot_distance(&pi, &pr) {
        Some((0, _)) => {
            let others = |s: &Snapshot| -> BTreeMap<String, Vec<u8>> {
                s.files()
                    .iter()
                    .filter(|(p, _)| !pi.logic.contains_key(*p))
                    .map(|(p, f)| (p.clone(), f.bytes.clone()))
                    .collect()
            };
            others(initial) != others(reference)
        }
        _ => true,
    }
}

pub fn check_snapshot(snapshot: &Snapshot) -> CheckResult {
    let parsed = parse_snapshot(snapshot);
    let mut problems = Vec::new();
    for (path, outcome) in &parsed.logic {
        if let Err(e) = outcome {
            problems.push(FileProblem {
                path: path.clone(),
                line: e.line,
                col: e.col,
                message: e.message.clone(),
            });
        }
    }
    for (path, outcome) in &parsed.view {
        if let Err(e) = outcome {
            problems.push(FileProblem {
                path: path.clone(),
                line: e.line,
                col: e.col,
                message: e.message.clone(),
            });
        }
    }
    let error_log = (!problems.is_empty()).then(|| {
        problems
            .iter()
            .map(|p| format!("{}:{}:{}: {}", p.path, p.line, p.col, p.message))
            .collect::<Vec<_>>()
            .join("\n")
    });
    CheckResult {
        ok: problems.is_empty(),
        problems,
        error_log,
    }
}
