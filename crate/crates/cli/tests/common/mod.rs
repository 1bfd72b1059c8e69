#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Output;
use std::sync::Arc;

use debugscope_core::store::{Store, StoreOptions};
use debugscope_core::{EventKind, QuestionId, QuestionKind, SessionId, SessionMode, Snapshot, Timestamp, UserId, UserRole};
use debugscope_server::platform::{ManualClock, Platform, PlatformOptions};
use debugscope_server::wire::{encode_snapshot, EventRequest, QuestionDraft, StartSessionRequest, WireFiles};

pub const T0: i64 = 1_700_000_000_000;

pub const BUGGY: &str = "function total(items) {\n  var sum = 0;\n  for (var i = 1; i < items.length; i++) {\n    sum += items[i];\n  }\n  return sum;\n}\n";
pub const FIXED: &str = "function total(items) {\n  var sum = 0;\n  for (var i = 0; i < items.length; i++) {\n    sum += items[i];\n  }\n  return sum;\n}\n";

pub fn snapshot(entries: &[(&str, &str)]) -> Snapshot {
    let m: BTreeMap<String, Vec<u8>> = entries
        .iter()
        .map(|(p, s)| (p.to_string(), s.as_bytes().to_vec()))
        .collect();
    Snapshot::new(m).unwrap()
}

pub fn wire(entries: &[(&str, &str)]) -> WireFiles {
    encode_snapshot(&snapshot(entries))
}

pub fn js(src: &str) -> WireFiles {
    wire(&[("pages/index.js", src)])
}

/// A store populated through the platform, with a manual clock.
pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub clock: Arc<ManualClock>,
    pub platform: Platform,
}

impl Fixture {
    pub fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(Timestamp(T0)));
        let store = Store::open_with(dir.path(), StoreOptions { durable: false }).unwrap();
        let platform = Platform::open(store, clock.clone(), PlatformOptions::default()).unwrap();
        platform
            .provision_user(UserId::new("teacher"), UserRole::Teacher, "teacher-pw")
            .unwrap();
        Fixture { dir, clock, platform }
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    /// Logs in a student, provisioning them on first use.
    pub fn student(&self, user: &str) -> String {
        let id = UserId::new(user);
        if self.platform.login(&id, "pw").is_err() {
            self.platform.provision_user(id.clone(), UserRole::Student, "pw").unwrap();
        }
        self.platform.login(&id, "pw").unwrap().0.token
    }

    pub fn teacher(&self) -> String {
        self.platform.login(&UserId::new("teacher"), "teacher-pw").unwrap().0.token
    }

    pub fn publish(&self, title: &str, initial: &str, reference: &str) -> QuestionId {
        let draft = QuestionDraft {
            kind: QuestionKind::Practice,
            title: title.into(),
            initial_snapshot: js(initial),
            reference_snapshot: Some(js(reference)),
            error_classes: Default::default(),
            difficulty: 1,
            publish: true,
            rank_enabled: false,
        };
        self.platform.publish_question(&self.teacher(), draft).unwrap()
    }

    pub fn start(&self, token: &str, question: &QuestionId) -> SessionId {
        let req = StartSessionRequest {
            question_id: Some(question.clone()),
            mode: SessionMode::Training,
            ticket_id: None,
            snapshot: None,
        };
        self.platform.start_session(token, req).unwrap().session_id
    }

    pub fn event(&self, token: &str, s: &SessionId, kind: EventKind, snapshot: Option<WireFiles>, ok: Option<bool>) -> u64 {
        let req = EventRequest {
            kind,
            snapshot,
            compile_ok: ok,
            error_log: ok.filter(|ok| !ok).map(|_| "SyntaxError: line 3".to_string()),
        };
        self.platform.record_event(token, s, req).unwrap().event_id
    }

    pub fn save(&self, token: &str, s: &SessionId, files: WireFiles) -> u64 {
        self.clock.advance_secs(10);
        self.event(token, s, EventKind::Save, Some(files), None)
    }

    pub fn compile(&self, token: &str, s: &SessionId, ok: bool) -> u64 {
        self.clock.advance_secs(10);
        self.event(token, s, EventKind::Compile, None, Some(ok))
    }

    pub fn end(&self, token: &str, s: &SessionId) {
        self.clock.advance_secs(5);
        self.platform.end_session(token, s, true).unwrap();
    }
}

pub fn cli(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_debugscope"))
        .args(args)
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}
