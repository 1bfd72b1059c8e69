#![allow(dead_code)]

use std::sync::Arc;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use reqwest::{Client, Response, StatusCode};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use debugscope_core::store::{Store, StoreOptions};
use debugscope_core::{Timestamp, UserId, UserRole};
use debugscope_server::platform::{ManualClock, Platform, PlatformOptions};
use debugscope_server::{serve, ServerHandle};

pub const T0: i64 = 1_700_000_000_000;

pub struct Harness {
    pub dir: tempfile::TempDir,
    pub clock: Arc<ManualClock>,
    pub server: ServerHandle,
    pub http: Client,
}

pub fn open_platform(dir: &std::path::Path, clock: Arc<ManualClock>) -> Platform {
    let store = Store::open_with(dir, StoreOptions { durable: false }).unwrap();
    Platform::open(store, clock, PlatformOptions::default()).unwrap()
}

impl Harness {
    pub async fn start() -> Harness {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(Timestamp(T0)));
        let platform = open_platform(dir.path(), clock.clone());
        for (u, role) in [
            ("stu1", UserRole::Student),
            ("stu2", UserRole::Student),
            ("stu3", UserRole::Student),
            ("ta", UserRole::TeachingAssistant),
            ("teacher", UserRole::Teacher),
        ] {
            platform.provision_user(UserId::new(u), role, &format!("{u}-pw")).unwrap();
        }
        let server = serve(Arc::new(platform), "127.0.0.1:0".parse().unwrap(), None)
            .await
            .unwrap();
        Harness {
            dir,
            clock,
            server,
            http: Client::new(),
        }
    }

    /// Stops the server and reopens the same store on a fresh one.
    pub async fn restart(self) -> Harness {
        let Harness { dir, clock, server, http } = self;
        server.shutdown().await.unwrap();
        let platform = open_platform(dir.path(), clock.clone());
        let server = serve(Arc::new(platform), "127.0.0.1:0".parse().unwrap(), None)
            .await
            .unwrap();
        Harness { dir, clock, server, http }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.server.base_url(), path)
    }

    pub async fn login(&self, user: &str) -> String {
        let r = self
            .post(None, "/login", json!({"user_id": user, "secret": format!("{user}-pw")}))
            .await;
        assert_eq!(r.status(), StatusCode::OK);
        body::<Value>(r).await["token"].as_str().unwrap().to_string()
    }

    pub async fn post(&self, token: Option<&str>, path: &str, body: Value) -> Response {
        let mut req = self.http.post(self.url(path)).json(&body);
        if let Some(t) = token {
            req = req.header("Authorization", t);
        }
        req.send().await.unwrap()
    }

    pub async fn get(&self, token: Option<&str>, path: &str) -> Response {
        let mut req = self.http.get(self.url(path));
        if let Some(t) = token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        req.send().await.unwrap()
    }

    pub async fn publish(&self, token: &str, draft: Value) -> String {
        let r = self.post(Some(token), "/questions", draft).await;
        assert_eq!(r.status(), StatusCode::CREATED);
        body::<Value>(r).await["question_id"].as_str().unwrap().to_string()
    }

    pub async fn start_session(&self, token: &str, req: Value) -> String {
        let r = self.post(Some(token), "/sessions", req).await;
        assert_eq!(r.status(), StatusCode::CREATED);
        body::<Value>(r).await["session_id"].as_str().unwrap().to_string()
    }

    pub async fn save(&self, token: &str, session: &str, source: &str) -> u64 {
        let r = self
            .post(
                Some(token),
                &format!("/sessions/{session}/events"),
                json!({"kind": "Save", "snapshot": files(&[("pages/index.js", source)])}),
            )
            .await;
        assert_eq!(r.status(), StatusCode::OK);
        body::<Value>(r).await["event_id"].as_u64().unwrap()
    }

    pub async fn compile(&self, token: &str, session: &str, ok: bool) -> u64 {
        let r = self
            .post(
                Some(token),
                &format!("/sessions/{session}/events"),
                json!({"kind": "Compile", "compile_ok": ok}),
            )
            .await;
        assert_eq!(r.status(), StatusCode::OK);
        body::<Value>(r).await["event_id"].as_u64().unwrap()
    }

    pub async fn end(&self, token: &str, session: &str, completed: bool) -> Response {
        self.post(Some(token), &format!("/sessions/{session}/end"), json!({"completed": completed}))
            .await
    }
}

pub fn files(entries: &[(&str, &str)]) -> Value {
    let m: serde_json::Map<String, Value> = entries
        .iter()
        .map(|(p, s)| (p.to_string(), Value::String(STANDARD.encode(s))))
        .collect();
    Value::Object(m)
}

pub fn decode_file(snapshot: &Value, path: &str) -> String {
    String::from_utf8(STANDARD.decode(snapshot["files"][path].as_str().unwrap()).unwrap()).unwrap()
}

pub async fn body<T: DeserializeOwned>(r: Response) -> T {
    r.json().await.unwrap()
}

/// Asserts status and error code of a failed call, returning the body.
pub async fn expect_error(r: Response, status: StatusCode, code: &str) -> Value {
    assert_eq!(r.status(), status);
    let v: Value = r.json().await.unwrap();
    assert_eq!(v["error"], code, "{v}");
    v
}

pub const BUGGY: &str = "function total(items) {\n  var sum = 0;\n  for (var i = 1; i < items.length; i++) {\n    sum += items[i];\n  }\n  return sum;\n}\n";
pub const FIXED: &str = "function total(items) {\n  var sum = 0;\n  for (var i = 0; i < items.length; i++) {\n    sum += items[i];\n  }\n  return sum;\n}\n";

pub fn practice(title: &str, rank: bool) -> Value {
    json!({
        "kind": "Practice",
        "title": title,
        "initial_snapshot": files(&[("pages/index.js", BUGGY), ("pages/index.wxml", "<view>{{sum}}</view>")]),
        "reference_snapshot": files(&[("pages/index.js", FIXED), ("pages/index.wxml", "<view>{{sum}}</view>")]),
        "error_classes": ["ParameterError"],
        "difficulty": 2,
        "rank_enabled": rank,
    })
}
