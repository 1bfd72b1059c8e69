//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS or FAIL line per criterion. Exits non-zero if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use debugscope_cli::loadtest::{self, LoadOptions};
use debugscope_cli::{bench, stats};
use debugscope_core::astdiff::node_edit_distance;
use debugscope_core::behavior::{annotate_direction, cluster_strings, label_sequence};
use debugscope_core::jsparse::bench::BenchRow;
use debugscope_core::jsparse::{parse, print_tree, Node, NodeKind};
use debugscope_core::stats::GroupBy;
use debugscope_core::store::{FaultPlan, Store, StoreOptions};
use debugscope_core::{
    Behavior, DebugEvent, Direction, EventKind, Question, QuestionId, QuestionKind, SessionHeader, SessionId,
    SessionMode, SessionRecord, SessionState, Snapshot, Timestamp, UserId, UserRole,
};
use debugscope_server::platform::{ManualClock, Platform, PlatformOptions};
use debugscope_server::serve;
use debugscope_server::wire::{
    encode_snapshot, EventRecorded, EventRequest, QuestionCreated, QuestionDraft, ResumeRequest, SessionResumed,
    SessionStarted, StartSessionRequest, WireFiles,
};
use support::{mapping_distance, random_tree, session_of_saves, XorShift};

type Criterion = fn() -> String;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("parser roundtrip", parser_roundtrip),
        ("tree edit distance oracle", ted_oracle),
        ("behavior labeling", behavior_labeling),
        ("direction annotation", direction_annotation),
        ("clustering recovery", clustering_recovery),
        ("stress test", stress_test),
        ("session resume fidelity", resume_fidelity),
        ("stats reproduction", stats_reproduction),
        ("benchmark arithmetic", benchmark_arithmetic),
        ("crash consistency", crash_consistency),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let line = match std::panic::catch_unwind(run) {
            Ok(detail) => format!("PASS {name}: {detail} [{:.2}s]", t.elapsed().as_secs_f64()),
            Err(p) => {
                failed += 1;
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                format!("FAIL {name}: {msg} [{:.2}s]", t.elapsed().as_secs_f64())
            }
        };
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
    }
    if failed > 0 {
        writeln!(out, "{failed} criteria failed").unwrap();
        std::process::exit(1);
    }
}

fn within(t: Instant, limit_secs: u64, what: &str) -> f64 {
    let e = t.elapsed().as_secs_f64();
    assert!(e < limit_secs as f64, "{what} took {e:.2}s, limit {limit_secs}s");
    e
}

fn kinds(n: &Node, out: &mut BTreeSet<NodeKind>) {
    out.insert(n.kind);
    for c in &n.children {
        kinds(c, out);
    }
}

fn parser_roundtrip() -> String {
    let t = Instant::now();
    let corpus = support::corpus();
    assert!(corpus.len() >= 50, "corpus has {} files", corpus.len());
    let mut seen = BTreeSet::new();
    for (name, src) in &corpus {
        let t1 = parse(src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let t2 = parse(&print_tree(&t1)).unwrap_or_else(|e| panic!("{name} reprint: {e}"));
        assert_eq!(t1, t2, "{name}");
        kinds(&t1.root, &mut seen);
    }
    let missing: Vec<_> = NodeKind::ALL.iter().filter(|k| !seen.contains(k)).collect();
    assert!(missing.is_empty(), "corpus misses {missing:?}");
    let e = within(t, 5, "roundtrip");
    format!("{} files, {} node kinds, {e:.2}s < 5s", corpus.len(), seen.len())
}

fn ted_oracle() -> String {
    let t = Instant::now();
    const ALPHABET: &[&str] = &["a", "b", "c"];
    let mut rng = XorShift(0x000a_ce50_f7ed);
    for i in 0..500 {
        let a = random_tree(&mut rng, 10, ALPHABET);
        let b = random_tree(&mut rng, 10, ALPHABET);
        let got = node_edit_distance(&a, &b);
        assert!(!got.approximate);
        assert_eq!(got.distance as usize, mapping_distance(&a, &b), "pair {i}: {a:?} vs {b:?}");
    }
    let mut violations = 0;
    for _ in 0..200 {
        let a = random_tree(&mut rng, 10, ALPHABET);
        let b = random_tree(&mut rng, 10, ALPHABET);
        let c = random_tree(&mut rng, 10, ALPHABET);
        let d = |x: &Node, y: &Node| node_edit_distance(x, y).distance;
        let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
        violations += usize::from(d(&a, &a) != 0);
        violations += usize::from((ab == 0) != (a == b));
        violations += usize::from(ab != ba);
        violations += usize::from(ac > ab + bc);
    }
    assert_eq!(violations, 0);
    let e = within(t, 60, "ted oracle");
    format!("500 pairs match enumeration, 200 triples with 0 axiom violations, {e:.2}s < 60s")
}

fn labels(sources: &[&str]) -> Vec<Behavior> {
    let (rec, snaps) = session_of_saves("s", sources);
    label_sequence(&rec, |id| snaps.get(id).cloned())
        .unwrap()
        .labels
        .into_iter()
        .map(|l| l.label)
        .collect()
}

fn behavior_labeling() -> String {
    let v1 = "var x = 1;";
    assert_eq!(labels(&[v1, v1]), [Behavior::NoChange]);
    assert_eq!(
        labels(&["var x = 1;", "var x = ;", "var x = 1;"]),
        [Behavior::SyntaxBreak, Behavior::SyntaxFix]
    );
    let a = "function f(n) {\n  return wx.request({ url: 'a', retry: 1 });\n}\n";
    let b = "function f(n) {\n  return wx.request({ url: 'a', retry: 2 });\n}\n";
    assert_eq!(labels(&[a, b, a]), [Behavior::ParamTweak, Behavior::Revert]);

    let pool = [
        "var a = 1;",
        "var a = 2;",
        "var a = 1;\nf(a);",
        "var a = 1;\nif (a) {\n  f(a);\n}",
        "var a = 1;\nwx.login();",
        "var a = ;",
        "function (",
        "",
    ];
    let mut rng = XorShift(0x1abe1);
    for i in 0..1000 {
        let n = 1 + rng.below(10);
        let sources: Vec<&str> = (0..n).map(|_| pool[rng.below(pool.len())]).collect();
        let (rec, snaps) = session_of_saves(&format!("r{i}"), &sources);
        let seq = label_sequence(&rec, |id| snaps.get(id).cloned()).unwrap();
        assert_eq!(seq.labels.len(), n - 1, "{sources:?}");
    }
    "3 documented sequences exact, 1000 random sessions have saves-1 labels".into()
}

fn direction_annotation() -> String {
    let reference = "var a = 1;\nvar b = 2;\nvar c = 3;\nvar d = 4;\n";
    let steps = [
        "var a = 9;\nvar b = 9;\nvar c = 9;\n",
        "var a = 9;\nvar b = 9;\nvar c = 9;\nvar d = 4;\n",
        "var a = 1;\nvar b = 9;\nvar c = 9;\nvar d = 4;\n",
        "var a = 1;\nvar b = 2;\nvar c = 9;\nvar d = 4;\n",
        reference,
    ];
    let (rec, snaps) = session_of_saves("s", &steps);
    let refsnap = Snapshot::new([("pages/index.js", reference)]).unwrap();
    let dirs = annotate_direction(&rec, |id| snaps.get(id).cloned(), &refsnap).unwrap();
    let ref_tree = parse(reference).unwrap();
    let oracle: Vec<u64> = steps
        .iter()
        .map(|s| mapping_distance(&parse(s).unwrap().root, &ref_tree.root) as u64)
        .collect();
    assert!(oracle.windows(2).all(|w| w[1] < w[0]), "steps must converge: {oracle:?}");
    let got: Vec<u64> = dirs.iter().map(|d| d.distance_to_reference.unwrap()).collect();
    assert_eq!(got, oracle);
    assert_eq!(dirs[0].direction, Direction::Neutral);
    assert!(dirs[1..].iter().all(|d| d.direction == Direction::Toward));
    assert_eq!(dirs.last().unwrap().distance_to_reference, Some(0));
    format!("distances {got:?}, Neutral then {} Toward, final 0", dirs.len() - 1)
}

fn clustering_recovery() -> String {
    let mut items = Vec::new();
    for i in 0..5 {
        items.push((SessionId::new(format!("a{i}")), "NPPAN".to_string()));
        items.push((SessionId::new(format!("b{i}")), "SFRSFSFR".to_string()));
    }
    let expected: BTreeSet<BTreeSet<String>> = ["a", "b"]
        .iter()
        .map(|p| (0..5).map(|i| format!("{p}{i}")).collect())
        .collect();
    for seed in [0, 1, 2, 3, 5, 8, 13, 21, 34, 55] {
        let c = cluster_strings(&items, 2, seed).unwrap();
        let got: BTreeSet<BTreeSet<String>> = c
            .clusters
            .iter()
            .map(|k| k.member_session_ids.iter().map(|s| s.to_string()).collect())
            .collect();
        assert_eq!(got, expected, "seed {seed}");
        assert_eq!(cluster_strings(&items, 2, seed).unwrap(), c, "seed {seed} not repeatable");
    }
    "exact block recovery for 10 seeds, repeat runs identical".into()
}

const BUGGY: &str = "function total(items) {\n  var sum = 0;\n  for (var i = 1; i < items.length; i++) {\n    sum += items[i];\n  }\n  return sum;\n}\n";
const FIXED: &str = "function total(items) {\n  var sum = 0;\n  for (var i = 0; i < items.length; i++) {\n    sum += items[i];\n  }\n  return sum;\n}\n";

fn js(src: &str) -> WireFiles {
    encode_snapshot(&Snapshot::new([("pages/index.js", src)]).unwrap())
}

fn practice_draft() -> QuestionDraft {
    QuestionDraft {
        kind: QuestionKind::Practice,
        title: "sum".into(),
        initial_snapshot: js(BUGGY),
        reference_snapshot: Some(js(FIXED)),
        error_classes: Default::default(),
        difficulty: 1,
        publish: true,
        rank_enabled: false,
    }
}

fn platform_at(dir: &Path, clock: Arc<ManualClock>) -> Platform {
    let store = Store::open_with(dir, StoreOptions { durable: false }).unwrap();
    Platform::open(store, clock, PlatformOptions::default()).unwrap()
}

fn stress_test() -> String {
    let t = Instant::now();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let report = rt.block_on(async {
        let dir = tempfile::tempdir().unwrap();
        let platform = platform_at(dir.path(), Arc::new(ManualClock::new(Timestamp(1_700_000_000_000))));
        platform.provision_user(UserId::new("teacher"), UserRole::Teacher, "pw").unwrap();
        platform.provision_user(UserId::new("load"), UserRole::Student, "pw").unwrap();
        let (tok, _) = platform.login(&UserId::new("teacher"), "pw").unwrap();
        platform.publish_question(&tok.token, practice_draft()).unwrap();
        let server = serve(Arc::new(platform), "127.0.0.1:0".parse().unwrap(), None).await.unwrap();
        let url = server.base_url();
        let token = loadtest::login(&url, "load", "pw").await.unwrap();
        let opts = LoadOptions {
            url,
            token,
            total: 1000,
            duration: Duration::from_secs(1),
            concurrency: 64,
            request_timeout: Duration::from_secs(10),
        };
        let r = loadtest::run_load(&opts).await;
        server.shutdown().await.unwrap();
        r
    });
    assert_eq!(report.sent, 1000);
    assert_eq!(report.failed, 0, "first error: {:?}", report.first_error);
    assert_eq!(report.succeeded, 1000);
    assert!(report.last_send_ms < 1000.0, "last send at {} ms", report.last_send_ms);
    let e = within(t, 60, "stress test");
    format!(
        "1000 sent within {:.0} ms, 1000 succeeded, 0 failed, p99 {:.2} ms, {e:.2}s < 60s",
        report.last_send_ms,
        report.p99_ms.unwrap()
    )
}

fn resume_fidelity() -> String {
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(Timestamp(1_700_000_000_000)));
        let platform = platform_at(dir.path(), clock.clone());
        platform.provision_user(UserId::new("teacher"), UserRole::Teacher, "pw").unwrap();
        platform.provision_user(UserId::new("stu"), UserRole::Student, "pw").unwrap();
        let server = serve(Arc::new(platform), "127.0.0.1:0".parse().unwrap(), None).await.unwrap();
        let base = server.base_url();
        let http = reqwest::Client::new();
        let teacher = loadtest::login(&base, "teacher", "pw").await.unwrap();
        let stu = loadtest::login(&base, "stu", "pw").await.unwrap();

        let post = |path: String, token: String, body: serde_json::Value| {
            let http = http.clone();
            let url = format!("{base}{path}");
            async move {
                let r = http.post(url).header("Authorization", token).json(&body).send().await.unwrap();
                assert!(r.status().is_success(), "{}: {}", r.status(), r.text().await.unwrap());
                r
            }
        };
        let q: QuestionCreated = post("/questions".into(), teacher, serde_json::to_value(practice_draft()).unwrap())
            .await
            .json()
            .await
            .unwrap();
        let start = StartSessionRequest {
            question_id: Some(q.question_id.clone()),
            mode: SessionMode::Training,
            ticket_id: None,
            snapshot: None,
        };
        let started: SessionStarted = post("/sessions".into(), stu.clone(), serde_json::to_value(start).unwrap())
            .await
            .json()
            .await
            .unwrap();
        let sid = started.session_id;
        let sources = [BUGGY.replace("1;", "2;"), BUGGY.replace("1;", "3;"), FIXED.replace("sum;\n}", "sum; // done\n}")];
        for (i, src) in sources.iter().enumerate() {
            clock.advance_secs(20);
            let ev = EventRequest {
                kind: EventKind::Save,
                snapshot: Some(js(src)),
                compile_ok: None,
                error_log: None,
            };
            let rec: EventRecorded = post(format!("/sessions/{sid}/events"), stu.clone(), serde_json::to_value(ev).unwrap())
                .await
                .json()
                .await
                .unwrap();
            assert_eq!(rec.event_id, i as u64 + 1);
        }

        clock.advance_secs(31 * 60);
        let swept = server.platform.sweep_timeouts().unwrap();
        assert_eq!(swept, vec![sid.clone()]);

        let req = ResumeRequest {
            question_id: Some(q.question_id),
            ticket_id: None,
        };
        let resumed: SessionResumed = post("/sessions/resume".into(), stu.clone(), serde_json::to_value(req).unwrap())
            .await
            .json()
            .await
            .unwrap();
        assert_eq!(resumed.session_id, sid);
        assert_eq!(resumed.next_event_id, 4);
        let snap = resumed.snapshot.expect("resume returns the latest snapshot").decode().unwrap();
        assert_eq!(snap.file("pages/index.js").unwrap().bytes, sources[2].as_bytes());

        let ev = EventRequest {
            kind: EventKind::Compile,
            snapshot: None,
            compile_ok: Some(true),
            error_log: None,
        };
        let rec: EventRecorded = post(format!("/sessions/{sid}/events"), stu.clone(), serde_json::to_value(ev).unwrap())
            .await
            .json()
            .await
            .unwrap();
        assert_eq!(rec.event_id, 4);
        let full: SessionRecord = http
            .get(format!("{base}/sessions/{sid}"))
            .header("Authorization", format!("Bearer {stu}"))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        let ids: Vec<u64> = full.events.iter().map(|e| e.event_id).collect();
        assert_eq!(ids, [1, 2, 3, 4]);
        assert_eq!(full.state, SessionState::Active);
        server.shutdown().await.unwrap();
        "3rd snapshot returned byte-identical after sweep, events continue 1..4 without gaps".to_string()
    })
}

const USERS: usize = 473;
const SESSIONS: usize = 1186;
const COMPILES: usize = 5150;
const COMPLETIONS: usize = 1940;

/// Compile outcomes per session: every session gets 4 compiles, the first
/// 406 a fifth; each has one success and the first 754 a second.
fn synthetic_compiles(i: usize) -> Vec<bool> {
    let n = 4 + usize::from(i < COMPILES - 4 * SESSIONS);
    let ok = 1 + usize::from(i < COMPLETIONS - SESSIONS);
    (0..n).map(|k| k >= n - ok).collect()
}

/// Counts from the raw log text, without the store's replay code.
fn naive_scan(root: &Path) -> (usize, usize, usize, usize) {
    let (mut users, mut sessions, mut compiles, mut ok) = (BTreeSet::new(), 0, 0, 0);
    for entry in std::fs::read_dir(root.join("sessions")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        for line in text.lines() {
            let (len, json) = line.split_once(' ').unwrap();
            assert_eq!(usize::from_str_radix(len, 16).unwrap(), json.len());
            let v: serde_json::Value = serde_json::from_str(json).unwrap();
            match v["type"].as_str().unwrap() {
                "open" => {
                    sessions += 1;
                    users.insert(v["user_id"].as_str().unwrap().to_string());
                }
                "event" if v["kind"] == "Compile" => {
                    compiles += 1;
                    ok += usize::from(v["compile_ok"] == true);
                }
                _ => {}
            }
        }
    }
    (users.len(), sessions, compiles, ok)
}

fn stats_reproduction() -> String {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open_with(dir.path(), StoreOptions { durable: false }).unwrap();
    let initial = Snapshot::new([("pages/index.js", BUGGY)]).unwrap();
    store.put_snapshot(&initial).unwrap();
    let qid = QuestionId::new("q-table");
    store
        .put_record(&Question {
            question_id: qid.clone(),
            kind: QuestionKind::Practice,
            author_id: UserId::new("teacher"),
            title: "field study".into(),
            initial_snapshot_id: initial.id().clone(),
            reference_snapshot_id: None,
            error_classes: Default::default(),
            difficulty: 1,
            published: true,
            rank_enabled: false,
        })
        .unwrap();
    let t0 = 1_600_000_000_000;
    for i in 0..SESSIONS {
        let sid = SessionId::new(format!("s{i:05}"));
        let start = Timestamp(t0 + i as i64 * 60_000);
        store
            .create_session(&SessionHeader {
                session_id: sid.clone(),
                user_id: UserId::new(format!("u{:03}", i % USERS)),
                question_id: Some(qid.clone()),
                mode: SessionMode::Training,
                source_ticket: None,
                initial_snapshot_id: Some(initial.id().clone()),
                started_at: start,
            })
            .unwrap();
        for (k, ok) in synthetic_compiles(i).into_iter().enumerate() {
            store
                .append_event(
                    &sid,
                    &DebugEvent {
                        event_id: k as u64 + 1,
                        kind: EventKind::Compile,
                        snapshot_id: None,
                        compile_ok: Some(ok),
                        error_log: (!ok).then(|| "error".to_string()),
                        at: Timestamp(start.0 + 1000 * (k as i64 + 1)),
                    },
                )
                .unwrap();
        }
        store
            .append_state(&sid, SessionState::Ended, Timestamp(start.0 + 30_000), Some(true))
            .unwrap();
    }
    drop(store);

    assert_eq!(naive_scan(dir.path()), (USERS, SESSIONS, COMPILES, COMPLETIONS));

    let rows = stats::cmd_stats(dir.path(), GroupBy::Question).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(
        (r.total_users, r.total_sessions, r.total_debugs, r.completions),
        (USERS as u64, SESSIONS as u64, COMPILES as u64, COMPLETIONS as u64)
    );
    let ratio = r.avg_debugs_per_completion.unwrap();
    assert!((ratio - 5150.0 / 1940.0).abs() < 1e-12);
    assert!((ratio - 2.66).abs() < 0.01);

    let o = std::process::Command::new(env!("CARGO_BIN_EXE_debugscope"))
        .args(["stats", "--store", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row = text.lines().find(|l| l.contains("field study")).expect("printed row");
    let toks: Vec<&str> = row.split_whitespace().collect();
    let n = toks.len();
    assert_eq!(toks[n - 5..], ["473", "1186", "5150", &format!("{ratio:.2}"), "1940"]);
    format!("printed 473 users, 1186 sessions, 5150 debugs, 1940 completions, ratio {ratio:.4}; raw scan agrees")
}

fn benchmark_arithmetic() -> String {
    let rows = bench::cmd_bench(&support::corpus_dir(), 5).unwrap();
    let mut worst = 0.0f64;
    for r in &rows {
        assert_eq!(r.frames_ms.len(), 5);
        let mut sum = 0.0;
        for f in &r.frames_ms {
            sum += f;
        }
        worst = worst.max((r.average_ms - sum / 5.0).abs());
    }
    assert!(worst <= 0.1, "average off by {worst} ms");
    // Printed output uses three decimals, so recomputing from the text
    // also stays within the tolerance.
    for line in bench::render_text(&rows).lines().skip(1) {
        let nums: Vec<f64> = line.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        let (frames, avg) = nums.split_at(nums.len() - 1);
        assert!((frames.iter().sum::<f64>() / frames.len() as f64 - avg[0]).abs() <= 0.1, "{line}");
    }
    let acorn = BenchRow::from_frames("Acorn", vec![182.1, 228.5, 221.7, 186.2, 239.8]);
    assert!((acorn.average_ms - 211.66).abs() < 1e-9, "{}", acorn.average_ms);
    assert_eq!(format!("{:.2}", acorn.average_ms), "211.66");
    assert_eq!((acorn.average_ms * 10.0).floor() / 10.0, 211.6);
    format!("{} parsers, max deviation {worst:.2e} ms; Acorn row averages 211.66", rows.len())
}

fn crash_consistency() -> String {
    let mut faults_hit = 0;
    let mut total_acked = 0;
    for run in 0..100u64 {
        let mut rng = XorShift(0xc0ffee ^ (run * 0x9e37_79b9 + 1));
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(Timestamp(1_700_000_000_000)));
        let platform = platform_at(dir.path(), clock.clone());
        platform.provision_user(UserId::new("teacher"), UserRole::Teacher, "pw").unwrap();
        platform.provision_user(UserId::new("stu"), UserRole::Student, "pw").unwrap();
        let (teacher, _) = platform.login(&UserId::new("teacher"), "pw").unwrap();
        let qid = platform.publish_question(&teacher.token, practice_draft()).unwrap();
        let (stu, _) = platform.login(&UserId::new("stu"), "pw").unwrap();
        let start = StartSessionRequest {
            question_id: Some(qid),
            mode: SessionMode::Training,
            ticket_id: None,
            snapshot: None,
        };
        let sid = platform.start_session(&stu.token, start).unwrap().session_id;

        platform.store().inject_fault(FaultPlan {
            writes_before_fault: rng.below(30) as u64,
            partial_fraction: rng.below(1000) as f64 / 1000.0,
        });
        let mut acked: Vec<DebugEvent> = Vec::new();
        for step in 0..40 {
            clock.advance_secs(1 + rng.below(30) as i64);
            let req = match rng.below(4) {
                0 | 1 => EventRequest {
                    kind: EventKind::Save,
                    snapshot: Some(js(&format!("var step = {step};\nvar pick = {};\n", rng.below(5)))),
                    compile_ok: None,
                    error_log: None,
                },
                2 => EventRequest {
                    kind: EventKind::Compile,
                    snapshot: None,
                    compile_ok: Some(rng.below(2) == 0),
                    error_log: None,
                },
                _ => EventRequest {
                    kind: EventKind::Run,
                    snapshot: None,
                    compile_ok: None,
                    error_log: None,
                },
            };
            let req = EventRequest {
                error_log: (req.compile_ok == Some(false)).then(|| "boom".to_string()),
                ..req
            };
            match platform.record_event(&stu.token, &sid, req) {
                Ok(e) => acked.push(e),
                Err(_) => {
                    faults_hit += 1;
                    break;
                }
            }
        }
        total_acked += acked.len();
        drop(platform);

        let reopened = platform_at(dir.path(), clock.clone());
        let rec = reopened.store().load_session(&sid).unwrap();
        assert_eq!(rec.events, acked, "run {run}");
        for e in &acked {
            if let Some(id) = &e.snapshot_id {
                reopened.store().get_snapshot(id).unwrap_or_else(|err| panic!("run {run}: {err}"));
            }
        }
        let (stu, _) = reopened.login(&UserId::new("stu"), "pw").unwrap();
        let next = EventRequest {
            kind: EventKind::Run,
            snapshot: None,
            compile_ok: None,
            error_log: None,
        };
        let e = reopened.record_event(&stu.token, &sid, next).unwrap();
        assert_eq!(e.event_id, acked.len() as u64 + 1, "run {run}");
    }
    assert_eq!(faults_hit, 100, "every run should hit its fault");
    format!("100 faulted runs reopened cleanly, {total_acked} acknowledged events all present, none extra")
}
