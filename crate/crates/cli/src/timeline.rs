//! Per-session timeline as a standalone SVG document: one lane per file,
//! then lanes for compiles, other events and direction annotations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use debugscope_core::{
    Behavior, BehaviorSequence, Direction, EventKind, SessionId, SessionRecord, Snapshot, SnapshotId,
};

use crate::{analysis_of, load_questions, load_session, open_store, write_file, CliError, Result};

const WIDTH: f64 = 960.0;
const LEFT: f64 = 180.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 56.0;
const LANE: f64 = 36.0;

pub fn behavior_color(b: Behavior) -> &'static str {
    match b {
        Behavior::NoChange => "#9e9e9e",
        Behavior::ParamTweak => "#1f77b4",
        Behavior::ApiChange => "#9467bd",
        Behavior::StructEdit => "#ff7f0e",
        Behavior::Revert => "#8c564b",
        Behavior::SyntaxBreak => "#d62728",
        Behavior::SyntaxFix => "#2ca02c",
    }
}

const FIRST_SAVE_COLOR: &str = "#444444";

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => {}
            c => out.push(c),
        }
    }
    out
}

/// Loads the session and writes its timeline to `out`.
pub fn cmd_timeline(root: &Path, session_id: &SessionId, out: &Path) -> Result<String> {
    let store = open_store(root)?;
    let rec = load_session(&store, session_id)?;
    let questions = load_questions(&store)?;
    let analysis = analysis_of(&store, &rec, &questions)?;
    let mut snapshots = BTreeMap::new();
    for id in rec.saves().filter_map(|e| e.snapshot_id.clone()).chain(rec.initial_snapshot_id.clone()) {
        if let std::collections::btree_map::Entry::Vacant(slot) = snapshots.entry(id) {
            let s = store.get_snapshot(slot.key()).map_err(|source| CliError::StoreUnreadable {
                path: root.to_path_buf(),
                source,
            })?;
            slot.insert(s);
        }
    }
    let svg = render_timeline(&rec, &snapshots, analysis.as_ref());
    write_file(out, &svg)?;
    Ok(svg)
}

/// Pure rendering; identical inputs give byte-identical output.
pub fn render_timeline(
    rec: &SessionRecord,
    snapshots: &BTreeMap<SnapshotId, Snapshot>,
    analysis: Option<&BehaviorSequence>,
) -> String {
    let saves: Vec<_> = rec.saves().collect();
    let paths: BTreeSet<&str> = saves
        .iter()
        .filter_map(|e| e.snapshot_id.as_ref().and_then(|id| snapshots.get(id)))
        .flat_map(|s| s.files().keys().map(String::as_str))
        .collect();
    let paths: Vec<&str> = paths.into_iter().collect();
    let has_compiles = rec.events.iter().any(|e| e.kind == EventKind::Compile);
    let has_other = rec
        .events
        .iter()
        .any(|e| !matches!(e.kind, EventKind::Save | EventKind::Compile));
    let directions = analysis.map_or(&[][..], |a| &a.directions[..]);

    let mut lanes: Vec<String> = paths.iter().map(|p| p.to_string()).collect();
    let compile_lane = has_compiles.then(|| {
        lanes.push("compile".into());
        lanes.len() - 1
    });
    let other_lane = has_other.then(|| {
        lanes.push("run / help / reset".into());
        lanes.len() - 1
    });
    let dir_lane = (!directions.is_empty()).then(|| {
        lanes.push("direction".into());
        lanes.len() - 1
    });

    let t0 = rec.started_at.millis();
    let t_end = rec
        .events
        .iter()
        .map(|e| e.at.millis())
        .chain(rec.ended_at.map(|t| t.millis()))
        .max()
        .unwrap_or(t0);
    let span = (t_end - t0).max(1) as f64;
    let plot = WIDTH - LEFT - RIGHT;
    let x = |at: i64| LEFT + (at - t0) as f64 / span * plot;
    let lane_y = |i: usize| TOP + LANE * i as f64 + LANE / 2.0;
    let axis_y = TOP + LANE * lanes.len().max(1) as f64 + 8.0;
    let legend_y = axis_y + 44.0;
    let height = legend_y + 28.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="24" font-size="15" font-weight="bold">session {} ({:?}, {:?}, {} events)</text>"#,
        esc(rec.session_id.as_str()),
        rec.mode,
        rec.state,
        rec.events.len()
    );

    for (i, name) in lanes.iter().enumerate() {
        let y = lane_y(i);
        let _ = writeln!(
            s,
            r##"<line class="lane" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 10.0,
            y + 4.0,
            esc(name)
        );
    }
    if rec.events.is_empty() {
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="#777">no events</text>"##,
            LEFT + plot / 2.0,
            lane_y(0) + 4.0
        );
    }

    // Axis with five ticks, labeled in seconds from the session start.
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{LEFT}" y1="{axis_y:.2}" x2="{:.2}" y2="{axis_y:.2}" stroke="#333"/>"##,
        WIDTH - RIGHT
    );
    for k in 0..=4 {
        let tx = LEFT + plot * k as f64 / 4.0;
        let secs = (t_end - t0) as f64 / 1000.0 * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{tx:.2}" y1="{axis_y:.2}" x2="{tx:.2}" y2="{:.2}" stroke="#333"/><text x="{tx:.2}" y="{:.2}" text-anchor="middle">+{secs:.1}s</text>"##,
            axis_y + 5.0,
            axis_y + 18.0
        );
    }

    let label_at: BTreeMap<u64, Behavior> = analysis
        .map(|a| a.labels.iter().map(|l| (l.to_event_id, l.label)).collect())
        .unwrap_or_default();
    let mut prev: Option<&Snapshot> = rec.initial_snapshot_id.as_ref().and_then(|id| snapshots.get(id));
    for e in &saves {
        let Some(snap) = e.snapshot_id.as_ref().and_then(|id| snapshots.get(id)) else {
            continue;
        };
        let label = label_at.get(&e.event_id).copied();
        let color = label.map_or(FIRST_SAVE_COLOR, behavior_color);
        let tip = match label {
            Some(l) => format!("save #{} {:?}", e.event_id, l),
            None => format!("save #{}", e.event_id),
        };
        let cx = x(e.at.millis());
        for (lane, path) in paths.iter().enumerate() {
            let Some(f) = snap.file(path) else { continue };
            let changed = prev.and_then(|p| p.file(path)).is_none_or(|pf| pf.bytes != f.bytes);
            let fill = if changed { color } else { "white" };
            let _ = writeln!(
                s,
                r#"<circle class="save" cx="{cx:.2}" cy="{:.2}" r="6" fill="{fill}" stroke="{color}" stroke-width="2"><title>{} {}</title></circle>"#,
                lane_y(lane),
                esc(&tip),
                esc(path)
            );
        }
        prev = Some(snap);
    }

    for e in &rec.events {
        let cx = x(e.at.millis());
        match e.kind {
            EventKind::Save => {}
            EventKind::Compile => {
                let y = lane_y(compile_lane.expect("compile lane exists"));
                if e.compile_ok == Some(true) {
                    let _ = writeln!(
                        s,
                        r##"<rect class="compile-ok" x="{:.2}" y="{:.2}" width="10" height="10" fill="#2ca02c"><title>compile #{} ok</title></rect>"##,
                        cx - 5.0,
                        y - 5.0,
                        e.event_id
                    );
                } else {
                    let err = e.error_log.as_deref().unwrap_or("");
                    let _ = writeln!(
                        s,
                        r##"<path class="compile-fail" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="#d62728" stroke-width="3"><title>compile #{} failed {}</title></path>"##,
                        cx - 5.0,
                        y - 5.0,
                        cx + 5.0,
                        y + 5.0,
                        cx - 5.0,
                        y + 5.0,
                        cx + 5.0,
                        y - 5.0,
                        e.event_id,
                        esc(err)
                    );
                }
            }
            kind => {
                let y = lane_y(other_lane.expect("other lane exists"));
                let (class, d) = match kind {
                    EventKind::Run => ("event-run", format!("M{:.2} {:.2}L{:.2} {y:.2}L{:.2} {:.2}Z", cx - 5.0, y - 6.0, cx + 6.0, cx - 5.0, y + 6.0)),
                    EventKind::Reset => ("event-reset", format!("M{cx:.2} {:.2}L{:.2} {y:.2}L{cx:.2} {:.2}L{:.2} {y:.2}Z", y - 6.0, cx + 6.0, y + 6.0, cx - 6.0)),
                    _ => ("event-help", format!("M{:.2} {:.2}h10v10h-10Z", cx - 5.0, y - 5.0)),
                };
                let _ = writeln!(
                    s,
                    r##"<path class="{class}" d="{d}" fill="#555"><title>{:?} #{}</title></path>"##,
                    kind, e.event_id
                );
            }
        }
    }

    if let Some(lane) = dir_lane {
        let y = lane_y(lane);
        let at: BTreeMap<u64, i64> = rec.events.iter().map(|e| (e.event_id, e.at.millis())).collect();
        for d in directions {
            let Some(t) = at.get(&d.event_id) else { continue };
            let cx = x(*t);
            let dist = d
                .distance_to_reference
                .map_or("unknown".to_string(), |v| v.to_string());
            let (class, body) = match d.direction {
                Direction::Toward => (
                    "dir-toward",
                    format!(r##"<path d="M{cx:.2} {:.2}L{:.2} {:.2}L{:.2} {:.2}Z" fill="#2ca02c""##, y - 8.0, cx + 6.0, y + 4.0, cx - 6.0, y + 4.0),
                ),
                Direction::Away => (
                    "dir-away",
                    format!(r##"<path d="M{cx:.2} {:.2}L{:.2} {:.2}L{:.2} {:.2}Z" fill="#d62728""##, y + 8.0, cx + 6.0, y - 4.0, cx - 6.0, y - 4.0),
                ),
                Direction::Neutral => (
                    "dir-neutral",
                    format!(r##"<path d="M{:.2} {y:.2}h14" stroke="#777" stroke-width="3""##, cx - 7.0),
                ),
                Direction::Unknown => (
                    "dir-unknown",
                    format!(r##"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" fill="#777""##, y + 4.0),
                ),
            };
            if d.direction == Direction::Unknown {
                let _ = writeln!(s, r#"<g class="{class}">{body}>?<title>save #{} distance {dist}</title></text></g>"#, d.event_id);
            } else {
                let _ = writeln!(s, r#"<g class="{class}">{body}><title>save #{} distance {dist}</title></path></g>"#, d.event_id);
            }
        }
    }

    let mut lx = LEFT;
    for b in Behavior::ALL {
        let _ = writeln!(
            s,
            r#"<circle cx="{lx:.2}" cy="{legend_y:.2}" r="5" fill="{}"/><text x="{:.2}" y="{:.2}">{:?}</text>"#,
            behavior_color(b),
            lx + 9.0,
            legend_y + 4.0,
            b
        );
        lx += 100.0;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(esc("a<b>&\"c'"), "a&lt;b&gt;&amp;&quot;c&apos;");
        assert_eq!(esc("x\u{1}y"), "xy");
    }
}
