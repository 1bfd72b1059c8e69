//! Analyst commands over a debugscope store. Each command returns a typed
//! report; the binary renders it as text and, on request, as JSON.

pub mod admin;
pub mod bench;
pub mod cluster;
pub mod error;
pub mod loadtest;
pub mod report;
pub mod stats;
pub mod timeline;

use std::collections::BTreeMap;
use std::path::Path;

use debugscope_core::behavior::{annotate_direction, label_sequence, AnalysisError};
use debugscope_core::store::{Store, StoreError};
use debugscope_core::{BehaviorSequence, Question, QuestionId, SessionId, SessionRecord};

pub use error::{CliError, Result};

/// Opens a store without touching it, so a live server is unaffected.
pub fn open_store(root: &Path) -> Result<Store> {
    Store::open_read_only(root).map_err(|source| CliError::StoreUnreadable {
        path: root.to_path_buf(),
        source,
    })
}

fn unreadable(store: &Store) -> impl Fn(StoreError) -> CliError + '_ {
    move |source| CliError::StoreUnreadable {
        path: store.root().to_path_buf(),
        source,
    }
}

pub fn load_session(store: &Store, id: &SessionId) -> Result<SessionRecord> {
    match store.load_session(id) {
        Ok(r) => Ok(r),
        Err(StoreError::NotFound(_) | StoreError::InvalidId(_)) => Err(CliError::SessionNotFound(id.clone())),
        Err(e) => Err(unreadable(store)(e)),
    }
}

pub fn load_questions(store: &Store) -> Result<BTreeMap<QuestionId, Question>> {
    Ok(store
        .load_records::<Question>()
        .map_err(unreadable(store))?
        .into_iter()
        .map(|q| (q.question_id.clone(), q))
        .collect())
}

/// The persisted analysis when the session has one, otherwise a fresh one;
/// `None` for sessions without saves.
pub fn analysis_of(
    store: &Store,
    rec: &SessionRecord,
    questions: &BTreeMap<QuestionId, Question>,
) -> Result<Option<BehaviorSequence>> {
    if let Some(a) = &rec.analysis {
        return Ok(Some(a.clone()));
    }
    let resolve = |id: &debugscope_core::SnapshotId| store.get_snapshot(id).ok();
    let mut seq = match label_sequence(rec, resolve) {
        Ok(s) => s,
        Err(AnalysisError::EmptySession) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let reference = rec
        .question_id
        .as_ref()
        .and_then(|q| questions.get(q))
        .and_then(|q| q.reference_snapshot_id.as_ref());
    if let Some(r) = reference {
        let reference = store.get_snapshot(r).map_err(unreadable(store))?;
        if let Ok(d) = annotate_direction(rec, resolve, &reference) {
            seq.directions = d;
        }
    }
    Ok(Some(seq))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
