//! User provisioning. Writes go through an attached store so a running
//! server keeps its in-flight appends; it picks the user up on next login.

use std::path::Path;

use debugscope_core::store::{Store, StoreError};
use debugscope_core::{User, UserId, UserRole};

use crate::{open_store, CliError, Result};

pub fn parse_role(s: &str) -> Result<UserRole> {
    match s.to_ascii_lowercase().as_str() {
        "student" => Ok(UserRole::Student),
        "ta" | "teaching-assistant" | "teachingassistant" => Ok(UserRole::TeachingAssistant),
        "teacher" => Ok(UserRole::Teacher),
        other => Err(CliError::Usage(format!(
            "unknown role {other:?}; expected student, ta or teacher"
        ))),
    }
}

/// Adds or replaces a user. A store that does not exist yet is created.
pub fn cmd_add_user(root: &Path, user: &str, role: UserRole, secret: &str) -> Result<User> {
    if user.trim().is_empty() || secret.is_empty() {
        return Err(CliError::Usage("user id and secret must be non-empty".into()));
    }
    let store = match Store::attach(root) {
        Ok(s) => s,
        Err(StoreError::Missing(_)) => Store::open(root).map_err(CliError::StoreWrite)?,
        Err(source) => {
            return Err(CliError::StoreUnreadable {
                path: root.to_path_buf(),
                source,
            })
        }
    };
    let u = User::new(UserId::new(user.trim()), role, secret);
    store.put_record(&u).map_err(CliError::StoreWrite)?;
    Ok(u)
}

pub fn cmd_list_users(root: &Path) -> Result<Vec<(UserId, UserRole)>> {
    let store = open_store(root)?;
    let mut users: Vec<_> = store
        .load_records::<User>()
        .map_err(|source| CliError::StoreUnreadable {
            path: root.to_path_buf(),
            source,
        })?
        .into_iter()
        .map(|u| (u.user_id, u.role))
        .collect();
    users.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(users)
}
