//! Debugging-session model, Logic-layer parser, tree diffing, behavior
//! analysis and the file-backed store.

pub mod astdiff;
pub mod behavior;
pub mod jsparse;
pub mod model;
pub mod stats;
pub mod store;

pub use model::*;
