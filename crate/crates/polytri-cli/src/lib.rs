//! Document serialization and plot export for the command-line tool.
//!
//! Every file is a single JSON document `{ kind, version, payload }` with
//! rationals as `"p/q"` strings; no floating point ever reaches a file
//! except the final rounded coordinates of OFF/SVG exports.

pub mod document;
pub mod export;
