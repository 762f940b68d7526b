//! egg shell: the δ and π compilers, sessions, hatches and the filesystem
//! adapter that gives homes and hatches something to look at.

mod delta;
pub mod fs;
mod pi;
mod plugin;
mod scan;
mod session;

use std::fmt;

use crate::cache::{render, render_datum, render_value, Cache};
use crate::data::DataUniverse;

pub use delta::{delta, delta_row, DeltaRow};
pub use pi::{Compiler, Expr, PiRow};
pub use plugin::{load_manifest, load_plugins, Manifest, PluginError, MANIFEST_FILE};
pub use scan::logical_lines;
pub use session::{Command, FlagSpec, HatchCache, RemoteLink, Runtime, ScriptReport, Session};

/// A string outside the domain of δ or π.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the compiled text.
    pub position: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(position: usize, reason: impl Into<String>) -> Self {
        Self { position, reason: reason.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.position + 1, self.reason)
    }
}

impl std::error::Error for ParseError {}

/// Renders `c` for a user. With no fields selected this is the algebraic
/// notation; otherwise one line per element listing the selected entries.
pub fn render_display(u: &DataUniverse, c: &Cache, fields: &[String]) -> String {
    if fields.is_empty() || c.is_empty() {
        return render(u, c);
    }
    let lines: Vec<String> = c
        .iter()
        .map(|p| {
            let shown: Vec<String> = fields
                .iter()
                .filter_map(|f| p.datum.get(f).map(|v| format!("{f}:{}", render_value(v))))
                .collect();
            if shown.is_empty() {
                render_datum(u, &p.datum)
            } else {
                shown.join(" ")
            }
        })
        .collect();
    lines.join("\n")
}

/// Shell text that compiles back to a non-empty `c` whose data carry no
/// `type`: `(d, 0)` is written `d` and `(d, X)` is written `(d < X)`.
pub fn render_shell(u: &DataUniverse, c: &Cache) -> String {
    let parts: Vec<String> = c
        .iter()
        .map(|p| {
            let d = render_datum(u, &p.datum);
            if p.contents.is_empty() {
                d
            } else {
                format!("({d} < {})", render_shell(u, &p.contents))
            }
        })
        .collect();
    parts.join(" ")
}

#[cfg(test)]
mod tests;
