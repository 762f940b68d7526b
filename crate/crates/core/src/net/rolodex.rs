//! The rolodex: known people, their keys and their home-cache expressions.
//!
//! ```text
//! egg-rolodex 1
//! # name   key (hex, or - when unknown)   home expression
//! Alice    3b6a27bc...                    mirror < page
//! Lab      -                              nodes < {host:node01,load:3}
//! ```
//!
//! The home expressions together make up `@`:
//! `({name:@}, ⋁ ({name:N, person:N}, home(N)))`, so `@/Alice` is Alice's
//! home.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::bank::{NameBook, PublicKey};
use crate::cache::{self, Cache, Pair};
use crate::data::Datum;
use crate::shell::Session;
use crate::subtype::error_cache;

pub const ROLODEX_HEADER: &str = "egg-rolodex 1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RolodexError {
    #[error("missing header `{ROLODEX_HEADER}`")]
    Header,
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RolodexEntry {
    pub key: Option<PublicKey>,
    pub home: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rolodex {
    entries: BTreeMap<String, RolodexEntry>,
}

impl Rolodex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, key: Option<PublicKey>, home: &str) {
        self.entries.insert(name.to_owned(), RolodexEntry { key, home: home.to_owned() });
    }

    pub fn get(&self, name: &str) -> Option<&RolodexEntry> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn key_of(&self, name: &str) -> Option<PublicKey> {
        self.entries.get(name).and_then(|e| e.key)
    }

    /// Names for check display and currency matching.
    pub fn name_book(&self) -> NameBook {
        let mut book = NameBook::new();
        for (n, e) in &self.entries {
            if let Some(k) = e.key {
                book.insert(k, n);
            }
        }
        book
    }

    pub fn parse(text: &str) -> Result<Self, RolodexError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut lines = lines.by_ref().filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, ROLODEX_HEADER)) => {}
            _ => return Err(RolodexError::Header),
        }
        let mut r = Self::new();
        for (n, line) in lines {
            let word = |s: &'_ str| -> (String, String) {
                let s = s.trim_start();
                let end = s.find(char::is_whitespace).unwrap_or(s.len());
                (s[..end].to_owned(), s[end..].trim().to_owned())
            };
            let (name, rest) = word(line);
            let (key, home) = word(&rest);
            if key.is_empty() {
                return Err(RolodexError::Line(n, "expected `name key home`".into()));
            }
            let key = match key.as_str() {
                "-" => None,
                k => Some(k.parse().map_err(|e| RolodexError::Line(n, e))?),
            };
            r.insert(&name, key, &home);
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self, RolodexError> {
        let text = std::fs::read_to_string(path).map_err(|e| RolodexError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{ROLODEX_HEADER}\n");
        for (n, e) in &self.entries {
            let key = e.key.map_or_else(|| "-".to_owned(), |k| k.to_hex());
            out.push_str(&format!("{n} {key} {}\n", e.home));
        }
        out
    }

    /// Evaluates `name`'s home expression in `session`.
    pub fn resolve_home(&self, session: &mut Session, name: &str) -> Cache {
        match self.entries.get(name) {
            Some(e) => session.evaluate_home(&e.home),
            None => error_cache(&session.runtime().universe, &format!("nobody called {name} in the rolodex"), "rolodex"),
        }
    }

    /// The `@` cache.
    pub fn build_at(&self, session: &mut Session) -> Cache {
        let rt = session.runtime().clone();
        let u = &rt.universe;
        let homes: Vec<Pair> = self
            .entries
            .keys()
            .filter_map(|n| {
                let d = u.datum([("name", n.as_str()), ("person", n.as_str())]).ok()?;
                Some(Pair::new(d, self.resolve_home(session, n)))
            })
            .collect();
        let at = u.datum([("name", "@")]).unwrap_or_else(|_| Datum::top());
        Cache::singleton(at, cache::maximalize(u, homes))
    }

    /// Builds `@` and installs it in `session`.
    pub fn install(&self, session: &mut Session) {
        let at = self.build_at(session);
        session.set_at(at);
    }
}
