//! Human-readable checks: `100[Jan 1,2011]BostonUniversity.Alice._Bob_`.
//!
//! The denomination comes first, then the optional start date in brackets,
//! then the hop names joined by dots. Payment hops are wrapped in the
//! marker. Keys without a known name print as `#` plus their fingerprint,
//! which keeps the text parseable when a fingerprint starts with a digit.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rust_decimal::Decimal;

use super::check::Check;
use super::crypto::PublicKey;

/// Display names for keys, from a rolodex or a test fixture.
#[derive(Clone, Debug, Default)]
pub struct NameBook {
    names: BTreeMap<PublicKey, String>,
}

impl NameBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: PublicKey, name: &str) {
        self.names.insert(key, name.to_owned());
    }

    pub fn with(mut self, key: PublicKey, name: &str) -> Self {
        self.insert(key, name);
        self
    }

    pub fn name_of(&self, key: &PublicKey) -> String {
        self.names.get(key).cloned().unwrap_or_else(|| format!("#{}", key.fingerprint()))
    }

    /// Does `token` denote `key`: its name, `#fingerprint`, or full hex?
    pub fn denotes(&self, token: &str, key: &PublicKey) -> bool {
        if self.names.get(key).is_some_and(|n| n == token) {
            return true;
        }
        match token.strip_prefix('#') {
            Some(fp) => fp == key.fingerprint() || fp == key.to_hex(),
            None => token == key.to_hex(),
        }
    }

    pub fn key_of(&self, name: &str) -> Option<PublicKey> {
        self.names.iter().find(|(_, n)| *n == name).map(|(k, _)| *k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisplayOptions {
    pub show_date: bool,
    pub marker_open: String,
    pub marker_close: String,
}

impl Default for DisplayOptions {
    fn default() -> Self {
        Self { show_date: true, marker_open: "_".into(), marker_close: "_".into() }
    }
}

impl DisplayOptions {
    pub fn without_date() -> Self {
        Self { show_date: false, ..Self::default() }
    }
}

const DATE_FORMAT: &str = "%b %-d,%Y";

pub fn display_check(c: &Check, names: &NameBook, opts: &DisplayOptions) -> String {
    let mut out = c.denomination().to_string();
    if opts.show_date {
        out.push_str(&format!("[{}]", c.payload().start.format(DATE_FORMAT)));
    }
    let hops: Vec<String> = c
        .hops()
        .iter()
        .map(|h| {
            let n = names.name_of(&h.key);
            if h.payment {
                format!("{}{n}{}", opts.marker_open, opts.marker_close)
            } else {
                n
            }
        })
        .collect();
    out.push_str(&hops.join("."));
    out
}

/// What can be recovered from displayed text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisplayedCheck {
    pub denomination: Decimal,
    pub date: Option<NaiveDate>,
    pub names: Vec<String>,
    pub payments: Vec<bool>,
}

pub fn parse_display(s: &str, opts: &DisplayOptions) -> Result<DisplayedCheck, String> {
    let split = s.find(|ch: char| !(ch.is_ascii_digit() || ch == '.' || ch == '-')).ok_or("no names")?;
    // A trailing dot belongs to the name chain, not the number.
    let number = s[..split].trim_end_matches('.');
    let denomination: Decimal = number.parse().map_err(|_| format!("bad denomination {number:?}"))?;
    let mut rest = &s[number.len()..];
    let mut date = None;
    if let Some(r) = rest.strip_prefix('[') {
        let end = r.find(']').ok_or("unclosed date")?;
        date = Some(NaiveDate::parse_from_str(&r[..end], DATE_FORMAT).map_err(|e| e.to_string())?);
        rest = &r[end + 1..];
    }
    if rest.is_empty() {
        return Err("no names".into());
    }
    let mut names = Vec::new();
    let mut payments = Vec::new();
    for part in rest.split('.') {
        let marked = part
            .strip_prefix(opts.marker_open.as_str())
            .and_then(|p| p.strip_suffix(opts.marker_close.as_str()))
            .filter(|p| !p.is_empty());
        match marked {
            Some(n) => {
                names.push(n.to_owned());
                payments.push(true);
            }
            None if part.is_empty() => return Err("empty hop name".into()),
            None => {
                names.push(part.to_owned());
                payments.push(false);
            }
        }
    }
    Ok(DisplayedCheck { denomination, date, names, payments })
}
