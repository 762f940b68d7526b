//! δ: strings to data.
//!
//! Rows are tried in order and the first that applies wins:
//!
//! | row         | form     | result              |
//! |-------------|----------|---------------------|
//! | left blank  | ` x`     | δ(x)                |
//! | right blank | `x `     | δ(x)                |
//! | comma       | `x,y`    | δ(x) ∧ δ(y)         |
//! | curly       | `{x}`    | δ(x)                |
//! | curly2      | `x{y}`   | {name:x} ∧ δ(y)     |
//! | datum       | `x:y`    | {x:y}               |
//! | maximum     | ``       | {}                  |
//! | bare word   | `w`      | {name:w}            |
//!
//! Splits happen only at top-level characters, outside quotes and brackets.

use crate::data::{DataUniverse, Datum};

use super::scan::{first_top, top_level, unquote, wrapped};
use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaRow {
    LeftBlank,
    RightBlank,
    Comma,
    Curly,
    Curly2,
    Datum,
    Maximum,
    BareWord,
}

/// Compiles `s` to a datum at its fixed point.
pub fn delta(u: &DataUniverse, s: &str) -> Result<Datum, ParseError> {
    delta_at(u, s, 0).map(|(_, d)| d)
}

/// Like [`delta`], also reporting the first row that applied.
pub fn delta_row(u: &DataUniverse, s: &str) -> Result<(DeltaRow, Datum), ParseError> {
    delta_at(u, s, 0)
}

fn meet(u: &DataUniverse, a: &Datum, b: &Datum, at: usize) -> Result<Datum, ParseError> {
    u.delta_meet(a, b).map_err(|e| ParseError::new(at, e.to_string()))
}

fn forbidden_in_word(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '{' | '}' | '<' | ',' | ':' | '"' | '/')
}

pub(crate) fn delta_at(u: &DataUniverse, s: &str, base: usize) -> Result<(DeltaRow, Datum), ParseError> {
    if s.starts_with(char::is_whitespace) {
        let skip = s.chars().next().map_or(1, char::len_utf8);
        return Ok((DeltaRow::LeftBlank, delta_at(u, &s[skip..], base + skip)?.1));
    }
    if s.ends_with(char::is_whitespace) {
        let cut = s.char_indices().last().map_or(0, |(i, _)| i);
        return Ok((DeltaRow::RightBlank, delta_at(u, &s[..cut], base)?.1));
    }
    if let Some(i) = first_top(s, |c| c == ',') {
        let (_, x) = delta_at(u, &s[..i], base)?;
        let (_, y) = delta_at(u, &s[i + 1..], base + i + 1)?;
        return Ok((DeltaRow::Comma, meet(u, &x, &y, base)?));
    }
    if let Some(inner) = wrapped(s, '{', '}') {
        return Ok((DeltaRow::Curly, delta_at(u, inner, base + 1)?.1));
    }
    if s.ends_with('}') {
        let tops = top_level(s);
        if let Some(&(open, _)) = tops.iter().rev().find(|&&(_, c)| c == '{') {
            let head = &s[..open];
            if open > 0 && wrapped(&s[open..], '{', '}').is_some() && !head.contains(forbidden_in_word) {
                let name = u.datum([("name", head)]).map_err(|e| ParseError::new(base, e.to_string()))?;
                let (_, y) = delta_at(u, &s[open + 1..s.len() - 1], base + open + 1)?;
                return Ok((DeltaRow::Curly2, meet(u, &name, &y, base)?));
            }
        }
    }
    if let Some(i) = first_top(s, |c| c == ':') {
        let type_name = &s[..i];
        let raw = &s[i + 1..];
        if u.basic_type(type_name).is_none() {
            return Err(ParseError::new(base, format!("unknown data type {type_name:?}")));
        }
        let text = match unquote(raw) {
            Some(t) => t,
            None if raw.contains(|c: char| c.is_whitespace() || matches!(c, '"' | '(' | ')' | '{' | '}')) => {
                return Err(ParseError::new(base + i + 1, format!("malformed value {raw:?}")));
            }
            None => raw.to_owned(),
        };
        let d = u.datum([(type_name, text.as_str())]).map_err(|e| ParseError::new(base + i + 1, e.to_string()))?;
        return Ok((DeltaRow::Datum, d));
    }
    if s.is_empty() {
        return Ok((DeltaRow::Maximum, Datum::top()));
    }
    let word = match unquote(s) {
        Some(w) => w,
        None if s.contains(forbidden_in_word) => {
            let at = s.find(forbidden_in_word).unwrap_or(0);
            return Err(ParseError::new(base + at, format!("not a datum: {s:?}")));
        }
        None => s.to_owned(),
    };
    let d = u.datum([("name", word.as_str())]).map_err(|e| ParseError::new(base, e.to_string()))?;
    Ok((DeltaRow::BareWord, d))
}
