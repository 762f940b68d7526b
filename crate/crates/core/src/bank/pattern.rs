//! Currency patterns and preference tables.
//!
//! A pattern is a dot-separated list of hop tokens. `?` matches exactly one
//! hop and `*` one or more; any other token names a hop (see
//! [`NameBook::denotes`]). Payment markers play no part in matching.
//!
//! Preference file:
//!
//! ```text
//! egg-prefs 1
//! # pattern                      weight
//! BostonUniversity.*             2
//! *                              0.5
//! ```

use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use thiserror::Error;

use super::check::Check;
use super::display::NameBook;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("empty pattern")]
    Empty,
    #[error("empty hop in pattern {0:?}")]
    EmptyHop(String),
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("missing header `egg-prefs 1`")]
    Header,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    One,
    Many,
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrencyPattern {
    source: String,
    tokens: Vec<Token>,
}

impl FromStr for CurrencyPattern {
    type Err = PatternError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PatternError::Empty);
        }
        let tokens = s
            .split('.')
            .map(|t| match t {
                "" => Err(PatternError::EmptyHop(s.to_owned())),
                "?" => Ok(Token::One),
                "*" => Ok(Token::Many),
                n => Ok(Token::Name(n.to_owned())),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { source: s.to_owned(), tokens })
    }
}

impl fmt::Display for CurrencyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl CurrencyPattern {
    /// Matches a chain of hop names (or anything `eq` can compare).
    pub fn matches_by<T>(&self, chain: &[T], eq: impl Fn(&str, &T) -> bool) -> bool {
        fn go<T>(p: &[Token], c: &[T], eq: &dyn Fn(&str, &T) -> bool) -> bool {
            match p.split_first() {
                None => c.is_empty(),
                Some((Token::One, rest)) => !c.is_empty() && go(rest, &c[1..], eq),
                Some((Token::Many, rest)) => (1..=c.len()).any(|n| go(rest, &c[n..], eq)),
                Some((Token::Name(n), rest)) => c.first().is_some_and(|h| eq(n, h)) && go(rest, &c[1..], eq),
            }
        }
        go(&self.tokens, chain, &eq)
    }

    pub fn matches_names(&self, chain: &[&str]) -> bool {
        self.matches_by(chain, |t, n| t == *n)
    }

    pub fn matches(&self, c: &Check, names: &NameBook) -> bool {
        let keys: Vec<_> = c.hops().into_iter().map(|h| h.key).collect();
        self.matches_by(&keys, |t, k| names.denotes(t, k))
    }
}

pub fn match_currency(pattern: &str, c: &Check, names: &NameBook) -> Result<bool, PatternError> {
    Ok(pattern.parse::<CurrencyPattern>()?.matches(c, names))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceRow {
    pub pattern: CurrencyPattern,
    pub weight: Decimal,
}

/// An ordered preference table. No matching row means refusal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Preferences {
    pub rows: Vec<PreferenceRow>,
}

pub const PREFS_HEADER: &str = "egg-prefs 1";

impl Preferences {
    pub fn new(rows: Vec<PreferenceRow>) -> Self {
        Self { rows }
    }

    pub fn accept_all(weight: Decimal) -> Self {
        Self::new(vec![PreferenceRow { pattern: "*".parse().expect("valid"), weight }])
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The highest weight among rows matching `c`.
    pub fn weight(&self, c: &Check, names: &NameBook) -> Option<Decimal> {
        self.rows.iter().filter(|r| r.pattern.matches(c, names)).map(|r| r.weight).max()
    }

    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()));
        match lines.find(|(_, l)| !l.is_empty()) {
            Some((_, PREFS_HEADER)) => {}
            _ => return Err(PatternError::Header),
        }
        let mut rows = Vec::new();
        for (n, line) in lines.filter(|(_, l)| !l.is_empty()) {
            let mut words = line.split_whitespace();
            let (Some(p), Some(w), None) = (words.next(), words.next(), words.next()) else {
                return Err(PatternError::Line(n, "expected `pattern weight`".into()));
            };
            let pattern = p.parse().map_err(|e: PatternError| PatternError::Line(n, e.to_string()))?;
            let weight: Decimal = w.parse().map_err(|_| PatternError::Line(n, format!("bad weight {w:?}")))?;
            if weight <= Decimal::ZERO {
                return Err(PatternError::Line(n, "weights are positive".into()));
            }
            rows.push(PreferenceRow { pattern, weight });
        }
        Ok(Self { rows })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{PREFS_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!("{} {}\n", r.pattern, r.weight));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: &str, chain: &str) -> bool {
        let names: Vec<&str> = chain.split('.').collect();
        p.parse::<CurrencyPattern>().unwrap().matches_names(&names)
    }

    #[test]
    fn wildcards() {
        assert!(m("BostonUniversity.*", "BostonUniversity.Alice.Bob"));
        assert!(!m("BostonUniversity.*.Alice.?", "BostonUniversity.Alice.Carol"));
        assert!(m("BostonUniversity.*.Alice.?", "BostonUniversity.Bob.Alice.Carol"));
        assert!(m("*", "x"));
        assert!(m("*", "x.y.z"));
        assert!(m("?.?", "x.y"));
        assert!(!m("?", "x.y"));
        assert!(!m("A", "B"));
    }

    #[test]
    fn malformed() {
        assert_eq!("".parse::<CurrencyPattern>(), Err(PatternError::Empty));
        assert!(matches!("a..b".parse::<CurrencyPattern>(), Err(PatternError::EmptyHop(_))));
    }

    #[test]
    fn prefs_file_round_trip() {
        let p = Preferences::parse("egg-prefs 1\n# who\nBostonUniversity.* 2\n* 0.5\n").unwrap();
        assert_eq!(p.rows.len(), 2);
        assert_eq!(Preferences::parse(&p.to_text()).unwrap(), p);
        assert_eq!(Preferences::parse("* 1\n"), Err(PatternError::Header));
        assert!(matches!(Preferences::parse("egg-prefs 1\n* 0\n"), Err(PatternError::Line(2, _))));
    }
}
