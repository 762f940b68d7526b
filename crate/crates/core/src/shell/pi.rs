//! π: strings to cache expressions.
//!
//! Rows, first match wins:
//!
//! | row           | form                 | result                        |
//! |---------------|----------------------|-------------------------------|
//! | lines         | `x⏎y`, leftmost      | π(x) ∨ π(y)                   |
//! | left blank    | ` x`                 | π(x)                          |
//! | right blank   | `x `                 | π(x)                          |
//! | shell command | `C x`                | (shell(C) < π(x))/{}          |
//! | put           | `x < y`, leftmost    | π(x) < π(y)                   |
//! | lub           | `x y`, leftmost      | π(x) ∨ π(y)                   |
//! | parenthesis   | `(x)`                | π(x)                          |
//! | slashes       | `x/d`, `x//d`, rightmost | π(x)/δ(d), π(x)//δ(d)     |
//! | dot           | `.`                  | DOT                           |
//! | tilde         | `~`                  | TILDE                         |
//! | at            | `@`                  | AT                            |
//! | singleton     | `x`                  | (δ(x), 0)                     |
//!
//! Splitting at the leftmost `<` makes `a < b < c` group as `a < (b < c)`.
//!
//! After a command name, leading words that are data of the kinds the
//! command accepts (`depth:3`, `tstart:class`, ...) are met into the
//! command's datum instead of being stored in its argument.

use std::collections::BTreeMap;
use std::fmt;

use crate::data::{DataUniverse, Datum};

use super::delta::delta_at;
use super::scan::{first_top, last_top, top_level, wrapped};
use super::session::{Command, FlagSpec};
use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiRow {
    Lines,
    LeftBlank,
    RightBlank,
    ShellCommand,
    Put,
    Lub,
    Parenthesis,
    Slashes,
    Dot,
    Tilde,
    At,
    Singleton,
}

/// A compiled program. Evaluation happens in a session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// The empty argument of a command written without one.
    Empty,
    Lines(Box<Expr>, Box<Expr>),
    Command { name: String, flags: Datum, arg: Box<Expr> },
    Put(Box<Expr>, Box<Expr>),
    Lub(Box<Expr>, Box<Expr>),
    Select(Box<Expr>, Datum),
    DeepSelect(Box<Expr>, Datum),
    Dot,
    Tilde,
    At,
    Singleton(Datum),
}

impl Expr {
    fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Empty => write!(f, "0"),
            Expr::Lines(a, b) => write!(f, "[{a} ⏎ {b}]"),
            Expr::Command { name, flags, arg } if flags.is_top() => write!(f, "[{name} {arg}]"),
            Expr::Command { name, flags, arg } => write!(f, "[{name}{flags:?} {arg}]"),
            Expr::Put(a, b) => write!(f, "[{a} < {b}]"),
            Expr::Lub(a, b) => write!(f, "[{a} ∨ {b}]"),
            Expr::Select(a, d) => write!(f, "[{a} / {d:?}]"),
            Expr::DeepSelect(a, d) => write!(f, "[{a} // {d:?}]"),
            Expr::Dot => write!(f, "."),
            Expr::Tilde => write!(f, "~"),
            Expr::At => write!(f, "@"),
            Expr::Singleton(d) => write!(f, "({d:?},0)"),
        }
    }
}

/// Compiles program text against a universe and command table.
pub struct Compiler<'a> {
    pub universe: &'a DataUniverse,
    pub commands: &'a BTreeMap<String, Command>,
}

impl<'a> Compiler<'a> {
    pub fn new(universe: &'a DataUniverse, commands: &'a BTreeMap<String, Command>) -> Self {
        Self { universe, commands }
    }

    pub fn compile(&self, s: &str) -> Result<Expr, ParseError> {
        self.pi(s, 0).map(|(_, e)| e)
    }

    /// Like [`Compiler::compile`], also reporting the first row that applied.
    pub fn compile_row(&self, s: &str) -> Result<(PiRow, Expr), ParseError> {
        self.pi(s, 0)
    }

    fn pi(&self, s: &str, base: usize) -> Result<(PiRow, Expr), ParseError> {
        if let Some(i) = first_top(s, |c| c == '\n') {
            let (_, x) = self.pi(&s[..i], base)?;
            let (_, y) = self.pi(&s[i + 1..], base + i + 1)?;
            return Ok((PiRow::Lines, Expr::Lines(x.boxed(), y.boxed())));
        }
        if s.starts_with(char::is_whitespace) {
            let skip = s.chars().next().map_or(1, char::len_utf8);
            return Ok((PiRow::LeftBlank, self.pi(&s[skip..], base + skip)?.1));
        }
        if s.ends_with(char::is_whitespace) {
            let cut = s.char_indices().last().map_or(0, |(i, _)| i);
            return Ok((PiRow::RightBlank, self.pi(&s[..cut], base)?.1));
        }
        if let Some(i) = first_top(s, char::is_whitespace) {
            if let Some(cmd) = self.commands.get(&s[..i]) {
                return Ok((PiRow::ShellCommand, self.command(&s[..i], cmd, &s[i + 1..], base + i + 1)?));
            }
        }
        if let Some(i) = first_top(s, |c| c == '<') {
            let (_, x) = self.pi(&s[..i], base)?;
            let (_, y) = self.pi(&s[i + 1..], base + i + 1)?;
            return Ok((PiRow::Put, Expr::Put(x.boxed(), y.boxed())));
        }
        if let Some(i) = first_top(s, char::is_whitespace) {
            let (_, x) = self.pi(&s[..i], base)?;
            let (_, y) = self.pi(&s[i + 1..], base + i + 1)?;
            return Ok((PiRow::Lub, Expr::Lub(x.boxed(), y.boxed())));
        }
        if let Some(inner) = wrapped(s, '(', ')') {
            return Ok((PiRow::Parenthesis, self.pi(inner, base + 1)?.1));
        }
        if let Some(i) = last_top(s, |c| c == '/') {
            let deep = i > 0 && top_level(&s[..i]).last() == Some(&(i - 1, '/'));
            let x_end = if deep { i - 1 } else { i };
            if x_end == 0 {
                return Err(ParseError::new(base, "selection needs a cache on its left"));
            }
            let (_, x) = self.pi(&s[..x_end], base)?;
            let (_, d) = delta_at(self.universe, &s[i + 1..], base + i + 1)?;
            let e = if deep { Expr::DeepSelect(x.boxed(), d) } else { Expr::Select(x.boxed(), d) };
            return Ok((PiRow::Slashes, e));
        }
        match s {
            "." => return Ok((PiRow::Dot, Expr::Dot)),
            "~" => return Ok((PiRow::Tilde, Expr::Tilde)),
            "@" => return Ok((PiRow::At, Expr::At)),
            _ => {}
        }
        if let Some(at) = s.find([')', '(']) {
            return Err(ParseError::new(base + at, "unbalanced parenthesis"));
        }
        let (_, d) = delta_at(self.universe, s, base)?;
        Ok((PiRow::Singleton, Expr::Singleton(d)))
    }

    fn command(&self, name: &str, cmd: &Command, rest: &str, base: usize) -> Result<Expr, ParseError> {
        let mut flags = Datum::top();
        let mut offset = 0;
        loop {
            let trimmed = rest[offset..].trim_start();
            offset = rest.len() - trimmed.len();
            let end = first_top(trimmed, char::is_whitespace).unwrap_or(trimmed.len());
            let word = &trimmed[..end];
            match self.flag(cmd, word, base + offset)? {
                Some(d) => {
                    flags = self.universe.delta_meet(&flags, &d).map_err(|e| ParseError::new(base + offset, e.to_string()))?;
                    offset += end;
                }
                None => break,
            }
        }
        let arg = if rest[offset..].trim().is_empty() { Expr::Empty } else { self.pi(&rest[offset..], base + offset)?.1 };
        Ok(Expr::Command { name: name.to_owned(), flags, arg: arg.boxed() })
    }

    /// The datum of `word` when it is a flag `cmd` accepts.
    fn flag(&self, cmd: &Command, word: &str, base: usize) -> Result<Option<Datum>, ParseError> {
        if word.is_empty() || matches!(cmd.flags, FlagSpec::None) {
            return Ok(None);
        }
        let tops = top_level(word);
        let datum_like = word.starts_with('{') || tops.iter().any(|&(_, c)| c == ':');
        if !datum_like || tops.iter().any(|&(_, c)| matches!(c, '/' | '<' | '(')) {
            return Ok(None);
        }
        let (_, d) = delta_at(self.universe, word, base)?;
        let accepted = match &cmd.flags {
            FlagSpec::None => false,
            FlagSpec::Any => true,
            FlagSpec::Types(types) => {
                let shown = crate::cache::generating_entries(self.universe, &d);
                let ok = shown.type_names().all(|t| types.iter().any(|x| x == t));
                ok
            }
        };
        Ok(accepted.then_some(d))
    }
}
