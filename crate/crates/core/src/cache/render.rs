//! Algebraic notation: `(a,X) ∨ (b,Y)` with `0` for the empty cache.
//!
//! Data are shown by a generating set of their entries: an entry that the
//! extensions rebuild from the others is left out, so `{name:world,ext:}`
//! displays as `world`.

use crate::data::{DataUniverse, Datum, Value};

use super::{Cache, Pair};

pub const JOIN_SEPARATOR: &str = " ∨ ";

fn needs_quotes(s: &str, bare: bool) -> bool {
    s.is_empty() && bare
        || s.chars().any(|c| {
            c.is_whitespace()
                || matches!(c, ',' | '{' | '}' | '(' | ')' | '<' | '/' | '"' | '\\' | '#')
                || (bare && c == ':')
        })
        || (bare && matches!(s, "." | "~" | "@" | "0"))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders a value for the right of `type:`, quoting when the shell would
/// otherwise split it.
pub fn render_value(v: &Value) -> String {
    match v {
        Value::Str(s) if needs_quotes(s, false) => quote(s),
        other => other.to_string(),
    }
}

fn render_bare(s: &str) -> String {
    if needs_quotes(s, true) {
        quote(s)
    } else {
        s.to_owned()
    }
}

/// Entries that the extensions do not rebuild from the rest.
pub(crate) fn generating_entries(u: &DataUniverse, d: &Datum) -> Datum {
    if d.has_bottom() || u.extensions().is_empty() {
        return d.clone();
    }
    let mut kept = d.clone();
    let names: Vec<String> = d.type_names().map(str::to_owned).collect();
    for t in names {
        let mut trial = kept.clone();
        trial.remove(&t);
        if u.fixed_point(&trial).ok().as_ref() == Some(d) {
            kept = trial;
        }
    }
    kept
}

/// Renders a datum: `{}`, a bare name, `type:value`, or `{t1:v1,t2:v2}`.
pub fn render_datum(u: &DataUniverse, d: &Datum) -> String {
    let shown = generating_entries(u, d);
    let mut entries = shown.entries();
    match (shown.len(), entries.next()) {
        (0, _) => "{}".to_owned(),
        (1, Some(("name", Value::Str(s)))) => render_bare(s),
        (1, Some((t, v))) => format!("{t}:{}", render_value(v)),
        _ => {
            let body: Vec<String> = shown.entries().map(|(t, v)| format!("{t}:{}", render_value(v))).collect();
            format!("{{{}}}", body.join(","))
        }
    }
}

pub fn render_pair(u: &DataUniverse, p: &Pair) -> String {
    format!("({},{})", render_datum(u, &p.datum), render(u, &p.contents))
}

pub fn render(u: &DataUniverse, c: &Cache) -> String {
    if c.is_empty() {
        return "0".to_owned();
    }
    c.iter().map(|p| render_pair(u, p)).collect::<Vec<_>>().join(JOIN_SEPARATOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::join;
    use crate::data::standard_universe;

    #[test]
    fn renders_worked_cache() {
        let u = standard_universe();
        let n = |s: &str| u.datum([("name", s)]).unwrap();
        let inner = join(&u, &Cache::leaf(n("hello")), &Cache::leaf(n("world")));
        let c = Cache::singleton(n("a"), inner);
        assert_eq!(render(&u, &c), "(a,(hello,0) ∨ (world,0))");
        assert_eq!(render(&u, &Cache::empty()), "0");
    }

    #[test]
    fn hides_derived_entries() {
        let u = standard_universe();
        let d = u.datum([("text", "class Foo")]).unwrap();
        assert_eq!(render_datum(&u, &d), "text:\"class Foo\"");
        let d = u.datum([("size", "3"), ("type", "x")]).unwrap();
        assert_eq!(render_datum(&u, &d), "{size:3,type:x}");
        assert_eq!(render_datum(&u, &Datum::top()), "{}");
    }
}
