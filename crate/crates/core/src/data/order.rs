//! Orders on the values of a single basic data type.
//!
//! Every order here is a meet semilattice once the artificial bottom
//! [`Value::Bottom`] is adjoined. `meet(v, Bottom) == Bottom` for all of them.

use std::fmt;

use super::Value;

/// Order, meet and (optionally) group addition on the values of a basic type.
pub trait ValueOrder: Send + Sync + fmt::Debug {
    /// Short identifier used in plug-in manifests (`trivial`, `prefix`, ...).
    fn kind(&self) -> &'static str;

    /// Parses the textual form of a value. `None` means the text is not a
    /// value of this type.
    fn parse(&self, text: &str) -> Option<Value>;

    /// Partial order on non-bottom values. Bottom handling is done by
    /// [`ValueOrder::leq_value`].
    fn leq(&self, a: &Value, b: &Value) -> bool;

    /// Greatest lower bound of two non-bottom values, `Bottom` if none.
    fn meet(&self, a: &Value, b: &Value) -> Value;

    /// Abelian-group addition, for types that support statistics.
    fn add(&self, _a: &Value, _b: &Value) -> Option<Value> {
        None
    }

    fn is_group(&self) -> bool {
        false
    }

    fn leq_value(&self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Bottom, _) => true,
            (_, Value::Bottom) => false,
            _ => self.leq(a, b),
        }
    }

    fn meet_value(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Bottom, _) | (_, Value::Bottom) => Value::Bottom,
            _ if a == b => a.clone(),
            _ => self.meet(a, b),
        }
    }
}

/// Strings where distinct values are incomparable.
#[derive(Debug, Default, Clone, Copy)]
pub struct TrivialText;

impl ValueOrder for TrivialText {
    fn kind(&self) -> &'static str {
        "trivial"
    }
    fn parse(&self, text: &str) -> Option<Value> {
        Some(Value::Str(text.to_owned()))
    }
    fn leq(&self, a: &Value, b: &Value) -> bool {
        a == b
    }
    fn meet(&self, a: &Value, b: &Value) -> Value {
        if a == b {
            a.clone()
        } else {
            Value::Bottom
        }
    }
}

/// Integers where distinct values are incomparable, with an optional
/// abelian-group addition.
#[derive(Debug, Clone, Copy)]
pub struct TrivialInt {
    pub group: bool,
}

impl ValueOrder for TrivialInt {
    fn kind(&self) -> &'static str {
        if self.group {
            "group-integer"
        } else {
            "integer"
        }
    }
    fn parse(&self, text: &str) -> Option<Value> {
        text.trim().parse::<i64>().ok().map(Value::Int)
    }
    fn leq(&self, a: &Value, b: &Value) -> bool {
        a == b
    }
    fn meet(&self, a: &Value, b: &Value) -> Value {
        if a == b {
            a.clone()
        } else {
            Value::Bottom
        }
    }
    fn add(&self, a: &Value, b: &Value) -> Option<Value> {
        if !self.group {
            return None;
        }
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => x.checked_add(*y).map(Value::Int),
            _ => None,
        }
    }
    fn is_group(&self) -> bool {
        self.group
    }
}

/// Integers with their usual total order; meet is `min`. No integer is
/// minimal, so caches over this type collapse readily.
#[derive(Debug, Default, Clone, Copy)]
pub struct TotalInt;

impl ValueOrder for TotalInt {
    fn kind(&self) -> &'static str {
        "total"
    }
    fn parse(&self, text: &str) -> Option<Value> {
        text.trim().parse::<i64>().ok().map(Value::Int)
    }
    fn leq(&self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => x <= y,
            _ => false,
        }
    }
    fn meet(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => Value::Int(*x.min(y)),
            _ => Value::Bottom,
        }
    }
    fn add(&self, a: &Value, b: &Value) -> Option<Value> {
        match (a, b) {
            (Value::Int(x), Value::Int(y)) => x.checked_add(*y).map(Value::Int),
            _ => None,
        }
    }
    fn is_group(&self) -> bool {
        true
    }
}

/// Prefix order: `a <= b` iff `b` is a prefix of `a`. Up-sets are chains,
/// so two values have a common lower bound only when comparable.
#[derive(Debug, Default, Clone, Copy)]
pub struct PrefixText;

impl ValueOrder for PrefixText {
    fn kind(&self) -> &'static str {
        "prefix"
    }
    fn parse(&self, text: &str) -> Option<Value> {
        Some(Value::Str(text.to_owned()))
    }
    fn leq(&self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Str(x), Value::Str(y)) => x.starts_with(y.as_str()),
            _ => false,
        }
    }
    fn meet(&self, a: &Value, b: &Value) -> Value {
        if self.leq(a, b) {
            a.clone()
        } else if self.leq(b, a) {
            b.clone()
        } else {
            Value::Bottom
        }
    }
}

/// Wildcard order on names: `a <= b` iff `a == b` or `b` contains `*` and
/// matches the text of `a` (where `*` in `a` is an ordinary character).
///
/// Runs of `*` are collapsed on parse, which makes the relation
/// antisymmetric. The meet is exact whenever the two values are comparable
/// or share no lower bound; two incomparable patterns that do share
/// instances (`a*` and `*b`) meet at bottom.
#[derive(Debug, Default, Clone, Copy)]
pub struct GlobName;

impl GlobName {
    pub fn canonical(text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let mut prev_star = false;
        for ch in text.chars() {
            if ch == '*' {
                if !prev_star {
                    out.push(ch);
                }
                prev_star = true;
            } else {
                out.push(ch);
                prev_star = false;
            }
        }
        out
    }
}

impl ValueOrder for GlobName {
    fn kind(&self) -> &'static str {
        "glob"
    }
    fn parse(&self, text: &str) -> Option<Value> {
        Some(Value::Str(Self::canonical(text)))
    }
    fn leq(&self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Str(x), Value::Str(y)) => x == y || (y.contains('*') && glob_match(y, x)),
            _ => false,
        }
    }
    fn meet(&self, a: &Value, b: &Value) -> Value {
        if self.leq(a, b) {
            a.clone()
        } else if self.leq(b, a) {
            b.clone()
        } else {
            Value::Bottom
        }
    }
}

/// `*`-only wildcard match of `pattern` against the whole of `text`.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0usize, 0usize);
    let mut star: Option<usize> = None;
    let mut resume = 0usize;
    while ti < t.len() {
        if pi < p.len() && p[pi] != '*' && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            resume = ti;
            pi += 1;
        } else if let Some(s) = star {
            pi = s + 1;
            resume += 1;
            ti = resume;
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// Looks up a bundled order by its manifest identifier.
pub fn order_by_kind(kind: &str) -> Option<std::sync::Arc<dyn ValueOrder>> {
    use std::sync::Arc;
    let order: Arc<dyn ValueOrder> = match kind {
        "trivial" => Arc::new(TrivialText),
        "integer" => Arc::new(TrivialInt { group: false }),
        "group-integer" => Arc::new(TrivialInt { group: true }),
        "total" => Arc::new(TotalInt),
        "prefix" => Arc::new(PrefixText),
        "glob" => Arc::new(GlobName),
        _ => return None,
    };
    Some(order)
}
