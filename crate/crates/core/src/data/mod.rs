//! The data universe: basic types, data, extensions and fixed points.
//!
//! A [`Datum`] is a finite partial assignment of basic-type names to values,
//! i.e. an element of the direct sum of the basic meet semilattices. An
//! absent entry stands for the top of that type, so the empty datum `{}` is
//! the maximum. Data are kept in canonical form: entries sorted by type name
//! and driven to the fixed point of every registered [`Extension`].

mod bundle;
mod order;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use bundle::{bundled_extensions, bundled_types, standard_universe};
pub use order::{
    glob_match, order_by_kind, GlobName, PrefixText, TotalInt, TrivialInt, TrivialText, ValueOrder,
};

pub const DEFAULT_MAX_ITERATIONS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataError {
    #[error("unregistered data type `{0}`")]
    UnknownType(String),
    #[error("`{value}` is not a valid `{type_name}` value")]
    BadValue { type_name: String, value: String },
    #[error("data type `{0}` is already registered")]
    DuplicateType(String),
    #[error("extensions did not reach a fixed point within {0} rounds")]
    NonTerminating(usize),
}

/// A value of some basic type. `Bottom` is the adjoined minimum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bottom,
    Int(i64),
    Str(String),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Value::Bottom)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bottom => f.write_str("⊥"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

/// An element of the direct sum of basic types.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Datum {
    entries: BTreeMap<String, Value>,
}

impl Datum {
    /// The maximum `{}`.
    pub fn top() -> Self {
        Self::default()
    }

    pub fn single(type_name: impl Into<String>, value: impl Into<Value>) -> Self {
        let mut d = Self::default();
        d.entries.insert(type_name.into(), value.into());
        d
    }

    pub fn with(mut self, type_name: impl Into<String>, value: impl Into<Value>) -> Self {
        self.entries.insert(type_name.into(), value.into());
        self
    }

    pub fn insert(&mut self, type_name: impl Into<String>, value: impl Into<Value>) {
        self.entries.insert(type_name.into(), value.into());
    }

    pub fn remove(&mut self, type_name: &str) -> Option<Value> {
        self.entries.remove(type_name)
    }

    pub fn get(&self, type_name: &str) -> Option<&Value> {
        self.entries.get(type_name)
    }

    pub fn get_str(&self, type_name: &str) -> Option<&str> {
        self.get(type_name).and_then(Value::as_str)
    }

    pub fn contains(&self, type_name: &str) -> bool {
        self.entries.contains_key(type_name)
    }

    pub fn is_top(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// True when some entry is a bottom, i.e. the datum is demoted out of D.
    pub fn has_bottom(&self) -> bool {
        self.entries.values().any(Value::is_bottom)
    }
}

/// A basic data type: a name plus an order on its values.
#[derive(Clone, Debug)]
pub struct BasicType {
    name: String,
    order: Arc<dyn ValueOrder>,
}

impl BasicType {
    pub fn new(name: impl Into<String>, order: Arc<dyn ValueOrder>) -> Self {
        Self { name: name.into(), order }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order_arc(&self) -> Arc<dyn ValueOrder> {
        self.order.clone()
    }

    pub fn order(&self) -> &dyn ValueOrder {
        self.order.as_ref()
    }

    pub fn parse(&self, text: &str) -> Result<Value, DataError> {
        self.order.parse(text).ok_or_else(|| DataError::BadValue {
            type_name: self.name.clone(),
            value: text.to_owned(),
        })
    }

    pub fn leq(&self, a: &Value, b: &Value) -> bool {
        self.order.leq_value(a, b)
    }

    pub fn meet(&self, a: &Value, b: &Value) -> Value {
        self.order.meet_value(a, b)
    }

    pub fn bottom(&self) -> Value {
        Value::Bottom
    }

    pub fn group_add(&self, a: &Value, b: &Value) -> Option<Value> {
        self.order.add(a, b)
    }

    pub fn is_group(&self) -> bool {
        self.order.is_group()
    }
}

type RefineFn = dyn Fn(&Datum) -> Datum + Send + Sync;

/// A named refinement `F(s) = s ∧ f(s)` with `f` order preserving.
#[derive(Clone)]
pub struct Extension {
    name: String,
    refine: Arc<RefineFn>,
}

impl Extension {
    pub fn new(name: impl Into<String>, refine: impl Fn(&Datum) -> Datum + Send + Sync + 'static) -> Self {
        Self { name: name.into(), refine: Arc::new(refine) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The underlying `f`.
    pub fn refine(&self, d: &Datum) -> Datum {
        (self.refine)(d)
    }
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Extension").field("name", &self.name).finish()
    }
}

/// Registry of basic types and extensions.
///
/// Mutated only while configuring; afterwards shared immutably.
#[derive(Clone, Debug)]
pub struct DataUniverse {
    types: BTreeMap<String, BasicType>,
    extensions: Vec<Extension>,
    max_iterations: usize,
}

impl Default for DataUniverse {
    fn default() -> Self {
        Self::empty()
    }
}

impl DataUniverse {
    pub fn empty() -> Self {
        Self { types: BTreeMap::new(), extensions: Vec::new(), max_iterations: DEFAULT_MAX_ITERATIONS }
    }

    pub fn register_type(&mut self, ty: BasicType) -> Result<(), DataError> {
        if self.types.contains_key(ty.name()) {
            return Err(DataError::DuplicateType(ty.name().to_owned()));
        }
        self.types.insert(ty.name().to_owned(), ty);
        Ok(())
    }

    pub fn register_extension(&mut self, ext: Extension) {
        self.extensions.push(ext);
    }

    pub fn set_max_iterations(&mut self, n: usize) {
        self.max_iterations = n.max(1);
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn basic_type(&self, name: &str) -> Option<&BasicType> {
        self.types.get(name)
    }

    pub fn types(&self) -> impl Iterator<Item = &BasicType> {
        self.types.values()
    }

    pub fn extensions(&self) -> &[Extension] {
        &self.extensions
    }

    /// Parses `value` as a value of the named type.
    pub fn value(&self, type_name: &str, value: &str) -> Result<Value, DataError> {
        self.basic_type(type_name)
            .ok_or_else(|| DataError::UnknownType(type_name.to_owned()))?
            .parse(value)
    }

    /// Builds a canonical datum from textual `(type, value)` entries.
    pub fn datum<'a>(&self, entries: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Datum, DataError> {
        let mut d = Datum::top();
        for (t, v) in entries {
            let value = self.value(t, v)?;
            d = self.raw_meet(&d, &Datum::single(t, value));
        }
        self.fixed_point(&d)
    }

    fn check_registered(&self, d: &Datum) -> Result<(), DataError> {
        match d.type_names().find(|t| !self.types.contains_key(*t)) {
            Some(t) => Err(DataError::UnknownType(t.to_owned())),
            None => Ok(()),
        }
    }

    fn meet_values(&self, type_name: &str, a: &Value, b: &Value) -> Value {
        match self.types.get(type_name) {
            Some(ty) => ty.meet(a, b),
            None if a == b => a.clone(),
            None => Value::Bottom,
        }
    }

    fn leq_values(&self, type_name: &str, a: &Value, b: &Value) -> bool {
        match self.types.get(type_name) {
            Some(ty) => ty.leq(a, b),
            None => a == b,
        }
    }

    /// Componentwise meet in the direct sum, without extensions.
    pub fn raw_meet(&self, a: &Datum, b: &Datum) -> Datum {
        let mut out = a.clone();
        for (t, bv) in &b.entries {
            let merged = match out.entries.get(t) {
                Some(av) => self.meet_values(t, av, bv),
                None => bv.clone(),
            };
            out.entries.insert(t.clone(), merged);
        }
        out
    }

    /// Meet of two data, driven to its fixed point.
    pub fn delta_meet(&self, a: &Datum, b: &Datum) -> Result<Datum, DataError> {
        self.check_registered(a)?;
        self.check_registered(b)?;
        self.fixed_point(&self.raw_meet(a, b))
    }

    /// Meet used by the cache algebra: `None` when the result has no fixed
    /// point or leaves D.
    pub(crate) fn meet_in_d(&self, a: &Datum, b: &Datum) -> Option<Datum> {
        let m = self.fixed_point(&self.raw_meet(a, b)).ok()?;
        self.in_d(&m).then_some(m)
    }

    /// `a <= b`: every entry of `b` is matched by a smaller-or-equal entry
    /// of `a`. Absent entries are top.
    pub fn datum_leq(&self, a: &Datum, b: &Datum) -> bool {
        b.entries.iter().all(|(t, bv)| match a.entries.get(t) {
            Some(av) => self.leq_values(t, av, bv),
            None => false,
        })
    }

    /// True iff no entry is a bottom.
    pub fn in_d(&self, d: &Datum) -> bool {
        !d.has_bottom()
    }

    /// Applies every extension until none changes the datum.
    pub fn fixed_point(&self, d: &Datum) -> Result<Datum, DataError> {
        let order: Vec<usize> = (0..self.extensions.len()).collect();
        self.fixed_point_ordered(d, &order)
    }

    /// Fixed point applying extensions in the given index order each round.
    /// The result does not depend on `order`.
    pub fn fixed_point_ordered(&self, d: &Datum, order: &[usize]) -> Result<Datum, DataError> {
        let mut current = d.clone();
        for _ in 0..self.max_iterations {
            let mut changed = false;
            for &i in order {
                let ext = &self.extensions[i];
                let next = self.raw_meet(&current, &ext.refine(&current));
                if next != current {
                    current = next;
                    changed = true;
                }
            }
            if !changed {
                return Ok(current);
            }
        }
        Err(DataError::NonTerminating(self.max_iterations))
    }

    /// Re-parses every value through its type and drives the result to its
    /// fixed point. Rejects unregistered types.
    pub fn canonicalize(&self, d: &Datum) -> Result<Datum, DataError> {
        let mut out = Datum::top();
        for (t, v) in d.entries() {
            let ty = self.basic_type(t).ok_or_else(|| DataError::UnknownType(t.to_owned()))?;
            let value = match v {
                Value::Bottom => Value::Bottom,
                Value::Int(i) => ty.parse(&i.to_string())?,
                Value::Str(s) => ty.parse(s)?,
            };
            out.insert(t, value);
        }
        self.fixed_point(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> DataUniverse {
        standard_universe()
    }

    #[test]
    fn meet_copies_disjoint_entries() {
        let u = u();
        let a = u.datum([("text", "hello")]).unwrap();
        let b = u.datum([("size", "5")]).unwrap();
        let m = u.delta_meet(&a, &b).unwrap();
        assert_eq!(m.get("text"), Some(&Value::from("hello")));
        assert_eq!(m.get("size"), Some(&Value::Int(5)));
    }

    #[test]
    fn top_is_meet_identity() {
        let u = u();
        let a = u.datum([("text", "hello")]).unwrap();
        assert_eq!(u.delta_meet(&Datum::top(), &a).unwrap(), a);
        assert!(u.datum_leq(&a, &Datum::top()));
    }

    #[test]
    fn wildcard_meet_and_order() {
        let u = u();
        let world = u.datum([("name", "world")]).unwrap();
        let pat = u.datum([("name", "wor*")]).unwrap();
        let hello = u.datum([("name", "hello")]).unwrap();
        assert_eq!(u.delta_meet(&world, &pat).unwrap().get("name"), Some(&Value::from("world")));
        assert!(u.datum_leq(&world, &pat));
        assert!(!u.datum_leq(&hello, &pat));
    }

    #[test]
    fn incomparable_names_leave_d() {
        let u = u();
        let hello = u.datum([("name", "hello")]).unwrap();
        let world = u.datum([("name", "world")]).unwrap();
        let m = u.delta_meet(&hello, &world).unwrap();
        assert!(!u.in_d(&m));
        assert!(u.in_d(&Datum::top()));
        assert!(!u.in_d(&Datum::single("name", Value::Bottom)));
    }

    #[test]
    fn unknown_type_is_an_error() {
        let u = u();
        let bad = Datum::single("nosuch", "x");
        assert_eq!(u.delta_meet(&bad, &Datum::top()), Err(DataError::UnknownType("nosuch".into())));
        assert!(matches!(u.datum([("nosuch", "x")]), Err(DataError::UnknownType(_))));
        assert!(matches!(u.datum([("size", "abc")]), Err(DataError::BadValue { .. })));
    }

    #[test]
    fn tstart_extension_applies_once() {
        let u = u();
        let d = u.datum([("text", "class Foo")]).unwrap();
        assert_eq!(d.get_str("tstart"), Some("class Foo"));
        assert_eq!(u.fixed_point(&d).unwrap(), d);
    }

    #[test]
    fn no_extension_applies() {
        let u = u();
        let d = Datum::single("host", "node01");
        assert_eq!(u.fixed_point(&d).unwrap(), d);
    }

    #[test]
    fn runaway_extension_is_reported() {
        let mut u = DataUniverse::empty();
        u.register_type(BasicType::new("tstart", Arc::new(PrefixText))).unwrap();
        u.register_extension(Extension::new("grow", |d: &Datum| match d.get_str("tstart") {
            Some(s) => Datum::single("tstart", format!("{s}x")),
            None => Datum::top(),
        }));
        let d = Datum::single("tstart", "a");
        assert_eq!(u.fixed_point(&d), Err(DataError::NonTerminating(DEFAULT_MAX_ITERATIONS)));
    }

    #[test]
    fn duplicate_type_rejected() {
        let mut u = u();
        let err = u.register_type(BasicType::new("name", Arc::new(TrivialText))).unwrap_err();
        assert_eq!(err, DataError::DuplicateType("name".into()));
    }
}
