//! Bundled basic types and extensions.

use std::sync::Arc;

use super::{BasicType, DataUniverse, Datum, Extension, GlobName, PrefixText, TotalInt, TrivialInt, TrivialText, Value};

const TRIVIAL_STRINGS: &[&str] = &[
    "text", "ext", "path", "parent", "host", "person", "type", "d", "sep", "din", "dout", "error",
    "errorbase", "traceback", "op",
];

/// The bundled basic types.
pub fn bundled_types() -> Vec<BasicType> {
    let mut types = vec![
        BasicType::new("name", Arc::new(GlobName)),
        BasicType::new("tstart", Arc::new(PrefixText)),
        BasicType::new("int", Arc::new(TotalInt)),
        BasicType::new("size", Arc::new(TrivialInt { group: true })),
        BasicType::new("count", Arc::new(TrivialInt { group: true })),
        BasicType::new("kb", Arc::new(TrivialInt { group: true })),
        BasicType::new("depth", Arc::new(TrivialInt { group: false })),
        BasicType::new("port", Arc::new(TrivialInt { group: false })),
    ];
    types.extend(TRIVIAL_STRINGS.iter().map(|n| BasicType::new(*n, Arc::new(TrivialText))));
    types
}

/// Derives `target` from `source` with `f`; a bottom source maps to a
/// bottom target, an absent source to top.
fn derive(source: &'static str, target: &'static str, f: impl Fn(&Value) -> Option<Value> + Send + Sync + 'static) -> impl Fn(&Datum) -> Datum + Send + Sync {
    move |d: &Datum| match d.get(source) {
        Some(Value::Bottom) => Datum::single(target, Value::Bottom),
        Some(v) => f(v).map(|out| Datum::single(target, out)).unwrap_or_default(),
        None => Datum::top(),
    }
}

/// File extension implied by a name, when every string the name can stand
/// for has the same extension. Names without a dot get the empty extension.
pub(crate) fn ext_of_name(name: &str) -> Option<String> {
    match name.rfind('.') {
        Some(i) => {
            let tail = &name[i + 1..];
            (!tail.contains('*')).then(|| tail.to_owned())
        }
        None => (!name.contains('*')).then(String::new),
    }
}

pub(crate) fn basename(path: &str) -> Option<&str> {
    let trimmed = path.trim_end_matches('/');
    let base = trimmed.rsplit('/').next().unwrap_or(trimmed);
    (!base.is_empty()).then_some(base)
}

pub(crate) fn parent_dir(path: &str) -> Option<&str> {
    let trimmed = path.trim_end_matches('/');
    let i = trimmed.rfind('/')?;
    Some(if i == 0 { "/" } else { &trimmed[..i] })
}

/// The bundled extensions.
pub fn bundled_extensions() -> Vec<Extension> {
    vec![
        Extension::new(
            "text-tstart",
            derive("text", "tstart", |v| v.as_str().map(|s| Value::Str(s.to_owned()))),
        ),
        Extension::new(
            "path-name",
            derive("path", "name", |v| {
                v.as_str().and_then(basename).map(|b| Value::Str(GlobName::canonical(b)))
            }),
        ),
        Extension::new(
            "path-parent",
            derive("path", "parent", |v| v.as_str().and_then(parent_dir).map(|p| Value::Str(p.to_owned()))),
        ),
        Extension::new("name-ext", derive("name", "ext", |v| v.as_str().and_then(ext_of_name).map(Value::Str))),
        Extension::new("size-kb", derive("size", "kb", |v| v.as_int().map(|n| Value::Int(n.div_euclid(1024))))),
    ]
}

/// A universe holding every bundled type and extension.
pub fn standard_universe() -> DataUniverse {
    let mut u = DataUniverse::empty();
    for ty in bundled_types() {
        u.register_type(ty).expect("bundled type names are unique");
    }
    for ext in bundled_extensions() {
        u.register_extension(ext);
    }
    u
}
