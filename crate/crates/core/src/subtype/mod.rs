//! Singleton-cache subtypes: the `put` behaviors selected by a datum's
//! `type` entry.
//!
//! Handlers never fail. Problems are reported as error data inside the
//! returned cache: a singleton carrying `error`, `errorbase` and, where
//! useful, `traceback` entries.

mod handlers;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::cache::{Cache, DEFAULT_DEPTH_LIMIT};
use crate::data::{DataUniverse, Datum, Value};

pub use handlers::*;

/// What a handler can see and affect while computing `put`.
///
/// Pure contexts only provide the universe and registry; an interactive
/// session also provides the reference caches and persistence.
pub trait PutContext {
    fn universe(&self) -> &DataUniverse;
    fn subtypes(&self) -> &SubtypeRegistry;

    fn depth_limit(&self) -> usize {
        DEFAULT_DEPTH_LIMIT
    }

    fn set_display_fields(&mut self, _fields: Vec<String>) -> Result<(), String> {
        Err("display fields need a shell session".into())
    }

    fn change_dot(&mut self, _target: Cache) -> Result<(), String> {
        Err("cd needs a shell session".into())
    }

    fn save_dot(&mut self) -> Result<(), String> {
        Err("save needs a shell session".into())
    }

    /// Contents of the hatch file at `path`.
    fn load_hatch(&mut self, path: &str) -> Cache {
        error_cache(self.universe(), &format!("cannot load hatch {path} outside a session"), "hatch")
    }

    /// Logging caches report every cache put into them here.
    fn record(&mut self, _entry: &Cache) {}

    /// Executes `request` on the server addressed by `address`.
    fn remote(&mut self, _address: &Datum, _request: &Cache) -> Cache {
        error_cache(self.universe(), "no network link configured", "net")
    }
}

/// The `put(d, X, Y)` of one subtype.
pub trait SubtypeHandler: Send + Sync {
    fn type_name(&self) -> &str;

    /// Pipes compute `put` from `Y` alone.
    fn is_pipe(&self) -> bool {
        false
    }

    fn put(&self, cx: &mut dyn PutContext, d: &Datum, x: &Cache, y: &Cache) -> Cache;
}

/// Handler table keyed by `type` value.
#[derive(Clone)]
pub struct SubtypeRegistry {
    handlers: BTreeMap<String, Arc<dyn SubtypeHandler>>,
    storage: Arc<dyn SubtypeHandler>,
}

impl fmt::Debug for SubtypeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubtypeRegistry").field("handlers", &self.handlers.keys().collect::<Vec<_>>()).finish()
    }
}

impl Default for SubtypeRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl SubtypeRegistry {
    /// Only the storage handler.
    pub fn minimal() -> Self {
        let storage: Arc<dyn SubtypeHandler> = Arc::new(Storage::new("storage"));
        let mut handlers = BTreeMap::new();
        handlers.insert("storage".to_owned(), storage.clone());
        Self { handlers, storage }
    }

    /// Every bundled handler.
    pub fn standard() -> Self {
        let mut r = Self::minimal();
        for h in handlers::bundled() {
            r.register(h);
        }
        r
    }

    pub fn register(&mut self, handler: Arc<dyn SubtypeHandler>) {
        self.handlers.insert(handler.type_name().to_owned(), handler);
    }

    /// Registers `handler` under an additional name.
    pub fn alias(&mut self, name: &str, target: &str) -> bool {
        match self.handlers.get(target).cloned() {
            Some(h) => {
                self.handlers.insert(name.to_owned(), h);
                true
            }
            None => false,
        }
    }

    pub fn get(&self, type_name: &str) -> Option<Arc<dyn SubtypeHandler>> {
        self.handlers.get(type_name).cloned()
    }

    pub fn contains(&self, type_name: &str) -> bool {
        self.handlers.contains_key(type_name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.handlers.keys().map(String::as_str)
    }

    /// Handler for `d`'s `type` entry: storage when absent, an
    /// error-emitting handler when unknown.
    pub fn dispatch(&self, d: &Datum) -> Arc<dyn SubtypeHandler> {
        match d.get("type") {
            None => self.storage.clone(),
            Some(v) => {
                let name = v.to_string();
                match self.handlers.get(&name) {
                    Some(h) => h.clone(),
                    None => Arc::new(Unknown { name }),
                }
            }
        }
    }
}

/// A context offering only the algebra.
pub struct PureContext<'a> {
    pub universe: &'a DataUniverse,
    pub subtypes: &'a SubtypeRegistry,
}

impl<'a> PureContext<'a> {
    pub fn new(universe: &'a DataUniverse, subtypes: &'a SubtypeRegistry) -> Self {
        Self { universe, subtypes }
    }
}

impl PutContext for PureContext<'_> {
    fn universe(&self) -> &DataUniverse {
        self.universe
    }
    fn subtypes(&self) -> &SubtypeRegistry {
        self.subtypes
    }
}

/// `(error:message, errorbase:base)` as a singleton.
pub fn error_cache(u: &DataUniverse, message: &str, base: &str) -> Cache {
    Cache::leaf(error_datum(u, message, base, None))
}

pub fn error_datum(u: &DataUniverse, message: &str, base: &str, traceback: Option<&str>) -> Datum {
    let mut d = Datum::single("error", message).with("errorbase", base);
    if let Some(tb) = traceback {
        d.insert("traceback", tb);
    }
    u.fixed_point(&d).unwrap_or(d)
}

/// True when any datum in `c`, at any depth, carries error data.
pub fn has_error(c: &Cache) -> bool {
    c.any_datum(&mut |d| d.contains("error"))
}

/// The handler parameters: `d` without its `type` entry.
pub fn flags(d: &Datum) -> Datum {
    let mut f = d.clone();
    f.remove("type");
    f
}

/// Comma-separated type names in the `d` entry.
pub fn named_types(d: &Datum) -> Vec<String> {
    match d.get("d") {
        Some(Value::Str(s)) => s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests;
