//! The bundled handlers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::cache::{self, Cache, Pair};
use crate::data::{DataUniverse, Datum, Value};

use super::{error_cache, error_datum, flags, has_error, named_types, PutContext, SubtypeHandler};

pub(super) fn bundled() -> Vec<Arc<dyn SubtypeHandler>> {
    vec![
        Arc::new(Storage::new("dir")),
        Arc::new(Storage::new("file")),
        Arc::new(Counter::new("counter")),
        Arc::new(Counter::new("count")),
        Arc::new(Lines),
        Arc::new(Stat),
        Arc::new(Has { negate: false }),
        Arc::new(Has { negate: true }),
        Arc::new(Expand { name: "ex", skip_top: false }),
        Arc::new(Expand { name: "ls", skip_top: true }),
        Arc::new(Translate),
        Arc::new(Split),
        Arc::new(First),
        Arc::new(Show),
        Arc::new(Save),
        Arc::new(ChangeDir),
        Arc::new(Hatch),
        Arc::new(Log),
        Arc::new(Interpreter),
        Arc::new(ServerFilter::default()),
        Arc::new(Remote),
    ]
}

fn leaf_in(u: &DataUniverse, d: Datum) -> Option<Pair> {
    let d = u.fixed_point(&d).ok()?;
    u.in_d(&d).then(|| Pair::leaf(d))
}

/// `X ∨ Y`.
pub struct Storage {
    name: String,
}

impl Storage {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_owned() }
    }
}

impl SubtypeHandler for Storage {
    fn type_name(&self) -> &str {
        &self.name
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, x: &Cache, y: &Cache) -> Cache {
        cache::join(cx.universe(), x, y)
    }
}

/// `(count:#Y, 0)`.
pub struct Counter {
    name: String,
}

impl Counter {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_owned() }
    }
}

impl SubtypeHandler for Counter {
    fn type_name(&self) -> &str {
        &self.name
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        Cache::from_pairs(u, [Pair::leaf(Datum::single("count", y.len() as i64))])
    }
}

/// One `(text:line, 0)` per line of every text datum in `Y`.
pub struct Lines;

impl SubtypeHandler for Lines {
    fn type_name(&self) -> &str {
        "lines"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        let pairs: Vec<Pair> = y
            .iter()
            .filter_map(|p| p.datum.get_str("text"))
            .flat_map(str::lines)
            .filter_map(|line| leaf_in(u, Datum::single("text", line)))
            .collect();
        cache::maximalize(u, pairs)
    }
}

/// Sums every abelian-group entry of `Y`; a `d` entry restricts the sum to
/// the named types.
///
/// Only generating entries are summed: a derived entry is recomputed from
/// the total of its source rather than summed on its own.
pub struct Stat;

impl SubtypeHandler for Stat {
    fn type_name(&self) -> &str {
        "stat"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        let targets = named_types(d);
        let mut totals: BTreeMap<String, Value> = BTreeMap::new();
        for p in y {
            let source = if targets.is_empty() {
                cache::generating_entries(u, &p.datum)
            } else {
                p.datum.clone()
            };
            for (t, v) in source.entries() {
                if !targets.is_empty() && !targets.iter().any(|x| x == t) {
                    continue;
                }
                let Some(ty) = u.basic_type(t).filter(|ty| ty.is_group()) else { continue };
                let next = match totals.get(t) {
                    Some(acc) => ty.group_add(acc, v),
                    None => Some(v.clone()),
                };
                if let Some(next) = next {
                    totals.insert(t.to_owned(), next);
                }
            }
        }
        let pairs: Vec<Pair> = totals.into_iter().filter_map(|(t, v)| leaf_in(u, Datum::single(t, v))).collect();
        cache::maximalize(u, pairs)
    }
}

/// Keeps (or, negated, drops) the elements of `Y` whose data lie below the
/// flags. A `d:T` flag instead asks for an entry of type `T`.
pub struct Has {
    negate: bool,
}

impl Has {
    fn matches(&self, u: &DataUniverse, d: &Datum, e: &Datum) -> bool {
        let wanted = named_types(d);
        let mut f = flags(d);
        f.remove("d");
        let hit = wanted.iter().all(|t| e.contains(t)) && u.datum_leq(e, &f);
        hit != self.negate
    }
}

impl SubtypeHandler for Has {
    fn type_name(&self) -> &str {
        if self.negate {
            "hasnt"
        } else {
            "has"
        }
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        let kept: Vec<Pair> = y.iter().filter(|p| self.matches(u, d, &p.datum)).cloned().collect();
        Cache::from_sorted_antichain(kept)
    }
}

/// Depth parameter from the handler datum or from a bare `(depth:n, 0)`
/// element of `Y`; the remaining elements are returned alongside.
fn depth_param(d: &Datum, y: &Cache) -> (usize, Cache) {
    let mut depth = d.get("depth").and_then(Value::as_int);
    let mut rest = Vec::new();
    for p in y {
        let bare = p.datum.len() == 1 && p.contents.is_empty();
        match p.datum.get("depth").and_then(Value::as_int) {
            Some(n) if bare => depth = Some(depth.map_or(n, |m| m.max(n))),
            _ => rest.push(p.clone()),
        }
    }
    (depth.unwrap_or(1).max(0) as usize, Cache::from_sorted_antichain(rest))
}

/// `ex` joins `Y` with its first `depth` levels of contents; `ls` leaves out
/// `Y` itself except for elements with no contents.
pub struct Expand {
    name: &'static str,
    skip_top: bool,
}

impl SubtypeHandler for Expand {
    fn type_name(&self) -> &str {
        self.name
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        let (depth, y) = depth_param(d, y);
        let mut parts = Vec::new();
        let mut level = y.clone();
        if self.skip_top {
            let leaves: Vec<Pair> = y.iter().filter(|p| p.contents.is_empty()).cloned().collect();
            parts.push(Cache::from_sorted_antichain(leaves));
        } else {
            parts.push(y.clone());
        }
        for _ in 0..depth {
            level = cache::contents(u, &level);
            if level.is_empty() {
                break;
            }
            parts.push(level.clone());
        }
        cache::join_all(u, parts.iter())
    }
}

/// Moves each `din` entry of `Y` to a `dout` entry.
pub struct Translate;

impl SubtypeHandler for Translate {
    fn type_name(&self) -> &str {
        "tr"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        let (Some(din), Some(dout)) = (d.get_str("din"), d.get_str("dout")) else {
            return error_cache(u, "tr needs din and dout", "tr");
        };
        let Some(out_type) = u.basic_type(dout) else {
            return error_cache(u, &format!("tr: unknown type {dout}"), "tr");
        };
        let mut pairs = Vec::new();
        for p in y {
            let Some(v) = p.datum.get(din) else {
                pairs.push(p.clone());
                continue;
            };
            let value = match out_type.parse(&v.to_string()) {
                Ok(value) => value,
                Err(e) => {
                    pairs.push(Pair::leaf(error_datum(u, &e.to_string(), "tr", None)));
                    continue;
                }
            };
            let mut datum = cache::generating_entries(u, &p.datum);
            datum.remove(din);
            let datum = u.raw_meet(&datum, &Datum::single(dout, value));
            pairs.push(Pair::new(datum, p.contents.clone()));
        }
        Cache::from_pairs(u, pairs)
    }
}

/// Splits the text (or the `d`-named entry) of each element of `Y` on `sep`,
/// or on whitespace when no separator is given.
pub struct Split;

impl SubtypeHandler for Split {
    fn type_name(&self) -> &str {
        "split"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let u = cx.universe();
        let field = named_types(d).into_iter().next().unwrap_or_else(|| "text".to_owned());
        let sep = d.get_str("sep").filter(|s| !s.is_empty());
        let Some(ty) = u.basic_type(&field) else {
            return error_cache(u, &format!("split: unknown type {field}"), "split");
        };
        let mut pairs = Vec::new();
        for p in y {
            let Some(text) = p.datum.get(&field).map(Value::to_string) else { continue };
            let parts: Vec<&str> = match sep {
                Some(s) => text.split(s).collect(),
                None => text.split_whitespace().collect(),
            };
            for part in parts {
                if let Some(pair) = ty.parse(part).ok().and_then(|v| leaf_in(u, Datum::single(field.clone(), v))) {
                    pairs.push(pair);
                }
            }
        }
        cache::maximalize(u, pairs)
    }
}

/// The first element of `Y` with no error data anywhere inside it.
pub struct First;

impl SubtypeHandler for First {
    fn type_name(&self) -> &str {
        "first"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, _cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        y.iter()
            .find(|p| !p.datum.contains("error") && !has_error(&p.contents))
            .map(|p| Cache::singleton(p.datum.clone(), p.contents.clone()))
            .unwrap_or_default()
    }
}

/// Sets the display fields from its own `d` entry and those of `Y`.
pub struct Show;

impl SubtypeHandler for Show {
    fn type_name(&self) -> &str {
        "show"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        let mut fields = named_types(d);
        for p in y {
            fields.extend(named_types(&p.datum));
        }
        match cx.set_display_fields(fields) {
            Ok(()) => Cache::empty(),
            Err(e) => error_cache(cx.universe(), &e, "show"),
        }
    }
}

pub struct Save;

impl SubtypeHandler for Save {
    fn type_name(&self) -> &str {
        "save"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, _y: &Cache) -> Cache {
        match cx.save_dot() {
            Ok(()) => Cache::empty(),
            Err(e) => error_cache(cx.universe(), &e, "save"),
        }
    }
}

fn is_hatch(d: &Datum) -> bool {
    d.get_str("ext") == Some("hatch") && d.contains("path")
}

/// Loads the hatch behind each hatch-file element; other elements pass.
fn open_hatches(cx: &mut dyn PutContext, y: &Cache) -> Cache {
    let mut pairs = Vec::with_capacity(y.len());
    for p in y {
        if is_hatch(&p.datum) {
            let path = p.datum.get_str("path").unwrap_or_default().to_owned();
            let contents = cx.load_hatch(&path);
            pairs.push(Pair::new(p.datum.clone(), contents));
        } else {
            pairs.push(p.clone());
        }
    }
    cache::maximalize(cx.universe(), pairs)
}

/// Rebinds the current working cache to the single element of `Y`.
pub struct ChangeDir;

impl SubtypeHandler for ChangeDir {
    fn type_name(&self) -> &str {
        "cd"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        if y.len() != 1 {
            let msg = format!("cd needs exactly one cache, got {}", y.len());
            return error_cache(cx.universe(), &msg, "cd");
        }
        let target = open_hatches(cx, y);
        match cx.change_dot(target) {
            Ok(()) => Cache::empty(),
            Err(e) => error_cache(cx.universe(), &e, "cd"),
        }
    }
}

/// Replaces hatch files in `Y` by the caches they describe.
pub struct Hatch;

impl SubtypeHandler for Hatch {
    fn type_name(&self) -> &str {
        "hatch"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        open_hatches(cx, y)
    }
}

/// Storage that also reports what it receives.
pub struct Log;

impl SubtypeHandler for Log {
    fn type_name(&self) -> &str {
        "log"
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, x: &Cache, y: &Cache) -> Cache {
        cx.record(y);
        cache::join(cx.universe(), x, y)
    }
}

/// The interpreter cache: whatever is put into it is what gets displayed.
pub struct Interpreter;

impl SubtypeHandler for Interpreter {
    fn type_name(&self) -> &str {
        "interpreter"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, _cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        y.clone()
    }
}

/// Result filter applied before a server replies: drops pairs whose subtype
/// is not allowed and refuses results above a size cap.
#[derive(Clone, Debug)]
pub struct ServerFilter {
    pub allow: BTreeSet<String>,
    pub max_size: usize,
}

impl Default for ServerFilter {
    fn default() -> Self {
        Self {
            allow: ["storage", "dir", "file"].into_iter().map(str::to_owned).collect(),
            max_size: 100_000,
        }
    }
}

impl ServerFilter {
    pub fn apply(&self, u: &DataUniverse, c: &Cache) -> Cache {
        let filtered = self.strip(u, c);
        if filtered.size() > self.max_size {
            let msg = format!("result has {} pairs, limit {}", filtered.size(), self.max_size);
            return error_cache(u, &msg, "server");
        }
        filtered
    }

    fn strip(&self, u: &DataUniverse, c: &Cache) -> Cache {
        let kept: Vec<Pair> = c
            .iter()
            .filter(|p| p.datum.get("type").is_none_or(|t| self.allow.contains(&t.to_string())))
            .map(|p| Pair::new(p.datum.clone(), self.strip(u, &p.contents)))
            .collect();
        cache::maximalize(u, kept)
    }
}

impl SubtypeHandler for ServerFilter {
    fn type_name(&self) -> &str {
        "server"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        self.apply(cx.universe(), y)
    }
}

/// A cache hosted elsewhere: putting `Y` executes `Y` on the addressed
/// server.
pub struct Remote;

impl SubtypeHandler for Remote {
    fn type_name(&self) -> &str {
        "remote"
    }
    fn is_pipe(&self) -> bool {
        true
    }
    fn put(&self, cx: &mut dyn PutContext, d: &Datum, _x: &Cache, y: &Cache) -> Cache {
        cx.remote(d, y)
    }
}

/// Stands in for a `type` value nobody registered.
pub(super) struct Unknown {
    pub(super) name: String,
}

impl SubtypeHandler for Unknown {
    fn type_name(&self) -> &str {
        &self.name
    }
    fn put(&self, cx: &mut dyn PutContext, _d: &Datum, _x: &Cache, _y: &Cache) -> Cache {
        error_cache(cx.universe(), &format!("unknown subtype {}", self.name), "put")
    }
}
