use super::*;
use crate::cache::{join, join_all, put, render};
use crate::data::standard_universe;

struct Fixture {
    u: DataUniverse,
    r: SubtypeRegistry,
}

impl Fixture {
    fn new() -> Self {
        Self { u: standard_universe(), r: SubtypeRegistry::standard() }
    }

    fn d(&self, entries: &[(&str, &str)]) -> Datum {
        self.u.datum(entries.iter().copied()).unwrap()
    }

    fn leaf(&self, entries: &[(&str, &str)]) -> Cache {
        Cache::leaf(self.d(entries))
    }

    fn names(&self, names: &[&str]) -> Cache {
        let leaves: Vec<Cache> = names.iter().map(|n| self.leaf(&[("name", n)])).collect();
        join_all(&self.u, leaves.iter())
    }

    fn put_into(&self, d: &Datum, x: &Cache, y: &Cache) -> Cache {
        let mut cx = PureContext::new(&self.u, &self.r);
        let handler = self.r.dispatch(d);
        handler.put(&mut cx, d, x, y)
    }

    fn show(&self, c: &Cache) -> String {
        render(&self.u, c)
    }
}

#[test]
fn storage_joins() {
    let f = Fixture::new();
    let d = f.d(&[("type", "storage")]);
    let a = f.names(&["a"]);
    let b = f.names(&["b"]);
    assert_eq!(f.put_into(&d, &Cache::empty(), &a), a);
    assert_eq!(f.put_into(&d, &a, &b), f.names(&["a", "b"]));
    assert_eq!(f.put_into(&d, &a, &a), a);
}

#[test]
fn dispatch_defaults_and_unknowns() {
    let f = Fixture::new();
    assert_eq!(f.r.dispatch(&Datum::top()).type_name(), "storage");
    assert_eq!(f.r.dispatch(&f.d(&[("type", "storage")])).type_name(), "storage");
    let bogus = f.d(&[("type", "bogus")]);
    let out = f.put_into(&bogus, &Cache::empty(), &Cache::empty());
    assert!(has_error(&out));
    assert!(f.show(&out).contains("unknown subtype bogus"));
}

#[test]
fn counter_counts_elements() {
    let f = Fixture::new();
    let d = f.d(&[("type", "counter")]);
    let y = f.names(&["a", "b", "c"]);
    assert_eq!(f.show(&f.put_into(&d, &Cache::empty(), &y)), "(count:3,0)");
    assert_eq!(f.show(&f.put_into(&d, &y, &Cache::empty())), "(count:0,0)");
    let nested = Cache::singleton(f.d(&[("name", "a")]), y);
    assert_eq!(f.show(&f.put_into(&d, &Cache::empty(), &nested)), "(count:1,0)");
}

#[test]
fn put_distributes_over_the_target() {
    let f = Fixture::new();
    let mut cx = PureContext::new(&f.u, &f.r);
    let a = Cache::leaf(f.d(&[("type", "counter")]));
    let b = Cache::singleton(f.d(&[("type", "storage")]), f.names(&["z"]));
    let y = f.names(&["p", "q"]);
    let whole = put(&mut cx, &join(&f.u, &a, &b), &y);
    let parts = join(&f.u, &put(&mut cx, &a, &y), &put(&mut cx, &b, &y));
    assert_eq!(whole, parts);
}

#[test]
fn lines_split_text() {
    let f = Fixture::new();
    let d = f.d(&[("type", "lines")]);
    let y = Cache::leaf(Datum::single("text", "a\nb"));
    assert_eq!(f.show(&f.put_into(&d, &Cache::empty(), &y)), "(text:a,0) ∨ (text:b,0)");
    let sized = f.leaf(&[("size", "5")]);
    assert_eq!(f.put_into(&d, &Cache::empty(), &sized), Cache::empty());
    assert_eq!(f.put_into(&d, &Cache::empty(), &Cache::empty()), Cache::empty());
}

#[test]
fn stat_sums_groups() {
    let f = Fixture::new();
    let d = f.d(&[("type", "stat"), ("d", "size")]);
    let y = join(&f.u, &f.leaf(&[("size", "3")]), &f.leaf(&[("size", "4")]));
    assert_eq!(f.show(&f.put_into(&d, &Cache::empty(), &y)), "(size:7,0)");
    let plain = f.d(&[("type", "stat")]);
    assert_eq!(f.show(&f.put_into(&plain, &Cache::empty(), &y)), "(size:7,0)");
    let text = f.leaf(&[("text", "hi")]);
    assert_eq!(f.put_into(&plain, &Cache::empty(), &text), Cache::empty());
    assert_eq!(f.put_into(&plain, &Cache::empty(), &Cache::empty()), Cache::empty());
}

#[test]
fn stat_recomputes_derived_entries() {
    let f = Fixture::new();
    let d = f.d(&[("type", "stat")]);
    let y = join(&f.u, &f.leaf(&[("size", "600")]), &f.leaf(&[("size", "700")]));
    let out = f.put_into(&d, &Cache::empty(), &y);
    assert_eq!(out.len(), 1);
    assert_eq!(out.elements()[0].datum.get("kb"), Some(&Value::Int(1)));
}

#[test]
fn has_filters_by_order() {
    let f = Fixture::new();
    let y = join_all(
        &f.u,
        [
            Cache::leaf(f.u.datum([("text", "class A")]).unwrap()),
            Cache::leaf(f.u.datum([("text", "def f")]).unwrap()),
        ]
        .iter(),
    );
    let has = f.d(&[("type", "has"), ("tstart", "class")]);
    assert_eq!(f.show(&f.put_into(&has, &Cache::empty(), &y)), "(text:\"class A\",0)");
    let hasnt = f.d(&[("type", "hasnt"), ("tstart", "class")]);
    assert_eq!(f.show(&f.put_into(&hasnt, &Cache::empty(), &y)), "(text:\"def f\",0)");
    let has_type = f.d(&[("type", "has"), ("d", "text")]);
    assert_eq!(f.put_into(&has_type, &Cache::empty(), &y), y);
}

#[test]
fn ls_and_ex_levels() {
    let f = Fixture::new();
    let inner = f.names(&["x", "y"]);
    let dir = Cache::singleton(f.d(&[("name", "dir")]), inner.clone());
    let ls = f.d(&[("type", "ls")]);
    assert_eq!(f.put_into(&ls, &Cache::empty(), &dir), inner);
    let ex = f.d(&[("type", "ex")]);
    assert_eq!(f.put_into(&ex, &Cache::empty(), &dir), join(&f.u, &dir, &inner));
    let leaf = f.names(&["solo"]);
    assert_eq!(f.put_into(&ls, &Cache::empty(), &leaf), leaf);
    let with_depth = join(&f.u, &dir, &f.leaf(&[("depth", "0")]));
    assert_eq!(f.put_into(&ex, &Cache::empty(), &with_depth), dir);
}

#[test]
fn tr_moves_entries() {
    let f = Fixture::new();
    let d = f.d(&[("type", "tr"), ("din", "text"), ("dout", "name")]);
    let y = f.leaf(&[("text", "notes.txt")]);
    let out = f.put_into(&d, &Cache::empty(), &y);
    assert_eq!(out, f.names(&["notes.txt"]));
    let missing = f.d(&[("type", "tr")]);
    assert!(has_error(&f.put_into(&missing, &Cache::empty(), &y)));
}

#[test]
fn split_on_separator() {
    let f = Fixture::new();
    let d = f.d(&[("type", "split"), ("sep", "/")]);
    let y = f.leaf(&[("text", "a/b/c")]);
    assert_eq!(f.put_into(&d, &Cache::empty(), &y).len(), 3);
    let ws = f.d(&[("type", "split")]);
    let y = f.leaf(&[("text", "one two  two")]);
    assert_eq!(f.put_into(&ws, &Cache::empty(), &y).len(), 2);
}

#[test]
fn first_skips_errors() {
    let f = Fixture::new();
    let d = f.d(&[("type", "first")]);
    let bad = Cache::singleton(f.d(&[("name", "a")]), error_cache(&f.u, "boom", "test"));
    let good = Cache::singleton(f.d(&[("name", "b")]), f.names(&["ok"]));
    let y = join(&f.u, &bad, &good);
    assert_eq!(f.put_into(&d, &Cache::empty(), &y), good);
    assert_eq!(f.put_into(&d, &Cache::empty(), &bad), Cache::empty());
}

#[test]
fn session_only_handlers_report_errors_in_pure_context() {
    let f = Fixture::new();
    for t in ["show", "save", "cd"] {
        let d = f.d(&[("type", t)]);
        let out = f.put_into(&d, &Cache::empty(), &f.names(&["a"]));
        assert!(has_error(&out), "{t}");
    }
}

#[test]
fn server_filter_strips_disallowed_types() {
    let f = Fixture::new();
    let hidden = Cache::singleton(f.d(&[("type", "log")]), f.names(&["secret"]));
    let shown = f.names(&["visible"]);
    let y = join(&f.u, &hidden, &shown);
    let filter = ServerFilter::default();
    assert_eq!(filter.apply(&f.u, &y), shown);
    let tiny = ServerFilter { max_size: 0, ..ServerFilter::default() };
    assert!(has_error(&tiny.apply(&f.u, &shown)));
}
