mod common;

use std::sync::Arc;

use common::{fixtures, hatch_expectation, lab_session, prefix_line_oracle};
use egg::cache::{self, Cache};
use egg::data::Datum;
use egg::shell::{render_display, Runtime, Session};
use egg::subtype::has_error;

#[test]
fn class_count_matches_the_line_oracle() {
    let corpus = fixtures().join("corpus");
    let mut s = Session::with_home(Arc::new(Runtime::standard()), &corpus);
    let got = s.execute_line("count has tstart:class lines ~//ext:py").unwrap();
    let n = prefix_line_oracle(&corpus, "class");
    let want = Cache::leaf(s.runtime().universe.datum([("count", n.to_string().as_str())]).unwrap());
    assert_eq!(got, want);
    assert_eq!(n, 6);
}

#[test]
fn hasnt_is_the_complement() {
    let corpus = fixtures().join("corpus");
    let mut s = Session::with_home(Arc::new(Runtime::standard()), &corpus);
    let all = s.execute_line("count lines ~//ext:py").unwrap();
    let with = s.execute_line("count has tstart:class lines ~//ext:py").unwrap();
    let without = s.execute_line("count hasnt tstart:class lines ~//ext:py").unwrap();
    let n = |c: &Cache| c.elements()[0].datum.get("count").and_then(|v| v.as_int()).unwrap();
    assert_eq!(n(&with) + n(&without), n(&all));
}

#[test]
fn hosts_hatch_matches_expectation() {
    let mut s = lab_session();
    let (fields, lines) = hatch_expectation();
    let h = s.load_hatch_file(&fixtures().join("lab").join("hosts.hatch")).unwrap();
    assert_eq!(h.fields, fields);
    assert_eq!(h.contents.len(), lines.len());
    assert!(!has_error(&h.contents));
    let shown = render_display(&s.runtime().universe, &h.contents, &h.fields);
    assert_eq!(shown.lines().collect::<Vec<_>>(), lines);
    // Loading leaves the caller's view alone.
    assert!(s.display_fields().is_empty());
    assert_eq!(s.dot(), &Cache::empty());
}

#[test]
fn hosts_hatch_as_a_script_updates_dot() {
    let mut s = lab_session();
    let path = fixtures().join("lab").join("hosts.hatch");
    let h = s.load_hatch_file(&path).unwrap();
    s.set_dot(Cache::singleton(Datum::single("type", "storage"), Cache::empty()));
    let report = s.run_script(&path);
    assert_eq!(report.status(), 0, "{:?}", report.failures);
    let (fields, _) = hatch_expectation();
    assert_eq!(s.display_fields(), fields.as_slice());
    assert_eq!(cache::contents(&s.runtime().universe, s.dot()), h.contents);
}

#[test]
fn hatch_can_be_entered_with_cd() {
    let mut s = lab_session();
    let path = fixtures().join("lab").join("hosts.hatch");
    let line = format!("cd {{path:\"{}\"}}", path.display());
    s.execute_line(&line).unwrap();
    let inside = s.execute_line("ls .").unwrap();
    assert_eq!(inside.len(), 3);
}
