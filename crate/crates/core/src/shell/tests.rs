use std::sync::Arc;

use super::*;
use crate::data::Datum;

fn session() -> Session {
    Session::new(Arc::new(Runtime::standard()))
}

#[test]
fn blank_lines_give_zero() {
    let mut s = session();
    assert_eq!(s.execute_line("").unwrap(), Cache::empty());
    assert_eq!(s.execute_line("   # just a comment").unwrap(), Cache::empty());
}

#[test]
fn names_and_lub() {
    let mut s = session();
    let c = s.execute_line("hello world").unwrap();
    assert_eq!(s.render(&c), "(hello,0) ∨ (world,0)");
}

#[test]
fn put_into_dot_rebinds_it() {
    let mut s = session();
    let a = s.execute_line("a").unwrap();
    s.set_dot(a);
    s.execute_line(". < b c").unwrap();
    assert_eq!(s.render(s.dot()), "(a,(b,0) ∨ (c,0))");
    let b = s.execute_line("./b").unwrap();
    assert_eq!(s.render(&b), "(b,0)");
}

#[test]
fn parse_errors_carry_positions() {
    let mut s = session();
    let e = s.execute_line("a nosuch:1").unwrap_err();
    assert_eq!(e.position, 2);
    assert!(s.execute_line("(a").is_err());
}

#[test]
fn commands_pipe() {
    let mut s = session();
    let c = s.execute_line("count a b c").unwrap();
    assert_eq!(s.render(&c), "(count:3,0)");
    let c = s.execute_line("count has name:a* ab ac b").unwrap();
    assert_eq!(s.render(&c), "(count:2,0)");
}

#[test]
fn show_selects_fields() {
    let mut s = session();
    s.execute_line("show d:\"host,size\"").unwrap();
    assert_eq!(s.display_fields(), ["host".to_owned(), "size".to_owned()]);
    let c = s.execute_line("{host:h1,size:3,person:p}").unwrap();
    assert_eq!(s.render(&c), "host:h1 size:3");
}

#[test]
fn hatch_text_binds_dot() {
    let mut s = session();
    let datum = Datum::single("name", "x");
    let h = s.load_hatch_text(datum, "# comment\nshow d:name\n. < a b\nc\n");
    assert_eq!(h.fields, vec!["name".to_owned()]);
    assert_eq!(crate::cache::render(&s.runtime().universe, &h.contents), "(a,0) ∨ (b,0) ∨ (c,0)");
    assert!(s.display_fields().is_empty());
}

#[test]
fn script_reports_failures() {
    let mut s = session();
    assert_eq!(s.run_script_text("a\n# c\nb\n").status(), 0);
    let r = s.run_script_text("a\n(b\n");
    assert_eq!(r.status(), 1);
    assert!(r.failures[0].starts_with("line 2"));
    assert_eq!(s.run_script_text("{type:bogus} < a\n").status(), 1);
}

#[test]
fn shell_rendering_round_trips() {
    let mut s = session();
    let c = s.execute_line("(a < b c) (d < (e < f)) g").unwrap();
    let text = render_shell(&s.runtime().universe, &c);
    assert_eq!(s.execute_line(&text).unwrap(), c);
}
