//! Local filesystem as caches.
//!
//! A directory is `({type:dir, path:P}, children)` and a file is
//! `({type:file, path:P, size:N, text:T}, 0)`; `name`, `parent` and `ext`
//! follow from `path` through the bundled extensions. Text is attached only
//! to small UTF-8 files. Hidden entries and symbolic links are skipped.

use std::fs;
use std::path::Path;

use crate::cache::{self, Cache, Pair};
use crate::data::{DataUniverse, Datum, Value};

#[derive(Clone, Debug)]
pub struct FsOptions {
    pub max_depth: usize,
    pub max_entries: usize,
    pub max_text: u64,
}

impl Default for FsOptions {
    fn default() -> Self {
        Self { max_depth: 12, max_entries: 50_000, max_text: 1 << 20 }
    }
}

fn path_str(path: &Path) -> Option<String> {
    path.to_str().map(str::to_owned)
}

fn listable(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| !n.starts_with('.') && !n.contains('*'))
}

/// Datum of a directory.
pub fn dir_datum(u: &DataUniverse, path: &Path) -> Option<Datum> {
    let d = Datum::single("type", "dir").with("path", Value::Str(path_str(path)?));
    u.fixed_point(&d).ok().filter(|d| u.in_d(d))
}

/// Datum of a regular file.
pub fn file_datum(u: &DataUniverse, path: &Path, opts: &FsOptions) -> Option<Datum> {
    let meta = fs::metadata(path).ok()?;
    let mut d = Datum::single("type", "file")
        .with("path", Value::Str(path_str(path)?))
        .with("size", Value::Int(i64::try_from(meta.len()).ok()?));
    if meta.len() <= opts.max_text {
        if let Ok(text) = fs::read_to_string(path) {
            d.insert("text", text);
        }
    }
    u.fixed_point(&d).ok().filter(|d| u.in_d(d))
}

/// The cache of `path`: a singleton for a file, or a directory with its
/// subtree.
pub fn load(u: &DataUniverse, path: &Path, opts: &FsOptions) -> Cache {
    let mut budget = opts.max_entries;
    match load_entry(u, path, opts, 0, &mut budget) {
        Some(p) => Cache::singleton(p.datum, p.contents),
        None => Cache::empty(),
    }
}

fn load_entry(u: &DataUniverse, path: &Path, opts: &FsOptions, depth: usize, budget: &mut usize) -> Option<Pair> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let meta = fs::symlink_metadata(path).ok()?;
    if meta.file_type().is_symlink() {
        return None;
    }
    if meta.is_file() {
        return file_datum(u, path, opts).map(Pair::leaf);
    }
    if !meta.is_dir() {
        return None;
    }
    let datum = dir_datum(u, path)?;
    if depth >= opts.max_depth {
        return Some(Pair::leaf(datum));
    }
    let mut children: Vec<_> = fs::read_dir(path).ok()?.filter_map(Result::ok).map(|e| e.path()).filter(|p| listable(p)).collect();
    children.sort();
    let pairs: Vec<Pair> = children.iter().filter_map(|c| load_entry(u, c, opts, depth + 1, budget)).collect();
    Some(Pair::new(datum, cache::maximalize(u, pairs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::{deep_select, render};
    use crate::data::standard_universe;

    #[test]
    fn loads_a_tree() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("src")).unwrap();
        fs::write(dir.path().join("src/a.py"), "class A:\n    pass\n").unwrap();
        fs::write(dir.path().join(".hidden"), "x").unwrap();
        let u = standard_universe();
        let c = load(&u, dir.path(), &FsOptions::default());
        assert_eq!(c.len(), 1);
        let py = deep_select(&u, &c, &u.datum([("ext", "py")]).unwrap());
        assert_eq!(py.len(), 1);
        let d = &py.elements()[0].datum;
        assert_eq!(d.get_str("name"), Some("a.py"));
        assert_eq!(d.get("size"), Some(&Value::Int(18)));
        assert!(!render(&u, &c).contains("hidden"));
    }

    #[test]
    fn missing_path_is_empty() {
        let u = standard_universe();
        assert!(load(&u, Path::new("/nonexistent/egg/path"), &FsOptions::default()).is_empty());
    }
}
