//! Runtime configuration and interactive sessions.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::cache::{self, Cache, Pair, DEFAULT_DEPTH_LIMIT};
use crate::data::{standard_universe, DataUniverse, Datum};
use crate::net::wire;
use crate::subtype::{error_cache, error_datum, has_error, PutContext, SubtypeRegistry};

use super::fs::{self as efs, FsOptions};
use super::pi::{Compiler, Expr};
use super::scan::{logical_lines, strip_comment};
use super::{render_display, ParseError};

/// Which leading words of a command line are taken as flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlagSpec {
    None,
    Any,
    Types(Vec<String>),
}

impl FlagSpec {
    pub fn types(names: &[&str]) -> Self {
        FlagSpec::Types(names.iter().map(|s| (*s).to_owned()).collect())
    }
}

/// A shell command: the cache that receives the command's argument.
#[derive(Clone, Debug)]
pub struct Command {
    pub cache: Cache,
    pub flags: FlagSpec,
}

/// Everything shared by the sessions of one process: data types, subtype
/// handlers and the shell command table. Immutable once built.
#[derive(Debug)]
pub struct Runtime {
    pub universe: DataUniverse,
    pub subtypes: SubtypeRegistry,
    pub commands: BTreeMap<String, Command>,
    pub depth_limit: usize,
    pub fs: FsOptions,
}

const BUNDLED_COMMANDS: &[(&str, &[&str])] = &[
    ("count", &[]),
    ("lines", &[]),
    ("stat", &["d"]),
    ("ex", &["depth"]),
    ("ls", &["depth"]),
    ("tr", &["din", "dout"]),
    ("split", &["sep", "d"]),
    ("first", &[]),
    ("show", &["d"]),
    ("save", &[]),
    ("cd", &[]),
    ("hatch", &[]),
    ("server", &[]),
];

impl Default for Runtime {
    fn default() -> Self {
        Self::standard()
    }
}

impl Runtime {
    /// Bundled types, extensions, handlers and commands.
    pub fn standard() -> Self {
        let mut rt = Self {
            universe: standard_universe(),
            subtypes: SubtypeRegistry::standard(),
            commands: BTreeMap::new(),
            depth_limit: DEFAULT_DEPTH_LIMIT,
            fs: FsOptions::default(),
        };
        for (name, flags) in BUNDLED_COMMANDS {
            let spec = if flags.is_empty() { FlagSpec::None } else { FlagSpec::types(flags) };
            rt.add_command(name, name, &Datum::top(), spec).expect("bundled command");
        }
        for name in ["has", "hasnt"] {
            rt.add_command(name, name, &Datum::top(), FlagSpec::Any).expect("bundled command");
        }
        rt
    }

    /// Registers command `name` as the singleton `({type:handler} ∧ preset, 0)`.
    pub fn add_command(&mut self, name: &str, handler: &str, preset: &Datum, flags: FlagSpec) -> Result<(), String> {
        if !self.subtypes.contains(handler) {
            return Err(format!("command {name}: no handler {handler}"));
        }
        let datum = self
            .universe
            .delta_meet(&Datum::single("type", handler), preset)
            .map_err(|e| format!("command {name}: {e}"))?;
        if !self.universe.in_d(&datum) {
            return Err(format!("command {name}: preset conflicts with its type"));
        }
        self.commands.insert(name.to_owned(), Command { cache: Cache::leaf(datum), flags });
        Ok(())
    }

    pub fn compiler(&self) -> Compiler<'_> {
        Compiler::new(&self.universe, &self.commands)
    }
}

/// Executes caches on other hosts for `remote` caches.
pub trait RemoteLink: Send {
    fn execute(&mut self, u: &DataUniverse, address: &Datum, request: &Cache) -> Cache;
}

/// Outcome of running a file as a script.
#[derive(Debug, Default)]
pub struct ScriptReport {
    pub outputs: Vec<(usize, Cache)>,
    pub failures: Vec<String>,
}

impl ScriptReport {
    pub fn status(&self) -> i32 {
        i32::from(!self.failures.is_empty())
    }
}

/// The cache a hatch file describes, and the display fields it selects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HatchCache {
    pub datum: Datum,
    pub contents: Cache,
    pub fields: Vec<String>,
}

const MAX_HATCH_NESTING: usize = 16;

/// One user's view: the reference caches `.`, `~` and `@`, display
/// settings, and the side effects handlers may request.
pub struct Session {
    rt: Arc<Runtime>,
    dot: Cache,
    tilde: Cache,
    at: Cache,
    display_fields: Vec<String>,
    home: Option<PathBuf>,
    hatch_fields: BTreeMap<String, Vec<String>>,
    log: Vec<Cache>,
    remote: Option<Box<dyn RemoteLink>>,
    hatch_nesting: usize,
    sandboxed: bool,
}

impl Session {
    /// A session whose reference caches are all `0`.
    pub fn new(rt: Arc<Runtime>) -> Self {
        Self {
            rt,
            dot: Cache::empty(),
            tilde: Cache::empty(),
            at: Cache::empty(),
            display_fields: Vec::new(),
            home: None,
            hatch_fields: BTreeMap::new(),
            log: Vec::new(),
            remote: None,
            hatch_nesting: 0,
            sandboxed: false,
        }
    }

    /// A session that cannot touch the filesystem: no hatch loading and no
    /// saving. Servers evaluate requests in one of these.
    pub fn sandboxed(rt: Arc<Runtime>) -> Self {
        Self { sandboxed: true, ..Self::new(rt) }
    }

    /// A session rooted at the directory `home`: `~` is its cache, joined
    /// with anything saved earlier, and `.` starts equal to `~`.
    pub fn with_home(rt: Arc<Runtime>, home: &Path) -> Self {
        let mut s = Self::new(rt);
        let home = home.canonicalize().unwrap_or_else(|_| home.to_path_buf());
        let mut tilde = efs::load(&s.rt.universe, &home, &s.rt.fs);
        if let Some(saved) = s.read_saved(&home) {
            let pairs: Vec<Pair> = tilde
                .iter()
                .map(|p| Pair::new(p.datum.clone(), cache::join(&s.rt.universe, &p.contents, &saved)))
                .collect();
            tilde = cache::maximalize(&s.rt.universe, pairs);
        }
        s.tilde = tilde.clone();
        s.dot = tilde;
        s.home = Some(home);
        s
    }

    fn saved_path(home: &Path) -> PathBuf {
        home.join(".egg").join("dot.cache")
    }

    fn read_saved(&self, home: &Path) -> Option<Cache> {
        let bytes = fs::read(Self::saved_path(home)).ok()?;
        wire::deserialize(&self.rt.universe, &bytes).ok().map(|c| cache::contents(&self.rt.universe, &c))
    }

    pub fn runtime(&self) -> &Arc<Runtime> {
        &self.rt
    }

    pub fn dot(&self) -> &Cache {
        &self.dot
    }

    pub fn tilde(&self) -> &Cache {
        &self.tilde
    }

    pub fn at(&self) -> &Cache {
        &self.at
    }

    pub fn set_dot(&mut self, c: Cache) {
        self.dot = c;
    }

    pub fn set_tilde(&mut self, c: Cache) {
        self.tilde = c;
    }

    pub fn set_at(&mut self, c: Cache) {
        self.at = c;
    }

    pub fn home(&self) -> Option<&Path> {
        self.home.as_deref()
    }

    pub fn display_fields(&self) -> &[String] {
        &self.display_fields
    }

    pub fn set_remote(&mut self, link: Box<dyn RemoteLink>) {
        self.remote = Some(link);
    }

    /// Caches received by logging caches, oldest first.
    pub fn log(&self) -> &[Cache] {
        &self.log
    }

    pub fn compile(&self, s: &str) -> Result<Expr, ParseError> {
        self.rt.compiler().compile(s)
    }

    /// Evaluates a compiled program. Puts into `.` or `~` rebind them.
    pub fn eval(&mut self, e: &Expr) -> Cache {
        let rt = self.rt.clone();
        let u = &rt.universe;
        match e {
            Expr::Empty => Cache::empty(),
            Expr::Lines(a, b) | Expr::Lub(a, b) => {
                let x = self.eval(a);
                let y = self.eval(b);
                cache::join(u, &x, &y)
            }
            Expr::Command { name, flags, arg } => {
                let Some(cmd) = rt.commands.get(name) else {
                    return error_cache(u, &format!("no command {name}"), "shell");
                };
                let target = if flags.is_top() { cmd.cache.clone() } else { cache::meet_selector(u, &cmd.cache, flags) };
                let y = self.eval(arg);
                let r = cache::put(self, &target, &y);
                cache::contents(u, &r)
            }
            Expr::Put(a, b) => {
                let x = self.eval(a);
                let y = self.eval(b);
                let r = cache::put(self, &x, &y);
                match **a {
                    Expr::Dot => self.dot = r.clone(),
                    Expr::Tilde => self.tilde = r.clone(),
                    _ => {}
                }
                r
            }
            Expr::Select(a, d) => {
                let x = self.eval(a);
                cache::select(u, &x, d)
            }
            Expr::DeepSelect(a, d) => {
                let x = self.eval(a);
                cache::deep_select(u, &x, d)
            }
            Expr::Dot => self.dot.clone(),
            Expr::Tilde => self.tilde.clone(),
            Expr::At => self.at.clone(),
            Expr::Singleton(d) if u.in_d(d) => Cache::leaf(d.clone()),
            Expr::Singleton(_) => Cache::empty(),
        }
    }

    /// Compiles and executes one line; the result is what the interpreter
    /// cache receives. Blank lines and comments give `0`.
    pub fn execute_line(&mut self, line: &str) -> Result<Cache, ParseError> {
        let line = strip_comment(line);
        if line.trim().is_empty() {
            return Ok(Cache::empty());
        }
        let e = self.compile(line)?;
        let result = self.eval(&e);
        Ok(self.interpret(&result))
    }

    /// `(I < result)/{}` with `I` the interpreter cache.
    fn interpret(&mut self, result: &Cache) -> Cache {
        let interpreter = Cache::leaf(Datum::single("type", "interpreter"));
        let shown = cache::put(self, &interpreter, result);
        cache::contents(&self.rt.universe, &shown)
    }

    /// Executes multi-line program text as one expression (lines joined).
    pub fn execute_text(&mut self, text: &str) -> Result<Cache, ParseError> {
        let lines = logical_lines(text);
        if lines.is_empty() {
            return Ok(Cache::empty());
        }
        let joined: Vec<&str> = lines.iter().map(|(_, l)| l.as_str()).collect();
        let e = self.compile(&joined.join("\n"))?;
        let result = self.eval(&e);
        Ok(self.interpret(&result))
    }

    /// Runs program text line by line for effect.
    pub fn run_script_text(&mut self, text: &str) -> ScriptReport {
        let mut report = ScriptReport::default();
        for (n, line) in logical_lines(text) {
            match self.execute_line(&line) {
                Ok(c) => {
                    if has_error(&c) {
                        report.failures.push(format!("line {n}: error data in result"));
                    }
                    report.outputs.push((n, c));
                }
                Err(e) => report.failures.push(format!("line {n}: {e}")),
            }
        }
        report
    }

    pub fn run_script(&mut self, path: &Path) -> ScriptReport {
        match fs::read_to_string(path) {
            Ok(text) => self.run_script_text(&text),
            Err(e) => ScriptReport { outputs: Vec::new(), failures: vec![format!("{}: {e}", path.display())] },
        }
    }

    /// Interprets a hatch file as the contents of a cache. Lines run with
    /// `.` bound to the hatch's own (initially empty) cache; the contents
    /// are what `.` holds at the end joined with every other line's result.
    pub fn load_hatch_file(&mut self, path: &Path) -> Result<HatchCache, String> {
        let rt = self.rt.clone();
        let u = &rt.universe;
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let datum = efs::file_datum(u, path, &rt.fs).ok_or_else(|| format!("{}: not a readable file", path.display()))?;
        let datum = u.fixed_point(&datum).map_err(|e| e.to_string())?;
        Ok(self.load_hatch_text(datum, &text))
    }

    /// Like [`Session::load_hatch_file`] for text already in memory.
    pub fn load_hatch_text(&mut self, datum: Datum, text: &str) -> HatchCache {
        if self.hatch_nesting >= MAX_HATCH_NESTING {
            let contents = error_cache(&self.rt.universe, "hatches nested too deeply", "hatch");
            return HatchCache { datum, contents, fields: Vec::new() };
        }
        self.hatch_nesting += 1;
        let saved_dot = std::mem::replace(&mut self.dot, Cache::leaf(datum.clone()));
        let saved_fields = std::mem::take(&mut self.display_fields);
        let mut results = Vec::new();
        for (n, line) in logical_lines(text) {
            match self.compile(&line) {
                Ok(e) => {
                    let r = self.eval(&e);
                    if !matches!(&e, Expr::Put(a, _) if **a == Expr::Dot) {
                        results.push(r);
                    }
                }
                Err(err) => {
                    let tb = format!("line {n}, column {}", err.position + 1);
                    results.push(Cache::leaf(error_datum(&self.rt.universe, &err.reason, "parse", Some(&tb))));
                }
            }
        }
        let u = &self.rt.universe;
        results.push(cache::contents(u, &self.dot));
        let contents = cache::join_all(u, results.iter());
        let fields = std::mem::replace(&mut self.display_fields, saved_fields);
        self.dot = saved_dot;
        self.hatch_nesting -= 1;
        if let Some(p) = datum.get_str("path") {
            self.hatch_fields.insert(p.to_owned(), fields.clone());
        }
        HatchCache { datum, contents, fields }
    }

    /// Evaluates a home-cache expression with `@` bound to `0`, so homes
    /// cannot refer to each other.
    pub fn evaluate_home(&mut self, expr: &str) -> Cache {
        let saved = std::mem::take(&mut self.at);
        let out = match self.execute_text(expr) {
            Ok(c) => c,
            Err(e) => Cache::leaf(error_datum(&self.rt.universe, &e.to_string(), "home", None)),
        };
        self.at = saved;
        out
    }

    /// Renders a result: algebraic notation, or one line per element showing
    /// only the display fields when some are selected.
    pub fn render(&self, c: &Cache) -> String {
        render_display(&self.rt.universe, c, &self.display_fields)
    }
}

impl PutContext for Session {
    fn universe(&self) -> &DataUniverse {
        &self.rt.universe
    }

    fn subtypes(&self) -> &SubtypeRegistry {
        &self.rt.subtypes
    }

    fn depth_limit(&self) -> usize {
        self.rt.depth_limit
    }

    fn set_display_fields(&mut self, fields: Vec<String>) -> Result<(), String> {
        self.display_fields = fields;
        Ok(())
    }

    fn change_dot(&mut self, target: Cache) -> Result<(), String> {
        if let [p] = target.elements() {
            if let Some(fields) = p.datum.get_str("path").and_then(|path| self.hatch_fields.get(path)) {
                self.display_fields = fields.clone();
            }
        }
        self.dot = target;
        Ok(())
    }

    fn save_dot(&mut self) -> Result<(), String> {
        if self.sandboxed {
            return Err("save is disabled here".into());
        }
        let home = self.home.clone().ok_or("no home directory")?;
        let bytes = wire::serialize(&self.dot).map_err(|e| e.to_string())?;
        let path = Self::saved_path(&home);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        }
        fs::write(&path, bytes).map_err(|e| e.to_string())
    }

    fn load_hatch(&mut self, path: &str) -> Cache {
        if self.sandboxed {
            return error_cache(&self.rt.universe, "hatch loading is disabled here", "hatch");
        }
        match self.load_hatch_file(Path::new(path)) {
            Ok(h) => h.contents,
            Err(e) => error_cache(&self.rt.universe, &e, "hatch"),
        }
    }

    fn record(&mut self, entry: &Cache) {
        self.log.push(entry.clone());
    }

    fn remote(&mut self, address: &Datum, request: &Cache) -> Cache {
        let rt = self.rt.clone();
        match self.remote.as_mut() {
            Some(link) => link.execute(&rt.universe, address, request),
            None => error_cache(&rt.universe, "no network link configured", "net"),
        }
    }
}
