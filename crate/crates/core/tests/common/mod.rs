//! Generators and independent oracles shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use egg::bank::{Bank, Check, Identity, Payload, PublicKey};
use egg::cache::{Cache, JoinLattice, Pair};
use egg::data::{BasicType, DataUniverse, Datum, Value, ValueOrder};
use egg::net::Rolodex;
use egg::shell::{load_plugins, Runtime, Session};
use rand::seq::SliceRandom;
use rand::Rng;
use rust_decimal::Decimal;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

// ---------------------------------------------------------------- caches

// Every pair of names is comparable or disjoint, and likewise for the
// prefixes, so pairwise meets are exact.
const NAMES: &[&str] = &["*", "a*", "ab*", "abc", "abd", "b*", "bx", "by"];
const PREFIXES: &[&str] = &["c", "cl", "cla", "d", "de"];
const HOSTS: &[&str] = &["h1", "h2", "h3"];

pub fn random_datum(u: &DataUniverse, rng: &mut impl Rng) -> Datum {
    let kinds = ["name", "tstart", "int", "count", "host"];
    let k = rng.gen_range(1..=2);
    let picked: Vec<&str> = kinds.choose_multiple(rng, k).copied().collect();
    let values: Vec<(&str, String)> = picked
        .into_iter()
        .map(|t| {
            let v = match t {
                "name" => NAMES.choose(rng).unwrap().to_string(),
                "tstart" => PREFIXES.choose(rng).unwrap().to_string(),
                "int" => rng.gen_range(-2..=2).to_string(),
                "count" => rng.gen_range(0..3).to_string(),
                _ => HOSTS.choose(rng).unwrap().to_string(),
            };
            (t, v)
        })
        .collect();
    u.datum(values.iter().map(|(t, v)| (*t, v.as_str()))).expect("pool values parse")
}

/// A cache of depth ≤ `depth` with ≤ 4 elements per level.
pub fn random_cache(u: &DataUniverse, rng: &mut impl Rng, depth: usize) -> Cache {
    if depth == 0 {
        return Cache::empty();
    }
    let n = rng.gen_range(0..=4);
    let pairs: Vec<Pair> = (0..n)
        .map(|_| {
            let d = random_datum(u, rng);
            let below = if rng.gen_bool(0.5) { random_cache(u, rng, depth - 1) } else { Cache::empty() };
            Pair::new(d, below)
        })
        .collect();
    Cache::from_pairs(u, pairs)
}

/// Checks the lattice laws on one triple; returns the first failing law.
pub fn lattice_laws(u: &DataUniverse, a: &Cache, b: &Cache, c: &Cache) -> Result<(), &'static str> {
    use egg::cache::{join, meet};
    let checks: [(&str, bool); 11] = [
        ("join commutes", join(u, a, b) == join(u, b, a)),
        ("meet commutes", meet(u, a, b) == meet(u, b, a)),
        ("join associates", join(u, &join(u, a, b), c) == join(u, a, &join(u, b, c))),
        ("meet associates", meet(u, &meet(u, a, b), c) == meet(u, a, &meet(u, b, c))),
        ("join idempotent", join(u, a, a) == *a),
        ("meet idempotent", meet(u, a, a) == *a),
        ("absorption meet(a, join(a,b))", meet(u, a, &join(u, a, b)) == *a),
        ("absorption join(a, meet(a,b))", join(u, a, &meet(u, a, b)) == *a),
        ("meet distributes", meet(u, a, &join(u, b, c)) == join(u, &meet(u, a, b), &meet(u, a, c))),
        ("join distributes", join(u, a, &meet(u, b, c)) == meet(u, &join(u, a, b), &join(u, a, c))),
        ("zero is the identity of join", join(u, a, &Cache::empty()) == *a),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((law, _)) => Err(law),
        None => Ok(()),
    }
}

// ------------------------------------------------------ finite posets

/// A finite poset on `0..n` given by its order relation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poset {
    pub n: usize,
    pub le: Vec<Vec<bool>>,
}

impl Poset {
    pub fn trivial(n: usize) -> Self {
        Self { n, le: (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect() }
    }

    fn relabel(&self, perm: &[usize]) -> Self {
        let mut le = vec![vec![false; self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                le[perm[i]][perm[j]] = self.le[i][j];
            }
        }
        Self { n: self.n, le }
    }

    pub fn antichains(&self) -> Vec<Vec<usize>> {
        (0u32..1 << self.n)
            .map(|mask| (0..self.n).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>())
            .filter(|s| s.iter().all(|&i| s.iter().all(|&j| i == j || !self.le[i][j])))
            .collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..n {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every poset on `n` points, one per isomorphism class.
pub fn posets_up_to_iso(n: usize) -> Vec<Poset> {
    let off: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut classes = BTreeSet::new();
    for mask in 0u32..1 << off.len() {
        let mut le = vec![vec![false; n]; n];
        for (k, &(i, j)) in off.iter().enumerate() {
            le[i][j] = mask & (1 << k) != 0;
        }
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        let antisymmetric = off.iter().all(|&(i, j)| !(le[i][j] && le[j][i]));
        let transitive = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(le[i][j] && le[j][k]) || le[i][k])));
        if antisymmetric && transitive {
            let p = Poset { n, le };
            let canonical = perms.iter().map(|q| p.relabel(q)).min().unwrap();
            classes.insert(canonical);
        }
    }
    classes.into_iter().collect()
}

/// Values `0..n` ordered by a [`Poset`]. Only the order is used by the
/// free construction; `meet` answers with the greatest lower bound when
/// there is one.
#[derive(Debug)]
pub struct PosetOrder(pub Poset);

impl ValueOrder for PosetOrder {
    fn kind(&self) -> &'static str {
        "finite-poset"
    }
    fn parse(&self, text: &str) -> Option<Value> {
        let i: i64 = text.parse().ok()?;
        (0..self.0.n as i64).contains(&i).then_some(Value::Int(i))
    }
    fn leq(&self, a: &Value, b: &Value) -> bool {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => self.0.le[x as usize][y as usize],
            _ => false,
        }
    }
    fn meet(&self, a: &Value, b: &Value) -> Value {
        let (Some(x), Some(y)) = (a.as_int(), b.as_int()) else { return Value::Bottom };
        let p = &self.0;
        let lower: Vec<usize> = (0..p.n).filter(|&z| p.le[z][x as usize] && p.le[z][y as usize]).collect();
        lower
            .iter()
            .find(|&&z| lower.iter().all(|&w| p.le[w][z]))
            .map_or(Value::Bottom, |&z| Value::Int(z as i64))
    }
}

pub fn poset_universe(p: &Poset) -> DataUniverse {
    let mut u = DataUniverse::empty();
    u.register_type(BasicType::new("p", Arc::new(PosetOrder(p.clone())))).unwrap();
    u
}

/// Elements of a finite distributive lattice, embedded in the subsets of
/// three points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bits(pub u8);

impl JoinLattice for Bits {
    fn bottom() -> Self {
        Bits(0)
    }
    fn join(&self, other: &Self) -> Self {
        Bits(self.0 | other.0)
    }
}

/// Small distributive lattices, each closed under union and intersection.
pub fn small_lattices() -> Vec<(&'static str, Vec<u8>)> {
    vec![
        ("1", vec![0]),
        ("chain 2", vec![0, 1]),
        ("chain 3", vec![0, 1, 3]),
        ("chain 4", vec![0, 1, 3, 7]),
        ("square", vec![0, 1, 2, 3]),
        ("2 x 3", vec![0, 1, 2, 3, 4, 5, 6, 7].into_iter().filter(|&b| b != 2 && b != 6).collect()),
        ("cube", (0..8).collect()),
    ]
}

pub fn is_distributive_sublattice(elems: &[u8]) -> bool {
    elems.contains(&0) && elems.iter().all(|a| elems.iter().all(|b| elems.contains(&(a | b)) && elems.contains(&(a & b))))
}

/// Every order-preserving map from `p` into `lattice`.
pub fn monotone_maps(p: &Poset, lattice: &[u8]) -> Vec<Vec<u8>> {
    let mut maps = vec![Vec::new()];
    for _ in 0..p.n {
        maps = maps
            .into_iter()
            .flat_map(|m: Vec<u8>| lattice.iter().map(move |&v| [m.clone(), vec![v]].concat()))
            .collect();
    }
    maps.retain(|f| (0..p.n).all(|i| (0..p.n).all(|j| !p.le[i][j] || f[i] & !f[j] == 0)));
    maps
}

pub fn point(u: &DataUniverse, i: usize) -> Datum {
    u.datum([("p", i.to_string().as_str())]).unwrap()
}

pub fn depth_one(u: &DataUniverse, points: &[usize]) -> Cache {
    Cache::from_pairs(u, points.iter().map(|&i| Pair::leaf(point(u, i))))
}

// --------------------------------------------------------------- data

/// A datum at no particular fixed point, touching the sources and targets
/// of the bundled extensions.
pub fn raw_extension_datum(rng: &mut impl Rng) -> Datum {
    const WORDS: &[&str] = &["class", "classy", "def", "x", ""];
    const PATHS: &[&str] = &["/a/b.py", "/a/c.txt", "/src", "/x/y/z.tar.gz", "/", "/a/"];
    const NAMES: &[&str] = &["b.py", "*.py", "c.txt", "src", "*", "z.tar.gz"];
    let mut d = Datum::top();
    if rng.gen_bool(0.6) {
        d.insert("text", WORDS.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.6) {
        d.insert("path", PATHS.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.4) {
        d.insert("name", NAMES.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.5) {
        d.insert("size", Value::Int(rng.gen_range(0..5000)));
    }
    if rng.gen_bool(0.2) {
        d.insert("ext", ["py", "txt", ""].choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.2) {
        d.insert("tstart", ["cl", "d"].choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.2) {
        d.insert("kb", Value::Int(rng.gen_range(0..5)));
    }
    d
}

// --------------------------------------------------------------- shell

/// Distinct lines starting with `prefix` across the `.py` files under
/// `root`, found by walking the directory directly.
pub fn prefix_line_oracle(root: &Path, prefix: &str) -> usize {
    fn walk(dir: &Path, out: &mut BTreeSet<String>, prefix: &str) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out, prefix);
            } else if p.extension().is_some_and(|e| e == "py") {
                let text = std::fs::read_to_string(&p).unwrap();
                out.extend(text.lines().filter(|l| l.starts_with(prefix)).map(str::to_owned));
            }
        }
    }
    let mut lines = BTreeSet::new();
    walk(root, &mut lines, prefix);
    lines.len()
}

/// The runtime and session the lab fixtures are written for.
pub fn lab_session() -> Session {
    let lab = fixtures().join("lab");
    let mut rt = Runtime::standard();
    load_plugins(&mut rt, &lab.join("plugins")).unwrap();
    let mut s = Session::new(Arc::new(rt));
    Rolodex::load(&lab.join("rolodex")).unwrap().install(&mut s);
    s
}

/// Parses `hosts.expected`: a `fields:` line, then one display line per
/// element.
pub fn hatch_expectation() -> (Vec<String>, Vec<String>) {
    let text = std::fs::read_to_string(fixtures().join("lab").join("hosts.expected")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let fields = lines.next().and_then(|l| l.strip_prefix("fields:")).unwrap();
    let fields = fields.trim().split(',').map(str::to_owned).collect();
    (fields, lines.map(str::to_owned).collect())
}

// ---------------------------------------------------------------- bank

pub fn dec(s: &str) -> Decimal {
    s.parse().unwrap()
}

/// Wraps `inner` in a layer signed by `who`, skipping every rule a bank
/// would enforce.
pub fn forge_layer(who: &Identity, inner: &Check, amount: Decimal, recipient: PublicKey, tracking: &str) -> Check {
    let p = inner.payload();
    let payload = Payload {
        denomination: amount,
        start: p.start,
        expiration: p.expiration,
        tracking: tracking.to_owned(),
        payment: false,
    };
    let unsigned = Check::Node { payload: payload.clone(), inner: Box::new(inner.clone()), recipient, signature: Vec::new() };
    let signature = who.sign(&unsigned.signed_bytes()).unwrap();
    Check::Node { payload, inner: Box::new(inner.clone()), recipient, signature }
}

/// What an honest driver did, recorded on the side.
#[derive(Default)]
pub struct Tally {
    pub minted: BTreeMap<PublicKey, Decimal>,
    pub earned: BTreeMap<PublicKey, Decimal>,
    pub steps: usize,
}

/// One random honest operation among `banks`: mint, give, pay, or cash a
/// payment. Whatever leaves a bank is deposited by its owner at once.
pub fn honest_step(banks: &mut [Bank], rng: &mut impl Rng, tally: &mut Tally) {
    let n = banks.len();
    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    let to = banks[j].public_key();
    let owned: Vec<Check> = banks[i].vault().cloned().collect();
    let pick = owned.choose(rng).cloned();
    let moved = match (rng.gen_range(0..4), pick) {
        (0, _) | (_, None) => {
            let amount = Decimal::from(rng.gen_range(1..100));
            let c = banks[i].mint(amount, None, to).unwrap();
            *tally.minted.entry(banks[i].public_key()).or_default() += amount;
            Some(c)
        }
        (_, Some(c)) if c.has_payment_layer() => {
            let back = banks[i].cash_and_return(c.tracking()).ok();
            if back.is_some() && c.is_payment() {
                *tally.earned.entry(c.minter()).or_default() += c.denomination();
            }
            back
        }
        (1, Some(c)) => Some(banks[i].transfer_gift(c.tracking(), to).unwrap()),
        (_, Some(c)) => {
            let amount = Decimal::new(rng.gen_range(1..=1000), 1).min(c.denomination());
            Some(banks[i].pay(c.tracking(), amount, to).unwrap().0)
        }
    };
    tally.steps += 1;
    if let Some(c) = moved {
        let owner = c.owner();
        let b = banks.iter_mut().find(|b| b.public_key() == owner).unwrap();
        if b.get(c.tracking()).is_none() {
            b.deposit(c).unwrap();
        }
    }
}

/// Compares what was minted with what the checks held across `banks`
/// still account for. A check counts at face value until the payment in
/// it has been cashed; from then on its value is the earnings.
pub fn conservation_gaps(banks: &[Bank], tally: &Tally) -> Vec<String> {
    let mut held: BTreeMap<PublicKey, Decimal> = tally.earned.clone();
    for b in banks {
        for c in b.vault() {
            let cashed = c.layers().iter().skip(1).any(|l| l.is_payment());
            if !cashed {
                *held.entry(c.minter()).or_default() += c.denomination();
            }
        }
    }
    let mut gaps = Vec::new();
    let keys: BTreeSet<PublicKey> = tally.minted.keys().chain(held.keys()).copied().collect();
    for k in keys {
        let (m, h) = (tally.minted.get(&k).copied().unwrap_or_default(), held.get(&k).copied().unwrap_or_default());
        if m != h {
            gaps.push(format!("{}: minted {m}, accounted {h}", k.fingerprint()));
        }
    }
    for (k, (m, h)) in egg::bank::conservation(banks, &[]) {
        if m != h || tally.minted.get(&k).copied().unwrap_or_default() != m {
            gaps.push(format!("{}: bank totals {m} / {h}", k.fingerprint()));
        }
    }
    gaps
}

// ------------------------------------------------------------ compiler

use egg::shell::{delta_row, DeltaRow, Expr, PiRow};

/// One input per δ row, each chosen so that no earlier row applies.
pub const DELTA_ROWS: &[(&str, &str)] = &[
    ("left blank", " text:a,name:x"),
    ("right blank", "text:a,name:x "),
    ("comma", "depth:3,name:x"),
    ("curly", "{text:a,depth:1}"),
    ("curly2", "x{text:a}"),
    ("datum", "text:a"),
    ("maximum", ""),
    ("bare word", "foo"),
];

pub fn delta_case(u: &DataUniverse, label: &str) -> Result<(), String> {
    let d = |entries: &[(&str, &str)]| u.datum(entries.iter().copied()).unwrap();
    let (_, input) = DELTA_ROWS.iter().find(|(l, _)| *l == label).ok_or("no such row")?;
    let (row, want) = match label {
        "left blank" => (DeltaRow::LeftBlank, d(&[("text", "a"), ("name", "x")])),
        "right blank" => (DeltaRow::RightBlank, d(&[("text", "a"), ("name", "x")])),
        "comma" => (DeltaRow::Comma, d(&[("depth", "3"), ("name", "x")])),
        "curly" => (DeltaRow::Curly, d(&[("text", "a"), ("depth", "1")])),
        "curly2" => (DeltaRow::Curly2, d(&[("name", "x"), ("text", "a")])),
        "datum" => (DeltaRow::Datum, d(&[("text", "a")])),
        "maximum" => (DeltaRow::Maximum, Datum::top()),
        _ => (DeltaRow::BareWord, d(&[("name", "foo")])),
    };
    match delta_row(u, input) {
        Ok((r, got)) if r == row && got == want => Ok(()),
        other => Err(format!("δ({input:?}) gave {other:?}")),
    }
}

pub const PI_ROWS: &[(&str, &str)] = &[
    ("lines", "a\nb"),
    ("left blank", " a b"),
    ("right blank", "a b "),
    ("shell command", "ls ."),
    ("put", "a < b c"),
    ("lub", "a (b < c)"),
    ("parenthesis", "(a < b)"),
    ("slashes", "./b"),
    ("dot", "."),
    ("tilde", "~"),
    ("at", "@"),
    ("singleton", "text:hi"),
];

fn s(u: &DataUniverse, name: &str) -> Expr {
    Expr::Singleton(u.datum([("name", name)]).unwrap())
}

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

pub fn pi_case(rt: &Runtime, label: &str) -> Result<(), String> {
    let u = &rt.universe;
    let (_, input) = PI_ROWS.iter().find(|(l, _)| *l == label).ok_or("no such row")?;
    let lub_ab = Expr::Lub(b(s(u, "a")), b(s(u, "b")));
    let (row, want) = match label {
        "lines" => (PiRow::Lines, Expr::Lines(b(s(u, "a")), b(s(u, "b")))),
        "left blank" => (PiRow::LeftBlank, lub_ab),
        "right blank" => (PiRow::RightBlank, lub_ab),
        "shell command" => (PiRow::ShellCommand, Expr::Command { name: "ls".into(), flags: Datum::top(), arg: b(Expr::Dot) }),
        "put" => (PiRow::Put, Expr::Put(b(s(u, "a")), b(Expr::Lub(b(s(u, "b")), b(s(u, "c")))))),
        "lub" => (PiRow::Lub, Expr::Lub(b(s(u, "a")), b(Expr::Put(b(s(u, "b")), b(s(u, "c")))))),
        "parenthesis" => (PiRow::Parenthesis, Expr::Put(b(s(u, "a")), b(s(u, "b")))),
        "slashes" => (PiRow::Slashes, Expr::Select(b(Expr::Dot), u.datum([("name", "b")]).unwrap())),
        "dot" => (PiRow::Dot, Expr::Dot),
        "tilde" => (PiRow::Tilde, Expr::Tilde),
        "at" => (PiRow::At, Expr::At),
        _ => (PiRow::Singleton, Expr::Singleton(u.datum([("text", "hi")]).unwrap())),
    };
    match rt.compiler().compile_row(input) {
        Ok((r, got)) if r == row && got == want => Ok(()),
        other => Err(format!("π({input:?}) gave {other:?}")),
    }
}

/// Three-term inputs against hand-expanded trees.
pub fn grouping_cases(rt: &Runtime) -> Vec<(&'static str, Result<(), String>)> {
    let u = &rt.universe;
    let (a, bb, c) = (s(u, "a"), s(u, "b"), s(u, "c"));
    let name = |n: &str| u.datum([("name", n)]).unwrap();
    let cases = [
        ("put groups from the right", "a < b < c", Expr::Put(b(a.clone()), b(Expr::Put(b(bb.clone()), b(c.clone()))))),
        ("lub splits leftmost", "a b c", Expr::Lub(b(a.clone()), b(Expr::Lub(b(bb.clone()), b(c.clone()))))),
        ("lines split leftmost", "a\nb\nc", Expr::Lines(b(a.clone()), b(Expr::Lines(b(bb.clone()), b(c.clone()))))),
        ("slashes split rightmost", "a/b//c", Expr::DeepSelect(b(Expr::Select(b(a.clone()), name("b"))), name("c"))),
        (
            "command data become flags",
            "ls depth:3 ./*.py",
            Expr::Command {
                name: "ls".into(),
                flags: u.datum([("depth", "3")]).unwrap(),
                arg: b(Expr::Select(b(Expr::Dot), name("*.py"))),
            },
        ),
    ];
    cases
        .into_iter()
        .map(|(label, input, want)| {
            let got = rt.compiler().compile(input);
            let r = if got.as_ref() == Ok(&want) { Ok(()) } else { Err(format!("π({input:?}) gave {got:?}")) };
            (label, r)
        })
        .collect()
}

/// Comments, continuation and parse failures in scripts.
pub fn script_cases(rt: &Arc<Runtime>) -> Vec<(&'static str, Result<(), String>)> {
    let mut out = Vec::new();
    let mut session = Session::new(rt.clone());
    let r = session.run_script_text("# only a comment\n   # another\n\n");
    out.push(("comment-only script", if r.status() == 0 && r.outputs.is_empty() { Ok(()) } else { Err(format!("{r:?}")) }));
    let r = session.run_script_text("a \\\n  b # trailing comment\n");
    let want = Cache::from_pairs(&rt.universe, [Pair::leaf(rt.universe.datum([("name", "a")]).unwrap()), Pair::leaf(rt.universe.datum([("name", "b")]).unwrap())]);
    let ok = r.status() == 0 && r.outputs.len() == 1 && r.outputs[0].1 == want;
    out.push(("continuation joins lines", if ok { Ok(()) } else { Err(format!("{r:?}")) }));
    let r = session.run_script_text("a\n(b\n");
    let ok = r.status() != 0 && r.failures.iter().any(|f| f.starts_with("line 2"));
    out.push(("parse failure is reported", if ok { Ok(()) } else { Err(format!("{r:?}")) }));
    let q = session.execute_line("text:\"a # b\" # comment");
    let ok = q == Ok(Cache::leaf(rt.universe.datum([("text", "a # b")]).unwrap()));
    out.push(("quoted hash is not a comment", if ok { Ok(()) } else { Err(format!("{q:?}")) }));
    out
}

/// Rows of `worked_examples.tsv` with the rendering each one produced.
pub struct Worked {
    pub line: usize,
    pub expected: String,
    pub got: String,
}

pub fn worked_examples() -> Vec<Worked> {
    let rt = Arc::new(Runtime::standard());
    let u = &rt.universe;
    let text = std::fs::read_to_string(fixtures().join("worked_examples.tsv")).unwrap();
    let mut out = Vec::new();
    for (i, row) in text.lines().enumerate() {
        if row.starts_with('#') || row.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = row.split('\t').collect();
        let (op, left, right, expected) = (cols[0], cols[1], cols[2], cols[3]);
        let mut s = Session::new(rt.clone());
        let mut run = |x: &str| s.execute_line(x).unwrap_or_else(|e| panic!("row {}: {e}", i + 1));
        let result = match op {
            "meet" => egg::cache::meet(u, &run(left), &run(right)),
            "join" => egg::cache::join(u, &run(left), &run(right)),
            _ => run(left),
        };
        out.push(Worked { line: i + 1, expected: expected.to_owned(), got: egg::cache::render(u, &result) });
    }
    out
}

// ----------------------------------------------------------- life cycle

/// The four rows of the gift/pay/return/receipt cycle, as displayed, plus
/// the change check and the bookkeeping after it. Errors name the first
/// thing that went wrong.
pub struct LifeCycle {
    pub rows: Vec<String>,
    pub change: String,
    pub all_verify: bool,
    pub final_is_receipt: bool,
    pub conserved: bool,
}

pub fn life_cycle(scheme: Arc<dyn egg::bank::SignatureScheme>) -> Result<LifeCycle, egg::bank::BankError> {
    use egg::bank::{display_check, verify_chain, DisplayOptions, NameBook};
    let mk = |n: &str| Bank::new(Identity::from_seed(n, n, scheme.clone()));
    let (mut a, mut b, mut c) = (mk("A"), mk("B"), mk("C"));
    let mut names = NameBook::new();
    for x in [&a, &b, &c] {
        names.insert(x.public_key(), &x.identity().name);
    }
    let show = |x: &Check| display_check(x, &names, &DisplayOptions::without_date());
    let gift = a.mint(dec("100"), None, b.public_key())?;
    let t = b.deposit(gift.clone())?;
    let (payment, change) = b.pay(&t, dec("50"), c.public_key())?;
    let t = c.deposit(payment.clone())?;
    let back = c.cash_and_return(&t)?;
    let t = b.deposit(back.clone())?;
    let receipt = b.cash_and_return(&t)?;
    let steps = [&gift, &payment, &back, &receipt];
    let all_verify = steps.iter().all(|x| verify_chain(scheme.as_ref(), x)) && change.iter().all(|x| verify_chain(scheme.as_ref(), x));
    a.deposit(receipt.clone())?;
    let banks = [a, b, c];
    let tally = Tally {
        minted: [(banks[0].public_key(), dec("100"))].into_iter().collect(),
        earned: [(banks[0].public_key(), dec("50"))].into_iter().collect(),
        steps: 0,
    };
    Ok(LifeCycle {
        rows: steps.iter().map(|x| show(x)).collect(),
        change: change.as_ref().map(&show).unwrap_or_default(),
        all_verify,
        final_is_receipt: receipt.is_receipt() && banks[0].receipts().len() == 1,
        conserved: conservation_gaps(&banks, &tally).is_empty(),
    })
}

// ------------------------------------------------------------------ net

use egg::net::{ProxyCache, ProxyOp, Server, ServerConfig, ServerHandle};
use std::sync::Mutex;

/// A loopback server exporting `root` that accepts only currency minted
/// by Alice, with Alice's wallet and a stranger's alongside.
pub struct Loopback {
    pub rt: Arc<Runtime>,
    pub handle: ServerHandle,
    pub server_key: PublicKey,
    pub alice: Arc<Mutex<Bank>>,
    pub mallory: Arc<Mutex<Bank>>,
}

impl Loopback {
    pub fn start(root: Cache) -> Self {
        let rt = Arc::new(Runtime::standard());
        let scheme: Arc<dyn egg::bank::SignatureScheme> = Arc::new(egg::bank::Ed25519);
        let server = Bank::new(Identity::from_seed("server1", "server1", scheme.clone()));
        let alice = Bank::new(Identity::from_seed("Alice", "alice", scheme.clone()));
        let mallory = Bank::new(Identity::from_seed("Mallory", "mallory", scheme));
        let mut names = egg::bank::NameBook::new();
        names.insert(alice.public_key(), "Alice");
        names.insert(server.public_key(), "server1");
        let mut server = server;
        server.set_preferences(egg::bank::Preferences::parse("egg-prefs 1\nAlice.* 1\n").unwrap());
        let server_key = server.public_key();
        let cfg = ServerConfig::new(rt.clone(), server, names, root);
        let handle = Server::bind("127.0.0.1:0", cfg).unwrap().spawn().unwrap();
        Self { rt, handle, server_key, alice: Arc::new(Mutex::new(alice)), mallory: Arc::new(Mutex::new(mallory)) }
    }

    pub fn address(&self) -> Datum {
        let port = self.handle.addr().port().to_string();
        self.rt.universe.datum([("host", "127.0.0.1"), ("port", port.as_str())]).unwrap()
    }

    pub fn proxy(&self, wallet: &Arc<Mutex<Bank>>) -> ProxyCache {
        ProxyCache { address: self.address(), server: self.server_key, wallet: wallet.clone(), fee: Decimal::ONE }
    }
}

pub fn random_op(u: &DataUniverse, rng: &mut impl Rng) -> ProxyOp {
    match rng.gen_range(0..5) {
        0 => ProxyOp::Root,
        1 => ProxyOp::Join(random_cache(u, rng, 2)),
        2 => ProxyOp::Meet(random_cache(u, rng, 2)),
        3 => ProxyOp::Select(random_datum(u, rng)),
        _ => ProxyOp::DeepSelect(random_datum(u, rng)),
    }
}

/// What an operation on `root` computes, straight from the algebra.
pub fn local_op(u: &DataUniverse, root: &Cache, op: &ProxyOp) -> Cache {
    use egg::cache;
    match op {
        ProxyOp::Root => root.clone(),
        ProxyOp::Join(c) => cache::join(u, root, c),
        ProxyOp::Meet(c) => cache::meet(u, root, c),
        ProxyOp::Select(d) => cache::select(u, root, d),
        ProxyOp::DeepSelect(d) => cache::deep_select(u, root, d),
        _ => unreachable!("only read-only operations are compared"),
    }
}

/// A listener that answers every request with `reply`, for testing how
/// clients treat bad receipts.
pub fn lying_server(reply: egg::net::WireMessage) -> std::net::SocketAddr {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming().take(4) {
            let mut stream = stream.unwrap();
            let _ = egg::net::WireMessage::read_from(&mut stream);
            let _ = reply.write_to(&mut stream);
        }
    });
    addr
}
