//! Operation elements and their evaluation against an exported root.

use std::sync::Arc;

use crate::cache::{self, Cache, Pair};
use crate::data::{DataUniverse, Datum};
use crate::shell::{Runtime, Session};
use crate::subtype::{error_cache, PureContext};

/// One algebra operation on a remote cache.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProxyOp {
    /// The exported cache itself.
    Root,
    Join(Cache),
    Meet(Cache),
    Select(Datum),
    DeepSelect(Datum),
    /// Put into the exported cache, which keeps the result.
    Put(Cache),
    /// A shell line run with `.` bound to the exported cache.
    Eval(String),
}

impl ProxyOp {
    pub fn name(&self) -> &'static str {
        match self {
            ProxyOp::Root => "root",
            ProxyOp::Join(_) => "join",
            ProxyOp::Meet(_) => "meet",
            ProxyOp::Select(_) => "select",
            ProxyOp::DeepSelect(_) => "deep",
            ProxyOp::Put(_) => "put",
            ProxyOp::Eval(_) => "eval",
        }
    }
}

fn op_datum(u: &DataUniverse, name: &str) -> Datum {
    u.datum([("type", "op"), ("op", name)]).expect("op data are well formed")
}

/// The request element carrying `op`.
pub fn encode_op(u: &DataUniverse, op: &ProxyOp) -> Cache {
    let operand = match op {
        ProxyOp::Root => Cache::empty(),
        ProxyOp::Join(c) | ProxyOp::Meet(c) | ProxyOp::Put(c) => c.clone(),
        ProxyOp::Select(d) | ProxyOp::DeepSelect(d) => Cache::leaf(d.clone()),
        ProxyOp::Eval(line) => Cache::leaf(Datum::single("text", line.as_str())),
    };
    Cache::singleton(op_datum(u, op.name()), operand)
}

/// The operation an element encodes, if it is an operation element.
pub fn decode_op(p: &Pair) -> Option<Result<Vec<ProxyOp>, String>> {
    if p.datum.get_str("type") != Some("op") {
        return None;
    }
    let name = p.datum.get_str("op").unwrap_or("root");
    let data = || p.contents.iter().map(|q| q.datum.clone());
    Some(match name {
        "root" => Ok(vec![ProxyOp::Root]),
        "join" => Ok(vec![ProxyOp::Join(p.contents.clone())]),
        "meet" => Ok(vec![ProxyOp::Meet(p.contents.clone())]),
        "put" => Ok(vec![ProxyOp::Put(p.contents.clone())]),
        "select" => Ok(data().map(ProxyOp::Select).collect()),
        "deep" => Ok(data().map(ProxyOp::DeepSelect).collect()),
        "eval" => p
            .contents
            .iter()
            .map(|q| q.datum.get_str("text").map(|t| ProxyOp::Eval(t.to_owned())).ok_or_else(|| "eval needs text data".to_owned()))
            .collect(),
        other => Err(format!("unknown operation {other}")),
    })
}

/// Applies `op` to `root`, returning the result. `put` and `eval` may
/// replace `root`. Evaluation never reaches other servers.
pub fn apply_op(rt: &Arc<Runtime>, root: &mut Cache, op: &ProxyOp) -> Cache {
    let u = &rt.universe;
    match op {
        ProxyOp::Root => root.clone(),
        ProxyOp::Join(c) => cache::join(u, root, c),
        ProxyOp::Meet(c) => cache::meet(u, root, c),
        ProxyOp::Select(d) => cache::select(u, root, d),
        ProxyOp::DeepSelect(d) => cache::deep_select(u, root, d),
        ProxyOp::Put(c) => {
            let mut cx = PureContext::new(u, &rt.subtypes);
            *root = cache::put(&mut cx, root, c);
            root.clone()
        }
        ProxyOp::Eval(line) => {
            let mut s = Session::sandboxed(rt.clone());
            s.set_dot(root.clone());
            match s.execute_line(line) {
                Ok(c) => {
                    *root = s.dot().clone();
                    c
                }
                Err(e) => error_cache(u, &e.to_string(), "eval"),
            }
        }
    }
}
