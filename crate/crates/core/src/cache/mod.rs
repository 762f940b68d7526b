//! Caches: the free distributive lattice on pairs `(datum, cache)`.
//!
//! A [`Cache`] is a finite antichain of [`Pair`]s. The pair order is
//! componentwise, `(d,c) <= (d',c')` iff `d <= d'` and `c <= c'`, and the
//! cache order is the induced order on antichains (`A <= B` iff every element
//! of `A` sits below some element of `B`).
//!
//! Join is the maximal elements of the union. Meet is computed pairwise: in
//! D the down-sets of two data intersect either trivially (their meet holds a
//! bottom and so is not in D) or in the principal ideal of `d ∧ e`. By
//! induction on depth the same holds for pairs, so
//! `↓(d,X) ∩ ↓(e,Y) = ↓(d∧e, X∧Y)` and the meet of two antichains is the
//! maximal elements of all pairwise meets. The brute-force oracle in the
//! tests checks this against the down-set definition on enumerated posets.
//!
//! Caches are immutable values. Elements are stored sorted and deduplicated,
//! which makes structural equality decide lattice equality.

mod free;
mod render;

use std::cmp::Ordering;

use crate::data::{DataUniverse, Datum};
use crate::subtype::PutContext;

pub use free::{free_map, JoinLattice};
pub use render::{render, render_datum, render_pair, render_value, JOIN_SEPARATOR};
pub(crate) use render::generating_entries;

pub const DEFAULT_DEPTH_LIMIT: usize = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cache {
    elements: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pair {
    pub datum: Datum,
    pub contents: Cache,
}

impl Ord for Pair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.datum.cmp(&other.datum).then_with(|| self.contents.cmp(&other.contents))
    }
}

impl PartialOrd for Pair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Pair {
    pub fn new(datum: Datum, contents: Cache) -> Self {
        Self { datum, contents }
    }

    pub fn leaf(datum: Datum) -> Self {
        Self { datum, contents: Cache::empty() }
    }
}

impl Cache {
    /// The minimum `0`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// `(d, X)`. The datum is trusted to be canonical and in D.
    pub fn singleton(datum: Datum, contents: Cache) -> Self {
        Self { elements: vec![Pair { datum, contents }] }
    }

    /// `(d, 0)`.
    pub fn leaf(datum: Datum) -> Self {
        Self::singleton(datum, Cache::empty())
    }

    /// Canonicalizes each datum, drops pairs outside D, and keeps the maximal
    /// elements.
    pub fn from_pairs(u: &DataUniverse, pairs: impl IntoIterator<Item = Pair>) -> Self {
        let kept = pairs.into_iter().filter_map(|p| {
            let datum = u.fixed_point(&p.datum).ok()?;
            u.in_d(&datum).then_some(Pair { datum, contents: p.contents })
        });
        maximalize(u, kept)
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Pair] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pair> {
        self.elements.iter()
    }

    /// Longest chain of nested pairs; `0` for the empty cache.
    pub fn depth(&self) -> usize {
        self.elements.iter().map(|p| 1 + p.contents.depth()).max().unwrap_or(0)
    }

    /// Total number of pairs at every level.
    pub fn size(&self) -> usize {
        self.elements.iter().map(|p| 1 + p.contents.size()).sum()
    }

    pub fn into_pairs(self) -> Vec<Pair> {
        self.elements
    }

    /// Builds a cache from pairs already known to form a sorted antichain.
    pub(crate) fn from_sorted_antichain(elements: Vec<Pair>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Self { elements }
    }

    /// Visits every datum at every depth.
    pub fn any_datum(&self, pred: &mut impl FnMut(&Datum) -> bool) -> bool {
        self.elements.iter().any(|p| pred(&p.datum) || p.contents.any_datum(pred))
    }
}

impl<'a> IntoIterator for &'a Cache {
    type Item = &'a Pair;
    type IntoIter = std::slice::Iter<'a, Pair>;
    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

pub fn pair_leq(u: &DataUniverse, p: &Pair, q: &Pair) -> bool {
    u.datum_leq(&p.datum, &q.datum) && cache_leq(u, &p.contents, &q.contents)
}

/// `a <= b` in the lattice, equivalently `join(a, b) == b`.
pub fn cache_leq(u: &DataUniverse, a: &Cache, b: &Cache) -> bool {
    a.elements.iter().all(|p| b.elements.iter().any(|q| pair_leq(u, p, q)))
}

/// The maximal elements of a finite set of pairs.
pub fn maximalize(u: &DataUniverse, pairs: impl IntoIterator<Item = Pair>) -> Cache {
    let mut all: Vec<Pair> = pairs.into_iter().collect();
    all.sort();
    all.dedup();
    if all.len() < 2 {
        return Cache { elements: all };
    }
    let keep: Vec<bool> = (0..all.len())
        .map(|i| !(0..all.len()).any(|j| j != i && pair_leq(u, &all[i], &all[j])))
        .collect();
    let elements = all.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect();
    Cache { elements }
}

/// `A ∨ B = (A ∪ B)↑`.
pub fn join(u: &DataUniverse, a: &Cache, b: &Cache) -> Cache {
    if a.is_empty() {
        return b.clone();
    }
    if b.is_empty() {
        return a.clone();
    }
    maximalize(u, a.elements.iter().chain(b.elements.iter()).cloned())
}

pub fn join_all<'a>(u: &DataUniverse, caches: impl IntoIterator<Item = &'a Cache>) -> Cache {
    maximalize(u, caches.into_iter().flat_map(|c| c.elements.iter().cloned()))
}

/// Meet of two pairs; `None` when their data meet leaves D.
pub fn pair_meet(u: &DataUniverse, p: &Pair, q: &Pair) -> Option<Pair> {
    let datum = u.meet_in_d(&p.datum, &q.datum)?;
    Some(Pair { datum, contents: meet(u, &p.contents, &q.contents) })
}

/// `A ∧ B = (A↓ ∩ B↓)↑`, computed as the maximal pairwise meets.
pub fn meet(u: &DataUniverse, a: &Cache, b: &Cache) -> Cache {
    if a.is_empty() || b.is_empty() {
        return Cache::empty();
    }
    if a == b {
        return a.clone();
    }
    let pairs = a
        .elements
        .iter()
        .flat_map(|p| b.elements.iter().filter_map(move |q| pair_meet(u, p, q)));
    maximalize(u, pairs)
}

/// `X ∧ (d,1)`: the contents component of the selector compares above every
/// cache, so only the data are met.
pub fn meet_selector(u: &DataUniverse, x: &Cache, d: &Datum) -> Cache {
    if d.is_top() {
        return x.clone();
    }
    let pairs = x.elements.iter().filter_map(|p| {
        let datum = u.meet_in_d(&p.datum, d)?;
        Some(Pair { datum, contents: p.contents.clone() })
    });
    maximalize(u, pairs)
}

/// `/`: `(a,X)/d = X ∧ (d,1)`, distributed over the elements of `a`.
pub fn select(u: &DataUniverse, a: &Cache, d: &Datum) -> Cache {
    let parts: Vec<Cache> = a.elements.iter().map(|p| meet_selector(u, &p.contents, d)).collect();
    join_all(u, parts.iter())
}

/// The contents `A/{}`.
pub fn contents(u: &DataUniverse, a: &Cache) -> Cache {
    select(u, a, &Datum::top())
}

/// `//`: `(a,X)//d = [(a,X) ∧ (d,1)] ∨ (X//d)`.
pub fn deep_select(u: &DataUniverse, a: &Cache, d: &Datum) -> Cache {
    let mut out: Vec<Pair> = Vec::new();
    collect_deep(u, a, d, &mut out);
    maximalize(u, out)
}

fn collect_deep(u: &DataUniverse, a: &Cache, d: &Datum, out: &mut Vec<Pair>) {
    for p in &a.elements {
        if let Some(datum) = u.meet_in_d(&p.datum, d) {
            out.push(Pair { datum, contents: p.contents.clone() });
        }
        collect_deep(u, &p.contents, d, out);
    }
}

/// `<`: `(d,X) < Y = (d, put(d,X,Y))`, distributed over the elements of `a`.
/// Each element's `put` is chosen by its datum's `type` entry.
pub fn put(cx: &mut dyn PutContext, a: &Cache, y: &Cache) -> Cache {
    let limit = cx.depth_limit();
    let mut pairs = Vec::with_capacity(a.len());
    for p in &a.elements {
        let handler = cx.subtypes().dispatch(&p.datum);
        let mut contents = handler.put(cx, &p.datum, &p.contents, y);
        if contents.depth() + 1 > limit {
            contents = crate::subtype::error_cache(
                cx.universe(),
                &format!("put result exceeds depth limit {limit}"),
                "depth",
            );
        }
        pairs.push(Pair { datum: p.datum.clone(), contents });
    }
    maximalize(cx.universe(), pairs)
}
