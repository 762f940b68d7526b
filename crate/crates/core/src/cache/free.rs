//! The universal property of the free construction.
//!
//! Given an order-preserving `f` from pairs into a distributive lattice `M`,
//! `F(A) = ⋁_{a∈A} f(a)` is the unique join-preserving map with
//! `F({p}) = f(p)`.

use super::{Cache, Pair};

/// The part of a distributive lattice that the extension needs.
pub trait JoinLattice: Clone {
    fn bottom() -> Self;
    fn join(&self, other: &Self) -> Self;
}

/// Extends `f` along the embedding `p ↦ {p}`.
pub fn free_map<M: JoinLattice>(a: &Cache, mut f: impl FnMut(&Pair) -> M) -> M {
    a.iter().fold(M::bottom(), |acc, p| acc.join(&f(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standard_universe, Datum};

    #[derive(Clone, Debug, PartialEq)]
    struct Max(i64);

    impl JoinLattice for Max {
        fn bottom() -> Self {
            Max(i64::MIN)
        }
        fn join(&self, other: &Self) -> Self {
            Max(self.0.max(other.0))
        }
    }

    #[test]
    fn empty_maps_to_bottom() {
        assert_eq!(free_map(&Cache::empty(), |_| Max(3)), Max::bottom());
    }

    #[test]
    fn singleton_maps_to_f() {
        let u = standard_universe();
        let d: Datum = u.datum([("int", "5")]).unwrap();
        let c = Cache::leaf(d);
        let f = |p: &Pair| Max(p.datum.get("int").and_then(|v| v.as_int()).unwrap());
        assert_eq!(free_map(&c, f), Max(5));
    }
}
