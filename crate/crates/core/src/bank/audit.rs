//! After-the-fact detection of copied or forged checks.
//!
//! Rule violations cannot be prevented once a check leaves its bank, but
//! every check carries its whole history. Pooling checks and receipts and
//! walking their layers exposes three kinds of cheating:
//!
//! - two different layers with one tracking number (a copied bank reusing
//!   its serials),
//! - layers wrapping a common parent whose denominations add up to more
//!   than the parent (a forged split),
//! - a payment spent again instead of being returned towards its minter.

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;

use super::check::Check;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Finding {
    DuplicateTracking { tracking: String, copies: usize },
    OverSplit { tracking: String, parent: Decimal, children: Decimal },
    Respent { tracking: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub findings: Vec<Finding>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.findings.iter().filter(|f| matches!(f, Finding::DuplicateTracking { .. })).count()
    }

    pub fn over_splits(&self) -> usize {
        self.findings.iter().filter(|f| matches!(f, Finding::OverSplit { .. })).count()
    }

    pub fn respent(&self) -> usize {
        self.findings.iter().filter(|f| matches!(f, Finding::Respent { .. })).count()
    }
}

pub fn audit<'a>(checks: impl IntoIterator<Item = &'a Check>) -> AuditReport {
    // Distinct layers, keyed by their full bytes.
    let mut layers: BTreeMap<Vec<u8>, &Check> = BTreeMap::new();
    for c in checks {
        for l in c.layers() {
            layers.entry(l.to_bytes()).or_insert(l);
        }
    }
    let mut by_tracking: BTreeMap<&str, usize> = BTreeMap::new();
    let mut children: BTreeMap<Vec<u8>, Vec<&Check>> = BTreeMap::new();
    for l in layers.values() {
        *by_tracking.entry(l.tracking()).or_default() += 1;
        if let Some(inner) = l.inner() {
            children.entry(inner.to_bytes()).or_default().push(l);
        }
    }
    let mut findings = BTreeSet::new();
    for (t, n) in by_tracking {
        if n > 1 {
            findings.insert(Finding::DuplicateTracking { tracking: t.to_owned(), copies: n });
        }
    }
    for (parent_bytes, kids) in &children {
        let parent = layers[parent_bytes];
        let total: Decimal = kids.iter().map(|k| k.denomination()).sum();
        if total > parent.denomination() {
            findings.insert(Finding::OverSplit { tracking: parent.tracking().to_owned(), parent: parent.denomination(), children: total });
        }
        if let Some((k, returns)) = parent.payment_progress() {
            if returns >= k {
                continue;
            }
            let target = parent.hops()[k - 1 - returns].key;
            let honest = kids.len() == 1 && !kids[0].is_payment() && kids[0].recipient() == target;
            if !honest {
                findings.insert(Finding::Respent { tracking: parent.tracking().to_owned() });
            }
        }
    }
    AuditReport { findings: findings.into_iter().collect() }
}
