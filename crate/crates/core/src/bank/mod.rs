//! Hierarchical currency: checks, banks, payments, receipts and the
//! preference tables that turn currency into access control.
//!
//! Value flows by wrapping: a gift or payment adds a layer signed by the
//! current owner. A payment is returned hop by hop towards the minter once
//! cashed; when it arrives it is a receipt.
//!
//! Accounting per minter: spendable checks count their denomination,
//! uncashed payments count theirs, cashed payments have been moved to the
//! cashing bank's `earned` ledger, and return checks and receipts count
//! nothing. The sum equals what the minter issued.

mod audit;
mod check;
mod crypto;
mod display;
mod pattern;
mod store;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Duration, Timelike, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use audit::{audit, AuditReport, Finding};
pub use check::{verify_chain, Check, Hop, Payload, CHECK_MAGIC, CHECK_VERSION};
pub use crypto::{scheme_by_name, Ed25519, Identity, MockScheme, PublicKey, SignatureScheme};
pub use display::{display_check, parse_display, DisplayOptions, DisplayedCheck, NameBook};
pub use pattern::{match_currency, CurrencyPattern, PatternError, PreferenceRow, Preferences};
pub use store::{load_identity, save_identity, BankStore, StoreError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BankError {
    #[error("amount must be positive")]
    NonPositive,
    #[error("this bank has no private key")]
    NoPrivateKey,
    #[error("check {0} is not in the vault")]
    UnknownCheck(String),
    #[error("check is owned by someone else")]
    NotOwner,
    #[error("check signatures do not verify")]
    InvalidChain,
    #[error("check expired")]
    Expired,
    #[error("check not valid yet")]
    NotYetValid,
    #[error("payment checks cannot be spent again")]
    PaymentRule,
    #[error("amount exceeds the check's denomination")]
    Overdraft,
    #[error("check carries no payment")]
    NotAPayment,
    #[error("check is already a receipt")]
    AlreadyReceipt,
    #[error("start date after expiration date")]
    BadValidity,
}

/// Where a bank reads the time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    pub fn now(&self) -> DateTime<Utc> {
        match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        }
    }
}

/// Start and expiration of a new check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Validity {
    pub start: DateTime<Utc>,
    pub expiration: DateTime<Utc>,
}

impl Validity {
    pub fn from_start(start: DateTime<Utc>, days: i64) -> Self {
        Self { start, expiration: start + Duration::days(days) }
    }
}

pub const DEFAULT_VALIDITY_DAYS: i64 = 365;

/// One state change, as appended to the ledger.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub op: String,
    pub at: String,
    /// Checks placed in the vault, as hex bytes.
    #[serde(default)]
    pub added: Vec<String>,
    /// Tracking numbers removed from the vault.
    #[serde(default)]
    pub removed: Vec<String>,
    /// Checks handed to someone else, as hex bytes.
    #[serde(default)]
    pub issued: Vec<String>,
    #[serde(default)]
    pub minted: Option<String>,
    /// Earned value: minter key hex and amount.
    #[serde(default)]
    pub earned: Option<(String, String)>,
    pub serial: u64,
}

/// A user's bank: identity, vault of owned checks, preferences and ledger.
#[derive(Clone, Debug)]
pub struct Bank {
    identity: Identity,
    vault: BTreeMap<String, Check>,
    receipts: Vec<Check>,
    preferences: Preferences,
    ledger: Vec<LedgerEntry>,
    minted: Decimal,
    earned: BTreeMap<PublicKey, Decimal>,
    serial: u64,
    clock: Clock,
}

impl Bank {
    pub fn new(identity: Identity) -> Self {
        Self {
            identity,
            vault: BTreeMap::new(),
            receipts: Vec::new(),
            preferences: Preferences::default(),
            ledger: Vec::new(),
            minted: Decimal::ZERO,
            earned: BTreeMap::new(),
            serial: 0,
            clock: Clock::System,
        }
    }

    pub fn identity(&self) -> &Identity {
        &self.identity
    }

    pub fn public_key(&self) -> PublicKey {
        self.identity.public
    }

    pub fn scheme(&self) -> &dyn SignatureScheme {
        self.identity.scheme().as_ref()
    }

    pub fn set_clock(&mut self, clock: Clock) {
        self.clock = clock;
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn preferences(&self) -> &Preferences {
        &self.preferences
    }

    pub fn set_preferences(&mut self, prefs: Preferences) {
        self.preferences = prefs;
    }

    pub fn vault(&self) -> impl Iterator<Item = &Check> {
        self.vault.values()
    }

    pub fn get(&self, tracking: &str) -> Option<&Check> {
        self.vault.get(tracking)
    }

    pub fn receipts(&self) -> &[Check] {
        &self.receipts
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    /// Total this bank has minted.
    pub fn minted(&self) -> Decimal {
        self.minted
    }

    /// Value earned by cashing payments, per minter.
    pub fn earned(&self) -> &BTreeMap<PublicKey, Decimal> {
        &self.earned
    }

    /// Weight of the best preference row accepting `c`.
    pub fn accepts(&self, c: &Check, names: &NameBook) -> Option<Decimal> {
        self.preferences.weight(c, names)
    }

    fn next_tracking(&mut self) -> String {
        self.serial += 1;
        format!("{}-{}", self.identity.public.fingerprint(), self.serial)
    }

    fn sign_layer(&self, unsigned: Check) -> Result<Check, BankError> {
        let signature = self.identity.sign(&unsigned.signed_bytes()).ok_or(BankError::NoPrivateKey)?;
        Ok(match unsigned {
            Check::Leaf { payload, signer, recipient, .. } => Check::Leaf { payload, signer, recipient, signature },
            Check::Node { payload, inner, recipient, .. } => Check::Node { payload, inner, recipient, signature },
        })
    }

    fn leaf(&mut self, amount: Decimal, validity: Option<Validity>, recipient: PublicKey, payment: bool) -> Result<Check, BankError> {
        if amount <= Decimal::ZERO {
            return Err(BankError::NonPositive);
        }
        if !self.identity.can_sign() {
            return Err(BankError::NoPrivateKey);
        }
        let v = validity.unwrap_or_else(|| Validity::from_start(self.now(), DEFAULT_VALIDITY_DAYS));
        // Checks carry whole seconds; drop the rest so signatures survive a round trip.
        let whole = |t: DateTime<Utc>| t.with_nanosecond(0).unwrap_or(t);
        let v = Validity { start: whole(v.start), expiration: whole(v.expiration) };
        if v.start > v.expiration {
            return Err(BankError::BadValidity);
        }
        let payload = Payload { denomination: amount, start: v.start, expiration: v.expiration, tracking: self.next_tracking(), payment };
        self.sign_layer(Check::Leaf { payload, signer: self.identity.public, recipient, signature: Vec::new() })
    }

    fn node(&mut self, inner: &Check, amount: Decimal, recipient: PublicKey, payment: bool) -> Result<Check, BankError> {
        let p = inner.payload();
        let payload = Payload { denomination: amount, start: p.start, expiration: p.expiration, tracking: self.next_tracking(), payment };
        self.sign_layer(Check::Node { payload, inner: Box::new(inner.clone()), recipient, signature: Vec::new() })
    }

    fn record(&mut self, op: &str, f: impl FnOnce(&mut LedgerEntry)) {
        let mut e = LedgerEntry { op: op.to_owned(), at: check::format_date(&self.now()), serial: self.serial, ..Default::default() };
        f(&mut e);
        self.ledger.push(e);
    }

    fn store(&mut self, c: Check) {
        self.vault.insert(c.tracking().to_owned(), c);
    }

    /// Issues a new leaf check to `recipient`. Checks minted to this bank
    /// itself go straight into the vault.
    pub fn mint(&mut self, amount: Decimal, validity: Option<Validity>, recipient: PublicKey) -> Result<Check, BankError> {
        let c = self.leaf(amount, validity, recipient, false)?;
        self.minted += amount;
        let mine = recipient == self.identity.public;
        if mine {
            self.store(c.clone());
        }
        let hex = c.to_hex();
        self.record("mint", |e| {
            e.minted = Some(amount.to_string());
            if mine {
                e.added.push(hex);
            } else {
                e.issued.push(hex);
            }
        });
        Ok(c)
    }

    /// Issues a payment directly in this bank's own currency.
    pub fn mint_payment(&mut self, amount: Decimal, recipient: PublicKey) -> Result<Check, BankError> {
        let c = self.leaf(amount, None, recipient, true)?;
        self.minted += amount;
        let hex = c.to_hex();
        self.record("mint-payment", |e| {
            e.minted = Some(amount.to_string());
            e.issued.push(hex);
        });
        Ok(c)
    }

    /// Accepts a check owned by this bank. Receipts are filed separately.
    pub fn deposit(&mut self, c: Check) -> Result<String, BankError> {
        if c.owner() != self.identity.public {
            return Err(BankError::NotOwner);
        }
        if !verify_chain(self.scheme(), &c) {
            return Err(BankError::InvalidChain);
        }
        let tracking = c.tracking().to_owned();
        let hex = c.to_hex();
        if c.is_receipt() {
            self.receipts.push(c);
            self.record("receipt", |e| e.added.push(hex));
        } else {
            self.store(c);
            self.record("deposit", |e| e.added.push(hex));
        }
        Ok(tracking)
    }

    fn take_spendable(&self, tracking: &str) -> Result<Check, BankError> {
        let c = self.vault.get(tracking).ok_or_else(|| BankError::UnknownCheck(tracking.to_owned()))?;
        if c.has_payment_layer() {
            return Err(BankError::PaymentRule);
        }
        let now = self.now();
        let p = c.payload();
        if now > p.expiration {
            return Err(BankError::Expired);
        }
        if now < p.start {
            return Err(BankError::NotYetValid);
        }
        Ok(c.clone())
    }

    /// Gives a whole check away.
    pub fn transfer_gift(&mut self, tracking: &str, recipient: PublicKey) -> Result<Check, BankError> {
        let c = self.take_spendable(tracking)?;
        let gift = self.node(&c, c.denomination(), recipient, false)?;
        self.vault.remove(tracking);
        let mine = recipient == self.identity.public;
        if mine {
            self.store(gift.clone());
        }
        let hex = gift.to_hex();
        self.record("give", |e| {
            e.removed.push(tracking.to_owned());
            if mine {
                e.added.push(hex);
            } else {
                e.issued.push(hex);
            }
        });
        Ok(gift)
    }

    /// Pays `amount` out of a check. Returns the payment and, when some
    /// value is left, the change check kept in the vault.
    pub fn pay(&mut self, tracking: &str, amount: Decimal, recipient: PublicKey) -> Result<(Check, Option<Check>), BankError> {
        if amount <= Decimal::ZERO {
            return Err(BankError::NonPositive);
        }
        let c = self.take_spendable(tracking)?;
        if amount > c.denomination() {
            return Err(BankError::Overdraft);
        }
        let payment = self.node(&c, amount, recipient, true)?;
        let rest = c.denomination() - amount;
        let change = if rest > Decimal::ZERO { Some(self.node(&c, rest, self.identity.public, false)?) } else { None };
        self.vault.remove(tracking);
        if let Some(ch) = &change {
            self.store(ch.clone());
        }
        let (ph, chh) = (payment.to_hex(), change.as_ref().map(Check::to_hex));
        self.record("pay", |e| {
            e.removed.push(tracking.to_owned());
            e.issued.push(ph);
            e.added.extend(chh);
        });
        Ok((payment, change))
    }

    /// Sends a payment-bearing check one hop back towards its minter. The
    /// first return of a payment books its value as earned.
    pub fn cash_and_return(&mut self, tracking: &str) -> Result<Check, BankError> {
        let c = self.vault.get(tracking).ok_or_else(|| BankError::UnknownCheck(tracking.to_owned()))?.clone();
        let (k, returns) = c.payment_progress().ok_or(BankError::NotAPayment)?;
        if returns >= k {
            return Err(BankError::AlreadyReceipt);
        }
        let hops = c.hops();
        let target = hops[k - 1 - returns].key;
        let back = self.node(&c, c.denomination(), target, false)?;
        let first_cash = c.is_payment();
        if first_cash {
            *self.earned.entry(c.minter()).or_default() += c.denomination();
        }
        self.vault.remove(tracking);
        let hex = back.to_hex();
        let earned = first_cash.then(|| (c.minter().to_hex(), c.denomination().to_string()));
        self.record("cash", |e| {
            e.removed.push(tracking.to_owned());
            e.issued.push(hex);
            e.earned = earned;
        });
        Ok(back)
    }

    /// Replays ledger entries into a fresh bank state.
    pub(crate) fn replay(identity: Identity, entries: Vec<LedgerEntry>) -> Result<Self, String> {
        let mut b = Bank::new(identity);
        for e in &entries {
            for t in &e.removed {
                b.vault.remove(t);
            }
            for hex in &e.added {
                let c = Check::from_hex(hex).map_err(|err| err.to_string())?;
                if c.is_receipt() {
                    b.receipts.push(c);
                } else {
                    b.store(c);
                }
            }
            if let Some(m) = &e.minted {
                b.minted += m.parse::<Decimal>().map_err(|err| err.to_string())?;
            }
            if let Some((k, v)) = &e.earned {
                let key: PublicKey = k.parse()?;
                *b.earned.entry(key).or_default() += v.parse::<Decimal>().map_err(|err| err.to_string())?;
            }
            b.serial = b.serial.max(e.serial);
        }
        b.ledger = entries;
        Ok(b)
    }
}

/// What a check is worth to its minter's accounts.
pub fn outstanding_value(c: &Check) -> Decimal {
    if c.is_payment() || !c.has_payment_layer() {
        c.denomination()
    } else {
        Decimal::ZERO
    }
}

/// Per-minter totals `(minted, accounted)` over a closed set of banks and
/// checks in transit. Every minter should have `minted == accounted`.
pub fn conservation<'a>(banks: impl IntoIterator<Item = &'a Bank>, in_transit: &[Check]) -> BTreeMap<PublicKey, (Decimal, Decimal)> {
    let mut out: BTreeMap<PublicKey, (Decimal, Decimal)> = BTreeMap::new();
    for b in banks {
        out.entry(b.public_key()).or_default().0 += b.minted();
        for c in b.vault() {
            out.entry(c.minter()).or_default().1 += outstanding_value(c);
        }
        for (m, v) in b.earned() {
            out.entry(*m).or_default().1 += v;
        }
    }
    for c in in_transit {
        out.entry(c.minter()).or_default().1 += outstanding_value(c);
    }
    out
}

/// A convenience for tests and demos: an identity under the scheme.
pub fn identity(name: &str, seed: &str, scheme: Arc<dyn SignatureScheme>) -> Identity {
    Identity::from_seed(name, seed, scheme)
}
