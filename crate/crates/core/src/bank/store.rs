//! On-disk bank: identity, append-only ledger and vault snapshot.
//!
//! ```text
//! <dir>/identity     egg-identity 1 / name / scheme / secret hex
//! <dir>/ledger.jsonl {"format":"egg-ledger","version":1}, then one LedgerEntry per line
//! <dir>/vault.json   {"version":1,"serial":n,"vault":[hex..],"receipts":[hex..]}
//! <dir>/prefs        optional preference table (egg-prefs 1)
//! ```
//!
//! The ledger is the source of truth. Opening a bank replays it; the vault
//! snapshot is rewritten after every save for inspection and is checked
//! against the replay.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::crypto::{scheme_by_name, Identity};
use super::pattern::Preferences;
use super::{Bank, LedgerEntry};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("{file}: {reason}")]
    Format { file: String, reason: String },
    #[error("bank already exists at {0}")]
    Exists(String),
}

fn format_err(file: &Path, reason: impl ToString) -> StoreError {
    StoreError::Format { file: file.display().to_string(), reason: reason.to_string() }
}

const IDENTITY_HEADER: &str = "egg-identity 1";

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug)]
struct LedgerHeader {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize, Debug)]
struct VaultSnapshot {
    version: u32,
    serial: u64,
    vault: Vec<String>,
    receipts: Vec<String>,
}

pub fn save_identity(path: &Path, id: &Identity) -> Result<(), StoreError> {
    let secret = id.secret().ok_or_else(|| format_err(path, "identity has no secret key"))?;
    let text = format!("{IDENTITY_HEADER}\n{}\n{}\n{}\n", id.name, id.scheme().name(), hex::encode(secret));
    write_atomic(path, text.as_bytes())
}

pub fn load_identity(path: &Path) -> Result<Identity, StoreError> {
    let text = fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let [IDENTITY_HEADER, name, scheme, secret] = lines.as_slice() else {
        return Err(format_err(path, "expected header, name, scheme and secret lines"));
    };
    let scheme = scheme_by_name(scheme).ok_or_else(|| format_err(path, format!("unknown scheme {scheme:?}")))?;
    let bytes = hex::decode(secret).map_err(|e| format_err(path, e))?;
    let secret: [u8; 32] = bytes.try_into().map_err(|_| format_err(path, "secret keys are 32 bytes"))?;
    Ok(Identity::from_secret(name, secret, scheme))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// A bank directory.
#[derive(Clone, Debug)]
pub struct BankStore {
    dir: PathBuf,
}

impl BankStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn identity_path(&self) -> PathBuf {
        self.dir.join("identity")
    }

    fn ledger_path(&self) -> PathBuf {
        self.dir.join("ledger.jsonl")
    }

    fn vault_path(&self) -> PathBuf {
        self.dir.join("vault.json")
    }

    pub fn prefs_path(&self) -> PathBuf {
        self.dir.join("prefs")
    }

    pub fn exists(&self) -> bool {
        self.identity_path().exists()
    }

    /// Creates a bank directory for `id`.
    pub fn init(&self, id: &Identity) -> Result<Bank, StoreError> {
        if self.exists() {
            return Err(StoreError::Exists(self.dir.display().to_string()));
        }
        fs::create_dir_all(&self.dir)?;
        save_identity(&self.identity_path(), id)?;
        let header = serde_json::to_string(&LedgerHeader { format: "egg-ledger".into(), version: 1 }).expect("serializable");
        fs::write(self.ledger_path(), format!("{header}\n"))?;
        let bank = Bank::new(id.clone());
        self.write_snapshot(&bank)?;
        Ok(bank)
    }

    fn read_ledger(&self) -> Result<Vec<LedgerEntry>, StoreError> {
        let path = self.ledger_path();
        let file = io::BufReader::new(fs::File::open(&path)?);
        let mut lines = file.lines();
        let header: LedgerHeader = match lines.next() {
            Some(l) => serde_json::from_str(&l?).map_err(|e| format_err(&path, e))?,
            None => return Err(format_err(&path, "missing header")),
        };
        if header != (LedgerHeader { format: "egg-ledger".into(), version: 1 }) {
            return Err(format_err(&path, "unsupported ledger header"));
        }
        let mut out = Vec::new();
        for (i, l) in lines.enumerate() {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&l).map_err(|e| format_err(&path, format!("line {}: {e}", i + 2)))?);
        }
        Ok(out)
    }

    /// Opens the bank by replaying its ledger.
    pub fn open(&self) -> Result<Bank, StoreError> {
        let id = load_identity(&self.identity_path())?;
        let entries = self.read_ledger()?;
        let mut bank = Bank::replay(id, entries).map_err(|e| format_err(&self.ledger_path(), e))?;
        let prefs = self.prefs_path();
        if prefs.exists() {
            let text = fs::read_to_string(&prefs)?;
            bank.set_preferences(Preferences::parse(&text).map_err(|e| format_err(&prefs, e))?);
        }
        Ok(bank)
    }

    /// Appends ledger entries not yet on disk and rewrites the snapshot.
    pub fn save(&self, bank: &Bank) -> Result<(), StoreError> {
        let on_disk = self.read_ledger()?.len();
        let fresh = bank.ledger().get(on_disk..).unwrap_or(&[]);
        if !fresh.is_empty() {
            let mut f = fs::OpenOptions::new().append(true).open(self.ledger_path())?;
            for e in fresh {
                writeln!(f, "{}", serde_json::to_string(e).expect("serializable"))?;
            }
            f.sync_all()?;
        }
        self.write_snapshot(bank)
    }

    fn write_snapshot(&self, bank: &Bank) -> Result<(), StoreError> {
        let snap = VaultSnapshot {
            version: 1,
            serial: bank.serial,
            vault: bank.vault().map(|c| c.to_hex()).collect(),
            receipts: bank.receipts().iter().map(|c| c.to_hex()).collect(),
        };
        write_atomic(&self.vault_path(), serde_json::to_string_pretty(&snap).expect("serializable").as_bytes())
    }

    /// True when the snapshot on disk agrees with the ledger replay.
    pub fn snapshot_consistent(&self) -> Result<bool, StoreError> {
        let bank = self.open()?;
        let path = self.vault_path();
        let snap: VaultSnapshot = serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| format_err(&path, e))?;
        let vault: Vec<String> = bank.vault().map(|c| c.to_hex()).collect();
        Ok(snap.vault == vault && snap.serial == bank.serial)
    }
}
