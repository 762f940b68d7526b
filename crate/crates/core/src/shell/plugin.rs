//! Plug-in manifests.
//!
//! A plug-in directory holds a `plugin.toml` naming the basic types,
//! extensions and shell commands it contributes:
//!
//! ```toml
//! [plugin]
//! name = "lab"
//!
//! [[types]]
//! name = "load"
//! order = "total"          # trivial | integer | group-integer | total | prefix | glob
//!
//! [[extensions]]
//! name = "host-text"
//! kind = "copy"            # copy | basename
//! from = "host"
//! to = "text"
//!
//! [[commands]]
//! name = "hosts"
//! handler = "ls"           # any registered subtype
//! flags = ["depth"]        # or flags = "any"
//! preset = { depth = "2" }
//! ```
//!
//! Extensions declared here must be order preserving on the types they
//! connect; `copy` between two trivially ordered types always is.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::data::{order_by_kind, BasicType, Datum, Extension, Value};

use super::session::{FlagSpec, Runtime};

pub const MANIFEST_FILE: &str = "plugin.toml";

#[derive(Debug, Error)]
pub enum PluginError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Syntax { path: String, source: toml::de::Error },
    #[error("plug-in {plugin}: {reason}")]
    Invalid { plugin: String, reason: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub plugin: PluginInfo,
    #[serde(default)]
    pub types: Vec<TypeDecl>,
    #[serde(default)]
    pub extensions: Vec<ExtensionDecl>,
    #[serde(default)]
    pub commands: Vec<CommandDecl>,
}

#[derive(Debug, Deserialize)]
pub struct PluginInfo {
    pub name: String,
    #[serde(default)]
    pub version: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct TypeDecl {
    pub name: String,
    pub order: String,
}

#[derive(Debug, Deserialize)]
pub struct ExtensionDecl {
    pub name: String,
    pub kind: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FlagDecl {
    Keyword(String),
    Types(Vec<String>),
}

#[derive(Debug, Deserialize)]
pub struct CommandDecl {
    pub name: String,
    pub handler: String,
    #[serde(default)]
    pub flags: Option<FlagDecl>,
    #[serde(default)]
    pub preset: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse(text: &str, path: &str) -> Result<Self, PluginError> {
        toml::from_str(text).map_err(|source| PluginError::Syntax { path: path.to_owned(), source })
    }

    /// Adds this plug-in's contributions to `rt`.
    pub fn install(&self, rt: &mut Runtime) -> Result<(), PluginError> {
        let invalid = |reason: String| PluginError::Invalid { plugin: self.plugin.name.clone(), reason };
        for t in &self.types {
            let order = order_by_kind(&t.order).ok_or_else(|| invalid(format!("type {}: unknown order {}", t.name, t.order)))?;
            rt.universe.register_type(BasicType::new(t.name.clone(), order)).map_err(|e| invalid(e.to_string()))?;
        }
        for x in &self.extensions {
            for side in [&x.from, &x.to] {
                if rt.universe.basic_type(side).is_none() {
                    return Err(invalid(format!("extension {}: unknown type {side}", x.name)));
                }
            }
            let to_order = rt.universe.basic_type(&x.to).expect("checked").order_arc();
            let (from, to) = (x.from.clone(), x.to.clone());
            let transform: fn(&str) -> Option<String> = match x.kind.as_str() {
                "copy" => |s| Some(s.to_owned()),
                "basename" => |s| s.trim_end_matches('/').rsplit('/').next().filter(|b| !b.is_empty()).map(str::to_owned),
                other => return Err(invalid(format!("extension {}: unknown kind {other}", x.name))),
            };
            rt.universe.register_extension(Extension::new(x.name.clone(), move |d: &Datum| match d.get(&from) {
                None => Datum::top(),
                Some(Value::Bottom) => Datum::single(to.clone(), Value::Bottom),
                Some(v) => transform(&v.to_string())
                    .and_then(|s| to_order.parse(&s))
                    .map(|out| Datum::single(to.clone(), out))
                    .unwrap_or_default(),
            }));
        }
        for c in &self.commands {
            let mut preset = Datum::top();
            for (t, v) in &c.preset {
                let value = rt.universe.value(t, v).map_err(|e| invalid(format!("command {}: {e}", c.name)))?;
                preset.insert(t.clone(), value);
            }
            let flags = match &c.flags {
                None => FlagSpec::None,
                Some(FlagDecl::Keyword(k)) if k == "any" => FlagSpec::Any,
                Some(FlagDecl::Keyword(k)) if k == "none" => FlagSpec::None,
                Some(FlagDecl::Keyword(k)) => return Err(invalid(format!("command {}: bad flags {k}", c.name))),
                Some(FlagDecl::Types(ts)) => FlagSpec::Types(ts.clone()),
            };
            rt.add_command(&c.name, &c.handler, &preset, flags).map_err(invalid)?;
        }
        Ok(())
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest, PluginError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| PluginError::Io { path: shown.clone(), source })?;
    Manifest::parse(&text, &shown)
}

/// Installs every plug-in found in the subdirectories of `dir`, in name
/// order. Returns the plug-in names.
pub fn load_plugins(rt: &mut Runtime, dir: &Path) -> Result<Vec<String>, PluginError> {
    let read = fs::read_dir(dir).map_err(|source| PluginError::Io { path: dir.display().to_string(), source })?;
    let mut manifests: Vec<_> = read.filter_map(Result::ok).map(|e| e.path().join(MANIFEST_FILE)).filter(|p| p.is_file()).collect();
    manifests.sort();
    let mut names = Vec::new();
    for path in manifests {
        let m = load_manifest(&path)?;
        m.install(rt)?;
        names.push(m.plugin.name);
    }
    Ok(names)
}
