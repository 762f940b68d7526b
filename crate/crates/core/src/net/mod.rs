//! Peer-to-peer cache execution.
//!
//! A client sends a cache `X` with a payment; the server checks the payment
//! against its preferences, cashes it, computes `server X` against the
//! cache it exports and replies with the returned check, which serves the
//! payer as a receipt, and the serialized result.
//!
//! Remote algebra travels as operation elements: `({type:op, op:NAME}, Y)`
//! with `NAME` one of `root`, `join`, `meet`, `select`, `deep`, `put` and
//! `eval`. For `select` and `deep`, the data of `Y`'s elements are the
//! selectors; for `eval`, `Y` holds `({text:LINE}, 0)` elements.

mod client;
mod ops;
mod rolodex;
mod server;
pub mod wire;

pub use client::{client_execute, ClientError, NetLink, ProxyCache};
pub use ops::{apply_op, decode_op, encode_op, ProxyOp};
pub use rolodex::{Rolodex, RolodexEntry, RolodexError};
pub use server::{handle_request, Server, ServerConfig, ServerHandle};
pub use wire::{deserialize, serialize, WireError, WireMessage};
