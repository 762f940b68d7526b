//! egg: caches as a free distributive lattice over typed data, a small
//! shell language for manipulating them, signed hierarchical currency, and
//! a payment-gated protocol for executing caches on remote peers.

pub mod bank;
pub mod cache;
pub mod data;
pub mod subtype;
pub mod net;
pub mod shell;
