//! The payment-gated cache server.

use std::io;
use std::net::{Ipv4Addr, Ipv6Addr, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::bank::{verify_chain, Bank, BankStore, Check, NameBook};
use crate::cache::{self, Cache};
use crate::shell::Runtime;
use crate::subtype::{error_cache, ServerFilter};

use super::ops::{apply_op, decode_op};
use super::wire::{self, WireMessage};

/// Everything a server shares between connections. The bank and the
/// exported root each sit behind their own lock.
pub struct ServerConfig {
    pub runtime: Arc<Runtime>,
    pub bank: Arc<Mutex<Bank>>,
    pub names: NameBook,
    pub root: Arc<Mutex<Cache>>,
    pub filter: ServerFilter,
    pub io_timeout: Duration,
    /// Where the bank is persisted after each cashed payment, if anywhere.
    pub store: Option<BankStore>,
}

impl ServerConfig {
    pub fn new(runtime: Arc<Runtime>, bank: Bank, names: NameBook, root: Cache) -> Self {
        Self {
            runtime,
            bank: Arc::new(Mutex::new(bank)),
            names,
            root: Arc::new(Mutex::new(root)),
            filter: ServerFilter::default(),
            io_timeout: Duration::from_secs(30),
            store: None,
        }
    }
}

fn refuse(cfg: &ServerConfig, reason: &str, base: &str) -> WireMessage {
    let c = error_cache(&cfg.runtime.universe, reason, base);
    WireMessage { payment: Vec::new(), body: wire::serialize(&c).unwrap_or_default() }
}

/// Checks the payment, cashes it and computes the reply. A refusal carries
/// no check and an error cache as its body.
pub fn handle_request(cfg: &ServerConfig, msg: &WireMessage) -> WireMessage {
    let u = &cfg.runtime.universe;
    let payment = match Check::from_bytes(&msg.payment) {
        Ok(c) => c,
        Err(e) => return refuse(cfg, &format!("access denied: unreadable payment ({e})"), "payment"),
    };
    let x = match wire::deserialize(u, &msg.body) {
        Ok(x) => x,
        Err(e) => return refuse(cfg, &format!("malformed request: {e}"), "wire"),
    };
    let receipt = {
        let mut bank = cfg.bank.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(reason) = accept(&bank, &cfg.names, &payment) {
            return refuse(cfg, &format!("access denied: {reason}"), "payment");
        }
        let cashed = bank.deposit(payment).and_then(|t| bank.cash_and_return(&t));
        match cashed {
            Ok(r) => {
                if let Some(store) = &cfg.store {
                    if let Err(e) = store.save(&bank) {
                        eprintln!("egg serve: cannot persist bank: {e}");
                    }
                }
                r
            }
            Err(e) => return refuse(cfg, &format!("access denied: {e}"), "payment"),
        }
    };
    let result = cfg.filter.apply(u, &execute(cfg, &x));
    match wire::serialize(&result) {
        Ok(body) => WireMessage { payment: receipt.to_bytes(), body },
        Err(e) => {
            let c = error_cache(u, &e.to_string(), "wire");
            WireMessage { payment: receipt.to_bytes(), body: wire::serialize(&c).unwrap_or_default() }
        }
    }
}

fn accept(bank: &Bank, names: &NameBook, c: &Check) -> Result<(), String> {
    if !c.is_payment() {
        return Err("outermost layer is not a payment".into());
    }
    if c.owner() != bank.public_key() {
        return Err("payment is addressed to someone else".into());
    }
    if !verify_chain(bank.scheme(), c) {
        return Err("payment signatures do not verify".into());
    }
    let now = bank.now();
    if now > c.payload().expiration || now < c.payload().start {
        return Err("payment is not currently valid".into());
    }
    if bank.accepts(c, names).is_none() {
        return Err("currency not accepted".into());
    }
    Ok(())
}

/// `server X`: operation elements act on the exported root, other elements
/// contribute their contents.
fn execute(cfg: &ServerConfig, x: &Cache) -> Cache {
    let u = &cfg.runtime.universe;
    let mut parts = Vec::new();
    for p in x {
        match decode_op(p) {
            None => parts.push(p.contents.clone()),
            Some(Err(e)) => parts.push(error_cache(u, &e, "op")),
            Some(Ok(ops)) => {
                let mut root = cfg.root.lock().unwrap_or_else(|e| e.into_inner());
                for op in &ops {
                    parts.push(apply_op(&cfg.runtime, &mut root, op));
                }
            }
        }
    }
    cache::join_all(u, parts.iter())
}

fn serve_connection(cfg: &ServerConfig, mut stream: TcpStream) -> Result<(), wire::WireError> {
    stream.set_read_timeout(Some(cfg.io_timeout))?;
    stream.set_write_timeout(Some(cfg.io_timeout))?;
    let reply = match WireMessage::read_from(&mut stream) {
        Ok(msg) => handle_request(cfg, &msg),
        Err(e) => refuse(cfg, &format!("malformed frame: {e}"), "wire"),
    };
    reply.write_to(&mut stream)
}

/// A bound listener. Each connection is served on its own thread.
pub struct Server {
    listener: TcpListener,
    config: Arc<ServerConfig>,
    stop: Arc<AtomicBool>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, config: ServerConfig) -> io::Result<Self> {
        Ok(Self { listener: TcpListener::bind(addr)?, config: Arc::new(config), stop: Arc::new(AtomicBool::new(false)) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn config(&self) -> &Arc<ServerConfig> {
        &self.config
    }

    /// Accepts connections until stopped.
    pub fn run(self) {
        for stream in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let cfg = self.config.clone();
            thread::spawn(move || {
                let _ = serve_connection(&cfg, stream);
            });
        }
    }

    /// Runs on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = self.stop.clone();
        let config = self.config.clone();
        let join = thread::spawn(move || self.run());
        Ok(ServerHandle { addr, stop, config, join: Some(join) })
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    config: Arc<ServerConfig>,
    join: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn config(&self) -> &Arc<ServerConfig> {
        &self.config
    }

    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let mut wake = self.addr;
        if wake.ip().is_unspecified() {
            wake.set_ip(if wake.is_ipv4() { Ipv4Addr::LOCALHOST.into() } else { Ipv6Addr::LOCALHOST.into() });
        }
        let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
        if let Some(j) = self.join.take() {
            let _ = j.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.join.is_some() {
            self.stop_now();
        }
    }
}
