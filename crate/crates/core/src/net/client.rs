//! Clients: one-shot execution, proxy caches and the shell's network link.

use std::net::{TcpStream, ToSocketAddrs};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rust_decimal::Decimal;
use thiserror::Error;

use crate::bank::{verify_chain, Bank, Check, NameBook, PublicKey, SignatureScheme};
use crate::cache::Cache;
use crate::data::{DataUniverse, Datum};
use crate::shell::RemoteLink;
use crate::subtype::error_cache;

use super::ops::{encode_op, ProxyOp};
use super::wire::{self, WireError, WireMessage};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClientError {
    #[error("bad address: {0}")]
    BadAddress(String),
    #[error("cannot connect: {0}")]
    Connect(String),
    #[error("transport: {0}")]
    Wire(#[from] WireError),
    #[error("bad receipt: {0}")]
    BadReceipt(String),
    #[error("server refused the request")]
    Refused(Cache),
    #[error("payment: {0}")]
    Payment(String),
}

impl ClientError {
    /// Process exit status for the command line.
    pub fn status(&self) -> i32 {
        match self {
            ClientError::BadAddress(_) => 2,
            ClientError::Connect(_) | ClientError::Wire(_) => 3,
            ClientError::BadReceipt(_) => 4,
            ClientError::Refused(_) => 5,
            ClientError::Payment(_) => 6,
        }
    }

    /// The failure as error data; refusals keep the server's own error.
    pub fn to_cache(&self, u: &DataUniverse) -> Cache {
        match self {
            ClientError::Refused(c) => c.clone(),
            other => error_cache(u, &other.to_string(), "net"),
        }
    }
}

const CONNECT_TIMEOUT: Duration = Duration::from_secs(10);
const IO_TIMEOUT: Duration = Duration::from_secs(60);

fn socket_address(addr: &Datum) -> Result<String, ClientError> {
    let host = addr.get_str("host").ok_or_else(|| ClientError::BadAddress("no host entry".into()))?;
    let port = addr.get("port").and_then(|v| v.as_int()).ok_or_else(|| ClientError::BadAddress("no port entry".into()))?;
    let port = u16::try_from(port).map_err(|_| ClientError::BadAddress(format!("port {port} out of range")))?;
    Ok(format!("{host}:{port}"))
}

/// Sends `x` with `payment` to the server at `addr` (its `host` and `port`
/// entries) and checks that the returned receipt wraps the payment and is
/// addressed back to the payer.
pub fn client_execute(
    u: &DataUniverse,
    scheme: &dyn SignatureScheme,
    addr: &Datum,
    x: &Cache,
    payment: &Check,
) -> Result<(Check, Cache), ClientError> {
    let target = socket_address(addr)?;
    let sock = target
        .to_socket_addrs()
        .map_err(|e| ClientError::Connect(format!("{target}: {e}")))?
        .next()
        .ok_or_else(|| ClientError::Connect(format!("{target}: no address")))?;
    let mut stream = TcpStream::connect_timeout(&sock, CONNECT_TIMEOUT).map_err(|e| ClientError::Connect(format!("{target}: {e}")))?;
    stream.set_read_timeout(Some(IO_TIMEOUT)).map_err(WireError::from)?;
    stream.set_write_timeout(Some(IO_TIMEOUT)).map_err(WireError::from)?;
    WireMessage { payment: payment.to_bytes(), body: wire::serialize(x)? }.write_to(&mut stream)?;
    let reply = WireMessage::read_from(&mut stream)?;
    let result = wire::deserialize(u, &reply.body)?;
    if reply.payment.is_empty() {
        return Err(ClientError::Refused(result));
    }
    let receipt = Check::from_bytes(&reply.payment).map_err(|e| ClientError::BadReceipt(e.to_string()))?;
    check_receipt(scheme, payment, &receipt)?;
    Ok((receipt, result))
}

pub(crate) fn check_receipt(scheme: &dyn SignatureScheme, payment: &Check, receipt: &Check) -> Result<(), ClientError> {
    if !verify_chain(scheme, receipt) {
        return Err(ClientError::BadReceipt("signatures do not verify".into()));
    }
    if receipt.inner() != Some(payment) {
        return Err(ClientError::BadReceipt("does not wrap the payment".into()));
    }
    if receipt.recipient() != payment.signer() {
        return Err(ClientError::BadReceipt("not returned to the payer".into()));
    }
    Ok(())
}

/// A cache hosted by a server, reached by paying for each operation with
/// freshly minted currency.
pub struct ProxyCache {
    pub address: Datum,
    pub server: PublicKey,
    pub wallet: Arc<Mutex<Bank>>,
    pub fee: Decimal,
}

impl ProxyCache {
    pub fn op(&self, u: &DataUniverse, op: &ProxyOp) -> Result<Cache, ClientError> {
        self.execute(u, &encode_op(u, op))
    }

    /// Executes an arbitrary request, paying the fee.
    pub fn execute(&self, u: &DataUniverse, x: &Cache) -> Result<Cache, ClientError> {
        let mut wallet = self.wallet.lock().unwrap_or_else(|e| e.into_inner());
        let payment = wallet.mint_payment(self.fee, self.server).map_err(|e| ClientError::Payment(e.to_string()))?;
        let scheme = wallet.identity().scheme().clone();
        let (receipt, result) = client_execute(u, scheme.as_ref(), &self.address, x, &payment)?;
        wallet.deposit(receipt).map_err(|e| ClientError::BadReceipt(e.to_string()))?;
        Ok(result)
    }

    pub fn join(&self, u: &DataUniverse, c: &Cache) -> Result<Cache, ClientError> {
        self.op(u, &ProxyOp::Join(c.clone()))
    }

    pub fn meet(&self, u: &DataUniverse, c: &Cache) -> Result<Cache, ClientError> {
        self.op(u, &ProxyOp::Meet(c.clone()))
    }

    pub fn select(&self, u: &DataUniverse, d: &Datum) -> Result<Cache, ClientError> {
        self.op(u, &ProxyOp::Select(d.clone()))
    }

    pub fn deep_select(&self, u: &DataUniverse, d: &Datum) -> Result<Cache, ClientError> {
        self.op(u, &ProxyOp::DeepSelect(d.clone()))
    }

    pub fn put(&self, u: &DataUniverse, c: &Cache) -> Result<Cache, ClientError> {
        self.op(u, &ProxyOp::Put(c.clone()))
    }
}

/// Lets `remote` caches in a shell session reach servers. The `person`
/// entry of the address names the server in `names`.
pub struct NetLink {
    pub wallet: Arc<Mutex<Bank>>,
    pub names: NameBook,
    pub fee: Decimal,
}

impl RemoteLink for NetLink {
    fn execute(&mut self, u: &DataUniverse, address: &Datum, request: &Cache) -> Cache {
        let Some(person) = address.get_str("person") else {
            return error_cache(u, "remote address has no person entry", "net");
        };
        let Some(server) = self.names.key_of(person) else {
            return error_cache(u, &format!("no key for {person}"), "net");
        };
        let proxy = ProxyCache { address: address.clone(), server, wallet: self.wallet.clone(), fee: self.fee };
        proxy.execute(u, request).unwrap_or_else(|e| e.to_cache(u))
    }
}
