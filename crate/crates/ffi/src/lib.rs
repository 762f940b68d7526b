//! C ABI for egg.
//!
//! Sessions and caches are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns an
//! [`EggStatus`]; on failure `egg_last_error` describes the problem for
//! the calling thread. Strings and byte buffers handed out by the library
//! must be released with `egg_string_free` and `egg_bytes_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use egg::bank::{display_check, verify_chain, Check, DisplayOptions, Ed25519, NameBook};
use egg::cache::{self, Cache};
use egg::data::Datum;
use egg::net::wire;
use egg::shell::{delta, Runtime, Session};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EggStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    Malformed = 4,
    InvalidCheck = 5,
    Panic = 6,
}

/// An egg shell session with its reference caches.
pub struct EggSession {
    session: Session,
}

/// An immutable cache value.
pub struct EggCache {
    cache: Cache,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: EggStatus, msg: impl Into<String>) -> EggStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> EggStatus) -> EggStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(EggStatus::Panic, "internal panic"))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, EggStatus> {
    if p.is_null() {
        return Err(fail(EggStatus::NullArgument, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(EggStatus::InvalidUtf8, "string is not UTF-8"))
}

unsafe fn bytes<'a>(p: *const u8, len: usize) -> Result<&'a [u8], EggStatus> {
    if p.is_null() {
        return if len == 0 { Ok(&[]) } else { Err(fail(EggStatus::NullArgument, "null buffer")) };
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn give_string(s: String, out: *mut *mut c_char) -> EggStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            EggStatus::Ok
        }
        Err(_) => fail(EggStatus::Malformed, "text contains a NUL byte"),
    }
}

fn give_cache(c: Cache, out: *mut *mut EggCache) -> EggStatus {
    unsafe { *out = Box::into_raw(Box::new(EggCache { cache: c })) };
    EggStatus::Ok
}

macro_rules! non_null {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            return fail(EggStatus::NullArgument, "null argument");
        }
    };
}

/// Library version, as a static string.
#[no_mangle]
pub extern "C" fn egg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The last error on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn egg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// A session with the bundled types and commands and empty reference caches.
#[no_mangle]
pub extern "C" fn egg_session_new() -> *mut EggSession {
    catch_unwind(|| Box::into_raw(Box::new(EggSession { session: Session::new(Arc::new(Runtime::standard())) })))
        .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `s` is null or a handle from `egg_session_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn egg_session_free(s: *mut EggSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Executes one shell line; the result goes to `*out`.
///
/// # Safety
/// `s` is a live session, `line` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn egg_session_eval(s: *mut EggSession, line: *const c_char, out: *mut *mut EggCache) -> EggStatus {
    guard(|| {
        non_null!(s, out);
        let line = match text(line) {
            Ok(l) => l,
            Err(e) => return e,
        };
        match (*s).session.execute_line(line) {
            Ok(c) => give_cache(c, out),
            Err(e) => fail(EggStatus::ParseError, e.to_string()),
        }
    })
}

/// Renders `c` the way the session displays results.
///
/// # Safety
/// `s` and `c` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_session_render(s: *const EggSession, c: *const EggCache, out: *mut *mut c_char) -> EggStatus {
    guard(|| {
        non_null!(s, c, out);
        give_string((*s).session.render(&(*c).cache), out)
    })
}

/// Replaces the session's `.` cache.
///
/// # Safety
/// `s` and `c` are live handles.
#[no_mangle]
pub unsafe extern "C" fn egg_session_set_dot(s: *mut EggSession, c: *const EggCache) -> EggStatus {
    guard(|| {
        non_null!(s, c);
        (*s).session.set_dot((*c).cache.clone());
        EggStatus::Ok
    })
}

/// # Safety
/// `c` is null or a cache handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_free(c: *mut EggCache) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of elements.
///
/// # Safety
/// `c` is null or a live cache handle.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_len(c: *const EggCache) -> usize {
    if c.is_null() {
        0
    } else {
        (*c).cache.len()
    }
}

/// Algebraic notation, e.g. `(hello,0) ∨ (world,0)`.
///
/// # Safety
/// `s` and `c` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_render(s: *const EggSession, c: *const EggCache, out: *mut *mut c_char) -> EggStatus {
    guard(|| {
        non_null!(s, c, out);
        give_string(cache::render(&(*s).session.runtime().universe, &(*c).cache), out)
    })
}

/// # Safety
/// All handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_join(s: *const EggSession, a: *const EggCache, b: *const EggCache, out: *mut *mut EggCache) -> EggStatus {
    guard(|| {
        non_null!(s, a, b, out);
        give_cache(cache::join(&(*s).session.runtime().universe, &(*a).cache, &(*b).cache), out)
    })
}

/// # Safety
/// All handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_meet(s: *const EggSession, a: *const EggCache, b: *const EggCache, out: *mut *mut EggCache) -> EggStatus {
    guard(|| {
        non_null!(s, a, b, out);
        give_cache(cache::meet(&(*s).session.runtime().universe, &(*a).cache, &(*b).cache), out)
    })
}

unsafe fn selector(s: *const EggSession, datum: *const c_char) -> Result<Datum, EggStatus> {
    let d = text(datum)?;
    delta(&(*s).session.runtime().universe, d).map_err(|e| fail(EggStatus::ParseError, e.to_string()))
}

/// `a/datum`, with the datum in shell notation such as `name:wor*`.
///
/// # Safety
/// Handles are live, `datum` is a NUL-terminated string, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_select(s: *const EggSession, a: *const EggCache, datum: *const c_char, out: *mut *mut EggCache) -> EggStatus {
    guard(|| {
        non_null!(s, a, out);
        match selector(s, datum) {
            Ok(d) => give_cache(cache::select(&(*s).session.runtime().universe, &(*a).cache, &d), out),
            Err(e) => e,
        }
    })
}

/// `a//datum`.
///
/// # Safety
/// As for `egg_cache_select`.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_deep_select(
    s: *const EggSession,
    a: *const EggCache,
    datum: *const c_char,
    out: *mut *mut EggCache,
) -> EggStatus {
    guard(|| {
        non_null!(s, a, out);
        match selector(s, datum) {
            Ok(d) => give_cache(cache::deep_select(&(*s).session.runtime().universe, &(*a).cache, &d), out),
            Err(e) => e,
        }
    })
}

/// Canonical bytes of `c`, released with `egg_bytes_free`.
///
/// # Safety
/// `c` is live; `out` and `len` are writable.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_serialize(c: *const EggCache, out: *mut *mut u8, len: *mut usize) -> EggStatus {
    guard(|| {
        non_null!(c, out, len);
        match wire::serialize(&(*c).cache) {
            Ok(b) => {
                let b = b.into_boxed_slice();
                *len = b.len();
                *out = Box::into_raw(b).cast();
                EggStatus::Ok
            }
            Err(e) => fail(EggStatus::Malformed, e.to_string()),
        }
    })
}

/// # Safety
/// `s` is live, `data` points to `len` readable bytes, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_cache_deserialize(s: *const EggSession, data: *const u8, len: usize, out: *mut *mut EggCache) -> EggStatus {
    guard(|| {
        non_null!(s, out);
        let b = match bytes(data, len) {
            Ok(b) => b,
            Err(e) => return e,
        };
        match wire::deserialize(&(*s).session.runtime().universe, b) {
            Ok(c) => give_cache(c, out),
            Err(e) => fail(EggStatus::Malformed, e.to_string()),
        }
    })
}

/// # Safety
/// `p` and `len` come from one `egg_cache_serialize` call, or `p` is null.
#[no_mangle]
pub unsafe extern "C" fn egg_bytes_free(p: *mut u8, len: usize) {
    if !p.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(p, len)));
    }
}

/// # Safety
/// `p` is null or a string handed out by this library.
#[no_mangle]
pub unsafe extern "C" fn egg_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

unsafe fn read_check(data: *const u8, len: usize) -> Result<Check, EggStatus> {
    Check::from_bytes(bytes(data, len)?).map_err(|e| fail(EggStatus::Malformed, e.to_string()))
}

/// `Ok` when every signature of the check (canonical bytes, Ed25519)
/// verifies, `InvalidCheck` when one does not.
///
/// # Safety
/// `data` points to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn egg_check_verify(data: *const u8, len: usize) -> EggStatus {
    guard(|| match read_check(data, len) {
        Ok(c) if verify_chain(&Ed25519, &c) => EggStatus::Ok,
        Ok(_) => fail(EggStatus::InvalidCheck, "signature chain does not verify"),
        Err(e) => e,
    })
}

/// Display text of a check, e.g. `50#a1b2c3d4e5f6.#0f1e2d3c4b5a._#99aa00bb11cc_`.
/// Keys print as fingerprints.
///
/// # Safety
/// `data` points to `len` readable bytes; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn egg_check_display(data: *const u8, len: usize, out: *mut *mut c_char) -> EggStatus {
    guard(|| {
        non_null!(out);
        match read_check(data, len) {
            Ok(c) => give_string(display_check(&c, &NameBook::new(), &DisplayOptions::default()), out),
            Err(e) => e,
        }
    })
}
