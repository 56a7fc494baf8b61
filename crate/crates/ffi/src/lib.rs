//! C interface to `hhe-core`.
//!
//! Objects are handed out as opaque pointers and must be released with the
//! matching `*_free` function. Every fallible call returns an [`HheStatus`];
//! the message of the last failure on the calling thread is available from
//! [`hhe_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use hhe_core::cipher::{self, Cipher, CipherParams, Key, Scheme};
use hhe_core::pipesim::{simulate, HwConfig, TraceLevel, Variant};
use hhe_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HheStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    LengthMismatch = 3,
    NonceTooLong = 4,
    StreamFault = 5,
    EncodingOverflow = 6,
    Parse = 7,
    Deadlock = 8,
    Divergence = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HheScheme {
    Hera = 0,
    Rubato = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HheVariant {
    D1 = 1,
    D2 = 2,
    D3 = 3,
    Vectorized = 4,
}

/// Headline numbers of one simulation run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HheSimSummary {
    pub latency_cycles: u64,
    pub initiation_interval: f64,
    pub elements_per_cycle: f64,
    pub state_elements_per_cycle: f64,
    pub total_cycles: u64,
    pub rng_stall_cycles: u64,
    pub fifo_max_occupancy: u64,
    pub constants_consumed: u64,
}

/// Opaque cipher instance (parameters plus the noise table).
pub struct HheCipher(Cipher);

/// Opaque key bound to the cipher it was created for.
pub struct HheKey(Key);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HheStatus {
    match e {
        Error::InvalidModulus(_) | Error::ModulusMismatch(..) | Error::NonCanonical { .. } | Error::InvalidParameter(_) => {
            HheStatus::InvalidParameter
        }
        Error::LengthMismatch { .. } => HheStatus::LengthMismatch,
        Error::NonceTooLong(..) => HheStatus::NonceTooLong,
        Error::StreamFault(_) => HheStatus::StreamFault,
        Error::EncodingOverflow { .. } => HheStatus::EncodingOverflow,
        Error::Parse { .. } => HheStatus::Parse,
        Error::Deadlock { .. } => HheStatus::Deadlock,
        Error::Divergence { .. } => HheStatus::Divergence,
        Error::Io(_) => HheStatus::Io,
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), (HheStatus, String)>) -> HheStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HheStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            HheStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (HheStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HheStatus, String) {
    (HheStatus::NullPointer, format!("{what} is null"))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], (HheStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HheStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), (HheStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hhe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hhe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Cipher with the built-in parameter set of `scheme`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hhe_cipher_new(scheme: HheScheme, out: *mut *mut HheCipher) -> HheStatus {
    guard(|| {
        let s = match scheme {
            HheScheme::Hera => Scheme::Hera,
            HheScheme::Rubato => Scheme::Rubato,
        };
        let c = Cipher::new(CipherParams::for_scheme(s)).map_err(core_err)?;
        boxed(out, HheCipher(c))
    })
}

/// Cipher from a `key = value` parameter file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` as for [`hhe_cipher_new`].
#[no_mangle]
pub unsafe extern "C" fn hhe_cipher_from_params_file(path: *const c_char, out: *mut *mut HheCipher) -> HheStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (HheStatus::InvalidParameter, "path is not UTF-8".to_string()))?;
        let p = cipher::load_params(Path::new(path)).map_err(core_err)?;
        let c = Cipher::new(p).map_err(core_err)?;
        boxed(out, HheCipher(c))
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hhe_cipher_free(c: *mut HheCipher) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Keystream elements per block (`l`); 0 for a NULL handle.
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hhe_cipher_block_len(c: *const HheCipher) -> usize {
    c.as_ref().map_or(0, |c| c.0.params().l)
}

/// Key length in elements (`n`); 0 for a NULL handle.
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hhe_cipher_key_len(c: *const HheCipher) -> usize {
    c.as_ref().map_or(0, |c| c.0.params().n)
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hhe_cipher_modulus(c: *const HheCipher) -> u64 {
    c.as_ref().map_or(0, |c| c.0.params().q.value())
}

/// Key from `len` canonical elements.
///
/// # Safety
/// `values` must point to `len` readable `uint64_t`; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn hhe_key_new(
    c: *const HheCipher,
    values: *const u64,
    len: usize,
    out: *mut *mut HheKey,
) -> HheStatus {
    guard(|| {
        let c = deref(c, "cipher")?;
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        let v = if len == 0 { vec![] } else { slice::from_raw_parts(values, len).to_vec() };
        let k = Key::new(v, c.0.params()).map_err(core_err)?;
        boxed(out, HheKey(k))
    })
}

/// Key expanded from a seed of at most 16 bytes.
///
/// # Safety
/// `seed` must point to `len` readable bytes; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn hhe_key_derive(
    c: *const HheCipher,
    seed: *const u8,
    len: usize,
    out: *mut *mut HheKey,
) -> HheStatus {
    guard(|| {
        let c = deref(c, "cipher")?;
        let seed = bytes(seed, len, "seed")?;
        let k = Key::derive(seed, c.0.params()).map_err(core_err)?;
        boxed(out, HheKey(k))
    })
}

/// # Safety
/// `k` must be NULL or a live key handle.
#[no_mangle]
pub unsafe extern "C" fn hhe_key_free(k: *mut HheKey) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Writes block `block` of the keystream into `out` (`out_len >= l`).
///
/// # Safety
/// Handles must be live; `nonce` must point to `nonce_len` bytes and `out`
/// to `out_len` writable `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn hhe_keystream(
    c: *const HheCipher,
    k: *const HheKey,
    nonce: *const u8,
    nonce_len: usize,
    block: u64,
    out: *mut u64,
    out_len: usize,
) -> HheStatus {
    guard(|| {
        let (c, k) = (deref(c, "cipher")?, deref(k, "key")?);
        let nonce = bytes(nonce, nonce_len, "nonce")?;
        let l = c.0.params().l;
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < l {
            return Err((HheStatus::BufferTooSmall, format!("need {l} elements, got {out_len}")));
        }
        let ks = c.0.keystream(&k.0, nonce, block).map_err(core_err)?;
        slice::from_raw_parts_mut(out, l).copy_from_slice(&ks.values);
        Ok(())
    })
}

/// Encrypts `len == l` reals scaled by `delta` into `out`.
///
/// # Safety
/// As for [`hhe_keystream`]; `msg` must point to `len` readable doubles and
/// `out` to `len` writable `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn hhe_encrypt(
    c: *const HheCipher,
    k: *const HheKey,
    nonce: *const u8,
    nonce_len: usize,
    block: u64,
    msg: *const f64,
    len: usize,
    delta: f64,
    out: *mut u64,
) -> HheStatus {
    guard(|| {
        let (c, k) = (deref(c, "cipher")?, deref(k, "key")?);
        let nonce = bytes(nonce, nonce_len, "nonce")?;
        if msg.is_null() || out.is_null() {
            return Err(null("message or output buffer"));
        }
        let m = slice::from_raw_parts(msg, len);
        let ct = cipher::encrypt(&c.0, &k.0, nonce, block, m, delta).map_err(core_err)?;
        slice::from_raw_parts_mut(out, len).copy_from_slice(&ct);
        Ok(())
    })
}

/// Inverse of [`hhe_encrypt`].
///
/// # Safety
/// As for [`hhe_encrypt`] with the roles of the buffers swapped.
#[no_mangle]
pub unsafe extern "C" fn hhe_decrypt(
    c: *const HheCipher,
    k: *const HheKey,
    nonce: *const u8,
    nonce_len: usize,
    block: u64,
    ct: *const u64,
    len: usize,
    delta: f64,
    out: *mut f64,
) -> HheStatus {
    guard(|| {
        let (c, k) = (deref(c, "cipher")?, deref(k, "key")?);
        let nonce = bytes(nonce, nonce_len, "nonce")?;
        if ct.is_null() || out.is_null() {
            return Err(null("ciphertext or output buffer"));
        }
        let m = cipher::decrypt(&c.0, &k.0, nonce, block, slice::from_raw_parts(ct, len), delta)
            .map_err(core_err)?;
        slice::from_raw_parts_mut(out, len).copy_from_slice(&m);
        Ok(())
    })
}

/// Simulates `blocks` blocks per lane on a design point with its default
/// configuration. `fifo_depth` and `lanes` override the defaults when
/// nonzero.
///
/// # Safety
/// Handles must be live; `nonce` must point to `nonce_len` bytes; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn hhe_simulate(
    c: *const HheCipher,
    variant: HheVariant,
    k: *const HheKey,
    nonce: *const u8,
    nonce_len: usize,
    blocks: usize,
    fifo_depth: usize,
    lanes: usize,
    out: *mut HheSimSummary,
) -> HheStatus {
    guard(|| {
        let (c, k) = (deref(c, "cipher")?, deref(k, "key")?);
        let nonce = bytes(nonce, nonce_len, "nonce")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match variant {
            HheVariant::D1 => Variant::D1Baseline,
            HheVariant::D2 => Variant::D2Decoupled,
            HheVariant::D3 => Variant::D3Full,
            HheVariant::Vectorized => Variant::Vectorized,
        };
        let mut cfg = HwConfig::new(v, c.0.params().clone());
        cfg.trace_level = TraceLevel::None;
        if fifo_depth > 0 {
            cfg.fifo_depth = fifo_depth;
        }
        if lanes > 0 {
            cfg.lanes = lanes;
        }
        cfg.validate().map_err(core_err)?;
        let (r, _) = simulate(&cfg, &k.0, nonce, blocks).map_err(core_err)?;
        *out = HheSimSummary {
            latency_cycles: r.latency_cycles,
            initiation_interval: r.initiation_interval_cycles,
            elements_per_cycle: r.elements_per_cycle,
            state_elements_per_cycle: r.state_elements_per_cycle,
            total_cycles: r.total_cycles,
            rng_stall_cycles: r.rng_stall_cycles,
            fifo_max_occupancy: r.fifo_max_occupancy,
            constants_consumed: r.constants_consumed,
        };
        Ok(())
    })
}
