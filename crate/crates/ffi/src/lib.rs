//! C ABI over `music-core`.
//!
//! Every function returns a [`MusicStatus`]; on failure a message is kept per
//! thread and read with [`music_last_error`]. Configurations and results are
//! opaque heap handles released with their `_free` function. Array getters
//! take `(buffer, capacity, written)`: `written` always receives the required
//! length, and a null `buffer` only queries it.

use music_core::runner::{case_config, parse_config, run_experiment, write_artifacts, Example, ExperimentConfig, ExperimentResult};
use music_core::specfun::{bessel_j, bessel_y};
use music_core::MusicError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::path::Path;
use std::ptr;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MusicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Invalid configuration, argument domain or shape.
    Invalid = 3,
    Numerical = 4,
    Io = 5,
    BufferTooSmall = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque experiment configuration.
pub struct MusicConfig(ExperimentConfig);

/// Opaque experiment result.
pub struct MusicResult(ExperimentResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (MusicStatus, String);

fn core_failure(e: MusicError) -> Failure {
    let status = match e {
        MusicError::Numerical(_) => MusicStatus::Numerical,
        MusicError::Io { .. } => MusicStatus::Io,
        MusicError::Domain(_) | MusicError::Config(_) | MusicError::Dimension(_) | MusicError::Json(_) => MusicStatus::Invalid,
    };
    (status, e.to_string())
}

fn null(name: &str) -> Failure {
    (MusicStatus::NullPointer, format!("{name} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's
/// last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure> + UnwindSafe) -> MusicStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(f) {
        Ok(Ok(())) => MusicStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MusicStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (MusicStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_slice<T: Copy>(src: &[T], buffer: *mut T, capacity: usize, written: *mut usize) -> Result<(), Failure> {
    write_out(written, src.len(), "written")?;
    if buffer.is_null() {
        return Ok(());
    }
    if capacity < src.len() {
        return Err((MusicStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buffer, src.len());
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message of the last failed call on this thread, or null after a
/// successful one. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn music_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `J_n(x)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn music_bessel_j(n: u32, x: f64, out: *mut f64) -> MusicStatus {
    guard(|| unsafe { write_out(out, bessel_j(n, x).map_err(core_failure)?, "out") })
}

/// `Y_n(x)` for `x > 0`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn music_bessel_y(n: u32, x: f64, out: *mut f64) -> MusicStatus {
    guard(|| unsafe { write_out(out, bessel_y(n, x).map_err(core_failure)?, "out") })
}

/// Parses and validates a JSON configuration.
///
/// # Safety
/// `json` must be null or a nul-terminated string; `out` must be null or
/// writable. On success `*out` owns a handle for [`music_config_free`].
#[no_mangle]
pub unsafe extern "C" fn music_config_from_json(json: *const c_char, out: *mut *mut MusicConfig) -> MusicStatus {
    guard(|| unsafe {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = parse_config(read_str(json, "json")?).map_err(core_failure)?;
        out.write(Box::into_raw(Box::new(MusicConfig(config))));
        Ok(())
    })
}

/// Built-in case `1..=8` with example `"EPS1"`, `"EPS2"`, `"MU1"` or `"MU2"`.
///
/// # Safety
/// As for [`music_config_from_json`].
#[no_mangle]
pub unsafe extern "C" fn music_config_from_case(
    case_id: u8,
    example: *const c_char,
    seed: u64,
    out: *mut *mut MusicConfig,
) -> MusicStatus {
    guard(|| unsafe {
        if out.is_null() {
            return Err(null("out"));
        }
        let example: Example = read_str(example, "example")?.parse().map_err(core_failure)?;
        let config = case_config(case_id, example, seed).map_err(core_failure)?;
        out.write(Box::into_raw(Box::new(MusicConfig(config))));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn music_config_set_seed(config: *mut MusicConfig, seed: u64) -> MusicStatus {
    guard(|| unsafe {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        c.0.seed = seed;
        Ok(())
    })
}

/// Sets the SNR in dB; `noiseless != 0` removes the noise instead.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn music_config_set_snr_db(config: *mut MusicConfig, snr_db: f64, noiseless: bool) -> MusicStatus {
    guard(|| unsafe {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        if !noiseless && (snr_db.is_nan() || snr_db == f64::NEG_INFINITY) {
            return Err((MusicStatus::Invalid, format!("snr_db = {snr_db} is not usable")));
        }
        c.0.snr_db = if noiseless { None } else { Some(snr_db) };
        c.0.selection = None;
        Ok(())
    })
}

/// Resolved configuration as nul-terminated JSON; `written` counts the nul.
///
/// # Safety
/// `buffer` must be null or hold `capacity` bytes; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn music_config_to_json(
    config: *const MusicConfig,
    buffer: *mut c_char,
    capacity: usize,
    written: *mut usize,
) -> MusicStatus {
    guard(|| unsafe {
        let c = handle(config, "config")?;
        let text = c.0.clone().resolved().to_json().map_err(core_failure)?;
        let bytes = CString::new(text).map_err(|e| (MusicStatus::Invalid, e.to_string()))?;
        let bytes = bytes.as_bytes_with_nul();
        copy_slice(std::slice::from_raw_parts(bytes.as_ptr().cast::<c_char>(), bytes.len()), buffer, capacity, written)
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn music_config_free(config: *mut MusicConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the experiment; nothing is written to disk.
///
/// # Safety
/// `config` must be null or live; `out` must be null or writable. On success
/// `*out` owns a handle for [`music_result_free`].
#[no_mangle]
pub unsafe extern "C" fn music_run(config: *const MusicConfig, out: *mut *mut MusicResult) -> MusicStatus {
    guard(|| unsafe {
        let c = handle(config, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = run_experiment(&c.0).map_err(core_failure)?;
        out.write(Box::into_raw(Box::new(MusicResult(result))));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn music_result_signal_dim(result: *const MusicResult, out: *mut usize) -> MusicStatus {
    guard(|| unsafe { write_out(out, handle(result, "result")?.0.metadata.signal_dim, "out") })
}

/// Achieved SNR; `*has_noise` is false for noiseless runs.
///
/// # Safety
/// `result` must be null or live; `out` and `has_noise` writable.
#[no_mangle]
pub unsafe extern "C" fn music_result_achieved_snr_db(result: *const MusicResult, out: *mut f64, has_noise: *mut bool) -> MusicStatus {
    guard(|| unsafe {
        let snr = handle(result, "result")?.0.metadata.achieved_snr_db;
        write_out(has_noise, snr.is_some(), "has_noise")?;
        write_out(out, snr.unwrap_or(f64::INFINITY), "out")
    })
}

/// Singular values in descending order.
///
/// # Safety
/// `buffer` must be null or hold `capacity` doubles; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn music_result_singular_values(
    result: *const MusicResult,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MusicStatus {
    guard(|| unsafe { copy_slice(handle(result, "result")?.0.singular_values(), buffer, capacity, written) })
}

/// Grid size: `nx` nodes along `x`, `ny` along `y`.
///
/// # Safety
/// `result` must be null or live; `nx`, `ny` writable.
#[no_mangle]
pub unsafe extern "C" fn music_result_map_shape(result: *const MusicResult, nx: *mut usize, ny: *mut usize) -> MusicStatus {
    guard(|| unsafe {
        let map = &handle(result, "result")?.0.map;
        write_out(nx, map.nx(), "nx")?;
        write_out(ny, map.ny(), "ny")
    })
}

/// Map values, row-major with `y` outer: `buffer[j * nx + i]`.
///
/// # Safety
/// As for [`music_result_singular_values`].
#[no_mangle]
pub unsafe extern "C" fn music_result_map_values(
    result: *const MusicResult,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MusicStatus {
    guard(|| unsafe { copy_slice(&handle(result, "result")?.0.map.values, buffer, capacity, written) })
}

/// # Safety
/// `result` must be null or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn music_result_peak_count(result: *const MusicResult, out: *mut usize) -> MusicStatus {
    guard(|| unsafe { write_out(out, handle(result, "result")?.0.peaks.len(), "out") })
}

/// Peak `index` (0 is the highest).
///
/// # Safety
/// `result` must be null or live; `x`, `y`, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn music_result_peak(
    result: *const MusicResult,
    index: usize,
    x: *mut f64,
    y: *mut f64,
    value: *mut f64,
) -> MusicStatus {
    guard(|| unsafe {
        let peaks = &handle(result, "result")?.0.peaks;
        let p = peaks
            .get(index)
            .ok_or_else(|| (MusicStatus::OutOfRange, format!("peak {index} of {}", peaks.len())))?;
        write_out(x, p.position.x, "x")?;
        write_out(y, p.position.y, "y")?;
        write_out(value, p.value, "value")
    })
}

/// Writes the configured files into `dir`, removing them again on failure.
///
/// # Safety
/// `result` must be null or live; `dir` null or nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn music_result_write(result: *const MusicResult, dir: *const c_char) -> MusicStatus {
    guard(|| unsafe {
        let r = handle(result, "result")?;
        let dir = read_str(dir, "dir")?;
        write_artifacts(&r.0, Path::new(dir)).map_err(core_failure)?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn music_result_free(result: *mut MusicResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
