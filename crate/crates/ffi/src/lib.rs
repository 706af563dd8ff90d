//! C ABI for holokit.
//!
//! Fixtures and transport results cross the boundary as opaque handles.
//! Every fallible call returns an [`HkStatus`]; on failure the message is
//! available from [`hk_last_error`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path as FsPath;
use std::ptr;

use holokit::cli::{self, Cli, Command, RunConfig};
use holokit::config::Fixture;
use holokit::transport::{holonomy, transport, TransportMap};
use holokit::Error;

/// Result codes. Zero is success; everything else is a failure except
/// `HK_STATUS_WARNING`, which means the output is valid but below the
/// requested accuracy.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HkStatus {
    Ok = 0,
    Warning = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    Config = 4,
    NotFound = 5,
    InvalidInput = 6,
    NotALoop = 7,
    Accuracy = 8,
    Group = 9,
    Geometry = 10,
    BufferTooSmall = 11,
    Io = 12,
    Panic = 13,
}

impl From<&Error> for HkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config { .. } => HkStatus::Config,
            Error::Unknown { .. } => HkStatus::NotFound,
            Error::NotALoop { .. } => HkStatus::NotALoop,
            Error::StepTooCoarse { .. } => HkStatus::Accuracy,
            Error::GroupMismatch { .. }
            | Error::NotInGroup { .. }
            | Error::CutLocus { .. }
            | Error::NotAHomomorphism { .. }
            | Error::ShapeMismatch(_)
            | Error::TorsorMismatch(_) => HkStatus::Group,
            Error::OutOfChart { .. }
            | Error::OutOfRange(_)
            | Error::SegmentLeavesChart { .. }
            | Error::EndpointMismatch(_)
            | Error::MissingAccessPath(_) => HkStatus::Geometry,
            Error::Io(_) => HkStatus::Io,
            _ => HkStatus::InvalidInput,
        }
    }
}

/// A loaded fixture: atlas, connection and named objects.
pub struct HkFixture(Fixture);

/// A transport or holonomy result.
pub struct HkTransport(TransportMap);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = CString::new(message.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `body`, recording errors and converting panics.
fn guard(body: impl FnOnce() -> Result<HkStatus, (HkStatus, String)>) -> HkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HkStatus::Panic
        }
    }
}

fn fail(e: Error) -> (HkStatus, String) {
    (HkStatus::from(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HkStatus, String)> {
    if p.is_null() {
        return Err((HkStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees a nul-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| (HkStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<HkStatus, (HkStatus, String)> {
    if out.is_null() {
        return Err((HkStatus::NullPointer, "output pointer is null".into()));
    }
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(HkStatus::Ok)
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null.
///
/// The pointer stays valid until the next `hk_*` call on the same thread.
#[no_mangle]
pub extern "C" fn hk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Load a fixture file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hk_fixture_load(path: *const c_char, out: *mut *mut HkFixture) -> HkStatus {
    guard(|| {
        let path = unsafe { text(path, "path") }?;
        let fixture = Fixture::load(FsPath::new(path)).map_err(fail)?;
        unsafe { put(out, HkFixture(fixture)) }
    })
}

/// Load one of the fixtures shipped with the library by name.
///
/// # Safety
/// As for [`hk_fixture_load`].
#[no_mangle]
pub unsafe extern "C" fn hk_fixture_builtin(name: *const c_char, out: *mut *mut HkFixture) -> HkStatus {
    guard(|| {
        let name = unsafe { text(name, "name") }?;
        let fixture = holokit::fixtures::load(name).map_err(fail)?;
        unsafe { put(out, HkFixture(fixture)) }
    })
}

/// Release a fixture. Null is ignored.
///
/// # Safety
/// `fixture` must come from a `hk_fixture_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hk_fixture_free(fixture: *mut HkFixture) {
    if !fixture.is_null() {
        // SAFETY: produced by Box::into_raw in `put`.
        drop(unsafe { Box::from_raw(fixture) });
    }
}

/// Side length of the matrices representing the fixture's structure group,
/// or 0 if the fixture has no connection or the handle is null.
///
/// # Safety
/// `fixture` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hk_fixture_matrix_dim(fixture: *const HkFixture) -> usize {
    // SAFETY: null or live per the contract.
    unsafe { fixture.as_ref() }.and_then(|f| f.0.connection.as_ref()).map_or(0, |c| c.group().matrix_dim())
}

unsafe fn run_transport(
    fixture: *const HkFixture,
    path: *const c_char,
    steps: usize,
    out: *mut *mut HkTransport,
    closed: bool,
) -> HkStatus {
    guard(|| {
        // SAFETY: null or live per the caller's contract.
        let fixture = unsafe { fixture.as_ref() }.ok_or((HkStatus::NullPointer, "fixture is null".to_string()))?;
        let name = unsafe { text(path, "path") }?;
        let conn = fixture.0.connection().map_err(fail)?;
        let p = fixture.0.path(name).map_err(fail)?;
        let map = if closed { holonomy(conn, p, steps) } else { transport(conn, p, steps) }.map_err(fail)?;
        let status = if map.warning.is_some() { HkStatus::Warning } else { HkStatus::Ok };
        if let Some(w) = &map.warning {
            set_error(w.clone());
        }
        unsafe { put(out, HkTransport(map)) }?;
        Ok(status)
    })
}

/// Parallel transport along the fixture's named path with `steps` RKMK4
/// steps per segment. Returns `HK_STATUS_WARNING` with a valid result when
/// the step-halving estimate is above the warning threshold.
///
/// # Safety
/// `fixture` must be a live handle, `path` a nul-terminated string and `out`
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hk_transport(
    fixture: *const HkFixture,
    path: *const c_char,
    steps: usize,
    out: *mut *mut HkTransport,
) -> HkStatus {
    unsafe { run_transport(fixture, path, steps, out, false) }
}

/// Holonomy of the fixture's named loop; fails with `HK_STATUS_NOT_A_LOOP`
/// for open paths.
///
/// # Safety
/// As for [`hk_transport`].
#[no_mangle]
pub unsafe extern "C" fn hk_holonomy(
    fixture: *const HkFixture,
    path: *const c_char,
    steps: usize,
    out: *mut *mut HkTransport,
) -> HkStatus {
    unsafe { run_transport(fixture, path, steps, out, true) }
}

/// Copy the transport matrix into `buffer` in row-major order. `len` is the
/// buffer length in doubles and must be at least `dim * dim`.
///
/// # Safety
/// `result` must be a live handle and `buffer` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hk_transport_matrix(result: *const HkTransport, buffer: *mut f64, len: usize) -> HkStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let result = unsafe { result.as_ref() }.ok_or((HkStatus::NullPointer, "result is null".to_string()))?;
        if buffer.is_null() {
            return Err((HkStatus::NullPointer, "buffer is null".into()));
        }
        let m = result.0.element.matrix();
        let n = m.nrows();
        if len < n * n {
            return Err((HkStatus::BufferTooSmall, format!("need {} doubles, got {len}", n * n)));
        }
        // SAFETY: the caller guarantees `len` writable doubles.
        let out = unsafe { std::slice::from_raw_parts_mut(buffer, n * n) };
        for (i, row) in m.row_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[i * n + j] = *v;
            }
        }
        Ok(HkStatus::Ok)
    })
}

/// Matrix side length of a transport result, or 0 for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hk_transport_dim(result: *const HkTransport) -> usize {
    // SAFETY: null or live per the contract.
    unsafe { result.as_ref() }.map_or(0, |r| r.0.element.matrix().nrows())
}

/// Step-halving error estimate of a transport result, or NaN for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hk_transport_error_estimate(result: *const HkTransport) -> f64 {
    // SAFETY: null or live per the contract.
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.0.error_estimate)
}

/// Unwrapped rotation angle for circle groups. Writes it to `angle` and
/// returns true, or returns false for other groups and null handles.
///
/// # Safety
/// `result` must be null or a live handle; `angle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hk_transport_angle(result: *const HkTransport, angle: *mut f64) -> bool {
    // SAFETY: null or live per the contract.
    match (unsafe { result.as_ref() }.and_then(|r| r.0.unwrapped_angle), angle.is_null()) {
        (Some(a), false) => {
            unsafe { *angle = a };
            true
        }
        _ => false,
    }
}

/// Release a transport result. Null is ignored.
///
/// # Safety
/// `result` must come from [`hk_transport`] or [`hk_holonomy`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hk_transport_free(result: *mut HkTransport) {
    if !result.is_null() {
        // SAFETY: produced by Box::into_raw in `put`.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Run a command-line subcommand (`"transport"`, `"sweep"`, ...) on a run
/// config and return its report. The report is written to `*report` and must
/// be released with [`hk_string_free`]. Returns `HK_STATUS_WARNING` when the
/// command line would exit with status 2.
///
/// # Safety
/// `command` and `config` must be nul-terminated strings; `report` must be
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hk_run(command: *const c_char, config: *const c_char, report: *mut *mut c_char) -> HkStatus {
    guard(|| {
        let name = unsafe { text(command, "command") }?;
        let config = unsafe { text(config, "config") }?;
        if report.is_null() {
            return Err((HkStatus::NullPointer, "report is null".into()));
        }
        let command = Command::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| (HkStatus::NotFound, format!("unknown command `{name}`")))?;
        let flags = Cli {
            command,
            config: Some(config.into()),
            out: None,
            steps: None,
            h: None,
            samples: None,
            seed: None,
            tol: None,
        };
        let run = RunConfig::load(FsPath::new(config), &flags).map_err(fail)?;
        let outcome = cli::execute(command, &run).map_err(fail)?;
        let body = CString::new(outcome.body).map_err(|_| (HkStatus::InvalidInput, "report contains nul".into()))?;
        // SAFETY: checked non-null above.
        unsafe { *report = body.into_raw() };
        if outcome.warnings.is_empty() {
            Ok(HkStatus::Ok)
        } else {
            set_error(outcome.warnings.join("; "));
            Ok(HkStatus::Warning)
        }
    })
}

/// Release a string returned by [`hk_run`]. Null is ignored.
///
/// # Safety
/// `s` must come from [`hk_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hk_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in `hk_run`.
        drop(unsafe { CString::from_raw(s) });
    }
}
