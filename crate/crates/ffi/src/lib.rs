//! C ABI over `samlfd`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every entry point returns a
//! [`SamlfdStatus`]; on failure `samlfd_last_error` describes what went wrong
//! on the calling thread. Panics are caught and reported as
//! [`SamlfdStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use samlfd::engine::{best_reproduction, EvalOptions, Session, SessionConfig};
use samlfd::metrics::MetricId;
use samlfd::representations::RepresentationId;
use samlfd::trajectory::{ConstraintKind, Trajectory};
use samlfd::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamlfdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidTrajectory = 3,
    UnknownName = 4,
    Io = 5,
    Parse = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Representation codes used by labels and winners.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamlfdRepresentation {
    Ja = 0,
    Lte = 1,
    Dmp = 2,
}

impl From<RepresentationId> for SamlfdRepresentation {
    fn from(r: RepresentationId) -> Self {
        match r {
            RepresentationId::Ja => SamlfdRepresentation::Ja,
            RepresentationId::Lte => SamlfdRepresentation::Lte,
            RepresentationId::Dmp => SamlfdRepresentation::Dmp,
        }
    }
}

/// Opaque trajectory handle.
pub struct SamlfdTrajectory(Trajectory);

/// Opaque session handle.
pub struct SamlfdSession(Session);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(SamlfdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidTrajectory(_) | Error::NonFinite { .. } | Error::DimensionMismatch { .. } => {
                SamlfdStatus::InvalidTrajectory
            }
            Error::InvalidArgument(_) => SamlfdStatus::InvalidArgument,
            Error::UnknownMetric(_) | Error::UnknownRepresentation(_) => SamlfdStatus::UnknownName,
            Error::Singular(_) | Error::Unstable(_) | Error::AllFailed(_) => SamlfdStatus::Numerical,
            Error::Parse { .. } => SamlfdStatus::Parse,
            Error::Io { .. } => SamlfdStatus::Io,
        };
        Failure(code, e.to_string())
    }
}

fn fail(code: SamlfdStatus, msg: impl Into<String>) -> Failure {
    Failure(code, msg.into())
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SamlfdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SamlfdStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SamlfdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(SamlfdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SamlfdStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(SamlfdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(fail(SamlfdStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(SamlfdStatus::NullPointer, format!("{what} is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn samlfd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a trajectory from `len` row-major samples of `dims` coordinates.
/// A non-positive `duration` means 1 second.
#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_new(
    data: *const f64,
    len: usize,
    dims: usize,
    duration: f64,
    out: *mut *mut SamlfdTrajectory,
) -> SamlfdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let count = len
            .checked_mul(dims)
            .ok_or_else(|| fail(SamlfdStatus::InvalidArgument, "len * dims overflows"))?;
        let values = slice_arg(data, count, "data")?.to_vec();
        let mut t = Trajectory::new(values, dims)?;
        if duration > 0.0 {
            t = t.with_duration(duration)?;
        }
        *out = Box::into_raw(Box::new(SamlfdTrajectory(t)));
        Ok(())
    })
}

/// Loads a trajectory from a JSON or CSV file.
#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_load(path: *const c_char, out: *mut *mut SamlfdTrajectory) -> SamlfdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = samlfd::io::load_trajectory(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(SamlfdTrajectory(t)));
        Ok(())
    })
}

/// One of the bundled shapes with `samples` samples.
#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_shape(
    name: *const c_char,
    samples: usize,
    out: *mut *mut SamlfdTrajectory,
) -> SamlfdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        if samples < 2 {
            return Err(fail(SamlfdStatus::InvalidArgument, "a shape needs at least 2 samples"));
        }
        let t = samlfd::shapes::by_name(name, samples)
            .ok_or_else(|| fail(SamlfdStatus::UnknownName, format!("unknown shape {name:?}")))?;
        *out = Box::into_raw(Box::new(SamlfdTrajectory(t)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_len(t: *const SamlfdTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_dims(t: *const SamlfdTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.dims())
}

/// Copies the row-major samples into `buf`, which must hold `len * dims`
/// values.
#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_copy(t: *const SamlfdTrajectory, buf: *mut f64, capacity: usize) -> SamlfdStatus {
    guard(|| {
        let t = &ref_arg(t, "trajectory")?.0;
        let data = t.as_flat();
        if capacity < data.len() {
            return Err(fail(
                SamlfdStatus::BufferTooSmall,
                format!("need {} values, buffer holds {capacity}", data.len()),
            ));
        }
        if buf.is_null() {
            return Err(fail(SamlfdStatus::NullPointer, "buf is null"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn samlfd_trajectory_free(t: *mut SamlfdTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Distance between two trajectories under the metric named `metric`
/// (for example `"frechet"` or `"dtw"`).
#[no_mangle]
pub unsafe extern "C" fn samlfd_distance(
    metric: *const c_char,
    a: *const SamlfdTrajectory,
    b: *const SamlfdTrajectory,
    out: *mut f64,
) -> SamlfdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let metric: MetricId = str_arg(metric, "metric")?.parse()?;
        *out = samlfd::metrics::distance(metric, &ref_arg(a, "a")?.0, &ref_arg(b, "b")?.0)?;
        Ok(())
    })
}

/// Reproduces `demo` from a new initial point with JA, LTE and DMP and
/// returns the closest under `metric`. `point` holds `dims` values.
#[no_mangle]
pub unsafe extern "C" fn samlfd_best_reproduction(
    demo: *const SamlfdTrajectory,
    point: *const f64,
    dims: usize,
    metric: *const c_char,
    out_trajectory: *mut *mut SamlfdTrajectory,
    out_representation: *mut SamlfdRepresentation,
    out_distance: *mut f64,
) -> SamlfdStatus {
    guard(|| {
        let demo = &ref_arg(demo, "demo")?.0;
        let point = slice_arg(point, dims, "point")?;
        let metric: MetricId = str_arg(metric, "metric")?.parse()?;
        let out_t = out_arg(out_trajectory, "out_trajectory")?;
        let r = best_reproduction(
            demo,
            point,
            ConstraintKind::Initial,
            &RepresentationId::ALL,
            metric,
            &EvalOptions { workers: Some(1), ..EvalOptions::default() },
        )?;
        if let Some(rep) = out_representation.as_mut() {
            *rep = r.representation.into();
        }
        if let Some(d) = out_distance.as_mut() {
            *d = r.raw_distance;
        }
        *out_t = Box::into_raw(Box::new(SamlfdTrajectory(r.trajectory)));
        Ok(())
    })
}

/// Computes a session over `demo` as given (no smoothing or resampling).
/// `config_json` may be null for the defaults; `workers` 0 uses every core.
#[no_mangle]
pub unsafe extern "C" fn samlfd_session_compute(
    demo: *const SamlfdTrajectory,
    config_json: *const c_char,
    workers: usize,
    out: *mut *mut SamlfdSession,
) -> SamlfdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let demo = ref_arg(demo, "demo")?.0.clone();
        let config: SessionConfig = if config_json.is_null() {
            SessionConfig::default()
        } else {
            serde_json::from_str(str_arg(config_json, "config_json")?)
                .map_err(|e| fail(SamlfdStatus::Parse, format!("session config: {e}")))?
        };
        let session = Session::compute(demo, config, (workers > 0).then_some(workers))?;
        *out = Box::into_raw(Box::new(SamlfdSession(session)));
        Ok(())
    })
}

/// Number of grid points in the session.
#[no_mangle]
pub unsafe extern "C" fn samlfd_session_grid_len(s: *const SamlfdSession) -> usize {
    s.as_ref().map_or(0, |s| s.0.map.grid.len())
}

/// Best representation at every grid point, row-major.
#[no_mangle]
pub unsafe extern "C" fn samlfd_session_labels(
    s: *const SamlfdSession,
    buf: *mut SamlfdRepresentation,
    capacity: usize,
) -> SamlfdStatus {
    guard(|| {
        let labels = &ref_arg(s, "session")?.0.map.best_label;
        if capacity < labels.len() {
            return Err(fail(
                SamlfdStatus::BufferTooSmall,
                format!("need {} labels, buffer holds {capacity}", labels.len()),
            ));
        }
        if buf.is_null() {
            return Err(fail(SamlfdStatus::NullPointer, "buf is null"));
        }
        for (i, l) in labels.iter().enumerate() {
            *buf.add(i) = (*l).into();
        }
        Ok(())
    })
}

/// Region-classifier prediction at `point`.
#[no_mangle]
pub unsafe extern "C" fn samlfd_session_predict(
    s: *const SamlfdSession,
    point: *const f64,
    dims: usize,
    out: *mut SamlfdRepresentation,
) -> SamlfdStatus {
    guard(|| {
        let s = &ref_arg(s, "session")?.0;
        let out = out_arg(out, "out")?;
        *out = s.predict(slice_arg(point, dims, "point")?)?.into();
        Ok(())
    })
}

/// The session document as JSON. Release it with `samlfd_string_free`.
#[no_mangle]
pub unsafe extern "C" fn samlfd_session_to_json(s: *const SamlfdSession, out: *mut *mut c_char) -> SamlfdStatus {
    guard(|| {
        let json = ref_arg(s, "session")?.0.to_json();
        *out_arg(out, "out")? = into_c_string(json);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn samlfd_session_free(s: *mut SamlfdSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn samlfd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
