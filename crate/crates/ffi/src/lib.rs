//! C ABI over the `qlif` library.
//!
//! Every fallible function returns a [`QlifStatus`]; on failure the message
//! is available from [`qlif_last_error`] on the same thread. Handles are
//! opaque and must be released with their matching `_free` function. Site
//! indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qlif::mps::{bloch_entropy, BlochVector, TebdConfig};
use qlif::qlif::{qlif_trace_with, EdSolver, Engine, InitialState, QlifRequest, QlifTrace, TimeGrid};
use qlif::spin_model::{velocity_table, HamiltonianSpec};
use qlif::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlifStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Io = 6,
    Panic = 7,
}

/// Initial product or ground state for a trace.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlifInitial {
    /// Alternating up/down starting with up on site 0.
    Neel = 0,
    AllUp = 1,
    /// Ground state of the same Hamiltonian the trace evolves under.
    GroundState = 2,
}

/// Model parameters `(L, J, B, h_z)`.
pub struct QlifHamiltonian {
    spec: HamiltonianSpec,
}

/// Exact-diagonalization engine with an eigensystem cache.
pub struct QlifEdSolver {
    solver: EdSolver,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> QlifStatus {
    match e {
        Error::Capacity { .. } => QlifStatus::Capacity,
        Error::Numerical(_) | Error::Linalg(_) | Error::Fit(_) | Error::InsufficientData { .. } => {
            QlifStatus::Numerical
        }
        Error::Io(_) => QlifStatus::Io,
        _ => QlifStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (QlifStatus, String)>) -> QlifStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QlifStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            QlifStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (QlifStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QlifStatus, String) {
    (QlifStatus::NullPointer, format!("`{what}` is null"))
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn qlif_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qlif_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qlif_hamiltonian_new(
    sites: usize,
    coupling: f64,
    transverse: f64,
    longitudinal: f64,
    out: *mut *mut QlifHamiltonian,
) -> QlifStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = HamiltonianSpec::new(sites, coupling, transverse, longitudinal).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(QlifHamiltonian { spec }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`qlif_hamiltonian_new`] and not be used afterwards.
/// Null is accepted.
#[no_mangle]
pub unsafe extern "C" fn qlif_hamiltonian_free(h: *mut QlifHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Lieb-Robinson bound `2eJ` and maximal group velocity of the model.
///
/// # Safety
/// `h` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn qlif_velocity_table(
    h: *const QlifHamiltonian,
    lieb_robinson: *mut f64,
    max_group: *mut f64,
) -> QlifStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        if lieb_robinson.is_null() || max_group.is_null() {
            return Err(null("output"));
        }
        let table = velocity_table(&h.spec);
        *lieb_robinson = table.lieb_robinson;
        *max_group = table.max_group;
        Ok(())
    })
}

/// Von Neumann entropy of one spin with Bloch vector `(x, y, z)`.
#[no_mangle]
pub extern "C" fn qlif_bloch_entropy(x: f64, y: f64, z: f64) -> f64 {
    bloch_entropy(&BlochVector::new(x, y, z))
}

/// Number of samples on the grid `0, step, 2 step, ... <= t_max`, or 0 if
/// the grid is invalid.
#[no_mangle]
pub extern "C" fn qlif_time_points(step: f64, t_max: f64) -> usize {
    let grid = TimeGrid::new(step, t_max);
    grid.validate().map_or(0, |_| grid.points())
}

/// ED solver accepting chains up to `cap` sites; 0 selects the default cap.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qlif_ed_solver_new(cap: usize, out: *mut *mut QlifEdSolver) -> QlifStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let solver = if cap == 0 { EdSolver::default() } else { EdSolver::new(cap) };
        *out = Box::into_raw(Box::new(QlifEdSolver { solver }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`qlif_ed_solver_new`] and not be used afterwards.
/// Null is accepted.
#[no_mangle]
pub unsafe extern "C" fn qlif_ed_solver_free(s: *mut QlifEdSolver) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Output buffers for a trace. Each array must hold `capacity` values;
/// `t_d` is required, the others may be null.
#[repr(C)]
pub struct QlifTraceBuffers {
    pub capacity: usize,
    pub times: *mut f64,
    pub t_d: *mut f64,
    pub s_full: *mut f64,
    pub s_frozen: *mut f64,
    pub integral: *mut f64,
    /// Number of samples written.
    pub len: usize,
}

fn initial_state(kind: QlifInitial, spec: &HamiltonianSpec) -> InitialState {
    match kind {
        QlifInitial::Neel => InitialState::Neel,
        QlifInitial::AllUp => InitialState::AllUp,
        QlifInitial::GroundState => InitialState::GroundState(spec.clone()),
    }
}

unsafe fn fill(buf: &mut QlifTraceBuffers, trace: &QlifTrace) -> Result<(), (QlifStatus, String)> {
    let n = trace.times.len();
    if buf.capacity < n {
        return Err((
            QlifStatus::BufferTooSmall,
            format!("trace has {n} samples but capacity is {}", buf.capacity),
        ));
    }
    for (dst, src) in [
        (buf.times, &trace.times),
        (buf.t_d, &trace.t_d),
        (buf.s_full, &trace.s_full),
        (buf.s_frozen, &trace.s_frozen),
        (buf.integral, &trace.integral),
    ] {
        if !dst.is_null() {
            ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
        }
    }
    buf.len = n;
    Ok(())
}

unsafe fn run_trace(
    solver: &EdSolver,
    h: *const QlifHamiltonian,
    frozen_site: usize,
    obs_site: usize,
    initial: QlifInitial,
    engine: Engine,
    step: f64,
    t_max: f64,
    buf: *mut QlifTraceBuffers,
) -> Result<(), (QlifStatus, String)> {
    let h = h.as_ref().ok_or_else(|| null("h"))?;
    let buf = buf.as_mut().ok_or_else(|| null("buffers"))?;
    if buf.t_d.is_null() {
        return Err(null("buffers.t_d"));
    }
    let grid = TimeGrid::new(step, t_max);
    grid.validate().map_err(lib_err)?;
    if buf.capacity < grid.points() {
        return Err((
            QlifStatus::BufferTooSmall,
            format!("grid has {} samples but capacity is {}", grid.points(), buf.capacity),
        ));
    }
    let req = QlifRequest {
        spec: h.spec.clone(),
        frozen_site,
        obs_site,
        initial: initial_state(initial, &h.spec),
        engine,
        grid,
    };
    let trace = qlif_trace_with(solver, &req).map_err(lib_err)?;
    fill(buf, &trace)
}

/// Exact QLIF trace `T_d(t)` for freezing `frozen_site` and observing
/// `obs_site`. `solver` may be null, in which case a temporary one is used.
///
/// # Safety
/// `h` must be a live handle, `solver` null or live, and `buf` must point to
/// buffers sized as documented on [`QlifTraceBuffers`].
#[no_mangle]
pub unsafe extern "C" fn qlif_trace_ed(
    solver: *const QlifEdSolver,
    h: *const QlifHamiltonian,
    frozen_site: usize,
    obs_site: usize,
    initial: QlifInitial,
    step: f64,
    t_max: f64,
    buf: *mut QlifTraceBuffers,
) -> QlifStatus {
    guard(|| {
        let owned;
        let solver = match solver.as_ref() {
            Some(s) => &s.solver,
            None => {
                owned = EdSolver::default();
                &owned
            }
        };
        run_trace(solver, h, frozen_site, obs_site, initial, Engine::Ed, step, t_max, buf)
    })
}

/// TEBD QLIF trace with Trotter step `dt` and bond cap `chi`. The sampling
/// `step` must be a multiple of `dt`.
///
/// # Safety
/// `h` must be a live handle and `buf` must point to buffers sized as
/// documented on [`QlifTraceBuffers`].
#[no_mangle]
pub unsafe extern "C" fn qlif_trace_mps(
    h: *const QlifHamiltonian,
    frozen_site: usize,
    obs_site: usize,
    initial: QlifInitial,
    dt: f64,
    chi: usize,
    step: f64,
    t_max: f64,
    buf: *mut QlifTraceBuffers,
) -> QlifStatus {
    guard(|| {
        let cfg = TebdConfig::new(dt, chi);
        cfg.validate().map_err(lib_err)?;
        run_trace(&EdSolver::default(), h, frozen_site, obs_site, initial, Engine::Mps(cfg), step, t_max, buf)
    })
}
