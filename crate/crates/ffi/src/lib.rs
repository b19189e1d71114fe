//! C ABI for nxfem.
//!
//! A problem handle owns one discretization (mesh hierarchy plus the assembled
//! finest-level system). Every entry point returns an [`NxfemStatus`] code; the
//! message of the last failure on the calling thread is available through
//! [`nxfem_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nxfem::bench::{default_depth, example1, example2, example3, multi_interface, solve, condition_number, Discretization, SolverKind};
use nxfem::multigrid::{MgHierarchy, SmootherConfig};
use nxfem::nitsche::Variant;
use nxfem::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NxfemStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Dimension = 3,
    NotConverged = 4,
    Numerical = 5,
    Geometry = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NxfemExample {
    /// Smooth solution across a straight interface, unit coefficients.
    One = 1,
    /// Circular interface, `u = alpha2 (r^2 - r0^2)` inside.
    Two = 2,
    /// Circular interface, `u = r^2 / alpha1` inside.
    Three = 3,
    /// Parallel straight interfaces, unit coefficients.
    Multi = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NxfemVariant {
    Eigen = 0,
    Lifting = 1,
    Ghost = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NxfemSolver {
    Direct = 0,
    CgJacobi = 1,
    CgSgs = 2,
    CgSmg = 3,
    Smg = 4,
}

/// Outcome of a solve. `rho_star` is NaN when fewer than two iterations ran.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NxfemReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub rho_star: f64,
    pub wall_time: f64,
    pub converged: bool,
}

impl Default for NxfemReport {
    fn default() -> Self {
        Self {
            iterations: 0,
            final_residual: f64::NAN,
            rho_star: f64::NAN,
            wall_time: 0.0,
            converged: false,
        }
    }
}

impl From<&nxfem::krylov::SolveReport> for NxfemReport {
    fn from(r: &nxfem::krylov::SolveReport) -> Self {
        Self {
            iterations: r.iterations,
            final_residual: r.final_residual().unwrap_or(if r.converged { 0.0 } else { f64::NAN }),
            rho_star: r.rho_star.unwrap_or(f64::NAN),
            wall_time: r.wall_time,
            converged: r.converged,
        }
    }
}

/// Opaque problem handle.
pub struct NxfemProblem {
    disc: Discretization,
    hierarchy: Option<MgHierarchy>,
}

impl NxfemProblem {
    fn hierarchy(&mut self) -> nxfem::Result<&MgHierarchy> {
        if self.hierarchy.is_none() {
            self.hierarchy = Some(self.disc.hierarchy(SmootherConfig::default())?);
        }
        Ok(self.hierarchy.as_ref().expect("just built"))
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> NxfemStatus {
    match err {
        Error::Config(_) => NxfemStatus::Config,
        Error::DimensionMismatch(_) => NxfemStatus::Dimension,
        Error::NotConverged { .. } => NxfemStatus::NotConverged,
        Error::NotPositiveDefinite { .. }
        | Error::ZeroDiagonal(_)
        | Error::Breakdown { .. }
        | Error::EigenNotConverged { .. } => NxfemStatus::Numerical,
        Error::DegenerateElement { .. }
        | Error::MultipleInterfaces { .. }
        | Error::EdgeAlignedInterface { .. }
        | Error::SubdomainNotPresent { .. } => NxfemStatus::Geometry,
        Error::Io(_) | Error::Csv(_) => NxfemStatus::Io,
    }
}

fn fail(err: Error) -> NxfemStatus {
    set_last_error(err.to_string());
    status_of(&err)
}

fn config_error(msg: impl Into<String>) -> NxfemStatus {
    set_last_error(msg);
    NxfemStatus::Config
}

fn null_error(name: &str) -> NxfemStatus {
    set_last_error(format!("{name} is null"));
    NxfemStatus::NullPointer
}

/// Runs `f`, turning a panic into `NxfemStatus::Panic`.
fn guard(f: impl FnOnce() -> NxfemStatus) -> NxfemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == NxfemStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NxfemStatus::Panic
        }
    }
}

fn variant_from(v: c_int) -> Option<Variant> {
    match v {
        0 => Some(Variant::Eigen),
        1 => Some(Variant::Lifting),
        2 => Some(Variant::Ghost),
        _ => None,
    }
}

fn solver_from(s: c_int) -> Option<SolverKind> {
    match s {
        0 => Some(SolverKind::Direct),
        1 => Some(SolverKind::CgJacobi),
        2 => Some(SolverKind::CgSgs),
        3 => Some(SolverKind::CgSmg),
        4 => Some(SolverKind::Smg),
        _ => None,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nxfem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn nxfem_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds and assembles a problem on an `finest_cells` x `finest_cells` mesh.
///
/// `example` and `variant` take the values of [`NxfemExample`] and [`NxfemVariant`].
/// `alpha1` and `alpha2` are read by examples 2 and 3 only; `interfaces` by the
/// multi-interface example only. `depth` is the number of mesh levels; 0 picks
/// the default for `finest_cells`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn nxfem_problem_new(
    example: c_int,
    variant: c_int,
    alpha1: f64,
    alpha2: f64,
    interfaces: usize,
    finest_cells: usize,
    depth: usize,
    out: *mut *mut NxfemProblem,
) -> NxfemStatus {
    guard(|| {
        if out.is_null() {
            return null_error("out");
        }
        unsafe { *out = ptr::null_mut() };
        let Some(variant) = variant_from(variant) else {
            return config_error(format!("unknown variant {variant}"));
        };
        let problem = match example {
            1 => Ok(example1()),
            2 => example2(alpha1, alpha2),
            3 => example3(alpha1, alpha2),
            4 => multi_interface(interfaces),
            _ => return config_error(format!("unknown example {example}")),
        };
        let problem = match problem {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        if finest_cells == 0 {
            return config_error("finest_cells must be positive");
        }
        let depth = if depth == 0 { default_depth(finest_cells) } else { depth };
        match Discretization::new(&problem, variant, finest_cells, depth) {
            Ok(disc) => {
                let handle = Box::new(NxfemProblem { disc, hierarchy: None });
                unsafe { *out = Box::into_raw(handle) };
                NxfemStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `problem` must be null or a handle from [`nxfem_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nxfem_problem_free(problem: *mut NxfemProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Number of degrees of freedom of the finest-level system.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nxfem_problem_num_dofs(problem: *const NxfemProblem, out: *mut usize) -> NxfemStatus {
    guard(|| {
        let Some(p) = (unsafe { problem.as_ref() }) else {
            return null_error("problem");
        };
        if out.is_null() {
            return null_error("out");
        }
        unsafe { *out = p.disc.num_dofs() };
        NxfemStatus::Ok
    })
}

/// Solves the finest-level system with `solver` (an [`NxfemSolver`] value) to
/// relative energy-norm residual `tol`. The solution is written to `u_out`
/// when it is non-null; `len` must then equal the number of dofs. `report` may
/// be null. On `NOT_CONVERGED` the report is still filled in.
///
/// # Safety
/// `problem` must be a live handle; `u_out` must be null or hold `len` doubles;
/// `report` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn nxfem_problem_solve(
    problem: *mut NxfemProblem,
    solver: c_int,
    tol: f64,
    u_out: *mut f64,
    len: usize,
    report: *mut NxfemReport,
) -> NxfemStatus {
    guard(|| {
        let Some(p) = (unsafe { problem.as_mut() }) else {
            return null_error("problem");
        };
        let Some(solver) = solver_from(solver) else {
            return config_error(format!("unknown solver {solver}"));
        };
        if !(tol > 0.0 && tol < 1.0) {
            return config_error(format!("tolerance {tol} is outside (0, 1)"));
        }
        let n = p.disc.num_dofs();
        if !u_out.is_null() && len != n {
            return fail(Error::DimensionMismatch(format!("output has length {len}, system has {n} dofs")));
        }
        let hierarchy = if solver.uses_multigrid() {
            match p.hierarchy() {
                Ok(_) => p.hierarchy.as_ref(),
                Err(e) => return fail(e),
            }
        } else {
            None
        };
        match solve(&p.disc, solver, tol, hierarchy) {
            Ok((u, r)) => {
                if let Some(rep) = unsafe { report.as_mut() } {
                    *rep = NxfemReport::from(&r);
                }
                if !u_out.is_null() {
                    unsafe { slice::from_raw_parts_mut(u_out, n) }.copy_from_slice(&u);
                }
                NxfemStatus::Ok
            }
            Err(e) => {
                if let (Error::NotConverged { report: r }, Some(rep)) = (&e, unsafe { report.as_mut() }) {
                    *rep = NxfemReport::from(r.as_ref());
                }
                fail(e)
            }
        }
    })
}

/// L2 and mesh-dependent energy errors of `u` against the exact solution.
///
/// # Safety
/// `problem` must be a live handle, `u` must hold `len` doubles and `l2` and
/// `energy` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nxfem_problem_errors(
    problem: *const NxfemProblem,
    u: *const f64,
    len: usize,
    l2: *mut f64,
    energy: *mut f64,
) -> NxfemStatus {
    guard(|| {
        let Some(p) = (unsafe { problem.as_ref() }) else {
            return null_error("problem");
        };
        if u.is_null() {
            return null_error("u");
        }
        if l2.is_null() || energy.is_null() {
            return null_error("l2/energy");
        }
        let u = unsafe { slice::from_raw_parts(u, len) };
        match p.disc.errors(u) {
            Ok(e) => {
                unsafe {
                    *l2 = e.l2;
                    *energy = e.energy;
                }
                NxfemStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Spectral condition number of the finest-level matrix.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nxfem_problem_condition_number(problem: *mut NxfemProblem, out: *mut f64) -> NxfemStatus {
    guard(|| {
        let Some(p) = (unsafe { problem.as_mut() }) else {
            return null_error("problem");
        };
        if out.is_null() {
            return null_error("out");
        }
        let hierarchy = if p.disc.num_dofs() > nxfem::linalg::DIRECT_INVERSE_LIMIT && p.disc.levels.len() >= 2 {
            match p.hierarchy() {
                Ok(_) => p.hierarchy.as_ref(),
                Err(e) => return fail(e),
            }
        } else {
            None
        };
        match condition_number(&p.disc, hierarchy) {
            Ok(k) => {
                unsafe { *out = k };
                NxfemStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
