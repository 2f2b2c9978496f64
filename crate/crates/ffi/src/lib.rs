//! C ABI for circq.
//!
//! Specs and reports are opaque handles created and released through this
//! interface. Every fallible call returns a [`CircqStatus`]; on failure the
//! message is available from [`circq_last_error_message`] on the same thread.
//! Strings returned to the caller must be released with [`circq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use circq::classify::{ClassifyError, Verdict};
use circq::cli::{self, LoadedSpec, Mode, RunOptions, RunReport, RunSection};
use circq::{parse, CirculantMetricSpec, Domain};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    SpecError = 3,
    SamplingError = 4,
    InvalidOptions = 5,
    EvalError = 6,
    Panic = 7,
}

/// Classification outcome for one class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircqVerdict {
    Holds = 0,
    Fails = 1,
    Indeterminate = 2,
}

/// Conditions reported by a classification.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircqClass {
    W0 = 0,
    W1 = 1,
    W2 = 2,
    W3 = 3,
    Fs = 4,
}

/// Run settings. Zero `n_points`, zero `tol` and zero `threads` select the
/// spec's `[run]` value or the built-in default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircqOptions {
    pub n_points: usize,
    pub seed: u64,
    pub tol: f64,
    pub check_identities: bool,
    pub threads: usize,
}

/// A loaded manifold spec.
pub struct CircqSpec {
    loaded: LoadedSpec,
}

/// The result of a classification run.
pub struct CircqReport {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: CircqStatus, msg: impl Into<String>) -> CircqStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CircqStatus) -> CircqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CircqStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, CircqStatus> {
    if p.is_null() {
        return Err(fail(CircqStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(CircqStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T) -> CircqStatus {
    *out = value;
    CircqStatus::Ok
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn circq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn circq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default options: 50 points, seed 0, default tolerance, identities on.
#[no_mangle]
pub extern "C" fn circq_options_default() -> CircqOptions {
    CircqOptions { n_points: 0, seed: 0, tol: 0.0, check_identities: true, threads: 0 }
}

/// Parses a spec document (TOML text).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_spec_from_str(text: *const c_char, out: *mut *mut CircqSpec) -> CircqStatus {
    guard(|| {
        if out.is_null() {
            return fail(CircqStatus::NullArgument, "out is null");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match cli::load_spec_str(text) {
            Ok(loaded) => put(out, into_handle(CircqSpec { loaded })),
            Err(e) => fail(CircqStatus::SpecError, e.to_string()),
        }
    })
}

/// Loads a spec file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_spec_from_file(path: *const c_char, out: *mut *mut CircqSpec) -> CircqStatus {
    guard(|| {
        if out.is_null() {
            return fail(CircqStatus::NullArgument, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match cli::load_spec(path) {
            Ok(loaded) => put(out, into_handle(CircqSpec { loaded })),
            Err(e) => fail(CircqStatus::SpecError, format!("{path}: {e}")),
        }
    })
}

/// Builds a circulant spec `g = circ(A, B, C, B)` from three expressions.
/// `domain` is either null (the cube `[-1, 1]^4`) or 8 values
/// `min1, max1, ..., min4, max4`.
///
/// # Safety
/// String arguments must be NUL-terminated, `domain` null or readable for 8
/// doubles, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_spec_circulant(
    label: *const c_char,
    a: *const c_char,
    b: *const c_char,
    c: *const c_char,
    domain: *const f64,
    out: *mut *mut CircqSpec,
) -> CircqStatus {
    guard(|| {
        if out.is_null() {
            return fail(CircqStatus::NullArgument, "out is null");
        }
        let mut fields = Vec::with_capacity(4);
        for (p, name) in [(label, "label"), (a, "A"), (b, "B"), (c, "C")] {
            match str_arg(p, name) {
                Ok(s) => fields.push((name, s)),
                Err(s) => return s,
            }
        }
        let mut exprs = Vec::with_capacity(3);
        for &(name, text) in &fields[1..] {
            match parse(text) {
                Ok(e) => exprs.push(e),
                Err(e) => return fail(CircqStatus::SpecError, format!("{name}: {e}")),
            }
        }
        let domain = if domain.is_null() {
            Domain::default()
        } else {
            let v = std::slice::from_raw_parts(domain, 8);
            Domain(std::array::from_fn(|k| (v[2 * k], v[2 * k + 1])))
        };
        let [ea, eb, ec]: [_; 3] = exprs.try_into().expect("three expressions");
        let cs = CirculantMetricSpec::new(fields[0].1, ea, eb, ec, domain);
        match cs.to_manifold_spec() {
            Ok(spec) => {
                let loaded = LoadedSpec { mode: Mode::Circulant, spec, run: RunSection::default() };
                put(out, into_handle(CircqSpec { loaded }))
            }
            Err(e) => fail(CircqStatus::SpecError, e.to_string()),
        }
    })
}

/// Releases a spec. Null is ignored.
///
/// # Safety
/// `spec` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn circq_spec_free(spec: *mut CircqSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Samples the spec and classifies it. `options` may be null for defaults.
///
/// # Safety
/// `spec` must be a live handle, `options` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_classify(
    spec: *const CircqSpec,
    options: *const CircqOptions,
    out: *mut *mut CircqReport,
) -> CircqStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(CircqStatus::NullArgument, "spec or out is null");
        }
        let o = if options.is_null() { circq_options_default() } else { *options };
        let opts = RunOptions {
            points: (o.n_points > 0).then_some(o.n_points),
            seed: Some(o.seed),
            tol: (o.tol != 0.0).then_some(o.tol),
            check_identities: o.check_identities,
            threads: (o.threads > 0).then_some(o.threads),
        };
        match cli::run(&(*spec).loaded, &opts) {
            Ok(report) => put(out, into_handle(CircqReport { report })),
            Err(e @ ClassifyError::Sampling(_)) => fail(CircqStatus::SamplingError, e.to_string()),
            Err(e) => fail(CircqStatus::InvalidOptions, e.to_string()),
        }
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn circq_report_free(report: *mut CircqReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Verdict for one class.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_report_verdict(
    report: *const CircqReport,
    class: CircqClass,
    out: *mut CircqVerdict,
) -> CircqStatus {
    if report.is_null() || out.is_null() {
        return fail(CircqStatus::NullArgument, "report or out is null");
    }
    let v = &(*report).report.classification.verdicts;
    let verdict = match class {
        CircqClass::W0 => v.w0,
        CircqClass::W1 => v.w1,
        CircqClass::W2 => v.w2,
        CircqClass::W3 => v.w3,
        CircqClass::Fs => v.fs,
    };
    put(
        out,
        match verdict {
            Verdict::Holds => CircqVerdict::Holds,
            Verdict::Fails => CircqVerdict::Fails,
            Verdict::Indeterminate => CircqVerdict::Indeterminate,
        },
    )
}

/// Largest normalized residual of one class condition over all points.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_report_max_residual(
    report: *const CircqReport,
    class: CircqClass,
    out: *mut f64,
) -> CircqStatus {
    if report.is_null() || out.is_null() {
        return fail(CircqStatus::NullArgument, "report or out is null");
    }
    let m = &(*report).report.classification.max;
    put(
        out,
        match class {
            CircqClass::W0 => m.w0,
            CircqClass::W1 => m.w1,
            CircqClass::W2 => m.w2,
            CircqClass::W3 => m.w3,
            CircqClass::Fs => m.fs,
        },
    )
}

/// Number of sampled points in the report.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn circq_report_point_count(report: *const CircqReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (*report).report.classification.points.len()
}

/// The machine-readable (JSON) report. Free the result with
/// [`circq_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_report_to_machine(report: *const CircqReport, out: *mut *mut c_char) -> CircqStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(CircqStatus::NullArgument, "report or out is null");
        }
        let text = cli::render_machine(&(*report).report);
        match CString::new(text) {
            Ok(s) => put(out, s.into_raw()),
            Err(_) => fail(CircqStatus::Panic, "report contains NUL"),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn circq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and evaluates an expression in `x1..x4` at `point` (4 doubles).
///
/// # Safety
/// `expr` must be NUL-terminated, `point` readable for 4 doubles and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn circq_expr_eval(expr: *const c_char, point: *const f64, out: *mut f64) -> CircqStatus {
    guard(|| {
        if point.is_null() || out.is_null() {
            return fail(CircqStatus::NullArgument, "point or out is null");
        }
        let text = match str_arg(expr, "expr") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let e = match parse(text) {
            Ok(e) => e,
            Err(e) => return fail(CircqStatus::SpecError, e.to_string()),
        };
        let p: [f64; 4] = std::slice::from_raw_parts(point, 4).try_into().expect("four values");
        match e.evaluate(&p) {
            Ok(v) => put(out, v),
            Err(err) => fail(CircqStatus::EvalError, err.to_string()),
        }
    })
}
