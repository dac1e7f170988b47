//! C ABI for the photonlab toolkit.
//!
//! Every function returns a [`PlStatus`]. On failure a description is kept
//! per thread and read with [`pl_last_error`]. Objects are opaque handles
//! created by `pl_*` constructors and released with the matching `_free`
//! function; passing NULL to a `_free` function is a no-op. Output pointers
//! are written only on success. Panics never cross the boundary; they are
//! reported as [`PlStatus::Panic`].
//!
//! Times follow the library: ns for physical quantities, ps for timestamps
//! and bin widths.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use photonlab::config::RunConfig;
use photonlab::correlator::{correlate, g2_zero, Histogram};
use photonlab::efficiency::{eta_absolute, eta_relative, Measured, Propagation};
use photonlab::inference::{fit_hom, fit_saturation, FitReport, HomFitOptions, SaturationPoint};
use photonlab::simulator::{read_stream, simulate, TimeTag, TimeTagStream};
use photonlab::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Invalid argument, configuration or input format.
    InvalidArgument = 2,
    /// Fit failure, insufficient data or an out-of-range result.
    Numerical = 3,
    Io = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// Internal error; the library state is unaffected.
    Panic = 6,
}

/// A value with its standard error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlEstimate {
    pub value: f64,
    pub error: f64,
}

/// g²(0) with the counts it was formed from.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlG2 {
    pub value: f64,
    pub error: f64,
    pub center_counts: u64,
    pub side_mean: f64,
}

/// Settings of the HOM cluster fit. Zero `clusters` or `passes` select the
/// library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlHomOptions {
    /// Radiative decay rate (ns⁻¹).
    pub gamma: f64,
    /// Interferometer delay (ns).
    pub delta: f64,
    pub rep_period: f64,
    /// Coincidence IRF width (ns).
    pub irf_sigma: f64,
    pub clusters: u32,
    pub passes: u32,
}

/// Opaque time-tag stream.
pub struct PlStream(TimeTagStream);

/// Opaque coincidence histogram.
pub struct PlHistogram(Histogram);

/// Opaque fit report.
pub struct PlFitReport(FitReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Fail(PlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::Format(_)
            | Error::UnsortedStream { .. }
            | Error::TimestampOverflow(_) => PlStatus::InvalidArgument,
            Error::UndersampledKernel { .. }
            | Error::InsufficientData(_)
            | Error::NonConvergence { .. }
            | Error::ProbabilityOutOfRange { .. } => PlStatus::Numerical,
            Error::Io(_) => PlStatus::Io,
        };
        Fail(status, e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(PlStatus::NullPointer, format!("`{name}` is NULL"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PlStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {what}"));
            PlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PlStatus::Utf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, value: T, name: &str) -> Result<(), Fail> {
    put(out, Box::into_raw(Box::new(value)), name)
}

/// Description of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library name and version as a static string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!("photonlab ", env!("CARGO_PKG_VERSION"), "\0")
        .as_ptr()
        .cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulates the run described by a TOML configuration document.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_simulate(
    config_toml: *const c_char,
    out: *mut *mut PlStream,
) -> PlStatus {
    guard(|| {
        let cfg = RunConfig::from_toml_str(str_arg(config_toml, "config_toml")?)?;
        put_box(out, PlStream(simulate(&cfg.sim_config())?), "out")
    })
}

/// Simulates a bundled configuration; `n_periods` 0 keeps its period count.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_simulate_bundled(
    name: *const c_char,
    n_periods: u64,
    seed: u64,
    out: *mut *mut PlStream,
) -> PlStatus {
    guard(|| {
        let mut cfg = RunConfig::bundled(str_arg(name, "name")?)?;
        if n_periods > 0 {
            cfg.simulation.n_periods = n_periods;
        }
        cfg.simulation.rng_seed = seed;
        put_box(out, PlStream(simulate(&cfg.sim_config())?), "out")
    })
}

/// Builds a stream from `n` records in any order.
///
/// # Safety
/// `channels` and `timestamps_ps` must hold `n` elements and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_stream_from_records(
    channels: *const u8,
    timestamps_ps: *const u64,
    n: usize,
    duration_ps: u64,
    out: *mut *mut PlStream,
) -> PlStatus {
    guard(|| {
        let ch = slice(channels, n, "channels")?;
        let ts = slice(timestamps_ps, n, "timestamps_ps")?;
        let recs = ch
            .iter()
            .zip(ts)
            .map(|(&c, &t)| TimeTag::new(c, t))
            .collect();
        put_box(
            out,
            PlStream(TimeTagStream::from_unsorted(recs, duration_ps)?),
            "out",
        )
    })
}

/// Reads a stream file, CSV if the name ends in `.csv` and binary otherwise.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_stream_read(path: *const c_char, out: *mut *mut PlStream) -> PlStatus {
    guard(|| {
        let p = str_arg(path, "path")?;
        put_box(out, PlStream(read_stream(Path::new(p))?), "out")
    })
}

/// Number of records.
///
/// # Safety
/// `stream` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_stream_len(stream: *const PlStream, out: *mut usize) -> PlStatus {
    guard(|| put(out, obj(stream, "stream")?.0.len(), "out"))
}

/// Number of records on one detector channel.
///
/// # Safety
/// `stream` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_stream_count(
    stream: *const PlStream,
    channel: u8,
    out: *mut usize,
) -> PlStatus {
    guard(|| put(out, obj(stream, "stream")?.0.count(channel), "out"))
}

/// # Safety
/// `stream` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_stream_free(stream: *mut PlStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Histogram of channel-1 minus channel-0 delays within ±`window_ps`.
///
/// # Safety
/// `stream` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_correlate(
    stream: *const PlStream,
    bin_width_ps: u64,
    window_ps: u64,
    out: *mut *mut PlHistogram,
) -> PlStatus {
    guard(|| {
        let h = correlate(&obj(stream, "stream")?.0, bin_width_ps, window_ps)?;
        put_box(out, PlHistogram(h), "out")
    })
}

/// Reads a histogram CSV as written by the `correlate` command.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_histogram_read_csv(
    path: *const c_char,
    out: *mut *mut PlHistogram,
) -> PlStatus {
    guard(|| {
        let file = std::fs::File::open(str_arg(path, "path")?).map_err(Error::from)?;
        put_box(out, PlHistogram(Histogram::read_csv(file)?), "out")
    })
}

/// Number of bins.
///
/// # Safety
/// `hist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_histogram_len(hist: *const PlHistogram, out: *mut usize) -> PlStatus {
    guard(|| put(out, obj(hist, "hist")?.0.len(), "out"))
}

/// Copies up to `capacity` bin counts into `counts` and the bin centres (ns)
/// into `centers_ns` when it is not NULL. `written` receives the number of
/// bins copied.
///
/// # Safety
/// `counts` (and `centers_ns` if given) must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn pl_histogram_bins(
    hist: *const PlHistogram,
    counts: *mut u64,
    centers_ns: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> PlStatus {
    guard(|| {
        let h = &obj(hist, "hist")?.0;
        let n = h.len().min(capacity);
        if n > 0 && counts.is_null() {
            return Err(null("counts"));
        }
        for k in 0..n {
            counts.add(k).write(h.counts[k]);
            if !centers_ns.is_null() {
                centers_ns.add(k).write(h.bin_center_ns(k));
            }
        }
        put(written, n, "written")
    })
}

/// # Safety
/// `hist` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_histogram_free(hist: *mut PlHistogram) {
    if !hist.is_null() {
        drop(Box::from_raw(hist));
    }
}

/// g²(0) from the zero-delay peak against side peaks within `norm_span`.
///
/// # Safety
/// `hist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_g2_zero(
    hist: *const PlHistogram,
    rep_period: f64,
    center_window: f64,
    norm_span: f64,
    out: *mut PlG2,
) -> PlStatus {
    guard(|| {
        let g = g2_zero(&obj(hist, "hist")?.0, rep_period, center_window, norm_span)?;
        let v = PlG2 {
            value: g.value,
            error: g.error,
            center_counts: g.center_counts,
            side_mean: g.side_mean,
        };
        put(out, v, "out")
    })
}

/// Fits the HOM cluster model.
///
/// # Safety
/// `hist` must be a live handle, `options` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_hom(
    hist: *const PlHistogram,
    options: *const PlHomOptions,
    out: *mut *mut PlFitReport,
) -> PlStatus {
    guard(|| {
        let o = obj(options, "options")?;
        let mut opts = HomFitOptions::new(o.gamma, o.delta, o.rep_period, o.irf_sigma);
        if o.clusters > 0 {
            opts.clusters = o.clusters as usize;
        }
        if o.passes > 0 {
            opts.passes = o.passes as usize;
        }
        let fit = fit_hom(&obj(hist, "hist")?.0, &opts)?;
        put_box(out, PlFitReport(fit.report), "out")
    })
}

/// Fits `C_sat(1 − e^{−P/P_sat})` to `n` points of power, counts and error.
///
/// # Safety
/// The three arrays must hold `n` elements and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_saturation(
    power: *const f64,
    counts: *const f64,
    error: *const f64,
    n: usize,
    out: *mut *mut PlFitReport,
) -> PlStatus {
    guard(|| {
        let (p, c, e) = (
            slice(power, n, "power")?,
            slice(counts, n, "counts")?,
            slice(error, n, "error")?,
        );
        let pts: Vec<SaturationPoint> = (0..n)
            .map(|i| SaturationPoint::from((p[i], c[i], e[i])))
            .collect();
        put_box(out, PlFitReport(fit_saturation(&pts)?), "out")
    })
}

/// A fitted parameter by name.
///
/// # Safety
/// `report` must be a live handle, `name` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_report_param(
    report: *const PlFitReport,
    name: *const c_char,
    out: *mut PlEstimate,
) -> PlStatus {
    lookup(report, name, out, |r, n| r.param(n))
}

/// A derived quantity by name.
///
/// # Safety
/// `report` must be a live handle, `name` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_report_derived(
    report: *const PlFitReport,
    name: *const c_char,
    out: *mut PlEstimate,
) -> PlStatus {
    lookup(report, name, out, |r, n| r.derived(n))
}

unsafe fn lookup(
    report: *const PlFitReport,
    name: *const c_char,
    out: *mut PlEstimate,
    get: impl FnOnce(&FitReport, &str) -> Option<photonlab::inference::Estimate>,
) -> PlStatus {
    guard(|| {
        let r = &obj(report, "report")?.0;
        let n = str_arg(name, "name")?;
        let e = get(r, n).ok_or_else(|| {
            Fail(
                PlStatus::InvalidArgument,
                format!("no quantity `{n}` in the report"),
            )
        })?;
        put(
            out,
            PlEstimate {
                value: e.value,
                error: e.error,
            },
            "out",
        )
    })
}

/// Reduced χ² of the fit.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_report_chi2_per_dof(
    report: *const PlFitReport,
    out: *mut f64,
) -> PlStatus {
    guard(|| put(out, obj(report, "report")?.0.chi2_per_dof, "out"))
}

/// The full report as JSON. Release the string with [`pl_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_report_json(
    report: *const PlFitReport,
    out: *mut *mut c_char,
) -> PlStatus {
    guard(|| {
        let text = obj(report, "report")?.0.to_json();
        let s = CString::new(text).map_err(|e| Fail(PlStatus::Panic, e.to_string()))?;
        put(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `report` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn pl_fit_report_free(report: *mut PlFitReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

fn measured(e: PlEstimate) -> Measured {
    Measured::new(e.value, e.error)
}

/// Collection efficiency relative to a reference emitter of known efficiency.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_eta_relative(
    c_sat: PlEstimate,
    c_sat_reference: PlEstimate,
    eta_reference: PlEstimate,
    out: *mut PlEstimate,
) -> PlStatus {
    guard(|| {
        let e = eta_relative(
            measured(c_sat),
            measured(c_sat_reference),
            measured(eta_reference),
            Propagation::Linear,
        )?;
        put(
            out,
            PlEstimate {
                value: e.eta.value,
                error: e.eta.error,
            },
            "out",
        )
    })
}

/// Collection efficiency from the saturated count rate (s⁻¹), setup
/// transmission, repetition rate (s⁻¹) and the product of mixing and
/// preparation efficiency.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_eta_absolute(
    c_sat: PlEstimate,
    eta_setup: PlEstimate,
    rep_rate: f64,
    alpha_eps: PlEstimate,
    out: *mut PlEstimate,
) -> PlStatus {
    guard(|| {
        let e = eta_absolute(
            measured(c_sat),
            measured(eta_setup),
            rep_rate,
            measured(alpha_eps),
            Propagation::Linear,
        )?;
        put(
            out,
            PlEstimate {
                value: e.eta.value,
                error: e.eta.error,
            },
            "out",
        )
    })
}
