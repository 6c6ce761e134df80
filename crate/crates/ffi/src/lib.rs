//! C ABI for `glmbands`.
//!
//! Objects are exposed as opaque handles created by `gb_*` constructors and
//! released with the matching `gb_*_free`. Every fallible function returns a
//! [`GbStatus`]; on failure a message is available from
//! [`gb_last_error_message`] on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use glmbands::bands::{band_cone, build_band, BandCurve, BandSide, BandSpec, Interval};
use glmbands::critical::{coverage, solve_critical, CoverageQuery, Method, Side};
use glmbands::data::{bundled_lavelle_dataset, parse_dataset, Dataset, Schema};
use glmbands::error::{Error, ErrorKind};
use glmbands::glm::{fit, Coefficients, FitConfig, Link, ModelFit};
use glmbands::montecarlo::{simulate_coverage, Design, Generator, IntervalKind, SimConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InputError = 3,
    FitError = 4,
    GeometryError = 5,
    SolverError = 6,
    SimulationError = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbLink {
    Logit = 0,
    Probit = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbSchema {
    Binomial = 0,
    Bernoulli = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbSide {
    TwoSided = 0,
    Upper = 1,
    Lower = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbIntervalKind {
    Narrow = 0,
    Wide = 1,
    Unrestricted = 2,
    /// Uses the `a` and `b` fields of [`GbSimConfig`].
    Explicit = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbDesign {
    Equal = 0,
    EndpointConcentrated = 1,
    CenterConcentrated = 2,
}

/// One grid point of a band. Absent bounds (one-sided bands) are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbBandRow {
    pub x: f64,
    pub center_linear: f64,
    pub se: f64,
    pub fitted_p: f64,
    pub lower_p: f64,
    pub upper_p: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbSimConfig {
    pub beta0: f64,
    pub beta1: f64,
    pub link: GbLink,
    pub interval_kind: GbIntervalKind,
    pub a: f64,
    pub b: f64,
    pub design: GbDesign,
    pub n: usize,
    pub replications: usize,
    pub alpha: f64,
    /// `Lower` is treated as one-sided.
    pub side: GbSide,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GbSimResult {
    pub estimated_error: f64,
    pub std_error: f64,
    pub replications_used: usize,
    pub fit_failures: usize,
    pub a: f64,
    pub b: f64,
}

/// Opaque dataset handle.
pub struct GbDataset(Dataset);

/// Opaque fitted-model handle.
pub struct GbFit(ModelFit);

/// Opaque band handle.
pub struct GbBand(BandCurve);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> GbStatus {
    match err.kind() {
        ErrorKind::Input => GbStatus::InputError,
        ErrorKind::Fit => GbStatus::FitError,
        ErrorKind::Geometry => GbStatus::GeometryError,
        ErrorKind::Solver => GbStatus::SolverError,
        ErrorKind::Simulation => GbStatus::SimulationError,
    }
}

fn fail(status: GbStatus, msg: &str) -> GbStatus {
    set_last_error(msg);
    status
}

fn guard<F: FnOnce() -> Result<(), GbStatus>>(f: F) -> GbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            GbStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(GbStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: glmbands::Result<T>) -> Result<T, GbStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn null(what: &str) -> GbStatus {
    fail(GbStatus::NullPointer, &format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, GbStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, GbStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

impl From<GbLink> for Link {
    fn from(l: GbLink) -> Self {
        match l {
            GbLink::Logit => Link::Logit,
            GbLink::Probit => Link::Probit,
        }
    }
}

impl From<GbSide> for BandSide {
    fn from(s: GbSide) -> Self {
        match s {
            GbSide::TwoSided => BandSide::TwoSided,
            GbSide::Upper => BandSide::Upper,
            GbSide::Lower => BandSide::Lower,
        }
    }
}

fn interval_from(a: f64, b: f64) -> Result<Interval, GbStatus> {
    if a.is_infinite() && b.is_infinite() && a < b {
        Ok(Interval::Unrestricted)
    } else {
        lift(Interval::bounded(a, b))
    }
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next `gb_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses CSV text (`x,successes,trials` or `x,y`).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_dataset_parse(
    text: *const c_char,
    schema: GbSchema,
    out_ds: *mut *mut GbDataset,
) -> GbStatus {
    guard(|| {
        let slot = out(out_ds, "out")?;
        *slot = ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let text =
            CStr::from_ptr(text).to_str().map_err(|_| fail(GbStatus::InvalidArgument, "text is not valid UTF-8"))?;
        let schema = match schema {
            GbSchema::Binomial => Schema::Binomial,
            GbSchema::Bernoulli => Schema::Bernoulli,
        };
        let ds = lift(parse_dataset(text, schema))?;
        *slot = Box::into_raw(Box::new(GbDataset(ds)));
        Ok(())
    })
}

/// The bundled six-dose mutagenicity dataset.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_dataset_lavelle(out_ds: *mut *mut GbDataset) -> GbStatus {
    guard(|| {
        let slot = out(out_ds, "out")?;
        *slot = Box::into_raw(Box::new(GbDataset(bundled_lavelle_dataset())));
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gb_dataset_len(ds: *const GbDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gb_dataset_free(ds: *mut GbDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits the model with default settings.
///
/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_fit(ds: *const GbDataset, link: GbLink, out_fit: *mut *mut GbFit) -> GbStatus {
    guard(|| {
        let slot = out(out_fit, "out")?;
        *slot = ptr::null_mut();
        let ds = deref(ds, "dataset")?;
        let f = lift(fit(link.into(), &ds.0, &FitConfig::default()))?;
        *slot = Box::into_raw(Box::new(GbFit(f)));
        Ok(())
    })
}

/// Writes `(beta0, beta1)` to `out[0..2]`.
///
/// # Safety
/// `f` must be a live handle; `out` must hold two doubles.
#[no_mangle]
pub unsafe extern "C" fn gb_fit_coefficients(f: *const GbFit, out_beta: *mut f64) -> GbStatus {
    guard(|| {
        let f = deref(f, "fit")?;
        if out_beta.is_null() {
            return Err(null("out"));
        }
        let b = f.0.beta_hat.as_array();
        ptr::copy_nonoverlapping(b.as_ptr(), out_beta, 2);
        Ok(())
    })
}

/// Writes the inverse information matrix row-major to `out[0..4]`.
///
/// # Safety
/// `f` must be a live handle; `out` must hold four doubles.
#[no_mangle]
pub unsafe extern "C" fn gb_fit_info_inv(f: *const GbFit, out_m: *mut f64) -> GbStatus {
    guard(|| {
        let f = deref(f, "fit")?;
        if out_m.is_null() {
            return Err(null("out"));
        }
        let m = f.0.info_inv.0;
        let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
        ptr::copy_nonoverlapping(flat.as_ptr(), out_m, 4);
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gb_fit_free(f: *mut GbFit) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Cone angle of the interval `(a, b)`; pass `-INFINITY, INFINITY` for the
/// whole line.
///
/// # Safety
/// `f` must be a live handle; `out_phi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_cone_angle(f: *const GbFit, a: f64, b: f64, out_phi: *mut f64) -> GbStatus {
    guard(|| {
        let f = deref(f, "fit")?;
        let slot = out(out_phi, "out")?;
        let cone = lift(band_cone(&f.0, interval_from(a, b)?))?;
        *slot = cone.phi;
        Ok(())
    })
}

/// Critical value for cone angle `phi` at simultaneous level `level`.
///
/// # Safety
/// `out_w` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_critical_value(phi: f64, level: f64, side: GbSide, out_w: *mut f64) -> GbStatus {
    guard(|| {
        let slot = out(out_w, "out")?;
        let side = BandSide::from(side).critical_side();
        let cv = lift(solve_critical(&CoverageQuery::new(phi, level, side)))?;
        *slot = cv.w;
        Ok(())
    })
}

/// Simultaneous coverage probability at critical value `w`.
///
/// # Safety
/// `out_p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_coverage(w: f64, phi: f64, side: GbSide, out_p: *mut f64) -> GbStatus {
    guard(|| {
        let slot = out(out_p, "out")?;
        if !(w >= 0.0 && phi > 0.0 && phi.is_finite()) {
            return Err(fail(GbStatus::InvalidArgument, "need w >= 0 and finite phi > 0"));
        }
        let side = BandSide::from(side).critical_side();
        let method = match side {
            Side::TwoSided => Method::Supremum,
            Side::OneSided => Method::Region,
        };
        *slot = coverage(side, method, w, phi.min(std::f64::consts::PI)).value;
        Ok(())
    })
}

/// Builds a band on `grid` points. For the whole line (`a = -INFINITY`,
/// `b = INFINITY`) the grid spans `[plot_lo, plot_hi]`; otherwise the
/// plot range is ignored.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gb_band_build(
    f: *const GbFit,
    a: f64,
    b: f64,
    side: GbSide,
    level: f64,
    grid: usize,
    plot_lo: f64,
    plot_hi: f64,
    out_band: *mut *mut GbBand,
) -> GbStatus {
    guard(|| {
        let slot = out(out_band, "out")?;
        *slot = ptr::null_mut();
        let f = deref(f, "fit")?;
        let interval = interval_from(a, b)?;
        let mut spec = BandSpec::new(interval, side.into(), level, f.0.link);
        if interval == Interval::Unrestricted {
            spec = spec.with_plot_range(plot_lo, plot_hi);
        }
        let band = lift(build_band(&f.0, &spec, grid))?;
        *slot = Box::into_raw(Box::new(GbBand(band)));
        Ok(())
    })
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `band` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gb_band_len(band: *const GbBand) -> usize {
    band.as_ref().map_or(0, |b| b.0.len())
}

/// Critical value used by the band, or NaN for a null handle.
///
/// # Safety
/// `band` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gb_band_critical_value(band: *const GbBand) -> f64 {
    band.as_ref().map_or(f64::NAN, |b| b.0.w)
}

/// # Safety
/// `band` must be a live handle; `out_row` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_band_row(band: *const GbBand, index: usize, out_row: *mut GbBandRow) -> GbStatus {
    guard(|| {
        let band = &deref(band, "band")?.0;
        let slot = out(out_row, "out")?;
        if index >= band.len() {
            return Err(fail(
                GbStatus::InvalidArgument,
                &format!("row {index} out of range for a band of {} points", band.len()),
            ));
        }
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map_or(f64::NAN, |v| v[index]);
        *slot = GbBandRow {
            x: band.x[index],
            center_linear: band.center_linear[index],
            se: band.se[index],
            fitted_p: band.fitted_p[index],
            lower_p: pick(&band.lower_p),
            upper_p: pick(&band.upper_p),
        };
        Ok(())
    })
}

/// # Safety
/// `band` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gb_band_free(band: *mut GbBand) {
    if !band.is_null() {
        drop(Box::from_raw(band));
    }
}

/// Monte Carlo coverage-error estimate. Deterministic for a given seed.
///
/// # Safety
/// `config` must point to a valid configuration; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gb_simulate(config: *const GbSimConfig, out_res: *mut GbSimResult) -> GbStatus {
    guard(|| {
        let c = *deref(config, "config")?;
        let slot = out(out_res, "out")?;
        let cfg = SimConfig {
            beta_true: Coefficients::new(c.beta0, c.beta1),
            link: c.link.into(),
            interval_kind: match c.interval_kind {
                GbIntervalKind::Narrow => IntervalKind::Narrow,
                GbIntervalKind::Wide => IntervalKind::Wide,
                GbIntervalKind::Unrestricted => IntervalKind::Unrestricted,
                GbIntervalKind::Explicit => IntervalKind::Explicit { a: c.a, b: c.b },
            },
            design: match c.design {
                GbDesign::Equal => Design::Equal,
                GbDesign::EndpointConcentrated => Design::EndpointConcentrated,
                GbDesign::CenterConcentrated => Design::CenterConcentrated,
            },
            n: c.n,
            replications: c.replications,
            alpha: c.alpha,
            side: BandSide::from(c.side).critical_side(),
            seed: c.seed,
            generator: Generator::Model,
        };
        let r = lift(simulate_coverage(&cfg))?;
        *slot = GbSimResult {
            estimated_error: r.estimated_error,
            std_error: r.std_error,
            replications_used: r.replications_used,
            fit_failures: r.fit_failures,
            a: r.a,
            b: r.b,
        };
        Ok(())
    })
}
