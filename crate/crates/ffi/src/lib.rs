//! C ABI for the hankelops library: opaque handles for grids, transform
//! plans and multiplier symbols, flat-array function application, and
//! pointwise kernel evaluation. All functions return an error code; the
//! last error message is kept in thread-local storage.

use hankelops::grid::{Axis, GridFunction, Order, WeightedGrid};
use hankelops::hankel::TransformPlan;
use hankelops::multiplier::{self, LaplaceSymbol};
use hankelops::semigroup::{self, HeatKernelParams};
use hankelops::Error;
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::CStr;
use std::os::raw::{c_char, c_int};
use std::sync::Arc;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HankelopsStatus {
    Ok = 0,
    InvalidParameter = 1,
    GridMismatch = 2,
    NonConvergent = 3,
    Singular = 4,
    InvalidInput = 5,
    NullPointer = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
}

fn status_of(err: &Error) -> HankelopsStatus {
    match err {
        Error::InvalidParameter(_) => HankelopsStatus::InvalidParameter,
        Error::GridMismatch(_) => HankelopsStatus::GridMismatch,
        Error::NonConvergent(_) => HankelopsStatus::NonConvergent,
        Error::Singular(_) => HankelopsStatus::Singular,
        Error::Input(_) => HankelopsStatus::InvalidInput,
    }
}

fn fail(err: Error) -> HankelopsStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null_fail(what: &str) -> HankelopsStatus {
    set_error(&format!("null pointer: {what}"));
    HankelopsStatus::NullPointer
}

/// Opaque weighted-grid handle.
pub struct HankelopsGrid {
    grid: Arc<WeightedGrid>,
}

/// Opaque transform-plan handle.
pub struct HankelopsPlan {
    plan: TransformPlan,
}

/// Opaque multiplier-symbol handle.
pub struct HankelopsSymbol {
    symbol: LaplaceSymbol,
}

/// Copy the last error message (UTF-8, NUL-terminated) into `buf`; returns
/// the full message length in bytes, excluding the terminator.
#[no_mangle]
pub extern "C" fn hankelops_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Build a weighted grid with geometric axes `[lowers[j], uppers[j]]`, one
/// order exponent per axis, and `per_panel` quadrature nodes per panel.
///
/// # Safety
/// `lambdas`, `lowers` and `uppers` must point to `dim` readable doubles and
/// `out` to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn hankelops_grid_new(
    lambdas: *const f64,
    lowers: *const f64,
    uppers: *const f64,
    dim: usize,
    per_panel: usize,
    origin_strip: c_int,
    out: *mut *mut HankelopsGrid,
) -> HankelopsStatus {
    if lambdas.is_null() || lowers.is_null() || uppers.is_null() || out.is_null() {
        return null_fail("hankelops_grid_new argument");
    }
    if dim == 0 {
        set_error("dimension must be positive");
        return HankelopsStatus::InvalidParameter;
    }
    let lambdas = std::slice::from_raw_parts(lambdas, dim).to_vec();
    let lowers = std::slice::from_raw_parts(lowers, dim);
    let uppers = std::slice::from_raw_parts(uppers, dim);
    let build = || -> hankelops::Result<Arc<WeightedGrid>> {
        let order = Order::new(lambdas.clone())?;
        let axes: Vec<Axis> = lowers
            .iter()
            .zip(uppers)
            .map(|(&a, &b)| Axis::geometric_uniform(a, b, per_panel))
            .collect::<hankelops::Result<_>>()?;
        if origin_strip != 0 {
            WeightedGrid::new_with_origin(axes, order)
        } else {
            WeightedGrid::new(axes, order)
        }
    };
    match build() {
        Ok(grid) => {
            *out = Box::into_raw(Box::new(HankelopsGrid { grid }));
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Free a grid handle (accepts NULL).
///
/// # Safety
/// `grid` must be NULL or a pointer returned by `hankelops_grid_new` that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hankelops_grid_free(grid: *mut HankelopsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Total number of grid nodes (the flat array length for functions).
///
/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_grid_node_count(
    grid: *const HankelopsGrid,
    out: *mut usize,
) -> HankelopsStatus {
    if grid.is_null() || out.is_null() {
        return null_fail("hankelops_grid_node_count argument");
    }
    *out = (*grid).grid.node_count();
    HankelopsStatus::Ok
}

/// Write the coordinates of flat node `index` into `out` (dim doubles).
///
/// # Safety
/// `grid` must be a live grid handle; `out` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn hankelops_grid_node(
    grid: *const HankelopsGrid,
    index: usize,
    out: *mut f64,
) -> HankelopsStatus {
    if grid.is_null() || out.is_null() {
        return null_fail("hankelops_grid_node argument");
    }
    let g = &(*grid).grid;
    if index >= g.node_count() {
        set_error("node index out of range");
        return HankelopsStatus::InvalidParameter;
    }
    let node = g.node(index);
    std::ptr::copy_nonoverlapping(node.as_ptr(), out, node.len());
    HankelopsStatus::Ok
}

/// The quadrature weight (including the measure density) of flat node
/// `index`, so callers can form weighted norms and integrals.
///
/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_grid_measure_weight(
    grid: *const HankelopsGrid,
    index: usize,
    out: *mut f64,
) -> HankelopsStatus {
    if grid.is_null() || out.is_null() {
        return null_fail("hankelops_grid_measure_weight argument");
    }
    let g = &(*grid).grid;
    if index >= g.node_count() {
        set_error("node index out of range");
        return HankelopsStatus::InvalidParameter;
    }
    *out = g.measure_weight(index);
    HankelopsStatus::Ok
}

/// Build a transform plan for `grid`.
///
/// # Safety
/// `grid` must be a live grid handle and `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn hankelops_plan_new(
    grid: *const HankelopsGrid,
    out: *mut *mut HankelopsPlan,
) -> HankelopsStatus {
    if grid.is_null() || out.is_null() {
        return null_fail("hankelops_plan_new argument");
    }
    match TransformPlan::new(&(*grid).grid) {
        Ok(plan) => {
            *out = Box::into_raw(Box::new(HankelopsPlan { plan }));
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Free a plan handle (accepts NULL).
///
/// # Safety
/// `plan` must be NULL or a live plan handle.
#[no_mangle]
pub unsafe extern "C" fn hankelops_plan_free(plan: *mut HankelopsPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Create a symbol from a preset string such as `"identity"`,
/// `"imaginary-power:1.0"`, `"resolvent:2.0"`, `"indicator:0.5"` or
/// `"custom:exp(-t)*cos(t)"`.
///
/// # Safety
/// `preset` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_symbol_new(
    preset: *const c_char,
    out: *mut *mut HankelopsSymbol,
) -> HankelopsStatus {
    if preset.is_null() || out.is_null() {
        return null_fail("hankelops_symbol_new argument");
    }
    let text = match CStr::from_ptr(preset).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("preset is not valid UTF-8");
            return HankelopsStatus::InvalidInput;
        }
    };
    match LaplaceSymbol::from_preset(text) {
        Ok(symbol) => {
            *out = Box::into_raw(Box::new(HankelopsSymbol { symbol }));
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Free a symbol handle (accepts NULL).
///
/// # Safety
/// `symbol` must be NULL or a live symbol handle.
#[no_mangle]
pub unsafe extern "C" fn hankelops_symbol_free(symbol: *mut HankelopsSymbol) {
    if !symbol.is_null() {
        drop(Box::from_raw(symbol));
    }
}

unsafe fn function_from_raw(
    grid: &Arc<WeightedGrid>,
    re: *const f64,
    im: *const f64,
) -> hankelops::Result<GridFunction> {
    let n = grid.node_count();
    let re = std::slice::from_raw_parts(re, n);
    let values: Vec<Complex64> = if im.is_null() {
        re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    } else {
        let im = std::slice::from_raw_parts(im, n);
        re.iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    };
    GridFunction::from_values(grid.clone(), values)
}

unsafe fn function_to_raw(f: &GridFunction, out_re: *mut f64, out_im: *mut f64) {
    for (k, v) in f.values().iter().enumerate() {
        *out_re.add(k) = v.re;
        if !out_im.is_null() {
            *out_im.add(k) = v.im;
        }
    }
}

/// Apply the Hankel transform to a function given as flat node arrays.
/// `im` may be NULL for real input; `out_im` may be NULL to drop the
/// imaginary part.
///
/// # Safety
/// `plan` must be a live plan handle; `re`, `im`, `out_re`, `out_im` must
/// be NULL or arrays of `node_count` doubles.
#[no_mangle]
pub unsafe extern "C" fn hankelops_transform_apply(
    plan: *const HankelopsPlan,
    re: *const f64,
    im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HankelopsStatus {
    if plan.is_null() || re.is_null() || out_re.is_null() {
        return null_fail("hankelops_transform_apply argument");
    }
    let plan = &(*plan).plan;
    let f = match function_from_raw(plan.grid(), re, im) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    match plan.apply(&f) {
        Ok(hf) => {
            function_to_raw(&hf, out_re, out_im);
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Apply the spectral-path multiplier operator for `symbol`.
///
/// # Safety
/// As for `hankelops_transform_apply`, plus a live symbol handle.
#[no_mangle]
pub unsafe extern "C" fn hankelops_spectral_apply(
    symbol: *const HankelopsSymbol,
    plan: *const HankelopsPlan,
    re: *const f64,
    im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HankelopsStatus {
    if symbol.is_null() || plan.is_null() || re.is_null() || out_re.is_null() {
        return null_fail("hankelops_spectral_apply argument");
    }
    let plan = &(*plan).plan;
    let f = match function_from_raw(plan.grid(), re, im) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    match multiplier::spectral_apply(&(*symbol).symbol, plan, &f) {
        Ok(tf) => {
            function_to_raw(&tf, out_re, out_im);
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluate the n-dimensional heat kernel W_t(x, y).
///
/// # Safety
/// `lambdas`, `x`, `y` must point to `dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_heat_kernel(
    lambdas: *const f64,
    dim: usize,
    t: f64,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> HankelopsStatus {
    if lambdas.is_null() || x.is_null() || y.is_null() || out.is_null() {
        return null_fail("hankelops_heat_kernel argument");
    }
    let lam = std::slice::from_raw_parts(lambdas, dim).to_vec();
    let x = std::slice::from_raw_parts(x, dim);
    let y = std::slice::from_raw_parts(y, dim);
    let run = || -> hankelops::Result<f64> {
        let params = HeatKernelParams::new(Order::new(lam.clone())?, t)?;
        semigroup::heat_kernel(&params, x, y)
    };
    match run() {
        Ok(v) => {
            *out = v;
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluate the time derivative of the n-dimensional heat kernel.
///
/// # Safety
/// As for `hankelops_heat_kernel`.
#[no_mangle]
pub unsafe extern "C" fn hankelops_dt_heat_kernel(
    lambdas: *const f64,
    dim: usize,
    t: f64,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> HankelopsStatus {
    if lambdas.is_null() || x.is_null() || y.is_null() || out.is_null() {
        return null_fail("hankelops_dt_heat_kernel argument");
    }
    let lam = std::slice::from_raw_parts(lambdas, dim).to_vec();
    let x = std::slice::from_raw_parts(x, dim);
    let y = std::slice::from_raw_parts(y, dim);
    let run = || -> hankelops::Result<f64> {
        let params = HeatKernelParams::new(Order::new(lam.clone())?, t)?;
        semigroup::dt_heat_kernel(&params, x, y)
    };
    match run() {
        Ok(v) => {
            *out = v;
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluate the off-diagonal multiplier kernel K(x, y); returns
/// `Singular` when x == y.
///
/// # Safety
/// `lambdas`, `x`, `y` must point to `dim` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_kernel_k(
    symbol: *const HankelopsSymbol,
    lambdas: *const f64,
    dim: usize,
    x: *const f64,
    y: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HankelopsStatus {
    if symbol.is_null() || lambdas.is_null() || x.is_null() || y.is_null() || out_re.is_null() {
        return null_fail("hankelops_kernel_k argument");
    }
    let lam = std::slice::from_raw_parts(lambdas, dim).to_vec();
    let x = std::slice::from_raw_parts(x, dim);
    let y = std::slice::from_raw_parts(y, dim);
    let run = || -> hankelops::Result<Complex64> {
        let order = Order::new(lam.clone())?;
        multiplier::kernel_k(&(*symbol).symbol, &order, x, y)
    };
    match run() {
        Ok(v) => {
            *out_re = v.re;
            if !out_im.is_null() {
                *out_im = v.im;
            }
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluate the Euclidean comparison kernel H(x, y); returns `Singular`
/// when x == y.
///
/// # Safety
/// `x`, `y` must point to `dim` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_kernel_h(
    symbol: *const HankelopsSymbol,
    dim: usize,
    x: *const f64,
    y: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> HankelopsStatus {
    if symbol.is_null() || x.is_null() || y.is_null() || out_re.is_null() {
        return null_fail("hankelops_kernel_h argument");
    }
    let x = std::slice::from_raw_parts(x, dim);
    let y = std::slice::from_raw_parts(y, dim);
    match multiplier::kernel_h(&(*symbol).symbol, x, y) {
        Ok(v) => {
            *out_re = v.re;
            if !out_im.is_null() {
                *out_im = v.im;
            }
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The principal-value normalization constant C for dimension `n` (equals
/// 1 for profiles with a unit right-limit at zero).
///
/// # Safety
/// `symbol` must be a live symbol handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hankelops_normalization_c(
    symbol: *const HankelopsSymbol,
    n: usize,
    out: *mut f64,
) -> HankelopsStatus {
    if symbol.is_null() || out.is_null() {
        return null_fail("hankelops_normalization_c argument");
    }
    match multiplier::normalization_c(&(*symbol).symbol, n) {
        Ok(v) => {
            *out = v;
            HankelopsStatus::Ok
        }
        Err(e) => fail(e),
    }
}
