//! C ABI over the `psdda` crate.
//!
//! Every fallible function returns a [`PsddaStatus`]. On failure the message is
//! kept per thread and can be read with [`psdda_last_error`]. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ndarray::ArrayView1;
use psdda::harness::experiment::{run_experiment, write_table, ExperimentOutput};
use psdda::harness::{Experiment, Preset, RunConfig};
use psdda::{project_l1_ball, proximal_projection, ConvergenceConstants, DelayedNetwork, Error, FeasibleSet};

/// Result codes shared by every function in the API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsddaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or a string was not valid UTF-8.
    InvalidArgument = 2,
    /// The configuration or problem instance failed validation.
    Validation = 3,
    /// The iteration failed while running.
    Runtime = 4,
    /// Reading or writing a file failed.
    Io = 5,
    /// A caller-provided buffer is smaller than required.
    BufferTooSmall = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

/// Convergence constants for a network with `nodes` nodes, window `window`
/// and maximum delay `tau_max`. Values that leave the `f64` range are `inf`
/// or `0`; the `ln_` fields stay finite.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PsddaConstants {
    pub omega: u64,
    pub c: f64,
    pub ln_c: f64,
    pub lambda: f64,
    pub one_minus_lambda: f64,
    pub ln_one_minus_lambda: f64,
    pub delta_lb: f64,
    pub ln_delta_lb: f64,
    pub gamma: f64,
    pub ln_gamma: f64,
}

/// One row of the per-node metrics table. `node` is 1-based.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PsddaRecord {
    pub t: u64,
    pub node: u64,
    pub f_err: f64,
    pub consensus_err: f64,
    pub alpha: f64,
    pub bound: f64,
}

/// Opaque validated problem instance.
pub struct PsddaExperiment(Experiment);

/// Opaque result of a run.
pub struct PsddaRun(ExperimentOutput);

/// Opaque delay-augmented network.
pub struct PsddaNetwork(DelayedNetwork);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(PsddaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => PsddaStatus::Io,
            e if e.is_validation() => PsddaStatus::Validation,
            _ => PsddaStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PsddaStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(PsddaStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PsddaStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsddaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PsddaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

fn finite_radius(radius: f64) -> Result<(), Failure> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("radius must be positive and finite, got {radius}")))
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next API call on the same thread.
#[no_mangle]
pub extern "C" fn psdda_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn psdda_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `out` with the convergence constants for `(nodes, window, tau_max)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `PsddaConstants`.
#[no_mangle]
pub unsafe extern "C" fn psdda_constants(
    nodes: usize,
    window: usize,
    tau_max: usize,
    out: *mut PsddaConstants,
) -> PsddaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let c = ConvergenceConstants::new(nodes, window, tau_max)?;
        *out = PsddaConstants {
            omega: c.omega,
            c: c.c,
            ln_c: c.ln_c,
            lambda: c.lambda,
            one_minus_lambda: c.one_minus_lambda,
            ln_one_minus_lambda: c.ln_one_minus_lambda,
            delta_lb: c.delta_lb,
            ln_delta_lb: c.ln_delta_lb,
            gamma: c.gamma,
            ln_gamma: c.ln_gamma,
        };
        Ok(())
    })
}

/// Euclidean projection of `v[0..len]` onto the l1 ball of `radius`, written to `out`.
/// `v` and `out` may alias.
///
/// # Safety
/// `v` and `out` must each be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn psdda_project_l1(v: *const f64, len: usize, radius: f64, out: *mut f64) -> PsddaStatus {
    guard(|| {
        finite_radius(radius)?;
        let p = project_l1_ball(ArrayView1::from(slice_arg(v, len, "v")?), radius);
        out_slice(out, len, "out")?.copy_from_slice(p.as_slice().expect("contiguous"));
        Ok(())
    })
}

/// Primal recovery step: the minimizer of `<z, x> + |x|^2 / (2 alpha)` over the
/// l1 ball of `radius`, written to `out`. `z` and `out` may alias.
///
/// # Safety
/// `z` and `out` must each be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn psdda_proximal_step(
    z: *const f64,
    len: usize,
    alpha: f64,
    radius: f64,
    out: *mut f64,
) -> PsddaStatus {
    guard(|| {
        finite_radius(radius)?;
        let set = FeasibleSet::l1_ball(radius)?;
        let p = proximal_projection(ArrayView1::from(slice_arg(z, len, "z")?), alpha, &set)?;
        out_slice(out, len, "out")?.copy_from_slice(p.as_slice().expect("contiguous"));
        Ok(())
    })
}

fn publish<T>(value: T, out: *mut *mut T) {
    // SAFETY: checked non-null by the caller
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Builds an experiment from a preset name (`example1`, `quad8`, `sensor8`).
/// `seed` and `iterations` override the preset when non-zero.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_experiment_from_preset(
    preset: *const c_char,
    seed: u64,
    iterations: usize,
    out: *mut *mut PsddaExperiment,
) -> PsddaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let preset: Preset = str_arg(preset, "preset")?.parse()?;
        let mut cfg = RunConfig::preset(preset);
        if seed != 0 {
            cfg.seed = Some(seed);
        }
        if iterations != 0 {
            cfg.iterations = Some(iterations);
        }
        publish(PsddaExperiment(cfg.resolve()?), out);
        Ok(())
    })
}

/// Builds an experiment from a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_experiment_from_toml(
    toml: *const c_char,
    out: *mut *mut PsddaExperiment,
) -> PsddaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = RunConfig::from_toml_str(str_arg(toml, "toml")?)?;
        if cfg.preset.is_none() && cfg.graph.schedule.is_none() {
            return Err(Failure::from(Error::Config(
                "configuration needs a preset or a graph schedule".into(),
            )));
        }
        publish(PsddaExperiment(cfg.resolve()?), out);
        Ok(())
    })
}

/// Releases an experiment. Null is ignored.
///
/// # Safety
/// `exp` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn psdda_experiment_free(exp: *mut PsddaExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Runs the experiment to completion.
///
/// # Safety
/// `exp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_experiment_run(exp: *const PsddaExperiment, out: *mut *mut PsddaRun) -> PsddaStatus {
    guard(|| {
        let exp = handle(exp, "exp")?;
        if out.is_null() {
            return Err(null("out"));
        }
        publish(PsddaRun(run_experiment(&exp.0)?), out);
        Ok(())
    })
}

/// Copies the experiment's delay-augmented network into a new handle.
///
/// # Safety
/// `exp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_experiment_network(
    exp: *const PsddaExperiment,
    out: *mut *mut PsddaNetwork,
) -> PsddaStatus {
    guard(|| {
        let exp = handle(exp, "exp")?;
        if out.is_null() {
            return Err(null("out"));
        }
        publish(PsddaNetwork(exp.0.network.clone()), out);
        Ok(())
    })
}

/// Releases a run. Null is ignored.
///
/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn psdda_run_free(run: *mut PsddaRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of metric rows recorded by the run.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_run_record_count(run: *const PsddaRun, out: *mut usize) -> PsddaStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(run, "run")?.0.table.records.len();
        Ok(())
    })
}

/// Copies the metric rows into `buf`, which holds `capacity` records.
/// Fails with `BufferTooSmall` when `capacity` is below the record count.
///
/// # Safety
/// `run` must be a live handle; `buf` must be valid for `capacity` records.
#[no_mangle]
pub unsafe extern "C" fn psdda_run_records(
    run: *const PsddaRun,
    buf: *mut PsddaRecord,
    capacity: usize,
) -> PsddaStatus {
    guard(|| {
        let records = &handle(run, "run")?.0.table.records;
        if capacity < records.len() {
            return Err(Failure(
                PsddaStatus::BufferTooSmall,
                format!("need {} records, got room for {capacity}", records.len()),
            ));
        }
        let buf = out_slice(buf, records.len(), "buf")?;
        for (slot, r) in buf.iter_mut().zip(records) {
            *slot = PsddaRecord {
                t: r.t as u64,
                node: r.node as u64,
                f_err: r.f_err,
                consensus_err: r.consensus_err,
                alpha: r.alpha,
                bound: r.bound,
            };
        }
        Ok(())
    })
}

/// Largest `f(x_i) - f*` across nodes at the final iteration.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_run_final_max_f_err(run: *const PsddaRun, out: *mut f64) -> PsddaStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(run, "run")?.0.table.summary.final_max_f_err;
        Ok(())
    })
}

/// Writes the metrics table, with its summary comment block, as CSV to `path`.
///
/// # Safety
/// `run` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn psdda_run_write_csv(run: *const PsddaRun, path: *const c_char) -> PsddaStatus {
    guard(|| {
        let run = handle(run, "run")?;
        write_table(&run.0.table, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn psdda_network_free(net: *mut PsddaNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Node count, augmented dimension and schedule period. Any output may be null.
///
/// # Safety
/// `net` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn psdda_network_shape(
    net: *const PsddaNetwork,
    nodes: *mut usize,
    dim: *mut usize,
    period: *mut usize,
) -> PsddaStatus {
    guard(|| {
        let net = &handle(net, "net")?.0;
        for (p, v) in [(nodes, net.nodes()), (dim, net.dim()), (period, net.graph().period())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

unsafe fn export(net: *const PsddaNetwork, buf: *mut f64, len: usize, augmented: bool, t: usize) -> PsddaStatus {
    guard(|| {
        let net = &handle(net, "net")?.0;
        let m = if augmented { net.q_at(t) } else { net.p_at(t) };
        let view = m.view();
        let need = view.len();
        if len < need {
            return Err(Failure(
                PsddaStatus::BufferTooSmall,
                format!("need {need} doubles, got room for {len}"),
            ));
        }
        for (slot, v) in out_slice(buf, need, "buf")?.iter_mut().zip(view.iter()) {
            *slot = *v;
        }
        Ok(())
    })
}

/// Writes the augmented matrix in effect at 0-based step `t`, row-major,
/// `dim * dim` doubles.
///
/// # Safety
/// `net` must be a live handle; `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn psdda_network_q(net: *const PsddaNetwork, t: usize, buf: *mut f64, len: usize) -> PsddaStatus {
    export(net, buf, len, true, t)
}

/// Writes the undelayed weight matrix at 0-based step `t`, row-major,
/// `nodes * nodes` doubles.
///
/// # Safety
/// `net` must be a live handle; `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn psdda_network_p(net: *const PsddaNetwork, t: usize, buf: *mut f64, len: usize) -> PsddaStatus {
    export(net, buf, len, false, t)
}
