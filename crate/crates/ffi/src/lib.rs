//! C ABI over `sensorimotor-core`.
//!
//! Objects are opaque handles created by `sm_*_new`/`sm_*_load`-style calls
//! and released with the matching `sm_*_free`. Every fallible call returns an
//! [`SmStatus`]; on failure [`sm_last_error`] describes the cause for the
//! calling thread. Output pointers are only written on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use sensorimotor_core::analysis;
use sensorimotor_core::env::{Scene, SetupKind};
use sensorimotor_core::exploration::{self, Dataset, ExplorationKind};
use sensorimotor_core::model::{PredictiveModel, TrainConfig, Trainer};
use sensorimotor_core::nn::{Activation, Matrix};
use sensorimotor_core::rng::{Rng, Stream};
use sensorimotor_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Version = 5,
    Domain = 6,
    Geometry = 7,
    Diverged = 8,
    Provenance = 9,
    Config = 10,
    Numerical = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmSetup {
    GridWorld = 0,
    ArmDistance = 1,
    ArmRgb = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmExploration {
    Mtm = 0,
    Mm = 1,
    Mmt = 2,
}

/// An environment placement.
pub struct SmScene(Scene);

/// A set of sensorimotor transitions.
pub struct SmDataset(Dataset);

/// A predictive model with its optimizer state and mini-batch stream.
pub struct SmTrainer(Trainer);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> SmStatus {
    match err {
        Error::Io(_) | Error::IoAt { .. } => SmStatus::Io,
        Error::Format { .. } | Error::Json(_) => SmStatus::Format,
        Error::Version { .. } => SmStatus::Version,
        Error::Domain(_) => SmStatus::Domain,
        Error::Geometry(_) | Error::SceneGeneration { .. } => SmStatus::Geometry,
        Error::Diverged { .. } => SmStatus::Diverged,
        Error::Provenance(_) => SmStatus::Provenance,
        Error::Config(_) | Error::Shape(_) => SmStatus::Config,
        Error::DegenerateChannel { .. }
        | Error::Underdetermined { .. }
        | Error::DegenerateCloud
        | Error::NotApplicable(_) => SmStatus::Numerical,
    }
}

enum Failure {
    Status(SmStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(SmStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(SmStatus::InvalidArgument, msg.into())
}

/// Runs `f`, turning errors and panics into a status and a thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

// Enum arguments arrive as plain integers so that out-of-range values from C
// are rejected instead of being undefined behaviour.
fn setup_kind(s: u32) -> Result<SetupKind, Failure> {
    match s {
        x if x == SmSetup::GridWorld as u32 => Ok(SetupKind::GridWorld),
        x if x == SmSetup::ArmDistance as u32 => Ok(SetupKind::ArmDistance),
        x if x == SmSetup::ArmRgb as u32 => Ok(SetupKind::ArmRgb),
        other => Err(invalid(format!("unknown setup {other}"))),
    }
}

fn exploration_kind(e: u32) -> Result<ExplorationKind, Failure> {
    match e {
        x if x == SmExploration::Mtm as u32 => Ok(ExplorationKind::Mtm),
        x if x == SmExploration::Mm as u32 => Ok(ExplorationKind::Mm),
        x if x == SmExploration::Mmt as u32 => Ok(ExplorationKind::Mmt),
        other => Err(invalid(format!("unknown exploration {other}"))),
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; empty when nothing has failed.
#[no_mangle]
pub extern "C" fn sm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Draws a random scene of the given setup (an `SmSetup` value) from `seed`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sm_scene_new(setup: u32, seed: u64, out: *mut *mut SmScene) -> SmStatus {
    guard(|| {
        let scene = Scene::random(setup_kind(setup)?, &mut Rng::stream(seed, Stream::Scene))?;
        put(out, SmScene(scene))
    })
}

/// # Safety
/// `scene` must be null or a handle from `sm_scene_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_scene_free(scene: *mut SmScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Number of sensory channels, or 0 for a null handle.
///
/// # Safety
/// `scene` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_scene_sensory_dim(scene: *const SmScene) -> usize {
    scene.as_ref().map_or(0, |s| s.0.sensory_dim())
}

/// Senses at motor state `m` (3 values). On success `*valid` tells whether
/// the configuration is possible; only then is `out` filled.
///
/// # Safety
/// `m` must point to 3 doubles, `out` to `out_len` doubles, `valid` to a bool.
#[no_mangle]
pub unsafe extern "C" fn sm_scene_sense(
    scene: *const SmScene,
    m: *const f64,
    out: *mut f64,
    out_len: usize,
    valid: *mut bool,
) -> SmStatus {
    guard(|| {
        let scene = borrow(scene, "scene")?;
        let m: [f64; 3] = slice(m, 3, "motor state")?.try_into().expect("length 3");
        let valid = borrow_mut(valid, "valid")?;
        if out_len != scene.0.sensory_dim() {
            return Err(invalid(format!("output holds {out_len} values, sensory dimension is {}", scene.0.sensory_dim())));
        }
        let out = slice_mut(out, out_len, "output")?;
        match scene.0.sense(&m)? {
            Some(s) => {
                out.copy_from_slice(&s);
                *valid = true;
            }
            None => *valid = false,
        }
        Ok(())
    })
}

/// Collects `n` valid transitions in `scene` under an exploration regime
/// (an `SmExploration` value).
///
/// # Safety
/// `scene` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_generate(
    scene: *const SmScene,
    exploration: u32,
    n: usize,
    seed: u64,
    out: *mut *mut SmDataset,
) -> SmStatus {
    guard(|| {
        let scene = borrow(scene, "scene")?;
        let mut rng = Rng::stream(seed, Stream::Exploration);
        let data = exploration::generate(&scene.0, exploration_kind(exploration)?, n, seed, &mut rng)?;
        put(out, SmDataset(data))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_load(path_: *const c_char, out: *mut *mut SmDataset) -> SmStatus {
    guard(|| {
        let data = Dataset::load(&path(path_)?)?;
        put(out, SmDataset(data))
    })
}

/// # Safety
/// `data` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_save(data: *const SmDataset, path_: *const c_char) -> SmStatus {
    guard(|| {
        let data = borrow(data, "dataset")?;
        data.0.save(&path(path_)?)?;
        Ok(())
    })
}

/// Writes a normalized copy of `data` to `out`; `data` is left untouched.
///
/// # Safety
/// `data` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_normalize(data: *const SmDataset, out: *mut *mut SmDataset) -> SmStatus {
    guard(|| {
        let data = borrow(data, "dataset")?;
        put(out, SmDataset(data.0.normalize()?))
    })
}

/// Number of transitions, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_len(data: *const SmDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

/// Copies transition `index` as `m_t, s_t, m_next, s_next` into `out`, which
/// must hold `2 * (3 + sensory_dim)` values.
///
/// # Safety
/// `data` must be a live handle and `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_transition(
    data: *const SmDataset,
    index: usize,
    out: *mut f64,
    out_len: usize,
) -> SmStatus {
    guard(|| {
        let data = borrow(data, "dataset")?;
        if index >= data.0.len() {
            return Err(invalid(format!("index {index} out of range for {} transitions", data.0.len())));
        }
        let t = data.0.transition(index);
        let flat: Vec<f64> = [t.m_t, t.s_t, t.m_next, t.s_next].concat();
        if out_len != flat.len() {
            return Err(invalid(format!("output holds {out_len} values, a transition has {}", flat.len())));
        }
        slice_mut(out, out_len, "output")?.copy_from_slice(&flat);
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_dataset_free(data: *mut SmDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Creates a SELU model for `data`'s dimensions with default training
/// settings, `max_epochs` and `seed`.
///
/// # Safety
/// `data` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_trainer_new(
    data: *const SmDataset,
    dim_h: usize,
    max_epochs: u64,
    seed: u64,
    out: *mut *mut SmTrainer,
) -> SmStatus {
    guard(|| {
        let data = borrow(data, "dataset")?;
        if dim_h == 0 {
            return Err(invalid("dim_h must be positive"));
        }
        let config = TrainConfig { max_epochs, decay_epochs: max_epochs.max(1), seed, eval_every: max_epochs.max(1), ..TrainConfig::default() };
        let mut init = Rng::stream(seed, Stream::Init);
        let model = PredictiveModel::new(data.0.motor_dim(), data.0.sensory_dim(), dim_h, Activation::Selu, &mut init)?;
        put(out, SmTrainer(Trainer::new(model, config)?))
    })
}

/// One mini-batch update on `data`; writes the batch loss to `loss`.
///
/// # Safety
/// Both handles must be live and `loss` writable.
#[no_mangle]
pub unsafe extern "C" fn sm_trainer_step(trainer: *mut SmTrainer, data: *const SmDataset, loss: *mut f64) -> SmStatus {
    guard(|| {
        let trainer = borrow_mut(trainer, "trainer")?;
        let data = borrow(data, "dataset")?;
        let loss = borrow_mut(loss, "loss")?;
        if data.0.motor_dim() != trainer.0.model.motor_dim() || data.0.sensory_dim() != trainer.0.model.sensory_dim() {
            return Err(invalid("dataset dimensions do not match the model"));
        }
        *loss = trainer.0.step(&data.0)?;
        Ok(())
    })
}

/// Epochs completed so far, or 0 for a null handle.
///
/// # Safety
/// `trainer` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sm_trainer_epoch(trainer: *const SmTrainer) -> u64 {
    trainer.as_ref().map_or(0, |t| t.0.epoch())
}

/// Encodes `rows` motor states (row-major, 3 per row) into `out`
/// (row-major, `dim_h` per row).
///
/// # Safety
/// `m` must point to `3 * rows` doubles and `out` to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sm_trainer_encode(
    trainer: *const SmTrainer,
    m: *const f64,
    rows: usize,
    out: *mut f64,
    out_len: usize,
) -> SmStatus {
    guard(|| {
        let trainer = borrow(trainer, "trainer")?;
        let model = &trainer.0.model;
        let input = Matrix::from_vec(rows, model.motor_dim(), slice(m, rows * model.motor_dim(), "motor states")?.to_vec())?;
        if out_len != rows * model.dim_h() {
            return Err(invalid(format!("output holds {out_len} values, expected {}", rows * model.dim_h())));
        }
        let h = model.encode(&input)?;
        slice_mut(out, out_len, "output")?.copy_from_slice(h.as_slice());
        Ok(())
    })
}

/// # Safety
/// `trainer` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sm_trainer_free(trainer: *mut SmTrainer) {
    if !trainer.is_null() {
        drop(Box::from_raw(trainer));
    }
}

/// Q_p and Q_h between representations `h` (`n × dim_h`) and positions `p`
/// (`n × dim_p`), both row-major.
///
/// # Safety
/// `h` and `p` must point to `n * dim_h` and `n * dim_p` doubles; `q_p` and
/// `q_h` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sm_dissimilarity(
    h: *const f64,
    p: *const f64,
    n: usize,
    dim_h: usize,
    dim_p: usize,
    q_p: *mut f64,
    q_h: *mut f64,
) -> SmStatus {
    guard(|| {
        let hm = Matrix::from_vec(n, dim_h, slice(h, n * dim_h, "h")?.to_vec())?;
        let pm = Matrix::from_vec(n, dim_p, slice(p, n * dim_p, "p")?.to_vec())?;
        let q_p = borrow_mut(q_p, "q_p")?;
        let q_h = borrow_mut(q_h, "q_h")?;
        let r = analysis::dissimilarity(&hm, &pm)?;
        *q_p = r.q_p;
        *q_h = r.q_h;
        Ok(())
    })
}
