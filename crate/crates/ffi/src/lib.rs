//! C ABI for the roadlab engine.
//!
//! Sessions are opaque handles created by one of the `roadlab_session_*`
//! constructors and released with [`roadlab_session_free`]. Every fallible
//! call returns a [`RoadlabStatus`]; on failure a description is available
//! from [`roadlab_last_error_message`] on the same thread. Strings returned
//! through out-parameters are owned by the caller and must be released with
//! [`roadlab_string_free`].
//!
//! A session handle may be moved between threads but must not be used from
//! two threads at once.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use roadlab::assignment::bpr_time;
use roadlab::io::{load_network, load_session, parse_trips, save_session};
use roadlab::service::views;
use roadlab::{datasets, AssignmentParams, CostParams, Error, Modification, Projection, StateId, StateTree};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoadlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed network, trips or coordinate text.
    Parse = 3,
    /// Malformed or inconsistent session document.
    InvalidSession = 4,
    /// The modification was rejected; the tree is unchanged.
    InvalidModification = 5,
    UnknownState = 6,
    RootDeletion = 7,
    /// Some OD pair has no path.
    Unreachable = 8,
    InvalidArgument = 9,
    /// A bug inside the library, including panics.
    Internal = 10,
}

/// Opaque session handle: a state tree plus the cost rates applied to new
/// modifications.
pub struct RoadlabSession {
    tree: StateTree,
    cost_params: CostParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the most recent failed call on this thread, or NULL. The
/// pointer stays valid until the next `roadlab_*` call on this thread.
#[no_mangle]
pub extern "C" fn roadlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

struct Failure {
    status: RoadlabStatus,
    message: String,
}

impl Failure {
    fn new(status: RoadlabStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::UnknownState(_) => RoadlabStatus::UnknownState,
            Error::RootDeletion => RoadlabStatus::RootDeletion,
            Error::Unreachable(_) => RoadlabStatus::Unreachable,
            Error::Parse { .. } | Error::CountMismatch { .. } | Error::MissingCoordinates(_) => {
                RoadlabStatus::Parse
            }
            Error::SchemaVersion(_)
            | Error::Referential(_)
            | Error::ReplayMismatch { .. }
            | Error::Json(_) => RoadlabStatus::InvalidSession,
            Error::Io(_) => RoadlabStatus::Internal,
            _ => RoadlabStatus::InvalidArgument,
        };
        Failure::new(status, err.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn run(f: impl FnOnce() -> FfiResult) -> RoadlabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RoadlabStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {what}"));
            RoadlabStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::new(RoadlabStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(RoadlabStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure::new(RoadlabStatus::NullPointer, format!("{name} is NULL")))
}

unsafe fn session_ref<'a>(p: *const RoadlabSession) -> FfiResult<&'a RoadlabSession> {
    p.as_ref()
        .ok_or_else(|| Failure::new(RoadlabStatus::NullPointer, "session is NULL"))
}

unsafe fn session_mut<'a>(p: *mut RoadlabSession) -> FfiResult<&'a mut RoadlabSession> {
    p.as_mut()
        .ok_or_else(|| Failure::new(RoadlabStatus::NullPointer, "session is NULL"))
}

fn write_string(out: &mut *mut c_char, s: String) -> FfiResult {
    let c = CString::new(s)
        .map_err(|_| Failure::new(RoadlabStatus::Internal, "output contains a NUL byte"))?;
    *out = c.into_raw();
    Ok(())
}

fn publish(out: &mut *mut RoadlabSession, tree: StateTree, cost_params: CostParams) {
    *out = Box::into_raw(Box::new(RoadlabSession { tree, cost_params }));
}

/// Creates a session from TNTP network and trips text. `coords` may be NULL.
/// `projection` is `"planar"`, `"lonlat"`, or NULL for planar.
#[no_mangle]
pub unsafe extern "C" fn roadlab_session_new(
    network: *const c_char,
    trips: *const c_char,
    coords: *const c_char,
    projection: *const c_char,
    out: *mut *mut RoadlabSession,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let network = str_arg(network, "network")?;
        let trips = str_arg(trips, "trips")?;
        let coords = if coords.is_null() {
            None
        } else {
            Some(str_arg(coords, "coords")?)
        };
        let projection: Projection = if projection.is_null() {
            Projection::default()
        } else {
            str_arg(projection, "projection")?.parse()?
        };
        let net = load_network(network, coords, projection)?;
        let demands = parse_trips(trips)?.demands;
        let tree = StateTree::create(net, demands, AssignmentParams::default())?;
        publish(out, tree, CostParams::default());
        Ok(())
    })
}

/// Creates a session from a bundled dataset: `"braess"` or `"sioux-falls"`.
#[no_mangle]
pub unsafe extern "C" fn roadlab_session_from_dataset(
    name: *const c_char,
    out: *mut *mut RoadlabSession,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let ds = datasets::by_name(name).ok_or_else(|| {
            Failure::new(RoadlabStatus::InvalidArgument, format!("unknown dataset {name:?}"))
        })?;
        let tree = StateTree::create(ds.network, ds.demands, AssignmentParams::default())?;
        publish(out, tree, CostParams::default());
        Ok(())
    })
}

/// Rebuilds a session from a document produced by [`roadlab_session_export`].
#[no_mangle]
pub unsafe extern "C" fn roadlab_session_import(
    json: *const c_char,
    out: *mut *mut RoadlabSession,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let (tree, cost_params) = load_session(str_arg(json, "json")?)?;
        publish(out, tree, cost_params);
        Ok(())
    })
}

/// Writes the session document to `*out`.
#[no_mangle]
pub unsafe extern "C" fn roadlab_session_export(
    session: *const RoadlabSession,
    out: *mut *mut c_char,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let s = session_ref(session)?;
        write_string(out, save_session(&s.tree, &s.cost_params)?)
    })
}

/// Releases a session. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn roadlab_session_free(session: *mut RoadlabSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn roadlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Sets the construction cost rates per kilometre used by later
/// modifications.
#[no_mangle]
pub unsafe extern "C" fn roadlab_set_cost_params(
    session: *mut RoadlabSession,
    surface_per_km: f64,
    tunnel_per_km: f64,
) -> RoadlabStatus {
    run(|| {
        let s = session_mut(session)?;
        let params = CostParams {
            surface_per_km,
            tunnel_per_km,
        };
        params.validate()?;
        s.cost_params = params;
        Ok(())
    })
}

/// Applies a modification, given as JSON such as
/// `{"kind":"close_road","road":3}`, to `parent` and writes the new state id.
#[no_mangle]
pub unsafe extern "C" fn roadlab_apply_modification(
    session: *mut RoadlabSession,
    parent: u64,
    modification_json: *const c_char,
    out_state: *mut u64,
) -> RoadlabStatus {
    run(|| {
        let out_state = out_arg(out_state, "out_state")?;
        let s = session_mut(session)?;
        let modification: Modification = serde_json::from_str(str_arg(modification_json, "modification_json")?)
            .map_err(|e| Failure::new(RoadlabStatus::InvalidModification, e.to_string()))?;
        let cost_params = s.cost_params;
        let id = s
            .tree
            .apply_modification(StateId(parent), modification, &cost_params)
            .map_err(|e| {
                let mut f = Failure::from(e);
                if f.status == RoadlabStatus::InvalidArgument || f.status == RoadlabStatus::Parse {
                    f.status = RoadlabStatus::InvalidModification;
                }
                f
            })?;
        *out_state = id.0;
        Ok(())
    })
}

/// Total system travel time of a state.
#[no_mangle]
pub unsafe extern "C" fn roadlab_state_metric(
    session: *const RoadlabSession,
    state: u64,
    out_metric: *mut f64,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out_metric, "out_metric")?;
        *out = session_ref(session)?.tree.node(StateId(state))?.metric;
        Ok(())
    })
}

/// Relative metric improvement of a state over the root and over its
/// parent. At the root both are 0 and `*out_parent_applicable` is false.
#[no_mangle]
pub unsafe extern "C" fn roadlab_metric_deltas(
    session: *const RoadlabSession,
    state: u64,
    out_vs_initial: *mut f64,
    out_vs_parent: *mut f64,
    out_parent_applicable: *mut bool,
) -> RoadlabStatus {
    run(|| {
        let vs_initial = out_arg(out_vs_initial, "out_vs_initial")?;
        let vs_parent = out_arg(out_vs_parent, "out_vs_parent")?;
        let applicable = out_arg(out_parent_applicable, "out_parent_applicable")?;
        let d = session_ref(session)?.tree.metric_deltas(StateId(state))?;
        *vs_initial = d.vs_initial;
        *vs_parent = d.vs_parent;
        *applicable = d.parent_applicable;
        Ok(())
    })
}

/// Construction cost of the modification that produced `state`, and the
/// total along its lineage.
#[no_mangle]
pub unsafe extern "C" fn roadlab_state_cost(
    session: *const RoadlabSession,
    state: u64,
    out_step: *mut f64,
    out_cumulative: *mut f64,
) -> RoadlabStatus {
    run(|| {
        let step = out_arg(out_step, "out_step")?;
        let cumulative = out_arg(out_cumulative, "out_cumulative")?;
        let node = session_ref(session)?.tree.node(StateId(state))?;
        *step = node.step_cost;
        *cumulative = node.cumulative_cost;
        Ok(())
    })
}

/// Deletes a state and its descendants. `out_removed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn roadlab_delete_state(
    session: *mut RoadlabSession,
    state: u64,
    out_removed: *mut usize,
) -> RoadlabStatus {
    run(|| {
        let removed = session_mut(session)?.tree.delete_state(StateId(state))?;
        if let Some(out) = out_removed.as_mut() {
            *out = removed.len();
        }
        Ok(())
    })
}

/// Network and per-road status of a state as JSON.
#[no_mangle]
pub unsafe extern "C" fn roadlab_state_json(
    session: *const RoadlabSession,
    state: u64,
    out: *mut *mut c_char,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let view = views::state_view(&session_ref(session)?.tree, StateId(state))?;
        write_string(out, serde_json::to_string(&view).map_err(Error::from)?)
    })
}

/// Summaries of every state in the tree as JSON.
#[no_mangle]
pub unsafe extern "C" fn roadlab_tree_json(
    session: *const RoadlabSession,
    out: *mut *mut c_char,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out, "out")?;
        let view = views::tree_view(&session_ref(session)?.tree)?;
        write_string(out, serde_json::to_string(&view).map_err(Error::from)?)
    })
}

/// Link travel time `fftt * (1 + 0.15 * (volume / capacity)^4)`.
#[no_mangle]
pub unsafe extern "C" fn roadlab_bpr_time(
    fftt: f64,
    capacity: f64,
    volume: f64,
    out_time: *mut f64,
) -> RoadlabStatus {
    run(|| {
        let out = out_arg(out_time, "out_time")?;
        *out = bpr_time(fftt, capacity, volume)?;
        Ok(())
    })
}
