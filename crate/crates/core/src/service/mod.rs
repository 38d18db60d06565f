//! HTTP/JSON service over in-memory sessions.
//!
//! Each session owns one state tree. Mutations of a session are serialized
//! by an async mutex; the equilibrium solve for a modification runs on a
//! blocking worker under that mutex while reads proceed against the tree.
//! Solves that take longer than [`ServiceConfig::async_after`] are answered
//! with `202 Accepted` and a job id to poll.

mod handlers;
pub mod views;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};
use std::time::Duration;

use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::CorsLayer;

use crate::assignment::AssignmentParams;
use crate::tree::{CostParams, StateTree};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Defaults for sessions created from files or datasets.
    pub assignment_params: AssignmentParams,
    pub cost_params: CostParams,
    /// How long a modification request waits for its solve before answering
    /// with a job id instead.
    pub async_after: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            assignment_params: AssignmentParams::default(),
            cost_params: CostParams::default(),
            async_after: Duration::from_secs(2),
        }
    }
}

pub struct Session {
    mutation: tokio::sync::Mutex<()>,
    tree: RwLock<StateTree>,
    cost_params: RwLock<CostParams>,
}

impl Session {
    pub fn new(tree: StateTree, cost_params: CostParams) -> Self {
        Self {
            mutation: tokio::sync::Mutex::new(()),
            tree: RwLock::new(tree),
            cost_params: RwLock::new(cost_params),
        }
    }

    pub fn tree(&self) -> RwLockReadGuard<'_, StateTree> {
        self.tree.read().unwrap_or_else(|e| e.into_inner())
    }

    fn tree_mut(&self) -> RwLockWriteGuard<'_, StateTree> {
        self.tree.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn cost_params(&self) -> CostParams {
        *self.cost_params.read().unwrap_or_else(|e| e.into_inner())
    }

    fn set_cost_params(&self, params: CostParams) {
        *self.cost_params.write().unwrap_or_else(|e| e.into_inner()) = params;
    }
}

/// Final answer of a modification request.
#[derive(Debug, Clone)]
struct JobOutcome {
    status: StatusCode,
    body: serde_json::Value,
}

#[derive(Default)]
struct Registry {
    sessions: RwLock<HashMap<u64, Arc<Session>>>,
    /// Modification jobs by id: owning session and outcome once finished.
    jobs: Mutex<HashMap<u64, (u64, Option<JobOutcome>)>>,
    next_session: AtomicU64,
    next_job: AtomicU64,
}

/// Shared service state. Cheap to clone.
#[derive(Clone)]
pub struct AppState {
    registry: Arc<Registry>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let registry = Registry {
            next_session: AtomicU64::new(1),
            next_job: AtomicU64::new(1),
            ..Registry::default()
        };
        Self {
            registry: Arc::new(registry),
            config: Arc::new(config),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Registers a session and returns its id.
    pub fn add_session(&self, tree: StateTree, cost_params: CostParams) -> u64 {
        let id = self.registry.next_session.fetch_add(1, Ordering::Relaxed);
        self.registry
            .sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, Arc::new(Session::new(tree, cost_params)));
        id
    }

    pub fn session(&self, id: u64) -> Option<Arc<Session>> {
        self.registry
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&id)
            .cloned()
    }

    fn new_job(&self, session: u64) -> u64 {
        let id = self.registry.next_job.fetch_add(1, Ordering::Relaxed);
        self.jobs().insert(id, (session, None));
        id
    }

    fn jobs(&self) -> std::sync::MutexGuard<'_, HashMap<u64, (u64, Option<JobOutcome>)>> {
        self.registry.jobs.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(handlers::create_session))
        .route("/sessions/import", post(handlers::import_session))
        .route("/sessions/{sid}/tree", get(handlers::get_tree))
        .route("/sessions/{sid}/export", get(handlers::export_session))
        .route(
            "/sessions/{sid}/cost_params",
            get(handlers::get_cost_params).put(handlers::put_cost_params),
        )
        .route(
            "/sessions/{sid}/states/{id}",
            get(handlers::get_state).delete(handlers::delete_state),
        )
        .route(
            "/sessions/{sid}/states/{id}/modifications",
            post(handlers::post_modification),
        )
        .route(
            "/sessions/{sid}/states/{id}/roads/{rid}/od",
            get(handlers::get_od),
        )
        .route("/sessions/{sid}/indicators", post(handlers::post_indicators))
        .route("/sessions/{sid}/jobs/{jid}", get(handlers::get_job))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves `router(state)` on `listener` until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
