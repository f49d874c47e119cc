//! JSON HTTP front for the decision service.
//!
//! Routes:
//!   POST /assets      ingest one RulUpdate -> {"version": k} | 400
//!   GET  /assets      registry snapshot as an array of asset records
//!   POST /plans       plan options -> PlanReport | 409 when registry empty
//!   GET  /plans/{id}  stored PlanReport | 404

use crate::service::{DecisionService, PlanOptions, RulUpdate, ServiceError};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use std::sync::{Arc, Mutex};

pub type SharedService = Arc<Mutex<DecisionService>>;

pub fn router(service: SharedService) -> Router {
    Router::new()
        .route("/assets", post(post_asset).get(get_assets))
        .route("/plans", post(post_plan))
        .route("/plans/{id}", get(get_plan))
        .with_state(service)
}

fn error_response(status: StatusCode, err: &ServiceError) -> Response {
    let body = match err {
        ServiceError::Validation(v) => json!({
            "error": err.to_string(),
            "violations": v.violations,
        }),
        _ => json!({ "error": err.to_string() }),
    };
    (status, Json(body)).into_response()
}

async fn post_asset(
    State(service): State<SharedService>,
    Json(update): Json<RulUpdate>,
) -> Response {
    let mut svc = service.lock().unwrap();
    match svc.ingest_rul_update(update) {
        Ok(version) => (StatusCode::OK, Json(json!({ "version": version }))).into_response(),
        Err(e @ ServiceError::Validation(_)) => error_response(StatusCode::BAD_REQUEST, &e),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, &e),
    }
}

async fn get_assets(State(service): State<SharedService>) -> Response {
    let assets = service.lock().unwrap().list_assets();
    let wire: Vec<crate::problem::AssetWire> =
        assets.iter().map(crate::problem::AssetWire::from).collect();
    Json(wire).into_response()
}

async fn post_plan(
    State(service): State<SharedService>,
    Json(options): Json<PlanOptions>,
) -> Response {
    // snapshot under the lock, run the GA outside it
    let snapshot = {
        let svc = service.lock().unwrap();
        svc.snapshot_instance(options.return_to_center.unwrap_or(false))
    };
    let instance = match snapshot {
        Ok(i) => i,
        Err(e @ ServiceError::EmptyRegistry) => return error_response(StatusCode::CONFLICT, &e),
        Err(e) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, &e),
    };
    let seed = options.seed.unwrap_or_else(rand::random);
    let config = options.ga_config(seed);
    let body =
        tokio::task::spawn_blocking(move || crate::service::compute_plan(&instance, &config))
            .await
            .expect("plan task not cancelled");
    match body {
        Ok(body) => {
            let report = crate::service::PlanReport {
                plan_id: uuid::Uuid::new_v4().to_string(),
                created_at: chrono::Utc::now(),
                body,
            };
            service.lock().unwrap().store_plan(report.clone());
            Json(report).into_response()
        }
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, &ServiceError::Ga(e)),
    }
}

async fn get_plan(State(service): State<SharedService>, Path(id): Path<String>) -> Response {
    let svc = service.lock().unwrap();
    match svc.get_plan(&id) {
        Ok(plan) => Json(plan.clone()).into_response(),
        Err(e) => error_response(StatusCode::NOT_FOUND, &e),
    }
}

/// Binds the listener and serves until the task is aborted or the process
/// receives ctrl-c.
pub async fn serve(service: SharedService, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
