use std::convert::Infallible;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tokio::sync::watch;

use crate::session::{Gateway, GatewayError};
use crisismesh_core::scenario::HumanInput;

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let status = match self {
            GatewayError::BadCredentials | GatewayError::Unauthorized => StatusCode::UNAUTHORIZED,
            GatewayError::SessionExists | GatewayError::WrongPhase(_) => StatusCode::CONFLICT,
            GatewayError::UnknownTarget(_) => StatusCode::UNPROCESSABLE_ENTITY,
            GatewayError::BadRequest(_) => StatusCode::BAD_REQUEST,
        };
        let body = serde_json::json!({ "error": self.code(), "message": self.to_string() });
        (status, Json(body)).into_response()
    }
}

#[derive(Clone)]
struct AppState {
    gateway: Arc<Mutex<Gateway>>,
    // journal length after the latest change; wakes event streams
    changes: Arc<watch::Sender<usize>>,
}

impl AppState {
    fn lock(&self) -> MutexGuard<'_, Gateway> {
        self.gateway.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoginRequest {
    operator: String,
    secret: String,
}

fn json_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, GatewayError> {
    serde_json::from_slice(body).map_err(|e| GatewayError::BadRequest(e.to_string()))
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers.get(header::AUTHORIZATION)?.to_str().ok()?.strip_prefix("Bearer ")
}

async fn login(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, GatewayError> {
    let req: LoginRequest = json_body(&body)?;
    let session = state.lock().login(&req.operator, &req.secret)?;
    Ok(Json(session))
}

async fn recommendation(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<impl IntoResponse, GatewayError> {
    let token = bearer(&headers);
    state.lock().authorize(token)?;
    let input: HumanInput = json_body(&body)?;
    let (ack, len) = {
        let mut g = state.lock();
        let ack = g.submit(token, input);
        (ack, g.journal_len())
    };
    state.changes.send_replace(len);
    Ok(Json(ack?))
}

async fn current_state(State(state): State<AppState>, headers: HeaderMap) -> Result<impl IntoResponse, GatewayError> {
    let g = state.lock();
    g.authorize(bearer(&headers))?;
    Ok(Json(g.state()))
}

async fn events(State(state): State<AppState>, headers: HeaderMap) -> Result<Response, GatewayError> {
    state.lock().authorize(bearer(&headers))?;
    // subscribe before the first read so no change is missed
    let rx = state.changes.subscribe();
    let stream = futures::stream::unfold((state, 0usize, rx), |(state, from, mut rx)| async move {
        loop {
            let (lines, finished) = state.lock().journal_from(from);
            if !lines.is_empty() {
                let next = from + lines.len();
                let mut chunk = lines.join("\n");
                chunk.push('\n');
                return Some((Ok::<_, Infallible>(chunk), (state, next, rx)));
            }
            if finished || rx.changed().await.is_err() {
                return None;
            }
        }
    });
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(stream)).into_response())
}

/// The HTTP surface: `POST /login`, `GET /events`, `POST /recommendation`,
/// `GET /state`.
pub fn router(gateway: Gateway) -> Router {
    let len = gateway.journal_len();
    let state = AppState { gateway: Arc::new(Mutex::new(gateway)), changes: Arc::new(watch::channel(len).0) };
    Router::new()
        .route("/login", post(login))
        .route("/events", get(events))
        .route("/recommendation", post(recommendation))
        .route("/state", get(current_state))
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, gateway: Gateway) -> std::io::Result<()> {
    axum::serve(listener, router(gateway)).await
}
