//! JSON API over session directories under one data root.
//!
//! | route | |
//! |---|---|
//! | `GET  /sessions` | session ids |
//! | `POST /sessions` | multipart `image` (+ optional `config` JSON) |
//! | `GET  /sessions/{id}` | summary |
//! | `GET  /sessions/{id}/crops/{cid}` | crop sidecar |
//! | `GET  /sessions/{id}/crops/{cid}/image`, `/mask` | PNG |
//! | `POST /sessions/{id}/crops/{cid}/seeds` | seed set, returns the watershed preview |
//! | `POST /sessions/{id}/crops/{cid}/separate` | `{"method": 1 or 2}` (optional) |
//! | `GET  /sessions/{id}/separated/{sid}/image` | PNG |
//! | `POST /sessions/{id}/scores` | scores file, returns the argmax assignment |
//! | `POST /sessions/{id}/distribute` | distribution report |
//! | `GET  /sessions/{id}/assignment` | assignment |
//! | `GET  /sessions/{id}/karyogram`, `/karyogram/image` | layout JSON, PNG |

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Multipart, Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use karyoseg::classify::ScoresFile;
use karyoseg::watershed::{Method, SeedSet};
use karyoseg::PipelineConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use crate::error::{ErrorClass, ServiceError, ServiceResult};
use crate::store::{check_id, session_id, Session};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self.class {
            ErrorClass::BadRequest => StatusCode::BAD_REQUEST,
            ErrorClass::NotFound => StatusCode::NOT_FOUND,
            ErrorClass::Conflict => StatusCode::CONFLICT,
            ErrorClass::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.body)).into_response()
    }
}

#[derive(Clone)]
pub struct AppState {
    root: Arc<PathBuf>,
    locks: Arc<Mutex<HashMap<String, Arc<RwLock<()>>>>>,
}

impl AppState {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        AppState { root: Arc::new(root.into()), locks: Arc::default() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self, id: &str) -> Arc<RwLock<()>> {
        let mut map = self.locks.lock().expect("lock table poisoned");
        map.entry(id.to_string()).or_default().clone()
    }

    fn dir(&self, id: &str) -> ServiceResult<PathBuf> {
        check_id(id)?;
        Ok(self.root.join(id))
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ServiceResult<T> + Send + 'static) -> ServiceResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::new(ErrorClass::Internal, "internal", e))?
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> ServiceResult<T> {
    Ok(serde_json::from_slice(body)?)
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

/// Runs `f` on the session under its read lock.
async fn read<T: Send + 'static>(
    st: &AppState,
    id: &str,
    f: impl FnOnce(Session) -> ServiceResult<T> + Send + 'static,
) -> ServiceResult<T> {
    let dir = st.dir(id)?;
    let lock = st.lock(id);
    let _guard = lock.read().await;
    blocking(move || f(Session::open(&dir)?)).await
}

/// Runs `f` on the session under its write lock.
async fn write<T: Send + 'static>(
    st: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> ServiceResult<T> + Send + 'static,
) -> ServiceResult<T> {
    let dir = st.dir(id)?;
    let lock = st.lock(id);
    let _guard = lock.write().await;
    blocking(move || f(&mut Session::open(&dir)?)).await
}

async fn list_sessions(State(st): State<AppState>) -> ServiceResult<Json<Vec<String>>> {
    let root = st.root.clone();
    blocking(move || {
        let mut ids = Vec::new();
        if root.is_dir() {
            for e in std::fs::read_dir(&*root)? {
                let e = e?;
                if Session::exists(&e.path()) {
                    ids.push(e.file_name().to_string_lossy().into_owned());
                }
            }
        }
        ids.sort();
        Ok(Json(ids))
    })
    .await
}

async fn create_session(State(st): State<AppState>, mut form: Multipart) -> ServiceResult<Response> {
    let (mut image, mut config) = (None, PipelineConfig::default());
    while let Some(field) = form.next_field().await.map_err(ServiceError::invalid)? {
        let name = field.name().unwrap_or_default().to_string();
        let data = field.bytes().await.map_err(ServiceError::invalid)?;
        match name.as_str() {
            "image" => image = Some(data),
            "config" => config = parse(&data)?,
            other => return Err(ServiceError::invalid(format!("unexpected form field `{other}`"))),
        }
    }
    let image = image.ok_or_else(|| ServiceError::invalid("missing `image` field"))?;
    let id = session_id(&image, &config);
    let dir = st.dir(&id)?;
    let lock = st.lock(&id);
    let _guard = lock.write().await;
    let (status, info) = blocking(move || {
        if Session::exists(&dir) {
            return Ok((StatusCode::OK, Session::open(&dir)?.info));
        }
        Ok((StatusCode::CREATED, Session::create(&dir, &image, config)?.info))
    })
    .await?;
    Ok((status, Json(info)).into_response())
}

async fn get_session(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ServiceResult<Response> {
    read(&st, &id, |s| Ok(Json(s.info).into_response())).await
}

async fn get_crop(State(st): State<AppState>, UrlPath((id, cid)): UrlPath<(String, String)>) -> ServiceResult<Response> {
    read(&st, &id, move |s| {
        check_id(&cid)?;
        let entry = s.info.crops.iter().find(|c| c.id == cid).cloned();
        entry.map(|e| Json(e).into_response()).ok_or_else(|| ServiceError::not_found(format!("no crop `{cid}`")))
    })
    .await
}

async fn crop_image(State(st): State<AppState>, UrlPath((id, cid)): UrlPath<(String, String)>) -> ServiceResult<Response> {
    read(&st, &id, move |s| {
        check_id(&cid)?;
        Ok(png(std::fs::read(s.crop_path(&cid)?)?))
    })
    .await
}

async fn crop_mask(State(st): State<AppState>, UrlPath((id, cid)): UrlPath<(String, String)>) -> ServiceResult<Response> {
    read(&st, &id, move |s| {
        check_id(&cid)?;
        Ok(png(std::fs::read(s.crop_mask_path(&cid)?)?))
    })
    .await
}

async fn post_seeds(
    State(st): State<AppState>,
    UrlPath((id, cid)): UrlPath<(String, String)>,
    body: Bytes,
) -> ServiceResult<Response> {
    check_id(&cid)?;
    let seeds: SeedSet = parse(&body)?;
    write(&st, &id, move |s| Ok(Json(s.set_seeds(&cid, &seeds)?).into_response())).await
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct SeparateRequest {
    method: Option<Method>,
}

async fn post_separate(
    State(st): State<AppState>,
    UrlPath((id, cid)): UrlPath<(String, String)>,
    body: Bytes,
) -> ServiceResult<Response> {
    check_id(&cid)?;
    let req: SeparateRequest = if body.iter().all(u8::is_ascii_whitespace) { SeparateRequest::default() } else { parse(&body)? };
    write(&st, &id, move |s| Ok(Json(s.separate(&cid, req.method)?).into_response())).await
}

async fn separated_image(
    State(st): State<AppState>,
    UrlPath((id, sid)): UrlPath<(String, String)>,
) -> ServiceResult<Response> {
    read(&st, &id, move |s| Ok(png(std::fs::read(s.separated_path(&sid)?)?))).await
}

async fn post_scores(State(st): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ServiceResult<Response> {
    let file: ScoresFile = parse(&body)?;
    write(&st, &id, move |s| Ok(Json(s.set_scores(&file)?).into_response())).await
}

async fn post_distribute(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ServiceResult<Response> {
    write(&st, &id, |s| Ok(Json(s.distribute()?).into_response())).await
}

async fn get_assignment(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ServiceResult<Response> {
    read(&st, &id, |s| Ok(Json(s.assignment()?).into_response())).await
}

async fn get_karyogram(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ServiceResult<Response> {
    read(&st, &id, |s| Ok(Json(s.karyogram()?).into_response())).await
}

async fn karyogram_image(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ServiceResult<Response> {
    read(&st, &id, |s| {
        s.karyogram()?;
        Ok(png(std::fs::read(s.dir().join("karyogram.png"))?))
    })
    .await
}

async fn fallback() -> ServiceError {
    ServiceError::not_found("no such route")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/crops/{cid}", get(get_crop))
        .route("/sessions/{id}/crops/{cid}/image", get(crop_image))
        .route("/sessions/{id}/crops/{cid}/mask", get(crop_mask))
        .route("/sessions/{id}/crops/{cid}/seeds", post(post_seeds))
        .route("/sessions/{id}/crops/{cid}/separate", post(post_separate))
        .route("/sessions/{id}/separated/{sid}/image", get(separated_image))
        .route("/sessions/{id}/scores", post(post_scores))
        .route("/sessions/{id}/distribute", post(post_distribute))
        .route("/sessions/{id}/assignment", get(get_assignment))
        .route("/sessions/{id}/karyogram", get(get_karyogram))
        .route("/sessions/{id}/karyogram/image", get(karyogram_image))
        .fallback(fallback)
        .with_state(state)
}

pub async fn serve(root: PathBuf, host: &str, port: u16) -> ServiceResult<()> {
    std::fs::create_dir_all(&root)?;
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    axum::serve(listener, router(AppState::new(root))).await?;
    Ok(())
}
