//! HTTP API over sandbox workspaces.
//!
//! Every route is served at the root for the default workspace and under
//! `/w/{ws}/` for named workspaces, which live in `<data-dir>/w/<ws>`.
//! Each workspace sits behind one reader-writer lock: mutations (import,
//! config, collections) take the write side, so readers always see a whole
//! state. Embedding runs on the blocking pool after each import and is
//! installed under the write lock when done.

mod error;

use std::collections::HashMap;
use std::io::{BufReader, Cursor};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};
use std::time::Duration;

use axum::extract::{FromRequestParts, Path, Query, RawPathParams};
use axum::http::request::Parts;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::watch;

use sandbox_core::collections::CollectionKind;
use sandbox_core::report::{build_report, RankedPost, DEFAULT_TOP_K};
use sandbox_core::similarity::SimilarityScore;
use sandbox_core::{Bucket, EmbeddingStatus, ProviderSpec, SortOrder, TriggerRef, Workspace};

pub use error::{ApiError, ErrorCode};

type ApiResult<T> = Result<Json<T>, ApiError>;

const DEFAULT_WORKSPACE: &str = "default";
const WAIT_LIMIT: Duration = Duration::from_secs(120);

/// One workspace plus a counter bumped every time an embedding pass lands.
pub struct WorkspaceHandle {
    ws: RwLock<Workspace>,
    embedded: watch::Sender<u64>,
}

impl WorkspaceHandle {
    fn new(ws: Workspace) -> Arc<Self> {
        Arc::new(WorkspaceHandle {
            ws: RwLock::new(ws),
            embedded: watch::Sender::new(0),
        })
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Workspace> {
        self.ws.read().unwrap_or_else(|p| p.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, Workspace> {
        self.ws.write().unwrap_or_else(|p| p.into_inner())
    }

    /// Starts an embedding pass if the workspace has pending posts.
    pub fn schedule_embedding(self: &Arc<Self>) {
        let Some(job) = self.read().embedding_job() else {
            return;
        };
        let handle = Arc::clone(self);
        tokio::task::spawn_blocking(move || {
            let outcome = job.run();
            let installed = handle.write().install_embeddings(outcome);
            if installed {
                handle.embedded.send_modify(|n| *n += 1);
            } else {
                log::debug!("discarded stale embedding pass");
            }
        });
    }

    /// Waits until embeddings are no longer pending, up to `limit`.
    pub async fn wait_embedded(&self, limit: Duration) -> EmbeddingStatus {
        let mut rx = self.embedded.subscribe();
        let wait = async {
            loop {
                let status = self.read().embedding_status();
                if status != EmbeddingStatus::Pending {
                    return status;
                }
                if rx.changed().await.is_err() {
                    return status;
                }
            }
        };
        tokio::time::timeout(limit, wait).await.unwrap_or(EmbeddingStatus::Pending)
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Shared>,
}

struct Shared {
    data_dir: PathBuf,
    provider: ProviderSpec,
    workspaces: Mutex<HashMap<String, Arc<WorkspaceHandle>>>,
}

impl AppState {
    /// Opens the default workspace from `data_dir` and starts embedding any
    /// posts already on disk. Must be called inside a Tokio runtime.
    pub fn open(data_dir: impl Into<PathBuf>, provider: ProviderSpec) -> sandbox_core::Result<Self> {
        let state = AppState {
            inner: Arc::new(Shared {
                data_dir: data_dir.into(),
                provider,
                workspaces: Mutex::new(HashMap::new()),
            }),
        };
        state.workspace(DEFAULT_WORKSPACE)?;
        Ok(state)
    }

    pub fn workspace(&self, id: &str) -> sandbox_core::Result<Arc<WorkspaceHandle>> {
        let mut map = self.inner.workspaces.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(h) = map.get(id) {
            return Ok(Arc::clone(h));
        }
        let dir = if id == DEFAULT_WORKSPACE {
            self.inner.data_dir.clone()
        } else {
            self.inner.data_dir.join("w").join(id)
        };
        let handle = WorkspaceHandle::new(Workspace::open(dir, self.inner.provider.clone())?);
        handle.schedule_embedding();
        map.insert(id.to_string(), Arc::clone(&handle));
        Ok(handle)
    }
}

/// The workspace addressed by the request path.
pub struct Ws(pub Arc<WorkspaceHandle>);

impl FromRequestParts<AppState> for Ws {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        let id = match RawPathParams::from_request_parts(parts, state).await {
            Ok(params) => params.iter().find(|(k, _)| *k == "ws").map(|(_, v)| v.to_string()),
            Err(_) => None,
        };
        let id = id.unwrap_or_else(|| DEFAULT_WORKSPACE.to_string());
        let valid = !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid {
            return Err(ApiError::bad_request(format!("invalid workspace id `{id}`")));
        }
        Ok(Ws(state.workspace(&id)?))
    }
}

pub fn router(state: AppState) -> Router {
    let api = api_routes();
    Router::new().merge(api.clone()).nest("/w/{ws}", api).with_state(state)
}

fn api_routes() -> Router<AppState> {
    Router::new()
        .route("/health", get(health))
        .route("/workspace/import", post(import))
        .route("/workspace/config", put(put_config).get(get_config).delete(delete_config))
        .route("/posts", get(list_posts))
        .route("/posts/{id}/highlights", get(highlights))
        .route("/summary", get(summary))
        .route("/collections", get(get_collections).put(put_collections))
        .route("/collections/{kind}/coverage", get(coverage))
        .route("/collections/{kind}/{post_id}", post(add_member).delete(remove_member))
        .route("/rank/misses", get(rank_misses))
        .route("/rank/false-alarms", get(rank_false_alarms))
        .route("/analysis/impact", get(impact))
        .route("/analysis/trigger/{r}/{c}/{s}/spans", get(trigger_spans))
        .route("/metrics/similarity-distribution", get(similarity_distribution))
        .route("/report", get(report))
}

async fn health(Ws(h): Ws) -> Json<Value> {
    let ws = h.read();
    Json(json!({
        "status": "ok",
        "posts": ws.posts().len(),
        "embeddings": ws.embedding_status(),
        "config_applied": ws.config().is_some(),
    }))
}

#[derive(Deserialize)]
struct ImportQuery {
    path: Option<PathBuf>,
}

async fn import(Ws(h): Ws, Query(q): Query<ImportQuery>, body: axum::body::Bytes) -> ApiResult<Value> {
    let report = match q.path {
        Some(path) => {
            let file = std::fs::File::open(&path).map_err(|e| ApiError::bad_request(format!("{}: {e}", path.display())))?;
            h.write().import_jsonl(BufReader::new(file))?
        }
        None => h.write().import_jsonl(Cursor::new(body))?,
    };
    h.schedule_embedding();
    let status = h.read().embedding_status();
    Ok(Json(json!({ "import": report, "embeddings": status })))
}

async fn put_config(Ws(h): Ws, yaml: String) -> ApiResult<Value> {
    let mut ws = h.write();
    let metrics = ws.apply_config(&yaml)?;
    let summary = ws.summary().ok();
    Ok(Json(json!({ "complexity_metrics": metrics, "summary": summary })))
}

async fn get_config(Ws(h): Ws) -> Json<Value> {
    let ws = h.read();
    Json(json!({
        "yaml": ws.config().map(|c| c.source_text.clone()),
        "complexity_metrics": ws.config().map(|c| c.complexity()),
    }))
}

async fn delete_config(Ws(h): Ws) -> ApiResult<Value> {
    h.write().clear_config()?;
    Ok(Json(json!({ "cleared": true })))
}

#[derive(Deserialize)]
struct ListQuery {
    sort: Option<String>,
    bucket: Option<String>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn list_posts(Ws(h): Ws, Query(q): Query<ListQuery>) -> ApiResult<Value> {
    let sort: SortOrder = q.sort.as_deref().unwrap_or("new").parse()?;
    let bucket: Bucket = q.bucket.as_deref().unwrap_or("all").parse()?;
    let ws = h.read();
    let listed = ws.list_posts(sort, bucket)?;
    let total = listed.len();
    let page: Vec<_> = listed.into_iter().skip(q.offset.unwrap_or(0)).take(q.limit.unwrap_or(usize::MAX)).collect();
    Ok(Json(json!({ "sort": sort, "bucket": bucket, "total": total, "posts": page })))
}

async fn highlights(Ws(h): Ws, Path(p): Path<PostPath>) -> ApiResult<Value> {
    let highlights = h.read().highlights_for_post(&p.id)?;
    Ok(Json(json!({ "post_id": p.id, "highlights": highlights })))
}

#[derive(Deserialize)]
struct PostPath {
    id: String,
}

async fn summary(Ws(h): Ws) -> ApiResult<sandbox_core::workspace::SandboxSummary> {
    Ok(Json(h.read().summary()?))
}

async fn get_collections(Ws(h): Ws) -> Json<sandbox_core::Collections> {
    Json(h.read().collections().clone())
}

async fn put_collections(Ws(h): Ws, Json(c): Json<sandbox_core::Collections>) -> ApiResult<sandbox_core::Collections> {
    let mut ws = h.write();
    ws.set_collections(c)?;
    Ok(Json(ws.collections().clone()))
}

#[derive(Deserialize)]
struct KindPath {
    kind: String,
}

#[derive(Deserialize)]
struct MemberPath {
    kind: String,
    post_id: String,
}

fn parse_kind(s: &str) -> Result<CollectionKind, ApiError> {
    s.parse().map_err(|_| ApiError::bad_request(format!("unknown collection `{s}`")))
}

#[derive(Serialize)]
struct Membership<'a> {
    kind: CollectionKind,
    members: &'a [String],
}

async fn add_member(Ws(h): Ws, Path(p): Path<MemberPath>) -> ApiResult<Value> {
    let kind = parse_kind(&p.kind)?;
    let mut ws = h.write();
    let members = ws.add_to_collection(kind, &p.post_id)?;
    Ok(Json(json!(Membership { kind, members })))
}

async fn remove_member(Ws(h): Ws, Path(p): Path<MemberPath>) -> ApiResult<Value> {
    let kind = parse_kind(&p.kind)?;
    let mut ws = h.write();
    let members = ws.remove_from_collection(kind, &p.post_id)?;
    Ok(Json(json!(Membership { kind, members })))
}

async fn coverage(Ws(h): Ws, Path(p): Path<KindPath>) -> ApiResult<sandbox_core::CoverageRatio> {
    let kind = parse_kind(&p.kind)?;
    Ok(Json(h.read().coverage(kind)?))
}

#[derive(Deserialize)]
struct RankQuery {
    #[serde(default)]
    wait: bool,
    limit: Option<usize>,
}

async fn ranked(
    h: &WorkspaceHandle,
    q: &RankQuery,
    rank: fn(&Workspace) -> sandbox_core::Result<Vec<SimilarityScore<f64>>>,
) -> ApiResult<Value> {
    if q.wait {
        h.wait_embedded(WAIT_LIMIT).await;
    }
    let ws = h.read();
    let list = rank(&ws)?;
    let total = list.len();
    let posts: Vec<RankedPost> = list
        .into_iter()
        .take(q.limit.unwrap_or(usize::MAX))
        .map(|s| RankedPost {
            title: ws.post(&s.post_id).map(|p| p.title.clone()).unwrap_or_default(),
            id: s.post_id,
            similarity: s.score,
        })
        .collect();
    Ok(Json(json!({ "total": total, "posts": posts })))
}

async fn rank_misses(Ws(h): Ws, Query(q): Query<RankQuery>) -> ApiResult<Value> {
    ranked(&h, &q, Workspace::rank_misses).await
}

async fn rank_false_alarms(Ws(h): Ws, Query(q): Query<RankQuery>) -> ApiResult<Value> {
    ranked(&h, &q, Workspace::rank_false_alarms).await
}

async fn impact(Ws(h): Ws) -> ApiResult<sandbox_core::analysis::ImpactNode> {
    Ok(Json(h.read().impact_tree()?))
}

#[derive(Deserialize)]
struct TriggerPath {
    r: usize,
    c: usize,
    s: usize,
}

async fn trigger_spans(Ws(h): Ws, Path(p): Path<TriggerPath>) -> ApiResult<Value> {
    let trigger = TriggerRef {
        rule_index: p.r,
        check_index: p.c,
        string_index: p.s,
    };
    let spans = h.read().triggers_to_spans(trigger)?;
    Ok(Json(json!({ "trigger": trigger, "spans": spans })))
}

#[derive(Deserialize)]
struct WaitQuery {
    #[serde(default)]
    wait: bool,
}

async fn similarity_distribution(Ws(h): Ws, Query(q): Query<WaitQuery>) -> ApiResult<sandbox_core::ScoreDistribution> {
    if q.wait {
        h.wait_embedded(WAIT_LIMIT).await;
    }
    Ok(Json(h.read().filtered_similarity_distribution()?))
}

#[derive(Deserialize)]
struct ReportQuery {
    k: Option<usize>,
    #[serde(default)]
    wait: bool,
}

async fn report(Ws(h): Ws, Query(q): Query<ReportQuery>) -> ApiResult<sandbox_core::Report> {
    if q.wait {
        h.wait_embedded(WAIT_LIMIT).await;
    }
    let ws = h.read();
    if !ws.collections().should_filter.is_empty() && ws.embedding_status() == EmbeddingStatus::Pending {
        return Err(sandbox_core::Error::Pending.into());
    }
    Ok(Json(build_report(&ws, q.k.unwrap_or(DEFAULT_TOP_K))?))
}
