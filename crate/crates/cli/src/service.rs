//! Rating service: per-judge assignment queues over a corpus, backed by the
//! append-only rating log.
//!
//! Routes:
//!
//! - `GET  /api/session/{id}/next`: the current item and progress
//! - `POST /api/session/{id}/rating`: a `RatingRecord` for the current item
//! - `GET  /api/session/{id}/progress`: `{done, total}`
//!
//! Judges see systems under opaque aliases (`s1`, `s2`, ...); the alias is
//! what goes in the submitted record's `system_id`, and the log stores the
//! real id.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mteval::human::{Criterion, HumanError, RecordId};
use mteval::{Corpus, RatingLog, RatingRecord, Rubric, SegmentKey};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeSpec {
    pub judge_id: String,
    pub session_id: String,
}

impl FromStr for JudgeSpec {
    type Err = String;

    /// `judge` or `judge=token`; the token defaults to the judge id.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (judge, token) = s.split_once('=').unwrap_or((s, s));
        if judge.is_empty() || token.is_empty() {
            return Err(format!("expected JUDGE or JUDGE=TOKEN, got {s:?}"));
        }
        Ok(Self {
            judge_id: judge.into(),
            session_id: token.into(),
        })
    }
}

/// One (system, segment) to rate. `system` indexes `corpus.systems`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueItem {
    pub system: usize,
    pub key: SegmentKey,
}

/// Document by document, segment by segment, every system once per segment;
/// the first system rotates from one segment to the next.
pub fn assignment_queue(corpus: &Corpus) -> Vec<QueueItem> {
    let n = corpus.systems.len();
    let mut queue = Vec::with_capacity(n * corpus.segment_count());
    if n == 0 {
        return queue;
    }
    for doc in &corpus.documents {
        for (i, seg) in doc.segments.iter().enumerate() {
            for k in 0..n {
                queue.push(QueueItem {
                    system: (i + k) % n,
                    key: seg.key(),
                });
            }
        }
    }
    queue
}

#[derive(Debug, Clone)]
pub struct Session {
    pub session_id: String,
    pub judge_id: String,
    pub queue: Vec<QueueItem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPayload {
    pub system_id: String,
    pub doc_id: String,
    pub seg_id: u32,
    pub source: String,
    pub hypothesis: String,
    pub criteria: Vec<Criterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextItem {
    pub session_id: String,
    pub judge_id: String,
    pub progress: Progress,
    /// `None` once every queued item is rated.
    pub item: Option<ItemPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub record_id: RecordId,
    pub progress: Progress,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("malformed rating record: {0}")]
    BadRequest(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("corpus has no attached systems")]
    NoSystems,
    #[error("session {0:?} is declared twice")]
    DuplicateSession(String),
    #[error("no judges declared")]
    NoJudges,
}

pub struct AnnotationService {
    corpus: Corpus,
    rubric: Rubric,
    aliases: Vec<String>,
    sessions: HashMap<String, Session>,
    log: Mutex<RatingLog>,
}

impl AnnotationService {
    pub fn new(
        corpus: Corpus,
        rubric: Rubric,
        log: RatingLog,
        judges: &[JudgeSpec],
    ) -> Result<Self, ServiceError> {
        if corpus.systems.is_empty() {
            return Err(ServiceError::NoSystems);
        }
        if judges.is_empty() {
            return Err(ServiceError::NoJudges);
        }
        let queue = assignment_queue(&corpus);
        let mut sessions = HashMap::new();
        for j in judges {
            let session = Session {
                session_id: j.session_id.clone(),
                judge_id: j.judge_id.clone(),
                queue: queue.clone(),
            };
            if sessions.insert(j.session_id.clone(), session).is_some() {
                return Err(ServiceError::DuplicateSession(j.session_id.clone()));
            }
        }
        let aliases = (1..=corpus.systems.len()).map(|i| format!("s{i}")).collect();
        Ok(Self {
            corpus,
            rubric,
            aliases,
            sessions,
            log: Mutex::new(log),
        })
    }

    pub fn session(&self, session_id: &str) -> Result<&Session, ApiError> {
        self.sessions
            .get(session_id)
            .ok_or_else(|| ApiError::UnknownSession(session_id.to_string()))
    }

    fn lock(&self) -> Result<std::sync::MutexGuard<'_, RatingLog>, ApiError> {
        self.log
            .lock()
            .map_err(|_| ApiError::Internal("rating log lock poisoned".into()))
    }

    fn is_done(&self, log: &RatingLog, session: &Session, item: &QueueItem) -> bool {
        let system_id = &self.corpus.systems[item.system].system_id;
        log.is_rated(&session.judge_id, system_id, &item.key)
    }

    /// Position of the first unrated queue item.
    fn cursor(&self, log: &RatingLog, session: &Session) -> Option<usize> {
        session.queue.iter().position(|item| !self.is_done(log, session, item))
    }

    fn progress_of(&self, log: &RatingLog, session: &Session) -> Progress {
        Progress {
            done: session.queue.iter().filter(|i| self.is_done(log, session, i)).count(),
            total: session.queue.len(),
        }
    }

    fn payload(&self, item: &QueueItem) -> ItemPayload {
        let seg = self.corpus.segment(&item.key).expect("queued key exists");
        let system = &self.corpus.systems[item.system];
        let hypothesis = self
            .corpus
            .hypothesis(&system.system_id, &item.key)
            .expect("attached system covers every segment");
        ItemPayload {
            system_id: self.aliases[item.system].clone(),
            doc_id: item.key.doc_id.clone(),
            seg_id: item.key.seg_id,
            source: seg.source.clone(),
            hypothesis: hypothesis.to_string(),
            criteria: self.rubric.criteria().to_vec(),
        }
    }

    pub fn progress(&self, session_id: &str) -> Result<Progress, ApiError> {
        let session = self.session(session_id)?;
        let log = self.lock()?;
        Ok(self.progress_of(&log, session))
    }

    pub fn next_item(&self, session_id: &str) -> Result<NextItem, ApiError> {
        let session = self.session(session_id)?;
        let log = self.lock()?;
        let item = self
            .cursor(&log, session)
            .map(|pos| self.payload(&session.queue[pos]));
        Ok(NextItem {
            session_id: session.session_id.clone(),
            judge_id: session.judge_id.clone(),
            progress: self.progress_of(&log, session),
            item,
        })
    }

    /// Accepts a JSON `RatingRecord` for the session's current item.
    pub fn submit(&self, session_id: &str, body: &[u8]) -> Result<SubmitResponse, ApiError> {
        let session = self.session(session_id)?;
        let mut record: RatingRecord =
            serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        if record.judge_id != session.judge_id {
            return Err(ApiError::Unprocessable(format!(
                "judge_id {:?} does not belong to this session",
                record.judge_id
            )));
        }
        let mut log = self.lock()?;
        let pos = self
            .cursor(&log, session)
            .ok_or_else(|| ApiError::Conflict("session is complete".into()))?;
        let current = &session.queue[pos];
        let alias = &self.aliases[current.system];
        if record.system_id != *alias
            || record.doc_id != current.key.doc_id
            || record.seg_id != current.key.seg_id
        {
            return Err(ApiError::Conflict(format!(
                "current item is {alias}/{}, got {}/{}:{}",
                current.key, record.system_id, record.doc_id, record.seg_id
            )));
        }
        record.system_id = self.corpus.systems[current.system].system_id.clone();
        let record_id = log.validate_and_store(record, &self.corpus).map_err(|e| match e {
            HumanError::Io(e) => ApiError::Internal(e.to_string()),
            other => ApiError::Unprocessable(other.to_string()),
        })?;
        Ok(SubmitResponse {
            record_id,
            progress: self.progress_of(&log, session),
        })
    }
}

async fn next_handler(
    State(svc): State<Arc<AnnotationService>>,
    Path(id): Path<String>,
) -> Result<Json<NextItem>, ApiError> {
    svc.next_item(&id).map(Json)
}

async fn rating_handler(
    State(svc): State<Arc<AnnotationService>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SubmitResponse>, ApiError> {
    svc.submit(&id, &body).map(Json)
}

async fn progress_handler(
    State(svc): State<Arc<AnnotationService>>,
    Path(id): Path<String>,
) -> Result<Json<Progress>, ApiError> {
    svc.progress(&id).map(Json)
}

pub fn router(service: Arc<AnnotationService>) -> Router {
    Router::new()
        .route("/api/session/{id}/next", get(next_handler))
        .route("/api/session/{id}/rating", post(rating_handler))
        .route("/api/session/{id}/progress", get(progress_handler))
        .with_state(service)
}
