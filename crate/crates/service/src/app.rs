use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::rngs::OsRng;
use rand::RngCore;
use simtutor_core::clock::{Clock, SystemClock};
use simtutor_core::learner::{EventKind, LearnerStore, StoreError};
use simtutor_core::session::{concept_levels, topic_summaries};
use simtutor_core::{
    seed, KnowledgeBase, LearnerModel, PedagogyConfig, Questionnaire, Session, SessionState,
};
use tokio::sync::Mutex as AsyncMutex;

use crate::api::*;
use crate::auth::TokenStore;
use crate::error::{ApiError, ErrorCode};

type SessionHandle = Arc<AsyncMutex<Session>>;

#[derive(Default)]
struct Sessions {
    by_id: HashMap<String, SessionHandle>,
    by_learner: HashMap<String, String>,
}

/// Shared service state: the immutable content and configuration, the
/// learner store, live tokens and open sessions.
pub struct AppState {
    kb: Arc<KnowledgeBase>,
    pedagogy: Arc<PedagogyConfig>,
    questionnaire: Arc<Questionnaire>,
    store: Arc<LearnerStore>,
    tokens: TokenStore,
    clock: Arc<dyn Clock>,
    sessions: Mutex<Sessions>,
}

impl AppState {
    pub fn new(
        kb: KnowledgeBase,
        pedagogy: PedagogyConfig,
        questionnaire: Questionnaire,
        store: LearnerStore,
        token_ttl_secs: u64,
    ) -> Self {
        AppState {
            kb: Arc::new(kb),
            pedagogy: Arc::new(pedagogy),
            questionnaire: Arc::new(questionnaire),
            store: Arc::new(store),
            tokens: TokenStore::new(token_ttl_secs),
            clock: Arc::new(SystemClock),
            sessions: Mutex::new(Sessions::default()),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    fn authenticate(&self, headers: &HeaderMap) -> Result<String, ApiError> {
        let unauthorized =
            || ApiError::new(ErrorCode::Unauthorized, "missing or invalid bearer token");
        let value = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .ok_or_else(unauthorized)?;
        let token = value
            .strip_prefix("Bearer ")
            .ok_or_else(unauthorized)?
            .trim();
        self.tokens
            .verify(token, chrono::Utc::now())
            .ok_or_else(unauthorized)
    }

    fn owned_session(&self, learner_id: &str, session_id: &str) -> Result<SessionHandle, ApiError> {
        let sessions = self.sessions.lock().expect("session table poisoned");
        let handle = sessions.by_id.get(session_id).ok_or_else(|| {
            ApiError::new(
                ErrorCode::SessionNotFound,
                format!("no session {session_id:?}"),
            )
        })?;
        if sessions.by_learner.get(learner_id).map(String::as_str) != Some(session_id) {
            return Err(ApiError::new(
                ErrorCode::Forbidden,
                "this session belongs to another learner",
            ));
        }
        Ok(handle.clone())
    }
}

/// Learner id derived from a display name: lowercase ASCII letters and
/// digits joined by single dashes, or a hash when nothing survives.
pub fn learner_id_for(name: &str) -> String {
    let mut id = String::new();
    for ch in name.trim().chars().flat_map(char::to_lowercase) {
        if ch.is_ascii_alphanumeric() {
            id.push(ch);
        } else if !id.is_empty() && !id.ends_with('-') {
            id.push('-');
        }
    }
    while id.ends_with('-') {
        id.pop();
    }
    id.truncate(48);
    if id.is_empty() {
        format!("learner-{:016x}", seed::from_str(name.trim()))
    } else {
        id
    }
}

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(
            ErrorCode::MalformedPayload,
            format!("malformed request body: {e}"),
        )
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/learners", post(register))
        .route("/api/learners/{id}/model", get(learner_model))
        .route("/api/sessions", post(open_session))
        .route("/api/sessions/{id}/step", get(next_step))
        .route("/api/sessions/{id}/submit", post(submit))
        .route("/api/faq", get(faq))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(
                ErrorCode::MethodNotAllowed,
                "method not allowed on this endpoint",
            )
        })
        .with_state(state)
}

async fn register(
    State(app): State<Arc<AppState>>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let req: RegisterRequest = parse(&body)?;
    let name = req.name.trim();
    if name.is_empty() || name.chars().count() > 100 {
        return Err(ApiError::new(
            ErrorCode::InvalidName,
            "name must be 1 to 100 characters",
        ));
    }
    let learner_id = learner_id_for(name);
    let (model, created) = match app.store.load(&learner_id) {
        Ok(m) => (m, false),
        Err(StoreError::NotFound(_)) => {
            let m = LearnerModel::new(learner_id.clone(), name);
            app.store.save(&m)?;
            (m, true)
        }
        Err(e) => return Err(e.into()),
    };
    let issued = app.tokens.issue(&learner_id, chrono::Utc::now());
    Ok((
        StatusCode::CREATED,
        Json(LoginResponse {
            learner_id,
            name: model.name().to_string(),
            token: issued.token,
            expires_at: issued.expires_at,
            created,
        }),
    ))
}

async fn open_session(
    State(app): State<Arc<AppState>>,
    headers: HeaderMap,
) -> Result<impl IntoResponse, ApiError> {
    let learner_id = app.authenticate(&headers)?;

    let existing = {
        let sessions = app.sessions.lock().expect("session table poisoned");
        sessions
            .by_learner
            .get(&learner_id)
            .and_then(|sid| sessions.by_id.get(sid).map(|h| (sid.clone(), h.clone())))
    };
    if let Some((session_id, handle)) = existing {
        let session = handle.lock().await;
        if !session.is_completed() {
            return Ok((
                StatusCode::OK,
                Json(SessionResponse {
                    session_id,
                    learner_id,
                    resumed: true,
                    state: session.state().kind(),
                    step: session.current_step(),
                }),
            ));
        }
    }

    let model = app.store.load(&learner_id)?;
    let session = Session::start(
        model,
        app.kb.clone(),
        app.pedagogy.clone(),
        app.questionnaire.clone(),
        app.clock.clone(),
    )
    .with_sink(app.store.clone());
    app.store.save(session.model())?;
    let mut bytes = [0u8; 12];
    OsRng.fill_bytes(&mut bytes);
    let session_id: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    let response = SessionResponse {
        session_id: session_id.clone(),
        learner_id: learner_id.clone(),
        resumed: false,
        state: session.state().kind(),
        step: session.current_step(),
    };
    let mut sessions = app.sessions.lock().expect("session table poisoned");
    if let Some(old) = sessions.by_learner.insert(learner_id, session_id.clone()) {
        sessions.by_id.remove(&old);
    }
    sessions
        .by_id
        .insert(session_id, Arc::new(AsyncMutex::new(session)));
    Ok((StatusCode::CREATED, Json(response)))
}

async fn next_step(
    State(app): State<Arc<AppState>>,
    Path(session_id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<StepResponse>, ApiError> {
    let learner_id = app.authenticate(&headers)?;
    let handle = app.owned_session(&learner_id, &session_id)?;
    let mut session = handle.lock().await;
    if session.state() == &SessionState::SelectingConcept {
        session.advance()?;
    }
    Ok(Json(StepResponse {
        session_id,
        state: session.state().kind(),
        step: session.current_step(),
    }))
}

async fn submit(
    State(app): State<Arc<AppState>>,
    Path(session_id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<SubmitResponse>, ApiError> {
    let learner_id = app.authenticate(&headers)?;
    let handle = app.owned_session(&learner_id, &session_id)?;
    let req: SubmitRequest = parse(&body)?;
    let mut session = handle.lock().await;
    let response = match req {
        SubmitRequest::Questionnaire { responses } => {
            let style = session.submit_questionnaire(&responses)?;
            SubmitResponse::Questionnaire {
                style,
                state: session.state().kind(),
                step: session.current_step(),
            }
        }
        SubmitRequest::Answers { answers } => {
            let out = session.submit_answers(&answers)?;
            let g = out.graded;
            SubmitResponse::Graded {
                result: GradedView {
                    phase: g.phase,
                    concept_id: g.concept_id,
                    score: g.score,
                    level: g.level,
                    earned_weight: g.earned_weight,
                    total_weight: g.total_weight,
                    correct: g.correct,
                },
                decision: out.decision,
                trace: out.trace,
                state: session.state().kind(),
                step: session.current_step(),
            }
        }
        SubmitRequest::Acknowledge => {
            if !matches!(session.state(), SessionState::Presenting { .. }) {
                return Err(ApiError::new(
                    ErrorCode::WrongState,
                    format!(
                        "cannot acknowledge a presentation while the session is in state `{}`",
                        session.state().kind()
                    ),
                )
                .with_detail(session.state().kind().to_string()));
            }
            session.advance()?;
            SubmitResponse::Acknowledged {
                state: session.state().kind(),
                step: session.current_step(),
            }
        }
    };
    Ok(Json(response))
}

async fn learner_model(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<ModelView>, ApiError> {
    let learner_id = app.authenticate(&headers)?;
    if learner_id != id {
        return Err(ApiError::new(
            ErrorCode::Forbidden,
            "a learner may only read their own record",
        ));
    }
    let model = app.store.load(&id)?;
    let bar = app.pedagogy.mastery_bar;
    let levels = concept_levels(&model);
    let concepts =
        app.kb
            .curriculum_order()
            .iter()
            .filter_map(|cid| app.kb.concept(cid))
            .map(|c| {
                let k = model.knowledge_of(&c.id);
                let tested = model.events().iter().any(|e| match &e.kind {
                    EventKind::PreTest { concept_id, .. }
                    | EventKind::PostTest { concept_id, .. } => *concept_id == c.id,
                    _ => false,
                });
                ConceptView {
                    concept_id: c.id.clone(),
                    title: c.title.clone(),
                    topic_id: app
                        .kb
                        .topic_of(&c.id)
                        .map(|t| t.id.clone())
                        .unwrap_or_default(),
                    attempted: tested || k.is_some(),
                    score: k.map(|k| k.last_score),
                    level: levels.get(&c.id).copied(),
                    attempts: k.map_or(0, |k| k.attempts),
                    mastered: model.has_mastered(&c.id, bar),
                }
            })
            .collect();
    Ok(Json(ModelView {
        learner_id: model.learner_id().to_string(),
        name: model.name().to_string(),
        style: model.style().cloned(),
        learner_level: model.level(),
        concepts,
        topics: topic_summaries(&app.kb, &model),
        asked_questions: model.asked_questions().len(),
        events: model.events().len(),
        transcript_entries: model.transcript().len(),
    }))
}

async fn faq() -> Json<FaqResponse> {
    Json(FaqResponse { entries: FAQ })
}

#[cfg(test)]
mod tests {
    use super::learner_id_for;

    #[test]
    fn learner_ids_are_safe_slugs() {
        assert_eq!(learner_id_for("Ada Lovelace"), "ada-lovelace");
        assert_eq!(learner_id_for("  ada  "), "ada");
        assert_eq!(learner_id_for("O'Brien, Pat!"), "o-brien-pat");
        let hashed = learner_id_for("李雷");
        assert!(hashed.starts_with("learner-") && hashed.len() == 24);
        assert_eq!(hashed, learner_id_for("李雷"));
    }
}
