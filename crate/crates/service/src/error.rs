use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use simtutor_core::learner::{QuestionnaireError, StoreError};
use simtutor_core::session::{GradeError, SessionError};

/// Stable machine-readable error codes. Every 4xx/5xx body carries one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    InvalidName,
    Unauthorized,
    Forbidden,
    SessionNotFound,
    LearnerNotFound,
    WrongState,
    InsufficientBank,
    MissingAnswer,
    UnknownQuestion,
    InvalidChoice,
    MissingResponse,
    OutOfRangeResponse,
    UnknownItem,
    MalformedPayload,
    NotFound,
    MethodNotAllowed,
    StorageError,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 18] = [
        ErrorCode::InvalidName,
        ErrorCode::Unauthorized,
        ErrorCode::Forbidden,
        ErrorCode::SessionNotFound,
        ErrorCode::LearnerNotFound,
        ErrorCode::WrongState,
        ErrorCode::InsufficientBank,
        ErrorCode::MissingAnswer,
        ErrorCode::UnknownQuestion,
        ErrorCode::InvalidChoice,
        ErrorCode::MissingResponse,
        ErrorCode::OutOfRangeResponse,
        ErrorCode::UnknownItem,
        ErrorCode::MalformedPayload,
        ErrorCode::NotFound,
        ErrorCode::MethodNotAllowed,
        ErrorCode::StorageError,
        ErrorCode::Internal,
    ];

    pub fn status(self) -> StatusCode {
        use ErrorCode::*;
        match self {
            InvalidName => StatusCode::BAD_REQUEST,
            Unauthorized => StatusCode::UNAUTHORIZED,
            Forbidden => StatusCode::FORBIDDEN,
            SessionNotFound | LearnerNotFound | NotFound => StatusCode::NOT_FOUND,
            MethodNotAllowed => StatusCode::METHOD_NOT_ALLOWED,
            WrongState | InsufficientBank => StatusCode::CONFLICT,
            MissingAnswer | UnknownQuestion | InvalidChoice | MissingResponse
            | OutOfRangeResponse | UnknownItem | MalformedPayload => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            StorageError | Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// JSON error body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub detail: Option<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code,
            message: self.message,
            detail: self.detail,
        };
        (self.code.status(), Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => ApiError::new(
                ErrorCode::LearnerNotFound,
                format!("learner {id:?} not found"),
            ),
            other => ApiError::new(ErrorCode::StorageError, other.to_string()),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::WrongState { state, .. } => {
                ApiError::new(ErrorCode::WrongState, message).with_detail(state.to_string())
            }
            SessionError::Questionnaire(q) => {
                let (code, detail) = match q {
                    QuestionnaireError::MissingResponse(item) => {
                        (ErrorCode::MissingResponse, Some(item))
                    }
                    QuestionnaireError::OutOfRangeResponse { item, .. } => {
                        (ErrorCode::OutOfRangeResponse, Some(item))
                    }
                    QuestionnaireError::UnknownItem(item) => (ErrorCode::UnknownItem, Some(item)),
                    QuestionnaireError::Invalid(_) => (ErrorCode::Internal, None),
                };
                ApiError {
                    code,
                    message,
                    detail,
                }
            }
            SessionError::Grade(g) => {
                let (code, detail) = match g {
                    GradeError::MissingAnswer(q) => (ErrorCode::MissingAnswer, q),
                    GradeError::UnknownQuestion(q) => (ErrorCode::UnknownQuestion, q),
                    GradeError::ChoiceOutOfRange { question_id, .. } => {
                        (ErrorCode::InvalidChoice, question_id)
                    }
                };
                ApiError::new(code, message).with_detail(detail)
            }
            SessionError::InsufficientBank { concept_id, .. } => {
                ApiError::new(ErrorCode::InsufficientBank, message).with_detail(concept_id)
            }
            SessionError::Storage(s) => ApiError::new(ErrorCode::StorageError, s.to_string()),
            SessionError::Pedagogy(_) | SessionError::MissingStyle => {
                ApiError::new(ErrorCode::Internal, message)
            }
        }
    }
}
