#![allow(dead_code)]

use std::sync::Arc;

use reqwest::{Client, Method, StatusCode};
use serde_json::{json, Value};
use simtutor_core::learner::LearnerStore;
use simtutor_core::{sample, KnowledgeBase, PedagogyConfig};
use simtutor_service::{serve, AppState};

pub struct Server {
    pub base: String,
    pub kb: KnowledgeBase,
    pub client: Client,
    _data: tempfile::TempDir,
    _shutdown: tokio::sync::oneshot::Sender<()>,
}

pub async fn spawn() -> Server {
    spawn_with(sample::knowledge_base(), PedagogyConfig::default()).await
}

pub async fn spawn_with(kb: KnowledgeBase, pedagogy: PedagogyConfig) -> Server {
    let data = tempfile::tempdir().unwrap();
    let store = LearnerStore::open(data.path()).unwrap();
    let state = Arc::new(AppState::new(
        kb.clone(),
        pedagogy,
        sample::questionnaire(),
        store,
        3600,
    ));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    tokio::spawn(serve(listener, state, async {
        let _ = rx.await;
    }));
    Server {
        base: format!("http://{addr}"),
        kb,
        client: Client::new(),
        _data: data,
        _shutdown: tx,
    }
}

impl Server {
    pub async fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (StatusCode, Value) {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let text = resp.text().await.unwrap();
        let value = if text.is_empty() {
            Value::Null
        } else {
            serde_json::from_str(&text).unwrap()
        };
        (status, value)
    }

    pub async fn register(&self, name: &str) -> (String, String) {
        let (status, body) = self
            .call(
                Method::POST,
                "/api/learners",
                None,
                Some(json!({ "name": name })),
            )
            .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        (
            body["learner_id"].as_str().unwrap().to_string(),
            body["token"].as_str().unwrap().to_string(),
        )
    }

    pub async fn open_session(&self, token: &str) -> Value {
        let (status, body) = self
            .call(Method::POST, "/api/sessions", Some(token), None)
            .await;
        assert!(status.is_success(), "{status} {body}");
        body
    }

    pub async fn step(&self, token: &str, session: &str) -> Value {
        let (status, body) = self
            .call(
                Method::GET,
                &format!("/api/sessions/{session}/step"),
                Some(token),
                None,
            )
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body
    }

    pub async fn submit(&self, token: &str, session: &str, payload: Value) -> (StatusCode, Value) {
        self.call(
            Method::POST,
            &format!("/api/sessions/{session}/submit"),
            Some(token),
            Some(payload),
        )
        .await
    }

    /// Answers for the questions of a test step, chosen by the key.
    pub fn answers(&self, step: &Value, right: impl Fn(usize) -> bool) -> Value {
        let mut out = serde_json::Map::new();
        for (i, q) in step["questions"].as_array().unwrap().iter().enumerate() {
            let id = q["id"].as_str().unwrap();
            let question = self.kb.question(id).unwrap();
            let choice = if right(i) {
                question.correct_index
            } else {
                (question.correct_index + 1) % question.choices.len()
            };
            out.insert(id.to_string(), json!(choice));
        }
        json!({ "kind": "answers", "answers": out })
    }
}

/// Questionnaire payload that makes `style_prefix` dominant.
pub fn questionnaire_for(style_prefix: &str) -> Value {
    let responses: serde_json::Map<String, Value> = sample::questionnaire()
        .items()
        .iter()
        .map(|it| {
            let v = if it.id.starts_with(&format!("{style_prefix}-")) {
                5
            } else {
                2
            };
            (it.id.clone(), json!(v))
        })
        .collect();
    json!({ "kind": "questionnaire", "responses": responses })
}

/// Object keys anywhere in `value` that would reveal an answer key.
pub fn leaked_keys(value: &Value) -> Vec<String> {
    let mut found = Vec::new();
    let mut stack = vec![value];
    while let Some(v) = stack.pop() {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let lower = k.to_ascii_lowercase();
                    if lower.contains("correct")
                        || lower.contains("answer_key")
                        || lower == "answer"
                    {
                        found.push(k.clone());
                    }
                    stack.push(child);
                }
            }
            Value::Array(items) => stack.extend(items),
            _ => {}
        }
    }
    found
}
