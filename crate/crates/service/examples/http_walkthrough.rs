//! Starts the service on a free port with a throwaway data directory and
//! walks one learner through a concept over HTTP, printing each exchange.
//!
//! ```sh
//! cargo run -p simtutor-service --example http_walkthrough
//! ```

use std::sync::Arc;

use serde_json::{json, Value};
use simtutor_core::learner::LearnerStore;
use simtutor_core::{sample, PedagogyConfig};
use simtutor_service::{serve, AppState};

struct Client {
    base: String,
    http: reqwest::Client,
    token: Option<String>,
}

impl Client {
    async fn send(&self, method: reqwest::Method, path: &str, body: Option<Value>) -> Value {
        let mut req = self
            .http
            .request(method.clone(), format!("{}{path}", self.base));
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = &body {
            req = req.json(b);
        }
        let resp = req.send().await.expect("server is up");
        let status = resp.status();
        let value: Value = resp.json().await.expect("JSON body");
        println!("{method} {path} -> {status}");
        value
    }
}

#[tokio::main]
async fn main() {
    let data = tempfile::tempdir().unwrap();
    let kb = sample::knowledge_base();
    let state = AppState::new(
        kb.clone(),
        PedagogyConfig::default(),
        sample::questionnaire(),
        LearnerStore::open(data.path()).unwrap(),
        3600,
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(serve(listener, Arc::new(state), std::future::pending()));

    let mut c = Client {
        base,
        http: reqwest::Client::new(),
        token: None,
    };
    let login = c
        .send(
            reqwest::Method::POST,
            "/api/learners",
            Some(json!({ "name": "Noor" })),
        )
        .await;
    c.token = login["token"].as_str().map(String::from);
    let learner = login["learner_id"].as_str().unwrap().to_string();

    let opened = c.send(reqwest::Method::POST, "/api/sessions", None).await;
    let sid = opened["session_id"].as_str().unwrap().to_string();
    let submit = format!("/api/sessions/{sid}/submit");

    let responses: serde_json::Map<String, Value> = opened["step"]["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| {
            let id = i["id"].as_str().unwrap();
            (
                id.to_string(),
                json!(if id.starts_with("eia-") { 5 } else { 2 }),
            )
        })
        .collect();
    let style = c
        .send(
            reqwest::Method::POST,
            &submit,
            Some(json!({ "kind": "questionnaire", "responses": responses })),
        )
        .await;
    println!("  dominant style: {}", style["style"]["dominant"]);

    let step = c
        .send(
            reqwest::Method::GET,
            &format!("/api/sessions/{sid}/step"),
            None,
        )
        .await;
    let questions = step["step"]["questions"].as_array().unwrap();
    println!(
        "  pre-test on {} with {} questions",
        step["step"]["concept_id"],
        questions.len()
    );
    println!(
        "  first question: {}",
        serde_json::to_string(&questions[0]).unwrap()
    );

    // Answer every question with the first choice.
    let answers: serde_json::Map<String, Value> = questions
        .iter()
        .map(|q| (q["id"].as_str().unwrap().to_string(), json!(0)))
        .collect();
    let graded = c
        .send(
            reqwest::Method::POST,
            &submit,
            Some(json!({ "kind": "answers", "answers": answers })),
        )
        .await;
    println!(
        "  score {} ({}) -> {} {}",
        graded["result"]["score"], graded["result"]["level"], graded["decision"], graded["method"]
    );
    for f in graded["trace"].as_array().unwrap() {
        println!(
            "    [{}] {}",
            f["rule"].as_str().unwrap(),
            f["justification"].as_str().unwrap()
        );
    }

    if graded["step"]["step"] == "presentation" {
        println!("  presenting {}", graded["step"]["asset"]);
        let next = c
            .send(
                reqwest::Method::POST,
                &submit,
                Some(json!({ "kind": "acknowledge" })),
            )
            .await;
        println!(
            "  next: {} with {} questions",
            next["state"],
            next["step"]["questions"].as_array().map_or(0, Vec::len)
        );
    }

    let conflict = c
        .send(
            reqwest::Method::POST,
            &submit,
            Some(json!({ "kind": "acknowledge" })),
        )
        .await;
    println!("  {}", conflict);

    let model = c
        .send(
            reqwest::Method::GET,
            &format!("/api/learners/{learner}/model"),
            None,
        )
        .await;
    println!(
        "{}",
        serde_json::to_string_pretty(&model["concepts"][0]).unwrap()
    );
}
