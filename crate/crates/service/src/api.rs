//! Request and response bodies of the HTTP API.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use simtutor_core::learner::StyleProfile;
use simtutor_core::pedagogy::TestPhase;
use simtutor_core::session::{Decision, StateKind, TopicSummary};
use simtutor_core::{KnowledgeLevel, LearnerLevel, RuleTrace, Step};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterRequest {
    pub name: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoginResponse {
    pub learner_id: String,
    pub name: String,
    pub token: String,
    pub expires_at: DateTime<Utc>,
    /// False when the name matched an existing learner record.
    pub created: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionResponse {
    pub session_id: String,
    pub learner_id: String,
    pub resumed: bool,
    pub state: StateKind,
    pub step: Step,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepResponse {
    pub session_id: String,
    pub state: StateKind,
    pub step: Step,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubmitRequest {
    Questionnaire {
        responses: BTreeMap<String, i64>,
    },
    Answers {
        answers: BTreeMap<String, usize>,
    },
    /// Learner finished the presentation.
    Acknowledge,
}

/// Grading result. Carries per-question correctness but never the key.
#[derive(Debug, Clone, Serialize)]
pub struct GradedView {
    pub phase: TestPhase,
    pub concept_id: String,
    pub score: u8,
    pub level: KnowledgeLevel,
    pub earned_weight: u32,
    pub total_weight: u32,
    pub correct: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubmitResponse {
    Questionnaire {
        style: StyleProfile,
        state: StateKind,
        step: Step,
    },
    Graded {
        result: GradedView,
        #[serde(flatten)]
        decision: Decision,
        trace: RuleTrace,
        state: StateKind,
        step: Step,
    },
    Acknowledged {
        state: StateKind,
        step: Step,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConceptView {
    pub concept_id: String,
    pub title: String,
    pub topic_id: String,
    /// True once any test on the concept has been graded.
    pub attempted: bool,
    /// Latest post-test score, or the pre-test score that skipped the concept.
    pub score: Option<u8>,
    pub level: Option<KnowledgeLevel>,
    pub attempts: u32,
    pub mastered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelView {
    pub learner_id: String,
    pub name: String,
    pub style: Option<StyleProfile>,
    pub learner_level: LearnerLevel,
    pub concepts: Vec<ConceptView>,
    pub topics: Vec<TopicSummary>,
    pub asked_questions: usize,
    pub events: usize,
    pub transcript_entries: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaqEntry {
    pub question: &'static str,
    pub answer: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaqResponse {
    pub entries: &'static [FaqEntry],
}

pub static FAQ: &[FaqEntry] = &[
    FaqEntry {
        question: "Why do I fill in a questionnaire first?",
        answer: "Your answers decide which presentation method (film, dynamic view, game, puzzle or text) you see first for each concept.",
    },
    FaqEntry {
        question: "Why is there a test before I have learned anything?",
        answer: "The pre-test checks what you already know. A high score skips the concept; otherwise the concept is taught and then tested again.",
    },
    FaqEntry {
        question: "Will I see the same question twice?",
        answer: "No. Every question you have answered is recorded and never asked again, even when a concept is retaught.",
    },
    FaqEntry {
        question: "What happens if I fail the post-test?",
        answer: "The concept comes back with a different presentation method and fresh questions.",
    },
    FaqEntry {
        question: "What do the knowledge levels mean?",
        answer: "Scores are banded as Excellent (86-100), Very good (71-85), Good (51-70), Average (31-50) and Weak (0-30). Good or better counts as learned.",
    },
    FaqEntry {
        question: "Is my progress saved?",
        answer: "Yes. Your record is saved after every step; logging in again resumes where you left off.",
    },
];
