//! The tutoring loop as an explicit state machine.
//!
//! ```text
//! AwaitQuestionnaire ──submit──▶ SelectingConcept ──advance──▶ AwaitPreTest ──submit──▶ Presenting
//!                                  ▲    │                         │ skip / remediate        │ advance (ack)
//!                                  │    └──advance──▶ Completed    ▼                         ▼
//!                                  └─────────────────────── SelectingConcept ◀──submit── AwaitPostTest
//! ```
//!
//! Every operation either commits a transition (appending one transcript
//! entry and persisting the learner model) or fails leaving the session
//! untouched.

pub mod audit;
mod grading;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::kb::{Difficulty, EducationMethod, KnowledgeBase};
use crate::learner::{
    KnowledgeLevel, LearnerLevel, LearnerModel, ModelSink, Questionnaire, QuestionnaireError,
    Responses, StoreError, StyleProfile, RESPONSE_MAX, RESPONSE_MIN,
};
use crate::pedagogy::{
    choose_presentation, gate_pretest, next_concept, plan_test, prerequisite_statuses,
    GateDecision, NextConcept, PedagogyConfig, PedagogyError, Rule, RuleTrace, TestPhase, TestPlan,
};

pub use grading::{grade_test, percent_score, Answers, GradeError, GradedTest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionState {
    AwaitQuestionnaire,
    SelectingConcept,
    AwaitPreTest {
        plan: TestPlan,
    },
    Presenting {
        concept_id: String,
        method: EducationMethod,
        asset: String,
        round: u32,
    },
    AwaitPostTest {
        plan: TestPlan,
    },
    Completed,
}

/// Payload-free discriminant of [`SessionState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    AwaitQuestionnaire,
    SelectingConcept,
    AwaitPreTest,
    Presenting,
    AwaitPostTest,
    Completed,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

impl StateKind {
    /// The only transitions the engine may take.
    pub fn can_move_to(self, to: StateKind) -> bool {
        use StateKind::*;
        matches!(
            (self, to),
            (AwaitQuestionnaire, SelectingConcept)
                | (SelectingConcept, AwaitPreTest)
                | (SelectingConcept, Completed)
                | (AwaitPreTest, Presenting)
                | (AwaitPreTest, SelectingConcept)
                | (Presenting, AwaitPostTest)
                | (AwaitPostTest, SelectingConcept)
        )
    }
}

impl SessionState {
    pub fn kind(&self) -> StateKind {
        match self {
            SessionState::AwaitQuestionnaire => StateKind::AwaitQuestionnaire,
            SessionState::SelectingConcept => StateKind::SelectingConcept,
            SessionState::AwaitPreTest { .. } => StateKind::AwaitPreTest,
            SessionState::Presenting { .. } => StateKind::Presenting,
            SessionState::AwaitPostTest { .. } => StateKind::AwaitPostTest,
            SessionState::Completed => StateKind::Completed,
        }
    }

    pub fn pending_plan(&self) -> Option<&TestPlan> {
        match self {
            SessionState::AwaitPreTest { plan } | SessionState::AwaitPostTest { plan } => {
                Some(plan)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Start,
    SubmitQuestionnaire,
    Advance,
    SubmitAnswers,
}

/// One committed operation. Transcripts are append-only and live in the
/// learner record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub operation: Operation,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<RuleTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graded: Option<GradedTest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemView {
    pub id: String,
    pub prompt: String,
}

/// A question as shown to the learner. Deliberately has no answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    pub id: String,
    pub section_id: String,
    pub difficulty: Difficulty,
    pub weight: u32,
    pub body: String,
    pub choices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: String,
    pub title: String,
    pub score: u8,
    pub level: KnowledgeLevel,
}

/// What the client should render next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Questionnaire {
        items: Vec<ItemView>,
        scale_min: i64,
        scale_max: i64,
    },
    /// Transient; resolved by the next `advance`.
    SelectingConcept,
    Test {
        phase: TestPhase,
        concept_id: String,
        concept_title: String,
        questions: Vec<QuestionView>,
    },
    Presentation {
        concept_id: String,
        concept_title: String,
        method: EducationMethod,
        asset: String,
        round: u32,
    },
    Completed {
        learner_level: LearnerLevel,
        topics: Vec<TopicSummary>,
    },
}

/// Decision reached after a graded test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    /// Pre-test high enough; the concept is recorded as known.
    Skip,
    /// Pre-test leads to a presentation with this method.
    Train { method: EducationMethod },
    /// Pre-test too low; this prerequisite is taught next.
    Remediate { prerequisite: String },
    /// Post-test reached the mastery bar.
    Mastered,
    /// Post-test below the mastery bar; the concept comes back.
    Retrain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub graded: GradedTest,
    pub decision: Decision,
    pub trace: RuleTrace,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("cannot {operation} while the session is in state `{state}`")]
    WrongState {
        operation: &'static str,
        state: StateKind,
    },
    #[error(transparent)]
    Questionnaire(#[from] QuestionnaireError),
    #[error(transparent)]
    Grade(#[from] GradeError),
    #[error("question bank exhausted for concept {concept_id:?}: {reason}")]
    InsufficientBank { concept_id: String, reason: String },
    #[error(transparent)]
    Pedagogy(PedagogyError),
    #[error("learner has no style profile")]
    MissingStyle,
    #[error(transparent)]
    Storage(#[from] StoreError),
}

impl From<PedagogyError> for SessionError {
    fn from(e: PedagogyError) -> Self {
        match e {
            PedagogyError::InsufficientBank { concept_id, reason } => {
                SessionError::InsufficientBank { concept_id, reason }
            }
            other => SessionError::Pedagogy(other),
        }
    }
}

/// Mutable part of a session; cloned per operation and swapped in on success.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Core {
    model: LearnerModel,
    state: SessionState,
    /// Concept that must be selected next (retained after a failed
    /// post-test, or a prerequisite chosen for remediation).
    focus: Option<String>,
}

/// Binds one learner to one traversal of the curriculum.
pub struct Session {
    kb: Arc<KnowledgeBase>,
    config: Arc<PedagogyConfig>,
    questionnaire: Arc<Questionnaire>,
    clock: Arc<dyn Clock>,
    sink: Option<Arc<dyn ModelSink>>,
    core: Core,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("learner", &self.core.model.learner_id())
            .field("state", &self.core.state.kind())
            .field("focus", &self.core.focus)
            .finish()
    }
}

/// Snapshot used to compare sessions before and after an operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub model: LearnerModel,
    pub state: SessionState,
    pub focus: Option<String>,
}

impl Session {
    /// Opens a session. A learner without a style profile starts at the
    /// questionnaire; a returning learner goes straight to concept selection.
    pub fn start(
        model: LearnerModel,
        kb: Arc<KnowledgeBase>,
        config: Arc<PedagogyConfig>,
        questionnaire: Arc<Questionnaire>,
        clock: Arc<dyn Clock>,
    ) -> Self {
        let state = if model.style().is_some() {
            SessionState::SelectingConcept
        } else {
            SessionState::AwaitQuestionnaire
        };
        let mut session = Session {
            kb,
            config,
            questionnaire,
            clock,
            sink: None,
            core: Core {
                model,
                state,
                focus: None,
            },
        };
        let entry = session.entry(&session.core, Operation::Start, Vec::new(), None);
        session.core.model.push_transcript(entry);
        session
    }

    /// Persists the model after every committed transition.
    pub fn with_sink(mut self, sink: Arc<dyn ModelSink>) -> Self {
        self.sink = Some(sink);
        self
    }

    pub fn state(&self) -> &SessionState {
        &self.core.state
    }

    pub fn model(&self) -> &LearnerModel {
        &self.core.model
    }

    pub fn into_model(self) -> LearnerModel {
        self.core.model
    }

    pub fn focus(&self) -> Option<&str> {
        self.core.focus.as_deref()
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn config(&self) -> &PedagogyConfig {
        &self.config
    }

    pub fn questionnaire(&self) -> &Questionnaire {
        &self.questionnaire
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            model: self.core.model.clone(),
            state: self.core.state.clone(),
            focus: self.core.focus.clone(),
        }
    }

    pub fn is_completed(&self) -> bool {
        self.core.state == SessionState::Completed
    }

    fn entry(
        &self,
        core: &Core,
        operation: Operation,
        traces: Vec<RuleTrace>,
        graded: Option<GradedTest>,
    ) -> TranscriptEntry {
        TranscriptEntry {
            seq: core.model.transcript().len() as u64,
            at: self.clock.now(),
            operation,
            state: core.state.clone(),
            traces,
            graded,
        }
    }

    fn commit(
        &mut self,
        mut next: Core,
        operation: Operation,
        traces: Vec<RuleTrace>,
        graded: Option<GradedTest>,
    ) -> Result<(), SessionError> {
        let entry = self.entry(&next, operation, traces, graded);
        next.model.push_transcript(entry);
        if let Some(sink) = &self.sink {
            sink.persist(&next.model)?;
        }
        self.core = next;
        Ok(())
    }

    fn wrong_state(&self, operation: &'static str) -> SessionError {
        SessionError::WrongState {
            operation,
            state: self.core.state.kind(),
        }
    }

    /// Describes the current state for a client, without changing it.
    pub fn current_step(&self) -> Step {
        match &self.core.state {
            SessionState::AwaitQuestionnaire => Step::Questionnaire {
                items: self
                    .questionnaire
                    .items()
                    .iter()
                    .map(|i| ItemView {
                        id: i.id.clone(),
                        prompt: i.prompt.clone(),
                    })
                    .collect(),
                scale_min: RESPONSE_MIN,
                scale_max: RESPONSE_MAX,
            },
            SessionState::SelectingConcept => Step::SelectingConcept,
            SessionState::AwaitPreTest { plan } | SessionState::AwaitPostTest { plan } => {
                self.test_step(plan)
            }
            SessionState::Presenting {
                concept_id,
                method,
                asset,
                round,
            } => Step::Presentation {
                concept_id: concept_id.clone(),
                concept_title: self.concept_title(concept_id),
                method: *method,
                asset: asset.clone(),
                round: *round,
            },
            SessionState::Completed => Step::Completed {
                learner_level: self.core.model.level(),
                topics: self.topic_summaries(),
            },
        }
    }

    fn concept_title(&self, concept_id: &str) -> String {
        self.kb
            .concept(concept_id)
            .map(|c| c.title.clone())
            .unwrap_or_default()
    }

    fn test_step(&self, plan: &TestPlan) -> Step {
        Step::Test {
            phase: plan.phase,
            concept_id: plan.concept_id.clone(),
            concept_title: self.concept_title(&plan.concept_id),
            questions: plan
                .question_ids
                .iter()
                .filter_map(|id| self.kb.question(id))
                .map(|q| QuestionView {
                    id: q.id.clone(),
                    section_id: q.section_id.clone(),
                    difficulty: q.difficulty,
                    weight: q.weight,
                    body: q.body.clone(),
                    choices: q.choices.clone(),
                })
                .collect(),
        }
    }

    /// Per-topic aggregate scores for the current model.
    pub fn topic_summaries(&self) -> Vec<TopicSummary> {
        topic_summaries(&self.kb, &self.core.model)
    }

    /// Scores the questionnaire and stores the style profile.
    pub fn submit_questionnaire(
        &mut self,
        responses: &Responses,
    ) -> Result<StyleProfile, SessionError> {
        if self.core.state != SessionState::AwaitQuestionnaire {
            return Err(self.wrong_state("submit the questionnaire"));
        }
        let profile = self.questionnaire.score(responses)?;
        let mut next = self.core.clone();
        next.model.set_style(profile.clone(), self.clock.now());
        next.state = SessionState::SelectingConcept;
        self.commit(next, Operation::SubmitQuestionnaire, Vec::new(), None)?;
        Ok(profile)
    }

    /// Moves out of `SelectingConcept` (planning a pre-test or completing) or
    /// out of `Presenting` (planning the post-test), returning the new step.
    pub fn advance(&mut self) -> Result<Step, SessionError> {
        match &self.core.state {
            SessionState::SelectingConcept => self.select_concept(),
            SessionState::Presenting { concept_id, .. } => {
                let concept_id = concept_id.clone();
                let mut next = self.core.clone();
                let seed = next.model.next_plan_seed();
                let (plan, trace) = plan_test(
                    &self.kb,
                    &next.model,
                    &concept_id,
                    TestPhase::PostTest,
                    &self.config.level_mix,
                    seed,
                )?;
                next.state = SessionState::AwaitPostTest { plan };
                self.commit(next, Operation::Advance, vec![trace], None)?;
                Ok(self.current_step())
            }
            _ => Err(self.wrong_state("advance")),
        }
    }

    fn select_concept(&mut self) -> Result<Step, SessionError> {
        let bar = self.config.mastery_bar;
        let mut next = self.core.clone();
        let mut trace = RuleTrace::new();
        let mut target = None;
        if let Some(focus) = next.focus.take() {
            if !next.model.has_mastered(&focus, bar) {
                trace.fire(
                    Rule::RetainConcept,
                    format!(
                        "{focus:?} was selected by the previous decision and is not yet mastered"
                    ),
                );
                next.focus = Some(focus.clone());
                target = Some(focus);
            }
        }
        let target = match target {
            Some(t) => t,
            None => {
                let (choice, t) = next_concept(&self.kb, &next.model, bar);
                trace.extend(t);
                match choice {
                    NextConcept::Concept(id) => id,
                    NextConcept::Done => {
                        next.state = SessionState::Completed;
                        self.commit(next, Operation::Advance, vec![trace], None)?;
                        return Ok(self.current_step());
                    }
                }
            }
        };
        let seed = next.model.next_plan_seed();
        let (plan, plan_trace) = plan_test(
            &self.kb,
            &next.model,
            &target,
            TestPhase::PreTest,
            &self.config.level_mix,
            seed,
        )?;
        next.state = SessionState::AwaitPreTest { plan };
        self.commit(next, Operation::Advance, vec![trace, plan_trace], None)?;
        Ok(self.current_step())
    }

    /// Grades the pending test and applies the gate (pre-test) or mastery
    /// bar (post-test).
    pub fn submit_answers(&mut self, answers: &Answers) -> Result<SubmitOutcome, SessionError> {
        let plan = match &self.core.state {
            SessionState::AwaitPreTest { plan } | SessionState::AwaitPostTest { plan } => plan,
            _ => return Err(self.wrong_state("submit answers")),
        };
        let graded = grade_test(&self.kb, plan, answers)?;
        let concept_id = plan.concept_id.clone();
        let concept = self
            .kb
            .concept(&concept_id)
            .ok_or_else(|| PedagogyError::UnknownConcept(concept_id.clone()))?;
        let bar = self.config.mastery_bar;
        let now = self.clock.now();

        let mut next = self.core.clone();
        next.model.record_asked(&graded.question_ids);

        let (decision, trace) = match graded.phase {
            TestPhase::PreTest => {
                next.model.record_pretest(&concept_id, graded.score, now);
                let prereqs = prerequisite_statuses(concept, &next.model, bar);
                let (gate, mut trace) =
                    gate_pretest(graded.score, &self.config.thresholds, &prereqs);
                match gate {
                    GateDecision::Skip => {
                        next.model
                            .update_after_posttest(&self.kb, &concept_id, graded.score.into(), now)
                            .expect("concept exists");
                        if next.focus.as_deref() == Some(concept_id.as_str()) {
                            next.focus = None;
                        }
                        next.state = SessionState::SelectingConcept;
                        (Decision::Skip, trace)
                    }
                    GateDecision::Train => {
                        let style = next
                            .model
                            .style()
                            .ok_or(SessionError::MissingStyle)?
                            .dominant;
                        let round = next.model.training_rounds(&concept_id);
                        let attempt = if self.config.rotate_on_retrain {
                            round
                        } else {
                            0
                        };
                        let (method, t) =
                            choose_presentation(style, attempt, &self.config.preferences, concept)?;
                        trace.extend(t);
                        next.model.record_presentation(&concept_id, method, now);
                        next.state = SessionState::Presenting {
                            concept_id: concept_id.clone(),
                            method,
                            asset: concept.assets[&method].clone(),
                            round,
                        };
                        (Decision::Train { method }, trace)
                    }
                    GateDecision::Remediate(prerequisite) => {
                        next.focus = Some(prerequisite.clone());
                        next.state = SessionState::SelectingConcept;
                        (Decision::Remediate { prerequisite }, trace)
                    }
                }
            }
            TestPhase::PostTest => {
                next.model
                    .update_after_posttest(&self.kb, &concept_id, graded.score.into(), now)
                    .expect("concept exists");
                let mut trace = RuleTrace::new();
                next.state = SessionState::SelectingConcept;
                if graded.level >= bar {
                    trace.fire(
                        Rule::MasteryBar,
                        format!(
                            "post-test score {} ({}) reaches the mastery bar `{bar}`",
                            graded.score, graded.level
                        ),
                    );
                    if next.focus.as_deref() == Some(concept_id.as_str()) {
                        next.focus = None;
                    }
                    (Decision::Mastered, trace)
                } else {
                    trace.fire(
                        Rule::MasteryBar,
                        format!(
                            "post-test score {} ({}) is below the mastery bar `{bar}`",
                            graded.score, graded.level
                        ),
                    );
                    trace.fire(
                        Rule::RetainConcept,
                        format!(
                            "{concept_id:?} is retrained next with a different method and fresh questions"
                        ),
                    );
                    next.focus = Some(concept_id.clone());
                    (Decision::Retrain, trace)
                }
            }
        };

        self.commit(
            next,
            Operation::SubmitAnswers,
            vec![trace.clone()],
            Some(graded.clone()),
        )?;
        Ok(SubmitOutcome {
            graded,
            decision,
            trace,
        })
    }
}

/// Per-topic aggregate scores of `model`.
pub fn topic_summaries(kb: &KnowledgeBase, model: &LearnerModel) -> Vec<TopicSummary> {
    kb.topics()
        .iter()
        .map(|t| {
            let score = model.aggregate_topic_knowledge(t);
            TopicSummary {
                topic_id: t.id.clone(),
                title: t.title.clone(),
                score,
                level: crate::learner::band(score),
            }
        })
        .collect()
}

/// Answers every question of `plan` correctly. Test and simulation helper.
pub fn answer_key(kb: &KnowledgeBase, plan: &TestPlan) -> Answers {
    plan.question_ids
        .iter()
        .map(|id| (id.clone(), kb.question(id).map_or(0, |q| q.correct_index)))
        .collect()
}

/// Answers every question of `plan` incorrectly. Test and simulation helper.
pub fn wrong_answers(kb: &KnowledgeBase, plan: &TestPlan) -> Answers {
    plan.question_ids
        .iter()
        .map(|id| {
            let q = kb.question(id).expect("planned question exists");
            (id.clone(), (q.correct_index + 1) % q.choices.len())
        })
        .collect()
}

/// Map from concept id to the knowledge level reached, for reporting.
pub fn concept_levels(model: &LearnerModel) -> BTreeMap<String, KnowledgeLevel> {
    model
        .concept_knowledge()
        .iter()
        .map(|(k, v)| (k.clone(), v.level))
        .collect()
}
