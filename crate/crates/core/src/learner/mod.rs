//! Learner model: style profile, knowledge bands, learner level and history.

mod questionnaire;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{EducationMethod, KnowledgeBase, Topic};
use crate::session::TranscriptEntry;

pub use questionnaire::{
    score_questionnaire, Questionnaire, QuestionnaireError, QuestionnaireItem, Responses,
    StyleProfile, RESPONSE_MAX, RESPONSE_MIN,
};
pub use store::{LearnerStore, ModelSink, StoreError};

/// Current learner record layout version.
pub const SCHEMA_VERSION: u32 = 1;

/// Number of most recent post-test scores averaged into the learner level.
pub const LEVEL_WINDOW: usize = 5;

/// The five learning styles. Declaration order is the tie-break order for
/// the dominant style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningStyle {
    /// Sensation seeking.
    Ss,
    /// Goal-oriented achiever.
    Goa,
    /// Emotionally intelligent achiever.
    Eia,
    /// Conscientious achiever.
    Ca,
    /// Deep learning achiever.
    Dla,
}

impl LearningStyle {
    pub const ALL: [LearningStyle; 5] = [
        LearningStyle::Ss,
        LearningStyle::Goa,
        LearningStyle::Eia,
        LearningStyle::Ca,
        LearningStyle::Dla,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LearningStyle::Ss => "ss",
            LearningStyle::Goa => "goa",
            LearningStyle::Eia => "eia",
            LearningStyle::Ca => "ca",
            LearningStyle::Dla => "dla",
        }
    }
}

impl fmt::Display for LearningStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Score band of a single test. Ordered `Weak < Average < Good < VeryGood < Excellent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeLevel {
    Weak,
    Average,
    Good,
    VeryGood,
    Excellent,
}

impl KnowledgeLevel {
    pub const ALL: [KnowledgeLevel; 5] = [
        KnowledgeLevel::Weak,
        KnowledgeLevel::Average,
        KnowledgeLevel::Good,
        KnowledgeLevel::VeryGood,
        KnowledgeLevel::Excellent,
    ];

    /// Lowest score in the band.
    pub fn lower_bound(self) -> u8 {
        match self {
            KnowledgeLevel::Weak => 0,
            KnowledgeLevel::Average => 31,
            KnowledgeLevel::Good => 51,
            KnowledgeLevel::VeryGood => 71,
            KnowledgeLevel::Excellent => 86,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeLevel::Weak => "weak",
            KnowledgeLevel::Average => "average",
            KnowledgeLevel::Good => "good",
            KnowledgeLevel::VeryGood => "very_good",
            KnowledgeLevel::Excellent => "excellent",
        }
    }
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coarse ability tier. Ordered `Weak < SlowLearner < Smart < Genius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerLevel {
    Weak,
    SlowLearner,
    Smart,
    Genius,
}

impl LearnerLevel {
    pub const ALL: [LearnerLevel; 4] = [
        LearnerLevel::Weak,
        LearnerLevel::SlowLearner,
        LearnerLevel::Smart,
        LearnerLevel::Genius,
    ];
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnerError {
    #[error("score {0} is outside 0..=100")]
    OutOfRange(i64),
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
}

/// Maps a 0..=100 score onto its knowledge band:
/// 86-100 Excellent, 71-85 Very good, 51-70 Good, 31-50 Average, 0-30 Weak.
pub fn classify_knowledge(score: i64) -> Result<KnowledgeLevel, LearnerError> {
    match score {
        86..=100 => Ok(KnowledgeLevel::Excellent),
        71..=85 => Ok(KnowledgeLevel::VeryGood),
        51..=70 => Ok(KnowledgeLevel::Good),
        31..=50 => Ok(KnowledgeLevel::Average),
        0..=30 => Ok(KnowledgeLevel::Weak),
        _ => Err(LearnerError::OutOfRange(score)),
    }
}

pub(crate) fn band(score: u8) -> KnowledgeLevel {
    classify_knowledge(i64::from(score)).expect("score validated to 0..=100")
}

/// Learner level from the mean of up to the last five post-test scores.
/// An empty history yields `SlowLearner`.
pub fn level_from_scores(recent: &[u8]) -> LearnerLevel {
    if recent.is_empty() {
        return LearnerLevel::SlowLearner;
    }
    let mean = recent.iter().map(|&s| f64::from(s)).sum::<f64>() / recent.len() as f64;
    if mean < 31.0 {
        LearnerLevel::Weak
    } else if mean < 51.0 {
        LearnerLevel::SlowLearner
    } else if mean < 86.0 {
        LearnerLevel::Smart
    } else {
        LearnerLevel::Genius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptKnowledge {
    pub last_score: u8,
    pub level: KnowledgeLevel,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    StyleProfiled {
        dominant: LearningStyle,
    },
    PreTest {
        concept_id: String,
        score: u8,
    },
    PostTest {
        concept_id: String,
        score: u8,
    },
    Presented {
        concept_id: String,
        method: EducationMethod,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningEvent {
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Everything the engine knows about one learner. Persisted as one JSON
/// document per learner.
///
/// `asked_questions`, `events` and `transcript` only ever grow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerModel {
    schema_version: u32,
    learner_id: String,
    name: String,
    seed: u64,
    plan_counter: u64,
    style: Option<StyleProfile>,
    level: LearnerLevel,
    concept_knowledge: BTreeMap<String, ConceptKnowledge>,
    training_rounds: BTreeMap<String, u32>,
    asked_questions: BTreeSet<String>,
    events: Vec<LearningEvent>,
    transcript: Vec<TranscriptEntry>,
}

impl LearnerModel {
    /// A fresh learner. The plan seed is derived from the id so that a
    /// learner's sessions are replayable.
    pub fn new(learner_id: impl Into<String>, name: impl Into<String>) -> Self {
        let learner_id = learner_id.into();
        let seed = crate::seed::from_str(&learner_id);
        Self::with_seed(learner_id, name, seed)
    }

    pub fn with_seed(learner_id: impl Into<String>, name: impl Into<String>, seed: u64) -> Self {
        LearnerModel {
            schema_version: SCHEMA_VERSION,
            learner_id: learner_id.into(),
            name: name.into(),
            seed,
            plan_counter: 0,
            style: None,
            level: LearnerLevel::SlowLearner,
            concept_knowledge: BTreeMap::new(),
            training_rounds: BTreeMap::new(),
            asked_questions: BTreeSet::new(),
            events: Vec::new(),
            transcript: Vec::new(),
        }
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn learner_id(&self) -> &str {
        &self.learner_id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn style(&self) -> Option<&StyleProfile> {
        self.style.as_ref()
    }

    pub fn level(&self) -> LearnerLevel {
        self.level
    }

    pub fn concept_knowledge(&self) -> &BTreeMap<String, ConceptKnowledge> {
        &self.concept_knowledge
    }

    pub fn knowledge_of(&self, concept_id: &str) -> Option<&ConceptKnowledge> {
        self.concept_knowledge.get(concept_id)
    }

    /// Whether the concept's last score reaches `bar`. Unattempted concepts never do.
    pub fn has_mastered(&self, concept_id: &str, bar: KnowledgeLevel) -> bool {
        self.knowledge_of(concept_id)
            .is_some_and(|k| k.level >= bar)
    }

    pub fn asked_questions(&self) -> &BTreeSet<String> {
        &self.asked_questions
    }

    pub fn events(&self) -> &[LearningEvent] {
        &self.events
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Number of times the concept has been presented so far.
    pub fn training_rounds(&self, concept_id: &str) -> u32 {
        self.training_rounds.get(concept_id).copied().unwrap_or(0)
    }

    /// Post-test scores in chronological order.
    pub fn post_test_scores(&self) -> impl Iterator<Item = u8> + '_ {
        self.events.iter().filter_map(|e| match &e.kind {
            EventKind::PostTest { score, .. } => Some(*score),
            _ => None,
        })
    }

    pub fn set_style(&mut self, profile: StyleProfile, at: DateTime<Utc>) {
        self.events.push(LearningEvent {
            at,
            kind: EventKind::StyleProfiled {
                dominant: profile.dominant,
            },
        });
        self.style = Some(profile);
    }

    /// Merges graded question ids into the asked set.
    pub fn record_asked<'a>(&mut self, ids: impl IntoIterator<Item = &'a String>) {
        self.asked_questions.extend(ids.into_iter().cloned());
    }

    pub fn record_pretest(&mut self, concept_id: &str, score: u8, at: DateTime<Utc>) {
        self.events.push(LearningEvent {
            at,
            kind: EventKind::PreTest {
                concept_id: concept_id.to_string(),
                score,
            },
        });
    }

    /// Counts a presentation of `concept_id` and returns the 0-based round
    /// index it was shown under.
    pub fn record_presentation(
        &mut self,
        concept_id: &str,
        method: EducationMethod,
        at: DateTime<Utc>,
    ) -> u32 {
        let rounds = self
            .training_rounds
            .entry(concept_id.to_string())
            .or_insert(0);
        let round = *rounds;
        *rounds += 1;
        self.events.push(LearningEvent {
            at,
            kind: EventKind::Presented {
                concept_id: concept_id.to_string(),
                method,
            },
        });
        round
    }

    /// Stores a post-test result for the concept, appends a post-test event
    /// and recomputes the learner level.
    pub fn update_after_posttest(
        &mut self,
        kb: &KnowledgeBase,
        concept_id: &str,
        score: i64,
        at: DateTime<Utc>,
    ) -> Result<(), LearnerError> {
        if kb.concept(concept_id).is_none() {
            return Err(LearnerError::UnknownConcept(concept_id.to_string()));
        }
        let level = classify_knowledge(score)?;
        let score = score as u8;
        let entry = self
            .concept_knowledge
            .entry(concept_id.to_string())
            .or_insert(ConceptKnowledge {
                last_score: score,
                level,
                attempts: 0,
            });
        entry.last_score = score;
        entry.level = level;
        entry.attempts += 1;
        self.events.push(LearningEvent {
            at,
            kind: EventKind::PostTest {
                concept_id: concept_id.to_string(),
                score,
            },
        });
        self.level = self.derive_learner_level();
        Ok(())
    }

    /// Mean of the last (up to) five post-test scores, banded into a level.
    pub fn derive_learner_level(&self) -> LearnerLevel {
        let scores: Vec<u8> = self.post_test_scores().collect();
        let start = scores.len().saturating_sub(LEVEL_WINDOW);
        level_from_scores(&scores[start..])
    }

    /// Mean last score over the topic's concepts, unattempted ones counting
    /// as zero, rounded half up.
    pub fn aggregate_topic_knowledge(&self, topic: &Topic) -> u8 {
        let n = topic.concept_ids.len() as u64;
        if n == 0 {
            return 0;
        }
        let sum: u64 = topic
            .concept_ids
            .iter()
            .map(|c| self.knowledge_of(c).map_or(0, |k| u64::from(k.last_score)))
            .sum();
        ((2 * sum + n) / (2 * n)) as u8
    }

    /// Returns the next plan seed and advances the counter.
    pub(crate) fn next_plan_seed(&mut self) -> u64 {
        let s = crate::seed::mix(self.seed, self.plan_counter);
        self.plan_counter += 1;
        s
    }

    pub(crate) fn push_transcript(&mut self, entry: TranscriptEntry) {
        self.transcript.push(entry);
    }
}

/// Free-function form of [`LearnerModel::aggregate_topic_knowledge`].
pub fn aggregate_topic_knowledge(model: &LearnerModel, topic: &Topic) -> u8 {
    model.aggregate_topic_knowledge(topic)
}

/// Free-function form of [`LearnerModel::derive_learner_level`].
pub fn derive_learner_level(model: &LearnerModel) -> LearnerLevel {
    model.derive_learner_level()
}
