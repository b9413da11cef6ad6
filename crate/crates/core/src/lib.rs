//! Adaptive, rule-driven tutoring engine.
//!
//! The crate is organised around the tutoring loop it drives:
//!
//! - [`kb`]: the immutable content knowledge base (topics, concepts,
//!   sections, questions and presentation assets) and its JSON loader.
//! - [`learner`]: learning-style questionnaire scoring, knowledge-level
//!   bands, learner-level derivation and the file-per-learner record store.
//! - [`pedagogy`]: the rule layer. Plans non-repeating, section-covering,
//!   level-spanning tests, gates on pre-test scores, picks presentation
//!   methods and sequences concepts, emitting a [`pedagogy::RuleTrace`]
//!   for every decision.
//! - [`session`]: the pre-test / learn / post-test state machine binding one
//!   learner to one curriculum traversal.
//! - [`sim`]: a seeded population simulator comparing the adaptive engine
//!   with a static baseline.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod clock;
pub mod kb;
pub mod learner;
pub mod pedagogy;
pub mod sample;
pub mod seed;
pub mod session;
pub mod sim;

pub use kb::{Concept, Difficulty, EducationMethod, KnowledgeBase, Question, Section, Topic};
pub use learner::{
    classify_knowledge, KnowledgeLevel, LearnerLevel, LearnerModel, LearningStyle, Questionnaire,
    StyleProfile,
};
pub use pedagogy::{PedagogyConfig, RuleTrace, TestPlan};
pub use session::{Session, SessionState, Step};
