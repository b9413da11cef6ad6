//! The rule layer.
//!
//! Each decision procedure is an ordered list of rules checked by priority;
//! the rules that fire are recorded in a [`RuleTrace`] returned alongside
//! the decision, so every choice the engine makes can be explained to the
//! learner.

mod config;
mod planner;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{Concept, EducationMethod, KnowledgeBase};
use crate::learner::{KnowledgeLevel, LearnerModel, LearningStyle};

pub use config::{DifficultyMix, GateThresholds, LevelMix, PedagogyConfig, PreferenceTable};
pub use planner::{plan_test, TestPhase, TestPlan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PedagogyError {
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("concept {0:?} has no presentation asset")]
    NoAsset(String),
    #[error("question bank exhausted for concept {concept_id:?}: {reason}")]
    InsufficientBank { concept_id: String, reason: String },
    #[error("invalid pedagogy configuration: {0}")]
    Config(String),
}

/// Identifier of a pedagogy rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Never ask a question the learner has already seen.
    #[serde(rename = "R1-no-repeat")]
    NoRepeat,
    /// Every section of the concept contributes a question.
    #[serde(rename = "R2-all-sections")]
    AllSections,
    /// Every difficulty level is represented.
    #[serde(rename = "R3-all-levels")]
    AllLevels,
    #[serde(rename = "level-mix")]
    LevelMix,
    #[serde(rename = "seeded-order")]
    SeededOrder,
    #[serde(rename = "gate-skip")]
    GateSkip,
    #[serde(rename = "gate-train")]
    GateTrain,
    #[serde(rename = "gate-remediate")]
    GateRemediate,
    #[serde(rename = "present-by-style")]
    PresentByStyle,
    #[serde(rename = "present-rotate")]
    PresentRotate,
    #[serde(rename = "present-fallback")]
    PresentFallback,
    #[serde(rename = "curriculum-order")]
    CurriculumOrder,
    #[serde(rename = "curriculum-done")]
    CurriculumDone,
    #[serde(rename = "mastery-bar")]
    MasteryBar,
    #[serde(rename = "retain-concept")]
    RetainConcept,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFiring {
    pub rule: Rule,
    pub justification: String,
}

/// Ordered rules that fired for one decision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleTrace(Vec<RuleFiring>);

impl RuleTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fire(&mut self, rule: Rule, justification: impl Into<String>) {
        self.0.push(RuleFiring {
            rule,
            justification: justification.into(),
        });
    }

    pub fn firings(&self) -> &[RuleFiring] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, rule: Rule) -> bool {
        self.0.iter().any(|f| f.rule == rule)
    }

    pub fn extend(&mut self, other: RuleTrace) {
        self.0.extend(other.0);
    }
}

impl fmt::Display for RuleTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, firing) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}] {}", firing.rule, firing.justification)?;
        }
        Ok(())
    }
}

/// Outcome of a pre-test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", content = "prerequisite", rename_all = "snake_case")]
pub enum GateDecision {
    Skip,
    Train,
    /// Teach this unmastered prerequisite first.
    Remediate(String),
}

/// A declared prerequisite together with whether the learner has mastered it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrerequisiteStatus<'a> {
    pub concept_id: &'a str,
    pub mastered: bool,
}

/// Prerequisite statuses of `concept` for `model` under the mastery bar.
pub fn prerequisite_statuses<'a>(
    concept: &'a Concept,
    model: &LearnerModel,
    bar: KnowledgeLevel,
) -> Vec<PrerequisiteStatus<'a>> {
    concept
        .prerequisites
        .iter()
        .map(|p| PrerequisiteStatus {
            concept_id: p,
            mastered: model.has_mastered(p, bar),
        })
        .collect()
}

/// Decides what follows a pre-test.
///
/// `score >= skip` skips the concept, `train <= score < skip` trains it, and
/// a lower score remediates the first unmastered prerequisite (or trains
/// when every prerequisite is mastered).
pub fn gate_pretest(
    score: u8,
    thresholds: &GateThresholds,
    prerequisites: &[PrerequisiteStatus<'_>],
) -> (GateDecision, RuleTrace) {
    let mut trace = RuleTrace::new();
    if score >= thresholds.skip {
        trace.fire(
            Rule::GateSkip,
            format!(
                "pre-test score {score} reaches the skip threshold {}; the concept is already known",
                thresholds.skip
            ),
        );
        return (GateDecision::Skip, trace);
    }
    if score >= thresholds.train {
        trace.fire(
            Rule::GateTrain,
            format!(
                "pre-test score {score} is between {} and {}; the concept will be trained",
                thresholds.train, thresholds.skip
            ),
        );
        return (GateDecision::Train, trace);
    }
    match prerequisites.iter().find(|p| !p.mastered) {
        Some(p) => {
            trace.fire(
                Rule::GateRemediate,
                format!(
                    "pre-test score {score} is below {}; prerequisite {:?} is not mastered and is taught first",
                    thresholds.train, p.concept_id
                ),
            );
            (GateDecision::Remediate(p.concept_id.to_string()), trace)
        }
        None => {
            trace.fire(
                Rule::GateTrain,
                format!(
                    "pre-test score {score} is below {} but every prerequisite is mastered; the concept will be trained",
                    thresholds.train
                ),
            );
            (GateDecision::Train, trace)
        }
    }
}

/// Picks the presentation method for a (re)training round.
///
/// Walks the style's preference row starting at `attempt mod 5` and returns
/// the first method the concept has an asset for, so each failed round
/// rotates to the next preferred method.
pub fn choose_presentation(
    style: LearningStyle,
    attempt: u32,
    prefs: &PreferenceTable,
    concept: &Concept,
) -> Result<(EducationMethod, RuleTrace), PedagogyError> {
    let row = prefs.row(style);
    let start = attempt as usize % row.len();
    let mut trace = RuleTrace::new();
    if attempt == 0 {
        trace.fire(
            Rule::PresentByStyle,
            format!(
                "style `{style}` prefers {}",
                row.iter()
                    .map(|m| m.as_str())
                    .collect::<Vec<_>>()
                    .join(" > ")
            ),
        );
    } else {
        trace.fire(
            Rule::PresentRotate,
            format!(
                "training round {} for this concept; starting from preference #{} (`{}`) for style `{style}`",
                attempt + 1,
                start + 1,
                row[start]
            ),
        );
    }
    for k in 0..row.len() {
        let method = row[(start + k) % row.len()];
        if concept.has_asset(method) {
            if k > 0 {
                let skipped: Vec<&str> = (0..k)
                    .map(|j| row[(start + j) % row.len()].as_str())
                    .collect();
                trace.fire(
                    Rule::PresentFallback,
                    format!("no asset for {}; using `{method}`", skipped.join(", ")),
                );
            }
            return Ok((method, trace));
        }
    }
    Err(PedagogyError::NoAsset(concept.id.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "next", content = "concept_id", rename_all = "snake_case")]
pub enum NextConcept {
    Concept(String),
    Done,
}

/// First concept in curriculum order whose knowledge level is below `bar`.
pub fn next_concept(
    kb: &KnowledgeBase,
    model: &LearnerModel,
    bar: KnowledgeLevel,
) -> (NextConcept, RuleTrace) {
    let mut trace = RuleTrace::new();
    for id in kb.curriculum_order() {
        if !model.has_mastered(id, bar) {
            let status = match model.knowledge_of(id) {
                Some(k) => format!("last score {} ({}) is below `{bar}`", k.last_score, k.level),
                None => "not attempted yet".to_string(),
            };
            trace.fire(
                Rule::CurriculumOrder,
                format!(
                    "{id:?} is the first concept in curriculum order not yet mastered: {status}"
                ),
            );
            return (NextConcept::Concept(id.clone()), trace);
        }
    }
    trace.fire(
        Rule::CurriculumDone,
        format!(
            "all {} concepts are at `{bar}` or above",
            kb.concept_count()
        ),
    );
    (NextConcept::Done, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use chrono::DateTime;

    fn thresholds() -> GateThresholds {
        GateThresholds::default()
    }

    #[test]
    fn gate_interval_cases() {
        assert_eq!(gate_pretest(95, &thresholds(), &[]).0, GateDecision::Skip);
        assert_eq!(gate_pretest(86, &thresholds(), &[]).0, GateDecision::Skip);
        assert_eq!(gate_pretest(85, &thresholds(), &[]).0, GateDecision::Train);
        assert_eq!(gate_pretest(60, &thresholds(), &[]).0, GateDecision::Train);
        assert_eq!(gate_pretest(51, &thresholds(), &[]).0, GateDecision::Train);
        let p = [
            PrerequisiteStatus {
                concept_id: "done",
                mastered: true,
            },
            PrerequisiteStatus {
                concept_id: "p",
                mastered: false,
            },
        ];
        assert_eq!(
            gate_pretest(20, &thresholds(), &p).0,
            GateDecision::Remediate("p".into())
        );
        assert_eq!(
            gate_pretest(50, &thresholds(), &p).0,
            GateDecision::Remediate("p".into())
        );
        assert_eq!(gate_pretest(20, &thresholds(), &[]).0, GateDecision::Train);
        assert_eq!(
            gate_pretest(20, &thresholds(), &p[..1]).0,
            GateDecision::Train
        );
    }

    fn rank(d: &GateDecision) -> u8 {
        match d {
            GateDecision::Remediate(_) => 0,
            GateDecision::Train => 1,
            GateDecision::Skip => 2,
        }
    }

    #[test]
    fn gate_is_monotone_and_always_traced() {
        let p = [PrerequisiteStatus {
            concept_id: "p",
            mastered: false,
        }];
        for prereqs in [&p[..], &[]] {
            let mut prev = 0;
            for score in 0..=100u8 {
                let (d, trace) = gate_pretest(score, &thresholds(), prereqs);
                assert!(!trace.is_empty());
                assert!(rank(&d) >= prev, "score {score}");
                prev = rank(&d);
            }
        }
    }

    fn concept_with(methods: &[EducationMethod]) -> Concept {
        let kb = sample::knowledge_base();
        let mut c = kb.concepts().next().unwrap().clone();
        c.assets = methods.iter().map(|m| (*m, format!("{m}.asset"))).collect();
        c
    }

    #[test]
    fn presentation_follows_default_table() {
        let prefs = PreferenceTable::default();
        let all = concept_with(&EducationMethod::ALL);
        let (m, trace) = choose_presentation(LearningStyle::Ss, 0, &prefs, &all).unwrap();
        assert_eq!(m, EducationMethod::Game);
        assert!(trace.contains(Rule::PresentByStyle));
        assert_eq!(
            choose_presentation(LearningStyle::Ca, 0, &prefs, &all)
                .unwrap()
                .0,
            EducationMethod::Text
        );
        assert_eq!(
            choose_presentation(LearningStyle::Ss, 1, &prefs, &all)
                .unwrap()
                .0,
            EducationMethod::DynamicView
        );

        let text_only = concept_with(&[EducationMethod::Text]);
        let (m, trace) = choose_presentation(LearningStyle::Ss, 1, &prefs, &text_only).unwrap();
        assert_eq!(m, EducationMethod::Text);
        assert!(trace.contains(Rule::PresentFallback));

        for style in LearningStyle::ALL {
            for attempt in 0..5 {
                assert_eq!(
                    choose_presentation(style, attempt, &prefs, &all).unwrap().0,
                    choose_presentation(style, attempt + 5, &prefs, &all)
                        .unwrap()
                        .0
                );
            }
        }

        let none = concept_with(&[]);
        assert_eq!(
            choose_presentation(LearningStyle::Ss, 0, &prefs, &none),
            Err(PedagogyError::NoAsset(none.id.clone()))
        );
    }

    #[test]
    fn presentation_never_picks_a_missing_asset() {
        let prefs = PreferenceTable::default();
        // every non-empty subset of methods
        for mask in 1u32..32 {
            let methods: Vec<_> = EducationMethod::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, m)| *m)
                .collect();
            let c = concept_with(&methods);
            for style in LearningStyle::ALL {
                for attempt in 0..7 {
                    let (m, _) = choose_presentation(style, attempt, &prefs, &c).unwrap();
                    assert!(c.has_asset(m));
                }
            }
        }
    }

    #[test]
    fn next_concept_walks_curriculum() {
        let kb = sample::knowledge_base();
        let bar = KnowledgeLevel::Good;
        let at = DateTime::from_timestamp(0, 0).unwrap();
        let mut m = LearnerModel::new("ada", "Ada");
        let order = kb.curriculum_order().to_vec();
        assert_eq!(
            next_concept(&kb, &m, bar).0,
            NextConcept::Concept(order[0].clone())
        );
        m.update_after_posttest(&kb, &order[0], 51, at).unwrap();
        assert_eq!(
            next_concept(&kb, &m, bar).0,
            NextConcept::Concept(order[1].clone())
        );
        m.update_after_posttest(&kb, &order[1], 50, at).unwrap();
        assert_eq!(
            next_concept(&kb, &m, bar).0,
            NextConcept::Concept(order[1].clone())
        );
        for id in &order {
            m.update_after_posttest(&kb, id, 70, at).unwrap();
        }
        let (next, trace) = next_concept(&kb, &m, bar);
        assert_eq!(next, NextConcept::Done);
        assert!(trace.contains(Rule::CurriculumDone));
    }

    #[test]
    fn trace_serializes_rule_ids() {
        let (_, trace) = gate_pretest(95, &thresholds(), &[]);
        let v = serde_json::to_value(&trace).unwrap();
        assert_eq!(v[0]["rule"], "gate-skip");
        assert_eq!(Rule::NoRepeat.to_string(), "R1-no-repeat");
    }
}
