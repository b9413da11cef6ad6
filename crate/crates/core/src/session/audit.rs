//! Independent checks over plans and transcripts.
//!
//! These re-derive the selection rules and state-machine invariants from
//! the knowledge base and the recorded transcript alone; they share no code
//! with the planner or the engine.

use std::collections::{BTreeSet, HashSet};

use super::{Operation, SessionState, StateKind, TranscriptEntry};
use crate::kb::{Difficulty, KnowledgeBase};
use crate::pedagogy::{Rule, TestPlan};

/// Rule violations of `plan` given the questions asked before it.
pub fn check_plan(
    kb: &KnowledgeBase,
    asked_before: &BTreeSet<String>,
    plan: &TestPlan,
) -> Vec<String> {
    let mut problems = Vec::new();
    let Some(concept) = kb.concept(&plan.concept_id) else {
        return vec![format!(
            "plan targets unknown concept {:?}",
            plan.concept_id
        )];
    };
    let mut seen = HashSet::new();
    let mut sections = BTreeSet::new();
    let mut levels = BTreeSet::new();
    for id in &plan.question_ids {
        if !seen.insert(id.as_str()) {
            problems.push(format!("question {id:?} appears twice"));
        }
        if asked_before.contains(id) {
            problems.push(format!("R1: question {id:?} was asked before"));
        }
        match kb.question(id) {
            Some(q) if q.concept_id == concept.id => {
                sections.insert(q.section_id.clone());
                levels.insert(q.difficulty);
            }
            Some(q) => problems.push(format!(
                "question {id:?} belongs to concept {:?}, not {:?}",
                q.concept_id, concept.id
            )),
            None => problems.push(format!("question {id:?} does not exist")),
        }
    }
    for s in &concept.sections {
        if !sections.contains(&s.id) {
            problems.push(format!("R2: section {:?} is not covered", s.id));
        }
    }
    for d in Difficulty::ALL {
        if !levels.contains(&d) {
            problems.push(format!("R3: no `{d}` question"));
        }
    }
    let weight_sum: u32 = plan.weights.values().sum();
    if weight_sum != plan.total_weight || plan.weights.len() != plan.question_ids.len() {
        problems.push("weights snapshot does not match the question list".to_string());
    }
    problems
}

/// State-machine and selection-rule violations found in a transcript.
///
/// Checks, in order of appearance: sequence numbers and timestamps, legal
/// transitions within each session, that every `Presenting` entry follows a
/// pre-test gated to training, that no question is graded twice, and that
/// every planned test satisfies R1-R3 against everything graded before it.
pub fn check_transcript(kb: &KnowledgeBase, transcript: &[TranscriptEntry]) -> Vec<String> {
    let mut problems = Vec::new();
    let mut graded_so_far: BTreeSet<String> = BTreeSet::new();
    let mut previous: Option<&TranscriptEntry> = None;

    for (i, entry) in transcript.iter().enumerate() {
        if entry.seq != i as u64 {
            problems.push(format!("entry {i}: seq {} out of order", entry.seq));
        }
        if let Some(prev) = previous {
            if entry.at < prev.at {
                problems.push(format!("entry {i}: timestamp goes backwards"));
            }
            if entry.operation != Operation::Start {
                let (from, to) = (prev.state.kind(), entry.state.kind());
                if !from.can_move_to(to) {
                    problems.push(format!("entry {i}: illegal transition {from} -> {to}"));
                }
            }
        } else if entry.operation != Operation::Start {
            problems.push("transcript does not begin with a session start".to_string());
        }
        if entry.operation == Operation::Start
            && !matches!(
                entry.state.kind(),
                StateKind::AwaitQuestionnaire | StateKind::SelectingConcept
            )
        {
            problems.push(format!(
                "entry {i}: session starts in {}",
                entry.state.kind()
            ));
        }

        if let SessionState::Presenting { concept_id, .. } = &entry.state {
            let gated = entry.operation == Operation::SubmitAnswers
                && entry.graded.as_ref().is_some_and(|g| {
                    g.phase == crate::pedagogy::TestPhase::PreTest && &g.concept_id == concept_id
                })
                && entry.traces.iter().any(|t| t.contains(Rule::GateTrain));
            if !gated {
                problems.push(format!(
                    "entry {i}: presentation of {concept_id:?} not preceded by a pre-test gated to training"
                ));
            }
        }

        if let Some(g) = &entry.graded {
            match previous.and_then(|p| p.state.pending_plan()) {
                Some(plan) if plan.question_ids == g.question_ids => {}
                _ => problems.push(format!(
                    "entry {i}: graded test does not match the pending plan"
                )),
            }
            for id in &g.question_ids {
                if !graded_so_far.insert(id.clone()) {
                    problems.push(format!("entry {i}: question {id:?} graded twice"));
                }
            }
        }

        if entry.operation == Operation::Advance {
            if let Some(plan) = entry.state.pending_plan() {
                for p in check_plan(kb, &graded_so_far, plan) {
                    problems.push(format!("entry {i}: {p}"));
                }
            }
        }
        previous = Some(entry);
    }
    problems
}
