use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::learner::{band, KnowledgeLevel};
use crate::pedagogy::{TestPhase, TestPlan};

/// Chosen choice index per question id.
pub type Answers = BTreeMap<String, usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradeError {
    #[error("no answer for question {0:?}")]
    MissingAnswer(String),
    #[error("question {0:?} is not part of this test")]
    UnknownQuestion(String),
    #[error("choice {index} does not exist for question {question_id:?}")]
    ChoiceOutOfRange { question_id: String, index: usize },
}

/// A test after grading. Stored in transcripts; never sent to a client
/// before the learner has answered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedTest {
    pub phase: TestPhase,
    pub concept_id: String,
    pub question_ids: Vec<String>,
    pub answers: Answers,
    pub correct: BTreeMap<String, bool>,
    pub earned_weight: u32,
    pub total_weight: u32,
    pub score: u8,
    pub level: KnowledgeLevel,
}

/// `round_half_up(100 * earned / total)` in integer arithmetic.
pub fn percent_score(earned: u32, total: u32) -> u8 {
    if total == 0 {
        return 0;
    }
    let (earned, total) = (u64::from(earned), u64::from(total));
    ((200 * earned + total) / (2 * total)) as u8
}

/// Grades answers against the plan. Answers must be keyed by exactly the
/// plan's question ids.
pub fn grade_test(
    kb: &KnowledgeBase,
    plan: &TestPlan,
    answers: &Answers,
) -> Result<GradedTest, GradeError> {
    if let Some(extra) = answers.keys().find(|id| !plan.contains(id)) {
        return Err(GradeError::UnknownQuestion(extra.clone()));
    }
    let mut correct = BTreeMap::new();
    let mut earned = 0;
    for id in &plan.question_ids {
        let &chosen = answers
            .get(id)
            .ok_or_else(|| GradeError::MissingAnswer(id.clone()))?;
        let question = kb
            .question(id)
            .ok_or_else(|| GradeError::UnknownQuestion(id.clone()))?;
        if chosen >= question.choices.len() {
            return Err(GradeError::ChoiceOutOfRange {
                question_id: id.clone(),
                index: chosen,
            });
        }
        let ok = chosen == question.correct_index;
        if ok {
            earned += plan.weights[id];
        }
        correct.insert(id.clone(), ok);
    }
    let score = percent_score(earned, plan.total_weight);
    Ok(GradedTest {
        phase: plan.phase,
        concept_id: plan.concept_id.clone(),
        question_ids: plan.question_ids.clone(),
        answers: answers.clone(),
        correct,
        earned_weight: earned,
        total_weight: plan.total_weight,
        score,
        level: band(score),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn plan_of(ids: &[&str], weights: &[u32]) -> TestPlan {
        let question_ids: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let weights: BTreeMap<String, u32> = question_ids
            .iter()
            .cloned()
            .zip(weights.iter().copied())
            .collect();
        TestPlan {
            phase: TestPhase::PostTest,
            concept_id: "c".into(),
            total_weight: weights.values().sum(),
            question_ids,
            weights,
            seed: 0,
        }
    }

    fn three(kb: &KnowledgeBase) -> Vec<String> {
        kb.questions().take(3).map(|q| q.id.clone()).collect()
    }

    #[test]
    fn all_none_and_weighted() {
        let kb = sample::knowledge_base();
        let ids = three(&kb);
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let plan = plan_of(&refs, &[2, 1, 1]);
        let right: Answers = ids
            .iter()
            .map(|id| (id.clone(), kb.question(id).unwrap().correct_index))
            .collect();
        let wrong: Answers = ids
            .iter()
            .map(|id| (id.clone(), (kb.question(id).unwrap().correct_index + 1) % 2))
            .collect();

        let g = grade_test(&kb, &plan, &right).unwrap();
        assert_eq!((g.score, g.level), (100, KnowledgeLevel::Excellent));
        let g = grade_test(&kb, &plan, &wrong).unwrap();
        assert_eq!((g.score, g.level), (0, KnowledgeLevel::Weak));

        let mut mixed = wrong.clone();
        mixed.insert(ids[0].clone(), right[&ids[0]]);
        let g = grade_test(&kb, &plan, &mixed).unwrap();
        assert_eq!((g.earned_weight, g.total_weight, g.score), (2, 4, 50));
        assert_eq!(g.level, KnowledgeLevel::Average);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(percent_score(1, 3), 33);
        assert_eq!(percent_score(2, 3), 67);
        assert_eq!(percent_score(1, 8), 13); // 12.5
        assert_eq!(percent_score(5, 8), 63); // 62.5
        assert_eq!(percent_score(0, 0), 0);
        for total in 1..=40u32 {
            for earned in 0..=total {
                // r - 1/2 <= 100 * earned / total < r + 1/2
                let r = i64::from(percent_score(earned, total));
                let (e, t) = (i64::from(earned), i64::from(total));
                assert!(
                    (2 * r - 1) * t <= 200 * e && 200 * e < (2 * r + 1) * t,
                    "{earned}/{total}"
                );
            }
        }
    }

    #[test]
    fn answer_key_errors() {
        let kb = sample::knowledge_base();
        let ids = three(&kb);
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let plan = plan_of(&refs, &[1, 1, 1]);
        let mut a: Answers = ids.iter().map(|id| (id.clone(), 0)).collect();
        a.remove(&ids[1]);
        assert_eq!(
            grade_test(&kb, &plan, &a),
            Err(GradeError::MissingAnswer(ids[1].clone()))
        );
        a.insert(ids[1].clone(), 0);
        a.insert("stranger".into(), 0);
        assert_eq!(
            grade_test(&kb, &plan, &a),
            Err(GradeError::UnknownQuestion("stranger".into()))
        );
        a.remove("stranger");
        a.insert(ids[2].clone(), 99);
        assert!(matches!(
            grade_test(&kb, &plan, &a),
            Err(GradeError::ChoiceOutOfRange { index: 99, .. })
        ));
    }
}
