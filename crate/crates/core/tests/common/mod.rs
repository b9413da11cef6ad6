#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use simtutor_core::clock::StepClock;
use simtutor_core::kb::KbDocument;
use simtutor_core::learner::{ModelSink, StoreError};
use simtutor_core::pedagogy::TestPlan;
use simtutor_core::session::{percent_score, Answers};
use simtutor_core::{
    sample, Concept, Difficulty, EducationMethod, KnowledgeBase, LearnerModel, PedagogyConfig,
    Question, Section, Session, Topic,
};

/// A concept for [`build_kb`]: id, prerequisites, section count, questions per (section, difficulty).
pub struct Spec<'a> {
    pub id: &'a str,
    pub prereqs: &'a [&'a str],
    pub sections: usize,
    pub per_cell: usize,
}

pub fn spec<'a>(id: &'a str, prereqs: &'a [&'a str], sections: usize, per_cell: usize) -> Spec<'a> {
    Spec {
        id,
        prereqs,
        sections,
        per_cell,
    }
}

/// One topic holding the given concepts in order, every method available,
/// weights 1/2/3 by difficulty, correct answer always at index 0.
pub fn build_kb(specs: &[Spec]) -> KnowledgeBase {
    let mut concepts = Vec::new();
    let mut questions = Vec::new();
    for s in specs {
        let sections = (0..s.sections)
            .map(|k| Section {
                id: format!("{}-s{k}", s.id),
                title: format!("Section {k}"),
                importance: EducationMethod::ALL
                    .iter()
                    .map(|m| (*m, (s.sections - k) as u32))
                    .collect(),
            })
            .collect::<Vec<_>>();
        for sec in &sections {
            for (di, d) in Difficulty::ALL.iter().enumerate() {
                for n in 0..s.per_cell {
                    questions.push(Question {
                        id: format!("{}-{d}-{n}", sec.id),
                        concept_id: s.id.to_string(),
                        section_id: sec.id.clone(),
                        difficulty: *d,
                        weight: di as u32 + 1,
                        body: format!("{} {d} #{n}", sec.title),
                        choices: vec!["right".into(), "wrong".into(), "also wrong".into()],
                        correct_index: 0,
                    });
                }
            }
        }
        concepts.push(Concept {
            id: s.id.to_string(),
            title: s.id.to_uppercase(),
            sections,
            prerequisites: s.prereqs.iter().map(|p| p.to_string()).collect(),
            assets: EducationMethod::ALL
                .iter()
                .map(|m| (*m, format!("{}/{}", s.id, m.as_str())))
                .collect(),
        });
    }
    KnowledgeBase::from_document(KbDocument {
        topics: vec![Topic {
            id: "t".into(),
            title: "Topic".into(),
            concept_ids: specs.iter().map(|s| s.id.to_string()).collect(),
        }],
        concepts,
        questions,
    })
    .expect("generated knowledge base is valid")
}

pub fn start(kb: KnowledgeBase, model: LearnerModel) -> Session {
    start_with(kb, PedagogyConfig::default(), model)
}

pub fn start_with(kb: KnowledgeBase, config: PedagogyConfig, model: LearnerModel) -> Session {
    Session::start(
        model,
        Arc::new(kb),
        Arc::new(config),
        Arc::new(sample::questionnaire()),
        Arc::new(StepClock::epoch()),
    )
}

/// Questionnaire responses that make `style_prefix` dominant.
pub fn responses_for(style_prefix: &str) -> BTreeMap<String, i64> {
    sample::questionnaire()
        .items()
        .iter()
        .map(|i| {
            let v = if i.id.starts_with(style_prefix) { 5 } else { 2 };
            (i.id.clone(), v)
        })
        .collect()
}

/// Answers whose score falls in `lo..=hi`, found by enumerating which
/// questions to answer correctly.
pub fn answers_scoring(kb: &KnowledgeBase, plan: &TestPlan, lo: u8, hi: u8) -> Answers {
    let qs: Vec<&Question> = plan
        .question_ids
        .iter()
        .map(|id| kb.question(id).unwrap())
        .collect();
    let total: u32 = qs.iter().map(|q| q.weight).sum();
    for mask in 0u32..(1 << qs.len()) {
        let earned: u32 = (0..qs.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| qs[i].weight)
            .sum();
        let score = percent_score(earned, total);
        if (lo..=hi).contains(&score) {
            return qs
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    let pick = if mask & (1 << i) != 0 {
                        q.correct_index
                    } else {
                        (q.correct_index + 1) % q.choices.len()
                    };
                    (q.id.clone(), pick)
                })
                .collect();
        }
    }
    panic!("no answer pattern scores in {lo}..={hi}");
}

/// Records every persisted model.
#[derive(Default)]
pub struct RecordingSink(pub Mutex<Vec<LearnerModel>>);

impl ModelSink for RecordingSink {
    fn persist(&self, model: &LearnerModel) -> Result<(), StoreError> {
        self.0.lock().unwrap().push(model.clone());
        Ok(())
    }
}
