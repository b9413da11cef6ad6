//! Scores the learning-style questionnaire and derives knowledge and
//! learner levels from a few post-test scores.

use chrono::Utc;
use simtutor_core::{classify_knowledge, sample, LearnerModel};

fn main() {
    let questionnaire = sample::questionnaire();
    let responses = questionnaire
        .items()
        .iter()
        .map(|item| {
            let v = match item.id.split('-').next() {
                Some("dla") => 5,
                Some("ca") => 4,
                _ => 2,
            };
            (item.id.clone(), v)
        })
        .collect();
    let profile = questionnaire.score(&responses).expect("complete responses");
    for (style, score) in &profile.scores {
        println!("{:<4} {score:>2}", style.as_str());
    }
    println!("dominant style: {}", profile.dominant);

    for score in [12, 30, 31, 64, 85, 86] {
        println!("score {score:>3} -> {}", classify_knowledge(score).unwrap());
    }

    let kb = sample::knowledge_base();
    let mut model = LearnerModel::new("sam", "Sam");
    println!("\nnew learner: {:?}", model.level());
    for (concept, score) in kb.curriculum_order().iter().zip([40, 72, 95, 88]) {
        model
            .update_after_posttest(&kb, concept, score, Utc::now())
            .unwrap();
        println!(
            "post-test {score:>3} on {concept:<16} -> learner level {:?}",
            model.level()
        );
    }
}
