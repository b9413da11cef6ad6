//! The rule layer on its own: pre-test gating, presentation choice per
//! learning style with rotation on retraining, and concept sequencing.

use simtutor_core::pedagogy::{
    choose_presentation, gate_pretest, next_concept, GateThresholds, PreferenceTable,
    PrerequisiteStatus,
};
use simtutor_core::{sample, KnowledgeLevel, LearnerModel, LearningStyle};

fn main() {
    let thresholds = GateThresholds::default();
    let prereqs = [PrerequisiteStatus {
        concept_id: "addition",
        mastered: false,
    }];
    for score in [95, 60, 20] {
        let (decision, trace) = gate_pretest(score, &thresholds, &prereqs);
        println!("pre-test {score:>3}: {decision:?}\n{trace}\n");
    }

    let kb = sample::knowledge_base();
    let prefs = PreferenceTable::default();
    // This concept ships without a puzzle asset.
    let concept = kb.concept("multiplication").unwrap();
    for style in LearningStyle::ALL {
        let methods: Vec<String> = (0..3)
            .map(|round| {
                choose_presentation(style, round, &prefs, concept)
                    .unwrap()
                    .0
                    .to_string()
            })
            .collect();
        println!("{:<4} rounds 1-3: {}", style.as_str(), methods.join(" -> "));
    }
    let (_, trace) = choose_presentation(LearningStyle::Ca, 0, &prefs, concept).unwrap();
    println!("\n{trace}\n");

    let model = LearnerModel::new("sam", "Sam");
    let (next, trace) = next_concept(&kb, &model, KnowledgeLevel::Good);
    println!("next concept: {next:?}\n{trace}");
}
