//! Plans a pre-test and a post-test for the same concept and shows that
//! the second never reuses a question from the first.

use std::collections::BTreeSet;

use simtutor_core::pedagogy::{plan_test, LevelMix, TestPhase};
use simtutor_core::{sample, LearnerModel};

fn main() {
    let kb = sample::knowledge_base();
    let concept = &kb.curriculum_order()[0];
    let mix = LevelMix::default();
    let mut model = LearnerModel::new("sam", "Sam");

    let (pre, trace) = plan_test(&kb, &model, concept, TestPhase::PreTest, &mix, 7).unwrap();
    println!("pre-test for {concept}:");
    for id in &pre.question_ids {
        let q = kb.question(id).unwrap();
        println!(
            "  {:<32} {:<10} {:<6} weight {}",
            q.id, q.section_id, q.difficulty, q.weight
        );
    }
    println!("{trace}\n");

    model.record_asked(&pre.question_ids);
    let (post, _) = plan_test(&kb, &model, concept, TestPhase::PostTest, &mix, 8).unwrap();
    let first: BTreeSet<_> = pre.question_ids.iter().collect();
    let shared = post
        .question_ids
        .iter()
        .filter(|q| first.contains(q))
        .count();
    println!(
        "post-test: {} questions, {shared} shared with the pre-test",
        post.question_ids.len()
    );

    // Keep asking until the bank runs dry.
    let mut rounds = 2;
    loop {
        model.record_asked(&post.question_ids);
        match plan_test(&kb, &model, concept, TestPhase::PostTest, &mix, rounds) {
            Ok((p, _)) => {
                model.record_asked(&p.question_ids);
                rounds += 1;
            }
            Err(e) => {
                println!("after {rounds} tests: {e}");
                break;
            }
        }
    }
}
