//! Drives one learner through the whole curriculum with a scripted answer
//! policy, printing each step and the rules behind every decision.
//!
//! ```sh
//! cargo run -p simtutor-core --example guided_session [seed]
//! ```

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simtutor_core::clock::StepClock;
use simtutor_core::session::audit;
use simtutor_core::{sample, LearnerModel, Session, SessionState, Step};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let kb = Arc::new(sample::knowledge_base());
    let questionnaire = Arc::new(sample::questionnaire());
    let mut session = Session::start(
        LearnerModel::with_seed("sam", "Sam", seed),
        kb.clone(),
        Arc::new(sample::pedagogy()),
        questionnaire.clone(),
        Arc::new(StepClock::epoch()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let responses = questionnaire
        .items()
        .iter()
        .map(|i| {
            (
                i.id.clone(),
                if i.id.starts_with("goa-") {
                    5
                } else {
                    rng.gen_range(1..=3)
                },
            )
        })
        .collect();
    let style = session.submit_questionnaire(&responses).unwrap();
    println!("style: {}", style.dominant);

    while !session.is_completed() {
        match session.state().clone() {
            SessionState::SelectingConcept => {
                if let Err(e) = session.advance() {
                    println!("stopped: {e}");
                    break;
                }
            }
            SessionState::Presenting {
                concept_id,
                method,
                asset,
                round,
                ..
            } => {
                println!(
                    "  learn {concept_id} via {method} ({asset}), round {}",
                    round + 1
                );
                if let Err(e) = session.advance() {
                    println!("stopped: {e}");
                    break;
                }
            }
            state => {
                let plan = state.pending_plan().unwrap().clone();
                // Learners do better after being taught.
                let p = if matches!(state, SessionState::AwaitPostTest { .. }) {
                    0.9
                } else {
                    0.5
                };
                let answers = plan
                    .question_ids
                    .iter()
                    .map(|id| {
                        let q = kb.question(id).unwrap();
                        let pick = if rng.gen_bool(p) {
                            q.correct_index
                        } else {
                            (q.correct_index + 1) % q.choices.len()
                        };
                        (id.clone(), pick)
                    })
                    .collect();
                match session.submit_answers(&answers) {
                    Ok(out) => {
                        println!(
                            "{:?} {}: {} ({}) -> {:?}",
                            out.graded.phase,
                            out.graded.concept_id,
                            out.graded.score,
                            out.graded.level,
                            out.decision
                        );
                        for f in out.trace.firings() {
                            println!("    [{}] {}", f.rule, f.justification);
                        }
                    }
                    Err(e) => {
                        println!("stopped: {e}");
                        break;
                    }
                }
            }
        }
    }

    if let Step::Completed {
        learner_level,
        topics,
    } = session.current_step()
    {
        println!("\ncompleted as {learner_level:?}");
        for t in topics {
            println!("  {:<12} {:>3} {}", t.topic_id, t.score, t.level);
        }
    }
    let problems = audit::check_transcript(&kb, session.model().transcript());
    println!(
        "{} transcript entries, {} audit problems",
        session.model().transcript().len(),
        problems.len()
    );
}
