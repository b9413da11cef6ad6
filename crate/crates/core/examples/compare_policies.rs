//! Paired adaptive-vs-static comparison on the bundled curriculum.
//!
//! ```sh
//! cargo run --release -p simtutor-core --example compare_policies -- 500 42 0.2
//! ```
//! Arguments: learners, seed, method-match bonus, difficulty spread.

use simtutor_core::sample;
use simtutor_core::sim::{compare_policies, SimConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let bonus = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let defaults = SimConfig::default();
    let spread = args
        .get(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(defaults.difficulty_spread);

    let config = SimConfig {
        method_match_bonus: bonus,
        difficulty_spread: spread,
        ..defaults
    };
    let report = compare_policies(
        &sample::knowledge_base(),
        &sample::questionnaire(),
        n,
        seed,
        &config,
    )
    .expect("default config is valid");

    for r in [&report.adaptive, &report.static_] {
        println!(
            "{:<8} mastery {:>5.1}%  concepts {:>4.2}/{}  tests/mastered {:>5.2}  outcomes {:?}  ({:.2}s)",
            r.policy.as_str(),
            r.mastery_rate * 100.0,
            r.mean_concepts_mastered,
            r.concept_count,
            r.tests_per_mastered_concept.unwrap_or(f64::NAN),
            r.outcomes,
            r.runtime_secs,
        );
    }
    println!(
        "delta    {:+.2} points{}",
        report.mastery_rate_delta_pts,
        if report.no_bonus_control {
            "  (no-bonus control)"
        } else {
            ""
        }
    );
    println!("{}", report.note);
}
