//! Runs a synthetic population under one policy and prints the report.
//!
//! ```sh
//! cargo run --release -p simtutor-core --example simulate_population -- adaptive 300 42
//! ```

use simtutor_core::sample;
use simtutor_core::sim::{simulate_population, Policy, SimConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let policy: Policy = args
        .first()
        .map_or(Policy::Adaptive, |s| s.parse().expect("adaptive or static"));
    let n = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(42);

    let report = simulate_population(
        &sample::knowledge_base(),
        &sample::questionnaire(),
        n,
        seed,
        policy,
        &SimConfig::default(),
    )
    .expect("default config is valid");
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
