//! Loads a knowledge base, prints its curriculum and shows what validation
//! reports for a broken document.
//!
//! ```sh
//! cargo run -p simtutor-core --example load_knowledge_base [path/to/kb.json]
//! ```

use simtutor_core::{sample, KnowledgeBase};

fn main() {
    let kb = match std::env::args().nth(1) {
        Some(path) => KnowledgeBase::from_path(&path).unwrap_or_else(|e| {
            eprintln!("{path}: {e}");
            for v in e.violations() {
                eprintln!("  {v}");
            }
            std::process::exit(2);
        }),
        None => sample::knowledge_base(),
    };

    println!(
        "{} topics, {} concepts, {} questions",
        kb.topics().len(),
        kb.concept_count(),
        kb.questions().count()
    );
    for (i, id) in kb.curriculum_order().iter().enumerate() {
        let c = kb.concept(id).unwrap();
        let methods: Vec<&str> = c.assets.keys().map(|m| m.as_str()).collect();
        println!(
            "{:>2}. {:<18} sections {}  key section {:<22} methods {}  requires {:?}",
            i + 1,
            c.id,
            c.sections.len(),
            c.most_important_section().id,
            methods.join(","),
            c.prerequisites,
        );
    }

    // Two concepts requiring each other.
    let mut doc = kb.to_document();
    let (a, b) = (doc.concepts[0].id.clone(), doc.concepts[1].id.clone());
    doc.concepts[0].prerequisites.push(b);
    if !doc.concepts[1].prerequisites.contains(&a) {
        doc.concepts[1].prerequisites.push(a);
    }
    match KnowledgeBase::from_document(doc) {
        Ok(_) => println!("\nunexpectedly accepted a cyclic document"),
        Err(e) => {
            println!("\ncyclic document rejected:");
            for v in e.violations() {
                println!("  {v}");
            }
        }
    }
}
