//! Bundled sample content: a small arithmetic and fractions curriculum and a
//! placeholder style questionnaire.
//!
//! The questionnaire prompts are illustrative only. They have the right
//! shape (three items per style, 1..=5 scale) but are not a validated
//! instrument; deployments should load their own with
//! [`Questionnaire::from_path`].

use crate::kb::KnowledgeBase;
use crate::learner::Questionnaire;
use crate::pedagogy::PedagogyConfig;

pub const KNOWLEDGE_BASE_JSON: &str = include_str!("../content/sample_kb.json");
pub const QUESTIONNAIRE_JSON: &str = include_str!("../content/questionnaire.json");

pub fn knowledge_base() -> KnowledgeBase {
    KnowledgeBase::from_json_str(KNOWLEDGE_BASE_JSON).expect("bundled knowledge base is valid")
}

pub fn questionnaire() -> Questionnaire {
    Questionnaire::from_json_str(QUESTIONNAIRE_JSON).expect("bundled questionnaire is valid")
}

pub fn pedagogy() -> PedagogyConfig {
    PedagogyConfig::default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimConfig;

    #[test]
    fn shipped_config_files_match_the_defaults() {
        let ped = PedagogyConfig::from_json_str(include_str!("../content/pedagogy.json")).unwrap();
        assert_eq!(ped, PedagogyConfig::default());
        let sim = SimConfig::from_json_str(include_str!("../content/sim.json")).unwrap();
        assert_eq!(sim, SimConfig::default());
    }

    #[test]
    fn sample_bank_shape() {
        let kb = knowledge_base();
        assert_eq!(kb.topics().len(), 2);
        assert!(kb.topics()[0].concept_ids.len() >= 2);
        assert_eq!(kb.concept_count(), 6);
        assert_eq!(questionnaire().items().len(), 15);
    }
}
