//! Seeded population simulator.
//!
//! Synthetic learners answer each question correctly with a probability
//! that depends on its difficulty, plus a bonus on post-tests that follow a
//! presentation in the learner's preferred method. Every learner is driven
//! through a real [`Session`]; the only difference between policies is the
//! pedagogy configuration handed to the engine.
//!
//! All figures produced here come from this response model. They are
//! harness outputs, not measurements of real learners.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::StepClock;
use crate::kb::{Difficulty, EducationMethod, KnowledgeBase};
use crate::learner::{KnowledgeLevel, LearnerLevel, LearnerModel, LearningStyle, Questionnaire};
use crate::pedagogy::{DifficultyMix, LevelMix, PedagogyConfig, PedagogyError, PreferenceTable};
use crate::seed;
use crate::session::{audit, Answers, Session, SessionError, SessionState};

pub const DEFAULT_STEP_CAP: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// The full engine as configured.
    Adaptive,
    /// Text for every presentation and one fixed difficulty mix for everyone.
    Static,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Adaptive => "adaptive",
            Policy::Static => "static",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adaptive" => Ok(Policy::Adaptive),
            "static" => Ok(Policy::Static),
            other => Err(format!(
                "unknown policy {other:?} (expected adaptive or static)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    Config(String),
    #[error(transparent)]
    Pedagogy(#[from] PedagogyError),
}

/// One synthetic learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLearnerProfile {
    pub true_style: LearningStyle,
    pub ability: BTreeMap<Difficulty, f64>,
    /// Added to every post-test probability when the concept was last
    /// presented in `preferred_method`.
    pub method_match_bonus: f64,
    pub preferred_method: EducationMethod,
}

impl SimLearnerProfile {
    pub fn new(true_style: LearningStyle, ability: [f64; 3], method_match_bonus: f64) -> Self {
        SimLearnerProfile {
            true_style,
            ability: Difficulty::ALL.into_iter().zip(ability).collect(),
            method_match_bonus,
            preferred_method: PreferenceTable::default().preferred(true_style),
        }
    }

    /// Probability of a correct answer, clamped to `[0, 1]`.
    pub fn p_correct(&self, difficulty: Difficulty, matched: bool) -> f64 {
        let base = self
            .ability
            .get(&difficulty)
            .copied()
            .unwrap_or(0.0)
            .clamp(0.0, 1.0);
        let boosted = if matched {
            base + self.method_match_bonus
        } else {
            base
        };
        boosted.clamp(0.0, 1.0)
    }
}

/// Population and run parameters. Loaded from JSON; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub method_match_bonus: f64,
    /// Medium-difficulty ability is drawn uniformly from this range.
    pub ability_min: f64,
    pub ability_max: f64,
    /// Easy questions are this much easier than medium, hard this much
    /// harder. Zero by default: a non-zero spread makes the level-based mixes
    /// themselves move post-test scores, which confounds the presentation
    /// effect the paired comparison is meant to isolate.
    pub difficulty_spread: f64,
    pub step_cap: u32,
    /// Engine configuration used by the adaptive policy.
    pub pedagogy: PedagogyConfig,
    /// Difficulty mix every learner gets under the static policy.
    pub static_mix: DifficultyMix,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            method_match_bonus: 0.2,
            ability_min: 0.2,
            ability_max: 0.9,
            difficulty_spread: 0.0,
            step_cap: DEFAULT_STEP_CAP,
            pedagogy: PedagogyConfig::default(),
            static_mix: DifficultyMix::new(3, 1, 1),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.ability_min) || !unit(self.ability_max) || self.ability_min > self.ability_max
        {
            return Err(SimError::Config(format!(
                "need 0 <= ability_min <= ability_max <= 1, got {}..{}",
                self.ability_min, self.ability_max
            )));
        }
        if !(-1.0..=1.0).contains(&self.method_match_bonus) {
            return Err(SimError::Config(
                "method_match_bonus must lie in [-1, 1]".into(),
            ));
        }
        if !unit(self.difficulty_spread) {
            return Err(SimError::Config(
                "difficulty_spread must lie in [0, 1]".into(),
            ));
        }
        if self.step_cap == 0 {
            return Err(SimError::Config("step_cap must be positive".into()));
        }
        self.pedagogy.validate()?;
        LevelMix::uniform(self.static_mix)?;
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Self, SimError> {
        let cfg: SimConfig =
            serde_json::from_str(json).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| SimError::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    /// The engine configuration a policy runs with.
    pub fn pedagogy_for(&self, policy: Policy) -> Result<PedagogyConfig, SimError> {
        match policy {
            Policy::Adaptive => Ok(self.pedagogy.clone()),
            Policy::Static => {
                use EducationMethod::*;
                Ok(PedagogyConfig {
                    preferences: PreferenceTable::uniform([Text, Film, DynamicView, Game, Puzzle])?,
                    level_mix: LevelMix::uniform(self.static_mix)?,
                    rotate_on_retrain: false,
                    ..self.pedagogy.clone()
                })
            }
        }
    }
}

/// Draws `n` learner profiles. Learner `i` depends only on `(seed, i)`.
pub fn generate_population(n: usize, seed: u64, config: &SimConfig) -> Vec<SimLearnerProfile> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed, i as u64));
            let style = LearningStyle::ALL[rng.gen_range(0..LearningStyle::ALL.len())];
            let medium = if config.ability_max > config.ability_min {
                rng.gen_range(config.ability_min..=config.ability_max)
            } else {
                config.ability_min
            };
            let s = config.difficulty_spread;
            SimLearnerProfile::new(
                style,
                [
                    (medium + s).clamp(0.0, 1.0),
                    medium,
                    (medium - s).clamp(0.0, 1.0),
                ],
                config.method_match_bonus,
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Capped,
    BankExhausted,
}

/// Result of one simulated learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerRun {
    pub index: usize,
    pub outcome: Outcome,
    pub steps: u32,
    pub tests_taken: u32,
    pub concepts_mastered: u32,
    pub learner_level: LearnerLevel,
    /// Final level of each attempted concept.
    pub concept_levels: BTreeMap<String, KnowledgeLevel>,
    pub audit_violations: Vec<String>,
    pub model: LearnerModel,
}

fn questionnaire_responses(
    q: &Questionnaire,
    style: LearningStyle,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, i64> {
    q.items()
        .iter()
        .map(|item| {
            let v = if item.target_style == style {
                5
            } else {
                rng.gen_range(1..=4)
            };
            (item.id.clone(), v)
        })
        .collect()
}

/// Drives one learner through a full session under `pedagogy`.
pub fn run_learner(
    kb: &Arc<KnowledgeBase>,
    questionnaire: &Arc<Questionnaire>,
    pedagogy: &Arc<PedagogyConfig>,
    profile: &SimLearnerProfile,
    index: usize,
    seed: u64,
    step_cap: u32,
) -> LearnerRun {
    let learner_seed = seed::mix(seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(learner_seed, 1));
    let model = LearnerModel::with_seed(
        format!("sim-{index}"),
        format!("Simulated learner {index}"),
        learner_seed,
    );
    let mut session = Session::start(
        model,
        kb.clone(),
        pedagogy.clone(),
        questionnaire.clone(),
        Arc::new(StepClock::epoch()),
    );

    let mut steps = 0;
    let mut tests_taken = 0;
    let mut last_method: BTreeMap<String, EducationMethod> = BTreeMap::new();
    let outcome = loop {
        if session.is_completed() {
            break Outcome::Completed;
        }
        if steps >= step_cap {
            break Outcome::Capped;
        }
        let result = match session.state().clone() {
            SessionState::AwaitQuestionnaire => {
                let responses =
                    questionnaire_responses(questionnaire, profile.true_style, &mut rng);
                session.submit_questionnaire(&responses).map(|_| ())
            }
            SessionState::SelectingConcept => session.advance().map(|_| ()),
            SessionState::Presenting {
                concept_id, method, ..
            } => {
                last_method.insert(concept_id, method);
                session.advance().map(|_| ())
            }
            SessionState::AwaitPreTest { plan } | SessionState::AwaitPostTest { plan } => {
                let matched = matches!(session.state(), SessionState::AwaitPostTest { .. })
                    && last_method.get(&plan.concept_id) == Some(&profile.preferred_method);
                let answers: Answers = plan
                    .question_ids
                    .iter()
                    .map(|id| {
                        let q = kb.question(id).expect("planned question exists");
                        let choice = if rng.gen_bool(profile.p_correct(q.difficulty, matched)) {
                            q.correct_index
                        } else {
                            let k = rng.gen_range(1..q.choices.len());
                            (q.correct_index + k) % q.choices.len()
                        };
                        (id.clone(), choice)
                    })
                    .collect();
                tests_taken += 1;
                session.submit_answers(&answers).map(|_| ())
            }
            SessionState::Completed => unreachable!("checked above"),
        };
        match result {
            Ok(()) => steps += 1,
            Err(SessionError::InsufficientBank { .. }) => break Outcome::BankExhausted,
            Err(e) => panic!("simulated learner {index} hit an engine error: {e}"),
        }
    };

    let bar = pedagogy.mastery_bar;
    let model = session.into_model();
    let concepts_mastered = kb
        .concepts()
        .filter(|c| model.has_mastered(&c.id, bar))
        .count() as u32;
    LearnerRun {
        index,
        outcome,
        steps,
        tests_taken,
        concepts_mastered,
        learner_level: model.level(),
        concept_levels: crate::session::concept_levels(&model),
        audit_violations: audit::check_transcript(kb, model.transcript()),
        model,
    }
}

/// Aggregate statistics for one policy over one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub policy: Policy,
    pub learners: usize,
    pub seed: u64,
    pub method_match_bonus: f64,
    pub concept_count: usize,
    /// Mean fraction of the curriculum mastered, in `[0, 1]`.
    pub mastery_rate: f64,
    pub mean_concepts_mastered: f64,
    /// Graded tests divided by mastered concepts; `None` when nothing was mastered.
    pub tests_per_mastered_concept: Option<f64>,
    pub total_tests: u64,
    pub outcomes: BTreeMap<String, u64>,
    /// Final level of every (learner, concept) pair, `not_attempted` included.
    pub knowledge_levels: BTreeMap<String, u64>,
    pub learner_levels: BTreeMap<String, u64>,
    pub audit_violations: u64,
    pub runtime_secs: f64,
    pub note: String,
}

pub const HARNESS_NOTE: &str =
    "harness-derived figures from a synthetic response model; not an empirical result";

impl SimReport {
    /// JSON with the wall-clock runtime zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.runtime_secs = 0.0;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }
}

fn level_key<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Runs `profiles` in parallel under `policy` and reduces by learner index.
pub fn simulate_profiles(
    kb: &KnowledgeBase,
    questionnaire: &Questionnaire,
    profiles: &[SimLearnerProfile],
    seed: u64,
    policy: Policy,
    config: &SimConfig,
) -> Result<(SimReport, Vec<LearnerRun>), SimError> {
    let started = Instant::now();
    config.validate()?;
    let pedagogy = Arc::new(config.pedagogy_for(policy)?);
    let kb_arc = Arc::new(kb.clone());
    let q_arc = Arc::new(questionnaire.clone());

    let mut runs: Vec<LearnerRun> = profiles
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_learner(&kb_arc, &q_arc, &pedagogy, p, i, seed, config.step_cap))
        .collect();
    runs.sort_by_key(|r| r.index);

    let n = runs.len();
    let concept_count = kb.concept_count();
    let mastered: u64 = runs.iter().map(|r| u64::from(r.concepts_mastered)).sum();
    let total_tests: u64 = runs.iter().map(|r| u64::from(r.tests_taken)).sum();

    let mut outcomes = BTreeMap::new();
    let mut knowledge_levels = BTreeMap::new();
    let mut learner_levels = BTreeMap::new();
    for r in &runs {
        *outcomes.entry(level_key(&r.outcome)).or_insert(0) += 1;
        *learner_levels
            .entry(level_key(&r.learner_level))
            .or_insert(0) += 1;
        for c in kb.concepts() {
            let key = r
                .concept_levels
                .get(&c.id)
                .map_or_else(|| "not_attempted".to_string(), level_key);
            *knowledge_levels.entry(key).or_insert(0) += 1;
        }
    }

    let (mastery_rate, mean_concepts_mastered) = if n == 0 || concept_count == 0 {
        (0.0, 0.0)
    } else {
        (
            mastered as f64 / (n * concept_count) as f64,
            mastered as f64 / n as f64,
        )
    };
    let report = SimReport {
        policy,
        learners: n,
        seed,
        method_match_bonus: config.method_match_bonus,
        concept_count,
        mastery_rate,
        mean_concepts_mastered,
        tests_per_mastered_concept: (mastered > 0).then(|| total_tests as f64 / mastered as f64),
        total_tests,
        outcomes,
        knowledge_levels,
        learner_levels,
        audit_violations: runs.iter().map(|r| r.audit_violations.len() as u64).sum(),
        runtime_secs: started.elapsed().as_secs_f64().max(f64::MIN_POSITIVE),
        note: HARNESS_NOTE.to_string(),
    };
    Ok((report, runs))
}

/// Generates `n` learners from `seed` and runs them under `policy`.
pub fn simulate_population(
    kb: &KnowledgeBase,
    questionnaire: &Questionnaire,
    n: usize,
    seed: u64,
    policy: Policy,
    config: &SimConfig,
) -> Result<SimReport, SimError> {
    config.validate()?;
    let profiles = generate_population(n, seed, config);
    simulate_profiles(kb, questionnaire, &profiles, seed, policy, config).map(|(r, _)| r)
}

/// Paired comparison of both policies on one generated population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub learners: usize,
    pub seed: u64,
    pub method_match_bonus: f64,
    /// Set when the bonus is zero, so any gap comes from the mixes alone.
    pub no_bonus_control: bool,
    /// Adaptive minus static, in percentage points.
    pub mastery_rate_delta_pts: f64,
    /// Adaptive minus static; `None` if either side mastered nothing.
    pub tests_per_mastery_delta: Option<f64>,
    pub adaptive: SimReport,
    #[serde(rename = "static")]
    pub static_: SimReport,
    pub note: String,
}

impl CompareReport {
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.adaptive.runtime_secs = 0.0;
        copy.static_.runtime_secs = 0.0;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }
}

pub fn compare_policies(
    kb: &KnowledgeBase,
    questionnaire: &Questionnaire,
    n: usize,
    seed: u64,
    config: &SimConfig,
) -> Result<CompareReport, SimError> {
    config.validate()?;
    let profiles = generate_population(n, seed, config);
    let (adaptive, _) =
        simulate_profiles(kb, questionnaire, &profiles, seed, Policy::Adaptive, config)?;
    let (static_, _) =
        simulate_profiles(kb, questionnaire, &profiles, seed, Policy::Static, config)?;
    let tests_per_mastery_delta = adaptive
        .tests_per_mastered_concept
        .zip(static_.tests_per_mastered_concept)
        .map(|(a, s)| a - s);
    Ok(CompareReport {
        learners: n,
        seed,
        method_match_bonus: config.method_match_bonus,
        no_bonus_control: config.method_match_bonus == 0.0,
        mastery_rate_delta_pts: (adaptive.mastery_rate - static_.mastery_rate) * 100.0,
        tests_per_mastery_delta,
        adaptive,
        static_,
        note: HARNESS_NOTE.to_string(),
    })
}
