use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PedagogyError;
use crate::kb::{Difficulty, EducationMethod};
use crate::learner::{KnowledgeLevel, LearnerLevel, LearningStyle};

/// Presentation order of education methods for each learning style.
/// Every row is a permutation of all five methods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PreferenceTable(BTreeMap<LearningStyle, Vec<EducationMethod>>);

impl PreferenceTable {
    pub fn new(rows: BTreeMap<LearningStyle, Vec<EducationMethod>>) -> Result<Self, PedagogyError> {
        for style in LearningStyle::ALL {
            let row = rows.get(&style).ok_or_else(|| {
                PedagogyError::Config(format!("preferences: no row for style `{style}`"))
            })?;
            let distinct: BTreeSet<_> = row.iter().collect();
            if row.len() != EducationMethod::ALL.len() || distinct.len() != row.len() {
                return Err(PedagogyError::Config(format!(
                    "preferences.{style}: must list each of the five methods exactly once"
                )));
            }
        }
        Ok(PreferenceTable(rows))
    }

    /// Every style shares the same order.
    pub fn uniform(row: [EducationMethod; 5]) -> Result<Self, PedagogyError> {
        Self::new(
            LearningStyle::ALL
                .iter()
                .map(|s| (*s, row.to_vec()))
                .collect(),
        )
    }

    pub fn row(&self, style: LearningStyle) -> &[EducationMethod] {
        &self.0[&style]
    }

    /// First-choice method of a style.
    pub fn preferred(&self, style: LearningStyle) -> EducationMethod {
        self.row(style)[0]
    }
}

impl Default for PreferenceTable {
    fn default() -> Self {
        use EducationMethod::*;
        use LearningStyle::*;
        PreferenceTable(
            [
                (Ss, vec![Game, DynamicView, Puzzle, Film, Text]),
                (Goa, vec![Puzzle, Text, Film, DynamicView, Game]),
                (Eia, vec![Puzzle, Text, DynamicView, Film, Game]),
                (Ca, vec![Text, Film, DynamicView, Puzzle, Game]),
                (Dla, vec![DynamicView, Film, Game, Puzzle, Text]),
            ]
            .into(),
        )
    }
}

impl<'de> Deserialize<'de> for PreferenceTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = BTreeMap::deserialize(d)?;
        PreferenceTable::new(rows).map_err(serde::de::Error::custom)
    }
}

/// How many questions of each difficulty a test draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifficultyMix {
    pub easy: u32,
    pub medium: u32,
    pub hard: u32,
}

impl DifficultyMix {
    pub const fn new(easy: u32, medium: u32, hard: u32) -> Self {
        DifficultyMix { easy, medium, hard }
    }

    pub fn count(&self, d: Difficulty) -> u32 {
        match d {
            Difficulty::Easy => self.easy,
            Difficulty::Medium => self.medium,
            Difficulty::Hard => self.hard,
        }
    }

    pub fn total(&self) -> u32 {
        self.easy + self.medium + self.hard
    }
}

/// Question mix per learner level. Every row asks at least one question of
/// each difficulty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct LevelMix(BTreeMap<LearnerLevel, DifficultyMix>);

impl LevelMix {
    pub fn new(rows: BTreeMap<LearnerLevel, DifficultyMix>) -> Result<Self, PedagogyError> {
        for level in LearnerLevel::ALL {
            let row = rows.get(&level).ok_or_else(|| {
                PedagogyError::Config(format!("level_mix: no row for level {level:?}"))
            })?;
            if Difficulty::ALL.iter().any(|d| row.count(*d) == 0) {
                return Err(PedagogyError::Config(format!(
                    "level_mix: row {level:?} must ask at least one question of every difficulty"
                )));
            }
        }
        Ok(LevelMix(rows))
    }

    /// The same row for every learner level.
    pub fn uniform(row: DifficultyMix) -> Result<Self, PedagogyError> {
        Self::new(LearnerLevel::ALL.iter().map(|l| (*l, row)).collect())
    }

    pub fn row(&self, level: LearnerLevel) -> DifficultyMix {
        self.0[&level]
    }
}

impl Default for LevelMix {
    fn default() -> Self {
        use LearnerLevel::*;
        LevelMix(
            [
                (Weak, DifficultyMix::new(3, 1, 1)),
                (SlowLearner, DifficultyMix::new(3, 1, 1)),
                (Smart, DifficultyMix::new(1, 3, 1)),
                (Genius, DifficultyMix::new(1, 1, 3)),
            ]
            .into(),
        )
    }
}

impl<'de> Deserialize<'de> for LevelMix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = BTreeMap::deserialize(d)?;
        LevelMix::new(rows).map_err(serde::de::Error::custom)
    }
}

/// Pre-test gate. Scores at or above `skip` skip the concept, scores at or
/// above `train` go straight to training, lower scores look for remediation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateThresholds {
    pub skip: u8,
    pub train: u8,
}

impl Default for GateThresholds {
    fn default() -> Self {
        GateThresholds {
            skip: KnowledgeLevel::Excellent.lower_bound(),
            train: KnowledgeLevel::Good.lower_bound(),
        }
    }
}

fn default_mastery_bar() -> KnowledgeLevel {
    KnowledgeLevel::Good
}

/// Deploy-time pedagogy configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedagogyConfig {
    #[serde(default)]
    pub preferences: PreferenceTable,
    #[serde(default)]
    pub level_mix: LevelMix,
    #[serde(default)]
    pub thresholds: GateThresholds,
    /// Lowest knowledge level at which a concept counts as learned.
    #[serde(default = "default_mastery_bar")]
    pub mastery_bar: KnowledgeLevel,
    /// Move to the next preferred method each time a concept is retrained.
    /// When off, every round uses the style's first available method.
    #[serde(default = "yes")]
    pub rotate_on_retrain: bool,
}

fn yes() -> bool {
    true
}

impl Default for PedagogyConfig {
    fn default() -> Self {
        PedagogyConfig {
            preferences: PreferenceTable::default(),
            level_mix: LevelMix::default(),
            thresholds: GateThresholds::default(),
            mastery_bar: default_mastery_bar(),
            rotate_on_retrain: true,
        }
    }
}

impl PedagogyConfig {
    pub fn validate(&self) -> Result<(), PedagogyError> {
        let GateThresholds { skip, train } = self.thresholds;
        if skip > 100 || skip <= train {
            return Err(PedagogyError::Config(format!(
                "thresholds: need train < skip <= 100, got train={train} skip={skip}"
            )));
        }
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Self, PedagogyError> {
        let cfg: PedagogyConfig =
            serde_json::from_str(json).map_err(|e| PedagogyError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PedagogyError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| PedagogyError::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }
}

impl Default for DifficultyMix {
    fn default() -> Self {
        DifficultyMix::new(1, 1, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = PedagogyConfig::default();
        cfg.validate().unwrap();
        PreferenceTable::new(cfg.preferences.0.clone()).unwrap();
        LevelMix::new(cfg.level_mix.0.clone()).unwrap();
        assert_eq!(
            cfg.thresholds,
            GateThresholds {
                skip: 86,
                train: 51
            }
        );
        assert_eq!(cfg.mastery_bar, KnowledgeLevel::Good);
    }

    #[test]
    fn empty_document_means_defaults() {
        assert_eq!(
            PedagogyConfig::from_json_str("{}").unwrap(),
            PedagogyConfig::default()
        );
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = PedagogyConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(PedagogyConfig::from_json_str(&json).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad_perm = r#"{"preferences": {"ss": ["game","game","text","film","puzzle"],
            "goa": ["game","dynamic_view","text","film","puzzle"],
            "eia": ["game","dynamic_view","text","film","puzzle"],
            "ca": ["game","dynamic_view","text","film","puzzle"],
            "dla": ["game","dynamic_view","text","film","puzzle"]}}"#;
        assert!(PedagogyConfig::from_json_str(bad_perm).is_err());

        let zero = r#"{"level_mix": {"weak": {"easy":1,"medium":0,"hard":1},
            "slow_learner": {"easy":1,"medium":1,"hard":1},
            "smart": {"easy":1,"medium":1,"hard":1},
            "genius": {"easy":1,"medium":1,"hard":1}}}"#;
        assert!(PedagogyConfig::from_json_str(zero).is_err());

        assert!(
            PedagogyConfig::from_json_str(r#"{"thresholds": {"skip": 50, "train": 60}}"#).is_err()
        );
        assert!(
            PedagogyConfig::from_json_str(r#"{"thresholds": {"skip": 101, "train": 60}}"#).is_err()
        );
    }
}
