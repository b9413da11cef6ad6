use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::LearningStyle;

pub const RESPONSE_MIN: i64 = 1;
pub const RESPONSE_MAX: i64 = 5;

/// Learner answers keyed by questionnaire item id.
pub type Responses = BTreeMap<String, i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionnaireItem {
    pub id: String,
    pub prompt: String,
    pub target_style: LearningStyle,
}

/// A learning-style questionnaire. Every item is answered on a 1..=5 scale
/// and contributes its response to the style it targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Questionnaire {
    items: Vec<QuestionnaireItem>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuestionnaireError {
    #[error("no response for item {0:?}")]
    MissingResponse(String),
    #[error("response {value} for item {item:?} is outside {RESPONSE_MIN}..={RESPONSE_MAX}")]
    OutOfRangeResponse { item: String, value: i64 },
    #[error("response for unknown item {0:?}")]
    UnknownItem(String),
    #[error("invalid questionnaire: {0}")]
    Invalid(String),
}

impl Questionnaire {
    pub fn new(items: Vec<QuestionnaireItem>) -> Result<Self, QuestionnaireError> {
        let mut ids = BTreeSet::new();
        for item in &items {
            if item.id.is_empty() {
                return Err(QuestionnaireError::Invalid("empty item id".into()));
            }
            if !ids.insert(item.id.as_str()) {
                return Err(QuestionnaireError::Invalid(format!(
                    "duplicate item id {:?}",
                    item.id
                )));
            }
        }
        let covered: BTreeSet<LearningStyle> = items.iter().map(|i| i.target_style).collect();
        if let Some(missing) = LearningStyle::ALL.iter().find(|s| !covered.contains(s)) {
            return Err(QuestionnaireError::Invalid(format!(
                "no item targets style `{missing}`"
            )));
        }
        Ok(Questionnaire { items })
    }

    pub fn from_json_str(json: &str) -> Result<Self, QuestionnaireError> {
        let items: Vec<QuestionnaireItem> =
            serde_json::from_str(json).map_err(|e| QuestionnaireError::Invalid(e.to_string()))?;
        Self::new(items)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, QuestionnaireError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| QuestionnaireError::Invalid(e.to_string()))?;
        Self::from_json_str(&text)
    }

    pub fn items(&self) -> &[QuestionnaireItem] {
        &self.items
    }

    pub fn score(&self, responses: &Responses) -> Result<StyleProfile, QuestionnaireError> {
        score_questionnaire(self, responses)
    }
}

impl<'de> Deserialize<'de> for Questionnaire {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<QuestionnaireItem>::deserialize(d)?;
        Questionnaire::new(items).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleProfile {
    pub scores: BTreeMap<LearningStyle, u32>,
    pub dominant: LearningStyle,
}

impl StyleProfile {
    /// Builds a profile from raw per-style totals; the dominant style is the
    /// maximum, ties going to the earlier style in `SS, GOA, EIA, CA, DLA`.
    pub fn from_scores(mut scores: BTreeMap<LearningStyle, u32>) -> Self {
        for style in LearningStyle::ALL {
            scores.entry(style).or_insert(0);
        }
        let mut dominant = LearningStyle::Ss;
        for style in LearningStyle::ALL {
            if scores[&style] > scores[&dominant] {
                dominant = style;
            }
        }
        StyleProfile { scores, dominant }
    }
}

/// Sums responses per targeted style.
pub fn score_questionnaire(
    q: &Questionnaire,
    responses: &Responses,
) -> Result<StyleProfile, QuestionnaireError> {
    if let Some(unknown) = responses
        .keys()
        .find(|k| !q.items.iter().any(|i| &i.id == *k))
    {
        return Err(QuestionnaireError::UnknownItem(unknown.clone()));
    }
    let mut scores = BTreeMap::new();
    for item in &q.items {
        let value = *responses
            .get(&item.id)
            .ok_or_else(|| QuestionnaireError::MissingResponse(item.id.clone()))?;
        if !(RESPONSE_MIN..=RESPONSE_MAX).contains(&value) {
            return Err(QuestionnaireError::OutOfRangeResponse {
                item: item.id.clone(),
                value,
            });
        }
        *scores.entry(item.target_style).or_insert(0) += value as u32;
    }
    Ok(StyleProfile::from_scores(scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn one_per_style() -> Questionnaire {
        Questionnaire::new(
            LearningStyle::ALL
                .iter()
                .map(|s| QuestionnaireItem {
                    id: format!("i-{s}"),
                    prompt: String::new(),
                    target_style: *s,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_responses_break_ties_by_declaration_order() {
        let q = sample::questionnaire();
        let responses: Responses = q.items().iter().map(|i| (i.id.clone(), 3)).collect();
        let p = score_questionnaire(&q, &responses).unwrap();
        assert!(p.scores.values().all(|&v| v == 9));
        assert_eq!(p.dominant, LearningStyle::Ss);
    }

    #[test]
    fn unique_maximum_wins() {
        let q = one_per_style();
        let responses: Responses = q
            .items()
            .iter()
            .map(|i| {
                let v = if i.target_style == LearningStyle::Goa {
                    5
                } else {
                    1
                };
                (i.id.clone(), v)
            })
            .collect();
        assert_eq!(
            score_questionnaire(&q, &responses).unwrap().dominant,
            LearningStyle::Goa
        );
    }

    #[test]
    fn later_style_tie_goes_to_earlier() {
        let p = StyleProfile::from_scores(
            [
                (LearningStyle::Ca, 7),
                (LearningStyle::Dla, 7),
                (LearningStyle::Ss, 2),
            ]
            .into(),
        );
        assert_eq!(p.dominant, LearningStyle::Ca);
    }

    #[test]
    fn response_errors() {
        let q = one_per_style();
        let mut responses: Responses = q.items().iter().map(|i| (i.id.clone(), 3)).collect();
        responses.remove("i-eia");
        assert_eq!(
            score_questionnaire(&q, &responses),
            Err(QuestionnaireError::MissingResponse("i-eia".into()))
        );
        responses.insert("i-eia".into(), 6);
        assert!(matches!(
            score_questionnaire(&q, &responses),
            Err(QuestionnaireError::OutOfRangeResponse { value: 6, .. })
        ));
        responses.insert("i-eia".into(), 0);
        assert!(matches!(
            score_questionnaire(&q, &responses),
            Err(QuestionnaireError::OutOfRangeResponse { value: 0, .. })
        ));
        responses.insert("i-eia".into(), 2);
        responses.insert("extra".into(), 2);
        assert_eq!(
            score_questionnaire(&q, &responses),
            Err(QuestionnaireError::UnknownItem("extra".into()))
        );
    }

    #[test]
    fn questionnaire_must_cover_every_style() {
        let items = vec![QuestionnaireItem {
            id: "a".into(),
            prompt: String::new(),
            target_style: LearningStyle::Ss,
        }];
        assert!(matches!(
            Questionnaire::new(items),
            Err(QuestionnaireError::Invalid(_))
        ));
        assert!(
            Questionnaire::from_json_str(r#"[{"id":"a","prompt":"p","target_style":"xx"}]"#)
                .is_err()
        );
    }
}
