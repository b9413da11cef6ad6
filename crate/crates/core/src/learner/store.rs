use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use super::{LearnerModel, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("learner {0:?} not found")]
    NotFound(String),
    #[error("learner id {0:?} is not a valid record key")]
    InvalidId(String),
    #[error("learner record {id:?} has unsupported schema version {version}")]
    UnsupportedVersion { id: String, version: u32 },
    #[error("storage failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt learner record: {0}")]
    Corrupt(#[from] serde_json::Error),
}

/// Destination for model snapshots taken after every session transition.
pub trait ModelSink: Send + Sync {
    fn persist(&self, model: &LearnerModel) -> Result<(), StoreError>;
}

/// File-per-learner JSON document store.
///
/// Writes go to a temporary file in the same directory and are renamed into
/// place, so a reader sees either the old or the new document. Writes for
/// one learner are serialized; different learners proceed in parallel.
#[derive(Debug)]
pub struct LearnerStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn valid_key(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

impl LearnerStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(LearnerStore {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_key(id) {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    pub fn save(&self, model: &LearnerModel) -> Result<(), StoreError> {
        let path = self.path_for(model.learner_id())?;
        let bytes = serde_json::to_vec_pretty(model)?;
        let lock = self.lock_for(model.learner_id());
        let _guard = lock.lock().expect("learner lock poisoned");
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| StoreError::Io(e.error))?;
        Ok(())
    }

    pub fn load(&self, learner_id: &str) -> Result<LearnerModel, StoreError> {
        let path = match self.path_for(learner_id) {
            Ok(p) => p,
            Err(_) => return Err(StoreError::NotFound(learner_id.to_string())),
        };
        let lock = self.lock_for(learner_id);
        let _guard = lock.lock().expect("learner lock poisoned");
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(learner_id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let model: LearnerModel = serde_json::from_slice(&bytes)?;
        if model.schema_version() != SCHEMA_VERSION {
            return Err(StoreError::UnsupportedVersion {
                id: learner_id.to_string(),
                version: model.schema_version(),
            });
        }
        Ok(model)
    }

    pub fn exists(&self, learner_id: &str) -> bool {
        self.path_for(learner_id)
            .map(|p| p.exists())
            .unwrap_or(false)
    }
}

impl ModelSink for LearnerStore {
    fn persist(&self, model: &LearnerModel) -> Result<(), StoreError> {
        self.save(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::StyleProfile;
    use crate::{sample, EducationMethod, LearningStyle};
    use chrono::DateTime;
    use proptest::prelude::*;

    #[test]
    fn save_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let store = LearnerStore::open(dir.path()).unwrap();
        let m = LearnerModel::new("ada", "Ada");
        store.save(&m).unwrap();
        assert_eq!(store.load("ada").unwrap(), m);
    }

    #[test]
    fn unknown_learner_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let store = LearnerStore::open(dir.path()).unwrap();
        assert!(matches!(store.load("ghost"), Err(StoreError::NotFound(_))));
        assert!(matches!(store.load("../etc"), Err(StoreError::NotFound(_))));
        assert!(!store.exists("ghost"));
    }

    #[test]
    fn last_writer_wins() {
        let dir = tempfile::tempdir().unwrap();
        let store = LearnerStore::open(dir.path()).unwrap();
        let kb = sample::knowledge_base();
        let mut m = LearnerModel::new("ada", "Ada");
        store.save(&m).unwrap();
        let at = DateTime::from_timestamp(0, 0).unwrap();
        m.update_after_posttest(&kb, &kb.curriculum_order()[0], 77, at)
            .unwrap();
        store.save(&m).unwrap();
        assert_eq!(store.load("ada").unwrap(), m);
    }

    #[test]
    fn rejects_unsafe_keys_and_foreign_versions() {
        let dir = tempfile::tempdir().unwrap();
        let store = LearnerStore::open(dir.path()).unwrap();
        let m = LearnerModel::new("../x", "X");
        assert!(matches!(store.save(&m), Err(StoreError::InvalidId(_))));

        let mut v = serde_json::to_value(LearnerModel::new("bob", "Bob")).unwrap();
        v["schema_version"] = 99.into();
        std::fs::write(dir.path().join("bob.json"), v.to_string()).unwrap();
        assert!(matches!(
            store.load("bob"),
            Err(StoreError::UnsupportedVersion { version: 99, .. })
        ));
    }

    #[test]
    fn concurrent_saves_for_distinct_learners() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(LearnerStore::open(dir.path()).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|i| {
                let store = store.clone();
                std::thread::spawn(move || {
                    for _ in 0..10 {
                        store
                            .save(&LearnerModel::new(format!("l{i}"), "x"))
                            .unwrap();
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        for i in 0..8 {
            assert_eq!(
                store.load(&format!("l{i}")).unwrap().learner_id(),
                format!("l{i}")
            );
        }
    }

    #[derive(Debug, Clone)]
    enum Op {
        Post(usize, u8),
        Pre(usize, u8),
        Present(usize, usize),
        Ask(usize),
        Style(Vec<u8>),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0usize..16, 0u8..=100).prop_map(|(c, s)| Op::Post(c, s)),
            (0usize..16, 0u8..=100).prop_map(|(c, s)| Op::Pre(c, s)),
            (0usize..16, 0usize..5).prop_map(|(c, m)| Op::Present(c, m)),
            (0usize..400).prop_map(Op::Ask),
            proptest::collection::vec(1u8..=5, 15).prop_map(Op::Style),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn arbitrary_models_round_trip(ops in proptest::collection::vec(op(), 0..40), seed in any::<u64>()) {
            let kb = sample::knowledge_base();
            let q = sample::questionnaire();
            let concepts = kb.curriculum_order();
            let questions: Vec<String> = kb.questions().map(|q| q.id.clone()).collect();
            let mut m = LearnerModel::with_seed("prop-learner", "Prop Learner \u{e9}", seed);
            let mut t = 0i64;
            for op in ops {
                t += 1;
                let at = DateTime::from_timestamp(t, 0).unwrap();
                match op {
                    Op::Post(c, s) => m.update_after_posttest(&kb, &concepts[c % concepts.len()], s.into(), at).unwrap(),
                    Op::Pre(c, s) => m.record_pretest(&concepts[c % concepts.len()], s, at),
                    Op::Present(c, k) => { m.record_presentation(&concepts[c % concepts.len()], EducationMethod::ALL[k], at); }
                    Op::Ask(i) => m.record_asked([&questions[i % questions.len()]]),
                    Op::Style(r) => {
                        let responses = q.items().iter().zip(r).map(|(i, v)| (i.id.clone(), i64::from(v))).collect();
                        m.set_style(q.score(&responses).unwrap(), at);
                    }
                }
            }
            let dir = tempfile::tempdir().unwrap();
            let store = LearnerStore::open(dir.path()).unwrap();
            store.save(&m).unwrap();
            prop_assert_eq!(store.load("prop-learner").unwrap(), m);
        }
    }

    #[test]
    fn style_profile_survives_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = LearnerStore::open(dir.path()).unwrap();
        let mut m = LearnerModel::new("eve", "Eve");
        m.set_style(
            StyleProfile::from_scores([(LearningStyle::Ca, 12)].into()),
            DateTime::from_timestamp(5, 0).unwrap(),
        );
        store.save(&m).unwrap();
        let back = store.load("eve").unwrap();
        assert_eq!(back.style().unwrap().dominant, LearningStyle::Ca);
        assert_eq!(back, m);
    }
}
