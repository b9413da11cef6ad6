use std::collections::HashMap;
use std::sync::Mutex;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use rand::rngs::OsRng;
use rand::RngCore;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuedToken {
    pub token: String,
    pub learner_id: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Default)]
struct Tables {
    by_token: HashMap<String, IssuedToken>,
    by_learner: HashMap<String, String>,
}

/// In-memory bearer tokens: 128 random bits, base64url, one live token per
/// learner. Issuing a new token revokes the learner's previous one.
#[derive(Debug)]
pub struct TokenStore {
    ttl: Duration,
    tables: Mutex<Tables>,
}

impl TokenStore {
    pub fn new(ttl_secs: u64) -> Self {
        TokenStore {
            ttl: Duration::seconds(ttl_secs.min(i64::MAX as u64 / 1000) as i64),
            tables: Mutex::new(Tables::default()),
        }
    }

    pub fn issue(&self, learner_id: &str, now: DateTime<Utc>) -> IssuedToken {
        let mut bytes = [0u8; 16];
        OsRng.fill_bytes(&mut bytes);
        let issued = IssuedToken {
            token: URL_SAFE_NO_PAD.encode(bytes),
            learner_id: learner_id.to_string(),
            expires_at: now + self.ttl,
        };
        let mut t = self.tables.lock().expect("token table poisoned");
        if let Some(old) = t
            .by_learner
            .insert(learner_id.to_string(), issued.token.clone())
        {
            t.by_token.remove(&old);
        }
        t.by_token.insert(issued.token.clone(), issued.clone());
        issued
    }

    /// Learner bound to `token`, if it is live.
    pub fn verify(&self, token: &str, now: DateTime<Utc>) -> Option<String> {
        let mut t = self.tables.lock().expect("token table poisoned");
        let entry = t.by_token.get(token)?;
        if entry.expires_at <= now {
            let learner = entry.learner_id.clone();
            t.by_token.remove(token);
            if t.by_learner.get(&learner).map(String::as_str) == Some(token) {
                t.by_learner.remove(&learner);
            }
            return None;
        }
        Some(entry.learner_id.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_login_revokes_old_token() {
        let store = TokenStore::new(60);
        let now = Utc::now();
        let a = store.issue("ada", now);
        assert_eq!(store.verify(&a.token, now).as_deref(), Some("ada"));
        let b = store.issue("ada", now);
        assert_ne!(a.token, b.token);
        assert_eq!(store.verify(&a.token, now), None);
        assert_eq!(store.verify(&b.token, now).as_deref(), Some("ada"));
    }

    #[test]
    fn tokens_expire_and_look_random() {
        let store = TokenStore::new(10);
        let now = Utc::now();
        let t = store.issue("bob", now);
        assert_eq!(URL_SAFE_NO_PAD.decode(&t.token).unwrap().len(), 16);
        assert!(store.verify(&t.token, now + Duration::seconds(9)).is_some());
        assert!(store
            .verify(&t.token, now + Duration::seconds(10))
            .is_none());
        assert!(store.verify(&t.token, now).is_none());
        assert!(store.verify("made-up", now).is_none());
    }
}
