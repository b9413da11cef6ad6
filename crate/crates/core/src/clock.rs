//! Time sources for event and transcript timestamps.

use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, TimeZone, Utc};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// A logical clock that starts at a fixed instant and ticks by a fixed
/// number of milliseconds on every reading. Used wherever runs must be
/// replayable byte for byte.
#[derive(Debug)]
pub struct StepClock {
    next_ms: AtomicI64,
    step_ms: i64,
}

impl StepClock {
    pub fn new(start: DateTime<Utc>, step_ms: i64) -> Self {
        StepClock {
            next_ms: AtomicI64::new(start.timestamp_millis()),
            step_ms,
        }
    }

    /// 2024-01-01T00:00:00Z, one second per tick.
    pub fn epoch() -> Self {
        Self::new(Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(), 1000)
    }
}

impl Clock for StepClock {
    fn now(&self) -> DateTime<Utc> {
        let ms = self.next_ms.fetch_add(self.step_ms, Ordering::Relaxed);
        Utc.timestamp_millis_opt(ms).single().expect("in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_clock_is_monotone_and_replayable() {
        let a = StepClock::epoch();
        let b = StepClock::epoch();
        let (a1, a2) = (a.now(), a.now());
        assert!(a2 > a1);
        assert_eq!(b.now(), a1);
    }
}
