use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant basing signal `B(t)`: starts at `initial` and flips
/// at each toggle time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct BasingSchedule {
    toggle_times: Vec<f64>,
    initial: bool,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    toggle_times: Vec<f64>,
    #[serde(default)]
    initial: bool,
}

impl TryFrom<RawSchedule> for BasingSchedule {
    type Error = Error;
    fn try_from(raw: RawSchedule) -> Result<Self> {
        Self::new(raw.toggle_times, raw.initial)
    }
}

impl From<BasingSchedule> for RawSchedule {
    fn from(s: BasingSchedule) -> Self {
        Self { toggle_times: s.toggle_times, initial: s.initial }
    }
}

impl BasingSchedule {
    pub fn new(toggle_times: Vec<f64>, initial: bool) -> Result<Self> {
        if toggle_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("basing toggle times must be finite and non-negative".into()));
        }
        if toggle_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("basing toggle times must be strictly increasing".into()));
        }
        Ok(Self { toggle_times, initial })
    }

    pub fn toggle_times(&self) -> &[f64] {
        &self.toggle_times
    }

    pub fn initial(&self) -> bool {
        self.initial
    }

    /// `B(t)`; a toggle at `t` is already in effect at `t`.
    pub fn at(&self, t: f64) -> bool {
        let flips = self.toggle_times.partition_point(|x| *x <= t);
        self.initial ^ (flips % 2 == 1)
    }

    /// Whether any toggle happens strictly after `t`.
    pub fn pending_after(&self, t: f64) -> bool {
        self.toggle_times.last().is_some_and(|last| *last > t)
    }
}
