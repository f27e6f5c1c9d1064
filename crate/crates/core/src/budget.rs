use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::report::StopReason;

/// When a search stops. Whichever limit is hit first wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Wall-clock limit.
    pub seconds: Option<f64>,
    /// Generation (or expansion) limit.
    pub max_iters: Option<u64>,
    /// Stop as soon as this cost is reached.
    pub target_cost: Option<i64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            seconds: Some(60.0),
            max_iters: None,
            target_cost: None,
        }
    }
}

impl Budget {
    pub fn seconds(s: f64) -> Self {
        Self {
            seconds: Some(s),
            max_iters: None,
            target_cost: None,
        }
    }

    pub fn iters(n: u64) -> Self {
        Self {
            seconds: None,
            max_iters: Some(n),
            target_cost: None,
        }
    }

    pub fn with_target(mut self, cost: i64) -> Self {
        self.target_cost = Some(cost);
        self
    }

    pub fn out_of_time(&self, start: Instant) -> bool {
        self.seconds
            .is_some_and(|s| start.elapsed().as_secs_f64() >= s)
    }

    pub fn check(&self, start: Instant, iters: u64, best: Option<i64>) -> Option<StopReason> {
        if let (Some(t), Some(b)) = (self.target_cost, best) {
            if b >= t {
                return Some(StopReason::Target);
            }
        }
        if self.max_iters.is_some_and(|n| iters >= n) {
            return Some(StopReason::MaxIters);
        }
        if self.out_of_time(start) {
            return Some(StopReason::Budget);
        }
        None
    }
}
