use serde::{Deserialize, Serialize};

/// Learning rate decreasing linearly from `start` to `end` over `decay_epochs`,
/// then held at `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDecay {
    pub start: f64,
    pub end: f64,
    pub decay_epochs: u64,
}

impl Default for LinearDecay {
    fn default() -> Self {
        Self { start: 1e-3, end: 1e-5, decay_epochs: 1_000_000 }
    }
}

impl LinearDecay {
    pub fn lr(&self, epoch: u64) -> f64 {
        if self.decay_epochs == 0 || epoch >= self.decay_epochs {
            return self.end;
        }
        let frac = epoch as f64 / self.decay_epochs as f64;
        self.start + (self.end - self.start) * frac
    }
}
