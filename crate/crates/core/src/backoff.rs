//! Capped exponential backoff for status polling.

use core::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Backoff {
    pub base: Duration,
    pub factor: u32,
    pub cap: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Self {
            base: Duration::from_millis(500),
            factor: 2,
            cap: Duration::from_secs(8),
        }
    }
}

impl Backoff {
    /// `min(base * factor^attempt, cap)`.
    pub fn delay(&self, attempt: u32) -> Duration {
        let mut d = self.base;
        for _ in 0..attempt {
            if d >= self.cap {
                break;
            }
            d = d.saturating_mul(self.factor);
        }
        d.min(self.cap)
    }

    pub fn delays(&self) -> impl Iterator<Item = Duration> + '_ {
        (0u32..).map(|i| self.delay(i))
    }
}
