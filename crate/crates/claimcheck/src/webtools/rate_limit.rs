//! Token-bucket rate limiter shared by one backend's client. Default budget
//! is 1 request/second, which keeps batch evaluation from burning quota.

use std::time::{Duration, Instant};

use tokio::sync::Mutex;

pub struct RateLimiter {
    state: Mutex<Bucket>,
    rate_per_sec: f64,
    capacity: f64,
}

struct Bucket {
    tokens: f64,
    refilled_at: Instant,
}

impl RateLimiter {
    pub fn per_second(rate_per_sec: f64) -> Self {
        let rate_per_sec = rate_per_sec.max(1e-6);
        RateLimiter {
            state: Mutex::new(Bucket {
                tokens: 1.0,
                refilled_at: Instant::now(),
            }),
            rate_per_sec,
            capacity: rate_per_sec.max(1.0),
        }
    }

    /// Wait until a token is available, then consume it.
    pub async fn acquire(&self) {
        loop {
            let wait = {
                let mut bucket = self.state.lock().await;
                let now = Instant::now();
                let elapsed = now.duration_since(bucket.refilled_at).as_secs_f64();
                bucket.tokens = (bucket.tokens + elapsed * self.rate_per_sec).min(self.capacity);
                bucket.refilled_at = now;
                if bucket.tokens >= 1.0 {
                    bucket.tokens -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - bucket.tokens) / self.rate_per_sec)
            };
            tokio::time::sleep(wait).await;
        }
    }
}
