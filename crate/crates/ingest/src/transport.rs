//! HTTP transport and request pacing.

use std::time::{Duration, Instant};

use crate::IngestError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    /// Seconds from a `Retry-After` header, when present.
    pub retry_after: Option<u64>,
    pub body: String,
}

/// Something that can perform a GET with query parameters.
pub trait Transport {
    fn get(&mut self, url: &str, query: &[(String, String)]) -> Result<HttpResponse, IngestError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .user_agent(concat!("newsframe/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        Self { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for UreqTransport {
    fn get(&mut self, url: &str, query: &[(String, String)]) -> Result<HttpResponse, IngestError> {
        let mut resp = self
            .agent
            .get(url)
            .query_pairs(query.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            .call()
            .map_err(|e| IngestError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse().ok());
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| IngestError::Network(e.to_string()))?;
        Ok(HttpResponse { status, retry_after, body })
    }
}

/// Spaces calls at least `1 / rps` seconds apart.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    interval: Duration,
    last: Option<Instant>,
}

impl RateLimiter {
    pub fn new(requests_per_second: f64) -> Result<Self, IngestError> {
        if !(requests_per_second.is_finite() && requests_per_second > 0.0) {
            return Err(IngestError::InvalidJob(format!(
                "rate limit must be positive, got {requests_per_second}"
            )));
        }
        Ok(Self { interval: Duration::from_secs_f64(1.0 / requests_per_second), last: None })
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    /// Block until the next request is allowed, then mark it as sent.
    pub fn wait(&mut self) {
        if let Some(last) = self.last {
            let due = last + self.interval;
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        self.last = Some(Instant::now());
    }
}

impl Default for RateLimiter {
    fn default() -> Self {
        Self { interval: Duration::from_secs(1), last: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_rates() {
        assert!(RateLimiter::new(0.0).is_err());
        assert!(RateLimiter::new(f64::NAN).is_err());
        assert_eq!(RateLimiter::new(4.0).unwrap().interval(), Duration::from_millis(250));
    }

    #[test]
    fn consecutive_waits_are_spaced() {
        let mut r = RateLimiter::new(50.0).unwrap();
        r.wait();
        let t0 = Instant::now();
        r.wait();
        r.wait();
        assert!(t0.elapsed() >= Duration::from_millis(39));
    }
}
