//! In-memory transport and clock for exercising the client without a
//! network.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, TimeZone, Utc};

use super::transport::{Clock, Request, Response, Transport, TransportError};

/// Simulated time shared between a clock and a fixture server.
#[derive(Debug, Clone)]
pub struct FakeClock {
    now: Arc<Mutex<DateTime<Utc>>>,
}

impl FakeClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self {
            now: Arc::new(Mutex::new(start)),
        }
    }

    pub fn at_epoch(secs: i64) -> Self {
        Self::new(Utc.timestamp_opt(secs, 0).single().expect("valid timestamp"))
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for FakeClock {
    fn now(&self) -> DateTime<Utc> {
        *self.now.lock().unwrap()
    }

    fn sleep_until(&mut self, t: DateTime<Utc>) {
        let mut now = self.now.lock().unwrap();
        if t > *now {
            *now = t;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateLimitPolicy {
    pub limit: u64,
    pub window_secs: i64,
}

#[derive(Debug)]
enum Route {
    Fixed(Response),
    Sequence(VecDeque<Result<Response, TransportError>>),
}

#[derive(Debug, Default)]
struct ServerState {
    routes: BTreeMap<String, Route>,
    log: Vec<Request>,
    rate: Option<(RateLimitPolicy, u64, DateTime<Utc>)>,
    violations: usize,
}

/// Routes exact URLs to canned responses and records every request. With a
/// rate-limit policy it counts requests that arrive while the current window
/// is exhausted and answers them with 403.
#[derive(Debug, Clone)]
pub struct FixtureServer {
    state: Arc<Mutex<ServerState>>,
    clock: FakeClock,
}

impl FixtureServer {
    pub fn new(clock: FakeClock) -> Self {
        Self {
            state: Arc::default(),
            clock,
        }
    }

    pub fn clock(&self) -> FakeClock {
        self.clock.clone()
    }

    pub fn with_rate_limit(self, policy: RateLimitPolicy) -> Self {
        let reset = self.clock.now() + Duration::seconds(policy.window_secs);
        self.state.lock().unwrap().rate = Some((policy, policy.limit, reset));
        self
    }

    pub fn route(&self, url: impl Into<String>, resp: Response) {
        self.state.lock().unwrap().routes.insert(url.into(), Route::Fixed(resp));
    }

    pub fn route_json(&self, url: impl Into<String>, body: &serde_json::Value) {
        self.route(url, Response::new(200, body.to_string()));
    }

    /// Responses served once each, in order; the last one repeats.
    pub fn route_sequence(&self, url: impl Into<String>, seq: Vec<Result<Response, TransportError>>) {
        self.state
            .lock()
            .unwrap()
            .routes
            .insert(url.into(), Route::Sequence(seq.into()));
    }

    pub fn requests(&self) -> Vec<String> {
        self.state.lock().unwrap().log.iter().map(|r| r.url.clone()).collect()
    }

    pub fn last_request(&self) -> Option<Request> {
        self.state.lock().unwrap().log.last().cloned()
    }

    pub fn request_count(&self) -> usize {
        self.state.lock().unwrap().log.len()
    }

    /// Requests received while the rate-limit window was exhausted.
    pub fn violations(&self) -> usize {
        self.state.lock().unwrap().violations
    }

    pub fn transport(&self) -> FixtureTransport {
        FixtureTransport { server: self.clone() }
    }
}

pub struct FixtureTransport {
    server: FixtureServer,
}

impl Transport for FixtureTransport {
    fn send(&mut self, req: &Request) -> Result<Response, TransportError> {
        let now = self.server.clock.now();
        let mut st = self.server.state.lock().unwrap();
        st.log.push(req.clone());
        let mut limit_headers = None;
        if let Some((policy, remaining, reset)) = st.rate.as_mut() {
            if now >= *reset {
                *remaining = policy.limit;
                *reset = now + Duration::seconds(policy.window_secs);
            }
            if *remaining == 0 {
                let reset_secs = reset.timestamp();
                st.violations += 1;
                return Ok(Response::new(403, r#"{"message":"API rate limit exceeded"}"#)
                    .with_header("x-ratelimit-remaining", "0")
                    .with_header("x-ratelimit-reset", reset_secs.to_string()));
            }
            *remaining -= 1;
            limit_headers = Some((*remaining, reset.timestamp()));
        }
        let resp = match st.routes.get_mut(&req.url) {
            None => Ok(Response::new(404, r#"{"message":"Not Found"}"#)),
            Some(Route::Fixed(r)) => Ok(r.clone()),
            Some(Route::Sequence(q)) => {
                if q.len() > 1 {
                    q.pop_front().expect("non-empty")
                } else {
                    q.front().cloned().unwrap_or_else(|| Ok(Response::new(404, "")))
                }
            }
        };
        match (resp, limit_headers) {
            (Ok(r), Some((remaining, reset))) => Ok(r
                .with_header("x-ratelimit-remaining", remaining.to_string())
                .with_header("x-ratelimit-reset", reset.to_string())),
            (other, _) => other,
        }
    }
}
