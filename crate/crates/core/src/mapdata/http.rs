use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use super::{excerpt, MapError};

/// Connection and politeness settings for one map service.
#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub base_url: String,
    pub user_agent: String,
    /// Minimum spacing between consecutive requests.
    pub min_interval: Duration,
    /// Retries after the first attempt for transport errors and 5xx.
    pub max_retries: u32,
    /// First backoff delay; doubled on every retry.
    pub base_backoff: Duration,
    pub timeout: Duration,
}

impl ClientConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            user_agent: concat!("geollm/", env!("CARGO_PKG_VERSION")).to_string(),
            min_interval: Duration::from_secs(1),
            max_retries: 3,
            base_backoff: Duration::from_secs(1),
            timeout: Duration::from_secs(60),
        }
    }

    /// Uses `env_var` when set, otherwise `default_url`.
    pub fn from_env(env_var: &str, default_url: &str) -> Self {
        let url = std::env::var(env_var)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .unwrap_or_else(|| default_url.to_string());
        Self::new(url)
    }
}

/// Blocking HTTP client that serializes requests through a rate limiter and
/// retries transient failures with exponential backoff.
#[derive(Debug)]
pub struct HttpClient {
    provider: String,
    config: ClientConfig,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

impl HttpClient {
    pub fn new(provider: &str, config: ClientConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(config.timeout)
            .user_agent(&config.user_agent)
            .build();
        Self {
            provider: provider.to_string(),
            config,
            agent,
            last_request: Mutex::new(None),
        }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn get(&self, path: &str, query: &[(&str, &str)]) -> Result<String, MapError> {
        let url = format!("{}{}", self.config.base_url, path);
        self.send(|agent| {
            let mut req = agent.get(&url);
            for (k, v) in query {
                req = req.query(k, v);
            }
            req.call()
        })
    }

    pub fn post_form(&self, path: &str, form: &[(&str, &str)]) -> Result<String, MapError> {
        let url = format!("{}{}", self.config.base_url, path);
        self.send(|agent| agent.post(&url).send_form(form))
    }

    fn send<F>(&self, call: F) -> Result<String, MapError>
    where
        F: Fn(&ureq::Agent) -> Result<ureq::Response, ureq::Error>,
    {
        let mut backoff = self.config.base_backoff;
        let mut attempt = 0;
        loop {
            // the lock is held across the request so calls are serialized
            let mut last = self.last_request.lock().expect("rate limiter lock");
            if let Some(t) = *last {
                let elapsed = t.elapsed();
                if elapsed < self.config.min_interval {
                    thread::sleep(self.config.min_interval - elapsed);
                }
            }
            let result = call(&self.agent);
            *last = Some(Instant::now());
            drop(last);

            let transient = match result {
                Ok(resp) => {
                    return resp
                        .into_string()
                        .map_err(|e| MapError::unavailable(&self.provider, e.to_string()))
                }
                Err(ureq::Error::Status(429, resp)) => {
                    let retry_after_secs = resp
                        .header("Retry-After")
                        .and_then(|v| v.trim().parse::<u64>().ok());
                    return Err(MapError::QuotaExceeded { retry_after_secs });
                }
                Err(ureq::Error::Status(code, resp)) if code >= 500 => {
                    let body = resp.into_string().unwrap_or_default();
                    format!("HTTP {code}: {}", excerpt(&body, 200))
                }
                Err(ureq::Error::Status(code, resp)) => {
                    let body = resp.into_string().unwrap_or_default();
                    return Err(MapError::unavailable(
                        &self.provider,
                        format!("HTTP {code}: {}", excerpt(&body, 200)),
                    ));
                }
                Err(ureq::Error::Transport(t)) => t.to_string(),
            };

            if attempt >= self.config.max_retries {
                return Err(MapError::unavailable(
                    &self.provider,
                    format!("{transient} (after {} attempts)", attempt + 1),
                ));
            }
            log::warn!("{} request failed ({transient}); retrying in {backoff:?}", self.provider);
            thread::sleep(backoff);
            backoff *= 2;
            attempt += 1;
        }
    }
}
