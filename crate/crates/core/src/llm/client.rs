use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use rand::Rng;
use serde_json::{json, Value};

use super::{LlmConfig, LlmError};
use crate::evolution::GeneratorError;

/// Status and body of an HTTP response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Sends one JSON POST. Non-2xx statuses are responses, not errors;
/// `Err` means no response arrived.
pub trait ChatTransport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &str,
    ) -> Result<HttpResponse, String>;
}

/// Blocking HTTP transport.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        Self {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl ChatTransport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &str,
    ) -> Result<HttpResponse, String> {
        let mut request = self.agent.post(url).set("Content-Type", "application/json");
        if let Some(key) = bearer {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let response = match request.send_string(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(_, r)) => r,
            Err(ureq::Error::Transport(t)) => return Err(t.to_string()),
        };
        let status = response.status();
        let body = response.into_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

/// Wraps a transport and counts the requests it sends.
pub struct CountingTransport<T> {
    inner: T,
    calls: AtomicU64,
}

impl<T> CountingTransport<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<T: ChatTransport> ChatTransport for CountingTransport<T> {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &str,
    ) -> Result<HttpResponse, String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.post_json(url, bearer, body)
    }
}

impl<T: ChatTransport + ?Sized> ChatTransport for Arc<T> {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &str,
    ) -> Result<HttpResponse, String> {
        (**self).post_json(url, bearer, body)
    }
}

/// The request body: model, one user message, temperature.
pub fn request_body(config: &LlmConfig, prompt: &str) -> Value {
    json!({
        "model": config.model_name,
        "messages": [{ "role": "user", "content": prompt }],
        "temperature": config.temperature,
    })
}

/// Program text from a completion: the first fenced block, else the
/// whole reply, trimmed.
pub fn extract_program(reply: &str) -> Result<String, GeneratorError> {
    let text = match reply.find("```") {
        Some(open) => {
            let after = &reply[open + 3..];
            // skip the info string (`gen`, `python`, ...)
            let body = after.find('\n').map_or("", |nl| &after[nl + 1..]);
            match body.find("```") {
                Some(close) => &body[..close],
                None => body,
            }
        }
        None => reply,
    };
    let text = text.trim();
    if text.is_empty() {
        Err(GeneratorError::EmptyCompletion)
    } else {
        Ok(text.to_string())
    }
}

fn completion_text(body: &str) -> Option<String> {
    let v: Value = serde_json::from_str(body).ok()?;
    v.get("choices")?
        .get(0)?
        .get("message")?
        .get("content")?
        .as_str()
        .map(str::to_string)
}

struct InFlight {
    count: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut count = self.count.lock().expect("in-flight lock");
        while *count >= self.limit {
            count = self.freed.wait(count).expect("in-flight lock");
        }
        *count += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.count.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

/// Chat-completions client with retry and a cap on concurrent requests.
pub struct LlmClient {
    config: LlmConfig,
    transport: Box<dyn ChatTransport>,
    in_flight: InFlight,
    requests: AtomicU64,
}

impl LlmClient {
    pub fn new(config: LlmConfig) -> Result<Self, LlmError> {
        let transport = UreqTransport::new(config.timeout);
        Self::with_transport(config, transport)
    }

    pub fn with_transport(
        config: LlmConfig,
        transport: impl ChatTransport + 'static,
    ) -> Result<Self, LlmError> {
        config.validate()?;
        let limit = config.max_in_flight;
        Ok(Self {
            config,
            transport: Box::new(transport),
            in_flight: InFlight {
                count: Mutex::new(0),
                freed: Condvar::new(),
                limit,
            },
            requests: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    /// HTTP requests sent so far, retries included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    fn endpoint(&self) -> String {
        format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        )
    }

    fn backoff(&self, retry: u32) -> Duration {
        let base = self.config.backoff_base.as_secs_f64() * 2f64.powi(retry as i32);
        let jitter = rand::thread_rng().gen_range(0.0..0.5);
        Duration::from_secs_f64(base * (1.0 + jitter))
    }

    /// Sends the prompt and returns the program text of the reply.
    ///
    /// Transport failures, 429 and 5xx are retried up to `max_retries`
    /// times with exponential backoff; other statuses fail at once.
    pub fn request_program(&self, prompt: &str) -> Result<String, GeneratorError> {
        let body = request_body(&self.config, prompt).to_string();
        let url = self.endpoint();
        let _slot = self.in_flight.acquire();

        let mut last_error = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let wait = self.backoff(attempt - 1);
                log::debug!("retrying {url} in {wait:?} after: {last_error}");
                thread::sleep(wait);
            }
            self.requests.fetch_add(1, Ordering::SeqCst);
            match self
                .transport
                .post_json(&url, self.config.api_key.as_deref(), &body)
            {
                Err(e) => last_error = format!("transport error: {e}"),
                Ok(r) if r.status == 429 || r.status >= 500 => {
                    last_error = format!("HTTP {}", r.status)
                }
                Ok(r) if !(200..300).contains(&r.status) => {
                    return Err(GeneratorError::Unavailable(format!(
                        "HTTP {} from {url}",
                        r.status
                    )));
                }
                Ok(r) => {
                    let content = completion_text(&r.body).ok_or_else(|| {
                        GeneratorError::Unavailable(format!("{url} returned no chat completion"))
                    })?;
                    return extract_program(&content);
                }
            }
        }
        Err(GeneratorError::Unavailable(format!(
            "{url}: {last_error} (after {} retries)",
            self.config.max_retries
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_first_fenced_block() {
        let reply =
            "Here you go:\n```gen\nd = x0 - x1\nreturn x1 + s * d\n```\nand\n```\nreturn x0\n```";
        assert_eq!(
            extract_program(reply).unwrap(),
            "d = x0 - x1\nreturn x1 + s * d"
        );
    }

    #[test]
    fn prose_reply_is_trimmed() {
        assert_eq!(extract_program("  just words \n").unwrap(), "just words");
    }

    #[test]
    fn empty_replies() {
        assert_eq!(
            extract_program("  \n"),
            Err(GeneratorError::EmptyCompletion)
        );
        assert_eq!(
            extract_program("```gen\n```"),
            Err(GeneratorError::EmptyCompletion)
        );
    }

    #[test]
    fn unterminated_fence_takes_the_rest() {
        assert_eq!(extract_program("```gen\nreturn x1\n").unwrap(), "return x1");
    }

    #[test]
    fn body_has_exactly_three_fields() {
        let body = request_body(&LlmConfig::default(), "hi");
        let keys: Vec<&String> = body.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["messages", "model", "temperature"]);
        assert_eq!(body["messages"][0]["content"], "hi");
    }
}
