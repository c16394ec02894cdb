//! Program generators: one backed by an OpenAI-compatible
//! chat-completions endpoint, and an offline mock.

mod client;
mod mock;
mod prompts;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

pub use client::{
    extract_program, request_body, ChatTransport, CountingTransport, HttpResponse, LlmClient,
    UreqTransport,
};
pub use mock::{MockGenerator, MOCK_BANK};
pub use prompts::{
    render_initialization_prompt, PromptRole, PromptTemplate, PromptValues, GRAMMAR_REFERENCE,
};

use crate::evolution::{GenerationContext, GeneratorError, ProgramGenerator};

pub const ENV_API_KEY: &str = "AUTODA_API_KEY";
pub const ENV_BASE_URL: &str = "AUTODA_BASE_URL";
pub const ENV_MODEL: &str = "AUTODA_MODEL";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid LLM config: {0}")]
    Config(String),
    #[error("invalid prompt template: {0}")]
    Template(String),
}

#[derive(Clone, PartialEq)]
pub struct LlmConfig {
    pub base_url: String,
    pub model_name: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout: Duration,
    /// First retry waits about this long; each further retry doubles it.
    pub backoff_base: Duration,
    pub max_in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model_name: "gpt-3.5-turbo-1106".into(),
            api_key: None,
            temperature: 1.0,
            max_retries: 3,
            timeout: Duration::from_secs(60),
            backoff_base: Duration::from_secs(2),
            max_in_flight: 2,
        }
    }
}

// keeps the key out of logs
impl fmt::Debug for LlmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmConfig")
            .field("base_url", &self.base_url)
            .field("model_name", &self.model_name)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("temperature", &self.temperature)
            .field("max_retries", &self.max_retries)
            .field("timeout", &self.timeout)
            .field("backoff_base", &self.backoff_base)
            .field("max_in_flight", &self.max_in_flight)
            .finish()
    }
}

impl LlmConfig {
    /// Defaults overridden by `AUTODA_BASE_URL`, `AUTODA_MODEL` and
    /// `AUTODA_API_KEY`.
    pub fn from_env() -> Self {
        let var = |name| std::env::var(name).ok().filter(|v: &String| !v.is_empty());
        let mut config = Self::default();
        if let Some(url) = var(ENV_BASE_URL) {
            config.base_url = url;
        }
        if let Some(model) = var(ENV_MODEL) {
            config.model_name = model;
        }
        config.api_key = var(ENV_API_KEY);
        config
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        let rest = self
            .base_url
            .strip_prefix("https://")
            .or_else(|| self.base_url.strip_prefix("http://"));
        match rest {
            Some(host)
                if !host.is_empty()
                    && !host.starts_with('/')
                    && !host.contains(char::is_whitespace) => {}
            _ => {
                return Err(LlmError::Config(format!(
                    "malformed base_url `{}`",
                    self.base_url
                )))
            }
        }
        if self.model_name.trim().is_empty() {
            return Err(LlmError::Config("empty model name".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(LlmError::Config(format!(
                "bad temperature {}",
                self.temperature
            )));
        }
        if self.max_in_flight == 0 {
            return Err(LlmError::Config("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

/// Generator that prompts a chat model.
pub struct LlmGenerator {
    client: LlmClient,
    initialization: PromptTemplate,
    crossover: PromptTemplate,
    mutation: PromptTemplate,
}

impl LlmGenerator {
    pub fn new(client: LlmClient) -> Self {
        Self {
            client,
            initialization: PromptTemplate::initialization(),
            crossover: PromptTemplate::crossover(),
            mutation: PromptTemplate::mutation(),
        }
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }
}

impl ProgramGenerator for LlmGenerator {
    fn init_program(&mut self, _ctx: &GenerationContext) -> Result<String, GeneratorError> {
        let prompt = self.initialization.render(&PromptValues::default());
        self.client.request_program(&prompt)
    }

    fn crossover(
        &mut self,
        parent_a: &str,
        parent_b: &str,
        ctx: &GenerationContext,
    ) -> Result<String, GeneratorError> {
        let prompt = self.crossover.render(&PromptValues {
            parent_a,
            parent_b,
            fitness_a: ctx.fitness_a,
            fitness_b: ctx.fitness_b,
        });
        self.client.request_program(&prompt)
    }

    fn mutate(&mut self, parent: &str, ctx: &GenerationContext) -> Result<String, GeneratorError> {
        let prompt = self.mutation.render(&PromptValues {
            parent_a: parent,
            fitness_a: ctx.fitness_a,
            ..PromptValues::default()
        });
        self.client.request_program(&prompt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    Mock { seed: u64 },
    Llm(LlmConfig),
}

/// Builds the generator for `kind`. The transport is only used by the
/// LLM-backed generator.
pub fn build_generator(
    kind: GeneratorKind,
    transport: impl ChatTransport + 'static,
) -> Result<Box<dyn ProgramGenerator>, LlmError> {
    Ok(match kind {
        GeneratorKind::Mock { seed } => Box::new(MockGenerator::new(seed)),
        GeneratorKind::Llm(config) => Box::new(LlmGenerator::new(LlmClient::with_transport(
            config, transport,
        )?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn debug_redacts_the_key() {
        let config = LlmConfig {
            api_key: Some("sk-secret-123".into()),
            ..LlmConfig::default()
        };
        let shown = format!("{config:?}");
        assert!(!shown.contains("sk-secret-123"));
        assert!(shown.contains("<redacted>"));
    }

    #[test]
    fn base_url_validation() {
        let with = |url: &str| LlmConfig {
            base_url: url.into(),
            ..LlmConfig::default()
        };
        assert!(with("http://127.0.0.1:8080/v1").validate().is_ok());
        assert!(with("https://api.example.com").validate().is_ok());
        assert!(with("ftp://x").validate().is_err());
        assert!(with("http://").validate().is_err());
        assert!(with("api.example.com").validate().is_err());
    }
}
