//! Chat-completions backend abstraction.
//!
//! The wire protocol is the de-facto open inference server convention:
//! `POST {endpoint}/v1/chat/completions` with content-part messages, reading
//! the reply from `choices[0].message.content`. Scripted stand-ins for tests
//! live in [`crate::testkit`].

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::webtools;

#[derive(Debug, Error)]
pub enum ChatError {
    #[error("chat transport failure: {0}")]
    Transport(String),
    #[error("chat protocol failure: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContentPart {
    Text { text: String },
    Image { media_type: String, data_b64: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub parts: Vec<ContentPart>,
}

impl ChatMessage {
    pub fn text(role: Role, text: impl Into<String>) -> Self {
        ChatMessage {
            role,
            parts: vec![ContentPart::Text { text: text.into() }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn new(messages: Vec<ChatMessage>) -> Self {
        ChatRequest {
            messages,
            temperature: 0.0,
        }
    }

    /// All text parts concatenated, used for logging and script matching.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        for message in &self.messages {
            for part in &message.parts {
                if let ContentPart::Text { text } = part {
                    if !out.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(text);
                }
            }
        }
        out
    }
}

#[async_trait]
pub trait ChatBackend: Send + Sync {
    async fn chat(&self, request: &ChatRequest) -> Result<String, ChatError>;
}

/// HTTP client for one model endpoint.
pub struct HttpChatBackend {
    endpoint: String,
    model: String,
    http: reqwest::Client,
}

impl HttpChatBackend {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, timeout_ms: u64) -> Self {
        let http = reqwest::Client::builder()
            .timeout(std::time::Duration::from_millis(timeout_ms))
            .build()
            .expect("reqwest client construction");
        HttpChatBackend {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            model: model.into(),
            http,
        }
    }

    fn wire_messages(request: &ChatRequest) -> Vec<Value> {
        request
            .messages
            .iter()
            .map(|message| {
                let role = match message.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                let content: Vec<Value> = message
                    .parts
                    .iter()
                    .map(|part| match part {
                        ContentPart::Text { text } => json!({"type": "text", "text": text}),
                        ContentPart::Image {
                            media_type,
                            data_b64,
                        } => json!({
                            "type": "image_url",
                            "image_url": {"url": format!("data:{media_type};base64,{data_b64}")}
                        }),
                    })
                    .collect();
                json!({"role": role, "content": content})
            })
            .collect()
    }
}

#[async_trait]
impl ChatBackend for HttpChatBackend {
    async fn chat(&self, request: &ChatRequest) -> Result<String, ChatError> {
        let body = json!({
            "model": self.model,
            "messages": Self::wire_messages(request),
            "temperature": request.temperature,
        });
        webtools::record_outbound_request();
        let response = self
            .http
            .post(format!("{}/v1/chat/completions", self.endpoint))
            .json(&body)
            .send()
            .await
            .map_err(|e| ChatError::Transport(e.to_string()))?;

        let status = response.status();
        if !status.is_success() {
            let text = response.text().await.unwrap_or_default();
            let excerpt: String = text.chars().take(200).collect();
            return Err(ChatError::Transport(format!("HTTP {status}: {excerpt}")));
        }

        let value: Value = response
            .json()
            .await
            .map_err(|e| ChatError::Protocol(format!("invalid response body: {e}")))?;
        extract_message_content(&value)
            .ok_or_else(|| ChatError::Protocol("missing choices[0].message.content".to_string()))
    }
}

/// Content may be a plain string or an array of typed parts; either way the
/// text is what downstream parsing consumes.
fn extract_message_content(value: &Value) -> Option<String> {
    let content = value.get("choices")?.get(0)?.get("message")?.get("content")?;
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => {
            let mut out = String::new();
            for part in parts {
                if let Some(text) = part.get("text").and_then(Value::as_str) {
                    out.push_str(text);
                }
            }
            Some(out)
        }
        _ => None,
    }
}
