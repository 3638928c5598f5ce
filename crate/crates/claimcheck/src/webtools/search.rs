//! HTTP search client for a generic JSON search API:
//! `GET {base}/search?q=<urlencoded>&k=<int>` returning
//! `[{title, url, snippet}]`. Cache-first on the normalized query, so a warm
//! cache serves a whole evaluation run with zero outbound requests.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use serde::Deserialize;

use super::{
    now_epoch, record_outbound_request, DiskCache, RateLimiter, SearchBatch, SearchError,
    SearchResult, SearchTool,
};

/// Trim, lowercase and collapse inner whitespace; this is the cache identity
/// of a query.
pub fn normalize_query(query: &str) -> String {
    query
        .trim()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Deserialize)]
struct WireResult {
    #[serde(default)]
    title: String,
    #[serde(default)]
    url: String,
    #[serde(default)]
    snippet: String,
}

pub struct HttpSearchClient {
    base: String,
    api_key: Option<String>,
    http: reqwest::Client,
    cache: Arc<DiskCache>,
    limiter: Arc<RateLimiter>,
    sent: AtomicU64,
}

impl HttpSearchClient {
    pub fn new(
        base: impl Into<String>,
        api_key: Option<String>,
        cache: Arc<DiskCache>,
        limiter: Arc<RateLimiter>,
        timeout_ms: u64,
    ) -> Self {
        let http = reqwest::Client::builder()
            .timeout(std::time::Duration::from_millis(timeout_ms))
            .build()
            .expect("reqwest client construction");
        HttpSearchClient {
            base: base.into().trim_end_matches('/').to_string(),
            api_key,
            http,
            cache,
            limiter,
            sent: AtomicU64::new(0),
        }
    }

    /// Outbound requests this client has made (cache hits excluded).
    pub fn requests_made(&self) -> u64 {
        self.sent.load(Ordering::Relaxed)
    }

    fn parse_body(bytes: &[u8], k: usize) -> Result<Vec<SearchResult>, SearchError> {
        let wire: Vec<WireResult> = serde_json::from_slice(bytes)
            .map_err(|e| SearchError::BackendUnavailable(format!("malformed response: {e}")))?;
        Ok(wire
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, r)| SearchResult {
                title: r.title,
                url: r.url,
                snippet: r.snippet,
                rank: i + 1,
            })
            .collect())
    }
}

#[async_trait]
impl SearchTool for HttpSearchClient {
    async fn search(&self, query: &str, k: usize) -> Result<SearchBatch, SearchError> {
        let trimmed = query.trim();
        if trimmed.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let key = format!("search:{}", normalize_query(query));
        if let Some(entry) = self.cache.get(&key) {
            return Ok(SearchBatch {
                results: Self::parse_body(&entry.body, k)?,
                fetched_at: entry.stored_at,
            });
        }

        self.limiter.acquire().await;
        record_outbound_request();
        self.sent.fetch_add(1, Ordering::Relaxed);

        let mut request = self
            .http
            .get(format!("{}/search", self.base))
            .query(&[("q", trimmed), ("k", &k.to_string())]);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let response = request
            .send()
            .await
            .map_err(|e| SearchError::BackendUnavailable(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 429 {
            return Err(SearchError::QuotaExceeded);
        }
        if !status.is_success() {
            return Err(SearchError::BackendUnavailable(format!("HTTP {status}")));
        }

        let body = response
            .bytes()
            .await
            .map_err(|e| SearchError::BackendUnavailable(e.to_string()))?;
        let results = Self::parse_body(&body, k)?;
        if let Err(e) = self.cache.put(&key, &body) {
            log::warn!("search cache write failed: {e}");
        }
        Ok(SearchBatch {
            results,
            fetched_at: now_epoch(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_normalization() {
        assert_eq!(normalize_query("  Hello   WORLD \n"), "hello world");
        assert_eq!(normalize_query("a\tb"), "a b");
        assert_eq!(normalize_query(""), "");
    }

    #[test]
    fn body_parsing_caps_and_ranks() {
        let body = br#"[
            {"title":"t1","url":"u1","snippet":"s1"},
            {"title":"t2","url":"u2","snippet":"s2"},
            {"title":"t3","url":"u3","snippet":"s3"}
        ]"#;
        let results = HttpSearchClient::parse_body(body, 2).unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].rank, 1);
        assert_eq!(results[1].rank, 2);
        assert_eq!(results[1].title, "t2");
    }

    #[test]
    fn malformed_body_is_a_backend_error() {
        assert!(matches!(
            HttpSearchClient::parse_body(b"not json", 5),
            Err(SearchError::BackendUnavailable(_))
        ));
    }
}
