//! Concrete web tools: a search-API client, a page fetcher with HTML-to-text
//! extraction, a disk cache that makes runs replayable, and a token-bucket
//! rate limiter.
//!
//! Every real outbound HTTP request in this crate (search, browse, chat)
//! increments a process-wide counter so offline runs can prove they made
//! zero network calls.

mod browse;
mod cache;
mod extract;
mod rate_limit;
mod search;

use std::sync::atomic::{AtomicU64, Ordering};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use browse::HttpBrowseClient;
pub use cache::{CacheEntry, DiskCache};
pub use extract::extract_text;
pub use rate_limit::RateLimiter;
pub use search::{normalize_query, HttpSearchClient};

static OUTBOUND_REQUESTS: AtomicU64 = AtomicU64::new(0);

/// Total outbound HTTP requests made by this process.
pub fn outbound_request_count() -> u64 {
    OUTBOUND_REQUESTS.load(Ordering::Relaxed)
}

pub(crate) fn record_outbound_request() {
    OUTBOUND_REQUESTS.fetch_add(1, Ordering::Relaxed);
}

/// One ranked search hit. Ranks are contiguous from 1 within a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub title: String,
    pub url: String,
    pub snippet: String,
    pub rank: usize,
}

/// A search response plus the UTC epoch seconds it was (originally) fetched.
/// Cache hits report the stored entry's timestamp, keeping warm runs stable.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBatch {
    pub results: Vec<SearchResult>,
    pub fetched_at: u64,
}

/// Extracted page text plus its fetch timestamp (see [`SearchBatch`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PageText {
    pub text: String,
    pub fetched_at: u64,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search query is empty")]
    EmptyQuery,
    #[error("search backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("search quota exceeded")]
    QuotaExceeded,
}

#[derive(Debug, Error)]
pub enum BrowseError {
    #[error("invalid url: {0}")]
    InvalidUrl(String),
    #[error("fetch timed out: {0}")]
    FetchTimeout(String),
    #[error("non-html content: {0}")]
    NonHtmlContent(String),
    #[error("fetch failed: {0}")]
    FetchFailed(String),
}

#[async_trait]
pub trait SearchTool: Send + Sync {
    /// At most `k` rank-ordered results for a non-empty query.
    async fn search(&self, query: &str, k: usize) -> Result<SearchBatch, SearchError>;
}

#[async_trait]
pub trait BrowseTool: Send + Sync {
    /// Plain text of the page at `url`, markup stripped.
    async fn fetch_and_extract(&self, url: &str) -> Result<PageText, BrowseError>;
}

pub(crate) fn now_epoch() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
