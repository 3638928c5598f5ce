//! Page fetcher: cache-first download of http/https URLs with plain
//! tag-stripping extraction. The cache key is the canonical URL (fragment
//! dropped), and raw HTML bytes are what gets cached, so extraction rules
//! can evolve without refetching.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use url::Url;

use super::{
    extract_text, now_epoch, record_outbound_request, BrowseError, BrowseTool, DiskCache,
    PageText, RateLimiter,
};

pub struct HttpBrowseClient {
    http: reqwest::Client,
    cache: Arc<DiskCache>,
    limiter: Arc<RateLimiter>,
    sent: AtomicU64,
}

impl HttpBrowseClient {
    pub fn new(cache: Arc<DiskCache>, limiter: Arc<RateLimiter>, timeout_ms: u64) -> Self {
        let http = reqwest::Client::builder()
            .timeout(std::time::Duration::from_millis(timeout_ms))
            .build()
            .expect("reqwest client construction");
        HttpBrowseClient {
            http,
            cache,
            limiter,
            sent: AtomicU64::new(0),
        }
    }

    pub fn requests_made(&self) -> u64 {
        self.sent.load(Ordering::Relaxed)
    }

    fn canonical_url(raw: &str) -> Result<String, BrowseError> {
        let mut parsed =
            Url::parse(raw).map_err(|e| BrowseError::InvalidUrl(format!("{raw}: {e}")))?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(BrowseError::InvalidUrl(format!(
                "{raw}: unsupported scheme '{}'",
                parsed.scheme()
            )));
        }
        parsed.set_fragment(None);
        Ok(parsed.to_string())
    }
}

#[async_trait]
impl BrowseTool for HttpBrowseClient {
    async fn fetch_and_extract(&self, url: &str) -> Result<PageText, BrowseError> {
        let canonical = Self::canonical_url(url)?;
        let key = format!("page:{canonical}");
        if let Some(entry) = self.cache.get(&key) {
            return Ok(PageText {
                text: extract_text(&String::from_utf8_lossy(&entry.body)),
                fetched_at: entry.stored_at,
            });
        }

        self.limiter.acquire().await;
        record_outbound_request();
        self.sent.fetch_add(1, Ordering::Relaxed);

        let response = self.http.get(&canonical).send().await.map_err(|e| {
            if e.is_timeout() || e.is_connect() {
                BrowseError::FetchTimeout(format!("{canonical}: {e}"))
            } else {
                BrowseError::FetchFailed(format!("{canonical}: {e}"))
            }
        })?;

        let status = response.status();
        if !status.is_success() {
            return Err(BrowseError::FetchFailed(format!("{canonical}: HTTP {status}")));
        }

        if let Some(content_type) = response
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
        {
            let essence = content_type.split(';').next().unwrap_or("").trim();
            let textual = essence.starts_with("text/")
                || essence == "application/xhtml+xml"
                || essence == "application/xml";
            if !textual {
                return Err(BrowseError::NonHtmlContent(format!(
                    "{canonical}: content-type {essence}"
                )));
            }
        }

        let body = response
            .bytes()
            .await
            .map_err(|e| BrowseError::FetchFailed(format!("{canonical}: {e}")))?;
        if let Err(e) = self.cache.put(&key, &body) {
            log::warn!("page cache write failed: {e}");
        }
        Ok(PageText {
            text: extract_text(&String::from_utf8_lossy(&body)),
            fetched_at: now_epoch(),
        })
    }
}
