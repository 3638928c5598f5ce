//! The evidence-gathering loop.
//!
//! Each turn the retrieval model is prompted with the dialogue so far and its
//! reply is parsed into actions: an answer terminates the loop, the first
//! tool call of the turn is dispatched (search or browse) and its rendered
//! result appended, and pure reasoning just extends the history. A per-session
//! memory buffer drops sentences already seen, and hard budgets bound turns,
//! searches and browses. The loop is total: it always produces a context
//! summary and an evidence trail.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::collections::HashSet;

use crate::chat::{ChatBackend, ChatMessage, ChatRequest, Role};
use crate::model::{ClaimRecord, ContextSummary, EvidenceItem};
use crate::protocol::{
    extract_final_answer, parse_agent_message, render_tool_result, AgentAction, ToolResult,
};
use crate::webtools::{BrowseTool, SearchTool};

pub const RETRIEVER_SYSTEM_PROMPT: &str = include_str!("../prompts/retriever_system_v1.txt");
const RETRIEVER_USER_TEMPLATE: &str = include_str!("../prompts/retriever_user_v1.txt");
const SUMMARIZE_TEMPLATE: &str = include_str!("../prompts/summarize_v1.txt");

/// Character cap on the extractive fallback summary.
pub const FALLBACK_SUMMARY_CHAR_CAP: usize = 2000;

/// Consecutive failed model turns tolerated before giving up on retrieval.
const MAX_CONSECUTIVE_MODEL_FAILURES: u32 = 2;

/// Hard limits for one retrieval session. All fields must be at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalBudget {
    pub max_turns: usize,
    pub max_searches: usize,
    pub max_browses_per_search: usize,
    pub top_k: usize,
    pub per_tool_timeout_ms: u64,
}

impl Default for RetrievalBudget {
    fn default() -> Self {
        RetrievalBudget {
            max_turns: 8,
            max_searches: 3,
            max_browses_per_search: 5,
            top_k: 10,
            per_tool_timeout_ms: 10_000,
        }
    }
}

impl RetrievalBudget {
    /// Human-readable invariant violations; empty when the budget is valid.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for (name, value) in [
            ("budget.max_turns", self.max_turns),
            ("budget.max_searches", self.max_searches),
            ("budget.max_browses_per_search", self.max_browses_per_search),
            ("budget.top_k", self.top_k),
            ("budget.per_tool_timeout_ms", self.per_tool_timeout_ms as usize),
        ] {
            if value < 1 {
                issues.push(format!("{name} must be at least 1"));
            }
        }
        issues
    }
}

/// Per-session store of seen sentence hashes. Insert-only; one buffer per
/// claim, never shared.
#[derive(Debug, Default)]
pub struct MemoryBuffer {
    seen: HashSet<u64>,
}

impl MemoryBuffer {
    pub fn new() -> Self {
        MemoryBuffer::default()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// Record a sentence (already normalized) as seen.
    pub fn insert_normalized(&mut self, normalized: &str) {
        self.seen.insert(sentence_hash(normalized));
    }

    fn insert_hash(&mut self, hash: u64) -> bool {
        self.seen.insert(hash)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TerminationReason {
    AnswerBlock { answer: String },
    BudgetExhausted,
    ModelError,
    RetrievalDisabled,
}

/// Everything gathered in one retrieval session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceTrail {
    pub items: Vec<EvidenceItem>,
    pub queries_issued: Vec<String>,
    pub turns_used: usize,
    pub terminated_by: TerminationReason,
}

impl EvidenceTrail {
    pub fn disabled() -> Self {
        EvidenceTrail {
            items: Vec::new(),
            queries_issued: Vec::new(),
            turns_used: 0,
            terminated_by: TerminationReason::RetrievalDisabled,
        }
    }
}

/// Drive the retrieval loop for one claim. Never fails: backend trouble and
/// exhausted budgets degrade to fallback summaries.
pub async fn run_retrieval(
    claim: &ClaimRecord,
    model: &dyn ChatBackend,
    search: &dyn SearchTool,
    browse: &dyn BrowseTool,
    budget: &RetrievalBudget,
) -> (ContextSummary, EvidenceTrail) {
    let mut session = Session {
        search,
        browse,
        budget,
        memory: MemoryBuffer::new(),
        items: Vec::new(),
        queries_issued: Vec::new(),
        browses_since_search: 0,
    };

    let mut dialogue = vec![
        ChatMessage::text(Role::System, RETRIEVER_SYSTEM_PROMPT),
        ChatMessage::text(
            Role::User,
            RETRIEVER_USER_TEMPLATE.replace("{caption}", &claim.caption),
        ),
    ];

    let mut turns_used = 0usize;
    let mut consecutive_failures = 0u32;
    let terminated_by = loop {
        if turns_used >= budget.max_turns {
            break TerminationReason::BudgetExhausted;
        }
        turns_used += 1;

        let response = match model.chat(&ChatRequest::new(dialogue.clone())).await {
            Ok(response) => {
                consecutive_failures = 0;
                response
            }
            Err(e) => {
                consecutive_failures += 1;
                log::warn!(
                    "claim {}: retrieval model failed on turn {turns_used} ({consecutive_failures} in a row): {e}",
                    claim.id
                );
                if consecutive_failures >= MAX_CONSECUTIVE_MODEL_FAILURES {
                    break TerminationReason::ModelError;
                }
                continue;
            }
        };

        dialogue.push(ChatMessage::text(Role::Assistant, response.clone()));
        let actions = parse_agent_message(&response);
        if let Some(answer) = extract_final_answer(&actions) {
            break TerminationReason::AnswerBlock { answer };
        }

        let mut tool_calls = actions.iter().filter_map(|action| match action {
            AgentAction::ToolCall { name, arguments } => Some((name, arguments)),
            _ => None,
        });
        if let Some((name, arguments)) = tool_calls.next() {
            let extras = tool_calls.count();
            if extras > 0 {
                log::warn!(
                    "claim {}: ignoring {extras} extra tool call(s) in one turn",
                    claim.id
                );
            }
            let result = session.dispatch(name, arguments).await;
            dialogue.push(ChatMessage::text(Role::User, render_tool_result(&result)));
        }
        // Think/Plain-only turns just extend the history.
    };

    let trail = EvidenceTrail {
        items: session.items,
        queries_issued: session.queries_issued,
        turns_used,
        terminated_by,
    };
    let summary = summarize_evidence(&trail, model).await;
    (summary, trail)
}

struct Session<'a> {
    search: &'a dyn SearchTool,
    browse: &'a dyn BrowseTool,
    budget: &'a RetrievalBudget,
    memory: MemoryBuffer,
    items: Vec<EvidenceItem>,
    queries_issued: Vec<String>,
    browses_since_search: usize,
}

impl Session<'_> {
    async fn dispatch(&mut self, name: &str, arguments: &Map<String, Value>) -> ToolResult {
        match name {
            "web_search" => self.dispatch_search(arguments).await,
            "browse" => self.dispatch_browse(arguments).await,
            other => ToolResult::error(other, format!("unknown tool '{other}'")),
        }
    }

    async fn dispatch_search(&mut self, arguments: &Map<String, Value>) -> ToolResult {
        let Some(query) = arguments.get("query").and_then(Value::as_str) else {
            return ToolResult::error("web_search", "missing required argument 'query'");
        };
        if self.queries_issued.len() >= self.budget.max_searches {
            return ToolResult::error(
                "web_search",
                format!("search budget exhausted ({} issued)", self.queries_issued.len()),
            );
        }
        self.queries_issued.push(query.to_string());
        match self.search.search(query, self.budget.top_k).await {
            Ok(batch) => {
                self.browses_since_search = 0;
                let results: Vec<_> = batch.results.into_iter().take(self.budget.top_k).collect();
                for result in &results {
                    self.items.push(EvidenceItem {
                        query: query.to_string(),
                        title: result.title.clone(),
                        url: result.url.clone(),
                        snippet: result.snippet.clone(),
                        extracted_sentences: Vec::new(),
                        fetched_at: batch.fetched_at,
                    });
                }
                let payload: Vec<Value> = results
                    .iter()
                    .map(|r| json!({"title": r.title, "url": r.url, "snippet": r.snippet}))
                    .collect();
                ToolResult::ok("web_search", Value::Array(payload))
            }
            Err(e) => ToolResult::error("web_search", e.to_string()),
        }
    }

    async fn dispatch_browse(&mut self, arguments: &Map<String, Value>) -> ToolResult {
        let Some(url) = arguments.get("url").and_then(Value::as_str) else {
            return ToolResult::error("browse", "missing required argument 'url'");
        };
        if self.browses_since_search >= self.budget.max_browses_per_search {
            return ToolResult::error(
                "browse",
                format!(
                    "browse budget exhausted ({} since the last search)",
                    self.browses_since_search
                ),
            );
        }
        self.browses_since_search += 1;
        match self.browse.fetch_and_extract(url).await {
            Ok(page) => {
                let novel = filter_novel(&page.text, &mut self.memory);
                match self.items.iter_mut().find(|item| item.url == url) {
                    Some(item) => item.extracted_sentences.extend(novel.iter().cloned()),
                    None => self.items.push(EvidenceItem {
                        query: self.queries_issued.last().cloned().unwrap_or_default(),
                        title: String::new(),
                        url: url.to_string(),
                        snippet: String::new(),
                        extracted_sentences: novel.clone(),
                        fetched_at: page.fetched_at,
                    }),
                }
                ToolResult::ok("browse", json!({"url": url, "novel_sentences": novel}))
            }
            Err(e) => ToolResult::error("browse", e.to_string()),
        }
    }
}

/// Split text into sentences, keep only those whose normalized form has not
/// been seen in this session, and record the returned ones as seen.
pub fn filter_novel(text: &str, memory: &mut MemoryBuffer) -> Vec<String> {
    let mut novel = Vec::new();
    for sentence in split_sentences(text) {
        let normalized = normalize_sentence(&sentence);
        if normalized.is_empty() {
            continue;
        }
        if memory.insert_hash(sentence_hash(&normalized)) {
            novel.push(sentence);
        }
    }
    novel
}

/// The summarization step `f_sum`: an agent answer passes through verbatim, a
/// budget-exhausted trail gets one model summarization attempt with an
/// extractive fallback, and a dead model gets the fallback directly.
pub async fn summarize_evidence(trail: &EvidenceTrail, model: &dyn ChatBackend) -> ContextSummary {
    let summary_with = |text: String| ContextSummary {
        text,
        source_urls: unique_urls(&trail.items),
        evidence_count: trail.items.len(),
    };

    match &trail.terminated_by {
        TerminationReason::AnswerBlock { answer } => summary_with(answer.clone()),
        _ if trail.items.is_empty() => ContextSummary::empty(),
        TerminationReason::ModelError | TerminationReason::RetrievalDisabled => {
            summary_with(extractive_fallback(trail))
        }
        TerminationReason::BudgetExhausted => {
            let prompt = SUMMARIZE_TEMPLATE.replace("{evidence}", &evidence_listing(&trail.items));
            let request = ChatRequest::new(vec![ChatMessage::text(Role::User, prompt)]);
            match model.chat(&request).await {
                Ok(text) if !text.trim().is_empty() => summary_with(text),
                Ok(_) | Err(_) => summary_with(extractive_fallback(trail)),
            }
        }
    }
}

/// Evidence snippets concatenated in retrieval order, capped at
/// [`FALLBACK_SUMMARY_CHAR_CAP`] characters.
fn extractive_fallback(trail: &EvidenceTrail) -> String {
    let joined = trail
        .items
        .iter()
        .map(|item| item.snippet.as_str())
        .filter(|snippet| !snippet.is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    truncate_chars(&joined, FALLBACK_SUMMARY_CHAR_CAP)
}

fn evidence_listing(items: &[EvidenceItem]) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        out.push_str(&format!("[{}] {} | {}\n", i + 1, item.title, item.url));
        if !item.snippet.is_empty() {
            out.push_str(&item.snippet);
            out.push('\n');
        }
        for sentence in &item.extracted_sentences {
            out.push_str("- ");
            out.push_str(sentence);
            out.push('\n');
        }
    }
    out
}

fn unique_urls(items: &[EvidenceItem]) -> Vec<String> {
    let mut seen = HashSet::new();
    items
        .iter()
        .filter(|item| !item.url.is_empty() && seen.insert(item.url.clone()))
        .map(|item| item.url.clone())
        .collect()
}

fn truncate_chars(s: &str, cap: usize) -> String {
    match s.char_indices().nth(cap) {
        Some((cut, _)) => s[..cut].to_string(),
        None => s.to_string(),
    }
}

/// Sentence boundaries: runs of `.` `!` `?` (kept on the sentence) and line
/// breaks (dropped).
fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '\n' | '\r' => flush_sentence(&mut current, &mut sentences),
            '.' | '!' | '?' => {
                current.push(ch);
                while matches!(chars.peek(), Some('.' | '!' | '?')) {
                    current.push(chars.next().expect("peeked"));
                }
                flush_sentence(&mut current, &mut sentences);
            }
            _ => current.push(ch),
        }
    }
    flush_sentence(&mut current, &mut sentences);
    sentences
}

fn flush_sentence(current: &mut String, sentences: &mut Vec<String>) {
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    current.clear();
}

/// Normalization behind the novelty check: Unicode lowercase, collapsed
/// whitespace, surrounding punctuation stripped.
pub fn normalize_sentence(sentence: &str) -> String {
    sentence
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

/// FNV-1a with the standard pinned offset basis; stable across runs and
/// platforms.
fn sentence_hash(normalized: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for byte in normalized.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ImageRef;
    use crate::testkit::{Script, ScriptedBrowseTool, ScriptedChatBackend, ScriptedSearchTool};

    fn claim(caption: &str) -> ClaimRecord {
        ClaimRecord::new(
            "t1",
            ImageRef::inline(vec![0u8], "image/png").unwrap(),
            caption,
        )
        .unwrap()
    }

    fn search_fixture(query: &str, n: usize) -> ScriptedSearchTool {
        let results: Vec<(String, String, String)> = (0..n)
            .map(|i| {
                (
                    format!("title {i}"),
                    format!("https://example.org/{i}"),
                    format!("snippet {i}"),
                )
            })
            .collect();
        ScriptedSearchTool::single(query, results)
    }

    #[test]
    fn novelty_filter_collapses_duplicates() {
        let mut memory = MemoryBuffer::new();
        let novel = filter_novel(
            "The sculpture dates from 2002. The sculpture dates from 2002.",
            &mut memory,
        );
        assert_eq!(novel, vec!["The sculpture dates from 2002.".to_string()]);
    }

    #[test]
    fn novelty_filter_respects_prior_memory() {
        let mut memory = MemoryBuffer::new();
        memory.insert_normalized("the sculpture dates from 2002");
        let novel = filter_novel(
            "The sculpture dates from 2002! New detail here.",
            &mut memory,
        );
        assert_eq!(novel, vec!["New detail here.".to_string()]);
    }

    #[test]
    fn novelty_filter_on_empty_text() {
        let mut memory = MemoryBuffer::new();
        assert!(filter_novel("", &mut memory).is_empty());
    }

    #[test]
    fn normalization_strips_case_space_and_edge_punctuation() {
        assert_eq!(
            normalize_sentence("  The   Sculpture dates from 2002!  "),
            "the sculpture dates from 2002"
        );
        assert_eq!(normalize_sentence("«Quoted»"), "quoted");
        assert_eq!(normalize_sentence("..."), "");
    }

    #[test]
    fn sentences_split_on_terminators_and_linebreaks() {
        assert_eq!(
            split_sentences("One. Two!! Three?\nFour"),
            vec!["One.", "Two!!", "Three?", "Four"]
        );
    }

    #[tokio::test]
    async fn early_answer_short_circuits_with_no_evidence() {
        let model = ScriptedChatBackend::new(Script::repeat_last(vec![
            "<answer>Nothing to check.</answer>".to_string(),
        ]));
        let search = search_fixture("unused", 0);
        let browse = ScriptedBrowseTool::empty();
        let (summary, trail) = run_retrieval(
            &claim("x"),
            &model,
            &search,
            &browse,
            &RetrievalBudget::default(),
        )
        .await;
        assert_eq!(summary.text, "Nothing to check.");
        assert_eq!(summary.evidence_count, 0);
        assert!(trail.items.is_empty());
        assert_eq!(trail.turns_used, 1);
        assert!(matches!(
            trail.terminated_by,
            TerminationReason::AnswerBlock { .. }
        ));
    }

    #[tokio::test]
    async fn search_then_answer_records_evidence() {
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(vec![
            "<think>look it up</think>\n{\"name\":\"web_search\",\"arguments\":{\"query\":\"whale sculpture train\"}}".to_string(),
            "<answer>Confirmed by several outlets.</answer>".to_string(),
        ]));
        let search = search_fixture("whale sculpture train", 3);
        let browse = ScriptedBrowseTool::empty();
        let (summary, trail) = run_retrieval(
            &claim("a train rests on a whale sculpture"),
            &model,
            &search,
            &browse,
            &RetrievalBudget::default(),
        )
        .await;
        assert_eq!(summary.text, "Confirmed by several outlets.");
        assert_eq!(summary.evidence_count, 3);
        assert_eq!(trail.items.len(), 3);
        assert_eq!(trail.queries_issued, vec!["whale sculpture train".to_string()]);
        assert_eq!(trail.turns_used, 2);
    }

    #[tokio::test]
    async fn budget_exhaustion_falls_back_to_snippets() {
        // max_turns=2: turn 1 searches (3 results), turn 2 thinks; the
        // summarize call then fails (script exhausted) -> extractive fallback.
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(vec![
            "{\"name\":\"web_search\",\"arguments\":{\"query\":\"q\"}}".to_string(),
            "<think>still pondering</think>".to_string(),
        ]));
        let search = search_fixture("q", 3);
        let browse = ScriptedBrowseTool::empty();
        let budget = RetrievalBudget {
            max_turns: 2,
            ..RetrievalBudget::default()
        };
        let (summary, trail) =
            run_retrieval(&claim("c"), &model, &search, &browse, &budget).await;
        assert!(matches!(trail.terminated_by, TerminationReason::BudgetExhausted));
        assert_eq!(summary.text, "snippet 0\nsnippet 1\nsnippet 2");
        assert_eq!(summary.evidence_count, 3);
        assert_eq!(trail.turns_used, 2);
    }

    #[tokio::test]
    async fn model_error_terminates_after_two_consecutive_failures() {
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(vec![]));
        let search = search_fixture("unused", 0);
        let browse = ScriptedBrowseTool::empty();
        let (summary, trail) = run_retrieval(
            &claim("c"),
            &model,
            &search,
            &browse,
            &RetrievalBudget::default(),
        )
        .await;
        assert!(matches!(trail.terminated_by, TerminationReason::ModelError));
        assert_eq!(trail.turns_used, 2);
        assert_eq!(summary.text, "");
        assert_eq!(summary.evidence_count, 0);
    }

    #[tokio::test]
    async fn search_budget_is_enforced() {
        let steps: Vec<String> = (0..5)
            .map(|i| format!("{{\"name\":\"web_search\",\"arguments\":{{\"query\":\"q{i}\"}}}}"))
            .collect();
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(steps));
        let mut fixtures = std::collections::BTreeMap::new();
        for i in 0..5 {
            fixtures.insert(
                format!("q{i}"),
                vec![(format!("t{i}"), format!("https://e.org/{i}"), format!("s{i}"))],
            );
        }
        let search = ScriptedSearchTool::new(fixtures);
        let browse = ScriptedBrowseTool::empty();
        let budget = RetrievalBudget {
            max_turns: 6,
            max_searches: 2,
            ..RetrievalBudget::default()
        };
        let (_, trail) = run_retrieval(&claim("c"), &model, &search, &browse, &budget).await;
        assert_eq!(trail.queries_issued.len(), 2);
        assert_eq!(trail.items.len(), 2);
    }

    #[tokio::test]
    async fn top_k_caps_results_and_novelty_holds_across_session() {
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(vec![
            "{\"name\":\"web_search\",\"arguments\":{\"query\":\"big\"}}".to_string(),
            "{\"name\":\"browse\",\"arguments\":{\"url\":\"https://example.org/0\"}}".to_string(),
            "{\"name\":\"browse\",\"arguments\":{\"url\":\"https://example.org/1\"}}".to_string(),
            "<answer>done</answer>".to_string(),
        ]));
        let search = search_fixture("big", 15);
        let mut pages = std::collections::BTreeMap::new();
        pages.insert(
            "https://example.org/0".to_string(),
            "<p>Shared sentence. Unique alpha.</p>".to_string(),
        );
        pages.insert(
            "https://example.org/1".to_string(),
            "<p>Shared sentence. Unique beta.</p>".to_string(),
        );
        let browse = ScriptedBrowseTool::new(pages);
        let (_, trail) = run_retrieval(
            &claim("c"),
            &model,
            &search,
            &browse,
            &RetrievalBudget::default(),
        )
        .await;
        assert_eq!(trail.items.len(), 10, "top_k must cap search results");

        let mut seen = HashSet::new();
        for item in &trail.items {
            for sentence in &item.extracted_sentences {
                assert!(
                    seen.insert(normalize_sentence(sentence)),
                    "duplicate sentence leaked: {sentence}"
                );
            }
        }
        assert_eq!(trail.items[0].extracted_sentences, vec![
            "Shared sentence.".to_string(),
            "Unique alpha.".to_string()
        ]);
        assert_eq!(trail.items[1].extracted_sentences, vec!["Unique beta.".to_string()]);
    }

    #[tokio::test]
    async fn verbatim_answer_summary_for_answer_trail() {
        let trail = EvidenceTrail {
            items: vec![],
            queries_issued: vec![],
            turns_used: 1,
            terminated_by: TerminationReason::AnswerBlock {
                answer: "X".to_string(),
            },
        };
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(vec![]));
        let summary = summarize_evidence(&trail, &model).await;
        assert_eq!(summary.text, "X");
    }

    #[tokio::test]
    async fn empty_trail_summarizes_to_empty() {
        let trail = EvidenceTrail {
            items: vec![],
            queries_issued: vec![],
            turns_used: 0,
            terminated_by: TerminationReason::BudgetExhausted,
        };
        let model = ScriptedChatBackend::new(Script::error_on_exhaustion(vec![]));
        let summary = summarize_evidence(&trail, &model).await;
        assert_eq!(summary, ContextSummary::empty());
    }

    #[tokio::test]
    async fn budget_exhausted_uses_model_summary_when_available() {
        let trail = EvidenceTrail {
            items: vec![EvidenceItem {
                query: "q".to_string(),
                title: "t".to_string(),
                url: "https://e.org".to_string(),
                snippet: "s".to_string(),
                extracted_sentences: vec![],
                fetched_at: 0,
            }],
            queries_issued: vec!["q".to_string()],
            turns_used: 3,
            terminated_by: TerminationReason::BudgetExhausted,
        };
        let model = ScriptedChatBackend::new(Script::repeat_last(vec![
            "A model-written summary.".to_string(),
        ]));
        let summary = summarize_evidence(&trail, &model).await;
        assert_eq!(summary.text, "A model-written summary.");
        assert_eq!(summary.source_urls, vec!["https://e.org".to_string()]);
    }

    #[test]
    fn fallback_truncates_at_the_cap()  {
        let items: Vec<EvidenceItem> = (0..100)
            .map(|i| EvidenceItem {
                query: "q".to_string(),
                title: String::new(),
                url: format!("https://e.org/{i}"),
                snippet: "x".repeat(100),
                extracted_sentences: vec![],
                fetched_at: 0,
            })
            .collect();
        let trail = EvidenceTrail {
            items,
            queries_issued: vec![],
            turns_used: 8,
            terminated_by: TerminationReason::BudgetExhausted,
        };
        assert_eq!(
            extractive_fallback(&trail).chars().count(),
            FALLBACK_SUMMARY_CHAR_CAP
        );
    }
}
