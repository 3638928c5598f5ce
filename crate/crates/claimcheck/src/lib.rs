//! Retrieval-augmented multi-agent verification of image-caption claims.
//!
//! The pipeline cascades three stages: a tool-using retrieval agent gathers
//! web evidence for a caption, an ensemble of vision-language judges scores
//! image-caption consistency against that evidence, and a weighted vote fuses
//! the verdicts into a final OOC/NOOC decision with a review flag. A batch
//! evaluation harness scores datasets with the standard five metrics.
//!
//! Module map:
//! - [`model`] — shared domain types (claims, verdicts, labels, decisions)
//! - [`protocol`] — the agent dialogue grammar (think/tool-call/answer)
//! - [`chat`] — chat-completions backend abstraction and HTTP client
//! - [`webtools`] — search/browse tools, disk cache, rate limiting
//! - [`retriever`] — the evidence-gathering loop and summarization
//! - [`judge`] — judge prompting and verdict parsing
//! - [`fuser`] — weighted majority voting
//! - [`metrics`] — confusion counting and derived metrics
//! - [`dataset`] — JSONL dataset ingestion and image encoding
//! - [`pipeline`] — orchestration, configuration, batch evaluation
//! - [`testkit`] — scripted backends and scenario replays

pub mod chat;
pub mod dataset;
pub mod fuser;
pub mod judge;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod protocol;
pub mod retriever;
pub mod testkit;
pub mod webtools;

pub use fuser::{fuse, FusionOutcome};
pub use metrics::{compute_metrics, confusion, ConfusionCounts, MetricsReport};
pub use model::{
    verdict_to_label, AgentVerdict, ClaimRecord, ContextSummary, Decision, EvidenceItem, ImageRef,
    JudgeWeights, Label, TimingRecord, Verdict,
};
pub use protocol::{extract_final_answer, parse_agent_message, AgentAction, ToolResult};
