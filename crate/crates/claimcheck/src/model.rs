//! Shared domain types used by every other module. No I/O lives here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("field '{0}' must not be empty")]
    EmptyField(&'static str),
    #[error("inline image payload must not be empty")]
    EmptyImagePayload,
    #[error("verdict 'Unknown' has no label mapping")]
    UnknownVerdict,
    #[error("judge weight at index {index} is not strictly positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("at least one judge weight is required")]
    NoWeights,
}

/// Ground-truth / predicted class of an image-caption pair. OOC is the
/// positive class everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    OOC,
    NOOC,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::OOC => f.write_str("OOC"),
            Label::NOOC => f.write_str("NOOC"),
        }
    }
}

/// A single judge's consistency call. `Unknown` is an abstention: agents may
/// produce it, the fused final decision never does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::True => f.write_str("True"),
            Verdict::False => f.write_str("False"),
            Verdict::Unknown => f.write_str("Unknown"),
        }
    }
}

/// Maps a decided verdict onto the label space: False is the OOC class.
///
/// `Unknown` is a contract violation here; callers must resolve abstentions
/// (via fusion) before mapping.
pub fn verdict_to_label(verdict: Verdict) -> Result<Label, ModelError> {
    match verdict {
        Verdict::False => Ok(Label::OOC),
        Verdict::True => Ok(Label::NOOC),
        Verdict::Unknown => Err(ModelError::UnknownVerdict),
    }
}

/// Inverse of [`verdict_to_label`]; total because labels carry no abstention.
pub fn label_to_verdict(label: Label) -> Verdict {
    match label {
        Label::OOC => Verdict::False,
        Label::NOOC => Verdict::True,
    }
}

/// An image either on disk or carried inline. Payloads are opaque bytes;
/// nothing in this crate decodes pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageRef {
    Path { path: String },
    Inline {
        #[serde(with = "b64_bytes")]
        data: Vec<u8>,
        media_type: String,
    },
}

impl ImageRef {
    pub fn path(path: impl Into<String>) -> Self {
        ImageRef::Path { path: path.into() }
    }

    pub fn inline(data: Vec<u8>, media_type: impl Into<String>) -> Result<Self, ModelError> {
        if data.is_empty() {
            return Err(ModelError::EmptyImagePayload);
        }
        Ok(ImageRef::Inline {
            data,
            media_type: media_type.into(),
        })
    }
}

/// Serialize raw bytes as standard padded base64 so records stay line-oriented.
mod b64_bytes {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(de)?;
        STANDARD.decode(s.as_bytes()).map_err(serde::de::Error::custom)
    }
}

/// The unit of verification: one image plus the caption under test.
///
/// `alt_caption` is carried for dataset provenance only; no prediction path
/// reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub image: ImageRef,
    pub caption: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_label: Option<Label>,
}

impl ClaimRecord {
    pub fn new(
        id: impl Into<String>,
        image: ImageRef,
        caption: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let caption = caption.into();
        if id.is_empty() {
            return Err(ModelError::EmptyField("id"));
        }
        if caption.is_empty() {
            return Err(ModelError::EmptyField("caption"));
        }
        Ok(ClaimRecord {
            id,
            image,
            caption,
            alt_caption: None,
            gold_label: None,
        })
    }

    pub fn with_alt_caption(mut self, alt: impl Into<String>) -> Self {
        self.alt_caption = Some(alt.into());
        self
    }

    pub fn with_gold_label(mut self, label: Label) -> Self {
        self.gold_label = Some(label);
        self
    }
}

/// One piece of retrieved web evidence: a search hit plus any novel sentences
/// extracted while browsing it. `fetched_at` is UTC epoch seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub query: String,
    pub title: String,
    pub url: String,
    pub snippet: String,
    pub extracted_sentences: Vec<String>,
    pub fetched_at: u64,
}

/// The synthesized context handed to the judges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSummary {
    pub text: String,
    pub source_urls: Vec<String>,
    pub evidence_count: usize,
}

impl ContextSummary {
    pub fn empty() -> Self {
        ContextSummary {
            text: String::new(),
            source_urls: Vec::new(),
            evidence_count: 0,
        }
    }
}

/// A single judge's parsed output. `parse_failed` implies `Unknown`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentVerdict {
    pub agent_id: String,
    pub verdict: Verdict,
    pub rationale: String,
    pub raw_response: String,
    pub parse_failed: bool,
}

/// Strictly positive per-judge reliability weights, one per configured agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct JudgeWeights(Vec<f64>);

impl JudgeWeights {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if values.is_empty() {
            return Err(ModelError::NoWeights);
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::NonPositiveWeight { index, value });
            }
        }
        Ok(JudgeWeights(values))
    }

    /// Uniform weights (pure majority voting), the default roster setting.
    pub fn uniform(n: usize) -> Result<Self, ModelError> {
        JudgeWeights::new(vec![1.0; n.max(0)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for JudgeWeights {
    type Error = ModelError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        JudgeWeights::new(values)
    }
}

impl From<JudgeWeights> for Vec<f64> {
    fn from(w: JudgeWeights) -> Vec<f64> {
        w.0
    }
}

/// Wall-clock instrumentation for one verification. Overlap is allowed, so
/// `total_ms >= retrieval_ms + judge_ms` is deliberately not an invariant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub retrieval_ms: u64,
    pub judge_ms: u64,
    pub total_ms: u64,
}

/// The fused outcome for one claim. `final` is never `Unknown`;
/// `predicted_label` is its fixed image: False ⟷ OOC, True ⟷ NOOC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub claim_id: String,
    #[serde(rename = "final")]
    pub final_verdict: Verdict,
    pub predicted_label: Label,
    pub needs_review: bool,
    pub agent_verdicts: Vec<AgentVerdict>,
    pub context: ContextSummary,
    // In-memory instrumentation only: keeping wall-clock values out of
    // results.jsonl is what makes batch runs byte-reproducible. Aggregates
    // land in run_meta.json.
    #[serde(skip)]
    pub timing: TimingRecord,
}
