//! The dialogue protocol the retrieval agent speaks.
//!
//! A raw model message decomposes into an ordered list of actions:
//! `<think>…</think>` blocks, `<answer>…</answer>` blocks, JSON tool
//! invocations of the shape `{"name": …, "arguments": {…}}` (either inside a
//! fenced code block or as a bare balanced object), and plain text for
//! everything else. Parsing is total: malformed input degrades to plain
//! segments, never to an error.
//!
//! Grammar notes (see `docs/protocol.md` for the conformance corpus):
//! - tag names match case-insensitively; the close tag is the nearest one
//!   after the open, so nested opens are literal text;
//! - an unterminated open tag degrades to plain text;
//! - fenced code blocks are tried before bare balanced objects.

use std::ops::Range;

use serde_json::{Map, Value};

/// One parsed element of an agent message, in order of appearance.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentAction {
    Think(String),
    ToolCall {
        name: String,
        arguments: Map<String, Value>,
    },
    Answer(String),
    Plain(String),
}

impl AgentAction {
    pub fn tool_call(name: impl Into<String>, arguments: Map<String, Value>) -> Self {
        AgentAction::ToolCall {
            name: name.into(),
            arguments,
        }
    }
}

/// A tool's reply, fed back into the dialogue. Exactly one of
/// `payload`/`error` is meaningful; the constructors keep that straight.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolResult {
    pub tool_name: String,
    pub payload: Value,
    pub error: Option<String>,
}

impl ToolResult {
    pub fn ok(tool_name: impl Into<String>, payload: Value) -> Self {
        ToolResult {
            tool_name: tool_name.into(),
            payload,
            error: None,
        }
    }

    pub fn error(tool_name: impl Into<String>, message: impl Into<String>) -> Self {
        ToolResult {
            tool_name: tool_name.into(),
            payload: Value::Null,
            error: Some(message.into()),
        }
    }
}

/// Parse a raw model message into actions, dropping span information.
pub fn parse_agent_message(raw: &str) -> Vec<AgentAction> {
    parse_agent_message_with_spans(raw)
        .into_iter()
        .map(|(action, _)| action)
        .collect()
}

/// Like [`parse_agent_message`] but returns each action's source byte range.
///
/// Spans of Think/Answer/ToolCall actions cover the full recognized region
/// (tags and fences included); Plain spans cover the trimmed gap text. Every
/// non-whitespace byte of the input falls inside exactly one span.
pub fn parse_agent_message_with_spans(raw: &str) -> Vec<(AgentAction, Range<usize>)> {
    let mut recognized: Vec<(Range<usize>, AgentAction)> = Vec::new();

    scan_tag_blocks(raw, &mut recognized);
    scan_fenced_tool_calls(raw, &mut recognized);
    scan_bare_tool_calls(raw, &mut recognized);

    recognized.sort_by_key(|(range, _)| range.start);

    let mut actions = Vec::new();
    let mut cursor = 0usize;
    for (range, action) in recognized {
        push_plain(raw, cursor..range.start, &mut actions);
        cursor = range.end;
        actions.push((action, range));
    }
    push_plain(raw, cursor..raw.len(), &mut actions);
    actions
}

/// Returns the text of the last Answer action, if any.
pub fn extract_final_answer(actions: &[AgentAction]) -> Option<String> {
    actions.iter().rev().find_map(|action| match action {
        AgentAction::Answer(text) => Some(text.clone()),
        _ => None,
    })
}

/// Canonical single-line rendering of a tool result for the dialogue.
///
/// Errors always render as `{"error": "<message>"}`; payloads render as
/// compact JSON with sorted object keys.
pub fn render_tool_result(result: &ToolResult) -> String {
    match &result.error {
        Some(message) => {
            let mut obj = Map::new();
            obj.insert("error".to_string(), Value::String(message.clone()));
            Value::Object(obj).to_string()
        }
        None => result.payload.to_string(),
    }
}

/// Canonical rendering of a tool call; `parse_agent_message` on the output
/// yields the same call back (round-trip).
pub fn render_tool_call(name: &str, arguments: &Map<String, Value>) -> String {
    let mut obj = Map::new();
    obj.insert("name".to_string(), Value::String(name.to_string()));
    obj.insert("arguments".to_string(), Value::Object(arguments.clone()));
    Value::Object(obj).to_string()
}

fn push_plain(raw: &str, gap: Range<usize>, out: &mut Vec<(AgentAction, Range<usize>)>) {
    let text = &raw[gap.clone()];
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return;
    }
    let lead = text.len() - text.trim_start().len();
    let start = gap.start + lead;
    out.push((
        AgentAction::Plain(trimmed.to_string()),
        start..start + trimmed.len(),
    ));
}

const TAGS: [(&str, &str, bool); 2] = [
    ("<think>", "</think>", true),
    ("<answer>", "</answer>", false),
];

fn scan_tag_blocks(raw: &str, out: &mut Vec<(Range<usize>, AgentAction)>) {
    let mut pos = 0usize;
    while pos < raw.len() {
        // Earliest open tag of either kind from the current position.
        let mut best: Option<(usize, usize)> = None;
        for (idx, (open, _, _)) in TAGS.iter().enumerate() {
            if let Some(at) = find_ci(raw, open, pos) {
                if best.map_or(true, |(b, _)| at < b) {
                    best = Some((at, idx));
                }
            }
        }
        let Some((start, tag_idx)) = best else { break };
        let (open, close, is_think) = TAGS[tag_idx];
        let content_start = start + open.len();
        match find_ci(raw, close, content_start) {
            Some(close_at) => {
                let content = raw[content_start..close_at].to_string();
                let end = close_at + close.len();
                let action = if is_think {
                    AgentAction::Think(content)
                } else {
                    AgentAction::Answer(content)
                };
                out.push((start..end, action));
                pos = end;
            }
            // Unterminated: the open tag stays literal text.
            None => pos = content_start,
        }
    }
}

fn scan_fenced_tool_calls(raw: &str, out: &mut Vec<(Range<usize>, AgentAction)>) {
    let mut pos = 0usize;
    while let Some(open_at) = find_ci(raw, "```", pos) {
        if covered(open_at, out) {
            pos = open_at + 3;
            continue;
        }
        // Skip an optional language word: content starts after the first
        // newline following the opening fence.
        let after_fence = open_at + 3;
        let content_start = match raw[after_fence..].find('\n') {
            Some(nl) => after_fence + nl + 1,
            None => after_fence,
        };
        let Some(close_at) = find_ci(raw, "```", content_start.max(after_fence)) else {
            pos = after_fence;
            continue;
        };
        let end = close_at + 3;
        if covered(close_at, out) || close_at < content_start {
            pos = after_fence;
            continue;
        }
        let body = raw[content_start..close_at].trim();
        match serde_json::from_str::<Value>(body).ok().and_then(as_tool_call) {
            Some(action) if !covered_range(open_at..end, out) => {
                out.push((open_at..end, action));
                pos = end;
            }
            _ => {
                // Not a tool call: leave the fence to the gap/bare scans.
                pos = after_fence;
            }
        }
    }
}

fn scan_bare_tool_calls(raw: &str, out: &mut Vec<(Range<usize>, AgentAction)>) {
    let bytes = raw.as_bytes();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let Some(open_rel) = raw[pos..].find('{') else { break };
        let open_at = pos + open_rel;
        if covered(open_at, out) {
            pos = open_at + 1;
            continue;
        }
        match balanced_object_end(raw, open_at) {
            Some(end) if !covered_range(open_at..end, out) => {
                match serde_json::from_str::<Value>(&raw[open_at..end]) {
                    Ok(value) => {
                        if let Some(action) = as_tool_call(value) {
                            out.push((open_at..end, action));
                        }
                        // Valid JSON that is not a tool call is opaque plain
                        // text; do not rescan its interior.
                        pos = end;
                    }
                    Err(_) => pos = open_at + 1,
                }
            }
            _ => pos = open_at + 1,
        }
    }
}

fn as_tool_call(value: Value) -> Option<AgentAction> {
    let obj = value.as_object()?;
    let name = obj.get("name")?.as_str()?;
    if name.is_empty() {
        return None;
    }
    let arguments = obj.get("arguments")?.as_object()?.clone();
    Some(AgentAction::tool_call(name, arguments))
}

/// Byte offset one past the `}` balancing the `{` at `open_at`, honoring
/// JSON string and escape rules. Offsets stay on char boundaries because all
/// structural characters are ASCII.
fn balanced_object_end(raw: &str, open_at: usize) -> Option<usize> {
    let bytes = raw.as_bytes();
    debug_assert_eq!(bytes[open_at], b'{');
    let mut depth = 0i32;
    let mut in_string = false;
    let mut escaped = false;
    let mut i = open_at;
    while i < bytes.len() {
        let b = bytes[i];
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
        } else {
            match b {
                b'"' => in_string = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    None
}

/// All balanced top-level JSON objects in `text`, in order of appearance.
/// Invalid-JSON spans are skipped; the interior of a valid object is not
/// rescanned.
pub(crate) fn scan_json_objects(text: &str) -> Vec<Value> {
    let mut found = Vec::new();
    let mut pos = 0usize;
    while pos < text.len() {
        let Some(open_rel) = text[pos..].find('{') else { break };
        let open_at = pos + open_rel;
        match balanced_object_end(text, open_at) {
            Some(end) => match serde_json::from_str::<Value>(&text[open_at..end]) {
                Ok(value) => {
                    found.push(value);
                    pos = end;
                }
                Err(_) => pos = open_at + 1,
            },
            None => pos = open_at + 1,
        }
    }
    found
}

fn covered(at: usize, spans: &[(Range<usize>, AgentAction)]) -> bool {
    spans.iter().any(|(r, _)| r.start <= at && at < r.end)
}

fn covered_range(candidate: Range<usize>, spans: &[(Range<usize>, AgentAction)]) -> bool {
    spans
        .iter()
        .any(|(r, _)| candidate.start < r.end && r.start < candidate.end)
}

/// ASCII case-insensitive substring search from a byte offset.
fn find_ci(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if from >= h.len() || n.is_empty() || n.len() > h.len() - from {
        return None;
    }
    h[from..]
        .windows(n.len())
        .position(|w| w.eq_ignore_ascii_case(n))
        .map(|p| p + from)
}
