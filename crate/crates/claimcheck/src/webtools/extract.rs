//! Plain tag-stripping HTML-to-text extraction. No readability scoring, no
//! script execution: markup, script and style bodies are dropped, block
//! element boundaries become line breaks, whitespace collapses, and the
//! result is capped at 20 000 characters.

/// Output cap, in characters.
pub const EXTRACT_CHAR_CAP: usize = 20_000;

const BLOCK_TAGS: &[&str] = &[
    "p", "div", "br", "hr", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "table",
    "td", "th", "section", "article", "header", "footer", "blockquote", "pre", "title",
];

const SKIP_CONTENT_TAGS: &[&str] = &["script", "style", "noscript"];

pub fn extract_text(html: &str) -> String {
    let mut assembler = TextAssembler::new();
    let bytes = html.as_bytes();
    let mut i = 0usize;

    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                if html[i..].starts_with("<!--") {
                    i = match html[i + 4..].find("-->") {
                        Some(at) => i + 4 + at + 3,
                        None => bytes.len(),
                    };
                    continue;
                }
                let Some(tag_end) = find_tag_end(bytes, i) else {
                    // A lone '<' with no closing '>': treat as text.
                    assembler.push_str("<");
                    i += 1;
                    continue;
                };
                let inner = &html[i + 1..tag_end];
                let (name, closing) = tag_name(inner);
                if !closing && SKIP_CONTENT_TAGS.contains(&name.as_str()) {
                    let close = format!("</{name}");
                    i = match find_ci(html, &close, tag_end) {
                        Some(at) => match find_tag_end(bytes, at) {
                            Some(end) => end + 1,
                            None => bytes.len(),
                        },
                        None => bytes.len(),
                    };
                    continue;
                }
                if BLOCK_TAGS.contains(&name.as_str()) {
                    assembler.break_line();
                }
                i = tag_end + 1;
            }
            b'&' => {
                let (decoded, consumed) = decode_entity(&html[i..]);
                assembler.push_str(&decoded);
                i += consumed;
            }
            _ => {
                // Copy the verbatim run up to the next markup byte.
                let run_end = html[i..]
                    .find(['<', '&'])
                    .map(|at| i + at)
                    .unwrap_or(bytes.len());
                assembler.push_str(&html[i..run_end]);
                i = run_end;
            }
        }
    }

    assembler.finish()
}

/// Whitespace-collapsing accumulator: runs of spaces/tabs become one space,
/// any newline (literal or from a block tag) beats spaces and collapses to a
/// single '\n'. Preserving literal newlines keeps extraction idempotent on
/// its own output.
struct TextAssembler {
    out: String,
    pending_space: bool,
    pending_newline: bool,
}

impl TextAssembler {
    fn new() -> Self {
        TextAssembler {
            out: String::new(),
            pending_space: false,
            pending_newline: false,
        }
    }

    fn break_line(&mut self) {
        self.pending_newline = true;
    }

    fn push_str(&mut self, text: &str) {
        for ch in text.chars() {
            if ch == '\n' || ch == '\r' {
                self.pending_newline = true;
            } else if ch.is_whitespace() {
                self.pending_space = true;
            } else {
                if !self.out.is_empty() {
                    if self.pending_newline {
                        self.out.push('\n');
                    } else if self.pending_space {
                        self.out.push(' ');
                    }
                }
                self.pending_newline = false;
                self.pending_space = false;
                self.out.push(ch);
            }
        }
    }

    fn finish(self) -> String {
        let mut out = self.out;
        if let Some((cut, _)) = out.char_indices().nth(EXTRACT_CHAR_CAP) {
            out.truncate(cut);
        }
        out
    }
}

/// Index of the '>' closing the tag opened at `open`, skipping quoted
/// attribute values.
fn find_tag_end(bytes: &[u8], open: usize) -> Option<usize> {
    let mut quote: Option<u8> = None;
    for (offset, &b) in bytes[open + 1..].iter().enumerate() {
        match quote {
            Some(q) => {
                if b == q {
                    quote = None;
                }
            }
            None => match b {
                b'"' | b'\'' => quote = Some(b),
                b'>' => return Some(open + 1 + offset),
                _ => {}
            },
        }
    }
    None
}

fn tag_name(inner: &str) -> (String, bool) {
    let inner = inner.trim();
    let (inner, closing) = match inner.strip_prefix('/') {
        Some(rest) => (rest, true),
        None => (inner, false),
    };
    let name: String = inner
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    (name, closing)
}

/// Decode one HTML entity at the start of `text`; returns the decoded string
/// and the number of bytes consumed. Unrecognized forms stay literal.
fn decode_entity(text: &str) -> (String, usize) {
    debug_assert!(text.starts_with('&'));
    let semi = match text[..text.len().min(12)].find(';') {
        Some(at) => at,
        None => return ("&".to_string(), 1),
    };
    let body = &text[1..semi];
    let decoded = match body {
        "amp" => Some("&".to_string()),
        "lt" => Some("<".to_string()),
        "gt" => Some(">".to_string()),
        "quot" => Some("\"".to_string()),
        "apos" => Some("'".to_string()),
        "nbsp" => Some(" ".to_string()),
        _ => {
            if let Some(num) = body.strip_prefix("#x").or_else(|| body.strip_prefix("#X")) {
                u32::from_str_radix(num, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .map(String::from)
            } else if let Some(num) = body.strip_prefix('#') {
                num.parse::<u32>()
                    .ok()
                    .and_then(char::from_u32)
                    .map(String::from)
            } else {
                None
            }
        }
    };
    match decoded {
        Some(s) => (s, semi + 1),
        None => ("&".to_string(), 1),
    }
}

fn find_ci(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if from >= h.len() || n.is_empty() {
        return None;
    }
    h[from..]
        .windows(n.len())
        .position(|w| w.eq_ignore_ascii_case(n))
        .map(|p| p + from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scripts_and_tags_are_stripped() {
        let html = "<html><script>x()</script><p>Hello <b>world</b></p></html>";
        assert_eq!(extract_text(html), "Hello world");
    }

    #[test]
    fn block_elements_become_line_breaks() {
        assert_eq!(extract_text("<html><p>A</p><p>B</p></html>"), "A\nB");
        assert_eq!(extract_text("a<br>b"), "a\nb");
    }

    #[test]
    fn style_content_and_comments_are_dropped() {
        let html = "<style>p { color: red }</style><!-- hidden -->visible";
        assert_eq!(extract_text(html), "visible");
    }

    #[test]
    fn entities_decode() {
        assert_eq!(extract_text("a &amp; b &lt;c&gt; &#233;"), "a & b <c> é");
        assert_eq!(extract_text("odd &notathing; stays"), "odd &notathing; stays");
    }

    #[test]
    fn whitespace_collapses() {
        assert_eq!(extract_text("  a   b\t c  "), "a b c");
        assert_eq!(extract_text("a \n\n b"), "a\nb");
    }

    #[test]
    fn output_is_capped() {
        let html = format!("<p>{}</p>", "x".repeat(30_000));
        assert_eq!(extract_text(&html).chars().count(), EXTRACT_CHAR_CAP);
    }

    #[test]
    fn attribute_quotes_may_contain_angle_brackets() {
        assert_eq!(extract_text("<a href=\"x>y\">link</a>"), "link");
    }

    proptest! {
        #[test]
        fn extraction_is_idempotent_on_plain_text(
            text in "[a-zA-Z0-9 .,!?\\n-]{0,300}"
        ) {
            let once = extract_text(&text);
            let again = extract_text(&format!("<pre>{once}</pre>"));
            prop_assert_eq!(once, again);
        }
    }
}
