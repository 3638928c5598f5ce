//! Claim dataset ingestion.
//!
//! The on-disk format is UTF-8 JSON lines, one record per line:
//!
//! ```json
//! {"id": "17", "image_path": "img/17.jpg", "caption1": "…", "caption2": "…", "label": "OOC"}
//! ```
//!
//! `image_b64` + `image_media_type` may replace `image_path` for inline
//! payloads. `caption2` and `label` are optional. Malformed lines are skipped
//! with a warning carrying the line number; batch runs survive isolated
//! corruption. See `docs/dataset-format.md` for the adaptation guide.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClaimRecord, ImageRef, Label};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("dataset {0} contains zero valid records")]
    NoValidRecords(String),
    #[error("image file not found: {0}")]
    MissingImage(String),
    #[error("image file is empty: {0}")]
    EmptyImage(String),
    #[error("cannot read image {path}: {source}")]
    UnreadableImage {
        path: String,
        source: std::io::Error,
    },
}

/// A loaded dataset: the valid records plus one warning string per skipped
/// or suspicious line.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<ClaimRecord>,
    pub source_path: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawLine {
    id: Option<String>,
    image_path: Option<String>,
    image_b64: Option<String>,
    image_media_type: Option<String>,
    caption1: Option<String>,
    caption2: Option<String>,
    label: Option<String>,
}

#[derive(Debug, Serialize)]
struct OutLine<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    image_path: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    image_b64: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    image_media_type: Option<&'a str>,
    caption1: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    caption2: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
}

/// Load a JSONL dataset, skipping malformed lines with warnings.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<DatasetManifest, DatasetError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|source| DatasetError::Unreadable {
        path: display.clone(),
        source,
    })?;
    // Tolerate and strip a UTF-8 byte-order mark.
    let raw = raw.strip_prefix('\u{feff}').unwrap_or(&raw);

    let mut records: Vec<ClaimRecord> = Vec::new();
    let mut warnings = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();

    for (index, line) in raw.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line, path) {
            Ok(record) => {
                if !seen_ids.insert(record.id.clone()) {
                    warnings.push(format!("line {line_no}: duplicate id '{}'", record.id));
                    continue;
                }
                if let ImageRef::Path { path: image_path } = &record.image {
                    if !Path::new(image_path).exists() {
                        warnings.push(format!(
                            "line {line_no}: image file not found: {image_path}"
                        ));
                    }
                }
                records.push(record);
            }
            Err(reason) => warnings.push(format!("line {line_no}: {reason}")),
        }
    }

    for warning in &warnings {
        log::warn!("{display}: {warning}");
    }
    if records.is_empty() {
        return Err(DatasetError::NoValidRecords(display));
    }
    Ok(DatasetManifest {
        records,
        source_path: display,
        warnings,
    })
}

fn parse_line(line: &str, dataset_path: &Path) -> Result<ClaimRecord, String> {
    let raw: RawLine = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let id = raw.id.filter(|s| !s.is_empty()).ok_or("missing id")?;
    let caption = raw
        .caption1
        .filter(|s| !s.is_empty())
        .ok_or("missing caption1")?;

    let image = match (raw.image_path, raw.image_b64) {
        (Some(_), Some(_)) => return Err("both image_path and image_b64 set".to_string()),
        (Some(image_path), None) => {
            // Relative paths resolve against the dataset file's directory.
            let resolved = if Path::new(&image_path).is_absolute() {
                image_path
            } else {
                dataset_path
                    .parent()
                    .unwrap_or_else(|| Path::new("."))
                    .join(&image_path)
                    .to_string_lossy()
                    .into_owned()
            };
            ImageRef::path(resolved)
        }
        (None, Some(b64)) => {
            let media_type = raw
                .image_media_type
                .filter(|s| !s.is_empty())
                .ok_or("image_b64 requires image_media_type")?;
            let data = BASE64
                .decode(b64.as_bytes())
                .map_err(|e| format!("invalid image_b64: {e}"))?;
            ImageRef::inline(data, media_type).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("missing image_path or image_b64".to_string()),
    };

    let gold_label = match raw.label.as_deref() {
        None => None,
        Some("OOC") => Some(Label::OOC),
        Some("NOOC") => Some(Label::NOOC),
        Some(other) => return Err(format!("unknown label '{other}'")),
    };

    let mut record = ClaimRecord::new(id, image, caption).map_err(|e| e.to_string())?;
    if let Some(alt) = raw.caption2 {
        record = record.with_alt_caption(alt);
    }
    record.gold_label = gold_label;
    Ok(record)
}

/// Write a manifest back to JSONL; `load_dataset` on the output yields an
/// equal manifest (modulo warnings and path resolution).
pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut out = String::new();
    for record in &manifest.records {
        let (image_path, image_b64, image_media_type) = match &record.image {
            ImageRef::Path { path } => (Some(path.as_str()), None, None),
            ImageRef::Inline { data, media_type } => {
                (None, Some(BASE64.encode(data)), Some(media_type.as_str()))
            }
        };
        let line = OutLine {
            id: &record.id,
            image_path,
            image_b64,
            image_media_type,
            caption1: &record.caption,
            caption2: record.alt_caption.as_deref(),
            label: record.gold_label,
        };
        out.push_str(&serde_json::to_string(&line).expect("record serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Base64-encode an image for transport, inferring the media type from the
/// file extension (inline payloads carry their own).
pub fn encode_image(image: &ImageRef) -> Result<(String, String), DatasetError> {
    match image {
        ImageRef::Inline { data, media_type } => Ok((BASE64.encode(data), media_type.clone())),
        ImageRef::Path { path } => {
            let bytes = match std::fs::read(path) {
                Ok(bytes) => bytes,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    return Err(DatasetError::MissingImage(path.clone()))
                }
                Err(source) => {
                    return Err(DatasetError::UnreadableImage {
                        path: path.clone(),
                        source,
                    })
                }
            };
            if bytes.is_empty() {
                return Err(DatasetError::EmptyImage(path.clone()));
            }
            Ok((BASE64.encode(&bytes), media_type_for(path)))
        }
    }
}

fn media_type_for(path: &str) -> String {
    let extension = Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match extension.as_str() {
        "jpg" | "jpeg" => "image/jpeg".to_string(),
        "png" => "image/png".to_string(),
        other => {
            log::warn!("unsupported image extension '{other}' for {path}; using application/octet-stream");
            "application/octet-stream".to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_lines(dir: &Path, name: &str, lines: &[&str]) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        path
    }

    #[test]
    fn well_formed_line_loads() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("img")).unwrap();
        std::fs::write(dir.path().join("img/1.jpg"), b"x").unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[r#"{"id":"1","image_path":"img/1.jpg","caption1":"c1","caption2":"c2","label":"OOC"}"#],
        );
        let manifest = load_dataset(&path).unwrap();
        assert_eq!(manifest.records.len(), 1);
        let record = &manifest.records[0];
        assert_eq!(record.caption, "c1");
        assert_eq!(record.alt_caption.as_deref(), Some("c2"));
        assert_eq!(record.gold_label, Some(Label::OOC));
        assert!(manifest.warnings.is_empty());
    }

    #[test]
    fn missing_caption1_is_skipped_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[
                r#"{"id":"1","image_b64":"TWFu","image_media_type":"image/png","caption1":"ok"}"#,
                r#"{"id":"2","image_b64":"TWFu","image_media_type":"image/png"}"#,
            ],
        );
        let manifest = load_dataset(&path).unwrap();
        assert_eq!(manifest.records.len(), 1);
        assert_eq!(manifest.warnings, vec!["line 2: missing caption1"]);
    }

    #[test]
    fn duplicate_id_keeps_first_occurrence() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[
                r#"{"id":"1","image_b64":"TWFu","image_media_type":"image/png","caption1":"first"}"#,
                r#"{"id":"1","image_b64":"TWFu","image_media_type":"image/png","caption1":"second"}"#,
            ],
        );
        let manifest = load_dataset(&path).unwrap();
        assert_eq!(manifest.records.len(), 1);
        assert_eq!(manifest.records[0].caption, "first");
        assert!(manifest.warnings[0].contains("duplicate id"));
    }

    #[test]
    fn bom_is_tolerated_and_zero_valid_records_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "bom.jsonl",
            &["\u{feff}{\"id\":\"1\",\"image_b64\":\"TWFu\",\"image_media_type\":\"image/png\",\"caption1\":\"c\"}"],
        );
        assert_eq!(load_dataset(&path).unwrap().records.len(), 1);

        let empty = write_lines(dir.path(), "bad.jsonl", &["not json"]);
        assert!(matches!(
            load_dataset(&empty),
            Err(DatasetError::NoValidRecords(_))
        ));
    }

    #[test]
    fn missing_image_file_is_flagged_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[r#"{"id":"1","image_path":"gone.png","caption1":"c"}"#],
        );
        let manifest = load_dataset(&path).unwrap();
        assert_eq!(manifest.records.len(), 1);
        assert!(manifest.warnings[0].contains("image file not found"));
    }

    #[test]
    fn manifest_round_trips_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[
                r#"{"id":"1","image_b64":"TWFu","image_media_type":"image/png","caption1":"caffè ☕","caption2":"alt","label":"NOOC"}"#,
                r#"{"id":"2","image_b64":"AAEC","image_media_type":"image/jpeg","caption1":"two"}"#,
            ],
        );
        let manifest = load_dataset(&path).unwrap();
        let copy = dir.path().join("copy.jsonl");
        write_manifest(&manifest, &copy).unwrap();
        let reloaded = load_dataset(&copy).unwrap();
        assert_eq!(reloaded.records, manifest.records);
    }

    #[test]
    fn encode_image_canonical_base64() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        std::fs::write(&path, [0x4D, 0x61, 0x6E]).unwrap();
        let image = ImageRef::path(path.to_string_lossy());
        let (b64, media) = encode_image(&image).unwrap();
        assert_eq!(b64, "TWFu");
        assert_eq!(media, "application/octet-stream");
    }

    #[test]
    fn encode_image_rejects_empty_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.png");
        std::fs::write(&empty, b"").unwrap();
        assert!(matches!(
            encode_image(&ImageRef::path(empty.to_string_lossy())),
            Err(DatasetError::EmptyImage(_))
        ));
        assert!(matches!(
            encode_image(&ImageRef::path("no/such/file.png")),
            Err(DatasetError::MissingImage(_))
        ));
    }

    #[test]
    fn media_type_is_case_insensitive_on_extension() {
        assert_eq!(media_type_for("photo.PNG"), "image/png");
        assert_eq!(media_type_for("photo.JpEg"), "image/jpeg");
        assert_eq!(media_type_for("photo.tiff"), "application/octet-stream");
    }

    #[test]
    fn encode_image_round_trips_inline_payloads() {
        let data = vec![1u8, 2, 3, 4, 5];
        let image = ImageRef::inline(data.clone(), "image/png").unwrap();
        let (b64, media) = encode_image(&image).unwrap();
        assert_eq!(media, "image/png");
        assert_eq!(BASE64.decode(b64.as_bytes()).unwrap(), data);
    }
}
