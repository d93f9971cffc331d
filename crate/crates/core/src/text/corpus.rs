//! Corpus ingestion from JSON lines or a directory of text/HTML files.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TextError;

/// A document as ingested; the body is plain text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    #[serde(rename = "id")]
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(rename = "uri", default)]
    pub source_uri: String,
}

impl RawDocument {
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        body: impl Into<String>,
        source_uri: impl Into<String>,
    ) -> Self {
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            body: body.into(),
            source_uri: source_uri.into(),
        }
    }
}

/// Loads a corpus from `path`: a `.jsonl` file with one
/// `{id, title, body, uri}` object per line, or a directory whose regular
/// files each hold one document.
pub fn load_corpus(path: &Path) -> Result<Vec<RawDocument>, TextError> {
    let docs = if path.is_dir() {
        load_dir(path)?
    } else {
        load_jsonl(path)?
    };
    validate(&docs)?;
    Ok(docs)
}

pub fn load_jsonl(path: &Path) -> Result<Vec<RawDocument>, TextError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut docs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(&line).map_err(|e| TextError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Each file becomes one document with its relative path as id. HTML files
/// are stripped to text and titled from `<title>`; other files are titled
/// by their first non-empty line.
pub fn load_dir(root: &Path) -> Result<Vec<RawDocument>, TextError> {
    let mut files = Vec::new();
    collect_files(root, &mut files)?;
    files.sort();
    let mut docs = Vec::with_capacity(files.len());
    for file in files {
        let raw = fs::read_to_string(&file)?;
        let id = file
            .strip_prefix(root)
            .unwrap_or(&file)
            .to_string_lossy()
            .replace('\\', "/");
        let is_html = matches!(
            file.extension().and_then(|e| e.to_str()),
            Some("html" | "htm")
        );
        let (title, body) = if is_html {
            (html_title(&raw).unwrap_or_default(), strip_html(&raw))
        } else {
            let title = raw
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty())
                .unwrap_or_default()
                .to_string();
            (title, raw)
        };
        let uri = format!("file://{}", file.display());
        docs.push(RawDocument::new(id, title, body, uri));
    }
    Ok(docs)
}

fn collect_files(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<(), TextError> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else if path.is_file() {
            out.push(path);
        }
    }
    Ok(())
}

/// Rejects duplicate ids and blank bodies.
pub fn validate(docs: &[RawDocument]) -> Result<(), TextError> {
    let mut seen = HashSet::new();
    for d in docs {
        if !seen.insert(d.doc_id.as_str()) {
            return Err(TextError::DuplicateId(d.doc_id.clone()));
        }
        if d.body.trim().is_empty() {
            return Err(TextError::EmptyBody(d.doc_id.clone()));
        }
    }
    Ok(())
}

fn html_title(html: &str) -> Option<String> {
    let lower = html.to_ascii_lowercase();
    let start = lower.find("<title")?;
    let open_end = start + lower[start..].find('>')? + 1;
    let close = open_end + lower[open_end..].find("</title")?;
    Some(decode_entities(html[open_end..close].trim()))
}

/// Removes tags, comments, and `script`/`style` contents; concatenates the
/// remaining text with whitespace where tags were.
pub fn strip_html(html: &str) -> String {
    let lower = html.to_ascii_lowercase();
    let mut out = String::with_capacity(html.len());
    let mut i = 0;
    while i < html.len() {
        let rest = &lower[i..];
        if rest.starts_with("<!--") {
            i += rest.find("-->").map_or(rest.len(), |p| p + 3);
        } else if rest.starts_with("<script") || rest.starts_with("<style") {
            let tag = if rest.starts_with("<script") { "</script" } else { "</style" };
            i += rest.find(tag).map_or(rest.len(), |p| {
                p + rest[p..].find('>').map_or(rest.len() - p, |q| q + 1)
            });
            out.push(' ');
        } else if rest.starts_with('<') {
            i += rest.find('>').map_or(rest.len(), |p| p + 1);
            out.push(' ');
        } else {
            let next = rest.find('<').unwrap_or(rest.len());
            out.push_str(&html[i..i + next]);
            i += next;
        }
    }
    let text = decode_entities(&out);
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn decode_entities(s: &str) -> String {
    s.replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&")
}
