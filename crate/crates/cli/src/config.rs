//! `textarium.conf`: one `key = value` per line, `#` starts a comment.
//! `source` may repeat; every other key may appear once.

use textarium_core::analysis::{DEFAULT_SIMILARITY_THRESHOLD, DEFAULT_SUGGESTION_THRESHOLD};

pub const FILE_NAME: &str = "textarium.conf";

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub title: String,
    pub essay: String,
    pub out: String,
    /// Source texts relative to the project root; the first is primary.
    pub sources: Vec<String>,
    pub similarity_threshold: f64,
    pub suggestion_threshold: f64,
    pub port: u16,
    /// Directory of extra site files (for example the interpretation-view
    /// bundle), relative to the project root.
    pub assets: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{FILE_NAME}:{line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            title: "Untitled".to_string(),
            essay: "essay.md".to_string(),
            out: "site".to_string(),
            sources: Vec::new(),
            similarity_threshold: DEFAULT_SIMILARITY_THRESHOLD,
            suggestion_threshold: DEFAULT_SUGGESTION_THRESHOLD,
            port: 8000,
            assets: None,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| ConfigError { line: i + 1, message };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected key = value, found {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key != "source" {
                if seen.contains(&key) {
                    return Err(err(format!("{key} is set twice")));
                }
                seen.push(key);
            }
            let threshold = |lo_open: bool| -> Result<f64, ConfigError> {
                let t: f64 = value.parse().map_err(|_| err(format!("{key} must be a number")))?;
                let ok = if lo_open { t > 0.0 && t <= 1.0 } else { (0.0..=1.0).contains(&t) };
                if ok {
                    Ok(t)
                } else {
                    Err(err(format!("{key} must lie in {}0, 1]", if lo_open { "(" } else { "[" })))
                }
            };
            let non_empty = || -> Result<String, ConfigError> {
                if value.is_empty() {
                    Err(err(format!("{key} must not be empty")))
                } else {
                    Ok(value.to_string())
                }
            };
            match key {
                "title" => config.title = non_empty()?,
                "essay" => config.essay = non_empty()?,
                "out" => config.out = non_empty()?,
                "source" => config.sources.push(non_empty()?),
                "assets" => config.assets = Some(non_empty()?),
                "similarity_threshold" => config.similarity_threshold = threshold(false)?,
                "suggestion_threshold" => config.suggestion_threshold = threshold(true)?,
                "port" => config.port = value.parse().map_err(|_| err("port must be an integer 0-65535".into()))?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(config)
    }

    /// The file `init` writes.
    pub fn template() -> String {
        let d = Config::default();
        format!(
            "# Textarium project\n\
             title = {}\n\
             essay = {}\n\
             out = {}\n\
             similarity_threshold = {:.2}\n\
             suggestion_threshold = {:.2}\n\
             port = {}\n\
             # One line per imported text, added by `textarium import`:\n\
             # source = sources/example.txt\n",
            d.title, d.essay, d.out, d.similarity_threshold, d.suggestion_threshold, d.port
        )
    }
}

/// Appends a `source` line, keeping the rest of the file untouched.
pub fn with_source(text: &str, path: &str) -> String {
    let mut out = text.to_string();
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(&format!("source = {path}\n"));
    out
}
