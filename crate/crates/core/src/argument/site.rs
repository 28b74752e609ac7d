use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{validate_embeds, ArgumentDocument, BlockContent, BlockKind, Diagnostic, DiagnosticClass};
use crate::text::{fnv1a, Document, Fingerprint};

const INTERPRETATION_SHELL: &str = include_str!("../../assets/txt_index.html");

/// Inputs to a build besides the essay and the source texts.
#[derive(Clone, Debug)]
pub struct SiteOptions {
    /// Used when the essay has no level-one heading.
    pub title: String,
    pub similarity_threshold: f64,
    pub suggestion_threshold: f64,
    /// Extra files copied into the site, keyed by site-relative path
    /// (for example the interpretation-view bundle under `txt/`).
    pub assets: BTreeMap<String, Vec<u8>>,
}

impl Default for SiteOptions {
    fn default() -> Self {
        SiteOptions {
            title: "Untitled".to_string(),
            similarity_threshold: crate::analysis::DEFAULT_SIMILARITY_THRESHOLD,
            suggestion_threshold: crate::analysis::DEFAULT_SUGGESTION_THRESHOLD,
            assets: BTreeMap::new(),
        }
    }
}

impl SiteOptions {
    /// Loads every file below `dir` as an asset, with `/`-separated keys.
    pub fn load_assets(&mut self, dir: &Path) -> io::Result<()> {
        fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) -> io::Result<()> {
            let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
            entries.sort_by_key(|e| e.file_name());
            for entry in entries {
                let path = entry.path();
                if entry.file_type()?.is_dir() {
                    walk(root, &path, out)?;
                } else {
                    let rel = path.strip_prefix(root).expect("below root");
                    let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                    out.insert(key, fs::read(&path)?);
                }
            }
            Ok(())
        }
        walk(dir, dir, &mut self.assets)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestBlock {
    pub ordinal: usize,
    pub kind: BlockKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embed_url: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ArgumentManifest {
    pub title: String,
    pub blocks: Vec<ManifestBlock>,
    pub build_fingerprint: Fingerprint,
}

impl ArgumentManifest {
    pub fn embed_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.kind == BlockKind::Embed).count()
    }

    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("manifest is always serializable");
        out.push('\n');
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("broken embeds:\n{}", list(.0))]
    BrokenEmbeds(Vec<Diagnostic>),
    #[error("asset {0:?} would overwrite a generated file")]
    AssetConflict(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn list(diagnostics: &[Diagnostic]) -> String {
    diagnostics.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

pub(crate) fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn render_index(doc: &ArgumentDocument, title: &str) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    out.push_str("<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n");
    writeln!(out, "<title>{}</title>", escape_html(title)).unwrap();
    out.push_str(
        "<style>\n\
         main.argument { max-width: 46rem; margin: 0 auto; padding: 2rem 1rem; line-height: 1.6; }\n\
         section.embed { min-height: 60vh; margin: 2rem 0; }\n\
         .embed-frame { width: 100%; height: 60vh; border: 1px solid #ddd; }\n\
         </style>\n",
    );
    out.push_str("</head>\n<body>\n<main class=\"argument\">\n");
    for block in &doc.blocks {
        match &block.content {
            BlockContent::Prose { html } => {
                writeln!(out, "<section class=\"prose\" data-ordinal=\"{}\">", block.ordinal).unwrap();
                out.push_str(html);
                out.push_str("</section>\n");
            }
            BlockContent::Embed { url, label } => {
                let url = escape_html(url);
                let label = if label.trim().is_empty() { "Open interpretation" } else { label };
                writeln!(out, "<section class=\"embed\" data-ordinal=\"{}\">", block.ordinal).unwrap();
                writeln!(
                    out,
                    "<div class=\"embed-frame\" data-embed-url=\"{url}\"><a href=\"{url}\">{}</a></div>",
                    escape_html(label)
                )
                .unwrap();
                out.push_str("</section>\n");
            }
        }
    }
    out.push_str("</main>\n<script src=\"argument.js\" defer></script>\n</body>\n</html>\n");
    out
}

fn render_shell(primary: Option<&Document>, options: &SiteOptions) -> String {
    let title = primary.map_or("", |d| d.title());
    let fp = primary.map(|d| d.fingerprint().to_string()).unwrap_or_default();
    INTERPRETATION_SHELL
        .replace("{{title}}", &escape_html(title))
        .replace("{{fingerprint}}", &fp)
        .replace("{{similarity}}", &format!("{:.2}", options.similarity_threshold))
        .replace("{{suggestion}}", &format!("{:.2}", options.suggestion_threshold))
}

/// Every generated file, keyed by site-relative path, except the manifest.
fn render_files(
    doc: &ArgumentDocument,
    sources: &[Document],
    options: &SiteOptions,
    title: &str,
) -> Result<BTreeMap<String, Vec<u8>>, CompileError> {
    let mut files = BTreeMap::new();
    files.insert("index.html".to_string(), render_index(doc, title).into_bytes());
    files.insert("txt/index.html".to_string(), render_shell(sources.first(), options).into_bytes());
    if let Some(primary) = sources.first() {
        files.insert("txt/text.txt".to_string(), primary.raw().as_bytes().to_vec());
        files.insert("txt/doc.json".to_string(), primary.to_json_pretty().into_bytes());
    }
    for source in sources {
        files.insert(format!("txt/docs/{}.json", source.fingerprint()), source.to_json_pretty().into_bytes());
    }
    for (path, bytes) in &options.assets {
        if files.contains_key(path) || path == "manifest.json" {
            return Err(CompileError::AssetConflict(path.clone()));
        }
        files.insert(path.clone(), bytes.clone());
    }
    Ok(files)
}

fn build_fingerprint(files: &BTreeMap<String, Vec<u8>>) -> Fingerprint {
    let mut buf = Vec::new();
    for (path, bytes) in files {
        buf.extend_from_slice(path.as_bytes());
        buf.push(0);
        buf.extend_from_slice(bytes.len().to_string().as_bytes());
        buf.push(0);
        buf.extend_from_slice(bytes);
    }
    // Raw bytes: Fingerprint::of would normalize line endings.
    Fingerprint::from_u64(fnv1a(&buf))
}

/// Writes the static site for `doc` into `out_dir` and returns its
/// manifest.
///
/// The build owns `index.html`, `manifest.json` and the whole `txt/`
/// directory of `out_dir`; `txt/` is recreated on every build. Output is a
/// pure function of the inputs, so repeated builds are byte-identical.
pub fn compile_site(
    doc: &ArgumentDocument,
    sources: &[Document],
    options: &SiteOptions,
    out_dir: &Path,
) -> Result<ArgumentManifest, CompileError> {
    let known: BTreeSet<Fingerprint> = sources.iter().map(|d| d.fingerprint()).collect();
    let broken: Vec<Diagnostic> =
        validate_embeds(doc, &known).into_iter().filter(|d| d.class == DiagnosticClass::UnknownDocument).collect();
    if !broken.is_empty() {
        return Err(CompileError::BrokenEmbeds(broken));
    }

    let title = doc.title.clone().unwrap_or_else(|| options.title.clone());
    let files = render_files(doc, sources, options, &title)?;
    let manifest = ArgumentManifest {
        title,
        blocks: doc
            .blocks
            .iter()
            .map(|b| ManifestBlock { ordinal: b.ordinal, kind: b.kind(), embed_url: b.embed_url().map(str::to_string) })
            .collect(),
        build_fingerprint: build_fingerprint(&files),
    };

    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CompileError::Io { path, source }
    };
    let txt = out_dir.join("txt");
    if txt.exists() {
        fs::remove_dir_all(&txt).map_err(io_err(&txt))?;
    }
    for (rel, bytes) in files.iter().chain([(&"manifest.json".to_string(), &manifest.to_json_pretty().into_bytes())]) {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    Ok(manifest)
}
