//! `textarium`: scaffold a project, import texts, encode and decode
//! interpretation states, build the static site and serve it.
//!
//! Exit codes: 0 success, 1 usage error, 2 `init` refused, 3 `import`
//! failed, 4 `state` codec failure, 5 `build` diagnostics or failure,
//! 6 `serve` failure.

mod config;
mod project;
mod serve;

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use textarium_core::argument::{interpretation_fragment, SiteOptions};
use textarium_core::state::Fragment;
use textarium_core::{canonicalize, compile_site, encode, parse_argument, validate_embeds, InterpretationState};

use config::Config;
use project::Project;

#[derive(Parser)]
#[command(name = "textarium", version, about = "Close reading, shareable interpretations and scrollytelling essays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a project in DIR, which must be empty or absent
    Init { dir: PathBuf },
    /// Copy a UTF-8 text into sources/ and register it
    Import { file: PathBuf },
    /// Convert between state JSON and URL fragments
    State {
        #[command(subcommand)]
        op: StateOp,
    },
    /// Compile the essay into the output directory
    Build,
    /// Serve the output directory over HTTP on 127.0.0.1
    Serve {
        /// Defaults to the port in textarium.conf; 0 picks a free port
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Subcommand)]
enum StateOp {
    /// Print the fragment for a state JSON file (`-` reads stdin)
    Encode { file: PathBuf },
    /// Print the state JSON for a fragment, resolved against the project's texts
    Decode { fragment: String },
}

struct Failure {
    code: u8,
    message: String,
}

const INIT: u8 = 2;
const IMPORT: u8 = 3;
const CODEC: u8 = 4;
const BUILD: u8 = 5;
const SERVE: u8 = 6;

fn fail(code: u8) -> impl Fn(String) -> Failure {
    move |message| Failure { code, message }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Init { dir } => init(&dir),
        Command::Import { file } => import(&file),
        Command::State { op: StateOp::Encode { file } } => state_encode(&file),
        Command::State { op: StateOp::Decode { fragment } } => state_decode(&fragment),
        Command::Build => build(),
        Command::Serve { port } => serve(port),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn init(dir: &Path) -> Result<(), Failure> {
    let err = fail(INIT);
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| err(format!("{}: {e}", dir.display())))?;
        if entries.next().is_some() {
            return Err(err(format!("{} is not empty; refusing to initialize", dir.display())));
        }
    }
    let io = |e: io::Error| err(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir.join("sources")).map_err(io)?;
    fs::write(dir.join(config::FILE_NAME), Config::template()).map_err(io)?;
    fs::write(dir.join("essay.md"), "").map_err(io)?;
    println!("initialized {}", dir.display());
    Ok(())
}

fn import(file: &Path) -> Result<(), Failure> {
    let err = fail(IMPORT);
    let project = Project::open(&project::root_dir()).map_err(&err)?;
    let doc = project::load_document(file).map_err(&err)?;
    let Some(name) = file.file_name() else {
        return Err(err(format!("{} is not a file", file.display())));
    };
    let rel = format!("sources/{}", name.to_string_lossy());
    let dest = project.root.join(&rel);
    let bytes = fs::read(file).map_err(|e| err(format!("{}: {e}", file.display())))?;
    match fs::read(&dest) {
        Ok(existing) if existing == bytes => {}
        Ok(_) => return Err(err(format!("{rel} already exists with different content; rename the file to import it"))),
        Err(_) => {
            let write = |e: io::Error| err(format!("{}: {e}", dest.display()));
            fs::create_dir_all(dest.parent().expect("dest has a parent")).map_err(write)?;
            fs::write(&dest, &bytes).map_err(write)?;
        }
    }
    if !project.config.sources.contains(&rel) {
        let path = project.config_path();
        let text = fs::read_to_string(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        fs::write(&path, config::with_source(&text, &rel)).map_err(|e| err(format!("{}: {e}", path.display())))?;
    }
    let txt = project.out_dir().join("txt");
    let written = fs::create_dir_all(&txt).and_then(|()| fs::write(txt.join("doc.json"), doc.to_json_pretty()));
    written.map_err(|e| err(format!("{}: {e}", txt.display())))?;

    println!("imported {rel}");
    println!("fingerprint: {}", doc.fingerprint());
    println!("tokens: {}", doc.token_count());
    Ok(())
}

fn state_encode(file: &Path) -> Result<(), Failure> {
    let err = fail(CODEC);
    let mut json = String::new();
    let read = if file == Path::new("-") {
        io::stdin().read_to_string(&mut json).map(|_| ())
    } else {
        fs::read_to_string(file).map(|text| json = text)
    };
    read.map_err(|e| err(format!("{}: {e}", file.display())))?;
    let state: InterpretationState =
        serde_json::from_str(&json).map_err(|e| err(format!("invalid state JSON: {e}")))?;
    let canonical = canonicalize(&state).map_err(|e| err(format!("invalid state: {e}")))?;
    let fragment = encode(&canonical).map_err(|e| err(format!("invalid state: {e}")))?;
    println!("{fragment}");
    Ok(())
}

/// Accepts a bare fragment with or without `#`, or a whole URL.
fn fragment_part(input: &str) -> String {
    match input.find('#') {
        Some(i) => input[i..].to_string(),
        None if input.is_empty() => String::new(),
        None => format!("#{input}"),
    }
}

fn state_decode(input: &str) -> Result<(), Failure> {
    let err = fail(CODEC);
    let project = Project::open(&project::root_dir()).map_err(&err)?;
    let fragment = Fragment::parse(&fragment_part(input)).map_err(|e| err(e.to_string()))?;
    for key in &fragment.ignored_keys {
        eprintln!("warning: ignoring unknown key {key:?}");
    }
    let doc = match fragment.doc {
        Some(fp) => project
            .document(fp)
            .map_err(&err)?
            .ok_or_else(|| err(format!("no imported document has fingerprint {fp}")))?,
        None => project
            .documents()
            .map_err(&err)?
            .into_iter()
            .next()
            .ok_or_else(|| err("the project has no imported documents".to_string()))?,
    };
    let state = fragment.resolve(&doc).map_err(|e| err(e.to_string()))?;
    println!("{}", state.to_json_pretty());
    Ok(())
}

fn build() -> Result<(), Failure> {
    let err = fail(BUILD);
    let project = Project::open(&project::root_dir()).map_err(&err)?;
    let essay_path = project.essay_path();
    let markdown = fs::read_to_string(&essay_path).map_err(|e| err(format!("{}: {e}", essay_path.display())))?;
    let documents = project.documents().map_err(&err)?;
    let essay = parse_argument(&markdown);

    let known: BTreeSet<_> = documents.iter().map(|d| d.fingerprint()).collect();
    let diagnostics = validate_embeds(&essay, &known);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{d}");
        }
        return Err(err(format!("{} broken embed(s); nothing was written", diagnostics.len())));
    }

    // Embeds that name a known text but no longer fit it (edited source,
    // out-of-range token) still build; the reader sees a warning badge.
    let mut warnings = 0;
    for block in essay.embeds() {
        let url = block.embed_url().expect("embed");
        let fragment =
            Fragment::parse(&format!("#{}", interpretation_fragment(url).expect("embed url"))).expect("embeds parse");
        let doc = documents.iter().find(|d| Some(d.fingerprint()) == fragment.doc).expect("validated");
        if let Err(e) = fragment.resolve(doc) {
            eprintln!("warning: block {}: {e} ({url})", block.ordinal);
            warnings += 1;
        }
    }

    let mut options = SiteOptions {
        title: project.config.title.clone(),
        similarity_threshold: project.config.similarity_threshold,
        suggestion_threshold: project.config.suggestion_threshold,
        ..SiteOptions::default()
    };
    if let Some(assets) = &project.config.assets {
        let dir = project.root.join(assets);
        options.load_assets(&dir).map_err(|e| err(format!("{}: {e}", dir.display())))?;
    }
    let out = project.out_dir();
    let manifest = compile_site(&essay, &documents, &options, &out).map_err(|e| err(e.to_string()))?;
    println!(
        "built {}: {} blocks, {} embeds, {} warnings",
        project.config.out,
        manifest.blocks.len(),
        manifest.embed_count(),
        warnings
    );
    println!("build fingerprint: {}", manifest.build_fingerprint);
    Ok(())
}

fn serve(port: Option<u16>) -> Result<(), Failure> {
    let err = fail(SERVE);
    let project = Project::open(&project::root_dir()).map_err(&err)?;
    let out = project.out_dir();
    if !out.join("index.html").is_file() {
        return Err(err(format!("{} has no index.html; run `textarium build` first", out.display())));
    }
    let server = serve::bind(port.unwrap_or(project.config.port)).map_err(&err)?;
    let addr = server.server_addr().to_ip().expect("bound to an IP address");
    println!("serving {} at http://{addr}/", out.display());
    let _ = io::stdout().flush();
    serve::run(server, &out);
    Ok(())
}
