mod common;

use std::fs;
use std::net::TcpListener;

use common::{project, root, run};

#[test]
fn init_scaffolds_and_then_refuses() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("new");
    let r = run(None, &["init", p.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut names: Vec<String> =
        fs::read_dir(&p).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["essay.md", "sources", "textarium.conf"]);
    assert!(p.join("sources").is_dir());
    assert_eq!(fs::read_to_string(p.join("essay.md")).unwrap(), "");
    let conf = fs::read_to_string(p.join("textarium.conf")).unwrap();

    let again = run(None, &["init", p.to_str().unwrap()]);
    assert_eq!(again.code, 2);
    assert!(again.stderr.contains("not empty"));
    assert_eq!(fs::read_to_string(p.join("textarium.conf")).unwrap(), conf);
}

#[test]
fn init_into_non_empty_dir_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("notes.txt"), "mine").unwrap();
    assert_eq!(run(None, &["init", dir.path().to_str().unwrap()]).code, 2);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn init_into_existing_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(None, &["init", dir.path().to_str().unwrap()]).code, 0);
    assert!(dir.path().join("textarium.conf").is_file());
}

#[test]
fn import_prints_fingerprint_and_count_deterministically() {
    let dir = project("essay.md");
    let excerpt = common::fixtures().join("excerpt.txt");
    let first = run(Some(&root(&dir)), &["import", excerpt.to_str().unwrap()]);
    let second = run(Some(&root(&dir)), &["import", excerpt.to_str().unwrap()]);
    assert_eq!(first.code, 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(first.stdout.contains("fingerprint: 43c98f2b181d40d3\n"), "{}", first.stdout);
    assert!(first.stdout.contains("tokens: 252\n"), "{}", first.stdout);
    // Registered once, copied into sources/, doc.json written.
    let conf = fs::read_to_string(root(&dir).join("textarium.conf")).unwrap();
    assert_eq!(conf.matches("source = sources/excerpt.txt").count(), 1);
    assert_eq!(fs::read(root(&dir).join("sources/excerpt.txt")).unwrap(), fs::read(&excerpt).unwrap());
    let doc: textarium_core::Document =
        serde_json::from_str(&fs::read_to_string(root(&dir).join("site/txt/doc.json")).unwrap()).unwrap();
    assert_eq!(doc.token_count(), 252);
}

#[test]
fn import_empty_and_invalid_files() {
    let dir = project("essay.md");
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let r = run(Some(&root(&dir)), &["import", empty.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("fingerprint: cbf29ce484222325\ntokens: 0\n"), "{}", r.stdout);

    let binary = dir.path().join("blob.bin");
    fs::write(&binary, [0x89, b'P', b'N', b'G', 0xff, 0x00]).unwrap();
    let r = run(Some(&root(&dir)), &["import", binary.to_str().unwrap()]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("not UTF-8"), "{}", r.stderr);
    assert!(!root(&dir).join("sources/blob.bin").exists());

    let missing = dir.path().join("missing.txt");
    assert_eq!(run(Some(&root(&dir)), &["import", missing.to_str().unwrap()]).code, 3);
}

#[test]
fn import_refuses_to_replace_a_different_source() {
    let dir = project("essay.md");
    let other = dir.path().join("excerpt.txt");
    fs::write(&other, "Another text entirely.").unwrap();
    let r = run(Some(&root(&dir)), &["import", other.to_str().unwrap()]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("different content"));
}

#[test]
fn import_outside_a_project_fails() {
    let dir = tempfile::tempdir().unwrap();
    let excerpt = common::fixtures().join("excerpt.txt");
    assert_eq!(run(Some(dir.path()), &["import", excerpt.to_str().unwrap()]).code, 3);
}

const STATE: &str = r#"{
  "docFingerprint": "43c98f2b181d40d3",
  "annotations": [
    { "id": 1, "start": 46, "end": 46, "surface": "designing" },
    { "id": 0, "start": 9, "end": 9, "surface": "design" },
    { "id": 2, "start": 249, "end": 251, "surface": "tongues and dialects" }
  ],
  "groups": [ { "name": "design & re-design", "memberIds": [1, 0] } ],
  "paneOrder": [2, 0, 1]
}"#;

#[test]
fn state_encode_decode_round_trip() {
    let dir = project("essay.md");
    let file = dir.path().join("state.json");
    fs::write(&file, STATE).unwrap();
    let enc = run(Some(&root(&dir)), &["state", "encode", file.to_str().unwrap()]);
    assert_eq!(enc.code, 0, "{}", enc.stderr);
    let fragment = enc.stdout.trim();
    assert_eq!(
        fragment,
        "#d=43c98f2b181d40d3&a=design@9,designing@46,tongues%20and%20dialects@249-251\
         &g=design%20%26%20re%2Ddesign:0+1&o=2+0+1"
    );
    let dec = run(Some(&root(&dir)), &["state", "decode", fragment]);
    assert_eq!(dec.code, 0, "{}", dec.stderr);
    assert!(dec.stderr.is_empty());

    // Decoding gives the canonical JSON, which encodes to the same fragment.
    fs::write(&file, &dec.stdout).unwrap();
    let again = run(Some(&root(&dir)), &["state", "encode", file.to_str().unwrap()]);
    assert_eq!(again.stdout.trim(), fragment);
    let dec2 = run(Some(&root(&dir)), &["state", "decode", fragment]);
    assert_eq!(dec2.stdout, dec.stdout);
    // Fragments may be passed without '#' or as whole URLs.
    let bare = run(Some(&root(&dir)), &["state", "decode", &fragment[1..]]);
    let url = run(Some(&root(&dir)), &["state", "decode", &format!("txt/index.html{fragment}")]);
    assert_eq!(bare.stdout, dec.stdout);
    assert_eq!(url.stdout, dec.stdout);
}

#[test]
fn state_encode_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = common::command(None)
        .args(["state", "encode", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(br#"{"docFingerprint":"cbf29ce484222325"}"#).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "#d=cbf29ce484222325\n");
}

#[test]
fn unknown_fragment_keys_warn_but_decode() {
    let dir = project("essay.md");
    let r = run(Some(&root(&dir)), &["state", "decode", "#d=43c98f2b181d40d3&a=design@9&x=1"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("warning: ignoring unknown key \"x\""), "{}", r.stderr);
    let state: textarium_core::InterpretationState = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(state.annotations.len(), 1);
}

#[test]
fn codec_failures_exit_4() {
    let dir = project("essay.md");
    let file = dir.path().join("overlap.json");
    fs::write(
        &file,
        r#"{"docFingerprint":"43c98f2b181d40d3","annotations":[
            {"id":0,"start":3,"end":5,"surface":"a"},{"id":1,"start":5,"end":6,"surface":"b"}]}"#,
    )
    .unwrap();
    let r = run(Some(&root(&dir)), &["state", "encode", file.to_str().unwrap()]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("overlapping spans 3..5 and 5..6"), "{}", r.stderr);

    fs::write(&file, "not json").unwrap();
    assert_eq!(run(Some(&root(&dir)), &["state", "encode", file.to_str().unwrap()]).code, 4);

    for bad in [
        "#a=@@",
        "#d=43c98f2b181d40d3&a=design@09",
        "#d=43c98f2b181d40d3&a=careful@9",
        "#d=0000000000000000",
        "#d=43c98f2b181d40d3&a=design@9&a=design@9",
        "#d=43c98f2b181d40d3&f=9999",
    ] {
        let r = run(Some(&root(&dir)), &["state", "decode", bad]);
        assert_eq!(r.code, 4, "{bad}: {}", r.stdout);
        assert!(r.stdout.is_empty());
    }
}

#[test]
fn build_prints_summary_and_is_deterministic() {
    let dir = project("essay.md");
    let r = run(Some(&root(&dir)), &["build"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("3 embeds, 0 warnings"), "{}", r.stdout);
    let snapshot = |rel: &str| fs::read(root(&dir).join("site").join(rel)).unwrap();
    let files = ["index.html", "manifest.json", "txt/doc.json", "txt/index.html", "txt/text.txt"];
    let first: Vec<Vec<u8>> = files.iter().map(|f| snapshot(f)).collect();
    let again = run(Some(&root(&dir)), &["build"]);
    assert_eq!(again.stdout, r.stdout);
    let second: Vec<Vec<u8>> = files.iter().map(|f| snapshot(f)).collect();
    assert_eq!(first, second);
    let shell = String::from_utf8(snapshot("txt/index.html")).unwrap();
    assert!(shell.contains("data-similarity-threshold=\"0.80\""));
}

#[test]
fn build_reports_broken_embeds_with_ordinals() {
    let dir = project("broken.md");
    let r = run(Some(&root(&dir)), &["build"]);
    assert_eq!(r.code, 5);
    let lines: Vec<&str> = r.stderr.lines().filter(|l| l.starts_with("block ")).collect();
    assert_eq!(lines.len(), 2, "{}", r.stderr);
    assert!(lines[0].starts_with("block 2: syntax:"), "{}", lines[0]);
    assert!(lines[1].starts_with("block 3: unknown-document:"), "{}", lines[1]);
    assert!(!root(&dir).join("site/index.html").exists());
}

#[test]
fn stale_embeds_build_with_a_warning() {
    let dir = project("essay.md");
    fs::write(root(&dir).join("essay.md"), "[x](txt/#d=43c98f2b181d40d3&a=careful@9)\n").unwrap();
    let r = run(Some(&root(&dir)), &["build"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("1 embeds, 1 warnings"), "{}", r.stdout);
    assert!(r.stderr.contains("warning: block 0: stale state"), "{}", r.stderr);
}

#[test]
fn assets_are_copied_and_may_not_clobber() {
    let dir = project("essay.md");
    let ui = root(&dir).join("ui/txt");
    fs::create_dir_all(&ui).unwrap();
    fs::write(ui.join("app.js"), "// view\n").unwrap();
    let conf = root(&dir).join("textarium.conf");
    let text = fs::read_to_string(&conf).unwrap();
    fs::write(&conf, format!("{text}assets = ui\n")).unwrap();
    assert_eq!(run(Some(&root(&dir)), &["build"]).code, 0);
    assert_eq!(fs::read_to_string(root(&dir).join("site/txt/app.js")).unwrap(), "// view\n");

    fs::write(ui.join("doc.json"), "{}").unwrap();
    let r = run(Some(&root(&dir)), &["build"]);
    assert_eq!(r.code, 5);
    assert!(r.stderr.contains("txt/doc.json"), "{}", r.stderr);
}

#[test]
fn working_directory_is_the_default_root() {
    let dir = project("essay.md");
    let out = common::command(None).arg("build").current_dir(root(&dir)).output().unwrap();
    assert!(out.status.success());
    assert!(root(&dir).join("site/manifest.json").is_file());
}

#[test]
fn serve_is_static_and_uncached() {
    let dir = project("essay.md");
    assert_eq!(run(Some(&root(&dir)), &["build"]).code, 0);
    let server = common::serve(&root(&dir));

    let manifest = common::get(server.addr, "/manifest.json");
    assert_eq!(manifest.status, 200);
    assert_eq!(manifest.body, fs::read(root(&dir).join("site/manifest.json")).unwrap());
    assert_eq!(manifest.header("Content-Type"), Some("application/json; charset=utf-8"));
    assert_eq!(manifest.header("Cache-Control"), Some("no-store"));

    let index = common::get(server.addr, "/");
    assert_eq!(index.header("Content-Type"), Some("text/html; charset=utf-8"));
    assert_eq!(index.body, fs::read(root(&dir).join("site/index.html")).unwrap());
    let view = common::get(server.addr, "/txt/");
    assert_eq!(view.body, fs::read(root(&dir).join("site/txt/index.html")).unwrap());
    assert_eq!(common::get(server.addr, "/txt/doc.json").status, 200);
    assert_eq!(common::get(server.addr, "/nope.html").status, 404);
    assert_eq!(common::get(server.addr, "/../textarium.conf").status, 404);
}

#[test]
fn serve_failures_exit_6() {
    let dir = project("essay.md");
    // Nothing built yet.
    assert_eq!(run(Some(&root(&dir)), &["serve", "--port", "0"]).code, 6);
    assert_eq!(run(Some(&root(&dir)), &["build"]).code, 0);
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let r = run(Some(&root(&dir)), &["serve", "--port", &port]);
    assert_eq!(r.code, 6);
    assert!(r.stderr.contains("cannot listen"), "{}", r.stderr);
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(run(None, &["frobnicate"]).code, 1);
    assert_eq!(run(None, &["serve", "--port", "http"]).code, 1);
    assert_eq!(run(None, &["--help"]).code, 0);
}
