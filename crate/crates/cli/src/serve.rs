//! Static file server for a built site. No dynamic routes and no state:
//! every response is a file from the output directory or an error page.

use std::fs;
use std::path::{Component, Path, PathBuf};

use percent_encoding::percent_decode_str;
use tiny_http::{Header, Method, Response, Server};

pub fn bind(port: u16) -> Result<Server, String> {
    Server::http(("127.0.0.1", port)).map_err(|e| format!("cannot listen on 127.0.0.1:{port}: {e}"))
}

/// Serves requests until the process is stopped.
pub fn run(server: Server, root: &Path) {
    for request in server.incoming_requests() {
        let response = respond(root, request.method(), request.url());
        let _ = request.respond(response);
    }
}

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header")
}

fn respond(root: &Path, method: &Method, url: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    let plain = |status: u16, body: &str| {
        Response::from_string(body)
            .with_status_code(status)
            .with_header(header("Content-Type", "text/plain; charset=utf-8"))
            .with_header(header("Cache-Control", "no-store"))
    };
    if !matches!(method, Method::Get | Method::Head) {
        return plain(405, "method not allowed\n").with_header(header("Allow", "GET, HEAD"));
    }
    let Some(path) = resolve(root, url) else {
        return plain(404, "not found\n");
    };
    match fs::read(&path) {
        Ok(bytes) => {
            let mime = mime_guess::from_path(&path).first_or_octet_stream();
            let content_type = match mime.type_() {
                mime_guess::mime::TEXT => format!("{mime}; charset=utf-8"),
                _ if mime.subtype() == "javascript" || mime.subtype() == "json" => format!("{mime}; charset=utf-8"),
                _ => mime.to_string(),
            };
            Response::from_data(bytes)
                .with_header(header("Content-Type", &content_type))
                .with_header(header("Cache-Control", "no-store"))
        }
        Err(_) => plain(404, "not found\n"),
    }
}

/// Maps a request target to a file below `root`; `None` for anything that
/// would escape it. Directories resolve to their `index.html`.
fn resolve(root: &Path, url: &str) -> Option<PathBuf> {
    let path = url.split(['?', '#']).next().unwrap_or("");
    let decoded = percent_decode_str(path).decode_utf8().ok()?;
    let mut out = root.to_path_buf();
    for component in Path::new(decoded.trim_start_matches('/')).components() {
        match component {
            Component::Normal(part) => out.push(part),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if out.is_dir() {
        out.push("index.html");
    }
    Some(out)
}
