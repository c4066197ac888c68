//! WebSocket server: one thread and one fresh session per connection.
//!
//! Plain HTTP requests on the same port are answered from `ui_dir` when one
//! is configured, so a browser client can be served alongside the socket.

use std::io::{self, Cursor, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::thread;

use foldray::{Config, Scene};
use tungstenite::{Error as WsError, Message};

use crate::protocol::{error_message, Connection};

const MAX_REQUEST_HEAD: usize = 16 * 1024;

#[derive(Clone)]
pub struct ServeOptions {
    pub scene: Arc<Scene>,
    pub config: Config,
    pub ui_dir: Option<PathBuf>,
}

/// Accepts connections until the listener fails.
pub fn serve(listener: TcpListener, opts: ServeOptions) -> io::Result<()> {
    log::info!("listening on {}", listener.local_addr()?);
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let opts = opts.clone();
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            if let Err(e) = handle_stream(stream, &opts) {
                log::debug!("connection {peer:?} ended: {e}");
            }
        });
    }
    Ok(())
}

/// A stream that replays bytes already read before continuing from the socket.
struct Replay {
    head: Cursor<Vec<u8>>,
    stream: TcpStream,
}

impl Read for Replay {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.head.read(buf)?;
        if n > 0 {
            return Ok(n);
        }
        self.stream.read(buf)
    }
}

impl Write for Replay {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.stream.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.stream.flush()
    }
}

fn read_request_head(stream: &mut TcpStream) -> io::Result<Vec<u8>> {
    let mut head = Vec::new();
    let mut buf = [0u8; 1024];
    while !head.windows(4).any(|w| w == b"\r\n\r\n") {
        if head.len() > MAX_REQUEST_HEAD {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "request head too large",
            ));
        }
        let n = stream.read(&mut buf)?;
        if n == 0 {
            return Err(io::ErrorKind::UnexpectedEof.into());
        }
        head.extend_from_slice(&buf[..n]);
    }
    Ok(head)
}

fn is_upgrade(head: &str) -> bool {
    head.lines().any(|l| {
        l.split_once(':').is_some_and(|(name, value)| {
            name.trim().eq_ignore_ascii_case("upgrade")
                && value.trim().eq_ignore_ascii_case("websocket")
        })
    })
}

fn handle_stream(mut stream: TcpStream, opts: &ServeOptions) -> anyhow::Result<()> {
    let head = read_request_head(&mut stream)?;
    let text = String::from_utf8_lossy(&head).into_owned();
    if !is_upgrade(&text) {
        return serve_static(stream, &text, opts.ui_dir.as_deref());
    }
    let ws_stream = Replay {
        head: Cursor::new(head),
        stream,
    };
    let mut ws = tungstenite::accept(ws_stream).map_err(|e| anyhow::anyhow!("handshake: {e}"))?;
    let mut conn = Connection::new(opts.scene.clone(), opts.config)?;
    ws.send(Message::text(conn.greeting()))?;
    loop {
        let reply = match ws.read() {
            Ok(Message::Text(t)) => conn.handle(&t),
            Ok(Message::Binary(_)) => Err(error_message("binary messages are not supported")),
            Ok(Message::Close(_)) => continue,
            Ok(_) => continue,
            Err(WsError::ConnectionClosed | WsError::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(e.into()),
        };
        match reply {
            Ok(messages) => {
                for m in messages {
                    ws.write(Message::text(m))?;
                }
                ws.flush()?;
            }
            Err(err) => {
                ws.send(Message::text(err))?;
                ws.close(None)?;
                // Drain until the client acknowledges the close.
                loop {
                    match ws.read() {
                        Ok(_) => {}
                        Err(WsError::ConnectionClosed | WsError::AlreadyClosed) => return Ok(()),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

/// Maps a request target to a file below `root`, refusing anything that
/// would leave it.
fn resolve(root: &Path, target: &str) -> Option<PathBuf> {
    let path = target.split(['?', '#']).next()?.trim_start_matches('/');
    let rel = Path::new(if path.is_empty() { "index.html" } else { path });
    if !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return None;
    }
    Some(root.join(rel))
}

fn serve_static(mut stream: TcpStream, head: &str, ui_dir: Option<&Path>) -> anyhow::Result<()> {
    let mut parts = head.lines().next().unwrap_or("").split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"));
    let file = ui_dir
        .filter(|_| method == "GET")
        .and_then(|root| resolve(root, target))
        .and_then(|p| std::fs::read(&p).ok().map(|body| (p, body)));
    let (status, ctype, body) = match file {
        Some((path, body)) => ("200 OK", content_type(&path), body),
        None => ("404 Not Found", "text/plain", b"not found\n".to_vec()),
    };
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    stream.write_all(&body)?;
    stream.flush()?;
    Ok(())
}
