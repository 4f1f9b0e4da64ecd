#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use lattice_probe::provider::FillRequest;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-probe"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Minimal HTTP server answering `POST /fill` with `handler`'s
/// `(status, body)`. Returns the base URL and a request counter.
pub fn serve<F>(handler: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(&FillRequest) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        length = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            counter.fetch_add(1, Ordering::SeqCst);
            let (status, reply) = if request_line.starts_with("POST /fill ") {
                match serde_json::from_slice::<FillRequest>(&body) {
                    Ok(req) => handler(&req),
                    Err(e) => (400, e.to_string()),
                }
            } else {
                (404, String::new())
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    (url, hits)
}

pub const JOINT: [[f64; 3]; 3] = [[0.20, 0.05, 0.05], [0.10, 0.25, 0.05], [0.05, 0.05, 0.20]];
pub const OBJECTS: [&str; 3] = ["eagle", "penguin", "shark"];
pub const ATTRIBUTES: [&str; 3] = ["fly", "swim", "bite"];

/// Exact conditionals of [`JOINT`] for the pattern
/// `"[object] is an animal that can [attribute] ."`.
pub fn joint_handler(req: &FillRequest) -> (u16, String) {
    let (obj_at, attr_at) = (0, 6);
    let weights: Vec<f64> = if req.mask_index == obj_at {
        let given = ATTRIBUTES.iter().position(|a| *a == req.tokens[attr_at]);
        (0..3).map(|g| given.map_or(JOINT[g].iter().sum(), |m| JOINT[g][m])).collect()
    } else {
        let given = OBJECTS.iter().position(|o| *o == req.tokens[obj_at]);
        (0..3)
            .map(|m| given.map_or((0..3).map(|g| JOINT[g][m]).sum(), |g| JOINT[g][m]))
            .collect()
    };
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let tokens = if req.mask_index == obj_at { OBJECTS } else { ATTRIBUTES };
    let mass: f64 = probs.iter().sum();
    (200, serde_json::json!({"tokens": tokens, "probs": probs, "mass": mass}).to_string())
}
