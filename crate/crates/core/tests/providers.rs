use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use symdirec::providers::*;

struct Reply {
    status: u16,
    body: String,
    delay: Duration,
}

fn reply(status: u16, body: &str) -> Reply {
    Reply {
        status,
        body: body.to_string(),
        delay: Duration::ZERO,
    }
}

/// Serves the scripted replies in order, one per connection, and records
/// each request's head and body.
fn serve(script: Vec<Reply>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for r in script {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut len = 0usize;
            let mut chunked = false;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if line.to_ascii_lowercase().starts_with("transfer-encoding: chunked") {
                    chunked = true;
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            while chunked {
                let mut size = String::new();
                reader.read_line(&mut size).unwrap();
                let n = usize::from_str_radix(size.trim(), 16).unwrap();
                let mut chunk = vec![0; n + 2];
                reader.read_exact(&mut chunk).unwrap();
                body.extend_from_slice(&chunk[..n]);
                chunked = n > 0;
            }
            log.lock().unwrap().push(format!("{head}{}", String::from_utf8_lossy(&body)));
            thread::sleep(r.delay);
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                r.status,
                r.body.len(),
                r.body
            );
        }
    });
    (url, seen)
}

fn remote(url: &str) -> ProviderConfig {
    ProviderConfig {
        kind: ProviderKind::Remote,
        endpoint: url.to_string(),
        model: "test-model".into(),
        backoff_ms: 1,
        dim: 8,
        ..ProviderConfig::default()
    }
}

#[test]
fn transient_failures_are_retried() {
    let (url, seen) = serve(vec![
        reply(503, "{}"),
        reply(502, "{}"),
        reply(200, r#"{"text":"module m(); endmodule"}"#),
    ]);
    let client = RemoteClient::new(remote(&url)).unwrap();
    let out = client.generate(&GenRequest::new("make a module")).unwrap();
    assert_eq!(out.text, "module m(); endmodule");
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    let body: serde_json::Value =
        serde_json::from_str(seen[2].split("\r\n\r\n").nth(1).unwrap()).unwrap();
    assert_eq!(body["prompt"], "make a module");
    assert_eq!(body["model"], "test-model");
}

#[test]
fn retries_are_bounded() {
    let (url, _) = serve(vec![reply(500, "{}"), reply(500, "{}")]);
    let client = RemoteClient::new(ProviderConfig {
        max_retries: 1,
        ..remote(&url)
    })
    .unwrap();
    let req = GenRequest::new("x");
    match client.generate(&req) {
        Err(ProviderError::Transport { kind, fingerprint, .. }) => {
            assert_eq!(kind, "remote");
            assert_eq!(fingerprint, req.fingerprint());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn auth_failure_is_not_retried() {
    let (url, seen) = serve(vec![reply(401, "{}"), reply(200, r#"{"text":"no"}"#)]);
    std::env::set_var("SYMDIREC_TEST_TOKEN", "secret-token");
    let client = RemoteClient::new(ProviderConfig {
        token_env: Some("SYMDIREC_TEST_TOKEN".into()),
        ..remote(&url)
    })
    .unwrap();
    assert!(matches!(
        client.generate(&GenRequest::new("x")),
        Err(ProviderError::Auth { status: 401, .. })
    ));
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    assert!(seen[0].to_ascii_lowercase().contains("authorization: bearer secret-token"));
}

#[test]
fn short_embedding_is_a_dimension_mismatch() {
    let (url, _) = serve(vec![reply(200, r#"{"embedding":[1,2,3,4,5,6,7]}"#)]);
    let client = RemoteClient::new(remote(&url)).unwrap();
    assert!(matches!(
        client.embed("adder"),
        Err(ProviderError::DimensionMismatch { expected: 8, found: 7 })
    ));
}

#[test]
fn embedding_pointer_is_configurable() {
    let (url, _) = serve(vec![reply(200, r#"{"data":[{"embedding":[0,0,0,0,0,0,0,1]}]}"#)]);
    let client = RemoteClient::new(ProviderConfig {
        embedding_pointer: "/data/0/embedding".into(),
        ..remote(&url)
    })
    .unwrap();
    assert_eq!(client.embed("adder").unwrap().values[7], 1.0);
}

#[test]
fn slow_server_times_out() {
    let (url, _) = serve(vec![Reply {
        delay: Duration::from_millis(1500),
        ..reply(200, r#"{"text":"late"}"#)
    }]);
    let client = RemoteClient::new(ProviderConfig {
        timeout_secs: 0.3,
        max_retries: 0,
        ..remote(&url)
    })
    .unwrap();
    assert!(matches!(
        client.generate(&GenRequest::new("x")),
        Err(ProviderError::Timeout { .. })
    ));
}

#[test]
fn mock_generation_is_a_pure_table_lookup() {
    let req = GenRequest::new("P");
    let g = MockGenerator::from_records([FixtureRecord::for_request(&req, "module m...")]);
    let a = g.generate(&req).unwrap();
    let b = g.generate(&req).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.text, "module m...");
}
