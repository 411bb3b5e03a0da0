//! HTTP client against a scripted server replaying the wire fixtures.

use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;

use ctxdebias::backend::{
    translate_batch, BackendError, HttpTranslator, LangPair, TranslationRequest, WireRequest, WireResponse,
};

#[derive(Deserialize)]
struct Fixtures {
    exchanges: Vec<Exchange>,
    invalid_requests: Vec<String>,
}

#[derive(Deserialize, Clone)]
struct Exchange {
    name: String,
    request: Value,
    status: u16,
    body: String,
    expect: Expect,
}

#[derive(Deserialize, Clone)]
#[serde(rename_all = "lowercase")]
enum Expect {
    Ok(Vec<String>),
    Error(String),
}

fn fixtures() -> Fixtures {
    serde_json::from_str(include_str!("fixtures/wire_protocol.json")).unwrap()
}

struct Seen {
    method: String,
    url: String,
    content_type: Option<String>,
    body: Value,
}

/// Serves requests by looking up the fixture whose request body matches;
/// unknown bodies get a 400.
fn scripted_server(exchanges: Vec<Exchange>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}", server.server_addr().to_ip().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let mut raw = String::new();
            req.as_reader().read_to_string(&mut raw).unwrap();
            let body: Value = serde_json::from_str(&raw).unwrap_or(Value::Null);
            let content_type = req
                .headers()
                .iter()
                .find(|h| h.field.equiv("Content-Type"))
                .map(|h| h.value.to_string());
            log.lock().unwrap().push(Seen {
                method: req.method().to_string(),
                url: req.url().to_string(),
                content_type,
                body: body.clone(),
            });
            let (status, reply) = exchanges
                .iter()
                .find(|e| e.request == body)
                .map(|e| (e.status, e.body.clone()))
                .unwrap_or((400, "{\"error\": \"unexpected request\"}".into()));
            let resp = tiny_http::Response::from_string(reply)
                .with_status_code(status)
                .with_header("Content-Type: application/json; charset=utf-8".parse::<tiny_http::Header>().unwrap());
            let _ = req.respond(resp);
        }
    });
    (url, seen)
}

fn request_of(v: &Value) -> TranslationRequest {
    let wire: WireRequest = serde_json::from_value(v.clone()).unwrap();
    TranslationRequest::new(wire.texts, LangPair::new(wire.src_lang, wire.tgt_lang))
}

fn kind(e: &BackendError) -> &'static str {
    match e {
        BackendError::Network(_) => "network",
        BackendError::Protocol(_) => "protocol",
        BackendError::Timeout => "timeout",
        BackendError::UnsupportedPair(_) => "unsupported_pair",
        BackendError::UnknownOccupation(_) => "unknown_occupation",
        BackendError::Cache(_) => "cache",
    }
}

#[test]
fn client_matches_every_fixture_exchange() {
    let fx = fixtures();
    let (url, seen) = scripted_server(fx.exchanges.clone());
    let client = HttpTranslator::new(&url, Duration::from_secs(10));
    for ex in &fx.exchanges {
        let got = translate_batch(&client, &request_of(&ex.request));
        match (&ex.expect, got) {
            (Expect::Ok(want), Ok(out)) => assert_eq!(&out, want, "{}", ex.name),
            (Expect::Error(want), Err(e)) => assert_eq!(kind(&e), want, "{}: {e}", ex.name),
            (want, got) => panic!("{}: expected {:?}, got {got:?}", ex.name, matches!(want, Expect::Ok(_))),
        }
    }
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), fx.exchanges.len());
    for (s, ex) in seen.iter().zip(&fx.exchanges) {
        assert_eq!(s.method, "POST", "{}", ex.name);
        assert_eq!(s.url, "/translate", "{}", ex.name);
        assert!(s.content_type.as_deref().unwrap_or("").starts_with("application/json"), "{}", ex.name);
        assert_eq!(s.body, ex.request, "{}: request body must match the schema exactly", ex.name);
    }
}

#[test]
fn invalid_request_bodies_are_rejected_by_the_schema() {
    for body in fixtures().invalid_requests {
        assert!(serde_json::from_str::<WireRequest>(&body).is_err(), "accepted {body}");
    }
}

#[test]
fn schema_types_round_trip_fixture_payloads() {
    for ex in fixtures().exchanges {
        let req: WireRequest = serde_json::from_value(ex.request.clone()).unwrap();
        assert_eq!(serde_json::to_value(&req).unwrap(), ex.request);
        if let Expect::Ok(want) = ex.expect {
            let resp: WireResponse = serde_json::from_str(&ex.body).unwrap();
            assert_eq!(resp.translations, want);
        }
    }
}

#[test]
fn large_batches_are_split_and_reassembled_in_order() {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}", server.server_addr().to_ip().unwrap());
    let sizes = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&sizes);
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let mut raw = String::new();
            req.as_reader().read_to_string(&mut raw).unwrap();
            let wire: WireRequest = serde_json::from_str(&raw).unwrap();
            log.lock().unwrap().push(wire.texts.len());
            let reply = WireResponse {
                translations: wire.texts.iter().map(|t| format!("<{t}>")).collect(),
            };
            let _ = req.respond(tiny_http::Response::from_string(serde_json::to_string(&reply).unwrap()));
        }
    });
    let client = HttpTranslator::new(&url, Duration::from_secs(10)).with_max_batch(3);
    let texts: Vec<String> = (0..8).map(|i| format!("t{i}")).collect();
    let out = translate_batch(&client, &TranslationRequest::new(texts.clone(), LangPair::new("en", "de"))).unwrap();
    let want: Vec<String> = texts.iter().map(|t| format!("<{t}>")).collect();
    assert_eq!(out, want);
    assert_eq!(*sizes.lock().unwrap(), [3, 3, 2]);
}

#[test]
fn slow_server_times_out() {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}", server.server_addr().to_ip().unwrap());
    thread::spawn(move || {
        for req in server.incoming_requests() {
            thread::sleep(Duration::from_millis(800));
            let _ = req.respond(tiny_http::Response::from_string("{\"translations\": [\"late\"]}"));
        }
    });
    let client = HttpTranslator::new(&url, Duration::from_millis(150));
    let err = translate_batch(&client, &TranslationRequest::single("x", LangPair::new("en", "de"))).unwrap_err();
    assert!(matches!(err, BackendError::Timeout), "{err:?}");
}
