//! Talks to a translation server over the JSON wire protocol. A tiny local
//! server stands in for a real model server.

use std::time::Duration;

use ctxdebias::backend::{translate_batch, HttpTranslator, LangPair, TranslationRequest, WireRequest, WireResponse};

fn main() {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}", server.server_addr().to_ip().unwrap());
    let handle = std::thread::spawn(move || {
        let mut req = server.recv().unwrap();
        let mut body = String::new();
        req.as_reader().read_to_string(&mut body).unwrap();
        println!("server got: {body}");
        let wire: WireRequest = serde_json::from_str(&body).unwrap();
        let reply = WireResponse {
            translations: wire.texts.iter().map(|t| t.to_uppercase()).collect(),
        };
        let resp = tiny_http::Response::from_string(serde_json::to_string(&reply).unwrap());
        req.respond(resp).unwrap();
    });
    let client = HttpTranslator::new(&url, Duration::from_secs(5));
    let req = TranslationRequest::new(vec!["The nurse slept.".into(), "Über".into()], LangPair::new("en", "de"));
    println!("client got: {:?}", translate_batch(&client, &req).unwrap());
    handle.join().unwrap();
}
