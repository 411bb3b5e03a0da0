//! Wraps a backend in the on-disk translation cache.

use ctxdebias::backend::{
    translate_batch, CachedBackend, DiskCache, LangPair, MockConfig, MockTranslator, Threshold, TranslationRequest,
};
use ctxdebias::gender::Gender;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let backend = CachedBackend::new(
        MockTranslator::new(MockConfig::gendered([("nurse", Gender::Female), ("doctor", Gender::Male)], Threshold::At(1))),
        DiskCache::new(dir.path()),
    );
    let req = TranslationRequest::new(
        vec!["The nurse slept.".into(), "The doctor slept.".into()],
        LangPair::new("en", "de"),
    );
    for round in 1..=2 {
        let out = translate_batch(&backend, &req).unwrap();
        println!("round {round}: {out:?} (hits, misses) = {:?}", backend.counters());
    }
    let stats = backend.cache().stats().unwrap();
    println!("{} entries, {} bytes", stats.entries, stats.bytes);
    backend.cache().clear().unwrap();
    println!("after clear: {} entries", backend.cache().stats().unwrap().entries);
}
