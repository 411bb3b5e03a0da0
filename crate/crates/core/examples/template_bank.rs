//! Loads the built-in banks, prints template features and renders one
//! template for both genders.

use ctxdebias::gender::Gender;
use ctxdebias::template::TemplateBank;

fn main() {
    let bank = TemplateBank::builtin_relevant();
    println!("relevant bank: {} templates, sha256 {}", bank.len(), bank.provenance().sha256);
    for t in bank.iter().take(5) {
        let f = t.features;
        println!("  {:<8} l={:<2} s={} d={:?}  {}", t.id, f.length, f.signals, f.distance, t.pattern);
    }
    let t = bank.iter().next().expect("non-empty bank");
    for g in [Gender::Male, Gender::Female] {
        println!("{g}: {}", t.render("surgeon", g, bank.placeholders()).unwrap());
    }
    let irrelevant = TemplateBank::builtin_irrelevant();
    println!("irrelevant bank: {} templates, e.g. {}", irrelevant.len(), irrelevant.iter().next().unwrap().pattern);
}
