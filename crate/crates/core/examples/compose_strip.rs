//! Composes a context sentence with a payload under every delimiter and
//! position, then strips it back out of the (identity) translation.

use ctxdebias::context::{compose, strip, Delimiter, Position};

fn main() {
    let payload = "The nurse said he was tired.";
    let context = "The nurse is a man.";
    for position in [Position::Prepend, Position::Append] {
        for delimiter in Delimiter::ALL {
            let composed = compose(payload, context, delimiter, position).expect("valid inputs");
            let back = strip(&composed.text, delimiter, position).expect("delimiter survives");
            println!("{:<8} {:<10} {:<55} -> {}", position.name(), delimiter.name(), composed.text, back);
            assert_eq!(back, payload);
        }
    }
    match compose("A # B.", context, Delimiter::Hash, Position::Prepend) {
        Err(e) => println!("rejected: {e}"),
        Ok(c) => println!("unexpected: {}", c.text),
    }
}
