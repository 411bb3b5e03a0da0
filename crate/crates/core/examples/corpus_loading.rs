//! Parses a WinoMT-style TSV and a parallel corpus.

use ctxdebias::corpus::{parse_parallel, parse_tsv, to_jsonl, ColumnMapping, LoadMode, StereotypeLexicon};

fn main() {
    let tsv = "male\t1\tThe developer argued with the designer because he did not like the design.\tdeveloper\n\
               female\t4\tThe nurse helped the patient because she was kind.\tnurse\n\
               neutral\t2\tSomeone ate.\tsomeone\n\
               broken line\n";
    let report = parse_tsv(tsv, &ColumnMapping::WINOMT, LoadMode::Lenient, "winomt", &StereotypeLexicon::builtin()).unwrap();
    println!("{} samples, {} neutral dropped, errors: {:?}", report.samples.len(), report.dropped_neutral, report.errors);
    for s in &report.samples {
        println!("  {} span {:?} = {:?} class {}", s.id, s.occupation_span, s.span_text(), s.stereotype_class.as_str());
    }
    print!("{}", to_jsonl(&report.samples));

    let parallel = "The nurse slept.\tDie Krankenschwester schlief.\nIt rained.\tEs regnete.\n";
    let pairs = parse_parallel(parallel, Some(&["nurse".to_string()])).unwrap();
    println!("{} parallel pair(s) mention an occupation", pairs.len());
}
