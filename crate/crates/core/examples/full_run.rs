//! End-to-end run from a TOML config, as the command-line tool does it.

use ctxdebias::config::RunConfig;
use ctxdebias::runner::cmd_run;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("data.tsv"),
        "male\t0\tThe nurse said he was tired.\tnurse\n\
         female\t1\tThe nurse said she was tired.\tnurse\n\
         female\t2\tThe engineer said she was late.\tengineer\n\
         male\t3\tThe engineer said he was late.\tengineer\n",
    )
    .unwrap();
    let toml = r#"
strategy = "greedy"
tgt_lang = "fr"
cache = false

[backend]
kind = "mock"
signal_threshold = 1

[dataset]
path = "data.tsv"
"#;
    let cfg = RunConfig::from_toml(toml, dir.path()).unwrap();
    let summary = cmd_run(&cfg).unwrap();
    print!("{}", summary.report.to_text());
    for f in &summary.files {
        println!("wrote {}", f.file_name().unwrap().to_string_lossy());
    }
}
