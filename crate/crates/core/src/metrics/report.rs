use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BootstrapPoint, DeltaRow, SensitivityBins, Stat};

/// Everything a run measured. Absent metrics are `null` in JSON and empty
/// cells in CSV, never 0.
///
/// Spreads: `a.std` is across occupations, `a_all.std` across templates,
/// `css.std` across samples. F1 values are percentages like the
/// accuracies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: String,
    pub lang_pair: String,
    pub delimiter: String,
    pub position: String,
    pub seed: u64,
    pub samples: usize,
    pub templates: usize,
    pub a: Option<Stat>,
    pub a_c: Option<f64>,
    pub a_all: Option<Stat>,
    pub css: Option<Stat>,
    pub c_u: Option<f64>,
    pub c_l: Option<f64>,
    pub biased: Option<usize>,
    pub bins: Option<SensitivityBins>,
    pub f1_male: Option<f64>,
    pub f1_female: Option<f64>,
    /// Keyed by delimiter name, plus `original` for the context-free run.
    pub bleu: BTreeMap<String, f64>,
    pub split_failure_rate: BTreeMap<String, f64>,
    pub deltas: BTreeMap<String, DeltaRow>,
    /// Pearson r between a template feature and per-template accuracy.
    pub correlations: BTreeMap<String, Option<f64>>,
    pub bootstrap: Vec<BootstrapPoint>,
    pub status_counts: BTreeMap<String, usize>,
    pub errors: usize,
    pub error_rate: f64,
    pub notes: Vec<String>,
}

/// Column order of [`MetricsReport::to_csv`].
pub const CSV_COLUMNS: &[&str] = &[
    "strategy",
    "lang_pair",
    "delimiter",
    "position",
    "seed",
    "samples",
    "templates",
    "a",
    "a_std_occupations",
    "a_c",
    "a_all",
    "a_all_std_templates",
    "css",
    "css_std_samples",
    "c_u",
    "c_l",
    "bins_no_change",
    "bins_less_sensitive",
    "bins_more_sensitive",
    "f1_male",
    "f1_female",
    "bleu_original",
    "bleu_hash",
    "bleu_period",
    "bleu_colon",
    "bleu_semicolon",
    "errors",
    "error_rate",
];

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Header plus one row, columns as in [`CSV_COLUMNS`].
    pub fn to_csv(&self) -> String {
        let bins = self.bins;
        let row: Vec<String> = vec![
            csv_field(&self.strategy),
            csv_field(&self.lang_pair),
            csv_field(&self.delimiter),
            csv_field(&self.position),
            self.seed.to_string(),
            self.samples.to_string(),
            self.templates.to_string(),
            num(self.a.map(|s| s.mean)),
            num(self.a.and_then(|s| s.std)),
            num(self.a_c),
            num(self.a_all.map(|s| s.mean)),
            num(self.a_all.and_then(|s| s.std)),
            num(self.css.map(|s| s.mean)),
            num(self.css.and_then(|s| s.std)),
            num(self.c_u),
            num(self.c_l),
            bins.map(|b| b.no_change.to_string()).unwrap_or_default(),
            bins.map(|b| b.less_sensitive.to_string()).unwrap_or_default(),
            bins.map(|b| b.more_sensitive.to_string()).unwrap_or_default(),
            num(self.f1_male),
            num(self.f1_female),
            num(self.bleu.get("original").copied()),
            num(self.bleu.get("hash").copied()),
            num(self.bleu.get("period").copied()),
            num(self.bleu.get("colon").copied()),
            num(self.bleu.get("semicolon").copied()),
            self.errors.to_string(),
            format!("{:.6}", self.error_rate),
        ];
        debug_assert_eq!(row.len(), CSV_COLUMNS.len());
        format!("{}\n{}\n", CSV_COLUMNS.join(","), row.join(","))
    }

    /// Plain-text summary; the first table has the columns
    /// A, A_C, A_all, CSS, C_U, C_L with spreads in parentheses.
    pub fn to_text(&self) -> String {
        let pct = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        let stat = |s: Option<Stat>| match s {
            Some(Stat { mean, std: Some(sd) }) => format!("{mean:.2} ({sd:.2})"),
            Some(Stat { mean, std: None }) => format!("{mean:.2}"),
            None => "-".into(),
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "strategy={} pair={} delimiter={} position={} samples={} templates={} seed={}",
            self.strategy, self.lang_pair, self.delimiter, self.position, self.samples, self.templates, self.seed
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<16} {:<10} {:<16} {:<12} {:<8} {:<8}", "A (%)", "A_C (%)", "A_all (%)", "CSS", "C_U", "C_L");
        let _ = writeln!(
            out,
            "{:<16} {:<10} {:<16} {:<12} {:<8} {:<8}",
            stat(self.a),
            pct(self.a_c),
            stat(self.a_all),
            stat(self.css),
            pct(self.c_u),
            pct(self.c_l)
        );
        if let Some(b) = self.bins {
            let _ = writeln!(
                out,
                "\nsensitivity bins: no_change={} less_sensitive={} more_sensitive={}",
                b.no_change, b.less_sensitive, b.more_sensitive
            );
        }
        if self.f1_male.is_some() || self.f1_female.is_some() {
            let _ = writeln!(out, "\nF1 male={} female={}", pct(self.f1_male), pct(self.f1_female));
        }
        if !self.bleu.is_empty() {
            let _ = writeln!(out, "\nBLEU");
            for (k, v) in &self.bleu {
                let fail = self.split_failure_rate.get(k).map(|r| format!("  split failures {:.2}%", 100.0 * r));
                let _ = writeln!(out, "  {k:<10} {v:>7.2}{}", fail.unwrap_or_default());
            }
        }
        if !self.deltas.is_empty() {
            let _ = writeln!(out, "\n{:<16} {:>6} {:>8} {:>8} {:>8}", "stereotype", "n", "A", "A_all", "delta");
            for (k, d) in &self.deltas {
                let _ = writeln!(out, "{k:<16} {:>6} {:>8.2} {:>8.2} {:>8.2}", d.samples, d.a, d.a_all, d.delta);
            }
        }
        if !self.correlations.is_empty() {
            let _ = writeln!(out, "\nPearson r with per-template accuracy");
            for (k, r) in &self.correlations {
                let v = r.map(|x| format!("{x:.3}")).unwrap_or_else(|| "undefined".into());
                let _ = writeln!(out, "  {k:<10} {v}");
            }
        }
        if !self.bootstrap.is_empty() {
            let _ = writeln!(out, "\n{:>6} {:>8} {:>8}", "size", "A_C", "std");
            for p in &self.bootstrap {
                let _ = writeln!(out, "{:>6} {:>8.2} {:>8.2}", p.size, p.mean, p.std);
            }
        }
        if !self.status_counts.is_empty() {
            let counts: Vec<String> = self.status_counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "\noutcomes: {}", counts.join(" "));
        }
        let _ = writeln!(out, "errors: {} ({:.2}%)", self.errors, 100.0 * self.error_rate);
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_one_value_per_column_and_blank_absent() {
        let r = MetricsReport {
            strategy: "greedy".into(),
            a: Some(Stat { mean: 50.0, std: Some(0.0) }),
            ..Default::default()
        };
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), CSV_COLUMNS.len());
        assert_eq!(cells[7], "50.000000");
        assert_eq!(cells[9], "");
    }

    #[test]
    fn json_round_trips() {
        let r = MetricsReport {
            c_u: Some(12.5),
            ..Default::default()
        };
        let back: MetricsReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"c_l\": null"));
        assert!(r.to_text().contains("A_C (%)"));
    }
}
