//! CSV search reports and text dumps of product classifications.

use std::fmt::Write as _;
use std::io::{Read, Write};

use ltlinfer_core::objective::FormulaAnalysis;
use ltlinfer_core::product::{compute_amecs, PRE_INITIAL};
use ltlinfer_core::search::SearchReport;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: [&str; 4] = ["formula", "objective", "complexity", "runs_pareto_efficient"];

/// One line of a search report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub formula: String,
    pub objective: f64,
    pub complexity: usize,
    pub runs_pareto_efficient: usize,
}

pub fn report_rows(report: &SearchReport) -> Vec<ReportRow> {
    report
        .entries
        .iter()
        .map(|e| ReportRow {
            formula: e.formula.to_string(),
            objective: e.objective,
            complexity: e.complexity,
            runs_pareto_efficient: e.runs,
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// One line per product state (`id mdp-state dra-state class`), then one line
/// per accepting end component.
pub fn classification_dump(a: &FormulaAnalysis<'_>) -> String {
    let p = &a.product;
    let mdp = p.mdp();
    let mut out = String::new();
    writeln!(out, "# product states: {}", p.state_count()).unwrap();
    for v in 0..p.state_count() {
        let (s, q) = p.state(v);
        let name = s.map_or("<pre>", |s| mdp.state_name(s));
        let class = if a.classification.is_good(v) {
            "good"
        } else if a.classification.is_bad(v) {
            "bad"
        } else {
            "neutral"
        };
        let marker = if v == PRE_INITIAL { " initial" } else { "" };
        writeln!(out, "{v} {name} q{q} {class} viol_rand={}{marker}", a.viol_rand[v]).unwrap();
    }
    for (k, ec) in compute_amecs(p).iter().enumerate() {
        let ids: Vec<String> = ec.states.iter().map(|v| v.to_string()).collect();
        writeln!(out, "# accepting component {k}: {}", ids.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            ReportRow { formula: "G (good)".into(), objective: -0.004975124378109541, complexity: 2, runs_pareto_efficient: 20 },
            ReportRow { formula: "G ((good) | (X (good)))".into(), objective: 1e-300, complexity: 5, runs_pareto_efficient: 1 },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("formula,objective,complexity,runs_pareto_efficient\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }
}
