use std::fmt::Write;

use atlas_core::io::ChartJson;
use atlas_core::young::Chart;
use serde::Serialize;

use crate::commands::CheckReport;

#[derive(Debug, Serialize)]
pub struct IndexedChart {
    pub index: usize,
    #[serde(flatten)]
    pub chart: ChartJson,
}

fn join(v: &[usize], sep: &str) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
}

fn directions(u: &[usize]) -> String {
    u.iter().map(|i| format!("e{i}")).collect::<Vec<_>>().join(",")
}

/// `[B, A]` template with a bar between the blocks and spaced glyphs.
fn template_lines(chart: &Chart) -> Vec<String> {
    let m = chart.m();
    chart
        .template()
        .iter()
        .map(|row| {
            let glyphs: Vec<String> = row.chars().map(String::from).collect();
            format!("{} | {}", glyphs[..m].join(" "), glyphs[m..].join(" "))
        })
        .collect()
}

pub fn charts_text(charts: &[Chart]) -> String {
    let mut s = String::new();
    for (i, chart) in charts.iter().enumerate() {
        let json = ChartJson::from(chart);
        writeln!(s, "chart {}  d = ({})", i + 1, join(&json.d, ",")).unwrap();
        writeln!(
            s,
            "J = {{{}}}  Jtilde = {{{}}}  u = ({})",
            join(&json.j, ","),
            join(&json.jtilde, ","),
            directions(&json.u_idx)
        )
        .unwrap();
        writeln!(s, "Y:").unwrap();
        for row in &json.y {
            writeln!(s, "  {}", join(row, " ")).unwrap();
        }
        writeln!(s, "[B,A]:").unwrap();
        for line in template_lines(chart) {
            writeln!(s, "  {line}").unwrap();
        }
        writeln!(s).unwrap();
    }
    writeln!(s, "{} charts", charts.len()).unwrap();
    s
}

pub fn charts_csv(charts: &[Chart]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "d", "Y", "J", "Jtilde", "u"])?;
    for (i, chart) in charts.iter().enumerate() {
        let json = ChartJson::from(chart);
        let y = json.y.iter().map(|r| join(r, " ")).collect::<Vec<_>>().join("/");
        w.write_record([
            (i + 1).to_string(),
            join(&json.d, " "),
            y,
            join(&json.j, " "),
            join(&json.jtilde, " "),
            join(&json.u_idx, " "),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn report_text(report: &CheckReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        match c.value {
            Some(v) => writeln!(s, "{:<24} {verdict}  {v:.3e}  {}", c.name, c.detail).unwrap(),
            None => writeln!(s, "{:<24} {verdict}  {}", c.name, c.detail).unwrap(),
        }
    }
    writeln!(s, "overall {}", if report.passed { "PASS" } else { "FAIL" }).unwrap();
    s
}
