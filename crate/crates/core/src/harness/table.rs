//! The SOS / MOS / APS / APF / Ideal comparison table.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DatasetReport;

/// `(ideal - x) / ideal * 100`; a value above the ideal gives a negative gap.
pub fn gap_percent(x: f64, ideal: f64) -> f64 {
    (ideal - x) / ideal * 100.0
}

/// `↓2.50%` style, two decimals. Values that round above the ideal print `↑`.
pub fn format_gap(percent: f64) -> String {
    let r = (percent * 100.0).round() / 100.0;
    if r < 0.0 {
        format!("↑{:.2}%", -r)
    } else {
        // adding 0.0 turns -0.0 into 0.0
        format!("↓{:.2}%", r + 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(TableFormat::Json),
            "csv" => Ok(TableFormat::Csv),
            "text" | "txt" => Ok(TableFormat::Text),
            _ => Err(format!("unknown format {s:?} (json, csv or text)")),
        }
    }
}

/// Mean J (and optionally F) per row, in whatever unit the caller uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table5Means {
    pub sos: f64,
    pub mos: f64,
    #[serde(default)]
    pub aps: Option<f64>,
    pub apf: f64,
    pub ideal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5Row {
    pub name: String,
    pub j: f64,
    pub f: Option<f64>,
    /// Gap of `j` to the ideal row; absent on the ideal row itself.
    pub gap_percent: Option<f64>,
    pub gap: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5 {
    pub rows: Vec<Table5Row>,
}

impl Table5 {
    fn build(entries: &[(&str, f64, Option<f64>)], ideal_j: f64) -> Self {
        let rows = entries
            .iter()
            .map(|&(name, j, f)| {
                let gap_pct = (name != "Ideal").then(|| gap_percent(j, ideal_j));
                Table5Row {
                    name: name.to_string(),
                    j,
                    f,
                    gap_percent: gap_pct,
                    gap: gap_pct.map(format_gap),
                }
            })
            .collect();
        Self { rows }
    }

    /// Rows from published means; APS is included only when given.
    pub fn from_means(m: &Table5Means) -> Self {
        let mut entries = vec![("SOS", m.sos, None), ("MOS", m.mos, None)];
        if let Some(aps) = m.aps {
            entries.push(("APS", aps, None));
        }
        entries.push(("APF", m.apf, None));
        entries.push(("Ideal", m.ideal, None));
        Self::build(&entries, m.ideal)
    }

    /// Dataset means of a report, scaled to percent.
    pub fn from_report(report: &DatasetReport) -> Self {
        let m = &report.dataset.means;
        let pct = |x: f64| x * 100.0;
        let entries = [
            ("SOS", pct(m.sos.j), Some(pct(m.sos.f))),
            ("MOS", pct(m.mos.j), Some(pct(m.mos.f))),
            ("APS", pct(m.aps.j), Some(pct(m.aps.f))),
            ("APF", pct(m.apf.j), Some(pct(m.apf.f))),
            ("Ideal", pct(m.ideal.j), Some(pct(m.ideal.f))),
        ];
        Self::build(&entries, pct(m.ideal.j))
    }

    pub fn row(&self, name: &str) -> Option<&Table5Row> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Json => serde_json::to_string_pretty(self).expect("plain data") + "\n",
            TableFormat::Csv => self.to_csv(),
            TableFormat::Text => self.to_text(),
        }
    }

    fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("row,j,f,gap_percent,gap\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.name,
                r.j,
                opt(r.f),
                opt(r.gap_percent),
                r.gap.clone().unwrap_or_default()
            );
        }
        out
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:>8} {:>9} {:>8}", "", "J", "gap", "F");
        for r in &self.rows {
            let f = r.f.map(|f| format!("{f:.1}")).unwrap_or_else(|| "-".into());
            let gap = r.gap.as_deref().map(|g| format!("({g})")).unwrap_or_default();
            let _ = writeln!(out, "{:<6} {:>8.1} {:>9} {:>8}", r.name, r.j, gap, f);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_strings() {
        assert_eq!(format_gap(0.0), "↓0.00%");
        assert_eq!(format_gap(-0.0), "↓0.00%");
        assert_eq!(format_gap(-0.001), "↓0.00%");
        assert_eq!(format_gap(-0.5), "↑0.50%");
        assert_eq!(format_gap(gap_percent(0.740, 0.759)), "↓2.50%");
    }

    #[test]
    fn zero_gap_row() {
        let t = Table5::from_means(&Table5Means { sos: 0.5, mos: 0.6, aps: None, apf: 0.8, ideal: 0.8 });
        assert_eq!(t.row("APF").unwrap().gap.as_deref(), Some("↓0.00%"));
        assert!(t.row("APS").is_none());
        assert!(t.row("Ideal").unwrap().gap.is_none());
    }

    #[test]
    fn csv_and_json_carry_the_same_numbers() {
        let t = Table5::from_means(&Table5Means { sos: 74.0, mos: 65.0, aps: Some(70.0), apf: 75.0, ideal: 75.9 });
        let json: Table5 = serde_json::from_str(&t.render(TableFormat::Json)).unwrap();
        let csv = t.render(TableFormat::Csv);
        for (line, row) in csv.lines().skip(1).zip(&json.rows) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[0], row.name);
            assert_eq!(cols[1].parse::<f64>().unwrap(), row.j);
            if let Some(g) = row.gap_percent {
                assert_eq!(cols[3].parse::<f64>().unwrap(), g);
            }
        }
        assert!(t.render(TableFormat::Text).contains("(↓7.77%)"));
    }
}
