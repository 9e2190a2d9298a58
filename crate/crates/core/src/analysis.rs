//! Sweep statistics: Pearson correlations, the hyperparameter/reward
//! correlation matrix and the bundled PPO sweep results.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{read_to_string, Error, Result};

/// Column order of sweep files and of the correlation matrix.
pub const COLUMNS: [&str; 9] = [
    "batch_size",
    "gamma",
    "learning_rate",
    "log_std_init",
    "n_epochs",
    "n_steps",
    "ortho_init",
    "weight_decay",
    "mean_reward",
];

/// Reported correlation between `log_std_init` and the sweep reward.
pub const PUBLISHED_LOG_STD_PCC: f64 = 0.081;

const TABLE_A1: &str = include_str!("../data/table_a1.csv");

/// One PPO sweep run and its evaluation reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub log_std_init: f64,
    pub n_epochs: usize,
    pub n_steps: usize,
    #[serde(deserialize_with = "flexible_bool")]
    pub ortho_init: bool,
    pub weight_decay: f64,
    pub mean_reward: f64,
}

fn flexible_bool<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(serde::de::Error::custom(format!("expected true/false or 0/1, got {other:?}"))),
    }
}

impl SweepRecord {
    /// Numeric row in [`COLUMNS`] order, booleans as 0/1. With `log`, the
    /// learning rate and weight decay are replaced by their base-10 logs.
    pub fn values(&self, log: bool) -> [f64; 9] {
        let t = |v: f64| if log { v.log10() } else { v };
        [
            self.batch_size as f64,
            self.gamma,
            t(self.learning_rate),
            self.log_std_init,
            self.n_epochs as f64,
            self.n_steps as f64,
            if self.ortho_init { 1.0 } else { 0.0 },
            t(self.weight_decay),
            self.mean_reward,
        ]
    }
}

/// Parses sweep CSV text with a header naming the [`COLUMNS`] (any order).
pub fn parse_sweep(text: &str, context: &str) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<SweepRecord>().enumerate() {
        let rec = row.map_err(|e| Error::parse(format!("{context} row {}", i + 1), e))?;
        if !rec.mean_reward.is_finite() {
            return Err(Error::parse(format!("{context} row {}", i + 1), "mean_reward is not finite"));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_sweep(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    parse_sweep(&read_to_string(path)?, &path.display().to_string())
}

/// The 46 bundled sweep runs, in file order (descending reward).
pub fn table_a1() -> Vec<SweepRecord> {
    parse_sweep(TABLE_A1, "table_a1.csv").expect("bundled fixture parses")
}

/// Sweep CSV text for `records`.
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.batch_size, r.gamma, r.learning_rate, r.log_std_init, r.n_epochs, r.n_steps, r.ortho_init, r.weight_decay, r.mean_reward
        );
    }
    out
}

/// Stable sort by ascending reward.
pub fn sort_by_reward(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| a.mean_reward.total_cmp(&b.mean_reward));
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput("need at least two samples".into()));
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise correlations; `None` where a column has
/// zero variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn correlation_matrix(records: &[SweepRecord], log: bool) -> Result<CorrelationMatrix> {
    if records.len() < 2 {
        return Err(Error::DegenerateInput("need at least two records".into()));
    }
    let cols: Vec<Vec<f64>> = (0..COLUMNS.len())
        .map(|c| records.iter().map(|r| r.values(log)[c]).collect())
        .collect();
    let k = cols.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = if i == j {
                pearson(&cols[i], &cols[i]).ok().map(|_| 1.0)
            } else {
                pearson(&cols[i], &cols[j]).ok()
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    let columns = COLUMNS
        .iter()
        .map(|c| match (*c, log) {
            ("learning_rate", true) => "log10_learning_rate".to_string(),
            ("weight_decay", true) => "log10_weight_decay".to_string(),
            _ => c.to_string(),
        })
        .collect();
    Ok(CorrelationMatrix { columns, values })
}

impl CorrelationMatrix {
    /// Correlation of every column with the last one (the reward).
    pub fn reward_column(&self) -> Vec<(String, Option<f64>)> {
        let last = self.columns.len() - 1;
        self.columns.iter().cloned().zip(self.values.iter().map(|row| row[last])).collect()
    }

    /// CSV with a leading label column; undefined entries are written `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (name, row) in self.columns.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                match v {
                    Some(x) => {
                        let _ = write!(out, ",{x}");
                    }
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Heatmap with a diverging blue-white-red scale over [-1, 1]; undefined
    /// cells are grey.
    pub fn to_svg(&self) -> String {
        let k = self.columns.len();
        let (cell, margin) = (56.0, 160.0);
        let size = margin + cell * k as f64 + 10.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="11">"#
        );
        for (i, name) in self.columns.iter().enumerate() {
            let y = margin + cell * (i as f64 + 0.5);
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{name}</text>"#, margin - 6.0);
            let x = margin + cell * (i as f64 + 0.5);
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" text-anchor="start" transform="rotate(-60 {x} {})">{name}</text>"#,
                margin - 6.0,
                margin - 6.0
            );
        }
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let (x, y) = (margin + cell * j as f64, margin + cell * i as f64);
                let (fill, label) = match v {
                    Some(r) => (diverging(*r), format!("{r:.2}")),
                    None => ("rgb(200,200,200)".to_string(), "NA".to_string()),
                };
                let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>"#);
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{label}</text>"#,
                    x + cell / 2.0,
                    y + cell / 2.0
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn diverging(r: f64) -> String {
    let t = r.clamp(-1.0, 1.0);
    let fade = |c: f64, a: f64| (255.0 + (c - 255.0) * a).round() as u8;
    if t >= 0.0 {
        format!("rgb({},{},{})", fade(178.0, t), fade(24.0, t), fade(43.0, t))
    } else {
        format!("rgb({},{},{})", fade(33.0, -t), fade(102.0, -t), fade(172.0, -t))
    }
}
