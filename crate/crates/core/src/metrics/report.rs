use std::fmt::Write as _;
use std::path::Path;

use super::{accuracy, confusion, quadratic_weighted_kappa, ConfusionMatrix};
use crate::error::{contract, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub slide_id: String,
    pub actual: usize,
    pub predicted: usize,
    pub probabilities: Vec<f64>,
}

/// Per-slide predictions for one model plus summary statistics.
///
/// Text layout:
///
/// ```text
/// # metrics report
/// # config-hash: <hash>
/// # model: <name>
/// # classes: <C>
/// slide_id<TAB>actual<TAB>predicted<TAB>p0 … p{C-1}
/// <one line per slide, probabilities with 6 decimals>
/// [summary]
/// kappa<TAB><6 decimals>
/// accuracy<TAB><6 decimals>
/// slides<TAB><count>
/// [confusion]
/// <C lines of C tab-separated counts; row = actual, column = predicted>
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub config_hash: String,
    pub model: String,
    pub classes: usize,
    pub rows: Vec<ReportRow>,
}

impl MetricsReport {
    pub fn new(config_hash: &str, model: &str, classes: usize, rows: Vec<ReportRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(contract("metrics report needs at least one slide"));
        }
        if let Some(r) = rows.iter().find(|r| r.probabilities.len() != classes) {
            return Err(contract(format!(
                "slide {} has {} probabilities, report has {classes} classes",
                r.slide_id,
                r.probabilities.len()
            )));
        }
        let report = Self {
            config_hash: config_hash.to_string(),
            model: model.to_string(),
            classes,
            rows,
        };
        report.confusion()?;
        Ok(report)
    }

    pub fn actual(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.actual).collect()
    }

    pub fn predicted(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.predicted).collect()
    }

    pub fn kappa(&self) -> Result<f64> {
        quadratic_weighted_kappa(&self.actual(), &self.predicted(), self.classes)
    }

    pub fn accuracy(&self) -> Result<f64> {
        accuracy(&self.actual(), &self.predicted())
    }

    pub fn confusion(&self) -> Result<ConfusionMatrix> {
        confusion(&self.actual(), &self.predicted(), self.classes)
    }

    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "# metrics report");
        let _ = writeln!(out, "# config-hash: {}", self.config_hash);
        let _ = writeln!(out, "# model: {}", self.model);
        let _ = writeln!(out, "# classes: {}", self.classes);
        out.push_str("slide_id\tactual\tpredicted");
        for c in 0..self.classes {
            let _ = write!(out, "\tp{c}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{}\t{}\t{}", r.slide_id, r.actual, r.predicted);
            for p in &r.probabilities {
                let _ = write!(out, "\t{p:.6}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "[summary]");
        let _ = writeln!(out, "kappa\t{:.6}", self.kappa()?);
        let _ = writeln!(out, "accuracy\t{:.6}", self.accuracy()?);
        let _ = writeln!(out, "slides\t{}", self.rows.len());
        let _ = writeln!(out, "[confusion]");
        for row in &self.confusion()?.counts {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", line.join("\t"));
        }
        Ok(out)
    }

    /// Reads the header and per-slide lines back; the summary blocks are
    /// recomputed rather than trusted.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |detail: String| Error::Format {
            what: "metrics report",
            detail,
        };
        let mut config_hash = None;
        let mut model = None;
        let mut classes = None;
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for (i, line) in text.lines().enumerate() {
            if line == "[summary]" {
                break;
            }
            if let Some(v) = line.strip_prefix("# config-hash:") {
                config_hash = Some(v.trim().to_string());
            } else if let Some(v) = line.strip_prefix("# model:") {
                model = Some(v.trim().to_string());
            } else if let Some(v) = line.strip_prefix("# classes:") {
                classes = Some(v.trim().parse::<usize>().map_err(|_| bad(format!("line {}: bad class count", i + 1)))?);
            } else if line.starts_with('#') {
                continue;
            } else if line.starts_with("slide_id\t") {
                seen_columns = true;
            } else if seen_columns && !line.is_empty() {
                let f: Vec<&str> = line.split('\t').collect();
                let c = classes.ok_or_else(|| bad("class count missing before rows".into()))?;
                if f.len() != 3 + c {
                    return Err(bad(format!("line {}: expected {} fields, got {}", i + 1, 3 + c, f.len())));
                }
                let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("line {}: bad label {s:?}", i + 1)));
                let probabilities = f[3..]
                    .iter()
                    .map(|s| s.parse::<f64>().map_err(|_| bad(format!("line {}: bad probability {s:?}", i + 1))))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(ReportRow {
                    slide_id: f[0].to_string(),
                    actual: num(f[1])?,
                    predicted: num(f[2])?,
                    probabilities,
                });
            }
        }
        Self::new(
            &config_hash.ok_or_else(|| bad("missing config-hash".into()))?,
            &model.ok_or_else(|| bad("missing model".into()))?,
            classes.ok_or_else(|| bad("missing class count".into()))?,
            rows,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
