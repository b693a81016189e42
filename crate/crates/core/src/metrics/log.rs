use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Learning rate at the epoch's last step.
    pub lr: f64,
}

/// Line-oriented training log: `# config-hash: <hash>`, a `# epoch\tloss\tlr`
/// header, then one tab-separated line per epoch with values printed in
/// Rust's shortest round-trip form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsLog {
    pub config_hash: String,
    pub records: Vec<EpochRecord>,
}

impl MetricsLog {
    pub fn render(&self) -> String {
        let mut out = format!("# config-hash: {}\n# epoch\tloss\tlr\n", self.config_hash);
        for r in &self.records {
            let _ = writeln!(out, "{}\t{:?}\t{:?}", r.epoch, r.mean_loss, r.lr);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, detail: &str| Error::Format {
            what: "metrics log",
            detail: format!("line {}: {detail}", line + 1),
        };
        let mut log = MetricsLog::default();
        for (i, line) in text.lines().enumerate() {
            if let Some(hash) = line.strip_prefix("# config-hash:") {
                log.config_hash = hash.trim().to_string();
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad(i, "expected epoch, loss and lr"));
            }
            log.records.push(EpochRecord {
                epoch: fields[0].parse().map_err(|_| bad(i, "bad epoch"))?,
                mean_loss: fields[1].parse().map_err(|_| bad(i, "bad loss"))?,
                lr: fields[2].parse().map_err(|_| bad(i, "bad lr"))?,
            });
        }
        Ok(log)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
