//! Slide manifests.
//!
//! One slide per line, fields separated by a single TAB:
//!
//! ```text
//! <path>\t<label>[\t<split>]
//! ```
//!
//! `split` is `train` or `test`. Blank lines are skipped; lines starting
//! with `#` are comments and are preserved in [`Manifest::comments`].
//! Relative paths are resolved against the manifest's directory by callers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Format {
                what: "manifest",
                detail: format!("unknown split tag {other:?}"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: usize,
    pub split: Option<Split>,
}

impl ManifestEntry {
    /// File stem of the slide, used as its id throughout the pipeline.
    pub fn slide_id(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub comments: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::default();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                m.comments.push(c.trim_start().to_string());
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |detail: String| Error::Format {
                what: "manifest",
                detail: format!("line {}: {detail}", lineno + 1),
            };
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!("expected 2 or 3 tab-separated fields, got {}", fields.len())));
            }
            let label = fields[1]
                .trim()
                .parse()
                .map_err(|_| bad(format!("label {:?} is not a non-negative integer", fields[1])))?;
            let split = match fields.get(2).map(|s| s.trim()) {
                None | Some("") => None,
                Some(s) => Some(s.parse()?),
            };
            m.entries.push(ManifestEntry {
                path: PathBuf::from(fields[0]),
                label,
                split,
            });
        }
        Ok(m)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        for e in &self.entries {
            let _ = write!(out, "{}\t{}", e.path.display(), e.label);
            if let Some(s) = e.split {
                let _ = write!(out, "\t{}", s.as_str());
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn split(&self, which: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == Some(which))
    }
}
