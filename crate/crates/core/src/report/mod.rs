//! Report emission: JSON (versioned schema), Markdown, and static HTML.

mod html;
mod json;
mod markdown;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use html::to_html;
pub use json::{from_json, to_json, validate};
pub use markdown::{score as render_score, to_markdown};

use crate::engine::AnalysisReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Markdown,
    Html,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Markdown => "md",
            Format::Html => "html",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            "html" => Ok(Format::Html),
            other => Err(format!("unknown format `{other}` (expected json, markdown or html)")),
        }
    }
}

pub const REPORT_STEM: &str = "pseudotest-report";

pub fn render(report: &AnalysisReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Markdown => Ok(to_markdown(report)),
        Format::Html => Ok(to_html(report)),
    }
}

/// Write `report` in `format` under `out_dir`, returning the written path.
pub fn emit_report(report: &AnalysisReport, format: Format, out_dir: &Path) -> Result<Vec<PathBuf>> {
    // Always self-check against the schema, whatever the output format.
    let json = to_json(report)?;
    let text = match format {
        Format::Json => json,
        other => render(report, other)?,
    };
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{REPORT_STEM}.{}", format.extension()));
    fs::write(&path, text).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    Ok(vec![path])
}
