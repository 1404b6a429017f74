use crate::args::Format;
use serde::Serialize;
use serde_json::Value;
use slapmap_core::ErgodicReport;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// A file written next to the report when `--out` is given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub json: Value,
    pub csv: String,
    /// All match flags true and no unresolved refinement.
    pub matched: bool,
    pub files: Vec<OutputFile>,
}

impl CommandOutput {
    pub fn new<T: Serialize>(report: &T, csv: String, matched: bool) -> CommandOutput {
        CommandOutput {
            json: serde_json::to_value(report).expect("reports serialize"),
            csv,
            matched,
            files: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("value serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        }
    }

    /// Writes `report.json` (or `report.csv`) and the extra files into `dir`.
    pub fn write_to(&self, dir: &Path, format: Format) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let name = match format {
            Format::Json => "report.json",
            Format::Csv => "report.csv",
        };
        fs::write(dir.join(name), self.render(format))?;
        for f in &self.files {
            fs::write(dir.join(&f.name), &f.contents)?;
        }
        Ok(())
    }
}

/// Records density tables for every component. With an output directory
/// the component's `density_csv` field is set to the file path.
pub fn attach_densities(report: &mut ErgodicReport, out: Option<&Path>, prefix: &str) -> Vec<OutputFile> {
    let Some(dir) = out else {
        return Vec::new();
    };
    report
        .components
        .iter_mut()
        .enumerate()
        .map(|(i, c)| {
            let name = format!("{prefix}density_{i}.csv");
            c.density_csv = Some(dir.join(&name).display().to_string());
            OutputFile {
                name,
                contents: c.density_table(),
            }
        })
        .collect()
}

/// One row per component.
pub fn components_csv(report: &ErgodicReport) -> String {
    let mut out = String::from("component,period,cell_count,support_measure,intervals\n");
    for (i, c) in report.components.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            c.period,
            c.cell_count,
            c.support_measure,
            c.support.len()
        );
    }
    out
}
