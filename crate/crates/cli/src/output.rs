use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const CSV_VERSION: u32 = 1;

/// A rectangular result table plus free-form trailing notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

impl Table {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Table {
            kind: kind.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text. The first line is `# qprobe-csv v<version> <kind>`; notes
    /// follow the data as `#` lines.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# qprobe-csv v{CSV_VERSION} {}\n", self.kind);
        out += &self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out += &row.join(",");
            out.push('\n');
        }
        for note in &self.notes {
            out += &format!("# {note}\n");
        }
        out
    }
}

/// Writes `contents` next to `path` under a temporary name, then renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Path of the plotting script that accompanies a CSV file.
pub fn plot_script_path(csv: &Path) -> PathBuf {
    csv.with_extension("plot.py")
}

/// A matplotlib script plotting every numeric column of `table` against the
/// first one (or error against N, per source, for scaling tables).
pub fn plot_script(table: &Table, csv: &Path) -> String {
    let csv_name = csv.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let png_name = csv.with_extension("png").file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let body = if table.kind == "scaling" {
        "\
fig, ax = plt.subplots()
for source, group in df.groupby(\"source\"):
    ax.loglog(group[\"N\"], group[\"error\"], \"o-\", ms=3, label=source)
ax.set_xlabel(\"N\")
ax.set_ylabel(\"error x T\")
"
        .to_string()
    } else {
        let x = &table.columns[0];
        format!(
            "\
fig, ax = plt.subplots()
for col in df.columns[1:]:
    ax.plot(df[\"{x}\"], df[col], label=col)
ax.set_xscale(\"log\")
ax.set_xlabel(\"{x}\")
"
        )
    };
    format!(
        "\
# Generated by qprobe ({kind}).
import pathlib

import matplotlib

matplotlib.use(\"Agg\")
import matplotlib.pyplot as plt
import pandas as pd

here = pathlib.Path(__file__).parent
df = pd.read_csv(here / \"{csv_name}\", comment=\"#\")
{body}ax.legend()
fig.tight_layout()
fig.savefig(here / \"{png_name}\", dpi=150)
",
        kind = table.kind
    )
}

/// Emits `table` to the output path (plus the plot script when asked) or to
/// stdout.
pub fn emit(table: &Table, path: Option<&Path>, plot: bool) -> Result<(), CliError> {
    match path {
        Some(p) => {
            write_atomic(p, &table.to_csv())?;
            if plot {
                write_atomic(&plot_script_path(p), &plot_script(table, p))?;
            }
            for note in &table.notes {
                println!("{note}");
            }
        }
        None => {
            if plot {
                return Err(CliError::Config("--plot needs an output path".into()));
            }
            print!("{}", table.to_csv());
        }
    }
    Ok(())
}
