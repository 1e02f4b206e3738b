//! Experiment reports: a CSV table preceded by `#` comment lines naming the
//! experiment, the claim it checks, and the settings that reproduce it.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn flag(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.to_string()
}

#[derive(Debug, Clone)]
pub struct Report {
    pub name: String,
    pub claim: String,
    pub echo: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub table: Table,
    pub samples: Option<Table>,
    pub pass: bool,
}

impl Report {
    pub fn new(name: &str, claim: &str, echo: Vec<(String, String)>, table: Table) -> Self {
        Self {
            name: name.to_string(),
            claim: claim.to_string(),
            echo,
            notes: Vec::new(),
            table,
            samples: None,
            pass: true,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment: {}", self.name);
        let _ = writeln!(out, "# claim: {}", self.claim);
        for (k, v) in &self.echo {
            let _ = writeln!(out, "# {k}: {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# note: {n}");
        }
        let _ = writeln!(out, "# result: {}", flag(self.pass));
        out.push_str(&self.table.to_csv());
        out
    }

    /// Aligned plain-text rendering for the terminal.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} [{}]\n  claim: {}\n",
            self.name,
            flag(self.pass).to_uppercase(),
            self.claim
        );
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        let widths: Vec<usize> = (0..self.table.header.len())
            .map(|j| {
                self.table
                    .rows
                    .iter()
                    .map(|r| r[j].len())
                    .chain([self.table.header[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for row in std::iter::once(&self.table.header).chain(&self.table.rows) {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "  {}", cells.join("  "));
        }
        out
    }

    /// Writes `<dir>/<name>.csv` and, when present, `<dir>/<name>_samples.csv`;
    /// without a directory the report goes to stdout.
    pub fn emit(&self, dir: Option<&Path>) -> Result<(), CliError> {
        eprint!("{}", self.summary());
        match dir {
            None => {
                print!("{}", self.to_csv());
                Ok(())
            }
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("{}.csv", self.name)), self.to_csv())?;
                if let Some(s) = &self.samples {
                    std::fs::write(dir.join(format!("{}_samples.csv", self.name)), s.to_csv())?;
                }
                Ok(())
            }
        }
    }
}
