//! CSV tables with a trailing `# key=value` metadata block.

use std::io::Write;

use anyhow::Result;

pub const GIT_DESCRIBE: &str = env!("PINVTTE_GIT_DESCRIBE");

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of `name` in the header.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes the table, then `# seed=…`, any extra metadata, and
/// `# git_describe=…`.
pub fn write_table<W: Write>(
    mut out: W,
    table: &Table,
    seed: Option<u64>,
    extra: &[(&str, String)],
) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    if let Some(seed) = seed {
        writeln!(out, "# seed={seed}")?;
    }
    for (k, v) in extra {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "# git_describe={GIT_DESCRIBE}")?;
    Ok(())
}
