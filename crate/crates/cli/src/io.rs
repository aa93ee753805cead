//! Text formats for graphs, clusterings, models, outcomes and treatments.
//!
//! All readers skip blank lines and `#` comments and accept any whitespace
//! between fields. Reported line numbers are 1-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pinvtte_core::clustering::Clustering;
use pinvtte_core::graph::{from_edge_list, InterferenceGraph};
use pinvtte_core::outcomes::LowOrderModel;
use pinvtte_core::subset::Subset;

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.trim();
        (!line.is_empty() && !line.starts_with('#'))
            .then(|| (k + 1, line.split_whitespace().collect()))
    })
}

fn field<T: std::str::FromStr>(raw: &str, line: usize, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| anyhow!("line {line}: cannot parse {what} from {raw:?}"))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// `n=<count>` header, then `src dst` pairs.
pub fn parse_edge_list(text: &str) -> Result<InterferenceGraph> {
    let mut n = None;
    let mut edges = Vec::new();
    for (line, fields) in data_lines(text) {
        if let Some(count) = fields[0].strip_prefix("n=") {
            if n.is_some() {
                bail!("line {line}: duplicate n= header");
            }
            n = Some(field::<usize>(count, line, "unit count")?);
            continue;
        }
        if n.is_none() {
            bail!("line {line}: edge before the n= header");
        }
        if fields.len() != 2 {
            bail!(
                "line {line}: expected `src dst`, found {} fields",
                fields.len()
            );
        }
        let (src, dst): (usize, usize) = (
            field(fields[0], line, "src")?,
            field(fields[1], line, "dst")?,
        );
        let count = n.expect("checked above");
        if src >= count || dst >= count {
            bail!("line {line}: edge ({src}, {dst}) leaves [0, {count})");
        }
        edges.push((src, dst));
    }
    let n = n.ok_or_else(|| anyhow!("missing n= header"))?;
    Ok(from_edge_list(&edges, n)?)
}

/// Self-loops are implicit and omitted.
pub fn write_edge_list(g: &InterferenceGraph) -> String {
    let mut out = format!("n={}\n", g.n());
    for (src, dst) in g.to_edge_list() {
        if src != dst {
            let _ = writeln!(out, "{src}\t{dst}");
        }
    }
    out
}

/// `unit label` lines covering every unit exactly once.
pub fn parse_clustering(text: &str, n: usize) -> Result<Clustering> {
    let mut labels: Vec<Option<i64>> = vec![None; n];
    for (line, fields) in data_lines(text) {
        if fields.len() != 2 {
            bail!(
                "line {line}: expected `unit label`, found {} fields",
                fields.len()
            );
        }
        let unit: usize = field(fields[0], line, "unit")?;
        let label: i64 = field(fields[1], line, "cluster label")?;
        let slot = labels
            .get_mut(unit)
            .ok_or_else(|| anyhow!("line {line}: unit {unit} out of range for {n} units"))?;
        if slot.replace(label).is_some() {
            bail!("line {line}: unit {unit} listed twice");
        }
    }
    let labels: Vec<i64> = labels
        .into_iter()
        .enumerate()
        .map(|(j, l)| l.ok_or_else(|| anyhow!("unit {j} has no cluster")))
        .collect::<Result<_>>()?;
    Ok(Clustering::from_labels(&labels)?)
}

pub fn write_clustering(c: &Clustering) -> String {
    let mut out = String::new();
    for (j, label) in c.assignment().iter().enumerate() {
        let _ = writeln!(out, "{j}\t{label}");
    }
    out
}

/// `unit subset value` lines; the subset is comma-separated or `-` for the
/// baseline. The model order is the largest subset seen.
pub fn parse_model(text: &str, g: &InterferenceGraph) -> Result<LowOrderModel> {
    let mut maps = vec![BTreeMap::new(); g.n()];
    let mut order = 0;
    for (line, fields) in data_lines(text) {
        if fields.len() != 3 {
            bail!(
                "line {line}: expected `unit subset value`, found {} fields",
                fields.len()
            );
        }
        let unit: usize = field(fields[0], line, "unit")?;
        let members: Vec<usize> = if fields[1] == "-" {
            Vec::new()
        } else {
            fields[1]
                .split(',')
                .map(|m| field(m, line, "subset member"))
                .collect::<Result<_>>()?
        };
        let value: f64 = field(fields[2], line, "coefficient")?;
        let map = maps
            .get_mut(unit)
            .ok_or_else(|| anyhow!("line {line}: unit {unit} out of range for {} units", g.n()))?;
        let s = Subset::new(members);
        order = order.max(s.len());
        if map.insert(s, value).is_some() {
            bail!("line {line}: duplicate coefficient for unit {unit}");
        }
    }
    Ok(LowOrderModel::new(g, order, maps)?)
}

pub fn write_model(model: &LowOrderModel) -> String {
    let mut out = String::new();
    for i in 0..model.n() {
        for (s, v) in model.coefficients(i) {
            let key = if s.is_empty() {
                "-".to_string()
            } else {
                s.members()
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let _ = writeln!(out, "{i}\t{key}\t{v}");
        }
    }
    out
}

/// `unit value` lines covering every unit exactly once.
pub fn parse_unit_values<T: std::str::FromStr + Clone>(
    text: &str,
    n: usize,
    what: &str,
) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; n];
    for (line, fields) in data_lines(text) {
        if fields.len() != 2 {
            bail!(
                "line {line}: expected `unit {what}`, found {} fields",
                fields.len()
            );
        }
        let unit: usize = field(fields[0], line, "unit")?;
        let v: T = field(fields[1], line, what)?;
        let slot = out
            .get_mut(unit)
            .ok_or_else(|| anyhow!("line {line}: unit {unit} out of range for {n} units"))?;
        if slot.replace(v).is_some() {
            bail!("line {line}: unit {unit} listed twice");
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(j, v)| v.ok_or_else(|| anyhow!("unit {j} has no {what}")))
        .collect()
}

/// Unit treatments as `0`/`1`, checked to be constant within clusters.
pub fn parse_treatments(text: &str, c: &Clustering) -> Result<Vec<bool>> {
    let raw: Vec<u8> = parse_unit_values(text, c.n(), "treatment")?;
    let mut w: Vec<Option<bool>> = vec![None; c.m()];
    for (j, &t) in raw.iter().enumerate() {
        if t > 1 {
            bail!("unit {j}: treatment must be 0 or 1, got {t}");
        }
        let cl = c.cluster_of(j);
        match w[cl] {
            Some(prev) if prev != (t == 1) => {
                bail!("unit {j}: treatment differs within cluster {cl}")
            }
            _ => w[cl] = Some(t == 1),
        }
    }
    Ok(w.into_iter()
        .map(|v| v.expect("clusters are nonempty"))
        .collect())
}
