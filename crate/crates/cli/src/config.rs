//! `key = value` config files merged into the command line.
//!
//! Keys are long flag names. Config values are spliced in right after the
//! subcommand path, so flags given on the command line win for single-valued
//! options. Arrays expand to one flag per element and add to any repeated
//! flags given on the command line.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use toml::Value;

fn scalar(key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(b) => b.to_string(),
        _ => bail!("config key {key}: unsupported value {v}"),
    })
}

/// Flag arguments for every key in `text`. `true` becomes a bare switch and
/// `false` omits it.
pub fn config_args(text: &str) -> Result<Vec<String>> {
    let table: toml::Table = text
        .parse()
        .context("config is not valid key = value TOML")?;
    let mut args = Vec::new();
    for (key, v) in &table {
        let flag = format!("--{key}");
        match v {
            Value::Boolean(true) => args.push(flag),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                for item in items {
                    args.push(flag.clone());
                    args.push(scalar(key, item)?);
                }
            }
            other => {
                args.push(flag);
                args.push(scalar(key, other)?);
            }
        }
    }
    Ok(args)
}

/// Removes `--config FILE` from `argv` and splices the file's flags after the
/// subcommand words.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| anyhow!("--config needs a file"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {path}"))?;
    let extra = config_args(&text)?;
    let at = 1 + rest
        .iter()
        .skip(1)
        .take_while(|a| !a.starts_with('-'))
        .count();
    rest.splice(at..at, extra);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_become_flags() {
        let args = config_args("graph = \"cycle:n=12,r=1\"\nreplicates = 40\ntiming = true\nestimator = [\"pinv\", \"ht\"]\n").unwrap();
        assert_eq!(
            args,
            [
                "--estimator",
                "pinv",
                "--estimator",
                "ht",
                "--graph",
                "cycle:n=12,r=1",
                "--replicates",
                "40",
                "--timing"
            ]
        );
        assert!(config_args("graph = cycle").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 4\n").unwrap();
        let argv = [
            "bin",
            "model",
            "gen",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
        ];
        let out = expand(argv.iter().map(|s| s.to_string()).collect()).unwrap();
        assert_eq!(out, ["bin", "model", "gen", "--seed", "4", "--seed", "9"]);
    }
}
