//! Compact specs for graphs, clusterings, models and estimators.
//!
//! Generators are written `kind:key=value,key=value`; anything else naming
//! an existing file is read from disk.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use pinvtte_core::clustering::{
    contiguous_cycle_clusters, louvain, singleton_clustering, Clustering,
};
use pinvtte_core::design::Design;
use pinvtte_core::estimator::EstimatorSpec;
use pinvtte_core::graph::{cycle_power, sbm_sample, InterferenceGraph};
use pinvtte_core::outcomes::{gen_cycle_model, gen_named_model, LowOrderModel, NamedModel};

use crate::io;

struct Generator {
    kind: String,
    params: BTreeMap<String, String>,
}

impl Generator {
    fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value in {s:?}, got {kv:?}"))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Generator {
            kind: kind.to_string(),
            params,
        })
    }

    fn get<T: FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T> {
        match self.params.remove(key) {
            Some(v) => v
                .parse()
                .map_err(|_| anyhow!("{}: bad value {v:?} for {key}", self.kind)),
            None => default.ok_or_else(|| anyhow!("{}: missing {key}", self.kind)),
        }
    }

    fn finish(self) -> Result<()> {
        match self.params.keys().next() {
            Some(k) => bail!("{}: unknown parameter {k}", self.kind),
            None => Ok(()),
        }
    }
}

fn is_file(s: &str) -> bool {
    Path::new(s).is_file()
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Cycle {
        n: usize,
        r: usize,
    },
    Sbm {
        n: usize,
        blocks: usize,
        pi_in: f64,
        pi_out: f64,
        seed: u64,
    },
}

impl FromStr for GraphSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if is_file(s) {
            return Ok(GraphSource::File(s.into()));
        }
        let mut g = Generator::parse(s)?;
        let out = match g.kind.as_str() {
            "cycle" => GraphSource::Cycle {
                n: g.get("n", None)?,
                r: g.get("r", None)?,
            },
            "sbm" => GraphSource::Sbm {
                n: g.get("n", None)?,
                blocks: g.get("blocks", None)?,
                pi_in: g.get("pin", None)?,
                pi_out: g.get("pout", Some(0.0))?,
                seed: g.get("seed", Some(0))?,
            },
            _ => bail!("graph {s:?} is neither a file nor cycle:/sbm:"),
        };
        g.finish()?;
        Ok(out)
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File(p) => write!(f, "{}", p.display()),
            GraphSource::Cycle { n, r } => write!(f, "cycle:n={n},r={r}"),
            GraphSource::Sbm {
                n,
                blocks,
                pi_in,
                pi_out,
                seed,
            } => {
                write!(
                    f,
                    "sbm:n={n},blocks={blocks},pin={pi_in},pout={pi_out},seed={seed}"
                )
            }
        }
    }
}

impl GraphSource {
    pub fn build(&self) -> Result<InterferenceGraph> {
        Ok(match self {
            GraphSource::File(p) => io::parse_edge_list(&io::read(p)?)?,
            GraphSource::Cycle { n, r } => cycle_power(*n, *r)?,
            GraphSource::Sbm {
                n,
                blocks,
                pi_in,
                pi_out,
                seed,
            } => sbm_sample(*n, *blocks, *pi_in, *pi_out, *seed)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClusteringSource {
    File(PathBuf),
    Singleton,
    Cycle { w: usize },
    Louvain { resolution: f64, seed: u64 },
}

impl FromStr for ClusteringSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if is_file(s) {
            return Ok(ClusteringSource::File(s.into()));
        }
        let mut g = Generator::parse(s)?;
        let out = match g.kind.as_str() {
            "singleton" => ClusteringSource::Singleton,
            "cycle" => ClusteringSource::Cycle {
                w: g.get("w", None)?,
            },
            "louvain" => ClusteringSource::Louvain {
                resolution: g.get("res", Some(1.0))?,
                seed: g.get("seed", Some(0))?,
            },
            _ => bail!("clustering {s:?} is neither a file nor singleton/cycle:/louvain:"),
        };
        g.finish()?;
        Ok(out)
    }
}

impl fmt::Display for ClusteringSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusteringSource::File(p) => write!(f, "{}", p.display()),
            ClusteringSource::Singleton => write!(f, "singleton"),
            ClusteringSource::Cycle { w } => write!(f, "cycle:w={w}"),
            ClusteringSource::Louvain { resolution, seed } => {
                write!(f, "louvain:res={resolution},seed={seed}")
            }
        }
    }
}

impl ClusteringSource {
    pub fn build(&self, g: &InterferenceGraph) -> Result<Clustering> {
        Ok(match self {
            ClusteringSource::File(p) => io::parse_clustering(&io::read(p)?, g.n())?,
            ClusteringSource::Singleton => singleton_clustering(g.n())?,
            ClusteringSource::Cycle { w } => contiguous_cycle_clusters(g.n(), *w)?,
            ClusteringSource::Louvain { resolution, seed } => louvain(g, *resolution, *seed)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSource {
    File(PathBuf),
    Cycle { beta_star: usize },
    Named { kind: NamedModel, seed: u64 },
}

impl FromStr for ModelSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if is_file(s) {
            return Ok(ModelSource::File(s.into()));
        }
        let mut g = Generator::parse(s)?;
        let out = if g.kind == "cycle" {
            ModelSource::Cycle {
                beta_star: g.get("beta", None)?,
            }
        } else if let Ok(kind) = g.kind.parse::<NamedModel>() {
            ModelSource::Named {
                kind,
                seed: g.get("seed", Some(0))?,
            }
        } else {
            bail!("model {s:?} is neither a file nor cycle:/null/weak/strong");
        };
        g.finish()?;
        Ok(out)
    }
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSource::File(p) => write!(f, "{}", p.display()),
            ModelSource::Cycle { beta_star } => write!(f, "cycle:beta={beta_star}"),
            ModelSource::Named { kind, seed } => write!(f, "{}:seed={seed}", named_label(*kind)),
        }
    }
}

fn named_label(kind: NamedModel) -> &'static str {
    match kind {
        NamedModel::Null => "null",
        NamedModel::Weak => "weak",
        NamedModel::Strong => "strong",
    }
}

impl ModelSource {
    pub fn build(&self, g: &InterferenceGraph) -> Result<LowOrderModel> {
        Ok(match self {
            ModelSource::File(p) => io::parse_model(&io::read(p)?, g)?,
            ModelSource::Cycle { beta_star } => gen_cycle_model(g, *beta_star)?,
            ModelSource::Named { kind, seed } => gen_named_model(g, *kind, *seed)?,
        })
    }
}

/// Design family; `Bern` randomizes units and ignores any clustering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DesignChoice {
    Bern { p: f64 },
    Gcr { p: f64 },
    Crd { k: usize },
}

impl DesignChoice {
    pub fn from_flags(kind: &str, p: Option<f64>, k: Option<usize>) -> Result<Self> {
        let need_p = || p.ok_or_else(|| anyhow!("--design {kind} needs --p"));
        Ok(match kind {
            "bern" => DesignChoice::Bern { p: need_p()? },
            "gcr" => DesignChoice::Gcr { p: need_p()? },
            "crd" => DesignChoice::Crd {
                k: k.ok_or_else(|| anyhow!("--design crd needs --k"))?,
            },
            other => bail!("unknown design {other:?}; expected bern, gcr or crd"),
        })
    }

    pub fn build(&self, c: Clustering) -> Result<Design> {
        Ok(match *self {
            DesignChoice::Bern { p } => Design::bernoulli_unit(c.n(), p)?,
            DesignChoice::Gcr { p } => Design::bernoulli_gcr(c, p)?,
            DesignChoice::Crd { k } => Design::complete_gcr(c, k)?,
        })
    }
}

impl fmt::Display for DesignChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignChoice::Bern { p } => write!(f, "bern:p={p}"),
            DesignChoice::Gcr { p } => write!(f, "gcr:p={p}"),
            DesignChoice::Crd { k } => write!(f, "crd:k={k}"),
        }
    }
}

/// `pinv[:β]`, `explicit[:β]`, `ht` or `crd1`; a missing β falls back to
/// `default_beta`.
pub fn parse_estimator(s: &str, default_beta: usize) -> Result<EstimatorSpec> {
    let (kind, beta) = match s.split_once(':') {
        Some((k, b)) => (
            k,
            b.parse()
                .map_err(|_| anyhow!("bad order in estimator {s:?}"))?,
        ),
        None => (s, default_beta),
    };
    Ok(match kind {
        "pinv" => EstimatorSpec::Pinv { beta },
        "explicit" => EstimatorSpec::GcrExplicit { beta },
        "ht" => EstimatorSpec::HorvitzThompson,
        "crd1" => EstimatorSpec::CrdBeta1,
        _ => bail!("unknown estimator {s:?}; expected pinv, explicit, ht or crd1"),
    })
}

pub fn estimator_label(spec: EstimatorSpec) -> String {
    match spec {
        EstimatorSpec::Pinv { beta } => format!("pinv:{beta}"),
        EstimatorSpec::GcrExplicit { beta } => format!("explicit:{beta}"),
        EstimatorSpec::HorvitzThompson => "ht".into(),
        EstimatorSpec::CrdBeta1 => "crd1".into(),
    }
}
