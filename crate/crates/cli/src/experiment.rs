//! Replicated simulation with rayon over replicates.

use std::time::Instant;

use anyhow::Result;
use pinvtte_core::bounds::{bias_exact, variance_bound, GammaSource};
use pinvtte_core::clustering::cluster_stats;
use pinvtte_core::design::Design;
use pinvtte_core::estimator::{Estimator, EstimatorSpec, MomentSource};
use pinvtte_core::graph::InterferenceGraph;
use pinvtte_core::harness::{columns, replicate_estimates, summarize, ReplicateStats};
use pinvtte_core::outcomes::{cluster_aggregate, outcome_bound, true_tte, LowOrderModel};
use rayon::prelude::*;

use crate::output::{num, opt, Table};
use crate::sources::{estimator_label, ClusteringSource, DesignChoice, GraphSource, ModelSource};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub model: ModelSource,
    pub clusterings: Vec<ClusteringSource>,
    pub design: DesignChoice,
    pub estimators: Vec<EstimatorSpec>,
    pub replicates: usize,
    pub seed: u64,
    pub moments: MomentSource,
    /// Adds wall-clock seconds to the table, which breaks byte-identical
    /// reruns.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub clustering: String,
    pub m: usize,
    pub estimator: EstimatorSpec,
    pub true_tte: f64,
    pub stats: ReplicateStats,
    pub analytic_bias: Option<f64>,
    pub var_bound: Option<f64>,
    /// Shared by all estimators of one clustering.
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
}

/// Replicate statistics per estimator. All estimators see the same draws and
/// results are reduced in replicate order, so thread count never changes the
/// output.
pub fn simulate(
    g: &InterferenceGraph,
    model: &LowOrderModel,
    d: &Design,
    specs: &[EstimatorSpec],
    replicates: usize,
    seed: u64,
    moments: MomentSource,
) -> Result<Vec<ReplicateStats>> {
    let estimators: Vec<Estimator> = specs
        .iter()
        .map(|&s| Estimator::prepare(s, g, d, moments))
        .collect::<pinvtte_core::Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| replicate_estimates(model, d, &estimators, seed, r))
        .collect::<pinvtte_core::Result<_>>()?;
    let truth = true_tte(model);
    Ok(columns(&rows, specs.len())
        .iter()
        .map(|col| summarize(col, truth))
        .collect::<pinvtte_core::Result<_>>()?)
}

/// Exact bias and pairwise variance bound where the theory supplies them.
/// Horvitz–Thompson is unbiased whenever it can be prepared.
pub fn analytic(
    g: &InterferenceGraph,
    model: &LowOrderModel,
    d: &Design,
    spec: EstimatorSpec,
) -> Result<(Option<f64>, Option<f64>)> {
    let beta = match spec {
        EstimatorSpec::Pinv { beta } | EstimatorSpec::GcrExplicit { beta } => beta,
        EstimatorSpec::CrdBeta1 => 1,
        EstimatorSpec::HorvitzThompson => return Ok((Some(0.0), None)),
    };
    let bias = bias_exact(model, g, d, beta)?;
    let stats = cluster_stats(g, d.clustering())?;
    let agg = cluster_aggregate(model, d.clustering());
    let monotone = agg.is_sign_consistent().then_some(&agg);
    let b = outcome_bound(model);
    let var = if b > 0.0 {
        Some(
            variance_bound(g, &stats, d, beta, b, GammaSource::Quadform, monotone)?
                .var_bound_pairwise,
        )
    } else {
        Some(0.0)
    };
    Ok((Some(bias), var))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.replicates == 0 {
        anyhow::bail!("replicates must be at least 1");
    }
    let g = cfg.graph.build()?;
    let model = cfg.model.build(&g)?;
    let truth = true_tte(&model);
    let mut rows = Vec::new();
    for source in &cfg.clusterings {
        let start = Instant::now();
        let d = cfg.design.build(source.build(&g)?)?;
        let stats = simulate(
            &g,
            &model,
            &d,
            &cfg.estimators,
            cfg.replicates,
            cfg.seed,
            cfg.moments,
        )?;
        let mut pending = Vec::new();
        for (&spec, s) in cfg.estimators.iter().zip(stats) {
            let (analytic_bias, var_bound) = analytic(&g, &model, &d, spec)?;
            pending.push(ExperimentRow {
                clustering: source.to_string(),
                m: d.m(),
                estimator: spec,
                true_tte: truth,
                stats: s,
                analytic_bias,
                var_bound,
                wall_seconds: 0.0,
            });
        }
        let wall = start.elapsed().as_secs_f64();
        rows.extend(pending.into_iter().map(|r| ExperimentRow {
            wall_seconds: wall,
            ..r
        }));
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
    })
}

impl ExperimentReport {
    pub fn row(&self, clustering: &str, estimator: EstimatorSpec) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.clustering == clustering && r.estimator == estimator)
    }

    /// One row per configuration and metric.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "graph",
            "model",
            "clustering",
            "clusters",
            "design",
            "estimator",
            "replicates",
            "metric",
            "value",
        ]);
        for r in &self.rows {
            let mut metrics = vec![
                ("true_tte", num(r.true_tte)),
                ("mean", num(r.stats.mean)),
                ("bias", num(r.stats.bias)),
                ("variance", num(r.stats.variance)),
                ("mse", num(r.stats.mse)),
                ("rmse", num(r.stats.rmse())),
                ("se", num(r.stats.se)),
                ("analytic_bias", opt(r.analytic_bias)),
                ("var_bound_pairwise", opt(r.var_bound)),
            ];
            if self.config.timing {
                metrics.push(("wall_seconds", num(r.wall_seconds)));
            }
            for (metric, value) in metrics {
                t.push(vec![
                    self.config.graph.to_string(),
                    self.config.model.to_string(),
                    r.clustering.clone(),
                    r.m.to_string(),
                    self.config.design.to_string(),
                    estimator_label(r.estimator),
                    r.stats.replicates.to_string(),
                    metric.to_string(),
                    value,
                ]);
            }
        }
        t
    }
}
