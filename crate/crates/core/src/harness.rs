//! Replicated experiments, exhaustive oracles, clustering selection and
//! Monte Carlo moment convergence.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::bounds::{variance_bound, BoundReport, GammaSource};
use crate::clustering::{cluster_stats, Clustering};
use crate::design::Design;
use crate::error::{Error, Result};
use crate::estimator::{Estimator, EstimatorSpec, MomentSource};
use crate::graph::InterferenceGraph;
use crate::moments::{design_moments, monte_carlo_moments, unit_cluster_index};
use crate::outcomes::{evaluate, true_tte, LowOrderModel};

/// Summary of replicate estimates against a known TTE. Variance uses `1/R`,
/// so `mse == bias² + variance` up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicateStats {
    pub replicates: usize,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    /// Standard error of the mean.
    pub se: f64,
}

impl ReplicateStats {
    pub fn rmse(&self) -> f64 {
        libm::sqrt(self.mse)
    }
}

/// Summarizes `estimates` in index order.
pub fn summarize(estimates: &[f64], truth: f64) -> Result<ReplicateStats> {
    if estimates.is_empty() {
        return Err(Error::Input("at least one replicate is required".into()));
    }
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let variance = estimates
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / r;
    let mse = estimates
        .iter()
        .map(|e| (e - truth) * (e - truth))
        .sum::<f64>()
        / r;
    Ok(ReplicateStats {
        replicates: estimates.len(),
        mean,
        bias: mean - truth,
        variance,
        mse,
        se: libm::sqrt(variance / r),
    })
}

/// Every estimator's value on replicate `r` of `seed`; all share one draw.
pub fn replicate_estimates(
    model: &LowOrderModel,
    d: &Design,
    estimators: &[Estimator],
    seed: u64,
    r: u64,
) -> Result<Vec<f64>> {
    let draw = d.sample(seed, r);
    let y = evaluate(model, &draw.z)?;
    estimators
        .iter()
        .map(|e| e.estimate(&y, &draw).map(|b| b.tte_hat))
        .collect()
}

/// Serial replicates `0..replicates`; row `r` holds one value per estimator.
pub fn run_replicates(
    model: &LowOrderModel,
    d: &Design,
    estimators: &[Estimator],
    seed: u64,
    replicates: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..replicates as u64)
        .map(|r| replicate_estimates(model, d, estimators, seed, r))
        .collect()
}

/// Per-estimator columns of a replicate table.
pub fn columns(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    (0..width)
        .map(|k| rows.iter().map(|row| row[k]).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Exact mean and variance of a prepared estimator over the design support.
pub fn exhaustive_moments(
    model: &LowOrderModel,
    d: &Design,
    est: &Estimator,
) -> Result<ExactMoments> {
    let mut values = Vec::new();
    for (prob, w) in d.enumerate_support()? {
        let draw = d.draw_from_clusters(w);
        let y = evaluate(model, &draw.z)?;
        values.push((prob, est.estimate(&y, &draw)?.tte_hat));
    }
    let mean: f64 = values.iter().map(|(p, v)| p * v).sum();
    let variance = values
        .iter()
        .map(|(p, v)| p * (v - mean) * (v - mean))
        .sum();
    Ok(ExactMoments { mean, variance })
}

/// [`exhaustive_moments`] with analytic moments.
pub fn exhaustive_expectation(
    g: &InterferenceGraph,
    model: &LowOrderModel,
    d: &Design,
    spec: EstimatorSpec,
) -> Result<ExactMoments> {
    let est = Estimator::prepare(spec, g, d, MomentSource::Analytic)?;
    exhaustive_moments(model, d, &est)
}

/// Exhaustive bias `E[TTE_hat] - TTE`.
pub fn exhaustive_bias(
    g: &InterferenceGraph,
    model: &LowOrderModel,
    d: &Design,
    spec: EstimatorSpec,
) -> Result<f64> {
    Ok(exhaustive_expectation(g, model, d, spec)?.mean - true_tte(model))
}

/// Design family applied to each candidate clustering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DesignTemplate {
    Bernoulli { p: f64 },
    Complete { k: usize },
}

impl DesignTemplate {
    pub fn instantiate(&self, c: Clustering) -> Result<Design> {
        match *self {
            DesignTemplate::Bernoulli { p } => Design::bernoulli_gcr(c, p),
            DesignTemplate::Complete { k } => Design::complete_gcr(c, k),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub chosen: usize,
    /// `(candidate index, report)`, best first.
    pub ranking: Vec<(usize, BoundReport)>,
}

/// Ranks candidates by the pairwise variance bound with exact γ; ties go to
/// fewer clusters, then the earlier candidate.
pub fn select_clustering(
    g: &InterferenceGraph,
    candidates: &[Clustering],
    template: DesignTemplate,
    beta: usize,
    b: f64,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::Input("no candidate clusterings".into()));
    }
    let mut ranking = Vec::with_capacity(candidates.len());
    for (idx, c) in candidates.iter().enumerate() {
        let stats = cluster_stats(g, c)?;
        let d = template.instantiate(c.clone())?;
        ranking.push((
            idx,
            variance_bound(g, &stats, &d, beta, b, GammaSource::Quadform, None)?,
        ));
    }
    ranking.sort_by(|(ia, a), (ib, b)| {
        a.var_bound_pairwise
            .partial_cmp(&b.var_bound_pairwise)
            .unwrap_or(Ordering::Equal)
            .then(a.m.cmp(&b.m))
            .then(ia.cmp(ib))
    });
    Ok(Selection {
        chosen: ranking[0].0,
        ranking,
    })
}

/// `rmse[chosen] / min(rmse)`; 1 means the selection matched the oracle.
pub fn rmse_ratio(rmse: &[f64], chosen: usize) -> Result<f64> {
    let best = rmse.iter().copied().fold(f64::INFINITY, f64::min);
    match rmse.get(chosen) {
        Some(v) if best > 0.0 => Ok(v / best),
        Some(v) if *v == 0.0 => Ok(1.0),
        Some(_) => Ok(f64::INFINITY),
        None => Err(Error::Input(format!(
            "chosen index {chosen} out of {} candidates",
            rmse.len()
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McRow {
    pub samples: usize,
    pub seed: u64,
    pub unit: usize,
    /// `‖M̂^† - M^†‖_F`.
    pub frobenius_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSummary {
    pub samples: usize,
    pub median: f64,
    /// Sample standard deviation; zero for a single row.
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub rows: Vec<McRow>,
    /// One entry per sample size, in grid order.
    pub summary: Vec<McSummary>,
}

pub fn mc_convergence_report(
    d: &Design,
    g: &InterferenceGraph,
    units: &[usize],
    beta: usize,
    r_grid: &[usize],
    seeds: &[u64],
) -> Result<McReport> {
    let mut exact = Vec::with_capacity(units.len());
    for &i in units {
        if i >= g.n() {
            return Err(Error::Input(format!(
                "unit {i} out of range for {} units",
                g.n()
            )));
        }
        exact.push(design_moments(d, &unit_cluster_index(g, d.clustering(), i, beta)?)?.pinv);
    }
    let mut rows = Vec::new();
    let mut summary = Vec::with_capacity(r_grid.len());
    for &samples in r_grid {
        let mut errs = Vec::new();
        for &seed in seeds {
            for (&unit, truth) in units.iter().zip(&exact) {
                let est = monte_carlo_moments(d, g, unit, beta, samples, seed)?;
                let frobenius_error = (&est.pinv - truth).norm();
                rows.push(McRow {
                    samples,
                    seed,
                    unit,
                    frobenius_error,
                });
                errs.push(frobenius_error);
            }
        }
        summary.push(McSummary {
            samples,
            median: median(&mut errs),
            std: sample_std(&errs),
        });
    }
    Ok(McReport { rows, summary })
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let h = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[h]
    } else {
        0.5 * (xs[h - 1] + xs[h])
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    libm::sqrt(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
}
