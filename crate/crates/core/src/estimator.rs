//! TTE estimators evaluated on one realized assignment.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::{cluster_stats, ClusterStats, Clustering};
use crate::design::{AssignmentDraw, Design, DesignKind};
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::moments::{design_moments, enumerate_subsets, monte_carlo_moments, SubsetIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    Pseudoinverse { beta: usize },
    HorvitzThompson,
    CrdBeta1,
}

/// `tte_hat = (1/n) Σ_i Y_i · per_unit_weight[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateBreakdown {
    pub tte_hat: f64,
    pub per_unit_weight: Vec<f64>,
    pub kind: EstimatorKind,
}

fn finish(y: &[f64], weights: Vec<f64>, kind: EstimatorKind) -> EstimateBreakdown {
    let n = y.len();
    let tte_hat = y.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    EstimateBreakdown {
        tte_hat,
        per_unit_weight: weights,
        kind,
    }
}

fn check_inputs(y: &[f64], draw: &AssignmentDraw, n: usize, m: usize) -> Result<()> {
    if y.len() != n || draw.z.len() != n {
        return Err(Error::Input(format!(
            "expected {n} outcomes and unit treatments, got {} and {}",
            y.len(),
            draw.z.len()
        )));
    }
    if draw.w.len() != m {
        return Err(Error::Input(format!(
            "expected {m} cluster treatments, got {}",
            draw.w.len()
        )));
    }
    Ok(())
}

/// Where the pseudoinverse weights come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Analytic,
    MonteCarlo { samples: usize, seed: u64 },
}

/// `M^† ψ` over subsets of local positions `0..c`.
#[derive(Debug)]
struct LocalWeights {
    index: SubsetIndex,
    coef: Vec<f64>,
}

/// Pseudoinverse estimator with per-unit weights `M^† ψ` precomputed.
///
/// Unit `i` stores its sorted cluster neighborhood; local position `x` of the
/// shared index stands for cluster `clusters[x]`.
#[derive(Clone, Debug)]
pub struct PinvEstimator {
    beta: usize,
    m: usize,
    clusters: Vec<Vec<usize>>,
    weights: Vec<Arc<LocalWeights>>,
}

impl PinvEstimator {
    pub fn new(
        g: &InterferenceGraph,
        d: &Design,
        beta: usize,
        source: MomentSource,
    ) -> Result<Self> {
        let stats = cluster_stats(g, d.clustering())?;
        let mut cache: BTreeMap<usize, Arc<LocalWeights>> = BTreeMap::new();
        let mut weights = Vec::with_capacity(g.n());
        for (i, nb) in stats.cluster_nbhd.iter().enumerate() {
            let c = nb.len();
            let local = match source {
                // exchangeable designs: M^† ψ depends only on |C(N_i)|
                MomentSource::Analytic => match cache.get(&c) {
                    Some(w) => w.clone(),
                    None => {
                        let index = enumerate_subsets(&(0..c).collect::<Vec<_>>(), beta)?;
                        let dm = design_moments(d, &index)?;
                        let w = Arc::new(LocalWeights {
                            coef: dm.pinv_psi().iter().copied().collect(),
                            index,
                        });
                        cache.insert(c, w.clone());
                        w
                    }
                },
                MomentSource::MonteCarlo { samples, seed } => {
                    let dm = monte_carlo_moments(d, g, i, beta, samples, seed)?;
                    // relabeling the sorted neighborhood to 0..c preserves canonical order
                    let index = enumerate_subsets(&(0..c).collect::<Vec<_>>(), beta)?;
                    Arc::new(LocalWeights {
                        coef: dm.pinv_psi().iter().copied().collect(),
                        index,
                    })
                }
            };
            weights.push(local);
        }
        Ok(PinvEstimator {
            beta,
            m: d.m(),
            clusters: stats.cluster_nbhd,
            weights,
        })
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    /// `⟨M^† ψ_i, w̃_i⟩` for unit `i`.
    pub fn unit_weight(&self, i: usize, w: &[bool]) -> f64 {
        let clusters = &self.clusters[i];
        let local = &self.weights[i];
        local
            .index
            .subsets()
            .iter()
            .zip(&local.coef)
            .filter(|(s, _)| s.members().iter().all(|&x| w[clusters[x]]))
            .map(|(_, a)| a)
            .sum()
    }

    pub fn estimate(&self, y: &[f64], draw: &AssignmentDraw) -> Result<EstimateBreakdown> {
        check_inputs(y, draw, self.clusters.len(), self.m)?;
        let weights = (0..y.len()).map(|i| self.unit_weight(i, &draw.w)).collect();
        Ok(finish(
            y,
            weights,
            EstimatorKind::Pseudoinverse { beta: self.beta },
        ))
    }
}

/// Pseudoinverse estimator with analytic moments.
pub fn pinv_estimate(
    g: &InterferenceGraph,
    y: &[f64],
    draw: &AssignmentDraw,
    d: &Design,
    beta: usize,
) -> Result<EstimateBreakdown> {
    PinvEstimator::new(g, d, beta, MomentSource::Analytic)?.estimate(y, draw)
}

/// Elementary symmetric sums `e_1..e_β` of `vals`.
fn elementary_symmetric(vals: impl Iterator<Item = f64>, beta: usize) -> Vec<f64> {
    let mut e = alloc::vec![0.0; beta + 1];
    e[0] = 1.0;
    for v in vals {
        for j in (1..=beta).rev() {
            e[j] += e[j - 1] * v;
        }
    }
    e
}

/// `Σ_{U ∈ C_i^β} (Π_{C∈U} (w_C-p)/p - Π_{C∈U} (w_C-p)/(p-1))`, summed via
/// elementary symmetric polynomials.
pub fn gcr_explicit_weight(clusters: &[usize], w: &[bool], p: f64, beta: usize) -> f64 {
    let centered = || clusters.iter().map(|&c| w[c] as u8 as f64 - p);
    let a = elementary_symmetric(centered().map(|x| x / p), beta);
    let b = elementary_symmetric(centered().map(|x| x / (p - 1.0)), beta);
    (1..=beta).map(|j| a[j] - b[j]).sum()
}

pub fn gcr_explicit_estimate(
    g: &InterferenceGraph,
    y: &[f64],
    draw: &AssignmentDraw,
    clustering: &Clustering,
    p: f64,
    beta: usize,
) -> Result<EstimateBreakdown> {
    let stats = cluster_stats(g, clustering)?;
    check_inputs(y, draw, g.n(), clustering.m())?;
    let weights = stats
        .cluster_nbhd
        .iter()
        .map(|nb| gcr_explicit_weight(nb, &draw.w, p, beta))
        .collect();
    Ok(finish(y, weights, EstimatorKind::Pseudoinverse { beta }))
}

/// Inverse exposure probabilities `(1/P(all treated), 1/P(all untreated))`
/// per unit; fails if either arm is impossible.
pub fn ht_inverse_probabilities(d: &Design, stats: &ClusterStats) -> Result<Vec<(f64, f64)>> {
    stats
        .cluster_nbhd
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let (p1, p0) = (d.joint_treated(nb.len()), d.joint_untreated(nb.len()));
            if p1 <= 0.0 {
                return Err(Error::Positivity {
                    unit: i,
                    arm: "full treatment",
                });
            }
            if p0 <= 0.0 {
                return Err(Error::Positivity {
                    unit: i,
                    arm: "full control",
                });
            }
            Ok((1.0 / p1, 1.0 / p0))
        })
        .collect()
}

fn ht_weights(stats: &ClusterStats, inv: &[(f64, f64)], w: &[bool]) -> Vec<f64> {
    stats
        .cluster_nbhd
        .iter()
        .zip(inv)
        .map(|(nb, &(t, u))| {
            if nb.iter().all(|&c| w[c]) {
                t
            } else if nb.iter().all(|&c| !w[c]) {
                -u
            } else {
                0.0
            }
        })
        .collect()
}

pub fn ht_estimate(
    g: &InterferenceGraph,
    y: &[f64],
    draw: &AssignmentDraw,
    d: &Design,
) -> Result<EstimateBreakdown> {
    let stats = cluster_stats(g, d.clustering())?;
    check_inputs(y, draw, g.n(), d.m())?;
    let inv = ht_inverse_probabilities(d, &stats)?;
    Ok(finish(
        y,
        ht_weights(&stats, &inv, &draw.w),
        EstimatorKind::HorvitzThompson,
    ))
}

/// First-order weight under complete randomization, given `c = |C(N_i)|` and
/// the number of treated clusters in `C(N_i)`.
pub fn crd_beta1_weight(c: usize, treated: usize, m: usize, k: usize) -> f64 {
    let (mf, kf, cf, tf) = (m as f64, k as f64, c as f64, treated as f64);
    if c < m {
        mf * mf * (mf - 1.0) / (kf * (mf - kf) * (mf - cf)) * (tf - cf * kf / mf)
    } else {
        mf * kf * kf / ((kf * kf + mf) * (kf * kf + mf)) * (tf + cf / kf)
    }
}

pub fn crd_beta1_estimate(
    g: &InterferenceGraph,
    y: &[f64],
    draw: &AssignmentDraw,
    clustering: &Clustering,
    k: usize,
) -> Result<EstimateBreakdown> {
    let m = clustering.m();
    if k == 0 || k >= m {
        return Err(Error::Input(format!(
            "need 1 <= k <= m-1, got k={k}, m={m}"
        )));
    }
    let stats = cluster_stats(g, clustering)?;
    check_inputs(y, draw, g.n(), m)?;
    let weights = stats
        .cluster_nbhd
        .iter()
        .map(|nb| crd_beta1_weight(nb.len(), nb.iter().filter(|&&c| draw.w[c]).count(), m, k))
        .collect();
    Ok(finish(y, weights, EstimatorKind::CrdBeta1))
}

/// Estimator choice as named in configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorSpec {
    Pinv { beta: usize },
    GcrExplicit { beta: usize },
    HorvitzThompson,
    CrdBeta1,
}

/// An estimator with all draw-independent work done, reusable across draws.
#[derive(Clone, Debug)]
pub enum Estimator {
    Pinv(PinvEstimator),
    GcrExplicit {
        stats: ClusterStats,
        p: f64,
        beta: usize,
    },
    HorvitzThompson {
        stats: ClusterStats,
        inv: Vec<(f64, f64)>,
    },
    CrdBeta1 {
        stats: ClusterStats,
        k: usize,
    },
}

impl Estimator {
    pub fn prepare(
        spec: EstimatorSpec,
        g: &InterferenceGraph,
        d: &Design,
        source: MomentSource,
    ) -> Result<Self> {
        let stats = || cluster_stats(g, d.clustering());
        match spec {
            EstimatorSpec::Pinv { beta } => {
                Ok(Estimator::Pinv(PinvEstimator::new(g, d, beta, source)?))
            }
            EstimatorSpec::GcrExplicit { beta } => match d.kind() {
                DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => {
                    Ok(Estimator::GcrExplicit {
                        stats: stats()?,
                        p,
                        beta,
                    })
                }
                DesignKind::CompleteGcr { .. } => Err(Error::Precondition(
                    "the explicit GCR form needs a Bernoulli design".into(),
                )),
            },
            EstimatorSpec::HorvitzThompson => {
                let stats = stats()?;
                let inv = ht_inverse_probabilities(d, &stats)?;
                Ok(Estimator::HorvitzThompson { stats, inv })
            }
            EstimatorSpec::CrdBeta1 => match d.kind() {
                DesignKind::CompleteGcr { k } => Ok(Estimator::CrdBeta1 { stats: stats()?, k }),
                _ => Err(Error::Precondition(
                    "the first-order CRD form needs a complete-randomization design".into(),
                )),
            },
        }
    }

    pub fn estimate(&self, y: &[f64], draw: &AssignmentDraw) -> Result<EstimateBreakdown> {
        match self {
            Estimator::Pinv(e) => e.estimate(y, draw),
            Estimator::GcrExplicit { stats, p, beta } => {
                check_inputs(y, draw, stats.n(), stats.m)?;
                let weights = stats
                    .cluster_nbhd
                    .iter()
                    .map(|nb| gcr_explicit_weight(nb, &draw.w, *p, *beta))
                    .collect();
                Ok(finish(
                    y,
                    weights,
                    EstimatorKind::Pseudoinverse { beta: *beta },
                ))
            }
            Estimator::HorvitzThompson { stats, inv } => {
                check_inputs(y, draw, stats.n(), stats.m)?;
                Ok(finish(
                    y,
                    ht_weights(stats, inv, &draw.w),
                    EstimatorKind::HorvitzThompson,
                ))
            }
            Estimator::CrdBeta1 { stats, k } => {
                check_inputs(y, draw, stats.n(), stats.m)?;
                let weights = stats
                    .cluster_nbhd
                    .iter()
                    .map(|nb| {
                        crd_beta1_weight(
                            nb.len(),
                            nb.iter().filter(|&&c| draw.w[c]).count(),
                            stats.m,
                            *k,
                        )
                    })
                    .collect();
                Ok(finish(y, weights, EstimatorKind::CrdBeta1))
            }
        }
    }
}
