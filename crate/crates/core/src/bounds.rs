//! Exact bias, bias bounds, γ terms and worst-case variance bounds.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::clustering::{cluster_stats, ClusterStats, Clustering};
use crate::design::{Design, DesignKind};
use crate::error::{Error, Result};
use crate::graph::{degree_stats, InterferenceGraph};
use crate::moments::{
    design_moments, enumerate_subsets, monte_carlo_moments, DesignMoments, SubsetIndex,
};
use crate::outcomes::{cluster_aggregate, ClusterAggregatedModel, LowOrderModel};
use crate::powi;
use crate::subset::{binomial, union_len, Subset};

/// `ψᵀ M^† ψ`, the squared γ entering the variance bounds.
pub fn gamma_quadform(moments: &DesignMoments) -> f64 {
    let psi = moments.index.psi();
    psi.dot(&(&moments.pinv * &psi))
}

/// Closed-form `ψᵀ M^† ψ` for Bernoulli(p) clusters.
pub fn gamma_gcr_closed(c_size: usize, beta: usize, p: f64) -> f64 {
    let (odds, inv) = ((1.0 - p) / p, p / (1.0 - p));
    (1..=beta.min(c_size))
        .map(|x| {
            let sign = if x % 2 == 0 { 1.0 } else { -1.0 };
            binomial(c_size, x) as f64 * (powi(odds, x) - 2.0 * sign + powi(inv, x))
        })
        .sum()
}

/// `2 min(q^{-c}, c^β q^{-β})` with `q = min(p, 1-p)`; dominates
/// [`gamma_gcr_closed`].
pub fn gamma_gcr_bound(c_size: usize, beta: usize, p: f64) -> f64 {
    2.0 * gcr_min_term(c_size, beta, p)
}

fn gcr_min_term(c_size: usize, beta: usize, p: f64) -> f64 {
    let q = p.min(1.0 - p);
    let by_clusters = 1.0 / powi(q, c_size);
    let by_order = powi(c_size as f64, beta) / powi(q, beta);
    by_clusters.min(by_order)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrdGamma {
    /// `ψᵀ M^† ψ`.
    pub quadform: f64,
    /// `(c + 1) · quadform`.
    pub scaled: f64,
}

/// First-order γ terms under complete randomization of `k` of `m` clusters.
pub fn gamma_crd(c_size: usize, m: usize, k: usize) -> CrdGamma {
    let (c, mf, kf) = (c_size as f64, m as f64, k as f64);
    let quadform = if c_size < m {
        c * (mf - 1.0) * mf * mf / (kf * (mf - kf) * (mf - c))
    } else {
        mf * mf * kf * kf / ((kf * kf + mf) * (kf * kf + mf))
    };
    CrdGamma {
        quadform,
        scaled: (c + 1.0) * quadform,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaSource {
    Closed,
    Quadform,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaProvenance {
    ClosedForm,
    Quadform,
    MonteCarlo { samples: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaProfile {
    pub gamma_sq: Vec<f64>,
    /// `|C_i^β| · gamma_sq`, reported for complete randomization only.
    pub scaled: Option<Vec<f64>>,
    pub provenance: GammaProvenance,
}

fn local_index(c: usize, beta: usize) -> Result<SubsetIndex> {
    enumerate_subsets(&(0..c).collect::<Vec<_>>(), beta)
}

pub fn gamma_profile(
    g: &InterferenceGraph,
    stats: &ClusterStats,
    d: &Design,
    beta: usize,
    source: GammaSource,
) -> Result<GammaProfile> {
    let sizes: Vec<usize> = stats.cluster_nbhd.iter().map(Vec::len).collect();
    let mut cache: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut by_size = |c: usize| -> Result<(f64, usize)> {
        if let Some(v) = cache.get(&c) {
            return Ok(*v);
        }
        let v = match (source, d.kind()) {
            (
                GammaSource::Closed,
                DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p },
            ) => (gamma_gcr_closed(c, beta, p), local_index(c, beta)?.len()),
            (GammaSource::Closed, DesignKind::CompleteGcr { k }) => {
                if beta != 1 {
                    return Err(Error::Precondition(format!(
                        "closed-form γ under complete randomization needs beta = 1, got {beta}"
                    )));
                }
                (gamma_crd(c, d.m(), k).quadform, c + 1)
            }
            _ => {
                let index = local_index(c, beta)?;
                (gamma_quadform(&design_moments(d, &index)?), index.len())
            }
        };
        cache.insert(c, v);
        Ok(v)
    };
    let mut gamma_sq = Vec::with_capacity(sizes.len());
    let mut lens = Vec::with_capacity(sizes.len());
    match source {
        GammaSource::MonteCarlo { samples, seed } => {
            for i in 0..sizes.len() {
                let dm = monte_carlo_moments(d, g, i, beta, samples, seed)?;
                gamma_sq.push(gamma_quadform(&dm));
                lens.push(dm.index.len());
            }
        }
        _ => {
            for &c in &sizes {
                let (v, len) = by_size(c)?;
                gamma_sq.push(v);
                lens.push(len);
            }
        }
    }
    let scaled = (!d.is_bernoulli()).then(|| {
        gamma_sq
            .iter()
            .zip(&lens)
            .map(|(v, &l)| v * l as f64)
            .collect()
    });
    Ok(GammaProfile {
        gamma_sq,
        scaled,
        provenance: match source {
            GammaSource::Closed => GammaProvenance::ClosedForm,
            GammaSource::Quadform => GammaProvenance::Quadform,
            GammaSource::MonteCarlo { samples, .. } => GammaProvenance::MonteCarlo { samples },
        },
    })
}

/// `E[TTE_hat_β] - TTE` from analytic moments.
///
/// With `a = M^† ψ` over `C_i^β`, unit `i` contributes
/// `Σ_U x_{i,U} (Σ_V P(U ∪ V treated) a_V - ψ_U)` over every cluster subset
/// `U` in its aggregated model.
pub fn bias_exact(
    model: &LowOrderModel,
    g: &InterferenceGraph,
    d: &Design,
    beta: usize,
) -> Result<f64> {
    let stats = cluster_stats(g, d.clustering())?;
    let agg = cluster_aggregate(model, d.clustering());
    let mut cache: BTreeMap<usize, (SubsetIndex, Vec<f64>)> = BTreeMap::new();
    let mut total = 0.0;
    for (i, clusters) in stats.cluster_nbhd.iter().enumerate() {
        let c = clusters.len();
        if let Entry::Vacant(slot) = cache.entry(c) {
            let index = local_index(c, beta)?;
            let a = design_moments(d, &index)?
                .pinv_psi()
                .iter()
                .copied()
                .collect();
            slot.insert((index, a));
        }
        let (index, a) = &cache[&c];
        for (u, x) in agg.coefficients(i) {
            let local: Vec<usize> = u
                .members()
                .iter()
                .map(|cl| clusters.binary_search(cl).expect("C(S) lies in C(N_i)"))
                .collect();
            let reach: f64 = index
                .subsets()
                .iter()
                .zip(a)
                .map(|(v, av)| av * d.joint_treated(union_len(&local, v.members())))
                .sum();
            let psi = if u.is_empty() { 0.0 } else { 1.0 };
            total += x * (reach - psi);
        }
    }
    Ok(total / g.n() as f64)
}

/// Three nested bias bounds under Bernoulli cluster designs, averaged over
/// units: `per_cardinality <= aggregated_l1 <= coefficient_l1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GcrBiasBound {
    /// `Σ_{ℓ>β} |Σ_{|U|=ℓ} x_{i,U}|`.
    pub per_cardinality: f64,
    /// `‖x_i^{>β}‖₁`.
    pub aggregated_l1: f64,
    /// `‖c_i^{>β}‖₁`.
    pub coefficient_l1: f64,
}

pub fn bias_bound_gcr(model: &LowOrderModel, clustering: &Clustering, beta: usize) -> GcrBiasBound {
    let agg = cluster_aggregate(model, clustering);
    let n = model.n() as f64;
    let (mut per, mut agg_l1, mut coef_l1) = (0.0, 0.0, 0.0);
    for i in 0..model.n() {
        coef_l1 += model
            .coefficients(i)
            .iter()
            .filter(|(s, _)| s.len() > beta)
            .map(|(_, v)| v.abs())
            .sum::<f64>();
        let mut strata: BTreeMap<usize, f64> = BTreeMap::new();
        for (u, x) in agg.coefficients(i).iter().filter(|(u, _)| u.len() > beta) {
            agg_l1 += x.abs();
            *strata.entry(u.len()).or_insert(0.0) += x;
        }
        per += strata.values().map(|v| v.abs()).sum::<f64>();
    }
    GcrBiasBound {
        per_cardinality: per / n,
        aggregated_l1: agg_l1 / n,
        coefficient_l1: coef_l1 / n,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrdBias {
    pub exact: f64,
    pub bound: f64,
}

/// First-order bias under complete randomization; only full-contact units
/// contribute.
pub fn bias_crd(
    agg: &ClusterAggregatedModel,
    stats: &ClusterStats,
    m: usize,
    k: usize,
    b: f64,
) -> Result<CrdBias> {
    let n = agg.n();
    if stats.n() != n {
        return Err(Error::Input(format!(
            "stats cover {} units, model {n}",
            stats.n()
        )));
    }
    let (mf, kf) = (m as f64, k as f64);
    let mut acc = 0.0;
    for i in 0..n {
        if let Some((u, _)) = agg.coefficients(i).iter().find(|(u, _)| u.len() > 1) {
            return Err(Error::Precondition(format!(
                "unit {i} has a higher-order cluster coefficient on {:?}",
                u.members()
            )));
        }
        if stats.is_full_contact(i) {
            let first: f64 = agg
                .coefficients(i)
                .iter()
                .filter(|(u, _)| u.len() == 1)
                .map(|(_, v)| v)
                .sum();
            acc += kf * agg.get(i, &Subset::empty()) - first;
        }
    }
    let nf = n as f64;
    Ok(CrdBias {
        exact: mf / ((kf * kf + mf) * nf) * acc,
        bound: stats.full_contact_count as f64 / nf * mf * (kf + 2.0) * b / (kf * kf + mf),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub bias_exact: Option<f64>,
    pub bias_bound: Option<f64>,
    /// `(B²/n²) Σ_{i,j} γ_i γ_j · I(dependent)` with γ from `gamma`.
    pub var_bound_pairwise: f64,
    /// Pairwise bound with `γ² ≤ 2 min(...)`; Bernoulli designs only.
    pub var_bound_capped: Option<f64>,
    /// `2B²CNd/n · min(q^{-C}, C^β q^{-β})` for Bernoulli designs,
    /// `B² m C³ N d / (n (k/m)(1-k/m)(m-C))` under complete randomization
    /// when `C < m`.
    pub var_bound_simplified: Option<f64>,
    pub gamma: GammaProvenance,
    /// Whether disjoint-neighborhood pairs were dropped under complete
    /// randomization.
    pub crd_screen: bool,
    pub b: f64,
    pub c_max: usize,
    pub n_max: usize,
    /// Largest in- or out-degree, self-loop included.
    pub d_max: usize,
    pub n: usize,
    pub m: usize,
    pub design: DesignKind,
    pub beta: usize,
}

/// Dependent partners of each unit, ascending, via the cluster → units index.
fn dependent_partners(stats: &ClusterStats) -> Vec<Vec<usize>> {
    let by_cluster = stats.units_by_cluster();
    let mut stamp = vec![usize::MAX; stats.n()];
    stats
        .cluster_nbhd
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let mut out = Vec::new();
            for &c in nb {
                for &j in &by_cluster[c] {
                    if stamp[j] != i {
                        stamp[j] = i;
                        out.push(j);
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}

/// Worst-case variance bounds. Passing `monotone` asserts sign-consistent
/// aggregated coefficients and, under complete randomization, drops pairs
/// with disjoint cluster neighborhoods.
pub fn variance_bound(
    g: &InterferenceGraph,
    stats: &ClusterStats,
    d: &Design,
    beta: usize,
    b: f64,
    source: GammaSource,
    monotone: Option<&ClusterAggregatedModel>,
) -> Result<BoundReport> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Input(format!(
            "outcome bound B must be positive, got {b}"
        )));
    }
    if let Some(agg) = monotone {
        if !agg.is_sign_consistent() {
            return Err(Error::Precondition(
                "monotonicity asserted but the aggregated coefficients have mixed signs".into(),
            ));
        }
    }
    let n = g.n();
    let nf = n as f64;
    let profile = gamma_profile(g, stats, d, beta, source)?;
    let gamma: Vec<f64> = profile
        .gamma_sq
        .iter()
        .map(|v| libm::sqrt(v.max(0.0)))
        .collect();
    let screen = !d.is_bernoulli() && monotone.is_some();
    let partners = if d.is_bernoulli() || screen {
        Some(dependent_partners(stats))
    } else {
        None
    };
    let pair_sum = |weights: &[f64]| -> f64 {
        match &partners {
            Some(ps) => ps
                .iter()
                .enumerate()
                .map(|(i, js)| weights[i] * js.iter().map(|&j| weights[j]).sum::<f64>())
                .sum(),
            None => {
                let s: f64 = weights.iter().sum();
                s * s
            }
        }
    };
    let var_bound_pairwise = b * b / (nf * nf) * pair_sum(&gamma);
    let dstats = degree_stats(g);
    let d_max = dstats
        .d_max
        .max(g.out_degrees().into_iter().max().unwrap_or(0));
    let (c_max, n_max) = (stats.c_max, stats.n_max);
    let (var_bound_capped, var_bound_simplified) = match d.kind() {
        DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => {
            let roots: Vec<f64> = stats
                .cluster_nbhd
                .iter()
                .map(|nb| libm::sqrt(gcr_min_term(nb.len(), beta, p)))
                .collect();
            let capped = 2.0 * b * b / (nf * nf) * pair_sum(&roots);
            let simplified =
                2.0 * b * b * (c_max * n_max * d_max) as f64 / nf * gcr_min_term(c_max, beta, p);
            (Some(capped), Some(simplified))
        }
        DesignKind::CompleteGcr { k } => {
            let (mf, frac) = (d.m() as f64, k as f64 / d.m() as f64);
            let simplified = (c_max < d.m()).then(|| {
                b * b * mf * powi(c_max as f64, 3) * (n_max * d_max) as f64
                    / (nf * frac * (1.0 - frac) * (mf - c_max as f64))
            });
            (None, simplified)
        }
    };
    Ok(BoundReport {
        bias_exact: None,
        bias_bound: None,
        var_bound_pairwise,
        var_bound_capped,
        var_bound_simplified,
        gamma: profile.provenance,
        crd_screen: screen,
        b,
        c_max,
        n_max,
        d_max,
        n,
        m: d.m(),
        design: d.kind(),
        beta,
    })
}
