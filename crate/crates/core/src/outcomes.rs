//! Low-order potential-outcome models.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::str::FromStr;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::{degree_stats, InterferenceGraph};
use crate::subset::{binomial, for_each_combination, Subset};

/// Sparse coefficients `c_{i,S}` with `S ⊆ N_i`, `|S| ≤ β*`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowOrderModel {
    beta_star: usize,
    coeffs: Vec<BTreeMap<Subset, f64>>,
}

impl LowOrderModel {
    /// Validates every key against `g` and inserts a zero baseline where the
    /// empty set is missing.
    pub fn new(
        g: &InterferenceGraph,
        beta_star: usize,
        mut coeffs: Vec<BTreeMap<Subset, f64>>,
    ) -> Result<Self> {
        if coeffs.len() != g.n() {
            return Err(Error::Input(format!(
                "model has {} units but the graph has {}",
                coeffs.len(),
                g.n()
            )));
        }
        for (i, map) in coeffs.iter_mut().enumerate() {
            let nb = g.in_neighbors(i);
            for (s, v) in map.iter() {
                if s.len() > beta_star {
                    return Err(Error::InputAt {
                        index: i,
                        reason: format!("subset {:?} exceeds order {beta_star}", s.members()),
                    });
                }
                if !s.members().iter().all(|j| nb.binary_search(j).is_ok()) {
                    return Err(Error::InputAt {
                        index: i,
                        reason: format!("subset {:?} is not inside N_{i}", s.members()),
                    });
                }
                if !v.is_finite() {
                    return Err(Error::InputAt {
                        index: i,
                        reason: format!("coefficient {v} is not finite"),
                    });
                }
            }
            map.entry(Subset::empty()).or_insert(0.0);
        }
        Ok(LowOrderModel { beta_star, coeffs })
    }

    pub fn beta_star(&self) -> usize {
        self.beta_star
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self, i: usize) -> &BTreeMap<Subset, f64> {
        &self.coeffs[i]
    }

    /// `c_{i,∅} = Y_i(0)`.
    pub fn baseline(&self, i: usize) -> f64 {
        self.coeffs[i][&Subset::empty()]
    }

    /// Sum of nonempty coefficients of unit `i`.
    pub fn unit_effect(&self, i: usize) -> f64 {
        self.coeffs[i]
            .iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|(_, v)| v)
            .sum()
    }
}

pub fn evaluate(model: &LowOrderModel, z: &[bool]) -> Result<Vec<f64>> {
    if z.len() != model.n() {
        return Err(Error::Input(format!(
            "treatment vector has length {} but the model has {} units",
            z.len(),
            model.n()
        )));
    }
    Ok(model
        .coeffs
        .iter()
        .map(|map| {
            map.iter()
                .filter(|(s, _)| s.members().iter().all(|&j| z[j]))
                .map(|(_, v)| v)
                .sum()
        })
        .collect())
}

pub fn true_tte(model: &LowOrderModel) -> f64 {
    let n = model.n();
    (0..n).map(|i| model.unit_effect(i)).sum::<f64>() / n as f64
}

/// Baseline 1; each k-subset of `N_i` gets `binom(d_i, k)^{-1} 2^{-k}`.
pub fn gen_cycle_model(g: &InterferenceGraph, beta_star: usize) -> Result<LowOrderModel> {
    let mut coeffs = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let nb = g.in_neighbors(i);
        let d = nb.len();
        if d < beta_star {
            return Err(Error::Precondition(format!(
                "unit {i} has degree {d} < beta_star {beta_star}"
            )));
        }
        let mut map = BTreeMap::new();
        map.insert(Subset::empty(), 1.0);
        for k in 1..=beta_star {
            let v = 1.0 / (binomial(d, k) as f64 * libm::pow(2.0, k as f64));
            for_each_combination(d, k, |pos| {
                map.insert(Subset::from_sorted(pos.iter().map(|&p| nb[p]).collect()), v);
            });
        }
        coeffs.push(map);
    }
    LowOrderModel::new(g, beta_star, coeffs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedModel {
    Null,
    Weak,
    Strong,
}

impl FromStr for NamedModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null" => Ok(NamedModel::Null),
            "weak" => Ok(NamedModel::Weak),
            "strong" => Ok(NamedModel::Strong),
            other => Err(Error::Input(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Standard deviation of the baseline draw before degree scaling.
pub const BASELINE_SD: f64 = 0.1;

/// First-order models with baseline `Normal(0.5, 0.1) · d_i / d_max`.
///
/// Unit `i` draws from stream `i` of `seed`. An isolated unit under `Weak`
/// carries its whole unit effect on itself so that `TTE_i = 1` still holds.
pub fn gen_named_model(
    g: &InterferenceGraph,
    kind: NamedModel,
    seed: u64,
) -> Result<LowOrderModel> {
    let d_max = degree_stats(g).d_max as f64;
    let normal = Normal::new(0.5, BASELINE_SD).expect("fixed parameters are valid");
    let mut coeffs = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let nb = g.in_neighbors(i);
        let d = nb.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut map = BTreeMap::new();
        map.insert(Subset::empty(), normal.sample(&mut rng) * d / d_max);
        for &j in nb {
            let v = match kind {
                NamedModel::Null => 0.0,
                NamedModel::Weak if nb.len() == 1 => 1.0,
                NamedModel::Weak if j == i => 0.5,
                NamedModel::Weak => 1.0 / (2.0 * (d - 1.0)),
                NamedModel::Strong if j == i => d / 2.0,
                NamedModel::Strong => 0.5,
            };
            map.insert(Subset::from_sorted(alloc::vec![j]), v);
        }
        coeffs.push(map);
    }
    LowOrderModel::new(g, 1, coeffs)
}

/// `x_{i,U} = Σ_{S : C(S) = U} c_{i,S}` per unit.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterAggregatedModel {
    x: Vec<BTreeMap<Subset, f64>>,
}

impl ClusterAggregatedModel {
    pub fn from_maps(x: Vec<BTreeMap<Subset, f64>>) -> Self {
        ClusterAggregatedModel { x }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn coefficients(&self, i: usize) -> &BTreeMap<Subset, f64> {
        &self.x[i]
    }

    /// Value at `U`, zero when absent.
    pub fn get(&self, i: usize, u: &Subset) -> f64 {
        self.x[i].get(u).copied().unwrap_or(0.0)
    }

    /// True when every nonempty coefficient is `>= 0`, or every one is `<= 0`.
    pub fn is_sign_consistent(&self) -> bool {
        let vals = || {
            self.x
                .iter()
                .flat_map(|m| m.iter().filter(|(u, _)| !u.is_empty()).map(|(_, v)| *v))
        };
        vals().all(|v| v >= 0.0) || vals().all(|v| v <= 0.0)
    }
}

pub fn cluster_aggregate(model: &LowOrderModel, c: &Clustering) -> ClusterAggregatedModel {
    let x = model
        .coeffs
        .iter()
        .map(|map| {
            let mut agg = BTreeMap::new();
            for (s, v) in map {
                *agg.entry(s.map(|j| c.cluster_of(j))).or_insert(0.0) += v;
            }
            agg
        })
        .collect();
    ClusterAggregatedModel { x }
}

/// `B = max_i max_z |Y_i(z)|`, bounded through multilinearity: `Y_i` lies in
/// `[c_∅ + Σ negative, c_∅ + Σ positive]`. Both ends are attained when the
/// nonempty coefficients of a unit share a sign.
pub fn outcome_bound(model: &LowOrderModel) -> f64 {
    model
        .coeffs
        .iter()
        .map(|map| {
            let base = map[&Subset::empty()];
            let (mut pos, mut neg) = (0.0, 0.0);
            for (s, &v) in map {
                if s.is_empty() {
                    continue;
                }
                if v > 0.0 {
                    pos += v;
                } else {
                    neg += v;
                }
            }
            libm::fabs(base + pos).max(libm::fabs(base + neg))
        })
        .fold(0.0, f64::max)
}
