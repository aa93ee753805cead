//! Seeded random small instances for oracle checks.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::Clustering;
use crate::error::Result;
use crate::graph::InterferenceGraph;
use crate::outcomes::LowOrderModel;
use crate::subset::{for_each_combination, Subset};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceShape {
    pub min_units: usize,
    pub max_units: usize,
    /// Extra in-neighbors per unit beyond the self-loop.
    pub max_extra_neighbors: usize,
    /// Upper bound on the number of clusters; at least two are produced.
    pub max_clusters: usize,
    pub beta_star: usize,
    /// All nonempty coefficients nonnegative.
    pub monotone: bool,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            min_units: 3,
            max_units: 12,
            max_extra_neighbors: 2,
            max_clusters: 8,
            beta_star: 2,
            monotone: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: InterferenceGraph,
    pub model: LowOrderModel,
    pub clustering: Clustering,
}

/// Every subset of `N_i` up to size `beta_star` gets a coefficient; values are
/// uniform on `[-1, 1]`, or `[0, 1]` when monotone.
pub fn random_instance(shape: InstanceShape, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(shape.min_units.max(2)..=shape.max_units.max(shape.min_units).max(2));
    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let extra = rng.random_range(0..=shape.max_extra_neighbors.min(n - 1));
            (0..extra).map(|_| rng.random_range(0..n)).collect()
        })
        .collect();
    let graph = InterferenceGraph::from_neighborhoods(neighborhoods)?;
    let m_target = rng.random_range(2..=shape.max_clusters.clamp(2, n));
    let labels: Vec<usize> = (0..n)
        .map(|j| {
            if j < 2 {
                j
            } else {
                rng.random_range(0..m_target)
            }
        })
        .collect();
    let clustering = Clustering::from_labels(&labels)?;
    let lo = if shape.monotone { 0.0 } else { -1.0 };
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let nb = graph.in_neighbors(i);
        let mut map = BTreeMap::new();
        map.insert(Subset::empty(), rng.random_range(-1.0..1.0));
        for size in 1..=shape.beta_star.min(nb.len()) {
            let mut picks = Vec::new();
            for_each_combination(nb.len(), size, |idx| {
                picks.push(Subset::new(idx.iter().map(|&x| nb[x]).collect()))
            });
            for s in picks {
                map.insert(s, rng.random_range(lo..1.0));
            }
        }
        coeffs.push(map);
    }
    let model = LowOrderModel::new(&graph, shape.beta_star, coeffs)?;
    Ok(Instance {
        graph,
        model,
        clustering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_is_respected() {
        for seed in 0..20 {
            let inst = random_instance(InstanceShape::default(), seed).unwrap();
            let n = inst.graph.n();
            assert!((3..=12).contains(&n));
            assert!(inst.clustering.m() >= 2 && inst.clustering.m() <= 8);
            assert!((0..n).all(|i| inst.graph.degree(i) <= 3));
        }
    }

    #[test]
    fn seeded() {
        let a = random_instance(InstanceShape::default(), 5).unwrap();
        let b = random_instance(InstanceShape::default(), 5).unwrap();
        assert_eq!(a.model, b.model);
    }
}
