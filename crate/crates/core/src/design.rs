//! Randomized treatment designs over clusters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::{singleton_clustering, ClusterStats, Clustering};
use crate::error::{Error, Result};
use crate::powi;
use crate::subset::{binomial, for_each_combination};

pub const BERNOULLI_SUPPORT_LIMIT: u128 = 1 << 20;
pub const COMPLETE_SUPPORT_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DesignKind {
    BernoulliUnit { p: f64 },
    BernoulliGcr { p: f64 },
    CompleteGcr { k: usize },
}

/// A design together with the clustering it randomizes. Unit designs carry
/// the singleton clustering.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    kind: DesignKind,
    clustering: Clustering,
}

/// One realized assignment; `z[j] == w[C(j)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentDraw {
    pub w: Vec<bool>,
    pub z: Vec<bool>,
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "treatment probability {p} must lie in (0, 1)"
        )))
    }
}

impl Design {
    pub fn bernoulli_unit(n: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Design {
            kind: DesignKind::BernoulliUnit { p },
            clustering: singleton_clustering(n)?,
        })
    }

    pub fn bernoulli_gcr(clustering: Clustering, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Design {
            kind: DesignKind::BernoulliGcr { p },
            clustering,
        })
    }

    pub fn complete_gcr(clustering: Clustering, k: usize) -> Result<Self> {
        let m = clustering.m();
        if k == 0 || k >= m {
            return Err(Error::Input(format!(
                "complete randomization needs 1 <= k <= m-1, got k={k}, m={m}"
            )));
        }
        Ok(Design {
            kind: DesignKind::CompleteGcr { k },
            clustering,
        })
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn m(&self) -> usize {
        self.clustering.m()
    }

    pub fn n(&self) -> usize {
        self.clustering.n()
    }

    pub fn is_bernoulli(&self) -> bool {
        !matches!(self.kind, DesignKind::CompleteGcr { .. })
    }

    /// Marginal treatment probability of one cluster.
    pub fn marginal(&self) -> f64 {
        match self.kind {
            DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => p,
            DesignKind::CompleteGcr { k } => k as f64 / self.m() as f64,
        }
    }

    /// Probability that `s` given distinct clusters are all treated.
    pub fn joint_treated(&self, s: usize) -> f64 {
        match self.kind {
            DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => powi(p, s),
            DesignKind::CompleteGcr { k } => falling_ratio(k, self.m(), s),
        }
    }

    /// Probability that `s` given distinct clusters are all untreated.
    pub fn joint_untreated(&self, s: usize) -> f64 {
        match self.kind {
            DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => powi(1.0 - p, s),
            DesignKind::CompleteGcr { k } => falling_ratio(self.m() - k, self.m(), s),
        }
    }

    pub fn draw_from_clusters(&self, w: Vec<bool>) -> AssignmentDraw {
        let z = self.clustering.assignment().iter().map(|&c| w[c]).collect();
        AssignmentDraw { w, z }
    }

    /// Draw `replicate` of stream family `seed`; independent of call order.
    pub fn sample(&self, seed: u64, replicate: u64) -> AssignmentDraw {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        let m = self.m();
        let w = match self.kind {
            DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => {
                (0..m).map(|_| rng.random_bool(p)).collect()
            }
            DesignKind::CompleteGcr { k } => {
                let mut w = vec![false; m];
                for c in rand::seq::index::sample(&mut rng, m, k) {
                    w[c] = true;
                }
                w
            }
        };
        self.draw_from_clusters(w)
    }

    /// Every cluster assignment with positive probability.
    pub fn enumerate_support(&self) -> Result<Vec<(f64, Vec<bool>)>> {
        let m = self.m();
        match self.kind {
            DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => {
                let size = if m >= 128 { u128::MAX } else { 1u128 << m };
                if size > BERNOULLI_SUPPORT_LIMIT {
                    return Err(Error::Capacity {
                        what: "Bernoulli support",
                        needed: size,
                        limit: BERNOULLI_SUPPORT_LIMIT,
                    });
                }
                Ok((0..size as u64)
                    .map(|mask| {
                        let w: Vec<bool> = (0..m).map(|c| mask >> c & 1 == 1).collect();
                        let t = w.iter().filter(|&&b| b).count();
                        (powi(p, t) * powi(1.0 - p, m - t), w)
                    })
                    .collect())
            }
            DesignKind::CompleteGcr { k } => {
                let size = binomial(m, k);
                if size > COMPLETE_SUPPORT_LIMIT {
                    return Err(Error::Capacity {
                        what: "complete-randomization support",
                        needed: size,
                        limit: COMPLETE_SUPPORT_LIMIT,
                    });
                }
                let prob = 1.0 / size as f64;
                let mut out = Vec::with_capacity(size as usize);
                for_each_combination(m, k, |chosen| {
                    let mut w = vec![false; m];
                    for &c in chosen {
                        w[c] = true;
                    }
                    out.push((prob, w));
                });
                Ok(out)
            }
        }
    }
}

/// `Π_{ℓ<s} (a-ℓ)/(m-ℓ)`, zero once `s > a`.
fn falling_ratio(a: usize, m: usize, s: usize) -> f64 {
    if s > a {
        return 0.0;
    }
    (0..s).map(|l| (a - l) as f64 / (m - l) as f64).product()
}

/// Whether `z_{N_i}` and `z_{N_j}` can be dependent. Always true under
/// complete randomization.
pub fn pair_dependence(d: &Design, stats: &ClusterStats, i: usize, j: usize) -> bool {
    !d.is_bernoulli() || stats.neighborhoods_overlap(i, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{cluster_stats, contiguous_cycle_clusters};
    use crate::graph::cycle_power;

    #[test]
    fn bernoulli_rate_concentrates() {
        let d = Design::bernoulli_gcr(singleton_clustering(5).unwrap(), 0.5).unwrap();
        let reps = 10_000;
        let mut counts = [0usize; 5];
        for r in 0..reps {
            for (c, &t) in d.sample(3, r).w.iter().enumerate() {
                counts[c] += t as usize;
            }
        }
        let tol = 3.0 * (0.25f64 / reps as f64).sqrt();
        for c in counts {
            assert!((c as f64 / reps as f64 - 0.5).abs() < tol);
        }
    }

    #[test]
    fn complete_draws_have_k_treated() {
        let d = Design::complete_gcr(singleton_clustering(5).unwrap(), 2).unwrap();
        for r in 0..200 {
            assert_eq!(d.sample(1, r).w.iter().filter(|&&b| b).count(), 2);
        }
    }

    #[test]
    fn draws_are_cluster_constant_and_reproducible() {
        let d = Design::bernoulli_gcr(contiguous_cycle_clusters(12, 3).unwrap(), 0.3).unwrap();
        let a = d.sample(9, 17);
        assert_eq!(a, d.sample(9, 17));
        for j in 0..12 {
            assert_eq!(a.z[j], a.w[j / 3]);
        }
    }

    #[test]
    fn support_examples() {
        let d = Design::bernoulli_gcr(singleton_clustering(2).unwrap(), 0.5).unwrap();
        let s = d.enumerate_support().unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|(p, _)| *p == 0.25));

        let d = Design::complete_gcr(singleton_clustering(3).unwrap(), 1).unwrap();
        let s = d.enumerate_support().unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|(p, _)| (*p - 1.0 / 3.0).abs() < 1e-15));

        let d = Design::complete_gcr(singleton_clustering(2).unwrap(), 1).unwrap();
        let s = d.enumerate_support().unwrap();
        let e = |f: &dyn Fn(&[bool]) -> f64| s.iter().map(|(p, w)| p * f(w)).sum::<f64>();
        let cov = e(&|w| (w[0] && w[1]) as u8 as f64)
            - e(&|w| w[0] as u8 as f64) * e(&|w| w[1] as u8 as f64);
        assert!((cov + 0.25).abs() < 1e-15);
    }

    #[test]
    fn support_probabilities_sum_to_one() {
        for p in [0.1, 0.37, 0.5] {
            let d = Design::bernoulli_gcr(singleton_clustering(11).unwrap(), p).unwrap();
            let total: f64 = d.enumerate_support().unwrap().iter().map(|(q, _)| q).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let d = Design::complete_gcr(singleton_clustering(12).unwrap(), 5).unwrap();
        let total: f64 = d.enumerate_support().unwrap().iter().map(|(q, _)| q).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_guards() {
        let d = Design::bernoulli_gcr(singleton_clustering(21).unwrap(), 0.5).unwrap();
        assert!(matches!(d.enumerate_support(), Err(Error::Capacity { .. })));
        let d = Design::complete_gcr(singleton_clustering(30).unwrap(), 15).unwrap();
        assert!(matches!(d.enumerate_support(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn invalid_parameters() {
        assert!(Design::bernoulli_unit(3, 1.0).is_err());
        assert!(Design::complete_gcr(singleton_clustering(3).unwrap(), 3).is_err());
    }

    #[test]
    fn dependence_examples() {
        let g = cycle_power(840, 3).unwrap();
        let c = contiguous_cycle_clusters(840, 7).unwrap();
        let stats = cluster_stats(&g, &c).unwrap();
        let gcr = Design::bernoulli_gcr(c.clone(), 0.5).unwrap();
        assert!(!pair_dependence(&gcr, &stats, 0, 420));
        assert!(pair_dependence(&gcr, &stats, 5, 5));
        let crd = Design::complete_gcr(c, 3).unwrap();
        assert!(pair_dependence(&crd, &stats, 0, 420));
    }

    #[test]
    fn disjoint_neighborhoods_factorize() {
        // units 1 and 4 on a 6-cycle with singleton clusters: N_1 = {0,1,2}, N_4 = {3,4,5}
        let g = cycle_power(6, 1).unwrap();
        let d = Design::bernoulli_unit(6, 0.3).unwrap();
        let support = d.enumerate_support().unwrap();
        let key =
            |z: &[bool], nb: &[usize]| nb.iter().fold(0usize, |acc, &j| acc * 2 + z[j] as usize);
        let (a, b) = (g.in_neighbors(1), g.in_neighbors(4));
        let mut joint = [[0.0f64; 8]; 8];
        for (p, w) in &support {
            let z = &d.draw_from_clusters(w.clone()).z;
            joint[key(z, a)][key(z, b)] += p;
        }
        for x in 0..8 {
            for y in 0..8 {
                let px: f64 = joint[x].iter().sum();
                let py: f64 = (0..8).map(|r| joint[r][y]).sum();
                assert!((joint[x][y] - px * py).abs() < 1e-15);
            }
        }
    }
}
