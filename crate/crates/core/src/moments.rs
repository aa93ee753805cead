//! Treated-subset indices and design-moment matrices with their
//! pseudoinverses.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::clustering::Clustering;
use crate::design::{Design, DesignKind};
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::powi;
use crate::subset::{binomial, for_each_combination, union_len, Subset};

pub const SUBSET_LIMIT: u128 = 1_000_000;

/// All subsets of a sorted ground set with size at most `beta`, in canonical
/// order. Position 0 is the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetIndex {
    ground: Vec<usize>,
    beta: usize,
    subsets: Vec<Subset>,
}

impl SubsetIndex {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    pub fn get(&self, pos: usize) -> &Subset {
        &self.subsets[pos]
    }

    pub fn position(&self, s: &Subset) -> Option<usize> {
        self.subsets.binary_search(s).ok()
    }

    /// `ψ`: 0 at the empty set, 1 elsewhere.
    pub fn psi(&self) -> DVector<f64> {
        DVector::from_fn(self.len(), |r, _| if r == 0 { 0.0 } else { 1.0 })
    }

    /// Indicator vector `ṽ` of fully treated subsets under `treated`.
    pub fn indicators(&self, treated: impl Fn(usize) -> bool) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.subsets
                .iter()
                .map(|s| s.members().iter().all(|&x| treated(x)) as u8 as f64),
        )
    }
}

pub fn enumerate_subsets(ground: &[usize], beta: usize) -> Result<SubsetIndex> {
    if beta == 0 {
        return Err(Error::Input(
            "interaction order beta must be at least 1".into(),
        ));
    }
    let mut ground = ground.to_vec();
    ground.sort_unstable();
    ground.dedup();
    let top = beta.min(ground.len());
    let size = (0..=top).fold(0u128, |acc, k| {
        acc.saturating_add(binomial(ground.len(), k))
    });
    if size > SUBSET_LIMIT {
        return Err(Error::Capacity {
            what: "subset index",
            needed: size,
            limit: SUBSET_LIMIT,
        });
    }
    let mut subsets = Vec::with_capacity(size as usize);
    for k in 0..=top {
        for_each_combination(ground.len(), k, |pos| {
            subsets.push(Subset::from_sorted(
                pos.iter().map(|&p| ground[p]).collect(),
            ));
        });
    }
    Ok(SubsetIndex {
        ground,
        beta,
        subsets,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Numeric,
    MonteCarlo { samples: usize },
    SupportWeighted,
}

/// `M = E[ṽ ṽᵀ]` over a subset index, with `M^†`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMoments {
    pub index: SubsetIndex,
    pub matrix: DMatrix<f64>,
    pub pinv: DMatrix<f64>,
    pub provenance: Provenance,
}

impl DesignMoments {
    /// `M^† ψ`, the per-subset estimator weights.
    pub fn pinv_psi(&self) -> DVector<f64> {
        &self.pinv * self.index.psi()
    }

    /// Largest relative Frobenius residual over the four Penrose conditions.
    pub fn penrose_residual(&self) -> f64 {
        penrose_residual(&self.matrix, &self.pinv)
    }
}

pub fn penrose_residual(a: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let rel = |lhs: DMatrix<f64>, rhs: &DMatrix<f64>| (lhs - rhs).norm() / rhs.norm().max(1.0);
    let ax = a * x;
    let xa = x * a;
    [
        rel(&ax * a, a),
        rel(&xa * x, x),
        rel(ax.transpose(), &ax),
        rel(xa.transpose(), &xa),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// `M[U, V] = joint(|U ∪ V|)` for exchangeable designs.
pub fn moment_matrix(index: &SubsetIndex, joint: impl Fn(usize) -> f64) -> DMatrix<f64> {
    let s = index.subsets();
    DMatrix::from_fn(index.len(), index.len(), |r, c| {
        joint(union_len(s[r].members(), s[c].members()))
    })
}

/// Closed-form `M^†` for Bernoulli(p) clusters:
/// `(-1/p)^{|V|+|W|} Σ_{X ⊇ V∪W, |X| ≤ β} (p/(1-p))^{|X|}`.
pub fn bern_pinv_closed(index: &SubsetIndex, p: f64) -> DMatrix<f64> {
    let c = index.ground().len();
    let beta = index.beta().min(c);
    let ratio = p / (1.0 - p);
    // tail[u] sums over supersets of a fixed u-set inside the index
    let tail: Vec<f64> = (0..=2 * beta)
        .map(|u| {
            if u > beta {
                return 0.0;
            }
            (u..=beta)
                .map(|j| binomial(c - u, j - u) as f64 * powi(ratio, j))
                .sum()
        })
        .collect();
    let s = index.subsets();
    let neg_inv = -1.0 / p;
    DMatrix::from_fn(index.len(), index.len(), |r, col| {
        let (a, b) = (s[r].members(), s[col].members());
        powi(neg_inv, a.len() + b.len()) * tail[union_len(a, b)]
    })
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

pub fn bern_cluster_moments(index: &SubsetIndex, p: f64) -> Result<DesignMoments> {
    check_p(p)?;
    Ok(DesignMoments {
        matrix: moment_matrix(index, |u| powi(p, u)),
        pinv: bern_pinv_closed(index, p),
        index: index.clone(),
        provenance: Provenance::Analytic,
    })
}

/// Probability that `s` given clusters are all treated when `k` of `m` are.
pub fn crd_joint(m: usize, k: usize, s: usize) -> f64 {
    if s > k {
        return 0.0;
    }
    (0..s).map(|l| (k - l) as f64 / (m - l) as f64).product()
}

/// Closed-form first-order `M^†` under complete randomization with
/// `c = |C(N_i)|` neighborhood clusters.
pub fn crd_beta1_pinv(c: usize, m: usize, k: usize) -> DMatrix<f64> {
    let (mf, kf, cf) = (m as f64, k as f64, c as f64);
    if c < m {
        let f = mf * (mf - 1.0) / (kf * (mf - kf) * (mf - cf));
        DMatrix::from_fn(c + 1, c + 1, |r, col| match (r, col) {
            (0, 0) => f * kf * (mf + cf * (kf - 1.0) - kf) / (mf - 1.0),
            (0, _) | (_, 0) => -f * kf,
            (a, b) if a == b => f * (mf - (cf - 1.0)),
            _ => f,
        })
    } else {
        let g = mf / (kf * (mf - kf) * (kf * kf + mf) * (kf * kf + mf));
        let k2 = kf * kf;
        let star = (mf - 2.0) * k2 * k2
            + k2 * kf
            + 2.0 * (mf - 1.0) * (mf - 1.0) * k2
            + mf * (mf - 1.0) * (mf - 1.0);
        let diamond = -k2 * k2 + k2 * kf - 2.0 * (mf - 1.0) * k2 - mf * (mf - 1.0);
        DMatrix::from_fn(c + 1, c + 1, |r, col| match (r, col) {
            (0, 0) => g * mf * kf * (mf - kf),
            (0, _) | (_, 0) => g * k2 * (mf - kf),
            (a, b) if a == b => g * star,
            _ => g * diamond,
        })
    }
}

/// Hypergeometric moments; closed-form pseudoinverse at `β = 1`, numeric
/// otherwise.
pub fn crd_cluster_moments(index: &SubsetIndex, m: usize, k: usize) -> Result<DesignMoments> {
    if k == 0 || k >= m {
        return Err(Error::Input(format!(
            "complete randomization needs 1 <= k <= m-1, got k={k}, m={m}"
        )));
    }
    let c = index.ground().len();
    if index.ground().iter().any(|&x| x >= m) {
        return Err(Error::Input(format!(
            "index names a cluster outside [0, {m})"
        )));
    }
    let matrix = moment_matrix(index, |u| crd_joint(m, k, u));
    let (pinv, provenance) = if index.beta() == 1 {
        (crd_beta1_pinv(c, m, k), Provenance::Analytic)
    } else {
        (numeric_pinv(&matrix, None)?, Provenance::Numeric)
    };
    Ok(DesignMoments {
        index: index.clone(),
        matrix,
        pinv,
        provenance,
    })
}

/// `k^c (m-k)^c (m-c) / (m^{c+1} (m-1)^c)`.
pub fn crd_determinant(m: usize, k: usize, c_size: usize) -> f64 {
    let (mf, kf) = (m as f64, k as f64);
    powi(kf / mf, c_size) * powi((mf - kf) / (mf - 1.0), c_size) * (mf - c_size as f64) / mf
}

/// Moore–Penrose pseudoinverse. Symmetric input goes through a symmetric
/// eigendecomposition, anything else through SVD. Spectral values with
/// magnitude at or below `tol · max|λ| · dim` are dropped; `tol` defaults to
/// `2^-52`.
pub fn numeric_pinv(mat: &DMatrix<f64>, tol: Option<f64>) -> Result<DMatrix<f64>> {
    if !mat.is_square() {
        return Err(Error::Input(format!(
            "pseudoinverse expects a square matrix, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let dim = mat.nrows();
    if dim == 0 {
        return Ok(mat.clone());
    }
    let tol = tol.unwrap_or(f64::EPSILON);
    let mut out = DMatrix::zeros(dim, dim);
    if mat == &mat.transpose() {
        // nalgebra's SVD can lose digits on clustered singular values
        let eig = mat.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let cutoff = tol * top * dim as f64;
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda.abs() > cutoff {
                let v = eig.eigenvectors.column(k);
                out += (v * v.transpose()) / lambda;
            }
        }
        return Ok(out);
    }
    let svd = mat.clone().svd(true, true);
    let cutoff = tol * svd.singular_values.max() * dim as f64;
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    for (s_idx, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            out += (vt.row(s_idx).transpose() * u.column(s_idx).transpose()) / s;
        }
    }
    Ok(out)
}

/// Cluster-level index `C_i^β` for unit `i`.
pub fn unit_cluster_index(
    g: &InterferenceGraph,
    c: &Clustering,
    i: usize,
    beta: usize,
) -> Result<SubsetIndex> {
    enumerate_subsets(&c.image(g.in_neighbors(i)), beta)
}

/// Analytic cluster-level moments for unit-neighborhood index `index`.
pub fn design_moments(d: &Design, index: &SubsetIndex) -> Result<DesignMoments> {
    match d.kind() {
        DesignKind::BernoulliUnit { p } | DesignKind::BernoulliGcr { p } => {
            bern_cluster_moments(index, p)
        }
        DesignKind::CompleteGcr { k } => crd_cluster_moments(index, d.m(), k),
    }
}

fn accumulate_outer(index: &SubsetIndex, w: &[bool], weight: f64, acc: &mut DMatrix<f64>) {
    let hits: Vec<usize> = index
        .subsets()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.members().iter().all(|&x| w[x]))
        .map(|(pos, _)| pos)
        .collect();
    for &a in &hits {
        for &b in &hits {
            acc[(a, b)] += weight;
        }
    }
}

/// Sample means of `ṽ ṽᵀ` over draws `0..samples` of `seed`, averaged with
/// the transpose and pseudoinverted numerically.
pub fn monte_carlo_moments(
    d: &Design,
    g: &InterferenceGraph,
    i: usize,
    beta: usize,
    samples: usize,
    seed: u64,
) -> Result<DesignMoments> {
    monte_carlo_moments_with_tol(d, g, i, beta, samples, seed, None)
}

pub fn monte_carlo_moments_with_tol(
    d: &Design,
    g: &InterferenceGraph,
    i: usize,
    beta: usize,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<DesignMoments> {
    if samples == 0 {
        return Err(Error::Input(
            "Monte Carlo moments need at least one sample".into(),
        ));
    }
    let index = unit_cluster_index(g, d.clustering(), i, beta)?;
    let l = index.len();
    // integer counts keep the accumulation order-independent
    let mut counts = DMatrix::<f64>::zeros(l, l);
    for r in 0..samples {
        accumulate_outer(&index, &d.sample(seed, r as u64).w, 1.0, &mut counts);
    }
    let raw = counts / samples as f64;
    let matrix = (&raw + raw.transpose()) * 0.5;
    let pinv = numeric_pinv(&matrix, tol)?;
    Ok(DesignMoments {
        index,
        matrix,
        pinv,
        provenance: Provenance::MonteCarlo { samples },
    })
}

/// The exact limit of [`monte_carlo_moments`]: support probabilities in place
/// of sample frequencies.
pub fn support_weighted_moments(
    d: &Design,
    g: &InterferenceGraph,
    i: usize,
    beta: usize,
) -> Result<DesignMoments> {
    let index = unit_cluster_index(g, d.clustering(), i, beta)?;
    let l = index.len();
    let mut acc = DMatrix::<f64>::zeros(l, l);
    for (prob, w) in d.enumerate_support()? {
        accumulate_outer(&index, &w, prob, &mut acc);
    }
    let matrix = (&acc + acc.transpose()) * 0.5;
    let pinv = numeric_pinv(&matrix, None)?;
    Ok(DesignMoments {
        index,
        matrix,
        pinv,
        provenance: Provenance::SupportWeighted,
    })
}

/// The map `S ↦ C(S)` from `S_i^β` onto `C_i^β` and its block heights.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLift {
    pub cluster_index: SubsetIndex,
    pub unit_index: SubsetIndex,
    /// Position in `cluster_index` of `C(S)` for each position in `unit_index`.
    pub unit_to_cluster: Vec<usize>,
    /// `M_i^β(U)` from the composition sum, per position in `cluster_index`.
    pub heights: Vec<usize>,
}

impl BlockLift {
    /// Heights by direct counting of preimages.
    pub fn counted_heights(&self) -> Vec<usize> {
        let mut h = vec![0; self.cluster_index.len()];
        for &u in &self.unit_to_cluster {
            h[u] += 1;
        }
        h
    }

    /// The 0/1 matrix `D_i` with `D[S, U] = 1` iff `C(S) = U`.
    pub fn lift_matrix(&self) -> DMatrix<f64> {
        let mut dm = DMatrix::zeros(self.unit_index.len(), self.cluster_index.len());
        for (s, &u) in self.unit_to_cluster.iter().enumerate() {
            dm[(s, u)] = 1.0;
        }
        dm
    }

    /// Unit-level pseudoinverse `[M^†]_{C(S),C(T)} / (M(C(S)) M(C(T)))`.
    pub fn lift_pinv(&self, cluster_pinv: &DMatrix<f64>) -> DMatrix<f64> {
        let map = &self.unit_to_cluster;
        DMatrix::from_fn(map.len(), map.len(), |s, t| {
            let (a, b) = (map[s], map[t]);
            cluster_pinv[(a, b)] / (self.heights[a] * self.heights[b]) as f64
        })
    }
}

pub fn block_lift(
    g: &InterferenceGraph,
    c: &Clustering,
    i: usize,
    beta: usize,
) -> Result<BlockLift> {
    let nb = g.in_neighbors(i);
    let unit_index = enumerate_subsets(nb, beta)?;
    let cluster_index = unit_cluster_index(g, c, i, beta)?;
    let unit_to_cluster = unit_index
        .subsets()
        .iter()
        .map(|s| {
            cluster_index
                .position(&s.map(|j| c.cluster_of(j)))
                .expect("|C(S)| <= |S| <= beta")
        })
        .collect();
    let heights = cluster_index
        .subsets()
        .iter()
        .map(|u| {
            // compositions a_k >= 1 with Σ a_k <= β, weighted by Π binom(|C_k ∩ N_i|, a_k)
            let mut ways = vec![0u128; beta + 1];
            ways[0] = 1;
            for &cl in u.members() {
                let size = nb.iter().filter(|&&j| c.cluster_of(j) == cl).count();
                let mut next = vec![0u128; beta + 1];
                for (s, &w) in ways.iter().enumerate() {
                    for a in 1..=beta - s {
                        next[s + a] += w * binomial(size, a);
                    }
                }
                ways = next;
            }
            ways.iter().sum::<u128>() as usize
        })
        .collect();
    Ok(BlockLift {
        cluster_index,
        unit_index,
        unit_to_cluster,
        heights,
    })
}
