//! Partitions of units into clusters, cluster neighborhoods, and Louvain.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::subset::intersects;

/// A partition of `0..n` with ids numbered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<usize>,
    m: usize,
}

impl Clustering {
    /// Compacts arbitrary labels; the cluster holding unit 0 becomes 0, the
    /// next unseen label becomes 1, and so on.
    pub fn from_labels<L: Ord + Clone>(labels: &[L]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Input("a clustering needs at least one unit".into()));
        }
        let mut ids: BTreeMap<L, usize> = BTreeMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        Ok(Clustering {
            assignment,
            m: ids.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `C(j)`.
    pub fn cluster_of(&self, j: usize) -> usize {
        self.assignment[j]
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (j, &c) in self.assignment.iter().enumerate() {
            out[c].push(j);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.m];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    /// `C(S)` for a set of units, sorted.
    pub fn image(&self, units: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = units.iter().map(|&j| self.assignment[j]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub fn singleton_clustering(n: usize) -> Result<Clustering> {
    if n == 0 {
        return Err(Error::Input("a clustering needs at least one unit".into()));
    }
    Ok(Clustering {
        assignment: (0..n).collect(),
        m: n,
    })
}

/// Cluster `k` is `{kw, ..., kw + w - 1}`.
pub fn contiguous_cycle_clusters(n: usize, w: usize) -> Result<Clustering> {
    if w == 0 || n == 0 || !n.is_multiple_of(w) {
        return Err(Error::Geometry(format!("width {w} does not divide n={n}")));
    }
    Ok(Clustering {
        assignment: (0..n).map(|j| j / w).collect(),
        m: n / w,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterStats {
    /// Sorted `C(N_i)` per unit.
    pub cluster_nbhd: Vec<Vec<usize>>,
    pub c_max: usize,
    pub n_max: usize,
    pub full_contact_count: usize,
    pub m: usize,
}

impl ClusterStats {
    pub fn n(&self) -> usize {
        self.cluster_nbhd.len()
    }

    /// For each cluster, the units whose cluster neighborhood contains it.
    pub fn units_by_cluster(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (i, nb) in self.cluster_nbhd.iter().enumerate() {
            for &c in nb {
                out[c].push(i);
            }
        }
        out
    }

    pub fn neighborhoods_overlap(&self, i: usize, j: usize) -> bool {
        intersects(&self.cluster_nbhd[i], &self.cluster_nbhd[j])
    }

    pub fn is_full_contact(&self, i: usize) -> bool {
        self.cluster_nbhd[i].len() == self.m
    }
}

pub fn cluster_stats(g: &InterferenceGraph, c: &Clustering) -> Result<ClusterStats> {
    if g.n() != c.n() {
        return Err(Error::Input(format!(
            "clustering covers {} units but the graph has {}",
            c.n(),
            g.n()
        )));
    }
    let cluster_nbhd: Vec<Vec<usize>> = (0..g.n()).map(|i| c.image(g.in_neighbors(i))).collect();
    let m = c.m();
    Ok(ClusterStats {
        c_max: cluster_nbhd.iter().map(Vec::len).max().unwrap_or(0),
        n_max: c.sizes().into_iter().max().unwrap_or(0),
        full_contact_count: cluster_nbhd.iter().filter(|nb| nb.len() == m).count(),
        cluster_nbhd,
        m,
    })
}

/// Weighted undirected graph; `loops[i]` is the internal weight folded into a
/// node, so its strength is the adjacency sum plus `2 * loops[i]`.
struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
}

impl WeightedGraph {
    fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.loops[i]
    }

    fn len(&self) -> usize {
        self.adj.len()
    }
}

fn base_graph(g: &InterferenceGraph) -> WeightedGraph {
    let adj = g
        .undirected_adjacency()
        .into_iter()
        .map(|nb| nb.into_iter().map(|j| (j, 1.0)).collect())
        .collect();
    WeightedGraph {
        adj,
        loops: vec![0.0; g.n()],
    }
}

/// Modularity `(1/2M) Σ_ij [A_ij - γ k_i k_j / 2M] δ(c_i, c_j)` of the
/// symmetrized graph with self-loops ignored; 0 for edgeless graphs.
pub fn modularity(g: &InterferenceGraph, c: &Clustering, resolution: f64) -> f64 {
    let adj = g.undirected_adjacency();
    let two_m: f64 = adj.iter().map(|nb| nb.len() as f64).sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut internal = 0.0;
    let mut tot = vec![0.0; c.m()];
    for (i, nb) in adj.iter().enumerate() {
        tot[c.cluster_of(i)] += nb.len() as f64;
        internal += nb
            .iter()
            .filter(|&&j| c.cluster_of(j) == c.cluster_of(i))
            .count() as f64;
    }
    internal / two_m - resolution * tot.iter().map(|t| (t / two_m) * (t / two_m)).sum::<f64>()
}

/// Local-moving phase. Returns the community of each node and whether any
/// node moved.
fn local_moving(wg: &WeightedGraph, resolution: f64, order: &[usize]) -> (Vec<usize>, bool) {
    let n = wg.len();
    let k: Vec<f64> = (0..n).map(|i| wg.strength(i)).collect();
    let two_m: f64 = k.iter().sum();
    let mut comm: Vec<usize> = (0..n).collect();
    if two_m == 0.0 {
        return (comm, false);
    }
    let mut tot = k.clone();
    let mut link = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &i in order {
            let own = comm[i];
            for &(j, w) in &wg.adj[i] {
                let cj = comm[j];
                if link[cj] == 0.0 && !touched.contains(&cj) {
                    touched.push(cj);
                }
                link[cj] += w;
            }
            tot[own] -= k[i];
            let gain =
                |c: usize, link: &[f64], tot: &[f64]| link[c] - resolution * tot[c] * k[i] / two_m;
            let mut best = own;
            let mut best_gain = gain(own, &link, &tot);
            for &c in &touched {
                let g = gain(c, &link, &tot);
                // strict margin keeps float noise from cycling moves
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += k[i];
            if best != own {
                comm[i] = best;
                moved = true;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            link[own] = 0.0;
            touched.clear();
        }
        moved_any |= moved;
        if !moved {
            break;
        }
    }
    (comm, moved_any)
}

/// Collapses communities into nodes; returns the new graph and the
/// compacted community id of each old node.
fn aggregate(wg: &WeightedGraph, comm: &[usize]) -> (WeightedGraph, Vec<usize>) {
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let compact: Vec<usize> = comm
        .iter()
        .map(|&c| {
            let next = ids.len();
            *ids.entry(c).or_insert(next)
        })
        .collect();
    let n_new = ids.len();
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n_new];
    let mut loops = vec![0.0; n_new];
    for i in 0..wg.len() {
        let ci = compact[i];
        loops[ci] += wg.loops[i];
        for &(j, w) in &wg.adj[i] {
            let cj = compact[j];
            if ci == cj {
                // each internal edge is visited from both ends
                loops[ci] += w / 2.0;
            } else {
                *rows[ci].entry(cj).or_insert(0.0) += w;
            }
        }
    }
    let adj = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    (WeightedGraph { adj, loops }, compact)
}

/// Multi-level Louvain on the symmetrized graph.
///
/// Nodes are visited in ascending order; a nonzero `seed` shuffles the visit
/// order at every level. Output ids are canonicalized by smallest member.
pub fn louvain(g: &InterferenceGraph, resolution: f64, seed: u64) -> Result<Clustering> {
    if g.n() == 0 {
        return Err(Error::Input("louvain needs a nonempty graph".into()));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Input(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wg = base_graph(g);
    let mut node_of: Vec<usize> = (0..g.n()).collect();
    loop {
        let mut order: Vec<usize> = (0..wg.len()).collect();
        if seed != 0 {
            order.shuffle(&mut rng);
        }
        let (comm, moved) = local_moving(&wg, resolution, &order);
        if !moved {
            break;
        }
        let (next, compact) = aggregate(&wg, &comm);
        for v in node_of.iter_mut() {
            *v = compact[*v];
        }
        wg = next;
    }
    Clustering::from_labels(&node_of)
}
