//! Directed interference graphs stored as sorted in-neighborhoods.
//!
//! Every unit is its own in-neighbor, so `N_i` always contains `i`.

use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceGraph {
    in_neighbors: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeStats {
    pub d_max: usize,
    pub mean_degree: f64,
}

impl InterferenceGraph {
    /// Builds a graph from arbitrary in-neighbor lists; self-loops are added
    /// and duplicates removed.
    pub fn from_neighborhoods(mut in_neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = in_neighbors.len();
        for (i, nb) in in_neighbors.iter_mut().enumerate() {
            if let Some(&bad) = nb.iter().find(|&&j| j >= n) {
                return Err(Error::InputAt {
                    index: i,
                    reason: format!("neighbor {bad} out of range for n={n}"),
                });
            }
            nb.push(i);
            nb.sort_unstable();
            nb.dedup();
        }
        Ok(InterferenceGraph { in_neighbors })
    }

    pub fn n(&self) -> usize {
        self.in_neighbors.len()
    }

    /// The sorted in-neighborhood `N_i`.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.in_neighbors[i].len()
    }

    /// Out-degrees counting the self-loop.
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut out = alloc::vec![0usize; self.n()];
        for nb in &self.in_neighbors {
            for &j in nb {
                out[j] += 1;
            }
        }
        out
    }

    /// All `(src, dst)` pairs including self-loops, ordered by `dst` then `src`.
    pub fn to_edge_list(&self) -> Vec<(usize, usize)> {
        self.in_neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&j| (j, i)))
            .collect()
    }

    /// Symmetrized neighbor lists without self-loops.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.n()];
        for (i, nb) in self.in_neighbors.iter().enumerate() {
            for &j in nb {
                if j != i {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Edge `(j, i)` makes `j` an in-neighbor of `i`.
pub fn from_edge_list(edges: &[(usize, usize)], n: usize) -> Result<InterferenceGraph> {
    let mut nb: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (idx, &(src, dst)) in edges.iter().enumerate() {
        if src >= n || dst >= n {
            return Err(Error::InputAt {
                index: idx,
                reason: format!("edge ({src}, {dst}) has an endpoint outside [0, {n})"),
            });
        }
        nb[dst].push(src);
    }
    InterferenceGraph::from_neighborhoods(nb)
}

/// The r-th power of the n-cycle: `N_i = {i-r, ..., i+r} mod n`.
pub fn cycle_power(n: usize, r: usize) -> Result<InterferenceGraph> {
    if n <= 2 * r {
        return Err(Error::Geometry(format!(
            "cycle power needs n > 2r, got n={n}, r={r}"
        )));
    }
    let nb = (0..n)
        .map(|i| (0..=2 * r).map(|off| (i + n - r + off) % n).collect())
        .collect();
    InterferenceGraph::from_neighborhoods(nb)
}

/// Undirected stochastic block model with contiguous equal-size blocks.
///
/// Each unordered pair is drawn once, in row-major order over `i < j`, from a
/// single stream of `seed`.
pub fn sbm_sample(
    n: usize,
    num_blocks: usize,
    pi_in: f64,
    pi_out: f64,
    seed: u64,
) -> Result<InterferenceGraph> {
    for (name, p) in [("pi_in", pi_in), ("pi_out", pi_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Input(format!("{name}={p} is not a probability")));
        }
    }
    if num_blocks == 0 || !n.is_multiple_of(num_blocks) {
        return Err(Error::Geometry(format!(
            "{num_blocks} blocks do not evenly divide n={n}"
        )));
    }
    let size = n / num_blocks;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nb: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let p = if i / size == j / size { pi_in } else { pi_out };
            if rng.random_bool(p) {
                nb[i].push(j);
                nb[j].push(i);
            }
        }
    }
    InterferenceGraph::from_neighborhoods(nb)
}

pub fn degree_stats(g: &InterferenceGraph) -> DegreeStats {
    let n = g.n();
    let total: usize = (0..n).map(|i| g.degree(i)).sum();
    DegreeStats {
        d_max: (0..n).map(|i| g.degree(i)).max().unwrap_or(0),
        mean_degree: if n == 0 { 0.0 } else { total as f64 / n as f64 },
    }
}
