//! Random k-uniform factor graphs and their combinatorics.
//!
//! A [`FactorGraph`] is the bipartite structure behind a k-QSAT instance:
//! `n_vars` variable nodes (qubits) and an ordered list of clauses, each a
//! k-subset of variables. The order of variables *inside* a clause is
//! significant: position `j` of the clause is bit `j` of the projector
//! amplitude index (most significant first).

mod matching;
mod peel;
mod thresholds;

pub use matching::{
    count_dimer_coverings, count_dimer_coverings_with_budget, hall_violator, max_matching,
    DimerCovering, HallViolator, Matching, DEFAULT_DIMER_BUDGET,
};
pub(crate) use matching::hall_violator_from;
pub use peel::{leaf_removal, leaf_removal_with_order, CoreResult, LeafOrder};
pub use thresholds::{
    alpha_dc_reference, alpha_lr, alpha_lr_gnp, core_fraction, estimate_thresholds,
    leaf_removal_potential, ThresholdRow,
};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorGraph {
    pub k: usize,
    pub n_vars: usize,
    pub clauses: Vec<Vec<usize>>,
}

impl FactorGraph {
    /// Validating constructor.
    pub fn new(k: usize, n_vars: usize, clauses: Vec<Vec<usize>>) -> Result<Self> {
        if k < 1 {
            return invalid("clause arity must be positive");
        }
        for (c, vars) in clauses.iter().enumerate() {
            if vars.len() != k {
                return invalid(format!("clause {c} has {} variables, expected {k}", vars.len()));
            }
            for (j, &v) in vars.iter().enumerate() {
                if v >= n_vars {
                    return invalid(format!("clause {c} references variable {v} >= {n_vars}"));
                }
                if vars[..j].contains(&v) {
                    return invalid(format!("clause {c} repeats variable {v}"));
                }
            }
        }
        Ok(Self { k, n_vars, clauses })
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Clause indices incident to each variable.
    pub fn var_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vars];
        for (c, vars) in self.clauses.iter().enumerate() {
            for &v in vars {
                adj[v].push(c);
            }
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vars];
        for vars in &self.clauses {
            for &v in vars {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Union of the variables of the given clauses, sorted.
    pub fn neighborhood(&self, clauses: &[usize]) -> Vec<usize> {
        let mut vars: Vec<usize> = clauses.iter().flat_map(|&c| self.clauses[c].iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Sub-graph on a clause subset, with variables relabelled densely.
    /// Returns the graph and the map from new variable index to old.
    pub fn restrict(&self, clauses: &[usize]) -> (FactorGraph, Vec<usize>) {
        let vars = self.neighborhood(clauses);
        let mut new_index = vec![usize::MAX; self.n_vars];
        for (i, &v) in vars.iter().enumerate() {
            new_index[v] = i;
        }
        let new_clauses = clauses
            .iter()
            .map(|&c| self.clauses[c].iter().map(|&v| new_index[v]).collect())
            .collect();
        (FactorGraph { k: self.k, n_vars: vars.len(), clauses: new_clauses }, vars)
    }

    /// Order-independent 64-bit fingerprint of the clause supports.
    pub fn fingerprint(&self) -> u64 {
        let mut supports: Vec<Vec<usize>> = self
            .clauses
            .iter()
            .map(|c| {
                let mut s = c.clone();
                s.sort_unstable();
                s
            })
            .collect();
        supports.sort();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ (self.n_vars as u64);
        for s in supports {
            for v in s {
                h = (h ^ v as u64).wrapping_mul(0x0000_0100_0000_01B3);
            }
            h = (h ^ 0xff).wrapping_mul(0x0000_0100_0000_01B3);
        }
        h
    }
}

/// Draw a graph from the `G^k_{N,M}` ensemble: `m` independent clauses, each
/// a uniform k-subset of `n` variables (stored in increasing order).
pub fn sample_graph(n: usize, m: usize, k: usize, seed: u64) -> Result<FactorGraph> {
    if k < 2 || k > n {
        return invalid(format!("need 2 <= k <= n, got k={k}, n={n}"));
    }
    let mut rng = rng::stream(seed, 0);
    let clauses = (0..m)
        .map(|_| {
            let mut c = index::sample(&mut rng, n, k).into_vec();
            c.sort_unstable();
            c
        })
        .collect();
    Ok(FactorGraph { k, n_vars: n, clauses })
}

/// Clause count closest to `alpha * n`.
pub fn clauses_for_density(n: usize, alpha: f64) -> usize {
    (alpha * n as f64).round().max(0.0) as usize
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Every graph on `n` variables whose `m` clauses have pairwise distinct
/// supports, i.e. every m-subset of the C(n,k) possible clauses.
pub fn enumerate_distinct_graphs(n: usize, m: usize, k: usize) -> Vec<FactorGraph> {
    let supports = k_subsets(n, k);
    k_subsets(supports.len(), m)
        .into_iter()
        .map(|pick| FactorGraph {
            k,
            n_vars: n,
            clauses: pick.into_iter().map(|i| supports[i].clone()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_possible_clause() {
        let g = sample_graph(3, 1, 3, 99).unwrap();
        assert_eq!(g.clauses, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn degree_sum_is_km() {
        let g = sample_graph(5, 5, 3, 4).unwrap();
        assert_eq!(g.n_clauses(), 5);
        assert!(g.clauses.iter().all(|c| c.len() == 3));
        assert_eq!(g.degrees().iter().sum::<usize>(), 15);
    }

    #[test]
    fn rejects_bad_arity() {
        assert!(sample_graph(3, 1, 4, 0).is_err());
        assert!(sample_graph(3, 1, 1, 0).is_err());
        assert!(FactorGraph::new(3, 3, vec![vec![0, 0, 1]]).is_err());
        assert!(FactorGraph::new(3, 3, vec![vec![0, 1, 3]]).is_err());
    }

    #[test]
    fn clause_supports_are_uniform() {
        // 10^5 independent draws of clause 0; each of the C(5,3)=10 supports
        // should appear with frequency 0.1 +- 0.01.
        let supports = k_subsets(5, 3);
        let mut counts = vec![0usize; supports.len()];
        let trials = 100_000;
        for s in 0..trials {
            let g = sample_graph(5, 1, 3, s as u64).unwrap();
            let i = supports.iter().position(|x| *x == g.clauses[0]).unwrap();
            counts[i] += 1;
        }
        let expected = trials as f64 / 10.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square with 9 dof: 99.9% quantile is 27.9
        assert!(chi2 < 27.9, "chi2 = {chi2}, counts = {counts:?}");
        for &c in &counts {
            assert!((c as f64 / trials as f64 - 0.1).abs() < 0.01);
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_distinct_graphs(5, 5, 3).len(), 252);
        assert_eq!(k_subsets(6, 3).len(), 20);
    }

    #[test]
    fn restrict_relabels() {
        let g = FactorGraph::new(2, 5, vec![vec![0, 4], vec![4, 2], vec![1, 3]]).unwrap();
        let (h, map) = g.restrict(&[0, 1]);
        assert_eq!(map, vec![0, 2, 4]);
        assert_eq!(h.clauses, vec![vec![0, 2], vec![2, 1]]);
        assert_eq!(g.fingerprint(), FactorGraph::new(2, 5, vec![vec![1, 3], vec![2, 4], vec![4, 0]]).unwrap().fingerprint());
    }
}
