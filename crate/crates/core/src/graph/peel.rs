use std::collections::BTreeSet;

use rand::Rng;

use super::FactorGraph;
use crate::rng;

/// Outcome of peeling a graph down to its 2-core.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreResult {
    /// Surviving clauses and variables, relabelled densely.
    pub core: FactorGraph,
    /// Core variable index -> original variable index.
    pub var_map: Vec<usize>,
    /// Core clause index -> original clause index.
    pub clause_map: Vec<usize>,
    /// `(leaf variable, its clause)` in removal order, original labels.
    pub removal_list: Vec<(usize, usize)>,
}

impl CoreResult {
    pub fn is_empty(&self) -> bool {
        self.core.n_clauses() == 0
    }

    /// Fraction of the original variables that survive in the core.
    pub fn core_fraction(&self, n_vars: usize) -> f64 {
        if n_vars == 0 {
            0.0
        } else {
            self.core.n_vars as f64 / n_vars as f64
        }
    }
}

/// Which degree-one variable to remove next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafOrder {
    LowestIndex,
    HighestIndex,
    Random(u64),
}

/// Leaf removal with the lowest-index-first rule.
pub fn leaf_removal(g: &FactorGraph) -> CoreResult {
    leaf_removal_with_order(g, LeafOrder::LowestIndex)
}

pub fn leaf_removal_with_order(g: &FactorGraph, order: LeafOrder) -> CoreResult {
    let adj = g.var_adjacency();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; g.n_clauses()];
    let mut removal_list = Vec::new();

    let mut sorted: BTreeSet<usize> = BTreeSet::new();
    let mut pool: Vec<usize> = Vec::new();
    let mut rng = match order {
        LeafOrder::Random(seed) => Some(rng::stream(seed, 0x1eaf)),
        _ => None,
    };
    for v in 0..g.n_vars {
        if deg[v] == 1 {
            sorted.insert(v);
            pool.push(v);
        }
    }

    loop {
        let v = match order {
            LeafOrder::LowestIndex => sorted.pop_first(),
            LeafOrder::HighestIndex => sorted.pop_last(),
            LeafOrder::Random(_) => {
                let r = rng.as_mut().expect("random order has a generator");
                let mut pick = None;
                while !pool.is_empty() {
                    let i = r.random_range(0..pool.len());
                    let v = pool.swap_remove(i);
                    // entries go stale when a neighbour removal drops the degree to 0
                    if deg[v] == 1 {
                        pick = Some(v);
                        break;
                    }
                }
                pick
            }
        };
        let Some(v) = v else { break };
        if deg[v] != 1 {
            continue;
        }
        let a = *adj[v].iter().find(|&&c| alive[c]).expect("degree-one variable has a live clause");
        alive[a] = false;
        removal_list.push((v, a));
        for &w in &g.clauses[a] {
            deg[w] -= 1;
            match deg[w] {
                1 => {
                    sorted.insert(w);
                    pool.push(w);
                }
                0 => {
                    sorted.remove(&w);
                }
                _ => {}
            }
        }
    }

    let clause_map: Vec<usize> = (0..g.n_clauses()).filter(|&c| alive[c]).collect();
    let var_map: Vec<usize> = (0..g.n_vars).filter(|&v| deg[v] > 0).collect();
    let mut relabel = vec![usize::MAX; g.n_vars];
    for (i, &v) in var_map.iter().enumerate() {
        relabel[v] = i;
    }
    let clauses = clause_map
        .iter()
        .map(|&c| g.clauses[c].iter().map(|&v| relabel[v]).collect())
        .collect();
    CoreResult {
        core: FactorGraph { k: g.k, n_vars: var_map.len(), clauses },
        var_map,
        clause_map,
        removal_list,
    }
}
