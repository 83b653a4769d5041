//! Clause-to-variable matchings (dimer configurations).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::FactorGraph;
use crate::error::{QsatError, Result};

/// Injective map clause -> one of its variables, defined on every clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimerCovering {
    pub assignment: Vec<usize>,
}

impl DimerCovering {
    /// Checks domain, adjacency and injectivity against `g`.
    pub fn is_valid_for(&self, g: &FactorGraph) -> bool {
        if self.assignment.len() != g.n_clauses() {
            return false;
        }
        let mut used = vec![false; g.n_vars];
        for (c, &v) in self.assignment.iter().enumerate() {
            if v >= g.n_vars || !g.clauses[c].contains(&v) || used[v] {
                return false;
            }
            used[v] = true;
        }
        true
    }
}

/// A maximum-cardinality matching, possibly partial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub clause_to_var: Vec<Option<usize>>,
    pub var_to_clause: Vec<Option<usize>>,
    pub covered_count: usize,
}

impl Matching {
    pub fn is_covering(&self) -> bool {
        self.covered_count == self.clause_to_var.len()
    }

    pub fn covering(&self) -> Option<DimerCovering> {
        self.clause_to_var
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(|assignment| DimerCovering { assignment })
    }
}

const NIL: usize = usize::MAX;

/// Hopcroft–Karp on the clause/variable incidence graph.
pub fn max_matching(g: &FactorGraph) -> Matching {
    let m = g.n_clauses();
    let mut c2v = vec![NIL; m];
    let mut v2c = vec![NIL; g.n_vars];
    let mut dist = vec![0usize; m];
    let mut size = 0;

    // Greedy warm start.
    for c in 0..m {
        if let Some(&v) = g.clauses[c].iter().find(|&&v| v2c[v] == NIL) {
            c2v[c] = v;
            v2c[v] = c;
            size += 1;
        }
    }

    loop {
        // BFS layering from free clauses.
        let mut queue = VecDeque::new();
        let mut found = false;
        for c in 0..m {
            if c2v[c] == NIL {
                dist[c] = 0;
                queue.push_back(c);
            } else {
                dist[c] = usize::MAX;
            }
        }
        while let Some(c) = queue.pop_front() {
            for &v in &g.clauses[c] {
                let next = v2c[v];
                if next == NIL {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[c] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; m];
        for c in 0..m {
            if c2v[c] == NIL && augment(g, c, &mut c2v, &mut v2c, &mut dist, &mut it) {
                size += 1;
            }
        }
    }

    Matching {
        clause_to_var: c2v.iter().map(|&v| (v != NIL).then_some(v)).collect(),
        var_to_clause: v2c.iter().map(|&c| (c != NIL).then_some(c)).collect(),
        covered_count: size,
    }
}

/// Iterative DFS along the BFS layers. `it[c]` is the edge clause `c` is
/// currently trying; on success the stack holds the augmenting path.
fn augment(
    g: &FactorGraph,
    root: usize,
    c2v: &mut [usize],
    v2c: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    let mut stack: Vec<usize> = vec![root];
    while let Some(&c) = stack.last() {
        if it[c] >= g.clauses[c].len() {
            dist[c] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = g.clauses[c][it[c]];
        let next = v2c[v];
        if next == NIL {
            for &cc in &stack {
                let w = g.clauses[cc][it[cc]];
                c2v[cc] = w;
                v2c[w] = cc;
            }
            return true;
        }
        if dist[next] != usize::MAX && dist[next] == dist[c] + 1 {
            stack.push(next);
        } else {
            it[c] += 1;
        }
    }
    false
}

/// Clause set `S'` with `|S'| = |N(S')| + 1`, certifying that no covering exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallViolator {
    /// Clause indices, sorted; the first unmatched root is included.
    pub clauses: Vec<usize>,
    /// `N(S')`, sorted.
    pub neighborhood: Vec<usize>,
    /// The unmatched clause the alternating search started from.
    pub root: usize,
}

impl HallViolator {
    /// Recomputes `N(S')` from the graph and checks the deficiency.
    pub fn verify(&self, g: &FactorGraph) -> bool {
        let nb = g.neighborhood(&self.clauses);
        nb == self.neighborhood && self.clauses.len() == nb.len() + 1
    }
}

/// `None` iff a dimer covering exists. Otherwise the set of clauses reachable
/// by alternating paths from the lowest-index unmatched clause.
pub fn hall_violator(g: &FactorGraph) -> Option<HallViolator> {
    let mm = max_matching(g);
    hall_violator_from(g, &mm)
}

pub(crate) fn hall_violator_from(g: &FactorGraph, mm: &Matching) -> Option<HallViolator> {
    let root = mm.clause_to_var.iter().position(Option::is_none)?;
    let mut seen_c = vec![false; g.n_clauses()];
    let mut seen_v = vec![false; g.n_vars];
    let mut queue = VecDeque::from([root]);
    seen_c[root] = true;
    while let Some(c) = queue.pop_front() {
        for &v in &g.clauses[c] {
            if seen_v[v] {
                continue;
            }
            seen_v[v] = true;
            // maximality: every variable reached here is matched
            let next = mm.var_to_clause[v].expect("maximum matching leaves no augmenting path");
            if !seen_c[next] {
                seen_c[next] = true;
                queue.push_back(next);
            }
        }
    }
    let clauses: Vec<usize> = (0..g.n_clauses()).filter(|&c| seen_c[c]).collect();
    let neighborhood: Vec<usize> = (0..g.n_vars).filter(|&v| seen_v[v]).collect();
    Some(HallViolator { clauses, neighborhood, root })
}

pub const DEFAULT_DIMER_BUDGET: u64 = 100_000_000;

pub fn count_dimer_coverings(g: &FactorGraph) -> Result<u64> {
    count_dimer_coverings_with_budget(g, DEFAULT_DIMER_BUDGET)
}

/// Exact count of dimer coverings by most-constrained-clause-first backtracking.
pub fn count_dimer_coverings_with_budget(g: &FactorGraph, budget: u64) -> Result<u64> {
    struct Search<'a> {
        g: &'a FactorGraph,
        used: Vec<bool>,
        done: Vec<bool>,
        nodes: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn run(&mut self, remaining: usize) -> Result<u64> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(QsatError::ResourceLimit(format!(
                    "dimer counting exceeded {} search nodes",
                    self.budget
                )));
            }
            if remaining == 0 {
                return Ok(1);
            }
            let mut best: Option<(usize, usize)> = None;
            for c in 0..self.g.n_clauses() {
                if self.done[c] {
                    continue;
                }
                let free = self.g.clauses[c].iter().filter(|&&v| !self.used[v]).count();
                if free == 0 {
                    return Ok(0);
                }
                if best.is_none_or(|(_, f)| free < f) {
                    best = Some((c, free));
                }
            }
            let (c, _) = best.expect("remaining > 0");
            self.done[c] = true;
            let mut total = 0;
            for j in 0..self.g.k {
                let v = self.g.clauses[c][j];
                if self.used[v] {
                    continue;
                }
                self.used[v] = true;
                total += self.run(remaining - 1)?;
                self.used[v] = false;
            }
            self.done[c] = false;
            Ok(total)
        }
    }
    let mut s = Search {
        g,
        used: vec![false; g.n_vars],
        done: vec![false; g.n_clauses()],
        nodes: 0,
        budget,
    };
    s.run(g.n_clauses())
}
