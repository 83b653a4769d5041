//! Experiment drivers: density sweeps and the kernel / mixed volume / product
//! span comparison on square instances.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QsatError, Result};
use crate::graph::{count_dimer_coverings, enumerate_distinct_graphs, k_subsets, FactorGraph, ThresholdRow};
use crate::field::GaussianRational;
use crate::groebner::{solve_zero_dimensional, GroebnerOptions, Polynomial, MAX_SOLVE_VARS};
use crate::instance::{kernel_dimension_exact, numerical_rank, sample_exact_instance, Instance, ProductState};
use crate::polysystem::build_equations_exact;
use crate::polytope::{bkk_bound_polys, DEFAULT_MV_DIM_CAP};
use crate::rng;

/// Product vectors are materialised only up to this many qubits.
pub const PRODSPAN_QUBIT_CAP: usize = 12;
pub const PRODSPAN_REL_TOL: f64 = 1e-9;
/// `trials = all` refuses to enumerate more graphs than this.
pub const FIG3_ENUMERATION_CAP: usize = 100_000;
pub const FIG3_DEFAULT_DENOM_BOUND: i64 = 4;

pub const THRESHOLDS_CSV_HEADER: &str = "alpha,empty_core_freq,cover_freq,mean_core_frac,se";
pub const FIG3_CSV_HEADER: &str = "instance_id,graph_hash,dim_ker,mv,dim_prod,class";

pub fn thresholds_csv_row(r: &ThresholdRow) -> String {
    format!("{},{},{},{},{}", r.alpha, r.empty_core_freq, r.cover_freq, r.mean_core_frac, r.se)
}

/// Rank of the span of the full `2^N` vectors of `solutions`.
pub fn prodspan_dimension(solutions: &[ProductState], inst: &Instance) -> Result<usize> {
    let n = inst.n_vars();
    if n > PRODSPAN_QUBIT_CAP {
        return Err(QsatError::ResourceLimit(format!("{n} qubits exceed the cap of {PRODSPAN_QUBIT_CAP}")));
    }
    let vectors = solutions
        .iter()
        .map(|s| {
            if s.qubits.len() != n {
                return invalid(format!("solution has {} qubits, instance has {n}", s.qubits.len()));
            }
            s.to_full_vector(PRODSPAN_QUBIT_CAP)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(numerical_rank(&vectors, PRODSPAN_REL_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig3Class {
    /// `dimKer = 0`.
    Unsat,
    /// `dimKer > 0` and `MV = 0`.
    EntsatEvidence,
    MvLess,
    MvEqual,
    MvGreater,
    Skipped,
}

impl Fig3Class {
    pub const ALL: [Fig3Class; 6] = [
        Fig3Class::Unsat,
        Fig3Class::EntsatEvidence,
        Fig3Class::MvLess,
        Fig3Class::MvEqual,
        Fig3Class::MvGreater,
        Fig3Class::Skipped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fig3Class::Unsat => "unsat",
            Fig3Class::EntsatEvidence => "entsat_evidence",
            Fig3Class::MvLess => "mv_less",
            Fig3Class::MvEqual => "mv_equal",
            Fig3Class::MvGreater => "mv_greater",
            Fig3Class::Skipped => "skipped",
        }
    }

    pub fn classify(dim_ker: usize, mv: u64) -> Self {
        if dim_ker == 0 {
            Fig3Class::Unsat
        } else if mv == 0 {
            Fig3Class::EntsatEvidence
        } else {
            match mv.cmp(&(dim_ker as u64)) {
                std::cmp::Ordering::Less => Fig3Class::MvLess,
                std::cmp::Ordering::Equal => Fig3Class::MvEqual,
                std::cmp::Ordering::Greater => Fig3Class::MvGreater,
            }
        }
    }
}

impl fmt::Display for Fig3Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct Fig3Config {
    pub n: usize,
    /// `None` enumerates every graph with distinct clause supports.
    pub trials: Option<usize>,
    pub seed: u64,
    pub denom_bound: i64,
    /// Per-instance wall-clock budget.
    pub budget: Option<Duration>,
    /// Compute the product-solution span where the root solve is feasible.
    pub dim_prod: bool,
}

impl Fig3Config {
    pub fn new(n: usize, trials: Option<usize>, seed: u64) -> Self {
        Self { n, trials, seed, denom_bound: FIG3_DEFAULT_DENOM_BOUND, budget: None, dim_prod: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub instance_id: usize,
    pub graph_hash: u64,
    pub dim_ker: Option<usize>,
    pub mv: Option<u64>,
    pub dim_prod: Option<usize>,
    pub class: Fig3Class,
}

impl Fig3Row {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<u64>| v.map_or_else(String::new, |v| v.to_string());
        format!(
            "{},{:016x},{},{},{},{}",
            self.instance_id,
            self.graph_hash,
            opt(self.dim_ker.map(|v| v as u64)),
            opt(self.mv),
            opt(self.dim_prod.map(|v| v as u64)),
            self.class
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Report {
    pub n: usize,
    pub rows: Vec<Fig3Row>,
}

impl Fig3Report {
    pub fn count(&self, class: Fig3Class) -> usize {
        self.rows.iter().filter(|r| r.class == class).count()
    }

    pub fn skipped(&self) -> usize {
        self.count(Fig3Class::Skipped)
    }

    /// Fraction among the instances that were not skipped.
    pub fn fraction(&self, class: Fig3Class) -> f64 {
        let done = self.rows.len() - self.skipped();
        if done == 0 || class == Fig3Class::Skipped {
            return 0.0;
        }
        self.count(class) as f64 / done as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FIG3_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("n={} instances={} skipped={}\n", self.n, self.rows.len(), self.skipped());
        for c in Fig3Class::ALL.iter().filter(|&&c| c != Fig3Class::Skipped) {
            out.push_str(&format!("{}: {} ({:.4})\n", c, self.count(*c), self.fraction(*c)));
        }
        out
    }
}

/// The graphs of a run: all of them, or `trials` uniform draws of `n` distinct
/// clause supports.
pub fn fig3_graphs(n: usize, trials: Option<usize>, seed: u64) -> Result<Vec<FactorGraph>> {
    if n < 3 {
        return invalid("need n >= 3");
    }
    let supports = k_subsets(n, 3);
    if supports.len() < n {
        return invalid(format!("only {} distinct clauses on {n} variables", supports.len()));
    }
    match trials {
        None => {
            let count = binomial(supports.len() as u64, n as u64);
            if count > FIG3_ENUMERATION_CAP as u64 {
                return Err(QsatError::ResourceLimit(format!("{count} graphs; pass a trial count")));
            }
            Ok(enumerate_distinct_graphs(n, n, 3))
        }
        Some(t) => Ok((0..t)
            .map(|i| {
                let mut r = rng::stream(rng::derive_seed(seed, i as u64), 3);
                let mut pick = sample(&mut r, supports.len(), n).into_vec();
                pick.sort_unstable();
                FactorGraph { k: 3, n_vars: n, clauses: pick.into_iter().map(|j| supports[j].clone()).collect() }
            })
            .collect()),
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn over_budget(start: Instant, budget: Option<Duration>) -> bool {
    budget.is_some_and(|b| start.elapsed() > b)
}

/// Mixed volume of the clause polynomials. When every Newton polytope is the
/// full box on its clause the mixed volume is the permanent of the incidence
/// matrix, which is used beyond the polytope dimension cap.
fn clause_mixed_volume(inst: &Instance, polys: &[Polynomial<GaussianRational>]) -> Result<u64> {
    let n = inst.n_vars();
    if n <= DEFAULT_MV_DIM_CAP {
        return bkk_bound_polys(polys, DEFAULT_MV_DIM_CAP);
    }
    let full_boxes = polys.iter().zip(&inst.graph.clauses).all(|(p, c)| {
        p.len() == 1 << c.len()
            && p.terms().iter().all(|(m, _)| m.0.iter().enumerate().all(|(v, &e)| e <= 1 && (e == 0 || c.contains(&v))))
    });
    if full_boxes {
        count_dimer_coverings(&inst.graph)
    } else {
        bkk_bound_polys(polys, n)
    }
}

fn fig3_instance(id: usize, g: &FactorGraph, cfg: &Fig3Config) -> Result<Fig3Row> {
    let start = Instant::now();
    let mut row =
        Fig3Row { instance_id: id, graph_hash: g.fingerprint(), dim_ker: None, mv: None, dim_prod: None, class: Fig3Class::Skipped };
    let inst = sample_exact_instance(g, cfg.denom_bound, rng::derive_seed(cfg.seed, id as u64))?;
    let sys = build_equations_exact(&inst)?;

    let dim_ker = kernel_dimension_exact(&inst)?;
    row.dim_ker = Some(dim_ker);
    if over_budget(start, cfg.budget) {
        return Ok(row);
    }
    let mv = clause_mixed_volume(&inst, &sys.polys)?;
    row.mv = Some(mv);
    if over_budget(start, cfg.budget) {
        return Ok(row);
    }

    if cfg.dim_prod && cfg.n <= MAX_SOLVE_VARS {
        let opts = GroebnerOptions { deadline: cfg.budget.map(|b| start + b), ..GroebnerOptions::default() };
        match solve_zero_dimensional(&sys.polys, &opts, rng::derive_seed(cfg.seed, id as u64 ^ 0x5eed)) {
            Ok(roots) => {
                let states: Vec<ProductState> = roots.iter().map(|z| ProductState::from_z(z)).collect();
                row.dim_prod = Some(prodspan_dimension(&states, &inst)?);
            }
            Err(QsatError::ResourceLimit(_)) => return Ok(row),
            // a positive-dimensional solution set has no finite root list
            Err(QsatError::NotZeroDimensional) => {}
            Err(e) => return Err(e),
        }
    }
    row.class = Fig3Class::classify(dim_ker, mv);
    Ok(row)
}

/// Classify every instance by comparing the kernel dimension with the mixed
/// volume, and record the span of the product solutions where available.
/// Rows come back sorted by instance id.
pub fn fig3(cfg: &Fig3Config) -> Result<Fig3Report> {
    if cfg.n > crate::instance::EXACT_KERNEL_CAP {
        return invalid(format!("n = {} exceeds the exact kernel cap", cfg.n));
    }
    if cfg.denom_bound < 1 {
        return invalid("denominator bound must be positive");
    }
    let graphs = fig3_graphs(cfg.n, cfg.trials, cfg.seed)?;
    let rows = graphs
        .par_iter()
        .enumerate()
        .map(|(id, g)| fig3_instance(id, g, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig3Report { n: cfg.n, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_graph;
    use crate::instance::sample_instance;
    use num_complex::Complex64;

    #[test]
    fn prodspan_trivial_cases() {
        let g = sample_graph(4, 2, 3, 1).unwrap();
        let inst = sample_instance(&g, 2);
        let s = ProductState::from_z(&[Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(1.0, 1.0)]);
        assert_eq!(prodspan_dimension(std::slice::from_ref(&s), &inst).unwrap(), 1);
        assert_eq!(prodspan_dimension(&[s.clone(), s.clone()], &inst).unwrap(), 1);
        let t = ProductState::from_z(&[Complex64::new(0.0, 0.0); 4]);
        assert_eq!(prodspan_dimension(&[s, t], &inst).unwrap(), 2);
        assert_eq!(prodspan_dimension(&[], &inst).unwrap(), 0);
    }

    #[test]
    fn classification() {
        assert_eq!(Fig3Class::classify(0, 4), Fig3Class::Unsat);
        assert_eq!(Fig3Class::classify(3, 0), Fig3Class::EntsatEvidence);
        assert_eq!(Fig3Class::classify(3, 2), Fig3Class::MvLess);
        assert_eq!(Fig3Class::classify(3, 3), Fig3Class::MvEqual);
        assert_eq!(Fig3Class::classify(3, 5), Fig3Class::MvGreater);
    }

    #[test]
    fn graph_counts() {
        assert_eq!(fig3_graphs(5, None, 0).unwrap().len(), 252);
        assert_eq!(binomial(20, 6), 38_760);
        let a = fig3_graphs(6, Some(10), 3).unwrap();
        assert_eq!(a, fig3_graphs(6, Some(10), 3).unwrap());
        for g in &a {
            let mut s = g.clauses.clone();
            s.dedup();
            assert_eq!(s.len(), 6);
        }
        assert!(fig3_graphs(8, None, 0).is_err());
    }

    #[test]
    fn small_sample_satisfies_inequalities() {
        let mut cfg = Fig3Config::new(4, Some(6), 9);
        cfg.denom_bound = 4;
        let rep = fig3(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 6);
        for r in &rep.rows {
            let (k, mv, p) = (r.dim_ker.unwrap(), r.mv.unwrap(), r.dim_prod.unwrap());
            assert!(p as u64 <= mv && p <= k, "{r:?}");
        }
        assert!(rep.to_csv().starts_with(FIG3_CSV_HEADER));
    }
}
