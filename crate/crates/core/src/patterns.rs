//! Structured graph families with known kernel dimensions and dimer counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, QsatError, Result};
use crate::graph::{count_dimer_coverings, FactorGraph};
use crate::instance::{kernel_dimension, sample_exact_instance, sample_separable_instance, DEFAULT_KERNEL_TOL, EXACT_KERNEL_CAP};

/// Denominator bound for the rationalized projectors used in verification.
pub const PATTERN_DENOM_BOUND: i64 = 97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Sunflower,
    LooseChain,
    StrongChain,
    LooseCycle,
    StrongCycle,
}

impl PatternKind {
    pub const ALL: [PatternKind; 5] =
        [Self::Sunflower, Self::LooseChain, Self::StrongChain, Self::LooseCycle, Self::StrongCycle];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sunflower => "sunflower",
            Self::LooseChain => "loose_chain",
            Self::StrongChain => "strong_chain",
            Self::LooseCycle => "loose_cycle",
            Self::StrongCycle => "strong_cycle",
        }
    }

    /// Smallest `m` the family (and its recurrences) is defined for.
    pub fn min_m(self) -> usize {
        match self {
            Self::LooseCycle => 2,
            Self::StrongCycle => 4,
            _ => 1,
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = QsatError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| QsatError::InvalidParameters(format!("unknown pattern kind '{s}'")))
    }
}

/// Dimer counts the strong constructions must reproduce.
const STRONG_CHAIN_DIMERS: [(usize, u64); 3] = [(1, 3), (2, 7), (3, 14)];
const STRONG_CYCLE_DIMERS: [(usize, u64); 3] = [(4, 9), (5, 13), (6, 20)];

fn raw_pattern(kind: PatternKind, k: usize, m: usize) -> Result<FactorGraph> {
    let (n, clauses): (usize, Vec<Vec<usize>>) = match kind {
        PatternKind::Sunflower => {
            (1 + (k - 1) * m, (0..m).map(|i| std::iter::once(0).chain((0..k - 1).map(|j| 1 + i * (k - 1) + j)).collect()).collect())
        }
        PatternKind::LooseChain => ((k - 1) * m + 1, (0..m).map(|i| (0..k).map(|j| i * (k - 1) + j).collect()).collect()),
        PatternKind::LooseCycle => {
            let n = (k - 1) * m;
            (n, (0..m).map(|i| (0..k).map(|j| (i * (k - 1) + j) % n).collect()).collect())
        }
        // consecutive windows of k variables
        PatternKind::StrongChain => (m + k - 1, (0..m).map(|i| (i..i + k).collect()).collect()),
        PatternKind::StrongCycle => (m, (0..m).map(|i| (0..k).map(|j| (i + j) % m).collect()).collect()),
    };
    FactorGraph::new(k, n, clauses)
}

pub fn make_pattern(kind: PatternKind, k: usize, m: usize) -> Result<FactorGraph> {
    if k < 2 {
        return invalid("patterns need k >= 2");
    }
    if m < kind.min_m() {
        return invalid(format!("{kind} needs m >= {}", kind.min_m()));
    }
    let strong = matches!(kind, PatternKind::StrongChain | PatternKind::StrongCycle);
    if strong && k != 3 {
        return invalid(format!("{kind} is defined for k = 3 only"));
    }
    if strong {
        let table = if kind == PatternKind::StrongChain { STRONG_CHAIN_DIMERS } else { STRONG_CYCLE_DIMERS };
        for (mm, d) in table {
            let got = count_dimer_coverings(&raw_pattern(kind, k, mm)?)?;
            if got != d {
                return Err(QsatError::Invariant(format!("{kind} construction gives {got} dimers at m={mm}, expected {d}")));
            }
        }
    }
    raw_pattern(kind, k, m)
}

fn linear(first: (usize, u64), second: u64, m: usize, step: impl Fn(u64, u64) -> u64) -> u64 {
    let (m0, mut a) = first;
    let mut b = second;
    if m == m0 {
        return a;
    }
    for _ in m0 + 1..m {
        (a, b) = (b, step(b, a));
    }
    b
}

fn check_m(kind: PatternKind, m: usize) -> Result<()> {
    if m < kind.min_m() {
        return invalid(format!("{kind} recurrence starts at m = {}", kind.min_m()));
    }
    if m > 40 {
        return Err(QsatError::ResourceLimit(format!("recurrence at m = {m} overflows")));
    }
    Ok(())
}

/// Kernel dimension `r_m` predicted for `k = 3`.
pub fn recurrence_dim(kind: PatternKind, m: usize) -> Result<u64> {
    check_m(kind, m)?;
    Ok(match kind {
        PatternKind::Sunflower => (2..=m).fold(7, |r, i| 3 * r + 3u64.pow(i as u32 - 1)),
        PatternKind::LooseChain => linear((1, 7), 24, m, |a, b| 4 * a - 2 * b),
        PatternKind::LooseCycle => linear((2, 12), 40, m, |a, b| 4 * a - 2 * b),
        PatternKind::StrongChain => linear((1, 7), 12, m, |a, b| a + b + 1),
        PatternKind::StrongCycle => linear((4, 8), 12, m, |a, b| a + b - 1),
    })
}

/// Dimer covering count `d_m` predicted for `k = 3`.
pub fn recurrence_dimers(kind: PatternKind, m: usize) -> Result<u64> {
    check_m(kind, m)?;
    let third = |init: [u64; 3], m0: usize, step: fn(u64, u64, u64) -> u64| {
        let mut w = init;
        for _ in m0 + 3..=m {
            w = [w[1], w[2], step(w[2], w[1], w[0])];
        }
        w[(m - m0).min(2)]
    };
    Ok(match kind {
        PatternKind::Sunflower => (1u64 << (m - 1)) * (m as u64 + 2),
        PatternKind::LooseChain => linear((1, 3), 8, m, |a, b| 3 * a - b),
        // two clauses on a 4-variable loop share two variables: 3·3 − 2 = 7
        PatternKind::LooseCycle => linear((2, 7), 18, m, |a, b| 3 * a - b),
        PatternKind::StrongChain => third([3, 7, 14], 1, |a, _, c| 2 * a - c + 1),
        PatternKind::StrongCycle => third([9, 13, 20], 4, |a, _, c| 2 * a - c),
    })
}

fn separable_kernel(kind: PatternKind, k: usize, m: usize) -> Result<u64> {
    let g = make_pattern(kind, k, m)?;
    let inst = sample_separable_instance(&g, 0x5e9a, Some(PATTERN_DENOM_BOUND))?;
    Ok(kernel_dimension(&inst, DEFAULT_KERNEL_TOL)? as u64)
}

/// Loose chain with separable projectors:
/// `r_m = 2^{k−1} r_{m−1} − 2^{k−2} r_{m−2}`.
pub fn separable_chain_dim(k: usize, m: usize) -> Result<u64> {
    if k < 2 || m < 1 {
        return invalid("separable chain needs k >= 2 and m >= 1");
    }
    let (r1, r2) = if k == 3 { (7, 24) } else { (separable_kernel(PatternKind::LooseChain, k, 1)?, separable_kernel(PatternKind::LooseChain, k, 2)?) };
    let (a, b) = (1u64 << (k - 1), 1u64 << (k - 2));
    Ok(linear((1, r1), r2, m, |x, y| a * x - b * y))
}

/// Loose cycle with separable projectors (`k = 3`): `s_2 = 12`, `s_3 = 40`.
pub fn separable_cycle_dim(m: usize) -> Result<u64> {
    if m < 2 {
        return invalid("separable cycle needs m >= 2");
    }
    Ok(linear((2, 12), 40, m, |x, y| 4 * x - 2 * y))
}

/// 2-qubit-started chain: `t_m = (2^{k−1} − 1) m + 2^k − 1`.
pub fn mixed_chain_dim(k: usize, m: usize) -> u64 {
    ((1u64 << (k - 1)) - 1) * m as u64 + (1u64 << k) - 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternReport {
    pub kind: PatternKind,
    pub m: usize,
    pub generic_dim: u64,
    pub separable_dim: u64,
    pub recurrence_dim: u64,
    pub dimers: u64,
    pub recurrence_dimers: u64,
    pub dim_match: bool,
    pub dimer_match: bool,
}

impl PatternReport {
    pub const CSV_HEADER: &'static str =
        "kind,m,generic_dim,separable_dim,recurrence_dim,dimers,recurrence_dimers,dim_match,dimer_match";

    pub fn ok(&self) -> bool {
        self.dim_match && self.dimer_match
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.m,
            self.generic_dim,
            self.separable_dim,
            self.recurrence_dim,
            self.dimers,
            self.recurrence_dimers,
            self.dim_match,
            self.dimer_match
        )
    }
}

/// Kernel dimensions (minimum over seeds, exact arithmetic where it fits)
/// against the recurrences, and the dimer count against its recurrence.
pub fn verify_pattern(kind: PatternKind, m: usize, seeds: &[u64]) -> Result<PatternReport> {
    if seeds.is_empty() {
        return invalid("verification needs at least one seed");
    }
    let g = make_pattern(kind, 3, m)?;
    let exact = g.n_vars <= EXACT_KERNEL_CAP;
    let mut generic = u64::MAX;
    let mut separable = u64::MAX;
    for &s in seeds {
        let gi = if exact {
            sample_exact_instance(&g, PATTERN_DENOM_BOUND, s)?
        } else {
            crate::instance::sample_instance(&g, s)
        };
        generic = generic.min(kernel_dimension(&gi, DEFAULT_KERNEL_TOL)? as u64);
        let si = sample_separable_instance(&g, s, exact.then_some(PATTERN_DENOM_BOUND))?;
        separable = separable.min(kernel_dimension(&si, DEFAULT_KERNEL_TOL)? as u64);
    }
    let recurrence_dim = recurrence_dim(kind, m)?;
    let dimers = count_dimer_coverings(&g)?;
    let recurrence_dimers = recurrence_dimers(kind, m)?;
    Ok(PatternReport {
        kind,
        m,
        generic_dim: generic,
        separable_dim: separable,
        recurrence_dim,
        dimers,
        recurrence_dimers,
        dim_match: generic == separable && separable == recurrence_dim,
        dimer_match: dimers == recurrence_dimers,
    })
}
