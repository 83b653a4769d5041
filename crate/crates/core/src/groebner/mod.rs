//! Exact polynomial algebra: orders, division, Buchberger, reduced bases.

mod fglm;
mod modular;
mod monomial;
mod parse;
mod polynomial;
mod solve;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

pub use modular::{modular_reduced_basis, DECISION_PRIMES, MAX_PRIMES};
pub use monomial::{Monomial, MonomialOrder, OrderKind};
pub use parse::{parse_polynomial, parse_system};
pub use polynomial::{divide, normal_form, s_polynomial, Division, Polynomial};
pub use solve::{newton_polish, solve_lex, solve_lex_with, solve_zero_dimensional, MAX_SOLVE_VARS};

use crate::error::{invalid, QsatError, Result};
use crate::field::{Field, GaussianRational};

/// Degree guard never exceeds this, whatever the Dubé bound says.
pub const HARD_DEGREE_CAP: u32 = 64;
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct GroebnerOptions {
    /// Plain pair-by-pair Buchberger with no selection strategy or criteria.
    pub strict: bool,
    /// Total stored terms across the basis.
    pub max_terms: usize,
    /// Overrides the Dubé-bound guard.
    pub max_degree: Option<u32>,
    pub deadline: Option<Instant>,
    /// Exact post-check of modular results (see [`modular_reduced_basis`]).
    pub verify: bool,
}

impl Default for GroebnerOptions {
    fn default() -> Self {
        Self { strict: false, max_terms: DEFAULT_TERM_BUDGET, max_degree: None, deadline: None, verify: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroebnerStats {
    pub pairs_reduced: usize,
    pub pairs_skipped: usize,
    pub max_degree: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroebnerBasis<F: Field> {
    pub generators: Vec<Polynomial<F>>,
    pub order: Arc<MonomialOrder>,
    pub reduced: bool,
    pub stats: GroebnerStats,
}

impl<F: Field> GroebnerBasis<F> {
    /// Reduced basis equal to `{1}`.
    pub fn is_one(&self) -> bool {
        self.generators.iter().any(Polynomial::is_nonzero_constant)
    }

    pub fn normal_form(&self, p: &Polynomial<F>) -> Polynomial<F> {
        normal_form(p, &self.generators)
    }

    pub fn contains(&self, p: &Polynomial<F>) -> bool {
        self.normal_form(p).is_zero()
    }
}

/// `2(d²/2 + d)^{2^{n−2}}`, clamped to the hard cap.
pub fn dube_degree_bound(d: u32, n: usize) -> u32 {
    let d = d as f64;
    let b = 2.0 * (d * d / 2.0 + d).powf(2f64.powi(n as i32 - 2));
    if b.is_finite() && b < HARD_DEGREE_CAP as f64 {
        (b.ceil() as u32).max(d as u32)
    } else {
        HARD_DEGREE_CAP
    }
}

fn check_budget<F: Field>(g: &[Polynomial<F>], cap: u32, opts: &GroebnerOptions, stats: &GroebnerStats, pending: usize) -> Result<()> {
    let terms: usize = g.iter().map(Polynomial::len).sum();
    let diag = || format!("basis size {}, {} terms, {} pairs pending, {} reduced", g.len(), terms, pending, stats.pairs_reduced);
    if terms > opts.max_terms {
        return Err(QsatError::ResourceLimit(format!("term budget {} exceeded ({})", opts.max_terms, diag())));
    }
    if stats.max_degree > cap {
        return Err(QsatError::ResourceLimit(format!("degree guard {cap} exceeded ({})", diag())));
    }
    if opts.deadline.is_some_and(|d| Instant::now() > d) {
        return Err(QsatError::ResourceLimit(format!("time budget exceeded ({})", diag())));
    }
    Ok(())
}

fn prepare<F: Field>(f: &[Polynomial<F>]) -> Result<(Arc<MonomialOrder>, Vec<Polynomial<F>>)> {
    let Some(first) = f.first() else {
        return invalid("Buchberger needs at least one polynomial");
    };
    let order = first.order().clone();
    if f.iter().any(|p| p.order() != &order) {
        return invalid("polynomials use different monomial orders");
    }
    let g: Vec<Polynomial<F>> = f.iter().filter(|p| !p.is_zero()).map(Polynomial::monic).collect();
    if g.is_empty() {
        return invalid("all input polynomials are zero");
    }
    Ok((order, g))
}

/// Gröbner basis of the ideal generated by `f`, under the order carried by the polynomials.
pub fn buchberger<F: Field>(f: &[Polynomial<F>], opts: &GroebnerOptions) -> Result<GroebnerBasis<F>> {
    let (order, g) = prepare(f)?;
    let d = g.iter().map(Polynomial::total_degree).max().unwrap_or(0);
    let cap = opts.max_degree.unwrap_or_else(|| dube_degree_bound(d.max(1), order.nvars()));
    let (generators, stats) = if opts.strict { strict(g, cap, opts)? } else { improved(g, cap, opts)? };
    Ok(GroebnerBasis { generators, order, reduced: false, stats })
}

/// Repeat { for every pair of the previous basis, add nonzero remainders } until stable.
fn strict<F: Field>(mut g: Vec<Polynomial<F>>, cap: u32, opts: &GroebnerOptions) -> Result<(Vec<Polynomial<F>>, GroebnerStats)> {
    let mut stats = GroebnerStats::default();
    loop {
        let prev = g.clone();
        for i in 0..prev.len() {
            for j in i + 1..prev.len() {
                let s = s_polynomial(&prev[i], &prev[j])?;
                let r = normal_form(&s, &prev);
                stats.pairs_reduced += 1;
                if !r.is_zero() && !g.contains(&r) {
                    stats.max_degree = stats.max_degree.max(r.total_degree());
                    g.push(r);
                    check_budget(&g, cap, opts, &stats, 0)?;
                }
            }
        }
        if g.len() == prev.len() {
            return Ok((g, stats));
        }
    }
}

/// Normal selection plus the coprime and chain criteria.
fn improved<F: Field>(mut g: Vec<Polynomial<F>>, cap: u32, opts: &GroebnerOptions) -> Result<(Vec<Polynomial<F>>, GroebnerStats)> {
    let order = g[0].order().clone();
    let mut stats = GroebnerStats::default();
    let mut pending: HashSet<(usize, usize)> = HashSet::new();
    for j in 0..g.len() {
        for i in 0..j {
            pending.insert((i, j));
        }
    }
    while !pending.is_empty() {
        // smallest lcm: total degree first, ties by the monomial order, then indices
        let &(i, j) = pending
            .iter()
            .min_by(|a, b| {
                let la = g[a.0].lm().lcm(g[a.1].lm());
                let lb = g[b.0].lm().lcm(g[b.1].lm());
                la.degree().cmp(&lb.degree()).then_with(|| order.cmp(&la, &lb)).then_with(|| a.cmp(b))
            })
            .expect("non-empty");
        pending.remove(&(i, j));
        let (li, lj) = (g[i].lm(), g[j].lm());
        if li.coprime(lj) {
            stats.pairs_skipped += 1;
            continue;
        }
        let l = li.lcm(lj);
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let chain = (0..g.len()).any(|k| {
            k != i && k != j && g[k].lm().divides(&l) && !pending.contains(&key(i, k)) && !pending.contains(&key(j, k))
        });
        if chain {
            stats.pairs_skipped += 1;
            continue;
        }
        let s = s_polynomial(&g[i], &g[j])?;
        let r = normal_form(&s, &g);
        stats.pairs_reduced += 1;
        if r.is_zero() {
            continue;
        }
        let r = r.monic();
        if r.is_nonzero_constant() {
            return Ok((vec![r], stats));
        }
        stats.max_degree = stats.max_degree.max(r.total_degree());
        let new = g.len();
        g.push(r);
        for i in 0..new {
            pending.insert((i, new));
        }
        check_budget(&g, cap, opts, &stats, pending.len())?;
    }
    Ok((g, stats))
}

/// Monic, minimal and inter-reduced; sorted by decreasing leading monomial.
pub fn reduce_basis<F: Field>(g: &GroebnerBasis<F>) -> GroebnerBasis<F> {
    let order = g.order.clone();
    let mut polys: Vec<Polynomial<F>> = g.generators.iter().filter(|p| !p.is_zero()).map(Polynomial::monic).collect();
    if polys.iter().any(Polynomial::is_nonzero_constant) {
        return GroebnerBasis { generators: vec![Polynomial::one(&order)], order, reduced: true, stats: g.stats.clone() };
    }
    // minimal: drop generators whose leading monomial is divisible by another's
    let mut keep = vec![true; polys.len()];
    for i in 0..polys.len() {
        for j in 0..polys.len() {
            if i != j && keep[j] && polys[j].lm().divides(polys[i].lm()) && (polys[j].lm() != polys[i].lm() || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut it = keep.iter();
    polys.retain(|_| *it.next().expect("same length"));
    for i in 0..polys.len() {
        let others: Vec<Polynomial<F>> = polys.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).collect();
        polys[i] = normal_form(&polys[i], &others).monic();
    }
    polys.sort_by(|a, b| order.cmp(b.lm(), a.lm()));
    GroebnerBasis { generators: polys, order, reduced: true, stats: g.stats.clone() }
}

/// Reduced Gröbner basis under `order` (the inputs are re-sorted if needed).
pub fn reduced_groebner_basis<F: Field>(f: &[Polynomial<F>], order: &Arc<MonomialOrder>, opts: &GroebnerOptions) -> Result<GroebnerBasis<F>> {
    let f: Vec<Polynomial<F>> = f.iter().map(|p| p.with_order(order)).collect();
    Ok(reduce_basis(&buchberger(&f, opts)?))
}

/// Reduced basis over the Gaussian rationals: classical Buchberger in
/// strict mode, the multi-modular algorithm otherwise.
pub fn exact_reduced_basis(
    f: &[Polynomial<GaussianRational>],
    order: &Arc<MonomialOrder>,
    opts: &GroebnerOptions,
) -> Result<GroebnerBasis<GaussianRational>> {
    if opts.strict {
        reduced_groebner_basis(f, order, opts)
    } else {
        modular_reduced_basis(f, order, opts)
    }
}

/// True iff the reduced grevlex basis is `{1}`: the system has no common zero over ℂ.
pub fn is_unsat<F: Field>(f: &[Polynomial<F>]) -> Result<bool> {
    is_unsat_with(f, &GroebnerOptions::default())
}

/// Gaussian-rational systems are decided by their images modulo several
/// primes (all must agree, otherwise the full modular basis is computed);
/// other exact fields, and strict mode, run Buchberger directly.
pub fn is_unsat_with<F: Field>(f: &[Polynomial<F>], opts: &GroebnerOptions) -> Result<bool> {
    if !F::EXACT {
        return invalid("certification needs an exact coefficient field");
    }
    let Some(first) = f.first() else {
        return Ok(false);
    };
    if f.iter().all(Polynomial::is_zero) {
        return Ok(false);
    }
    let order = Arc::new(MonomialOrder::grevlex(first.nvars()));
    let gaussian: Option<Vec<Polynomial<GaussianRational>>> = f
        .iter()
        .map(|p| {
            let terms = p.terms().iter().map(|(m, c)| Some((m.clone(), c.to_gaussian()?))).collect::<Option<Vec<_>>>()?;
            Some(Polynomial::from_terms(&order, terms))
        })
        .collect();
    match gaussian {
        Some(g) if !opts.strict => modular::is_unit_ideal(&g, &order, opts),
        _ => Ok(reduced_groebner_basis(f, &order, opts)?.is_one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GaussianRational as Q, PrimeField};

    fn sys(text: &str, order: MonomialOrder) -> Vec<Polynomial<Q>> {
        let o = Arc::new(order);
        text.split(';').map(|t| parse_polynomial(t, &o).unwrap()).collect()
    }

    #[test]
    fn textbook_basis() {
        // x = x1 > y = x2
        let f = sys("x1*x2 + 1; x2 + 1", MonomialOrder::lex(2));
        let s = s_polynomial(&f[0], &f[1]).unwrap();
        // S = f1 − x·f2 = −(x − 1)
        assert_eq!(s.neg(), sys("x1 - 1", MonomialOrder::lex(2))[0]);
        for strict in [true, false] {
            let g = buchberger(&f, &GroebnerOptions { strict, ..Default::default() }).unwrap();
            let r = reduce_basis(&g);
            assert_eq!(r.generators, sys("x1 - 1; x2 + 1", MonomialOrder::lex(2)));
            if strict {
                // the added remainder is −(x − 1)
                assert!(g.generators.iter().any(|p| p.monic() == sys("x1 - 1", MonomialOrder::lex(2))[0]));
            }
        }
    }

    #[test]
    fn unit_ideal() {
        let f = sys("1", MonomialOrder::grevlex(2));
        let g = reduce_basis(&buchberger(&f, &GroebnerOptions::default()).unwrap());
        assert_eq!(g.generators.len(), 1);
        assert!(g.is_one());
        assert!(!is_unsat(&sys("x1", MonomialOrder::grevlex(1))).unwrap());
        assert!(is_unsat(&sys("x1; x1 - 1", MonomialOrder::grevlex(1))).unwrap());
    }

    #[test]
    fn prime_field_certificates() {
        let f = sys("x1*x2 - 1; x1; x2 + 3", MonomialOrder::grevlex(2));
        let fp: Vec<Polynomial<PrimeField>> = f.iter().map(|p| p.map_coeffs(|c| PrimeField::from_gaussian(c).unwrap())).collect();
        assert!(is_unsat(&fp).unwrap());
    }

    #[test]
    fn term_budget_is_enforced() {
        let f = sys("x1^3*x2 + x2^2 + 1; x1*x2^3 + x1 + 2; x1^2 + x2^2 + 3*x1*x2 + 5", MonomialOrder::lex(2));
        let err = buchberger(&f, &GroebnerOptions { max_terms: 3, ..Default::default() });
        assert!(matches!(err, Err(QsatError::ResourceLimit(_))));
    }

    #[test]
    fn dube_bound_is_clamped() {
        assert_eq!(dube_degree_bound(3, 6), HARD_DEGREE_CAP);
        assert_eq!(dube_degree_bound(1, 2), 3);
    }
}
