//! Order change for zero-dimensional ideals: walk the target staircase in
//! increasing order and find linear relations among normal forms in the
//! quotient ring of the source basis.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::{normal_form, Polynomial};
use super::GroebnerBasis;
use crate::field::Field;

/// Quotient rings larger than this are left to Buchberger.
pub const FGLM_MAX_DIM: usize = 4000;

struct Row<F> {
    pivot: usize,
    vec: Vec<F>,
    /// `vec = Σ combo_j·NF(staircase_j)`
    combo: Vec<F>,
}

/// Standard monomials of a zero-dimensional reduced basis, `None` otherwise.
fn standard_monomials<F: Field>(gb: &GroebnerBasis<F>, cap: usize) -> Option<Vec<Monomial>> {
    let n = gb.order.nvars();
    let mut has = vec![false; n];
    for g in &gb.generators {
        if let Some((i, _)) = g.lm().pure_power() {
            has[i] = true;
        }
    }
    if !has.iter().all(|&h| h) {
        return None;
    }
    let leads: Vec<&Monomial> = gb.generators.iter().map(Polynomial::lm).collect();
    let mut out = vec![Monomial::one(n)];
    let mut seen: HashSet<Monomial> = out.iter().cloned().collect();
    let mut head = 0;
    while head < out.len() {
        let b = out[head].clone();
        head += 1;
        for i in 0..n {
            let m = b.mul(&Monomial::var(n, i));
            if !leads.iter().any(|l| l.divides(&m)) && seen.insert(m.clone()) {
                out.push(m);
                if out.len() > cap {
                    return None;
                }
            }
        }
    }
    Some(out)
}

/// Reduced basis of the same ideal under `target`. `None` when the ideal is
/// not zero-dimensional (or its quotient is too large).
pub(crate) fn fglm<F: Field>(gb: &GroebnerBasis<F>, target: &Arc<MonomialOrder>) -> Option<GroebnerBasis<F>> {
    let n = gb.order.nvars();
    if gb.is_one() {
        return Some(GroebnerBasis { generators: vec![Polynomial::one(target)], order: target.clone(), reduced: true, stats: gb.stats.clone() });
    }
    let standard = standard_monomials(gb, FGLM_MAX_DIM)?;
    let d = standard.len();
    let index: HashMap<&Monomial, usize> = standard.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let to_vec = |p: &Polynomial<F>| {
        let mut v = vec![F::zero(); d];
        for (m, c) in p.terms() {
            v[index[m]] = c.clone();
        }
        v
    };

    let one = Polynomial::one(&gb.order);
    let mut staircase = vec![Monomial::one(n)];
    let mut nfs = vec![one.clone()];
    let mut rows = vec![Row { pivot: index[&Monomial::one(n)], vec: to_vec(&one), combo: vec![F::one()] }];
    let mut found: Vec<Polynomial<F>> = Vec::new();
    // (monomial, staircase parent, variable)
    let mut cands: Vec<(Monomial, usize, usize)> = (0..n).map(|i| (Monomial::var(n, i), 0, i)).collect();
    let mut queued: HashSet<Monomial> = cands.iter().map(|c| c.0.clone()).collect();

    while !cands.is_empty() {
        let k = (0..cands.len()).min_by(|&a, &b| target.cmp(&cands[a].0, &cands[b].0)).expect("nonempty");
        let (m, parent, var) = cands.swap_remove(k);
        if found.iter().any(|g| g.lm().divides(&m)) {
            continue;
        }
        let nf = normal_form(&nfs[parent].mul_term(&Monomial::var(n, var), &F::one()), &gb.generators);
        let mut v = to_vec(&nf);
        let mut combo = vec![F::zero(); staircase.len()];
        for row in &rows {
            let c = &v[row.pivot];
            if c.is_zero() {
                continue;
            }
            let f = c.div(&row.vec[row.pivot]);
            for (a, b) in v.iter_mut().zip(&row.vec) {
                if !b.is_zero() {
                    *a = a.sub(&f.mul(b));
                }
            }
            for (a, b) in combo.iter_mut().zip(&row.combo) {
                if !b.is_zero() {
                    *a = a.sub(&f.mul(b));
                }
            }
        }
        match v.iter().position(|c| !c.is_zero()) {
            None => {
                // NF(m + Σ combo_j·b_j) = 0
                let terms = std::iter::once((m, F::one()))
                    .chain(staircase.iter().cloned().zip(combo).filter(|(_, c)| !c.is_zero()));
                found.push(Polynomial::from_terms(target, terms));
            }
            Some(pivot) => {
                combo.push(F::one());
                rows.push(Row { pivot, vec: v, combo });
                let s = staircase.len();
                for i in 0..n {
                    let next = m.mul(&Monomial::var(n, i));
                    if queued.insert(next.clone()) {
                        cands.push((next, s, i));
                    }
                }
                staircase.push(m);
                nfs.push(nf);
            }
        }
    }
    found.sort_by(|a, b| target.cmp(b.lm(), a.lm()));
    Some(GroebnerBasis { generators: found, order: target.clone(), reduced: true, stats: gb.stats.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groebner::{parse_system, reduced_groebner_basis, GroebnerOptions};

    #[test]
    fn grevlex_to_lex_matches_buchberger() {
        let lex = Arc::new(MonomialOrder::lex(3));
        let grevlex = Arc::new(MonomialOrder::grevlex(3));
        for text in [
            "x1^2 + x2*x3 - 2\nx2^2 - x1 + 3*x3\nx3^2 + x1*x2 - 1",
            "x1*x2 + 2*x1 + 3*x2 + 4\n5*x2^2 + 6*x1 + 7\nx3 - x1 - x2",
            "x1 - 1\nx2 - 2\nx3^2 - x3",
        ] {
            let (_, f) = parse_system(text, Some(3)).unwrap();
            let g = reduced_groebner_basis(&f, &grevlex, &GroebnerOptions::default()).unwrap();
            let want = reduced_groebner_basis(&f, &lex, &GroebnerOptions::default()).unwrap();
            assert_eq!(fglm(&g, &lex).unwrap().generators, want.generators, "{text}");
        }
    }

    #[test]
    fn positive_dimensional_is_declined() {
        let grevlex = Arc::new(MonomialOrder::grevlex(2));
        let (_, f) = parse_system("x1*x2 - 1", Some(2)).unwrap();
        let g = reduced_groebner_basis(&f, &grevlex, &GroebnerOptions::default()).unwrap();
        assert!(fglm(&g, &Arc::new(MonomialOrder::lex(2))).is_none());
    }
}
