//! Complete complex solution sets of small zero-dimensional systems.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::{normal_form, Polynomial};
use super::{exact_reduced_basis, GroebnerBasis, GroebnerOptions};
use crate::error::{invalid, QsatError, Result};
use crate::field::{Field, GaussianRational};
use crate::rng;

pub const MAX_SOLVE_VARS: usize = 6;
const POLISH_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-7;

/// Every variable needs a pure-power leading monomial.
fn check_zero_dimensional<F: Field>(gb: &GroebnerBasis<F>) -> Result<()> {
    let n = gb.order.nvars();
    let mut has = vec![false; n];
    for g in &gb.generators {
        if let Some((i, _)) = g.lm().pure_power() {
            has[i] = true;
        }
    }
    if has.iter().all(|&h| h) {
        Ok(())
    } else {
        Err(QsatError::NotZeroDimensional)
    }
}

/// Eigenvalues of a square complex matrix (Schur form).
fn eigenvalues(m: DMatrix<Complex64>) -> Vec<Complex64> {
    m.schur().eigenvalues().expect("complex Schur always yields eigenvalues").iter().copied().collect()
}

/// Roots of `Σ c_i x^i` (`c` ascending, trailing coefficient nonzero).
fn univariate_roots(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = c[d];
    let comp = DMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -c[d - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    eigenvalues(comp)
        .into_iter()
        .map(|mut r| {
            for _ in 0..8 {
                let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for &a in c.iter().rev() {
                    dp = dp * r + p;
                    p = p * r + a;
                }
                if dp.norm() == 0.0 {
                    break;
                }
                r -= p / dp;
            }
            r
        })
        .collect()
}

fn scaled_residual(f: &[Polynomial<GaussianRational>], scales: &[f64], x: &[Complex64]) -> f64 {
    f.iter().zip(scales).map(|(p, s)| p.eval_complex(x).norm() / s).fold(0.0, f64::max)
}

fn coefficient_scales(f: &[Polynomial<GaussianRational>]) -> Vec<f64> {
    f.iter()
        .map(|p| p.terms().iter().map(|(_, c)| c.to_complex().norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE))
        .collect()
}

/// Gauss–Newton refinement on `f = 0` with coefficient-scaled equations.
/// Returns the polished point and its scaled residual.
pub fn newton_polish(f: &[Polynomial<GaussianRational>], x0: &[Complex64], iters: usize) -> (Vec<Complex64>, f64) {
    let scales = coefficient_scales(f);
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut res = scaled_residual(f, &scales, &x);
    for _ in 0..iters {
        if res < 1e-15 {
            break;
        }
        let fx = DVector::from_iterator(f.len(), f.iter().zip(&scales).map(|(p, s)| -p.eval_complex(&x) / *s));
        let j = DMatrix::from_fn(f.len(), n, |r, c| f[r].eval_partial_complex(c, &x) / scales[r]);
        let Ok(dx) = j.svd(true, true).solve(&fx, 1e-14) else { break };
        let cand: Vec<Complex64> = x.iter().zip(dx.iter()).map(|(a, d)| a + d).collect();
        let r = scaled_residual(f, &scales, &cand);
        if !(r < res) {
            break;
        }
        x = cand;
        res = r;
    }
    (x, res)
}

fn dedup(mut roots: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for r in roots {
        let scale = 1.0 + r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !out.iter().any(|o| o.iter().zip(&r).all(|(a, b)| (a - b).norm() < DEDUP_TOL * scale)) {
            out.push(r);
        }
    }
    out
}

fn finish(f: &[Polynomial<GaussianRational>], candidates: Vec<Vec<Complex64>>) -> Result<Vec<Vec<Complex64>>> {
    let mut roots = Vec::new();
    for c in candidates {
        let (x, res) = newton_polish(f, &c, 50);
        if res >= POLISH_TOL {
            return Err(QsatError::Invariant(format!("root did not polish below {POLISH_TOL:e} (residual {res:e})")));
        }
        roots.push(x);
    }
    Ok(dedup(roots))
}

pub fn solve_lex(f: &[Polynomial<GaussianRational>]) -> Result<Vec<Vec<Complex64>>> {
    solve_lex_with(f, &GroebnerOptions::default())
}

/// All complex roots via a lex basis (`x1 > … > xn`): the last generator is
/// univariate in `xn`; each root is extended one variable at a time.
pub fn solve_lex_with(f: &[Polynomial<GaussianRational>], opts: &GroebnerOptions) -> Result<Vec<Vec<Complex64>>> {
    let Some(first) = f.first() else {
        return invalid("empty system");
    };
    let n = first.nvars();
    if n > MAX_SOLVE_VARS {
        return invalid(format!("solve_lex handles at most {MAX_SOLVE_VARS} variables, got {n}"));
    }
    let order = Arc::new(MonomialOrder::lex(n));
    let gb = exact_reduced_basis(f, &order, opts)?;
    if gb.is_one() {
        return Ok(Vec::new());
    }
    check_zero_dimensional(&gb)?;
    let lowest_var = |p: &Polynomial<GaussianRational>| {
        p.terms().iter().flat_map(|(m, _)| m.0.iter().position(|&e| e > 0)).min()
    };

    let mut partial: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]];
    for j in (0..n).rev() {
        let polys: Vec<&Polynomial<GaussianRational>> = gb.generators.iter().filter(|p| lowest_var(p) == Some(j)).collect();
        let mut next = Vec::new();
        for x in &partial {
            // univariate images in x_j, ascending coefficients
            let images: Vec<Vec<Complex64>> = polys
                .iter()
                .map(|p| {
                    let deg = p.terms().iter().map(|(m, _)| m.0[j]).max().unwrap_or(0) as usize;
                    let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
                    for (m, a) in p.terms() {
                        let v = (j + 1..n).fold(a.to_complex(), |t, l| t * x[l].powu(m.0[l]));
                        c[m.0[j] as usize] += v;
                    }
                    c
                })
                .collect();
            let trimmed: Vec<Vec<Complex64>> = images
                .iter()
                .map(|c| {
                    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    let mut c = c.clone();
                    while c.len() > 1 && c.last().is_some_and(|z| z.norm() <= 1e-9 * scale) {
                        c.pop();
                    }
                    c
                })
                .collect();
            let Some(pivot) = trimmed.iter().filter(|c| c.len() > 1).min_by_key(|c| c.len()) else {
                continue;
            };
            for r in univariate_roots(pivot) {
                let ok = trimmed.iter().zip(&images).all(|(c, full)| {
                    let scale = full.iter().map(|z| z.norm()).fold(0.0, f64::max) * (1.0 + r.norm()).powi(c.len() as i32);
                    let v: Complex64 = c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * r + a);
                    v.norm() <= 1e-6 * scale.max(f64::MIN_POSITIVE)
                });
                if ok {
                    let mut y = x.clone();
                    y[j] = r;
                    next.push(y);
                }
            }
        }
        partial = dedup(next);
    }
    finish(f, partial)
}

/// All complex roots via grevlex normal forms and the eigenvectors of a
/// random linear multiplication map on the quotient ring.
pub fn solve_zero_dimensional(f: &[Polynomial<GaussianRational>], opts: &GroebnerOptions, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    let Some(first) = f.first() else {
        return invalid("empty system");
    };
    let n = first.nvars();
    let order = Arc::new(MonomialOrder::grevlex(n));
    let gb = exact_reduced_basis(f, &order, opts)?;
    if gb.is_one() {
        return Ok(Vec::new());
    }
    check_zero_dimensional(&gb)?;

    // standard monomials by breadth-first closure from 1
    let leads: Vec<&Monomial> = gb.generators.iter().map(Polynomial::lm).collect();
    let standard = |m: &Monomial| !leads.iter().any(|l| l.divides(m));
    let mut basis = vec![Monomial::one(n)];
    let mut index: HashMap<Monomial, usize> = HashMap::from([(Monomial::one(n), 0)]);
    let mut head = 0;
    while head < basis.len() {
        let b = basis[head].clone();
        head += 1;
        for i in 0..n {
            let m = b.mul(&Monomial::var(n, i));
            if standard(&m) && !index.contains_key(&m) {
                index.insert(m.clone(), basis.len());
                basis.push(m);
                if basis.len() > 20_000 {
                    return Err(QsatError::ResourceLimit("quotient ring too large".into()));
                }
            }
        }
    }
    let d = basis.len();

    // multiplication matrices, column b = NF(x_i·b) in the standard basis
    let mult: Vec<DMatrix<Complex64>> = (0..n)
        .map(|i| {
            let mut m = DMatrix::zeros(d, d);
            for (col, b) in basis.iter().enumerate() {
                let p = Polynomial::monomial(&order, b.mul(&Monomial::var(n, i)), GaussianRational::one());
                for (mono, c) in normal_form(&p, &gb.generators).terms() {
                    m[(index[mono], col)] = c.to_complex();
                }
            }
            m
        })
        .collect();
    let mut r = rng::stream(seed, 9);
    let weights: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let ml = mult.iter().zip(&weights).fold(DMatrix::zeros(d, d), |acc, (m, w)| acc + m * *w);

    // left eigenvectors of M_ℓ are evaluation vectors [b(p)]_b
    let schur = ml.transpose().schur();
    let (q, t) = schur.unpack();
    let mut candidates = Vec::with_capacity(d);
    for k in 0..d {
        let lambda = t[(k, k)];
        let mut y = DVector::<Complex64>::zeros(d);
        y[k] = Complex64::new(1.0, 0.0);
        for jj in (0..k).rev() {
            let s: Complex64 = (jj + 1..=k).map(|l| t[(jj, l)] * y[l]).sum();
            let mut den = t[(jj, jj)] - lambda;
            if den.norm() < 1e-14 {
                den = Complex64::new(1e-14, 0.0);
            }
            y[jj] = -s / den;
        }
        let v = &q * y;
        if v[0].norm() < 1e-12 * v.norm() {
            continue;
        }
        let x: Vec<Complex64> = (0..n)
            .map(|i| (0..d).map(|c| v[c] * mult[i][(c, 0)]).sum::<Complex64>() / v[0])
            .collect();
        candidates.push(x);
    }
    finish(f, candidates)
}
