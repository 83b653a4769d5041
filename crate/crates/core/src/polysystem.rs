//! Polynomial constraint systems in the affine chart `|0⟩ + z|1⟩`.
//!
//! Clause `m` on `(m_1, …, m_k)` becomes
//! `f^m(z) = Σ_t conj(φ^m_t)·∏_j z_{m_j}^{i_j} = ⟨Φ^m|⊗_j(|0⟩ + z_{m_j}|1⟩)`,
//! a multilinear polynomial in the clause's variables.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::field::{Field, GaussianRational};
use crate::graph::DimerCovering;
use crate::groebner::{Monomial, MonomialOrder, Polynomial};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem<F: Field> {
    pub polys: Vec<Polynomial<F>>,
    /// Polynomial variable index -> variable node.
    pub var_map: Vec<usize>,
}

impl<F: Field> PolySystem<F> {
    pub fn nvars(&self) -> usize {
        self.var_map.len()
    }

    pub fn order(&self) -> Arc<MonomialOrder> {
        self.polys.first().map_or_else(|| Arc::new(MonomialOrder::grevlex(self.nvars())), |p| p.order().clone())
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.polys.iter().map(|p| p.eval_complex(z)).collect()
    }
}

fn build<F: Field>(inst: &Instance, coeffs: Vec<Vec<F>>) -> PolySystem<F> {
    let n = inst.n_vars();
    let k = inst.graph.k;
    let order = Arc::new(MonomialOrder::grevlex(n));
    let polys = inst
        .graph
        .clauses
        .iter()
        .zip(coeffs)
        .map(|(vars, c)| {
            Polynomial::from_terms(
                &order,
                c.into_iter().enumerate().map(|(t, a)| {
                    let mut e = vec![0; n];
                    for (j, &v) in vars.iter().enumerate() {
                        e[v] = ((t >> (k - 1 - j)) & 1) as u32;
                    }
                    (Monomial(e), a)
                }),
            )
        })
        .collect();
    PolySystem { polys, var_map: (0..n).collect() }
}

/// Float-coefficient system (exact amplitudes are converted).
pub fn build_equations(inst: &Instance) -> PolySystem<Complex64> {
    let coeffs = inst.projectors.iter().map(|p| p.complex_amplitudes().into_iter().map(|a| a.conj()).collect()).collect();
    build(inst, coeffs)
}

/// Exact system; needs exact projectors.
pub fn build_equations_exact(inst: &Instance) -> Result<PolySystem<GaussianRational>> {
    let Some(coeffs) = inst
        .projectors
        .iter()
        .map(|p| p.exact_amplitudes().map(|a| a.iter().map(GaussianRational::conj).collect::<Vec<_>>()))
        .collect::<Option<Vec<_>>>()
    else {
        return invalid("exact equations need exact projectors");
    };
    Ok(build(inst, coeffs))
}

/// Removes the constant term `conj(φ^m_{0…0})` of each polynomial and returns them.
pub fn drop_constants<F: Field>(s: &PolySystem<F>) -> (PolySystem<F>, Vec<F>) {
    let mut constants = Vec::with_capacity(s.polys.len());
    let polys = s
        .polys
        .iter()
        .map(|p| {
            let one = Monomial::one(p.nvars());
            constants.push(p.coeff(&one));
            Polynomial::from_terms(p.order(), p.terms().iter().filter(|(m, _)| !m.is_one()).cloned())
        })
        .collect();
    (PolySystem { polys, var_map: s.var_map.clone() }, constants)
}

/// Square system in the matched variables: polynomial and variable `m`
/// both belong to clause `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareSystem<F: Field> {
    pub polys: Vec<Polynomial<F>>,
    pub covering: DimerCovering,
    /// Clause `m` -> its matched variable `m_⋆` (an index of the source system).
    pub star_map: Vec<usize>,
    /// Variable count of the source system.
    pub source_nvars: usize,
}

impl<F: Field> SquareSystem<F> {
    pub fn dim(&self) -> usize {
        self.polys.len()
    }

    /// Full source-system vector: `z_{m_⋆} = z*_m`, zero elsewhere.
    pub fn embed(&self, zs: &[Complex64]) -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); self.source_nvars];
        for (m, &v) in self.star_map.iter().enumerate() {
            full[v] = zs[m];
        }
        full
    }
}

/// Zero the uncovered variables and relabel `m_⋆ -> m`.
pub fn reduce_square<F: Field>(s: &PolySystem<F>, cov: &DimerCovering) -> Result<SquareSystem<F>> {
    let n = s.nvars();
    if cov.assignment.len() != s.polys.len() {
        return invalid(format!("covering has {} clauses, system has {}", cov.assignment.len(), s.polys.len()));
    }
    let mut map = vec![None; n];
    for (m, &v) in cov.assignment.iter().enumerate() {
        if v >= n || map[v].is_some() {
            return invalid("covering is not an injective map into the system variables");
        }
        if !s.polys[m].terms().iter().any(|(mono, _)| mono.0[v] > 0) {
            return invalid(format!("variable {v} does not occur in polynomial {m}"));
        }
        map[v] = Some(m);
    }
    let zero: Vec<bool> = map.iter().map(Option::is_none).collect();
    let order = Arc::new(MonomialOrder::grevlex(cov.assignment.len()));
    let polys = s.polys.iter().map(|p| p.set_zero(&zero).relabel(&order, &map)).collect();
    Ok(SquareSystem { polys, covering: cov.clone(), star_map: cov.assignment.clone(), source_nvars: n })
}

/// Entry `(m, j)`: coefficient of the linear monomial `z_j` in `f̂^m`.
pub fn jacobian_at_zero<F: Field>(sq: &SquareSystem<F>) -> DMatrix<Complex64> {
    let d = sq.dim();
    DMatrix::from_fn(d, d, |m, j| sq.polys[m].coeff(&Monomial::var(d, j)).to_complex())
}

/// Determinant by partial-pivot elimination, and the product of row maxima.
pub fn jacobian_determinant(j: &DMatrix<Complex64>) -> (Complex64, f64) {
    let n = j.nrows();
    let mut a = j.clone();
    let row_scale: f64 = (0..n).map(|r| a.row(r).iter().map(|z| z.norm()).fold(0.0, f64::max)).product();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[(x, c)].norm().total_cmp(&a[(y, c)].norm())).expect("rows left");
        if a[(p, c)].norm() == 0.0 {
            return (Complex64::new(0.0, 0.0), row_scale);
        }
        if p != c {
            a.swap_rows(p, c);
            det = -det;
        }
        let piv = a[(c, c)];
        det *= piv;
        for r in c + 1..n {
            let f = a[(r, c)] / piv;
            if f.norm() != 0.0 {
                for k in c..n {
                    let v = a[(c, k)];
                    a[(r, k)] -= f * v;
                }
            }
        }
    }
    (det, row_scale)
}

/// Smallest over largest singular value of `J(0)` must exceed `1e−12`.
///
/// A determinant threshold does not survive large cores: the product of a
/// hundred healthy pivots can sit far below any fixed fraction of `∏ row max`.
pub fn check_nonsingular<F: Field>(sq: &SquareSystem<F>) -> bool {
    let j = jacobian_at_zero(sq);
    if j.nrows() == 0 {
        return true;
    }
    let sv = j.singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > 1e-12 * max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{leaf_removal, max_matching, sample_graph, FactorGraph};
    use crate::instance::{sample_exact_instance, sample_instance, Projector};
    use crate::rng;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_qsat_single_clause() {
        let g = FactorGraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let amps = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 1.0)];
        let inst = Instance::new(g, vec![Projector::from_complex(2, amps).unwrap()]).unwrap();
        let s = build_equations(&inst);
        // a0 + a1 z1 + a2 z2 + a12 z1 z2, with a1 = φ_10 (first qubit) and a2 = φ_01
        let p = &s.polys[0];
        assert_eq!(p.coeff(&Monomial(vec![0, 0])), c(1.0, 0.0));
        assert_eq!(p.coeff(&Monomial(vec![1, 0])), c(3.0, 0.0));
        assert_eq!(p.coeff(&Monomial(vec![0, 1])), c(2.0, 0.0));
        assert_eq!(p.coeff(&Monomial(vec![1, 1])), c(4.0, -1.0));
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn value_is_the_overlap() {
        for s in 0..20u64 {
            let g = sample_graph(6, 4, 3, s).unwrap();
            let inst = sample_instance(&g, s);
            let sys = build_equations(&inst);
            let mut r = rng::stream(s, 1);
            let z: Vec<Complex64> = (0..6).map(|_| c(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))).collect();
            for (m, vars) in g.clauses.iter().enumerate() {
                let qs: Vec<[Complex64; 2]> = vars.iter().map(|&v| [c(1.0, 0.0), z[v]]).collect();
                let direct = inst.projectors[m].overlap(&qs);
                assert!((sys.polys[m].eval_complex(&z) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constants_drop_and_restore() {
        let g = sample_graph(6, 4, 3, 2).unwrap();
        let inst = sample_exact_instance(&g, 9, 2).unwrap();
        let s = build_equations_exact(&inst).unwrap();
        let (d, consts) = drop_constants(&s);
        for ((p, q), k) in s.polys.iter().zip(&d.polys).zip(&consts) {
            assert!(q.coeff(&Monomial::one(6)).is_zero());
            assert_eq!(&q.add(&Polynomial::constant(q.order(), k.clone())), p);
        }
        // float and exact systems carry the same coefficients
        let f = build_equations(&inst);
        for (p, q) in s.polys.iter().zip(&f.polys) {
            for (m, a) in p.terms() {
                assert_eq!(a.to_complex(), q.coeff(m));
            }
        }
    }

    #[test]
    fn zero_constant_gives_trivial_root() {
        let g = sample_graph(5, 3, 3, 4).unwrap();
        let mut inst = sample_instance(&g, 4);
        for p in &mut inst.projectors {
            let mut a = p.complex_amplitudes();
            a[0] = c(0.0, 0.0);
            *p = Projector::from_complex(3, a).unwrap();
        }
        let s = build_equations(&inst);
        assert!(s.eval(&[c(0.0, 0.0); 5]).iter().all(|v| v.norm() == 0.0));
    }

    fn covered_core(seed: u64) -> Option<(Instance, DimerCovering)> {
        let g = sample_graph(30, 26, 3, seed).unwrap();
        let r = leaf_removal(&g);
        if r.is_empty() {
            return None;
        }
        let cov = max_matching(&r.core).covering()?;
        let inst = sample_instance(&r.core, seed);
        Some((inst, cov))
    }

    #[test]
    fn square_reduction_structure() {
        let mut tested = 0;
        for s in 0..300u64 {
            let Some((inst, cov)) = covered_core(s) else { continue };
            let (sys, _) = drop_constants(&build_equations(&inst));
            let sq = reduce_square(&sys, &cov).unwrap();
            let jac = jacobian_at_zero(&sq);
            for (m, vars) in inst.graph.clauses.iter().enumerate() {
                // diagonal: conj of the amplitude with a single 1 at m_⋆
                let pos = vars.iter().position(|&v| v == cov.assignment[m]).unwrap();
                let t = 1 << (2 - pos);
                let phi = inst.projectors[m].complex_amplitudes()[t].conj();
                assert_eq!(jac[(m, m)], phi);
                assert!(jac[(m, m)].norm() > 1e-12);
                for j in 0..sq.dim() {
                    if jac[(m, j)].norm() != 0.0 {
                        assert!(vars.contains(&cov.assignment[j]));
                    }
                }
                // uncovered variables are gone
                for (mono, _) in sq.polys[m].terms() {
                    assert_eq!(mono.nvars(), sq.dim());
                }
            }
            assert!(check_nonsingular(&sq), "seed {s}");
            tested += 1;
            if tested == 100 {
                break;
            }
        }
        assert_eq!(tested, 100);
    }

    #[test]
    fn covering_all_variables_is_a_relabelling() {
        let g = FactorGraph::new(3, 4, (0..4).map(|i| vec![i, (i + 1) % 4, (i + 2) % 4]).collect()).unwrap();
        let inst = sample_instance(&g, 1);
        let sys = build_equations(&inst);
        let cov = max_matching(&g).covering().unwrap();
        let sq = reduce_square(&sys, &cov).unwrap();
        for (p, q) in sys.polys.iter().zip(&sq.polys) {
            assert_eq!(p.len(), q.len());
        }
        let z: Vec<Complex64> = (0..4).map(|i| c(0.1 * i as f64, -0.2)).collect();
        let full = sq.embed(&z);
        for (p, q) in sys.polys.iter().zip(&sq.polys) {
            assert!((p.eval_complex(&full) - q.eval_complex(&z)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_clause_jacobian() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let inst = sample_instance(&g, 5);
        let sq = reduce_square(&build_equations(&inst), &DimerCovering { assignment: vec![1] }).unwrap();
        let j = jacobian_at_zero(&sq);
        assert_eq!(j.shape(), (1, 1));
        assert_eq!(j[(0, 0)], inst.projectors[0].complex_amplitudes()[0b010].conj());
        assert!(reduce_square(&build_equations(&inst), &DimerCovering { assignment: vec![] }).is_err());
    }

    #[test]
    fn determinant_checks() {
        let zero_row = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let (d, _) = jacobian_determinant(&zero_row);
        assert_eq!(d, c(0.0, 0.0));
        let mut r = rng::stream(3, 3);
        let m = DMatrix::from_fn(5, 5, |_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let (d1, _) = jacobian_determinant(&m);
        let mut p = m.clone();
        p.swap_rows(0, 3);
        p.swap_rows(1, 4);
        let (d2, _) = jacobian_determinant(&p);
        assert!((d1.norm() - d2.norm()).abs() < 1e-9 * d1.norm());
        assert!((d1 - m.determinant()).norm() < 1e-10);
    }
}
