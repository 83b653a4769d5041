//! Continuation from the trivial root of the constant-free square system,
//! and the full product-state pipeline built on it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QsatError, Result};
use crate::field::Field;
use crate::graph::{hall_violator_from, leaf_removal, max_matching, HallViolator};
use crate::instance::{max_residual, Instance, ProductState};
use crate::polysystem::{build_equations, check_nonsingular, drop_constants, reduce_square, SquareSystem};
use crate::rng;
use crate::transfer::{reconstruct_with, FreeQubits};

pub const INITIAL_STEP: f64 = 0.1;
pub const MIN_STEP: f64 = 1e-12;
pub const CORRECTOR_ITERS: usize = 6;
pub const CORRECTOR_TOL: f64 = 1e-11;
pub const MAX_RETRIES: usize = 5;

const POLISH_ITERS: usize = 30;
const DIVERGENCE: f64 = 1e10;

type Term = (Complex64, Vec<(usize, u32)>);

/// Sparse evaluation form of a polynomial system.
struct Compiled {
    n: usize,
    eqs: Vec<Vec<Term>>,
}

impl Compiled {
    fn new<F: Field>(sq: &SquareSystem<F>) -> Self {
        let eqs = sq
            .polys
            .iter()
            .map(|p| {
                p.terms()
                    .iter()
                    .map(|(m, c)| {
                        let vars = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, &e)| (v, e)).collect();
                        (c.to_complex(), vars)
                    })
                    .collect()
            })
            .collect();
        Compiled { n: sq.dim(), eqs }
    }

    fn monomial(z: &[Complex64], vars: &[(usize, u32)], skip: Option<usize>) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (i, &(v, e)) in vars.iter().enumerate() {
            let e = if Some(i) == skip { e - 1 } else { e };
            if e > 0 {
                acc *= z[v].powu(e);
            }
        }
        acc
    }

    /// Values and per-equation scale `Σ|term|`.
    fn eval(&self, z: &[Complex64]) -> (Vec<Complex64>, Vec<f64>) {
        self.eqs
            .iter()
            .map(|eq| {
                eq.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(s, a), (c, vars)| {
                    let t = c * Self::monomial(z, vars, None);
                    (s + t, a + t.norm())
                })
            })
            .unzip()
    }

    fn jacobian(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let mut j = DMatrix::zeros(self.n, self.n);
        for (m, eq) in self.eqs.iter().enumerate() {
            for (c, vars) in eq {
                for (i, &(v, e)) in vars.iter().enumerate() {
                    j[(m, v)] += c * f64::from(e) * Self::monomial(z, vars, Some(i));
                }
            }
        }
        j
    }
}

struct Path<'a> {
    sys: &'a Compiled,
    c: &'a [Complex64],
    gamma: Complex64,
}

impl Path<'_> {
    /// `s(t) = t·(γ(1−t) + t)`: `s(0) = 0`, `s(1) = 1`.
    fn s(&self, t: f64) -> Complex64 {
        t * (self.gamma * (1.0 - t) + t)
    }

    fn ds(&self, t: f64) -> Complex64 {
        self.gamma * (1.0 - 2.0 * t) + 2.0 * t
    }

    /// `‖H(z,t)‖_∞` and the same relative to the term magnitudes.
    fn residual(&self, z: &[Complex64], t: f64) -> (Vec<Complex64>, f64, f64) {
        let s = self.s(t);
        let (v, scale) = self.sys.eval(z);
        let h: Vec<Complex64> = v.iter().zip(self.c).map(|(f, c)| f + s * c).collect();
        let abs = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let rel = h
            .iter()
            .zip(&scale)
            .zip(self.c)
            .map(|((x, a), c)| x.norm() / (1.0 + a + (s * c).norm()))
            .fold(0.0, f64::max);
        (h, abs, rel)
    }

    fn newton_step(&self, z: &[Complex64], h: &[Complex64]) -> Option<Vec<Complex64>> {
        let j = self.sys.jacobian(z);
        let rhs = DVector::from_iterator(h.len(), h.iter().map(|x| -x));
        let dz = j.lu().solve(&rhs)?;
        Some(z.iter().zip(dz.iter()).map(|(a, b)| a + b).collect())
    }

    /// Newton at fixed `t`; fails on a residual increase or no convergence.
    fn correct(&self, mut z: Vec<Complex64>, t: f64, iters: usize, tol: f64) -> Option<Vec<Complex64>> {
        let (mut h, _, mut rel) = self.residual(&z, t);
        for _ in 0..iters {
            if rel <= tol {
                return Some(z);
            }
            let next = self.newton_step(&z, &h)?;
            let (nh, _, nrel) = self.residual(&next, t);
            if !(nrel <= rel) {
                return None;
            }
            (z, h, rel) = (next, nh, nrel);
        }
        (rel <= tol).then_some(z)
    }

    fn tangent(&self, z: &[Complex64], t: f64) -> Option<Vec<Complex64>> {
        let j = self.sys.jacobian(z);
        let ds = self.ds(t);
        let rhs = DVector::from_iterator(self.c.len(), self.c.iter().map(|c| -ds * c));
        Some(j.lu().solve(&rhs)?.iter().copied().collect())
    }
}

fn norm_inf(z: &[Complex64]) -> f64 {
    z.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn random_phase(seed: u64) -> Complex64 {
    let theta = rng::stream(seed, 0x6a6d).random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(1.0, theta)
}

/// Track `F_sqr(z) + s(t)·c = 0` from `z = 0` at `t = 0` to `t = 1`.
/// Returns `z*` with `‖F_sqr(z*) + c‖_∞ < tol`.
pub fn solve_square<F: Field>(sq: &SquareSystem<F>, constants: &[F], seed: u64, tol: f64) -> Result<Vec<Complex64>> {
    if constants.len() != sq.dim() {
        return invalid(format!("{} constants for {} equations", constants.len(), sq.dim()));
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if sq.polys.iter().any(|p| p.terms().iter().any(|(m, _)| m.is_one())) {
        return invalid("square system must be constant-free");
    }
    if !check_nonsingular(sq) {
        return invalid("jacobian at the origin is singular");
    }
    if sq.dim() == 0 {
        return Ok(vec![]);
    }
    let sys = Compiled::new(sq);
    let c: Vec<Complex64> = constants.iter().map(Field::to_complex).collect();
    let path = Path { sys: &sys, c: &c, gamma: random_phase(seed) };

    let mut z = vec![Complex64::new(0.0, 0.0); sq.dim()];
    let mut t = 0.0;
    let mut h = INITIAL_STEP;
    let mut streak = 0;
    while t < 1.0 {
        if h < MIN_STEP {
            return Err(QsatError::PathFailure { t });
        }
        let step = h.min(1.0 - t);
        let t1 = if t + step >= 1.0 - 1e-15 { 1.0 } else { t + step };
        let accepted = path.tangent(&z, t).and_then(|dz| {
            let pred: Vec<Complex64> = z.iter().zip(&dz).map(|(a, b)| a + step * b).collect();
            let moved = z.iter().zip(&pred).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let corr = path.correct(pred.clone(), t1, CORRECTOR_ITERS, CORRECTOR_TOL)?;
            let fix = pred.iter().zip(&corr).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            // a large correction relative to the predicted move suggests a jump to another path
            (fix <= 0.5 * moved.max(1e-6 * (1.0 + norm_inf(&z)))).then_some(corr)
        });
        match accepted {
            Some(next) => {
                if norm_inf(&next) > DIVERGENCE {
                    return Err(QsatError::PathFailure { t: t1 });
                }
                z = next;
                t = t1;
                streak += 1;
                if streak >= 3 {
                    h = (2.0 * h).min(INITIAL_STEP);
                    streak = 0;
                }
            }
            None => {
                h /= 2.0;
                streak = 0;
            }
        }
    }

    // final polish on the absolute residual
    let (mut hv, mut abs, _) = path.residual(&z, 1.0);
    for _ in 0..POLISH_ITERS {
        if abs < tol * 1e-3 {
            break;
        }
        let Some(next) = path.newton_step(&z, &hv) else { break };
        let (nh, nabs, _) = path.residual(&next, 1.0);
        if !(nabs < abs) {
            break;
        }
        (z, hv, abs) = (next, nh, nabs);
    }
    if abs < tol {
        Ok(z)
    } else {
        Err(QsatError::PathFailure { t: 1.0 })
    }
}

/// A product state satisfying every clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProdsatSolution {
    pub state: ProductState,
    pub max_residual: f64,
    pub core_vars: usize,
    pub core_clauses: usize,
    /// Continuation attempts used (0 when the core is empty).
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProdsatOutcome {
    Solution(ProdsatSolution),
    /// Hall violator of the core, in original clause and variable labels.
    NoCovering(HallViolator),
}

/// Peel, match, solve the core by continuation and extend along the peeling.
pub fn prodsat_solve(inst: &Instance, seed: u64, tol: f64) -> Result<ProdsatOutcome> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let cr = leaf_removal(&inst.graph);
    let free = FreeQubits::Uniform;
    let finish = |state: ProductState, attempts: usize| -> Result<ProdsatOutcome> {
        let res = max_residual(inst, &state);
        if !(res < tol) {
            return Err(QsatError::Invariant(format!("assembled state has residual {res:e}")));
        }
        Ok(ProdsatOutcome::Solution(ProdsatSolution {
            state,
            max_residual: res,
            core_vars: cr.core.n_vars,
            core_clauses: cr.core.n_clauses(),
            attempts,
        }))
    };
    if cr.is_empty() {
        return finish(reconstruct_with(&cr, None, inst, free)?, 0);
    }

    let mm = max_matching(&cr.core);
    let Some(cov) = mm.covering() else {
        let hv = hall_violator_from(&cr.core, &mm).expect("no covering implies a violator");
        return Ok(ProdsatOutcome::NoCovering(HallViolator {
            clauses: hv.clauses.iter().map(|&c| cr.clause_map[c]).collect(),
            neighborhood: hv.neighborhood.iter().map(|&v| cr.var_map[v]).collect(),
            root: cr.clause_map[hv.root],
        }));
    };

    let core_inst = Instance {
        graph: cr.core.clone(),
        projectors: cr.clause_map.iter().map(|&c| inst.projectors[c].clone()).collect(),
        mode: inst.mode,
    };
    let (sys, constants) = drop_constants(&build_equations(&core_inst));
    let sq = reduce_square(&sys, &cov)?;
    let inner_tol = tol.min(1e-10);
    let mut last = None;
    for attempt in 0..MAX_RETRIES {
        match solve_square(&sq, &constants, rng::derive_seed(seed, attempt as u64), inner_tol) {
            Ok(zs) => {
                let state = ProductState::from_z(&sq.embed(&zs));
                return finish(reconstruct_with(&cr, Some(&state), inst, free)?, attempt + 1);
            }
            Err(e @ QsatError::PathFailure { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaussianRational;
    use crate::graph::{clauses_for_density, sample_graph, DimerCovering, FactorGraph};
    use crate::groebner::solve_lex;
    use crate::instance::{evaluate_state, sample_exact_instance, sample_instance, Projector};
    use crate::polysystem::build_equations_exact;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_single_clause() {
        let g = FactorGraph::new(1, 1, vec![vec![0]]).unwrap();
        let inst = Instance::new(g, vec![Projector::from_complex(1, vec![c(0.3, -0.2), c(0.7, 0.4)]).unwrap()]).unwrap();
        let (sys, k) = drop_constants(&build_equations(&inst));
        let sq = reduce_square(&sys, &DimerCovering { assignment: vec![0] }).unwrap();
        let z = solve_square(&sq, &k, 1, 1e-12).unwrap();
        let a0 = c(0.3, 0.2);
        let a1 = c(0.7, -0.4);
        assert!((z[0] + a0 / a1).norm() < 1e-12);
    }

    #[test]
    fn matches_lex_roots() {
        // three 2-local equations on a triangle
        let g = FactorGraph::new(2, 3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        for s in 0..5 {
            let inst = sample_exact_instance(&g, 20, s).unwrap();
            let exact = build_equations_exact(&inst).unwrap();
            let roots = solve_lex(&exact.polys).unwrap();
            let (sys, k) = drop_constants(&exact);
            let cov = max_matching(&g).covering().unwrap();
            let sq = reduce_square(&sys, &cov).unwrap();
            let z = solve_square(&sq, &k, s, 1e-10).unwrap();
            let full = sq.embed(&z);
            let best = roots
                .iter()
                .map(|r| r.iter().zip(&full).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "seed {s}: {best}");
        }
    }

    #[test]
    fn tiny_constants_stay_near_origin() {
        let g = sample_graph(8, 7, 3, 3).unwrap();
        let cr = leaf_removal(&g);
        let g = if cr.is_empty() { FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap() } else { cr.core };
        let mut inst = sample_instance(&g, 3);
        for p in &mut inst.projectors {
            let mut a = p.complex_amplitudes();
            let n0 = a[0].norm();
            a[0] *= 1e-4 / n0;
            *p = Projector::from_complex(g.k, a).unwrap();
        }
        let (sys, k) = drop_constants(&build_equations(&inst));
        let Some(cov) = max_matching(&g).covering() else { return };
        let sq = reduce_square(&sys, &cov).unwrap();
        let z = solve_square(&sq, &k, 9, 1e-12).unwrap();
        assert!(norm_inf(&z) < 1e-2);
        // Newton started at the origin lands on the same root
        let path = Path { sys: &Compiled::new(&sq), c: &k, gamma: c(1.0, 0.0) };
        let mut w = vec![c(0.0, 0.0); sq.dim()];
        for _ in 0..20 {
            let (h, _, _) = path.residual(&w, 1.0);
            w = path.newton_step(&w, &h).unwrap();
        }
        assert!(w.iter().zip(&z).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn deterministic_and_embedded() {
        for s in 0..10 {
            let g = sample_graph(40, clauses_for_density(40, 0.9), 3, s).unwrap();
            let cr = leaf_removal(&g);
            let Some(cov) = max_matching(&cr.core).covering() else { continue };
            if cr.is_empty() {
                continue;
            }
            let core_inst = sample_instance(&cr.core, s);
            let full = build_equations(&core_inst);
            let (sys, k) = drop_constants(&full);
            let sq = reduce_square(&sys, &cov).unwrap();
            let a = solve_square(&sq, &k, 4, 1e-10).unwrap();
            let b = solve_square(&sq, &k, 4, 1e-10).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12));
            // the unreduced system vanishes at the embedded point
            let z = sq.embed(&a);
            assert!(full.eval(&z).iter().all(|v| v.norm() < 1e-9));
        }
    }

    #[test]
    fn rejects_singular_start() {
        let g = FactorGraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let inst = Instance::new(g, vec![Projector::from_complex(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap()]).unwrap();
        let (sys, k) = drop_constants(&build_equations(&inst));
        let sq = reduce_square(&sys, &DimerCovering { assignment: vec![1] }).unwrap();
        assert!(matches!(solve_square(&sq, &k, 0, 1e-10), Err(QsatError::InvalidParameters(_))));
    }

    #[test]
    fn pipeline_small() {
        let mut solved = 0;
        let mut certs = 0;
        for s in 0..20 {
            let g = sample_graph(60, clauses_for_density(60, 0.85), 3, s).unwrap();
            let inst = sample_instance(&g, s);
            match prodsat_solve(&inst, s, 1e-8).unwrap() {
                ProdsatOutcome::Solution(sol) => {
                    assert!(evaluate_state(&inst, &sol.state).iter().all(|&r| r < 1e-8));
                    solved += 1;
                }
                ProdsatOutcome::NoCovering(hv) => {
                    let (sub, _) = inst.graph.restrict(&hv.clauses);
                    assert_eq!(hv.clauses.len(), hv.neighborhood.len() + 1);
                    assert_eq!(sub.n_vars, hv.neighborhood.len());
                    assert!(hv.verify(&inst.graph));
                    certs += 1;
                }
            }
        }
        assert_eq!(solved + certs, 20);
        assert!(solved > 0);
    }

    #[test]
    fn exact_square_system() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        let inst = sample_exact_instance(&g, 30, 2).unwrap();
        let (sys, k) = drop_constants(&build_equations_exact(&inst).unwrap());
        let sq = reduce_square::<GaussianRational>(&sys, &max_matching(&g).covering().unwrap()).unwrap();
        let z = solve_square(&sq, &k, 0, 1e-10).unwrap();
        let (sysf, kf) = drop_constants(&build_equations(&inst));
        let v = sysf.eval(&z);
        assert!(v.iter().zip(&kf).all(|(a, b)| (a + b).norm() < 1e-10));
    }
}
