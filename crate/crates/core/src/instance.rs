//! Projectors, instances, product states and the kernel of `H_F`.
//!
//! Amplitude index convention: for a clause on `(m_1, …, m_k)` the amplitude
//! `φ_{i_1…i_k}` lives at `t = Σ_j i_j·2^{k−j}`, so `i_1` is the most
//! significant bit. Full `2^N` vectors use the same rule with variable 0 as the
//! most significant bit.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QsatError, Result};
use crate::field::{Field, GaussianRational};
use crate::graph::FactorGraph;
use crate::rng;

/// Default cap on `N` for anything that materialises `2^N` vectors.
pub const DEFAULT_QUBIT_CAP: usize = 14;
pub const FLOAT_KERNEL_CAP: usize = 12;
pub const EXACT_KERNEL_CAP: usize = 10;
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Float(Vec<Complex64>),
    Exact(Vec<GaussianRational>),
}

/// The rank-one projector `|Φ⟩⟨Φ|` of a single clause.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub k: usize,
    pub amplitudes: Amplitudes,
}

impl Projector {
    pub fn from_complex(k: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << k {
            return invalid(format!("projector needs {} amplitudes, got {}", 1 << k, amps.len()));
        }
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return invalid("projector vector must be nonzero and finite");
        }
        Ok(Self { k, amplitudes: Amplitudes::Float(amps) })
    }

    pub fn from_exact(k: usize, amps: Vec<GaussianRational>) -> Result<Self> {
        if amps.len() != 1 << k {
            return invalid(format!("projector needs {} amplitudes, got {}", 1 << k, amps.len()));
        }
        if amps.iter().all(Field::is_zero) {
            return invalid("projector vector must be nonzero");
        }
        Ok(Self { k, amplitudes: Amplitudes::Exact(amps) })
    }

    pub fn mode(&self) -> Mode {
        match self.amplitudes {
            Amplitudes::Float(_) => Mode::Float,
            Amplitudes::Exact(_) => Mode::Exact,
        }
    }

    /// Numerical amplitudes (exact ones converted).
    pub fn complex_amplitudes(&self) -> Vec<Complex64> {
        match &self.amplitudes {
            Amplitudes::Float(a) => a.clone(),
            Amplitudes::Exact(a) => a.iter().map(Field::to_complex).collect(),
        }
    }

    pub fn exact_amplitudes(&self) -> Option<&[GaussianRational]> {
        match &self.amplitudes {
            Amplitudes::Exact(a) => Some(a),
            Amplitudes::Float(_) => None,
        }
    }

    /// Unit-norm numerical amplitudes.
    pub fn normalized_amplitudes(&self) -> Vec<Complex64> {
        let a = self.complex_amplitudes();
        let n = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        a.into_iter().map(|x| x / n).collect()
    }

    /// `⟨Φ|χ_1⊗…⊗χ_k⟩` for the given single-qubit states (not normalized).
    pub fn overlap(&self, qubits: &[[Complex64; 2]]) -> Complex64 {
        let amps = self.complex_amplitudes();
        overlap_with(&amps, qubits)
    }
}

pub(crate) fn overlap_with(amps: &[Complex64], qubits: &[[Complex64; 2]]) -> Complex64 {
    let k = qubits.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, phi) in amps.iter().enumerate() {
        let mut prod = phi.conj();
        for (j, q) in qubits.iter().enumerate() {
            prod *= q[(t >> (k - 1 - j)) & 1];
        }
        acc += prod;
    }
    acc
}

/// Normalized i.i.d. complex Gaussian amplitudes.
pub fn sample_projector(k: usize, seed: u64) -> Projector {
    let mut r = rng::stream(seed, 0);
    loop {
        let amps: Vec<Complex64> = (0..1usize << k)
            .map(|_| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
            .collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            return Projector { k, amplitudes: Amplitudes::Float(amps.into_iter().map(|a| a / n).collect()) };
        }
    }
}

/// Uniform rational in `[-1, 1]` with denominator at most `denom_bound`.
fn random_rational<R: Rng>(r: &mut R, denom_bound: i64) -> BigRational {
    let d = r.random_range(1..=denom_bound);
    let n = r.random_range(-d..=d);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Fresh exact amplitudes with denominators at most `denom_bound`.
/// The float amplitudes of `p` are not used: only its arity.
pub fn rationalize_projector(p: &Projector, denom_bound: i64, seed: u64) -> Result<Projector> {
    if denom_bound < 2 {
        return invalid("denom_bound must be at least 2");
    }
    let mut r = rng::stream(seed, 1);
    let amps = (0..1usize << p.k)
        .map(|_| loop {
            let g = GaussianRational::new(random_rational(&mut r, denom_bound), random_rational(&mut r, denom_bound));
            if !g.is_zero() {
                break g;
            }
        })
        .collect();
    Ok(Projector { k: p.k, amplitudes: Amplitudes::Exact(amps) })
}

/// `⊗_j φ^j`, normalized in float mode.
pub fn separable_projector(states: &[[Complex64; 2]]) -> Result<Projector> {
    if states.iter().any(|s| s[0].norm_sqr() + s[1].norm_sqr() == 0.0) {
        return invalid("separable projector factors must be nonzero");
    }
    let k = states.len();
    let amps: Vec<Complex64> = (0..1usize << k)
        .map(|t| (0..k).map(|j| states[j][(t >> (k - 1 - j)) & 1]).product())
        .collect();
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Projector::from_complex(k, amps.into_iter().map(|a| a / n).collect())
}

/// Exact-mode product projector.
pub fn separable_projector_exact(states: &[[GaussianRational; 2]]) -> Result<Projector> {
    if states.iter().any(|s| s[0].is_zero() && s[1].is_zero()) {
        return invalid("separable projector factors must be nonzero");
    }
    let k = states.len();
    let amps = (0..1usize << k)
        .map(|t| {
            (0..k).fold(GaussianRational::one(), |acc, j| acc.mul(&states[j][(t >> (k - 1 - j)) & 1]))
        })
        .collect();
    Projector::from_exact(k, amps)
}

/// A graph with one projector per clause.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: FactorGraph,
    pub projectors: Vec<Projector>,
    pub mode: Mode,
}

impl Instance {
    pub fn new(graph: FactorGraph, projectors: Vec<Projector>) -> Result<Self> {
        if projectors.len() != graph.n_clauses() {
            return invalid(format!("{} projectors for {} clauses", projectors.len(), graph.n_clauses()));
        }
        let mode = projectors.first().map_or(Mode::Float, Projector::mode);
        for (m, p) in projectors.iter().enumerate() {
            if p.k != graph.k {
                return invalid(format!("projector {m} has arity {}, graph has k={}", p.k, graph.k));
            }
            if p.mode() != mode {
                return invalid("projectors mix float and exact modes");
            }
        }
        Ok(Self { graph, projectors, mode })
    }

    pub fn n_vars(&self) -> usize {
        self.graph.n_vars
    }

    /// The instance on a subset of clauses, variables relabelled as in
    /// [`FactorGraph::restrict`].
    pub fn restrict(&self, clauses: &[usize]) -> (Instance, Vec<usize>) {
        let (g, map) = self.graph.restrict(clauses);
        let projectors = clauses.iter().map(|&c| self.projectors[c].clone()).collect();
        (Instance { graph: g, projectors, mode: self.mode }, map)
    }

    /// Same clauses and graph, with a variable relabelling into `n_vars` slots.
    pub fn with_graph(&self, graph: FactorGraph) -> Result<Instance> {
        Instance::new(graph, self.projectors.clone())
    }
}

/// Generic float instance: projector `m` is drawn from the stream derived from `(seed, m)`.
pub fn sample_instance(graph: &FactorGraph, seed: u64) -> Instance {
    let projectors = (0..graph.n_clauses())
        .map(|m| sample_projector(graph.k, rng::derive_seed(seed, m as u64)))
        .collect();
    Instance { graph: graph.clone(), projectors, mode: Mode::Float }
}

/// Exact instance with independent random Gaussian-rational amplitudes.
pub fn sample_exact_instance(graph: &FactorGraph, denom_bound: i64, seed: u64) -> Result<Instance> {
    let projectors = (0..graph.n_clauses())
        .map(|m| {
            let shape = Projector { k: graph.k, amplitudes: Amplitudes::Float(Vec::new()) };
            rationalize_projector(&shape, denom_bound, rng::derive_seed(seed, m as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(graph.clone(), projectors)
}

/// Replace every projector by a fresh exact one.
pub fn rationalize_instance(inst: &Instance, denom_bound: i64, seed: u64) -> Result<Instance> {
    sample_exact_instance(&inst.graph, denom_bound, seed)
}

/// Projectors that are products of random single-qubit states. With
/// `denom_bound = Some(b)` the factors are random Gaussian rationals.
pub fn sample_separable_instance(graph: &FactorGraph, seed: u64, denom_bound: Option<i64>) -> Result<Instance> {
    let projectors = (0..graph.n_clauses())
        .map(|m| {
            let mut r = rng::stream(rng::derive_seed(seed, m as u64), 2);
            match denom_bound {
                None => {
                    let states: Vec<[Complex64; 2]> = (0..graph.k)
                        .map(|_| {
                            let mut c = || Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal));
                            [c(), c()]
                        })
                        .collect();
                    separable_projector(&states)
                }
                Some(b) => {
                    let states: Vec<[GaussianRational; 2]> = (0..graph.k)
                        .map(|_| {
                            let mut c = || loop {
                                let g = GaussianRational::new(random_rational(&mut r, b), random_rational(&mut r, b));
                                if !g.is_zero() {
                                    break g;
                                }
                            };
                            [c(), c()]
                        })
                        .collect();
                    separable_projector_exact(&states)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(graph.clone(), projectors)
}

/// One single-qubit state `(a, b) = a|0⟩ + b|1⟩` per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub qubits: Vec<[Complex64; 2]>,
}

impl ProductState {
    pub fn new(qubits: Vec<[Complex64; 2]>) -> Result<Self> {
        if qubits.iter().any(|q| q[0].norm_sqr() + q[1].norm_sqr() == 0.0) {
            return invalid("product state has a zero qubit");
        }
        Ok(Self { qubits })
    }

    /// Qubits `(|0⟩ + z_i|1⟩)/‖·‖`.
    pub fn from_z(zs: &[Complex64]) -> Self {
        let mut s = Self { qubits: zs.iter().map(|&z| [Complex64::new(1.0, 0.0), z]).collect() };
        s.normalize();
        s
    }

    pub fn normalize(&mut self) {
        for q in &mut self.qubits {
            let n = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
            q[0] /= n;
            q[1] /= n;
        }
    }

    /// `z_i = b/a`, `None` where `a = 0`.
    pub fn z_values(&self) -> Vec<Option<Complex64>> {
        self.qubits.iter().map(|q| (q[0].norm() > 0.0).then(|| q[1] / q[0])).collect()
    }

    /// The full `2^N` amplitude vector; variable 0 is the most significant bit.
    pub fn to_full_vector(&self, cap: usize) -> Result<Vec<Complex64>> {
        let n = self.qubits.len();
        if n > cap {
            return Err(QsatError::ResourceLimit(format!("{n} qubits exceed the cap of {cap}")));
        }
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for q in &self.qubits {
            v = v.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Ok(v)
    }
}

/// `|⟨Φ^m|ψ_{m_1}⊗…⊗ψ_{m_k}⟩|` per clause, with unit-norm projector and qubits.
pub fn evaluate_state(inst: &Instance, psi: &ProductState) -> Vec<f64> {
    let mut psi = psi.clone();
    psi.normalize();
    inst.graph
        .clauses
        .iter()
        .zip(&inst.projectors)
        .map(|(vars, p)| {
            let qs: Vec<[Complex64; 2]> = vars.iter().map(|&v| psi.qubits[v]).collect();
            overlap_with(&p.normalized_amplitudes(), &qs).norm()
        })
        .collect()
}

pub fn max_residual(inst: &Instance, psi: &ProductState) -> f64 {
    evaluate_state(inst, psi).into_iter().fold(0.0, f64::max)
}

/// Row-sparse matrix with a fixed column count.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows<T> {
    pub n_cols: usize,
    pub rows: Vec<Vec<(usize, T)>>,
}

fn constraint_rows<T: Clone>(graph: &FactorGraph, coeffs: &[Vec<T>], cap: usize) -> Result<SparseRows<T>> {
    let n = graph.n_vars;
    let k = graph.k;
    if n > cap {
        return Err(QsatError::ResourceLimit(format!("{n} qubits exceed the cap of {cap}")));
    }
    let mut rows = Vec::with_capacity(graph.n_clauses() << (n - k));
    for (vars, c) in graph.clauses.iter().zip(coeffs) {
        let others: Vec<usize> = (0..n).filter(|v| !vars.contains(v)).collect();
        for e in 0..1usize << (n - k) {
            let mut base = 0usize;
            for (j, &v) in others.iter().enumerate() {
                if (e >> (others.len() - 1 - j)) & 1 == 1 {
                    base |= 1 << (n - 1 - v);
                }
            }
            let row = (0..1usize << k)
                .map(|t| {
                    let mut idx = base;
                    for (j, &v) in vars.iter().enumerate() {
                        if (t >> (k - 1 - j)) & 1 == 1 {
                            idx |= 1 << (n - 1 - v);
                        }
                    }
                    (idx, c[t].clone())
                })
                .collect();
            rows.push(row);
        }
    }
    Ok(SparseRows { n_cols: 1 << n, rows })
}

/// Rows `⟨Φ^m|⊗⟨e|` in the computational basis, `M·2^{N−k}` of them. Entries
/// are the conjugated (unnormalized) amplitudes; zeros are kept.
pub fn constraint_matrix(inst: &Instance, cap: usize) -> Result<SparseRows<Complex64>> {
    let coeffs: Vec<Vec<Complex64>> = inst
        .projectors
        .iter()
        .map(|p| p.complex_amplitudes().into_iter().map(|a| a.conj()).collect())
        .collect();
    constraint_rows(&inst.graph, &coeffs, cap)
}

/// Exact counterpart of [`constraint_matrix`]; `None` for float instances.
pub fn constraint_matrix_exact(inst: &Instance, cap: usize) -> Result<Option<SparseRows<GaussianRational>>> {
    let Some(coeffs) = inst
        .projectors
        .iter()
        .map(|p| p.exact_amplitudes().map(|a| a.iter().map(GaussianRational::conj).collect::<Vec<_>>()))
        .collect::<Option<Vec<_>>>()
    else {
        return Ok(None);
    };
    constraint_rows(&inst.graph, &coeffs, cap).map(Some)
}

/// Dense `H_F = Σ_m Π_m ⊗ I` with unit-norm projectors.
pub fn hamiltonian(inst: &Instance, cap: usize) -> Result<DMatrix<Complex64>> {
    let normalized: Vec<Vec<Complex64>> = inst
        .projectors
        .iter()
        .map(|p| p.normalized_amplitudes().into_iter().map(|a| a.conj()).collect())
        .collect();
    let b = constraint_rows(&inst.graph, &normalized, cap)?;
    let dim = b.n_cols;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for row in &b.rows {
        for &(i, ri) in row {
            for &(j, rj) in row {
                h[(i, j)] += ri.conj() * rj;
            }
        }
    }
    Ok(h)
}

/// Eigenvalues of `H_F`, ascending.
pub fn spectrum(inst: &Instance) -> Result<Vec<f64>> {
    let h = hamiltonian(inst, FLOAT_KERNEL_CAP)?;
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Number of eigenvalues below `tol·λ_max`.
pub fn kernel_dimension_float(inst: &Instance, tol: f64) -> Result<usize> {
    let ev = spectrum(inst)?;
    let top = ev.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(ev.len());
    }
    Ok(ev.iter().filter(|&&e| e < tol * top).count())
}

/// `2^N − rank(B)` over the Gaussian rationals (see [`exact_rank`]).
pub fn kernel_dimension_exact(inst: &Instance) -> Result<usize> {
    let b = constraint_matrix_exact(inst, EXACT_KERNEL_CAP)?
        .ok_or_else(|| QsatError::InvalidParameters("exact kernel dimension needs exact projectors".into()))?;
    Ok(b.n_cols - exact_rank(&b)?)
}

/// Float instances use the dense eigensolve; exact ones use exact rank.
pub fn kernel_dimension(inst: &Instance, tol: f64) -> Result<usize> {
    match inst.mode {
        Mode::Float => kernel_dimension_float(inst, tol),
        Mode::Exact => kernel_dimension_exact(inst),
    }
}

/// Primes `≡ 1 (mod 4)`, each with a square root of −1.
const RANK_PRIMES: [u64; 3] = [998_244_353, 469_762_049, 167_772_161];

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Square root of −1 modulo `p ≡ 1 (mod 4)`.
fn sqrt_minus_one(p: u64) -> u64 {
    (2..p)
        .map(|g| pow_mod(g, (p - 1) / 4, p))
        .find(|&r| r * r % p == p - 1)
        .expect("p = 1 mod 4")
}

fn rational_mod(r: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let reduce = |b: &BigInt| ((b % &pb + &pb) % &pb).to_u64().expect("residue fits");
    let d = reduce(r.denom());
    if d == 0 {
        return None;
    }
    Some(reduce(r.numer()) * pow_mod(d, p - 2, p) % p)
}

/// Rank modulo `p` via the homomorphism `i ↦ √−1`; `None` if a denominator vanishes.
fn rank_mod_p(b: &SparseRows<GaussianRational>, p: u64) -> Option<usize> {
    let s = sqrt_minus_one(p);
    let n = b.n_cols;
    // pivot column -> reduced dense row with leading 1 at that column
    let mut basis: Vec<Option<Vec<u64>>> = vec![None; n];
    let mut rank = 0;
    for row in &b.rows {
        let mut dense = vec![0u64; n];
        for (c, g) in row {
            let v = (rational_mod(&g.re, p)? + rational_mod(&g.im, p)? * s) % p;
            dense[*c] = (dense[*c] + v) % p;
        }
        for c in 0..n {
            if dense[c] == 0 {
                continue;
            }
            match &basis[c] {
                Some(piv) => {
                    let f = dense[c];
                    for j in c..n {
                        if piv[j] != 0 {
                            dense[j] = (dense[j] + p - f * piv[j] % p) % p;
                        }
                    }
                }
                None => {
                    let inv = pow_mod(dense[c], p - 2, p);
                    for x in dense[c..].iter_mut() {
                        *x = *x * inv % p;
                    }
                    basis[c] = Some(dense);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Some(rank)
}

/// Rank over `ℚ(i)`, computed as the largest rank over several primes
/// `p ≡ 1 (mod 4)`. Each modular rank is a lower bound; they all coincide
/// with the true rank unless `p` divides one of finitely many minors.
pub fn exact_rank(b: &SparseRows<GaussianRational>) -> Result<usize> {
    RANK_PRIMES
        .iter()
        .filter_map(|&p| rank_mod_p(b, p))
        .max()
        .ok_or_else(|| QsatError::Invariant("every rank prime divides a denominator".into()))
}

/// Numerical rank of the columns `vectors` (singular values above `rel_tol·σ_max`).
pub fn numerical_rank(vectors: &[Vec<Complex64>], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors[0].len();
    let m = DMatrix::from_fn(rows, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sampled_projectors_are_unit_and_reproducible() {
        for s in 0..50 {
            let p = sample_projector(3, s);
            let n: f64 = p.complex_amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
            assert_eq!(p, sample_projector(3, s));
        }
    }

    #[test]
    fn amplitude_moments() {
        let mut sums = [0.0; 4];
        let n = 100_000;
        for s in 0..n {
            let p = sample_projector(2, s);
            for (acc, a) in sums.iter_mut().zip(p.complex_amplitudes()) {
                *acc += a.norm_sqr();
            }
        }
        for s in sums {
            assert!((s / n as f64 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn rationalized_amplitudes_are_nonzero_and_deterministic() {
        let p = sample_projector(3, 1);
        let a = rationalize_projector(&p, 5, 9).unwrap();
        assert!(a.exact_amplitudes().unwrap().iter().all(|g| !g.is_zero()));
        assert_eq!(a, rationalize_projector(&p, 5, 9).unwrap());
        assert!(rationalize_projector(&p, 1, 9).is_err());
    }

    #[test]
    fn separable_golden_values() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let p = separable_projector(&[[one, zero], [one, zero]]).unwrap();
        assert_eq!(p.complex_amplitudes(), vec![one, zero, zero, zero]);
        let p = separable_projector(&[[zero, one], [zero, one]]).unwrap();
        assert_eq!(p.complex_amplitudes(), vec![zero, zero, zero, one]);
        // bit order: first qubit most significant
        let p = separable_projector(&[[zero, one], [one, zero]]).unwrap();
        assert_eq!(p.complex_amplitudes(), vec![zero, zero, one, zero]);
        assert!(separable_projector(&[[zero, zero], [one, zero]]).is_err());
    }

    #[test]
    fn separable_projectors_have_schmidt_rank_one() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        for s in 0..20 {
            let inst = sample_separable_instance(&g, s, None).unwrap();
            let a = inst.projectors[0].complex_amplitudes();
            for cut in 1..3 {
                let rows = 1 << cut;
                let cols = 8 >> cut;
                let m = DMatrix::from_fn(rows, cols, |i, j| a[i * cols + j]);
                let sv = m.singular_values();
                assert_eq!(sv.iter().filter(|&&x| x > 1e-10).count(), 1);
            }
        }
    }

    #[test]
    fn constraint_matrix_shapes() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let inst = sample_instance(&g, 3);
        let b = constraint_matrix(&inst, DEFAULT_QUBIT_CAP).unwrap();
        assert_eq!(b.rows.len(), 1);
        let conj: Vec<(usize, Complex64)> = inst.projectors[0].complex_amplitudes().iter().enumerate().map(|(i, a)| (i, a.conj())).collect();
        assert_eq!(b.rows[0], conj);

        let g = FactorGraph::new(3, 6, vec![vec![0, 1, 2], vec![2, 4, 5], vec![5, 3, 0]]).unwrap();
        let inst = sample_instance(&g, 3);
        let b = constraint_matrix(&inst, DEFAULT_QUBIT_CAP).unwrap();
        assert_eq!(b.rows.len(), 3 * 8);
        assert!(b.rows.iter().all(|r| r.len() == 8));
        let big = FactorGraph::new(3, 15, vec![vec![0, 1, 2]]).unwrap();
        assert!(matches!(constraint_matrix(&sample_instance(&big, 0), DEFAULT_QUBIT_CAP), Err(QsatError::ResourceLimit(_))));
    }

    #[test]
    fn single_clause_kernel() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(kernel_dimension(&sample_instance(&g, 1), DEFAULT_KERNEL_TOL).unwrap(), 7);
        let e = sample_exact_instance(&g, 7, 1).unwrap();
        assert_eq!(kernel_dimension(&e, DEFAULT_KERNEL_TOL).unwrap(), 7);
    }

    #[test]
    fn two_qubit_chain_and_cycle() {
        // 2-QSAT path on m+1 qubits: dim = m + 2; cycle: dim = 2
        for m in 1..=5 {
            let chain = FactorGraph::new(2, m + 1, (0..m).map(|i| vec![i, i + 1]).collect()).unwrap();
            assert_eq!(kernel_dimension(&sample_instance(&chain, m as u64), DEFAULT_KERNEL_TOL).unwrap(), m + 2);
        }
        for m in 3..=6 {
            let cycle = FactorGraph::new(2, m, (0..m).map(|i| vec![i, (i + 1) % m]).collect()).unwrap();
            assert_eq!(kernel_dimension(&sample_instance(&cycle, m as u64), DEFAULT_KERNEL_TOL).unwrap(), 2);
        }
    }

    #[test]
    fn residual_of_orthogonal_state_vanishes() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let g = FactorGraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let p = separable_projector(&[[c(0.6, 0.0), c(0.0, 0.8)], [one, one]]).unwrap();
        let inst = Instance::new(g, vec![p]).unwrap();
        let psi = ProductState::new(vec![[c(0.0, 0.8), c(0.6, 0.0)], [one, zero]]).unwrap();
        assert!(evaluate_state(&inst, &psi)[0] < 1e-15);
    }

    #[test]
    fn random_states_violate_random_clauses() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        for s in 0..100u64 {
            let inst = sample_instance(&g, s);
            let mut r = rng::stream(s, 77);
            let qs = (0..3).map(|_| [c(r.sample(StandardNormal), r.sample(StandardNormal)), c(r.sample(StandardNormal), r.sample(StandardNormal))]).collect();
            assert!(evaluate_state(&inst, &ProductState::new(qs).unwrap())[0] > 1e-6);
        }
    }

    #[test]
    fn residual_matches_dense_kernel_membership() {
        // A state orthogonal to each separable projector on its first qubit is a zero-energy state.
        let g = FactorGraph::new(3, 5, vec![vec![0, 1, 2], vec![0, 3, 4], vec![2, 3, 1]]).unwrap();
        let inst = sample_separable_instance(&g, 4, None).unwrap();
        let h = hamiltonian(&inst, 10).unwrap();
        for s in 0..20u64 {
            let mut r = rng::stream(s, 5);
            let qs: Vec<[Complex64; 2]> = (0..5).map(|_| [c(r.sample(StandardNormal), 0.3), c(0.1, r.sample(StandardNormal))]).collect();
            let psi = ProductState::new(qs).unwrap();
            let res = max_residual(&inst, &psi);
            let v = DMatrix::from_column_slice(32, 1, &psi.to_full_vector(10).unwrap());
            let v = v.unscale(v.norm());
            let energy = (v.adjoint() * &h * &v)[(0, 0)].re;
            assert_eq!(res < 1e-9, energy < 1e-18);
        }
    }

    #[test]
    fn exact_rank_matches_gaussian_elimination() {
        fn rank_exact(b: &SparseRows<GaussianRational>) -> usize {
            let mut rows: Vec<Vec<GaussianRational>> = b
                .rows
                .iter()
                .map(|r| {
                    let mut d = vec![<GaussianRational as Field>::zero(); b.n_cols];
                    for (c, v) in r {
                        d[*c] = d[*c].add(v);
                    }
                    d
                })
                .collect();
            let mut rank = 0;
            for col in 0..b.n_cols {
                let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
                rows.swap(rank, p);
                let pivot = rows[rank][col].clone();
                for i in 0..rows.len() {
                    if i != rank && !rows[i][col].is_zero() {
                        let f = rows[i][col].div(&pivot);
                        for j in col..b.n_cols {
                            let t = rows[rank][j].mul(&f);
                            rows[i][j] = rows[i][j].sub(&t);
                        }
                    }
                }
                rank += 1;
            }
            rank
        }
        for s in 0..6u64 {
            let g = crate::graph::sample_graph(5, 3 + (s as usize % 3), 3, s).unwrap();
            let inst = sample_exact_instance(&g, 4, s).unwrap();
            let b = constraint_matrix_exact(&inst, 10).unwrap().unwrap();
            assert_eq!(exact_rank(&b).unwrap(), rank_exact(&b), "seed {s}");
        }
    }

    #[test]
    fn numerical_rank_of_duplicates() {
        let v = vec![c(1.0, 0.0), c(0.0, 2.0)];
        assert_eq!(numerical_rank(std::slice::from_ref(&v), 1e-9), 1);
        assert_eq!(numerical_rank(&[v.clone(), v], 1e-9), 1);
    }
}
