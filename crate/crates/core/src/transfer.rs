//! Transfer matrices and reconstruction of product states along a peeling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, QsatError, Result};
use crate::graph::CoreResult;
use crate::instance::{max_residual, Instance, ProductState, Projector};
use crate::rng;

/// Core states must satisfy the core clauses to this residual.
pub const CORE_RESIDUAL_TOL: f64 = 1e-8;

/// `2 × 2^{k−1}` matrix sending the states of the other `k−1` qubits of a
/// clause to the state of the qubit at `selected` (0-based) that satisfies it.
/// Row 0 holds `⟨Φ|s,1⟩`, row 1 holds `−⟨Φ|s,0⟩`, where `s` runs over the
/// other qubits in clause order (first most significant) and the selected
/// qubit is moved to the last position.
pub fn transfer_matrix(p: &Projector, selected: usize) -> Result<[Vec<Complex64>; 2]> {
    let k = p.k;
    if selected >= k {
        return invalid(format!("selected position {selected} out of range for k={k}"));
    }
    let amps = p.complex_amplitudes();
    let mut rows = [vec![Complex64::new(0.0, 0.0); 1 << (k - 1)], vec![Complex64::new(0.0, 0.0); 1 << (k - 1)]];
    for (t, a) in amps.iter().enumerate() {
        let bit = (t >> (k - 1 - selected)) & 1;
        // drop the selected bit, keep the others in order
        let high = t >> (k - selected);
        let low = t & ((1 << (k - 1 - selected)) - 1);
        let s = (high << (k - 1 - selected)) | low;
        if bit == 1 {
            rows[0][s] = a.conj();
        } else {
            rows[1][s] = -a.conj();
        }
    }
    Ok(rows)
}

/// `T·(χ_1⊗…⊗χ_{k−1})` without normalization.
pub fn apply_transfer(t: &[Vec<Complex64>; 2], inputs: &[[Complex64; 2]]) -> [Complex64; 2] {
    let n = inputs.len();
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for s in 0..t[0].len() {
        let w: Complex64 = inputs.iter().enumerate().map(|(j, q)| q[(s >> (n - 1 - j)) & 1]).product();
        out[0] += t[0][s] * w;
        out[1] += t[1][s] * w;
    }
    out
}

/// How unconstrained qubits are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreeQubits {
    /// `(|0⟩ + |1⟩)/√2`.
    #[default]
    Uniform,
    /// Independent random states from the given seed.
    Random(u64),
}

impl FreeQubits {
    fn state(&self, var: usize) -> [Complex64; 2] {
        match *self {
            FreeQubits::Uniform => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [h, h]
            }
            FreeQubits::Random(seed) => {
                let mut r = rng::stream(seed, 0x4000_0000 + var as u64);
                let mut c = || Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal));
                let (a, b) = (c(), c());
                let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
                [a / n, b / n]
            }
        }
    }
}

pub fn reconstruct(cr: &CoreResult, core_state: Option<&ProductState>, inst: &Instance) -> Result<ProductState> {
    reconstruct_with(cr, core_state, inst, FreeQubits::Uniform)
}

/// Extend a core solution to all qubits by replaying the removals backwards.
pub fn reconstruct_with(
    cr: &CoreResult,
    core_state: Option<&ProductState>,
    inst: &Instance,
    free: FreeQubits,
) -> Result<ProductState> {
    let n = inst.n_vars();
    let mut qubits: Vec<Option<[Complex64; 2]>> = vec![None; n];
    match core_state {
        Some(s) => {
            if s.qubits.len() != cr.core.n_vars {
                return invalid(format!("core state has {} qubits, core has {}", s.qubits.len(), cr.core.n_vars));
            }
            let core_inst = Instance {
                graph: cr.core.clone(),
                projectors: cr.clause_map.iter().map(|&c| inst.projectors[c].clone()).collect(),
                mode: inst.mode,
            };
            let res = max_residual(&core_inst, s);
            if res >= CORE_RESIDUAL_TOL {
                return invalid(format!("core state residual {res:e} is not below {CORE_RESIDUAL_TOL:e}"));
            }
            let mut s = s.clone();
            s.normalize();
            for (i, &v) in cr.var_map.iter().enumerate() {
                qubits[v] = Some(s.qubits[i]);
            }
        }
        None if !cr.is_empty() => return invalid("non-empty core needs a core state"),
        None => {}
    }

    for &(v, a) in cr.removal_list.iter().rev() {
        if qubits[v].is_some() {
            return Err(QsatError::Invariant(format!("leaf {v} of clause {a} already assigned")));
        }
        let vars = &inst.graph.clauses[a];
        let pos = vars.iter().position(|&w| w == v).expect("leaf belongs to its clause");
        let inputs: Vec<[Complex64; 2]> = vars
            .iter()
            .filter(|&&w| w != v)
            .map(|&w| *qubits[w].get_or_insert_with(|| free.state(w)))
            .collect();
        let t = transfer_matrix(&inst.projectors[a], pos)?;
        let out = apply_transfer(&t, &inputs);
        let norm = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
        let scale = t.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-14 * scale) {
            return Err(QsatError::DegenerateInstance { clause: a });
        }
        qubits[v] = Some([out[0] / norm, out[1] / norm]);
    }

    Ok(ProductState {
        qubits: qubits.into_iter().enumerate().map(|(v, q)| q.unwrap_or_else(|| free.state(v))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clauses_for_density, leaf_removal, sample_graph, FactorGraph};
    use crate::instance::{evaluate_state, sample_instance, sample_projector, separable_projector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn golden_two_qubit_example() {
        let p = Projector::from_complex(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = transfer_matrix(&p, 1).unwrap();
        assert_eq!(t[0], vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(t[1], vec![c(0.0, 0.0), c(0.0, 0.0)]);
        let out = apply_transfer(&t, &[[c(0.3, 0.1), c(-0.7, 0.2)]]);
        assert_eq!(out, [c(0.3, 0.1), c(0.0, 0.0)]);
    }

    #[test]
    fn output_satisfies_clause() {
        for s in 0..100u64 {
            let k = 2 + (s as usize % 3);
            let p = sample_projector(k, s);
            let mut r = rng::stream(s, 3);
            let mut rc = || c(r.sample(StandardNormal), r.sample(StandardNormal));
            let inputs: Vec<[Complex64; 2]> = (0..k - 1).map(|_| [rc(), rc()]).collect();
            let sel = s as usize % k;
            let out = apply_transfer(&transfer_matrix(&p, sel).unwrap(), &inputs);
            let n = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
            let mut all = inputs.clone();
            all.insert(sel, [out[0] / n, out[1] / n]);
            let norms: f64 = inputs.iter().map(|q| (q[0].norm_sqr() + q[1].norm_sqr()).sqrt()).product();
            assert!(p.overlap(&all).norm() / norms < 1e-12);
        }
    }

    #[test]
    fn separable_output_is_orthogonal_complement() {
        let phi1 = [c(0.6, 0.0), c(0.0, 0.8)];
        let phi2 = [c(0.28, 0.96), c(0.0, 0.0)];
        let p = separable_projector(&[phi1, phi2]).unwrap();
        let out = apply_transfer(&transfer_matrix(&p, 1).unwrap(), &[[c(1.0, 0.0), c(0.5, 0.0)]]);
        // ⟨φ²|out⟩ = 0
        let ov = phi2[0].conj() * out[0] + phi2[1].conj() * out[1];
        assert!(ov.norm() < 1e-15 && (out[0].norm() + out[1].norm()) > 0.1);
    }

    #[test]
    fn single_clause_reconstruction() {
        let g = FactorGraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let inst = sample_instance(&g, 11);
        let r = leaf_removal(&g);
        let psi = reconstruct(&r, None, &inst).unwrap();
        assert!(evaluate_state(&inst, &psi)[0] < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(psi.qubits[1], [c(h, 0.0), c(h, 0.0)]);
        assert_eq!(psi.qubits[2], [c(h, 0.0), c(h, 0.0)]);
    }

    #[test]
    fn empty_core_instances_are_solved() {
        let n = 200;
        let m = clauses_for_density(n, 0.7);
        let mut solved = 0;
        for s in 0..30u64 {
            let g = sample_graph(n, m, 3, s).unwrap();
            let r = leaf_removal(&g);
            if !r.is_empty() {
                continue;
            }
            let inst = sample_instance(&g, s);
            for free in [FreeQubits::Uniform, FreeQubits::Random(s)] {
                let psi = reconstruct_with(&r, None, &inst, free).unwrap();
                assert!(max_residual(&inst, &psi) < 1e-9);
            }
            solved += 1;
        }
        assert!(solved >= 25);
    }

    #[test]
    fn degenerate_transfer_is_reported() {
        // Φ = |0⟩⊗|−⟩ annihilates every state whose second qubit is the default |+⟩.
        let g = FactorGraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = Projector::from_complex(2, vec![c(h, 0.0), c(-h, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let inst = Instance::new(g.clone(), vec![p]).unwrap();
        let r = leaf_removal(&g);
        assert_eq!(r.removal_list, vec![(0, 0)]);
        assert_eq!(reconstruct(&r, None, &inst), Err(QsatError::DegenerateInstance { clause: 0 }));
    }
}
