//! Instance files.
//!
//! JSON with fields `{k, n, clauses, mode, projectors}`. Clause `m` lists its
//! variables in the order `m_1 … m_k`, and amplitude `t` of its projector is
//! `φ_{i_1…i_k}` with `t = Σ_j i_j·2^{k−j}` (`i_1` most significant). Float
//! projectors store `{re: [f64], im: [f64]}`; exact ones store
//! `{re: [[num, den]], im: [[num, den]]}` where each integer is a JSON number
//! when it fits in an `i64` and a decimal string otherwise.

use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{QsatError, Result};
use crate::field::GaussianRational;
use crate::graph::FactorGraph;
use crate::instance::{Amplitudes, Instance, Mode, Projector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Int {
    Small(i64),
    Big(String),
}

impl Int {
    fn from_big(b: &BigInt) -> Self {
        b.to_i64().map_or_else(|| Int::Big(b.to_string()), Int::Small)
    }

    fn to_big(&self) -> Result<BigInt> {
        match self {
            Int::Small(v) => Ok(BigInt::from(*v)),
            Int::Big(s) => s.parse().map_err(|_| QsatError::Parse(format!("bad integer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ProjectorFile {
    Float { re: Vec<f64>, im: Vec<f64> },
    Exact { re: Vec<(Int, Int)>, im: Vec<(Int, Int)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InstanceFile {
    k: usize,
    n: usize,
    clauses: Vec<Vec<usize>>,
    mode: Mode,
    projectors: Vec<ProjectorFile>,
}

fn ratio(r: &BigRational) -> (Int, Int) {
    (Int::from_big(r.numer()), Int::from_big(r.denom()))
}

fn unratio((n, d): &(Int, Int)) -> Result<BigRational> {
    let d = d.to_big()?;
    if d.is_zero() {
        return Err(QsatError::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(n.to_big()?, d))
}

fn to_file(inst: &Instance) -> InstanceFile {
    let projectors = inst
        .projectors
        .iter()
        .map(|p| match &p.amplitudes {
            Amplitudes::Float(a) => ProjectorFile::Float {
                re: a.iter().map(|c| c.re).collect(),
                im: a.iter().map(|c| c.im).collect(),
            },
            Amplitudes::Exact(a) => ProjectorFile::Exact {
                re: a.iter().map(|c| ratio(&c.re)).collect(),
                im: a.iter().map(|c| ratio(&c.im)).collect(),
            },
        })
        .collect();
    InstanceFile {
        k: inst.graph.k,
        n: inst.graph.n_vars,
        clauses: inst.graph.clauses.clone(),
        mode: inst.mode,
        projectors,
    }
}

fn from_file(f: InstanceFile) -> Result<Instance> {
    let graph = FactorGraph::new(f.k, f.n, f.clauses)?;
    let projectors = f
        .projectors
        .into_iter()
        .map(|p| match p {
            ProjectorFile::Float { re, im } => {
                if re.len() != im.len() {
                    return Err(QsatError::Parse("re and im lengths differ".into()));
                }
                Projector::from_complex(f.k, re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
            }
            ProjectorFile::Exact { re, im } => {
                if re.len() != im.len() {
                    return Err(QsatError::Parse("re and im lengths differ".into()));
                }
                let amps = re
                    .iter()
                    .zip(&im)
                    .map(|(a, b)| Ok(GaussianRational::new(unratio(a)?, unratio(b)?)))
                    .collect::<Result<Vec<_>>>()?;
                Projector::from_exact(f.k, amps)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = Instance::new(graph, projectors)?;
    if inst.mode != f.mode && !inst.projectors.is_empty() {
        return Err(QsatError::Parse(format!("mode {:?} does not match the projectors", f.mode)));
    }
    Ok(Instance { mode: f.mode, ..inst })
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_file(inst))?)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    from_file(serde_json::from_str(text)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)? + "\n")?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}
