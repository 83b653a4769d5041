//! Newton polytopes, Minkowski sums, exact volumes and mixed volumes.
//!
//! All geometry is integer: hulls are built by beneath–beyond placement,
//! boundary simplices are grouped by their primitive supporting hyperplane
//! and volumes are sums of simplex determinants.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, QsatError, Result};
use crate::field::Field;
use crate::groebner::Polynomial;
use crate::polysystem::SquareSystem;

/// Largest ambient dimension [`volume`] accepts.
pub const VOLUME_DIM_CAP: usize = 12;
/// Default dimension budget for [`mixed_volume`].
pub const DEFAULT_MV_DIM_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePolytope {
    n: usize,
    points: Vec<Vec<i64>>,
}

impl LatticePolytope {
    pub fn new(n: usize, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let set: BTreeSet<Vec<i64>> = points.into_iter().collect();
        if set.is_empty() {
            return invalid("polytope needs at least one point");
        }
        if let Some(p) = set.iter().find(|p| p.len() != n) {
            return invalid(format!("point of length {} in dimension {n}", p.len()));
        }
        Ok(Self { n, points: set.into_iter().collect() })
    }

    pub fn origin(n: usize) -> Self {
        Self { n, points: vec![vec![0; n]] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Generators, sorted and deduplicated.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// Same hull, generated by boundary points only (full-dimensional case).
    pub fn pruned(&self) -> Result<Self> {
        match Hull::build(self.n, &self.points)? {
            Some(h) => {
                let keep: BTreeSet<usize> = h.facets.iter().flat_map(|f| f.verts.iter().copied()).collect();
                Ok(Self { n: self.n, points: keep.into_iter().map(|i| self.points[i].clone()).collect() })
            }
            None => Ok(self.clone()),
        }
    }

    /// Same hull as a set?
    pub fn hull_eq(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Ok(false);
        }
        let inside = |a: &Self, b: &Self| -> Result<bool> {
            for p in &a.points {
                if !b.contains(p)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        Ok(inside(self, other)? && inside(other, self)?)
    }

    /// Membership of a lattice point in the hull (full-dimensional hulls only).
    pub fn contains(&self, p: &[i64]) -> Result<bool> {
        match Hull::build(self.n, &self.points)? {
            Some(h) => {
                for pl in h.planes.values() {
                    if dot(&pl.normal, p)? > pl.offset {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            None => invalid("membership test needs a full-dimensional hull"),
        }
    }
}

/// Exponent vectors of `f`.
pub fn newton_polytope<F: Field>(f: &Polynomial<F>) -> Result<LatticePolytope> {
    if f.is_zero() {
        return invalid("zero polynomial has no Newton polytope");
    }
    LatticePolytope::new(f.nvars(), f.terms().iter().map(|(m, _)| m.0.iter().map(|&e| i64::from(e)).collect()))
}

/// All pairwise sums.
pub fn minkowski_sum(p: &LatticePolytope, q: &LatticePolytope) -> Result<LatticePolytope> {
    if p.n != q.n {
        return invalid(format!("dimension mismatch {} vs {}", p.n, q.n));
    }
    LatticePolytope::new(
        p.n,
        p.points.iter().flat_map(|a| q.points.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect())),
    )
}

fn overflow() -> QsatError {
    QsatError::ResourceLimit("integer overflow in exact geometry".into())
}

fn dot(a: &[i128], p: &[i64]) -> Result<i128> {
    a.iter().zip(p).try_fold(0i128, |s, (&x, &y)| x.checked_mul(i128::from(y)).and_then(|t| s.checked_add(t)).ok_or_else(overflow))
}

/// Bareiss determinant of a square integer matrix.
fn det(mut m: Vec<Vec<i128>>) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else { return Ok(0) };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j]
                    .checked_mul(m[k][k])
                    .zip(m[i][k].checked_mul(m[k][j]))
                    .and_then(|(a, b)| a.checked_sub(b))
                    .ok_or_else(overflow)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

fn rank(rows: &[Vec<i128>]) -> Result<usize> {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                let g = num_integer::gcd(a, b);
                let (fa, fb) = (a / g, b / g);
                for j in c..cols {
                    m[i][j] = m[i][j]
                        .checked_mul(fa)
                        .zip(m[r][j].checked_mul(fb))
                        .and_then(|(x, y)| x.checked_sub(y))
                        .ok_or_else(overflow)?;
                }
                let g = m[i].iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
                if g > 1 {
                    m[i].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        r += 1;
    }
    Ok(r)
}

fn diff(a: &[i64], b: &[i64]) -> Vec<i128> {
    a.iter().zip(b).map(|(x, y)| i128::from(x - y)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Plane {
    normal: Vec<i128>,
    offset: i128,
}

struct Facet {
    verts: Vec<usize>,
    plane: usize,
}

struct Hull {
    facets: Vec<Facet>,
    planes: HashMap<usize, Plane>,
    /// Sum of `|det|` over the placed simplices, i.e. `n!·Vol`.
    det_sum: i128,
}

impl Hull {
    /// `None` when the points do not span the ambient space.
    fn build(n: usize, pts: &[Vec<i64>]) -> Result<Option<Hull>> {
        if n == 0 {
            return Ok(None);
        }
        // initial simplex
        let mut simplex = vec![0usize];
        let mut rows: Vec<Vec<i128>> = vec![];
        for (i, p) in pts.iter().enumerate().skip(1) {
            if simplex.len() == n + 1 {
                break;
            }
            rows.push(diff(p, &pts[0]));
            if rank(&rows)? == rows.len() {
                simplex.push(i);
            } else {
                rows.pop();
            }
        }
        if simplex.len() < n + 1 {
            return Ok(None);
        }
        // interior reference, scaled by n+1
        let centre: Vec<i64> = (0..n).map(|j| simplex.iter().map(|&i| pts[i][j]).sum()).collect();
        let scale = (n + 1) as i64;

        let mut hull = Hull { facets: vec![], planes: HashMap::new(), det_sum: 0 };
        let mut plane_ids: HashMap<Plane, usize> = HashMap::new();
        let mut next_plane = 0;
        let mut add_facet = |hull: &mut Hull, verts: Vec<usize>| -> Result<()> {
            let base = &pts[verts[0]];
            let rows: Vec<Vec<i128>> = verts[1..].iter().map(|&v| diff(&pts[v], base)).collect();
            let mut normal = Vec::with_capacity(n);
            for col in 0..n {
                let minor: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &x)| x).collect()).collect();
                let d = det(minor)?;
                normal.push(if col % 2 == 0 { d } else { -d });
            }
            let g = normal.iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
            if g == 0 {
                return Err(QsatError::Invariant("degenerate boundary simplex".into()));
            }
            normal.iter_mut().for_each(|x| *x /= g);
            let mut offset = dot(&normal, base)?;
            let c = dot(&normal, &centre)?;
            let scaled = offset.checked_mul(i128::from(scale)).ok_or_else(overflow)?;
            if c > scaled {
                normal.iter_mut().for_each(|x| *x = -*x);
                offset = -offset;
            }
            let plane = Plane { normal, offset };
            let id = *plane_ids.entry(plane.clone()).or_insert_with(|| {
                next_plane += 1;
                next_plane - 1
            });
            hull.planes.insert(id, plane);
            hull.facets.push(Facet { verts, plane: id });
            Ok(())
        };

        let rows: Vec<Vec<i128>> = simplex[1..].iter().map(|&v| diff(&pts[v], &pts[simplex[0]])).collect();
        hull.det_sum = det(rows)?.abs();
        for skip in 0..=n {
            let verts: Vec<usize> = simplex.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
            add_facet(&mut hull, verts)?;
        }

        let in_simplex: BTreeSet<usize> = simplex.iter().copied().collect();
        for (pi, p) in pts.iter().enumerate() {
            if in_simplex.contains(&pi) {
                continue;
            }
            let mut visible = BTreeSet::new();
            for (&id, pl) in &hull.planes {
                if dot(&pl.normal, p)? > pl.offset {
                    visible.insert(id);
                }
            }
            if visible.is_empty() {
                continue;
            }
            let (gone, kept): (Vec<Facet>, Vec<Facet>) = std::mem::take(&mut hull.facets).into_iter().partition(|f| visible.contains(&f.plane));
            hull.facets = kept;
            let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
            for f in &gone {
                let rows: Vec<Vec<i128>> = f.verts.iter().map(|&v| diff(&pts[v], p)).collect();
                hull.det_sum = hull.det_sum.checked_add(det(rows)?.abs()).ok_or_else(overflow)?;
                for skip in 0..n {
                    let mut r: Vec<usize> = f.verts.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
                    r.sort_unstable();
                    *ridges.entry(r).or_insert(0) += 1;
                }
            }
            hull.planes.retain(|id, _| !visible.contains(id));
            for (mut r, count) in ridges {
                if count == 1 {
                    r.push(pi);
                    add_facet(&mut hull, r)?;
                }
            }
        }
        Ok(Some(hull))
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * i)
}

/// Exact `n`-dimensional volume; zero for lower-dimensional hulls.
pub fn volume(p: &LatticePolytope) -> Result<BigRational> {
    if p.n > VOLUME_DIM_CAP {
        return Err(QsatError::ResourceLimit(format!("volume in dimension {} exceeds cap {VOLUME_DIM_CAP}", p.n)));
    }
    Ok(match Hull::build(p.n, &p.points)? {
        Some(h) => BigRational::new(BigInt::from(h.det_sum), factorial(p.n)),
        None => BigRational::zero(),
    })
}

pub fn mixed_volume(polytopes: &[LatticePolytope]) -> Result<BigRational> {
    mixed_volume_with_cap(polytopes, DEFAULT_MV_DIM_CAP)
}

/// `Σ_{∅≠S} (−1)^{n−|S|} Vol(Σ_{i∈S} P_i)`, subset sums built incrementally.
pub fn mixed_volume_with_cap(polytopes: &[LatticePolytope], cap: usize) -> Result<BigRational> {
    let n = polytopes.len();
    if polytopes.iter().any(|p| p.n != n) {
        return invalid("mixed volume needs n polytopes in dimension n");
    }
    if n > cap {
        return Err(QsatError::ResourceLimit(format!("mixed volume in dimension {n} exceeds cap {cap}")));
    }
    if n == 0 {
        return Ok(BigRational::one());
    }
    let mut sums: Vec<Option<LatticePolytope>> = vec![None; 1 << n];
    let mut total = BigRational::zero();
    for s in 1usize..1 << n {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s & !(1 << top);
        let sum = match &sums[rest] {
            None => polytopes[top].clone(),
            Some(r) => minkowski_sum(r, &polytopes[top])?.pruned()?,
        };
        let v = volume(&sum)?;
        if (n - s.count_ones() as usize).is_multiple_of(2) {
            total += v;
        } else {
            total -= v;
        }
        sums[s] = Some(sum);
    }
    Ok(total)
}

fn integer(v: BigRational) -> Result<u64> {
    if !v.is_integer() {
        return Err(QsatError::Invariant(format!("non-integer mixed volume {v}")));
    }
    v.to_integer().to_u64().ok_or_else(|| QsatError::Invariant(format!("mixed volume {v} out of range")))
}

/// Mixed volume of the Newton polytopes of a square list of polynomials.
pub fn bkk_bound_polys<F: Field>(polys: &[Polynomial<F>], cap: usize) -> Result<u64> {
    if polys.iter().any(|p| p.nvars() != polys.len()) {
        return invalid("BKK bound needs as many polynomials as variables");
    }
    let ps = polys.iter().map(newton_polytope).collect::<Result<Vec<_>>>()?;
    integer(mixed_volume_with_cap(&ps, cap)?)
}

pub fn bkk_bound<F: Field>(sq: &SquareSystem<F>) -> Result<u64> {
    bkk_bound_polys(&sq.polys, DEFAULT_MV_DIM_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groebner::{parse_system, MonomialOrder};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn poly(n: usize, pts: &[&[i64]]) -> LatticePolytope {
        LatticePolytope::new(n, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn fig2() -> (LatticePolytope, LatticePolytope) {
        let (_, ps) = parse_system("x1*x2 + 2*x1 + 3*x2 + 4\n5*x2^2 + 6*x1 + 7", None).unwrap();
        (newton_polytope(&ps[0]).unwrap(), newton_polytope(&ps[1]).unwrap())
    }

    #[test]
    fn two_polygon_example() {
        let (p, q) = fig2();
        assert_eq!(p, poly(2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]));
        assert_eq!(q, poly(2, &[&[0, 0], &[1, 0], &[0, 2]]));
        assert_eq!(volume(&p).unwrap(), r(1, 1));
        assert_eq!(volume(&q).unwrap(), r(1, 1));
        assert_eq!(volume(&minkowski_sum(&p, &q).unwrap()).unwrap(), r(5, 1));
        assert_eq!(mixed_volume(&[p, q]).unwrap(), r(3, 1));
    }

    #[test]
    fn simple_volumes() {
        assert_eq!(volume(&poly(2, &[&[0, 0], &[3, 3]])).unwrap(), r(0, 1));
        assert_eq!(volume(&poly(3, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap(), r(1, 6));
        let cube: Vec<Vec<i64>> = (0..8).map(|b| (0..3).map(|j| (b >> j) & 1).collect()).collect();
        let mut with_inner = cube.clone();
        with_inner.push(vec![0, 0, 0]);
        let c = LatticePolytope::new(3, cube).unwrap();
        assert_eq!(volume(&c).unwrap(), r(1, 1));
        let doubled = minkowski_sum(&c, &c).unwrap();
        assert_eq!(volume(&doubled).unwrap(), r(8, 1));
        assert_eq!(doubled.pruned().unwrap().points().len(), 8 + 6 + 12);
        let constant = newton_polytope(&Polynomial::<crate::field::GaussianRational>::one(&Arc::new(MonomialOrder::grevlex(2)))).unwrap();
        assert_eq!(constant, LatticePolytope::origin(2));
        // placement order does not matter: a triangle plus interior and boundary points
        let t = poly(2, &[&[1, 1], &[0, 0], &[2, 1], &[4, 0], &[0, 4], &[2, 2], &[1, 0]]);
        assert_eq!(volume(&t).unwrap(), r(8, 1));
    }

    #[test]
    fn small_mixed_volumes() {
        let sq = poly(2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        assert_eq!(mixed_volume(&[sq.clone(), sq.clone()]).unwrap(), r(2, 1));
        let a = poly(2, &[&[0, 0], &[1, 0]]);
        let b = poly(2, &[&[0, 0], &[0, 1]]);
        assert_eq!(mixed_volume(&[a.clone(), b]).unwrap(), r(1, 1));
        assert_eq!(mixed_volume(&[a.clone(), a]).unwrap(), r(0, 1));
        assert!(mixed_volume(&[sq]).is_err());
    }

    fn permanent(m: &[Vec<bool>]) -> u64 {
        fn go(m: &[Vec<bool>], row: usize, used: &mut Vec<bool>) -> u64 {
            if row == m.len() {
                return 1;
            }
            let mut total = 0;
            for j in 0..m.len() {
                if m[row][j] && !used[j] {
                    used[j] = true;
                    total += go(m, row + 1, used);
                    used[j] = false;
                }
            }
            total
        }
        go(m, 0, &mut vec![false; m.len()])
    }

    fn subcube(n: usize, vars: &[usize]) -> LatticePolytope {
        LatticePolytope::new(
            n,
            (0..1usize << vars.len()).map(|b| {
                let mut p = vec![0; n];
                for (j, &v) in vars.iter().enumerate() {
                    p[v] = ((b >> j) & 1) as i64;
                }
                p
            }),
        )
        .unwrap()
    }

    #[test]
    fn boxes_give_the_permanent() {
        use rand::Rng;
        let mut rng = crate::rng::stream(5, 0);
        for _ in 0..30 {
            let n = rng.random_range(1..=5);
            let m: Vec<Vec<bool>> = (0..n).map(|_| (0..n).map(|_| rng.random_bool(0.5)).collect()).collect();
            let ps: Vec<LatticePolytope> =
                m.iter().map(|row| subcube(n, &(0..n).filter(|&j| row[j]).collect::<Vec<_>>())).collect();
            assert_eq!(mixed_volume(&ps).unwrap(), BigRational::from_integer(permanent(&m).into()), "{m:?}");
        }
    }

    fn arb_polytope(n: usize) -> impl Strategy<Value = LatticePolytope> {
        prop::collection::vec(prop::collection::vec(0i64..3, n), 1..5).prop_map(move |pts| LatticePolytope::new(n, pts).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn symmetric(a in arb_polytope(3), b in arb_polytope(3), c in arb_polytope(3)) {
            let base = mixed_volume(&[a.clone(), b.clone(), c.clone()]).unwrap();
            prop_assert!(base >= BigRational::zero());
            for perm in [[&a, &c, &b], [&b, &a, &c], [&b, &c, &a], [&c, &a, &b], [&c, &b, &a]] {
                let ps: Vec<LatticePolytope> = perm.iter().map(|p| (*p).clone()).collect();
                prop_assert_eq!(&mixed_volume(&ps).unwrap(), &base);
            }
        }

        #[test]
        fn multilinear(a in arb_polytope(2), a2 in arb_polytope(2), b in arb_polytope(2)) {
            let sum = minkowski_sum(&a, &a2).unwrap();
            let lhs = mixed_volume(&[sum, b.clone()]).unwrap();
            let rhs = mixed_volume(&[a, b.clone()]).unwrap() + mixed_volume(&[a2, b]).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn minkowski_commutes_and_identity(a in arb_polytope(2), b in arb_polytope(2)) {
            prop_assert_eq!(minkowski_sum(&a, &b).unwrap(), minkowski_sum(&b, &a).unwrap());
            prop_assert_eq!(minkowski_sum(&a, &LatticePolytope::origin(2)).unwrap(), a.clone());
            let s = minkowski_sum(&a, &b).unwrap();
            if volume(&s).unwrap() > BigRational::zero() {
                prop_assert!(s.hull_eq(&s.pruned().unwrap()).unwrap());
            }
        }
    }
}
