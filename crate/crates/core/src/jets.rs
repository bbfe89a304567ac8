//! Jet presentations and the normally ordered polynomial lift.
//!
//! Coordinates `x^j_{i,k}` of the jet space pair a base coordinate `j` with a
//! basis index `(i, k)`. The coordinate distributions `x^j` evaluate through
//! the residue pairing, commute, and their iterated `(-1)`-products lift any
//! base polynomial to a jet polynomial; windows truncate by killing every
//! monomial containing a variable above the window, which commutes with all
//! products.
//!
//! The same variables indexed over a Lie basis receive the top PBW part of an
//! enveloping element, the symbol map.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::affine::UElem;
use crate::coeff::{ACoeff, Q};
use crate::disk::{dual_basis_elem, BasisIndex, DiskFun, PointSet};
use crate::error::{Error, Result};
use crate::lie::LieData;
use crate::twovar::{expand_inverse_cached, Side};

/// One jet variable `x^{coord}_{i,k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JetVar {
    pub coord: usize,
    pub i: usize,
    pub k: i64,
}

/// Sorted list of `(variable, exponent)` pairs.
pub type JetMonomial = Vec<(JetVar, u32)>;

/// Polynomial in jet variables over the coefficient layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetPoly {
    nvars: usize,
    terms: BTreeMap<JetMonomial, ACoeff>,
}

impl JetPoly {
    pub fn zero(nvars: usize) -> Self {
        JetPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: ACoeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        JetPoly { nvars, terms }
    }

    pub fn var(nvars: usize, v: JetVar) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(v, 1)], ACoeff::one(nvars));
        JetPoly { nvars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &ACoeff)> {
        self.terms.iter()
    }

    fn insert(&mut self, m: JetMonomial, c: ACoeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get(&m) {
            Some(old) => {
                let s = old.add(&c).unwrap();
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        JetPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = JetPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(merge_monomials(ma, mb), ca.mul(cb)?);
            }
        }
        Ok(out)
    }

    pub fn mul_coeff(&self, c: &ACoeff) -> Result<Self> {
        let mut out = JetPoly::zero(self.nvars);
        for (m, old) in &self.terms {
            out.insert(m.clone(), old.mul(c)?);
        }
        Ok(out)
    }

    pub fn mul_rat(&self, r: &Q) -> Self {
        JetPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul_rat(r)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Kills every monomial containing a variable with `k > kmax`: the
    /// projection onto the windowed quotient.
    pub fn project(&self, kmax: i64) -> Self {
        JetPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.iter().all(|(v, _)| v.k <= kmax))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Evaluates at a tuple of disk functions as coordinates:
    /// `x^j_{i,k} -> residue(b^j eps_{i,k})`.
    pub fn evaluate_at(&self, points: &PointSet, coords: &[DiskFun]) -> Result<ACoeff> {
        let mut memo: BTreeMap<JetVar, ACoeff> = BTreeMap::new();
        let mut acc = ACoeff::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                let val = match memo.get(v) {
                    Some(x) => x.clone(),
                    None => {
                        let eps = dual_basis_elem(points, BasisIndex::new(v.i, v.k))?;
                        let x = coords
                            .get(v.coord)
                            .ok_or_else(|| Error::Invalid("coordinate out of range".into()))?
                            .mul(&eps)?
                            .residue();
                        memo.insert(*v, x.clone());
                        x
                    }
                };
                for _ in 0..*e {
                    t = t.mul(&val)?;
                }
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }
}

fn merge_monomials(a: &JetMonomial, b: &JetMonomial) -> JetMonomial {
    let mut map: BTreeMap<JetVar, u32> = BTreeMap::new();
    for (v, e) in a.iter().chain(b.iter()) {
        *map.entry(*v).or_insert(0) += e;
    }
    map.into_iter().collect()
}

impl fmt::Display for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (v, e) in m {
                if *e == 1 {
                    write!(f, " x{}[{},{}]", v.coord, v.i, v.k)?;
                } else {
                    write!(f, " x{}[{},{}]^{}", v.coord, v.i, v.k, e)?;
                }
            }
        }
        Ok(())
    }
}

/// Polynomial in the base coordinates with rational coefficients; monomials
/// are multisets of coordinate indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePoly {
    /// `[(sorted coordinate list, coefficient), ...]`
    pub terms: Vec<(Vec<usize>, String)>,
}

impl BasePoly {
    pub fn monomial(coords: Vec<usize>, c: Q) -> Self {
        let mut coords = coords;
        coords.sort_unstable();
        BasePoly {
            terms: vec![(coords, c.to_string())],
        }
    }

    pub fn from_terms(terms: Vec<(Vec<usize>, Q)>) -> Self {
        BasePoly {
            terms: terms
                .into_iter()
                .map(|(mut m, c)| {
                    m.sort_unstable();
                    (m, c.to_string())
                })
                .collect(),
        }
    }

    pub fn parsed_terms(&self) -> Result<Vec<(Vec<usize>, Q)>> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let q: Q = c
                    .parse()
                    .map_err(|e| Error::Invalid(format!("bad coefficient {c}: {e}")))?;
                Ok((m.clone(), q))
            })
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.len()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.iter().all(|(m, _)| m.len() == d)
    }

    /// Evaluates on a tuple of disk functions.
    pub fn evaluate_points(&self, points: &PointSet, coords: &[DiskFun]) -> Result<DiskFun> {
        let mut acc = DiskFun::zero(points);
        for (m, c) in self.parsed_terms()? {
            let mut t = DiskFun::constant(points, ACoeff::from_rat(points.coeff_vars(), c));
            for j in m {
                t = t.mul(
                    coords
                        .get(j)
                        .ok_or_else(|| Error::Invalid("coordinate out of range".into()))?,
                )?;
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }
}

/// Evaluation of a coordinate distribution: `x^j_K(g) = sum_m
/// residue(e_{i,m} g) x^j_{i,-m-1}`, finite on `K^pol`; variables above the
/// window are projected away.
fn coord_field_eval(
    points: &PointSet,
    coord: usize,
    g: &DiskFun,
    kmax: i64,
) -> Result<JetPoly> {
    let nv = points.coeff_vars();
    let n = points.n();
    if g.is_zero() {
        return Ok(JetPoly::zero(nv));
    }
    let val = g.valuation();
    // nonzero residue of e_{i,m} g needs a pole (m <= -1 - val) and enough
    // degree at infinity (m >= -(zdeg(g) + i) / n rounded down)
    let zdeg = g.numerator().len() as i64
        - 1
        - g.denominator().values().map(|d| *d as i64).sum::<i64>();
    let m_hi = -1 - val;
    let m_lo = (-(zdeg + n as i64) - 1).div_euclid(n as i64) - 1;
    let mut out = JetPoly::zero(nv);
    for m in m_lo..=m_hi {
        let k = -m - 1;
        if k > kmax {
            continue;
        }
        for i in 1..=n {
            let e = crate::disk::basis_elem(points, BasisIndex::new(i, m));
            let r = e.mul(g)?.residue();
            if !r.is_zero() {
                out.insert(vec![(JetVar { coord, i, k }, 1)], r);
            }
        }
    }
    Ok(out)
}

fn cert_monomial(len: usize, kmax: i64) -> i64 {
    // a single coordinate distribution sends I_{kmax+1} into the window
    // ideal; (-1)-products compose additively
    (len as i64) * (kmax + 1).max(1)
}

/// Iterated commutative `(-1)`-product of coordinate distributions,
/// evaluated at `g` in the window quotient.
fn lift_monomial_eval(
    points: &PointSet,
    coords: &[usize],
    g: &DiskFun,
    kmax: i64,
) -> Result<JetPoly> {
    let nv = points.coeff_vars();
    if g.is_zero() {
        return Ok(JetPoly::zero(nv));
    }
    match coords.len() {
        0 => Ok(JetPoly::constant(nv, g.residue())),
        1 => coord_field_eval(points, coords[0], g, kmax),
        _ => {
            let head = coords[0];
            let rest = &coords[1..];
            let val_g = g.valuation();
            let order2 = (cert_monomial(rest.len(), kmax) - val_g).max(0) as u32 + 1;
            let s2 = expand_inverse_cached(points, Side::Second, -1, order2)?;
            let mut acc = JetPoly::zero(nv);
            for (u, v) in s2.mul_w(g)?.separable_terms() {
                let xv = coord_field_eval(points, head, &u, kmax)?;
                if xv.is_zero() {
                    continue;
                }
                let qv = lift_monomial_eval(points, rest, &v, kmax)?;
                acc = acc.add(&xv.mul(&qv)?)?;
            }
            let order1 = cert_monomial(1, kmax).max(0) as u32 + 1;
            let s1 = expand_inverse_cached(points, Side::First, -1, order1)?;
            for (u, v) in s1.mul_w(g)?.separable_terms() {
                let xv = coord_field_eval(points, head, &u, kmax)?;
                if xv.is_zero() {
                    continue;
                }
                let qv = lift_monomial_eval(points, rest, &v, kmax)?;
                acc = acc.sub(&xv.mul(&qv)?.neg())?;
            }
            Ok(acc.project(kmax))
        }
    }
}

/// The lifted function `p_{j,k} = p_K(eps_{j,k})` in the window quotient
/// `k <= kmax`; independent of factor order by commutativity.
pub fn lift(points: &PointSet, p: &BasePoly, idx: BasisIndex, kmax: i64) -> Result<JetPoly> {
    let eps = dual_basis_elem(points, idx)?;
    lift_at(points, p, &eps, kmax)
}

/// The lift evaluated at an arbitrary function.
pub fn lift_at(points: &PointSet, p: &BasePoly, g: &DiskFun, kmax: i64) -> Result<JetPoly> {
    let mut acc = JetPoly::zero(points.coeff_vars());
    for (m, c) in p.parsed_terms()? {
        let t = lift_monomial_eval(points, &m, g, kmax)?.mul_rat(&c);
        acc = acc.add(&t)?;
    }
    Ok(acc.project(kmax))
}

/// Report of a functoriality run.
#[derive(Clone, Debug, Serialize)]
pub struct FunctorialityReport {
    pub samples: usize,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// For sampled regular points `b` and window duals `eps_{j,k}`, compares the
/// lifted polynomial evaluated at the coordinate expansion of `b` against
/// `residue(p(b) eps_{j,k})`.
pub fn verify_functoriality(
    points: &PointSet,
    p: &BasePoly,
    samples: &[Vec<DiskFun>],
    kmin: i64,
    kmax: i64,
) -> Result<FunctorialityReport> {
    let mut failures = Vec::new();
    for (s, b) in samples.iter().enumerate() {
        for (_, coord) in b.iter().enumerate() {
            if !coord.is_regular() {
                return Err(Error::Invalid("jet samples must be regular".into()));
            }
        }
        let pb = p.evaluate_points(points, b)?;
        for k in kmin..=kmax {
            for j in 1..=points.n() {
                let idx = BasisIndex::new(j, k);
                let lifted = lift(points, p, idx, kmax.max(-1))?;
                let lhs = lifted.evaluate_at(points, b)?;
                let rhs = pb.mul(&dual_basis_elem(points, idx)?)?.residue();
                if lhs != rhs {
                    failures.push(format!(
                        "sample {} index ({}, {}): {} != {}",
                        s, j, k, lhs, rhs
                    ));
                }
            }
        }
    }
    Ok(FunctorialityReport {
        samples: samples.len(),
        pass: failures.is_empty(),
        failures,
    })
}

/// The shift law for homogeneous polynomials: composing points with a power
/// of `phi` re-indexes `p_{j,k}` to `p_{j,k+dm}`. Checked on samples through
/// the residue description.
pub fn shift_law_check(
    points: &PointSet,
    p: &BasePoly,
    m: i64,
    samples: &[Vec<DiskFun>],
    kmin: i64,
    kmax: i64,
) -> Result<bool> {
    if !p.is_homogeneous() {
        return Err(Error::Invalid("shift law needs a homogeneous polynomial".into()));
    }
    let d = p.degree() as i64;
    let phi_m = crate::disk::phi_pow(points, m);
    for b in samples {
        let shifted: Vec<DiskFun> = b
            .iter()
            .map(|f| f.mul(&phi_m))
            .collect::<Result<Vec<_>>>()?;
        let pb = p.evaluate_points(points, b)?;
        let pb_shifted = p.evaluate_points(points, &shifted)?;
        for k in kmin..=kmax {
            for j in 1..=points.n() {
                let lhs = pb_shifted
                    .mul(&dual_basis_elem(points, BasisIndex::new(j, k))?)?
                    .residue();
                let rhs = pb
                    .mul(&dual_basis_elem(points, BasisIndex::new(j, k + d * m))?)?
                    .residue();
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Top PBW part of an enveloping element as a jet polynomial: each factor
/// `x_a (x) e_{i,k}` becomes the variable `x^a_{i,k}`; lower PBW degrees are
/// discarded.
pub fn symbol(u: &UElem, nvars: usize) -> JetPoly {
    let top = u.pbw_degree();
    let mut out = JetPoly::zero(nvars);
    for (mono, c) in u.monomials() {
        if mono.len() != top {
            continue;
        }
        let jm: JetMonomial = merge_monomials(
            &mono
                .iter()
                .map(|f| {
                    (
                        JetVar {
                            coord: f.a,
                            i: f.i,
                            k: f.k,
                        },
                        1,
                    )
                })
                .collect(),
            &Vec::new(),
        );
        out.insert(jm, c.clone());
    }
    out
}

/// Invariant polynomial `tr(M(x)^d)` in the symmetric algebra of the Lie
/// algebra (coadjoint coordinates), from the defining representation.
pub fn trace_power_poly(lie: &LieData, d: u32) -> BasePoly {
    // expand tr((sum_a x_a M_a)^d) as a polynomial in the x_a
    let dim = lie.dim();
    let mdim = lie.matrix_dim();
    // entries of the symbolic matrix: map (r, c) -> vec over basis of Q
    let mats: Vec<Vec<Vec<Q>>> = (0..dim).map(|a| lie.matrix_of(&lie.basis_vec(a))).collect();
    // polynomial entries: monomial (sorted coords) -> rational, per entry
    type Entry = BTreeMap<Vec<usize>, Q>;
    let mut current: Vec<Vec<Entry>> = vec![vec![BTreeMap::new(); mdim]; mdim];
    for r in 0..mdim {
        for c in 0..mdim {
            for (a, mat) in mats.iter().enumerate() {
                if !mat[r][c].is_zero() {
                    current[r][c].insert(vec![a], mat[r][c].clone());
                }
            }
        }
    }
    let lin = current.clone();
    for _ in 1..d {
        let mut next: Vec<Vec<Entry>> = vec![vec![BTreeMap::new(); mdim]; mdim];
        for r in 0..mdim {
            for c in 0..mdim {
                for l in 0..mdim {
                    for (ma, ca) in &current[r][l] {
                        for (mb, cb) in &lin[l][c] {
                            let mut m = ma.clone();
                            m.extend_from_slice(mb);
                            m.sort_unstable();
                            let e = next[r][c].entry(m).or_insert_with(Q::zero);
                            *e += ca.clone() * cb;
                        }
                    }
                }
            }
        }
        current = next;
    }
    let mut trace: Entry = BTreeMap::new();
    for r in 0..mdim {
        for (m, c) in &current[r][r] {
            let e = trace.entry(m.clone()).or_insert_with(Q::zero);
            *e += c;
        }
    }
    trace.retain(|_, c| !c.is_zero());
    BasePoly::from_terms(trace.into_iter().collect())
}

/// The symbol of the Sugawara field: `1/2 sum_ab (k0^{-1})_{ab} x_a x_b`.
pub fn sugawara_symbol_poly(lie: &LieData) -> BasePoly {
    let mut terms: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
    for (a, (_, dual)) in lie.dual_pairs().into_iter().enumerate() {
        for (b, c) in dual.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut m = vec![a, b];
            m.sort_unstable();
            let e = terms.entry(m).or_insert_with(Q::zero);
            *e += c.clone() / Q::from_integer(2.into());
        }
    }
    terms.retain(|_, c| !c.is_zero());
    BasePoly::from_terms(terms.into_iter().collect())
}

/// Coadjoint invariance: the derivation extending `ad y` annihilates `p`.
pub fn is_ad_invariant(lie: &LieData, p: &BasePoly) -> Result<bool> {
    let terms = p.parsed_terms()?;
    for y in 0..lie.dim() {
        let yv = lie.basis_vec(y);
        let mut derived: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
        for (m, c) in &terms {
            for (slot, a) in m.iter().enumerate() {
                let br = lie.bracket(&yv, &lie.basis_vec(*a));
                for (b, cb) in br.iter().enumerate() {
                    if cb.is_zero() {
                        continue;
                    }
                    let mut nm = m.clone();
                    nm[slot] = b;
                    nm.sort_unstable();
                    let e = derived.entry(nm).or_insert_with(Q::zero);
                    *e += c.clone() * cb;
                }
            }
        }
        derived.retain(|_, c| !c.is_zero());
        if !derived.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Windowed jet presentation of an affine scheme given by relations.
#[derive(Clone, Debug, Serialize)]
pub struct JetPresentation {
    pub base_vars: usize,
    pub window: (i64, i64),
    /// jet variables present in the window
    pub jet_vars: Vec<JetVar>,
    /// lifted relations `g^l_{j,k}` displayed per window index
    pub relations: Vec<(usize, i64, String)>,
}

/// Lifts each relation at every window index.
pub fn jet_presentation(
    points: &PointSet,
    base_vars: usize,
    relations: &[BasePoly],
    kmin: i64,
    kmax: i64,
) -> Result<JetPresentation> {
    let mut jet_vars = Vec::new();
    for k in kmin..=kmax {
        for i in 1..=points.n() {
            for j in 0..base_vars {
                jet_vars.push(JetVar { coord: j, i, k });
            }
        }
    }
    let mut rels = Vec::new();
    for g in relations {
        for k in kmin..=kmax {
            for j in 1..=points.n() {
                let lifted = lift(points, g, BasisIndex::new(j, k), kmax)?;
                rels.push((j, k, lifted.to_string()));
            }
        }
    }
    Ok(JetPresentation {
        base_vars,
        window: (kmin, kmax),
        jet_vars,
        relations: rels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{normal_order, AffineCtx, LoopElem};
    use crate::coeff::{q, qr};
    use crate::disk::basis_elem;
    use crate::fields::{sugawara, Window};
    use crate::lie::Level;
    use std::sync::Arc;

    fn pts(n: usize) -> PointSet {
        PointSet::standard(n)
    }

    #[test]
    fn lift_of_linear_is_variable() {
        let p = pts(2);
        let poly = BasePoly::monomial(vec![0], Q::one());
        let lifted = lift(&p, &poly, BasisIndex::new(1, -1), 3).unwrap();
        let expect = JetPoly::var(
            2,
            JetVar {
                coord: 0,
                i: 1,
                k: -1,
            },
        );
        assert_eq!(lifted, expect);
    }

    #[test]
    fn square_against_simple_pole() {
        // n = 1, a1 = 0 convention: p = x^2 paired with eps_{1,-1} on the
        // point b = 3 + 5z takes the value 9 = (constant term)^2
        let p = pts(1);
        let poly = BasePoly::monomial(vec![0, 0], Q::one());
        let lifted = lift(&p, &poly, BasisIndex::new(1, -1), 1).unwrap();
        let b = vec![DiskFun::from_int(&p, 3)
            .add(&DiskFun::z(&p).mul_rat(&q(5)))
            .unwrap()];
        let got = lifted.evaluate_at(&p, &b).unwrap();
        // oracle: residue(b(z)^2 eps_{1,-1})
        let oracle = b[0]
            .mul(&b[0])
            .unwrap()
            .mul(&dual_basis_elem(&p, BasisIndex::new(1, -1)).unwrap())
            .unwrap()
            .residue();
        assert_eq!(got, oracle);
        // with a1 = 0 the oracle is the squared constant term; symbolically
        // it evaluates to (3 + 5 a1)^2
        let a = ACoeff::var(1, 0);
        let expect = ACoeff::from_int(1, 3)
            .add(&a.mul_rat(&q(5)))
            .unwrap();
        assert_eq!(got, expect.mul(&expect).unwrap());
    }

    #[test]
    fn lift_is_order_independent() {
        let p = pts(2);
        let xy = BasePoly::monomial(vec![0, 1], Q::one());
        let yx = BasePoly::monomial(vec![1, 0], Q::one());
        for k in -2..=0 {
            let a = lift(&p, &xy, BasisIndex::new(1, k), 2).unwrap();
            let b = lift(&p, &yx, BasisIndex::new(1, k), 2).unwrap();
            assert_eq!(a, b, "k = {}", k);
        }
    }

    #[test]
    fn functoriality_on_products() {
        let p = pts(2);
        let poly = BasePoly::monomial(vec![0, 1], Q::one());
        // two fixed degree-2 regular points
        let z = DiskFun::z(&p);
        let samples = vec![
            vec![
                z.pow(2).unwrap().add(&DiskFun::from_int(&p, 1)).unwrap(),
                z.mul_rat(&q(3)).sub(&DiskFun::from_int(&p, 2)).unwrap(),
            ],
            vec![
                z.mul(&z).unwrap().mul_rat(&qr(1, 2)),
                z.add(&DiskFun::constant(&p, p.point(1))).unwrap(),
            ],
        ];
        let report = verify_functoriality(&p, &poly, &samples, -3, -1).unwrap();
        assert!(report.pass, "{:?}", report.failures);
    }

    #[test]
    fn shift_law_on_squares() {
        let p = pts(2);
        let poly = BasePoly::monomial(vec![0, 0], Q::one());
        let z = DiskFun::z(&p);
        let samples = vec![vec![z.pow(2).unwrap().add(&DiskFun::from_int(&p, 2)).unwrap()]];
        assert!(shift_law_check(&p, &poly, 1, &samples, -3, -1).unwrap());
        assert!(shift_law_check(&p, &poly, 2, &samples, -3, -1).unwrap());
    }

    #[test]
    fn symbol_of_single_factor() {
        let ctx = AffineCtx::new(pts(1), Arc::new(LieData::sl2()), Level::multiple(-2));
        let u = normal_order(
            &ctx,
            &[LoopElem::generator(
                &ctx,
                0,
                &basis_elem(&ctx.points, BasisIndex::new(1, -1)),
            )],
            2,
        )
        .unwrap();
        let s = symbol(&u, 1);
        assert_eq!(
            s,
            JetPoly::var(
                1,
                JetVar {
                    coord: 0,
                    i: 1,
                    k: -1
                }
            )
        );
    }

    #[test]
    fn symbol_multiplicative_on_top_degree() {
        let ctx = AffineCtx::new(pts(1), Arc::new(LieData::sl2()), Level::multiple(-2));
        let x = normal_order(
            &ctx,
            &[LoopElem::generator(
                &ctx,
                0,
                &basis_elem(&ctx.points, BasisIndex::new(1, -1)),
            )],
            3,
        )
        .unwrap();
        let y = normal_order(
            &ctx,
            &[LoopElem::generator(
                &ctx,
                2,
                &basis_elem(&ctx.points, BasisIndex::new(1, -2)),
            )],
            3,
        )
        .unwrap();
        let xy = crate::affine::u_mul(&ctx, &x, &y).unwrap();
        let lhs = symbol(&xy, 1);
        let rhs = symbol(&x, 1).mul(&symbol(&y, 1)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn invariant_polynomials_are_ad_invariant() {
        let sl2 = LieData::sl2();
        let p2 = trace_power_poly(&sl2, 2);
        assert!(is_ad_invariant(&sl2, &p2).unwrap());
        assert!(is_ad_invariant(&sl2, &sugawara_symbol_poly(&sl2)).unwrap());
        // and the quadratic must not be trivially zero
        assert!(!p2.terms.is_empty());
        let sl3 = LieData::sl3();
        let p2 = trace_power_poly(&sl3, 2);
        let p3 = trace_power_poly(&sl3, 3);
        assert!(is_ad_invariant(&sl3, &p2).unwrap());
        assert!(is_ad_invariant(&sl3, &p3).unwrap());
        assert!(!p3.terms.is_empty());
        // a non-invariant polynomial is rejected
        let bad = BasePoly::monomial(vec![0, 0], Q::one());
        assert!(!is_ad_invariant(&sl2, &bad).unwrap());
    }

    #[test]
    fn sugawara_symbol_is_casimir_for_sl2() {
        // 1/2 sum (k0^{-1})_ab x_a x_b = x_e x_f + (1/4) x_h^2
        let sl2 = LieData::sl2();
        let p = sugawara_symbol_poly(&sl2);
        let expect = BasePoly::from_terms(vec![
            (vec![0, 2], Q::one()),
            (vec![1, 1], qr(1, 4)),
        ]);
        let mut got = p.parsed_terms().unwrap();
        got.sort();
        let mut want = expect.parsed_terms().unwrap();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn symbol_bridge_small() {
        // symbol(S(eps_{1,k})) at truncation N equals the lift of the
        // Casimir polynomial at (1, k) in the window k <= N - 1
        let n_trunc = 2i64;
        let ctx = AffineCtx::new(pts(1), Arc::new(LieData::sl2()), Level::multiple(-2));
        let s = sugawara(&ctx);
        let p = sugawara_symbol_poly(&ctx.lie);
        let window = Window::new(-2, 0);
        for k in window.kmin..=window.kmax {
            let eps = dual_basis_elem(&ctx.points, BasisIndex::new(1, k)).unwrap();
            let val = s
                .evaluate(&eps, n_trunc + 2)
                .unwrap()
                .reduce_to(n_trunc);
            let lhs = symbol(&val, 1);
            let rhs = lift(&ctx.points, &p, BasisIndex::new(1, k), n_trunc - 1).unwrap();
            assert_eq!(lhs, rhs, "k = {}", k);
        }
    }
}
