//! The affine Lie algebra over the n-pointed disk and its truncated completed
//! enveloping algebra.
//!
//! [`LoopElem`] is a finite sum `sum_a x_a (x) f_a + c 1` with the bracket
//! `[Xf, Yg] = [X,Y] fg + k(X,Y) 1 residue(g df)`. [`UElem`] is a finite
//! normal-ordered PBW sum in the enveloping algebra modulo the left ideal
//! `U_N` generated by `g (x) phi^N R`: every stored monomial is sorted by
//! basis degree `k` ascending (ties by basis slot `i`, then by Lie index),
//! and a normal-ordered monomial lies in `U_N` exactly when its rightmost
//! factor has `k >= N`, which makes the truncation rule local.
//!
//! Products are computed on canonical representatives: multiplying two
//! truncated elements means multiplying their stored PBW sums and reducing
//! again. Checks that need the genuine completed product (centrality, the
//! relation between commutators and loop brackets on inputs with poles)
//! compute at an elevated internal truncation and reduce at the end; see
//! [`UElem::reduce_to`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::Zero;
use serde::{Deserialize, Serialize};

use crate::coeff::{ACoeff, Q};
use crate::disk::{basis_elem, to_basis_exact, BasisIndex, DiskFun, PointSet};
use crate::error::{Error, Result};
use crate::lie::{GVec, Level, LieData};

/// Shared context: point set, Lie data and level.
#[derive(Clone)]
pub struct AffineCtx {
    pub points: PointSet,
    pub lie: Arc<LieData>,
    pub level: Level,
}

impl AffineCtx {
    pub fn new(points: PointSet, lie: Arc<LieData>, level: Level) -> Self {
        AffineCtx { points, lie, level }
    }

    pub fn nvars(&self) -> usize {
        self.points.coeff_vars()
    }
}

/// Element of the loop algebra plus center: `sum_a x_a (x) f_a + central 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopElem {
    /// Lie basis index -> coefficient function; canonical (no zero entries).
    terms: BTreeMap<usize, DiskFun>,
    central: ACoeff,
}

impl LoopElem {
    pub fn zero(ctx: &AffineCtx) -> Self {
        LoopElem {
            terms: BTreeMap::new(),
            central: ACoeff::zero(ctx.nvars()),
        }
    }

    /// `x_a (x) f` for a basis element.
    pub fn generator(ctx: &AffineCtx, a: usize, f: &DiskFun) -> Self {
        let mut out = Self::zero(ctx);
        if !f.is_zero() {
            out.terms.insert(a, f.clone());
        }
        out
    }

    /// `x (x) f` for an arbitrary Lie element.
    pub fn from_gvec(ctx: &AffineCtx, x: &GVec, f: &DiskFun) -> Self {
        let mut out = Self::zero(ctx);
        for (a, c) in x.iter().enumerate() {
            if !c.is_zero() {
                let g = f.mul_rat(c);
                if !g.is_zero() {
                    out.terms.insert(a, g);
                }
            }
        }
        out
    }

    pub fn central(ctx: &AffineCtx, c: ACoeff) -> Self {
        LoopElem {
            terms: BTreeMap::new(),
            central: c,
        }
    }

    pub fn central_part(&self) -> &ACoeff {
        &self.central
    }

    pub fn terms(&self) -> impl Iterator<Item = (&usize, &DiskFun)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.central.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        for (a, f) in &other.terms {
            let merged = match terms.get(a) {
                Some(g) => g.add(f)?,
                None => f.clone(),
            };
            if merged.is_zero() {
                terms.remove(a);
            } else {
                terms.insert(*a, merged);
            }
        }
        Ok(LoopElem {
            terms,
            central: self.central.add(&other.central)?,
        })
    }

    pub fn neg(&self) -> Self {
        LoopElem {
            terms: self.terms.iter().map(|(a, f)| (*a, f.neg())).collect(),
            central: self.central.neg(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul_rat(&self, r: &Q) -> Self {
        LoopElem {
            terms: self.terms.iter().map(|(a, f)| (*a, f.mul_rat(r))).collect(),
            central: self.central.mul_rat(r),
        }
    }
}

/// `[Xf, Yg] = [X,Y] fg + k(X,Y) 1 residue(g df)`.
pub fn loop_bracket(ctx: &AffineCtx, x: &LoopElem, y: &LoopElem) -> Result<LoopElem> {
    let mut out = LoopElem::zero(ctx);
    for (a, f) in &x.terms {
        for (b, g) in &y.terms {
            let fg = f.mul(g)?;
            let xa = ctx.lie.basis_vec(*a);
            let xb = ctx.lie.basis_vec(*b);
            let br = ctx.lie.bracket(&xa, &xb);
            out = out.add(&LoopElem::from_gvec(ctx, &br, &fg))?;
            let kappa = ctx.lie.form(&ctx.level, &xa, &xb);
            if !kappa.is_zero() {
                let res = g.mul(&f.deriv())?.residue();
                out.central = out.central.add(&res.mul_rat(&kappa))?;
            }
        }
    }
    Ok(out)
}

/// One PBW factor `x_a (x) e_{i,k}`, ordered by `(k, i, a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub k: i64,
    pub i: usize,
    pub a: usize,
}

impl Factor {
    pub fn basis_index(&self) -> BasisIndex {
        BasisIndex::new(self.i, self.k)
    }
}

type Monomial = Vec<Factor>;

/// Normal-ordered PBW sum in `U' / U_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UElem {
    level: Level,
    trunc: i64,
    monomials: BTreeMap<Monomial, ACoeff>,
}

impl UElem {
    pub fn zero(ctx: &AffineCtx, trunc: i64) -> Self {
        UElem {
            level: ctx.level.clone(),
            trunc,
            monomials: BTreeMap::new(),
        }
    }

    pub fn scalar(ctx: &AffineCtx, trunc: i64, c: ACoeff) -> Self {
        let mut monomials = BTreeMap::new();
        if !c.is_zero() {
            monomials.insert(Vec::new(), c);
        }
        UElem {
            level: ctx.level.clone(),
            trunc,
            monomials,
        }
    }

    pub fn one(ctx: &AffineCtx, trunc: i64) -> Self {
        Self::scalar(ctx, trunc, ACoeff::one(ctx.nvars()))
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Monomial, &ACoeff)> {
        self.monomials.iter()
    }

    /// Maximum PBW length among stored monomials.
    pub fn pbw_degree(&self) -> usize {
        self.monomials.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    fn insert_term(&mut self, mono: Monomial, c: ACoeff) {
        if c.is_zero() {
            return;
        }
        if let Some(last) = mono.last() {
            if last.k >= self.trunc {
                return;
            }
        }
        match self.monomials.get(&mono) {
            Some(old) => {
                let merged = old.add(&c).unwrap();
                if merged.is_zero() {
                    self.monomials.remove(&mono);
                } else {
                    self.monomials.insert(mono, merged);
                }
            }
            None => {
                self.monomials.insert(mono, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.level != other.level || self.trunc != other.trunc {
            return Err(Error::LevelMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.monomials {
            out.insert_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        UElem {
            level: self.level.clone(),
            trunc: self.trunc,
            monomials: self
                .monomials
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul_coeff(&self, c: &ACoeff) -> Result<Self> {
        let mut out = UElem {
            level: self.level.clone(),
            trunc: self.trunc,
            monomials: BTreeMap::new(),
        };
        for (m, old) in &self.monomials {
            out.insert_term(m.clone(), old.mul(c)?);
        }
        Ok(out)
    }

    pub fn mul_rat(&self, r: &Q) -> Self {
        UElem {
            level: self.level.clone(),
            trunc: self.trunc,
            monomials: self
                .monomials
                .iter()
                .map(|(m, c)| (m.clone(), c.mul_rat(r)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Reduces to a coarser truncation `m <= trunc`: drops every monomial
    /// whose rightmost factor has `k >= m`. Equals the value computed
    /// directly at truncation `m`.
    pub fn reduce_to(&self, m: i64) -> Self {
        assert!(m <= self.trunc);
        UElem {
            level: self.level.clone(),
            trunc: m,
            monomials: self
                .monomials
                .iter()
                .filter(|(mono, _)| mono.last().map_or(true, |f| f.k < m))
                .map(|(mono, c)| (mono.clone(), c.clone()))
                .collect(),
        }
    }
}

/// Conversion window bound: components `e_{i,k}` with
/// `k >= trunc + (pole budget of the tail) + 1` cannot contribute modulo
/// `U_N` once multiplied into the tail, and may be dropped.
fn window_bound(trunc: i64, tail: &UElem) -> i64 {
    let budget: i64 = tail
        .monomials
        .keys()
        .map(|m| m.iter().map(|f| (-f.k).max(0)).sum::<i64>())
        .max()
        .unwrap_or(0);
    trunc + budget + 1
}

/// Left-multiplies the atomic factor into a canonical monomial, producing the
/// normal form of `x_fac * mono` modulo `U_N`.
fn insert_factor(
    ctx: &AffineCtx,
    trunc: i64,
    fac: Factor,
    mono: &[Factor],
    out: &mut UElem,
    scale: &ACoeff,
) -> Result<()> {
    if scale.is_zero() {
        return Ok(());
    }
    if mono.is_empty() {
        if fac.k < trunc {
            out.insert_term(vec![fac], scale.clone());
        }
        return Ok(());
    }
    let head = mono[0];
    if fac <= head {
        let mut m = Vec::with_capacity(mono.len() + 1);
        m.push(fac);
        m.extend_from_slice(mono);
        out.insert_term(m, scale.clone());
        return Ok(());
    }
    let rest = &mono[1..];
    // x_fac x_head = x_head x_fac + [x_fac, x_head]
    let mut shifted = UElem::zero(ctx, trunc);
    insert_factor(ctx, trunc, fac, rest, &mut shifted, scale)?;
    for (m2, c2) in shifted.monomials {
        insert_factor(ctx, trunc, head, &m2, out, &c2)?;
    }
    // bracket correction; the product of two basis functions is
    // poly * phi^(k+l), whose basis expansion is finite and exact
    let xa = ctx.lie.basis_vec(fac.a);
    let xb = ctx.lie.basis_vec(head.a);
    let br = ctx.lie.bracket(&xa, &xb);
    let f_fun = basis_elem(&ctx.points, fac.basis_index());
    let g_fun = basis_elem(&ctx.points, head.basis_index());
    if br.iter().any(|c| !c.is_zero()) {
        let prod = f_fun.mul(&g_fun)?;
        if !prod.is_zero() {
            let comps = to_basis_exact(&prod)?;
            for (c_lie, coeff_lie) in br.iter().enumerate() {
                if coeff_lie.is_zero() {
                    continue;
                }
                for (bi, cf) in &comps {
                    let new_fac = Factor {
                        k: bi.k,
                        i: bi.i,
                        a: c_lie,
                    };
                    let s = scale.mul(&cf.mul_rat(coeff_lie))?;
                    insert_factor(ctx, trunc, new_fac, rest, out, &s)?;
                }
            }
        }
    }
    let kappa = ctx.lie.form(&ctx.level, &xa, &xb);
    if !kappa.is_zero() {
        let res = g_fun.mul(&f_fun.deriv())?.residue();
        if !res.is_zero() {
            out.insert_term(rest.to_vec(), scale.mul(&res.mul_rat(&kappa))?);
        }
    }
    Ok(())
}

fn left_mul_atom(ctx: &AffineCtx, fac: Factor, u: &UElem) -> Result<UElem> {
    let mut out = UElem::zero(ctx, u.trunc);
    for (mono, c) in &u.monomials {
        insert_factor(ctx, u.trunc, fac, mono, &mut out, c)?;
    }
    Ok(out)
}

/// Left-multiplies a loop element into a normal-ordered element: the function
/// of each term is expanded over the `e_{i,k}` basis, exactly when the
/// expansion terminates, otherwise over a window bound derived from the
/// truncation and the tail's pole budget (components beyond the bound cannot
/// leave `U_N` under left multiplication).
pub fn left_mul_loop(ctx: &AffineCtx, x: &LoopElem, u: &UElem) -> Result<UElem> {
    let mut out = if x.central.is_zero() {
        UElem::zero(ctx, u.trunc)
    } else {
        u.mul_coeff(&x.central)?
    };
    for (a, f) in &x.terms {
        let comps = to_basis_exact(f)?;
        let kmax = window_bound(u.trunc, u);
        for (bi, cf) in &comps {
            if bi.k >= kmax {
                // cannot leave U_N under left multiplication into this tail
                continue;
            }
            let fac = Factor {
                k: bi.k,
                i: bi.i,
                a: *a,
            };
            let term = left_mul_atom(ctx, fac, u)?.mul_coeff(cf)?;
            out = out.add(&term)?;
        }
    }
    Ok(out)
}

/// Normal form of a product of loop elements in `U' / U_N`: factors are
/// multiplied from the right, each adjacent transposition inserting its loop
/// bracket correction; monomials whose rightmost basis degree reaches `N`
/// are discarded.
pub fn normal_order(ctx: &AffineCtx, raw: &[LoopElem], trunc: i64) -> Result<UElem> {
    let mut acc = UElem::one(ctx, trunc);
    for x in raw.iter().rev() {
        acc = left_mul_loop(ctx, x, &acc)?;
    }
    Ok(acc)
}

/// Image of a loop element in `U' / U_N`.
pub fn iota(ctx: &AffineCtx, x: &LoopElem, trunc: i64) -> Result<UElem> {
    normal_order(ctx, std::slice::from_ref(x), trunc)
}

/// Product of canonical representatives, re-normalized at the shared
/// truncation.
pub fn u_mul(ctx: &AffineCtx, x: &UElem, y: &UElem) -> Result<UElem> {
    if x.level != y.level || x.trunc != y.trunc {
        return Err(Error::LevelMismatch);
    }
    let mut out = UElem::zero(ctx, x.trunc);
    for (mono, c) in &x.monomials {
        let mut t = y.clone();
        for fac in mono.iter().rev() {
            t = left_mul_atom(ctx, *fac, &t)?;
        }
        out = out.add(&t.mul_coeff(c)?)?;
    }
    Ok(out)
}

pub fn u_commutator(ctx: &AffineCtx, x: &UElem, y: &UElem) -> Result<UElem> {
    u_mul(ctx, x, y)?.sub(&u_mul(ctx, y, x)?)
}

impl fmt::Display for UElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in &self.monomials {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for fac in mono {
                write!(f, " x{}[{},{}]", fac.a, fac.i, fac.k)?;
            }
        }
        Ok(())
    }
}

/// JSON dump of a normal-ordered element: ordered factor lists with
/// coefficients.
#[derive(Serialize, Deserialize)]
pub struct UElemDto {
    pub level: String,
    pub trunc: i64,
    pub monomials: Vec<(Vec<(usize, usize, i64)>, ACoeff)>,
}

impl UElem {
    pub fn to_dto(&self) -> UElemDto {
        UElemDto {
            level: self.level.0.to_string(),
            trunc: self.trunc,
            monomials: self
                .monomials
                .iter()
                .map(|(m, c)| {
                    (
                        m.iter().map(|f| (f.a, f.i, f.k)).collect(),
                        c.clone(),
                    )
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q;
    use crate::disk::phi_pow;
    use rand::{Rng, SeedableRng};

    fn sl2_ctx(n: usize, k: i64) -> AffineCtx {
        AffineCtx::new(
            PointSet::standard(n),
            Arc::new(LieData::sl2()),
            Level::multiple(k),
        )
    }

    const E: usize = 0;
    const H: usize = 1;
    const F: usize = 2;

    #[test]
    fn bracket_with_cocycle() {
        // [e (x) 1/(z-a1), f (x) (z-a1)] = h (x) 1 - k 1
        // oracle: residue((z-a1) d (z-a1)^{-1}) = residue(-(z-a1)^{-1}) = -1
        let k = 5i64;
        let ctx = sl2_ctx(1, k);
        let pole = phi_pow(&ctx.points, -1);
        let lin = phi_pow(&ctx.points, 1);
        let x = LoopElem::generator(&ctx, E, &pole);
        let y = LoopElem::generator(&ctx, F, &lin);
        let br = loop_bracket(&ctx, &x, &y).unwrap();
        let expect = LoopElem::generator(&ctx, H, &DiskFun::one(&ctx.points))
            .add(&LoopElem::central(&ctx, ACoeff::from_int(1, -k)))
            .unwrap();
        assert_eq!(br, expect);
    }

    #[test]
    fn bracket_without_cocycle() {
        // [e (x) 1, f (x) 1] = h (x) 1
        let ctx = sl2_ctx(2, 3);
        let one = DiskFun::one(&ctx.points);
        let br = loop_bracket(
            &ctx,
            &LoopElem::generator(&ctx, E, &one),
            &LoopElem::generator(&ctx, F, &one),
        )
        .unwrap();
        assert_eq!(br, LoopElem::generator(&ctx, H, &one));
    }

    #[test]
    fn cartan_bracket_is_pure_cocycle() {
        // [h (x) f, h (x) g] = 2k residue(g f') for sl2
        let k = 3i64;
        let ctx = sl2_ctx(1, k);
        let f = phi_pow(&ctx.points, -1);
        let g = phi_pow(&ctx.points, 1);
        let br = loop_bracket(
            &ctx,
            &LoopElem::generator(&ctx, H, &f),
            &LoopElem::generator(&ctx, H, &g),
        )
        .unwrap();
        let res = g.mul(&f.deriv()).unwrap().residue();
        let expect = LoopElem::central(&ctx, res.mul_rat(&q(2 * k)));
        assert_eq!(br, expect);
    }

    #[test]
    fn ordered_product_unchanged() {
        let ctx = sl2_ctx(1, 0);
        let e10 = basis_elem(&ctx.points, BasisIndex::new(1, 0));
        let u = normal_order(
            &ctx,
            &[
                LoopElem::generator(&ctx, E, &e10),
                LoopElem::generator(&ctx, F, &e10),
            ],
            2,
        )
        .unwrap();
        let mono = vec![
            Factor { k: 0, i: 1, a: E },
            Factor { k: 0, i: 1, a: F },
        ];
        assert_eq!(u.monomials.len(), 1);
        assert_eq!(u.monomials.get(&mono), Some(&ACoeff::one(1)));
    }

    #[test]
    fn swap_inserts_bracket_correction() {
        // (f (x) 1) (e (x) phi^{-1}) = (e (x) phi^{-1})(f (x) 1) - h (x) phi^{-1}
        let ctx = sl2_ctx(1, 7);
        let one = DiskFun::one(&ctx.points);
        let pole = phi_pow(&ctx.points, -1);
        let u = normal_order(
            &ctx,
            &[
                LoopElem::generator(&ctx, F, &one),
                LoopElem::generator(&ctx, E, &pole),
            ],
            3,
        )
        .unwrap();
        let mut expect = UElem::zero(&ctx, 3);
        expect.insert_term(
            vec![Factor { k: -1, i: 1, a: E }, Factor { k: 0, i: 1, a: F }],
            ACoeff::one(1),
        );
        expect.insert_term(vec![Factor { k: -1, i: 1, a: H }], ACoeff::from_int(1, -1));
        assert_eq!(u, expect);
    }

    #[test]
    fn factor_beyond_truncation_dies() {
        let ctx = sl2_ctx(1, 0);
        let f = phi_pow(&ctx.points, 2);
        let u = iota(&ctx, &LoopElem::generator(&ctx, E, &f), 2).unwrap();
        assert!(u.is_zero());
    }

    #[test]
    fn commutator_realizes_loop_bracket() {
        // on inputs spanned by exact basis elements the identity
        // [iota(x), iota(y)] = iota([x, y]) holds at any truncation
        let ctx = sl2_ctx(2, -2);
        let trunc = 2;
        let fs = [
            basis_elem(&ctx.points, BasisIndex::new(1, -1)),
            basis_elem(&ctx.points, BasisIndex::new(2, 0)),
            basis_elem(&ctx.points, BasisIndex::new(1, 1)),
            basis_elem(&ctx.points, BasisIndex::new(2, -2)),
        ];
        let lies = [E, H, F];
        for (la, fa) in lies.iter().zip(fs.iter()) {
            for (lb, fb) in lies.iter().rev().zip(fs.iter().skip(1)) {
                let x = LoopElem::generator(&ctx, *la, fa);
                let y = LoopElem::generator(&ctx, *lb, fb);
                let lhs = u_commutator(
                    &ctx,
                    &iota(&ctx, &x, trunc).unwrap(),
                    &iota(&ctx, &y, trunc).unwrap(),
                )
                .unwrap();
                let rhs = iota(&ctx, &loop_bracket(&ctx, &x, &y).unwrap(), trunc).unwrap();
                assert_eq!(lhs, rhs, "x={:?} y={:?}", (la, fa), (lb, fb));
            }
        }
    }

    fn random_uelem(ctx: &AffineCtx, trunc: i64, rng: &mut impl Rng) -> UElem {
        let mut acc = UElem::zero(ctx, trunc);
        for _ in 0..2 {
            let mut factors = Vec::new();
            for _ in 0..rng.gen_range(1..=2usize) {
                factors.push(LoopElem::generator(
                    ctx,
                    rng.gen_range(0..3),
                    &basis_elem(
                        &ctx.points,
                        BasisIndex::new(
                            rng.gen_range(1..=ctx.points.n()),
                            rng.gen_range(-2..2),
                        ),
                    ),
                ));
            }
            acc = acc
                .add(&normal_order(ctx, &factors, trunc).unwrap())
                .unwrap();
        }
        acc
    }

    #[test]
    fn associativity_randomized() {
        // on representatives free of truncation drops both association
        // orders rewrite to the same normal form; with factor degrees
        // bounded by 1 and six factors total, truncation 9 drops nothing
        let ctx = sl2_ctx(1, -2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..6 {
            let x = random_uelem(&ctx, 9, &mut rng);
            let y = random_uelem(&ctx, 9, &mut rng);
            let z = random_uelem(&ctx, 9, &mut rng);
            let l = u_mul(&ctx, &u_mul(&ctx, &x, &y).unwrap(), &z).unwrap();
            let r = u_mul(&ctx, &x, &u_mul(&ctx, &y, &z).unwrap()).unwrap();
            assert_eq!(l, r);
            assert_eq!(l.reduce_to(2), r.reduce_to(2));
        }
    }

    #[test]
    fn monotone_truncation() {
        let ctx = sl2_ctx(2, -2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let raw: Vec<LoopElem> = (0..3)
                .map(|_| {
                    LoopElem::generator(
                        &ctx,
                        rng.gen_range(0..3),
                        &basis_elem(
                            &ctx.points,
                            BasisIndex::new(
                                rng.gen_range(1..=2),
                                rng.gen_range(-2..2),
                            ),
                        ),
                    )
                })
                .collect();
            let hi = normal_order(&ctx, &raw, 4).unwrap();
            let lo = normal_order(&ctx, &raw, 1).unwrap();
            assert_eq!(hi.reduce_to(1), lo);
        }
    }

    #[test]
    fn scalar_is_identity() {
        let ctx = sl2_ctx(1, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = random_uelem(&ctx, 3, &mut rng);
        let one = UElem::one(&ctx, 3);
        assert_eq!(u_mul(&ctx, &x, &one).unwrap(), x);
        assert_eq!(u_mul(&ctx, &one, &x).unwrap(), x);
    }
}
