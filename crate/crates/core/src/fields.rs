//! Fields: continuous distributions on the disk valued in the truncated
//! completed enveloping algebra.
//!
//! A [`Field`] is an expression tree over generator fields `X^(f) = X (x) f`,
//! the unity field `1(f) = residue(f) 1`, derivatives, products with disk
//! functions and the integer-indexed n-products. Evaluation is memoized per
//! node and keyed by the argument and truncation.
//!
//! Nonnegative products are finite exact sums. Negative products go through
//! the two one-sided expansions of `(z - w)^m`, truncated at an order derived
//! from the factors' continuity certificates; every dropped tail term carries
//! its high-valuation evaluation on the right, where the left-ideal
//! truncation kills it.
//!
//! Values at truncation `N` are classes of canonical representatives. An
//! identity that mixes products of pole-carrying values is checked through
//! [`Field::evaluate_reduced`], which computes at an elevated truncation and
//! reduces, clearing the finitely many levels a dropped representative tail
//! can disturb.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num::{One, Zero};
use serde::Serialize;

use crate::affine::{iota, u_mul, AffineCtx, LoopElem, UElem};
use crate::coeff::{ACoeff, Q};
use crate::disk::{basis_elem, dual_basis_elem, BasisIndex, DiskFun};
use crate::error::{Error, Result};
use crate::lie::GVec;
use crate::twovar::{diagonal_factor, expand_inverse_cached, Side, TwoVar};

/// Expression node of a field.
enum Node {
    Generator(usize),
    Unity,
    Deriv(Field),
    NProd(Field, Field, i64),
    KMul(DiskFun, Field),
    Scalar(ACoeff, Field),
    Sum(Vec<Field>),
}

struct FieldInner {
    ctx: AffineCtx,
    node: Node,
    memo: Mutex<HashMap<(DiskFun, i64), UElem>>,
}

/// Evaluator object: a continuous distribution `K -> U/U_N` for every `N`.
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

impl Field {
    fn wrap(ctx: &AffineCtx, node: Node) -> Self {
        Field {
            inner: Arc::new(FieldInner {
                ctx: ctx.clone(),
                node,
                memo: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn ctx(&self) -> &AffineCtx {
        &self.inner.ctx
    }

    /// The generator field of a Lie basis element.
    pub fn generator(ctx: &AffineCtx, a: usize) -> Self {
        Self::wrap(ctx, Node::Generator(a))
    }

    /// The generator field of an arbitrary Lie element.
    pub fn from_gvec(ctx: &AffineCtx, x: &GVec) -> Self {
        let mut parts = Vec::new();
        for (a, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let g = Self::generator(ctx, a);
            if c.is_one() {
                parts.push(g);
            } else {
                parts.push(g.scale_rat(c));
            }
        }
        match parts.len() {
            1 => parts.pop().unwrap(),
            _ => Self::wrap(ctx, Node::Sum(parts)),
        }
    }

    /// The unity field `f -> residue(f) 1`.
    pub fn unity(ctx: &AffineCtx) -> Self {
        Self::wrap(ctx, Node::Unity)
    }

    pub fn deriv(&self) -> Self {
        Self::wrap(&self.inner.ctx, Node::Deriv(self.clone()))
    }

    pub fn nprod(&self, other: &Field, m: i64) -> Self {
        assert!(
            self.inner.ctx.points == other.inner.ctx.points
                && self.inner.ctx.level == other.inner.ctx.level,
            "n-product across different engines"
        );
        Self::wrap(
            &self.inner.ctx,
            Node::NProd(self.clone(), other.clone(), m),
        )
    }

    pub fn kmul(&self, g: &DiskFun) -> Self {
        Self::wrap(&self.inner.ctx, Node::KMul(g.clone(), self.clone()))
    }

    pub fn scale(&self, c: &ACoeff) -> Self {
        Self::wrap(&self.inner.ctx, Node::Scalar(c.clone(), self.clone()))
    }

    pub fn scale_rat(&self, r: &Q) -> Self {
        let c = ACoeff::from_rat(self.inner.ctx.nvars(), r.clone());
        self.scale(&c)
    }

    pub fn sum(ctx: &AffineCtx, parts: Vec<Field>) -> Self {
        Self::wrap(ctx, Node::Sum(parts))
    }

    /// Continuity certificate: a bound `M(N)` with `X(I_M) <= U_N`, composed
    /// structurally; generator fields give `M = N`, a negative product
    /// `X_(m) Y` composes as `cert_X + cert_Y - m - 1`, matching the
    /// quantitative continuity bound for generator monomials.
    pub fn cert(&self, n: i64) -> i64 {
        match &self.inner.node {
            Node::Generator(_) => n,
            Node::Unity => 0,
            Node::Deriv(x) => x.cert(n) + 1,
            Node::KMul(g, x) => x.cert(n) + (-g.valuation()).max(0),
            Node::Scalar(_, x) => x.cert(n),
            Node::Sum(parts) => parts.iter().map(|p| p.cert(n)).max().unwrap_or(0),
            Node::NProd(x, y, m) => {
                if *m < 0 {
                    x.cert(n) + y.cert(n) + (-m - 1)
                } else {
                    // conservative structural bound
                    x.cert(n) + y.cert(n) + m + 1
                }
            }
        }
    }

    /// Evaluates the field on `f` in `U/U_N`.
    pub fn evaluate(&self, f: &DiskFun, n: i64) -> Result<UElem> {
        let ctx = &self.inner.ctx;
        if f.is_zero() {
            return Ok(UElem::zero(ctx, n));
        }
        let key = (f.clone(), n);
        if let Some(hit) = self.inner.memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let out = match &self.inner.node {
            Node::Generator(a) => iota(ctx, &LoopElem::generator(ctx, *a, f), n)?,
            Node::Unity => UElem::scalar(ctx, n, f.residue()),
            Node::Deriv(x) => x.evaluate(&f.deriv(), n)?.neg(),
            Node::KMul(g, x) => x.evaluate(&g.mul(f)?, n)?,
            Node::Scalar(c, x) => x.evaluate(f, n)?.mul_coeff(c)?,
            Node::Sum(parts) => {
                let mut acc = UElem::zero(ctx, n);
                for p in parts {
                    acc = acc.add(&p.evaluate(f, n)?)?;
                }
                acc
            }
            Node::NProd(x, y, m) => nprod_eval(x, y, *m, f, n)?,
        };
        self.inner
            .memo
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| out.clone());
        Ok(out)
    }

    /// Evaluates at truncation `n + margin` and reduces to `n`, clearing the
    /// levels that representative tails can disturb.
    pub fn evaluate_reduced(&self, f: &DiskFun, n: i64, margin: i64) -> Result<UElem> {
        Ok(self.evaluate(f, n + margin)?.reduce_to(n))
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.node {
            Node::Generator(a) => write!(f, "X{}^", a),
            Node::Unity => write!(f, "1^"),
            Node::Deriv(x) => write!(f, "d({:?})", x),
            Node::NProd(x, y, m) => write!(f, "({:?})_({})({:?})", x, m, y),
            Node::KMul(g, x) => write!(f, "[{}]*({:?})", g, x),
            Node::Scalar(c, x) => write!(f, "({})*({:?})", c, x),
            Node::Sum(parts) => {
                write!(f, "sum[")?;
                for p in parts {
                    write!(f, "{:?}, ", p)?;
                }
                write!(f, "]")
            }
        }
    }
}

/// `(X_(m) Y)(g)`, exact in `U/U_N`.
///
/// For `m >= 0` this is the finite sum `[X,Y]((z-w)^m (1 (x) g))`. For
/// `m < 0` the two summands are computed separately through the one-sided
/// expansions, at orders chosen from the factors' continuity certificates.
pub fn nprod_eval(x: &Field, y: &Field, m: i64, g: &DiskFun, n: i64) -> Result<UElem> {
    let ctx = x.ctx();
    let points = &ctx.points;
    if g.is_zero() {
        return Ok(UElem::zero(ctx, n));
    }
    if m >= 0 {
        let arg = diagonal_factor(points).pow(m as u32)?.mul_w(g)?;
        let mut acc = UElem::zero(ctx, n);
        for (u, v) in arg.separable_terms() {
            let xv = x.evaluate(&u, n)?;
            let yv = y.evaluate(&v, n)?;
            acc = acc.add(&u_mul(ctx, &xv, &yv)?)?;
            acc = acc.sub(&u_mul(ctx, &yv, &xv)?)?;
        }
        return Ok(acc);
    }
    let val_g = g.valuation();
    // first summand: (z-w)^m X Y (1 (x) g), second-side expansion; dropped
    // tails have the Y-argument deep in the filtration, and the Y-value
    // stands on the right
    let order2 = (y.cert(n) - val_g).max(0) as u32 + 1;
    let s2 = expand_inverse_cached(points, Side::Second, m, order2)?;
    let mut acc = UElem::zero(ctx, n);
    for (u, v) in s2.mul_w(g)?.separable_terms() {
        let xv = x.evaluate(&u, n)?;
        let yv = y.evaluate(&v, n)?;
        acc = acc.add(&u_mul(ctx, &xv, &yv)?)?;
    }
    // second summand: (z-w)^m Y X o sigma, first-side expansion; dropped
    // tails have the X-value on the right
    let order1 = x.cert(n).max(0) as u32 + 1;
    let s1 = expand_inverse_cached(points, Side::First, m, order1)?;
    for (u, v) in s1.mul_w(g)?.separable_terms() {
        let xv = x.evaluate(&u, n)?;
        let yv = y.evaluate(&v, n)?;
        acc = acc.sub(&u_mul(ctx, &yv, &xv)?)?;
    }
    Ok(acc)
}

/// Window of basis indices `(i, k)`, `1 <= i <= n`, `kmin <= k <= kmax`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Window {
    pub kmin: i64,
    pub kmax: i64,
}

impl Window {
    pub fn new(kmin: i64, kmax: i64) -> Self {
        assert!(kmin <= kmax);
        Window { kmin, kmax }
    }

    pub fn indices(&self, n_points: usize) -> Vec<BasisIndex> {
        let mut out = Vec::new();
        for k in self.kmin..=self.kmax {
            for i in 1..=n_points {
                out.push(BasisIndex::new(i, k));
            }
        }
        out
    }

    pub fn pole_budget(&self) -> i64 {
        (-self.kmin).max(0)
    }
}

/// Evaluates the commutator 2-distribution `[X, Y]` on a finite tensor.
pub fn commutator_on(x: &Field, y: &Field, t: &TwoVar, n: i64) -> Result<UElem> {
    let ctx = x.ctx();
    let mut acc = UElem::zero(ctx, n);
    for (u, v) in t.separable_terms() {
        let xv = x.evaluate(&u, n)?;
        let yv = y.evaluate(&v, n)?;
        acc = acc.add(&u_mul(ctx, &xv, &yv)?)?;
        acc = acc.sub(&u_mul(ctx, &yv, &xv)?)?;
    }
    Ok(acc)
}

/// Locality certificate: the smallest checked order annihilating the
/// commutator on the test window.
#[derive(Clone, Debug, Serialize)]
pub struct LocalityCert {
    pub order: Option<u32>,
    pub max_checked: u32,
    pub window: Window,
    pub trunc: i64,
}

/// Finds the smallest `N <= max_n` with `(z-w)^N [X, Y] = 0` on all pairs of
/// window basis functions, modulo `U_trunc`.
pub fn locality_order(
    x: &Field,
    y: &Field,
    max_n: u32,
    window: Window,
    trunc: i64,
) -> Result<LocalityCert> {
    let ctx = x.ctx();
    let points = &ctx.points;
    let idxs = window.indices(points.n());
    let margin = 2 * window.pole_budget() + 2;
    let eff = trunc + margin;
    for ord in 0..=max_n {
        let mut all_zero = true;
        'outer: for fi in &idxs {
            for gi in &idxs {
                let f = basis_elem(points, *fi);
                let g = basis_elem(points, *gi);
                let t = diagonal_factor(points)
                    .pow(ord)?
                    .mul(&TwoVar::from_pair(&f, &g)?)?;
                let c = commutator_on(x, y, &t, eff)?.reduce_to(trunc);
                if !c.is_zero() {
                    all_zero = false;
                    break 'outer;
                }
            }
        }
        if all_zero {
            return Ok(LocalityCert {
                order: Some(ord),
                max_checked: max_n,
                window,
                trunc,
            });
        }
    }
    Ok(LocalityCert {
        order: None,
        max_checked: max_n,
        window,
        trunc,
    })
}

/// One named check with its outcome.
#[derive(Clone, Debug, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Report of a family of checks.
#[derive(Clone, Debug, Serialize, Default)]
pub struct Report {
    pub pass: bool,
    pub checks: Vec<CheckItem>,
}

impl Report {
    pub fn push(&mut self, name: impl Into<String>, pass: bool, detail: Option<String>) {
        self.checks.push(CheckItem {
            name: name.into(),
            pass,
            detail,
        });
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }
}

fn eq_on_window(
    lhs: &Field,
    rhs: &Field,
    window: Window,
    n: i64,
    margin: i64,
) -> Result<bool> {
    let points = &lhs.ctx().points;
    for idx in window.indices(points.n()) {
        let f = basis_elem(points, idx);
        let a = lhs.evaluate_reduced(&f, n, margin)?;
        let b = rhs.evaluate_reduced(&f, n, margin)?;
        if a != b {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_zero_on_window(x: &Field, window: Window, n: i64, margin: i64) -> Result<bool> {
    let points = &x.ctx().points;
    for idx in window.indices(points.n()) {
        let f = basis_elem(points, idx);
        if !x.evaluate_reduced(&f, n, margin)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verifies the vertex-algebra axioms on all products of the generators up
/// to the given depth: vacuum axioms, translation covariance, skew-symmetry
/// of the normally ordered product for commuting fields, K-linearity in the
/// second slot, and the commutator Taylor formula.
pub fn vertex_axiom_check(
    generators: &[Field],
    depth: u32,
    n: i64,
    window: Window,
    m_range: (i64, i64),
) -> Result<Report> {
    assert!(!generators.is_empty());
    let ctx = generators[0].ctx().clone();
    let points = &ctx.points;
    let one = Field::unity(&ctx);
    let margin = 2 * window.pole_budget() + (m_range.1 - m_range.0) + 4;
    let mut report = Report::default();

    // the family closed up to the requested depth
    let mut family: Vec<(String, Field)> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        family.push((format!("g{}", i), g.clone()));
    }
    if depth >= 2 {
        let base = family.clone();
        for (nx, x) in &base {
            family.push((format!("d({})", nx), x.deriv()));
            for (ny, y) in &base {
                for m in m_range.0..=m_range.1 {
                    family.push((format!("({})_({})({})", nx, m, ny), x.nprod(y, m)));
                }
            }
        }
    }

    // vacuum axioms: 1_(m) X = delta_{m,-1} X and X_(-1) 1 = X
    for (name, x) in &family {
        for m in -2..=1i64 {
            let prod = one.nprod(x, m);
            let ok = if m == -1 {
                eq_on_window(&prod, x, window, n, margin)?
            } else {
                is_zero_on_window(&prod, window, n, margin)?
            };
            report.push(format!("vacuum: 1_({})({})", m, name), ok, None);
        }
        let ok = eq_on_window(&x.nprod(&one, -1), x, window, n, margin)?;
        report.push(format!("vacuum: ({})_(-1)(1)", name), ok, None);
    }

    // translation covariance on generator pairs
    for (nx, x) in generators.iter().enumerate().map(|(i, g)| (i, g)) {
        for (ny, y) in generators.iter().enumerate().map(|(i, g)| (i, g)) {
            for m in m_range.0..=m_range.1 {
                let lhs = x.nprod(y, m).deriv();
                let rhs_parts = vec![x.deriv().nprod(y, m), x.nprod(&y.deriv(), m)];
                let rhs = Field::sum(&ctx, rhs_parts);
                let ok = eq_on_window(&lhs, &rhs, window, n, margin)?;
                report.push(
                    format!("translation: d(g{}_({})g{})", nx, m, ny),
                    ok,
                    None,
                );
                // (dX)_(m) Y = -m X_(m-1) Y
                let lhs2 = x.deriv().nprod(y, m);
                let rhs2 = x.nprod(y, m - 1).scale_rat(&crate::coeff::q(-m));
                let ok2 = eq_on_window(&lhs2, &rhs2, window, n, margin)?;
                report.push(
                    format!("derivative index: (dg{})_({})g{}", nx, m, ny),
                    ok2,
                    None,
                );
            }
        }
    }

    // skew-symmetry of the (-1)-product for commuting fields X and gX
    let gshift = basis_elem(points, BasisIndex::new(1, 1));
    for (i, x) in generators.iter().enumerate() {
        let gx = x.kmul(&gshift);
        let ok = eq_on_window(
            &x.nprod(&gx, -1),
            &gx.nprod(x, -1),
            window,
            n,
            margin,
        )?;
        report.push(format!("skew-symmetry: g{} vs shifted g{}", i, i), ok, None);
    }

    // K-linearity in the second slot: X_(-1)(gY)(f) = (X_(-1)Y)(gf)
    for (i, x) in generators.iter().enumerate() {
        for (j, y) in generators.iter().enumerate() {
            let gy = y.kmul(&gshift);
            let lhs = x.nprod(&gy, -1);
            let rhs = x.nprod(y, -1).kmul(&gshift);
            let ok = eq_on_window(&lhs, &rhs, window, n, margin)?;
            report.push(format!("K-linearity: g{}_(-1)(g*g{})", i, j), ok, None);
        }
    }

    // commutator Taylor formula on generator pairs:
    // [X(f), Y(g)] = sum_l (1/l!) (X_(l) Y)(g d^l f)
    for (i, x) in generators.iter().enumerate() {
        for (j, y) in generators.iter().enumerate() {
            let cert = locality_order(x, y, 4, window, n)?;
            let Some(ord) = cert.order else {
                report.push(
                    format!("taylor commutator: g{} g{}", i, j),
                    false,
                    Some("no locality order found".into()),
                );
                continue;
            };
            let mut ok = true;
            for fi in window.indices(points.n()) {
                for gi in window.indices(points.n()) {
                    let f = basis_elem(points, fi);
                    let g = basis_elem(points, gi);
                    let lhs = commutator_on(
                        x,
                        y,
                        &TwoVar::from_pair(&f, &g)?,
                        n + margin,
                    )?
                    .reduce_to(n);
                    let mut rhs = UElem::zero(&ctx, n + margin);
                    let mut fact = Q::one();
                    let mut dkf = f.clone();
                    for l in 0..ord as i64 {
                        if l > 0 {
                            fact *= Q::from_integer(l.into());
                            dkf = dkf.deriv();
                        }
                        let arg = g.mul(&dkf)?;
                        let term = x
                            .nprod(y, l)
                            .evaluate(&arg, n + margin)?
                            .mul_rat(&(Q::one() / fact.clone()));
                        rhs = rhs.add(&term)?;
                    }
                    if lhs != rhs.reduce_to(n) {
                        ok = false;
                    }
                }
            }
            report.push(format!("taylor commutator: g{} g{}", i, j), ok, None);
        }
    }

    Ok(report.finish())
}

/// Quasi-conformal action of `h d/dz` on a field carrying weight data.
///
/// Generator fields have weight one and no higher annihilator terms, giving
/// `(h d) X^ = -(h (d X^) + (dh) X^)`; sums and scalar multiples inherit.
/// Composite fields carry no weight data here and are rejected.
pub fn der_action(h: &DiskFun, x: &Field) -> Result<Field> {
    let ctx = x.ctx().clone();
    match &x.inner.node {
        Node::Generator(_) => {
            let t1 = x.deriv().kmul(h);
            let t2 = x.kmul(&h.deriv());
            Ok(Field::sum(&ctx, vec![t1, t2]).scale_rat(&crate::coeff::q(-1)))
        }
        Node::Scalar(c, y) => Ok(der_action(h, y)?.scale(c)),
        Node::Sum(parts) => {
            let acted = parts
                .iter()
                .map(|p| der_action(h, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(Field::sum(&ctx, acted))
        }
        _ => Err(Error::MissingWeightData),
    }
}

/// The Segal-Sugawara field `S = 1/2 sum_a (J^a)^_(-1) (J_a)^` built from
/// k0-dual bases. The normalization is validated by [`centrality_check`]
/// rather than assumed.
pub fn sugawara(ctx: &AffineCtx) -> Field {
    let mut parts = Vec::new();
    for (xa, xdual) in ctx.lie.dual_pairs() {
        let ja = Field::from_gvec(ctx, &xdual);
        let jb = Field::from_gvec(ctx, &xa);
        parts.push(ja.nprod(&jb, -1));
    }
    Field::sum(ctx, parts).scale_rat(&crate::coeff::qr(1, 2))
}

/// Commutators `[S(eps_{j,k}), X (x) e_{i,l}]` over the window; at the
/// critical level all must vanish.
pub fn centrality_check(
    ctx: &AffineCtx,
    s: &Field,
    n: i64,
    window: Window,
) -> Result<Report> {
    let points = &ctx.points;
    let mut report = Report::default();
    let margin = 2 * window.pole_budget() + 2;
    let eff = n + margin;
    for jk in window.indices(points.n()) {
        let eps = dual_basis_elem(points, jk)?;
        let s_val = s.evaluate(&eps, eff)?;
        for a in 0..ctx.lie.dim() {
            for il in window.indices(points.n()) {
                let e = basis_elem(points, il);
                let x_val = iota(ctx, &LoopElem::generator(ctx, a, &e), eff)?;
                let comm = u_mul(ctx, &s_val, &x_val)?
                    .sub(&u_mul(ctx, &x_val, &s_val)?)?
                    .reduce_to(n);
                report.push(
                    format!(
                        "[S(eps_{},{}), {} e_{},{}]",
                        jk.i,
                        jk.k,
                        ctx.lie.basis_name(a),
                        il.i,
                        il.k
                    ),
                    comm.is_zero(),
                    if comm.is_zero() {
                        None
                    } else {
                        Some(format!("{}", comm))
                    },
                );
            }
        }
    }
    Ok(report.finish())
}

/// Pairwise commutators `[S(eps), S(eps')]` over the window.
pub fn center_pairwise_commute(
    ctx: &AffineCtx,
    s: &Field,
    n: i64,
    window: Window,
) -> Result<Report> {
    let points = &ctx.points;
    let mut report = Report::default();
    let margin = 4 * window.pole_budget() + 4;
    let eff = n + margin;
    let idxs = window.indices(points.n());
    for (pos, jk) in idxs.iter().enumerate() {
        for jk2 in idxs.iter().skip(pos + 1) {
            let e1 = dual_basis_elem(points, *jk)?;
            let e2 = dual_basis_elem(points, *jk2)?;
            let s1 = s.evaluate(&e1, eff)?;
            let s2 = s.evaluate(&e2, eff)?;
            let comm = u_mul(ctx, &s1, &s2)?
                .sub(&u_mul(ctx, &s2, &s1)?)?
                .reduce_to(n);
            report.push(
                format!(
                    "[S(eps_{},{}), S(eps_{},{})]",
                    jk.i, jk.k, jk2.i, jk2.k
                ),
                comm.is_zero(),
                None,
            );
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::q;
    use crate::disk::{phi_pow, PointSet};
    use crate::lie::{Level, LieData};

    const E: usize = 0;
    const H: usize = 1;
    const F: usize = 2;

    fn sl2_ctx(n: usize, k: i64) -> AffineCtx {
        AffineCtx::new(
            PointSet::standard(n),
            Arc::new(LieData::sl2()),
            Level::multiple(k),
        )
    }

    #[test]
    fn generator_evaluation_is_insertion() {
        let ctx = sl2_ctx(1, 0);
        let e = Field::generator(&ctx, E);
        let f = basis_elem(&ctx.points, BasisIndex::new(1, -1));
        let got = e.evaluate(&f, 2).unwrap();
        let expect = iota(&ctx, &LoopElem::generator(&ctx, E, &f), 2).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn unity_takes_residues() {
        let ctx = sl2_ctx(1, -2);
        let one = Field::unity(&ctx);
        let pole = phi_pow(&ctx.points, -1);
        let got = one.evaluate(&pole, 3).unwrap();
        assert_eq!(got, UElem::one(&ctx, 3));
        // derivative of unity vanishes on everything
        let d = one.deriv();
        assert!(d.evaluate(&pole, 3).unwrap().is_zero());
        assert!(d
            .evaluate(&DiskFun::z(&ctx.points), 3)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn unity_products() {
        // 1_(m) X = X delta_{m,-1} and X_(-1) 1 = X
        for n in 1..=2usize {
            let ctx = sl2_ctx(n, -2);
            let x = Field::generator(&ctx, E);
            let one = Field::unity(&ctx);
            let window = Window::new(-2, 1);
            for m in -3..=2i64 {
                let prod = one.nprod(&x, m);
                let ok = if m == -1 {
                    eq_on_window(&prod, &x, window, 2, 4).unwrap()
                } else {
                    is_zero_on_window(&prod, window, 2, 4).unwrap()
                };
                assert!(ok, "n={} m={}", n, m);
            }
            let back = x.nprod(&one, -1);
            assert!(eq_on_window(&back, &x, window, 2, 4).unwrap());
        }
    }

    #[test]
    fn kac_moody_zero_and_one_products() {
        // X_(0) Y = [X,Y]^ and X_(1) Y = k(X,Y) 1
        for n in 1..=2usize {
            let k = -2i64;
            let ctx = sl2_ctx(n, k);
            let window = Window::new(-2, 1);
            let gens = [E, H, F];
            for &a in &gens {
                for &b in &gens {
                    let x = Field::generator(&ctx, a);
                    let y = Field::generator(&ctx, b);
                    let br = ctx
                        .lie
                        .bracket(&ctx.lie.basis_vec(a), &ctx.lie.basis_vec(b));
                    let br_field = Field::from_gvec(&ctx, &br);
                    assert!(
                        eq_on_window(&x.nprod(&y, 0), &br_field, window, 2, 3).unwrap(),
                        "0-product a={} b={} n={}",
                        a,
                        b,
                        n
                    );
                    let kappa =
                        ctx.lie
                            .form(&ctx.level, &ctx.lie.basis_vec(a), &ctx.lie.basis_vec(b));
                    let kappa_field =
                        Field::unity(&ctx).scale_rat(&kappa);
                    assert!(
                        eq_on_window(&x.nprod(&y, 1), &kappa_field, window, 2, 3).unwrap(),
                        "1-product a={} b={} n={}",
                        a,
                        b,
                        n
                    );
                }
            }
        }
    }

    #[test]
    fn generator_locality_order_two() {
        let ctx = sl2_ctx(2, -2);
        let x = Field::generator(&ctx, E);
        let y = Field::generator(&ctx, F);
        let cert = locality_order(&x, &y, 4, Window::new(-2, 1), 2).unwrap();
        assert_eq!(cert.order, Some(2));
        // unity against anything has order zero
        let one = Field::unity(&ctx);
        let cert = locality_order(&one, &x, 4, Window::new(-2, 1), 2).unwrap();
        assert_eq!(cert.order, Some(0));
        // derivative raises the order by at most one
        let cert = locality_order(&x.deriv(), &y, 5, Window::new(-2, 1), 2).unwrap();
        assert!(cert.order.unwrap() <= 3);
    }

    #[test]
    fn derivative_shifts_product_index() {
        // (dX)_(m) Y = -m X_(m-1) Y
        let ctx = sl2_ctx(1, -2);
        let x = Field::generator(&ctx, E);
        let y = Field::generator(&ctx, F);
        let window = Window::new(-2, 1);
        for m in -2..=2i64 {
            let lhs = x.deriv().nprod(&y, m);
            let rhs = x.nprod(&y, m - 1).scale_rat(&q(-m));
            assert!(
                eq_on_window(&lhs, &rhs, window, 2, 5).unwrap(),
                "m = {}",
                m
            );
        }
    }

    #[test]
    fn classical_normally_ordered_product() {
        // n = 1, a1 = 0: the (-1)-product against z-powers matches the
        // textbook splitting sum_{j<0} X_j Y_{m-j-1} + sum_{j>=0} Y_{m-j-1} X_j
        let ctx = sl2_ctx(1, -2);
        let trunc = 3i64;
        let x = Field::generator(&ctx, E);
        let y = Field::generator(&ctx, F);
        for mdeg in -3..=3i64 {
            let g = phi_pow(&ctx.points, mdeg);
            let got = x.nprod(&y, -1).evaluate(&g, trunc).unwrap();
            // oracle: direct double sum, j bounded by truncation on the right
            // factor of each summand
            let mut expect = UElem::zero(&ctx, trunc);
            for j in -12..0i64 {
                // X(z^j) Y(z^{mdeg - j - 1}); dies unless mdeg - j - 1 < trunc
                let xf = iota(
                    &ctx,
                    &LoopElem::generator(&ctx, E, &phi_pow(&ctx.points, j)),
                    trunc,
                )
                .unwrap();
                let yf = iota(
                    &ctx,
                    &LoopElem::generator(&ctx, F, &phi_pow(&ctx.points, mdeg - j - 1)),
                    trunc,
                )
                .unwrap();
                expect = expect.add(&u_mul(&ctx, &xf, &yf).unwrap()).unwrap();
            }
            for j in 0..12i64 {
                let xf = iota(
                    &ctx,
                    &LoopElem::generator(&ctx, E, &phi_pow(&ctx.points, j)),
                    trunc,
                )
                .unwrap();
                let yf = iota(
                    &ctx,
                    &LoopElem::generator(&ctx, F, &phi_pow(&ctx.points, mdeg - j - 1)),
                    trunc,
                )
                .unwrap();
                expect = expect.add(&u_mul(&ctx, &yf, &xf).unwrap()).unwrap();
            }
            assert_eq!(got, expect, "mdeg = {}", mdeg);
        }
    }

    #[test]
    fn der_action_translation_and_equivariance() {
        let ctx = sl2_ctx(2, -2);
        let x = Field::generator(&ctx, E);
        // h = 1: the action is -d
        let one_fun = DiskFun::one(&ctx.points);
        let acted = der_action(&one_fun, &x).unwrap();
        let window = Window::new(-2, 1);
        assert!(eq_on_window(
            &acted,
            &x.deriv().scale_rat(&q(-1)),
            window,
            2,
            2
        )
        .unwrap());
        // equivariance: ((h d) X^)(g) = X^(h dg) for h = z and window g
        let h = DiskFun::z(&ctx.points);
        let acted = der_action(&h, &x).unwrap();
        for idx in window.indices(2) {
            let g = basis_elem(&ctx.points, idx);
            let lhs = acted.evaluate(&g, 2).unwrap();
            let rhs = x.evaluate(&h.mul(&g.deriv()).unwrap(), 2).unwrap();
            assert_eq!(lhs, rhs);
        }
        // composite fields carry no weight data
        assert!(der_action(&h, &x.nprod(&x, -1)).is_err());
    }

    #[test]
    fn sugawara_central_at_critical_level_n1() {
        let ctx = sl2_ctx(1, -2);
        let s = sugawara(&ctx);
        let report = centrality_check(&ctx, &s, 2, Window::new(-2, 0)).unwrap();
        assert!(report.pass, "failures: {:?}", report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .collect::<Vec<_>>());
    }

    #[test]
    fn sugawara_not_central_away_from_critical() {
        let ctx = sl2_ctx(1, 0);
        let s = sugawara(&ctx);
        let report = centrality_check(&ctx, &s, 2, Window::new(-2, 0)).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn window_consistency_of_evaluation() {
        // reducing a higher-truncation value gives the lower-truncation value
        let ctx = sl2_ctx(2, -2);
        let x = Field::generator(&ctx, E);
        let y = Field::generator(&ctx, F);
        let prod = x.nprod(&y, -1);
        for idx in Window::new(-1, 1).indices(2) {
            let f = basis_elem(&ctx.points, idx);
            let hi = prod.evaluate_reduced(&f, 4, 2).unwrap();
            let lo = prod.evaluate_reduced(&f, 2, 4).unwrap();
            assert_eq!(hi.reduce_to(2), lo);
        }
    }
}
