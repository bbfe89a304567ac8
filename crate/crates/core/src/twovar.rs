//! Finite tensors in `K_I (x) K_I` and the two one-sided expansions of
//! negative powers of `z - w`.
//!
//! A [`TwoVar`] is kept in bilinear canonical form: a bivariate numerator over
//! the coefficient layer with separable per-point denominators in each slot.
//! Mixed `(z - w)` denominators are never materialized; negative powers only
//! exist through [`ExpansionSeries`], one for each of the two completions,
//! which genuinely disagree.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::coeff::{ACoeff, Q};
use crate::disk::{phi, phi_pow, DiskFun, PointSet};
use crate::error::{Error, Result};

/// Which one-sided completion an expansion series lives in: `First` is
/// adically filtered by powers of `phi(z)`, `Second` by powers of `phi(w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Finite element of `K_I (x) K_I` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoVar {
    points: PointSet,
    /// (z-degree, w-degree) -> coefficient.
    num: BTreeMap<(usize, usize), ACoeff>,
    den_z: BTreeMap<usize, u32>,
    den_w: BTreeMap<usize, u32>,
}

impl TwoVar {
    pub fn zero(points: &PointSet) -> Self {
        TwoVar {
            points: points.clone(),
            num: BTreeMap::new(),
            den_z: BTreeMap::new(),
            den_w: BTreeMap::new(),
        }
    }

    pub fn one(points: &PointSet) -> Self {
        Self::from_pair(&DiskFun::one(points), &DiskFun::one(points)).unwrap()
    }

    /// The tensor `f (x) g` with `f` in the `z` slot and `g` in the `w` slot.
    pub fn from_pair(f: &DiskFun, g: &DiskFun) -> Result<Self> {
        if f.points() != g.points() {
            return Err(Error::PointMismatch);
        }
        let mut num = BTreeMap::new();
        for (i, cf) in f.numerator().iter().enumerate() {
            if cf.is_zero() {
                continue;
            }
            for (j, cg) in g.numerator().iter().enumerate() {
                if cg.is_zero() {
                    continue;
                }
                num.insert((i, j), cf.mul(cg)?);
            }
        }
        Ok(TwoVar {
            points: f.points().clone(),
            num,
            den_z: f.denominator().clone(),
            den_w: g.denominator().clone(),
        }
        .normalized())
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn nvars(&self) -> usize {
        self.points.coeff_vars()
    }

    fn normalized(mut self) -> Self {
        self.num.retain(|_, c| !c.is_zero());
        if self.num.is_empty() {
            self.den_z.clear();
            self.den_w.clear();
            return self;
        }
        for slot_z in [true, false] {
            let labels: Vec<usize> = if slot_z {
                self.den_z.keys().cloned().collect()
            } else {
                self.den_w.keys().cloned().collect()
            };
            for label in labels {
                loop {
                    let m = if slot_z {
                        *self.den_z.get(&label).unwrap_or(&0)
                    } else {
                        *self.den_w.get(&label).unwrap_or(&0)
                    };
                    if m == 0 {
                        break;
                    }
                    match self.try_div_linear(label, slot_z) {
                        Some(quot) => {
                            self.num = quot;
                            let den = if slot_z { &mut self.den_z } else { &mut self.den_w };
                            if m == 1 {
                                den.remove(&label);
                            } else {
                                den.insert(label, m - 1);
                            }
                        }
                        None => break,
                    }
                }
            }
        }
        self
    }

    /// Exact division of the numerator by `(z - a_label)` (`slot_z`) or
    /// `(w - a_label)`; `None` when the remainder is nonzero.
    fn try_div_linear(
        &self,
        label: usize,
        slot_z: bool,
    ) -> Option<BTreeMap<(usize, usize), ACoeff>> {
        let a = self.points.point(label);
        let nv = self.nvars();
        // group by the other slot's degree
        let mut cols: BTreeMap<usize, Vec<ACoeff>> = BTreeMap::new();
        for ((dz, dw), c) in &self.num {
            let (var_deg, other_deg) = if slot_z { (*dz, *dw) } else { (*dw, *dz) };
            let col = cols.entry(other_deg).or_default();
            if col.len() <= var_deg {
                col.resize(var_deg + 1, ACoeff::zero(nv));
            }
            col[var_deg] = c.clone();
        }
        let mut out: BTreeMap<(usize, usize), ACoeff> = BTreeMap::new();
        for (other, col) in cols {
            // remainder is the evaluation at the point
            let mut rem = ACoeff::zero(nv);
            for c in col.iter().rev() {
                rem = rem.mul(&a).unwrap().add(c).unwrap();
            }
            if !rem.is_zero() {
                return None;
            }
            let mut carry = ACoeff::zero(nv);
            for i in (1..col.len()).rev() {
                let c = col[i].add(&carry).unwrap();
                if !c.is_zero() {
                    let key = if slot_z { (i - 1, other) } else { (other, i - 1) };
                    out.insert(key, c.clone());
                }
                carry = c.mul(&a).unwrap();
            }
        }
        Some(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.num.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.points != other.points {
            return Err(Error::PointMismatch);
        }
        let mut den_z = self.den_z.clone();
        for (l, m) in &other.den_z {
            let e = den_z.entry(*l).or_insert(0);
            *e = (*e).max(*m);
        }
        let mut den_w = self.den_w.clone();
        for (l, m) in &other.den_w {
            let e = den_w.entry(*l).or_insert(0);
            *e = (*e).max(*m);
        }
        let left = self.scale_to(&den_z, &den_w);
        let right = other.scale_to(&den_z, &den_w);
        let mut num = left;
        for (k, c) in right {
            let e = num.entry(k).or_insert_with(|| ACoeff::zero(self.nvars()));
            *e = e.add(&c)?;
        }
        Ok(TwoVar {
            points: self.points.clone(),
            num,
            den_z,
            den_w,
        }
        .normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn scale_to(
        &self,
        den_z: &BTreeMap<usize, u32>,
        den_w: &BTreeMap<usize, u32>,
    ) -> BTreeMap<(usize, usize), ACoeff> {
        let mut num = self.num.clone();
        for (slot_z, target, own) in
            [(true, den_z, &self.den_z), (false, den_w, &self.den_w)]
        {
            for (l, m) in target {
                let have = own.get(l).cloned().unwrap_or(0);
                for _ in have..*m {
                    num = mul_bivariate_linear(&num, &self.points.point(*l), slot_z, self.nvars());
                }
            }
        }
        num
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.points != other.points {
            return Err(Error::PointMismatch);
        }
        let mut num: BTreeMap<(usize, usize), ACoeff> = BTreeMap::new();
        for ((az, aw), ca) in &self.num {
            for ((bz, bw), cb) in &other.num {
                let key = (az + bz, aw + bw);
                let e = num.entry(key).or_insert_with(|| ACoeff::zero(self.nvars()));
                *e = e.add(&ca.mul(cb)?)?;
            }
        }
        let mut den_z = self.den_z.clone();
        for (l, m) in &other.den_z {
            *den_z.entry(*l).or_insert(0) += *m;
        }
        let mut den_w = self.den_w.clone();
        for (l, m) in &other.den_w {
            *den_w.entry(*l).or_insert(0) += *m;
        }
        Ok(TwoVar {
            points: self.points.clone(),
            num,
            den_z,
            den_w,
        }
        .normalized())
    }

    pub fn mul_z(&self, f: &DiskFun) -> Result<Self> {
        self.mul(&TwoVar::from_pair(f, &DiskFun::one(&self.points))?)
    }

    pub fn mul_w(&self, g: &DiskFun) -> Result<Self> {
        self.mul(&TwoVar::from_pair(&DiskFun::one(&self.points), g)?)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(&self.points);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// The swap automorphism exchanging the two slots.
    pub fn swap(&self) -> Self {
        TwoVar {
            points: self.points.clone(),
            num: self
                .num
                .iter()
                .map(|((dz, dw), c)| ((*dw, *dz), c.clone()))
                .collect(),
            den_z: self.den_w.clone(),
            den_w: self.den_z.clone(),
        }
    }

    /// Decomposition into separable terms `sum_r p_r(z) (x) q_r(w)`,
    /// grouped by z-monomial.
    pub fn separable_terms(&self) -> Vec<(DiskFun, DiskFun)> {
        let mut by_zdeg: BTreeMap<usize, BTreeMap<usize, ACoeff>> = BTreeMap::new();
        for ((dz, dw), c) in &self.num {
            by_zdeg.entry(*dz).or_default().insert(*dw, c.clone());
        }
        let nv = self.nvars();
        let mut out = Vec::new();
        for (dz, wrow) in by_zdeg {
            let mut znum = vec![ACoeff::zero(nv); dz + 1];
            znum[dz] = ACoeff::one(nv);
            let p = DiskFun::from_parts(&self.points, znum, self.den_z.clone());
            let max_w = wrow.keys().cloned().max().unwrap_or(0);
            let mut wnum = vec![ACoeff::zero(nv); max_w + 1];
            for (dw, c) in wrow {
                wnum[dw] = c;
            }
            let q = DiskFun::from_parts(&self.points, wnum, self.den_w.clone());
            if !p.is_zero() && !q.is_zero() {
                out.push((p, q));
            }
        }
        out
    }

    pub fn mul_scalar(&self, r: &Q) -> Self {
        let mut out = self.clone();
        if r.is_zero() {
            return TwoVar::zero(&self.points);
        }
        for c in out.num.values_mut() {
            *c = c.mul_rat(r);
        }
        out
    }

    /// Derivative in the `w` slot.
    pub fn deriv_w(&self) -> Result<TwoVar> {
        let mut acc = TwoVar::zero(&self.points);
        for (p, q) in self.separable_terms() {
            acc = acc.add(&TwoVar::from_pair(&p, &q.deriv())?)?;
        }
        Ok(acc)
    }

    /// Derivative in the `z` slot.
    pub fn deriv_z(&self) -> Result<TwoVar> {
        Ok(self.swap().deriv_w()?.swap())
    }

    /// Residue in the `z` slot, leaving a function of `w`.
    pub fn residue_z(&self) -> Result<DiskFun> {
        let mut acc = DiskFun::zero(&self.points);
        for (p, q) in self.separable_terms() {
            let r = p.residue();
            acc = acc.add(&q.mul_coeff(&r)?)?;
        }
        Ok(acc)
    }

    /// Exact division by `(z - w)^e`, or an error if not divisible.
    pub fn div_diagonal(&self, e: u32) -> Result<Self> {
        let mut cur = self.clone();
        for _ in 0..e {
            cur = cur.div_diagonal_once()?;
        }
        Ok(cur)
    }

    fn div_diagonal_once(&self) -> Result<Self> {
        // (z - w) is coprime to every (z - a_i) and (w - a_i), so it divides
        // the tensor iff it divides the bivariate numerator.
        let nv = self.nvars();
        let mut rem: BTreeMap<usize, ACoeff> = BTreeMap::new();
        for ((dz, dw), c) in &self.num {
            let e = rem.entry(dz + dw).or_insert_with(|| ACoeff::zero(nv));
            *e = e.add(c)?;
        }
        if rem.values().any(|c| !c.is_zero()) {
            return Err(Error::Invalid("not divisible by (z - w)".into()));
        }
        if self.num.is_empty() {
            return Ok(self.clone());
        }
        let max_z = self.num.keys().map(|(dz, _)| *dz).max().unwrap();
        let max_w = self.num.keys().map(|(_, dw)| *dw).max().unwrap();
        let width = max_z + max_w + 2;
        let mut rows: Vec<Vec<ACoeff>> = vec![vec![ACoeff::zero(nv); width]; max_z + 1];
        for ((dz, dw), c) in &self.num {
            rows[*dz][*dw] = c.clone();
        }
        // num = (z - w) q: with num = sum_i row_i(w) z^i the quotient rows
        // satisfy q_{i-1} = row_i + w * q_i, from the top degree down
        let mut qrows: Vec<Vec<ACoeff>> = vec![vec![ACoeff::zero(nv); width]; max_z.max(1)];
        let mut carry: Vec<ACoeff> = vec![ACoeff::zero(nv); width];
        for i in (1..=max_z).rev() {
            let mut q_i = rows[i].clone();
            for (d, c) in carry.iter().enumerate() {
                if !c.is_zero() {
                    q_i[d] = q_i[d].add(c)?;
                }
            }
            // carry = w * q_i
            let mut next = vec![ACoeff::zero(nv); width];
            for (d, c) in q_i.iter().enumerate() {
                if !c.is_zero() {
                    next[d + 1] = c.clone();
                }
            }
            qrows[i - 1] = q_i;
            carry = next;
        }
        let mut num = BTreeMap::new();
        for (dz, row) in qrows.iter().enumerate() {
            for (dw, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    num.insert((dz, dw), c.clone());
                }
            }
        }
        Ok(TwoVar {
            points: self.points.clone(),
            num,
            den_z: self.den_z.clone(),
            den_w: self.den_w.clone(),
        }
        .normalized())
    }

    /// Whether the tensor lies in `phi(z)^m (R (x) K)` (side `First`) or in
    /// `(K (x) R) phi(w)^m` (side `Second`).
    pub fn in_filtration(&self, side: Side, m: u32) -> bool {
        if self.is_zero() {
            return true;
        }
        let (den, slot_z) = match side {
            Side::First => (&self.den_z, true),
            Side::Second => (&self.den_w, false),
        };
        // clearing the slot's own poles, the numerator must be divisible by
        // phi^(m + max pole order)
        let pole: u32 = den.values().cloned().max().unwrap_or(0);
        let phi_poly: Vec<ACoeff> = phi(&self.points).numerator().to_vec();
        let mut divisor = vec![ACoeff::one(self.nvars())];
        for _ in 0..(m + pole) {
            divisor = poly_mul_simple(&divisor, &phi_poly);
        }
        self.divisible_in_slot(&divisor, slot_z)
    }

    fn divisible_in_slot(&self, divisor: &[ACoeff], slot_z: bool) -> bool {
        if divisor.len() == 1 {
            return true;
        }
        let nv = self.nvars();
        let max_var = self
            .num
            .keys()
            .map(|(dz, dw)| if slot_z { *dz } else { *dw })
            .max()
            .unwrap_or(0);
        let max_other = self
            .num
            .keys()
            .map(|(dz, dw)| if slot_z { *dw } else { *dz })
            .max()
            .unwrap_or(0);
        if divisor.len() > max_var + 1 {
            return false;
        }
        let mut rows: Vec<Vec<ACoeff>> = vec![vec![ACoeff::zero(nv); max_other + 1]; max_var + 1];
        for ((dz, dw), c) in &self.num {
            let (v, o) = if slot_z { (*dz, *dw) } else { (*dw, *dz) };
            rows[v][o] = c.clone();
        }
        let dlen = divisor.len();
        for i in (0..=(max_var + 1 - dlen)).rev() {
            let lead = rows[i + dlen - 1].clone();
            if lead.iter().all(|c| c.is_zero()) {
                continue;
            }
            for (j, dc) in divisor.iter().enumerate() {
                for (o, lc) in lead.iter().enumerate() {
                    if !lc.is_zero() {
                        rows[i + j][o] = rows[i + j][o].sub(&lc.mul(dc).unwrap()).unwrap();
                    }
                }
            }
        }
        rows.iter().take(dlen - 1).all(|r| r.iter().all(|c| c.is_zero()))
    }
}

pub(crate) fn poly_mul_simple(a: &[ACoeff], b: &[ACoeff]) -> Vec<ACoeff> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let nv = a[0].nvars();
    let mut out = vec![ACoeff::zero(nv); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y).unwrap()).unwrap();
        }
    }
    out
}

fn mul_bivariate_linear(
    num: &BTreeMap<(usize, usize), ACoeff>,
    a: &ACoeff,
    slot_z: bool,
    nv: usize,
) -> BTreeMap<(usize, usize), ACoeff> {
    // multiply by (slot - a)
    let mut out: BTreeMap<(usize, usize), ACoeff> = BTreeMap::new();
    for ((dz, dw), c) in num {
        let up = if slot_z { (dz + 1, *dw) } else { (*dz, dw + 1) };
        let e = out.entry(up).or_insert_with(|| ACoeff::zero(nv));
        *e = e.add(c).unwrap();
        let e = out.entry((*dz, *dw)).or_insert_with(|| ACoeff::zero(nv));
        *e = e.sub(&c.mul(a).unwrap()).unwrap();
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// The diagonal factor `z - w`.
pub fn diagonal_factor(points: &PointSet) -> TwoVar {
    let z = DiskFun::z(points);
    let one = DiskFun::one(points);
    TwoVar::from_pair(&z, &one)
        .unwrap()
        .sub(&TwoVar::from_pair(&one, &z).unwrap())
        .unwrap()
}

/// The symmetric polynomial `h` with `phi(z) - phi(w) = (z - w) h`.
pub fn h_poly(points: &PointSet) -> TwoVar {
    let ph = phi(points);
    let one = DiskFun::one(points);
    let diff = TwoVar::from_pair(&ph, &one)
        .unwrap()
        .sub(&TwoVar::from_pair(&one, &ph).unwrap())
        .unwrap();
    diff.div_diagonal(1)
        .expect("phi(z) - phi(w) is divisible by z - w")
}

/// Taylor expansion `sum_{k<=N} (z-w)^k (x) (d^k f)(w) / k!`.
pub fn taylor(f: &DiskFun, n: u32) -> Result<TwoVar> {
    let points = f.points().clone();
    let diag = diagonal_factor(&points);
    let mut acc = TwoVar::zero(&points);
    let mut fact = Q::one();
    let mut dkf = f.clone();
    for k in 0..=n {
        if k > 0 {
            fact *= Q::from_integer(k.into());
            dkf = dkf.deriv();
        }
        let coeff = dkf.mul_rat(&(Q::one() / fact.clone()));
        let term = diag.pow(k)?.mul_w(&coeff)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// The Taylor remainder `f (x) 1 - taylor(f, N)`, divisible by `(z-w)^{N+1}`.
pub fn taylor_remainder(f: &DiskFun, n: u32) -> Result<TwoVar> {
    let points = f.points().clone();
    let lhs = TwoVar::from_pair(f, &DiskFun::one(&points))?;
    lhs.sub(&taylor(f, n)?)
}

/// Truncated one-sided expansion of `(z - w)^m` for `m < 0`.
#[derive(Clone, Debug)]
pub struct ExpansionSeries {
    pub side: Side,
    pub power: i64,
    pub order: u32,
    pub terms: TwoVar,
}

/// Expansion of `(z - w)^m`, `m < 0`, at truncation order `M`, built from the
/// order-`M` expansion of `(z - w)^{-1}`:
/// * `First`: `-h * sum_{j<=M} phi(z)^j phi(w)^{-j-1}` (filtration in `z`);
/// * `Second`: `h * sum_{j<=M} phi(w)^j phi(z)^{-j-1}` (filtration in `w`).
///
/// The defect `(z-w)^{-m} * terms - 1` lies in the side's filtration at level
/// `M + 1`.
pub fn expand_inverse(
    points: &PointSet,
    side: Side,
    m: i64,
    order: u32,
) -> Result<ExpansionSeries> {
    if m >= 0 {
        return Err(Error::Invalid("expansion power must be negative".into()));
    }
    let h = h_poly(points);
    let mut base = TwoVar::zero(points);
    for j in 0..=order {
        let term = match side {
            Side::First => TwoVar::from_pair(
                &phi_pow(points, j as i64),
                &phi_pow(points, -(j as i64) - 1),
            )?,
            Side::Second => TwoVar::from_pair(
                &phi_pow(points, -(j as i64) - 1),
                &phi_pow(points, j as i64),
            )?,
        };
        base = base.add(&term)?;
    }
    base = base.mul(&h)?;
    if side == Side::First {
        base = base.neg();
    }
    let terms = base.pow((-m) as u32)?;
    Ok(ExpansionSeries {
        side,
        power: m,
        order,
        terms,
    })
}

impl ExpansionSeries {
    /// Exact check that `(z - w)^{-power} * terms - 1` lies in the side's
    /// filtration at level `order + 1`.
    pub fn verify(&self) -> Result<bool> {
        let points = self.terms.points().clone();
        let diag = diagonal_factor(&points);
        let lhs = diag.pow((-self.power) as u32)?.mul(&self.terms)?;
        let defect = lhs.sub(&TwoVar::one(&points))?;
        Ok(defect.in_filtration(self.side, self.order + 1))
    }
}

/// Memoized expansion of `(z - w)^m` satisfying the same filtration contract
/// as [`expand_inverse`], built from the order `order + |m| - 1` expansion of
/// `(z - w)^{-1}` by slot derivatives: `(z-w)^{-p}` is
/// `d_w^{p-1} (z-w)^{-1} / (p-1)!` on the second side and carries the sign
/// `(-1)^{p-1}` under `d_z^{p-1}` on the first. Each derivative costs one
/// filtration level, already accounted for in the base order.
pub fn expand_inverse_cached(
    points: &PointSet,
    side: Side,
    m: i64,
    order: u32,
) -> Result<TwoVar> {
    use std::sync::{Mutex, OnceLock};
    type Key = (usize, Vec<usize>, bool, i64, u32);
    static CACHE: OnceLock<Mutex<std::collections::HashMap<Key, TwoVar>>> = OnceLock::new();
    let key = (
        points.coeff_vars(),
        points.active().to_vec(),
        side == Side::First,
        m,
        order,
    );
    let cache = CACHE.get_or_init(|| Mutex::new(std::collections::HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    if m >= 0 {
        return Err(Error::Invalid("expansion power must be negative".into()));
    }
    let p = (-m) as u32;
    let base = expand_inverse(points, side, -1, order + p - 1)?;
    let mut terms = base.terms;
    let mut fact = Q::one();
    for j in 1..p {
        fact *= Q::from_integer(j.into());
        terms = match side {
            Side::Second => terms.deriv_w()?,
            Side::First => terms.deriv_z()?,
        };
    }
    let mut scale = Q::one() / fact;
    if side == Side::First && p % 2 == 0 {
        scale = -scale;
    }
    let terms = terms.mul_scalar(&scale);
    cache.lock().unwrap().insert(key, terms.clone());
    Ok(terms)
}
