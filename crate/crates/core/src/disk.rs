//! Functions on the n-pointed formal disk with poles at the marked points.
//!
//! A [`DiskFun`] is `num(z) / prod_i (z - a_i)^{m_i}` with exact [`ACoeff`]
//! coefficients. The module provides the derivative, the residue (sum of the
//! residues at the marked points, computed as the residue at infinity), the
//! symmetric topological basis `e_{i,k} = e_i * phi^k`, its residue-dual basis
//! `eps_{i,k}`, windowed basis expansions and polynomial coordinate changes.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{q, ACoeff, Mode, Q};
use crate::error::{Error, Result};

/// The finite ordered label set of the marked points.
///
/// `coeff_vars` is the number of point symbols in the coefficient ring;
/// `active` lists which of them mark poles of this disk. For a plain
/// `n`-pointed disk the two coincide; factorization components keep all
/// coefficient symbols while restricting the active poles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointSet {
    coeff_vars: usize,
    active: Vec<usize>,
}

impl PointSet {
    pub fn standard(n: usize) -> Self {
        assert!(n >= 1);
        PointSet {
            coeff_vars: n,
            active: (0..n).collect(),
        }
    }

    pub fn with_active(coeff_vars: usize, active: Vec<usize>) -> Self {
        assert!(!active.is_empty());
        assert!(active.iter().all(|&i| i < coeff_vars));
        let mut a = active;
        a.sort_unstable();
        a.dedup();
        PointSet {
            coeff_vars,
            active: a,
        }
    }

    /// Number of active points (the `n` of the disk).
    pub fn n(&self) -> usize {
        self.active.len()
    }

    pub fn coeff_vars(&self) -> usize {
        self.coeff_vars
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// The point symbol `a_label` as a coefficient.
    pub fn point(&self, label: usize) -> ACoeff {
        ACoeff::var(self.coeff_vars, label)
    }
}

/// Basis index `(i, k)` referring to `e_{i,k} = e_i * phi^k` or its dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    /// 1-based symmetric-basis index, `1 <= i <= n`.
    pub i: usize,
    pub k: i64,
}

impl BasisIndex {
    pub fn new(i: usize, k: i64) -> Self {
        BasisIndex { i, k }
    }
}

/// Element of `K_I^pol`: a z-polynomial over the coefficient layer divided by
/// a monomial in the `(z - a_i)` with per-point multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiskFun {
    points: PointSet,
    /// Numerator coefficients by z-degree, highest trimmed.
    num: Vec<ACoeff>,
    /// label -> multiplicity of `(z - a_label)`; only active labels, no zeros.
    den: BTreeMap<usize, u32>,
}

impl DiskFun {
    pub fn zero(points: &PointSet) -> Self {
        DiskFun {
            points: points.clone(),
            num: Vec::new(),
            den: BTreeMap::new(),
        }
    }

    pub fn one(points: &PointSet) -> Self {
        Self::constant(points, ACoeff::one(points.coeff_vars))
    }

    pub fn constant(points: &PointSet, c: ACoeff) -> Self {
        assert_eq!(c.nvars(), points.coeff_vars);
        DiskFun {
            points: points.clone(),
            num: if c.is_zero() { vec![] } else { vec![c] },
            den: BTreeMap::new(),
        }
    }

    pub fn from_int(points: &PointSet, n: i64) -> Self {
        Self::constant(points, ACoeff::from_int(points.coeff_vars, n))
    }

    /// The coordinate `z`.
    pub fn z(points: &PointSet) -> Self {
        DiskFun {
            points: points.clone(),
            num: vec![
                ACoeff::zero(points.coeff_vars),
                ACoeff::one(points.coeff_vars),
            ],
            den: BTreeMap::new(),
        }
    }

    /// `z - a_label` for an active label.
    pub fn z_minus_point(points: &PointSet, label: usize) -> Self {
        assert!(points.active.contains(&label));
        DiskFun {
            points: points.clone(),
            num: vec![
                points.point(label).neg(),
                ACoeff::one(points.coeff_vars),
            ],
            den: BTreeMap::new(),
        }
    }

    /// Builds `num / prod (z - a_i)^{den[i]}` and normalizes.
    pub fn from_parts(points: &PointSet, num: Vec<ACoeff>, den: BTreeMap<usize, u32>) -> Self {
        for label in den.keys() {
            assert!(points.active.contains(label), "pole at inactive point");
        }
        DiskFun {
            points: points.clone(),
            num,
            den,
        }
        .normalized()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn numerator(&self) -> &[ACoeff] {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<usize, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// True when the function is regular (no pole at any marked point).
    pub fn is_regular(&self) -> bool {
        self.den.is_empty()
    }

    pub fn max_pole_order(&self) -> u32 {
        self.den.values().cloned().max().unwrap_or(0)
    }

    fn nvars(&self) -> usize {
        self.points.coeff_vars
    }

    fn normalized(mut self) -> Self {
        while let Some(c) = self.num.last() {
            if c.is_zero() {
                self.num.pop();
            } else {
                break;
            }
        }
        if self.num.is_empty() {
            self.den.clear();
            return self;
        }
        // cancel (z - a_i) factors shared by numerator and denominator
        let labels: Vec<usize> = self.den.keys().cloned().collect();
        for label in labels {
            loop {
                let m = *self.den.get(&label).unwrap_or(&0);
                if m == 0 {
                    break;
                }
                match div_poly_by_linear(&self.num, &self.points.point(label)) {
                    Some(qt) => {
                        self.num = qt;
                        if m == 1 {
                            self.den.remove(&label);
                        } else {
                            self.den.insert(label, m - 1);
                        }
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|_, m| *m > 0);
        self
    }

    fn check_points(&self, other: &Self) -> Result<()> {
        if self.points != other.points {
            return Err(Error::PointMismatch);
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        DiskFun {
            points: self.points.clone(),
            num: self.num.iter().map(|c| c.neg()).collect(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_points(other)?;
        // common denominator
        let mut den = self.den.clone();
        for (l, m) in &other.den {
            let e = den.entry(*l).or_insert(0);
            *e = (*e).max(*m);
        }
        let left = scale_by_missing(&self.num, &self.points, &self.den, &den)?;
        let right = scale_by_missing(&other.num, &self.points, &other.den, &den)?;
        let num = poly_add(&left, &right)?;
        Ok(DiskFun {
            points: self.points.clone(),
            num,
            den,
        }
        .normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_points(other)?;
        let num = poly_mul(&self.num, &other.num)?;
        let mut den = self.den.clone();
        for (l, m) in &other.den {
            *den.entry(*l).or_insert(0) += *m;
        }
        Ok(DiskFun {
            points: self.points.clone(),
            num,
            den,
        }
        .normalized())
    }

    pub fn mul_coeff(&self, c: &ACoeff) -> Result<Self> {
        let num = self
            .num
            .iter()
            .map(|x| x.mul(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiskFun {
            points: self.points.clone(),
            num,
            den: self.den.clone(),
        }
        .normalized())
    }

    pub fn mul_rat(&self, r: &Q) -> Self {
        DiskFun {
            points: self.points.clone(),
            num: self.num.iter().map(|c| c.mul_rat(r)).collect(),
            den: self.den.clone(),
        }
        .normalized()
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(&self.points);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Derivative with respect to `z`, quotient rule on the denominator.
    pub fn deriv(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        if self.den.is_empty() {
            return DiskFun {
                points: self.points.clone(),
                num: poly_deriv(&self.num),
                den: BTreeMap::new(),
            }
            .normalized();
        }
        // f = num / prod (z-a_i)^{m_i}
        // f' = [num' * prod (z-a_i) - num * sum_i m_i prod_{j != i} (z-a_j)]
        //      / prod (z-a_i)^{m_i + 1}
        let nv = self.nvars();
        let mut lead = poly_deriv(&self.num);
        for label in self.den.keys() {
            lead = poly_mul(&lead, &linear(nv, &self.points.point(*label))).unwrap();
        }
        let mut corr: Vec<ACoeff> = Vec::new();
        for (label, m) in &self.den {
            let mut t: Vec<ACoeff> = self
                .num
                .iter()
                .map(|c| c.mul_rat(&q(*m as i64)))
                .collect();
            for other in self.den.keys() {
                if other != label {
                    t = poly_mul(&t, &linear(nv, &self.points.point(*other))).unwrap();
                }
            }
            corr = poly_add(&corr, &t).unwrap();
        }
        let num = poly_sub(&lead, &corr).unwrap();
        let den = self.den.iter().map(|(l, m)| (*l, m + 1)).collect();
        DiskFun {
            points: self.points.clone(),
            num,
            den,
        }
        .normalized()
    }

    pub fn deriv_n(&self, n: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.deriv();
        }
        out
    }

    /// Sum of the residues at the marked points, computed as the coefficient
    /// of `z^{-1}` in the expansion at infinity. The result always lies in
    /// the coefficient layer.
    pub fn residue(&self) -> ACoeff {
        let nv = self.nvars();
        if self.den.is_empty() || self.is_zero() {
            return ACoeff::zero(nv);
        }
        // f = sum_m c_m z^m * prod_i (z - a_i)^{-d_i}
        // (z - a)^{-d} = z^{-d} sum_{k >= 0} binom(d+k-1, k) a^k z^{-k}
        // coefficient of z^{-1}: for each m take total extra decay
        // K = m + 1 - sum d_i >= 0 split over the points.
        let dsum: i64 = self.den.values().map(|m| *m as i64).sum();
        let labels: Vec<(usize, u32)> = self.den.iter().map(|(l, m)| (*l, *m)).collect();
        let mut acc = ACoeff::zero(nv);
        for (m, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let kk = m as i64 + 1 - dsum;
            if kk < 0 {
                continue;
            }
            let contrib = expansion_coeff(&self.points, &labels, kk as u32);
            acc = acc.add(&c.mul(&contrib).unwrap()).unwrap();
        }
        acc
    }

    /// phi-adic valuation: the largest `v` with `f / phi^v` regular,
    /// for nonzero `f`; zero maps to `i64::MAX` conventionally.
    pub fn valuation(&self) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        if let Some(m) = self.den.values().max() {
            return -(*m as i64);
        }
        // regular: count exact divisions by phi
        let phi = phi(&self.points);
        let mut v = 0i64;
        let mut cur = self.num.clone();
        loop {
            match div_poly_exact(&cur, &phi.num) {
                Some(qt) => {
                    v += 1;
                    cur = qt;
                }
                None => break,
            }
        }
        v
    }

    /// Substitution `z -> psi(z)`.
    ///
    /// The substituted denominator factors `psi(z) - a_i` must factor exactly
    /// over the marked points; otherwise the result leaves `K_I^pol` and an
    /// error is returned.
    pub fn compose(&self, psi: &DiskFun) -> Result<DiskFun> {
        self.check_points(psi)?;
        if !psi.is_regular() {
            // substitution with poles: allowed as long as denominators factor
        }
        // numerator: num(psi) as a fraction
        let mut value = DiskFun::zero(&self.points);
        let mut p = DiskFun::one(&self.points);
        for c in &self.num {
            value = value.add(&p.mul_coeff(c)?)?;
            p = p.mul(psi)?;
        }
        for (label, m) in &self.den {
            // psi - a_label must equal c * prod (z - a_j)^{e_j}
            let shifted = psi.sub(&DiskFun::constant(
                &self.points,
                self.points.point(*label),
            ))?;
            let inv = shifted.invert()?;
            value = value.mul(&inv.pow(*m)?)?;
        }
        Ok(value)
    }

    /// Exact inverse, defined when the function is a unit of `K_I^pol`,
    /// i.e. `c * prod (z - a_i)^{m_i}` with invertible `c`.
    pub fn invert(&self) -> Result<DiskFun> {
        if self.is_zero() {
            return Err(Error::NonUnit("zero disk function".into()));
        }
        // strip point factors from the numerator
        let mut num = self.num.clone();
        let mut extra: BTreeMap<usize, u32> = BTreeMap::new();
        for label in &self.points.active {
            loop {
                match div_poly_by_linear(&num, &self.points.point(*label)) {
                    Some(qt) => {
                        num = qt;
                        *extra.entry(*label).or_insert(0) += 1;
                    }
                    None => break,
                }
            }
        }
        if num.len() != 1 {
            return Err(Error::NonUnit(format!(
                "disk function {} is not of the form c * prod (z - a_i)^m",
                self
            )));
        }
        let c_inv = num[0].invert()?;
        // 1 / (c * prod (z-a)^extra / prod (z-a)^den)
        //  = (1/c) * prod (z-a)^den / prod (z-a)^extra
        let mut out = DiskFun::constant(&self.points, c_inv);
        for (l, m) in &self.den {
            out = out.mul(&DiskFun::z_minus_point(&self.points, *l).pow(*m)?)?;
        }
        let mut den = BTreeMap::new();
        for (l, m) in extra {
            if m > 0 {
                den.insert(l, m);
            }
        }
        out.den = den;
        Ok(out.normalized())
    }

    /// Evaluates the numerator at `z = value` (used for remainder checks).
    pub fn numerator_at(&self, value: &ACoeff) -> ACoeff {
        poly_eval(&self.num, value)
    }

    /// Maps the coefficient layer through `f`.
    pub fn map_coeffs<F: Fn(&ACoeff) -> Result<ACoeff>>(
        &self,
        points: &PointSet,
        f: F,
    ) -> Result<DiskFun> {
        let num = self.num.iter().map(|c| f(c)).collect::<Result<Vec<_>>>()?;
        Ok(DiskFun {
            points: points.clone(),
            num,
            den: self.den.clone(),
        }
        .normalized())
    }
}

fn linear(nvars: usize, a: &ACoeff) -> Vec<ACoeff> {
    vec![a.neg(), ACoeff::one(nvars)]
}

fn poly_add(a: &[ACoeff], b: &[ACoeff]) -> Result<Vec<ACoeff>> {
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i);
        let y = b.get(i);
        out.push(match (x, y) {
            (Some(x), Some(y)) => x.add(y)?,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        });
    }
    while out.last().map_or(false, |c| c.is_zero()) {
        out.pop();
    }
    Ok(out)
}

fn poly_sub(a: &[ACoeff], b: &[ACoeff]) -> Result<Vec<ACoeff>> {
    let negb: Vec<ACoeff> = b.iter().map(|c| c.neg()).collect();
    poly_add(a, &negb)
}

fn poly_mul(a: &[ACoeff], b: &[ACoeff]) -> Result<Vec<ACoeff>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let nv = a[0].nvars();
    let mut out = vec![ACoeff::zero(nv); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y)?)?;
        }
    }
    while out.last().map_or(false, |c| c.is_zero()) {
        out.pop();
    }
    Ok(out)
}

fn poly_deriv(a: &[ACoeff]) -> Vec<ACoeff> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_rat(&q(i as i64)))
        .collect()
}

fn poly_eval(a: &[ACoeff], at: &ACoeff) -> ACoeff {
    let nv = at.nvars();
    let mut acc = ACoeff::zero(nv);
    for c in a.iter().rev() {
        acc = acc.mul(at).unwrap().add(c).unwrap();
    }
    acc
}

/// Exact division by `(z - a)`, or `None` if the remainder is nonzero.
fn div_poly_by_linear(p: &[ACoeff], a: &ACoeff) -> Option<Vec<ACoeff>> {
    if p.is_empty() {
        return Some(Vec::new());
    }
    let rem = poly_eval(p, a);
    if !rem.is_zero() {
        return None;
    }
    // synthetic division
    let mut out = vec![ACoeff::zero(a.nvars()); p.len() - 1];
    let mut carry = ACoeff::zero(a.nvars());
    for i in (1..p.len()).rev() {
        let c = p[i].add(&carry).unwrap();
        out[i - 1] = c.clone();
        carry = c.mul(a).unwrap();
    }
    Some(out)
}

/// Exact division of `p` by monic `d`, or `None` if a remainder appears.
fn div_poly_exact(p: &[ACoeff], d: &[ACoeff]) -> Option<Vec<ACoeff>> {
    if p.is_empty() {
        return Some(Vec::new());
    }
    if d.len() > p.len() {
        return None;
    }
    assert!(d.last().unwrap().is_one(), "divisor must be monic");
    let nv = p[0].nvars();
    let mut rem: Vec<ACoeff> = p.to_vec();
    let mut quot = vec![ACoeff::zero(nv); p.len() - d.len() + 1];
    for i in (0..quot.len()).rev() {
        let lead = rem[i + d.len() - 1].clone();
        if lead.is_zero() {
            continue;
        }
        quot[i] = lead.clone();
        for (j, dc) in d.iter().enumerate() {
            rem[i + j] = rem[i + j].sub(&lead.mul(dc).unwrap()).unwrap();
        }
    }
    if rem.iter().any(|c| !c.is_zero()) {
        return None;
    }
    while quot.last().map_or(false, |c| c.is_zero()) {
        quot.pop();
    }
    Some(quot)
}

/// Division with remainder by a monic divisor.
pub(crate) fn div_rem_monic(p: &[ACoeff], d: &[ACoeff]) -> (Vec<ACoeff>, Vec<ACoeff>) {
    assert!(!d.is_empty() && d.last().unwrap().is_one());
    if p.len() < d.len() {
        return (Vec::new(), p.to_vec());
    }
    let nv = d.last().unwrap().nvars();
    let mut rem: Vec<ACoeff> = p.to_vec();
    let mut quot = vec![ACoeff::zero(nv); p.len() - d.len() + 1];
    for i in (0..quot.len()).rev() {
        let lead = rem[i + d.len() - 1].clone();
        if lead.is_zero() {
            continue;
        }
        quot[i] = lead.clone();
        for (j, dc) in d.iter().enumerate() {
            rem[i + j] = rem[i + j].sub(&lead.mul(dc).unwrap()).unwrap();
        }
    }
    while quot.last().map_or(false, |c| c.is_zero()) {
        quot.pop();
    }
    while rem.last().map_or(false, |c| c.is_zero()) {
        rem.pop();
    }
    (quot, rem)
}

fn scale_by_missing(
    num: &[ACoeff],
    points: &PointSet,
    own: &BTreeMap<usize, u32>,
    target: &BTreeMap<usize, u32>,
) -> Result<Vec<ACoeff>> {
    let mut out = num.to_vec();
    for (l, m) in target {
        let have = own.get(l).cloned().unwrap_or(0);
        for _ in have..*m {
            out = poly_mul(&out, &linear(points.coeff_vars, &points.point(*l)))?;
        }
    }
    Ok(out)
}

/// Coefficient of total extra decay `kk` in `prod_i (1 - a_i/z)^{-d_i}`:
/// a sum of `binom(d_i + k_i - 1, k_i) a_i^{k_i}` over compositions of `kk`.
fn expansion_coeff(points: &PointSet, labels: &[(usize, u32)], kk: u32) -> ACoeff {
    fn rec(
        points: &PointSet,
        labels: &[(usize, u32)],
        kk: u32,
        idx: usize,
        acc: ACoeff,
        out: &mut ACoeff,
    ) {
        if idx == labels.len() {
            if kk == 0 {
                *out = out.add(&acc).unwrap();
            }
            return;
        }
        let (label, d) = labels[idx];
        let range = if idx == labels.len() - 1 { kk..=kk } else { 0..=kk };
        for k in range {
            let mut binom = Q::one();
            for j in 0..k {
                binom *= Q::new(BigInt::from(d + j), BigInt::from(j + 1));
            }
            let mut term = ACoeff::from_rat(points.coeff_vars, binom);
            for _ in 0..k {
                term = term.mul(&points.point(label)).unwrap();
            }
            rec(points, labels, kk - k, idx + 1, acc.mul(&term).unwrap(), out);
        }
    }
    let mut out = ACoeff::zero(points.coeff_vars);
    rec(points, labels, kk, 0, ACoeff::one(points.coeff_vars), &mut out);
    out
}

/// `phi = prod_{i active} (z - a_i)`.
pub fn phi(points: &PointSet) -> DiskFun {
    let mut acc = DiskFun::one(points);
    for label in points.active() {
        acc = acc.mul(&DiskFun::z_minus_point(points, *label)).unwrap();
    }
    acc
}

/// `phi^k` for any integer `k`.
pub fn phi_pow(points: &PointSet, k: i64) -> DiskFun {
    if k >= 0 {
        phi(points).pow(k as u32).unwrap()
    } else {
        let den: BTreeMap<usize, u32> = points
            .active()
            .iter()
            .map(|l| (*l, (-k) as u32))
            .collect();
        DiskFun::from_parts(points, vec![ACoeff::one(points.coeff_vars)], den)
    }
}

/// The basis polynomial `e_i`: the `(i-1)`-th elementary symmetric polynomial
/// in the terms `(z - a_j)`, `j` active. `e_1 = 1`, ..., `e_{n+1} = phi`.
pub fn elementary(points: &PointSet, i: usize) -> DiskFun {
    let n = points.n();
    assert!(i >= 1 && i <= n + 1);
    let r = i - 1;
    let mut acc = DiskFun::zero(points);
    let active = points.active().to_vec();
    // sum over r-subsets of the active labels
    let mut subset: Vec<usize> = (0..r).collect();
    if r == 0 {
        return DiskFun::one(points);
    }
    loop {
        let mut term = DiskFun::one(points);
        for &s in &subset {
            term = term
                .mul(&DiskFun::z_minus_point(points, active[s]))
                .unwrap();
        }
        acc = acc.add(&term).unwrap();
        // next subset
        let mut idx = r;
        loop {
            if idx == 0 {
                return acc;
            }
            idx -= 1;
            if subset[idx] != idx + n - r {
                subset[idx] += 1;
                for j in idx + 1..r {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

type BasisCacheKey = (usize, Vec<usize>, usize, i64);

fn basis_cache() -> &'static Mutex<BTreeMap<(bool, BasisCacheKey), DiskFun>> {
    static CACHE: OnceLock<Mutex<BTreeMap<(bool, BasisCacheKey), DiskFun>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// `e_{i,k} = e_i * phi^k`.
pub fn basis_elem(points: &PointSet, idx: BasisIndex) -> DiskFun {
    assert!(idx.i >= 1 && idx.i <= points.n());
    let key = (
        false,
        (points.coeff_vars, points.active.clone(), idx.i, idx.k),
    );
    if let Some(hit) = basis_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let out = elementary(points, idx.i)
        .mul(&phi_pow(points, idx.k))
        .unwrap();
    basis_cache().lock().unwrap().insert(key, out.clone());
    out
}

/// The pairing matrix `S` with `S_{ij} = residue(e_i e_j / phi)`.
pub fn pairing_matrix(points: &PointSet) -> Vec<Vec<ACoeff>> {
    let n = points.n();
    let phi_inv = phi_pow(points, -1);
    let mut s = vec![vec![ACoeff::zero(points.coeff_vars); n]; n];
    for i in 1..=n {
        for j in i..=n {
            let v = elementary(points, i)
                .mul(&elementary(points, j))
                .unwrap()
                .mul(&phi_inv)
                .unwrap()
                .residue();
            s[i - 1][j - 1] = v.clone();
            s[j - 1][i - 1] = v;
        }
    }
    s
}

/// Inverse of the pairing matrix over the polynomial layer.
///
/// The determinant of `S` is a nonzero rational by its anti-triangular shape,
/// so the inverse has polynomial entries; computed via the adjugate.
fn invert_pairing_matrix(s: &[Vec<ACoeff>]) -> Result<Vec<Vec<ACoeff>>> {
    let n = s.len();
    let nv = s[0][0].nvars();
    let det = det_acoeff(s, nv);
    let det_rat = det
        .as_rational()
        .filter(|r| !r.is_zero())
        .ok_or(Error::SingularMatrix)?;
    let inv_det = Q::one() / det_rat;
    let mut out = vec![vec![ACoeff::zero(nv); n]; n];
    for i in 0..n {
        for j in 0..n {
            // adjugate: cofactor C_{ji}
            let minor = minor_matrix(s, j, i);
            let mut c = det_acoeff(&minor, nv);
            if (i + j) % 2 == 1 {
                c = c.neg();
            }
            out[i][j] = c.mul_rat(&inv_det);
        }
    }
    Ok(out)
}

fn minor_matrix(s: &[Vec<ACoeff>], row: usize, col: usize) -> Vec<Vec<ACoeff>> {
    let n = s.len();
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == row {
            continue;
        }
        let mut r = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j == col {
                continue;
            }
            r.push(s[i][j].clone());
        }
        out.push(r);
    }
    out
}

fn det_acoeff(s: &[Vec<ACoeff>], nv: usize) -> ACoeff {
    let n = s.len();
    if n == 0 {
        return ACoeff::one(nv);
    }
    if n == 1 {
        return s[0][0].clone();
    }
    let mut acc = ACoeff::zero(nv);
    for j in 0..n {
        if s[0][j].is_zero() {
            continue;
        }
        let minor = minor_matrix(s, 0, j);
        let mut t = s[0][j].mul(&det_acoeff(&minor, nv)).unwrap();
        if j % 2 == 1 {
            t = t.neg();
        }
        acc = acc.add(&t).unwrap();
    }
    acc
}

/// Memoized lambda matrix per point set: `eps_{i,k} = sum_j lambda_{ij} e_{j,k}`.
fn lambda_matrix(points: &PointSet) -> Result<Vec<Vec<ACoeff>>> {
    static CACHE: OnceLock<Mutex<BTreeMap<PointSetKey, Vec<Vec<ACoeff>>>>> = OnceLock::new();
    type PointSetKey = (usize, Vec<usize>);
    let key = (points.coeff_vars, points.active.clone());
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(m) = guard.get(&key) {
            return Ok(m.clone());
        }
    }
    let s = pairing_matrix(points);
    let lambda = invert_pairing_matrix(&s)?;
    let mut guard = cache.lock().unwrap();
    Ok(guard.entry(key).or_insert(lambda).clone())
}

/// The residue-dual basis element `eps_{i,k}` with
/// `residue(eps_{j,k} * e_{i,l}) = delta_{k,-l-1} delta_{i,j}`.
pub fn dual_basis_elem(points: &PointSet, idx: BasisIndex) -> Result<DiskFun> {
    assert!(idx.i >= 1 && idx.i <= points.n());
    let key = (
        true,
        (points.coeff_vars, points.active.clone(), idx.i, idx.k),
    );
    if let Some(hit) = basis_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let lambda = lambda_matrix(points)?;
    let mut acc = DiskFun::zero(points);
    for j in 1..=points.n() {
        let lij = &lambda[idx.i - 1][j - 1];
        if lij.is_zero() {
            continue;
        }
        acc = acc.add(
            &basis_elem(points, BasisIndex::new(j, idx.k)).mul_coeff(lij)?,
        )?;
    }
    basis_cache().lock().unwrap().insert(key, acc.clone());
    Ok(acc)
}

/// Windowed basis expansion: coefficients `c_{i,k} = residue(f * eps_{i,-k-1})`
/// for `kmin <= k <= kmax`. Errors if the valuation of `f` lies below `kmin`.
pub fn to_basis(
    f: &DiskFun,
    kmin: i64,
    kmax: i64,
) -> Result<BTreeMap<BasisIndex, ACoeff>> {
    let val = f.valuation();
    if val < kmin {
        return Err(Error::ValuationBelowWindow {
            actual: val,
            requested: kmin,
        });
    }
    let points = f.points();
    let mut out = BTreeMap::new();
    for k in kmin..=kmax {
        for i in 1..=points.n() {
            let eps = dual_basis_elem(points, BasisIndex::new(i, -k - 1))?;
            let c = f.mul(&eps)?.residue();
            if !c.is_zero() {
                out.insert(BasisIndex::new(i, k), c);
            }
        }
    }
    Ok(out)
}

/// Exact finite basis expansion of any element of `K_I^pol`.
///
/// Clearing the poles with a power of `phi` leaves a polynomial, and a
/// polynomial expands by levels: its class modulo `phi` converts to the
/// `e_i` (triangular in the z-degree with constant leading coefficients),
/// the matched part is subtracted and the quotient by `phi` recursed.
pub fn to_basis_exact(f: &DiskFun) -> Result<BTreeMap<BasisIndex, ACoeff>> {
    if f.is_zero() {
        return Ok(BTreeMap::new());
    }
    let points = f.points();
    let n = points.n();
    let nv = points.coeff_vars();
    let shift = f.denominator().values().cloned().max().unwrap_or(0) as i64;
    let cleared = f.mul(&phi_pow(points, shift))?;
    debug_assert!(cleared.is_regular());
    let phi_num: Vec<ACoeff> = phi(points).numerator().to_vec();
    let e_polys: Vec<Vec<ACoeff>> = (1..=n)
        .map(|i| elementary(points, i).numerator().to_vec())
        .collect();
    let mut out = BTreeMap::new();
    let mut level = -shift;
    let mut rest: Vec<ACoeff> = cleared.numerator().to_vec();
    while !rest.is_empty() {
        let (quot, rem) = div_rem_monic(&rest, &phi_num);
        // rem has z-degree < n; peel e_n, e_{n-1}, ..., e_1
        let mut rem = rem;
        for i in (1..=n).rev() {
            let deg = i - 1;
            if rem.len() <= deg {
                continue;
            }
            let lead = rem[deg].clone();
            if lead.is_zero() {
                continue;
            }
            // e_i is monic of degree i-1 up to the constant binomial factor
            let top = e_polys[i - 1][deg]
                .as_rational()
                .expect("elementary basis has constant lead");
            let c = lead.mul_rat(&(Q::one() / top));
            let scaled: Vec<ACoeff> = e_polys[i - 1].iter().map(|x| x.mul(&c).unwrap()).collect();
            rem = poly_sub(&rem, &scaled)?;
            out.insert(BasisIndex::new(i, level), c);
        }
        debug_assert!(rem.iter().all(|c| c.is_zero()));
        rest = quot;
        level += 1;
        let _ = nv;
    }
    Ok(out)
}

/// Reassembles a basis expansion into a disk function.
pub fn from_basis(points: &PointSet, coeffs: &BTreeMap<BasisIndex, ACoeff>) -> Result<DiskFun> {
    let mut acc = DiskFun::zero(points);
    for (idx, c) in coeffs {
        acc = acc.add(&basis_elem(points, *idx).mul_coeff(c)?)?;
    }
    Ok(acc)
}

impl fmt::Display for DiskFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let zs = match i {
                0 => String::new(),
                1 => "z".into(),
                _ => format!("z^{}", i),
            };
            if zs.is_empty() {
                parts.push(format!("({})", c));
            } else if c.is_one() {
                parts.push(zs);
            } else {
                parts.push(format!("({})*{}", c, zs));
            }
        }
        let num = parts.join(" + ");
        if self.den.is_empty() {
            write!(f, "{}", num)
        } else {
            let den: Vec<String> = self
                .den
                .iter()
                .map(|(l, m)| {
                    if *m == 1 {
                        format!("(z-a{})", l + 1)
                    } else {
                        format!("(z-a{})^{}", l + 1, m)
                    }
                })
                .collect();
            write!(f, "[{}] / {}", num, den.join(""))
        }
    }
}

/// JSON form per the external interface:
/// `{"num": [[coeff, zdeg], ...], "den": {"1": mult, ...}}`.
#[derive(Serialize, Deserialize)]
struct DiskFunDto {
    points: PointSet,
    num: Vec<(ACoeff, usize)>,
    den: BTreeMap<String, u32>,
}

impl Serialize for DiskFun {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = DiskFunDto {
            points: self.points.clone(),
            num: self
                .num
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (c.clone(), i))
                .collect(),
            den: self
                .den
                .iter()
                .map(|(l, m)| ((l + 1).to_string(), *m))
                .collect(),
        };
        dto.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiskFun {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = DiskFunDto::deserialize(d)?;
        let nv = dto.points.coeff_vars;
        let deg = dto.num.iter().map(|(_, i)| *i).max().map_or(0, |m| m + 1);
        let mut num = vec![ACoeff::zero(nv); deg];
        for (c, i) in dto.num {
            num[i] = num[i].add(&c).map_err(serde::de::Error::custom)?;
        }
        let mut den = BTreeMap::new();
        for (l, m) in dto.den {
            let label: usize = l
                .parse::<usize>()
                .map_err(|e| serde::de::Error::custom(format!("bad point label {l}: {e}")))?;
            if label == 0 {
                return Err(serde::de::Error::custom("point labels are 1-based"));
            }
            den.insert(label - 1, m);
        }
        Ok(DiskFun::from_parts(&dto.points, num, den))
    }
}

pub fn rational_points(points: &PointSet) -> Vec<ACoeff> {
    points
        .active()
        .iter()
        .map(|l| points.point(*l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::qr;

    fn pts(n: usize) -> PointSet {
        PointSet::standard(n)
    }

    fn inv_pole(points: &PointSet, label: usize, m: u32) -> DiskFun {
        let mut den = BTreeMap::new();
        den.insert(label, m);
        DiskFun::from_parts(points, vec![ACoeff::one(points.coeff_vars())], den)
    }

    #[test]
    fn derivative_of_simple_pole() {
        let p = pts(1);
        let f = inv_pole(&p, 0, 1);
        let df = f.deriv();
        assert_eq!(df, inv_pole(&p, 0, 2).neg());
    }

    #[test]
    fn pole_cancellation() {
        let p = pts(1);
        let f = DiskFun::z_minus_point(&p, 0).mul(&inv_pole(&p, 0, 1)).unwrap();
        assert_eq!(f, DiskFun::one(&p));
    }

    #[test]
    fn derivative_of_square() {
        let p = pts(1);
        let z = DiskFun::z(&p);
        assert_eq!(z.mul(&z).unwrap().deriv(), z.mul_rat(&q(2)));
    }

    #[test]
    fn residue_of_simple_pole_is_one() {
        for n in 1..=3 {
            let p = pts(n);
            let f = inv_pole(&p, 0, 1);
            assert_eq!(f.residue(), ACoeff::one(n));
        }
    }

    #[test]
    fn residue_vanishes_on_regular_functions() {
        let p = pts(2);
        let z = DiskFun::z(&p);
        assert!(z.pow(3).unwrap().residue().is_zero());
        assert!(DiskFun::one(&p).residue().is_zero());
    }

    #[test]
    fn residue_of_derivative_vanishes() {
        let p = pts(1);
        let f = inv_pole(&p, 0, 1);
        assert!(f.deriv().residue().is_zero());
        // and for a messier function on two points
        let p2 = pts(2);
        let g = inv_pole(&p2, 0, 2)
            .mul(&inv_pole(&p2, 1, 1))
            .unwrap()
            .mul(&DiskFun::z(&p2).pow(2).unwrap())
            .unwrap();
        assert!(g.deriv().residue().is_zero());
    }

    #[test]
    fn residue_partial_fraction_example() {
        // 1/((z-a1)(z-a2)) has residues 1/(a1-a2) and 1/(a2-a1); their sum is 0
        let p = pts(2);
        let f = inv_pole(&p, 0, 1).mul(&inv_pole(&p, 1, 1)).unwrap();
        assert!(f.residue().is_zero());
        // z/((z-a1)(z-a2)) has residue sum 1
        let g = f.mul(&DiskFun::z(&p)).unwrap();
        assert_eq!(g.residue(), ACoeff::one(2));
    }

    #[test]
    fn pairing_matrix_n2_oracle() {
        // direct residue computation of the four entries, frozen:
        // S = [[0, 2], [2, 0]]
        let p = pts(2);
        let s = pairing_matrix(&p);
        assert!(s[0][0].is_zero());
        assert_eq!(s[0][1], ACoeff::from_int(2, 2));
        assert_eq!(s[1][0], ACoeff::from_int(2, 2));
        assert!(s[1][1].is_zero());
        // hence eps_{1,k} = e_{2,k}/2 and eps_{2,k} = e_{1,k}/2
        let eps = dual_basis_elem(&p, BasisIndex::new(1, 0)).unwrap();
        let expect = basis_elem(&p, BasisIndex::new(2, 0)).mul_rat(&qr(1, 2));
        assert_eq!(eps, expect);
    }

    #[test]
    fn n1_dual_basis_is_z_powers_at_origin() {
        // n = 1: eps_{1,k} = e_{1,k} = (z - a1)^k; with a1 = 0 that is z^k
        let p = pts(1);
        for k in -3..=3 {
            let eps = dual_basis_elem(&p, BasisIndex::new(1, k)).unwrap();
            assert_eq!(eps, phi_pow(&p, k));
        }
    }

    #[test]
    fn biorthogonality_small() {
        for n in 1..=3usize {
            let p = pts(n);
            for i in 1..=n {
                for j in 1..=n {
                    for k in -2..=2i64 {
                        for l in -2..=2i64 {
                            let eps = dual_basis_elem(&p, BasisIndex::new(j, k)).unwrap();
                            let e = basis_elem(&p, BasisIndex::new(i, l));
                            let r = eps.mul(&e).unwrap().residue();
                            let expect = if k == -l - 1 && i == j {
                                ACoeff::one(n)
                            } else {
                                ACoeff::zero(n)
                            };
                            assert_eq!(r, expect, "n={} i={} j={} k={} l={}", n, i, j, k, l);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_anti_triangular() {
        for n in 1..=3usize {
            let p = pts(n);
            let s = pairing_matrix(&p);
            for i in 1..=n {
                for j in 1..=n {
                    if i + j <= n {
                        assert!(s[i - 1][j - 1].is_zero());
                    } else if i + j == n + 1 {
                        let r = s[i - 1][j - 1].as_rational().expect("constant");
                        assert!(!r.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn to_basis_expansions() {
        let p = pts(2);
        // f = 1: c_{1,0} = 1 only
        let c = to_basis(&DiskFun::one(&p), -2, 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&BasisIndex::new(1, 0)], ACoeff::one(2));
        // f = phi^2: c_{1,2} = 1
        let c = to_basis(&phi_pow(&p, 2), -2, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&BasisIndex::new(1, 2)], ACoeff::one(2));
    }

    #[test]
    fn to_basis_reconstruction_mod_phi() {
        // f = 1/(z - a1) on the 2-pointed disk: expansion through k = 2,
        // reconstruction must agree with f modulo phi^3
        let p = pts(2);
        let f = inv_pole(&p, 0, 1);
        let c = to_basis(&f, -1, 2).unwrap();
        let rec = from_basis(&p, &c).unwrap();
        let diff = f.sub(&rec).unwrap();
        assert!(diff.valuation() >= 3, "valuation {}", diff.valuation());
    }

    #[test]
    fn exact_expansion_reconstructs() {
        // every K^pol element has a finite exact expansion, including
        // unequal pole orders
        let p = pts(2);
        let cases = vec![
            inv_pole(&p, 0, 1),
            inv_pole(&p, 0, 2).mul(&inv_pole(&p, 1, 1)).unwrap(),
            DiskFun::z(&p).pow(4).unwrap(),
            phi_pow(&p, -2)
                .mul(&DiskFun::z(&p).pow(3).unwrap())
                .unwrap()
                .mul_coeff(&ACoeff::diff(2, 0, 1))
                .unwrap(),
        ];
        for f in cases {
            let c = to_basis_exact(&f).unwrap();
            assert_eq!(from_basis(&p, &c).unwrap(), f, "f = {}", f);
            // agrees with the residue pairing on a covering window
            let kmin = c.keys().map(|b| b.k).min().unwrap();
            let kmax = c.keys().map(|b| b.k).max().unwrap();
            let paired = to_basis(&f, kmin, kmax).unwrap();
            assert_eq!(c, paired, "f = {}", f);
        }
    }

    #[test]
    fn to_basis_window_error() {
        let p = pts(2);
        let f = phi_pow(&p, -2);
        let err = to_basis(&f, -1, 2).unwrap_err();
        assert_eq!(
            err,
            Error::ValuationBelowWindow {
                actual: -2,
                requested: -1
            }
        );
    }

    #[test]
    fn compose_polynomial() {
        let p = pts(1);
        let z = DiskFun::z(&p);
        let zp1 = z.add(&DiskFun::one(&p)).unwrap();
        // z^2 composed with z + 1 -> (z + 1)^2
        assert_eq!(z.pow(2).unwrap().compose(&zp1).unwrap(), zp1.pow(2).unwrap());
    }

    #[test]
    fn compose_chain_rule() {
        // f = z^3, psi = 2z + a1: (f o psi)' = f'(psi) * psi'
        let p = pts(1);
        let f = DiskFun::z(&p).pow(3).unwrap();
        let psi = DiskFun::z(&p)
            .mul_rat(&q(2))
            .add(&DiskFun::constant(&p, p.point(0)))
            .unwrap();
        let lhs = f.compose(&psi).unwrap().deriv();
        let rhs = f.deriv().compose(&psi).unwrap().mul(&psi.deriv()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn compose_shifts_denominators() {
        // 1/(z - a1) composed with z + (a1 - a2) -> 1/(z - a2)
        let p = pts(2);
        let f = inv_pole(&p, 0, 1);
        let shift = DiskFun::z(&p)
            .add(&DiskFun::constant(&p, ACoeff::diff(2, 0, 1)))
            .unwrap();
        assert_eq!(f.compose(&shift).unwrap(), inv_pole(&p, 1, 1));
    }

    #[test]
    fn compose_rejects_unfactorable_denominator() {
        let p = pts(2);
        let f = inv_pole(&p, 1, 1);
        let shift = DiskFun::z(&p)
            .add(&DiskFun::constant(&p, ACoeff::diff(2, 0, 1)))
            .unwrap();
        // psi - a2 = z + a1 - 2a2 does not factor over the points
        assert!(f.compose(&shift).is_err());
    }

    #[test]
    fn valuation_examples() {
        let p = pts(2);
        assert_eq!(phi_pow(&p, 2).valuation(), 2);
        assert_eq!(phi_pow(&p, -1).valuation(), -1);
        assert_eq!(DiskFun::one(&p).valuation(), 0);
        assert_eq!(inv_pole(&p, 0, 3).valuation(), -3);
    }

    #[test]
    fn json_round_trip() {
        let p = pts(2);
        let f = inv_pole(&p, 0, 2)
            .mul(&DiskFun::z(&p))
            .unwrap()
            .mul_coeff(&ACoeff::diff(2, 0, 1))
            .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: DiskFun = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
