//! Exact arithmetic for the point-parameter rings.
//!
//! An [`ACoeff`] is an element of one of three layers built over the rational
//! numbers and the point symbols `a_1, ..., a_n`:
//!
//! * `Poly` — the polynomial ring `Q[a_1, ..., a_n]`;
//! * `Localized` — the localization of the polynomial ring at the pairwise
//!   differences `a_i - a_j`;
//! * `Truncated(D)` — the polynomial ring truncated past total degree `D`,
//!   a stand-in for power series computations.
//!
//! Values are immutable and canonical: no stored term has a zero coefficient,
//! localized denominators are fully reduced against the numerator, and
//! truncated values carry no terms above their degree bound.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

/// Multi-degree in the point symbols; entry `d[i]` is the exponent of `a_{i+1}`.
pub type MultiDeg = Vec<u32>;

/// Arithmetic layer of an [`ACoeff`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Poly,
    Localized,
    /// Truncation by total degree in the `a_i`.
    Truncated(u32),
}

/// Exact coefficient: a polynomial in the points, a localized fraction with
/// pairwise-difference denominators, or a degree-truncated polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ACoeff {
    nvars: usize,
    mode: Mode,
    /// Numerator terms, multi-degree -> coefficient. Canonical: no zeros.
    terms: BTreeMap<MultiDeg, Q>,
    /// Denominator factors `(i, j)` with `i < j`, meaning `(a_i - a_j)^mult`.
    /// Empty unless `mode == Localized`.
    den: BTreeMap<(usize, usize), u32>,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

impl ACoeff {
    pub fn zero(nvars: usize) -> Self {
        ACoeff {
            nvars,
            mode: Mode::Poly,
            terms: BTreeMap::new(),
            den: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::from_rat(nvars, Q::one())
    }

    pub fn from_rat(nvars: usize, r: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(vec![0; nvars], r);
        }
        ACoeff {
            nvars,
            mode: Mode::Poly,
            terms,
            den: BTreeMap::new(),
        }
    }

    pub fn from_int(nvars: usize, n: i64) -> Self {
        Self::from_rat(nvars, q(n))
    }

    /// The point symbol `a_{i+1}` (0-based index).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut deg = vec![0; nvars];
        deg[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(deg, Q::one());
        ACoeff {
            nvars,
            mode: Mode::Poly,
            terms,
            den: BTreeMap::new(),
        }
    }

    /// The difference `a_i - a_j` (0-based).
    pub fn diff(nvars: usize, i: usize, j: usize) -> Self {
        Self::var(nvars, i).sub(&Self::var(nvars, j)).unwrap()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty()
            && self.terms.len() == 1
            && self
                .terms
                .get(&vec![0; self.nvars])
                .map_or(false, |c| c.is_one())
    }

    /// Constant rational value, if the coefficient is a constant with a trivial
    /// denominator.
    pub fn as_rational(&self) -> Option<Q> {
        if !self.den.is_empty() {
            return None;
        }
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.terms.len() == 1 {
            let (deg, c) = self.terms.iter().next().unwrap();
            if deg.iter().all(|&e| e == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|d| d.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn denominator_factors(&self) -> &BTreeMap<(usize, usize), u32> {
        &self.den
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    /// Joint mode of a binary operation, applying the promotion rules.
    fn join_mode(&self, other: &Self) -> Result<Mode> {
        match (self.mode, other.mode) {
            (Mode::Poly, m) | (m, Mode::Poly) => Ok(m),
            (Mode::Localized, Mode::Localized) => Ok(Mode::Localized),
            (Mode::Truncated(d1), Mode::Truncated(d2)) => Ok(Mode::Truncated(d1.min(d2))),
            (Mode::Localized, Mode::Truncated(_)) | (Mode::Truncated(_), Mode::Localized) => {
                Err(Error::ModeClash)
            }
        }
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        if let Mode::Truncated(d) = self.mode {
            self.terms.retain(|deg, _| deg.iter().sum::<u32>() <= d);
        }
        if self.mode == Mode::Localized {
            self.reduce_fraction();
            if self.den.is_empty() {
                // keep the mode, but a fully reduced fraction with no factors
                // behaves like a polynomial under further reduction
            }
        }
        if self.terms.is_empty() {
            self.den.clear();
        }
        self
    }

    /// Cancels denominator factors dividing the numerator.
    fn reduce_fraction(&mut self) {
        let factors: Vec<(usize, usize)> = self.den.keys().cloned().collect();
        for f in factors {
            loop {
                let mult = *self.den.get(&f).unwrap_or(&0);
                if mult == 0 {
                    break;
                }
                match div_terms_by_diff(&self.terms, self.nvars, f.0, f.1) {
                    Some(qt) => {
                        self.terms = qt;
                        if mult == 1 {
                            self.den.remove(&f);
                        } else {
                            self.den.insert(f, mult - 1);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mode = self.join_mode(other)?;
        if mode == Mode::Localized {
            // common denominator: max multiplicity per factor
            let mut den = self.den.clone();
            for (f, m) in &other.den {
                let e = den.entry(*f).or_insert(0);
                *e = (*e).max(*m);
            }
            let left = scale_terms_by_factors(&self.terms, self.nvars, &self.den, &den);
            let right = scale_terms_by_factors(&other.terms, self.nvars, &other.den, &den);
            let terms = add_terms(&left, &right);
            return Ok(ACoeff {
                nvars: self.nvars,
                mode,
                terms,
                den,
            }
            .normalized());
        }
        let terms = add_terms(&self.terms, &other.terms);
        Ok(ACoeff {
            nvars: self.nvars,
            mode,
            terms,
            den: BTreeMap::new(),
        }
        .normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mode = self.join_mode(other)?;
        let mut den = self.den.clone();
        for (f, m) in &other.den {
            *den.entry(*f).or_insert(0) += *m;
        }
        let terms = mul_terms(&self.terms, &other.terms);
        Ok(ACoeff {
            nvars: self.nvars,
            mode,
            terms,
            den,
        }
        .normalized())
    }

    pub fn mul_rat(&self, r: &Q) -> Self {
        let mut out = self.clone();
        if r.is_zero() {
            return ACoeff {
                nvars: self.nvars,
                mode: self.mode,
                terms: BTreeMap::new(),
                den: BTreeMap::new(),
            };
        }
        for c in out.terms.values_mut() {
            *c = c.clone() * r;
        }
        out
    }

    /// Exact multiplicative inverse.
    ///
    /// * constants invert to constants;
    /// * in `Localized` mode any monomial in pairwise differences inverts;
    /// * in `Truncated` mode any value with invertible constant term inverts
    ///   via the geometric series, exactly modulo the truncation degree.
    pub fn invert(&self) -> Result<Self> {
        match self.mode {
            Mode::Truncated(d) => {
                let c0 = self
                    .terms
                    .get(&vec![0; self.nvars])
                    .cloned()
                    .unwrap_or_else(Q::zero);
                if c0.is_zero() {
                    return Err(Error::NonUnit(format!(
                        "constant term of truncated value is 0 in {}",
                        self
                    )));
                }
                // x = c0 (1 - u) with u of positive degree; 1/x = (1/c0) sum u^k
                let inv_c0 = Q::one() / c0.clone();
                let u = Self::from_rat(self.nvars, c0)
                    .sub(self)?
                    .truncate(d)
                    .mul_rat(&inv_c0);
                let mut acc = Self::one(self.nvars).truncate(d);
                let mut pow = Self::one(self.nvars).truncate(d);
                for _ in 0..d {
                    pow = pow.mul(&u)?;
                    if pow.is_zero() {
                        break;
                    }
                    acc = acc.add(&pow)?;
                }
                Ok(acc.mul_rat(&inv_c0))
            }
            Mode::Poly | Mode::Localized => {
                let (c, factors) = factor_differences(&self.terms, self.nvars).ok_or_else(|| {
                    Error::NonUnit(format!(
                        "numerator {} is not a monomial in pairwise differences",
                        self
                    ))
                })?;
                // inverse: old denominator joins the numerator, old numerator
                // factors join the denominator
                let mut num = Self::from_rat(self.nvars, Q::one() / c);
                for (f, m) in &self.den {
                    for _ in 0..*m {
                        num = num.mul(&Self::diff(self.nvars, f.0, f.1))?;
                    }
                }
                let out = ACoeff {
                    nvars: self.nvars,
                    mode: if factors.is_empty() && self.mode == Mode::Poly {
                        Mode::Poly
                    } else {
                        Mode::Localized
                    },
                    terms: num.terms,
                    den: factors,
                }
                .normalized();
                Ok(out)
            }
        }
    }

    /// Reinterprets the value in the truncated layer at total degree `d`.
    pub fn truncate(&self, d: u32) -> Self {
        assert!(
            self.den.is_empty(),
            "cannot truncate a localized coefficient"
        );
        let mut out = self.clone();
        out.mode = Mode::Truncated(d);
        out.normalized()
    }

    /// Forgets a truncation marker, reading the terms as a plain polynomial.
    pub fn untruncate(&self) -> Self {
        assert!(self.den.is_empty());
        let mut out = self.clone();
        out.mode = Mode::Poly;
        out
    }

    /// Marks a polynomial value as localized (no-op on already-localized values).
    pub fn localized(&self) -> Self {
        let mut out = self.clone();
        assert!(!matches!(out.mode, Mode::Truncated(_)));
        out.mode = Mode::Localized;
        out
    }

    /// Substitutes point symbols along `map` (old index -> new index) into a
    /// ring with `new_nvars` symbols. Localized denominators whose two points
    /// merge make the substitution undefined.
    pub fn subst_points(&self, map: &[usize], new_nvars: usize) -> Result<Self> {
        assert_eq!(map.len(), self.nvars);
        let mut terms: BTreeMap<MultiDeg, Q> = BTreeMap::new();
        for (deg, c) in &self.terms {
            let mut nd = vec![0u32; new_nvars];
            for (i, e) in deg.iter().enumerate() {
                nd[map[i]] += e;
            }
            let entry = terms.entry(nd).or_insert_with(Q::zero);
            *entry = entry.clone() + c;
        }
        let mut den = BTreeMap::new();
        for ((i, j), m) in &self.den {
            let (ni, nj) = (map[*i], map[*j]);
            if ni == nj {
                return Err(Error::CollapsedDenominator(*i + 1, *j + 1));
            }
            let key = (ni.min(nj), ni.max(nj));
            *den.entry(key).or_insert(0) += *m;
            if ni > nj && *m % 2 == 1 {
                // (a_i - a_j) = -(a_j - a_i): record the sign flip
                for c in terms.values_mut() {
                    *c = -c.clone();
                }
            }
        }
        Ok(ACoeff {
            nvars: new_nvars,
            mode: self.mode,
            terms,
            den,
        }
        .normalized())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiDeg, &Q)> {
        self.terms.iter()
    }
}

fn add_terms(a: &BTreeMap<MultiDeg, Q>, b: &BTreeMap<MultiDeg, Q>) -> BTreeMap<MultiDeg, Q> {
    let mut out = a.clone();
    for (deg, c) in b {
        let entry = out.entry(deg.clone()).or_insert_with(Q::zero);
        *entry = entry.clone() + c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn mul_terms(a: &BTreeMap<MultiDeg, Q>, b: &BTreeMap<MultiDeg, Q>) -> BTreeMap<MultiDeg, Q> {
    let mut out: BTreeMap<MultiDeg, Q> = BTreeMap::new();
    for (da, ca) in a {
        for (db, cb) in b {
            let deg: MultiDeg = da.iter().zip(db.iter()).map(|(x, y)| x + y).collect();
            let entry = out.entry(deg).or_insert_with(Q::zero);
            *entry = entry.clone() + ca.clone() * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Multiplies `terms` by the factors present in `target` but not in `own`.
fn scale_terms_by_factors(
    terms: &BTreeMap<MultiDeg, Q>,
    nvars: usize,
    own: &BTreeMap<(usize, usize), u32>,
    target: &BTreeMap<(usize, usize), u32>,
) -> BTreeMap<MultiDeg, Q> {
    let mut out = terms.clone();
    for (f, m) in target {
        let have = own.get(f).cloned().unwrap_or(0);
        for _ in have..*m {
            let diff = diff_terms(nvars, f.0, f.1);
            out = mul_terms(&out, &diff);
        }
    }
    out
}

fn diff_terms(nvars: usize, i: usize, j: usize) -> BTreeMap<MultiDeg, Q> {
    let mut t = BTreeMap::new();
    let mut di = vec![0u32; nvars];
    di[i] = 1;
    let mut dj = vec![0u32; nvars];
    dj[j] = 1;
    t.insert(di, Q::one());
    t.insert(dj, -Q::one());
    t
}

/// Exact division of `terms` by `(a_i - a_j)`, or `None` if not divisible.
fn div_terms_by_diff(
    terms: &BTreeMap<MultiDeg, Q>,
    nvars: usize,
    i: usize,
    j: usize,
) -> Option<BTreeMap<MultiDeg, Q>> {
    // remainder of division by (a_i - a_j) is the substitution a_i -> a_j
    let mut rem: BTreeMap<MultiDeg, Q> = BTreeMap::new();
    for (deg, c) in terms {
        let mut nd = deg.clone();
        nd[j] += nd[i];
        nd[i] = 0;
        let entry = rem.entry(nd).or_insert_with(Q::zero);
        *entry = entry.clone() + c;
    }
    rem.retain(|_, c| !c.is_zero());
    if !rem.is_empty() {
        return None;
    }
    // exact division: repeatedly strip the lead term in a_i
    let mut p = terms.clone();
    let mut quot: BTreeMap<MultiDeg, Q> = BTreeMap::new();
    while !p.is_empty() {
        let (deg, c) = p
            .iter()
            .max_by_key(|(d, _)| (d[i], (*d).clone()))
            .map(|(d, c)| (d.clone(), c.clone()))
            .unwrap();
        if deg[i] == 0 {
            // divisible polynomials always reduce to empty first
            return None;
        }
        let mut qdeg = deg.clone();
        qdeg[i] -= 1;
        let entry = quot.entry(qdeg.clone()).or_insert_with(Q::zero);
        *entry = entry.clone() + c.clone();
        // p -= c * qdeg * (a_i - a_j)
        let mut t = BTreeMap::new();
        t.insert(qdeg, c);
        let prod = mul_terms(&t, &diff_terms(nvars, i, j));
        for (d, cc) in prod {
            let entry = p.entry(d).or_insert_with(Q::zero);
            *entry = entry.clone() - cc;
        }
        p.retain(|_, c| !c.is_zero());
    }
    Some(quot)
}

/// Writes `terms` as `c * prod (a_i - a_j)^m` if possible.
fn factor_differences(
    terms: &BTreeMap<MultiDeg, Q>,
    nvars: usize,
) -> Option<(Q, BTreeMap<(usize, usize), u32>)> {
    if terms.is_empty() {
        return None;
    }
    let mut p = terms.clone();
    let mut factors: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    loop {
        if p.len() == 1 {
            let (deg, c) = p.iter().next().unwrap();
            if deg.iter().all(|&e| e == 0) {
                return Some((c.clone(), factors));
            }
        }
        let mut progressed = false;
        'pairs: for i in 0..nvars {
            for j in (i + 1)..nvars {
                if let Some(qt) = div_terms_by_diff(&p, nvars, i, j) {
                    p = qt;
                    *factors.entry((i, j)).or_insert(0) += 1;
                    progressed = true;
                    break 'pairs;
                }
            }
        }
        if !progressed {
            return None;
        }
    }
}

impl fmt::Display for ACoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        let mut num = String::new();
        for (deg, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    num.push('-');
                }
                first = false;
            } else {
                num.push_str(if neg { " - " } else { " + " });
            }
            let vars: Vec<String> = deg
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, e)| {
                    if *e == 1 {
                        format!("a{}", i + 1)
                    } else {
                        format!("a{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                num.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    num.push_str(&mag.to_string());
                    num.push('*');
                }
                num.push_str(&vars.join("*"));
            }
        }
        if self.den.is_empty() {
            write!(f, "{}", num)
        } else {
            let den: Vec<String> = self
                .den
                .iter()
                .map(|((i, j), m)| {
                    if *m == 1 {
                        format!("(a{}-a{})", i + 1, j + 1)
                    } else {
                        format!("(a{}-a{})^{}", i + 1, j + 1, m)
                    }
                })
                .collect();
            write!(f, "({}) / {}", num, den.join(""))
        }
    }
}

/// Serialization form: exact round-trip JSON.
#[derive(Serialize, Deserialize)]
struct ACoeffDto {
    mode: Mode,
    nvars: usize,
    /// `[["p/q", [d1, ..., dn]], ...]`
    terms: Vec<(String, MultiDeg)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    den: Vec<(usize, usize, u32)>,
}

impl Serialize for ACoeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = ACoeffDto {
            mode: self.mode,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(d, c)| (c.to_string(), d.clone()))
                .collect(),
            den: self.den.iter().map(|((i, j), m)| (*i, *j, *m)).collect(),
        };
        dto.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ACoeff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = ACoeffDto::deserialize(d)?;
        let mut terms = BTreeMap::new();
        for (s, deg) in dto.terms {
            if deg.len() != dto.nvars {
                return Err(serde::de::Error::custom("multi-degree length mismatch"));
            }
            let c: Q = s
                .parse()
                .map_err(|e| serde::de::Error::custom(format!("bad rational {s}: {e}")))?;
            terms.insert(deg, c);
        }
        let den = dto.den.into_iter().map(|(i, j, m)| ((i, j), m)).collect();
        Ok(ACoeff {
            nvars: dto.nvars,
            mode: dto.mode,
            terms,
            den,
        }
        .normalized())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(i: usize) -> ACoeff {
        ACoeff::var(2, i)
    }

    #[test]
    fn product_of_difference_and_sum() {
        // (a1 - a2)(a1 + a2) = a1^2 - a2^2
        let d = a(0).sub(&a(1)).unwrap();
        let s = a(0).add(&a(1)).unwrap();
        let p = d.mul(&s).unwrap();
        let expect = a(0)
            .mul(&a(0))
            .unwrap()
            .sub(&a(1).mul(&a(1)).unwrap())
            .unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn localized_antisymmetry() {
        // 1/(a1 - a2) + 1/(a2 - a1) = 0
        let x = ACoeff::diff(2, 0, 1).localized().invert().unwrap();
        let y = ACoeff::diff(2, 1, 0).localized().invert().unwrap();
        assert!(x.add(&y).unwrap().is_zero());
    }

    #[test]
    fn truncated_geometric_series() {
        // 1/(1 - a1) at D = 2 is 1 + a1 + a1^2
        let one = ACoeff::one(1);
        let x = one.sub(&ACoeff::var(1, 0)).unwrap().truncate(2);
        let inv = x.invert().unwrap();
        let expect = ACoeff::one(1)
            .add(&ACoeff::var(1, 0))
            .unwrap()
            .add(&ACoeff::var(1, 0).mul(&ACoeff::var(1, 0)).unwrap())
            .unwrap()
            .truncate(2);
        assert_eq!(inv, expect);
    }

    #[test]
    fn invert_constants_and_series() {
        let two = ACoeff::from_int(2, 2);
        assert_eq!(two.invert().unwrap(), ACoeff::from_rat(2, qr(1, 2)));

        // invert(2 + (a1 - a2)) at D = 1 -> 1/2 - (a1 - a2)/4
        let x = ACoeff::from_int(2, 2)
            .add(&ACoeff::diff(2, 0, 1))
            .unwrap()
            .truncate(1);
        let inv = x.invert().unwrap();
        let expect = ACoeff::from_rat(2, qr(1, 2))
            .sub(&ACoeff::diff(2, 0, 1).mul_rat(&qr(1, 4)))
            .unwrap()
            .truncate(1);
        assert_eq!(inv, expect);
        assert_eq!(x.mul(&inv).unwrap(), ACoeff::one(2).truncate(1));
    }

    #[test]
    fn invert_difference_localized() {
        let d = ACoeff::diff(2, 0, 1).localized();
        let inv = d.invert().unwrap();
        assert!(d.mul(&inv).unwrap().is_one());
        // the inverse of (a2 - a1) carries the sign in the numerator
        let dneg = ACoeff::diff(2, 1, 0).localized();
        let invneg = dneg.invert().unwrap();
        assert!(dneg.mul(&invneg).unwrap().is_one());
    }

    #[test]
    fn mode_clash_is_an_error() {
        let loc = ACoeff::diff(2, 0, 1).localized().invert().unwrap();
        let tr = ACoeff::var(2, 0).truncate(3);
        assert_eq!(loc.add(&tr), Err(Error::ModeClash));
        assert_eq!(loc.mul(&tr), Err(Error::ModeClash));
    }

    #[test]
    fn localized_fraction_reduction() {
        // (a1^2 - a2^2)/(a1 - a2) = a1 + a2
        let num = a(0)
            .mul(&a(0))
            .unwrap()
            .sub(&a(1).mul(&a(1)).unwrap())
            .unwrap()
            .localized();
        let inv = ACoeff::diff(2, 0, 1).localized().invert().unwrap();
        let r = num.mul(&inv).unwrap();
        assert_eq!(r, a(0).add(&a(1)).unwrap().localized());
    }

    #[test]
    fn json_round_trip() {
        let x = a(0)
            .mul(&a(1))
            .unwrap()
            .sub(&ACoeff::from_rat(2, qr(7, 3)))
            .unwrap()
            .localized()
            .mul(&ACoeff::diff(2, 0, 1).localized().invert().unwrap())
            .unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: ACoeff = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    fn arb_poly(nvars: usize) -> impl Strategy<Value = ACoeff> {
        proptest::collection::vec(
            (
                proptest::collection::vec(0u32..3, nvars),
                -20i64..20,
                1i64..5,
            ),
            0..5,
        )
        .prop_map(move |terms| {
            let mut acc = ACoeff::zero(nvars);
            for (deg, n, d) in terms {
                let mut t = ACoeff::from_rat(nvars, qr(n, d));
                for (i, e) in deg.iter().enumerate() {
                    for _ in 0..*e {
                        t = t.mul(&ACoeff::var(nvars, i)).unwrap();
                    }
                }
                acc = acc.add(&t).unwrap();
            }
            acc
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(x in arb_poly(2), y in arb_poly(2), z in arb_poly(2)) {
            let assoc_l = x.mul(&y).unwrap().mul(&z).unwrap();
            let assoc_r = x.mul(&y.mul(&z).unwrap()).unwrap();
            prop_assert_eq!(assoc_l, assoc_r);
            let dist_l = x.mul(&y.add(&z).unwrap()).unwrap();
            let dist_r = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
            prop_assert_eq!(dist_l, dist_r);
            prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        }

        #[test]
        fn truncated_inverse_is_two_sided(x in arb_poly(2), c in 1i64..6) {
            let u = x.truncate(3)
                .add(&ACoeff::from_int(2, c).truncate(3)).unwrap()
                .sub(&ACoeff::from_rat(2, x.terms.get(&vec![0,0]).cloned().unwrap_or_else(Q::zero)).truncate(3)).unwrap();
            // u now has constant term c != 0
            let inv = u.invert().unwrap();
            prop_assert_eq!(u.mul(&inv).unwrap(), ACoeff::one(2).truncate(3));
            prop_assert_eq!(inv.mul(&u).unwrap(), ACoeff::one(2).truncate(3));
        }
    }
}
