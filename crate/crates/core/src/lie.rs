//! Finite simple Lie algebra data: structure constants, invariant forms, the
//! principal triple and the transversal space `V^can`.
//!
//! Tables for `sl2` and `sl3` are derived from their defining matrix
//! representations and re-validated at load time: Jacobi, invariance of the
//! normalized form, the Killing form as an ad-trace, the triple relations and
//! the `V^can` grading are all recomputed from the structure constants.
//!
//! Levels are expressed as rational multiples of the normalized form `k0`
//! (longest root of squared length 2), so the critical level is `-h_vee` and
//! the Killing form is `2 h_vee`.

use std::fmt;

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{q, Q};
use crate::error::{Error, Result};

/// Element of the Lie algebra as coordinates over the chosen basis.
pub type GVec = Vec<Q>;

/// Square matrix over the rationals.
pub type QMatrix = Vec<Vec<Q>>;

/// Invariant form selector, as a rational multiple of the normalized form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level(pub Q);

impl Level {
    pub fn multiple(k: i64) -> Self {
        Level(q(k))
    }

    pub fn critical(g: &LieData) -> Self {
        Level(-q(g.dual_coxeter))
    }

    pub fn killing(g: &LieData) -> Self {
        Level(q(2 * g.dual_coxeter))
    }

    pub fn is_critical(&self, g: &LieData) -> bool {
        self.0 == -q(g.dual_coxeter)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*k0", self.0)
    }
}

/// Structure data of a finite simple Lie algebra with principal grading.
#[derive(Clone, Debug)]
pub struct LieData {
    name: String,
    dim: usize,
    rank: usize,
    basis_names: Vec<String>,
    /// Defining representation matrix of each basis element.
    matrix_rep: Vec<QMatrix>,
    /// `structure[a][b]` = coordinates of `[x_a, x_b]`.
    structure: Vec<Vec<GVec>>,
    /// Normalized invariant form.
    form0: QMatrix,
    killing: QMatrix,
    dual_coxeter: i64,
    /// Principal degree of each (homogeneous) basis element.
    degrees: Vec<i64>,
    /// Basis indices of the simple negative root vectors `f_i`.
    f_simple: Vec<usize>,
    /// Basis indices of the simple positive root vectors `e_i`.
    e_simple: Vec<usize>,
    p_minus1: GVec,
    two_rho_vee: GVec,
    p1: GVec,
    /// Homogeneous basis of the centralizer of `p1`, ordered by degree.
    vcan: Vec<GVec>,
    vcan_degrees: Vec<u32>,
}

impl LieData {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis_name(&self, a: usize) -> &str {
        &self.basis_names[a]
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.basis_names.iter().position(|n| n == name)
    }

    pub fn basis_vec(&self, a: usize) -> GVec {
        let mut v = vec![Q::zero(); self.dim];
        v[a] = Q::one();
        v
    }

    pub fn dual_coxeter(&self) -> i64 {
        self.dual_coxeter
    }

    pub fn degree(&self, a: usize) -> i64 {
        self.degrees[a]
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_rep[0].len()
    }

    pub fn simple_root_count(&self) -> usize {
        self.f_simple.len()
    }

    pub fn f_simple(&self) -> &[usize] {
        &self.f_simple
    }

    pub fn e_simple(&self) -> &[usize] {
        &self.e_simple
    }

    pub fn p_minus1(&self) -> &GVec {
        &self.p_minus1
    }

    pub fn two_rho_vee(&self) -> &GVec {
        &self.two_rho_vee
    }

    pub fn p1(&self) -> &GVec {
        &self.p1
    }

    pub fn vcan(&self) -> &[GVec] {
        &self.vcan
    }

    pub fn vcan_degrees(&self) -> &[u32] {
        &self.vcan_degrees
    }

    /// Bracket of two coordinate vectors.
    pub fn bracket(&self, x: &GVec, y: &GVec) -> GVec {
        let mut out = vec![Q::zero(); self.dim];
        for (a, ca) in x.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in y.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let s = ca.clone() * cb;
                for (c, cc) in self.structure[a][b].iter().enumerate() {
                    if !cc.is_zero() {
                        out[c] += s.clone() * cc;
                    }
                }
            }
        }
        out
    }

    /// Normalized form `k0(x, y)`.
    pub fn form0(&self, x: &GVec, y: &GVec) -> Q {
        bilinear(&self.form0, x, y)
    }

    /// Form selected by a level: `level.0 * k0(x, y)`.
    pub fn form(&self, level: &Level, x: &GVec, y: &GVec) -> Q {
        self.form0(x, y) * level.0.clone()
    }

    pub fn killing(&self, x: &GVec, y: &GVec) -> Q {
        bilinear(&self.killing, x, y)
    }

    /// Pairs `(x_a, x^a)` of the basis with its k0-dual basis.
    pub fn dual_pairs(&self) -> Vec<(GVec, GVec)> {
        let inv = invert_qmatrix(&self.form0).expect("form0 invertible");
        (0..self.dim)
            .map(|a| {
                let mut dual = vec![Q::zero(); self.dim];
                for b in 0..self.dim {
                    dual[b] = inv[a][b].clone();
                }
                (self.basis_vec(a), dual)
            })
            .collect()
    }

    /// Matrix of a coordinate vector in the defining representation.
    pub fn matrix_of(&self, x: &GVec) -> QMatrix {
        let d = self.matrix_dim();
        let mut m = vec![vec![Q::zero(); d]; d];
        for (a, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    m[i][j] += c.clone() * &self.matrix_rep[a][i][j];
                }
            }
        }
        m
    }

    /// Coordinates of a trace-free matrix in the defining representation.
    pub fn coords_of_matrix(&self, m: &QMatrix) -> Option<GVec> {
        let d = self.matrix_dim();
        let mut cols: Vec<Vec<Q>> = Vec::new();
        for a in 0..self.dim {
            cols.push(flatten(&self.matrix_rep[a]));
        }
        let rhs = flatten(m);
        solve_columns(&cols, &rhs, d * d)
    }

    /// Matrix of `ad x` acting on coordinates.
    pub fn ad(&self, x: &GVec) -> QMatrix {
        let mut m = vec![vec![Q::zero(); self.dim]; self.dim];
        for b in 0..self.dim {
            let col = self.bracket(x, &self.basis_vec(b));
            for (c, v) in col.into_iter().enumerate() {
                m[c][b] = v;
            }
        }
        m
    }

    /// Indices of the basis elements with the given principal degree.
    pub fn degree_indices(&self, d: i64) -> Vec<usize> {
        (0..self.dim).filter(|a| self.degrees[*a] == d).collect()
    }

    pub fn max_degree(&self) -> i64 {
        self.degrees.iter().cloned().max().unwrap()
    }

    /// Solves `[p_{-1}, u] = w` for `u` homogeneous of degree `deg(w) + 1`.
    /// Exists uniquely for `w` in the image; `None` otherwise.
    pub fn solve_ad_pminus1(&self, w: &GVec, w_degree: i64) -> Option<GVec> {
        let dom = self.degree_indices(w_degree + 1);
        if dom.is_empty() {
            return None;
        }
        let mut cols: Vec<Vec<Q>> = Vec::new();
        for &a in &dom {
            // [p_{-1}, x_a] = -[x_a, p_{-1}]
            let mut col = self.bracket(&self.p_minus1, &self.basis_vec(a));
            col.truncate(self.dim);
            cols.push(col);
        }
        let sol = solve_columns(&cols, w, self.dim)?;
        let mut u = vec![Q::zero(); self.dim];
        for (idx, &a) in dom.iter().enumerate() {
            u[a] = sol[idx].clone();
        }
        Some(u)
    }

    /// `sl2`: basis `e, h, f` in the defining 2x2 representation.
    pub fn sl2() -> Self {
        let e = mat(&[&[0, 1], &[0, 0]]);
        let h = mat(&[&[1, 0], &[0, -1]]);
        let f = mat(&[&[0, 0], &[1, 0]]);
        Self::from_matrices(
            "sl2",
            vec!["e".into(), "h".into(), "f".into()],
            vec![e, h, f],
            vec![1, 0, -1],
            vec![2],
            vec![0],
        )
        .expect("sl2 table is consistent")
    }

    /// `sl3`: Chevalley basis `e1, e2, e12, h1, h2, f1, f2, f12` in the
    /// defining 3x3 representation, `e12 = [e1, e2]`.
    pub fn sl3() -> Self {
        let e1 = unit3(0, 1);
        let e2 = unit3(1, 2);
        // [e1, e2] = E13
        let e12 = unit3(0, 2);
        let h1 = mat(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, 0]]);
        let h2 = mat(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        let f1 = unit3(1, 0);
        let f2 = unit3(2, 1);
        let f12 = unit3(2, 0);
        Self::from_matrices(
            "sl3",
            vec![
                "e1".into(),
                "e2".into(),
                "e12".into(),
                "h1".into(),
                "h2".into(),
                "f1".into(),
                "f2".into(),
                "f12".into(),
            ],
            vec![e1, e2, e12, h1, h2, f1, f2, f12],
            vec![1, 1, 2, 0, 0, -1, -1, -2],
            vec![5, 6],
            vec![0, 1],
        )
        .expect("sl3 table is consistent")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sl2" => Ok(Self::sl2()),
            "sl3" => Ok(Self::sl3()),
            other => Err(Error::Invalid(format!("unknown Lie type {other}"))),
        }
    }

    /// For the shipped types the Langlands dual is handled by a name-level
    /// swap table; `sl2` and `sl3` are self-dual at the Lie-algebra level.
    pub fn langlands_dual_name(name: &str) -> Result<&'static str> {
        match name {
            "sl2" => Ok("sl2"),
            "sl3" => Ok("sl3"),
            other => Err(Error::Invalid(format!("unknown Lie type {other}"))),
        }
    }

    /// Builds the full table from matrices of a defining representation,
    /// principal degrees and the indices of the simple `f_i` / `e_i`.
    fn from_matrices(
        name: &str,
        basis_names: Vec<String>,
        matrices: Vec<QMatrix>,
        degrees: Vec<i64>,
        f_simple: Vec<usize>,
        e_simple: Vec<usize>,
    ) -> Result<Self> {
        let dim = matrices.len();
        let mdim = matrices[0].len();
        // structure constants from matrix commutators
        let cols: Vec<Vec<Q>> = matrices.iter().map(|m| flatten(m)).collect();
        let mut structure = vec![vec![vec![Q::zero(); dim]; dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let comm = mat_sub(
                    &mat_mul(&matrices[a], &matrices[b]),
                    &mat_mul(&matrices[b], &matrices[a]),
                );
                let coords = solve_columns(&cols, &flatten(&comm), mdim * mdim)
                    .ok_or_else(|| Error::Invalid("commutator outside spanned space".into()))?;
                structure[a][b] = coords;
            }
        }
        // normalized form: trace form of the defining representation
        // (equals the form with longest root of squared length 2 for sl_n)
        let mut form0 = vec![vec![Q::zero(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                form0[a][b] = trace(&mat_mul(&matrices[a], &matrices[b]));
            }
        }
        let mut partial = LieData {
            name: name.into(),
            dim,
            rank: 0,
            basis_names,
            matrix_rep: matrices,
            structure,
            form0,
            killing: vec![vec![Q::zero(); dim]; dim],
            dual_coxeter: 0,
            degrees,
            f_simple,
            e_simple,
            p_minus1: vec![Q::zero(); dim],
            two_rho_vee: vec![Q::zero(); dim],
            p1: vec![Q::zero(); dim],
            vcan: Vec::new(),
            vcan_degrees: Vec::new(),
        };
        // Killing form from ad traces
        for a in 0..dim {
            let ada = partial.ad(&partial.basis_vec(a));
            for b in 0..dim {
                let adb = partial.ad(&partial.basis_vec(b));
                partial.killing[a][b] = trace(&mat_mul(&ada, &adb));
            }
        }
        // dual Coxeter number from killing = 2 h_vee * form0
        let mut h_vee = Q::zero();
        'outer: for a in 0..dim {
            for b in 0..dim {
                if !partial.form0[a][b].is_zero() {
                    h_vee = partial.killing[a][b].clone()
                        / (partial.form0[a][b].clone() * q(2));
                    break 'outer;
                }
            }
        }
        if !h_vee.is_integer() {
            return Err(Error::Invalid("dual Coxeter number is not integral".into()));
        }
        partial.dual_coxeter = ratio_to_i64(&h_vee);
        partial.rank = partial.f_simple.len();
        // principal triple
        let mut p_minus1 = vec![Q::zero(); dim];
        for &fi in &partial.f_simple {
            p_minus1[fi] = Q::one();
        }
        partial.p_minus1 = p_minus1;
        // 2 rho_vee in the Cartan: [2 rho_vee, x_a] = 2 deg(a) x_a
        let cartan = partial.degree_indices(0);
        let mut cols2: Vec<Vec<Q>> = Vec::new();
        for &hidx in &cartan {
            // stacked action on all basis elements
            let mut col = Vec::with_capacity(dim * dim);
            for b in 0..dim {
                col.extend(partial.bracket(&partial.basis_vec(hidx), &partial.basis_vec(b)));
            }
            cols2.push(col);
        }
        let mut rhs2 = Vec::with_capacity(dim * dim);
        for b in 0..dim {
            let mut v = vec![Q::zero(); dim];
            v[b] = q(2 * partial.degrees[b]);
            rhs2.extend(v);
        }
        let sol = solve_columns(&cols2, &rhs2, dim * dim)
            .ok_or_else(|| Error::Invalid("no grading element".into()))?;
        let mut two_rho = vec![Q::zero(); dim];
        for (idx, &hidx) in cartan.iter().enumerate() {
            two_rho[hidx] = sol[idx].clone();
        }
        partial.two_rho_vee = two_rho;
        // p1 in degree 1 with [p1, p_{-1}] = 2 rho_vee
        let deg1 = partial.degree_indices(1);
        let mut cols3: Vec<Vec<Q>> = Vec::new();
        for &a in &deg1 {
            cols3.push(partial.bracket(&partial.basis_vec(a), &partial.p_minus1));
        }
        let sol = solve_columns(&cols3, &partial.two_rho_vee.clone(), dim)
            .ok_or_else(|| Error::Invalid("no sl2 triple completion".into()))?;
        let mut p1 = vec![Q::zero(); dim];
        for (idx, &a) in deg1.iter().enumerate() {
            p1[a] = sol[idx].clone();
        }
        partial.p1 = p1;
        // V^can: graded kernel of ad(p1)
        for d in 1..=partial.max_degree() {
            let dom = partial.degree_indices(d);
            if dom.is_empty() {
                continue;
            }
            let mut cols4: Vec<Vec<Q>> = Vec::new();
            for &a in &dom {
                cols4.push(partial.bracket(&partial.p1, &partial.basis_vec(a)));
            }
            for kv in kernel_of_columns(&cols4, dim) {
                let mut v = vec![Q::zero(); dim];
                for (idx, &a) in dom.iter().enumerate() {
                    v[a] = kv[idx].clone();
                }
                partial.vcan.push(v);
                partial.vcan_degrees.push(d as u32);
            }
        }
        partial.validate()?;
        Ok(partial)
    }

    /// Re-derives every structural invariant from the tables.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim;
        let fail = |msg: &str| Err(Error::Invalid(format!("{}: {}", self.name, msg)));
        // antisymmetry and Jacobi on basis triples
        for a in 0..dim {
            for b in 0..dim {
                let ab = self.bracket(&self.basis_vec(a), &self.basis_vec(b));
                let ba = self.bracket(&self.basis_vec(b), &self.basis_vec(a));
                if !vec_is_neg(&ab, &ba) {
                    return fail("bracket not antisymmetric");
                }
                for c in 0..dim {
                    let xc = self.basis_vec(c);
                    let j1 = self.bracket(&ab, &xc);
                    let bc = self.bracket(&self.basis_vec(b), &xc);
                    let j2 = self.bracket(&self.basis_vec(a), &bc);
                    let ac = self.bracket(&self.basis_vec(a), &xc);
                    let j3 = self.bracket(&ac, &self.basis_vec(b));
                    // [[a,b],c] = [a,[b,c]] - [b,[a,c]] = [a,[b,c]] + [[a,c],b]
                    for i in 0..dim {
                        if j1[i] != j2[i].clone() + &j3[i] {
                            return fail("Jacobi identity fails");
                        }
                    }
                }
            }
        }
        // invariance of form0
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let xb = self.basis_vec(b);
                    let xc = self.basis_vec(c);
                    let ab = self.bracket(&self.basis_vec(a), &xb);
                    let ac = self.bracket(&self.basis_vec(a), &xc);
                    if self.form0(&ab, &xc) + self.form0(&xb, &ac) != Q::zero() {
                        return fail("form0 not invariant");
                    }
                }
            }
        }
        // Killing from ad traces matches the stored matrix, and the ratio
        // killing = 2 h_vee form0 holds
        for a in 0..dim {
            let ada = self.ad(&self.basis_vec(a));
            for b in 0..dim {
                let adb = self.ad(&self.basis_vec(b));
                let t = trace(&mat_mul(&ada, &adb));
                if t != self.killing[a][b] {
                    return fail("Killing form mismatch");
                }
                if t != self.form0[a][b].clone() * q(2 * self.dual_coxeter) {
                    return fail("killing != 2 h_vee * form0");
                }
            }
        }
        // triple relations
        let braket = self.bracket(&self.p1, &self.p_minus1);
        if braket != self.two_rho_vee {
            return fail("[p1, p_{-1}] != 2 rho_vee");
        }
        let scaled = |v: &GVec, s: i64| -> GVec { v.iter().map(|c| c.clone() * q(s)).collect() };
        if self.bracket(&self.two_rho_vee, &self.p1) != scaled(&self.p1, 2) {
            return fail("[2 rho_vee, p1] != 2 p1");
        }
        if self.bracket(&self.two_rho_vee, &self.p_minus1) != scaled(&self.p_minus1, -2) {
            return fail("[2 rho_vee, p_{-1}] != -2 p_{-1}");
        }
        // V^can relations
        if self.vcan.len() != self.rank {
            return fail("V^can dimension != rank");
        }
        for (v, d) in self.vcan.iter().zip(&self.vcan_degrees) {
            if self.bracket(&self.p1, v).iter().any(|c| !c.is_zero()) {
                return fail("[p1, v_i] != 0");
            }
            if self.bracket(&self.two_rho_vee, v) != scaled(v, 2 * *d as i64) {
                return fail("[2 rho_vee, v_i] != 2 d_i v_i");
            }
        }
        // ad(p_{-1}) injective on the positive part
        for d in 1..=self.max_degree() {
            let dom = self.degree_indices(d);
            let mut cols: Vec<Vec<Q>> = Vec::new();
            for &a in &dom {
                cols.push(self.bracket(&self.p_minus1, &self.basis_vec(a)));
            }
            if !kernel_of_columns(&cols, dim).is_empty() {
                return fail("ad(p_{-1}) not injective on positive degrees");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LieDataDto::from(self)).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: LieDataDto =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("bad JSON: {e}")))?;
        let lie = dto.build()?;
        lie.validate()?;
        Ok(lie)
    }
}

fn ratio_to_i64(r: &Q) -> i64 {
    let t: BigInt = r.to_integer();
    let s: i64 = t.try_into().expect("small integer");
    s
}

fn mat(rows: &[&[i64]]) -> QMatrix {
    rows.iter()
        .map(|r| r.iter().map(|v| q(*v)).collect())
        .collect()
}

fn unit3(i: usize, j: usize) -> QMatrix {
    let mut m = vec![vec![Q::zero(); 3]; 3];
    m[i][j] = Q::one();
    m
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Q::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] += a[i][l].clone() * &b[l][j];
                }
            }
        }
    }
    out
}

pub fn mat_sub(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.clone() - y).collect())
        .collect()
}

pub fn trace(a: &QMatrix) -> Q {
    (0..a.len()).map(|i| a[i][i].clone()).sum()
}

fn flatten(m: &QMatrix) -> Vec<Q> {
    m.iter().flat_map(|r| r.iter().cloned()).collect()
}

fn bilinear(form: &QMatrix, x: &GVec, y: &GVec) -> Q {
    let mut acc = Q::zero();
    for (a, ca) in x.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (b, cb) in y.iter().enumerate() {
            if !cb.is_zero() && !form[a][b].is_zero() {
                acc += ca.clone() * cb * &form[a][b];
            }
        }
    }
    acc
}

/// Solves `sum_j x_j cols[j] = rhs` exactly; `None` if inconsistent.
pub fn solve_columns(cols: &[Vec<Q>], rhs: &[Q], rows: usize) -> Option<Vec<Q>> {
    let ncols = cols.len();
    let mut aug: Vec<Vec<Q>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Q> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..ncols {
        let pivot = (prow..rows).find(|r| !aug[*r][col].is_zero());
        let Some(pr) = pivot else { continue };
        aug.swap(prow, pr);
        let lead = aug[prow][col].clone();
        for v in aug[prow].iter_mut() {
            *v = v.clone() / lead.clone();
        }
        for r in 0..rows {
            if r != prow && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                let prow_copy = aug[prow].clone();
                for (v, p) in aug[r].iter_mut().zip(prow_copy.iter()) {
                    *v = v.clone() - factor.clone() * p;
                }
            }
        }
        pivots.push((prow, col));
        prow += 1;
    }
    // consistency
    for r in prow..rows {
        if !aug[r][ncols].is_zero() {
            return None;
        }
    }
    let mut sol = vec![Q::zero(); ncols];
    for (r, c) in pivots {
        sol[c] = aug[r][ncols].clone();
    }
    Some(sol)
}

/// Kernel basis of the linear map sending coordinates to `sum x_j cols[j]`.
pub fn kernel_of_columns(cols: &[Vec<Q>], rows: usize) -> Vec<Vec<Q>> {
    let ncols = cols.len();
    if ncols == 0 {
        return Vec::new();
    }
    let mut m: Vec<Vec<Q>> = (0..rows)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut pivot_of_col = vec![usize::MAX; ncols];
    let mut prow = 0;
    for col in 0..ncols {
        let pivot = (prow..rows).find(|r| !m[*r][col].is_zero());
        let Some(pr) = pivot else { continue };
        m.swap(prow, pr);
        let lead = m[prow][col].clone();
        for v in m[prow].iter_mut() {
            *v = v.clone() / lead.clone();
        }
        for r in 0..rows {
            if r != prow && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let prow_copy = m[prow].clone();
                for (v, p) in m[r].iter_mut().zip(prow_copy.iter()) {
                    *v = v.clone() - factor.clone() * p;
                }
            }
        }
        pivot_of_col[col] = prow;
        prow += 1;
    }
    let mut kernel = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free] != usize::MAX {
            continue;
        }
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::one();
        for col in 0..ncols {
            let pr = pivot_of_col[col];
            if pr != usize::MAX {
                v[col] = -m[pr][free].clone();
            }
        }
        kernel.push(v);
    }
    kernel
}

pub fn invert_qmatrix(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let mut aug: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row = m[i].clone();
            for j in 0..n {
                row.push(if i == j { Q::one() } else { Q::zero() });
            }
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|r| !aug[*r][col].is_zero())?;
        aug.swap(col, pivot);
        let lead = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = v.clone() / lead.clone();
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                let src = aug[col].clone();
                for (v, p) in aug[r].iter_mut().zip(src.iter()) {
                    *v = v.clone() - factor.clone() * p;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn vec_is_neg(a: &GVec, b: &GVec) -> bool {
    a.iter().zip(b).all(|(x, y)| x.clone() + y == Q::zero())
}

/// JSON table format for loading external Lie data.
#[derive(Serialize, Deserialize)]
struct LieDataDto {
    name: String,
    basis: Vec<String>,
    /// matrices as rows of rational strings
    matrix_rep: Vec<Vec<Vec<String>>>,
    degrees: Vec<i64>,
    f_simple: Vec<usize>,
    e_simple: Vec<usize>,
}

impl From<&LieData> for LieDataDto {
    fn from(g: &LieData) -> Self {
        LieDataDto {
            name: g.name.clone(),
            basis: g.basis_names.clone(),
            matrix_rep: g
                .matrix_rep
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|r| r.iter().map(|v| v.to_string()).collect())
                        .collect()
                })
                .collect(),
            degrees: g.degrees.clone(),
            f_simple: g.f_simple.clone(),
            e_simple: g.e_simple.clone(),
        }
    }
}

impl LieDataDto {
    fn build(self) -> Result<LieData> {
        let matrices: Vec<QMatrix> = self
            .matrix_rep
            .iter()
            .map(|m| {
                m.iter()
                    .map(|r| {
                        r.iter()
                            .map(|v| {
                                v.parse::<Q>()
                                    .map_err(|e| Error::Invalid(format!("bad rational: {e}")))
                            })
                            .collect::<Result<Vec<Q>>>()
                    })
                    .collect::<Result<QMatrix>>()
            })
            .collect::<Result<Vec<QMatrix>>>()?;
        LieData::from_matrices(
            &self.name,
            self.basis,
            matrices,
            self.degrees,
            self.f_simple,
            self.e_simple,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::qr;

    #[test]
    fn sl2_chevalley_relations() {
        let g = LieData::sl2();
        let e = g.basis_vec(0);
        let h = g.basis_vec(1);
        let f = g.basis_vec(2);
        assert_eq!(g.bracket(&e, &f), h);
        let two_e: GVec = e.iter().map(|c| c.clone() * q(2)).collect();
        assert_eq!(g.bracket(&h, &e), two_e);
    }

    #[test]
    fn sl2_forms_oracle() {
        // oracle: traces in the defining representation and ad-traces
        let g = LieData::sl2();
        let e = g.basis_vec(0);
        let h = g.basis_vec(1);
        let f = g.basis_vec(2);
        assert_eq!(g.form0(&e, &f), q(1));
        assert_eq!(g.form0(&h, &h), q(2));
        assert_eq!(g.dual_coxeter(), 2);
        // killing = 4 * form0
        assert_eq!(g.killing(&h, &h), q(8));
        // critical level is -2 * k0
        let kc = Level::critical(&g);
        assert_eq!(g.form(&kc, &e, &f), q(-2));
    }

    #[test]
    fn sl2_vcan() {
        let g = LieData::sl2();
        assert_eq!(g.vcan().len(), 1);
        assert_eq!(g.vcan_degrees(), &[1]);
        // spanned by e
        assert!(!g.vcan()[0][0].is_zero());
        assert!(g.vcan()[0][1].is_zero());
        assert!(g.vcan()[0][2].is_zero());
    }

    #[test]
    fn sl3_vcan_degrees() {
        // oracle: kernel of ad(p1) via linear algebra has degrees (1, 2)
        let g = LieData::sl3();
        assert_eq!(g.dual_coxeter(), 3);
        assert_eq!(g.vcan_degrees(), &[1, 2]);
    }

    #[test]
    fn dual_pairs_casimirlike() {
        let g = LieData::sl2();
        // sum_a k0(x_a, dual_a) = dim
        let mut total = Q::zero();
        for (x, y) in g.dual_pairs() {
            total += g.form0(&x, &y);
        }
        assert_eq!(total, q(3));
        // dual of e is f, dual of h is h/2
        let pairs = g.dual_pairs();
        assert_eq!(pairs[0].1, vec![Q::zero(), Q::zero(), q(1)]);
        assert_eq!(pairs[1].1, vec![Q::zero(), qr(1, 2), Q::zero()]);
    }

    #[test]
    fn json_round_trip_revalidates() {
        let g = LieData::sl3();
        let text = g.to_json();
        let g2 = LieData::from_json(&text).unwrap();
        assert_eq!(g2.dual_coxeter(), 3);
        assert_eq!(g2.vcan_degrees(), g.vcan_degrees());
    }

    #[test]
    fn solve_ad_pminus1_roundtrip() {
        let g = LieData::sl3();
        // [p_{-1}, -] : g_1 -> g_0 hits the image; check a round trip
        let w = g.bracket(g.p_minus1(), &g.basis_vec(0)); // degree 0 element
        let u = g.solve_ad_pminus1(&w, 0).unwrap();
        assert_eq!(g.bracket(g.p_minus1(), &u), w);
    }
}
