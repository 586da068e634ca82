//! Differential forms over `k = F_q(t_1..t_d)` in logarithmic coordinates.
//!
//! A degree-`r` form is `sum_I a_I dt_I/t_I` over `r`-element index sets `I`.
//! The k^p-structure uses the grid basis `{t^m dt_I/t_I}` with
//! `m in {0..p-1}^d`; grid coordinates are stored by their p-th roots in `k`
//! (Frobenius transport), which turns all k^p-linear algebra into plain linear
//! algebra over `k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{KElem, PBasisField};
use crate::fq::FqElem;
use crate::poly::Mon;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeRhamError {
    #[error("form is not closed")]
    NotClosed,
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("degree out of range: {0}")]
    DegreeOutOfRange(i64),
    #[error("symbol entry is zero")]
    ZeroEntry,
}

/// Index subset of `{0..d-1}` as a bitmask.
pub type IdxSet = u32;

pub fn idx_len(i: IdxSet) -> usize {
    i.count_ones() as usize
}

pub fn idx_members(i: IdxSet) -> Vec<usize> {
    (0..32).filter(|j| i & (1 << j) != 0).collect()
}

/// Sign of sorting the concatenation `I ++ J` (both ascending): `(-1)^inv`
/// with `inv = #{(i,j) in I x J : j < i}`. Overlap is the caller's concern.
fn merge_sign(i: IdxSet, j: IdxSet) -> i64 {
    let mut inv = 0u32;
    for a in idx_members(i) {
        inv += (j & ((1u32 << a) - 1)).count_ones();
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A differential form of fixed degree; zero coefficients are absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffForm {
    degree: usize,
    terms: BTreeMap<IdxSet, KElem>,
}

impl DiffForm {
    pub fn zero(degree: usize) -> DiffForm {
        DiffForm {
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// `coeff * dt_I/t_I`.
    pub fn monomial_form(k: &PBasisField, set: IdxSet, coeff: KElem) -> DiffForm {
        let degree = idx_len(set);
        assert!(
            idx_members(set).iter().all(|&j| j < k.d()),
            "index out of range"
        );
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(set, coeff);
        }
        DiffForm { degree, terms }
    }

    /// Degree-0 form from a scalar.
    pub fn scalar(coeff: KElem) -> DiffForm {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(0, coeff);
        }
        DiffForm { degree: 0, terms }
    }

    pub fn from_terms(degree: usize, entries: Vec<(IdxSet, KElem)>) -> DiffForm {
        let mut terms = BTreeMap::new();
        for (set, c) in entries {
            assert_eq!(idx_len(set), degree, "term degree mismatch");
            if !c.is_zero() {
                terms.insert(set, c);
            }
        }
        DiffForm { degree, terms }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IdxSet, &KElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, k: &PBasisField, set: IdxSet) -> KElem {
        self.terms.get(&set).cloned().unwrap_or_else(|| k.zero())
    }

    pub fn add(&self, k: &PBasisField, other: &DiffForm) -> DiffForm {
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut terms = self.terms.clone();
        for (set, c) in &other.terms {
            let cur = terms.remove(set).unwrap_or_else(|| k.zero());
            let s = k.add(&cur, c);
            if !s.is_zero() {
                terms.insert(*set, s);
            }
        }
        DiffForm {
            degree: self.degree,
            terms,
        }
    }

    pub fn neg(&self, k: &PBasisField) -> DiffForm {
        DiffForm {
            degree: self.degree,
            terms: self.terms.iter().map(|(s, c)| (*s, k.neg(c))).collect(),
        }
    }

    pub fn sub(&self, k: &PBasisField, other: &DiffForm) -> DiffForm {
        self.add(k, &other.neg(k))
    }

    pub fn scale(&self, k: &PBasisField, c: &KElem) -> DiffForm {
        if c.is_zero() {
            return DiffForm::zero(self.degree);
        }
        DiffForm {
            degree: self.degree,
            terms: self.terms.iter().map(|(s, x)| (*s, k.mul(x, c))).collect(),
        }
    }

    /// Coefficientwise `a -> a^p`; this is `C^{-1}` before reduction mod `B`.
    pub fn frobenius_coeffs(&self, k: &PBasisField) -> DiffForm {
        DiffForm {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(s, c)| (*s, k.frobenius(c)))
                .collect(),
        }
    }

    /// JSON record `{degree, terms: [{I: [1-based indices], coeff: text}]}`.
    pub fn to_json(&self, k: &PBasisField) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(set, c)| {
                serde_json::json!({
                    "I": idx_members(*set).iter().map(|j| j + 1).collect::<Vec<_>>(),
                    "coeff": k.format(c),
                })
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "terms": terms })
    }

    pub fn from_json(k: &PBasisField, v: &serde_json::Value) -> Result<DiffForm, String> {
        let degree = v["degree"].as_u64().ok_or("missing degree")? as usize;
        let mut entries = Vec::new();
        for t in v["terms"].as_array().ok_or("missing terms")? {
            let mut set: IdxSet = 0;
            for idx in t["I"].as_array().ok_or("missing I")? {
                let j = idx.as_u64().ok_or("bad index")? as usize;
                if j == 0 || j > k.d() {
                    return Err(format!("index {j} out of range"));
                }
                set |= 1 << (j - 1);
            }
            let coeff = k
                .parse(t["coeff"].as_str().ok_or("missing coeff")?)
                .map_err(|e| e.to_string())?;
            entries.push((set, coeff));
        }
        if entries.iter().any(|(s, _)| idx_len(*s) != degree) {
            return Err("term degree mismatch".into());
        }
        Ok(DiffForm::from_terms(degree, entries))
    }
}

/// Wedge product; `dt_I/t_I ^ dt_J/t_J = sign * dt_{IuJ}/t_{IuJ}`, 0 on overlap.
pub fn wedge(k: &PBasisField, a: &DiffForm, b: &DiffForm) -> DiffForm {
    let degree = a.degree + b.degree;
    let mut out = DiffForm::zero(degree);
    if degree > k.d() {
        return out;
    }
    for (si, ci) in &a.terms {
        for (sj, cj) in &b.terms {
            if si & sj != 0 {
                continue;
            }
            let sign = merge_sign(*si, *sj);
            let c = k.mul(ci, cj);
            let c = if sign < 0 { k.neg(&c) } else { c };
            out = out.add(k, &DiffForm::monomial_form(k, si | sj, c));
        }
    }
    out
}

/// Exterior derivative: `d(a dt_I/t_I) = sum_j (t_j da/dt_j) dt_j/t_j ^ dt_I/t_I`.
pub fn exterior_d(k: &PBasisField, a: &DiffForm) -> DiffForm {
    let mut out = DiffForm::zero(a.degree + 1);
    if a.degree + 1 > k.d() {
        return out;
    }
    for (set, c) in &a.terms {
        for j in 0..k.d() {
            if set & (1 << j) != 0 {
                continue;
            }
            let dc = k.tpartial(c, j);
            if dc.is_zero() {
                continue;
            }
            let sign = merge_sign(1 << j, *set);
            let coeff = if sign < 0 { k.neg(&dc) } else { dc };
            out = out.add(k, &DiffForm::monomial_form(k, set | (1 << j), coeff));
        }
    }
    out
}

/// `dlog {x_1..x_r} = dx_1/x_1 ^ ... ^ dx_r/x_r` in the logarithmic basis.
/// The empty symbol maps to the constant 1 in degree 0.
pub fn dlog(k: &PBasisField, entries: &[KElem]) -> Result<DiffForm, DeRhamError> {
    let mut acc = DiffForm::scalar(k.one());
    for x in entries {
        if x.is_zero() {
            return Err(DeRhamError::ZeroEntry);
        }
        let mut one_form = DiffForm::zero(1);
        let x_inv = k.inv(x).expect("nonzero");
        for j in 0..k.d() {
            let c = k.mul(&k.tpartial(x, j), &x_inv);
            one_form = one_form.add(k, &DiffForm::monomial_form(k, 1 << j, c));
        }
        acc = wedge(k, &acc, &one_form);
    }
    Ok(acc)
}

// --- the k^p grid ---

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Subsets of `{0..d-1}` of size `r`, ordered lexicographically by their
/// ascending index lists.
pub fn subsets(d: usize, r: usize) -> Vec<IdxSet> {
    fn rec(start: usize, d: usize, r: usize, cur: IdxSet, out: &mut Vec<IdxSet>) {
        if r == 0 {
            out.push(cur);
            return;
        }
        for j in start..d {
            if d - j < r {
                break;
            }
            rec(j + 1, d, r - 1, cur | (1 << j), out);
        }
    }
    let mut out = Vec::with_capacity(binomial(d, r));
    rec(0, d, r, 0, &mut out);
    out
}

/// The deterministic k^p-basis `{t^m dt_I/t_I}` of `Omega^r`, ordered
/// lexicographically in `(m, I)`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub degree: usize,
    pub classes: Vec<Mon>,
    pub sets: Vec<IdxSet>,
}

impl Grid {
    pub fn new(k: &PBasisField, degree: usize) -> Grid {
        Grid {
            degree,
            classes: k.monomial_classes(),
            sets: subsets(k.d(), degree),
        }
    }

    pub fn size(&self) -> usize {
        self.classes.len() * self.sets.len()
    }

    pub fn index(&self, mi: usize, si: usize) -> usize {
        mi * self.sets.len() + si
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.sets.len(), idx % self.sets.len())
    }

    pub fn basis_form(&self, k: &PBasisField, idx: usize) -> DiffForm {
        let (mi, si) = self.split(idx);
        DiffForm::monomial_form(k, self.sets[si], k.monomial(&self.classes[mi]))
    }

    pub fn label(&self, k: &PBasisField, idx: usize) -> String {
        let (mi, si) = self.split(idx);
        let m = &self.classes[mi];
        let set = self.sets[si];
        let mono = k.format(&k.monomial(m));
        if set == 0 {
            mono
        } else {
            let names: Vec<&str> = idx_members(set)
                .iter()
                .map(|&j| k.var_names()[j].as_str())
                .collect();
            if mono == "1" {
                format!("dlog({})", names.join(","))
            } else {
                format!("{mono}*dlog({})", names.join(","))
            }
        }
    }

    /// Grid coordinates of a form, stored by p-th roots.
    pub fn coords(&self, k: &PBasisField, form: &DiffForm) -> Vec<KElem> {
        assert_eq!(form.degree, self.degree, "grid/form degree mismatch");
        let mut v = vec![k.zero(); self.size()];
        for (set, c) in &form.terms {
            let si = self
                .sets
                .iter()
                .position(|s| s == set)
                .expect("index set in grid");
            let dec = k.p_monomial_decompose(c);
            for (m, root) in &dec.coeffs {
                let mi = self
                    .classes
                    .iter()
                    .position(|cm| cm == m)
                    .expect("class in grid");
                v[self.index(mi, si)] = root.clone();
            }
        }
        v
    }

    pub fn form_from_coords(&self, k: &PBasisField, v: &[KElem]) -> DiffForm {
        assert_eq!(v.len(), self.size());
        let mut acc = DiffForm::zero(self.degree);
        for (idx, root) in v.iter().enumerate() {
            if root.is_zero() {
                continue;
            }
            let (mi, si) = self.split(idx);
            let c = k.mul(&k.frobenius(root), &k.monomial(&self.classes[mi]));
            acc = acc.add(k, &DiffForm::monomial_form(k, self.sets[si], c));
        }
        acc
    }
}

// --- echelonized k^p-subspaces ---

/// A k^p-subspace of `Omega^r` in reduced row-echelon form over the grid.
#[derive(Debug, Clone)]
pub struct KpSubspace {
    pub degree: usize,
    pub grid: Grid,
    /// RREF rows: pivot columns strictly increasing, pivot entries 1,
    /// pivot columns eliminated from all other rows.
    pub basis: Vec<Vec<KElem>>,
    pub pivots: Vec<usize>,
}

impl KpSubspace {
    pub fn from_spanning(k: &PBasisField, grid: Grid, vectors: Vec<Vec<KElem>>) -> KpSubspace {
        let mut out = KpSubspace {
            degree: grid.degree,
            grid,
            basis: Vec::new(),
            pivots: Vec::new(),
        };
        for v in vectors {
            out.insert(k, v);
        }
        out
    }

    fn insert(&mut self, k: &PBasisField, v: Vec<KElem>) {
        let mut v = self.reduce(k, &v);
        let pivot = match v.iter().position(|c| !c.is_zero()) {
            None => return,
            Some(p) => p,
        };
        let inv = k.inv(&v[pivot]).expect("pivot nonzero");
        for c in v.iter_mut() {
            *c = k.mul(c, &inv);
        }
        for row in self.basis.iter_mut() {
            let c = row[pivot].clone();
            if !c.is_zero() {
                for (x, y) in row.iter_mut().zip(&v) {
                    *x = k.sub(x, &k.mul(&c, y));
                }
            }
        }
        let pos = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(pos, pivot);
        self.basis.insert(pos, v);
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical residual of `v` modulo this subspace.
    pub fn reduce(&self, k: &PBasisField, v: &[KElem]) -> Vec<KElem> {
        let mut v = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = v[p].clone();
            if !c.is_zero() {
                for (x, y) in v.iter_mut().zip(row) {
                    *x = k.sub(x, &k.mul(&c, y));
                }
            }
        }
        v
    }

    pub fn contains(&self, k: &PBasisField, v: &[KElem]) -> bool {
        self.reduce(k, v).iter().all(|c| c.is_zero())
    }

    pub fn contains_form(&self, k: &PBasisField, form: &DiffForm) -> bool {
        self.contains(k, &self.grid.coords(k, form))
    }

    pub fn reduce_form(&self, k: &PBasisField, form: &DiffForm) -> DiffForm {
        let v = self.reduce(k, &self.grid.coords(k, form));
        self.grid.form_from_coords(k, &v)
    }

    /// Grid indices without pivots: quotient representatives.
    pub fn complement_indices(&self) -> Vec<usize> {
        (0..self.grid.size())
            .filter(|i| !self.pivots.contains(i))
            .collect()
    }

    pub fn subset_of(&self, k: &PBasisField, other: &KpSubspace) -> bool {
        self.basis.iter().all(|v| other.contains(k, v))
    }
}

/// `B^r`: image of `d` on the degree-`r-1` grid, echelonized.
pub fn subspace_b(k: &PBasisField, r: usize) -> Result<KpSubspace, DeRhamError> {
    if r > k.d() + 1 {
        return Err(DeRhamError::DegreeOutOfRange(r as i64));
    }
    let grid = Grid::new(k, r);
    if r == 0 || r > k.d() {
        return Ok(KpSubspace::from_spanning(k, grid, Vec::new()));
    }
    let source = Grid::new(k, r - 1);
    let vectors: Vec<Vec<KElem>> = (0..source.size())
        .map(|i| grid.coords(k, &exterior_d(k, &source.basis_form(k, i))))
        .collect();
    Ok(KpSubspace::from_spanning(k, grid, vectors))
}

/// `Z^r`: kernel of `d` on the degree-`r` grid, echelonized.
pub fn subspace_z(k: &PBasisField, r: usize) -> Result<KpSubspace, DeRhamError> {
    if r > k.d() + 1 {
        return Err(DeRhamError::DegreeOutOfRange(r as i64));
    }
    let grid = Grid::new(k, r);
    if r > k.d() {
        return Ok(KpSubspace::from_spanning(k, grid, Vec::new()));
    }
    let target = Grid::new(k, r + 1);
    let cols: Vec<Vec<KElem>> = (0..grid.size())
        .map(|i| target.coords(k, &exterior_d(k, &grid.basis_form(k, i))))
        .collect();
    let kernel = kernel_basis(k, &cols, target.size());
    Ok(KpSubspace::from_spanning(k, grid, kernel))
}

/// Kernel of the linear map with the given columns: vectors `x` with
/// `sum_j x_j col_j = 0`, computed over `k` on the root coordinates.
pub fn kernel_basis(k: &PBasisField, cols: &[Vec<KElem>], rows: usize) -> Vec<Vec<KElem>> {
    let n = cols.len();
    let mut mat: Vec<Vec<KElem>> = (0..rows)
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut rank = 0usize;
    for col in 0..n {
        let sel = mat
            .iter()
            .enumerate()
            .skip(rank)
            .find(|(_, row)| !row[col].is_zero())
            .map(|(ri, _)| ri);
        let sel = match sel {
            None => continue,
            Some(s) => s,
        };
        mat.swap(rank, sel);
        let inv = k.inv(&mat[rank][col]).expect("pivot nonzero");
        for x in mat[rank].iter_mut() {
            *x = k.mul(x, &inv);
        }
        let prow = mat[rank].clone();
        for (ri, row) in mat.iter_mut().enumerate() {
            if ri == rank {
                continue;
            }
            let c = row[col].clone();
            if !c.is_zero() {
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = k.sub(x, &k.mul(&c, y));
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    let mut out = Vec::new();
    for free in 0..n {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![k.zero(); n];
        v[free] = k.one();
        for col in 0..n {
            if let Some(prow) = pivot_of_col[col] {
                v[col] = k.neg(&mat[prow][free]);
            }
        }
        out.push(v);
    }
    out
}

/// Ranks of the de Rham complex in one degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub dim_omega: usize,
    pub z: usize,
    pub b: usize,
}

pub fn dims(k: &PBasisField, r: usize) -> Result<Dims, DeRhamError> {
    if r > k.d() + 1 {
        return Err(DeRhamError::DegreeOutOfRange(r as i64));
    }
    let dim_omega = if r > k.d() {
        0
    } else {
        (k.p() as usize).pow(k.d() as u32) * binomial(k.d(), r)
    };
    let z = subspace_z(k, r)?.dim();
    let b = subspace_b(k, r)?.dim();
    // the Cartier isomorphism pins z - b to the k-dimension of Omega^r
    assert_eq!(z - b, binomial(k.d(), r));
    Ok(Dims { dim_omega, z, b })
}

// --- classes modulo B^r and the Cartier operators ---

/// A coset of `B^r` with its canonical (fully reduced) representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormClass {
    pub degree: usize,
    pub rep: DiffForm,
}

impl FormClass {
    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn add(&self, k: &PBasisField, b: &KpSubspace, other: &FormClass) -> FormClass {
        form_class_with(k, b, &self.rep.add(k, &other.rep))
    }

    pub fn sub(&self, k: &PBasisField, b: &KpSubspace, other: &FormClass) -> FormClass {
        form_class_with(k, b, &self.rep.sub(k, &other.rep))
    }
}

/// Class of `omega` in `Omega^r / B^r`.
pub fn form_class(k: &PBasisField, omega: &DiffForm) -> FormClass {
    let b = subspace_b(k, omega.degree()).expect("degree in range");
    form_class_with(k, &b, omega)
}

pub fn form_class_with(k: &PBasisField, b: &KpSubspace, omega: &DiffForm) -> FormClass {
    assert_eq!(b.degree, omega.degree());
    FormClass {
        degree: omega.degree(),
        rep: b.reduce_form(k, omega),
    }
}

/// `C^{-1}(sum a_I dt_I/t_I) = class(sum a_I^p dt_I/t_I)`.
pub fn inverse_cartier(k: &PBasisField, omega: &DiffForm) -> FormClass {
    form_class(k, &omega.frobenius_coeffs(k))
}

pub fn inverse_cartier_with(k: &PBasisField, b: &KpSubspace, omega: &DiffForm) -> FormClass {
    form_class_with(k, b, &omega.frobenius_coeffs(k))
}

/// Cartier operator on closed forms: the unique solution of
/// `C^{-1}(C(omega)) = class(omega)`; semilinear, `C(a^p w) = a C(w)`.
pub fn cartier(k: &PBasisField, omega: &DiffForm) -> Result<DiffForm, DeRhamError> {
    let b = subspace_b(k, omega.degree()).expect("degree in range");
    cartier_with(k, &b, omega)
}

pub fn cartier_with(
    k: &PBasisField,
    b: &KpSubspace,
    omega: &DiffForm,
) -> Result<DiffForm, DeRhamError> {
    if !exterior_d(k, omega).is_zero() {
        return Err(DeRhamError::NotClosed);
    }
    let v = b.reduce(k, &b.grid.coords(k, omega));
    // A closed form reduces into the span of the m = 0 grid columns: B^r is
    // spanned by grid vectors supported on m != 0 and Z^r = B^r + <dt_I/t_I>.
    let mut out = DiffForm::zero(omega.degree());
    for (idx, root) in v.iter().enumerate() {
        if root.is_zero() {
            continue;
        }
        let (mi, si) = b.grid.split(idx);
        assert!(
            b.grid.classes[mi].iter().all(|&e| e == 0),
            "closed form reduced outside the m = 0 block"
        );
        out = out.add(k, &DiffForm::monomial_form(k, b.grid.sets[si], root.clone()));
    }
    Ok(out)
}

/// `(C^{-1} - pi)(omega) = 0`, i.e. `sum (a_I^p - a_I) dt_I/t_I` lies in `B^r`.
pub fn is_logarithmic(k: &PBasisField, omega: &DiffForm) -> bool {
    let b = subspace_b(k, omega.degree()).expect("degree in range");
    is_logarithmic_with(k, &b, omega)
}

pub fn is_logarithmic_with(k: &PBasisField, b: &KpSubspace, omega: &DiffForm) -> bool {
    let delta = omega.frobenius_coeffs(k).sub(k, omega);
    b.contains_form(k, &delta)
}

// --- H_p classes (cokernel of C^{-1} - pi in top degree) ---

/// A class in `H_p^{d+1}(k) = coker(C^{-1} - pi : Omega^d -> Omega^d/B^d)`.
///
/// For `d = 0` the class lives in `F_q / wp(F_q)` with an exact zero test by
/// the trace; for `d >= 1` equality is witness-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HpClass {
    Exact { trace: u64, rep: FqElem },
    Coset { rep: FormClass },
}

/// Outcome of a witness-based equality test on `H_p` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HpEq {
    /// Certified equal; for `d >= 1` carries a witness `xi` with
    /// `(C^{-1} - pi)(xi) = pi(a - b)`.
    Equal(Option<DiffForm>),
    /// Certified distinct (exact trace route, `d = 0` only).
    Distinct,
    /// Bounded witness search exhausted.
    Unknown,
}

/// The class of a degree-`j` form in `H_p^{j+1}(k) = coker(C^{-1} - pi)`.
pub fn hp_class(k: &PBasisField, omega: &DiffForm) -> HpClass {
    if k.d() == 0 && omega.degree() == 0 {
        let c = k
            .as_fq_constant(&omega.coeff(k, 0))
            .expect("degree-0 element is constant");
        HpClass::Exact {
            trace: k.fq().trace(&c),
            rep: c,
        }
    } else {
        HpClass::Coset {
            rep: form_class(k, omega),
        }
    }
}

/// The canonical map `lambda_k : Omega^d -> H_p^{d+1}(k)` (top degree).
pub fn lambda_k(k: &PBasisField, omega: &DiffForm) -> Result<HpClass, DeRhamError> {
    if omega.degree() != k.d() {
        return Err(DeRhamError::DegreeMismatch {
            expected: k.d(),
            got: omega.degree(),
        });
    }
    Ok(hp_class(k, omega))
}

/// The m = 0 coordinate of a top-degree class: the canonical representative is
/// `s * dt/t` with `s in k^p`; returns the root `s^(1/p)`.
pub fn top_root(k: &PBasisField, class: &FormClass) -> KElem {
    assert_eq!(class.degree, k.d());
    let full: IdxSet = if k.d() == 0 { 0 } else { (1 << k.d()) - 1 };
    let c = class.rep.coeff(k, full);
    k.pth_root(&c)
        .expect("canonical top-degree representative lies in k^p")
}

/// Default degree bound for the witness search in `hp_eq`.
pub const DEFAULT_WITNESS_DEGREE_CAP: u32 = 6;

/// Witness-based equality of `H_p` classes.
pub fn hp_eq(k: &PBasisField, a: &HpClass, b: &HpClass, cap: u32) -> HpEq {
    match (a, b) {
        (HpClass::Exact { rep: ra, .. }, HpClass::Exact { rep: rb, .. }) => {
            let diff = k.fq().sub(ra, rb);
            if k.fq().trace(&diff) == 0 {
                HpEq::Equal(None)
            } else {
                HpEq::Distinct
            }
        }
        (HpClass::Coset { rep: ra }, HpClass::Coset { rep: rb }) => {
            assert_eq!(ra.degree, rb.degree, "class degree mismatch");
            let b = subspace_b(k, ra.degree).expect("degree in range");
            let diff_class = ra.sub(k, &b, rb);
            if diff_class.is_zero() {
                return HpEq::Equal(Some(DiffForm::zero(ra.degree)));
            }
            match hp_witness_search(k, &b, &diff_class, cap) {
                Some(xi) => HpEq::Equal(Some(xi)),
                None => HpEq::Unknown,
            }
        }
        _ => panic!("comparing H_p classes of different shapes"),
    }
}

/// Bounded search for `xi` with `(C^{-1} - pi)(xi) = target` in `Omega^j/B^j`.
///
/// The map is F_p-linear in `xi`, so candidates span an F_p-space: `F_q`-basis
/// multiples of `t^m dt_I/t_I` for monomials of total degree `<= cap`, with
/// either trivial denominator or the p-th root of the target denominators.
pub fn hp_witness_search(
    k: &PBasisField,
    b: &KpSubspace,
    target: &FormClass,
    cap: u32,
) -> Option<DiffForm> {
    let fq = k.fq();
    let e = fq.e();
    let degree = target.degree;
    let target_coords = b.reduce(k, &b.grid.coords(k, &target.rep));

    // common denominator candidate from the target coordinates
    let mut w = crate::poly::MPoly::one(fq, k.d());
    for c in &target_coords {
        let g = crate::poly::MPoly::gcd(fq, &w, c.den());
        w = w.mul(fq, &c.den().div_exact(fq, &g));
    }
    let w_is_one = w.is_one(fq);
    let w_inv = crate::ratfn::RatFn::new(fq, crate::poly::MPoly::one(fq, k.d()), w).ok()?;

    let fq_basis: Vec<FqElem> = (0..e)
        .map(|i| {
            let mut v = vec![0u64; e];
            v[i] = 1;
            FqElem(v)
        })
        .collect();
    let mut candidates: Vec<DiffForm> = Vec::new();
    for set in subsets(k.d(), degree) {
        for m in &monomials_up_to(k.d(), cap) {
            for bb in &fq_basis {
                let base = k.mul(&k.from_fq(bb.clone()), &k.monomial(m));
                candidates.push(DiffForm::monomial_form(k, set, base.clone()));
                if !w_is_one {
                    candidates.push(DiffForm::monomial_form(k, set, k.mul(&base, &w_inv)));
                }
            }
        }
    }

    let images: Vec<Vec<KElem>> = candidates
        .iter()
        .map(|xi| {
            let delta = xi.frobenius_coeffs(k).sub(k, xi);
            b.reduce(k, &b.grid.coords(k, &delta))
        })
        .collect();

    let coeffs = solve_fp_linear_vec(k, &images, &target_coords)?;
    let mut acc = DiffForm::zero(degree);
    for (c, xi) in coeffs.iter().zip(&candidates) {
        if *c != 0 {
            acc = acc.add(k, &xi.scale(k, &k.from_int(*c as i64)));
        }
    }
    debug_assert!(form_class_with(k, b, &acc.frobenius_coeffs(k).sub(k, &acc)) == *target);
    Some(acc)
}

pub fn hp_is_zero(k: &PBasisField, a: &HpClass, cap: u32) -> HpEq {
    let zero = if k.d() == 0 {
        HpClass::Exact {
            trace: 0,
            rep: k.fq().zero(),
        }
    } else {
        HpClass::Coset {
            rep: FormClass {
                degree: k.d(),
                rep: DiffForm::zero(k.d()),
            },
        }
    };
    hp_eq(k, a, &zero, cap)
}

fn monomials_up_to(d: usize, cap: u32) -> Vec<Mon> {
    fn rec(d: usize, cap: u32, cur: &mut Mon, out: &mut Vec<Mon>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        let used: u32 = cur.iter().sum();
        for e in 0..=(cap - used) {
            cur.push(e);
            rec(d, cap, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, cap, &mut Vec::new(), &mut out);
    out
}

/// Solve `sum_i c_i images[i] = target` for `c_i in F_p`, where images and
/// target are vectors of field elements: clear each coordinate to a common
/// denominator, match monomial coordinates over an F_p-basis of `F_q`, and
/// verify the candidate exactly.
fn solve_fp_linear_vec(
    k: &PBasisField,
    images: &[Vec<KElem>],
    target: &[KElem],
) -> Option<Vec<u64>> {
    use crate::poly::MPoly;
    let fq = k.fq();
    let p = k.p();
    let ncoords = target.len();
    let ncols = images.len();
    let e = fq.e();

    // per-coordinate clearing and support
    let mut mat: Vec<Vec<u64>> = Vec::new();
    for coord_idx in 0..ncoords {
        let mut common = MPoly::one(fq, k.d());
        for f in images
            .iter()
            .map(|v| &v[coord_idx])
            .chain(std::iter::once(&target[coord_idx]))
        {
            let g = MPoly::gcd(fq, &common, f.den());
            common = common.mul(fq, &f.den().div_exact(fq, &g));
        }
        let numerator = |f: &KElem| -> MPoly {
            let scale = common.div_exact(fq, f.den());
            f.num().mul(fq, &scale)
        };
        let nums: Vec<MPoly> = images.iter().map(|v| numerator(&v[coord_idx])).collect();
        let tnum = numerator(&target[coord_idx]);

        let mut support: std::collections::BTreeSet<Mon> = std::collections::BTreeSet::new();
        for f in nums.iter().chain(std::iter::once(&tnum)) {
            for (m, _) in f.terms() {
                support.insert(m.clone());
            }
        }
        for m in support {
            for ei in 0..e {
                let mut row: Vec<u64> = nums
                    .iter()
                    .map(|f| f.coeff_at(&m).map(|c| c.0[ei]).unwrap_or(0))
                    .collect();
                row.push(tnum.coeff_at(&m).map(|c| c.0[ei]).unwrap_or(0));
                mat.push(row);
            }
        }
    }
    let nrows = mat.len();

    // Gauss-Jordan on [A | b] mod p.
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let sel = (rank..nrows).find(|&ri| mat[ri][col] % p != 0);
        let sel = match sel {
            None => continue,
            Some(s) => s,
        };
        mat.swap(rank, sel);
        let inv = mod_pow(mat[rank][col], p - 2, p);
        for x in mat[rank].iter_mut() {
            *x = *x * inv % p;
        }
        let prow = mat[rank].clone();
        for (ri, row) in mat.iter_mut().enumerate() {
            if ri == rank {
                continue;
            }
            let c = row[col] % p;
            if c != 0 {
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = (*x + p * p - c * *y % p) % p;
                }
            }
        }
        pivot_col_of_row.push(col);
        rank += 1;
    }
    let mut sol = vec![0u64; ncols];
    for (r, &pc) in pivot_col_of_row.iter().enumerate() {
        sol[pc] = mat[r][ncols] % p;
    }
    // Exact verification guards against inconsistent systems.
    for coord_idx in 0..ncoords {
        let mut acc = k.zero();
        for (c, v) in sol.iter().zip(images) {
            if *c != 0 {
                acc = k.add(&acc, &k.mul(&k.from_int(*c as i64), &v[coord_idx]));
            }
        }
        if acc != target[coord_idx] {
            return None;
        }
    }
    Some(sol)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Random form with coefficients of bounded complexity.
pub fn random_form<R: rand::Rng>(
    k: &PBasisField,
    rng: &mut R,
    degree: usize,
    max_deg: u32,
    terms: usize,
) -> DiffForm {
    let mut out = DiffForm::zero(degree);
    for set in subsets(k.d(), degree) {
        let c = k.random_element(rng, max_deg, terms);
        out = out.add(k, &DiffForm::monomial_form(k, set, c));
    }
    out
}

/// Random closed form: a random k^p-combination of a `Z^r` basis.
pub fn random_closed_form<R: rand::Rng>(
    k: &PBasisField,
    rng: &mut R,
    z: &KpSubspace,
    max_deg: u32,
    terms: usize,
) -> DiffForm {
    let mut acc = DiffForm::zero(z.degree);
    for row in &z.basis {
        let root = k.random_element(rng, max_deg, terms);
        if root.is_zero() {
            continue;
        }
        let scaled: Vec<KElem> = row.iter().map(|c| k.mul(c, &root)).collect();
        acc = acc.add(k, &z.grid.form_from_coords(k, &scaled));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f2t() -> PBasisField {
        PBasisField::rational(2, 1).unwrap()
    }

    fn f3t() -> PBasisField {
        PBasisField::rational(3, 1).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let k = PBasisField::rational(2, 2).unwrap();
        let dt1 = DiffForm::monomial_form(&k, 0b01, k.one());
        let dt2 = DiffForm::monomial_form(&k, 0b10, k.one());
        assert!(wedge(&k, &dt1, &dt1).is_zero());
        let w = wedge(&k, &dt1, &dt2);
        assert_eq!(w, DiffForm::monomial_form(&k, 0b11, k.one()));
        // (t1 * dt2/t2) ^ (dt1/t1) = -t1 * dt_{12}/t_{12}
        let t1 = k.var(0);
        let w2 = wedge(
            &k,
            &DiffForm::monomial_form(&k, 0b10, t1.clone()),
            &dt1,
        );
        assert_eq!(w2, DiffForm::monomial_form(&k, 0b11, k.neg(&t1)));
    }

    #[test]
    fn exterior_d_examples() {
        let k = f2t();
        // d(t) = t * dt/t
        let f = DiffForm::scalar(k.var(0));
        let df = exterior_d(&k, &f);
        assert_eq!(df, DiffForm::monomial_form(&k, 1, k.var(0)));
        // d(t^2) = 0 in char 2
        let f2 = DiffForm::scalar(k.mul(&k.var(0), &k.var(0)));
        assert!(exterior_d(&k, &f2).is_zero());

        // product rule example over F_3(t1,t2)
        let k2 = PBasisField::rational(3, 2).unwrap();
        let t1t2 = k2.mul(&k2.var(0), &k2.var(1));
        let d = exterior_d(&k2, &DiffForm::scalar(t1t2.clone()));
        let expect = DiffForm::from_terms(1, vec![(0b01, t1t2.clone()), (0b10, t1t2)]);
        assert_eq!(d, expect);
    }

    #[test]
    fn d_squared_zero_and_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = PBasisField::rational(2, 2).unwrap();
        for _ in 0..20 {
            let a = random_form(&k, &mut rng, 0, 2, 3);
            assert!(exterior_d(&k, &exterior_d(&k, &a)).is_zero());
            let b = random_form(&k, &mut rng, 1, 2, 2);
            assert!(exterior_d(&k, &exterior_d(&k, &b)).is_zero());
            // Leibniz: d(a ^ b) = da ^ b + (-1)^0 a ^ db
            let lhs = exterior_d(&k, &wedge(&k, &a, &b));
            let rhs = wedge(&k, &exterior_d(&k, &a), &b)
                .add(&k, &wedge(&k, &a, &exterior_d(&k, &b)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn dims_and_subspaces_small() {
        let k = f2t();
        // B^0 is zero, B^1 = span{dt}, Z^1 = all of Omega^1
        assert_eq!(subspace_b(&k, 0).unwrap().dim(), 0);
        let b1 = subspace_b(&k, 1).unwrap();
        assert_eq!(b1.dim(), 1);
        let z1 = subspace_z(&k, 1).unwrap();
        assert_eq!(z1.dim(), 2);
        assert!(b1.subset_of(&k, &z1));
        // dt = t * dt/t lies in B^1
        let dt = DiffForm::monomial_form(&k, 1, k.var(0));
        assert!(b1.contains_form(&k, &dt));

        assert_eq!(
            dims(&k, 0).unwrap(),
            Dims {
                dim_omega: 2,
                z: 1,
                b: 0
            }
        );
        assert_eq!(
            dims(&k, 1).unwrap(),
            Dims {
                dim_omega: 2,
                z: 2,
                b: 1
            }
        );
    }

    #[test]
    fn dims_p2_d2_match_recurrences() {
        let k = PBasisField::rational(2, 2).unwrap();
        let d: Vec<Dims> = (0..=2).map(|r| dims(&k, r).unwrap()).collect();
        assert_eq!((d[0].z, d[1].z, d[2].z), (1, 5, 4));
        assert_eq!((d[0].b, d[1].b, d[2].b), (0, 3, 3));
        for r in 0..=2 {
            assert_eq!(d[r].z - d[r].b, binomial(2, r));
            let b_next = if r < 2 {
                d[r + 1].b
            } else {
                dims(&k, 3).unwrap().b
            };
            assert_eq!(d[r].z + b_next, d[r].dim_omega);
            assert_eq!(d[r].z + d[2 - r].b, d[r].dim_omega);
        }
    }

    #[test]
    fn cartier_examples() {
        let k = f2t();
        // C(dt/t) = dt/t
        let dtt = DiffForm::monomial_form(&k, 1, k.one());
        assert_eq!(cartier(&k, &dtt).unwrap(), dtt);
        // C(t^2 dt/t) = t dt/t
        let t = k.var(0);
        let t2 = k.mul(&t, &t);
        let w = DiffForm::monomial_form(&k, 1, t2);
        assert_eq!(cartier(&k, &w).unwrap(), DiffForm::monomial_form(&k, 1, t));
        // C(dt) = 0 over F_3(t): dt = t dt/t lies in B^1
        let k3 = f3t();
        let dt = DiffForm::monomial_form(&k3, 1, k3.var(0));
        assert!(cartier(&k3, &dt).unwrap().is_zero());
    }

    #[test]
    fn inverse_cartier_examples() {
        let k = f2t();
        let dtt = DiffForm::monomial_form(&k, 1, k.one());
        let c = inverse_cartier(&k, &dtt);
        assert_eq!(c.rep, dtt);
        // C^{-1}(t dt/t) = class(t^2 dt/t), nonzero
        let w = DiffForm::monomial_form(&k, 1, k.var(0));
        let c2 = inverse_cartier(&k, &w);
        assert!(!c2.is_zero());
        // dt is not logarithmic: C^{-1}(dt) != pi(dt)
        let dt = DiffForm::monomial_form(&k, 1, k.var(0));
        assert!(!is_logarithmic(&k, &dt));
        assert!(is_logarithmic(&k, &dtt));
    }

    #[test]
    fn cartier_roundtrips_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (q, d) in [(2u64, 1usize), (3, 1), (2, 2)] {
            let k = PBasisField::rational(q, d).unwrap();
            for r in 0..=d {
                let b = subspace_b(&k, r).unwrap();
                let z = subspace_z(&k, r).unwrap();
                for _ in 0..10 {
                    // C o C^{-1} = id on Omega^r/B^r
                    let w = random_form(&k, &mut rng, r, 2, 2);
                    let ic = inverse_cartier_with(&k, &b, &w);
                    let back = cartier_with(&k, &b, &ic.rep).unwrap();
                    assert_eq!(form_class_with(&k, &b, &back), form_class_with(&k, &b, &w));
                    // C^{-1} o C = id on Z^r/B^r
                    let zf = random_closed_form(&k, &mut rng, &z, 2, 2);
                    let c = cartier_with(&k, &b, &zf).unwrap();
                    let fwd = inverse_cartier_with(&k, &b, &c);
                    assert_eq!(fwd, form_class_with(&k, &b, &zf));
                }
            }
        }
    }

    #[test]
    fn dlog_examples() {
        let k = f2t();
        let t = k.var(0);
        let d = dlog(&k, &[t.clone()]).unwrap();
        assert_eq!(d, DiffForm::monomial_form(&k, 1, k.one()));

        let k2 = PBasisField::rational(2, 2).unwrap();
        let d2 = dlog(&k2, &[k2.var(0), k2.var(1)]).unwrap();
        assert_eq!(d2, DiffForm::monomial_form(&k2, 0b11, k2.one()));

        // Steinberg: dlog{x, 1-x} = 0
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let x = k2.random_nonzero(&mut rng, 2, 2);
            let omx = k2.sub(&k2.one(), &x);
            if omx.is_zero() {
                continue;
            }
            assert!(dlog(&k2, &[x, omx]).unwrap().is_zero());
        }
        assert_eq!(dlog(&k, &[k.zero()]).unwrap_err(), DeRhamError::ZeroEntry);
    }

    #[test]
    fn dlog_is_logarithmic_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = PBasisField::rational(2, 2).unwrap();
        let b = subspace_b(&k, 2).unwrap();
        for _ in 0..15 {
            let x = k.random_nonzero(&mut rng, 2, 2);
            let y = k.random_nonzero(&mut rng, 2, 2);
            let d = dlog(&k, &[x, y]).unwrap();
            assert!(is_logarithmic_with(&k, &b, &d));
        }
    }

    #[test]
    fn lambda_examples() {
        // d = 0: omega = 1 over F_2 has nonzero class (trace 1)
        let k0 = PBasisField::rational(2, 0).unwrap();
        let cls = lambda_k(&k0, &DiffForm::scalar(k0.one())).unwrap();
        assert_eq!(hp_is_zero(&k0, &cls, 4), HpEq::Distinct);

        // d = 1: t^2 dt/t is a zero class with witness t
        let k = f2t();
        let t = k.var(0);
        let w = DiffForm::monomial_form(&k, 1, k.mul(&t, &t));
        let cls = lambda_k(&k, &w).unwrap();
        match hp_is_zero(&k, &cls, 4) {
            HpEq::Equal(Some(xi)) => {
                // the witness satisfies (C^{-1} - pi)(xi) = pi(w)
                let lhs = form_class(&k, &xi.frobenius_coeffs(&k).sub(&k, &xi));
                assert_eq!(lhs, form_class(&k, &w));
            }
            other => panic!("expected equal-with-witness, got {other:?}"),
        }

        // d = 1: dt has zero class with witness 0 (dt lies in B^1)
        let dt = DiffForm::monomial_form(&k, 1, t);
        let cls = lambda_k(&k, &dt).unwrap();
        match hp_is_zero(&k, &cls, 4) {
            HpEq::Equal(Some(xi)) => assert!(xi.is_zero()),
            other => panic!("expected equal-with-zero-witness, got {other:?}"),
        }

        // lemma square: lambda(f dt/t) has representative pi_0(f) * dt/t
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let f = k.random_element(&mut rng, 3, 3);
            let w = DiffForm::monomial_form(&k, 1, f.clone());
            match lambda_k(&k, &w).unwrap() {
                HpClass::Coset { rep } => {
                    let coord = k.frobenius(&top_root(&k, &rep));
                    assert_eq!(coord, k.pi0(&f));
                }
                _ => unreachable!(),
            }
        }

        let bad = lambda_k(&k, &DiffForm::scalar(k.one()));
        assert!(matches!(bad, Err(DeRhamError::DegreeMismatch { .. })));
    }

    #[test]
    fn form_json_roundtrip() {
        let k = PBasisField::rational(2, 2).unwrap();
        let w = DiffForm::from_terms(
            1,
            vec![(0b01, k.parse("(t1+1)/(t2)").unwrap()), (0b10, k.var(0))],
        );
        let j = w.to_json(&k);
        let back = DiffForm::from_json(&k, &j).unwrap();
        assert_eq!(back, w);
    }
}
