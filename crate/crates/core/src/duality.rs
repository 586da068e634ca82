//! Wedge-product duality pairings: Gram matrices over the deterministic grid
//! bases with perfectness certificates, the joint-coordinate nondegeneracy
//! criterion for linear pairings, the Cartier diagram identities, and the
//! graded-piece pairing constructors.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derham::{
    self, cartier_with, dlog, form_class_with, hp_class, inverse_cartier_with, random_closed_form,
    random_form, subspace_b, subspace_z, top_root, wedge, DeRhamError, DiffForm, Grid,
    HpClass, KpSubspace,
};
use crate::fields::{KElem, PBasisField};
use crate::finab::{FinAb, FinPairing, QZ};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("degree out of range: r = {0}")]
    DegreeOutOfRange(i64),
    #[error("bad case parameters: {0}")]
    BadCaseParams(String),
    #[error(transparent)]
    DeRham(#[from] DeRhamError),
}

/// Which wedge pairing a Gram matrix tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramKind {
    /// `Omega^r x Omega^{d-r} -> Omega^d`, K-bilinear (entries in k).
    Phi1,
    /// `pi . phi_1 : Omega^r x Omega^{d-r} -> Omega^d/B^d`, k^p-bilinear.
    PiPhi1,
    /// `Z^r x Omega^{d-r}/B^{d-r} -> Omega^d/B^d`.
    Phi2,
    /// `Omega^r/Z^r x B^{d-r} -> Omega^d/B^d`.
    Phi3,
}

impl GramKind {
    pub fn parse(s: &str) -> Option<GramKind> {
        match s {
            "phi1" => Some(GramKind::Phi1),
            "piphi1" => Some(GramKind::PiPhi1),
            "phi2" => Some(GramKind::Phi2),
            "phi3" => Some(GramKind::Phi3),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GramKind::Phi1 => "phi1",
            GramKind::PiPhi1 => "piphi1",
            GramKind::Phi2 => "phi2",
            GramKind::Phi3 => "phi3",
        }
    }
}

/// A Gram matrix of one of the wedge pairings over deterministic bases.
/// For the k^p-valued pairings the entries are stored by their p-th roots.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub which: GramKind,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Root entries for k^p-scalars; plain entries for `Phi1`.
    pub entries: Vec<Vec<KElem>>,
    pub target: String,
}

/// Exact-rank certificate for a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub left_nondeg: bool,
    pub right_nondeg: bool,
    pub perfect: bool,
}

/// Rank over `k` by Gaussian elimination.
pub fn rank(k: &PBasisField, entries: &[Vec<KElem>]) -> usize {
    let rows = entries.len();
    if rows == 0 {
        return 0;
    }
    let cols = entries[0].len();
    let mut mat: Vec<Vec<KElem>> = entries.to_vec();
    let mut rank = 0usize;
    for col in 0..cols {
        let sel = (rank..rows).find(|&ri| !mat[ri][col].is_zero());
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
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

pub fn certify(k: &PBasisField, g: &GramMatrix) -> Certificate {
    let rows = g.entries.len();
    let cols = g.entries.first().map(|r| r.len()).unwrap_or(0);
    let rk = rank(k, &g.entries);
    Certificate {
        rows,
        cols,
        rank: rk,
        left_nondeg: rk == rows,
        right_nondeg: rk == cols,
        perfect: rows == cols && rk == rows,
    }
}

/// The coordinate of a top-degree class along `dt/t mod B^d`, as a p-th root.
fn pairing_root(k: &PBasisField, b_top: &KpSubspace, w: &DiffForm) -> KElem {
    let class = form_class_with(k, b_top, w);
    top_root(k, &class)
}

/// Build the Gram matrix of the requested pairing in degree `r`.
pub fn gram(k: &PBasisField, which: GramKind, r: usize) -> Result<GramMatrix, DualityError> {
    let d = k.d();
    if r > d {
        return Err(DualityError::DegreeOutOfRange(r as i64));
    }
    let s = d - r;
    let b_top = subspace_b(k, d)?;
    let full_label = "Omega^d/B^d along dt/t".to_string();

    match which {
        GramKind::Phi1 => {
            // K-bases {dt_I/t_I}; entry = coefficient of x ^ y along dt/t.
            let rows_sets = derham::subsets(d, r);
            let cols_sets = derham::subsets(d, s);
            let full: derham::IdxSet = if d == 0 { 0 } else { (1 << d) - 1 };
            let label = |set: derham::IdxSet| -> String {
                if set == 0 {
                    "1".into()
                } else {
                    let names: Vec<&str> = derham::idx_members(set)
                        .iter()
                        .map(|&j| k.var_names()[j].as_str())
                        .collect();
                    format!("dlog({})", names.join(","))
                }
            };
            let entries = rows_sets
                .iter()
                .map(|&si| {
                    cols_sets
                        .iter()
                        .map(|&sj| {
                            let w = wedge(
                                k,
                                &DiffForm::monomial_form(k, si, k.one()),
                                &DiffForm::monomial_form(k, sj, k.one()),
                            );
                            w.coeff(k, full)
                        })
                        .collect()
                })
                .collect();
            Ok(GramMatrix {
                which,
                row_labels: rows_sets.iter().map(|&s| label(s)).collect(),
                col_labels: cols_sets.iter().map(|&s| label(s)).collect(),
                entries,
                target: "Omega^d along dt/t".into(),
            })
        }
        GramKind::PiPhi1 => {
            let gr = Grid::new(k, r);
            let gc = Grid::new(k, s);
            let rows: Vec<DiffForm> = (0..gr.size()).map(|i| gr.basis_form(k, i)).collect();
            let cols: Vec<DiffForm> = (0..gc.size()).map(|i| gc.basis_form(k, i)).collect();
            let entries = rows
                .iter()
                .map(|x| {
                    cols.iter()
                        .map(|y| pairing_root(k, &b_top, &wedge(k, x, y)))
                        .collect()
                })
                .collect();
            Ok(GramMatrix {
                which,
                row_labels: (0..gr.size()).map(|i| gr.label(k, i)).collect(),
                col_labels: (0..gc.size()).map(|i| gc.label(k, i)).collect(),
                entries,
                target: full_label,
            })
        }
        GramKind::Phi2 => {
            // Z^r x Omega^{d-r}/B^{d-r}
            let z = subspace_z(k, r)?;
            let b_s = subspace_b(k, s)?;
            let rows: Vec<DiffForm> = z
                .basis
                .iter()
                .map(|v| z.grid.form_from_coords(k, v))
                .collect();
            let row_labels: Vec<String> = z
                .pivots
                .iter()
                .map(|&p| format!("z[{}]", z.grid.label(k, p)))
                .collect();
            let col_idx = b_s.complement_indices();
            let cols: Vec<DiffForm> = col_idx
                .iter()
                .map(|&i| b_s.grid.basis_form(k, i))
                .collect();
            let col_labels: Vec<String> = col_idx
                .iter()
                .map(|&i| format!("[{}] mod B", b_s.grid.label(k, i)))
                .collect();
            let entries = rows
                .iter()
                .map(|x| {
                    cols.iter()
                        .map(|y| pairing_root(k, &b_top, &wedge(k, x, y)))
                        .collect()
                })
                .collect();
            Ok(GramMatrix {
                which,
                row_labels,
                col_labels,
                entries,
                target: full_label,
            })
        }
        GramKind::Phi3 => {
            // Omega^r/Z^r x B^{d-r}
            let z = subspace_z(k, r)?;
            let b_s = subspace_b(k, s)?;
            let row_idx = z.complement_indices();
            let rows: Vec<DiffForm> = row_idx
                .iter()
                .map(|&i| z.grid.basis_form(k, i))
                .collect();
            let row_labels: Vec<String> = row_idx
                .iter()
                .map(|&i| format!("[{}] mod Z", z.grid.label(k, i)))
                .collect();
            let cols: Vec<DiffForm> = b_s
                .basis
                .iter()
                .map(|v| b_s.grid.form_from_coords(k, v))
                .collect();
            let col_labels: Vec<String> = b_s
                .pivots
                .iter()
                .map(|&p| format!("b[{}]", b_s.grid.label(k, p)))
                .collect();
            let entries = rows
                .iter()
                .map(|x| {
                    cols.iter()
                        .map(|y| pairing_root(k, &b_top, &wedge(k, x, y)))
                        .collect()
                })
                .collect();
            Ok(GramMatrix {
                which,
                row_labels,
                col_labels,
                entries,
                target: full_label,
            })
        }
    }
}

impl GramMatrix {
    /// JSON record; k^p-scalar entries are emitted as their values (`root^p`).
    pub fn to_json(&self, k: &PBasisField) -> serde_json::Value {
        let entries: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        let v = if matches!(self.which, GramKind::Phi1) {
                            c.clone()
                        } else {
                            k.frobenius(c)
                        };
                        k.format(&v)
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "which": self.which.name(),
            "rows": self.row_labels,
            "cols": self.col_labels,
            "entries": entries,
            "target": self.target,
        })
    }
}

// --- the joint-coordinate criterion for linear pairings ---

/// A K-bilinear pairing into `Omega^d` identified with `k` along `dt/t`:
/// `matrix[i][j]` is the value on the `(i, j)` basis pair.
#[derive(Debug, Clone)]
pub struct LinearPairingSpec {
    pub matrix: Vec<Vec<KElem>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointFamilyReport {
    pub left_kernel_dim_k: usize,
    pub right_kernel_dim_k: usize,
    pub joint_left_kernel_dim_kp: usize,
    pub joint_right_kernel_dim_kp: usize,
    pub left_kernels_match: bool,
    pub right_kernels_match: bool,
    pub joint_nondeg_left: bool,
    pub joint_nondeg_right: bool,
}

/// Verify that the left (resp. right) kernel of the joint k^p-bilinear family
/// `z_m(x, y) = pi_0(t^{-m} phi(x, y))` coincides with the kernel of `phi` as
/// a set, with matching dimensions over k^p.
pub fn joint_family_check(k: &PBasisField, spec: &LinearPairingSpec) -> JointFamilyReport {
    let nl = spec.matrix.len();
    let nr = spec.matrix.first().map(|r| r.len()).unwrap_or(0);
    let classes = k.monomial_classes();
    let pd = classes.len();

    // kernels of phi over k
    let left_cols: Vec<Vec<KElem>> = (0..nl)
        .map(|i| (0..nr).map(|j| spec.matrix[i][j].clone()).collect())
        .collect();
    let left_kernel = derham::kernel_basis(k, &left_cols, nr);
    let right_cols: Vec<Vec<KElem>> = (0..nr)
        .map(|j| (0..nl).map(|i| spec.matrix[i][j].clone()).collect())
        .collect();
    let right_kernel = derham::kernel_basis(k, &right_cols, nl);

    // z_{m'}(t^m e_i, t^{m''} f_j) = pi_0(t^{m + m'' - m'} phi_ij), stored by root
    let zval = |mi: usize, i: usize, mj: usize, j: usize, mp: usize| -> KElem {
        let mut exp: Vec<i64> = vec![0; k.d()];
        for l in 0..k.d() {
            exp[l] = classes[mi][l] as i64 + classes[mj][l] as i64 - classes[mp][l] as i64;
        }
        let mut factor = k.one();
        for (l, &e) in exp.iter().enumerate() {
            factor = k.mul(&factor, &k.pow(&k.var(l), e).expect("t nonzero"));
        }
        let v = k.pi0(&k.mul(&factor, &spec.matrix[i][j]));
        k.pth_root(&v).expect("pi_0 lands in k^p")
    };

    // joint left kernel: columns indexed by (m, i); rows by (m', m'', j)
    let joint_left_cols: Vec<Vec<KElem>> = (0..pd * nl)
        .map(|ci| {
            let (mi, i) = (ci / nl, ci % nl);
            let mut col = Vec::with_capacity(pd * pd * nr);
            for mp in 0..pd {
                for mj in 0..pd {
                    for j in 0..nr {
                        col.push(zval(mi, i, mj, j, mp));
                    }
                }
            }
            col
        })
        .collect();
    let joint_left_kernel = derham::kernel_basis(k, &joint_left_cols, pd * pd * nr);

    let joint_right_cols: Vec<Vec<KElem>> = (0..pd * nr)
        .map(|cj| {
            let (mj, j) = (cj / nr, cj % nr);
            let mut col = Vec::with_capacity(pd * pd * nl);
            for mp in 0..pd {
                for mi in 0..pd {
                    for i in 0..nl {
                        col.push(zval(mi, i, mj, j, mp));
                    }
                }
            }
            col
        })
        .collect();
    let joint_right_kernel = derham::kernel_basis(k, &joint_right_cols, pd * pd * nl);

    // dimension match and mutual containment (joint kernel vectors, assembled
    // into field vectors, must lie in the k-kernel)
    let assemble = |v: &[KElem], n: usize| -> Vec<KElem> {
        let mut out = vec![k.zero(); n];
        for (idx, root) in v.iter().enumerate() {
            if root.is_zero() {
                continue;
            }
            let (mi, i) = (idx / n, idx % n);
            let term = k.mul(&k.frobenius(root), &k.monomial(&classes[mi]));
            out[i] = k.add(&out[i], &term);
        }
        out
    };
    let in_left_kernel = |x: &[KElem]| -> bool {
        (0..nr).all(|j| {
            let mut acc = k.zero();
            for i in 0..nl {
                acc = k.add(&acc, &k.mul(&x[i], &spec.matrix[i][j]));
            }
            acc.is_zero()
        })
    };
    let in_right_kernel = |y: &[KElem]| -> bool {
        (0..nl).all(|i| {
            let mut acc = k.zero();
            for j in 0..nr {
                acc = k.add(&acc, &k.mul(&y[j], &spec.matrix[i][j]));
            }
            acc.is_zero()
        })
    };

    let left_match = joint_left_kernel.len() == pd * left_kernel.len()
        && joint_left_kernel
            .iter()
            .all(|v| in_left_kernel(&assemble(v, nl)));
    let right_match = joint_right_kernel.len() == pd * right_kernel.len()
        && joint_right_kernel
            .iter()
            .all(|v| in_right_kernel(&assemble(v, nr)));

    JointFamilyReport {
        left_kernel_dim_k: left_kernel.len(),
        right_kernel_dim_k: right_kernel.len(),
        joint_left_kernel_dim_kp: joint_left_kernel.len(),
        joint_right_kernel_dim_kp: joint_right_kernel.len(),
        left_kernels_match: left_match,
        right_kernels_match: right_match,
        joint_nondeg_left: joint_left_kernel.is_empty(),
        joint_nondeg_right: joint_right_kernel.is_empty(),
    }
}

// --- diagram identity checks ---

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: usize,
    pub total: usize,
}

impl CheckLine {
    pub fn ok(&self) -> bool {
        self.pass == self.total
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagramReport {
    pub checks: Vec<CheckLine>,
}

impl DiagramReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok())
    }
}

/// Verify, on seeded random `x` in `Omega^r` and closed `y` in `Z^{d-r}`:
/// `C^{-1}(x ^ C(y)) = C^{-1}(x) ^ y`, `pi(x ^ j(y)) = pi(x) ^ y`, and the
/// column exactness samples (dlog symbols die under `C^{-1} - pi`; logarithmic
/// forms are fixed by `C`).
pub fn cartier_wedge_diagram_check(
    k: &PBasisField,
    r: usize,
    samples: usize,
    seed: u64,
) -> Result<DiagramReport, DualityError> {
    use rand::SeedableRng;
    let d = k.d();
    if r > d {
        return Err(DualityError::DegreeOutOfRange(r as i64));
    }
    let s = d - r;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let b_r = subspace_b(k, r)?;
    let b_s = subspace_b(k, s)?;
    let b_top = subspace_b(k, d)?;
    let z_s = subspace_z(k, s)?;

    let mut c1 = CheckLine {
        name: "C^{-1}(x ^ C(y)) = C^{-1}(x) ^ y".into(),
        pass: 0,
        total: 0,
    };
    let mut c2 = CheckLine {
        name: "pi(x ^ j(y)) = pi(x) ^ y".into(),
        pass: 0,
        total: 0,
    };
    let mut c3 = CheckLine {
        name: "(C^{-1} - pi)(dlog) = 0 and C fixes logarithmic forms".into(),
        pass: 0,
        total: 0,
    };

    for _ in 0..samples {
        let x = random_form(k, &mut rng, r, 2, 2);
        let y = random_closed_form(k, &mut rng, &z_s, 2, 2);

        // (i)
        let cy = cartier_with(k, &b_s, &y)?;
        let lhs = inverse_cartier_with(k, &b_top, &wedge(k, &x, &cy));
        let icx = inverse_cartier_with(k, &b_r, &x);
        let rhs = form_class_with(k, &b_top, &wedge(k, &icx.rep, &y));
        c1.total += 1;
        if lhs == rhs {
            c1.pass += 1;
        }

        // (ii)
        let lhs = form_class_with(k, &b_top, &wedge(k, &x, &y));
        let pix = form_class_with(k, &b_r, &x);
        let rhs = form_class_with(k, &b_top, &wedge(k, &pix.rep, &y));
        c2.total += 1;
        if lhs == rhs {
            c2.pass += 1;
        }

        // (iii): dlog sample of degree r (skip when r = 0)
        if r >= 1 {
            let entries: Vec<KElem> = (0..r).map(|_| nonzero(k, &mut rng)).collect();
            let dl = dlog(k, &entries)?;
            let log_ok = derham::is_logarithmic_with(k, &b_r, &dl);
            let fixed = cartier_with(k, &b_r, &dl)
                .map(|c| form_class_with(k, &b_r, &c) == form_class_with(k, &b_r, &dl))
                .unwrap_or(false);
            c3.total += 1;
            if log_ok && fixed {
                c3.pass += 1;
            }
        }
    }
    Ok(DiagramReport {
        checks: vec![c1, c2, c3],
    })
}

fn nonzero<R: Rng>(k: &PBasisField, rng: &mut R) -> KElem {
    k.random_nonzero(rng, 2, 2)
}

/// Membership in `nu_j(a, k) = ker(C + a : Z^j -> Omega^j)`: requires `v`
/// closed; tests `C(v) + a v = 0` exactly.
pub fn nu_membership(k: &PBasisField, v: &DiffForm, a: &KElem) -> Result<bool, DualityError> {
    let b = subspace_b(k, v.degree())?;
    let cv = cartier_with(k, &b, v)?; // NotClosed surfaces here
    let sum = cv.add(k, &v.scale(k, a));
    Ok(sum.is_zero())
}

/// Witness check for `D_{a,k}^j = im(C^{-1} + a)`: does
/// `(C^{-1} + a)(xi) = class(omega)` hold in `Omega^j/B^j`?
pub fn d_a_witness_check(
    k: &PBasisField,
    xi: &DiffForm,
    omega: &DiffForm,
    a: &KElem,
) -> Result<bool, DualityError> {
    if xi.degree() != omega.degree() {
        return Err(DualityError::BadCaseParams(
            "witness and target must share a degree".into(),
        ));
    }
    let b = subspace_b(k, xi.degree())?;
    let image = xi.frobenius_coeffs(k).add(k, &xi.scale(k, a));
    Ok(form_class_with(k, &b, &image) == form_class_with(k, &b, omega))
}

/// Representative-level identities of the ramified-case diagram, on seeded
/// random `x` in `Omega^j`, closed `y` in `Z^{d-j}`:
/// wedge compatibility of `C^{-1}/C`, of `pi/j`, of multiplication by `a`,
/// and the `(C^{-1}+a) / (C+a)` row with its explicit witness.
pub fn ramified_case_diagram_check(
    k: &PBasisField,
    j: usize,
    a: &KElem,
    samples: usize,
    seed: u64,
) -> Result<DiagramReport, DualityError> {
    use rand::SeedableRng;
    let d = k.d();
    if j > d {
        return Err(DualityError::DegreeOutOfRange(j as i64));
    }
    if a.is_zero() {
        return Err(DualityError::BadCaseParams("a must be nonzero".into()));
    }
    let s = d - j;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let b_j = subspace_b(k, j)?;
    let b_s = subspace_b(k, s)?;
    let b_top = subspace_b(k, d)?;
    let z_s = subspace_z(k, s)?;

    let mut c1 = CheckLine {
        name: "C^{-1}(x ^ C(y)) = C^{-1}(x) ^ y".into(),
        pass: 0,
        total: 0,
    };
    let mut c2 = CheckLine {
        name: "pi(x ^ j(y)) = pi(x) ^ y".into(),
        pass: 0,
        total: 0,
    };
    let mut c3 = CheckLine {
        name: "(a x) ^ y = x ^ (a y)".into(),
        pass: 0,
        total: 0,
    };
    let mut c4 = CheckLine {
        name: "[(C^{-1}+a)x] ^ y - pi(x ^ (C+a)y) = (C^{-1}-pi)(x ^ C(y))".into(),
        pass: 0,
        total: 0,
    };

    for _ in 0..samples {
        let x = random_form(k, &mut rng, j, 2, 2);
        let y = random_closed_form(k, &mut rng, &z_s, 2, 2);
        let cy = cartier_with(k, &b_s, &y)?;

        let lhs = inverse_cartier_with(k, &b_top, &wedge(k, &x, &cy));
        let icx = inverse_cartier_with(k, &b_j, &x);
        let rhs = form_class_with(k, &b_top, &wedge(k, &icx.rep, &y));
        c1.total += 1;
        if lhs == rhs {
            c1.pass += 1;
        }

        let lhs = form_class_with(k, &b_top, &wedge(k, &x, &y));
        let pix = form_class_with(k, &b_j, &x);
        let rhs = form_class_with(k, &b_top, &wedge(k, &pix.rep, &y));
        c2.total += 1;
        if lhs == rhs {
            c2.pass += 1;
        }

        let lhs = wedge(k, &x.scale(k, a), &y);
        let rhs = wedge(k, &x, &y.scale(k, a));
        c3.total += 1;
        if lhs == rhs {
            c3.pass += 1;
        }

        // row compatibility with explicit witness xi = x ^ C(y)
        let xi = wedge(k, &x, &cy);
        let row_left = {
            let img = x.frobenius_coeffs(k).add(k, &x.scale(k, a));
            let cls = form_class_with(k, &b_j, &img);
            form_class_with(k, &b_top, &wedge(k, &cls.rep, &y))
        };
        let row_right = {
            let c_plus_a = cy.add(k, &y.scale(k, a));
            form_class_with(k, &b_top, &wedge(k, &x, &c_plus_a))
        };
        let delta = row_left.sub(k, &b_top, &row_right);
        let witness_delta = inverse_cartier_with(k, &b_top, &xi)
            .sub(k, &b_top, &form_class_with(k, &b_top, &xi));
        c4.total += 1;
        if delta == witness_delta {
            c4.pass += 1;
        }
    }
    Ok(DiagramReport {
        checks: vec![c1, c2, c3, c4],
    })
}

// --- graded-piece pairing constructors ---

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradedCase {
    A,
    B,
    C,
    D,
    E,
}

impl GradedCase {
    pub fn parse(s: &str) -> Option<GradedCase> {
        match s {
            "a" => Some(GradedCase::A),
            "b" => Some(GradedCase::B),
            "c" => Some(GradedCase::C),
            "d" => Some(GradedCase::D),
            "e" => Some(GradedCase::E),
            _ => None,
        }
    }
}

/// The evaluation rule of one graded piece of the Kato filtration pairing:
/// indices satisfy `r + q = d + 1` with the target `H_p^d` of the residue
/// field `k`.
#[derive(Debug, Clone)]
pub struct GradedPiecePairing {
    pub case: GradedCase,
    pub residue_field: PBasisField,
    pub r: usize,
    pub q: usize,
    pub a: Option<KElem>,
    pub left_desc: String,
    pub right_desc: String,
}

pub fn graded_piece(
    k: &PBasisField,
    case: GradedCase,
    r: usize,
    q: usize,
    a: Option<KElem>,
) -> Result<GradedPiecePairing, DualityError> {
    let d = r + q; // r + q = d + 1 with d the local-field dimension
    if r == 0 || q == 0 {
        return Err(DualityError::BadCaseParams("need r, q >= 1".into()));
    }
    let _ = d;
    if matches!(case, GradedCase::D) && a.as_ref().map(|x| x.is_zero()).unwrap_or(true) {
        return Err(DualityError::BadCaseParams(
            "case d requires a nonzero a".into(),
        ));
    }
    let second = |r: usize| -> String {
        if r >= 2 {
            format!("Omega^{}", r - 2)
        } else {
            "0".into()
        }
    };
    let (left_desc, right_desc) = match case {
        GradedCase::A => (
            format!("K_{r}^M(k)/p + K_{}^M(k)/p", r - 1),
            format!("H_p^{}(k) + H_p^{q}(k)", q - 1),
        ),
        GradedCase::B => (format!("Omega^{}(k)", r - 1), format!("Omega^{}(k)", q - 1)),
        GradedCase::C => (
            format!("Omega^{}/Z^{} + {}/Z", r - 1, r - 1, second(r)),
            format!("B^{} + B^{q}", q - 1),
        ),
        GradedCase::D => (
            format!("Omega^{}/D_a + {}/D_a", r - 1, second(r)),
            format!("nu_{} + nu_{q}", q - 1),
        ),
        GradedCase::E => ("0".into(), "0".into()),
    };
    Ok(GradedPiecePairing {
        case,
        residue_field: k.clone(),
        r,
        q,
        a,
        left_desc,
        right_desc,
    })
}

impl GradedPiecePairing {
    /// Case (b) evaluation: `(w, v) -> lambda_k(w ^ v)` on
    /// `Omega^{r-1} x Omega^{q-1}`.
    pub fn eval_b(&self, w: &DiffForm, v: &DiffForm) -> Result<HpClass, DualityError> {
        let k = &self.residue_field;
        if w.degree() != self.r - 1 || v.degree() != self.q - 1 {
            return Err(DualityError::BadCaseParams("degree mismatch".into()));
        }
        Ok(hp_class(k, &wedge(k, w, v)))
    }

    /// Cases (c) and (d): component-sum rule
    /// `((w, w'), (v, v')) -> lambda_k(w ^ v + w' ^ v')`.
    pub fn eval_pair(
        &self,
        w: &DiffForm,
        w2: &DiffForm,
        v: &DiffForm,
        v2: &DiffForm,
    ) -> Result<HpClass, DualityError> {
        let k = &self.residue_field;
        let sum = wedge(k, w, v).add(k, &wedge(k, w2, v2));
        Ok(hp_class(k, &sum))
    }

    /// Case (a) at the bottom of the tower (`k = F_q`, `(r, q) = (1, 1)`):
    /// the pairing `Z/p x F_q/wp -> Z/p`, built by full enumeration.
    pub fn case_a_bottom(&self) -> Result<CaseABottom, DualityError> {
        let k = &self.residue_field;
        if k.d() != 0 {
            return Err(DualityError::BadCaseParams(
                "bottom case needs a finite residue field".into(),
            ));
        }
        if !matches!(self.case, GradedCase::A) {
            return Err(DualityError::BadCaseParams("not case a".into()));
        }
        let fq = k.fq();
        let p = fq.p() as i128;
        // enumerate wp = x^p - x and the trace classes
        let mut image = std::collections::BTreeSet::new();
        for x in fq.enumerate() {
            image.insert(fq.sub(&fq.frobenius(&x), &x));
        }
        let mut traces_seen = std::collections::BTreeSet::new();
        for y in fq.enumerate() {
            traces_seen.insert(fq.trace(&y));
        }
        let quotient_order = fq.q() / image.len() as u64;
        // the pairing Z/p x (F_q / wp) -> Z/p via (n, y) -> n * Tr(y) / p
        let zp = FinAb::cyclic(p);
        let vals = vec![vec![QZ::new(1, p)]];
        let pairing = FinPairing::new(zp.clone(), zp, vals).expect("valid pairing");
        Ok(CaseABottom {
            pairing,
            wp_image_size: image.len() as u64,
            quotient_order,
            trace_surjective: traces_seen.len() as u64 == fq.p(),
        })
    }
}

/// Fully enumerated bottom-of-tower case (a) data.
#[derive(Debug, Clone)]
pub struct CaseABottom {
    pub pairing: FinPairing,
    pub wp_image_size: u64,
    pub quotient_order: u64,
    pub trace_surjective: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derham::binomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gram_piphi1_p2_d1_r0() {
        let k = PBasisField::rational(2, 1).unwrap();
        let g = gram(&k, GramKind::PiPhi1, 0).unwrap();
        // bases {1, t} x {dt/t, t dt/t}: diag(1, t) in roots, diag(1, t^2) in values
        assert_eq!(g.entries.len(), 2);
        assert_eq!(g.entries[0][0], k.one());
        assert!(g.entries[0][1].is_zero());
        assert!(g.entries[1][0].is_zero());
        assert_eq!(g.entries[1][1], k.var(0));
        let cert = certify(&k, &g);
        assert!(cert.perfect);
    }

    #[test]
    fn gram_phi2_phi3_sizes_p2_d1() {
        let k = PBasisField::rational(2, 1).unwrap();
        let g2 = gram(&k, GramKind::Phi2, 1).unwrap();
        assert_eq!((g2.entries.len(), g2.entries[0].len()), (2, 2));
        assert!(certify(&k, &g2).perfect);
        let g3 = gram(&k, GramKind::Phi3, 0).unwrap();
        assert_eq!((g3.entries.len(), g3.entries[0].len()), (1, 1));
        assert!(!g3.entries[0][0].is_zero());
        assert!(certify(&k, &g3).perfect);
    }

    #[test]
    fn gram_perfect_on_grid() {
        for (q, d) in [(2u64, 1usize), (3, 1), (2, 2)] {
            let k = PBasisField::rational(q, d).unwrap();
            for r in 0..=d {
                let pd = (q as usize).pow(d as u32);
                let g1 = gram(&k, GramKind::Phi1, r).unwrap();
                let c1 = certify(&k, &g1);
                assert!(c1.perfect, "phi1 {q} {d} {r}: {c1:?}");
                assert_eq!(c1.rows, binomial(d, r));
                let gp = gram(&k, GramKind::PiPhi1, r).unwrap();
                let cp = certify(&k, &gp);
                assert!(cp.perfect, "piphi1 {q} {d} {r}: {cp:?}");
                assert_eq!(cp.rows, pd * binomial(d, r));
                let g2 = gram(&k, GramKind::Phi2, r).unwrap();
                let c2 = certify(&k, &g2);
                assert!(c2.perfect, "phi2 {q} {d} {r}: {c2:?}");
                let g3 = gram(&k, GramKind::Phi3, r).unwrap();
                let c3 = certify(&k, &g3);
                assert!(c3.perfect, "phi3 {q} {d} {r}: {c3:?}");
            }
        }
    }

    #[test]
    fn certify_edge_cases() {
        let k = PBasisField::rational(2, 1).unwrap();
        let ident = GramMatrix {
            which: GramKind::PiPhi1,
            row_labels: vec!["1".into(), "2".into()],
            col_labels: vec!["1".into(), "2".into()],
            entries: vec![vec![k.one(), k.zero()], vec![k.zero(), k.one()]],
            target: "test".into(),
        };
        assert!(certify(&k, &ident).perfect);
        let zero = GramMatrix {
            which: GramKind::PiPhi1,
            row_labels: vec!["1".into()],
            col_labels: vec!["1".into()],
            entries: vec![vec![k.zero()]],
            target: "test".into(),
        };
        let c = certify(&k, &zero);
        assert!(!c.left_nondeg && !c.right_nondeg && !c.perfect);
        // diag(1, t) roots = diag(1, t^2) values: perfect
        let diag = GramMatrix {
            which: GramKind::PiPhi1,
            row_labels: vec!["1".into(), "2".into()],
            col_labels: vec!["1".into(), "2".into()],
            entries: vec![vec![k.one(), k.zero()], vec![k.zero(), k.var(0)]],
            target: "test".into(),
        };
        assert!(certify(&k, &diag).perfect);
    }

    #[test]
    fn prop56_examples() {
        let k = PBasisField::rational(2, 1).unwrap();
        // 1x1 identity
        let spec = LinearPairingSpec {
            matrix: vec![vec![k.one()]],
        };
        let rep = joint_family_check(&k, &spec);
        assert!(rep.joint_nondeg_left && rep.joint_nondeg_right);
        assert!(rep.left_kernels_match && rep.right_kernels_match);
        // 2x2 identity
        let spec = LinearPairingSpec {
            matrix: vec![vec![k.one(), k.zero()], vec![k.zero(), k.one()]],
        };
        let rep = joint_family_check(&k, &spec);
        assert!(rep.joint_nondeg_left && rep.joint_nondeg_right);
        // planted zero row
        let spec = LinearPairingSpec {
            matrix: vec![vec![k.zero(), k.zero()], vec![k.var(0), k.one()]],
        };
        let rep = joint_family_check(&k, &spec);
        assert_eq!(rep.left_kernel_dim_k, 1);
        assert_eq!(rep.joint_left_kernel_dim_kp, 2); // p^d * 1
        assert!(rep.left_kernels_match && rep.right_kernels_match);
        assert!(!rep.joint_nondeg_left);
    }

    #[test]
    fn prop57_identities_hold() {
        let k = PBasisField::rational(3, 1).unwrap();
        let rep = cartier_wedge_diagram_check(&k, 1, 20, 7).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        let k2 = PBasisField::rational(2, 2).unwrap();
        for r in 0..=2 {
            let rep = cartier_wedge_diagram_check(&k2, r, 10, 11).unwrap();
            assert!(rep.all_pass(), "r = {r}: {rep:?}");
        }
    }

    #[test]
    fn nu_and_d_a_checks() {
        let k = PBasisField::rational(2, 1).unwrap();
        // v = 0 is in nu
        assert!(nu_membership(&k, &DiffForm::zero(0), &k.one()).unwrap());
        // xi = 0 certifies anything in B^j
        let t = k.var(0);
        let dt = DiffForm::monomial_form(&k, 1, t);
        assert!(d_a_witness_check(&k, &DiffForm::zero(1), &dt, &k.one()).unwrap());
        // over F_4 (d = 0, j = 0): nu_0(1, F_4) = {x : x^(1/2) = x} = F_2
        let k4 = PBasisField::rational(4, 0).unwrap();
        let mut members = 0;
        for x in k4.fq().enumerate() {
            let v = DiffForm::scalar(k4.from_fq(x));
            if nu_membership(&k4, &v, &k4.one()).unwrap() {
                members += 1;
            }
        }
        assert_eq!(members, 2);
    }

    #[test]
    fn case_d_diagram_holds() {
        let k = PBasisField::rational(2, 1).unwrap();
        let rep = ramified_case_diagram_check(&k, 1, &k.one(), 15, 13).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        let k3 = PBasisField::rational(3, 1).unwrap();
        let a = k3.var(0);
        let rep = ramified_case_diagram_check(&k3, 0, &a, 10, 17).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert!(ramified_case_diagram_check(&k3, 0, &k3.zero(), 1, 1).is_err());
    }

    #[test]
    fn graded_case_a_bottom() {
        for q in [2u64, 3, 4] {
            let k = PBasisField::rational(q, 0).unwrap();
            let gp = graded_piece(&k, GradedCase::A, 1, 1, None).unwrap();
            let bottom = gp.case_a_bottom().unwrap();
            let p = k.p();
            assert_eq!(bottom.quotient_order, p);
            assert_eq!(bottom.wp_image_size, q / p);
            assert!(bottom.trace_surjective);
            let an = bottom.pairing.analysis();
            assert!(an.perfect);
        }
    }

    #[test]
    fn graded_case_b_gram() {
        // case b over k = F_2(u): lambda_k(w ^ v) on Omega^0 x Omega^0
        let k = PBasisField::new(crate::fq::Fq::new(2).unwrap(), vec!["u".into()]).unwrap();
        let gp = graded_piece(&k, GradedCase::B, 1, 1, None).unwrap();
        let w = DiffForm::scalar(k.one());
        let v = DiffForm::scalar(k.var(0));
        let cls = gp.eval_b(&w, &v).unwrap();
        // representative of lambda(u * nothing)? w ^ v is the scalar u: a
        // degree-0 form; H_p^1(F_2(u)) class of u
        match cls {
            HpClass::Coset { rep } => assert_eq!(rep.degree, 0),
            _ => panic!("expected coset class"),
        }
        // case e: zero-dimensional sides
        let gp = graded_piece(&k, GradedCase::E, 1, 1, None).unwrap();
        assert_eq!(gp.left_desc, "0");
        // bad params
        assert!(graded_piece(&k, GradedCase::D, 1, 1, None).is_err());
        assert!(graded_piece(&k, GradedCase::B, 0, 2, None).is_err());
    }

    #[test]
    fn bilinearity_transport() {
        // lambda((a w) ^ v) = lambda(w ^ (a v)) at representative level
        let k = PBasisField::rational(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let b_top = subspace_b(&k, 2).unwrap();
        for _ in 0..10 {
            let a = k.random_element(&mut rng, 2, 2);
            let w = random_form(&k, &mut rng, 1, 2, 2);
            let v = random_form(&k, &mut rng, 1, 2, 2);
            let lhs = form_class_with(&k, &b_top, &wedge(&k, &w.scale(&k, &a), &v));
            let rhs = form_class_with(&k, &b_top, &wedge(&k, &w, &v.scale(&k, &a)));
            assert_eq!(lhs, rhs);
        }
    }
}
