//! Cohomology of finite groups with coefficients in finite modules:
//! inhomogeneous cochains, cup products, restriction and transfer, induced
//! modules with the augmentation/norm sequences, Shapiro maps, and the
//! trace-theory pairing harness.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::finab::lattice::{self, Mat};
use crate::finab::{moduli_sub_quotient, El, FinAb, FinPairing, SubQuotient, QZ};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GcohError {
    #[error("multiplication table is not a group")]
    BadGroup,
    #[error("action matrices do not define a module")]
    BadModule,
    #[error("subset is not a subgroup")]
    NotSubgroup,
    #[error("cost {cost} exceeds budget {budget} (set CHARP_BUDGET to raise)")]
    BudgetExceeded { cost: i128, budget: i128 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("trace character is not well defined")]
    BadTrace,
}

/// Cost guard for cochain computations; `CHARP_BUDGET` overrides the default.
pub fn default_budget() -> i128 {
    std::env::var("CHARP_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000_000)
}

// --- finite groups ---

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinGroup {
    pub n: usize,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<usize>,
}

impl FinGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<FinGroup, GcohError> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return Err(GcohError::BadGroup);
        }
        if table
            .iter()
            .flatten()
            .any(|&x| x >= n)
        {
            return Err(GcohError::BadGroup);
        }
        // identity
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(GcohError::BadGroup)?;
        // inverses
        let mut inverse = vec![0; n];
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or(GcohError::BadGroup)?;
            inverse[g] = inv;
        }
        // associativity
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GcohError::BadGroup);
                    }
                }
            }
        }
        Ok(FinGroup {
            n,
            table,
            identity,
            inverse,
        })
    }

    pub fn cyclic(n: usize) -> FinGroup {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FinGroup::from_table(table).expect("cyclic group")
    }

    /// The symmetric group on three letters; elements are the permutations of
    /// `{0,1,2}` in lexicographic one-line order.
    pub fn s3() -> FinGroup {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let compose = |a: &[usize; 3], b: &[usize; 3]| -> [usize; 3] {
            // (a . b)(x) = a(b(x))
            [a[b[0]], a[b[1]], a[b[2]]]
        };
        let idx = |p: &[usize; 3]| perms.iter().position(|q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx(&compose(a, b))).collect())
            .collect();
        FinGroup::from_table(table).expect("S3")
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// The alternating subgroup of `s3()` (the 3-cycles and identity).
    pub fn a3_in_s3() -> Vec<usize> {
        vec![0, 3, 4]
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        if !elems.contains(&self.identity) {
            return false;
        }
        elems.iter().all(|&a| {
            elems.contains(&self.inv(a)) && elems.iter().all(|&b| elems.contains(&self.mul(a, b)))
        })
    }

    /// JSON record: the multiplication table.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "order": self.n, "table": self.table })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<FinGroup, GcohError> {
        let table = v["table"]
            .as_array()
            .ok_or(GcohError::BadGroup)?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or(GcohError::BadGroup)?
                    .iter()
                    .map(|x| x.as_u64().map(|n| n as usize).ok_or(GcohError::BadGroup))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        FinGroup::from_table(table)
    }
}

/// A subgroup with re-indexing and left-coset representatives
/// (smallest-index rule).
#[derive(Debug, Clone)]
pub struct SubgroupG {
    pub elems: Vec<usize>,
    pub group: FinGroup,
    /// Coset representative of each ambient element (for g H).
    pub coset_rep: Vec<usize>,
    pub reps: Vec<usize>,
}

impl SubgroupG {
    pub fn new(g: &FinGroup, mut elems: Vec<usize>) -> Result<SubgroupG, GcohError> {
        elems.sort_unstable();
        elems.dedup();
        if !g.is_subgroup(&elems) {
            return Err(GcohError::NotSubgroup);
        }
        let table = elems
            .iter()
            .map(|&a| {
                elems
                    .iter()
                    .map(|&b| {
                        elems
                            .iter()
                            .position(|&c| c == g.mul(a, b))
                            .expect("closed")
                    })
                    .collect()
            })
            .collect();
        let group = FinGroup::from_table(table)?;
        // left cosets gH with smallest-element representatives
        let mut coset_rep = vec![usize::MAX; g.n];
        let mut reps = Vec::new();
        for x in 0..g.n {
            if coset_rep[x] != usize::MAX {
                continue;
            }
            let members: Vec<usize> = elems.iter().map(|&h| g.mul(x, h)).collect();
            let rep = *members.iter().min().expect("nonempty");
            for &m in &members {
                coset_rep[m] = rep;
            }
            reps.push(rep);
        }
        reps.sort_unstable();
        Ok(SubgroupG {
            elems,
            group,
            coset_rep,
            reps,
        })
    }

    pub fn index_of(&self, ambient: usize) -> Option<usize> {
        self.elems.iter().position(|&e| e == ambient)
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }
}

// --- G-modules ---

/// A finite module with a `G`-action by automorphisms.
#[derive(Debug, Clone)]
pub struct GModule {
    pub g: FinGroup,
    pub m: FinAb,
    /// `action[g]` is the matrix of the action of `g` on generators.
    pub action: Vec<Mat>,
}

impl GModule {
    pub fn new(g: FinGroup, m: FinAb, action: Vec<Mat>) -> Result<GModule, GcohError> {
        if action.len() != g.n {
            return Err(GcohError::Shape("one matrix per group element".into()));
        }
        let module = GModule { g, m, action };
        module.validate()?;
        Ok(module)
    }

    fn validate(&self) -> Result<(), GcohError> {
        let g = &self.g;
        let rank = self.m.rank();
        for gm in &self.action {
            let (r, c) = lattice::shape(gm);
            if rank > 0 && (r != rank || c != rank) {
                return Err(GcohError::Shape("action matrix size".into()));
            }
        }
        let id = &self.action[g.identity];
        for i in 0..rank {
            for j in 0..rank {
                let expect = i128::from(i == j);
                if (id[i][j] - expect).rem_euclid(self.m.factors()[i]) != 0 {
                    return Err(GcohError::BadModule);
                }
            }
        }
        // homomorphism + automorphism properties on the finite group
        for a in 0..g.n {
            // rho(a) rho(a^{-1}) = id
            let prod = self.compose_action(a, g.inv(a));
            if !self.is_identity_matrix(&prod) {
                return Err(GcohError::BadModule);
            }
            for b in 0..g.n {
                let prod = self.compose_action(a, b);
                let direct = &self.action[g.mul(a, b)];
                if !self.same_matrix(&prod, direct) {
                    return Err(GcohError::BadModule);
                }
            }
        }
        Ok(())
    }

    fn compose_action(&self, a: usize, b: usize) -> Mat {
        if self.m.rank() == 0 {
            return vec![];
        }
        lattice::mat_mul(&self.action[a], &self.action[b])
    }

    fn is_identity_matrix(&self, m: &Mat) -> bool {
        let rank = self.m.rank();
        (0..rank).all(|i| {
            (0..rank).all(|j| {
                let expect = i128::from(i == j);
                (m[i][j] - expect).rem_euclid(self.m.factors()[i]) == 0
            })
        })
    }

    fn same_matrix(&self, a: &Mat, b: &Mat) -> bool {
        let rank = self.m.rank();
        (0..rank)
            .all(|i| (0..rank).all(|j| (a[i][j] - b[i][j]).rem_euclid(self.m.factors()[i]) == 0))
    }

    pub fn trivial(g: FinGroup, m: FinAb) -> GModule {
        let action = (0..g.n).map(|_| lattice::identity(m.rank())).collect();
        GModule { g, m, action }
    }

    pub fn act(&self, g: usize, x: &El) -> El {
        if self.m.rank() == 0 {
            return self.m.zero();
        }
        self.m.reduce(&lattice::mat_vec(&self.action[g], &x.0))
    }

    /// Restrict the action to a subgroup (same underlying group of values).
    pub fn restrict(&self, h: &SubgroupG) -> GModule {
        GModule {
            g: h.group.clone(),
            m: self.m.clone(),
            action: h.elems.iter().map(|&e| self.action[e].clone()).collect(),
        }
    }

    /// JSON record: invariant factors plus per-element action matrices.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "group": self.g.to_json(),
            "invariant_factors": self.m.factors(),
            "action": self.action,
        })
    }
}

// --- cochains ---

/// An inhomogeneous cochain `G^degree -> M` as a dense table; the tuple
/// `(g_1..g_n)` is indexed by `g_1 + g_2 |G| + ... + g_n |G|^{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<El>,
}

pub fn tuple_count(g: &FinGroup, degree: usize) -> usize {
    g.n.pow(degree as u32)
}

pub fn tuple_index(g: &FinGroup, tuple: &[usize]) -> usize {
    let mut idx = 0usize;
    for &x in tuple.iter().rev() {
        idx = idx * g.n + x;
    }
    idx
}

pub fn tuple_at(g: &FinGroup, degree: usize, mut idx: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(degree);
    for _ in 0..degree {
        out.push(idx % g.n);
        idx /= g.n;
    }
    out
}

impl Cochain {
    pub fn zero(module: &GModule, degree: usize) -> Cochain {
        Cochain {
            degree,
            values: vec![module.m.zero(); tuple_count(&module.g, degree)],
        }
    }

    pub fn get(&self, g: &FinGroup, tuple: &[usize]) -> &El {
        &self.values[tuple_index(g, tuple)]
    }

    /// Flatten into ambient coordinates (moduli = module factors repeated).
    pub fn flatten(&self) -> Vec<i128> {
        self.values.iter().flat_map(|e| e.0.iter().copied()).collect()
    }

    pub fn unflatten(module: &GModule, degree: usize, flat: &[i128]) -> Cochain {
        let rank = module.m.rank();
        let values = flat
            .chunks(rank.max(1))
            .take(tuple_count(&module.g, degree))
            .map(|c| {
                if rank == 0 {
                    module.m.zero()
                } else {
                    module.m.reduce(c)
                }
            })
            .collect();
        Cochain { degree, values }
    }
}

/// The inhomogeneous coboundary
/// `(df)(g_1..g_{n+1}) = g_1 f(g_2..) + sum (-1)^i f(.., g_i g_{i+1}, ..)
///  + (-1)^{n+1} f(g_1..g_n)`.
pub fn coboundary(module: &GModule, f: &Cochain) -> Cochain {
    let g = &module.g;
    let n = f.degree;
    let mut out = Cochain::zero(module, n + 1);
    for idx in 0..tuple_count(g, n + 1) {
        let tuple = tuple_at(g, n + 1, idx);
        let mut acc = module.act(tuple[0], f.get(g, &tuple[1..]));
        for i in 1..=n {
            let mut contracted = Vec::with_capacity(n);
            contracted.extend_from_slice(&tuple[..i - 1]);
            contracted.push(g.mul(tuple[i - 1], tuple[i]));
            contracted.extend_from_slice(&tuple[i + 1..]);
            let sign = if i % 2 == 0 { 1 } else { -1 };
            acc = module
                .m
                .add(&acc, &module.m.scale(sign, f.get(g, &contracted)));
        }
        let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
        acc = module
            .m
            .add(&acc, &module.m.scale(sign, f.get(g, &tuple[..n])));
        out.values[idx] = acc;
    }
    out
}

/// The matrix of the coboundary on flattened coordinates.
fn coboundary_matrix(module: &GModule, degree: usize) -> Mat {
    let rank = module.m.rank();
    let rows = tuple_count(&module.g, degree + 1) * rank;
    let cols = tuple_count(&module.g, degree) * rank;
    let mut out = lattice::zeros(rows, cols);
    for t in 0..tuple_count(&module.g, degree) {
        for l in 0..rank {
            let mut f = Cochain::zero(module, degree);
            f.values[t] = module.m.gen(l);
            let df = coboundary(module, &f);
            let col = t * rank + l;
            for (i, v) in df.flatten().iter().enumerate() {
                out[i][col] = *v;
            }
        }
    }
    out
}

/// Cohomology data for `H^n(G, M)`.
pub struct Cohomology {
    pub module: GModule,
    pub degree: usize,
    pub group: FinAb,
    pub reps: Vec<Cochain>,
    sq: SubQuotient,
}

impl Cohomology {
    /// The class of a cocycle.
    pub fn class_of(&self, f: &Cochain) -> El {
        self.sq.class_of(&El(self.reduce_flat(f)))
    }

    fn reduce_flat(&self, f: &Cochain) -> Vec<i128> {
        f.flatten()
    }

    pub fn is_cocycle(&self, f: &Cochain) -> bool {
        let df = coboundary(&self.module, f);
        df.values.iter().all(|v| self.module.m.is_zero(v))
    }
}

/// `H^n(G, M) = ker d_n / im d_{n-1}`, via integer lattices.
pub fn cohomology(module: &GModule, n: usize, budget: i128) -> Result<Cohomology, GcohError> {
    let g = &module.g;
    let cost = (g.n as i128).pow(n as u32 + 1) * module.m.order();
    if cost > budget {
        return Err(GcohError::BudgetExceeded { cost, budget });
    }
    let rank = module.m.rank();
    let size_n = tuple_count(g, n) * rank;
    let moduli: Vec<i128> = module
        .m
        .factors()
        .iter()
        .cycle()
        .take(size_n)
        .copied()
        .collect();

    let d_n = coboundary_matrix(module, n);
    let z_cols = {
        let size_next = tuple_count(g, n + 1) * rank;
        let next_moduli: Vec<i128> = module
            .m
            .factors()
            .iter()
            .cycle()
            .take(size_next)
            .copied()
            .collect();
        if size_next == 0 {
            lattice::identity(size_n)
        } else {
            lattice::preimage_lattice_mod(&d_n, &next_moduli)
        }
    };
    let b_cols = if n == 0 {
        lattice::zeros(size_n, 0)
    } else {
        coboundary_matrix(module, n - 1)
    };
    let sq = moduli_sub_quotient(&moduli, &z_cols, &b_cols);
    let reps = sq
        .gens_in_ambient
        .iter()
        .map(|e| Cochain::unflatten(module, n, &e.0))
        .collect();
    Ok(Cohomology {
        module: module.clone(),
        degree: n,
        group: sq.group.clone(),
        reps,
        sq,
    })
}

// --- tensor products and cup products ---

/// `M (x) N` with the diagonal action and the bilinear structure map.
#[derive(Debug, Clone)]
pub struct GTensor {
    pub t: GModule,
    proj: Mat,
    lift: Mat,
    ranks: (usize, usize),
}

pub fn tensor(ma: &GModule, mb: &GModule) -> GTensor {
    assert_eq!(ma.g, mb.g, "tensor needs a common group");
    let (ra, rb) = (ma.m.rank(), mb.m.rank());
    let mut moduli = Vec::with_capacity(ra * rb);
    for i in 0..ra {
        for j in 0..rb {
            let g = gcd_i128(ma.m.factors()[i], mb.m.factors()[j]);
            moduli.push(g);
        }
    }
    let pres = FinAb::from_moduli(&moduli);
    let t_group = pres.group.clone();
    // transported diagonal action
    let action: Vec<Mat> = (0..ma.g.n)
        .map(|g| {
            if t_group.rank() == 0 {
                return vec![];
            }
            let mut raw = lattice::zeros(ra * rb, ra * rb);
            for i in 0..ra {
                for j in 0..rb {
                    for i2 in 0..ra {
                        for j2 in 0..rb {
                            raw[i2 * rb + j2][i * rb + j] =
                                ma.action[g][i2][i] * mb.action[g][j2][j];
                        }
                    }
                }
            }
            let lifted = lattice::mat_mul(&raw, &pres.lift);
            lattice::mat_mul(&pres.proj, &lifted)
        })
        .collect();
    let t = GModule {
        g: ma.g.clone(),
        m: t_group,
        action,
    };
    GTensor {
        t,
        proj: pres.proj,
        lift: pres.lift,
        ranks: (ra, rb),
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl GTensor {
    pub fn pair(&self, x: &El, y: &El) -> El {
        let (ra, rb) = self.ranks;
        if self.t.m.rank() == 0 {
            return self.t.m.zero();
        }
        let mut raw = vec![0i128; ra * rb];
        for i in 0..ra {
            for j in 0..rb {
                raw[i * rb + j] = x.0[i] * y.0[j];
            }
        }
        self.t.m.reduce(&lattice::mat_vec(&self.proj, &raw))
    }

    /// The transported swap `M (x) N -> N (x) M`, as a matrix on generators.
    pub fn swap_into(&self, other: &GTensor) -> Mat {
        let (ra, rb) = self.ranks;
        assert_eq!(other.ranks, (rb, ra));
        if self.t.m.rank() == 0 || other.t.m.rank() == 0 {
            return lattice::zeros(other.t.m.rank(), self.t.m.rank());
        }
        let mut swap = lattice::zeros(rb * ra, ra * rb);
        for i in 0..ra {
            for j in 0..rb {
                swap[j * ra + i][i * rb + j] = 1;
            }
        }
        let lifted = lattice::mat_mul(&swap, &self.lift);
        lattice::mat_mul(&other.proj, &lifted)
    }
}

/// Cochain-level cup product:
/// `(f u g)(g_1..g_{i+j}) = f(g_1..g_i) (x) (g_1..g_i) . g(g_{i+1}..)`.
pub fn cup(
    ma: &GModule,
    mb: &GModule,
    tens: &GTensor,
    f: &Cochain,
    h: &Cochain,
) -> Cochain {
    let g = &ma.g;
    let (i, j) = (f.degree, h.degree);
    let mut out = Cochain::zero(&tens.t, i + j);
    for idx in 0..tuple_count(g, i + j) {
        let tuple = tuple_at(g, i + j, idx);
        let left = f.get(g, &tuple[..i]);
        let mut prefix = g.identity;
        for &x in &tuple[..i] {
            prefix = g.mul(prefix, x);
        }
        let right = mb.act(prefix, h.get(g, &tuple[i..]));
        out.values[idx] = tens.pair(left, &right);
    }
    out
}

// --- restriction and transfer ---

/// Restrict a cochain along a subgroup inclusion.
pub fn res_cochain(module: &GModule, h: &SubgroupG, f: &Cochain) -> Cochain {
    let rm = module.restrict(h);
    let n = f.degree;
    let mut out = Cochain::zero(&rm, n);
    for idx in 0..tuple_count(&rm.g, n) {
        let tuple = tuple_at(&rm.g, n, idx);
        let ambient: Vec<usize> = tuple.iter().map(|&x| h.elems[x]).collect();
        out.values[idx] = f.get(&module.g, &ambient).clone();
    }
    out
}

/// Transfer (corestriction) on cochains with the fixed smallest-index coset
/// representatives: `(cor f)(g_1..g_n) = sum_r t_0 . f(h_1, .., h_n)` where
/// `t_n = r`, `t_{i-1} = rep(g_i t_i)`, `h_i = t_{i-1}^{-1} g_i t_i`.
pub fn cores_cochain(module: &GModule, h: &SubgroupG, f: &Cochain) -> Cochain {
    let g = &module.g;
    let n = f.degree;
    let mut out = Cochain::zero(module, n);
    for idx in 0..tuple_count(g, n) {
        let tuple = tuple_at(g, n, idx);
        let mut acc = module.m.zero();
        for &r in &h.reps {
            let mut ts = vec![0usize; n + 1];
            ts[n] = r;
            for i in (1..=n).rev() {
                ts[i - 1] = h.coset_rep[g.mul(tuple[i - 1], ts[i])];
            }
            let hs: Vec<usize> = (1..=n)
                .map(|i| {
                    let x = g.mul(g.inv(ts[i - 1]), g.mul(tuple[i - 1], ts[i]));
                    h.index_of(x).expect("lies in the subgroup")
                })
                .collect();
            let val = f.get(&h.group, &hs);
            acc = module.m.add(&acc, &module.act(ts[0], val));
        }
        out.values[idx] = acc;
    }
    out
}

/// Class-level restriction `H^n(G, M) -> H^n(H, M)`.
pub fn res_classes(
    hg: &Cohomology,
    hh: &Cohomology,
    h: &SubgroupG,
) -> Result<Mat, GcohError> {
    let mut m = lattice::zeros(hh.group.rank(), hg.group.rank());
    for (col, rep) in hg.reps.iter().enumerate() {
        let restricted = res_cochain(&hg.module, h, rep);
        if !hh.is_cocycle(&restricted) {
            return Err(GcohError::Shape("restriction is not a cocycle".into()));
        }
        let cls = hh.class_of(&restricted);
        for i in 0..hh.group.rank() {
            m[i][col] = cls.0[i];
        }
    }
    Ok(m)
}

/// Class-level corestriction `H^n(H, M) -> H^n(G, M)`.
pub fn cores_classes(
    hh: &Cohomology,
    hg: &Cohomology,
    h: &SubgroupG,
) -> Result<Mat, GcohError> {
    let mut m = lattice::zeros(hg.group.rank(), hh.group.rank());
    for (col, rep) in hh.reps.iter().enumerate() {
        let transferred = cores_cochain(&hg.module, h, rep);
        if !hg.is_cocycle(&transferred) {
            return Err(GcohError::Shape("transfer is not a cocycle".into()));
        }
        let cls = hg.class_of(&transferred);
        for i in 0..hg.group.rank() {
            m[i][col] = cls.0[i];
        }
    }
    Ok(m)
}

// --- induced modules and Shapiro maps ---

/// `Z[G/H] (x) M` with the diagonal action, its structural `H`-maps, and the
/// augmentation/norm exact sequences.
pub struct InducedModule {
    pub module: GModule,
    /// `M -> Ind`, `m -> sum_sigma e_sigma (x) m` (the augmentation row).
    pub diag_in: Mat,
    /// `Ind -> M`, `e_sigma (x) m -> m` (the norm row).
    pub sum_out: Mat,
    /// H-equivariant projection to the `e_H` component.
    pub p1: Mat,
    /// H-equivariant inclusion `m -> e_H (x) m`.
    pub j1: Mat,
    proj: Mat,
    lift: Mat,
    raw_rank: usize,
}

pub fn induced_module(m: &GModule, h: &SubgroupG) -> InducedModule {
    let g = &m.g;
    let rank = m.m.rank();
    let cosets = &h.reps;
    let nc = cosets.len();
    let raw_rank = nc * rank;
    let mut moduli = Vec::with_capacity(raw_rank);
    for _ in 0..nc {
        moduli.extend_from_slice(m.m.factors());
    }
    let pres = FinAb::from_moduli(&moduli);
    let coset_pos = |rep: usize| cosets.iter().position(|&r| r == rep).expect("coset rep");
    // raw action: g . (e_sigma (x) x) = e_{g sigma} (x) g x
    let action: Vec<Mat> = (0..g.n)
        .map(|ge| {
            if pres.group.rank() == 0 {
                return vec![];
            }
            let mut raw = lattice::zeros(raw_rank, raw_rank);
            for (ci, &rep) in cosets.iter().enumerate() {
                let target = coset_pos(h.coset_rep[g.mul(ge, rep)]);
                for a in 0..rank {
                    for b in 0..rank {
                        raw[target * rank + a][ci * rank + b] = m.action[ge][a][b];
                    }
                }
            }
            lattice::mat_mul(&pres.proj, &lattice::mat_mul(&raw, &pres.lift))
        })
        .collect();
    let module = GModule {
        g: g.clone(),
        m: pres.group.clone(),
        action,
    };

    // raw structural maps, then transported
    let mut diag_raw = lattice::zeros(raw_rank, rank);
    for ci in 0..nc {
        for a in 0..rank {
            diag_raw[ci * rank + a][a] = 1;
        }
    }
    let mut sum_raw = lattice::zeros(rank, raw_rank);
    for ci in 0..nc {
        for a in 0..rank {
            sum_raw[a][ci * rank + a] = 1;
        }
    }
    let e_h = coset_pos(h.coset_rep[g.identity]);
    let mut p1_raw = lattice::zeros(rank, raw_rank);
    let mut j1_raw = lattice::zeros(raw_rank, rank);
    for a in 0..rank {
        p1_raw[a][e_h * rank + a] = 1;
        j1_raw[e_h * rank + a][a] = 1;
    }

    let diag_in = lattice::mat_mul(&pres.proj, &diag_raw);
    let sum_out = lattice::mat_mul(&sum_raw, &pres.lift);
    let p1 = lattice::mat_mul(&p1_raw, &pres.lift);
    let j1 = lattice::mat_mul(&pres.proj, &j1_raw);

    InducedModule {
        module,
        diag_in,
        sum_out,
        p1,
        j1,
        proj: pres.proj,
        lift: pres.lift,
        raw_rank,
    }
}

impl InducedModule {
    pub fn apply_p1(&self, m: &GModule, x: &El) -> El {
        if m.m.rank() == 0 {
            return m.m.zero();
        }
        m.m.reduce(&lattice::mat_vec(&self.p1, &x.0))
    }

    pub fn apply_j1(&self, x: &El) -> El {
        if self.module.m.rank() == 0 {
            return self.module.m.zero();
        }
        self.module.m.reduce(&lattice::mat_vec(&self.j1, &x.0))
    }

    pub fn raw_rank(&self) -> usize {
        self.raw_rank
    }

    pub fn lift_raw(&self, x: &El) -> Vec<i128> {
        lattice::mat_vec(&self.lift, &x.0)
    }

    pub fn project_raw(&self, v: &[i128]) -> El {
        self.module.m.reduce(&lattice::mat_vec(&self.proj, v))
    }
}

/// Exactness data for the two induced-module sequences
/// `0 -> M -> Ind -> X(x)M -> 0` and `0 -> X°(x)M -> Ind -> M -> 0`.
pub struct InducedSequences {
    pub x_tensor_m: FinAb,
    pub x_dual_tensor_m: FinAb,
    pub first_exact: bool,
    pub second_exact: bool,
    /// Invariant factors of `X (x) Z/e` with trivial H-action check (for
    /// normal H the restriction of X to H is free of rank index-1 over Z/e).
    pub x_restricted_trivial: Option<bool>,
}

pub fn induced_sequences(m: &GModule, h: &SubgroupG, ind: &InducedModule) -> InducedSequences {
    use crate::finab::{quotient, FinHom, Subgroup};
    let ind_group = &ind.module.m;
    let mg = &m.m;

    let diag_hom = FinHom::new(mg.clone(), ind_group.clone(), ind.diag_in.clone())
        .expect("diagonal map well defined");
    let sum_hom = FinHom::new(ind_group.clone(), mg.clone(), ind.sum_out.clone())
        .expect("norm map well defined");

    // first: 0 -> M -> Ind -> Ind/im -> 0
    let im_diag = diag_hom.image();
    let (x_tensor_m, qproj) = quotient(ind_group, &im_diag);
    let first_exact = diag_hom.kernel().order(mg) == 1
        && im_diag.same_subgroup(ind_group, &qproj.kernel());

    // second: 0 -> ker(sum) -> Ind -> M -> 0
    let ker_sum = sum_hom.kernel();
    let (x_dual_tensor_m, _) = ker_sum.structure(ind_group);
    let second_exact = sum_hom.image().same_subgroup(mg, &Subgroup::full(mg))
        && ker_sum.order(ind_group) * mg.order() == ind_group.order();

    // X restricted to H: when H is normal it acts trivially on the cosets,
    // and X (x) Z/e is free over Z/e of rank (index - 1).
    let x_restricted_trivial = {
        let normal = m.g.table.iter().enumerate().all(|(ge, _)| {
            h.elems
                .iter()
                .all(|&he| h.elems.contains(&m.g.mul(m.g.mul(ge, he), m.g.inv(ge))))
        });
        if normal && mg.rank() == 1 {
            let e = mg.exponent();
            let expect: Vec<i128> = vec![e; h.index() - 1];
            let trivial_action = h.elems.iter().all(|&he| {
                (0..x_tensor_m.rank()).all(|l| {
                    let gen = x_tensor_m.gen(l);
                    let lifted = qproj_preimage(&qproj, &gen);
                    qproj.apply(&ind.module.act(he, &lifted)) == gen
                })
            });
            Some(x_tensor_m.factors() == expect.as_slice() && trivial_action)
        } else {
            None
        }
    };

    InducedSequences {
        x_tensor_m,
        x_dual_tensor_m,
        first_exact,
        second_exact,
        x_restricted_trivial,
    }
}

/// A preimage of a quotient-group element (quotient projections are onto).
fn qproj_preimage(qproj: &crate::finab::FinHom, class: &El) -> El {
    // solve proj * x = class modulo the codomain relations
    let rank_dom = qproj.dom.rank();
    let rank_cod = qproj.cod.rank();
    if rank_cod == 0 {
        return qproj.dom.zero();
    }
    // stack [proj | diag(cod factors)] and solve
    let mut mat = lattice::zeros(rank_cod, rank_dom + rank_cod);
    for i in 0..rank_cod {
        for j in 0..rank_dom {
            mat[i][j] = qproj.m[i][j];
        }
        mat[i][rank_dom + i] = qproj.cod.factors()[i];
    }
    let sol = lattice::solve(&mat, &class.0).expect("projection is onto");
    qproj.dom.reduce(&sol[..rank_dom].to_vec())
}

/// Shapiro composites between `H^n(G, Ind M)` and `H^n(H, M)`.
pub struct ShapiroReport {
    pub forward_then_back_is_identity: bool,
    pub back_then_forward_is_identity: bool,
    pub group_g_side: FinAb,
    pub group_h_side: FinAb,
}

pub fn shapiro_check(
    m: &GModule,
    h: &SubgroupG,
    n: usize,
    budget: i128,
) -> Result<ShapiroReport, GcohError> {
    let ind = induced_module(m, h);
    let hg = cohomology(&ind.module, n, budget)?;
    let mh = m.restrict(h);
    let hh = cohomology(&mh, n, budget)?;
    let ind_h = ind.module.restrict(h);

    // forward: p1 . res : H^n(G, Ind) -> H^n(H, M)
    let forward = |rep: &Cochain| -> Cochain {
        let restricted = res_cochain(&ind.module, h, rep);
        let mut out = Cochain::zero(&mh, n);
        for (idx, v) in restricted.values.iter().enumerate() {
            out.values[idx] = ind.apply_p1(&mh, v);
        }
        out
    };
    // back: cores . j1 : H^n(H, M) -> H^n(G, Ind)
    let back = |rep: &Cochain| -> Cochain {
        let mut lifted = Cochain::zero(&ind_h, n);
        for (idx, v) in rep.values.iter().enumerate() {
            lifted.values[idx] = ind.apply_j1(v);
        }
        cores_cochain(&ind.module, h, &lifted)
    };

    let mut fb = true;
    for rep in &hh.reps {
        let roundtrip = forward(&back(rep));
        if !hh.is_cocycle(&roundtrip) {
            return Err(GcohError::Shape("shapiro roundtrip not a cocycle".into()));
        }
        if hh.class_of(&roundtrip) != hh.class_of(rep) {
            fb = false;
        }
    }
    let mut bf = true;
    for rep in &hg.reps {
        let roundtrip = back(&forward(rep));
        if !hg.is_cocycle(&roundtrip) {
            return Err(GcohError::Shape("shapiro roundtrip not a cocycle".into()));
        }
        if hg.class_of(&roundtrip) != hg.class_of(rep) {
            bf = false;
        }
    }
    Ok(ShapiroReport {
        forward_then_back_is_identity: fb,
        back_then_forward_is_identity: bf,
        group_g_side: hg.group,
        group_h_side: hh.group,
    })
}

// --- trace theories and hypercohomology pairings ---

/// A complex of G-modules concentrated in at most a few degrees.
#[derive(Debug, Clone)]
pub struct GComplex {
    pub lo: i32,
    pub modules: Vec<GModule>,
    /// Equivariant differentials `modules[i] -> modules[i+1]`.
    pub diffs: Vec<Mat>,
}

impl GComplex {
    pub fn concentrated(deg: i32, module: GModule) -> GComplex {
        GComplex {
            lo: deg,
            modules: vec![module],
            diffs: vec![],
        }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.modules.len() as i32 - 1
    }

    pub fn module(&self, deg: i32) -> Option<&GModule> {
        if deg < self.lo || deg > self.hi() {
            None
        } else {
            Some(&self.modules[(deg - self.lo) as usize])
        }
    }

    pub fn group_of(&self) -> &FinGroup {
        &self.modules[0].g
    }

    /// Shift with the differential sign `(-1)^s`.
    pub fn shift(&self, s: i32) -> GComplex {
        let sign: i128 = if s.rem_euclid(2) == 0 { 1 } else { -1 };
        GComplex {
            lo: self.lo - s,
            modules: self.modules.clone(),
            diffs: self
                .diffs
                .iter()
                .map(|d| d.iter().map(|r| r.iter().map(|&x| sign * x).collect()).collect())
                .collect(),
        }
    }
}

/// A pairing of complexes of G-modules into a single dualizing module `eta`
/// placed in degree `eta_deg`: components `phi^{b,b'} : M^b x Mv^{b'} -> eta`
/// for `b + b' = eta_deg`, with the anticommutation
/// `phi(d x, y) + (-1)^b phi(x, d y) = 0` on adjacent components.
#[derive(Debug, Clone)]
pub struct GChainPairing {
    pub m: GComplex,
    pub mv: GComplex,
    pub eta: GModule,
    pub eta_deg: i32,
    /// `comps[&(b, b')]`: generator value matrix into eta.
    pub comps: BTreeMap<(i32, i32), Vec<Vec<El>>>,
}

impl GChainPairing {
    pub fn eval(&self, b: i32, bp: i32, x: &El, y: &El) -> El {
        let mut acc = self.eta.m.zero();
        let vals = match self.comps.get(&(b, bp)) {
            None => return acc,
            Some(v) => v,
        };
        for (i, &xc) in x.0.iter().enumerate() {
            if xc == 0 {
                continue;
            }
            for (j, &yc) in y.0.iter().enumerate() {
                if yc == 0 {
                    continue;
                }
                acc = self.eta.m.add(&acc, &self.eta.m.scale(xc * yc, &vals[i][j]));
            }
        }
        acc
    }

    /// Equivariance and chain compatibility on generators.
    pub fn validate(&self) -> Result<(), GcohError> {
        let g = self.m.group_of();
        for ((b, bp), vals) in &self.comps {
            let ma = self.m.module(*b).ok_or(GcohError::Shape("left degree".into()))?;
            let mb = self
                .mv
                .module(*bp)
                .ok_or(GcohError::Shape("right degree".into()))?;
            if *b + *bp != self.eta_deg {
                return Err(GcohError::Shape("component off the diagonal".into()));
            }
            if vals.len() != ma.m.rank() || vals.iter().any(|r| r.len() != mb.m.rank()) {
                return Err(GcohError::Shape("component size".into()));
            }
            // equivariance: phi(g x, g y) = g phi(x, y)
            for ge in 0..g.n {
                for i in 0..ma.m.rank() {
                    for j in 0..mb.m.rank() {
                        let lhs = self.eval(
                            *b,
                            *bp,
                            &ma.act(ge, &ma.m.gen(i)),
                            &mb.act(ge, &mb.m.gen(j)),
                        );
                        let rhs = self
                            .eta
                            .act(ge, &self.eval(*b, *bp, &ma.m.gen(i), &mb.m.gen(j)));
                        if lhs != rhs {
                            return Err(GcohError::BadModule);
                        }
                    }
                }
            }
        }
        // anticompatibility across the differentials
        for b in self.m.lo..=self.m.hi() {
            for bp in self.mv.lo..=self.mv.hi() {
                if b + 1 + bp != self.eta_deg {
                    continue;
                }
                let ma = self.m.module(b).expect("degree in range");
                let sign: i128 = if b.rem_euclid(2) == 0 { 1 } else { -1 };
                let mb = match self.mv.module(bp) {
                    None => continue,
                    Some(x) => x,
                };
                for i in 0..ma.m.rank() {
                    for j in 0..mb.m.rank() {
                        let x = ma.m.gen(i);
                        let y = mb.m.gen(j);
                        let dx = if b < self.m.hi() {
                            let dmat = &self.m.diffs[(b - self.m.lo) as usize];
                            self.m
                                .module(b + 1)
                                .unwrap()
                                .m
                                .reduce(&lattice::mat_vec(dmat, &x.0))
                        } else {
                            continue;
                        };
                        let lhs = self.eval(b + 1, bp, &dx, &y);
                        let dy = if bp < self.mv.hi() {
                            let dmat = &self.mv.diffs[(bp - self.mv.lo) as usize];
                            self.mv
                                .module(bp + 1)
                                .unwrap()
                                .m
                                .reduce(&lattice::mat_vec(dmat, &y.0))
                        } else {
                            self.mv.module(bp).unwrap().m.zero()
                        };
                        let rhs = if bp < self.mv.hi() {
                            self.eval(b, bp + 1, &x, &dy)
                        } else {
                            self.eta.m.zero()
                        };
                        let total = self.eta.m.add(&lhs, &self.eta.m.scale(sign, &rhs));
                        if !self.eta.m.is_zero(&total) {
                            return Err(GcohError::Shape("pairing not chain".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `M#[s]`: shift both sides with the sign rule `(-1)^{bs}` on components.
    pub fn shift(&self, s: i32) -> GChainPairing {
        let mut comps = BTreeMap::new();
        for ((b0, bp0), vals) in &self.comps {
            let (b, bp) = (b0 - s, bp0 + s);
            let sign: i128 = if (b * s).rem_euclid(2) == 0 { 1 } else { -1 };
            let scaled = vals
                .iter()
                .map(|row| row.iter().map(|v| self.eta.m.scale(sign, v)).collect())
                .collect();
            comps.insert((b, bp), scaled);
        }
        GChainPairing {
            m: self.m.shift(s),
            mv: self.mv.shift(-s),
            eta: self.eta.clone(),
            eta_deg: self.eta_deg,
            comps,
        }
    }
}

/// Hypercohomology of a short G-complex via the total cochain complex
/// `T^s = (+)_{a+b=s} C^a(G, M^b)`, `D = d_G + (-1)^a d_M`.
pub struct HyperCohomology {
    pub degree: i32,
    pub group: FinAb,
    /// Representative total cocycles: per generator, components by module
    /// degree `b` (cochain of degree `s - b`).
    pub reps: Vec<BTreeMap<i32, Cochain>>,
    sq: SubQuotient,
    layout: Vec<(i32, usize)>, // (module degree b, flat length)
    gc: GComplex,
}

fn total_layout(gc: &GComplex, s: i32) -> Vec<(i32, usize)> {
    let g = gc.group_of();
    let mut out = Vec::new();
    for b in gc.lo..=gc.hi() {
        let a = s - b;
        if a < 0 {
            continue;
        }
        let len = tuple_count(g, a as usize) * gc.module(b).unwrap().m.rank();
        out.push((b, len));
    }
    out
}

fn total_moduli(gc: &GComplex, s: i32) -> Vec<i128> {
    let g = gc.group_of();
    let mut out = Vec::new();
    for b in gc.lo..=gc.hi() {
        let a = s - b;
        if a < 0 {
            continue;
        }
        let m = gc.module(b).unwrap();
        for _ in 0..tuple_count(g, a as usize) {
            out.extend_from_slice(m.m.factors());
        }
    }
    out
}

/// Matrix of the total differential `T^s -> T^{s+1}`.
fn total_diff(gc: &GComplex, s: i32) -> Mat {
    let g = gc.group_of();
    let src = total_layout(gc, s);
    let dst = total_layout(gc, s + 1);
    let rows: usize = dst.iter().map(|(_, l)| l).sum();
    let cols: usize = src.iter().map(|(_, l)| l).sum();
    let mut out = lattice::zeros(rows, cols);
    let dst_offset = |b: i32| -> usize {
        let mut off = 0;
        for (bb, l) in &dst {
            if *bb == b {
                return off;
            }
            off += l;
        }
        usize::MAX
    };
    let mut col_off = 0;
    for (b, len) in &src {
        let module = gc.module(*b).unwrap();
        let a = (s - b) as usize;
        let rank = module.m.rank();
        for t in 0..tuple_count(g, a) {
            for l in 0..rank {
                let col = col_off + t * rank + l;
                // d_G component: (a+1, b)
                let off = dst_offset(*b);
                if off != usize::MAX {
                    let mut f = Cochain::zero(module, a);
                    f.values[t] = module.m.gen(l);
                    let df = coboundary(module, &f);
                    for (i, v) in df.flatten().iter().enumerate() {
                        out[off + i][col] = *v;
                    }
                }
                // d_M component: (a, b+1) with sign (-1)^a
                if *b < gc.hi() {
                    let off = dst_offset(b + 1);
                    if off != usize::MAX {
                        let dmat = &gc.diffs[(*b - gc.lo) as usize];
                        let next_rank = gc.module(b + 1).unwrap().m.rank();
                        let sign: i128 = if a % 2 == 0 { 1 } else { -1 };
                        for i in 0..next_rank {
                            let v = sign * dmat[i][l];
                            if v != 0 {
                                out[off + t * next_rank + i][col] = v;
                            }
                        }
                    }
                }
            }
        }
        col_off += len;
    }
    out
}

pub fn hyper_cohomology(gc: &GComplex, s: i32, budget: i128) -> Result<HyperCohomology, GcohError> {
    let g = gc.group_of();
    let cost: i128 = (gc.lo..=gc.hi())
        .map(|b| {
            let a = (s + 1 - b).max(0);
            (g.n as i128).pow(a as u32) * gc.module(b).unwrap().m.order()
        })
        .sum();
    if cost > budget {
        return Err(GcohError::BudgetExceeded { cost, budget });
    }
    let moduli = total_moduli(gc, s);
    let layout = total_layout(gc, s);
    let d_s = total_diff(gc, s);
    let next_moduli = total_moduli(gc, s + 1);
    let z_cols = if next_moduli.is_empty() {
        lattice::identity(moduli.len())
    } else {
        lattice::preimage_lattice_mod(&d_s, &next_moduli)
    };
    let b_cols = {
        let prev = total_moduli(gc, s - 1);
        if prev.is_empty() {
            lattice::zeros(moduli.len(), 0)
        } else {
            total_diff(gc, s - 1)
        }
    };
    let sq = moduli_sub_quotient(&moduli, &z_cols, &b_cols);
    let reps = sq
        .gens_in_ambient
        .iter()
        .map(|e| split_total(gc, s, &layout, &e.0))
        .collect();
    Ok(HyperCohomology {
        degree: s,
        group: sq.group.clone(),
        reps,
        sq,
        layout,
        gc: gc.clone(),
    })
}

fn split_total(
    gc: &GComplex,
    s: i32,
    layout: &[(i32, usize)],
    flat: &[i128],
) -> BTreeMap<i32, Cochain> {
    let mut out = BTreeMap::new();
    let mut off = 0;
    for (b, len) in layout {
        let module = gc.module(*b).unwrap();
        let a = (s - b) as usize;
        out.insert(
            *b,
            Cochain::unflatten(module, a, &flat[off..off + len]),
        );
        off += len;
    }
    out
}

impl HyperCohomology {
    pub fn class_of(&self, components: &BTreeMap<i32, Cochain>) -> El {
        let mut flat = Vec::new();
        for (b, len) in &self.layout {
            match components.get(b) {
                Some(c) => flat.extend(c.flatten()),
                None => flat.extend(std::iter::repeat(0).take(*len)),
            }
        }
        self.sq.class_of(&El(flat))
    }

    pub fn gc(&self) -> &GComplex {
        &self.gc
    }
}

/// A trace theory: a dualizing module, a dimension, and a trace character on
/// `H^n(G, eta)`; subgroup traces are `delta_G . cores` by construction and
/// rechecked on classes.
pub struct TraceTheory {
    pub eta: GModule,
    pub n: usize,
    pub top: Cohomology,
    /// `delta(c) = sum_i c_i values[i]`.
    pub values: Vec<QZ>,
}

impl TraceTheory {
    pub fn new(eta: GModule, n: usize, values: Vec<QZ>, budget: i128) -> Result<TraceTheory, GcohError> {
        let top = cohomology(&eta, n, budget)?;
        if values.len() != top.group.rank() {
            return Err(GcohError::BadTrace);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.scale(top.group.factors()[i]).is_zero() {
                return Err(GcohError::BadTrace);
            }
        }
        Ok(TraceTheory {
            eta,
            n,
            top,
            values,
        })
    }

    pub fn delta(&self, class: &El) -> QZ {
        let mut acc = QZ::zero();
        for (i, &c) in class.0.iter().enumerate() {
            acc = acc.add(&self.values[i].scale(c));
        }
        acc
    }

    /// `delta_H = delta_G . cores` on `H^n(H, eta|_H)`.
    pub fn delta_for_subgroup(
        &self,
        h: &SubgroupG,
        budget: i128,
    ) -> Result<(Cohomology, Vec<QZ>), GcohError> {
        let eta_h = self.eta.restrict(h);
        let hh = cohomology(&eta_h, self.n, budget)?;
        let mut vals = Vec::with_capacity(hh.group.rank());
        for rep in &hh.reps {
            let transferred = cores_cochain(&self.eta, h, rep);
            if !self.top.is_cocycle(&transferred) {
                return Err(GcohError::BadTrace);
            }
            vals.push(self.delta(&self.top.class_of(&transferred)));
        }
        Ok((hh, vals))
    }
}

/// The trace pairing `H^i(G, M) x H^{n-i}(G, Mv) -> H^n(G, eta) -> Q/Z`
/// via the hypercohomology cup product (Koszul sign `(-1)^{b a'}` on
/// components).
pub fn trace_pairing(
    theta: &TraceTheory,
    pairing: &GChainPairing,
    i: i32,
    budget: i128,
) -> Result<FinPairing, GcohError> {
    pairing.validate()?;
    if pairing.m.modules.len() > 2 || pairing.mv.modules.len() > 2 {
        return Err(GcohError::Shape(
            "trace pairings cover complexes of at most two degrees".into(),
        ));
    }
    let n = theta.n as i32;
    let hm = hyper_cohomology(&pairing.m, i, budget)?;
    let hn = hyper_cohomology(&pairing.mv, n - i, budget)?;
    let g = pairing.m.group_of();

    let mut vals = vec![vec![QZ::zero(); hn.group.rank()]; hm.group.rank()];
    for (gi, xrep) in hm.reps.iter().enumerate() {
        for (hj, yrep) in hn.reps.iter().enumerate() {
            // cup: sum over components (a, b) x (a', b') with b + b' = eta_deg
            let mut total = Cochain::zero(&theta.eta, (n - pairing.eta_deg) as usize);
            for (b, f) in xrep {
                let _ma = pairing.m.module(*b).expect("degree");
                for (bp, hcoch) in yrep {
                    if b + bp != pairing.eta_deg {
                        continue;
                    }
                    let mb = pairing.mv.module(*bp).expect("degree");
                    let (da, db) = (f.degree, hcoch.degree);
                    // Koszul sign: module degree b of the left factor passes
                    // the cochain degree a' of the right factor
                    let sign: i128 = if (b * (db as i32)).rem_euclid(2) == 0 {
                        1
                    } else {
                        -1
                    };
                    // (f u h)(g_1..g_{da+db}) = phi(f(..), prefix . h(..))
                    for idx in 0..tuple_count(g, da + db) {
                        let tuple = tuple_at(g, da + db, idx);
                        let left = f.get(g, &tuple[..da]);
                        let mut prefix = g.identity;
                        for &x in &tuple[..da] {
                            prefix = g.mul(prefix, x);
                        }
                        let right = mb.act(prefix, hcoch.get(g, &tuple[da..]));
                        let v = pairing.eval(*b, *bp, left, &right);
                        total.values[idx] = theta
                            .eta
                            .m
                            .add(&total.values[idx], &theta.eta.m.scale(sign, &v));
                    }
                }
            }
            if !theta.top.is_cocycle(&total) {
                return Err(GcohError::Shape("cup value is not a cocycle".into()));
            }
            vals[gi][hj] = theta.delta(&theta.top.class_of(&total));
        }
    }
    FinPairing::new(hm.group.clone(), hn.group.clone(), vals)
        .map_err(|_| GcohError::Shape("pairing values incompatible".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_constructors() {
        let c6 = FinGroup::cyclic(6);
        assert_eq!(c6.identity, 0);
        assert_eq!(c6.mul(4, 5), 3);
        let s3 = FinGroup::s3();
        assert_eq!(s3.n, 6);
        assert!(s3.is_subgroup(&FinGroup::a3_in_s3()));
        assert!(!s3.is_subgroup(&[0, 1, 2]));
        // bad table rejected
        assert!(FinGroup::from_table(vec![vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn cohomology_of_cyclic_groups() {
        // H^0 = fixed points; H^1(Z/n, Z/n triv) = Z/n; H^2(Z/n, Z/n triv) = Z/n
        for n in 2..=6usize {
            let g = FinGroup::cyclic(n);
            let m = GModule::trivial(g, FinAb::cyclic(n as i128));
            let h0 = cohomology(&m, 0, default_budget()).unwrap();
            assert_eq!(h0.group.factors(), &[n as i128]);
            let h1 = cohomology(&m, 1, default_budget()).unwrap();
            assert_eq!(h1.group.factors(), &[n as i128], "H^1(Z/{n})");
            let h2 = cohomology(&m, 2, default_budget()).unwrap();
            assert_eq!(h2.group.factors(), &[n as i128], "H^2(Z/{n})");
        }
        // coprime coefficients kill cohomology
        let g = FinGroup::cyclic(2);
        let m = GModule::trivial(g, FinAb::cyclic(3));
        let h1 = cohomology(&m, 1, default_budget()).unwrap();
        assert!(h1.group.is_trivial());
    }

    #[test]
    fn budget_guard() {
        let g = FinGroup::cyclic(6);
        let m = GModule::trivial(g, FinAb::cyclic(6));
        assert!(matches!(
            cohomology(&m, 3, 100),
            Err(GcohError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn cup_product_basics() {
        // G = Z/2, M = Z/2 trivial: the generator x of H^1 satisfies
        // x u x != 0 in H^2 (polynomial cohomology of Z/2).
        let g = FinGroup::cyclic(2);
        let m = GModule::trivial(g.clone(), FinAb::cyclic(2));
        let tens = tensor(&m, &m);
        let h1 = cohomology(&m, 1, default_budget()).unwrap();
        assert_eq!(h1.group.factors(), &[2]);
        let x = &h1.reps[0];
        let xx = cup(&m, &m, &tens, x, x);
        let h2t = cohomology(&tens.t, 2, default_budget()).unwrap();
        assert!(h2t.is_cocycle(&xx));
        assert!(!h2t.group.is_zero(&h2t.class_of(&xx)));

        // f u (identity 0-cochain) = f at cochain level (up to the tensor iso)
        let one = {
            let mut c = Cochain::zero(&m, 0);
            c.values[0] = m.m.gen(0);
            c
        };
        let fu1 = cup(&m, &m, &tens, x, &one);
        // tens of Z/2 (x) Z/2 has rank 1 and pair(a, 1) = a
        for idx in 0..fu1.values.len() {
            assert_eq!(fu1.values[idx].0, x.values[idx].0);
        }

        // Leibniz: d(f u g) = df u g + (-1)^i f u dg on random cochains
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        let g3 = FinGroup::cyclic(3);
        let m3 = GModule::trivial(g3.clone(), FinAb::cyclic(3));
        let t3 = tensor(&m3, &m3);
        for _ in 0..10 {
            let mut f = Cochain::zero(&m3, 1);
            let mut h = Cochain::zero(&m3, 1);
            for v in f.values.iter_mut().chain(h.values.iter_mut()) {
                *v = El(vec![rng.gen_range(0..3)]);
            }
            let lhs = coboundary(&t3.t, &cup(&m3, &m3, &t3, &f, &h));
            let a = cup(&m3, &m3, &t3, &coboundary(&m3, &f), &h);
            let b = cup(&m3, &m3, &t3, &f, &coboundary(&m3, &h));
            // i = 1: d(f u h) = df u h - f u dh
            for idx in 0..lhs.values.len() {
                let expect = t3
                    .t
                    .m
                    .add(&a.values[idx], &t3.t.m.scale(-1, &b.values[idx]));
                assert_eq!(lhs.values[idx], expect);
            }
        }
    }

    #[test]
    fn cup_graded_commutativity_on_classes() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        let g = FinGroup::cyclic(2);
        let m = GModule::trivial(g.clone(), FinAb::cyclic(2));
        let tens = tensor(&m, &m);
        let swap = tens.swap_into(&tens);
        let h1 = cohomology(&m, 1, default_budget()).unwrap();
        let h2t = cohomology(&tens.t, 2, default_budget()).unwrap();
        for _ in 0..10 {
            // random cocycles: random combination of H^1 reps plus coboundary
            let mut f = h1.reps[0].clone();
            let c: i128 = rng.gen_range(0..2);
            for v in f.values.iter_mut() {
                *v = m.m.scale(c, v);
            }
            let mut h = h1.reps[0].clone();
            let c2: i128 = rng.gen_range(0..2);
            for v in h.values.iter_mut() {
                *v = m.m.scale(c2, v);
            }
            let fg = cup(&m, &m, &tens, &f, &h);
            let gf = cup(&m, &m, &tens, &h, &f);
            // swap gf into the same tensor coordinates
            let mut gf_sw = Cochain::zero(&tens.t, 2);
            for (idx, v) in gf.values.iter().enumerate() {
                gf_sw.values[idx] = tens.t.m.reduce(&lattice::mat_vec(&swap, &v.0));
            }
            // a u b = (-1)^{1*1} b u a = -(b u a) on classes
            let lhs = h2t.class_of(&fg);
            let rhs = h2t.group.scale(-1, &h2t.class_of(&gf_sw));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn induced_module_and_sequences() {
        // H = G: induced module is M itself, X = 0
        let g = FinGroup::cyclic(2);
        let m = GModule::trivial(g.clone(), FinAb::cyclic(2));
        let h_full = SubgroupG::new(&g, vec![0, 1]).unwrap();
        let ind = induced_module(&m, &h_full);
        assert_eq!(ind.module.m.order(), 2);
        let seqs = induced_sequences(&m, &h_full, &ind);
        assert!(seqs.first_exact && seqs.second_exact);
        assert!(seqs.x_tensor_m.is_trivial());

        // G = Z/2, H = 1: middle module of order 4, both sequences exact
        let h_triv = SubgroupG::new(&g, vec![0]).unwrap();
        let ind = induced_module(&m, &h_triv);
        assert_eq!(ind.module.m.order(), 4);
        let seqs = induced_sequences(&m, &h_triv, &ind);
        assert!(seqs.first_exact && seqs.second_exact);
        assert_eq!(seqs.x_tensor_m.order(), 2);
        assert_eq!(seqs.x_dual_tensor_m.order(), 2);
        assert_eq!(seqs.x_restricted_trivial, Some(true));

        // (G, H) = (Z/6, Z/3)
        let g6 = FinGroup::cyclic(6);
        let m6 = GModule::trivial(g6.clone(), FinAb::cyclic(6));
        let h3 = SubgroupG::new(&g6, vec![0, 2, 4]).unwrap();
        let ind = induced_module(&m6, &h3);
        let seqs = induced_sequences(&m6, &h3, &ind);
        assert!(seqs.first_exact && seqs.second_exact);
        assert_eq!(seqs.x_restricted_trivial, Some(true));
    }

    #[test]
    fn shapiro_battery() {
        // H = G: both maps identity
        let g = FinGroup::cyclic(2);
        let m = GModule::trivial(g.clone(), FinAb::cyclic(2));
        let h_full = SubgroupG::new(&g, vec![0, 1]).unwrap();
        let rep = shapiro_check(&m, &h_full, 1, default_budget()).unwrap();
        assert!(rep.forward_then_back_is_identity && rep.back_then_forward_is_identity);

        // G = Z/2, H = 1: induced modules are acyclic in degree >= 1
        let h_triv = SubgroupG::new(&g, vec![0]).unwrap();
        for n in 1..=2usize {
            let rep = shapiro_check(&m, &h_triv, n, default_budget()).unwrap();
            assert!(rep.group_g_side.is_trivial(), "H^{n}(G, Z[G] (x) M) = 0");
            assert!(rep.forward_then_back_is_identity && rep.back_then_forward_is_identity);
        }

        // (G, H) = (Z/4, Z/2), n = 1, 2
        let g4 = FinGroup::cyclic(4);
        let m4 = GModule::trivial(g4.clone(), FinAb::cyclic(2));
        let h2 = SubgroupG::new(&g4, vec![0, 2]).unwrap();
        for n in 1..=2usize {
            let rep = shapiro_check(&m4, &h2, n, default_budget()).unwrap();
            assert!(
                rep.forward_then_back_is_identity && rep.back_then_forward_is_identity,
                "shapiro (Z/4, Z/2) n = {n}"
            );
            assert_eq!(rep.group_g_side.factors(), rep.group_h_side.factors());
        }
    }

    #[test]
    fn trace_theory_and_pairing() {
        // G = Z/2, eta = Z/2 trivial, n = 2: H^2 = Z/2; the pairing
        // H^1 x H^1 -> H^2 -> Q/Z is perfect (x u x generates).
        let g = FinGroup::cyclic(2);
        let eta = GModule::trivial(g.clone(), FinAb::cyclic(2));
        let theta = TraceTheory::new(eta.clone(), 2, vec![QZ::new(1, 2)], default_budget()).unwrap();
        let mc = GComplex::concentrated(0, eta.clone());
        let mut comps = BTreeMap::new();
        comps.insert((0, 0), vec![vec![eta.m.gen(0)]]);
        let pairing = GChainPairing {
            m: mc.clone(),
            mv: mc.clone(),
            eta: eta.clone(),
            eta_deg: 0,
            comps,
        };
        let fp = trace_pairing(&theta, &pairing, 1, default_budget()).unwrap();
        let an = fp.analysis();
        assert!(an.perfect, "H^1 x H^1 pairing perfect: {an:?}");

        // unit of cup: i = n pairs H^n(G, eta) x H^0 faithfully
        let fp0 = trace_pairing(&theta, &pairing, 2, default_budget()).unwrap();
        let an0 = fp0.analysis();
        assert!(an0.perfect, "{an0:?}");

        // delta_H = delta_G . cores recheck on the trivial subgroup
        let h = SubgroupG::new(&g, vec![0]).unwrap();
        let (hh, vals) = theta.delta_for_subgroup(&h, default_budget()).unwrap();
        assert!(hh.group.is_trivial());
        assert!(vals.is_empty());

        // the shifted pairing reproduces the analysis at the shifted index:
        // (M#[s])^b = M^{b+s}, so hypercohomology indices drop by s
        let shifted = pairing.shift(1);
        let fp_sh = trace_pairing(&theta, &shifted, 0, default_budget()).unwrap();
        let an_sh = fp_sh.analysis();
        assert_eq!(an.perfect, an_sh.perfect);
        assert_eq!(fp.a.factors(), fp_sh.a.factors());
        assert_eq!(fp.b.factors(), fp_sh.b.factors());
    }

    #[test]
    fn cores_res_is_index_times_identity() {
        // (G, H) battery with n = 1, 2
        let batteries: Vec<(FinGroup, Vec<usize>, i128)> = vec![
            (FinGroup::cyclic(4), vec![0, 2], 2),
            (FinGroup::cyclic(6), vec![0, 2, 4], 3),
            (FinGroup::cyclic(6), vec![0, 3], 2),
            (FinGroup::s3(), FinGroup::a3_in_s3(), 6),
        ];
        for (g, helems, modn) in batteries {
            let h = SubgroupG::new(&g, helems).unwrap();
            let index = h.index() as i128;
            let m = GModule::trivial(g.clone(), FinAb::cyclic(modn));
            for n in 1..=2usize {
                let hg = cohomology(&m, n, default_budget()).unwrap();
                let mh = m.restrict(&h);
                let hh = cohomology(&mh, n, default_budget()).unwrap();
                let res = res_classes(&hg, &hh, &h).unwrap();
                let cores = cores_classes(&hh, &hg, &h).unwrap();
                // cores . res = [G:H] id on H^n(G)
                let composed = if hg.group.rank() == 0 {
                    vec![]
                } else if hh.group.rank() == 0 {
                    lattice::zeros(hg.group.rank(), hg.group.rank())
                } else {
                    lattice::mat_mul(&cores, &res)
                };
                for col in 0..hg.group.rank() {
                    let expect = hg.group.scale(index, &hg.group.gen(col));
                    let got = hg.group.reduce(
                        &(0..hg.group.rank())
                            .map(|i| composed[i][col])
                            .collect::<Vec<_>>(),
                    );
                    assert_eq!(got, expect, "battery |G|={} n={n}", g.n);
                }
            }
        }
    }
}
