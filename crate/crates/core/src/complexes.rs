//! Bounded complexes of finite abelian groups, shifts and cones with their
//! sign conventions, chain pairings, cone pairings, and induced pairings on
//! cohomology.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::finab::{
    sub_quotient, El, FinAb, FinAbError, FinHom, FinPairing, SubQuotient, QZ,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("differentials do not square to zero")]
    NotAComplex,
    #[error("map is not a chain map")]
    NotChainMap,
    #[error("maps do not form a morphism of pairings")]
    NotPairingMorphism,
    #[error("pairing components are not chain-compatible")]
    NotChainPairing,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    FinAb(#[from] FinAbError),
}

/// A bounded complex `C^lo -> ... -> C^hi` of finite abelian groups.
#[derive(Debug, Clone)]
pub struct FinComplex {
    pub lo: i32,
    pub groups: Vec<FinAb>,
    /// `diffs[i] : groups[i] -> groups[i+1]`; length `groups.len() - 1`.
    pub diffs: Vec<FinHom>,
}

impl FinComplex {
    pub fn new(lo: i32, groups: Vec<FinAb>, diffs: Vec<FinHom>) -> Result<FinComplex, ComplexError> {
        if groups.is_empty() || diffs.len() + 1 != groups.len() {
            return Err(ComplexError::Shape("groups/diffs length".into()));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.dom != groups[i] || d.cod != groups[i + 1] {
                return Err(ComplexError::Shape(format!("differential {i} endpoints")));
            }
        }
        for w in diffs.windows(2) {
            let composite = w[1].compose(&w[0]);
            if !composite.same_map(&FinHom::zero(&composite.dom, &composite.cod)) {
                return Err(ComplexError::NotAComplex);
            }
        }
        Ok(FinComplex { lo, groups, diffs })
    }

    /// Single group concentrated in one degree.
    pub fn concentrated(deg: i32, group: FinAb) -> FinComplex {
        FinComplex {
            lo: deg,
            groups: vec![group],
            diffs: vec![],
        }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.groups.len() as i32 - 1
    }

    pub fn group(&self, deg: i32) -> FinAb {
        if deg < self.lo || deg > self.hi() {
            FinAb::trivial()
        } else {
            self.groups[(deg - self.lo) as usize].clone()
        }
    }

    pub fn diff(&self, deg: i32) -> FinHom {
        if deg < self.lo || deg >= self.hi() {
            FinHom::zero(&self.group(deg), &self.group(deg + 1))
        } else {
            self.diffs[(deg - self.lo) as usize].clone()
        }
    }

    /// Shift: `(C[s])^i = C^{i+s}` with differentials scaled by `(-1)^s`.
    pub fn shift(&self, s: i32) -> FinComplex {
        let sign: i128 = if s.rem_euclid(2) == 0 { 1 } else { -1 };
        FinComplex {
            lo: self.lo - s,
            groups: self.groups.clone(),
            diffs: self.diffs.iter().map(|d| d.scale(sign)).collect(),
        }
    }

    /// `H^deg = ker(d^deg) / im(d^{deg-1})` with representatives.
    pub fn cohomology(&self, deg: i32) -> SubQuotient {
        let c = self.group(deg);
        let z = self.diff(deg).kernel();
        let b = self.diff(deg - 1).image();
        sub_quotient(&c, &z, &b)
    }

    pub fn cohomology_group(&self, deg: i32) -> FinAb {
        self.cohomology(deg).group
    }

    /// Degree-indexed JSON record of groups and differential matrices.
    pub fn to_json(&self) -> serde_json::Value {
        let degrees: Vec<serde_json::Value> = (self.lo..=self.hi())
            .map(|deg| {
                serde_json::json!({
                    "degree": deg,
                    "group": self.group(deg).factors(),
                    "differential": if deg < self.hi() { Some(self.diff(deg).m.clone()) } else { None },
                })
            })
            .collect();
        serde_json::json!({ "lo": self.lo, "degrees": degrees })
    }
}

/// A degreewise map of complexes commuting with the differentials.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub from: FinComplex,
    pub to: FinComplex,
    pub comps: BTreeMap<i32, FinHom>,
}

impl ChainMap {
    pub fn new(
        from: FinComplex,
        to: FinComplex,
        comps: BTreeMap<i32, FinHom>,
    ) -> Result<ChainMap, ComplexError> {
        let map = ChainMap { from, to, comps };
        for deg in map.from.lo..=map.from.hi() {
            let c = map.comp(deg);
            if c.dom != map.from.group(deg) || c.cod != map.to.group(deg) {
                return Err(ComplexError::Shape(format!("component {deg} endpoints")));
            }
            // d . u = u . d
            let lhs = map.to.diff(deg).compose(&c);
            let rhs = map.comp(deg + 1).compose(&map.from.diff(deg));
            if !lhs.same_map(&rhs) {
                return Err(ComplexError::NotChainMap);
            }
        }
        Ok(map)
    }

    pub fn comp(&self, deg: i32) -> FinHom {
        self.comps
            .get(&deg)
            .cloned()
            .unwrap_or_else(|| FinHom::zero(&self.from.group(deg), &self.to.group(deg)))
    }
}

/// A direct sum with its structural injections and projections.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub group: FinAb,
    pub inj_a: FinHom,
    pub inj_b: FinHom,
    pub proj_a: FinHom,
    pub proj_b: FinHom,
}

pub fn direct_sum(a: &FinAb, b: &FinAb) -> DirectSum {
    let mut moduli: Vec<i128> = a.factors().to_vec();
    moduli.extend_from_slice(b.factors());
    let pres = FinAb::from_moduli(&moduli);
    let (na, nb) = (a.rank(), b.rank());
    let group = pres.group.clone();
    let col = |v: Vec<i128>| -> Vec<i128> { pres.project(&v).0 };
    let mut inj_a_m = vec![vec![0i128; na]; group.rank()];
    for j in 0..na {
        let mut v = vec![0i128; na + nb];
        v[j] = 1;
        let c = col(v);
        for i in 0..group.rank() {
            inj_a_m[i][j] = c[i];
        }
    }
    let mut inj_b_m = vec![vec![0i128; nb]; group.rank()];
    for j in 0..nb {
        let mut v = vec![0i128; na + nb];
        v[na + j] = 1;
        let c = col(v);
        for i in 0..group.rank() {
            inj_b_m[i][j] = c[i];
        }
    }
    // projections via the lift matrix
    let mut proj_a_m = vec![vec![0i128; group.rank()]; na];
    let mut proj_b_m = vec![vec![0i128; group.rank()]; nb];
    for l in 0..group.rank() {
        let lifted = pres.lift_el(&group.gen(l));
        for i in 0..na {
            proj_a_m[i][l] = lifted[i];
        }
        for i in 0..nb {
            proj_b_m[i][l] = lifted[na + i];
        }
    }
    let inj_a = FinHom::new(a.clone(), group.clone(), inj_a_m).expect("inj_a well defined");
    let inj_b = FinHom::new(b.clone(), group.clone(), inj_b_m).expect("inj_b well defined");
    let proj_a = FinHom::new(group.clone(), a.clone(), proj_a_m).expect("proj_a well defined");
    let proj_b = FinHom::new(group.clone(), b.clone(), proj_b_m).expect("proj_b well defined");
    DirectSum {
        group,
        inj_a,
        inj_b,
        proj_a,
        proj_b,
    }
}

/// The mapping cone of `u : M1 -> M2`: `C^i = M1^{i+1} + M2^i` with
/// `d(a, b) = (-d a, d b - u(a))`, plus the structural maps
/// `j2 : M2 -> C` and `pi1 : C -> M1[1]`.
#[derive(Debug, Clone)]
pub struct Cone {
    pub complex: FinComplex,
    pub sums: BTreeMap<i32, DirectSum>,
    pub j2: ChainMap,
    pub pi1: ChainMap,
}

pub fn cone(u: &ChainMap) -> Result<Cone, ComplexError> {
    let m1 = &u.from;
    let m2 = &u.to;
    let lo = (m1.lo - 1).min(m2.lo);
    let hi = (m1.hi() - 1).max(m2.hi());
    let mut sums = BTreeMap::new();
    let mut groups = Vec::new();
    for deg in lo..=hi {
        let s = direct_sum(&m1.group(deg + 1), &m2.group(deg));
        groups.push(s.group.clone());
        sums.insert(deg, s);
    }
    let mut diffs = Vec::new();
    for deg in lo..hi {
        let s = &sums[&deg];
        let s_next = &sums[&(deg + 1)];
        // (a, b) -> (-d a, d b - u(a))
        let part1 = s_next
            .inj_a
            .compose(&m1.diff(deg + 1).neg())
            .compose(&s.proj_a);
        let part2 = s_next.inj_b.compose(&m2.diff(deg)).compose(&s.proj_b);
        let part3 = s_next.inj_b.compose(&u.comp(deg + 1)).compose(&s.proj_a);
        diffs.push(part1.add(&part2).add(&part3.neg()));
    }
    let complex = FinComplex::new(lo, groups, diffs)?;

    let mut j2_comps = BTreeMap::new();
    for deg in m2.lo..=m2.hi() {
        j2_comps.insert(deg, sums[&deg].inj_b.clone());
    }
    let j2 = ChainMap::new(m2.clone(), complex.clone(), j2_comps)?;

    let m1_shift = m1.shift(1);
    let mut pi1_comps = BTreeMap::new();
    for deg in m1_shift.lo..=m1_shift.hi() {
        if deg >= lo && deg <= hi {
            pi1_comps.insert(deg, sums[&deg].proj_a.clone());
        }
    }
    let pi1 = ChainMap::new(complex.clone(), m1_shift, pi1_comps)?;

    Ok(Cone {
        complex,
        sums,
        j2,
        pi1,
    })
}

/// The cocone of `uv : M2v -> M1v`: the cone of `uv` shifted by `-1`, i.e.
/// `(Cv)^j = M1v^{j-1} + M2v^j` with `d(a, b) = (-d a + uv(b), d b)`, plus
/// `pi2 : Cv -> M2v` and `j1 : M1v[-1] -> Cv`.
#[derive(Debug, Clone)]
pub struct Cocone {
    pub complex: FinComplex,
    pub sums: BTreeMap<i32, DirectSum>,
    pub pi2: ChainMap,
    pub j1: ChainMap,
}

pub fn cocone(uv: &ChainMap) -> Result<Cocone, ComplexError> {
    let m2v = &uv.from;
    let m1v = &uv.to;
    let lo = (m1v.lo + 1).min(m2v.lo);
    let hi = (m1v.hi() + 1).max(m2v.hi());
    let mut sums = BTreeMap::new();
    let mut groups = Vec::new();
    for deg in lo..=hi {
        let s = direct_sum(&m1v.group(deg - 1), &m2v.group(deg));
        groups.push(s.group.clone());
        sums.insert(deg, s);
    }
    let mut diffs = Vec::new();
    for deg in lo..hi {
        let s = &sums[&deg];
        let s_next = &sums[&(deg + 1)];
        // (a, b) -> (-d a + uv(b), d b)
        let part1 = s_next
            .inj_a
            .compose(&m1v.diff(deg - 1).neg())
            .compose(&s.proj_a);
        let part2 = s_next.inj_a.compose(&uv.comp(deg)).compose(&s.proj_b);
        let part3 = s_next.inj_b.compose(&m2v.diff(deg)).compose(&s.proj_b);
        diffs.push(part1.add(&part2).add(&part3));
    }
    let complex = FinComplex::new(lo, groups, diffs)?;

    let mut pi2_comps = BTreeMap::new();
    for deg in lo..=hi {
        pi2_comps.insert(deg, sums[&deg].proj_b.clone());
    }
    let pi2 = ChainMap::new(complex.clone(), m2v.clone(), pi2_comps)?;

    let m1v_shift = m1v.shift(-1);
    let mut j1_comps = BTreeMap::new();
    for deg in m1v_shift.lo..=m1v_shift.hi() {
        if deg >= lo && deg <= hi {
            j1_comps.insert(deg, sums[&deg].inj_a.clone());
        }
    }
    let j1 = ChainMap::new(m1v_shift, complex.clone(), j1_comps)?;

    Ok(Cocone {
        complex,
        sums,
        pi2,
        j1,
    })
}

/// A bilinear map on generators with values in a finite abelian group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiMap {
    pub values: Vec<Vec<El>>,
}

/// A chain pairing `phi^{i,j} : M^i x (Mv)^j -> eta^{i+j}` satisfying
/// `phi(dx, y) + (-1)^i phi(x, dy) = d phi(x, y)`.
#[derive(Debug, Clone)]
pub struct ChainPairing {
    pub m: FinComplex,
    pub mv: FinComplex,
    pub eta: FinComplex,
    pub comps: BTreeMap<(i32, i32), BiMap>,
}

impl ChainPairing {
    pub fn new(
        m: FinComplex,
        mv: FinComplex,
        eta: FinComplex,
        comps: BTreeMap<(i32, i32), BiMap>,
    ) -> Result<ChainPairing, ComplexError> {
        let cp = ChainPairing { m, mv, eta, comps };
        cp.validate()?;
        Ok(cp)
    }

    fn validate(&self) -> Result<(), ComplexError> {
        // shape and torsion compatibility
        for ((i, j), bm) in &self.comps {
            let a = self.m.group(*i);
            let b = self.mv.group(*j);
            let t = self.eta.group(i + j);
            if bm.values.len() != a.rank() || bm.values.iter().any(|r| r.len() != b.rank()) {
                return Err(ComplexError::Shape(format!("phi component ({i},{j}) size")));
            }
            for (gi, row) in bm.values.iter().enumerate() {
                for (hj, v) in row.iter().enumerate() {
                    if !t.is_zero(&t.scale(a.factors()[gi], v))
                        || !t.is_zero(&t.scale(b.factors()[hj], v))
                    {
                        return Err(ComplexError::NotChainPairing);
                    }
                }
            }
        }
        // chain compatibility on generators
        for i in self.m.lo..=self.m.hi() {
            for j in self.mv.lo..=self.mv.hi() {
                let a = self.m.group(i);
                let b = self.mv.group(j);
                let sign: i128 = if i.rem_euclid(2) == 0 { 1 } else { -1 };
                for gi in 0..a.rank() {
                    for hj in 0..b.rank() {
                        let x = a.gen(gi);
                        let y = b.gen(hj);
                        let t_next = self.eta.group(i + j + 1);
                        let lhs1 = self.eval(i + 1, j, &self.m.diff(i).apply(&x), &y);
                        let lhs2 = self.eval(i, j + 1, &x, &self.mv.diff(j).apply(&y));
                        let lhs = t_next.add(&lhs1, &t_next.scale(sign, &lhs2));
                        let rhs = self.eta.diff(i + j).apply(&self.eval(i, j, &x, &y));
                        if lhs != rhs {
                            return Err(ComplexError::NotChainPairing);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, i: i32, j: i32, x: &El, y: &El) -> El {
        let t = self.eta.group(i + j);
        let mut acc = t.zero();
        let bm = match self.comps.get(&(i, j)) {
            None => return acc,
            Some(b) => b,
        };
        for (gi, &xc) in x.0.iter().enumerate() {
            if xc == 0 {
                continue;
            }
            for (hj, &yc) in y.0.iter().enumerate() {
                if yc == 0 {
                    continue;
                }
                acc = t.add(&acc, &t.scale(xc * yc, &bm.values[gi][hj]));
            }
        }
        acc
    }

    /// The shifted pairing `M#[s]`: `M[s] x Mv[-s] -> eta` with
    /// `phi_{M[s]}^{i,j} = (-1)^{is} phi^{i+s, j-s}`.
    pub fn shift(&self, s: i32) -> ChainPairing {
        let m = self.m.shift(s);
        let mv = self.mv.shift(-s);
        let mut comps = BTreeMap::new();
        for ((i0, j0), bm) in &self.comps {
            let (i, j) = (i0 - s, j0 + s);
            let sign: i128 = if (i * s).rem_euclid(2) == 0 { 1 } else { -1 };
            let t = self.eta.group(i0 + j0);
            let values = bm
                .values
                .iter()
                .map(|row| row.iter().map(|v| t.scale(sign, v)).collect())
                .collect();
            comps.insert((i, j), BiMap { values });
        }
        ChainPairing {
            m,
            mv,
            eta: self.eta.clone(),
            comps,
        }
    }

    /// Literal equality of components (same complexes, same values).
    pub fn same_pairing(&self, other: &ChainPairing) -> bool {
        let keys: std::collections::BTreeSet<(i32, i32)> = self
            .comps
            .keys()
            .chain(other.comps.keys())
            .cloned()
            .collect();
        for (i, j) in keys {
            let a = self.m.group(i);
            let b = self.mv.group(j);
            if a != other.m.group(i) || b != other.mv.group(j) {
                return false;
            }
            for gi in 0..a.rank() {
                for hj in 0..b.rank() {
                    if self.eval(i, j, &a.gen(gi), &b.gen(hj))
                        != other.eval(i, j, &a.gen(gi), &b.gen(hj))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A morphism of pairings `M1# => M2#`: `u : M1 -> M2`, `uv : M2v -> M1v`
/// with `phi_1(a, uv(b)) = phi_2(u(a), b)`.
#[derive(Debug, Clone)]
pub struct PairingMorphism {
    pub from: ChainPairing,
    pub to: ChainPairing,
    pub u: ChainMap,
    pub uv: ChainMap,
}

impl PairingMorphism {
    pub fn new(
        from: ChainPairing,
        to: ChainPairing,
        u: ChainMap,
        uv: ChainMap,
    ) -> Result<PairingMorphism, ComplexError> {
        let pm = PairingMorphism { from, to, u, uv };
        for i in pm.from.m.lo..=pm.from.m.hi() {
            for j in pm.to.mv.lo..=pm.to.mv.hi() {
                let a = pm.from.m.group(i);
                let b = pm.to.mv.group(j);
                for gi in 0..a.rank() {
                    for hj in 0..b.rank() {
                        let x = a.gen(gi);
                        let y = b.gen(hj);
                        let lhs = pm.from.eval(i, j, &x, &pm.uv.comp(j).apply(&y));
                        let rhs = pm.to.eval(i, j, &pm.u.comp(i).apply(&x), &y);
                        if lhs != rhs {
                            return Err(ComplexError::NotPairingMorphism);
                        }
                    }
                }
            }
        }
        Ok(pm)
    }
}

/// The cone pairing with its structural data for the two commuting squares.
#[derive(Debug, Clone)]
pub struct ConePairing {
    pub pairing: ChainPairing,
    pub cone: Cone,
    pub cocone: Cocone,
}

/// `phi_C((a, b), (a', b')) = (-1)^i phi_1(a, a') + phi_2(b, b')` on
/// `C^i x (Cv)^j`.
pub fn cone_pairing(pm: &PairingMorphism) -> Result<ConePairing, ComplexError> {
    let c = cone(&pm.u)?;
    let cv = cocone(&pm.uv)?;
    let eta = pm.from.eta.clone();
    let mut comps = BTreeMap::new();
    for i in c.complex.lo..=c.complex.hi() {
        for j in cv.complex.lo..=cv.complex.hi() {
            let t = eta.group(i + j);
            let a = c.complex.group(i);
            let b = cv.complex.group(j);
            if a.is_trivial() || b.is_trivial() || t.is_trivial() {
                continue;
            }
            let sc = &c.sums[&i];
            let scv = &cv.sums[&j];
            let sign: i128 = if i.rem_euclid(2) == 0 { 1 } else { -1 };
            let mut values = vec![vec![t.zero(); b.rank()]; a.rank()];
            for gi in 0..a.rank() {
                for hj in 0..b.rank() {
                    let x = a.gen(gi);
                    let y = b.gen(hj);
                    let x1 = sc.proj_a.apply(&x);
                    let x2 = sc.proj_b.apply(&x);
                    let y1 = scv.proj_a.apply(&y);
                    let y2 = scv.proj_b.apply(&y);
                    let v1 = pm.from.eval(i + 1, j - 1, &x1, &y1);
                    let v2 = pm.to.eval(i, j, &x2, &y2);
                    values[gi][hj] = t.add(&t.scale(sign, &v1), &v2);
                }
            }
            comps.insert((i, j), BiMap { values });
        }
    }
    let pairing = ChainPairing::new(c.complex.clone(), cv.complex.clone(), eta, comps)?;
    Ok(ConePairing {
        pairing,
        cone: c,
        cocone: cv,
    })
}

impl ConePairing {
    /// The two squares of the cone construction:
    /// `phi_C(j2 x, y) = phi_2(x, pi2 y)` and
    /// `phi_C(c, j1 a') = phi_1~(pi1 c, a')` with the shifted sign.
    pub fn squares_commute(&self, pm: &PairingMorphism) -> bool {
        let shifted_from = pm.from.shift(1);
        for i in self.pairing.m.lo..=self.pairing.m.hi() {
            for j in self.pairing.mv.lo..=self.pairing.mv.hi() {
                // first square on generators of M2^i x (Cv)^j
                let m2i = pm.to.m.group(i);
                let cvj = self.pairing.mv.group(j);
                for gi in 0..m2i.rank() {
                    for hj in 0..cvj.rank() {
                        let x = m2i.gen(gi);
                        let y = cvj.gen(hj);
                        let lhs = self
                            .pairing
                            .eval(i, j, &self.cone.j2.comp(i).apply(&x), &y);
                        let rhs = pm.to.eval(i, j, &x, &self.cocone.pi2.comp(j).apply(&y));
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
                // second square on generators of C^i x (M1v[-1])^j
                let ci = self.pairing.m.group(i);
                let m1vs = pm.from.mv.shift(-1).group(j);
                for gi in 0..ci.rank() {
                    for hj in 0..m1vs.rank() {
                        let x = ci.gen(gi);
                        let y = m1vs.gen(hj);
                        let lhs = self
                            .pairing
                            .eval(i, j, &x, &self.cocone.j1.comp(j).apply(&y));
                        let rhs =
                            shifted_from.eval(i, j, &self.cone.pi1.comp(i).apply(&x), &y);
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// A pairing of cohomology groups with values in a cohomology group.
#[derive(Debug, Clone)]
pub struct GroupPairing {
    pub a: FinAb,
    pub b: FinAb,
    pub target: FinAb,
    pub values: Vec<Vec<El>>,
}

impl GroupPairing {
    pub fn eval(&self, x: &El, y: &El) -> El {
        let mut acc = self.target.zero();
        for (gi, &xc) in x.0.iter().enumerate() {
            if xc == 0 {
                continue;
            }
            for (hj, &yc) in y.0.iter().enumerate() {
                if yc == 0 {
                    continue;
                }
                acc = self
                    .target
                    .add(&acc, &self.target.scale(xc * yc, &self.values[gi][hj]));
            }
        }
        acc
    }

    /// Compose with the canonical `Z/n -> Q/Z` when the target is cyclic.
    pub fn to_qz(&self) -> Option<FinPairing> {
        if self.target.rank() > 1 {
            return None;
        }
        let n = self.target.exponent();
        let vals: Vec<Vec<QZ>> = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| QZ::new(v.0.first().copied().unwrap_or(0), n))
                    .collect()
            })
            .collect();
        FinPairing::new(self.a.clone(), self.b.clone(), vals).ok()
    }
}

/// The induced pairing `H^i(M) x H^j(Mv) -> H^{i+j}(eta)`.
pub fn cohomology_pairing(cp: &ChainPairing, i: i32, j: i32) -> GroupPairing {
    let hm = cp.m.cohomology(i);
    let hn = cp.mv.cohomology(j);
    let ht = cp.eta.cohomology(i + j);
    let values = hm
        .gens_in_ambient
        .iter()
        .map(|x| {
            hn.gens_in_ambient
                .iter()
                .map(|y| {
                    let v = cp.eval(i, j, x, y);
                    ht.class_of(&v)
                })
                .collect()
        })
        .collect();
    GroupPairing {
        a: hm.group,
        b: hn.group,
        target: ht.group,
        values,
    }
}

/// Sample coboundary perturbations of the representatives and verify the
/// cohomology pairing values do not move.
pub fn representative_independence_check<R: rand::Rng>(
    cp: &ChainPairing,
    i: i32,
    j: i32,
    perturbations: usize,
    rng: &mut R,
) -> bool {
    let hm = cp.m.cohomology(i);
    let hn = cp.mv.cohomology(j);
    let ht = cp.eta.cohomology(i + j);
    let prev_m = cp.m.group(i - 1);
    let prev_n = cp.mv.group(j - 1);
    for x in &hm.gens_in_ambient {
        for y in &hn.gens_in_ambient {
            let base = ht.class_of(&cp.eval(i, j, x, y));
            for _ in 0..perturbations {
                let xi = random_el(&prev_m, rng);
                let eta_el = random_el(&prev_n, rng);
                let x2 = cp.m.group(i).add(x, &cp.m.diff(i - 1).apply(&xi));
                let y2 = cp.mv.group(j).add(y, &cp.mv.diff(j - 1).apply(&eta_el));
                let v = ht.class_of(&cp.eval(i, j, &x2, &y2));
                if v != base {
                    return false;
                }
            }
        }
    }
    true
}

pub fn random_el<R: rand::Rng>(a: &FinAb, rng: &mut R) -> El {
    El(a.factors().iter().map(|&n| rng.gen_range(0..n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(n: i128) -> FinAb {
        FinAb::cyclic(n)
    }

    /// A pairing concentrated in degree 0: Z/n x Z/n -> Z/n (multiplication).
    fn mult_pairing(n: i128) -> ChainPairing {
        let c = FinComplex::concentrated(0, z(n));
        let mut comps = BTreeMap::new();
        comps.insert(
            (0, 0),
            BiMap {
                values: vec![vec![El(vec![1])]],
            },
        );
        ChainPairing::new(c.clone(), c.clone(), c, comps).unwrap()
    }

    #[test]
    fn direct_sum_structure() {
        let s = direct_sum(&z(2), &z(4));
        assert_eq!(s.group.factors(), &[2, 4]);
        let x = z(2).gen(0);
        assert_eq!(s.proj_a.apply(&s.inj_a.apply(&x)), x);
        assert!(z(4).is_zero(&s.proj_b.apply(&s.inj_a.apply(&x))));
        let sum_of_projs = s
            .inj_a
            .compose(&s.proj_a)
            .add(&s.inj_b.compose(&s.proj_b));
        assert!(sum_of_projs.same_map(&FinHom::identity(&s.group)));
        // non-chain moduli normalize
        let s2 = direct_sum(&z(4), &z(2));
        assert_eq!(s2.group.factors(), &[2, 4]);
    }

    #[test]
    fn shift_sign_rule() {
        let phi = mult_pairing(3);
        assert!(phi.shift(0).same_pairing(&phi));
        // s = 1: the only component sits at (i, j) = (-1, 1), negated (odd i)
        let sh = phi.shift(1);
        let a = sh.m.group(-1);
        let b = sh.mv.group(1);
        assert_eq!(a.factors(), &[3]);
        let v = sh.eval(-1, 1, &a.gen(0), &b.gen(0));
        assert_eq!(v, z(3).reduce(&[-1]));
        // double shift equals s = 2 up to the global Koszul sign (-1)^{s s'}
        let twice = phi.shift(1).shift(1);
        let direct = phi.shift(2);
        let a2 = twice.m.group(-2);
        let v_twice = twice.eval(-2, 2, &a2.gen(0), &twice.mv.group(2).gen(0));
        let v_direct = direct.eval(-2, 2, &a2.gen(0), &direct.mv.group(2).gen(0));
        assert_eq!(v_twice, z(3).neg(&v_direct));
        // on 2-torsion the sign washes out: literal equality
        let phi2 = mult_pairing(2);
        assert!(phi2.shift(1).shift(1).same_pairing(&phi2.shift(2)));
    }

    #[test]
    fn cone_examples() {
        // u = id: cone acyclic
        let m = FinComplex::concentrated(0, z(4));
        let u = ChainMap::new(m.clone(), m.clone(), {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::identity(&z(4)));
            c
        })
        .unwrap();
        let c = cone(&u).unwrap();
        for deg in c.complex.lo..=c.complex.hi() {
            assert!(c.complex.cohomology_group(deg).is_trivial(), "deg {deg}");
        }

        // u = 0: cone is M1[1] + M2 degreewise
        let u0 = ChainMap::new(m.clone(), m.clone(), BTreeMap::new()).unwrap();
        let c0 = cone(&u0).unwrap();
        assert_eq!(c0.complex.cohomology_group(-1).factors(), &[4]);
        assert_eq!(c0.complex.cohomology_group(0).factors(), &[4]);

        // u = x2 on Z/4: H^0(C) = Z/2, H^{-1}(C) = Z/2
        let u2 = ChainMap::new(m.clone(), m.clone(), {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::new(z(4), z(4), vec![vec![2]]).unwrap());
            c
        })
        .unwrap();
        let c2 = cone(&u2).unwrap();
        assert_eq!(c2.complex.cohomology_group(0).factors(), &[2]);
        assert_eq!(c2.complex.cohomology_group(-1).factors(), &[2]);

        // non-chain-map rejected: identity in degree 0 but zero in degree 1
        let m2 = FinComplex::new(0, vec![z(2), z(2)], vec![FinHom::identity(&z(2))]).unwrap();
        let bad = ChainMap::new(m2.clone(), m2, {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::identity(&z(2)));
            c
        });
        assert!(matches!(bad, Err(ComplexError::NotChainMap)));
    }

    #[test]
    fn cone_pairing_identity_morphism() {
        let phi = mult_pairing(4);
        let u = ChainMap::new(phi.m.clone(), phi.m.clone(), {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::identity(&z(4)));
            c
        })
        .unwrap();
        let uv = u.clone();
        let pm = PairingMorphism::new(phi.clone(), phi.clone(), u, uv).unwrap();
        let cp = cone_pairing(&pm).unwrap();
        assert!(cp.squares_commute(&pm));
    }

    #[test]
    fn cone_pairing_zero_morphism_is_orthogonal_sum() {
        let phi = mult_pairing(4);
        let u = ChainMap::new(phi.m.clone(), phi.m.clone(), BTreeMap::new()).unwrap();
        let pm = PairingMorphism::new(phi.clone(), phi.clone(), u.clone(), u).unwrap();
        let cp = cone_pairing(&pm).unwrap();
        assert!(cp.squares_commute(&pm));
        // cross terms vanish
        let x = cp.cone.j2.comp(0).apply(&z(4).gen(0));
        let y = cp.cocone.j1.comp(0).apply(&z(4).gen(0));
        let v = cp.pairing.eval(0, 0, &x, &y);
        assert!(cp.pairing.eta.group(0).is_zero(&v));
    }

    #[test]
    fn pairing_morphism_validation() {
        let phi2 = mult_pairing(2);
        let phi4 = mult_pairing(4);
        let u = ChainMap::new(phi2.m.clone(), phi4.m.clone(), {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::new(z(2), z(4), vec![vec![2]]).unwrap());
            c
        })
        .unwrap();
        let uv = ChainMap::new(phi4.mv.clone(), phi2.mv.clone(), {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::new(z(4), z(2), vec![vec![1]]).unwrap());
            c
        })
        .unwrap();
        // etas differ, so the squares cannot match: expect error
        let res = PairingMorphism::new(phi2, phi4, u, uv);
        assert!(matches!(res, Err(ComplexError::NotPairingMorphism)));
    }

    #[test]
    fn cohomology_pairing_single_degree() {
        let phi = mult_pairing(6);
        let gp = cohomology_pairing(&phi, 0, 0);
        assert_eq!(gp.a.factors(), &[6]);
        assert_eq!(gp.target.factors(), &[6]);
        let qz = gp.to_qz().unwrap();
        assert!(qz.analysis().perfect);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        assert!(representative_independence_check(&phi, 0, 0, 5, &mut rng));
    }

    #[test]
    fn cohomology_pairing_cone_of_mult2() {
        let phi = mult_pairing(4);
        let u = ChainMap::new(phi.m.clone(), phi.m.clone(), {
            let mut c = BTreeMap::new();
            c.insert(0, FinHom::new(z(4), z(4), vec![vec![2]]).unwrap());
            c
        })
        .unwrap();
        let uv = u.clone();
        let pm = PairingMorphism::new(phi.clone(), phi.clone(), u, uv).unwrap();
        let cp = cone_pairing(&pm).unwrap();
        assert!(cp.squares_commute(&pm));
        let gp = cohomology_pairing(&cp.pairing, 0, 0);
        // values match enumeration at chain level
        let hm = cp.pairing.m.cohomology(0);
        let hn = cp.pairing.mv.cohomology(0);
        let ht = cp.pairing.eta.cohomology(0);
        for (gi, x) in hm.gens_in_ambient.iter().enumerate() {
            for (hj, y) in hn.gens_in_ambient.iter().enumerate() {
                let direct =
                    ht.class_of(&cp.pairing.eval(0, 0, x, y));
                assert_eq!(gp.values[gi][hj], direct);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        assert!(representative_independence_check(&cp.pairing, 0, 0, 5, &mut rng));
    }
}
