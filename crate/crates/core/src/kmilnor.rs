//! Milnor symbols mod p over `K = k(t)` with the t-adic valuation: dlog
//! classes, tame-symbol residues, Kato unit filtrations, and the symbol
//! identities behind the injectivity filtration.

use thiserror::Error;

use crate::derham::{dlog, DeRhamError, DiffForm, IdxSet};
use crate::fields::{KElem, PBasisField};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KmilnorError {
    #[error("symbol entry is zero")]
    ZeroEntry,
    #[error("element is not a t-adic unit")]
    NotAUnit,
    #[error("unit level too low: have {have}, need {need}")]
    LevelTooLow { have: i64, need: i64 },
    #[error("unit must satisfy v(u - 1) >= 2")]
    BadUnit,
    #[error("element is not Laurent in t")]
    NotLaurent,
    #[error(transparent)]
    DeRham(#[from] DeRhamError),
}

/// A Milnor symbol `{x_1, ..., x_r}`: a tuple of nonzero field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilnorSymbol {
    pub entries: Vec<KElem>,
}

impl MilnorSymbol {
    pub fn new(entries: Vec<KElem>) -> Result<MilnorSymbol, KmilnorError> {
        if entries.iter().any(|x| x.is_zero()) {
            return Err(KmilnorError::ZeroEntry);
        }
        Ok(MilnorSymbol { entries })
    }

    pub fn degree(&self) -> usize {
        self.entries.len()
    }
}

/// A formal integer combination of symbols of equal degree. Equality mod p is
/// decided by dlog-image equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSum {
    pub degree: usize,
    pub terms: Vec<(i64, MilnorSymbol)>,
}

impl SymbolSum {
    pub fn zero(degree: usize) -> SymbolSum {
        SymbolSum {
            degree,
            terms: vec![],
        }
    }

    pub fn single(sym: MilnorSymbol) -> SymbolSum {
        SymbolSum {
            degree: sym.degree(),
            terms: vec![(1, sym)],
        }
    }

    pub fn add_term(&mut self, coeff: i64, sym: MilnorSymbol) {
        assert_eq!(sym.degree(), self.degree);
        if coeff != 0 {
            self.terms.push((coeff, sym));
        }
    }

    pub fn add(&self, other: &SymbolSum) -> SymbolSum {
        assert_eq!(self.degree, other.degree);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        SymbolSum {
            degree: self.degree,
            terms,
        }
    }

    pub fn neg(&self) -> SymbolSum {
        SymbolSum {
            degree: self.degree,
            terms: self.terms.iter().map(|(c, s)| (-c, s.clone())).collect(),
        }
    }

    /// Drop symbols containing an entry equal to 1 (they vanish in `K_*^M`).
    pub fn simplify(&self, k: &PBasisField) -> SymbolSum {
        SymbolSum {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(_, s)| !s.entries.iter().any(|x| *x == k.one()))
                .cloned()
                .collect(),
        }
    }

    /// The dlog image: the equality oracle for symbols mod p.
    pub fn dlog_class(&self, k: &PBasisField) -> Result<DiffForm, KmilnorError> {
        let mut acc = DiffForm::zero(self.degree);
        for (c, s) in &self.terms {
            let d = dlog(k, &s.entries)?;
            acc = acc.add(k, &d.scale(k, &k.from_int(*c)));
        }
        Ok(acc)
    }

    pub fn eq_mod_p(&self, k: &PBasisField, other: &SymbolSum) -> Result<bool, KmilnorError> {
        Ok(self.dlog_class(k)? == other.dlog_class(k)?)
    }
}

/// The dlog image of a single symbol.
pub fn symbol_dlog_class(k: &PBasisField, s: &MilnorSymbol) -> Result<DiffForm, KmilnorError> {
    Ok(dlog(k, &s.entries)?)
}

/// A field `K = k(t)` with the t-adic valuation; `t` is the last p-basis
/// variable and the residue field `k` lives on the remaining ones.
#[derive(Debug, Clone)]
pub struct ValuedField {
    pub field: PBasisField,
}

impl ValuedField {
    pub fn new(field: PBasisField) -> ValuedField {
        assert!(field.d() >= 1, "valued field needs a uniformizer variable");
        ValuedField { field }
    }

    pub fn t_index(&self) -> usize {
        self.field.d() - 1
    }

    pub fn uniformizer(&self) -> KElem {
        self.field.var(self.t_index())
    }

    /// The residue field on the first `d - 1` variables.
    pub fn residue_field(&self) -> PBasisField {
        PBasisField::new(
            self.field.fq().clone(),
            self.field.var_names()[..self.field.d() - 1].to_vec(),
        )
        .expect("valid names")
    }

    /// t-adic valuation; `None` for 0.
    pub fn v(&self, x: &KElem) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        let j = self.t_index();
        let vn = x.num().min_deg_in(j).expect("nonzero") as i64;
        let vd = x.den().min_deg_in(j).expect("nonzero") as i64;
        Some(vn - vd)
    }

    /// Splits `x = u * t^v` with `u` a t-adic unit.
    pub fn unit_part(&self, x: &KElem) -> Option<(i64, KElem)> {
        let v = self.v(x)?;
        let k = &self.field;
        let u = k.mul(x, &k.pow(&self.uniformizer(), -v).expect("t nonzero"));
        debug_assert_eq!(self.v(&u), Some(0));
        Some((v, u))
    }

    /// Residue of a valuation-0 element: substitute `t = 0`.
    pub fn residue(&self, u: &KElem) -> Result<KElem, KmilnorError> {
        if self.v(u) != Some(0) {
            return Err(KmilnorError::NotAUnit);
        }
        let fq = self.field.fq();
        let j = self.t_index();
        let num = u.num().eval_var_zero(fq, j).contract_var(j);
        let den = u.den().eval_var_zero(fq, j).contract_var(j);
        debug_assert!(!den.is_zero());
        Ok(crate::ratfn::RatFn::new(fq, num, den).expect("denominator nonzero"))
    }

    /// Residue of any element of valuation `>= 0` (zero when positive).
    pub fn residue0(&self, x: &KElem) -> Result<KElem, KmilnorError> {
        let kres = self.residue_field();
        match self.v(x) {
            None => Ok(kres.zero()),
            Some(0) => self.residue(x),
            Some(v) if v > 0 => Ok(kres.zero()),
            Some(_) => Err(KmilnorError::NotAUnit),
        }
    }

    /// Is `x` Laurent in `t` (denominator a `t`-monomial times a `t`-free poly)?
    pub fn is_laurent_in_t(&self, x: &KElem) -> bool {
        if x.is_zero() {
            return true;
        }
        let j = self.t_index();
        let den = x.den();
        den.min_deg_in(j) == den.deg_in(j)
    }

    /// Lift an element of the residue field into `K`.
    pub fn lift(&self, x: &KElem) -> KElem {
        let fq = self.field.fq();
        let j = self.t_index();
        crate::ratfn::RatFn::new(fq, x.num().extend_var(j), x.den().extend_var(j))
            .expect("denominator nonzero")
    }
}

/// The tame symbol `K_r^M(K)/p -> K_{r-1}^M(k)/p` at the t-adic place:
/// `{t, u_2, .., u_r}` maps to the residue symbol of the units, pure-unit
/// symbols die, and repeated-`t` terms are rewritten through `{t,t} = {-1,t}`
/// before expansion.
pub fn tame_symbol(vf: &ValuedField, s: &MilnorSymbol) -> Result<SymbolSum, KmilnorError> {
    let k = &vf.field;
    if s.entries.iter().any(|x| x.is_zero()) {
        return Err(KmilnorError::ZeroEntry);
    }
    let kres = vf.residue_field();
    let out_degree = s.degree().saturating_sub(1);
    let mut out = SymbolSum::zero(out_degree);

    #[derive(Clone)]
    enum Slot {
        Unit(KElem),
        T,
    }
    // multilinear expansion: each slot contributes its unit part and v * {t}
    let mut terms: Vec<(i64, Vec<Slot>)> = vec![(1, vec![])];
    for x in &s.entries {
        let (v, u) = vf.unit_part(x).expect("nonzero");
        let mut next = Vec::new();
        for (c, partial) in &terms {
            if u != k.one() {
                let mut w = partial.clone();
                w.push(Slot::Unit(u.clone()));
                next.push((*c, w));
            }
            if v != 0 {
                let mut w = partial.clone();
                w.push(Slot::T);
                next.push((c * v, w));
            }
        }
        terms = next;
    }

    for (mut coeff, mut slots) in terms {
        // rewrite repeated t's
        loop {
            let t_positions: Vec<usize> = slots
                .iter()
                .enumerate()
                .filter(|(_, s)| matches!(s, Slot::T))
                .map(|(i, _)| i)
                .collect();
            if t_positions.len() <= 1 {
                break;
            }
            let (i, j) = (t_positions[0], t_positions[1]);
            // move the second t next to the first, then {t,t} = {-1,t}
            if (j - i - 1) % 2 == 1 {
                coeff = -coeff;
            }
            slots.remove(j);
            slots[i] = Slot::Unit(k.from_int(-1));
            slots.insert(i + 1, Slot::T);
        }
        match slots.iter().position(|s| matches!(s, Slot::T)) {
            None => continue, // pure units vanish under the residue
            Some(i) => {
                if i % 2 == 1 {
                    coeff = -coeff;
                }
                let residues: Result<Vec<KElem>, _> = slots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, s)| match s {
                        Slot::Unit(u) => vf.residue(u),
                        Slot::T => unreachable!(),
                    })
                    .collect();
                out.add_term(coeff, MilnorSymbol::new(residues?)?);
            }
        }
    }
    Ok(out.simplify(&kres))
}

/// The coefficient-of-`dt/t`-at-`t^0` residue of a form over `K = k(t)`:
/// each `I`-term with `t` in `I` contributes its `t^0` coefficient, with the
/// sign from moving `dt/t` to the front.
pub fn differential_residue(vf: &ValuedField, omega: &DiffForm) -> Result<DiffForm, KmilnorError> {
    let kres = vf.residue_field();
    let tbit: IdxSet = 1 << vf.t_index();
    let out_degree = omega.degree().saturating_sub(1);
    let mut out = DiffForm::zero(out_degree);
    for (set, c) in omega.terms() {
        if set & tbit == 0 {
            continue;
        }
        let r0 = vf.residue0(c)?;
        if r0.is_zero() {
            continue;
        }
        // dt_I/t_I = (-1)^{|I|-1} (dt/t) ^ dt_{I'}/t_{I'}, t the largest index
        let coeff = if (omega.degree() - 1) % 2 == 1 {
            kres.neg(&r0)
        } else {
            r0
        };
        out = out.add(&kres, &DiffForm::monomial_form(&kres, set & !tbit, coeff));
    }
    Ok(out)
}

/// Cross-validate `dlog(tame_symbol(s)) = differential_residue(dlog(s))` for a
/// symbol with Laurent entries.
pub fn residue_compatibility_one(
    vf: &ValuedField,
    s: &MilnorSymbol,
) -> Result<bool, KmilnorError> {
    if !s.entries.iter().all(|x| vf.is_laurent_in_t(x)) {
        return Err(KmilnorError::NotLaurent);
    }
    let kres = vf.residue_field();
    let lhs = tame_symbol(vf, s)?.dlog_class(&kres)?;
    let rhs = differential_residue(vf, &dlog(&vf.field, &s.entries)?)?;
    Ok(lhs == rhs)
}

/// Seeded batch form of the residue cross-validation: random degree-2 symbols
/// with Laurent entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCompatReport {
    pub pass: usize,
    pub total: usize,
}

pub fn residue_compatibility_check(
    vf: &ValuedField,
    samples: usize,
    seed: u64,
) -> Result<ResidueCompatReport, KmilnorError> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let k = &vf.field;
    let t = vf.uniformizer();
    let mut pass = 0;
    for _ in 0..samples {
        let mut entries = Vec::new();
        for _ in 0..2 {
            let v: i64 = rng.gen_range(-2..3);
            let unit = loop {
                let p = k.random_poly(&mut rng, 2, 3);
                let cand = k.add(
                    &k.one(),
                    &crate::ratfn::RatFn::from_poly(k.fq(), p, k.d()),
                );
                if !cand.is_zero() && vf.v(&cand) == Some(0) && vf.is_laurent_in_t(&cand) {
                    break cand;
                }
            };
            entries.push(k.mul(&k.pow(&t, v).expect("t nonzero"), &unit));
        }
        if residue_compatibility_one(vf, &MilnorSymbol::new(entries)?)? {
            pass += 1;
        }
    }
    Ok(ResidueCompatReport {
        pass,
        total: samples,
    })
}

/// Largest `i` with `v(x - 1) >= i`; 0 when `v(x) != 0` or `v(x-1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitLevel {
    Finite(i64),
    /// `x = 1` lies in every level.
    Infinite,
}

pub fn unit_filtration_level(vf: &ValuedField, x: &KElem) -> UnitLevel {
    let k = &vf.field;
    if vf.v(x) != Some(0) {
        return UnitLevel::Finite(0);
    }
    match vf.v(&k.sub(x, &k.one())) {
        None => UnitLevel::Infinite,
        Some(n) if n > 0 => UnitLevel::Finite(n),
        _ => UnitLevel::Finite(0),
    }
}

/// `1 + a pi^i -> residue(a)`: the graded piece of the unit filtration.
pub fn graded_unit_map(vf: &ValuedField, x: &KElem, i: i64) -> Result<KElem, KmilnorError> {
    assert!(i >= 1);
    match unit_filtration_level(vf, x) {
        UnitLevel::Infinite => Ok(vf.residue_field().zero()),
        UnitLevel::Finite(n) if n >= i => {
            let k = &vf.field;
            let num = k.sub(x, &k.one());
            let shifted = k.mul(&num, &k.pow(&vf.uniformizer(), -i).expect("t nonzero"));
            vf.residue0(&shifted)
        }
        UnitLevel::Finite(n) => Err(KmilnorError::LevelTooLow { have: n, need: i }),
    }
}

/// The injectivity-filtration step: for `u = 1 + a t^n` with `n >= 2`, setting
/// `x = -a (1 - t) t^(n-1)` gives `{u, t} = {1 + x, 1 - t - x t}`; verified on
/// dlog images, exactly.
pub fn unit_descent_identity(vf: &ValuedField, a: &KElem, n: i64) -> Result<bool, KmilnorError> {
    if n < 2 {
        return Err(KmilnorError::BadUnit);
    }
    let k = &vf.field;
    let t = vf.uniformizer();
    let u = k.add(&k.one(), &k.mul(a, &k.pow(&t, n).expect("positive power")));
    if u.is_zero() {
        return Err(KmilnorError::ZeroEntry);
    }
    if a.is_zero() {
        return Ok(true); // both sides are symbols containing 1
    }
    // x = -a (1 - t) t^(n-1)
    let x = k.neg(&k.mul(
        a,
        &k.mul(&k.sub(&k.one(), &t), &k.pow(&t, n - 1).expect("power")),
    ));
    let one_plus_x = k.add(&k.one(), &x);
    let w = k.sub(&k.sub(&k.one(), &t), &k.mul(&x, &t)); // 1 - t - x t
    if one_plus_x.is_zero() || w.is_zero() {
        return Err(KmilnorError::ZeroEntry);
    }
    let lhs = dlog(k, &[u, t])?;
    let rhs = dlog(k, &[one_plus_x, w])?;
    Ok(lhs == rhs)
}
