//! Multivariate polynomials over `F_q` in the p-basis variables `t_1..t_d`.
//!
//! Terms are kept sorted in descending graded-lexicographic order with no zero
//! coefficients, so equality is structural. The gcd is the subresultant-free
//! Euclidean algorithm on the highest active variable with content recursion.

use crate::error::FieldError;
use crate::fq::{Fq, FqElem};

/// Exponent vector; length is the number of variables `d`.
pub type Mon = Vec<u32>;

/// Graded-lexicographic order: total degree first, then lex (earlier variable
/// dominates).
pub fn grlex_cmp(a: &Mon, b: &Mon) -> std::cmp::Ordering {
    let ta: u64 = a.iter().map(|&x| x as u64).sum();
    let tb: u64 = b.iter().map(|&x| x as u64).sum();
    ta.cmp(&tb).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    /// Sorted descending by `grlex_cmp`, no zero coefficients.
    pub(crate) terms: Vec<(Mon, FqElem)>,
}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly { terms: Vec::new() }
    }

    pub fn constant(fq: &Fq, c: FqElem, d: usize) -> MPoly {
        MPoly::normalize(fq, vec![(vec![0; d], c)])
    }

    pub fn one(fq: &Fq, d: usize) -> MPoly {
        MPoly::constant(fq, fq.one(), d)
    }

    pub fn from_int(fq: &Fq, n: i64, d: usize) -> MPoly {
        MPoly::constant(fq, fq.from_int(n), d)
    }

    pub fn var(fq: &Fq, j: usize, d: usize) -> MPoly {
        let mut m = vec![0; d];
        m[j] = 1;
        MPoly::normalize(fq, vec![(m, fq.one())])
    }

    pub fn monomial(fq: &Fq, m: Mon, c: FqElem) -> MPoly {
        MPoly::normalize(fq, vec![(m, c)])
    }

    pub fn normalize(fq: &Fq, mut terms: Vec<(Mon, FqElem)>) -> MPoly {
        terms.sort_by(|a, b| grlex_cmp(&b.0, &a.0));
        let mut out: Vec<(Mon, FqElem)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == m {
                    last.1 = fq.add(&last.1, &c);
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !fq.is_zero(c));
        MPoly { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self, fq: &Fq) -> bool {
        self.terms.len() == 1
            && self.terms[0].0.iter().all(|&e| e == 0)
            && self.terms[0].1 == fq.one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.iter().all(|(m, _)| m.iter().all(|&e| e == 0))
    }

    /// Leading (grlex-largest) term.
    pub fn lt(&self) -> Option<(&Mon, &FqElem)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mon, &FqElem)> {
        self.terms.iter().map(|(m, c)| (m, c))
    }

    pub fn coeff_at(&self, m: &Mon) -> Option<&FqElem> {
        self.terms.iter().find(|(mm, _)| mm == m).map(|(_, c)| c)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, fq: &Fq, other: &MPoly) -> MPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MPoly::normalize(fq, terms)
    }

    pub fn neg(&self, fq: &Fq) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), fq.neg(c)))
                .collect(),
        }
    }

    pub fn sub(&self, fq: &Fq, other: &MPoly) -> MPoly {
        self.add(fq, &other.neg(fq))
    }

    pub fn mul(&self, fq: &Fq, other: &MPoly) -> MPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Mon = ma.iter().zip(mb).map(|(&x, &y)| x + y).collect();
                terms.push((m, fq.mul(ca, cb)));
            }
        }
        MPoly::normalize(fq, terms)
    }

    pub fn scale(&self, fq: &Fq, c: &FqElem) -> MPoly {
        if fq.is_zero(c) {
            return MPoly::zero();
        }
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), fq.mul(x, c)))
                .collect(),
        }
    }

    pub fn pow(&self, fq: &Fq, mut n: u32) -> MPoly {
        let d = self.terms.first().map(|(m, _)| m.len()).unwrap_or(0);
        let mut res = MPoly::one(fq, d);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                res = res.mul(fq, &base);
            }
            base = base.mul(fq, &base);
            n >>= 1;
        }
        res
    }

    /// Exact division: `Some(self / g)` when `g` divides `self`.
    pub fn try_div(&self, fq: &Fq, g: &MPoly) -> Option<MPoly> {
        let (ltg_m, ltg_c) = g.lt()?;
        let ltg_c_inv = fq.inv(ltg_c).ok()?;
        let mut r = self.clone();
        let mut q_terms = Vec::new();
        while let Some((ltr_m, ltr_c)) = r.lt() {
            if !ltg_m.iter().zip(ltr_m).all(|(&ge, &re)| re >= ge) {
                return None;
            }
            let qm: Mon = ltr_m.iter().zip(ltg_m).map(|(&re, &ge)| re - ge).collect();
            let qc = fq.mul(ltr_c, &ltg_c_inv);
            let qt = MPoly::monomial(fq, qm.clone(), qc.clone());
            r = r.sub(fq, &qt.mul(fq, g));
            q_terms.push((qm, qc));
        }
        Some(MPoly::normalize(fq, q_terms))
    }

    pub fn div_exact(&self, fq: &Fq, g: &MPoly) -> MPoly {
        self.try_div(fq, g).expect("exact division failed")
    }

    /// Degree in variable `j`.
    pub fn deg_in(&self, j: usize) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m[j]).max()
    }

    /// Minimum exponent of variable `j` over all terms (the `t_j`-adic order
    /// of a nonzero polynomial).
    pub fn min_deg_in(&self, j: usize) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m[j]).min()
    }

    /// Coefficient of `x_j^k`, as a polynomial with the `j` exponent zeroed.
    pub fn coeff_in(&self, fq: &Fq, j: usize, k: u32) -> MPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[j] == k)
            .map(|(m, c)| {
                let mut m2 = m.clone();
                m2[j] = 0;
                (m2, c.clone())
            })
            .collect();
        MPoly::normalize(fq, terms)
    }

    /// Multiply by `x_j^k`.
    pub fn shift_var(&self, j: usize, k: i64) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2[j] = (m2[j] as i64 + k) as u32;
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    /// Substitute `x_j = 0`.
    pub fn eval_var_zero(&self, fq: &Fq, j: usize) -> MPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[j] == 0)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        MPoly::normalize(fq, terms)
    }

    /// Drop variable `j` from the exponent vectors (requires exponent 0 everywhere).
    pub fn contract_var(&self, j: usize) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    debug_assert_eq!(m[j], 0);
                    let mut m2 = m.clone();
                    m2.remove(j);
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    /// Insert a fresh variable with exponent 0 at position `j`.
    pub fn extend_var(&self, j: usize) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2.insert(j, 0);
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    /// Exact partial derivative with respect to variable `j`.
    pub fn partial(&self, fq: &Fq, j: usize) -> MPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[j] > 0)
            .map(|(m, c)| {
                let mut m2 = m.clone();
                m2[j] -= 1;
                (m2, fq.scale(c, m[j] as i64))
            })
            .collect();
        MPoly::normalize(fq, terms)
    }

    /// Componentwise p-th root: requires every exponent divisible by `p`
    /// (coefficients in the perfect `F_q` always have roots).
    pub fn pth_root(&self, fq: &Fq) -> Result<MPoly, FieldError> {
        let p = fq.p() as u32;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            if m.iter().any(|&e| e % p != 0) {
                return Err(FieldError::NotAPthPower);
            }
            let m2: Mon = m.iter().map(|&e| e / p).collect();
            terms.push((m2, fq.pth_root(c)));
        }
        Ok(MPoly::normalize(fq, terms))
    }

    /// Split terms by exponent class mod `p`; keys are the classes that occur.
    pub fn split_mod_p(&self, fq: &Fq) -> Vec<(Mon, MPoly)> {
        let p = fq.p() as u32;
        let mut buckets: std::collections::BTreeMap<Mon, Vec<(Mon, FqElem)>> =
            std::collections::BTreeMap::new();
        for (m, c) in &self.terms {
            let class: Mon = m.iter().map(|&e| e % p).collect();
            buckets.entry(class).or_default().push((m.clone(), c.clone()));
        }
        buckets
            .into_iter()
            .map(|(class, terms)| (class, MPoly::normalize(fq, terms)))
            .collect()
    }

    /// Scale so the grlex-leading coefficient is 1.
    pub fn monic(&self, fq: &Fq) -> MPoly {
        match self.lt() {
            None => MPoly::zero(),
            Some((_, c)) => {
                let c_inv = fq.inv(c).expect("leading coefficient nonzero");
                self.scale(fq, &c_inv)
            }
        }
    }

    /// Highest variable index occurring with positive exponent.
    fn top_var(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.iter().enumerate().filter(|(_, &e)| e > 0).map(|(j, _)| j))
            .max()
    }

    /// Monic gcd by primitive pseudo-remainder sequences on the highest active
    /// variable, with content recursion into the remaining variables.
    pub fn gcd(fq: &Fq, a: &MPoly, b: &MPoly) -> MPoly {
        if a.is_zero() {
            return b.monic(fq);
        }
        if b.is_zero() {
            return a.monic(fq);
        }
        if a.is_constant() || b.is_constant() {
            let d = a.terms[0].0.len();
            return MPoly::one(fq, d);
        }
        let j = match a.top_var().into_iter().chain(b.top_var()).max() {
            None => return MPoly::one(fq, a.terms[0].0.len()), // nonzero constants
            Some(j) => j,
        };
        let (ca, pa) = content_pp(fq, a, j);
        let (cb, pb) = content_pp(fq, b, j);
        let cont = MPoly::gcd(fq, &ca, &cb);

        let mut f = pa;
        let mut g = pb;
        if f.deg_in(j) < g.deg_in(j) {
            std::mem::swap(&mut f, &mut g);
        }
        while !g.is_zero() {
            let r = pseudo_rem(fq, &f, &g, j);
            f = g;
            g = if r.is_zero() {
                MPoly::zero()
            } else {
                content_pp(fq, &r, j).1
            };
        }
        cont.mul(fq, &f).monic(fq)
    }
}

/// Content (gcd of the `x_j`-coefficients) and primitive part with respect to `x_j`.
fn content_pp(fq: &Fq, f: &MPoly, j: usize) -> (MPoly, MPoly) {
    let deg = f.deg_in(j).expect("nonzero");
    let mut cont = MPoly::zero();
    for k in 0..=deg {
        let c = f.coeff_in(fq, j, k);
        if !c.is_zero() {
            cont = MPoly::gcd(fq, &cont, &c);
        }
    }
    let pp = f.div_exact(fq, &cont);
    (cont, pp)
}

/// Pseudo-remainder of `f` by `g` in the variable `x_j`.
fn pseudo_rem(fq: &Fq, f: &MPoly, g: &MPoly, j: usize) -> MPoly {
    let dg = g.deg_in(j).expect("nonzero divisor");
    let lcg = g.coeff_in(fq, j, dg);
    let mut r = f.clone();
    loop {
        let dr = match r.deg_in(j) {
            None => return r,
            Some(d) => d,
        };
        if r.is_zero() || dr < dg {
            return r;
        }
        let lcr = r.coeff_in(fq, j, dr);
        // r := lcg * r - lcr * x_j^(dr-dg) * g
        let lead = lcr.shift_var(j, (dr - dg) as i64).mul(fq, g);
        r = r.mul(fq, &lcg).sub(fq, &lead);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Fq {
        Fq::new(2).unwrap()
    }

    fn f3() -> Fq {
        Fq::new(3).unwrap()
    }

    #[test]
    fn mul_char2_square() {
        let fq = f2();
        let t = MPoly::var(&fq, 0, 1);
        let tp1 = t.add(&fq, &MPoly::one(&fq, 1));
        let sq = tp1.mul(&fq, &tp1);
        // (t+1)^2 = t^2 + 1
        let expect = t.mul(&fq, &t).add(&fq, &MPoly::one(&fq, 1));
        assert_eq!(sq, expect);
    }

    #[test]
    fn exact_division_detects_failure() {
        let fq = f3();
        let t = MPoly::var(&fq, 0, 1);
        let f = t.mul(&fq, &t); // t^2
        assert!(f.try_div(&fq, &t).is_some());
        let tp1 = t.add(&fq, &MPoly::one(&fq, 1));
        assert!(f.try_div(&fq, &tp1).is_none());
    }

    #[test]
    fn gcd_univariate() {
        let fq = f3();
        let t = MPoly::var(&fq, 0, 1);
        let a = t.add(&fq, &MPoly::one(&fq, 1)); // t+1
        let b = t.add(&fq, &MPoly::from_int(&fq, 2, 1)); // t+2
        let f = a.mul(&fq, &a).mul(&fq, &b);
        let g = a.mul(&fq, &b).mul(&fq, &b);
        let gcd = MPoly::gcd(&fq, &f, &g);
        assert_eq!(gcd, a.mul(&fq, &b).monic(&fq));
    }

    #[test]
    fn gcd_bivariate() {
        let fq = f2();
        let t1 = MPoly::var(&fq, 0, 2);
        let t2 = MPoly::var(&fq, 1, 2);
        let common = t1.add(&fq, &t2); // t1+t2
        let f = common.mul(&fq, &t1);
        let g = common.mul(&fq, &t2.add(&fq, &MPoly::one(&fq, 2)));
        let gcd = MPoly::gcd(&fq, &f, &g);
        assert_eq!(gcd, common);
    }

    #[test]
    fn gcd_coprime_is_one() {
        let fq = f3();
        let t1 = MPoly::var(&fq, 0, 2);
        let t2 = MPoly::var(&fq, 1, 2);
        let gcd = MPoly::gcd(&fq, &t1, &t2);
        assert!(gcd.is_one(&fq));
    }

    #[test]
    fn pth_root_exponent_criterion() {
        let fq = f3();
        let t = MPoly::var(&fq, 0, 1);
        assert_eq!(t.pth_root(&fq).unwrap_err(), FieldError::NotAPthPower);
        let cube = t.pow(&fq, 3);
        assert_eq!(cube.pth_root(&fq).unwrap(), t);
    }

    #[test]
    fn partial_derivative_char_p() {
        let fq = f2();
        let t = MPoly::var(&fq, 0, 1);
        let sq = t.mul(&fq, &t);
        assert!(sq.partial(&fq, 0).is_zero()); // d(t^2)/dt = 0 in char 2
        assert!(sq.lt().is_some());
    }
}
