//! Exact arithmetic in the finite field `F_q`, `q = p^e`.
//!
//! The field is a context object; elements are residue polynomials of degree
//! `< e` over `F_p`, stored as fixed-length coefficient vectors. The modulus
//! is verified irreducible at construction by trial factorization.

use crate::error::FieldError;

/// The finite field `F_q` with `q = p^e`, presented as `F_p[g]/(modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fq {
    p: u64,
    e: usize,
    /// Little-endian coefficients, degree `e`, monic.
    modulus: Vec<u64>,
}

/// An element of `F_q`: residue polynomial coefficients, length `e`, reduced mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem(pub(crate) Vec<u64>);

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Built-in irreducible moduli (little-endian over `F_p`) for non-prime `q <= 64`.
fn builtin_modulus(p: u64, e: usize) -> Option<Vec<u64>> {
    let m: &[u64] = match (p, e) {
        (2, 2) => &[1, 1, 1],          // g^2 + g + 1
        (2, 3) => &[1, 1, 0, 1],       // g^3 + g + 1
        (2, 4) => &[1, 1, 0, 0, 1],    // g^4 + g + 1
        (2, 5) => &[1, 0, 1, 0, 0, 1], // g^5 + g^2 + 1
        (2, 6) => &[1, 1, 0, 0, 0, 0, 1],
        (3, 2) => &[1, 0, 1],    // g^2 + 1
        (3, 3) => &[1, 2, 0, 1], // g^3 + 2g + 1
        (5, 2) => &[2, 0, 1],    // g^2 + 2
        (7, 2) => &[1, 0, 1],    // g^2 + 1
        _ => return None,
    };
    Some(m.to_vec())
}

// --- dense polynomial helpers over F_p (little-endian, used only for the modulus) ---

fn pdeg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn prem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = pdeg(b).expect("division by zero polynomial");
    let lb_inv = mod_inv(b[db], p);
    let mut r = a.to_vec();
    while let Some(dr) = pdeg(&r) {
        if dr < db {
            break;
        }
        let c = (r[dr] * lb_inv) % p;
        for i in 0..=db {
            let t = (c * b[i]) % p;
            r[dr - db + i] = (r[dr - db + i] + p - t) % p;
        }
    }
    r
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p.
    let mut res = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            res = res * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    res
}

fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let e = match pdeg(modulus) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if e == 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=e/2.
    let mut divisor = vec![0u64; e / 2 + 2];
    for d in 1..=e / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            for c in divisor.iter_mut() {
                *c = 0;
            }
            let mut k = idx;
            for i in 0..d {
                divisor[i] = k % p;
                k /= p;
            }
            divisor[d] = 1;
            let r = prem(modulus, &divisor[..=d], p);
            if pdeg(&r).is_none() {
                return false;
            }
        }
    }
    true
}

impl Fq {
    /// Field with a built-in modulus; `q` must be a prime power with `q <= 64`
    /// when `q` is not prime.
    pub fn new(q: u64) -> Result<Fq, FieldError> {
        let (p, e) = split_prime_power(q)?;
        if e == 1 {
            return Fq::with_modulus(p, vec![0, 1]);
        }
        let modulus = builtin_modulus(p, e).ok_or(FieldError::NoBuiltinModulus(q))?;
        Fq::with_modulus(p, modulus)
    }

    /// Field `F_p[g]/(modulus)` with a user-supplied monic irreducible modulus
    /// (little-endian coefficients; its degree is the extension degree).
    pub fn with_modulus(p: u64, mut modulus: Vec<u64>) -> Result<Fq, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        for c in modulus.iter_mut() {
            *c %= p;
        }
        let e = pdeg(&modulus).ok_or(FieldError::ReducibleModulus)?;
        if e == 0 {
            return Err(FieldError::ReducibleModulus);
        }
        modulus.truncate(e + 1);
        if modulus[e] != 1 {
            let inv = mod_inv(modulus[e], p);
            for c in modulus.iter_mut() {
                *c = *c * inv % p;
            }
        }
        if !is_irreducible(&modulus, p) {
            return Err(FieldError::ReducibleModulus);
        }
        Ok(Fq { p, e, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.e as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem(vec![0; self.e])
    }

    pub fn one(&self) -> FqElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FqElem {
        let mut v = vec![0; self.e];
        v[0] = n.rem_euclid(self.p as i64) as u64;
        FqElem(v)
    }

    /// The residue class of the generator `g` (for `e = 1` this is the class of 0's
    /// successor base point, i.e. the class of the variable, which reduces to 0).
    pub fn gen(&self) -> FqElem {
        if self.e == 1 {
            // g is a root of the degree-1 modulus x + c, i.e. g = -c.
            let c = self.modulus[0];
            let mut v = vec![0; 1];
            v[0] = (self.p - c) % self.p;
            FqElem(v)
        } else {
            let mut v = vec![0; self.e];
            v[1] = 1;
            FqElem(v)
        }
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + y) % self.p)
                .collect(),
        )
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        FqElem(a.0.iter().map(|&x| (self.p - x) % self.p).collect())
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let mut prod = vec![0u64; 2 * self.e];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        let r = prem(&prod, &self.modulus, self.p);
        let mut v = vec![0; self.e];
        v[..r.len().min(self.e)].copy_from_slice(&r[..r.len().min(self.e)]);
        FqElem(v)
    }

    pub fn scale(&self, a: &FqElem, n: i64) -> FqElem {
        let c = self.from_int(n);
        self.mul(a, &c)
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem, FieldError> {
        if self.is_zero(a) {
            return Err(FieldError::DivisionByZero);
        }
        // a^(q-2)
        Ok(self.pow_u(a, self.q() - 2))
    }

    fn pow_u(&self, a: &FqElem, mut n: u64) -> FqElem {
        let mut res = self.one();
        let mut base = a.clone();
        while n > 0 {
            if n & 1 == 1 {
                res = self.mul(&res, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        res
    }

    pub fn pow(&self, a: &FqElem, n: i64) -> Result<FqElem, FieldError> {
        if n >= 0 {
            Ok(self.pow_u(a, n as u64))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow_u(&inv, n.unsigned_abs()))
        }
    }

    /// Frobenius `x -> x^p`.
    pub fn frobenius(&self, a: &FqElem) -> FqElem {
        self.pow_u(a, self.p)
    }

    /// The unique `p`-th root in the perfect field `F_q`: `x -> x^(q/p)`.
    pub fn pth_root(&self, a: &FqElem) -> FqElem {
        self.pow_u(a, self.q() / self.p)
    }

    /// Absolute trace `Tr_{F_q/F_p}(x) = x + x^p + ... + x^(p^(e-1))`, as an
    /// integer in `0..p`.
    pub fn trace(&self, a: &FqElem) -> u64 {
        let mut acc = self.zero();
        let mut term = a.clone();
        for _ in 0..self.e {
            acc = self.add(&acc, &term);
            term = self.frobenius(&term);
        }
        debug_assert!(acc.0[1..].iter().all(|&c| c == 0), "trace not in F_p");
        acc.0[0]
    }

    /// All `q` elements, in a fixed mixed-radix order.
    pub fn enumerate(&self) -> impl Iterator<Item = FqElem> + '_ {
        let q = self.q();
        (0..q).map(move |mut k| {
            let mut v = vec![0; self.e];
            for c in v.iter_mut() {
                *c = k % self.p;
                k /= self.p;
            }
            FqElem(v)
        })
    }

    /// Artin-Schreier data for `x`: the trace and, when the trace vanishes, a
    /// solution `a` of `a^p - a = x` found by enumeration.
    pub fn artin_schreier(&self, x: &FqElem) -> ArtinSchreier {
        let trace = self.trace(x);
        let solution = if trace == 0 {
            self.enumerate()
                .find(|a| self.sub(&self.frobenius(a), a) == *x)
        } else {
            None
        };
        ArtinSchreier { trace, solution }
    }

    /// Format as a polynomial in `g` (compact, canonical).
    pub fn format(&self, a: &FqElem) -> String {
        let mut parts = Vec::new();
        for (i, &c) in a.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let s = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "g".to_string(),
                (1, c) => format!("{c}*g"),
                (i, 1) => format!("g^{i}"),
                (i, c) => format!("{c}*g^{i}"),
            };
            parts.push(s);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }
}

/// Result of the Artin-Schreier map analysis over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtinSchreier {
    pub trace: u64,
    pub solution: Option<FqElem>,
}

fn split_prime_power(q: u64) -> Result<(u64, usize), FieldError> {
    if q < 2 {
        return Err(FieldError::NotPrimePower(q));
    }
    for p in 2..=q {
        if q % p == 0 {
            if !is_prime(p) {
                return Err(FieldError::NotPrimePower(q));
            }
            let mut e = 0;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if m != 1 {
                return Err(FieldError::NotPrimePower(q));
            }
            return Ok((p, e));
        }
    }
    Err(FieldError::NotPrimePower(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_addition() {
        let f = Fq::new(2).unwrap();
        assert_eq!(f.add(&f.one(), &f.one()), f.zero());
    }

    #[test]
    fn builtin_moduli_are_irreducible() {
        for q in [4u64, 8, 9, 16, 25, 27, 32, 49, 64] {
            let f = Fq::new(q).unwrap();
            assert_eq!(f.q(), q);
        }
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 + 1 = (x+1)^2 over F_2
        assert_eq!(
            Fq::with_modulus(2, vec![1, 0, 1]).unwrap_err(),
            FieldError::ReducibleModulus
        );
    }

    #[test]
    fn frobenius_orbit_closes() {
        for q in [4u64, 9, 8, 27] {
            let f = Fq::new(q).unwrap();
            for x in f.enumerate() {
                let mut y = x.clone();
                for _ in 0..f.e() {
                    y = f.frobenius(&y);
                }
                assert_eq!(y, x);
            }
        }
    }

    #[test]
    fn inverse_law() {
        let f = Fq::new(9).unwrap();
        for x in f.enumerate().filter(|x| !f.is_zero(x)) {
            let i = f.inv(&x).unwrap();
            assert_eq!(f.mul(&x, &i), f.one());
        }
        assert_eq!(f.inv(&f.zero()).unwrap_err(), FieldError::DivisionByZero);
    }

    #[test]
    fn pth_root_inverts_frobenius() {
        let f = Fq::new(8).unwrap();
        for x in f.enumerate() {
            assert_eq!(f.pth_root(&f.frobenius(&x)), x);
            assert_eq!(f.frobenius(&f.pth_root(&x)), x);
        }
    }

    #[test]
    fn artin_schreier_over_f2_and_f4() {
        let f2 = Fq::new(2).unwrap();
        let r = f2.artin_schreier(&f2.zero());
        assert_eq!(r.trace, 0);
        assert_eq!(r.solution, Some(f2.zero()));
        let r = f2.artin_schreier(&f2.one());
        assert_eq!(r.trace, 1);
        assert_eq!(r.solution, None);

        let f4 = Fq::new(4).unwrap();
        let r = f4.artin_schreier(&f4.one());
        assert_eq!(r.trace, 0);
        let a = r.solution.expect("solution exists");
        // a^2 - a = 1, i.e. a^2 + a + 1 = 0 in char 2
        let lhs = f4.add(&f4.mul(&a, &a), &f4.add(&a, &f4.one()));
        assert!(f4.is_zero(&lhs));
    }

    #[test]
    fn trace_kernel_has_index_p() {
        for q in [2u64, 4, 8, 9, 27, 25] {
            let f = Fq::new(q).unwrap();
            let k = f.enumerate().filter(|x| f.trace(x) == 0).count() as u64;
            assert_eq!(k, q / f.p());
        }
    }
}
