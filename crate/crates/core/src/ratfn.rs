//! Rational functions in canonical form: monic denominator under graded-lex
//! order, gcd-reduced. Equality of values coincides with structural equality.

use crate::error::FieldError;
use crate::fq::Fq;
use crate::poly::MPoly;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: MPoly,
    den: MPoly,
}

impl RatFn {
    pub fn new(fq: &Fq, num: MPoly, den: MPoly) -> Result<RatFn, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(RatFn::reduce(fq, num, den))
    }

    fn reduce(fq: &Fq, num: MPoly, den: MPoly) -> RatFn {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            let d = den.lt().map(|(m, _)| m.len()).unwrap_or(0);
            return RatFn {
                num: MPoly::zero(),
                den: MPoly::one(fq, d),
            };
        }
        if den.is_one(fq) {
            return RatFn { num, den };
        }
        let (mut num, mut den) = if den.is_constant() {
            (num, den)
        } else {
            let g = MPoly::gcd(fq, &num, &den);
            if g.is_one(fq) {
                (num, den)
            } else {
                (num.div_exact(fq, &g), den.div_exact(fq, &g))
            }
        };
        let lc = den.lt().expect("nonzero").1.clone();
        if lc != fq.one() {
            let inv = fq.inv(&lc).expect("nonzero leading coefficient");
            num = num.scale(fq, &inv);
            den = den.scale(fq, &inv);
        }
        RatFn { num, den }
    }

    pub fn from_poly(fq: &Fq, num: MPoly, d: usize) -> RatFn {
        RatFn::reduce(fq, num, MPoly::one(fq, d))
    }

    pub fn zero(fq: &Fq, d: usize) -> RatFn {
        RatFn {
            num: MPoly::zero(),
            den: MPoly::one(fq, d),
        }
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self, fq: &Fq) -> bool {
        self.den.is_one(fq)
    }

    pub fn add(&self, fq: &Fq, other: &RatFn) -> RatFn {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return RatFn::reduce(fq, self.num.add(fq, &other.num), self.den.clone());
        }
        let num = self
            .num
            .mul(fq, &other.den)
            .add(fq, &other.num.mul(fq, &self.den));
        let den = self.den.mul(fq, &other.den);
        RatFn::reduce(fq, num, den)
    }

    pub fn neg(&self, fq: &Fq) -> RatFn {
        RatFn {
            num: self.num.neg(fq),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, fq: &Fq, other: &RatFn) -> RatFn {
        self.add(fq, &other.neg(fq))
    }

    pub fn mul(&self, fq: &Fq, other: &RatFn) -> RatFn {
        if self.is_zero() || other.is_zero() {
            let d = self.den.lt().map(|(m, _)| m.len()).unwrap_or(0);
            return RatFn::zero(fq, d);
        }
        // Cross-cancel before multiplying; keeps intermediate degrees down.
        let g1 = MPoly::gcd(fq, &self.num, &other.den);
        let g2 = MPoly::gcd(fq, &other.num, &self.den);
        let n1 = self.num.div_exact(fq, &g1);
        let d2 = other.den.div_exact(fq, &g1);
        let n2 = other.num.div_exact(fq, &g2);
        let d1 = self.den.div_exact(fq, &g2);
        RatFn::reduce(fq, n1.mul(fq, &n2), d1.mul(fq, &d2))
    }

    pub fn inv(&self, fq: &Fq) -> Result<RatFn, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(RatFn::reduce(fq, self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, fq: &Fq, other: &RatFn) -> Result<RatFn, FieldError> {
        Ok(self.mul(fq, &other.inv(fq)?))
    }

    pub fn pow(&self, fq: &Fq, n: i64) -> Result<RatFn, FieldError> {
        let base = if n < 0 { self.inv(fq)? } else { self.clone() };
        let k = n.unsigned_abs() as u32;
        Ok(RatFn {
            num: base.num.pow(fq, k),
            den: base.den.pow(fq, k),
        })
    }

    /// Frobenius `x -> x^p`; preserves canonical form.
    pub fn frobenius(&self, fq: &Fq) -> RatFn {
        let p = fq.p() as u32;
        RatFn {
            num: self.num.pow(fq, p),
            den: self.den.pow(fq, p),
        }
    }

    /// The unique p-th root when one exists: clear to `(num * den^(p-1)) / den^p`
    /// and apply the componentwise exponent criterion to the numerator.
    pub fn pth_root(&self, fq: &Fq) -> Result<RatFn, FieldError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let p = fq.p() as u32;
        let cleared = self.num.mul(fq, &self.den.pow(fq, p - 1));
        let root = cleared.pth_root(fq)?;
        Ok(RatFn::reduce(fq, root, self.den.clone()))
    }

    /// Exact partial derivative in variable `j` (quotient rule).
    pub fn partial(&self, fq: &Fq, j: usize) -> RatFn {
        let num = self
            .num
            .partial(fq, j)
            .mul(fq, &self.den)
            .sub(fq, &self.num.mul(fq, &self.den.partial(fq, j)));
        let den = self.den.mul(fq, &self.den);
        RatFn::reduce(fq, num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_examples() {
        let fq = Fq::new(3).unwrap();
        let t = MPoly::var(&fq, 0, 1);
        // 2t/2 reduces to t/1
        let two = MPoly::from_int(&fq, 2, 1);
        let f = RatFn::new(&fq, two.mul(&fq, &t), two.clone()).unwrap();
        assert_eq!(f, RatFn::from_poly(&fq, t.clone(), 1));
        // inv(t) * t = 1
        let ft = RatFn::from_poly(&fq, t, 1);
        let inv = ft.inv(&fq).unwrap();
        let prod = ft.mul(&fq, &inv);
        assert_eq!(prod, RatFn::from_poly(&fq, MPoly::one(&fq, 1), 1));
    }

    #[test]
    fn zero_denominator_rejected() {
        let fq = Fq::new(2).unwrap();
        assert_eq!(
            RatFn::new(&fq, MPoly::one(&fq, 1), MPoly::zero()).unwrap_err(),
            FieldError::DivisionByZero
        );
    }

    #[test]
    fn pth_root_of_fraction() {
        let fq = Fq::new(2).unwrap();
        let t = MPoly::var(&fq, 0, 1);
        let tp1 = t.add(&fq, &MPoly::one(&fq, 1));
        // 1/(t+1): not a square; its square has root 1/(t+1)
        let f = RatFn::new(&fq, MPoly::one(&fq, 1), tp1).unwrap();
        let sq = f.mul(&fq, &f);
        assert_eq!(sq.pth_root(&fq).unwrap(), f);
        let t_rat = RatFn::from_poly(&fq, t, 1);
        assert_eq!(t_rat.pth_root(&fq).unwrap_err(), FieldError::NotAPthPower);
    }

    #[test]
    fn quotient_rule() {
        let fq = Fq::new(3).unwrap();
        let t = MPoly::var(&fq, 0, 1);
        let f = RatFn::new(&fq, MPoly::one(&fq, 1), t.clone()).unwrap(); // 1/t
        let df = f.partial(&fq, 0); // -1/t^2
        let expect = RatFn::new(&fq, MPoly::from_int(&fq, -1, 1), t.mul(&fq, &t)).unwrap();
        assert_eq!(df, expect);
    }
}
