//! Double-double arithmetic, enough to evaluate exact closed forms whose
//! large coefficients cancel.

use std::ops::{Add, Mul, Neg, Sub};

use crate::poly::rational::to_f64;
use crate::poly::Rational;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_rational(r: &Rational) -> Dd {
        let hi = to_f64(r);
        match Rational::from_float(hi) {
            Some(h) if hi.is_finite() => Dd { hi, lo: to_f64(&(r - h)) },
            _ => Dd { hi, lo: 0.0 },
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let rem = two_sum(self.hi, -p);
        let q2 = (rem.hi + rem.lo - e + self.lo) / d;
        quick_two_sum(q1, q2)
    }

    fn scale_pow2(self, k: i32) -> Dd {
        // Two steps so that 2^k itself never overflows or underflows.
        let half = k / 2;
        let a = 2f64.powi(half);
        let b = 2f64.powi(k - half);
        Dd { hi: self.hi * a * b, lo: self.lo * a * b }
    }

    pub fn exp(self) -> Dd {
        if self.hi < -746.0 {
            return Dd::ZERO;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * Dd::from_f64(k);
        const SQUARINGS: i32 = 8;
        let r = r.scale_pow2(-SQUARINGS);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..=14 {
            term = (term * r).div_f64(n as f64);
            sum = sum + term;
        }
        let mut e = sum;
        for _ in 0..SQUARINGS {
            e = e * e;
        }
        e.scale_pow2(k as i32)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let v = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(v.hi, v.lo + t.lo)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}
