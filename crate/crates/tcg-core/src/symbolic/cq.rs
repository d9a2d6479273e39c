use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact complex rational `re + i im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CQ {
    pub re: BigRational,
    pub im: BigRational,
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn q64(r: Rational64) -> BigRational {
    q(*r.numer(), *r.denom())
}

pub fn q_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl CQ {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(BigRational::one())
    }

    pub fn i() -> Self {
        CQ {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn real(re: BigRational) -> Self {
        CQ {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::real(q(n, 1))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::real(q(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CQ {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(CQ {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = CQ::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    /// Leading sign used when rendering sums.
    pub fn is_negative_lead(&self) -> bool {
        if self.re.is_zero() {
            self.im.is_negative()
        } else {
            self.re.is_negative() && (self.im.is_zero())
        }
    }
}

impl Add for &CQ {
    type Output = CQ;
    fn add(self, o: &CQ) -> CQ {
        CQ {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &CQ {
    type Output = CQ;
    fn sub(self, o: &CQ) -> CQ {
        CQ {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &CQ {
    type Output = CQ;
    fn mul(self, o: &CQ) -> CQ {
        if self.im.is_zero() && o.im.is_zero() {
            return CQ::real(&self.re * &o.re);
        }
        CQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &CQ {
    type Output = CQ;
    fn neg(self) -> CQ {
        CQ {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

fn fmt_q(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for CQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_q(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_q(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({} {} {}*i)", fmt_q(&self.re), sign, fmt_q(&self.im.abs()))
            }
        }
    }
}
