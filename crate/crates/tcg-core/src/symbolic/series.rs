//! Truncated Laurent series in a frequency regulator symbol.

use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use crate::error::{Result, TcgError};

use super::cq::{q, q64, CQ};
use super::freq::FreqExpr;
use super::scalar::{Atom, Monomial, ScalarExpr};

/// Coefficients of eps^lo .. eps^hi.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub lo: i32,
    pub coeffs: Vec<ScalarExpr>,
}

impl Series {
    pub fn constant(e: ScalarExpr) -> Self {
        Series { lo: 0, coeffs: vec![e] }
    }

    pub fn zero() -> Self {
        Series { lo: 0, coeffs: vec![] }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32 - 1
    }

    pub fn coeff(&self, order: i32) -> ScalarExpr {
        let k = order - self.lo;
        if k < 0 || k as usize >= self.coeffs.len() {
            ScalarExpr::zero()
        } else {
            self.coeffs[k as usize].clone()
        }
    }

    pub fn mul(&self, o: &Series, hi: i32) -> Series {
        let lo = self.lo + o.lo;
        if hi < lo {
            return Series { lo, coeffs: vec![] };
        }
        let n = (hi - lo + 1) as usize;
        let mut coeffs = vec![ScalarExpr::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= n {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j].add_assign(&(a * b));
                }
            }
        }
        Series { lo, coeffs }
    }

    pub fn add_assign(&mut self, o: &Series) {
        if o.coeffs.is_empty() {
            return;
        }
        if self.coeffs.is_empty() {
            *self = o.clone();
            return;
        }
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        let mut coeffs = vec![ScalarExpr::zero(); (hi - lo + 1) as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.lo - lo) as usize + k].add_assign(c);
        }
        for (k, c) in o.coeffs.iter().enumerate() {
            coeffs[(o.lo - lo) as usize + k].add_assign(c);
        }
        *self = Series { lo, coeffs };
    }

    pub fn scale(&self, c: &ScalarExpr) -> Series {
        Series {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Orders below zero whose coefficients are not symbolically zero.
    pub fn negative_orders(&self) -> Vec<i32> {
        (self.lo..0).filter(|&k| !self.coeff(k).is_zero()).collect()
    }
}

/// Gaussian Taylor coefficients c(n,k) from the recursion
/// c(n+1,k) = -c(n,k) + (n-2k+2) c(n,k-1), c(0,0)=1, c(n,-1)=0, c(n,k)=0 for n<2k.
pub fn gaussian_c_table(nmax: usize) -> Vec<Vec<BigRational>> {
    let mut t: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for n in 0..nmax {
        let row = &t[n];
        let get = |k: i64| -> BigRational {
            if k < 0 || k as usize >= row.len() {
                BigRational::zero()
            } else {
                row[k as usize].clone()
            }
        };
        let kmax = n.div_ceil(2);
        let next: Vec<BigRational> = (0..=kmax as i64)
            .map(|k| -get(k) + q(n as i64 - 2 * k + 2, 1) * get(k - 1))
            .collect();
        t.push(next);
    }
    t
}

pub fn gaussian_c(n: i64, k: i64) -> BigRational {
    if k < 0 || n < 2 * k || n < 0 {
        return BigRational::zero();
    }
    gaussian_c_table(n as usize)[n as usize][k as usize].clone()
}

fn binom_general(p: i32, j: usize) -> BigRational {
    let mut r = BigRational::one();
    for m in 0..j {
        r = r * q(p as i64 - m as i64, 1) / q(m as i64 + 1, 1);
    }
    r
}

fn factorial(n: usize) -> BigRational {
    (1..=n).fold(BigRational::one(), |a, k| a * q(k as i64, 1))
}

/// Splits `w = w0 + c*reg`.
fn split(w: &FreqExpr, reg: &str) -> (FreqExpr, Rational64) {
    (w.without(reg), w.coeff(reg))
}

fn atom_lo(a: &Atom, p: i32, reg: &str) -> i32 {
    match a {
        Atom::Freq(w) if w.contains(reg) && split(w, reg).0.is_zero() => p,
        _ => 0,
    }
}

fn atom_series(a: &Atom, p: i32, reg: &str, hi: i32, table: &[Vec<BigRational>]) -> Result<Series> {
    match a {
        Atom::Freq(w) if w.contains(reg) => {
            let (w0, c) = split(w, reg);
            if w0.is_zero() {
                let cp = num_traits::pow(q64(c), p.unsigned_abs() as usize);
                let cp = if p < 0 { cp.recip() } else { cp };
                return Ok(Series {
                    lo: p,
                    coeffs: vec![ScalarExpr::constant(CQ::real(cp))],
                });
            }
            let n = (hi.max(-1) + 1) as usize;
            let mut coeffs = Vec::with_capacity(n);
            for j in 0..n {
                let b = binom_general(p, j) * num_traits::pow(q64(c), j);
                let base = ScalarExpr::freq_pow(&w0, p - j as i32)?;
                coeffs.push(base.scale(&CQ::real(b)));
            }
            Ok(Series { lo: 0, coeffs })
        }
        Atom::Filter(w) if w.contains(reg) => {
            let (w0, c) = split(w, reg);
            let n = (hi.max(-1) + 1) as usize;
            if n >= table.len() {
                return Err(TcgError::Resource("series order exceeds coefficient table".into()));
            }
            let f0 = ScalarExpr::filter(&w0);
            let mut one = Series { lo: 0, coeffs: Vec::with_capacity(n) };
            for (m, row) in table.iter().enumerate().take(n) {
                let pref = num_traits::pow(q64(c), m) / factorial(m);
                let mut acc = ScalarExpr::zero();
                for (k, ck) in row.iter().enumerate().take(m / 2 + 1) {
                    if ck.is_zero() {
                        continue;
                    }
                    let xpow = m - 2 * k;
                    let xp = ScalarExpr::freq_pow(&w0, xpow as i32)?;
                    if xp.is_zero() {
                        continue;
                    }
                    let t = ScalarExpr::tau().pow(2 * (m - k) as u32);
                    acc.add_assign(&(&xp * &t).scale(&CQ::real(ck * &pref)));
                }
                one.coeffs.push(&acc * &f0);
            }
            if p < 0 {
                return Err(TcgError::Shape("negative power of a filter factor".into()));
            }
            let mut out = Series::constant(ScalarExpr::one());
            for _ in 0..p {
                out = out.mul(&one, hi);
            }
            Ok(out)
        }
        _ => Ok(Series::constant(ScalarExpr::from_monomial(Monomial::atom(a.clone(), p), CQ::one()))),
    }
}

/// Laurent expansion of `e` in the frequency symbol `reg`, kept through order `hi`.
/// Filter atoms are expanded with the Gaussian Taylor series.
pub fn expand(e: &ScalarExpr, reg: &str, hi: i32) -> Result<Series> {
    let mut total = Series::zero();
    let mut table: Vec<Vec<BigRational>> = Vec::new();
    for (m, c) in e.terms() {
        let los: Vec<i32> = m.factors().iter().map(|(a, p)| atom_lo(a, *p, reg)).collect();
        let lo_sum: i32 = los.iter().sum();
        if lo_sum > hi {
            continue;
        }
        let mut acc = Series::constant(ScalarExpr::constant(c.clone()));
        for (k, (a, p)) in m.factors().iter().enumerate() {
            // room left for this factor given the minimal orders of the others
            let room = hi - (lo_sum - los[k]);
            if matches!(a, Atom::Filter(w) if w.contains(reg)) {
                let need = (room + 1).max(1) as usize;
                if table.len() <= need {
                    table = gaussian_c_table(need + 1);
                }
            }
            let s = atom_series(a, *p, reg, room, &table)?;
            acc = acc.mul(&s, hi);
        }
        total.add_assign(&acc);
    }
    Ok(total)
}
