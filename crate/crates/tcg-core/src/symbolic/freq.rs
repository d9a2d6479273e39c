use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, TcgError};

pub type Symbol = Arc<str>;

pub fn sym(name: &str) -> Symbol {
    Arc::from(name)
}

/// Rational linear combination of frequency symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreqExpr {
    coeffs: BTreeMap<Symbol, Rational64>,
}

impl FreqExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symbol(name: &str) -> Self {
        Self::term(name, Rational64::one())
    }

    pub fn term(name: &str, c: Rational64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(sym(name), c);
        }
        FreqExpr { coeffs }
    }

    pub fn from_terms<I: IntoIterator<Item = (Symbol, Rational64)>>(it: I) -> Self {
        let mut out = FreqExpr::zero();
        for (s, c) in it {
            out.add_term(s, c);
        }
        out
    }

    fn add_term(&mut self, s: Symbol, c: Rational64) {
        let e = self.coeffs.entry(s.clone()).or_insert_with(Rational64::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    pub fn coeff(&self, name: &str) -> Rational64 {
        self.coeffs.get(name).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Symbol, &Rational64)> {
        self.coeffs.iter()
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.coeffs.contains_key(name)
    }

    pub fn scale(&self, c: Rational64) -> Self {
        if c.is_zero() {
            return FreqExpr::zero();
        }
        FreqExpr {
            coeffs: self.coeffs.iter().map(|(s, v)| (s.clone(), v * c)).collect(),
        }
    }

    /// Drops the given symbol.
    pub fn without(&self, name: &str) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(name);
        out
    }

    pub fn substitute(&self, name: &str, by: &FreqExpr) -> Self {
        match self.coeffs.get(name) {
            None => self.clone(),
            Some(c) => &self.without(name) + &by.scale(*c),
        }
    }

    /// Splits into `scale * unit` where the first coefficient of `unit` is +1.
    pub fn normalize(&self) -> Option<(Rational64, FreqExpr)> {
        let lead = *self.coeffs.values().next()?;
        Some((lead, self.scale(lead.recip())))
    }

    /// Same as `normalize` but only fixes the sign.
    pub fn sign_normalize(&self) -> (bool, FreqExpr) {
        match self.coeffs.values().next() {
            Some(c) if c.is_negative() => (true, -self),
            _ => (false, self.clone()),
        }
    }

    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (s, c) in &self.coeffs {
            let v = lookup(s).ok_or_else(|| TcgError::UnresolvedSymbol(s.to_string()))?;
            acc += (*c.numer() as f64 / *c.denom() as f64) * v;
        }
        Ok(acc)
    }

    pub fn is_single_symbol(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.values().next().is_some_and(|c| c.is_one())
    }
}

impl fmt::Display for FreqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if a.is_one() {
                write!(f, "{s}")?;
            } else {
                write!(f, "{a}*{s}")?;
            }
        }
        Ok(())
    }
}

impl Add for &FreqExpr {
    type Output = FreqExpr;
    fn add(self, rhs: &FreqExpr) -> FreqExpr {
        let mut out = self.clone();
        for (s, c) in &rhs.coeffs {
            out.add_term(s.clone(), *c);
        }
        out
    }
}

impl Sub for &FreqExpr {
    type Output = FreqExpr;
    fn sub(self, rhs: &FreqExpr) -> FreqExpr {
        self + &(-rhs)
    }
}

impl Neg for &FreqExpr {
    type Output = FreqExpr;
    fn neg(self) -> FreqExpr {
        self.scale(-Rational64::one())
    }
}

impl Mul<Rational64> for &FreqExpr {
    type Output = FreqExpr;
    fn mul(self, rhs: Rational64) -> FreqExpr {
        self.scale(rhs)
    }
}

pub fn sum<'a, I: IntoIterator<Item = &'a FreqExpr>>(it: I) -> FreqExpr {
    let mut out = FreqExpr::zero();
    for x in it {
        for (s, c) in &x.coeffs {
            out.add_term(s.clone(), *c);
        }
    }
    out
}
