use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Result, TcgError};

use super::cq::{q64, CQ};
use super::filter::FilterKind;
use super::freq::{sym, FreqExpr, Symbol};

pub const TAU: &str = "tau";
pub const TIME: &str = "t";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Real parameter.
    Sym(Symbol),
    /// Complex parameter; the flag marks the conjugate.
    CSym(Symbol, bool),
    /// Linear frequency form with leading coefficient +1.
    Freq(FreqExpr),
    /// Filter factor f(w), argument sign-normalized.
    Filter(FreqExpr),
}

impl Atom {
    fn conj(&self) -> Atom {
        match self {
            Atom::CSym(s, c) => Atom::CSym(s.clone(), !c),
            a => a.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, p: i32) -> Self {
        if p == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, p)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let p = a[i].1 + b[j].1;
                    if p != 0 {
                        out.push((a[i].0.clone(), p));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, e: i32) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, p)| (a.clone(), p * e)).collect())
    }

    fn conj(&self) -> Monomial {
        let mut v: Vec<_> = self.0.iter().map(|(a, p)| (a.conj(), *p)).collect();
        v.sort_by(|x, y| x.0.cmp(&y.0));
        Monomial(v)
    }

    pub fn has_filter(&self) -> bool {
        self.0.iter().any(|(a, _)| matches!(a, Atom::Filter(_)))
    }

    pub fn power_of_symbol(&self, name: &str) -> i32 {
        self.0
            .iter()
            .filter(|(a, _)| matches!(a, Atom::Sym(s) | Atom::CSym(s, _) if &**s == name))
            .map(|(_, p)| *p)
            .sum()
    }

    pub fn from_factors(mut v: Vec<(Atom, i32)>) -> Monomial {
        v.sort_by(|x, y| x.0.cmp(&y.0));
        let mut out: Vec<(Atom, i32)> = Vec::with_capacity(v.len());
        for (a, p) in v {
            match out.last_mut() {
                Some(last) if last.0 == a => last.1 += p,
                _ => out.push((a, p)),
            }
        }
        out.retain(|(_, p)| *p != 0);
        Monomial(out)
    }
}

/// Numeric values for free symbols plus the filter shape used for `f` atoms.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    values: BTreeMap<String, Complex64>,
    pub filter: FilterKind,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, v: impl Into<Complex64>) -> &mut Self {
        self.values.insert(name.to_string(), v.into());
        self
    }

    pub fn with(mut self, name: &str, v: impl Into<Complex64>) -> Self {
        self.set(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.values.get(name).copied()
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        self.get(name).map(|v| v.re)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.values.keys()
    }

    pub fn freq(&self, w: &FreqExpr) -> Result<f64> {
        w.eval(&|s| self.real(s))
    }
}

/// Laurent polynomial over symbolic atoms with exact complex-rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScalarExpr {
    terms: BTreeMap<Monomial, CQ>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(CQ::one())
    }

    pub fn i() -> Self {
        Self::constant(CQ::i())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(CQ::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(CQ::ratio(n, d))
    }

    pub fn constant(c: CQ) -> Self {
        Self::from_monomial(Monomial::one(), c)
    }

    pub fn from_monomial(m: Monomial, c: CQ) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ScalarExpr { terms }
    }

    pub fn symbol(name: &str) -> Self {
        Self::from_monomial(Monomial::atom(Atom::Sym(sym(name)), 1), CQ::one())
    }

    pub fn complex_symbol(name: &str, conj: bool) -> Self {
        Self::from_monomial(Monomial::atom(Atom::CSym(sym(name), conj), 1), CQ::one())
    }

    pub fn tau() -> Self {
        Self::symbol(TAU)
    }

    pub fn time() -> Self {
        Self::symbol(TIME)
    }

    /// A frequency linear form as a scalar.
    pub fn freq(w: &FreqExpr) -> Self {
        match w.normalize() {
            None => Self::zero(),
            Some((s, u)) => Self::from_monomial(Monomial::atom(Atom::Freq(u), 1), CQ::real(q64(s))),
        }
    }

    /// `w^p`; negative powers of a symbolically zero form are rejected.
    pub fn freq_pow(w: &FreqExpr, p: i32) -> Result<Self> {
        if p == 0 {
            return Ok(Self::one());
        }
        match w.normalize() {
            None if p < 0 => Err(TcgError::DivisionByZero(format!("symbolic zero {w}"))),
            None => Ok(Self::zero()),
            Some((s, u)) => {
                let sp = rational_pow(s, p);
                Ok(Self::from_monomial(Monomial::atom(Atom::Freq(u), p), CQ::real(sp)))
            }
        }
    }

    pub fn filter(w: &FreqExpr) -> Self {
        if w.is_zero() {
            return Self::one();
        }
        let (_, u) = w.sign_normalize();
        Self::from_monomial(Monomial::atom(Atom::Filter(u), 1), CQ::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CQ)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, CQ)> {
        self.terms.into_iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> CQ {
        self.terms.get(m).cloned().unwrap_or_else(CQ::zero)
    }

    pub fn as_constant(&self) -> Option<CQ> {
        match self.terms.len() {
            0 => Some(CQ::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: CQ) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, o: &ScalarExpr) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &CQ) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ScalarExpr {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &CQ) -> Self {
        let mut out = ScalarExpr::zero();
        for (k, v) in &self.terms {
            out.add_term(k.mul(m), v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.conj(), c.conj());
        }
        out
    }

    /// Reciprocal; defined for single monomials without filter atoms and for linear frequency forms.
    pub fn inverse(&self) -> Result<Self> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.has_filter() {
                return Err(TcgError::Shape("cannot invert a filter factor".into()));
            }
            let ci = c.inv().ok_or_else(|| TcgError::DivisionByZero("0".into()))?;
            return Ok(Self::from_monomial(m.pow(-1), ci));
        }
        match self.as_linear_freq() {
            Some(w) => Self::freq_pow(&w, -1),
            None if self.is_zero() => Err(TcgError::DivisionByZero("0".into())),
            None => Err(TcgError::Shape(format!("cannot invert `{self}`"))),
        }
    }

    /// Recognizes a real rational combination of single frequency atoms.
    pub fn as_linear_freq(&self) -> Option<FreqExpr> {
        if self.terms.is_empty() {
            return None;
        }
        let mut acc = FreqExpr::zero();
        for (m, c) in &self.terms {
            if !c.is_real() {
                return None;
            }
            match m.factors() {
                [(Atom::Freq(u), 1)] => {
                    let r = small_rational(&c.re)?;
                    acc = &acc + &u.scale(r);
                }
                _ => return None,
            }
        }
        Some(acc)
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                match a {
                    Atom::Sym(s) | Atom::CSym(s, _) => {
                        out.insert(s.to_string());
                    }
                    Atom::Freq(w) => out.extend(w.symbols().iter().map(|s| s.to_string())),
                    Atom::Filter(w) => {
                        out.extend(w.symbols().iter().map(|s| s.to_string()));
                        out.insert(TAU.to_string());
                    }
                }
            }
        }
        out
    }

    pub fn has_filter_atoms(&self) -> bool {
        self.terms.keys().any(|m| m.has_filter())
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.free_symbols().contains(name)
    }

    /// Drops every monomial carrying a filter factor of nonzero argument.
    pub fn drop_filtered(&self) -> Self {
        ScalarExpr {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.has_filter())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Rebuilds the expression atom by atom.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom, i32) -> Result<Option<ScalarExpr>>) -> Result<Self> {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            let mut keep = Vec::new();
            let mut prod = ScalarExpr::constant(c.clone());
            for (a, p) in m.factors() {
                match f(a, *p)? {
                    Some(e) => prod = &prod * &e,
                    None => keep.push((a.clone(), *p)),
                }
                if prod.is_zero() {
                    break;
                }
            }
            let km = Monomial::from_factors(keep);
            out.add_assign(&prod.mul_monomial(&km, &CQ::one()));
        }
        Ok(out)
    }

    pub fn substitute_symbol(&self, name: &str, by: &ScalarExpr) -> Result<Self> {
        let byc = by.conj();
        self.map_atoms(&|a, p| match a {
            Atom::Sym(s) | Atom::CSym(s, false) if &**s == name => Ok(Some(pow_signed(by, p)?)),
            Atom::CSym(s, true) if &**s == name => Ok(Some(pow_signed(&byc, p)?)),
            _ => Ok(None),
        })
    }

    pub fn substitute_freq(&self, name: &str, by: &FreqExpr) -> Result<Self> {
        self.map_atoms(&|a, p| match a {
            Atom::Freq(w) if w.contains(name) => Ok(Some(Self::freq_pow(&w.substitute(name, by), p)?)),
            Atom::Filter(w) if w.contains(name) => {
                Ok(Some(Self::filter(&w.substitute(name, by)).pow(p.max(0) as u32)))
            }
            _ => Ok(None),
        })
    }

    /// Groups monomials by their power of the real symbol `name`, with the symbol removed.
    pub fn split_power(&self, name: &str) -> BTreeMap<i32, ScalarExpr> {
        let mut out: BTreeMap<i32, ScalarExpr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let p = m.power_of_symbol(name);
            let rest = Monomial::from_factors(
                m.factors()
                    .iter()
                    .filter(|(a, _)| !matches!(a, Atom::Sym(s) if &**s == name))
                    .cloned()
                    .collect(),
            );
            out.entry(p).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, e| !e.is_zero());
        out
    }

    /// Value in the tau -> 0 limit, where every filter factor is 1.
    pub fn at_zero_tau(&self) -> Result<Self> {
        self.map_atoms(&|a, p| match a {
            Atom::Filter(_) => Ok(Some(ScalarExpr::one())),
            Atom::Sym(s) if &**s == TAU => {
                if p > 0 {
                    Ok(Some(ScalarExpr::zero()))
                } else {
                    Err(TcgError::DivergentLimit("negative power of tau".into()))
                }
            }
            _ => Ok(None),
        })
    }

    pub fn eval(&self, assign: &Assignment) -> Result<Complex64> {
        let mut acc = Complex64::zero();
        for (m, c) in &self.terms {
            let mut v = c.to_c64();
            for (a, p) in m.factors() {
                v *= eval_atom(a, *p, assign)?;
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Exact evaluation under a rational assignment; filter atoms are not allowed.
    pub fn eval_exact(&self, values: &BTreeMap<String, CQ>) -> Result<CQ> {
        let mut acc = CQ::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (a, p) in m.factors() {
                let base = match a {
                    Atom::Sym(s) | Atom::CSym(s, false) => lookup_exact(values, s)?,
                    Atom::CSym(s, true) => lookup_exact(values, s)?.conj(),
                    Atom::Freq(w) => {
                        let mut x = CQ::zero();
                        for (s, r) in w.terms() {
                            x = &x + &(&lookup_exact(values, s)? * &CQ::real(q64(*r)));
                        }
                        x
                    }
                    Atom::Filter(_) => {
                        return Err(TcgError::Shape("exact evaluation of a filter factor".into()))
                    }
                };
                let f = if *p < 0 {
                    base.inv().ok_or_else(|| TcgError::DivisionByZero(format!("{a:?}")))?
                } else {
                    base
                };
                v = &v * &f.pow(p.unsigned_abs());
            }
            acc = &acc + &v;
        }
        Ok(acc)
    }
}

fn lookup_exact(values: &BTreeMap<String, CQ>, s: &str) -> Result<CQ> {
    values
        .get(s)
        .cloned()
        .ok_or_else(|| TcgError::UnresolvedSymbol(s.to_string()))
}

fn pow_signed(e: &ScalarExpr, p: i32) -> Result<ScalarExpr> {
    if p >= 0 {
        Ok(e.pow(p as u32))
    } else {
        Ok(e.inverse()?.pow((-p) as u32))
    }
}

fn small_rational(x: &num_rational::BigRational) -> Option<Rational64> {
    use num_traits::ToPrimitive;
    Some(Rational64::new(x.numer().to_i64()?, x.denom().to_i64()?))
}

fn rational_pow(s: Rational64, p: i32) -> num_rational::BigRational {
    let b = q64(s);
    let r = num_traits::pow(b, p.unsigned_abs() as usize);
    if p < 0 {
        r.recip()
    } else {
        r
    }
}

fn eval_atom(a: &Atom, p: i32, assign: &Assignment) -> Result<Complex64> {
    let look = |s: &Symbol| {
        assign
            .get(s)
            .ok_or_else(|| TcgError::UnresolvedSymbol(s.to_string()))
    };
    let base = match a {
        Atom::Sym(s) | Atom::CSym(s, false) => look(s)?,
        Atom::CSym(s, true) => look(s)?.conj(),
        Atom::Freq(w) => {
            let x = assign.freq(w)?;
            if x == 0.0 && p < 0 {
                return Err(TcgError::DivisionByZero(w.to_string()));
            }
            Complex64::new(x, 0.0)
        }
        Atom::Filter(w) => {
            let x = assign.freq(w)?;
            let tau = assign
                .real(TAU)
                .ok_or_else(|| TcgError::UnresolvedSymbol(TAU.to_string()))?;
            Complex64::new(assign.filter.eval(x, tau)?, 0.0)
        }
    };
    Ok(base.powi(p))
}

impl Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }
}

impl Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        self.scale(&CQ::int(-1))
    }
}

impl Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

fn fmt_atom(a: &Atom, p: i32) -> String {
    let base = match a {
        Atom::Sym(s) | Atom::CSym(s, false) => s.to_string(),
        Atom::CSym(s, true) => format!("conj({s})"),
        Atom::Freq(w) if w.is_single_symbol() => w.to_string(),
        Atom::Freq(w) => format!("({w})"),
        Atom::Filter(w) => format!("f({w})"),
    };
    if p == 1 {
        base
    } else {
        format!("{base}^{p}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(a, p)| fmt_atom(a, *p)).collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative_lead();
            let mag = if neg { -c } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            match (m.is_one(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{m}")?,
                (false, false) => write!(f, "{mag}*{m}")?,
            }
        }
        Ok(())
    }
}
