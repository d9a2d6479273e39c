//! Closed-form contraction coefficients C_{l,r}(mu, nu).

pub mod oracle;
pub mod symmetry;

use dashmap::DashMap;
use num_rational::Rational64;

use crate::diagrams::{diagrams_cached, slice_frequencies, Diagram};
use crate::error::{Result, TcgError};
use crate::symbolic::series::expand;
use crate::symbolic::{freq, FilterSpec, FreqExpr, ScalarExpr};

/// Internal regulator used to approach singular tuples.
pub const EPS: &str = "__eps";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrequencyTuple {
    pub mu: Vec<FreqExpr>,
    pub nu: Vec<FreqExpr>,
}

impl FrequencyTuple {
    pub fn new(mu: Vec<FreqExpr>, nu: Vec<FreqExpr>) -> Self {
        FrequencyTuple { mu, nu }
    }

    pub fn l(&self) -> usize {
        self.mu.len()
    }

    pub fn r(&self) -> usize {
        self.nu.len()
    }

    pub fn total(&self) -> FreqExpr {
        &freq::sum(&self.mu) + &freq::sum(&self.nu)
    }

    pub fn negated(&self) -> Self {
        FrequencyTuple {
            mu: self.mu.iter().map(|w| -w).collect(),
            nu: self.nu.iter().map(|w| -w).collect(),
        }
    }

    /// Moves the tuple off a singular point along mu_i + i*eps, nu_j + (l+j)*eps.
    fn shifted(&self) -> Self {
        let e = FreqExpr::symbol(EPS);
        let l = self.mu.len() as i64;
        FrequencyTuple {
            mu: self
                .mu
                .iter()
                .enumerate()
                .map(|(i, w)| w + &e.scale(Rational64::from_integer(i as i64 + 1)))
                .collect(),
            nu: self
                .nu
                .iter()
                .enumerate()
                .map(|(j, w)| w + &e.scale(Rational64::from_integer(l + j as i64 + 1)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientResult {
    pub value: ScalarExpr,
    pub singular_regularized: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factorial {
    Value(ScalarExpr),
    /// One-based positions of vanishing partial sums.
    Singular(Vec<usize>),
}

/// Product of leading partial sums (v1)(v1+v2)...(v1+...+vn).
pub fn vector_factorial(v: &[FreqExpr]) -> Factorial {
    let mut acc = FreqExpr::zero();
    let mut prod = ScalarExpr::one();
    let mut zeros = Vec::new();
    for (k, w) in v.iter().enumerate() {
        acc = &acc + w;
        if acc.is_zero() {
            zeros.push(k + 1);
        } else {
            prod = &prod * &ScalarExpr::freq(&acc);
        }
    }
    if zeros.is_empty() {
        Factorial::Value(prod)
    } else {
        Factorial::Singular(zeros)
    }
}

/// Reciprocal of the factorial restricted to the first `n` partial sums.
fn inverse_partial_factorial(v: &[FreqExpr], n: usize, bubble: usize) -> Result<ScalarExpr> {
    let mut acc = FreqExpr::zero();
    let mut prod = ScalarExpr::one();
    let mut zeros = Vec::new();
    for (k, w) in v.iter().take(n).enumerate() {
        acc = &acc + w;
        if acc.is_zero() {
            zeros.push(k + 1);
        } else {
            prod = &prod * &ScalarExpr::freq_pow(&acc, -1)?;
        }
    }
    if zeros.is_empty() {
        Ok(prod)
    } else {
        Err(TcgError::SingularInput { bubble, indices: zeros })
    }
}

fn sign(r: usize, nb: usize) -> i64 {
    if (r + nb - 1).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Contribution of one diagram: sign * (sum mu of last bubble) * prod_b f(...)/(mu^b! nu^b!).
///
/// The last bubble's full mu partial sum cancels against the prefactor, so it is never divided by.
pub fn diagram_contribution(d: &Diagram, t: &FrequencyTuple, _filter: &FilterSpec) -> Result<ScalarExpr> {
    let sl = slice_frequencies(d, &t.mu, &t.nu)?;
    let nb = sl.blocks.len();
    let mut out = ScalarExpr::int(sign(t.r(), nb));
    for (b, (m, n)) in sl.blocks.iter().enumerate() {
        let arg = &freq::sum(m) + &freq::sum(n);
        let mut factor = ScalarExpr::filter(&arg);
        let take = if b + 1 == nb { m.len() - 1 } else { m.len() };
        factor = &factor * &inverse_partial_factorial(m, take, b + 1)?;
        factor = &factor * &inverse_partial_factorial(n, n.len(), b + 1)?;
        out = &out * &factor;
    }
    Ok(out)
}

fn is_singular(d: &Diagram, t: &FrequencyTuple) -> Result<bool> {
    match diagram_contribution(d, t, &FilterSpec::gaussian()) {
        Ok(_) => Ok(false),
        Err(TcgError::SingularInput { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Finite part of a singular diagram along the fixed regulator path.
pub fn regularize_singular(d: &Diagram, t: &FrequencyTuple, filter: &FilterSpec) -> Result<ScalarExpr> {
    if !filter.supports_regularization() {
        return Err(TcgError::UnsupportedFilter(filter.kind.name().to_string()));
    }
    let shifted = t.shifted();
    let raw = diagram_contribution(d, &shifted, filter)?;
    let s = expand(&raw, EPS, 0)?;
    Ok(s.coeff(0))
}

fn check_tuple(t: &FrequencyTuple) -> Result<()> {
    if t.l() == 0 {
        return Err(TcgError::InvalidWeight {
            l: 0,
            r: t.r(),
            msg: "coefficients need l >= 1".into(),
        });
    }
    Ok(())
}

pub fn contraction_coefficient(t: &FrequencyTuple, filter: &FilterSpec) -> Result<CoefficientResult> {
    check_tuple(t)?;
    let ds = diagrams_cached(t.l(), t.r())?;
    let mut value = ScalarExpr::zero();
    let mut regularized = false;
    for d in ds.iter() {
        match diagram_contribution(d, t, filter) {
            Ok(v) => value.add_assign(&v),
            Err(TcgError::SingularInput { .. }) => {
                regularized = true;
                value.add_assign(&regularize_singular(d, t, filter)?);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CoefficientResult {
        value,
        singular_regularized: regularized,
    })
}

/// True when any diagram of the tuple hits a vanishing partial sum.
pub fn tuple_is_singular(t: &FrequencyTuple) -> Result<bool> {
    check_tuple(t)?;
    for d in diagrams_cached(t.l(), t.r())?.iter() {
        if is_singular(d, t)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Memoizing front end safe for concurrent use.
pub struct Contractor {
    pub filter: FilterSpec,
    memo: DashMap<FrequencyTuple, CoefficientResult>,
}

impl Contractor {
    pub fn new(filter: FilterSpec) -> Self {
        Contractor {
            filter,
            memo: DashMap::new(),
        }
    }

    pub fn get(&self, t: &FrequencyTuple) -> Result<CoefficientResult> {
        if let Some(v) = self.memo.get(t) {
            return Ok(v.clone());
        }
        let v = contraction_coefficient(t, &self.filter)?;
        self.memo.insert(t.clone(), v.clone());
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}
