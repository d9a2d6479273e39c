//! Brute-force evaluation of the contraction superoperator from nested time averages.
//!
//! Every quantity is a finite sum of phasors `c e^{-i a t}`; integrals start at t = 0.
//! W is obtained by inverting the averaged propagator order by order,
//! W(l,r) = A(l,r) - sum W(outer) E(inner), with no use of the closed form.

use std::collections::HashMap;

use num_complex::Complex64;

use super::FrequencyTuple;
use crate::error::{Result, TcgError};
use crate::symbolic::{Assignment, FilterKind};

#[derive(Clone, Debug, Default)]
struct ExpSum(Vec<(Complex64, f64)>);

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

impl ExpSum {
    fn one() -> Self {
        ExpSum(vec![(Complex64::new(1.0, 0.0), 0.0)])
    }

    fn mul(&self, o: &ExpSum) -> ExpSum {
        let mut v = Vec::with_capacity(self.0.len() * o.0.len());
        for (c1, a1) in &self.0 {
            for (c2, a2) in &o.0 {
                v.push((c1 * c2, a1 + a2));
            }
        }
        ExpSum(v)
    }

    fn scale(&self, s: Complex64) -> ExpSum {
        ExpSum(self.0.iter().map(|(c, a)| (c * s, *a)).collect())
    }

    fn shift(&self, w: f64) -> ExpSum {
        ExpSum(self.0.iter().map(|(c, a)| (*c, a + w)).collect())
    }

    fn sub_assign(&mut self, o: &ExpSum) {
        self.0.extend(o.0.iter().map(|(c, a)| (-c, *a)));
    }

    /// Integral from 0 to t.
    fn integrate(&self) -> Result<ExpSum> {
        let mut v = Vec::with_capacity(2 * self.0.len());
        for (c, a) in &self.0 {
            if a.abs() < 1e-9 {
                return Err(TcgError::Shape("oracle needs nonvanishing partial sums".into()));
            }
            let k = c * I / *a;
            v.push((k, *a));
            v.push((-k, 0.0));
        }
        Ok(ExpSum(v))
    }

    fn average(&self, filter: &FilterKind, tau: f64) -> Result<ExpSum> {
        self.0
            .iter()
            .map(|(c, a)| Ok((c * filter.eval(*a, tau)?, *a)))
            .collect::<Result<Vec<_>>>()
            .map(ExpSum)
    }

    fn at(&self, t: f64) -> Complex64 {
        self.0.iter().map(|(c, a)| c * (-I * a * t).exp()).sum()
    }
}

struct Ctx<'a> {
    mu: &'a [f64],
    nu: &'a [f64],
    filter: &'a FilterKind,
    tau: f64,
    memo: HashMap<(usize, usize), ExpSum>,
}

impl Ctx<'_> {
    /// Forward propagator coefficient over modes m (first = innermost).
    fn u(m: &[f64]) -> Result<ExpSum> {
        let mut acc = ExpSum::one();
        for w in m {
            acc = acc.shift(*w).integrate()?.scale(-I);
        }
        Ok(acc)
    }

    /// Backward propagator coefficient over modes n (first = nearest the state).
    fn ud(n: &[f64]) -> Result<ExpSum> {
        let mut acc = ExpSum::one();
        for w in n {
            acc = acc.shift(*w).integrate()?.scale(I);
        }
        Ok(acc)
    }

    fn a(&self, m: &[f64], n: &[f64]) -> Result<ExpSum> {
        let (last, rest) = m.split_last().expect("left block is nonempty");
        let h = ExpSum(vec![(-I, *last)]);
        h.mul(&Self::u(rest)?).mul(&Self::ud(n)?).average(self.filter, self.tau)
    }

    fn e(&self, m: &[f64], n: &[f64]) -> Result<ExpSum> {
        Self::u(m)?.mul(&Self::ud(n)?).average(self.filter, self.tau)
    }

    /// W on the suffix mu[a..], nu[b..].
    fn w(&mut self, a: usize, b: usize) -> Result<ExpSum> {
        if let Some(v) = self.memo.get(&(a, b)) {
            return Ok(v.clone());
        }
        let (l, r) = (self.mu.len(), self.nu.len());
        let mut out = self.a(&self.mu[a..], &self.nu[b..])?;
        for li in 0..(l - a) {
            for ri in 0..=(r - b) {
                if li + ri == 0 {
                    continue;
                }
                let inner = self.e(&self.mu[a..a + li], &self.nu[b..b + ri])?;
                let outer = self.w(a + li, b + ri)?;
                out.sub_assign(&outer.mul(&inner));
            }
        }
        self.memo.insert((a, b), out.clone());
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub amplitude: Complex64,
    pub homogeneous: bool,
    pub residual: f64,
}

impl OracleResult {
    pub fn require_homogeneous(self, tol: f64) -> Result<Self> {
        if self.residual > tol {
            Err(TcgError::OracleMismatch(self.residual))
        } else {
            Ok(self)
        }
    }
}

pub const HOMOGENEITY_TOL: f64 = 1e-9;

/// Coefficient of h_mu...rho h_nu... in W_{l,r}, divided by -i e^{-i Omega t}.
pub fn bubble_factor_oracle_numeric(
    mu: &[f64],
    nu: &[f64],
    filter: &FilterKind,
    tau: f64,
    times: &[f64],
) -> Result<OracleResult> {
    if mu.is_empty() {
        return Err(TcgError::InvalidWeight {
            l: 0,
            r: nu.len(),
            msg: "oracle needs l >= 1".into(),
        });
    }
    if mu.len() + nu.len() > 4 {
        return Err(TcgError::Resource("oracle limited to l + r <= 4".into()));
    }
    if times.is_empty() {
        return Err(TcgError::Shape("no time samples".into()));
    }
    let mut ctx = Ctx {
        mu,
        nu,
        filter,
        tau,
        memo: HashMap::new(),
    };
    let w = ctx.w(0, 0)?;
    let omega: f64 = mu.iter().chain(nu).sum();
    let amps: Vec<Complex64> = times
        .iter()
        .map(|&t| w.at(t) * (I * omega * t).exp() / (-I))
        .collect();
    let mean = amps.iter().sum::<Complex64>() / amps.len() as f64;
    let scale = amps.iter().map(|a| a.norm()).fold(0.0, f64::max).max(1e-300);
    let residual = amps.iter().map(|a| (a - mean).norm()).fold(0.0, f64::max) / scale;
    Ok(OracleResult {
        amplitude: mean,
        homogeneous: residual <= HOMOGENEITY_TOL,
        residual,
    })
}

pub fn bubble_factor_oracle(t: &FrequencyTuple, assign: &Assignment, times: &[f64]) -> Result<OracleResult> {
    let mu = t.mu.iter().map(|w| assign.freq(w)).collect::<Result<Vec<_>>>()?;
    let nu = t.nu.iter().map(|w| assign.freq(w)).collect::<Result<Vec<_>>>()?;
    let tau = assign
        .real(crate::symbolic::TAU)
        .ok_or_else(|| TcgError::UnresolvedSymbol("tau".into()))?;
    bubble_factor_oracle_numeric(&mu, &nu, &assign.filter, tau, times)
}
