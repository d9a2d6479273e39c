//! Linear ramps g (t/T) h e^{-i w t} through a frequency regulator d:
//! t e^{-i w t} = lim_{d->0} [e^{-i (w - s d) t} - e^{-i w t}] / (i s d), s = +-1.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RampSpec, TermSpec};
use crate::error::{Result, TcgError};
use crate::operators::adjoint;
use crate::symbolic::series::{expand, Series};
use crate::symbolic::{Assignment, FreqExpr, ScalarExpr, SymbolKind, CQ, TAU, TIME};

/// How the regulator limit is taken after assembly.
#[derive(Clone, Debug, PartialEq)]
pub struct RampLimit {
    pub regulators: Vec<String>,
    /// Kinds of the symbols appearing in coefficients, for the numeric cancellation check.
    pub kinds: BTreeMap<String, SymbolKind>,
}

/// Regulator encoding of one ramp entry together with its conjugate.
pub fn encode_linear_ramp(r: &RampSpec) -> Result<Vec<TermSpec>> {
    let d = FreqExpr::symbol(&r.regulator);
    // 1/(i d T)
    let k = &(&(-&ScalarExpr::i()) * &ScalarExpr::freq_pow(&d, -1)?) * &ScalarExpr::symbol(&r.duration).inverse()?;
    let g = &r.coupling * &k;
    let adj = adjoint(&r.op);
    let self_adjoint = adj == r.op && r.freq.is_zero() && r.coupling.conj() == r.coupling;
    if self_adjoint {
        let half = g.scale(&CQ::ratio(1, 2));
        return Ok(vec![
            TermSpec {
                coeff: half.clone(),
                freq: -&d,
                op: r.op.clone(),
            },
            TermSpec {
                coeff: -&half,
                freq: d,
                op: r.op.clone(),
            },
        ]);
    }
    let gc = &r.coupling.conj() * &k;
    let w = &r.freq;
    Ok(vec![
        TermSpec {
            coeff: g.clone(),
            freq: w - &d,
            op: r.op.clone(),
        },
        TermSpec {
            coeff: -&g,
            freq: w.clone(),
            op: r.op.clone(),
        },
        TermSpec {
            coeff: -&gc,
            freq: &(-w) + &d,
            op: adj.clone(),
        },
        TermSpec {
            coeff: gc,
            freq: -w,
            op: adj,
        },
    ])
}

/// Series of e^{-i c d t} through order `n`.
fn phase_series(c: Rational64, n: i32) -> Series {
    let mut coeffs = Vec::with_capacity(n.max(0) as usize + 1);
    let step = &(&ScalarExpr::constant(-&CQ::i()) * &ScalarExpr::time()).scale(&CQ::real(crate::symbolic::cq::q64(c)));
    let mut term = ScalarExpr::one();
    for k in 0..=n.max(0) {
        if k > 0 {
            term = (&term * step).scale(&CQ::ratio(1, k as i64));
        }
        coeffs.push(term.clone());
    }
    Series { lo: 0, coeffs }
}

impl RampLimit {
    /// Takes d -> 0 on entries keyed by K, merging keys whose frequencies coincide once d is removed.
    pub fn apply<K: Ord + Clone>(&self, entries: Vec<(K, FreqExpr, ScalarExpr)>) -> Result<Vec<(K, FreqExpr, ScalarExpr)>> {
        let mut cur = entries;
        for reg in &self.regulators {
            cur = self.apply_one(cur, reg)?;
        }
        Ok(cur)
    }

    fn apply_one<K: Ord + Clone>(&self, entries: Vec<(K, FreqExpr, ScalarExpr)>, reg: &str) -> Result<Vec<(K, FreqExpr, ScalarExpr)>> {
        let mut groups: BTreeMap<(K, FreqExpr), Series> = BTreeMap::new();
        for (k, w, c) in entries {
            let s = expand(&c, reg, 0)?;
            let need = -s.lo.min(0);
            let total = s.mul(&phase_series(w.coeff(reg), need), 0);
            groups.entry((k, w.without(reg))).or_insert_with(Series::zero).add_assign(&total);
        }
        let mut out = Vec::with_capacity(groups.len());
        for ((k, w), s) in groups {
            for order in s.negative_orders() {
                let c = s.coeff(order);
                if !self.numerically_zero(&c)? {
                    return Err(TcgError::DivergentLimit(format!(
                        "{reg}^{order} survives at frequency {w} with coefficient {c}"
                    )));
                }
            }
            let c = s.coeff(0);
            if !c.is_zero() {
                out.push((k, w, c));
            }
        }
        Ok(out)
    }

    fn numerically_zero(&self, c: &ScalarExpr) -> Result<bool> {
        if c.is_zero() {
            return Ok(true);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xde17a);
        for _ in 0..3 {
            let mut a = Assignment::new();
            a.set(TAU, rng.gen_range(0.5..2.0));
            for s in c.free_symbols() {
                let v: f64 = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                match self.kinds.get(&s) {
                    Some(SymbolKind::Complex) => a.set(&s, Complex64::new(v, rng.gen_range(-1.0..1.0))),
                    _ if s == TAU => &mut a,
                    _ if s == TIME => a.set(&s, v.abs()),
                    _ => a.set(&s, v),
                };
            }
            let mut scale = 0.0;
            for (m, q) in c.terms() {
                let single = ScalarExpr::from_monomial(m.clone(), q.clone());
                scale += single.eval(&a)?.norm();
            }
            if c.eval(&a)?.norm() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Cross-check of the symbolic limit: sum of c(d) e^{-i c_d d t} at d = +-h, averaged.
pub fn numeric_regulator_value(
    entries: &[(FreqExpr, ScalarExpr)],
    reg: &str,
    assign: &Assignment,
    t: f64,
    h: f64,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for sgn in [1.0, -1.0] {
        let mut a = assign.clone();
        a.set(reg, sgn * h);
        a.set(TIME, t);
        for (w, c) in entries {
            let cd = crate::symbolic::cq::q_to_f64(&crate::symbolic::cq::q64(w.coeff(reg)));
            acc += c.eval(&a)? * Complex64::new(0.0, -cd * sgn * h * t).exp() * 0.5;
        }
    }
    Ok(acc)
}
