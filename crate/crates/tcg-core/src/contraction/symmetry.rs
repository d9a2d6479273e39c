//! Numeric checks of the parity and mirror relations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{contraction_coefficient, tuple_is_singular, FrequencyTuple};
use crate::error::{Result, TcgError};
use crate::symbolic::{Assignment, FilterSpec, FreqExpr, Tau, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// C(-mu,-nu) = (-1)^{l+r-1} C(mu,nu)
    Parity,
    /// C_{l,r}(mu,nu) = C_{r+1,l-1}(-(nu + mu_l), -(mu - mu_l))
    Mirror,
}

/// The tuple and sign the relation maps onto.
pub fn partner(t: &FrequencyTuple, rel: Relation) -> (FrequencyTuple, f64) {
    match rel {
        Relation::Parity => {
            let s = if (t.l() + t.r() - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            (t.negated(), s)
        }
        Relation::Mirror => {
            let (last, rest) = t.mu.split_last().expect("l >= 1");
            let mut mu: Vec<FreqExpr> = t.nu.iter().map(|w| -w).collect();
            mu.push(-last);
            let nu: Vec<FreqExpr> = rest.iter().map(|w| -w).collect();
            (FrequencyTuple::new(mu, nu), 1.0)
        }
    }
}

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Largest relative deviation over `samples` random real assignments.
pub fn symmetry_deviation(
    t: &FrequencyTuple,
    rel: Relation,
    filter: &FilterSpec,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if tuple_is_singular(t)? {
        return Err(TcgError::SingularInput {
            bubble: 0,
            indices: vec![],
        });
    }
    let (other, sign) = partner(t, rel);
    let lhs = contraction_coefficient(t, filter)?.value;
    let rhs = contraction_coefficient(&other, filter)?.value;
    let symbols: Vec<String> = t
        .mu
        .iter()
        .chain(&t.nu)
        .flat_map(|w| w.symbols())
        .map(|s| s.to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut tries = 0;
    while done < samples {
        tries += 1;
        if tries > samples * 50 + 100 {
            return Err(TcgError::Shape("could not find regular sample points".into()));
        }
        let mut a = Assignment::new();
        a.filter = filter.kind.clone();
        for s in &symbols {
            let mag: f64 = rng.gen_range(0.3..2.0);
            a.set(s, if rng.gen_bool(0.5) { mag } else { -mag });
        }
        let tau = match filter.tau {
            Tau::Numeric(v) => v,
            Tau::Symbolic => rng.gen_range(0.2..1.5),
        };
        a.set(TAU, tau);
        let (x, y) = match (lhs.eval(&a), rhs.eval(&a)) {
            (Ok(x), Ok(y)) => (x, y * sign),
            (Err(TcgError::DivisionByZero(_)), _) | (_, Err(TcgError::DivisionByZero(_))) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        worst = worst.max(rel_err(x, y));
        done += 1;
    }
    Ok(worst)
}

pub fn rel_err(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

pub fn symmetry_check(t: &FrequencyTuple, rel: Relation, filter: &FilterSpec, samples: usize) -> Result<bool> {
    Ok(symmetry_deviation(t, rel, filter, samples, 0x5eed)? <= SYMMETRY_TOL)
}
