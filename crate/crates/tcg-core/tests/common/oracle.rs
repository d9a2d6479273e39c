//! Sweeps comparing closed-form contractions against independent evaluations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcg_core::contraction::oracle::bubble_factor_oracle;
use tcg_core::contraction::symmetry::{rel_err, symmetry_deviation, Relation};
use tcg_core::contraction::{contraction_coefficient, FrequencyTuple};
use tcg_core::symbolic::{Assignment, FilterSpec, FreqExpr};

fn names(p: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{p}{k}")).collect()
}

pub fn symbolic_tuple(l: usize, r: usize) -> (Vec<String>, Vec<String>, FrequencyTuple) {
    let (mn, nn) = (names("m", l), names("n", r));
    let t = FrequencyTuple::new(
        mn.iter().map(|s| FreqExpr::symbol(s)).collect(),
        nn.iter().map(|s| FreqExpr::symbol(s)).collect(),
    );
    (mn, nn, t)
}

/// Random values with every contiguous block sum bounded away from zero.
pub fn regular_values(rng: &mut ChaCha8Rng, l: usize, r: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let m: f64 = rng.gen_range(0.3..2.0);
                    if rng.gen_bool(0.5) {
                        m
                    } else {
                        -m
                    }
                })
                .collect()
        };
        let mu = draw(l);
        let nu = draw(r);
        let ok = |v: &[f64]| (0..v.len()).all(|i| (i..v.len()).all(|j| v[i..=j].iter().sum::<f64>().abs() > 0.15));
        if ok(&mu) && ok(&nu) {
            return (mu, nu);
        }
    }
}

pub struct OracleSweep {
    pub l: usize,
    pub r: usize,
    pub max_residual: f64,
    pub all_homogeneous: bool,
    pub worst_rel: f64,
}

/// Nested-average oracle against the closed form for one weight.
pub fn oracle_sweep(l: usize, r: usize, samples: usize, rng: &mut ChaCha8Rng) -> OracleSweep {
    let (mn, nn, t) = symbolic_tuple(l, r);
    let c = contraction_coefficient(&t, &FilterSpec::gaussian()).unwrap().value;
    let mut out = OracleSweep {
        l,
        r,
        max_residual: 0.0,
        all_homogeneous: true,
        worst_rel: 0.0,
    };
    for _ in 0..samples {
        let (mu, nu) = regular_values(rng, l, r);
        let tau: f64 = rng.gen_range(0.2..1.2);
        let mut a = Assignment::new();
        for (s, v) in mn.iter().zip(&mu).chain(nn.iter().zip(&nu)) {
            a.set(s, *v);
        }
        a.set("tau", tau);
        let o = bubble_factor_oracle(&t, &a, &[0.0, 0.37, 1.1, 2.9]).unwrap();
        out.all_homogeneous &= o.homogeneous;
        out.max_residual = out.max_residual.max(o.residual);
        out.worst_rel = out.worst_rel.max(rel_err(o.amplitude, c.eval(&a).unwrap()));
    }
    out
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Worst deviation of the parity and mirror relations over all weights with l + r <= max_total.
pub fn symmetry_sweep(max_total: usize, samples: usize) -> f64 {
    let filter = FilterSpec::gaussian();
    let mut worst: f64 = 0.0;
    for total in 1..=max_total {
        for l in 1..=total {
            let (_, _, t) = symbolic_tuple(l, total - l);
            for (k, rel) in [Relation::Parity, Relation::Mirror].into_iter().enumerate() {
                let dev = symmetry_deviation(&t, rel, &filter, samples, 100 * total as u64 + 10 * l as u64 + k as u64).unwrap();
                worst = worst.max(dev);
            }
        }
    }
    worst
}
