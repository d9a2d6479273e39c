//! Property tests for the algebraic layers: expressions, diagrams, contractions,
//! operators and first-order effective models.

mod common;

use std::collections::{BTreeMap, HashSet};

use ndarray::Array2;
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcg_core::contraction::{contraction_coefficient, FrequencyTuple};
use tcg_core::diagrams::{enumerate_diagrams, slice_frequencies, Bubble};
use tcg_core::model::{derive, DeriveOptions};
use tcg_core::operators::matrix::{dagger, matrix_realization};
use tcg_core::operators::{adjoint, multiply_canonicalize, parse_key, parse_operator, ModeSpec, ModeTable, OperatorSum};
use tcg_core::symbolic::{sym, Assignment, FilterKind, FilterSpec, FreqExpr, ScalarExpr, Tau, TAU};

const NAMES: [&str; 4] = ["w1", "w2", "w3", "w4"];

fn freq_strategy() -> impl Strategy<Value = FreqExpr> {
    prop::collection::vec((0..4usize, -12i64..=12, 1i64..=6), 1..5).prop_map(|terms| {
        FreqExpr::from_terms(terms.into_iter().map(|(s, n, d)| (sym(NAMES[s]), Rational64::new(n, d))))
    })
}

fn freq_point() -> Assignment {
    // algebraically independent enough that no small rational relation vanishes
    let mut a = Assignment::new();
    for (name, v) in NAMES.iter().zip([1.0, std::f64::consts::SQRT_2, std::f64::consts::E, std::f64::consts::PI]) {
        a.set(name, v);
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn frequency_zero_test_is_sound(x in freq_strategy(), y in freq_strategy()) {
        prop_assert!((&x - &x).is_zero());
        let d = &x - &y;
        let a = freq_point();
        let value = a.freq(&d).unwrap();
        if x == y {
            prop_assert!(d.is_zero());
        } else {
            prop_assert!(!d.is_zero(), "{x} vs {y}");
            prop_assert!(value.abs() > 1e-12, "{d} evaluates to {value}");
        }
    }
}

/// One factor of a random scalar expression.
fn atom(k: usize) -> ScalarExpr {
    let w = FreqExpr::from_terms([(sym("w1"), Rational64::from_integer(1)), (sym("w2"), Rational64::new(-1, 2))]);
    match k {
        0 => ScalarExpr::symbol("x"),
        1 => ScalarExpr::symbol("y"),
        2 => ScalarExpr::i(),
        3 => ScalarExpr::filter(&w),
        4 => ScalarExpr::freq(&w),
        5 => ScalarExpr::freq_pow(&FreqExpr::symbol("w1"), -1).unwrap(),
        6 => ScalarExpr::tau(),
        7 => ScalarExpr::complex_symbol("z", false),
        _ => ScalarExpr::complex_symbol("z", true),
    }
}

fn scalar_strategy() -> impl Strategy<Value = ScalarExpr> {
    let monomial = (-9i64..=9, 1i64..=5, prop::collection::vec((0..9usize, 1u32..=2), 0..4));
    prop::collection::vec(monomial, 1..4).prop_map(|terms| {
        let mut out = ScalarExpr::zero();
        for (n, d, factors) in terms {
            let mut m = ScalarExpr::ratio(n, d);
            for (k, p) in factors {
                m = &m * &atom(k).pow(p);
            }
            out.add_assign(&m);
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_is_a_ring_homomorphism(
        a in scalar_strategy(),
        b in scalar_strategy(),
        vals in prop::array::uniform6(0.3f64..2.0),
    ) {
        let mut at = Assignment::new();
        at.set("x", vals[0]).set("y", -vals[1]).set("w1", vals[2]).set("w2", vals[3]).set(TAU, vals[4]);
        at.set("z", Complex64::new(vals[5], -0.7));
        let (ea, eb) = (a.eval(&at).unwrap(), b.eval(&at).unwrap());
        let sum = (&a + &b).eval(&at).unwrap();
        let prod = (&a * &b).eval(&at).unwrap();
        let close = |x: Complex64, y: Complex64, scale: f64| (x - y).norm() <= 1e-12 * scale.max(1e-300);
        prop_assert!(close(sum, ea + eb, ea.norm() + eb.norm()), "{sum} vs {}", ea + eb);
        prop_assert!(close(prod, ea * eb, ea.norm() * eb.norm()), "{prod} vs {}", ea * eb);
    }

    #[test]
    fn every_filter_is_normalized_at_zero(tau in 0.0f64..10.0, slope in 0.05f64..0.9) {
        let table = FilterKind::CustomTable { points: vec![(0.0, 1.0), (1.0, 1.0 - slope), (4.0, 0.0)] };
        for spec in [FilterSpec::gaussian(), FilterSpec::gaussian_numeric(tau), FilterSpec { kind: table, tau: Tau::Numeric(tau) }] {
            spec.validate().unwrap();
            prop_assert_eq!(spec.numeric(0.0, tau).unwrap(), 1.0);
            let mut a = Assignment::new();
            a.filter = spec.kind.clone();
            a.set(TAU, tau);
            prop_assert_eq!(spec.symbolic(&FreqExpr::zero()).eval(&a).unwrap(), Complex64::new(1.0, 0.0));
        }
    }
}

/// Every ordered sequence of nonempty bubbles with the right totals and a left slot last.
fn naive_diagrams(l: usize, r: usize) -> Vec<Vec<Bubble>> {
    fn grow(l: usize, r: usize, acc: &mut Vec<Bubble>, out: &mut Vec<Vec<Bubble>>) {
        let (sl, sr): (usize, usize) = acc.iter().fold((0, 0), |(a, b), x| (a + x.left, b + x.right));
        if sl == l && sr == r {
            if acc.last().is_some_and(|b| b.left >= 1) {
                out.push(acc.clone());
            }
            return;
        }
        for left in 0..=l - sl {
            for right in 0..=r - sr {
                if left + right > 0 {
                    acc.push(Bubble { left, right });
                    grow(l, r, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    grow(l, r, &mut Vec::new(), &mut out);
    out
}

#[test]
fn diagram_enumeration_matches_brute_force() {
    for total in 1..=6usize {
        for l in 1..=total {
            let r = total - l;
            let got = enumerate_diagrams(l, r).unwrap();
            assert_eq!(got, enumerate_diagrams(l, r).unwrap(), "not deterministic at ({l},{r})");
            let naive: HashSet<Vec<Bubble>> = naive_diagrams(l, r).into_iter().collect();
            let seen: HashSet<Vec<Bubble>> = got.iter().map(|d| d.bubbles.clone()).collect();
            assert_eq!(got.len(), seen.len(), "duplicates at ({l},{r})");
            assert_eq!(seen, naive, "({l},{r})");
            if total <= 5 {
                assert!(got.iter().all(|d| d.is_valid() && d.l == l && d.r == r));
            }
        }
    }
    assert!(enumerate_diagrams(0, 2).is_err());
}

#[test]
fn slicing_concatenates_back() {
    for (l, r) in [(3, 2), (2, 3), (4, 1)] {
        let mu: Vec<FreqExpr> = (0..l).map(|i| FreqExpr::symbol(&format!("m{i}"))).collect();
        let nu: Vec<FreqExpr> = (0..r).map(|i| FreqExpr::symbol(&format!("n{i}"))).collect();
        for d in enumerate_diagrams(l, r).unwrap() {
            let s = slice_frequencies(&d, &mu, &nu).unwrap();
            let back_mu: Vec<FreqExpr> = s.blocks.iter().flat_map(|b| b.0.clone()).collect();
            let back_nu: Vec<FreqExpr> = s.blocks.iter().flat_map(|b| b.1.clone()).collect();
            assert_eq!((back_mu, back_nu), (mu.clone(), nu.clone()));
            for (b, blk) in d.bubbles.iter().zip(&s.blocks) {
                assert_eq!((blk.0.len(), blk.1.len()), (b.left, b.right));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_coefficients_are_real(seed in any::<u64>(), total in 1..=3usize, pick in 0..3usize) {
        let l = 1 + pick % total;
        let r = total - l;
        let (mn, nn, t) = common::oracle::symbolic_tuple(l, r);
        let c = contraction_coefficient(&t, &FilterSpec::gaussian()).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mu, nu) = common::oracle::regular_values(&mut rng, l, r);
        let mut a = Assignment::new();
        for (s, v) in mn.iter().zip(&mu).chain(nn.iter().zip(&nu)) {
            a.set(s, *v);
        }
        a.set(TAU, rng.gen_range(0.2..1.5));
        let v = c.eval(&a).unwrap();
        prop_assert!(v.im.abs() <= 1e-12 * v.norm(), "({l},{r}): {v}");
    }
}

fn f(terms: &[(&str, i64)]) -> FreqExpr {
    FreqExpr::from_terms(terms.iter().map(|(s, c)| (sym(s), Rational64::from_integer(*c))))
}

/// Tuples with one block sum equal to `e`; setting e = 0 makes them singular.
fn singular_templates() -> Vec<(Vec<FreqExpr>, Vec<FreqExpr>)> {
    let (e, w, v) = (f(&[("e", 1)]), f(&[("w", 1)]), f(&[("v", 1)]));
    let e_w = f(&[("e", 1), ("w", -1)]);
    let e_v = f(&[("e", 1), ("v", -1)]);
    let e_wv = f(&[("e", 1), ("w", -1), ("v", -1)]);
    vec![
        (vec![e.clone()], vec![]),
        (vec![e.clone(), w.clone()], vec![]),
        (vec![w.clone(), e.clone()], vec![]),
        (vec![w.clone(), e_w.clone()], vec![]),
        (vec![e.clone()], vec![w.clone()]),
        (vec![w.clone()], vec![e.clone()]),
        (vec![w.clone()], vec![e_w.clone()]),
        (vec![e.clone(), w.clone(), v.clone()], vec![]),
        (vec![w.clone(), e.clone(), v.clone()], vec![]),
        (vec![w.clone(), v.clone(), e_wv], vec![]),
        (vec![w.clone(), e_w.clone(), v.clone()], vec![]),
        (vec![e.clone(), w.clone()], vec![v.clone()]),
        (vec![w.clone(), v.clone()], vec![e.clone()]),
        (vec![w.clone(), e_w], vec![v.clone()]),
        (vec![w.clone()], vec![e.clone(), v.clone()]),
        (vec![w], vec![v, e_v]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regularized_values_are_continuous_limits(w in 0.4f64..2.0, v in -2.0f64..-0.4, tau in 0.3f64..1.2) {
        let filter = FilterSpec::gaussian();
        for (mu, nu) in singular_templates() {
            let generic = contraction_coefficient(&FrequencyTuple::new(mu.clone(), nu.clone()), &filter).unwrap().value;
            let zero = FreqExpr::zero();
            let sing = FrequencyTuple::new(
                mu.iter().map(|x| x.substitute("e", &zero)).collect(),
                nu.iter().map(|x| x.substitute("e", &zero)).collect(),
            );
            let reg = contraction_coefficient(&sing, &filter).unwrap();
            let base = Assignment::new().with("w", w).with("v", v).with(TAU, tau);
            let target = reg.value.eval(&base).unwrap();
            for k in 0..5 {
                // symmetric offsets cancel the linear term of the approach
                let eps = 1e-4 * 0.5f64.powi(k) / tau;
                let at = |x: f64| generic.eval(&base.clone().with("e", x)).unwrap();
                let limit = (at(eps) + at(-eps)) / 2.0;
                // some limits vanish exactly, so the error is measured against an O(1) floor
                prop_assert!((limit - target).norm() <= 1e-6 * target.norm().max(1.0), "{mu:?};{nu:?} at eps {eps}: {limit} vs {target}");
            }
        }
    }
}

const PRIMITIVES: [&str; 8] = ["a", "a'", "sp", "sm", "sz", "t(e,e)", "t(g,e)", "a'*sm"];
const TRUNC: usize = 12;

fn table() -> ModeTable {
    ModeTable::new(vec![ModeSpec::bosonic("a", TRUNC), ModeSpec::two_level("q")]).unwrap()
}

fn boson_degree(text: &str) -> usize {
    text.matches('a').count()
}

fn realize(x: &OperatorSum, t: &ModeTable) -> Array2<Complex64> {
    matrix_realization(x, t, &Assignment::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_products_realize_the_matrix_product(picks in prop::collection::vec(0..PRIMITIVES.len(), 1..5)) {
        let t = table();
        let texts: Vec<&str> = picks.iter().map(|&i| PRIMITIVES[i]).collect();
        let mut canon = OperatorSum::identity(&t);
        let mut product = realize(&canon, &t);
        for s in &texts {
            let x = parse_operator(s, &t).unwrap();
            canon = multiply_canonicalize(&canon, &x, &t).unwrap();
            product = product.dot(&realize(&x, &t));
        }
        let joined = parse_operator(&texts.join("*"), &t).unwrap();
        prop_assert_eq!(&joined, &canon);
        let m = realize(&canon, &t);
        // the truncated product differs only where the ladder walks past the top level
        let degree: usize = texts.iter().map(|s| boson_degree(s)).sum();
        let safe = TRUNC.saturating_sub(degree) * 2;
        for i in 0..safe {
            for j in 0..safe {
                prop_assert!((m[(i, j)] - product[(i, j)]).norm() <= 1e-12, "{:?} at ({i},{j})", texts);
            }
        }
        // canonical form is a fixed point
        prop_assert_eq!(&multiply_canonicalize(&canon, &OperatorSum::identity(&t), &t).unwrap(), &canon);
        for (k, _) in canon.terms() {
            prop_assert_eq!(&parse_key(&k.render(&t), &t).unwrap(), k);
        }
    }

    #[test]
    fn adjoint_is_the_conjugate_transpose(
        picks in prop::collection::vec((0..PRIMITIVES.len(), -5i64..=5, -5i64..=5), 1..4),
    ) {
        let t = table();
        let mut x = OperatorSum::zero();
        for (i, re, im) in picks {
            let c = &ScalarExpr::int(re) + &(&ScalarExpr::i() * &ScalarExpr::int(im));
            x.add_assign(&parse_operator(PRIMITIVES[i], &t).unwrap().scale(&c));
        }
        let lhs = realize(&adjoint(&x), &t);
        let rhs = dagger(&realize(&x, &t));
        prop_assert!(lhs.iter().zip(rhs.iter()).all(|(p, q)| (p - q).norm() <= 1e-12));
        prop_assert_eq!(adjoint(&adjoint(&x)), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn first_order_model_is_the_filtered_input(seed in any::<u64>()) {
        let mut spec = common::random_model(&mut common::rng(seed));
        let eff = derive(&spec, 1, &DeriveOptions::default()).unwrap();
        prop_assert!(eff.dissipators.is_empty());
        let mut want: BTreeMap<(String, String), ScalarExpr> = BTreeMap::new();
        for (w, ops) in spec.drive_by_frequency().unwrap() {
            for (k, c) in ops.terms() {
                if !k.is_identity() {
                    want.insert((k.render(&spec.modes), w.to_string()), c * &ScalarExpr::filter(&w));
                }
            }
        }
        let got: BTreeMap<(String, String), ScalarExpr> = eff
            .hamiltonian
            .iter()
            .map(|t| ((t.op.render(&spec.modes), t.freq.to_string()), t.coeff.clone()))
            .collect();
        prop_assert_eq!(&got, &want);

        // with f = 1 the first-order model is the input itself
        spec.filter.tau = Tau::Numeric(0.0);
        let bare = derive(&spec, 1, &DeriveOptions::default()).unwrap();
        for ((op, w), c) in &want {
            let key = (op.clone(), w.clone());
            let got = bare.hamiltonian.iter().find(|t| (t.op.render(&spec.modes), t.freq.to_string()) == key).unwrap();
            prop_assert_eq!(&got.coeff, &c.at_zero_tau().unwrap());
        }
        prop_assert_eq!(bare.hamiltonian.len(), want.len());
    }
}
