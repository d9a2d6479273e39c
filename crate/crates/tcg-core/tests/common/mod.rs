#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcg_core::model::{
    derive, raw_contraction_terms, DeriveOptions, DissipatorConvention, EffectiveModel, ModelSpec, RawTerm, TermSpec,
};
use tcg_core::operators::matrix::key_matrix;
use tcg_core::operators::{adjoint, parse_operator, ModeKind, ModeSpec, ModeTable, OpKey};
use tcg_core::symbolic::{Assignment, FilterSpec, FreqExpr, ScalarExpr, SymbolKind, TAU, TIME};

pub mod oracle;
pub mod rabi;

pub type M = Array2<Complex64>;

/// Random small model: a boson plus a qubit, or two qubits, with up to three Hermitian term pairs.
pub fn random_model(rng: &mut ChaCha8Rng) -> ModelSpec {
    let two_qubits = rng.gen_bool(0.5);
    let (table, ops): (ModeTable, &[&str]) = if two_qubits {
        (
            ModeTable::new(vec![ModeSpec::two_level("q"), ModeSpec::two_level("r")]).unwrap(),
            &["q.sp", "q.sm*r.sp", "q.sz*r.sp", "r.sm", "q.sp*r.sp", "q.sz"],
        )
    } else {
        (
            ModeTable::new(vec![ModeSpec::bosonic("a", 8), ModeSpec::two_level("q")]).unwrap(),
            &["a", "a'*sm", "a*sp", "a'*a", "sz", "a*sz"],
        )
    };
    let mut spec = ModelSpec::new(table.clone(), FilterSpec::gaussian());
    spec.declare("w1", SymbolKind::Frequency, None);
    spec.declare("w2", SymbolKind::Frequency, None);
    let pairs = rng.gen_range(1..=3);
    for p in 0..pairs {
        let g = format!("g{p}");
        spec.declare(&g, SymbolKind::Real, None);
        let op = parse_operator(ops[rng.gen_range(0..ops.len())], &table).unwrap();
        let w = FreqExpr::from_terms([
            (tcg_core::symbolic::sym("w1"), Rational64::from_integer(rng.gen_range(-2..=2))),
            (tcg_core::symbolic::sym("w2"), Rational64::from_integer(rng.gen_range(-2..=2))),
        ]);
        let coeff = ScalarExpr::symbol(&g);
        let dag = adjoint(&op);
        if w.is_zero() && dag == op {
            spec.terms.push(TermSpec { coeff, freq: w, op });
        } else {
            spec.terms.push(TermSpec { coeff: coeff.clone(), freq: w.clone(), op });
            spec.terms.push(TermSpec { coeff, freq: -&w, op: dag });
        }
    }
    spec
}

pub fn random_assignment(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Assignment {
    let mut a = spec.assignment();
    for s in &spec.symbols {
        let v: f64 = match s.kind {
            SymbolKind::Frequency => rng.gen_range(0.5..2.0),
            _ => rng.gen_range(0.2..1.0),
        };
        a.set(&s.name, v);
    }
    a.set(TAU, rng.gen_range(0.3..1.5));
    a.set(TIME, rng.gen_range(-2.0..2.0));
    a
}

/// Random Hermitian unit-trace matrix; with a boson it lives on the lowest three levels.
pub fn random_rho(table: &ModeTable, rng: &mut ChaCha8Rng) -> M {
    let dims: Vec<usize> = table.modes.iter().map(|m| m.dim()).collect();
    let d: usize = dims.iter().product();
    let allowed = |mut i: usize| {
        for (k, &dk) in dims.iter().enumerate().rev() {
            let lvl = i % dk;
            i /= dk;
            if table.modes[k].kind == ModeKind::Bosonic && lvl > 2 {
                return false;
            }
        }
        true
    };
    let mut m = M::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            if allowed(i) && allowed(j) {
                m[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    let h = &m + &dagger(&m);
    let tr: Complex64 = (0..d).map(|i| h[(i, i)]).sum();
    h.mapv(|z| z / tr)
}

pub fn dagger(m: &M) -> M {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &M) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn phase(w: &FreqExpr, a: &Assignment) -> Complex64 {
    let t = a.real(TIME).unwrap();
    Complex64::new(0.0, -a.freq(w).unwrap() * t).exp()
}

fn km(k: &OpKey, t: &ModeTable) -> M {
    key_matrix(k, t).unwrap()
}

/// d rho/dt from the unassembled contraction terms.
pub fn raw_generator(raw: &[RawTerm], table: &ModeTable, a: &Assignment, rho: &M) -> M {
    let mut out = M::zeros(rho.dim());
    for r in raw {
        let c = r.coeff.eval(a).unwrap() * phase(&r.freq, a);
        let term = km(&r.a, table).dot(rho).dot(&km(&r.b, table)).mapv(|z| z * c);
        out = out + &term + &dagger(&term);
    }
    out
}

/// d rho/dt from the assembled effective Hamiltonian and pseudo-dissipators.
pub fn assembled_generator(eff: &EffectiveModel, a: &Assignment, rho: &M) -> M {
    let table = eff.modes();
    let d = rho.nrows();
    let mut h = M::zeros((d, d));
    for t in &eff.hamiltonian {
        let c = t.coeff.eval(a).unwrap() * phase(&t.freq, a);
        h.scaled_add(c, &km(&t.op, table));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut out = (h.dot(rho) - rho.dot(&h)).mapv(|z| -i * z);
    for t in &eff.dissipators {
        let c = t.rate.eval(a).unwrap() * phase(&t.freq, a);
        let l = km(&t.l, table);
        let j = km(&t.j, table);
        let jl = j.dot(&l);
        let dd = l.dot(rho).dot(&j) - (jl.dot(rho) + rho.dot(&jl)).mapv(|z| z * 0.5);
        out.scaled_add(c, &dd);
    }
    out
}

pub fn convention_name(c: DissipatorConvention) -> &'static str {
    match c {
        DissipatorConvention::Reversed => "reversed",
        DissipatorConvention::Plain => "plain",
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs the raw and assembled generators on random models; returns (max trace defect, max mismatch per convention).
pub fn liouvillian_sweep(models: usize, seed: u64) -> (f64, [f64; 2], [bool; 2]) {
    let mut rng = rng(seed);
    let mut trace_defect: f64 = 0.0;
    let mut mismatch = [0.0f64; 2];
    let mut hermitian = [true; 2];
    for _ in 0..models {
        let spec = random_model(&mut rng);
        for k in 1..=3 {
            let raw = raw_contraction_terms(&spec, k).unwrap();
            let effs: Vec<_> = [DissipatorConvention::Plain, DissipatorConvention::Reversed]
                .iter()
                .map(|&c| derive(&spec, k, &DeriveOptions { convention: c }).unwrap())
                .collect();
            for (n, e) in effs.iter().enumerate() {
                hermitian[n] &= e.check_hermiticity().is_ok();
            }
            for _ in 0..3 {
                let a = random_assignment(&spec, &mut rng);
                let rho = random_rho(&spec.modes, &mut rng);
                let norm = max_abs(&rho);
                let lr = raw_generator(&raw, &spec.modes, &a, &rho);
                let scale = max_abs(&lr).max(1.0);
                trace_defect = trace_defect.max(trace(&lr).norm() / norm);
                for (n, e) in effs.iter().enumerate() {
                    let la = assembled_generator(e, &a, &rho);
                    mismatch[n] = mismatch[n].max(max_abs(&(&la - &lr)) / scale);
                    trace_defect = trace_defect.max(trace(&la).norm() / norm);
                }
            }
        }
    }
    (trace_defect, mismatch, hermitian)
}
