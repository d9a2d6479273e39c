//! Hand-coded order-two Rabi coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcg_core::model::presets::rabi;
use tcg_core::model::{derive, DeriveOptions, EffectiveModel};
use tcg_core::operators::parse_key;
use tcg_core::symbolic::{parse_freq, Assignment, TAU};

struct Point {
    wc: f64,
    wa: f64,
    g: f64,
    tau: f64,
}

impl Point {
    fn f(&self, w: f64) -> f64 {
        (-w * w * self.tau * self.tau / 2.0).exp()
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = Point {
            wc: 2.0 * PI * rng.gen_range(1.0e9..3.0e9),
            wa: 2.0 * PI * rng.gen_range(1.0e9..3.0e9),
            g: 2.0 * PI * rng.gen_range(0.05e9..0.5e9),
            tau: rng.gen_range(0.05e-9..0.5e-9),
        };
        if (p.wc - p.wa).abs() > 2.0 * PI * 20.0e6 {
            return p;
        }
    }
}

fn h(eff: &EffectiveModel, op: &str, w: &str, a: &Assignment) -> Complex64 {
    let key = parse_key(op, eff.modes()).unwrap();
    eff.hamiltonian_coeff(&key, &parse_freq(w).unwrap()).eval(a).unwrap()
}

/// sz coefficient of an operator stored in the projector basis.
fn z(eff: &EffectiveModel, prefix: &str, w: &str, a: &Assignment) -> Complex64 {
    (h(eff, &format!("{prefix}t(e,e)"), w, a) - h(eff, &format!("{prefix}t(g,g)"), w, a)) / 2.0
}

fn d(eff: &EffectiveModel, l: &str, j: &str, w: &str, a: &Assignment) -> Complex64 {
    let t = eff.modes();
    eff.dissipator_rate(&parse_key(l, t).unwrap(), &parse_key(j, t).unwrap(), &parse_freq(w).unwrap())
        .eval(a)
        .unwrap()
}

/// Printed dissipator prefactors P enter the master equation as -i P.
fn rate(p: f64) -> Complex64 {
    Complex64::new(0.0, -p)
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}

/// Worst relative deviation per coefficient over `points` random parameter sets.
pub fn order_two_deviations(points: usize, seed: u64) -> BTreeMap<&'static str, f64> {
    let model = rabi();
    let eff = derive(&model, 2, &DeriveOptions::default()).unwrap();
    let base = model.assignment();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    for _ in 0..points {
        let p = random_point(&mut rng);
        let a = base.clone().with("wc", p.wc).with("wa", p.wa).with("g", p.g).with(TAU, p.tau);
        let (wc, wa, g) = (p.wc, p.wa, p.g);
        let dm = wa - wc;
        let sp = wa + wc;
        let e = |x: f64| (x * p.tau * p.tau).exp();
        let mut check = |name: &'static str, got: Complex64, want: Complex64| {
            let w = worst.entry(name).or_insert(0.0);
            *w = w.max(rel(got, want));
        };

        // co-rotating part
        let first_r = Complex64::from(g / 2.0 * p.f(dm));
        check("a sp", h(&eff, "a*sp", "wc - wa", &a), first_r);
        check("a' sm", h(&eff, "a'*sm", "wa - wc", &a), first_r);
        let lamb = (1.0 - e(-dm * dm)) / dm + (1.0 - e(-sp * sp)) / sp;
        check("sz", z(&eff, "", "0", &a), Complex64::from(g * g / 8.0 * lamb));
        check("a'a sz", z(&eff, "a'*a*", "0", &a), Complex64::from(g * g / 4.0 * lamb));

        // counter-rotating part
        let first_cr = Complex64::from(g / 2.0 * p.f(sp));
        check("a' sp", h(&eff, "a'*sp", "-wc - wa", &a), first_cr);
        check("a sm", h(&eff, "a*sm", "wc + wa", &a), first_cr);
        let mix = e(-2.0 * wc * wc) - e(-(wa * wa + wc * wc));
        let two = Complex64::from(g * g / 4.0 * mix * wa / (wa * wa - wc * wc));
        check("a^2 sz", z(&eff, "a^2*", "2*wc", &a), two);
        check("a'^2 sz", z(&eff, "a'^2*", "-2*wc", &a), two);

        // co-rotating dissipators
        let pr = g * g / 2.0 * (e(-dm * dm) - e(-2.0 * dm * dm)) / dm;
        check("D[a' sm, a' sm]", d(&eff, "a'*sm", "a'*sm", "2*wa - 2*wc", &a), rate(pr));
        check("D[a sp, a sp]", d(&eff, "a*sp", "a*sp", "2*wc - 2*wa", &a), rate(pr).conj());

        // counter-rotating dissipators
        let pc = g * g / 2.0 * mix * wc / (wa * wa - wc * wc);
        check("D[a sp, a sm]", d(&eff, "a*sp", "a*sm", "2*wc", &a), rate(pc));
        check("D[a sm, a sp]", d(&eff, "a*sm", "a*sp", "2*wc", &a), rate(pc));
        check("D[a' sm, a' sp]", d(&eff, "a'*sm", "a'*sp", "-2*wc", &a), rate(pc).conj());
        let mixa = e(-2.0 * wa * wa) - e(-(wa * wa + wc * wc));
        let pa = g * g / 2.0 * mixa * wa / (wc * wc - wa * wa);
        check("D[a sm, a' sm]", d(&eff, "a*sm", "a'*sm", "2*wa", &a), rate(pa));
        check("D[a' sm, a sm]", d(&eff, "a'*sm", "a*sm", "2*wa", &a), rate(pa));
        let ps = g * g / 2.0 * (e(-sp * sp) - e(-2.0 * sp * sp)) / sp;
        check("D[a sm, a sm]", d(&eff, "a*sm", "a*sm", "2*wc + 2*wa", &a), rate(ps));
        check("D[a' sp, a' sp]", d(&eff, "a'*sp", "a'*sp", "-2*wc - 2*wa", &a), rate(ps).conj());
    }
    worst
}
