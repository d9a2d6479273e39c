//! Numeric right-hand sides of the exact and coarse-grained equations of motion.
//!
//! Every coefficient is expanded as a polynomial in `t` times e^{-i w t}, and
//! operators sharing the same (w, power) are summed into one matrix up front.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::sparse::SparseOp;
use crate::error::{Result, TcgError};
use crate::model::{EffectiveModel, ModelSpec};
use crate::operators::matrix::{check_dim, key_matrix, matrix_realization, CMatrix, DEFAULT_DIM_CAP};
use crate::operators::{adjoint, ModeTable, OpKey, OperatorSum};
use crate::symbolic::{Assignment, FreqExpr, ScalarExpr, TIME};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
struct Phase {
    omega: f64,
    power: i32,
}

impl Phase {
    fn at(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, -self.omega * t).exp() * t.powi(self.power)
    }

    fn same(&self, o: &Phase) -> bool {
        self.power == o.power && (self.omega - o.omega).abs() <= 1e-12 * self.omega.abs().max(o.omega.abs())
    }
}

/// Numeric (power of t, coefficient) pairs of a scalar expression.
fn time_polynomial(c: &ScalarExpr, assign: &Assignment) -> Result<Vec<(i32, Complex64)>> {
    let mut out = Vec::new();
    for (p, part) in c.split_power(TIME) {
        if p < 0 {
            return Err(TcgError::validation("coefficient", format!("negative power t^{p} in `{c}`")));
        }
        let v = part.eval(assign)?;
        if v != Complex64::new(0.0, 0.0) {
            out.push((p, v));
        }
    }
    Ok(out)
}

/// Sum of (phase, matrix) groups.
#[derive(Clone, Debug, Default)]
pub struct TimeOperator {
    groups: Vec<(Phase, CMatrix)>,
}

impl TimeOperator {
    fn add(&mut self, omega: f64, power: i32, c: Complex64, m: &CMatrix) {
        let ph = Phase { omega, power };
        match self.groups.iter_mut().find(|(p, _)| p.same(&ph)) {
            Some((_, acc)) => acc.scaled_add(c, m),
            None => self.groups.push((ph, m.mapv(|z| z * c))),
        }
    }

    fn add_expr(&mut self, coeff: &ScalarExpr, omega: f64, m: &CMatrix, assign: &Assignment) -> Result<()> {
        for (p, v) in time_polynomial(coeff, assign)? {
            self.add(omega, p, v, m);
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Option<CMatrix> {
        let mut it = self.groups.iter();
        let (p0, m0) = it.next()?;
        let mut acc = m0.mapv(|z| z * p0.at(t));
        for (p, m) in it {
            acc.scaled_add(p.at(t), m);
        }
        Some(acc)
    }

    pub fn max_frequency(&self) -> f64 {
        self.groups
            .iter()
            .filter(|(_, m)| m.iter().any(|z| z.norm() > 0.0))
            .map(|(p, _)| p.omega.abs())
            .fold(0.0, f64::max)
    }

    fn sparse(&self, scale: Complex64) -> Vec<(Phase, SparseOp)> {
        self.groups
            .iter()
            .map(|(p, m)| (*p, SparseOp::from_dense(&m.mapv(|z| z * scale))))
            .collect()
    }
}

/// Which equation a generator integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Exact,
    Tcg { order: usize },
}

/// d rho/dt = A(t) rho + rho B(t) + sum_L L rho J_L(t).
#[derive(Clone, Debug)]
pub struct Generator {
    pub kind: GeneratorKind,
    modes: ModeTable,
    dim: usize,
    hamiltonian: TimeOperator,
    left: Vec<(Phase, SparseOp)>,
    right: Vec<(Phase, SparseOp)>,
    sandwich: Vec<(Phase, SparseOp, SparseOp)>,
    max_freq: f64,
}

struct KeyCache<'a> {
    table: &'a ModeTable,
    cache: BTreeMap<OpKey, CMatrix>,
}

impl KeyCache<'_> {
    fn get(&mut self, k: &OpKey) -> Result<CMatrix> {
        if let Some(m) = self.cache.get(k) {
            return Ok(m.clone());
        }
        let m = key_matrix(k, self.table)?;
        self.cache.insert(k.clone(), m.clone());
        Ok(m)
    }
}

impl Generator {
    /// von Neumann equation of the input Hamiltonian, ramps realized directly as t/T.
    pub fn exact(model: &ModelSpec, assign: &Assignment) -> Result<Self> {
        let table = &model.modes;
        check_dim(table, DEFAULT_DIM_CAP)?;
        let mut h = TimeOperator::default();
        let mut push = |coeff: &ScalarExpr, freq: &FreqExpr, op: &OperatorSum| -> Result<()> {
            let m = matrix_realization(op, table, assign)?;
            h.add_expr(coeff, assign.freq(freq)?, &m, assign)
        };
        for t in &model.terms {
            push(&t.coeff, &t.freq, &t.op)?;
        }
        for r in &model.ramps {
            let c = &(&r.coupling * &ScalarExpr::time()) * &ScalarExpr::symbol(&r.duration).inverse()?;
            let adj = adjoint(&r.op);
            push(&c, &r.freq, &r.op)?;
            let self_adjoint = adj == r.op && r.freq.is_zero() && r.coupling.conj() == r.coupling;
            if !self_adjoint {
                push(&c.conj(), &-&r.freq, &adj)?;
            }
        }
        Ok(Self::assemble(GeneratorKind::Exact, table.clone(), h, TimeOperator::default(), Vec::new()))
    }

    /// Coarse-grained master equation of an effective model.
    pub fn tcg(eff: &EffectiveModel, assign: &Assignment) -> Result<Self> {
        Self::tcg_parts(eff, assign, true, true)
    }

    /// Only the pseudo-dissipator part of the coarse-grained generator.
    pub fn tcg_dissipative(eff: &EffectiveModel, assign: &Assignment) -> Result<Self> {
        Self::tcg_parts(eff, assign, false, true)
    }

    fn tcg_parts(eff: &EffectiveModel, assign: &Assignment, with_h: bool, with_d: bool) -> Result<Self> {
        let table = eff.modes();
        check_dim(table, DEFAULT_DIM_CAP)?;
        let mut keys = KeyCache {
            table,
            cache: BTreeMap::new(),
        };
        let mut h = TimeOperator::default();
        if with_h {
            for t in &eff.hamiltonian {
                h.add_expr(&t.coeff, assign.freq(&t.freq)?, &keys.get(&t.op)?, assign)?;
            }
        }
        let mut anti = TimeOperator::default();
        let mut by_l: Vec<(OpKey, TimeOperator)> = Vec::new();
        if with_d {
            for d in &eff.dissipators {
                let w = assign.freq(&d.freq)?;
                let l = keys.get(&d.l)?;
                let j = keys.get(&d.j)?;
                let jl = j.dot(&l);
                anti.add_expr(&d.rate, w, &jl, assign)?;
                let slot = match by_l.iter().position(|(k, _)| k == &d.l) {
                    Some(i) => i,
                    None => {
                        by_l.push((d.l.clone(), TimeOperator::default()));
                        by_l.len() - 1
                    }
                };
                by_l[slot].1.add_expr(&d.rate, w, &j, assign)?;
            }
        }
        let mut sandwich = Vec::new();
        for (lk, js) in by_l {
            let l = SparseOp::from_dense(&keys.get(&lk)?);
            for (ph, j) in js.sparse(Complex64::new(1.0, 0.0)) {
                sandwich.push((ph, l.clone(), j));
            }
        }
        Ok(Self::assemble(GeneratorKind::Tcg { order: eff.order }, table.clone(), h, anti, sandwich))
    }

    fn assemble(
        kind: GeneratorKind,
        modes: ModeTable,
        h: TimeOperator,
        anti: TimeOperator,
        sandwich: Vec<(Phase, SparseOp, SparseOp)>,
    ) -> Self {
        let mut max_freq = h.max_frequency().max(anti.max_frequency());
        for (p, _, _) in &sandwich {
            max_freq = max_freq.max(p.omega.abs());
        }
        let half = Complex64::new(-0.5, 0.0);
        let mut left = h.sparse(-I);
        left.extend(anti.sparse(half));
        let mut right = h.sparse(I);
        right.extend(anti.sparse(half));
        Generator {
            kind,
            dim: modes.dim(),
            modes,
            hamiltonian: h,
            left,
            right,
            sandwich,
            max_freq,
        }
    }

    pub fn modes(&self) -> &ModeTable {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest |w| among the retained phases.
    pub fn max_frequency(&self) -> f64 {
        self.max_freq
    }

    /// H(t) as a dense matrix.
    pub fn hamiltonian_at(&self, t: f64) -> CMatrix {
        self.hamiltonian
            .at(t)
            .unwrap_or_else(|| CMatrix::zeros((self.dim, self.dim)))
    }

    pub fn has_dissipators(&self) -> bool {
        !self.sandwich.is_empty()
    }

    pub fn apply(&self, t: f64, rho: &CMatrix) -> CMatrix {
        let x = rho.as_standard_layout();
        let x = x.as_slice().expect("standard layout");
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for (p, s) in &self.left {
            s.left_acc(p.at(t), x, &mut out);
        }
        for (p, s) in &self.right {
            s.right_acc(p.at(t), x, &mut out);
        }
        let mut tmp = vec![Complex64::new(0.0, 0.0); d * d];
        let one = Complex64::new(1.0, 0.0);
        for (p, l, j) in &self.sandwich {
            tmp.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            l.left_acc(one, x, &mut tmp);
            j.right_acc(p.at(t), &tmp, &mut out);
        }
        CMatrix::from_shape_vec((d, d), out).expect("square buffer")
    }
}
