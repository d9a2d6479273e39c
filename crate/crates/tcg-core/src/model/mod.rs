//! Input models and the effective TCG model built from them.

mod assemble;
mod document;
pub mod presets;
mod prune;
mod ramp;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Result, TcgError};
use crate::operators::{adjoint, multiply_canonicalize, ModeTable, OpKey, OperatorSum};
use crate::symbolic::{parse_freq, parse_scalar, Assignment, FilterSpec, FreqExpr, ScalarExpr, SymbolKind, Tau, TAU};

pub use assemble::{
    derive, effective_dissipators, effective_hamiltonian, grouped_drive, raw_contraction_terms, DeriveOptions,
    DissipatorConvention, RawTerm,
};
pub use document::{
    export_model, import_effective, load_model, load_model_str, model_to_document, ExportFormat, ModelDocument,
};
pub use prune::{prune_terms, PrunedTerm};
pub use ramp::{encode_linear_ramp, numeric_regulator_value, RampLimit};

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDecl {
    pub name: String,
    pub kind: SymbolKind,
    pub value: Option<Complex64>,
}

/// One input term g * op * e^{-i freq t}.
#[derive(Clone, Debug, PartialEq)]
pub struct TermSpec {
    pub coeff: ScalarExpr,
    pub freq: FreqExpr,
    pub op: OperatorSum,
}

/// Linearly ramped drive coupling * (t/T) * (op e^{-i freq t} + h.c.).
///
/// A self-adjoint operator at zero frequency is not doubled.
#[derive(Clone, Debug, PartialEq)]
pub struct RampSpec {
    pub coupling: ScalarExpr,
    pub duration: String,
    pub op: OperatorSum,
    pub freq: FreqExpr,
    pub regulator: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub modes: ModeTable,
    pub symbols: Vec<SymbolDecl>,
    pub terms: Vec<TermSpec>,
    pub ramps: Vec<RampSpec>,
    pub filter: FilterSpec,
}

/// Effective Hamiltonian term q * s * e^{-i freq t}.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTerm {
    pub coeff: ScalarExpr,
    pub freq: FreqExpr,
    pub op: OpKey,
}

/// Pseudo-dissipator gamma e^{-i freq t} (L rho J - {J L, rho}/2).
#[derive(Clone, Debug, PartialEq)]
pub struct DissipatorTerm {
    pub rate: ScalarExpr,
    pub freq: FreqExpr,
    pub l: OpKey,
    pub j: OpKey,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModel {
    pub order: usize,
    pub hamiltonian: Vec<HamiltonianTerm>,
    pub dissipators: Vec<DissipatorTerm>,
    pub source: ModelSpec,
    pub pruned: Vec<PrunedTerm>,
}

impl ModelSpec {
    pub fn new(modes: ModeTable, filter: FilterSpec) -> Self {
        ModelSpec {
            modes,
            symbols: Vec::new(),
            terms: Vec::new(),
            ramps: Vec::new(),
            filter,
        }
    }

    pub fn symbol(&self, name: &str) -> Option<&SymbolDecl> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind, value: Option<Complex64>) {
        match self.symbols.iter_mut().find(|s| s.name == name) {
            Some(s) => {
                s.kind = kind;
                if value.is_some() {
                    s.value = value;
                }
            }
            None => self.symbols.push(SymbolDecl {
                name: name.to_string(),
                kind,
                value,
            }),
        }
    }

    pub fn kind_of(&self, name: &str) -> SymbolKind {
        self.symbol(name).map(|s| s.kind).unwrap_or(SymbolKind::Real)
    }

    pub fn parse_coupling(&self, text: &str) -> Result<ScalarExpr> {
        parse_scalar(text, &|n| self.kind_of(n))
    }

    pub fn regulators(&self) -> BTreeSet<String> {
        self.ramps.iter().map(|r| r.regulator.clone()).collect()
    }

    /// Sets or overrides a numeric parameter value.
    pub fn set_value(&mut self, name: &str, v: Complex64) -> Result<()> {
        match self.symbols.iter_mut().find(|s| s.name == name) {
            Some(s) => {
                s.value = Some(v);
                Ok(())
            }
            None if name == TAU => {
                if v.im != 0.0 || v.re < 0.0 {
                    return Err(TcgError::validation("tau", "tau must be a non-negative real"));
                }
                self.filter.tau = Tau::Numeric(v.re);
                Ok(())
            }
            None => Err(TcgError::Reference(format!("unknown parameter `{name}`"))),
        }
    }

    /// Numeric assignment of every declared value, tau and the filter shape.
    pub fn assignment(&self) -> Assignment {
        let mut a = Assignment::new();
        a.filter = self.filter.kind.clone();
        for s in &self.symbols {
            if let Some(v) = s.value {
                a.set(&s.name, v);
            }
        }
        if let Tau::Numeric(t) = self.filter.tau {
            a.set(TAU, t);
        }
        a
    }

    /// Input terms with every ramp replaced by its regulator encoding.
    pub fn expanded_terms(&self) -> Result<Vec<TermSpec>> {
        let mut out = self.terms.clone();
        for r in &self.ramps {
            out.extend(encode_linear_ramp(r)?);
        }
        Ok(out)
    }

    /// Every symbol referenced by terms and ramps must be declared.
    pub fn check_references(&self) -> Result<()> {
        let declared: BTreeSet<&str> = self.symbols.iter().map(|s| s.name.as_str()).collect();
        let check = |names: BTreeSet<String>, field: String| -> Result<()> {
            for n in names {
                if n != TAU && n != crate::symbolic::TIME && !declared.contains(n.as_str()) {
                    return Err(TcgError::Reference(format!("{field}: undeclared symbol `{n}`")));
                }
            }
            Ok(())
        };
        for (k, t) in self.terms.iter().enumerate() {
            check(t.coeff.free_symbols(), format!("terms[{k}].coupling"))?;
            check(freq_names(&t.freq), format!("terms[{k}].frequency"))?;
            for (_, c) in t.op.terms() {
                check(c.free_symbols(), format!("terms[{k}].operator"))?;
            }
        }
        for (k, r) in self.ramps.iter().enumerate() {
            check(r.coupling.free_symbols(), format!("ramps[{k}].coupling"))?;
            check(freq_names(&r.freq), format!("ramps[{k}].frequency"))?;
            if !declared.contains(r.duration.as_str()) {
                return Err(TcgError::Reference(format!(
                    "ramps[{k}].duration: undeclared symbol `{}`",
                    r.duration
                )));
            }
        }
        for s in &self.symbols {
            if self.regulators().contains(&s.name) {
                continue;
            }
            if s.kind == SymbolKind::Frequency {
                if let Some(v) = s.value {
                    if v.im != 0.0 {
                        return Err(TcgError::validation(format!("symbols.{}", s.name), "frequency must be real"));
                    }
                }
            }
        }
        for (k, r) in self.ramps.iter().enumerate() {
            let reg = r.regulator.as_str();
            let used_in_terms = self
                .terms
                .iter()
                .any(|t| t.freq.contains(reg) || t.coeff.contains_symbol(reg));
            let used_in_ramps = self
                .ramps
                .iter()
                .any(|o| o.freq.contains(reg) || o.coupling.contains_symbol(reg) || o.duration == reg);
            if used_in_terms || used_in_ramps {
                return Err(TcgError::validation(
                    format!("ramps[{k}].regulator"),
                    format!("regulator `{reg}` is used elsewhere in the model"),
                ));
            }
        }
        Ok(())
    }

    /// Sum of all terms keyed by (canonical operator, frequency).
    fn term_map(&self) -> BTreeMap<(OpKey, FreqExpr), ScalarExpr> {
        let mut m: BTreeMap<(OpKey, FreqExpr), ScalarExpr> = BTreeMap::new();
        for t in &self.terms {
            for (k, c) in t.op.terms() {
                let e = m.entry((k.clone(), t.freq.clone())).or_default();
                e.add_assign(&(&t.coeff * c));
            }
        }
        m.retain(|_, v| !v.is_zero());
        m
    }

    /// Exact check that the term set is closed under (g*, h^dagger, -w).
    pub fn check_hermiticity(&self) -> Result<()> {
        let m = self.term_map();
        for ((k, w), c) in &m {
            let partner = m.get(&(k.adjoint(), -w));
            if partner != Some(&c.conj()) {
                return Err(TcgError::Hermiticity(format!(
                    "no conjugate partner for `{}` at frequency {}",
                    k.render(&self.modes),
                    w
                )));
            }
        }
        Ok(())
    }

    /// Appends the conjugate of every term whose partner is missing.
    pub fn complete_conjugates(&mut self) {
        let m = self.term_map();
        let mut extra = Vec::new();
        for t in &self.terms {
            let missing = t.op.terms().any(|(k, c)| {
                let key = (k.adjoint(), -&t.freq);
                let want = (&t.coeff * c).conj();
                m.get(&key) != Some(&want)
            });
            if missing {
                extra.push(TermSpec {
                    coeff: t.coeff.conj(),
                    freq: -&t.freq,
                    op: adjoint(&t.op),
                });
            }
        }
        self.terms.extend(extra);
    }

    /// Replaces a symbol everywhere; frequency symbols take a frequency expression.
    pub fn substitute(&mut self, name: &str, by: &str) -> Result<()> {
        let decl = self
            .symbol(name)
            .ok_or_else(|| TcgError::Reference(format!("unknown symbol `{name}`")))?
            .clone();
        if decl.kind == SymbolKind::Frequency {
            let w = parse_freq(by)?;
            for s in w.symbols() {
                if self.symbol(&s).is_none() {
                    self.declare(&s, SymbolKind::Frequency, None);
                }
            }
            for t in &mut self.terms {
                t.freq = t.freq.substitute(name, &w);
                t.coeff = t.coeff.substitute_freq(name, &w)?;
            }
            for r in &mut self.ramps {
                r.freq = r.freq.substitute(name, &w);
                r.coupling = r.coupling.substitute_freq(name, &w)?;
            }
        } else {
            let e = self.parse_coupling(by)?;
            for t in &mut self.terms {
                t.coeff = t.coeff.substitute_symbol(name, &e)?;
            }
            for r in &mut self.ramps {
                r.coupling = r.coupling.substitute_symbol(name, &e)?;
            }
        }
        self.terms.retain(|t| !t.coeff.is_zero() && !t.op.is_empty());
        self.ramps.retain(|r| !r.coupling.is_zero() && !r.op.is_empty());
        let used = self.used_symbols();
        self.symbols.retain(|s| s.name != name || used.contains(name));
        Ok(())
    }

    fn used_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.terms {
            out.extend(t.coeff.free_symbols());
            out.extend(freq_names(&t.freq));
        }
        for r in &self.ramps {
            out.extend(r.coupling.free_symbols());
            out.extend(freq_names(&r.freq));
            out.insert(r.duration.clone());
        }
        out
    }

    /// Input Hamiltonian as an operator sum per frequency (used by the exact simulator).
    pub fn drive_by_frequency(&self) -> Result<Vec<(FreqExpr, OperatorSum)>> {
        grouped_drive(&self.expanded_terms()?, &self.modes)
    }
}

fn freq_names(w: &FreqExpr) -> BTreeSet<String> {
    w.symbols().into_iter().map(|s| s.to_string()).collect()
}

/// Product g h for one input term, or a product of such operator sums.
pub(crate) fn product(ops: &[&OperatorSum], table: &ModeTable) -> Result<OperatorSum> {
    let mut acc = OperatorSum::identity(table);
    for o in ops {
        acc = multiply_canonicalize(o, &acc, table)?;
    }
    Ok(acc)
}

impl EffectiveModel {
    pub fn empty(source: ModelSpec, order: usize) -> Self {
        EffectiveModel {
            order,
            hamiltonian: Vec::new(),
            dissipators: Vec::new(),
            source,
            pruned: Vec::new(),
        }
    }

    pub fn modes(&self) -> &ModeTable {
        &self.source.modes
    }

    /// Exact closure of both term sets under their conjugation pairings.
    pub fn check_hermiticity(&self) -> Result<()> {
        let h: BTreeMap<(&OpKey, &FreqExpr), &ScalarExpr> =
            self.hamiltonian.iter().map(|t| ((&t.op, &t.freq), &t.coeff)).collect();
        for t in &self.hamiltonian {
            let adj = t.op.adjoint();
            let w = -&t.freq;
            match h.get(&(&adj, &w)) {
                Some(c) if **c == t.coeff.conj() => {}
                _ => {
                    return Err(TcgError::Hermiticity(format!(
                        "hamiltonian term `{}` at {} lacks its partner",
                        t.op.render(self.modes()),
                        t.freq
                    )))
                }
            }
        }
        let d: BTreeMap<(&OpKey, &OpKey, &FreqExpr), &ScalarExpr> = self
            .dissipators
            .iter()
            .map(|t| ((&t.l, &t.j, &t.freq), &t.rate))
            .collect();
        for t in &self.dissipators {
            let (l, j, w) = (t.j.adjoint(), t.l.adjoint(), -&t.freq);
            match d.get(&(&l, &j, &w)) {
                Some(c) if **c == t.rate.conj() => {}
                _ => {
                    return Err(TcgError::Hermiticity(format!(
                        "dissipator D[{}, {}] at {} lacks its partner",
                        t.l.render(self.modes()),
                        t.j.render(self.modes()),
                        t.freq
                    )))
                }
            }
        }
        Ok(())
    }

    /// Hamiltonian coefficient for an operator at a frequency, zero if absent.
    pub fn hamiltonian_coeff(&self, op: &OpKey, freq: &FreqExpr) -> ScalarExpr {
        self.hamiltonian
            .iter()
            .find(|t| &t.op == op && &t.freq == freq)
            .map(|t| t.coeff.clone())
            .unwrap_or_default()
    }

    pub fn dissipator_rate(&self, l: &OpKey, j: &OpKey, freq: &FreqExpr) -> ScalarExpr {
        self.dissipators
            .iter()
            .find(|t| &t.l == l && &t.j == j && &t.freq == freq)
            .map(|t| t.rate.clone())
            .unwrap_or_default()
    }

    /// Applies a map to every coefficient, dropping terms that vanish.
    pub fn map_coefficients(&self, f: &dyn Fn(&ScalarExpr) -> Result<ScalarExpr>) -> Result<EffectiveModel> {
        let mut out = self.clone();
        out.hamiltonian.clear();
        out.dissipators.clear();
        for t in &self.hamiltonian {
            let c = f(&t.coeff)?;
            if !c.is_zero() {
                out.hamiltonian.push(HamiltonianTerm { coeff: c, ..t.clone() });
            }
        }
        for t in &self.dissipators {
            let c = f(&t.rate)?;
            if !c.is_zero() {
                out.dissipators.push(DissipatorTerm { rate: c, ..t.clone() });
            }
        }
        Ok(out)
    }

    /// IR limit: drops every contribution carrying a filter factor of nonzero argument.
    pub fn ir_limit(&self) -> EffectiveModel {
        self.map_coefficients(&|c| Ok(c.drop_filtered()))
            .expect("dropping monomials cannot fail")
    }
}
