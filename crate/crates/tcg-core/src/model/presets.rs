//! Bundled models: Rabi, ramped Kerr parametron and driven Duffing oscillator.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Rational64;

use super::document::{load_model_str, model_to_document, ModelDocument};
use super::{ModelSpec, TermSpec};
use crate::error::{Result, TcgError};
use crate::operators::{multiply_canonicalize, parse_operator, ModeSpec, ModeTable, OpKey, OperatorSum};
use crate::symbolic::{parse_quantity, FilterSpec, FreqExpr, ScalarExpr, SymbolKind};

pub const RABI_JSON: &str = include_str!("../../presets/rabi.json");
pub const PARAMETRON_JSON: &str = include_str!("../../presets/parametron.json");

pub const PRESETS: [&str; 3] = ["rabi", "parametron", "duffing"];

pub fn rabi() -> ModelSpec {
    load_model_str(RABI_JSON).expect("bundled rabi model is valid")
}

pub fn parametron() -> ModelSpec {
    load_model_str(PARAMETRON_JSON).expect("bundled parametron model is valid")
}

/// delta a'a + g4 (a e^{-5iwt} + a' e^{5iwt} + Pi e^{-6iwt} + Pi* e^{6iwt})^4, identity terms dropped.
pub fn duffing() -> ModelSpec {
    duffing_with(15).expect("generated duffing model is valid")
}

pub fn duffing_with(truncation: usize) -> Result<ModelSpec> {
    let table = ModeTable::new(vec![ModeSpec::bosonic("a", truncation)])?.with_degree_cap(16);
    let mut spec = ModelSpec::new(table.clone(), FilterSpec::gaussian_numeric(0.5e-9));
    let q = |s: &str| parse_quantity(s).expect("literal quantity");
    spec.declare("w", SymbolKind::Frequency, Some(q("2pi*2GHz")));
    spec.declare("g4", SymbolKind::Real, Some(q("2pi*0.5MHz")));
    spec.declare("dd", SymbolKind::Real, Some(q("2pi*(-58.4MHz)")));
    spec.declare("Pi", SymbolKind::Complex, Some(Complex64::new(0.0, 2.0)));

    let w = |n: i64| FreqExpr::term("w", Rational64::from_integer(n));
    let pi = ScalarExpr::complex_symbol("Pi", false);
    let factors: Vec<(ScalarExpr, FreqExpr, OperatorSum)> = vec![
        (ScalarExpr::one(), w(5), parse_operator("a", &table)?),
        (ScalarExpr::one(), w(-5), parse_operator("a'", &table)?),
        (pi.clone(), w(6), OperatorSum::identity(&table)),
        (pi.conj(), w(-6), OperatorSum::identity(&table)),
    ];
    let mut acc: Vec<(ScalarExpr, FreqExpr, OperatorSum)> =
        vec![(ScalarExpr::symbol("g4"), FreqExpr::zero(), OperatorSum::identity(&table))];
    for _ in 0..4 {
        let mut next = Vec::with_capacity(acc.len() * 4);
        for (c, f, o) in &acc {
            for (c2, f2, o2) in &factors {
                next.push((c * c2, f + f2, multiply_canonicalize(o, o2, &table)?));
            }
        }
        acc = next;
    }
    let mut merged: BTreeMap<(OpKey, FreqExpr), ScalarExpr> = BTreeMap::new();
    for (c, f, o) in acc {
        for (k, kc) in o.terms() {
            if k.is_identity() {
                continue;
            }
            merged.entry((k.clone(), f.clone())).or_default().add_assign(&(&c * kc));
        }
    }
    spec.terms.push(TermSpec {
        coeff: ScalarExpr::symbol("dd"),
        freq: FreqExpr::zero(),
        op: parse_operator("a'*a", &table)?,
    });
    for ((k, f), c) in merged {
        if !c.is_zero() {
            spec.terms.push(TermSpec {
                coeff: c,
                freq: f,
                op: OperatorSum::from_key(k, ScalarExpr::one()),
            });
        }
    }
    spec.check_references()?;
    spec.check_hermiticity()?;
    Ok(spec)
}

pub fn preset(name: &str) -> Result<ModelSpec> {
    match name {
        "rabi" => Ok(rabi()),
        "parametron" => Ok(parametron()),
        "duffing" => Ok(duffing()),
        _ => Err(TcgError::validation("preset", format!("unknown preset `{name}` (expected rabi|parametron|duffing)"))),
    }
}

pub fn preset_document(name: &str) -> Result<ModelDocument> {
    Ok(model_to_document(&preset(name)?))
}
