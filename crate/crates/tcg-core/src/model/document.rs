//! Model-file schema, loading with validation, and effective-model export.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DissipatorTerm, EffectiveModel, HamiltonianTerm, ModelSpec, PrunedTerm, RampSpec, TermSpec};
use crate::error::{Result, TcgError};
use crate::operators::{parse_key, parse_operator, ModeKind, ModeSpec, ModeTable, OperatorSum};
use crate::symbolic::parse::is_reserved;
use crate::symbolic::{parse_freq, parse_quantity, FilterKind, FilterSpec, ScalarExpr, SymbolKind, Tau};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrStr {
    Num(f64),
    Str(String),
}

impl NumOrStr {
    fn text(&self) -> String {
        match self {
            NumOrStr::Num(v) => format!("{v}"),
            NumOrStr::Str(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDoc {
    pub name: String,
    pub kind: ModeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<NumOrStr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDoc {
    #[serde(default = "gaussian_name")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<NumOrStr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<(f64, f64)>>,
}

fn gaussian_name() -> String {
    "gaussian".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coupling: NumOrStr,
    pub frequency: NumOrStr,
    pub operator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampDoc {
    #[serde(alias = "symbol")]
    pub coupling: NumOrStr,
    pub duration: String,
    pub operator: String,
    #[serde(default, alias = "base_frequency", skip_serializing_if = "Option::is_none")]
    pub frequency: Option<NumOrStr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regulator: Option<String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default)]
    pub modes: Vec<ModeDoc>,
    #[serde(default)]
    pub symbols: Vec<SymbolDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterDoc>,
    #[serde(default)]
    pub terms: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ramps: Vec<RampDoc>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub auto_complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<u32>,
}

fn kind_from_str(s: &str, field: &str) -> Result<SymbolKind> {
    Ok(match s {
        "frequency" | "regulator" => SymbolKind::Frequency,
        "real" | "duration" => SymbolKind::Real,
        "complex" => SymbolKind::Complex,
        _ => return Err(TcgError::validation(field, format!("unknown symbol kind `{s}`"))),
    })
}

fn kind_name(k: SymbolKind) -> &'static str {
    match k {
        SymbolKind::Frequency => "frequency",
        SymbolKind::Real => "real",
        SymbolKind::Complex => "complex",
    }
}

fn parse_value(v: &NumOrStr, unit: Option<&str>, field: &str) -> Result<Complex64> {
    let base = match v {
        NumOrStr::Num(x) => Complex64::new(*x, 0.0),
        NumOrStr::Str(s) => parse_quantity(s).map_err(|e| TcgError::validation(field, e.to_string()))?,
    };
    Ok(match unit {
        Some(u) => base * parse_quantity(u).map_err(|e| TcgError::validation(field, e.to_string()))?,
        None => base,
    })
}

fn parse_filter(doc: &Option<FilterDoc>) -> Result<FilterSpec> {
    let Some(f) = doc else {
        return Ok(FilterSpec::gaussian());
    };
    let kind = match f.kind.as_str() {
        "gaussian" => FilterKind::Gaussian,
        "custom-table" | "custom_table" | "table" => FilterKind::CustomTable {
            points: f
                .points
                .clone()
                .ok_or_else(|| TcgError::validation("filter.points", "table filter needs points"))?,
        },
        other => return Err(TcgError::validation("filter.kind", format!("unknown filter `{other}`"))),
    };
    let tau = match &f.tau {
        None => Tau::Symbolic,
        Some(NumOrStr::Str(s)) if s == "symbolic" => Tau::Symbolic,
        Some(v) => {
            let x = parse_value(v, None, "filter.tau")?;
            if x.im != 0.0 {
                return Err(TcgError::validation("filter.tau", "tau must be real"));
            }
            Tau::Numeric(x.re)
        }
    };
    let spec = FilterSpec { kind, tau };
    spec.validate()?;
    Ok(spec)
}

fn single_key_op(text: &str, table: &ModeTable, field: &str) -> Result<OperatorSum> {
    let op = parse_operator(text, table).map_err(|e| TcgError::validation(field, e.to_string()))?;
    Ok(op)
}

/// Builds a validated ModelSpec from a parsed document.
pub fn document_to_model(doc: &ModelDocument) -> Result<ModelSpec> {
    let mut modes = Vec::new();
    for (k, m) in doc.modes.iter().enumerate() {
        modes.push(match m.kind {
            ModeKind::Bosonic => ModeSpec::bosonic(
                &m.name,
                m.truncation
                    .ok_or_else(|| TcgError::validation(format!("modes[{k}].truncation"), "bosonic mode needs a truncation"))?,
            ),
            ModeKind::TwoLevel => {
                if matches!(m.truncation, Some(t) if t != 2) {
                    return Err(TcgError::validation(format!("modes[{k}].truncation"), "two-level modes have 2 levels"));
                }
                ModeSpec::two_level(&m.name)
            }
        });
    }
    let mut table = ModeTable::new(modes)?;
    if let Some(c) = doc.degree_cap {
        table = table.with_degree_cap(c);
    }
    let filter = parse_filter(&doc.filter)?;
    let mut spec = ModelSpec::new(table, filter);

    // symbols that occur in any frequency slot are frequencies unless declared otherwise
    let mut freq_names = BTreeSet::new();
    for (k, t) in doc.terms.iter().enumerate() {
        let w = parse_freq(&t.frequency.text()).map_err(|e| TcgError::validation(format!("terms[{k}].frequency"), e.to_string()))?;
        freq_names.extend(w.symbols().into_iter().map(|s| s.to_string()));
    }
    for (k, r) in doc.ramps.iter().enumerate() {
        if let Some(f) = &r.frequency {
            let w = parse_freq(&f.text()).map_err(|e| TcgError::validation(format!("ramps[{k}].frequency"), e.to_string()))?;
            freq_names.extend(w.symbols().into_iter().map(|s| s.to_string()));
        }
    }
    for (k, s) in doc.symbols.iter().enumerate() {
        let field = format!("symbols[{k}]");
        if is_reserved(&s.name) || s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(TcgError::validation(field, format!("`{}` is not a usable symbol name", s.name)));
        }
        if spec.symbol(&s.name).is_some() {
            return Err(TcgError::validation(field, format!("duplicate symbol `{}`", s.name)));
        }
        let kind = match &s.kind {
            Some(kd) => kind_from_str(kd, &format!("{field}.kind"))?,
            None if freq_names.contains(&s.name) => SymbolKind::Frequency,
            None => SymbolKind::Real,
        };
        let value = match &s.value {
            Some(v) => Some(parse_value(v, s.unit.as_deref(), &format!("{field}.value"))?),
            None => None,
        };
        spec.declare(&s.name, kind, value);
    }
    for n in &freq_names {
        if spec.symbol(n).is_none() && !doc.ramps.iter().any(|r| r.regulator.as_deref() == Some(n.as_str())) {
            return Err(TcgError::Reference(format!("undeclared frequency symbol `{n}`")));
        }
    }

    for (k, t) in doc.terms.iter().enumerate() {
        let coeff = spec
            .parse_coupling(&t.coupling.text())
            .map_err(|e| TcgError::validation(format!("terms[{k}].coupling"), e.to_string()))?;
        let freq = parse_freq(&t.frequency.text())?;
        let op = single_key_op(&t.operator, &spec.modes, &format!("terms[{k}].operator"))?;
        // one canonical monomial per stored term
        for (key, c) in op.terms() {
            spec.terms.push(TermSpec {
                coeff: &coeff * c,
                freq: freq.clone(),
                op: OperatorSum::from_key(key.clone(), ScalarExpr::one()),
            });
        }
    }
    for (k, r) in doc.ramps.iter().enumerate() {
        let field = format!("ramps[{k}]");
        let regulator = r.regulator.clone().unwrap_or_else(|| "delta".to_string());
        if spec.symbol(&regulator).is_none() {
            spec.declare(&regulator, SymbolKind::Frequency, None);
        }
        if spec.symbol(&r.duration).is_none() {
            return Err(TcgError::Reference(format!("{field}.duration: undeclared symbol `{}`", r.duration)));
        }
        let coupling = spec
            .parse_coupling(&r.coupling.text())
            .map_err(|e| TcgError::validation(format!("{field}.coupling"), e.to_string()))?;
        let freq = match &r.frequency {
            Some(f) => parse_freq(&f.text())?,
            None => crate::symbolic::FreqExpr::zero(),
        };
        let op = single_key_op(&r.operator, &spec.modes, &format!("{field}.operator"))?;
        let Some((key, c)) = op.terms().next().filter(|_| op.len() == 1) else {
            return Err(TcgError::validation(format!("{field}.operator"), "ramp operator must be a single monomial"));
        };
        spec.ramps.push(RampSpec {
            coupling: &coupling * c,
            duration: r.duration.clone(),
            op: OperatorSum::from_key(key.clone(), ScalarExpr::one()),
            freq,
            regulator,
        });
    }
    spec.check_references()?;
    if doc.auto_complete {
        spec.complete_conjugates();
    }
    spec.check_hermiticity()?;
    Ok(spec)
}

pub fn load_model_str(text: &str) -> Result<ModelSpec> {
    let doc: ModelDocument =
        serde_json::from_str(text).map_err(|e| TcgError::validation("document", e.to_string()))?;
    document_to_model(&doc)
}

pub fn load_model(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| TcgError::Io(format!("{}: {e}", path.display())))?;
    load_model_str(&text)
}

fn fmt_value(v: Complex64) -> NumOrStr {
    if v.im == 0.0 {
        NumOrStr::Num(v.re)
    } else if v.im < 0.0 {
        NumOrStr::Str(format!("{:e} - {:e}*i", v.re, -v.im))
    } else {
        NumOrStr::Str(format!("{:e} + {:e}*i", v.re, v.im))
    }
}

/// Document form of a ModelSpec; loading it back yields an equal spec.
pub fn model_to_document(spec: &ModelSpec) -> ModelDocument {
    let table = &spec.modes;
    let modes = table
        .modes
        .iter()
        .map(|m| ModeDoc {
            name: m.name.clone(),
            kind: m.kind,
            truncation: (m.kind == ModeKind::Bosonic).then_some(m.truncation),
        })
        .collect();
    let symbols = spec
        .symbols
        .iter()
        .map(|s| SymbolDoc {
            name: s.name.clone(),
            kind: Some(kind_name(s.kind).to_string()),
            value: s.value.map(fmt_value),
            unit: None,
        })
        .collect();
    let filter = Some(FilterDoc {
        kind: match spec.filter.kind {
            FilterKind::Gaussian => "gaussian".into(),
            FilterKind::CustomTable { .. } => "custom-table".into(),
        },
        tau: match spec.filter.tau {
            Tau::Symbolic => None,
            Tau::Numeric(t) => Some(NumOrStr::Num(t)),
        },
        points: match &spec.filter.kind {
            FilterKind::CustomTable { points } => Some(points.clone()),
            FilterKind::Gaussian => None,
        },
    });
    let mut terms = Vec::new();
    for t in &spec.terms {
        for (k, c) in t.op.terms() {
            terms.push(TermDoc {
                coupling: NumOrStr::Str((&t.coeff * c).to_string()),
                frequency: NumOrStr::Str(t.freq.to_string()),
                operator: k.render(table),
            });
        }
    }
    let ramps = spec
        .ramps
        .iter()
        .flat_map(|r| {
            r.op.terms()
                .map(|(k, c)| RampDoc {
                    coupling: NumOrStr::Str((&r.coupling * c).to_string()),
                    duration: r.duration.clone(),
                    operator: k.render(table),
                    frequency: Some(NumOrStr::Str(r.freq.to_string())),
                    regulator: Some(r.regulator.clone()),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let degree_cap = (table.degree_cap != crate::operators::DEFAULT_DEGREE_CAP).then_some(table.degree_cap);
    ModelDocument {
        modes,
        symbols,
        filter,
        terms,
        ramps,
        auto_complete: false,
        degree_cap,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Text,
}

#[derive(Serialize, Deserialize)]
struct HamDoc {
    coeff: String,
    frequency: String,
    operator: String,
}

#[derive(Serialize, Deserialize)]
struct DisDoc {
    rate: String,
    #[serde(rename = "L")]
    l: String,
    #[serde(rename = "J")]
    j: String,
    frequency: String,
}

#[derive(Serialize, Deserialize)]
struct EffectiveDoc {
    order: usize,
    hamiltonian: Vec<HamDoc>,
    dissipators: Vec<DisDoc>,
    model: ModelDocument,
    #[serde(default)]
    pruned: Vec<PrunedTerm>,
}

pub fn export_model(eff: &EffectiveModel, format: ExportFormat) -> String {
    let table = eff.modes();
    match format {
        ExportFormat::Json => {
            let doc = EffectiveDoc {
                order: eff.order,
                hamiltonian: eff
                    .hamiltonian
                    .iter()
                    .map(|t| HamDoc {
                        coeff: t.coeff.to_string(),
                        frequency: t.freq.to_string(),
                        operator: t.op.render(table),
                    })
                    .collect(),
                dissipators: eff
                    .dissipators
                    .iter()
                    .map(|t| DisDoc {
                        rate: t.rate.to_string(),
                        l: t.l.render(table),
                        j: t.j.render(table),
                        frequency: t.freq.to_string(),
                    })
                    .collect(),
                model: model_to_document(&eff.source),
                pruned: eff.pruned.clone(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
            s.push('\n');
            s
        }
        ExportFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "# order {}", eff.order);
            let _ = writeln!(s, "# hamiltonian: coefficient | operator | frequency");
            for t in &eff.hamiltonian {
                let _ = writeln!(s, "{} | {} | {}", t.coeff, t.op.render(table), t.freq);
            }
            let _ = writeln!(s, "# dissipators: rate | L | J | frequency");
            for t in &eff.dissipators {
                let _ = writeln!(s, "{} | {} | {} | {}", t.rate, t.l.render(table), t.j.render(table), t.freq);
            }
            if !eff.pruned.is_empty() {
                let _ = writeln!(s, "# pruned: {} terms", eff.pruned.len());
            }
            s
        }
    }
}

/// Reads back a json export.
pub fn import_effective(text: &str) -> Result<EffectiveModel> {
    let doc: EffectiveDoc = serde_json::from_str(text).map_err(|e| TcgError::validation("document", e.to_string()))?;
    let source = document_to_model(&doc.model)?;
    let table = &source.modes;
    let mut hamiltonian = Vec::with_capacity(doc.hamiltonian.len());
    for (k, h) in doc.hamiltonian.iter().enumerate() {
        hamiltonian.push(HamiltonianTerm {
            coeff: source
                .parse_coupling(&h.coeff)
                .map_err(|e| TcgError::validation(format!("hamiltonian[{k}].coeff"), e.to_string()))?,
            freq: parse_freq(&h.frequency)?,
            op: parse_key(&h.operator, table)?,
        });
    }
    let mut dissipators = Vec::with_capacity(doc.dissipators.len());
    for (k, d) in doc.dissipators.iter().enumerate() {
        dissipators.push(DissipatorTerm {
            rate: source
                .parse_coupling(&d.rate)
                .map_err(|e| TcgError::validation(format!("dissipators[{k}].rate"), e.to_string()))?,
            freq: parse_freq(&d.frequency)?,
            l: parse_key(&d.l, table)?,
            j: parse_key(&d.j, table)?,
        });
    }
    Ok(EffectiveModel {
        order: doc.order,
        hamiltonian,
        dissipators,
        source,
        pruned: doc.pruned,
    })
}
