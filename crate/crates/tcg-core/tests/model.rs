use std::f64::consts::PI;

use tcg_core::model::presets::{duffing, parametron, preset, rabi, PRESETS};
use tcg_core::model::{
    derive, export_model, import_effective, load_model_str, prune_terms, DeriveOptions, EffectiveModel, ExportFormat,
    RampLimit,
};
use tcg_core::operators::{parse_key, OpKey};
use tcg_core::symbolic::{parse_scalar, FreqExpr, ScalarExpr, SymbolKind, Tau};
use tcg_core::TcgError;

fn kinds(name: &str) -> SymbolKind {
    match name {
        "wp" | "w" | "delta" => SymbolKind::Frequency,
        _ => SymbolKind::Real,
    }
}

fn expr(s: &str) -> ScalarExpr {
    parse_scalar(s, &kinds).unwrap()
}

fn key(eff: &EffectiveModel, s: &str) -> OpKey {
    parse_key(s, eff.modes()).unwrap()
}

fn zero() -> FreqExpr {
    FreqExpr::zero()
}

#[test]
fn presets_load_without_auto_complete() {
    for name in PRESETS {
        let m = preset(name).unwrap();
        m.check_hermiticity().unwrap();
        m.check_references().unwrap();
    }
    assert!(preset("nope").is_err());
}

#[test]
fn duffing_expansion_has_thirty_operator_frequency_pairs() {
    let m = duffing();
    // thirty from the quartic plus the detuning term
    assert_eq!(m.terms.len(), 31);
}

#[test]
fn duffing_third_order_ir_coefficients() {
    let mut m = duffing();
    m.substitute("Pi", "0").unwrap();
    m.substitute("dd", "0").unwrap();
    let eff = derive(&m, 3, &DeriveOptions::default()).unwrap().ir_limit();
    let c4 = eff.hamiltonian_coeff(&key(&eff, "a'^4*a^4"), &zero());
    let c3 = eff.hamiltonian_coeff(&key(&eff, "a'^3*a^3"), &zero());
    assert_eq!(c4.split_power("g4").get(&3).cloned().unwrap_or_default(), expr("60*w^-2"));
    assert_eq!(c3.split_power("g4").get(&3).cloned().unwrap_or_default(), expr("480*w^-2"));
    // lower orders of the same coefficient, rounded in the printed table to -14
    assert_eq!(c3.split_power("g4").get(&2).cloned().unwrap_or_default(), expr("-68/5*w^-1"));
}

#[test]
fn duffing_fourth_order_quintic_term() {
    let mut m = duffing();
    m.substitute("Pi", "0").unwrap();
    m.substitute("dd", "0").unwrap();
    let eff = derive(&m, 4, &DeriveOptions::default()).unwrap().ir_limit();
    let c5 = eff.hamiltonian_coeff(&key(&eff, "a'^5*a^5"), &zero());
    assert_eq!(c5, expr("-42756/125*g4^4*w^-3"));
}

#[test]
fn parametron_two_photon_absorption_rate() {
    let eff = derive(&parametron(), 2, &DeriveOptions::default()).unwrap().ir_limit();
    let want = expr("beta0/T*(2*tau^2 + 1/(2*wp^2))*beta0*t/T");
    assert_eq!(eff.dissipator_rate(&key(&eff, "a'^2"), &key(&eff, "a^2"), &zero()), want);
    assert_eq!(eff.dissipator_rate(&key(&eff, "a^2"), &key(&eff, "a'^2"), &zero()), want);
}

#[test]
fn parametron_ramp_recovers_rwa_schedule() {
    let eff = derive(&parametron(), 1, &DeriveOptions::default()).unwrap().ir_limit();
    assert_eq!(eff.hamiltonian_coeff(&key(&eff, "a'*a"), &zero()), expr("Delta0*(1 - t/T)"));
    assert_eq!(eff.hamiltonian_coeff(&key(&eff, "a'^2*a^2"), &zero()), expr("-chi/2"));
    assert_eq!(eff.hamiltonian_coeff(&key(&eff, "a'^2"), &zero()), expr("beta0*t/T"));
    assert_eq!(eff.hamiltonian_coeff(&key(&eff, "a^2"), &zero()), expr("beta0*t/T"));
}

#[test]
fn regulator_pole_is_reported() {
    let limit = RampLimit {
        regulators: vec!["delta".into()],
        kinds: [("delta".to_string(), SymbolKind::Frequency), ("g".to_string(), SymbolKind::Real)]
            .into_iter()
            .collect(),
    };
    let entries = vec![(0u8, FreqExpr::symbol("delta"), expr("g/delta"))];
    assert!(matches!(limit.apply(entries), Err(TcgError::DivergentLimit(_))));
}

#[test]
fn parametron_pruned_hamiltonian_operator_set() {
    let m = parametron();
    let eff = derive(&m, 2, &DeriveOptions::default()).unwrap();
    let kept = prune_terms(&eff, 2.0 * PI * 0.08e6, &m.assignment());
    let mut ops: Vec<String> = kept.hamiltonian.iter().map(|t| t.op.render(kept.modes())).collect();
    ops.sort();
    let mut want = vec!["a'*a", "a'^2*a^2", "a'^3*a^3", "a'^2", "a^2", "a'^3*a", "a'*a^3"];
    want.sort();
    assert_eq!(ops, want);
    assert!(kept.hamiltonian.iter().all(|t| t.freq.is_zero()));
    assert!(!kept.pruned.is_empty());
    kept.check_hermiticity().unwrap();
}

#[test]
fn prune_at_zero_threshold_is_identity() {
    let m = rabi();
    let eff = derive(&m, 2, &DeriveOptions::default()).unwrap();
    let kept = prune_terms(&eff, 0.0, &m.assignment());
    assert_eq!(kept, eff);
}

#[test]
fn rabi_counter_rotating_first_order_term_is_pruned() {
    let m = rabi();
    let eff = derive(&m, 1, &DeriveOptions::default()).unwrap();
    let g = m.assignment().real("g").unwrap();
    let kept = prune_terms(&eff, 1e-5 * g, &m.assignment());
    let ops: Vec<String> = kept.hamiltonian.iter().map(|t| t.op.render(kept.modes())).collect();
    assert_eq!(kept.hamiltonian.len(), 2, "{ops:?}");
    assert!(ops.contains(&"a*sp".to_string()) && ops.contains(&"a'*sm".to_string()));
    assert_eq!(kept.pruned.len(), 2);
}

#[test]
fn tau_zero_first_order_echoes_input() {
    let mut m = rabi();
    m.filter.tau = Tau::Numeric(0.0);
    let eff = derive(&m, 1, &DeriveOptions::default()).unwrap();
    assert_eq!(eff.hamiltonian.len(), m.terms.len());
    for t in &m.terms {
        let k = t.op.single_key().unwrap();
        assert_eq!(eff.hamiltonian_coeff(k, &t.freq), t.coeff);
    }
}

#[test]
fn symbolic_first_order_multiplies_by_filter() {
    let text = r#"{
        "modes": [{"name": "a", "kind": "bosonic", "truncation": 5}],
        "symbols": [{"name": "w", "kind": "frequency"}, {"name": "g", "kind": "real"}],
        "terms": [
            {"coupling": "g", "frequency": "w", "operator": "a"},
            {"coupling": "g", "frequency": "-w", "operator": "a'"}
        ]
    }"#;
    let m = load_model_str(text).unwrap();
    let eff = derive(&m, 1, &DeriveOptions::default()).unwrap();
    for t in &m.terms {
        let k = t.op.single_key().unwrap();
        let want = &t.coeff * &ScalarExpr::filter(&t.freq);
        assert_eq!(eff.hamiltonian_coeff(k, &t.freq), want);
    }
}

#[test]
fn order_zero_is_rejected() {
    assert!(derive(&rabi(), 0, &DeriveOptions::default()).is_err());
}

#[test]
fn empty_model_exports_empty_arrays() {
    let text = r#"{"modes": [{"name": "a", "kind": "bosonic", "truncation": 3}], "symbols": [], "terms": []}"#;
    let m = load_model_str(text).unwrap();
    let eff = derive(&m, 2, &DeriveOptions::default()).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&export_model(&eff, ExportFormat::Json)).unwrap();
    assert_eq!(doc["hamiltonian"], serde_json::json!([]));
    assert_eq!(doc["dissipators"], serde_json::json!([]));
    assert_eq!(doc["order"], 2);
}

#[test]
fn export_round_trip() {
    for eff in [
        derive(&rabi(), 2, &DeriveOptions::default()).unwrap(),
        derive(&parametron(), 2, &DeriveOptions::default()).unwrap(),
    ] {
        let text = export_model(&eff, ExportFormat::Json);
        let back = import_effective(&text).unwrap();
        assert_eq!(back, eff);
        assert_eq!(export_model(&back, ExportFormat::Json), text);
    }
}

#[test]
fn text_export_lists_triples() {
    let eff = derive(&rabi(), 1, &DeriveOptions::default()).unwrap();
    let text = export_model(&eff, ExportFormat::Text);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.split(" | ").count() == 3));
    assert!(rows.iter().any(|r| r.contains("| a*sp |")));
}

#[test]
fn substituting_a_frequency_merges_resonant_terms() {
    let mut m = rabi();
    m.substitute("wa", "wc").unwrap();
    let eff = derive(&m, 1, &DeriveOptions::default()).unwrap();
    assert_eq!(eff.hamiltonian_coeff(&key(&eff, "a*sp"), &zero()), expr("g/2"));
}
