mod common;

use common::*;
use tcg_core::model::{DeriveOptions, DissipatorConvention};

#[test]
fn partial_liouvillian_preserves_trace() {
    let (defect, _, _) = liouvillian_sweep(20, 11);
    assert!(defect <= 1e-10, "trace defect {defect:e}");
}

#[test]
fn assembled_generator_reproduces_raw_contractions() {
    let (_, mismatch, hermitian) = liouvillian_sweep(20, 12);
    for (n, c) in [DissipatorConvention::Plain, DissipatorConvention::Reversed].iter().enumerate() {
        println!(
            "convention {:>8}: max |assembled - raw| = {:.3e}, hermiticity closed: {}",
            convention_name(*c),
            mismatch[n],
            hermitian[n]
        );
    }
    let shipped = DeriveOptions::default().convention;
    let n = if shipped == DissipatorConvention::Plain { 0 } else { 1 };
    assert!(mismatch[n] <= 1e-10, "shipped convention mismatch {:e}", mismatch[n]);
    assert!(hermitian[n]);
}
