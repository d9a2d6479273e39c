use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{EffectiveModel, ModelSpec};
use crate::symbolic::{Assignment, ScalarExpr, TIME};

/// Census entry for a term removed by pruning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunedTerm {
    pub kind: String,
    pub operator: String,
    pub frequency: String,
    pub magnitude: f64,
}

const RAMP_SAMPLES: usize = 65;

fn ramp_window(src: &ModelSpec, assign: &Assignment) -> f64 {
    src.ramps
        .iter()
        .filter_map(|r| assign.real(&r.duration))
        .fold(0.0, f64::max)
}

/// Peak |c| over the ramp window when c depends on t; unevaluable terms count as infinite.
fn peak(c: &ScalarExpr, assign: &Assignment, window: f64) -> f64 {
    let eval = |a: &Assignment| c.eval(a).map(|v| v.norm()).unwrap_or(f64::INFINITY);
    if !c.contains_symbol(TIME) {
        return eval(assign);
    }
    let mut a = assign.clone();
    let mut best: f64 = 0.0;
    for k in 0..RAMP_SAMPLES {
        let t = if window > 0.0 {
            window * k as f64 / (RAMP_SAMPLES - 1) as f64
        } else {
            0.0
        };
        a.set(TIME, t);
        best = best.max(eval(&a));
    }
    best
}

/// Drops terms whose peak magnitude is below `threshold`; conjugate partners are kept or dropped together.
pub fn prune_terms(eff: &EffectiveModel, threshold: f64, assign: &Assignment) -> EffectiveModel {
    let window = ramp_window(&eff.source, assign);
    let table = eff.modes();
    let mut out = eff.clone();
    out.hamiltonian.clear();
    out.dissipators.clear();

    let hmag: Vec<f64> = eff.hamiltonian.iter().map(|t| peak(&t.coeff, assign, window)).collect();
    let hidx: HashMap<_, usize> = eff
        .hamiltonian
        .iter()
        .enumerate()
        .map(|(i, t)| ((t.op.clone(), t.freq.clone()), i))
        .collect();
    for (i, t) in eff.hamiltonian.iter().enumerate() {
        let partner = hidx.get(&(t.op.adjoint(), -&t.freq)).map(|&j| hmag[j]).unwrap_or(0.0);
        let m = hmag[i].max(partner);
        if m < threshold {
            out.pruned.push(PrunedTerm {
                kind: "hamiltonian".into(),
                operator: t.op.render(table),
                frequency: t.freq.to_string(),
                magnitude: m,
            });
        } else {
            out.hamiltonian.push(t.clone());
        }
    }

    let dmag: Vec<f64> = eff.dissipators.iter().map(|t| peak(&t.rate, assign, window)).collect();
    let didx: HashMap<_, usize> = eff
        .dissipators
        .iter()
        .enumerate()
        .map(|(i, t)| ((t.l.clone(), t.j.clone(), t.freq.clone()), i))
        .collect();
    for (i, t) in eff.dissipators.iter().enumerate() {
        let partner = didx
            .get(&(t.j.adjoint(), t.l.adjoint(), -&t.freq))
            .map(|&j| dmag[j])
            .unwrap_or(0.0);
        let m = dmag[i].max(partner);
        if m < threshold {
            out.pruned.push(PrunedTerm {
                kind: "dissipator".into(),
                operator: format!("D[{}, {}]", t.l.render(table), t.j.render(table)),
                frequency: t.freq.to_string(),
                magnitude: m,
            });
        } else {
            out.dissipators.push(t.clone());
        }
    }
    out
}
