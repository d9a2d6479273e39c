//! Order-by-order assembly of the effective Hamiltonian and pseudo-dissipators.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{product, DissipatorTerm, EffectiveModel, HamiltonianTerm, ModelSpec, RampLimit, TermSpec};
use crate::contraction::{Contractor, FrequencyTuple};
use crate::error::{Result, TcgError};
use crate::operators::{ModeTable, OpKey, OperatorSum};
use crate::symbolic::{freq, FreqExpr, ScalarExpr, Tau, CQ};

/// Which argument order the mirrored coefficient in the dissipator rate uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DissipatorConvention {
    /// C_{r,l}(-nu, -mu); the only choice that reproduces the raw contraction sum.
    #[default]
    Plain,
    /// C_{r,l}(-nu^rev, -mu^rev); kept for comparison only.
    Reversed,
}

#[derive(Clone, Debug, Default)]
pub struct DeriveOptions {
    pub convention: DissipatorConvention,
}

/// Sums the input terms per frequency into operator sums carrying their couplings.
pub fn grouped_drive(terms: &[TermSpec], table: &ModeTable) -> Result<Vec<(FreqExpr, OperatorSum)>> {
    let mut m: BTreeMap<FreqExpr, OperatorSum> = BTreeMap::new();
    for t in terms {
        for (k, _) in t.op.terms() {
            if k.0.len() != table.len() {
                return Err(TcgError::Shape("operator does not match the mode table".into()));
            }
        }
        m.entry(t.freq.clone()).or_default().add_assign(&t.op.scale(&t.coeff));
    }
    Ok(m.into_iter().filter(|(_, o)| !o.is_empty()).collect())
}

fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * n);
        for p in &out {
            for i in 0..n {
                let mut q = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn rev_neg(v: &[FreqExpr]) -> Vec<FreqExpr> {
    v.iter().rev().map(|w| -w).collect()
}

fn neg(v: &[FreqExpr]) -> Vec<FreqExpr> {
    v.iter().map(|w| -w).collect()
}

struct Setup {
    drive: Vec<(FreqExpr, OperatorSum)>,
    contractor: Contractor,
    limit: Option<RampLimit>,
    zero_tau: bool,
}

fn setup(model: &ModelSpec, k: usize) -> Result<Setup> {
    if k == 0 {
        return Err(TcgError::InvalidWeight {
            l: 0,
            r: 0,
            msg: "order must be at least 1".into(),
        });
    }
    model.filter.validate()?;
    let drive = grouped_drive(&model.expanded_terms()?, &model.modes)?;
    let regs: Vec<String> = model.regulators().into_iter().collect();
    let limit = (!regs.is_empty()).then(|| RampLimit {
        regulators: regs,
        kinds: model.symbols.iter().map(|s| (s.name.clone(), s.kind)).collect(),
    });
    Ok(Setup {
        drive,
        contractor: Contractor::new(model.filter.clone()),
        limit,
        zero_tau: model.filter.tau == Tau::Numeric(0.0),
    })
}

fn finish<K: Ord + Clone>(s: &Setup, m: BTreeMap<(K, FreqExpr), ScalarExpr>) -> Result<Vec<(K, FreqExpr, ScalarExpr)>> {
    let mut v: Vec<(K, FreqExpr, ScalarExpr)> = m
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((k, w), c)| (k, w, c))
        .collect();
    if let Some(l) = &s.limit {
        v = l.apply(v)?;
    }
    if s.zero_tau {
        v = v
            .into_iter()
            .map(|(k, w, c)| Ok((k, w, c.at_zero_tau()?)))
            .collect::<Result<Vec<_>>>()?;
        v.retain(|(_, _, c)| !c.is_zero());
    }
    Ok(v)
}

fn merge<K: Ord>(parts: Vec<Vec<(K, FreqExpr, ScalarExpr)>>) -> BTreeMap<(K, FreqExpr), ScalarExpr> {
    let mut m: BTreeMap<(K, FreqExpr), ScalarExpr> = BTreeMap::new();
    for part in parts {
        for (k, w, c) in part {
            m.entry((k, w)).or_default().add_assign(&c);
        }
    }
    m
}

fn hamiltonian_entries(s: &Setup, table: &ModeTable, k: usize) -> Result<BTreeMap<(OpKey, FreqExpr), ScalarExpr>> {
    let n = s.drive.len();
    let mut parts = Vec::new();
    for kk in 1..=k {
        let chunk: Vec<Vec<(OpKey, FreqExpr, ScalarExpr)>> = tuples(n, kk)
            .into_par_iter()
            .map(|idx| -> Result<Vec<(OpKey, FreqExpr, ScalarExpr)>> {
                let mu: Vec<FreqExpr> = idx.iter().map(|&i| s.drive[i].0.clone()).collect();
                let c1 = s.contractor.get(&FrequencyTuple::new(mu.clone(), vec![]))?.value;
                let c2 = s.contractor.get(&FrequencyTuple::new(rev_neg(&mu), vec![]))?.value;
                let q = (&c1 + &c2).scale(&CQ::ratio(1, 2));
                if q.is_zero() {
                    return Ok(vec![]);
                }
                let ops: Vec<&OperatorSum> = idx.iter().map(|&i| &s.drive[i].1).collect();
                let p = product(&ops, table)?;
                let w = freq::sum(&mu);
                // c-number terms drop out of the commutator
                Ok(p.terms()
                    .filter(|(key, _)| !key.is_identity())
                    .map(|(key, c)| (key.clone(), w.clone(), &q * c))
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        parts.extend(chunk);
    }
    Ok(merge(parts))
}

type Pair = (OpKey, OpKey);

fn dissipator_entries(
    s: &Setup,
    table: &ModeTable,
    k: usize,
    conv: DissipatorConvention,
) -> Result<BTreeMap<(Pair, FreqExpr), ScalarExpr>> {
    let n = s.drive.len();
    let mut parts = Vec::new();
    for kk in 2..=k {
        for l in 1..kk {
            let chunk: Vec<Vec<(Pair, FreqExpr, ScalarExpr)>> = tuples(n, kk)
                .into_par_iter()
                .map(|idx| -> Result<Vec<(Pair, FreqExpr, ScalarExpr)>> {
                    let all: Vec<FreqExpr> = idx.iter().map(|&i| s.drive[i].0.clone()).collect();
                    let (mu, nu) = all.split_at(l);
                    let direct = s.contractor.get(&FrequencyTuple::new(mu.to_vec(), nu.to_vec()))?.value;
                    let mirrored = match conv {
                        DissipatorConvention::Reversed => FrequencyTuple::new(rev_neg(nu), rev_neg(mu)),
                        DissipatorConvention::Plain => FrequencyTuple::new(neg(nu), neg(mu)),
                    };
                    let other = s.contractor.get(&mirrored)?.value;
                    // gamma = -i (C - C')
                    let gamma = (&direct - &other).scale(&-&CQ::i());
                    if gamma.is_zero() {
                        return Ok(vec![]);
                    }
                    let lops: Vec<&OperatorSum> = idx[..l].iter().map(|&i| &s.drive[i].1).collect();
                    let jops: Vec<&OperatorSum> = idx[l..].iter().rev().map(|&i| &s.drive[i].1).collect();
                    let lp = product(&lops, table)?;
                    let jp = product(&jops, table)?;
                    let w = &freq::sum(mu) + &freq::sum(nu);
                    let mut out = Vec::with_capacity(lp.len() * jp.len());
                    for (kl, cl) in lp.terms() {
                        let gl = &gamma * cl;
                        for (kj, cj) in jp.terms() {
                            out.push(((kl.clone(), kj.clone()), w.clone(), &gl * cj));
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            parts.extend(chunk);
        }
    }
    Ok(merge(parts))
}

/// Effective Hamiltonian through order k, merged on (operator, frequency).
pub fn effective_hamiltonian(model: &ModelSpec, k: usize) -> Result<Vec<HamiltonianTerm>> {
    let s = setup(model, k)?;
    let m = hamiltonian_entries(&s, &model.modes, k)?;
    Ok(finish(&s, m)?
        .into_iter()
        .map(|(op, freq, coeff)| HamiltonianTerm { coeff, freq, op })
        .collect())
}

/// Pseudo-dissipators of orders 2..=k, merged on (L, J, frequency).
pub fn effective_dissipators(model: &ModelSpec, k: usize) -> Result<Vec<DissipatorTerm>> {
    effective_dissipators_with(model, k, DissipatorConvention::default())
}

fn effective_dissipators_with(model: &ModelSpec, k: usize, conv: DissipatorConvention) -> Result<Vec<DissipatorTerm>> {
    let s = setup(model, k)?;
    let m = dissipator_entries(&s, &model.modes, k, conv)?;
    Ok(finish(&s, m)?
        .into_iter()
        .map(|((l, j), freq, rate)| DissipatorTerm { rate, freq, l, j })
        .collect())
}

pub fn derive(model: &ModelSpec, k: usize, opts: &DeriveOptions) -> Result<EffectiveModel> {
    let s = setup(model, k)?;
    let h = finish(&s, hamiltonian_entries(&s, &model.modes, k)?)?;
    let d = finish(&s, dissipator_entries(&s, &model.modes, k, opts.convention)?)?;
    Ok(EffectiveModel {
        order: k,
        hamiltonian: h
            .into_iter()
            .map(|(op, freq, coeff)| HamiltonianTerm { coeff, freq, op })
            .collect(),
        dissipators: d
            .into_iter()
            .map(|((l, j), freq, rate)| DissipatorTerm { rate, freq, l, j })
            .collect(),
        source: model.clone(),
        pruned: Vec::new(),
    })
}

/// One term -i C_{l,r} A rho B of the unassembled Liouvillian; its adjoint is implied.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub coeff: ScalarExpr,
    pub freq: FreqExpr,
    pub a: OpKey,
    pub b: OpKey,
}

/// All contraction terms through order k before grouping into H and D.
/// The generator is L rho = sum coeff e^{-i freq t} A rho B + h.c.
pub fn raw_contraction_terms(model: &ModelSpec, k: usize) -> Result<Vec<RawTerm>> {
    let s = setup(model, k)?;
    if s.limit.is_some() {
        return Err(TcgError::validation("ramps", "raw terms are only available without ramps"));
    }
    let n = s.drive.len();
    let table = &model.modes;
    let mut m: BTreeMap<((OpKey, OpKey), FreqExpr), ScalarExpr> = BTreeMap::new();
    for kk in 1..=k {
        for l in 1..=kk {
            for idx in tuples(n, kk) {
                let all: Vec<FreqExpr> = idx.iter().map(|&i| s.drive[i].0.clone()).collect();
                let (mu, nu) = all.split_at(l);
                let c = s.contractor.get(&FrequencyTuple::new(mu.to_vec(), nu.to_vec()))?.value;
                let c = c.scale(&-&CQ::i());
                let aops: Vec<&OperatorSum> = idx[..l].iter().map(|&i| &s.drive[i].1).collect();
                let bops: Vec<&OperatorSum> = idx[l..].iter().rev().map(|&i| &s.drive[i].1).collect();
                let ap = product(&aops, table)?;
                let bp = product(&bops, table)?;
                let w = &freq::sum(mu) + &freq::sum(nu);
                for (ka, ca) in ap.terms() {
                    for (kb, cb) in bp.terms() {
                        m.entry(((ka.clone(), kb.clone()), w.clone()))
                            .or_default()
                            .add_assign(&(&(&c * ca) * cb));
                    }
                }
            }
        }
    }
    Ok(m.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(((a, b), freq), coeff)| RawTerm { coeff, freq, a, b })
        .collect())
}
