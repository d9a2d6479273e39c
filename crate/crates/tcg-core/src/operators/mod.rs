//! Bosonic and two-level operator algebra in canonical (normal-ordered) form.

pub mod matrix;
mod parse;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TcgError};
use crate::symbolic::{ScalarExpr, CQ};

pub use parse::{parse_key, parse_operator};

pub const DEFAULT_DEGREE_CAP: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Bosonic,
    #[serde(alias = "tls", alias = "two_level", alias = "qubit")]
    TwoLevel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSpec {
    pub name: String,
    pub kind: ModeKind,
    /// Retained levels; always 2 for a two-level mode.
    pub truncation: usize,
}

impl ModeSpec {
    pub fn bosonic(name: &str, truncation: usize) -> Self {
        ModeSpec {
            name: name.to_string(),
            kind: ModeKind::Bosonic,
            truncation,
        }
    }

    pub fn two_level(name: &str) -> Self {
        ModeSpec {
            name: name.to_string(),
            kind: ModeKind::TwoLevel,
            truncation: 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModeKind::Bosonic => self.truncation,
            ModeKind::TwoLevel => 2,
        }
    }
}

/// Mode list plus the ladder-degree cap applied during multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTable {
    pub modes: Vec<ModeSpec>,
    pub degree_cap: u32,
}

const TLS_WORDS: [&str; 4] = ["sz", "sp", "sm", "t"];

impl ModeTable {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        for (k, m) in modes.iter().enumerate() {
            if m.name.is_empty() || !m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(TcgError::validation(format!("modes[{k}].name"), "not an identifier"));
            }
            if modes[..k].iter().any(|o| o.name == m.name) {
                return Err(TcgError::validation(format!("modes[{k}].name"), "duplicate mode name"));
            }
            if TLS_WORDS.contains(&m.name.as_str()) {
                return Err(TcgError::validation(format!("modes[{k}].name"), "reserved operator word"));
            }
            if m.kind == ModeKind::Bosonic && m.truncation < 2 {
                return Err(TcgError::validation(format!("modes[{k}].truncation"), "truncation must be >= 2"));
            }
        }
        Ok(ModeTable {
            modes,
            degree_cap: DEFAULT_DEGREE_CAP,
        })
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.modes.iter().map(|m| m.dim()).product()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.name == name)
    }

    fn two_level_indices(&self) -> Vec<usize> {
        (0..self.modes.len())
            .filter(|&k| self.modes[k].kind == ModeKind::TwoLevel)
            .collect()
    }

    pub fn identity_key(&self) -> OpKey {
        OpKey(
            self.modes
                .iter()
                .map(|m| match m.kind {
                    ModeKind::Bosonic => Factor::Boson { cr: 0, an: 0 },
                    ModeKind::TwoLevel => Factor::Tls(None),
                })
                .collect(),
        )
    }
}

/// Canonical single-mode factor. Two-level states are indexed g = 0, e = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Boson { cr: u32, an: u32 },
    Tls(Option<(u8, u8)>),
}

impl Factor {
    fn adjoint(self) -> Factor {
        match self {
            Factor::Boson { cr, an } => Factor::Boson { cr: an, an: cr },
            Factor::Tls(t) => Factor::Tls(t.map(|(i, j)| (j, i))),
        }
    }

    fn ladder_degree(self) -> u32 {
        match self {
            Factor::Boson { cr, an } => cr + an,
            Factor::Tls(_) => 0,
        }
    }
}

fn binom(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// a'^p a^q * a'^r a^s = sum_k C(q,k) C(r,k) k! a'^{p+r-k} a^{q+s-k}
fn mul_factor(x: Factor, y: Factor) -> Result<Vec<(Factor, i64)>> {
    match (x, y) {
        (Factor::Boson { cr: p, an: q }, Factor::Boson { cr: r, an: s }) => {
            let mut out = Vec::new();
            let mut fact = 1i64;
            for k in 0..=q.min(r) {
                if k > 0 {
                    fact *= k as i64;
                }
                let c = binom(q, k) * binom(r, k) * fact;
                out.push((
                    Factor::Boson {
                        cr: p + r - k,
                        an: q + s - k,
                    },
                    c,
                ));
            }
            Ok(out)
        }
        (Factor::Tls(None), t) | (t, Factor::Tls(None)) => Ok(vec![(t, 1)]),
        (Factor::Tls(Some((i, j))), Factor::Tls(Some((k, l)))) => {
            if j == k {
                Ok(vec![(Factor::Tls(Some((i, l))), 1)])
            } else {
                Ok(vec![])
            }
        }
        _ => Err(TcgError::Shape("bosonic and two-level factors on the same mode".into())),
    }
}

/// Canonical key: one factor per mode, in mode order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpKey(pub Vec<Factor>);

impl OpKey {
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|f| matches!(f, Factor::Boson { cr: 0, an: 0 } | Factor::Tls(None)))
    }

    pub fn adjoint(&self) -> OpKey {
        OpKey(self.0.iter().map(|f| f.adjoint()).collect())
    }

    pub fn ladder_degree(&self) -> u32 {
        self.0.iter().map(|f| f.ladder_degree()).sum()
    }

    /// Product of two canonical keys as a list of (key, integer weight).
    pub fn mul(&self, o: &OpKey, cap: u32) -> Result<Vec<(OpKey, i64)>> {
        if self.0.len() != o.0.len() {
            return Err(TcgError::Shape("operators built on different mode tables".into()));
        }
        let mut acc: Vec<(Vec<Factor>, i64)> = vec![(Vec::with_capacity(self.0.len()), 1)];
        for (x, y) in self.0.iter().zip(&o.0) {
            let opts = mul_factor(*x, *y)?;
            let mut next = Vec::with_capacity(acc.len() * opts.len());
            for (pre, c) in &acc {
                for (f, w) in &opts {
                    let mut v = pre.clone();
                    v.push(*f);
                    next.push((v, c * w));
                }
            }
            acc = next;
        }
        let mut out = Vec::with_capacity(acc.len());
        for (v, c) in acc {
            let k = OpKey(v);
            if k.ladder_degree() > cap {
                return Err(TcgError::Resource(format!(
                    "operator degree {} exceeds the cap of {cap}",
                    k.ladder_degree()
                )));
            }
            out.push((k, c));
        }
        Ok(out)
    }

    pub fn render(&self, table: &ModeTable) -> String {
        let qualify = table.two_level_indices().len() > 1;
        let mut parts = Vec::new();
        for (f, m) in self.0.iter().zip(&table.modes) {
            match *f {
                Factor::Boson { cr, an } => {
                    for (n, dag) in [(cr, "'"), (an, "")] {
                        match n {
                            0 => {}
                            1 => parts.push(format!("{}{dag}", m.name)),
                            _ => parts.push(format!("{}{dag}^{n}", m.name)),
                        }
                    }
                }
                Factor::Tls(None) => {}
                Factor::Tls(Some((i, j))) => {
                    let word = match (i, j) {
                        (1, 0) => "sp".to_string(),
                        (0, 1) => "sm".to_string(),
                        _ => format!("t({},{})", level_name(i), level_name(j)),
                    };
                    if qualify {
                        parts.push(format!("{}.{word}", m.name));
                    } else {
                        parts.push(word);
                    }
                }
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

fn level_name(i: u8) -> char {
    if i == 0 {
        'g'
    } else {
        'e'
    }
}

/// Sum of canonical terms with symbolic coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorSum {
    terms: BTreeMap<OpKey, ScalarExpr>,
}

impl OperatorSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(table: &ModeTable) -> Self {
        Self::from_key(table.identity_key(), ScalarExpr::one())
    }

    pub fn from_key(k: OpKey, c: ScalarExpr) -> Self {
        let mut s = Self::zero();
        s.add_term(k, c);
        s
    }

    pub fn add_term(&mut self, k: OpKey, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                v.add_assign(&c);
                if v.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn add_assign(&mut self, o: &OperatorSum) {
        for (k, c) in &o.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpKey, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &ScalarExpr) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn scale_const(&self, c: &CQ) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.scale(c));
        }
        out
    }

    pub fn single_key(&self) -> Option<&OpKey> {
        match self.terms.len() {
            1 => self.terms.keys().next(),
            _ => None,
        }
    }

    pub fn render(&self, table: &ModeTable) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                s.push_str(" + ");
            }
            if c == &ScalarExpr::one() {
                s.push_str(&k.render(table));
            } else {
                let _ = write!(s, "({c})*{}", k.render(table));
            }
        }
        s
    }
}

/// Distributed product with normal ordering and two-level reduction.
pub fn multiply_canonicalize(x: &OperatorSum, y: &OperatorSum, table: &ModeTable) -> Result<OperatorSum> {
    let mut out = OperatorSum::zero();
    for (kx, cx) in &x.terms {
        if kx.0.len() != table.len() {
            return Err(TcgError::Shape("operator does not match the mode table".into()));
        }
        for (ky, cy) in &y.terms {
            let c = cx * cy;
            for (k, w) in kx.mul(ky, table.degree_cap)? {
                out.add_term(k, c.scale(&CQ::int(w)));
            }
        }
    }
    Ok(out)
}

pub fn adjoint(x: &OperatorSum) -> OperatorSum {
    let mut out = OperatorSum::zero();
    for (k, c) in &x.terms {
        out.add_term(k.adjoint(), c.conj());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ModeTable {
        ModeTable::new(vec![ModeSpec::bosonic("a", 6), ModeSpec::two_level("q")]).unwrap()
    }

    #[test]
    fn commutator_and_tls_algebra() {
        let t = table();
        let x = parse_operator("a*sp", &t).unwrap();
        let y = parse_operator("a'*sm", &t).unwrap();
        let p = multiply_canonicalize(&x, &y, &t).unwrap();
        let expect = parse_operator("a'*a*t(e,e)", &t).unwrap();
        let mut expect = expect;
        expect.add_assign(&parse_operator("t(e,e)", &t).unwrap());
        assert_eq!(p, expect);
        let id = OperatorSum::identity(&t);
        assert_eq!(multiply_canonicalize(&id, &x, &t).unwrap(), x);
    }

    #[test]
    fn adjoints() {
        let t = table();
        let x = parse_operator("a*sm", &t).unwrap();
        assert_eq!(adjoint(&x), parse_operator("a'*sp", &t).unwrap());
        let z = parse_operator("sz", &t).unwrap();
        assert_eq!(adjoint(&z), z);
        let ia2 = parse_operator("a^2", &t).unwrap().scale(&ScalarExpr::i());
        let expect = parse_operator("a'^2", &t).unwrap().scale(&(-&ScalarExpr::i()));
        assert_eq!(adjoint(&ia2), expect);
    }

    #[test]
    fn degree_cap() {
        let t = ModeTable::new(vec![ModeSpec::bosonic("a", 4)]).unwrap().with_degree_cap(4);
        let x = parse_operator("a'^2*a", &t).unwrap();
        let y = parse_operator("a^2", &t).unwrap();
        assert!(matches!(multiply_canonicalize(&x, &y, &t), Err(TcgError::Resource(_))));
    }
}
