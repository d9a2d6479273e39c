//! Density matrices and the initial-state mini-grammar.

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{Result, TcgError};
use crate::operators::matrix::{check_dim, dagger, CMatrix, DEFAULT_DIM_CAP};
use crate::operators::{ModeKind, ModeTable};
use crate::symbolic::parse_quantity;

pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Checked construction: Hermitian and unit trace within 1e-10.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(TcgError::Shape(format!("density matrix must be square, got {:?}", m.dim())));
        }
        let rho = DensityMatrix(m);
        let herm = rho.hermiticity_error();
        if herm > STATE_TOL {
            return Err(TcgError::validation("rho", format!("not Hermitian (max |rho - rho^dag| = {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(TcgError::validation("rho", format!("trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    /// Unchecked wrapper for integrator output, whose drift is monitored separately.
    pub(crate) fn raw(m: CMatrix) -> Self {
        DensityMatrix(m)
    }

    pub fn pure(psi: &Array1<Complex64>) -> Result<Self> {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if n == 0.0 {
            return Err(TcgError::validation("initial", "zero state vector"));
        }
        let d = psi.len();
        let m = CMatrix::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj() / n);
        DensityMatrix::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - &dagger(&self.0)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Tr(O rho).
    pub fn expectation(&self, o: &CMatrix) -> Result<Complex64> {
        if o.dim() != self.0.dim() {
            return Err(TcgError::Shape(format!(
                "observable is {:?} but the state is {:?}",
                o.dim(),
                self.0.dim()
            )));
        }
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += o[(i, k)] * self.0[(k, i)];
            }
        }
        Ok(acc)
    }
}

fn split_factors(spec: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in spec.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(TcgError::parse(spec, i, "unbalanced `)`"));
                }
            }
            '*' if depth == 0 => {
                out.push(spec[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(TcgError::parse(spec, spec.len(), "unbalanced `(`"));
    }
    out.push(spec[start..].trim());
    Ok(out)
}

fn call<'a>(f: &'a str, name: &str) -> Option<&'a str> {
    f.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')').map(str::trim)
}

/// Truncated coherent state, renormalized on the kept levels.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Array1<Complex64> {
    let mut v = Array1::zeros(dim);
    let mut amp = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        v[n] = amp;
        amp = amp * alpha / ((n + 1) as f64).sqrt();
    }
    let norm: f64 = v.iter().map(|z: &Complex64| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / norm)
}

fn factor_state(f: &str, spec: &str, mode: &crate::operators::ModeSpec) -> Result<Array1<Complex64>> {
    let d = mode.dim();
    let bad = |msg: String| TcgError::validation("initial", msg);
    match mode.kind {
        ModeKind::TwoLevel => {
            let mut v = Array1::zeros(2);
            match f {
                "g" => v[0] = Complex64::new(1.0, 0.0),
                "e" => v[1] = Complex64::new(1.0, 0.0),
                _ => return Err(bad(format!("mode `{}` is two-level; expected g or e, got `{f}`", mode.name))),
            }
            Ok(v)
        }
        ModeKind::Bosonic => {
            if let Some(arg) = call(f, "fock") {
                let n: usize = arg
                    .parse()
                    .map_err(|_| TcgError::parse(spec, 0, format!("fock level `{arg}` is not a non-negative integer")))?;
                if n >= d {
                    return Err(bad(format!("fock({n}) exceeds the truncation {d} of mode `{}`", mode.name)));
                }
                let mut v = Array1::zeros(d);
                v[n] = Complex64::new(1.0, 0.0);
                Ok(v)
            } else if let Some(arg) = call(f, "coherent") {
                Ok(coherent_amplitudes(parse_quantity(arg)?, d))
            } else {
                Err(bad(format!("mode `{}` is bosonic; expected fock(n) or coherent(alpha), got `{f}`", mode.name)))
            }
        }
    }
}

/// Parses e.g. `coherent(2)*e` or `fock(1)*coherent(-0.48i)`; one factor per mode, in table order.
pub fn parse_initial_state(spec: &str, table: &ModeTable) -> Result<DensityMatrix> {
    check_dim(table, DEFAULT_DIM_CAP)?;
    let factors = split_factors(spec)?;
    if factors.len() != table.len() {
        return Err(TcgError::validation(
            "initial",
            format!("{} factors given for {} modes", factors.len(), table.len()),
        ));
    }
    let mut psi = Array1::from_elem(1, Complex64::new(1.0, 0.0));
    for (f, mode) in factors.iter().zip(&table.modes) {
        let v = factor_state(f, spec, mode)?;
        psi = Array1::from_shape_fn(psi.len() * v.len(), |i| psi[i / v.len()] * v[i % v.len()]);
    }
    DensityMatrix::pure(&psi)
}
