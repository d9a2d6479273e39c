//! Dense realization on the truncated Hilbert space.
//!
//! Basis order: modes in declaration order (first mode most significant),
//! bosonic levels ascending, two-level states (g, e).

use ndarray::Array2;
use num_complex::Complex64;

use super::{Factor, ModeTable, OpKey, OperatorSum};
use crate::error::{Result, TcgError};
use crate::symbolic::Assignment;

pub type CMatrix = Array2<Complex64>;

pub const DEFAULT_DIM_CAP: usize = 4096;

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMatrix::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let x = a[(i, j)];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

fn sqrt_falling(n: usize, k: usize) -> f64 {
    // sqrt(n!/(n-k)!)
    ((n - k + 1)..=n).map(|m| m as f64).product::<f64>().sqrt()
}

/// Matrix of a single canonical factor on a mode of dimension `dim`.
pub fn factor_matrix(f: Factor, dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros((dim, dim));
    match f {
        Factor::Boson { cr, an } => {
            let (p, q) = (cr as usize, an as usize);
            for n in q..dim {
                let mid = n - q;
                let top = mid + p;
                if top >= dim {
                    continue;
                }
                let v = if p == q {
                    ((mid + 1)..=n).map(|m| m as f64).product::<f64>()
                } else {
                    sqrt_falling(n, q) * sqrt_falling(top, p)
                };
                m[(top, n)] = Complex64::new(v, 0.0);
            }
        }
        Factor::Tls(None) => {
            for k in 0..dim {
                m[(k, k)] = Complex64::new(1.0, 0.0);
            }
        }
        Factor::Tls(Some((i, j))) => m[(i as usize, j as usize)] = Complex64::new(1.0, 0.0),
    }
    m
}

pub fn key_matrix(k: &OpKey, table: &ModeTable) -> Result<CMatrix> {
    if k.0.len() != table.len() {
        return Err(TcgError::Shape("operator does not match the mode table".into()));
    }
    let mut acc = CMatrix::from_elem((1, 1), Complex64::new(1.0, 0.0));
    for (f, m) in k.0.iter().zip(&table.modes) {
        acc = kron(&acc, &factor_matrix(*f, m.dim()));
    }
    Ok(acc)
}

pub fn check_dim(table: &ModeTable, cap: usize) -> Result<usize> {
    let mut d: usize = 1;
    for m in &table.modes {
        d = d
            .checked_mul(m.dim())
            .filter(|&d| d <= cap)
            .ok_or_else(|| TcgError::Resource(format!("Hilbert-space dimension exceeds the cap of {cap}")))?;
    }
    Ok(d)
}

pub fn matrix_realization(x: &OperatorSum, table: &ModeTable, assign: &Assignment) -> Result<CMatrix> {
    matrix_realization_capped(x, table, assign, DEFAULT_DIM_CAP)
}

pub fn matrix_realization_capped(x: &OperatorSum, table: &ModeTable, assign: &Assignment, cap: usize) -> Result<CMatrix> {
    let d = check_dim(table, cap)?;
    let mut out = CMatrix::zeros((d, d));
    for (k, c) in x.terms() {
        let v = c.eval(assign)?;
        out.scaled_add(v, &key_matrix(k, table)?);
    }
    Ok(out)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}
