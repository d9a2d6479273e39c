//! Row-compressed operator used on the hot path of the integrator.

use num_complex::Complex64;

use crate::operators::matrix::CMatrix;

#[derive(Clone, Debug)]
pub(crate) struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v.re != 0.0 || v.im != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        SparseOp { dim, rows }
    }

    /// out += c * S x
    pub fn left_acc(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        for (i, row) in self.rows.iter().enumerate() {
            let dst = &mut out[i * d..(i + 1) * d];
            for &(k, v) in row {
                let cv = c * v;
                let src = &x[k * d..(k + 1) * d];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += cv * s;
                }
            }
        }
    }

    /// out += c * x S
    pub fn right_acc(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        for r in 0..d {
            let src = &x[r * d..(r + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (i, row) in self.rows.iter().enumerate() {
                let xi = src[i];
                if xi.re == 0.0 && xi.im == 0.0 {
                    continue;
                }
                let cx = c * xi;
                for &(j, v) in row {
                    dst[j] += cx * v;
                }
            }
        }
    }
}
