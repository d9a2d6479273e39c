use serde::{Deserialize, Serialize};

use crate::error::{Result, TcgError};

use super::freq::FreqExpr;
use super::scalar::ScalarExpr;

/// Shape of the low-pass window in frequency space.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FilterKind {
    #[default]
    Gaussian,
    /// Samples of f(x) against the dimensionless product x = |w| tau, ascending in x.
    CustomTable { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tau {
    Symbolic,
    Numeric(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub tau: Tau,
}

impl FilterSpec {
    pub fn gaussian() -> Self {
        FilterSpec {
            kind: FilterKind::Gaussian,
            tau: Tau::Symbolic,
        }
    }

    pub fn gaussian_numeric(tau: f64) -> Self {
        FilterSpec {
            kind: FilterKind::Gaussian,
            tau: Tau::Numeric(tau),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Tau::Numeric(t) = self.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(TcgError::validation("filter.tau", "tau must be a non-negative real"));
            }
        }
        if let FilterKind::CustomTable { points } = &self.kind {
            if points.len() < 2 {
                return Err(TcgError::validation("filter.points", "table needs at least two samples"));
            }
            if points[0].0 != 0.0 || points[0].1 != 1.0 {
                return Err(TcgError::validation("filter.points", "table must start at (0, 1)"));
            }
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(TcgError::validation("filter.points", "abscissae must increase"));
            }
        }
        Ok(())
    }

    pub fn supports_regularization(&self) -> bool {
        matches!(self.kind, FilterKind::Gaussian)
    }

    /// Symbolic filter factor for a frequency expression.
    pub fn symbolic(&self, w: &FreqExpr) -> ScalarExpr {
        ScalarExpr::filter(w)
    }

    pub fn numeric(&self, w: f64, tau: f64) -> Result<f64> {
        self.kind.eval(w, tau)
    }
}

impl FilterKind {
    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Gaussian => "gaussian",
            FilterKind::CustomTable { .. } => "custom-table",
        }
    }

    pub fn eval(&self, w: f64, tau: f64) -> Result<f64> {
        match self {
            FilterKind::Gaussian => Ok((-0.5 * w * w * tau * tau).exp()),
            FilterKind::CustomTable { points } => {
                let x = (w * tau).abs();
                if x == 0.0 {
                    return Ok(1.0);
                }
                let last = points.last().map(|p| p.0).unwrap_or(0.0);
                if x > last {
                    return Err(TcgError::FilterRange(w.abs()));
                }
                let k = points.partition_point(|p| p.0 < x).max(1);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_values() {
        let k = FilterKind::Gaussian;
        assert_eq!(k.eval(0.0, 3.0).unwrap(), 1.0);
        let v = k.eval(2.0 * PI * 4e9, 0.2e-9).unwrap();
        let expect = (-(2.0 * PI * 4e9 * 0.2e-9_f64).powi(2) / 2.0).exp();
        assert!((v - expect).abs() <= 1e-12 * expect);
        assert!(v > 3.2e-6 && v < 3.3e-6);
    }

    #[test]
    fn table_range() {
        let k = FilterKind::CustomTable {
            points: vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.1)],
        };
        assert_eq!(k.eval(0.0, 1.0).unwrap(), 1.0);
        assert!((k.eval(-0.5, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(k.eval(3.0, 1.0), Err(TcgError::FilterRange(_))));
    }
}
