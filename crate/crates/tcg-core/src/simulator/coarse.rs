//! Gaussian moving average, observables and series metrics.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrate::Trajectory;
use super::state::DensityMatrix;
use crate::error::{Result, TcgError};
use crate::operators::matrix::{matrix_realization, CMatrix};
use crate::operators::{parse_operator, ModeTable, OperatorSum};
use crate::symbolic::{Assignment, FilterKind, FilterSpec, Tau};

/// Kernel half-width in units of tau.
pub const KERNEL_CUTOFF: f64 = 5.0;

/// Uniformly sampled series value(t0 + i dt).
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T = f64> {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<T>,
}

impl<T: Copy> Series<T> {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time(i)).collect()
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Series<U> {
        Series {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Points with t in [ta, tb].
    pub fn restrict(&self, ta: f64, tb: f64) -> Result<Series<T>> {
        let (a, b) = window_indices(self.t0, self.dt, self.values.len(), ta, tb)
            .ok_or_else(|| TcgError::validation("window", format!("[{ta:e}, {tb:e}] is not covered by the series")))?;
        Ok(Series {
            t0: self.time(a),
            dt: self.dt,
            values: self.values[a..=b].to_vec(),
        })
    }
}

impl Series<Complex64> {
    pub fn re(&self) -> Series<f64> {
        self.map(|z| z.re)
    }
}

fn window_indices(t0: f64, dt: f64, n: usize, ta: f64, tb: f64) -> Option<(usize, usize)> {
    let a = ((ta - t0) / dt - 1e-6).ceil();
    let b = ((tb - t0) / dt + 1e-6).floor();
    (a >= 0.0 && b < n as f64 && a <= b).then_some((a as usize, b as usize))
}

/// Sampled Gaussian exp(-t^2/(2 tau^2)) on |t| <= 5 tau, normalized to unit sum.
pub fn gaussian_kernel(tau: f64, dt: f64) -> Vec<f64> {
    if tau == 0.0 {
        return vec![1.0];
    }
    let m = (KERNEL_CUTOFF * tau / dt + 1e-9).floor() as i64;
    let w: Vec<f64> = (-m..=m)
        .map(|k| {
            let t = k as f64 * dt;
            (-t * t / (2.0 * tau * tau)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn numeric_tau(filter: &FilterSpec) -> Result<f64> {
    if !matches!(filter.kind, FilterKind::Gaussian) {
        return Err(TcgError::UnsupportedFilter(filter.kind.name().into()));
    }
    match filter.tau {
        Tau::Numeric(t) if t >= 0.0 => Ok(t),
        _ => Err(TcgError::validation("tau", "coarse-graining needs a numeric tau")),
    }
}

/// Output index range [a, b] of a convolution with half-width m.
fn output_range(t0: f64, dt: f64, n: usize, m: usize, tau: f64, window: Option<(f64, f64)>) -> Result<(usize, usize)> {
    let margin = TcgError::Margin {
        required: KERNEL_CUTOFF * tau,
    };
    if n < 2 * m + 1 {
        return Err(margin);
    }
    let (a, b) = match window {
        None => (m, n - 1 - m),
        Some((ta, tb)) => window_indices(t0, dt, n, ta, tb).ok_or(margin.clone())?,
    };
    if a < m || b + m >= n {
        return Err(margin);
    }
    Ok((a, b))
}

fn convolve<T>(values: &[T], kernel: &[f64], i: usize, zero: T) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let m = kernel.len() / 2;
    kernel
        .iter()
        .enumerate()
        .fold(zero, |acc, (k, &w)| acc + values[i + k - m] * w)
}

/// Gaussian moving average of a scalar series; `window` restricts the output times.
pub fn coarse_grain_series<T>(s: &Series<T>, tau: f64, window: Option<(f64, f64)>, zero: T) -> Result<Series<T>>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let kernel = gaussian_kernel(tau, s.dt);
    let (a, b) = output_range(s.t0, s.dt, s.values.len(), kernel.len() / 2, tau, window)?;
    Ok(Series {
        t0: s.time(a),
        dt: s.dt,
        values: (a..=b).map(|i| convolve(&s.values, &kernel, i, zero)).collect(),
    })
}

/// Gaussian moving average of every snapshot.
pub fn coarse_grain_trajectory(traj: &Trajectory, filter: &FilterSpec, window: Option<(f64, f64)>) -> Result<Trajectory> {
    let tau = numeric_tau(filter)?;
    let kernel = gaussian_kernel(tau, traj.dt);
    let m = kernel.len() / 2;
    let (a, b) = output_range(traj.t0, traj.dt, traj.len(), m, tau, window)?;
    let states = (a..=b)
        .map(|i| {
            let mut acc = CMatrix::zeros(traj.states[i].matrix().dim());
            for (k, &w) in kernel.iter().enumerate() {
                acc.scaled_add(Complex64::from(w), traj.states[i + k - m].matrix());
            }
            DensityMatrix::raw(acc)
        })
        .collect();
    let mut meta = traj.meta.clone();
    meta.label = format!("{} (coarse-grained, tau = {tau:e})", traj.meta.label);
    Ok(Trajectory {
        t0: traj.time(a),
        dt: traj.dt,
        states,
        modes: traj.modes.clone(),
        meta,
    })
}

/// Labeled operator whose expectation value is tracked.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSpec {
    pub label: String,
    pub op: OperatorSum,
}

impl ObservableSpec {
    pub fn parse(text: &str, table: &ModeTable) -> Result<Self> {
        Ok(ObservableSpec {
            label: text.trim().to_string(),
            op: parse_operator(text, table)?,
        })
    }
}

/// Tr(O rho(t_i)) for every snapshot.
pub fn expectation_series(traj: &Trajectory, obs: &ObservableSpec, assign: &Assignment) -> Result<Series<Complex64>> {
    let o = matrix_realization(&obs.op, &traj.modes, assign)?;
    let values = traj.states.iter().map(|s| s.expectation(&o)).collect::<Result<Vec<_>>>()?;
    Ok(Series {
        t0: traj.t0,
        dt: traj.dt,
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rms: f64,
    pub max_abs: f64,
    pub normalized_rms: f64,
}

pub fn same_grid<A: Copy, B: Copy>(a: &Series<A>, b: &Series<B>) -> bool {
    a.values.len() == b.values.len()
        && (a.dt - b.dt).abs() <= 1e-9 * a.dt.abs()
        && (a.t0 - b.t0).abs() <= 1e-6 * a.dt.abs().max(f64::MIN_POSITIVE)
}

/// Error metrics of `b` against the reference `a`.
pub fn compare_series(a: &Series, b: &Series) -> Result<Metrics> {
    if !same_grid(a, b) {
        return Err(TcgError::validation(
            "grid",
            format!(
                "reference has (t0={:e}, dt={:e}, n={}), test has (t0={:e}, dt={:e}, n={})",
                a.t0,
                a.dt,
                a.values.len(),
                b.t0,
                b.dt,
                b.values.len()
            ),
        ));
    }
    let n = a.values.len();
    if n == 0 {
        return Ok(Metrics {
            rms: 0.0,
            max_abs: 0.0,
            normalized_rms: 0.0,
        });
    }
    let diffs: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect();
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / n as f64).sqrt();
    let max_abs = diffs.iter().copied().fold(0.0, f64::max);
    let hi = a.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = a.values.iter().copied().fold(f64::INFINITY, f64::min);
    let span = hi - lo;
    let normalized_rms = if span > 0.0 {
        rms / span
    } else if rms == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Metrics {
        rms,
        max_abs,
        normalized_rms,
    })
}
