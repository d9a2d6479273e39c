//! Fixed-step fourth-order Runge-Kutta with trace and truncation guards.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::generator::{Generator, GeneratorKind};
use super::state::DensityMatrix;
use crate::error::{Result, TcgError};
use crate::operators::matrix::CMatrix;
use crate::operators::{ModeKind, ModeTable};

/// Integration grid: `steps` RK4 steps of `dt` from `t0`, snapshot every `record_every` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl TimeGrid {
    /// Grid covering [t0, t1]; the span must be a whole number of steps.
    pub fn new(t0: f64, t1: f64, dt: f64, record_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TcgError::validation("dt", "step must be positive and finite"));
        }
        if t1.partial_cmp(&t0) != Some(std::cmp::Ordering::Greater) {
            return Err(TcgError::validation("t1", "end time must exceed the start time"));
        }
        if record_every == 0 {
            return Err(TcgError::validation("record_every", "must be at least 1"));
        }
        let n = (t1 - t0) / dt;
        let steps = n.round() as usize;
        if (n - steps as f64).abs() > 1e-6 {
            return Err(TcgError::validation("dt", format!("span {:e} is not a multiple of dt = {dt:e}", t1 - t0)));
        }
        if !steps.is_multiple_of(record_every) {
            return Err(TcgError::validation("record_every", format!("{steps} steps are not divisible by {record_every}")));
        }
        Ok(TimeGrid {
            t0,
            dt,
            steps,
            record_every,
        })
    }

    pub fn snapshots(&self) -> usize {
        self.steps / self.record_every + 1
    }

    pub fn record_dt(&self) -> f64 {
        self.dt * self.record_every as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardPolicy {
    Abort,
    Warn,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegratorSettings {
    /// Largest tolerated |Tr rho(t) - Tr rho(t0)|.
    pub trace_tol: f64,
    /// Largest tolerated population of any bosonic top level.
    pub population_guard: Option<f64>,
    pub policy: GuardPolicy,
    /// Minimum RK4 steps per period of the fastest retained frequency.
    pub steps_per_period: f64,
    pub enforce_step_rule: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            trace_tol: 1e-6,
            population_guard: Some(1e-3),
            policy: GuardPolicy::Abort,
            steps_per_period: 40.0,
            enforce_step_rule: true,
        }
    }
}

impl IntegratorSettings {
    /// Largest dt allowed by the step rule for a generator.
    pub fn max_step(&self, gen: &Generator) -> f64 {
        let w = gen.max_frequency();
        if w == 0.0 {
            f64::INFINITY
        } else {
            2.0 * PI / (w * self.steps_per_period)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub label: String,
    pub generator: String,
    pub step: f64,
    pub record_every: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    pub max_top_population: f64,
    pub warnings: Vec<String>,
}

/// Snapshots rho(t0 + i dt), i < N.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<DensityMatrix>,
    pub modes: ModeTable,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// Snapshot index closest to `t`, if it lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let i = x.round();
        ((x - i).abs() <= 1e-6 && i >= 0.0 && (i as usize) < self.len()).then_some(i as usize)
    }
}

/// Per-mode masks of basis states sitting on a bosonic top level.
fn top_level_masks(table: &ModeTable) -> Vec<Vec<usize>> {
    let dims: Vec<usize> = table.modes.iter().map(|m| m.dim()).collect();
    let d: usize = dims.iter().product();
    let mut out = Vec::new();
    let mut stride = d;
    for (k, m) in table.modes.iter().enumerate() {
        stride /= dims[k];
        if m.kind != ModeKind::Bosonic {
            continue;
        }
        out.push((0..d).filter(|i| (i / stride) % dims[k] == dims[k] - 1).collect());
    }
    out
}

fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

fn hermiticity(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn rk4_step(gen: &Generator, t: f64, dt: f64, rho: &CMatrix) -> CMatrix {
    let k1 = gen.apply(t, rho);
    let k2 = gen.apply(t + dt / 2.0, &(rho + &k1.mapv(|z| z * (dt / 2.0))));
    let k3 = gen.apply(t + dt / 2.0, &(rho + &k2.mapv(|z| z * (dt / 2.0))));
    let k4 = gen.apply(t + dt, &(rho + &k3.mapv(|z| z * dt)));
    let mut out = rho.clone();
    out.scaled_add(Complex64::from(dt / 6.0), &k1);
    out.scaled_add(Complex64::from(dt / 3.0), &k2);
    out.scaled_add(Complex64::from(dt / 3.0), &k3);
    out.scaled_add(Complex64::from(dt / 6.0), &k4);
    out
}

/// Integrates `gen` from `rho0` over `grid`.
pub fn integrate(gen: &Generator, rho0: &DensityMatrix, grid: &TimeGrid, settings: &IntegratorSettings) -> Result<Trajectory> {
    if rho0.dim() != gen.dim() {
        return Err(TcgError::Shape(format!(
            "initial state has dimension {} but the model has {}",
            rho0.dim(),
            gen.dim()
        )));
    }
    if settings.enforce_step_rule {
        let limit = settings.max_step(gen);
        if grid.dt > limit * (1.0 + 1e-9) {
            let hint = match gen.kind {
                GeneratorKind::Exact => "",
                GeneratorKind::Tcg { .. } => "; prune fast suppressed terms with a threshold first",
            };
            return Err(TcgError::validation(
                "dt",
                format!(
                    "dt = {:e} exceeds 1/{} of the fastest retained period (w = {:e} rad/s): need dt <= {limit:e}{hint}",
                    grid.dt,
                    settings.steps_per_period,
                    gen.max_frequency()
                ),
            ));
        }
    }
    let masks = top_level_masks(gen.modes());
    let tr0 = rho0.trace();
    let mut meta = TrajectoryMeta {
        label: String::new(),
        generator: match gen.kind {
            GeneratorKind::Exact => "exact".into(),
            GeneratorKind::Tcg { order } => format!("tcg-{order}"),
        },
        step: grid.dt,
        record_every: grid.record_every,
        max_trace_drift: 0.0,
        max_hermiticity_drift: 0.0,
        max_top_population: 0.0,
        warnings: Vec::new(),
    };
    let flag = |meta: &mut TrajectoryMeta, kind: &str, msg: String| -> Result<()> {
        match settings.policy {
            GuardPolicy::Abort => Err(TcgError::Integration(msg)),
            GuardPolicy::Warn => {
                if !meta.warnings.iter().any(|w| w.starts_with(kind)) {
                    meta.warnings.push(format!("{kind}: {msg}"));
                }
                Ok(())
            }
        }
    };
    let check = |meta: &mut TrajectoryMeta, t: f64, m: &CMatrix| -> Result<()> {
        let drift = (trace(m) - tr0).norm();
        meta.max_trace_drift = meta.max_trace_drift.max(drift);
        meta.max_hermiticity_drift = meta.max_hermiticity_drift.max(hermiticity(m));
        if !drift.is_finite() || drift > settings.trace_tol {
            flag(meta, "trace", format!("trace drift {drift:e} at t = {t:e} exceeds {:e}", settings.trace_tol))?;
        }
        for mask in &masks {
            let p: f64 = mask.iter().map(|&i| m[(i, i)].re).sum();
            meta.max_top_population = meta.max_top_population.max(p);
            if let Some(g) = settings.population_guard {
                if p > g {
                    flag(meta, "truncation", format!("top-level population {p:e} at t = {t:e} exceeds {g:e}"))?;
                }
            }
        }
        Ok(())
    };

    let mut rho = rho0.matrix().clone();
    let mut states = Vec::with_capacity(grid.snapshots());
    check(&mut meta, grid.t0, &rho)?;
    states.push(DensityMatrix::raw(rho.clone()));
    for n in 0..grid.steps {
        let t = grid.t0 + n as f64 * grid.dt;
        rho = rk4_step(gen, t, grid.dt, &rho);
        if (n + 1) % grid.record_every == 0 {
            check(&mut meta, t + grid.dt, &rho)?;
            states.push(DensityMatrix::raw(rho.clone()));
        }
    }
    Ok(Trajectory {
        t0: grid.t0,
        dt: grid.record_dt(),
        states,
        modes: gen.modes().clone(),
        meta,
    })
}
