//! Split of the instantaneous ground-state population rate into an inertial
//! part (the eigenbasis rotating under a changing H) and a dissipative part.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::generator::Generator;
use super::integrate::Trajectory;
use crate::error::{Result, TcgError};
use crate::model::EffectiveModel;
use crate::operators::matrix::CMatrix;
use crate::symbolic::Assignment;

/// Relative gap below which the ground level counts as degenerate.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateDecomposition {
    pub t0: f64,
    pub dt: f64,
    pub inert: Vec<f64>,
    pub dynam: Vec<f64>,
    /// <0|-i[H, rho]|0>, which vanishes in an eigenstate.
    pub coherent: Vec<f64>,
    /// Ground-state population in the instantaneous eigenbasis.
    pub p0: Vec<f64>,
    /// Samples skipped because the ground level is degenerate.
    pub flagged: Vec<bool>,
}

fn to_na(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn bra_ket(u: &DMatrix<Complex64>, m: &CMatrix, a: usize, b: usize) -> Complex64 {
    let d = m.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        let ua = u[(i, a)].conj();
        if ua == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..d {
            acc += ua * m[(i, j)] * u[(j, b)];
        }
    }
    acc
}

/// Which instantaneous eigenstate plays the role of |0(t)>.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceLevel {
    #[default]
    Lowest,
    Highest,
    /// Starts at the highest level, then picks the eigenstate with the largest overlap
    /// with the previous sample. Needed when the followed state is the top of the
    /// spectrum and meets a near-degenerate partner, as in the parametron.
    FollowHighest,
}

pub fn rate_decomposition(eff: &EffectiveModel, traj: &Trajectory, assign: &Assignment) -> Result<RateDecomposition> {
    rate_decomposition_at(eff, traj, assign, ReferenceLevel::Lowest)
}

pub fn rate_decomposition_at(
    eff: &EffectiveModel,
    traj: &Trajectory,
    assign: &Assignment,
    level: ReferenceLevel,
) -> Result<RateDecomposition> {
    let full = Generator::tcg(eff, assign)?;
    let diss = Generator::tcg_dissipative(eff, assign)?;
    let d = full.dim();
    let h_step = traj.dt * 1e-3;
    let n = traj.len();
    let mut out = RateDecomposition {
        t0: traj.t0,
        dt: traj.dt,
        inert: vec![f64::NAN; n],
        dynam: vec![f64::NAN; n],
        coherent: vec![f64::NAN; n],
        p0: vec![f64::NAN; n],
        flagged: vec![false; n],
    };
    let i_unit = Complex64::new(0.0, 1.0);
    let mut previous: Option<Vec<Complex64>> = None;
    for (k, state) in traj.states.iter().enumerate() {
        let t = traj.time(k);
        let rho = state.matrix();
        if rho.nrows() != d {
            return Err(TcgError::Shape(format!("snapshot has dimension {}, model has {d}", rho.nrows())));
        }
        let h = full.hamiltonian_at(t);
        let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let herm = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (h[(i, j)] - h[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if herm > 1e-9 * scale {
            return Err(TcgError::Hermiticity(format!("H(t) at t = {t:e} is off by {herm:e}")));
        }
        let eig = to_na(&h).symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        if level != ReferenceLevel::Lowest {
            order.reverse();
        }
        if let (ReferenceLevel::FollowHighest, Some(prev)) = (level, &previous) {
            let overlap = |c: usize| (0..d).map(|i| prev[i].conj() * eig.eigenvectors[(i, c)]).sum::<Complex64>().norm();
            let best = (0..d).max_by(|&x, &y| overlap(order[x]).total_cmp(&overlap(order[y]))).unwrap_or(0);
            order.swap(0, best);
        }
        let e: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let u = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
        previous = Some((0..d).map(|i| u[(i, 0)]).collect());
        if (1..d).any(|m| (e[m] - e[0]).abs() <= GAP_TOL * scale) {
            out.flagged[k] = true;
            continue;
        }
        let hdot = (full.hamiltonian_at(t + h_step) - full.hamiltonian_at(t - h_step)).mapv(|z| z / (2.0 * h_step));
        let mut inert = Complex64::new(0.0, 0.0);
        for m in 1..d {
            inert += bra_ket(&u, &hdot, m, 0) / (e[0] - e[m]) * bra_ket(&u, rho, 0, m);
        }
        let comm = (h.dot(rho) - rho.dot(&h)).mapv(|z| -i_unit * z);
        out.inert[k] = 2.0 * inert.re;
        out.dynam[k] = bra_ket(&u, &diss.apply(t, rho), 0, 0).re;
        out.coherent[k] = bra_ket(&u, &comm, 0, 0).re;
        out.p0[k] = bra_ket(&u, rho, 0, 0).re;
    }
    Ok(out)
}
