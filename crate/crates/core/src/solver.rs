//! Brute-force solver for the full stiff system.
//!
//! Each step composes, in Strang order,
//!
//! 1. half a relaxation substep: the fast pair `(u, v)` with `w` frozen,
//!    solved exactly in closed form (see below), so the step size carries no
//!    stiffness restriction at all;
//! 2. a transport substep: first-order upwind advection of each component at
//!    its own speed, then the slow source `a3 u + b3 v + c3 w` applied to `w`
//!    with a two-stage midpoint update;
//! 3. the second relaxation half-step.
//!
//! The relaxation block diagonalizes in the variables `s = u + v`,
//! `q = a u - b v`: with `w` frozen, `s` grows linearly with rate
//! `(c1 + c2) w` while `q` relaxes exponentially toward
//! `q_inf = eps^2 (a c1 - b c2) w / (a + b)` at rate `(a + b) / eps^2`.
//! Writing that solution out exactly is what makes the scheme uniformly
//! stable in `eps`.

use crate::exec;
use crate::fields::FieldTriple;
use crate::grid::Grid1D;
use crate::model::ValidatedParams;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Constant extrapolation of the edge cell; the default for decaying
    /// initial data.
    Outflow,
    /// Wrap-around; used by the space-homogeneous oracle runs.
    Periodic,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("cfl must lie in (0, 1] (got {0})")]
    BadCfl(f64),
    #[error("bad output times: {0}")]
    BadOutputTimes(String),
    #[error("transport step dt = {dt} exceeds the stability bound {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("initial data has {got} cells but the grid has {expected}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// Time-stepping controls shared by the full and the reduced solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Courant number in `(0, 1]`.
    pub cfl: f64,
    /// Strictly increasing snapshot times, all within `[0, T]`.
    pub output_times: Vec<f64>,
    pub boundary: Boundary,
}

impl SolverConfig {
    pub fn new(cfl: f64, output_times: Vec<f64>, boundary: Boundary) -> Result<Self, SolverError> {
        let cfg = SolverConfig {
            cfl,
            output_times,
            boundary,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub(crate) fn check(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::BadCfl(self.cfl));
        }
        for t in &self.output_times {
            if !t.is_finite() || *t < 0.0 {
                return Err(SolverError::BadOutputTimes(format!(
                    "times must be finite and nonnegative (got {t})"
                )));
            }
        }
        if self
            .output_times
            .windows(2)
            .any(|p| p[1] <= p[0])
        {
            return Err(SolverError::BadOutputTimes(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Solution snapshots at the requested output times plus stepping metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub snapshots: Vec<FieldTriple>,
    pub dx: f64,
    /// Base step actually used (individual steps may be shortened to land
    /// exactly on snapshot times).
    pub dt: f64,
    pub steps: u64,
}

/// Largest stable transport step: `cfl * dx / max |k|`, or `cfl * dx` when
/// all speeds vanish.
pub fn stable_dt(vp: &ValidatedParams, grid: &Grid1D, cfl: f64) -> f64 {
    let kmax = vp.k1.abs().max(vp.k2.abs()).max(vp.k3.abs());
    if kmax == 0.0 {
        cfl * grid.dx()
    } else {
        cfl * grid.dx() / kmax
    }
}

/// Exact update of the fast pair with `w` frozen. Unconditionally stable:
/// the relaxing mode is advanced by its exact exponential.
pub fn relaxation_substep(state: &FieldTriple, vp: &ValidatedParams, dt: f64) -> FieldTriple {
    let mut out = state.clone();
    relax_inplace(&mut out.u, &mut out.v, &out.w, vp, dt);
    out
}

fn relax_inplace(u: &mut [f64], v: &mut [f64], w: &[f64], vp: &ValidatedParams, dt: f64) {
    let a = vp.a;
    let b = vp.b;
    let ab = a + b;
    let eps2 = vp.eps2();
    let decay = (-(ab / eps2) * dt).exp();
    let csum = vp.c1 + vp.c2;
    let qcoef = eps2 * (a * vp.c1 - b * vp.c2) / ab;
    exec::update_pair(u, v, w, move |u, v, w| {
        let s = u + v + csum * w * dt;
        let q_inf = qcoef * w;
        let q = q_inf + (a * u - b * v - q_inf) * decay;
        ((b * s + q) / ab, (a * s - q) / ab)
    });
}

fn upwind_into(dst: &mut [f64], src: &[f64], nu: f64, boundary: Boundary) {
    let n = src.len();
    if nu >= 0.0 {
        exec::fill_indexed(dst, |j| {
            let left = if j == 0 {
                match boundary {
                    Boundary::Outflow => src[0],
                    Boundary::Periodic => src[n - 1],
                }
            } else {
                src[j - 1]
            };
            src[j] - nu * (src[j] - left)
        });
    } else {
        exec::fill_indexed(dst, |j| {
            let right = if j == n - 1 {
                match boundary {
                    Boundary::Outflow => src[n - 1],
                    Boundary::Periodic => src[0],
                }
            } else {
                src[j + 1]
            };
            src[j] - nu * (right - src[j])
        });
    }
}

fn w_source_inplace(w: &mut [f64], u: &[f64], v: &[f64], vp: &ValidatedParams, dt: f64) {
    let (a3, b3, c3) = (vp.a3, vp.b3, vp.c3);
    exec::update_with2(w, u, v, move |w, u, v| {
        let uv = a3 * u + b3 * v;
        let half = w + 0.5 * dt * (uv + c3 * w);
        w + dt * (uv + c3 * half)
    });
}

/// Upwind advection of all three components at their own speeds, then the
/// slow source on `w` via a two-stage midpoint update.
pub fn transport_substep(
    state: &FieldTriple,
    vp: &ValidatedParams,
    dt: f64,
    grid: &Grid1D,
    boundary: Boundary,
) -> Result<FieldTriple, SolverError> {
    let limit = stable_dt(vp, grid, 1.0);
    if dt > limit * (1.0 + 1e-12) {
        return Err(SolverError::CflViolation { dt, limit });
    }
    let n = state.len();
    let mut out = FieldTriple::zeros(n, state.t);
    let r = dt / grid.dx();
    upwind_into(&mut out.u, &state.u, vp.k1 * r, boundary);
    upwind_into(&mut out.v, &state.v, vp.k2 * r, boundary);
    upwind_into(&mut out.w, &state.w, vp.k3 * r, boundary);
    w_source_inplace(&mut out.w, &out.u, &out.v, vp, dt);
    Ok(out)
}

struct Stepper<'a> {
    vp: &'a ValidatedParams,
    grid: &'a Grid1D,
    boundary: Boundary,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    bu: Vec<f64>,
    bv: Vec<f64>,
    bw: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(vp: &'a ValidatedParams, grid: &'a Grid1D, boundary: Boundary, ic: &FieldTriple) -> Self {
        let n = ic.len();
        Stepper {
            vp,
            grid,
            boundary,
            u: ic.u.clone(),
            v: ic.v.clone(),
            w: ic.w.clone(),
            bu: vec![0.0; n],
            bv: vec![0.0; n],
            bw: vec![0.0; n],
        }
    }

    fn strang_step(&mut self, dt: f64) {
        relax_inplace(&mut self.u, &mut self.v, &self.w, self.vp, 0.5 * dt);
        let r = dt / self.grid.dx();
        upwind_into(&mut self.bu, &self.u, self.vp.k1 * r, self.boundary);
        upwind_into(&mut self.bv, &self.v, self.vp.k2 * r, self.boundary);
        upwind_into(&mut self.bw, &self.w, self.vp.k3 * r, self.boundary);
        w_source_inplace(&mut self.bw, &self.bu, &self.bv, self.vp, dt);
        std::mem::swap(&mut self.u, &mut self.bu);
        std::mem::swap(&mut self.v, &mut self.bv);
        std::mem::swap(&mut self.w, &mut self.bw);
        relax_inplace(&mut self.u, &mut self.v, &self.w, self.vp, 0.5 * dt);
    }

    fn all_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.w.iter().all(|x| x.is_finite())
    }

    fn snapshot(&self, t: f64) -> FieldTriple {
        FieldTriple {
            u: self.u.clone(),
            v: self.v.clone(),
            w: self.w.clone(),
            t,
        }
    }
}

/// March the full system and capture snapshots exactly at the requested
/// output times (the last step before a snapshot is shortened to land on it).
///
/// When output times below `eps^2` are requested, the base step is
/// additionally capped at `eps^2 / 10` so the initial layer is resolved in
/// the snapshots; stability never requires this.
pub fn solve_full(
    vp: &ValidatedParams,
    grid: &Grid1D,
    ic: &FieldTriple,
    config: &SolverConfig,
) -> Result<SolutionTrace, SolverError> {
    config.check()?;
    if ic.len() != grid.n_cells() {
        return Err(SolverError::ShapeMismatch {
            expected: grid.n_cells(),
            got: ic.len(),
        });
    }
    if !ic.all_finite() {
        return Err(SolverError::NonFiniteState { t: 0.0 });
    }
    if let Some(&t_last) = config.output_times.last() {
        if t_last > vp.t_end * (1.0 + 1e-12) {
            return Err(SolverError::BadOutputTimes(format!(
                "time {t_last} exceeds the horizon T = {}",
                vp.t_end
            )));
        }
    }

    let mut base_dt = stable_dt(vp, grid, config.cfl);
    let eps2 = vp.eps2();
    if config
        .output_times
        .iter()
        .any(|&t| t > 0.0 && t < eps2)
    {
        base_dt = base_dt.min(eps2 / 10.0);
    }

    let mut stepper = Stepper::new(vp, grid, config.boundary, ic);
    let mut snapshots = Vec::with_capacity(config.output_times.len());
    let mut t = 0.0f64;
    let mut steps: u64 = 0;
    let tol = 1e-12 * vp.t_end.max(1.0);

    for &t_out in &config.output_times {
        while t < t_out - tol {
            let dt = base_dt.min(t_out - t);
            stepper.strang_step(dt);
            t += dt;
            steps += 1;
            if !stepper.all_finite() {
                return Err(SolverError::NonFiniteState { t });
            }
        }
        t = t_out;
        snapshots.push(stepper.snapshot(t_out));
    }

    Ok(SolutionTrace {
        snapshots,
        dx: grid.dx(),
        dt: base_dt,
        steps,
    })
}
