//! Zeroth-order asymptotic description of the stiff system.
//!
//! In the relaxed limit the fast pair collapses onto the slaved state
//! `v = (a/b) u`, leaving a single field `ubar` that is transported at the
//! effective speed `V` and driven by the slow component:
//!
//! ```text
//! ubar_t + V ubar_x  = C wbar
//! wbar_t + k3 wbar_x = c ubar + c3 wbar
//! ```
//!
//! with the constants of [`crate::model::DerivedConstants`]. The data lost in
//! the collapse is restored near `t = 0` by an initial-layer corrector
//! `(psi(x) e^{-(a+b) tau}, -psi(x) e^{-(a+b) tau}, 0)`, `tau = t / eps^2`.
//! The main term is the sum of the two pieces and reproduces the initial data
//! exactly at `t = 0`.

use crate::exec;
use crate::fields::{max_abs, FieldTriple};
use crate::grid::Grid1D;
use crate::model::{derive_constants, ValidatedParams};
use crate::solver::{SolverConfig, SolverError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least 3 snapshots for time differencing (got {0})")]
    InsufficientSnapshots(usize),
    #[error("snapshots must be uniformly spaced in time")]
    NonUniformSnapshots,
}

/// The two reduced fields at one instant. The slaved component is not stored:
/// `vbar = (a/b) ubar` always.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularPart {
    pub ubar: Vec<f64>,
    pub wbar: Vec<f64>,
    pub t: f64,
}

/// Amplitude `psi(x)` of the initial-layer corrector, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerAmplitude {
    pub psi: Vec<f64>,
}

/// Initial data for the reduced fields:
/// `ubar(x, 0) = b/(a+b) (u0 + v0)`, `wbar(x, 0) = w0`.
pub fn reduced_initial_data(ic: &FieldTriple, vp: &ValidatedParams) -> RegularPart {
    let factor = vp.b / (vp.a + vp.b);
    let n = ic.len();
    let mut ubar = vec![0.0; n];
    exec::fill_indexed(&mut ubar, |j| factor * (ic.u[j] + ic.v[j]));
    RegularPart {
        ubar,
        wbar: ic.w.clone(),
        t: ic.t,
    }
}

/// Layer amplitude `psi = (a u0 - b v0) / (a + b)`; zero exactly when the
/// data start on the slaved manifold.
pub fn psi_field(ic: &FieldTriple, vp: &ValidatedParams) -> LayerAmplitude {
    let (a, b) = (vp.a, vp.b);
    let ab = a + b;
    let n = ic.len();
    let mut psi = vec![0.0; n];
    exec::fill_indexed(&mut psi, |j| (a * ic.u[j] - b * ic.v[j]) / ab);
    LayerAmplitude { psi }
}

/// Expand the reduced fields back to a full triple through the slaving
/// relation: `u = ubar`, `v = (a/b) ubar`, `w = wbar`.
pub fn regular_triple(rp: &RegularPart, vp: &ValidatedParams) -> FieldTriple {
    let ratio = vp.a / vp.b;
    let n = rp.ubar.len();
    let mut v = vec![0.0; n];
    exec::fill_indexed(&mut v, |j| ratio * rp.ubar[j]);
    FieldTriple {
        u: rp.ubar.clone(),
        v,
        w: rp.wbar.clone(),
        t: rp.t,
    }
}

/// The layer corrector at time `t`: with `tau = t / eps^2`,
/// `u = psi e^{-(a+b) tau}`, `v = -u`, `w = 0`.
pub fn boundary_layer_triple(
    amp: &LayerAmplitude,
    vp: &ValidatedParams,
    t: f64,
) -> FieldTriple {
    let tau = t / vp.eps2();
    let factor = (-(vp.a + vp.b) * tau).exp();
    let n = amp.psi.len();
    let mut u = vec![0.0; n];
    exec::fill_indexed(&mut u, |j| amp.psi[j] * factor);
    let mut v = vec![0.0; n];
    exec::fill_indexed(&mut v, |j| -amp.psi[j] * factor);
    FieldTriple {
        u,
        v,
        w: vec![0.0; n],
        t,
    }
}

/// Componentwise sum of the regular and layer pieces. At `t = 0` this
/// reproduces the sampled initial data exactly.
pub fn assemble_main_term(
    reg: &FieldTriple,
    layer: &FieldTriple,
) -> Result<FieldTriple, AsymptoticsError> {
    if !reg.same_shape(layer) {
        return Err(AsymptoticsError::ShapeMismatch(format!(
            "regular part has {} cells, layer has {}",
            reg.len(),
            layer.len()
        )));
    }
    if reg.t != layer.t {
        return Err(AsymptoticsError::ShapeMismatch(format!(
            "time stamps differ: {} vs {}",
            reg.t, layer.t
        )));
    }
    let n = reg.len();
    let mut out = FieldTriple::zeros(n, reg.t);
    exec::fill_indexed(&mut out.u, |j| reg.u[j] + layer.u[j]);
    exec::fill_indexed(&mut out.v, |j| reg.v[j] + layer.v[j]);
    exec::fill_indexed(&mut out.w, |j| reg.w[j] + layer.w[j]);
    Ok(out)
}

struct ReducedStepper<'a> {
    grid: &'a Grid1D,
    boundary: crate::solver::Boundary,
    v_speed: f64,
    k3: f64,
    cw: f64,
    cu: f64,
    c3: f64,
    ubar: Vec<f64>,
    wbar: Vec<f64>,
    bu: Vec<f64>,
    bw: Vec<f64>,
}

impl<'a> ReducedStepper<'a> {
    fn upwind(dst: &mut [f64], src: &[f64], nu: f64, boundary: crate::solver::Boundary) {
        use crate::solver::Boundary;
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

    fn step(&mut self, dt: f64) {
        let r = dt / self.grid.dx();
        Self::upwind(&mut self.bu, &self.ubar, self.v_speed * r, self.boundary);
        Self::upwind(&mut self.bw, &self.wbar, self.k3 * r, self.boundary);
        std::mem::swap(&mut self.ubar, &mut self.bu);
        std::mem::swap(&mut self.wbar, &mut self.bw);
        // coupled sources advanced together by a two-stage midpoint update
        let (cw, cu, c3) = (self.cw, self.cu, self.c3);
        exec::update_pair2(&mut self.ubar, &mut self.wbar, move |u, w| {
            let uh = u + 0.5 * dt * cw * w;
            let wh = w + 0.5 * dt * (cu * u + c3 * w);
            (u + dt * cw * wh, w + dt * (cu * uh + c3 * wh))
        });
    }

    fn all_finite(&self) -> bool {
        self.ubar.iter().all(|x| x.is_finite()) && self.wbar.iter().all(|x| x.is_finite())
    }
}

/// March the reduced system by first-order upwind (speeds `V` and `k3`) with
/// the coupling sources advanced by a two-stage midpoint update; snapshots
/// land exactly on the requested times. Deterministic.
pub fn solve_reduced(
    vp: &ValidatedParams,
    grid: &Grid1D,
    rp0: &RegularPart,
    config: &SolverConfig,
) -> Result<Vec<RegularPart>, SolverError> {
    config.check()?;
    if rp0.ubar.len() != grid.n_cells() || rp0.wbar.len() != grid.n_cells() {
        return Err(SolverError::ShapeMismatch {
            expected: grid.n_cells(),
            got: rp0.ubar.len(),
        });
    }
    if let Some(&t_last) = config.output_times.last() {
        if t_last > vp.t_end * (1.0 + 1e-12) {
            return Err(SolverError::BadOutputTimes(format!(
                "time {t_last} exceeds the horizon T = {}",
                vp.t_end
            )));
        }
    }

    let dc = derive_constants(vp);
    let kmax = dc.v.abs().max(vp.k3.abs());
    let base_dt = if kmax == 0.0 {
        config.cfl * grid.dx()
    } else {
        config.cfl * grid.dx() / kmax
    };

    let n = grid.n_cells();
    let mut stepper = ReducedStepper {
        grid,
        boundary: config.boundary,
        v_speed: dc.v,
        k3: vp.k3,
        cw: dc.cw,
        cu: dc.cu,
        c3: vp.c3,
        ubar: rp0.ubar.clone(),
        wbar: rp0.wbar.clone(),
        bu: vec![0.0; n],
        bw: vec![0.0; n],
    };

    let mut out = Vec::with_capacity(config.output_times.len());
    let mut t = 0.0f64;
    let tol = 1e-12 * vp.t_end.max(1.0);
    for &t_out in &config.output_times {
        while t < t_out - tol {
            let dt = base_dt.min(t_out - t);
            stepper.step(dt);
            t += dt;
            if !stepper.all_finite() {
                return Err(SolverError::NonFiniteState { t });
            }
        }
        t = t_out;
        out.push(RegularPart {
            ubar: stepper.ubar.clone(),
            wbar: stepper.wbar.clone(),
            t: t_out,
        });
    }
    Ok(out)
}

/// A-posteriori consistency check of reduced-system snapshots against the
/// equivalent factored second-order form
///
/// ```text
/// (d_t + V d_x)(d_t + k3 d_x) ubar = c3 (d_t + V d_x) ubar + D ubar
/// ```
///
/// evaluated with central differences in `x` and `t` at interior points.
/// Returns the mean absolute residual normalized by the field magnitude.
pub fn check_second_order_form(
    snapshots: &[RegularPart],
    vp: &ValidatedParams,
    grid: &Grid1D,
) -> Result<f64, AsymptoticsError> {
    let m = snapshots.len();
    if m < 3 {
        return Err(AsymptoticsError::InsufficientSnapshots(m));
    }
    let n = grid.n_cells();
    for s in snapshots {
        if s.ubar.len() != n {
            return Err(AsymptoticsError::ShapeMismatch(format!(
                "snapshot has {} cells, grid has {}",
                s.ubar.len(),
                n
            )));
        }
    }
    let dt = snapshots[1].t - snapshots[0].t;
    if dt <= 0.0 {
        return Err(AsymptoticsError::NonUniformSnapshots);
    }
    for pair in snapshots.windows(2) {
        if ((pair[1].t - pair[0].t) - dt).abs() > 1e-9 * dt {
            return Err(AsymptoticsError::NonUniformSnapshots);
        }
    }

    let dc = derive_constants(vp);
    let (v, k3, c3, d) = (dc.v, vp.k3, vp.c3, dc.d);
    let dx = grid.dx();

    let mut sum = 0.0f64;
    let mut count = 0usize;
    let mut sup = 0.0f64;
    for s in snapshots {
        sup = sup.max(max_abs(&s.ubar));
    }
    for k in 1..m - 1 {
        let (prev, cur, next) = (&snapshots[k - 1].ubar, &snapshots[k].ubar, &snapshots[k + 1].ubar);
        for j in 1..n - 1 {
            let u_tt = (next[j] - 2.0 * cur[j] + prev[j]) / (dt * dt);
            let u_xt =
                (next[j + 1] - next[j - 1] - prev[j + 1] + prev[j - 1]) / (4.0 * dt * dx);
            let u_xx = (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) / (dx * dx);
            let u_t = (next[j] - prev[j]) / (2.0 * dt);
            let u_x = (cur[j + 1] - cur[j - 1]) / (2.0 * dx);
            let r = u_tt + (v + k3) * u_xt + v * k3 * u_xx - c3 * (u_t + v * u_x) - d * cur[j];
            sum += r.abs();
            count += 1;
        }
    }
    Ok(sum / count as f64 / sup.max(1e-300))
}
