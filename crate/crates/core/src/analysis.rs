//! Measurement layer: norms, fitted rates, layer location, conservation
//! residuals, and the exact space-homogeneous ODE oracle.

use crate::expm::expm_series;
use crate::fields::FieldTriple;
use crate::grid::Grid1D;
use crate::model::ValidatedParams;
use crate::solver::SolutionTrace;
use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("fit data must be positive")]
    NonPositiveData,
    #[error("need at least {needed} points (got {got})")]
    TooFewPoints { needed: usize, got: usize },
    #[error("field too short for gradient location (len {0})")]
    TooShort(usize),
    #[error("need at least {needed} snapshots (got {got})")]
    InsufficientSnapshots { needed: usize, got: usize },
}

/// Sup and cell-width-weighted L1 norms of a field difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentNorms {
    pub sup: f64,
    pub l1: f64,
}

/// Difference norms per component plus the combined values
/// (`sup_norm` = max over components, `l1_norm` = sum over components).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub sup_norm: f64,
    pub l1_norm: f64,
    pub u: ComponentNorms,
    pub v: ComponentNorms,
    pub w: ComponentNorms,
}

fn diff_norms(a: &[f64], b: &[f64], dx: f64) -> ComponentNorms {
    let mut sup = 0.0f64;
    let mut l1 = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = (x - y).abs();
        sup = sup.max(d);
        l1 += d;
    }
    ComponentNorms { sup, l1: l1 * dx }
}

/// Componentwise sup and dx-weighted L1 norms of `a - b`.
pub fn error_norms(
    a: &FieldTriple,
    b: &FieldTriple,
    grid: &Grid1D,
) -> Result<ErrorReport, AnalysisError> {
    if !a.same_shape(b) || a.len() != grid.n_cells() {
        return Err(AnalysisError::ShapeMismatch(format!(
            "fields have {} / {} cells, grid has {}",
            a.len(),
            b.len(),
            grid.n_cells()
        )));
    }
    let u = diff_norms(&a.u, &b.u, grid.dx());
    let v = diff_norms(&a.v, &b.v, grid.dx());
    let w = diff_norms(&a.w, &b.w, grid.dx());
    Ok(ErrorReport {
        sup_norm: u.sup.max(v.sup).max(w.sup),
        l1_norm: u.l1 + v.l1 + w.l1,
        u,
        v,
        w,
    })
}

/// A fitted slope or rate with its goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub value: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> FitResult {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    FitResult {
        value: slope,
        r_squared,
        points_used: xs.len(),
    }
}

/// Least-squares slope of `log(error)` against `log(epsilon)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    if points.iter().any(|(e, err)| *e <= 0.0 || *err <= 0.0) {
        return Err(AnalysisError::NonPositiveData);
    }
    let xs: Vec<f64> = points.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, err)| err.ln()).collect();
    Ok(least_squares_slope(&xs, &ys))
}

/// Least-squares decay rate: the slope of `-log(magnitude)` against `tau`,
/// so samples of `A e^{-k tau}` fit to `k` for any amplitude `A`.
pub fn fit_exponential_rate(series: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    if series.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: series.len(),
        });
    }
    if series.iter().any(|(_, m)| *m <= 0.0) {
        return Err(AnalysisError::NonPositiveData);
    }
    let xs: Vec<f64> = series.iter().map(|(tau, _)| *tau).collect();
    let ys: Vec<f64> = series.iter().map(|(_, m)| -(m.ln())).collect();
    Ok(least_squares_slope(&xs, &ys))
}

/// Position of the steepest cell-to-cell gradient: the midpoint of the cell
/// pair maximizing `|f[j+1] - f[j]|`, ties broken toward smaller `x`.
pub fn locate_steepest_gradient(field: &[f64], grid: &Grid1D) -> Result<f64, AnalysisError> {
    if field.len() < 3 {
        return Err(AnalysisError::TooShort(field.len()));
    }
    let mut best_j = 0usize;
    let mut best = -1.0f64;
    for j in 0..field.len() - 1 {
        let d = (field[j + 1] - field[j]).abs();
        if d > best {
            best = d;
            best_j = j;
        }
    }
    Ok(grid.x_min() + (best_j as f64 + 1.0) * grid.dx())
}

/// Generator of the space-homogeneous system: the full model with the
/// spatial derivatives dropped.
pub fn ode_generator(vp: &ValidatedParams) -> Matrix3<f64> {
    let eps2 = vp.eps2();
    Matrix3::new(
        -vp.a / eps2,
        vp.b / eps2,
        vp.c1,
        vp.a / eps2,
        -vp.b / eps2,
        vp.c2,
        vp.a3,
        vp.b3,
        vp.c3,
    )
}

/// Exact solution of the space-homogeneous system at time `t`, by the
/// series matrix exponential. `expm_eigen` provides the independent
/// cross-check when the eigenvalues are distinct.
pub fn ode_oracle(vp: &ValidatedParams, uvw0: (f64, f64, f64), t: f64) -> (f64, f64, f64) {
    let e = expm_series(&(ode_generator(vp) * t));
    let x = e * Vector3::new(uvw0.0, uvw0.1, uvw0.2);
    (x[0], x[1], x[2])
}

/// Worst violation, over consecutive snapshot pairs, of the slow balance
/// `d/dt sum(u + v) dx = (c1 + c2) sum(w) dx` (the stiff terms cancel when
/// the two fast equations are added). The instantaneous right side is
/// approximated by the midpoint-in-time average of the two snapshots, and
/// the result is normalized by the field magnitude.
pub fn conservation_residual(
    trace: &SolutionTrace,
    vp: &ValidatedParams,
    grid: &Grid1D,
) -> Result<f64, AnalysisError> {
    if trace.snapshots.len() < 2 {
        return Err(AnalysisError::InsufficientSnapshots {
            needed: 2,
            got: trace.snapshots.len(),
        });
    }
    let dx = grid.dx();
    let csum = vp.c1 + vp.c2;
    let sum = |xs: &[f64]| xs.iter().sum::<f64>();
    let mag = |f: &FieldTriple| {
        (f.u.iter().map(|x| x.abs()).sum::<f64>()
            + f.v.iter().map(|x| x.abs()).sum::<f64>()
            + f.w.iter().map(|x| x.abs()).sum::<f64>())
            * dx
    };

    let mut worst = 0.0f64;
    for pair in trace.snapshots.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        let dt = s1.t - s0.t;
        if dt <= 0.0 {
            return Err(AnalysisError::ShapeMismatch(
                "snapshots must be increasing in time".into(),
            ));
        }
        let fast0 = (sum(&s0.u) + sum(&s0.v)) * dx;
        let fast1 = (sum(&s1.u) + sum(&s1.v)) * dx;
        let w_mid = 0.5 * (sum(&s0.w) + sum(&s1.w)) * dx;
        let resid = ((fast1 - fast0) / dt - csum * w_mid).abs();
        let scale = mag(s0).max(mag(s1)).max(1e-300);
        worst = worst.max(resid / scale);
    }
    Ok(worst)
}
