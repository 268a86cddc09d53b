//! Initial-profile families and their sampling onto a grid.
//!
//! Smooth data come from the gaussian / compact-bump families, the
//! exploratory families are a single step discontinuity and an
//! `epsilon`-scaled spike `base(x / epsilon)`.

use crate::exec;
use crate::fields::{max_abs, FieldTriple};
use crate::grid::Grid1D;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("bad profile: {0}")]
    BadProfile(String),
    /// A decaying profile still carries more than `1e-12` of its peak at the
    /// domain edge; the grid has to be widened.
    #[error(
        "domain too small for component {component}: edge value {edge:.3e} exceeds 1e-12 of peak {peak:.3e}"
    )]
    DomainTooSmall {
        component: &'static str,
        edge: f64,
        peak: f64,
    },
}

/// One initial profile.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    /// `A exp(-((x - m) / s)^2)`; infinitely differentiable, rapidly
    /// decreasing.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `A exp(1 - 1 / (1 - r^2))` for `r = (x - m)/s`, `|r| < 1`, else 0.
    /// Infinitely differentiable with compact support, peak `A` at `m`.
    CompactBump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Single jump at `jump_location`: `left` for `x < X`, `right` for
    /// `x > X` (the right value is used at `x = X`).
    Step {
        jump_location: f64,
        left: f64,
        right: f64,
    },
    /// `base(x / epsilon)`: a narrow splash whose support shrinks with
    /// `epsilon`. The base must be one of the smooth families.
    Spike { base: Box<ProfileSpec> },
}

impl ProfileSpec {
    /// Structural checks: positive finite widths, finite values, and a smooth
    /// base under a spike.
    pub fn validate(&self) -> Result<(), ProfileError> {
        match self {
            ProfileSpec::Gaussian {
                amplitude,
                center,
                width,
            }
            | ProfileSpec::CompactBump {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude.is_finite() && center.is_finite() && width.is_finite()) {
                    return Err(ProfileError::BadProfile("non-finite parameter".into()));
                }
                if *width <= 0.0 {
                    return Err(ProfileError::BadProfile(format!(
                        "width must be positive (got {width})"
                    )));
                }
                Ok(())
            }
            ProfileSpec::Step {
                jump_location,
                left,
                right,
            } => {
                if !(jump_location.is_finite() && left.is_finite() && right.is_finite()) {
                    return Err(ProfileError::BadProfile("non-finite parameter".into()));
                }
                Ok(())
            }
            ProfileSpec::Spike { base } => match base.as_ref() {
                ProfileSpec::Gaussian { .. } | ProfileSpec::CompactBump { .. } => base.validate(),
                _ => Err(ProfileError::BadProfile(
                    "spike base must be gaussian or compact_bump".into(),
                )),
            },
        }
    }

    /// True for profiles that decay toward the domain edges (and hence are
    /// subject to the domain-adequacy check).
    pub fn is_decaying(&self) -> bool {
        !matches!(self, ProfileSpec::Step { .. })
    }

    /// Evaluate without re-validating; callers must have run [`validate`].
    fn eval_unchecked(&self, x: f64, epsilon: f64) -> f64 {
        match self {
            ProfileSpec::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let r = (x - center) / width;
                amplitude * (-r * r).exp()
            }
            ProfileSpec::CompactBump {
                amplitude,
                center,
                width,
            } => {
                let r = (x - center) / width;
                if r.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            ProfileSpec::Step {
                jump_location,
                left,
                right,
            } => {
                if x < *jump_location {
                    *left
                } else {
                    *right
                }
            }
            ProfileSpec::Spike { base } => base.eval_unchecked(x / epsilon, epsilon),
        }
    }
}

/// Value of the profile at `x`. `epsilon` only matters for spikes, which are
/// evaluated as `base(x / epsilon)`.
pub fn eval_profile(spec: &ProfileSpec, x: f64, epsilon: f64) -> Result<f64, ProfileError> {
    spec.validate()?;
    if matches!(spec, ProfileSpec::Spike { .. }) && !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ProfileError::BadProfile(format!(
            "spike needs a positive epsilon (got {epsilon})"
        )));
    }
    Ok(spec.eval_unchecked(x, epsilon))
}

fn sample_component(
    spec: &ProfileSpec,
    grid: &Grid1D,
    epsilon: f64,
    name: &'static str,
) -> Result<Vec<f64>, ProfileError> {
    spec.validate()?;
    if matches!(spec, ProfileSpec::Spike { .. }) && !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ProfileError::BadProfile(format!(
            "spike needs a positive epsilon (got {epsilon})"
        )));
    }
    let mut out = vec![0.0; grid.n_cells()];
    exec::fill_indexed(&mut out, |j| spec.eval_unchecked(grid.center(j), epsilon));

    if spec.is_decaying() {
        let peak = max_abs(&out);
        let edge = spec
            .eval_unchecked(grid.x_min(), epsilon)
            .abs()
            .max(spec.eval_unchecked(grid.x_max(), epsilon).abs());
        if edge > 1e-12 * peak {
            return Err(ProfileError::DomainTooSmall {
                component: name,
                edge,
                peak,
            });
        }
    }
    Ok(out)
}

/// Sample the three initial profiles at cell centers (time stamp 0).
///
/// Decaying profiles must have dropped below `1e-12` of their peak at the
/// domain edges, otherwise the grid is reported as too small.
pub fn sample_initial_triple(
    u_spec: &ProfileSpec,
    v_spec: &ProfileSpec,
    w_spec: &ProfileSpec,
    grid: &Grid1D,
    epsilon: f64,
) -> Result<FieldTriple, ProfileError> {
    let u = sample_component(u_spec, grid, epsilon, "u")?;
    let v = sample_component(v_spec, grid, epsilon, "v")?;
    let w = sample_component(w_spec, grid, epsilon, "w")?;
    Ok(FieldTriple { u, v, w, t: 0.0 })
}
