//! Model coefficients and the constants of the relaxed (reduced) system.

use thiserror::Error;

/// Coefficients of the full three-component system
///
/// ```text
/// eps^2 (u_t + k1 u_x) = -a u + b v + eps^2 c1 w
/// eps^2 (v_t + k2 v_x) =  a u - b v + eps^2 c2 w
///        w_t + k3 w_x  = a3 u + b3 v + c3 w
/// ```
///
/// on `|x| < inf`, `0 <= t <= t_end`, with `0 < epsilon < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Relaxation rate pulling `u` down; must be positive.
    pub a: f64,
    /// Relaxation rate pulling `v` down; must be positive.
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub a3: f64,
    pub b3: f64,
    pub c3: f64,
    /// Small parameter; the fast pair relaxes on the `epsilon^2` time scale.
    pub epsilon: f64,
    /// Time horizon.
    pub t_end: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("relaxation coefficient {name} must be positive (got {value})")]
    NonPositiveRelaxation { name: &'static str, value: f64 },
    #[error("epsilon must lie in (0, 1) (got {0})")]
    BadEpsilon(f64),
    #[error("time horizon T must be positive (got {0})")]
    BadHorizon(f64),
    #[error("parameter {name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
}

/// Parameters that passed [`validate`]. Derefs to [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams {
    p: ModelParams,
}

impl std::ops::Deref for ValidatedParams {
    type Target = ModelParams;
    fn deref(&self) -> &ModelParams {
        &self.p
    }
}

impl ValidatedParams {
    pub fn params(&self) -> &ModelParams {
        &self.p
    }

    /// `epsilon^2`, the relaxation time scale.
    pub fn eps2(&self) -> f64 {
        self.p.epsilon * self.p.epsilon
    }
}

/// Checks the structural assumptions: `a, b > 0` (so the layer factor
/// decays), `epsilon` in `(0, 1)`, `t_end > 0`, everything finite.
pub fn validate(params: ModelParams) -> Result<ValidatedParams, ModelError> {
    let fields: [(&'static str, f64); 12] = [
        ("k1", params.k1),
        ("k2", params.k2),
        ("k3", params.k3),
        ("a", params.a),
        ("b", params.b),
        ("c1", params.c1),
        ("c2", params.c2),
        ("a3", params.a3),
        ("b3", params.b3),
        ("c3", params.c3),
        ("epsilon", params.epsilon),
        ("T", params.t_end),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(ModelError::NonFinite { name, value });
        }
    }
    if params.a <= 0.0 {
        return Err(ModelError::NonPositiveRelaxation {
            name: "a",
            value: params.a,
        });
    }
    if params.b <= 0.0 {
        return Err(ModelError::NonPositiveRelaxation {
            name: "b",
            value: params.b,
        });
    }
    if params.epsilon <= 0.0 || params.epsilon >= 1.0 {
        return Err(ModelError::BadEpsilon(params.epsilon));
    }
    if params.t_end <= 0.0 {
        return Err(ModelError::BadHorizon(params.t_end));
    }
    Ok(ValidatedParams { p: params })
}

/// Constants of the reduced system obtained in the relaxed limit:
///
/// ```text
/// ubar_t + V ubar_x  = C wbar
/// wbar_t + k3 wbar_x = c ubar + c3 wbar
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Effective transport speed of the relaxed pair:
    /// `V = (b k1 + a k2) / (a + b)`. Lies strictly between `k1` and `k2`
    /// when they differ.
    pub v: f64,
    /// Coefficient of `wbar` in the `ubar` equation:
    /// `C = b (c1 + c2) / (a + b)`.
    pub cw: f64,
    /// Coefficient of `ubar` in the `wbar` equation:
    /// `c = (a3 b + a b3) / b`.
    pub cu: f64,
    /// Product `D = C c`.
    pub d: f64,
}

/// Computes the reduced-system constants. Denominators `a + b` and `b`
/// are positive for validated parameters.
pub fn derive_constants(vp: &ValidatedParams) -> DerivedConstants {
    let ab = vp.a + vp.b;
    let v = (vp.b * vp.k1 + vp.a * vp.k2) / ab;
    let cw = vp.b * (vp.c1 + vp.c2) / ab;
    let cu = (vp.a3 * vp.b + vp.a * vp.b3) / vp.b;
    DerivedConstants {
        v,
        cw,
        cu,
        d: cw * cu,
    }
}
