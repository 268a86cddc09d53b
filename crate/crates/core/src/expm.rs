//! Matrix exponentials for 3x3 systems, used as exact ODE references.
//!
//! Two independent routes are provided on purpose:
//!
//! - [`expm_series`]: scaling-and-squaring with a Taylor series, valid for
//!   any real 3x3 matrix (this is the production route);
//! - [`expm_eigen`]: closed-form eigendecomposition through the
//!   characteristic cubic, defined when the eigenvalues are distinct
//!   (used to cross-check the series route).

use nalgebra::{Complex, Matrix3, Vector3};

type C64 = Complex<f64>;
type CMat3 = Matrix3<C64>;
type CVec3 = Vector3<C64>;

fn max_abs_entry(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// One-norm (max column abs sum).
fn one_norm(m: &Matrix3<f64>) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// `e^M` by scaling and squaring: scale `M` until its norm is at most 1/4,
/// sum the Taylor series to machine precision, then square back.
pub fn expm_series(m: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = one_norm(m);
    let s = if norm > 0.25 {
        ((norm / 0.25).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scale = 2.0f64.powi(s);
    let b = m / scale;

    let mut term = Matrix3::<f64>::identity();
    let mut acc = Matrix3::<f64>::identity();
    for k in 1..=40 {
        term = (term * b) / k as f64;
        acc += term;
        if max_abs_entry(&term) <= f64::EPSILON * max_abs_entry(&acc) {
            break;
        }
    }
    let mut result = acc;
    for _ in 0..s {
        result = result * result;
    }
    result
}

/// Complex roots of `x^3 + p x^2 + q x + r` by Cardano's formula. The larger
/// of the two cube-root branches is used to avoid cancellation.
fn cubic_roots(p: f64, q: f64, r: f64) -> [C64; 3] {
    // depressed cubic y^3 + ay + b with x = y - p/3
    let a = q - p * p / 3.0;
    let b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    let shift = C64::new(-p / 3.0, 0.0);

    let disc = C64::new(b * b / 4.0 + a * a * a / 27.0, 0.0);
    let sq = disc.sqrt();
    let cand1 = C64::new(-b / 2.0, 0.0) + sq;
    let cand2 = C64::new(-b / 2.0, 0.0) - sq;
    let u3 = if cand1.norm() >= cand2.norm() {
        cand1
    } else {
        cand2
    };

    if u3.norm() == 0.0 {
        // triple root of the depressed cubic at 0
        return [shift; 3];
    }

    let u = u3.cbrt();
    let omega = C64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [C64::new(0.0, 0.0); 3];
    let mut uk = u;
    for slot in roots.iter_mut() {
        let y = uk - C64::new(a / 3.0, 0.0) / uk;
        *slot = y + shift;
        uk *= omega;
    }
    roots
}

/// Eigenvalues of a real 3x3 matrix via its characteristic cubic.
pub fn eigenvalues3(m: &Matrix3<f64>) -> [C64; 3] {
    let tr = m.trace();
    // sum of principal 2x2 minors
    let m2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    let det = m.determinant();
    // det(M - xI) = 0  <=>  x^3 - tr x^2 + m2 x - det = 0
    cubic_roots(-tr, m2, -det)
}

fn complex_cross(a: &CVec3, b: &CVec3) -> CVec3 {
    CVec3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

/// Null vector of `M - lambda I` via the largest cross product of its rows.
fn eigenvector(m: &CMat3, lambda: C64) -> Option<CVec3> {
    let shifted = m - CMat3::identity() * lambda;
    let rows: [CVec3; 3] = [
        CVec3::new(shifted[(0, 0)], shifted[(0, 1)], shifted[(0, 2)]),
        CVec3::new(shifted[(1, 0)], shifted[(1, 1)], shifted[(1, 2)]),
        CVec3::new(shifted[(2, 0)], shifted[(2, 1)], shifted[(2, 2)]),
    ];
    let candidates = [
        complex_cross(&rows[0], &rows[1]),
        complex_cross(&rows[0], &rows[2]),
        complex_cross(&rows[1], &rows[2]),
    ];
    let best = candidates
        .into_iter()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())?;
    let n = best.norm();
    if n < 1e-300 {
        return None;
    }
    Some(best / C64::new(n, 0.0))
}

/// `e^M` by eigendecomposition. Returns `None` when the eigenvalues are not
/// clearly distinct (the decomposition may then be defective) or when the
/// eigenvector matrix fails to invert.
pub fn expm_eigen(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let lambdas = eigenvalues3(m);
    let scale = lambdas
        .iter()
        .map(|l| l.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (lambdas[i] - lambdas[j]).norm() < 1e-8 * scale {
                return None;
            }
        }
    }

    let mc = m.map(|x| C64::new(x, 0.0));
    let v0 = eigenvector(&mc, lambdas[0])?;
    let v1 = eigenvector(&mc, lambdas[1])?;
    let v2 = eigenvector(&mc, lambdas[2])?;
    let vmat = CMat3::from_columns(&[v0, v1, v2]);
    let vinv = vmat.try_inverse()?;
    let diag = CMat3::from_diagonal(&CVec3::new(
        lambdas[0].exp(),
        lambdas[1].exp(),
        lambdas[2].exp(),
    ));
    let exp = vmat * diag * vinv;

    // a real matrix must come back; large imaginary parts mean the
    // decomposition went numerically bad
    let max_re = exp.iter().fold(0.0f64, |acc, z| acc.max(z.re.abs()));
    let max_im = exp.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    if max_im > 1e-8 * max_re.max(1.0) {
        return None;
    }
    Some(exp.map(|z| z.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix3<f64>, b: &Matrix3<f64>, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Matrix3::zeros();
        assert_eq!(expm_series(&z), Matrix3::identity());
    }

    #[test]
    fn exp_of_diagonal() {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 2.0, -0.5));
        let e = expm_series(&m);
        let want = Matrix3::from_diagonal(&nalgebra::Vector3::new(
            1f64.exp(),
            2f64.exp(),
            (-0.5f64).exp(),
        ));
        assert!(close(&e, &want, 1e-13));
    }

    #[test]
    fn exp_of_nilpotent_truncates() {
        let mut n = Matrix3::zeros();
        n[(0, 1)] = 1.0;
        n[(1, 2)] = 1.0;
        let e = expm_series(&n);
        let mut want = Matrix3::identity();
        want[(0, 1)] = 1.0;
        want[(1, 2)] = 1.0;
        want[(0, 2)] = 0.5;
        assert!(close(&e, &want, 1e-15));
    }

    #[test]
    fn exp_of_rotation_block() {
        let mut m = Matrix3::zeros();
        m[(0, 1)] = -1.0;
        m[(1, 0)] = 1.0;
        let e = expm_series(&m);
        let (s, c) = 1.0f64.sin_cos();
        assert!((e[(0, 0)] - c).abs() < 1e-14);
        assert!((e[(0, 1)] + s).abs() < 1e-14);
        assert!((e[(1, 0)] - s).abs() < 1e-14);
        assert!((e[(1, 1)] - c).abs() < 1e-14);
        assert!((e[(2, 2)] - 1.0).abs() < 1e-14);

        // complex eigenvalues are distinct, so the eigen route must agree
        let ee = expm_eigen(&m).expect("distinct eigenvalues");
        assert!(close(&e, &ee, 1e-11));
    }

    #[test]
    fn eigen_route_rejects_defective_matrix() {
        let mut n = Matrix3::zeros();
        n[(0, 1)] = 1.0; // triple eigenvalue 0, defective
        assert!(expm_eigen(&n).is_none());
    }

    #[test]
    fn cubic_with_known_roots() {
        // (x - 1)(x - 2)(x + 3) = x^3 - 7x + 6
        let roots = cubic_roots(0.0, -7.0, 6.0);
        let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 3.0).abs() < 1e-12);
        assert!((re[1] - 1.0).abs() < 1e-12);
        assert!((re[2] - 2.0).abs() < 1e-12);
        for z in roots {
            assert!(z.im.abs() < 1e-12);
        }
    }
}
