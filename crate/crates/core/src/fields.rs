//! Discrete solution state: one value of each component per grid cell.

/// The three solution components sampled at cell centers at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTriple {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// Time stamp of the snapshot.
    pub t: f64,
}

impl FieldTriple {
    pub fn zeros(n: usize, t: f64) -> Self {
        FieldTriple {
            u: vec![0.0; n],
            v: vec![0.0; n],
            w: vec![0.0; n],
            t,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// All three arrays the same length and every entry finite.
    pub fn all_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.w.iter().all(|x| x.is_finite())
    }

    pub fn same_shape(&self, other: &FieldTriple) -> bool {
        self.u.len() == other.u.len()
            && self.v.len() == other.v.len()
            && self.w.len() == other.w.len()
    }
}

/// Largest absolute entry of a slice (0 for an empty slice).
pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_check_catches_nan() {
        let mut f = FieldTriple::zeros(4, 0.0);
        assert!(f.all_finite());
        f.v[2] = f64::NAN;
        assert!(!f.all_finite());
    }

    #[test]
    fn max_abs_basics() {
        assert_eq!(max_abs(&[]), 0.0);
        assert_eq!(max_abs(&[-3.0, 2.0]), 3.0);
    }
}
