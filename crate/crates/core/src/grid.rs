//! Uniform one-dimensional cell-centered grid.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid bounds must satisfy x_min < x_max (got [{x_min}, {x_max}])")]
    BadBounds { x_min: f64, x_max: f64 },
    #[error("grid needs at least 2 cells (got {0})")]
    TooFewCells(usize),
    #[error("grid bounds must be finite")]
    NonFinite,
}

/// Uniform grid of `n_cells` cells on `[x_min, x_max]`; field values live at
/// cell centers `x_j = x_min + (j + 1/2) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self, GridError> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(GridError::NonFinite);
        }
        if x_min >= x_max {
            return Err(GridError::BadBounds { x_min, x_max });
        }
        if n_cells < 2 {
            return Err(GridError::TooFewCells(n_cells));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        Ok(Grid1D {
            x_min,
            x_max,
            n_cells,
            dx,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center of cell `j`.
    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    /// A grid on the same interval with twice the cells.
    pub fn refined(&self) -> Grid1D {
        Grid1D::new(self.x_min, self.x_max, 2 * self.n_cells).expect("refinement keeps validity")
    }
}
