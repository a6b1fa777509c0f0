use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Smallest grid the library accepts.
pub const MIN_POINTS: usize = 16;

/// Uniform one-dimensional grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    points: Vec<f64>,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(invalid("grid bounds must be finite"));
        }
        if x_min >= x_max {
            return Err(invalid(format!(
                "grid bounds reversed or empty: [{x_min}, {x_max}]"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(invalid(format!(
                "grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        let h = (x_max - x_min) / (n_points - 1) as f64;
        let mut points: Vec<f64> = (0..n_points).map(|i| x_min + i as f64 * h).collect();
        points[n_points - 1] = x_max;
        Ok(Self {
            x_min,
            x_max,
            points,
        })
    }

    /// Grid with a prescribed spacing, extended so that it covers `[x_min, x_max]`.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(invalid("grid spacing must be positive"));
        }
        let cells = ((x_max - x_min) / h).round().max(1.0) as usize;
        Self::new(x_min, x_min + cells as f64 * h, cells + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points.len() - 1) as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the grid point nearest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.spacing()).round();
        t.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Uniform grid made of the points `start..=end` of this one.
    pub fn sub_grid(&self, start: usize, end: usize) -> Result<Self> {
        if end >= self.len() || start >= end {
            return Err(invalid(format!(
                "sub-grid range {start}..={end} outside 0..{}",
                self.len()
            )));
        }
        Self::new(self.points[start], self.points[end], end - start + 1)
    }

    /// Every other point; requires an odd point count so both ends survive.
    pub fn coarsened(&self) -> Result<Self> {
        if self.len().is_multiple_of(2) {
            return Err(invalid("coarsening needs an odd number of points"));
        }
        Self::new(self.x_min, self.x_max, self.len() / 2 + 1)
    }

    /// Halved spacing over the same bounds.
    pub fn refined(&self) -> Self {
        Self::new(self.x_min, self.x_max, 2 * self.len() - 1).expect("refining a valid grid")
    }

    /// The anchor used for antiderivatives: the origin when the grid covers it,
    /// otherwise the left end.
    pub fn default_anchor(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.x_min
        }
    }
}

/// Convenience constructor mirroring the `build_grid` operation.
pub fn build_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Arc<Grid>> {
    Grid::new(x_min, x_max, n_points).map(Arc::new)
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}
