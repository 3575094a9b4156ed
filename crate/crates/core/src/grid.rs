//! Spatial and random-space grids.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Zero-order extrapolation: ghost cells copy the nearest interior cell.
    Free,
    Periodic,
}

#[derive(Clone, Copy, Debug)]
pub struct SpatialGrid<S> {
    pub x_lo: S,
    pub x_hi: S,
    pub n_x: usize,
    pub boundary: Boundary,
}

impl<S: Real> SpatialGrid<S> {
    pub fn new(x_lo: S, x_hi: S, n_x: usize, boundary: Boundary) -> Self {
        assert!(n_x >= 3, "need at least 3 spatial cells");
        assert!(x_hi > x_lo);
        Self { x_lo, x_hi, n_x, boundary }
    }

    pub fn dx(&self) -> S {
        (self.x_hi - self.x_lo) / S::from_usize(self.n_x).unwrap()
    }

    /// Cell center; `j` may be -1 or `n_x` for ghost cells.
    pub fn center(&self, j: i64) -> S {
        self.x_lo + (S::from_i64(j).unwrap() + S::half()) * self.dx()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RandomGrid<S> {
    pub xi_lo: S,
    pub xi_hi: S,
    pub n_xi: usize,
}

impl<S: Real> RandomGrid<S> {
    pub fn new(xi_lo: S, xi_hi: S, n_xi: usize) -> Self {
        assert!(n_xi >= 1, "need at least one random cell");
        assert!(xi_hi > xi_lo);
        Self { xi_lo, xi_hi, n_xi }
    }

    pub fn dxi(&self) -> S {
        (self.xi_hi - self.xi_lo) / S::from_usize(self.n_xi).unwrap()
    }

    pub fn center(&self, i: usize) -> S {
        self.xi_lo + (S::from_usize(i).unwrap() + S::half()) * self.dxi()
    }

    /// Density of the uniform distribution on the xi-domain.
    pub fn p0(&self) -> S {
        S::one() / (self.xi_hi - self.xi_lo)
    }
}
