//! The evolved unknowns: conditional means over (xi-cell, x-cell) pairs.

use crate::model::ModelSpec;
use crate::scalar::Real;
use crate::state::StateVec;

/// Array of moments `u_{i,j}` (xi-cell i, x-cell j) at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentField<S> {
    values: Vec<StateVec<S>>,
    n_xi: usize,
    n_x: usize,
    pub time: S,
}

impl<S: Real> MomentField<S> {
    pub fn new(n_xi: usize, n_x: usize, fill: StateVec<S>) -> Self {
        Self { values: vec![fill; n_xi * n_x], n_xi, n_x, time: S::zero() }
    }

    pub fn n_xi(&self) -> usize {
        self.n_xi
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn get(&self, i: usize, j: usize) -> StateVec<S> {
        self.values[i * self.n_x + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: StateVec<S>) {
        self.values[i * self.n_x + j] = v;
    }

    pub fn values(&self) -> &[StateVec<S>] {
        &self.values
    }

    /// First (i, j) holding a non-finite entry, if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.n_x, p % self.n_x))
    }

    /// Largest spectral radius over all grid samples.
    pub fn max_wave_speed(&self, model: &ModelSpec<S>) -> S {
        self.values
            .iter()
            .map(|&u| model.spectral_radius(u))
            .fold(S::zero(), |a, b| a.max(b))
    }

    /// Spatial sum per xi-cell (conservation diagnostics).
    pub fn spatial_sums(&self) -> Vec<StateVec<S>> {
        (0..self.n_xi)
            .map(|i| {
                (0..self.n_x)
                    .map(|j| self.get(i, j))
                    .fold(StateVec::zeros(self.dim()), |a, b| a + b)
            })
            .collect()
    }
}
