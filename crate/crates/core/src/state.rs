//! Small fixed-capacity state vector for scalar (n=1) and 2x2 system (n=2) laws.

use crate::scalar::Real;
use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

pub const MAX_DIM: usize = 2;

/// A point in state space `R^n`, n = 1 or 2. Unused components are zero so
/// that derived equality stays meaningful.
#[derive(Clone, Copy, PartialEq)]
pub struct StateVec<S> {
    comps: [S; MAX_DIM],
    dim: usize,
}

impl<S: Real> StateVec<S> {
    pub fn scalar(a: S) -> Self {
        Self { comps: [a, S::zero()], dim: 1 }
    }

    pub fn pair(a: S, b: S) -> Self {
        Self { comps: [a, b], dim: 2 }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "state dimension must be 1 or 2");
        Self { comps: [S::zero(); MAX_DIM], dim }
    }

    pub fn from_slice(v: &[S]) -> Self {
        let mut out = Self::zeros(v.len());
        out.comps[..v.len()].copy_from_slice(v);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[S] {
        &self.comps[..self.dim]
    }

    /// Value of a 1-D state.
    pub fn value(&self) -> S {
        debug_assert_eq!(self.dim, 1);
        self.comps[0]
    }

    pub fn map<F: Fn(S) -> S>(&self, f: F) -> Self {
        let mut out = *self;
        for c in out.comps[..self.dim].iter_mut() {
            *c = f(*c);
        }
        out
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|c| c * s)
    }

    pub fn abs(&self) -> Self {
        self.map(|c| c.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }

    /// Componentwise max of two states.
    pub fn max(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..self.dim {
            out.comps[k] = out.comps[k].max(other.comps[k]);
        }
        out
    }
}

impl<S: Real> Add for StateVec<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for k in 0..self.dim {
            out.comps[k] = out.comps[k] + rhs.comps[k];
        }
        out
    }
}

impl<S: Real> Sub for StateVec<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self;
        for k in 0..self.dim {
            out.comps[k] = out.comps[k] - rhs.comps[k];
        }
        out
    }
}

impl<S: Real> Mul<S> for StateVec<S> {
    type Output = Self;
    fn mul(self, rhs: S) -> Self {
        self.scale(rhs)
    }
}

impl<S> Index<usize> for StateVec<S> {
    type Output = S;
    fn index(&self, k: usize) -> &S {
        debug_assert!(k < self.dim);
        &self.comps[k]
    }
}

impl<S: fmt::Debug> fmt::Debug for StateVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.comps[..self.dim].iter()).finish()
    }
}
