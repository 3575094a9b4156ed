//! Equidistant discretization of the state space ("phase grid").

use crate::scalar::Real;
use crate::state::{StateVec, MAX_DIM};

#[derive(Clone, Copy, Debug)]
struct Axis<S> {
    lo: S,
    hi: S,
    spacing: S,
}

/// Tensor grid of `n_per_dim` cells per state dimension; `u_l` are the cell
/// centers and `du` the cell volume (product of the per-dimension spacings).
#[derive(Clone, Debug)]
pub struct PhaseGrid<S> {
    axes: [Axis<S>; MAX_DIM],
    dim: usize,
    centers: Vec<StateVec<S>>,
    du: S,
}

impl<S: Real> PhaseGrid<S> {
    pub fn new(lo: StateVec<S>, hi: StateVec<S>, n_per_dim: &[usize]) -> Self {
        let dim = lo.dim();
        assert_eq!(hi.dim(), dim);
        assert_eq!(n_per_dim.len(), dim);
        let mut axes =
            [Axis { lo: S::zero(), hi: S::zero(), spacing: S::one() }; MAX_DIM];
        let mut du = S::one();
        for k in 0..dim {
            assert!(n_per_dim[k] >= 1, "need at least one phase cell per dimension");
            assert!(hi[k] > lo[k], "phase box must have positive extent");
            let spacing = (hi[k] - lo[k]) / S::from_usize(n_per_dim[k]).unwrap();
            axes[k] = Axis { lo: lo[k], hi: hi[k], spacing };
            du = du * spacing;
        }
        let len: usize = n_per_dim.iter().product();
        let mut centers = Vec::with_capacity(len);
        for l in 0..len {
            // row-major over dimensions: l = i0 * n1 + i1 for dim 2
            let mut idx = l;
            let mut c = StateVec::zeros(dim);
            for k in (0..dim).rev() {
                let i = idx % n_per_dim[k];
                idx /= n_per_dim[k];
                let center =
                    axes[k].lo + (S::from_usize(i).unwrap() + S::half()) * axes[k].spacing;
                c = match (dim, k) {
                    (1, _) => StateVec::scalar(center),
                    (2, 0) => StateVec::pair(center, c[1]),
                    (2, 1) => StateVec::pair(c[0], center),
                    _ => unreachable!(),
                };
            }
            centers.push(c);
        }
        Self { axes, dim, centers, du }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of phase cells, `N_u^n` for equal per-dimension counts.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Cell volume.
    pub fn du(&self) -> S {
        self.du
    }

    pub fn spacing(&self, k: usize) -> S {
        self.axes[k].spacing
    }

    pub fn lo(&self, k: usize) -> S {
        self.axes[k].lo
    }

    pub fn hi(&self, k: usize) -> S {
        self.axes[k].hi
    }

    pub fn center(&self, l: usize) -> StateVec<S> {
        self.centers[l]
    }

    pub fn centers(&self) -> &[StateVec<S>] {
        &self.centers
    }
}
