//! Entropy-minimization closure over discretized Young measures.
//!
//! For a moment (conditional mean) `m` and a phase grid with centers `u_l` and
//! cell volume `du`, the closure solves
//!
//! ```text
//!     minimize    du * sum_l eta(u_l) nu_l
//!     subject to  0 <= nu_l <= lambda_F / du
//!                 du * sum_l nu_l = 1
//!                 du * sum_l u_l nu_l = m     (componentwise; optionally a
//!                                              +-spacing band per component)
//! ```
//!
//! and measures expectations of flux, wave speed and entropy against the
//! minimizing weights.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpSolution, LpStatus, SolverOptions};
use crate::model::{EntropyChoice, ModelSpec};
use crate::phase::PhaseGrid;
use crate::scalar::Real;
use crate::state::StateVec;

/// Nonnegative weights (units 1/volume) over the phase grid at one (i, j).
#[derive(Clone, Debug)]
pub struct YoungMeasureSlice<S> {
    pub weights: Vec<S>,
}

impl<S: Real> YoungMeasureSlice<S> {
    /// Number of cells carrying more than `tol` weight.
    pub fn support_size(&self, tol: S) -> usize {
        self.weights.iter().filter(|&&w| w > tol).count()
    }

    /// Mean of the measure, `du * sum u_l w_l`.
    pub fn mean(&self, grid: &PhaseGrid<S>) -> StateVec<S> {
        let mut m = StateVec::zeros(grid.dim());
        for (l, &w) in self.weights.iter().enumerate() {
            if w != S::zero() {
                m = m + grid.center(l).scale(w);
            }
        }
        m.scale(grid.du())
    }

    /// Checks nonnegativity, normalization and the support cap.
    pub fn validate(&self, grid: &PhaseGrid<S>, lambda_f: S, tol: S) -> Result<()> {
        if self.weights.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "slice has {} weights, phase grid {} cells",
                self.weights.len(),
                grid.len()
            )));
        }
        let cap = lambda_f / grid.du();
        let mut mass = S::zero();
        for (l, &w) in self.weights.iter().enumerate() {
            if w < -tol || w > cap + tol {
                return Err(Error::Config(format!("weight {l} = {w} outside [0, {cap}]")));
            }
            mass = mass + w;
        }
        mass = mass * grid.du();
        if (mass - S::one()).abs() > tol {
            return Err(Error::Config(format!("slice mass {mass} != 1")));
        }
        Ok(())
    }
}

/// Closure parameters: support cap factor, moment-row relaxation, entropy.
#[derive(Clone, Debug)]
pub struct ClosureConfig<S> {
    /// In (0, 1]; each weight is capped by `lambda_F / du`.
    pub lambda_f: S,
    /// Replace the moment equalities by a +-spacing band per component.
    pub relax_band: bool,
    pub entropy: EntropyChoice<S>,
}

impl<S: Real> ClosureConfig<S> {
    pub fn new(entropy: EntropyChoice<S>) -> Self {
        Self { lambda_f: S::one(), relax_band: false, entropy }
    }

    pub fn validate(&self, grid: &PhaseGrid<S>) -> Result<()> {
        if !(self.lambda_f > S::zero() && self.lambda_f <= S::one()) {
            return Err(Error::Config(format!("lambda_F = {} not in (0, 1]", self.lambda_f)));
        }
        // Total mass capacity (lambda_F/du per cell times L cells times du)
        // must reach the normalization target.
        let capacity = self.lambda_f * S::from_usize(grid.len()).unwrap();
        if capacity < S::one() - S::lit(1e-9) {
            return Err(Error::Config(format!(
                "lambda_F * L = {capacity} < 1: normalization row infeasible"
            )));
        }
        Ok(())
    }
}

/// Reusable LP skeleton for one (model, grid, config): the cost vector and
/// constraint matrix never change between moments, only the moment-row
/// targets do.
#[derive(Clone, Debug)]
pub struct ClosureTemplate<S> {
    problem: LpProblem<S>,
    dim: usize,
    du: S,
    band: Option<[S; 2]>,
    opts: SolverOptions<S>,
}

impl<S: Real> ClosureTemplate<S> {
    pub fn new(model: &ModelSpec<S>, grid: &PhaseGrid<S>, cfg: &ClosureConfig<S>) -> Result<Self> {
        cfg.validate(grid)?;
        cfg.entropy.validate(model).map_err(Error::Config)?;
        let l = grid.len();
        let n = grid.dim();
        let du = grid.du();
        let cap = cfg.lambda_f / du;

        let cost: Vec<S> = grid.centers().iter().map(|&u| du * cfg.entropy.eval(u)).collect();
        let mut eq_matrix = Vec::with_capacity((1 + n) * l);
        eq_matrix.extend(std::iter::repeat(du).take(l));
        for k in 0..n {
            eq_matrix.extend(grid.centers().iter().map(|&u| du * u[k]));
        }
        let mut eq_lo = vec![S::one()];
        let mut eq_hi = vec![S::one()];
        eq_lo.extend(std::iter::repeat(S::zero()).take(n));
        eq_hi.extend(std::iter::repeat(S::zero()).take(n));

        let band = if cfg.relax_band {
            let mut b = [S::zero(); 2];
            for k in 0..n {
                b[k] = grid.spacing(k);
            }
            Some(b)
        } else {
            None
        };

        Ok(Self {
            problem: LpProblem {
                cost,
                lower: vec![S::zero(); l],
                upper: vec![cap; l],
                eq_matrix,
                eq_lo,
                eq_hi,
            },
            dim: n,
            du,
            band,
            opts: SolverOptions::default(),
        })
    }

    fn set_moment(&mut self, moment: StateVec<S>) {
        for k in 0..self.dim {
            let (lo, hi) = match self.band {
                Some(b) => (moment[k] - b[k], moment[k] + b[k]),
                None => (moment[k], moment[k]),
            };
            self.problem.eq_lo[1 + k] = lo;
            self.problem.eq_hi[1 + k] = hi;
        }
    }

    /// Solve for one moment. Returns the weights and the LP objective
    /// `du * sum eta(u_l) nu_l`.
    pub fn solve(&mut self, moment: StateVec<S>) -> Result<(YoungMeasureSlice<S>, S)> {
        if !moment.is_finite() {
            return Err(Error::Config(format!("non-finite moment {moment:?}")));
        }
        self.set_moment(moment);
        let sol: LpSolution<S> = solve_lp(&self.problem, &self.opts)?;
        match sol.status {
            LpStatus::Optimal => Ok((YoungMeasureSlice { weights: sol.x }, sol.objective)),
            LpStatus::Infeasible => Err(Error::ClosureInfeasible {
                moment: format!("{moment:?}"),
                cell: String::new(),
            }),
            status => Err(Error::ClosureFailed {
                status,
                moment: format!("{moment:?}"),
                cell: String::new(),
            }),
        }
    }

    pub fn du(&self) -> S {
        self.du
    }
}

/// Minimize entropy subject to the moment constraint at one (i, j).
pub fn solve_closure<S: Real>(
    moment: StateVec<S>,
    model: &ModelSpec<S>,
    grid: &PhaseGrid<S>,
    cfg: &ClosureConfig<S>,
) -> Result<YoungMeasureSlice<S>> {
    let mut t = ClosureTemplate::new(model, grid, cfg)?;
    t.solve(moment).map(|(slice, _)| slice)
}

/// Measure expectation of the flux, `du * sum f(u_l; x) w_l`.
pub fn closure_flux<S: Real>(
    slice: &YoungMeasureSlice<S>,
    grid: &PhaseGrid<S>,
    model: &ModelSpec<S>,
    x: S,
) -> StateVec<S> {
    let mut f = StateVec::zeros(grid.dim());
    for (l, &w) in slice.weights.iter().enumerate() {
        if w != S::zero() {
            f = f + model.flux(grid.center(l), x).scale(w);
        }
    }
    f.scale(grid.du())
}

/// Measure expectation of the spectral radius (CFL speed).
pub fn expected_speed<S: Real>(
    slice: &YoungMeasureSlice<S>,
    grid: &PhaseGrid<S>,
    model: &ModelSpec<S>,
) -> S {
    let mut s = S::zero();
    for (l, &w) in slice.weights.iter().enumerate() {
        if w != S::zero() {
            s = s + model.spectral_radius(grid.center(l)) * w;
        }
    }
    s * grid.du()
}

/// Measure expectation of the entropy (the per-cell LP objective).
pub fn measure_entropy<S: Real>(
    slice: &YoungMeasureSlice<S>,
    grid: &PhaseGrid<S>,
    entropy: &EntropyChoice<S>,
) -> S {
    let mut s = S::zero();
    for (l, &w) in slice.weights.iter().enumerate() {
        if w != S::zero() {
            s = s + entropy.eval(grid.center(l)) * w;
        }
    }
    s * grid.du()
}

/// Solve the joint LP over all (i, l) unknowns at once. Equivalent to the
/// per-i decomposition; provided for testing that equivalence. Returns the
/// slices and the joint objective, which carries the `p0 * dxi = 1/N_xi`
/// quadrature factor per block.
pub fn solve_joint_closure<S: Real>(
    moments: &[StateVec<S>],
    model: &ModelSpec<S>,
    grid: &PhaseGrid<S>,
    cfg: &ClosureConfig<S>,
) -> Result<(Vec<YoungMeasureSlice<S>>, S)> {
    cfg.validate(grid)?;
    cfg.entropy.validate(model).map_err(Error::Config)?;
    let n_xi = moments.len();
    assert!(n_xi >= 1);
    let l = grid.len();
    let n = grid.dim();
    let du = grid.du();
    let cap = cfg.lambda_f / du;
    let block_weight = S::one() / S::from_usize(n_xi).unwrap(); // p0 * dxi

    let nv = n_xi * l;
    let nr = n_xi * (1 + n);
    let mut cost = Vec::with_capacity(nv);
    for _ in 0..n_xi {
        cost.extend(grid.centers().iter().map(|&u| block_weight * du * cfg.entropy.eval(u)));
    }
    let mut eq_matrix = vec![S::zero(); nr * nv];
    let mut eq_lo = vec![S::zero(); nr];
    let mut eq_hi = vec![S::zero(); nr];
    for i in 0..n_xi {
        let row0 = i * (1 + n);
        for ll in 0..l {
            eq_matrix[row0 * nv + i * l + ll] = du;
        }
        eq_lo[row0] = S::one();
        eq_hi[row0] = S::one();
        for k in 0..n {
            let row = row0 + 1 + k;
            for ll in 0..l {
                eq_matrix[row * nv + i * l + ll] = du * grid.center(ll)[k];
            }
            let (lo, hi) = if cfg.relax_band {
                (moments[i][k] - grid.spacing(k), moments[i][k] + grid.spacing(k))
            } else {
                (moments[i][k], moments[i][k])
            };
            eq_lo[row] = lo;
            eq_hi[row] = hi;
        }
    }

    let problem = LpProblem {
        cost,
        lower: vec![S::zero(); nv],
        upper: vec![cap; nv],
        eq_matrix,
        eq_lo,
        eq_hi,
    };
    let sol = solve_lp(&problem, &SolverOptions::default())?;
    match sol.status {
        LpStatus::Optimal => {
            let slices = (0..n_xi)
                .map(|i| YoungMeasureSlice { weights: sol.x[i * l..(i + 1) * l].to_vec() })
                .collect();
            Ok((slices, sol.objective))
        }
        LpStatus::Infeasible => Err(Error::ClosureInfeasible {
            moment: format!("{moments:?}"),
            cell: String::new(),
        }),
        status => Err(Error::ClosureFailed {
            status,
            moment: format!("{moments:?}"),
            cell: String::new(),
        }),
    }
}
