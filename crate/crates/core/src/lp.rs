//! Dense linear programs with box-bounded variables and equality or interval
//! row constraints, solved by a two-phase bounded-variable revised simplex
//! method.
//!
//! The problem form is
//!
//! ```text
//!     minimize    cost . x
//!     subject to  eq_lo <= eq_matrix x <= eq_hi     (eq_lo = eq_hi: equality)
//!                 lower <= x <= upper
//! ```
//!
//! Design notes:
//! - Bland's rule (lowest eligible index) for both entering and leaving
//!   variables: no cycling, and the returned minimizer is a deterministic
//!   function of the input, bitwise reproducible across runs.
//! - Phase 1 uses a crash basis of row slacks plus one artificial variable per
//!   violated row; phase 2 fixes the artificials at zero.
//! - Basic values are recomputed from the factored basis every iteration, so
//!   no incremental drift accumulates.
//! - Every `Optimal` result is certified through [`check_kkt`]; if the
//!   residuals miss the tolerances the status is downgraded.

use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

/// Box-and-rows LP data. `eq_matrix` is dense row-major, R rows by V columns.
#[derive(Clone, Debug)]
pub struct LpProblem<S> {
    pub cost: Vec<S>,
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    pub eq_matrix: Vec<S>,
    pub eq_lo: Vec<S>,
    pub eq_hi: Vec<S>,
}

impl<S: Real> LpProblem<S> {
    pub fn n_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn n_rows(&self) -> usize {
        self.eq_lo.len()
    }

    pub fn row(&self, r: usize) -> &[S] {
        let v = self.n_vars();
        &self.eq_matrix[r * v..(r + 1) * v]
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let v = self.n_vars();
        let r = self.n_rows();
        if v == 0 || r == 0 {
            return Err(LpError::InvalidProblem("need V >= 1 and R >= 1".into()));
        }
        if self.lower.len() != v || self.upper.len() != v {
            return Err(LpError::DimensionMismatch(format!(
                "bounds have lengths {}/{}, expected {v}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.eq_hi.len() != r || self.eq_matrix.len() != r * v {
            return Err(LpError::DimensionMismatch(format!(
                "rows: lo {}, hi {}, matrix {} entries, expected {r} rows x {v} cols",
                self.eq_lo.len(),
                self.eq_hi.len(),
                self.eq_matrix.len()
            )));
        }
        for (k, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !l.is_finite() {
                return Err(LpError::InvalidProblem(format!("lower[{k}] must be finite")));
            }
            if u.is_nan() || u < l {
                return Err(LpError::InvalidProblem(format!("need lower[{k}] <= upper[{k}]")));
            }
        }
        for (r, (&lo, &hi)) in self.eq_lo.iter().zip(&self.eq_hi).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(LpError::InvalidProblem(format!("row {r}: need finite eq_lo <= eq_hi")));
            }
        }
        if self.cost.iter().any(|c| !c.is_finite())
            || self.eq_matrix.iter().any(|a| !a.is_finite())
        {
            return Err(LpError::InvalidProblem("non-finite cost or matrix entry".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub objective: S,
    pub status: LpStatus,
    pub primal_residual: S,
    pub dual_residual: S,
    pub complementarity: S,
    /// Row multipliers at the final basis (phase-2 cost).
    pub row_duals: Vec<S>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<S> {
    pub tol_feas: S,
    pub tol_gap: S,
    /// Pivot budget; `None` means 10 * (V + R).
    pub max_iter: Option<usize>,
}

impl<S: Real> Default for SolverOptions<S> {
    fn default() -> Self {
        Self { tol_feas: S::lit(1e-9), tol_gap: S::lit(1e-9), max_iter: None }
    }
}

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting for the (tiny) basis matrices.

struct Lu<S> {
    m: Vec<S>,
    perm: Vec<usize>,
    n: usize,
}

impl<S: Real> Lu<S> {
    /// Factor a dense column-major n x n matrix. Returns `None` if singular.
    fn factor(a: &[S], n: usize) -> Option<Self> {
        let mut m = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = m[perm[k] + k * n].abs();
            for r in (k + 1)..n {
                let cand = m[perm[r] + k * n].abs();
                if cand > best {
                    best = cand;
                    p = r;
                }
            }
            if !(best > S::lit(1e-13)) {
                return None;
            }
            perm.swap(k, p);
            let pk = perm[k];
            let piv = m[pk + k * n];
            for r in (k + 1)..n {
                let pr = perm[r];
                let f = m[pr + k * n] / piv;
                m[pr + k * n] = f;
                for c in (k + 1)..n {
                    let sub = f * m[pk + c * n];
                    m[pr + c * n] = m[pr + c * n] - sub;
                }
            }
        }
        Some(Self { m, perm, n })
    }

    /// Solve `A x = b` in place (b in original row order).
    fn solve(&self, b: &mut [S]) {
        let n = self.n;
        let mut y = vec![S::zero(); n];
        for k in 0..n {
            let mut s = b[self.perm[k]];
            for c in 0..k {
                s = s - self.m[self.perm[k] + c * n] * y[c];
            }
            y[k] = s;
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in (k + 1)..n {
                s = s - self.m[self.perm[k] + c * n] * b[c];
            }
            b[k] = s / self.m[self.perm[k] + k * n];
        }
    }

    /// Solve `A^T x = b` in place.
    fn solve_t(&self, b: &mut [S]) {
        let n = self.n;
        // A^T = (P^T L U)^T = U^T L^T P, so forward with U^T, back with L^T,
        // then undo the row permutation.
        let mut y = vec![S::zero(); n];
        for k in 0..n {
            let mut s = b[k];
            for c in 0..k {
                s = s - self.m[self.perm[c] + k * n] * y[c];
            }
            y[k] = s / self.m[self.perm[k] + k * n];
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in (k + 1)..n {
                s = s - self.m[self.perm[c] + k * n] * y[c];
            }
            y[k] = s;
        }
        for k in 0..n {
            b[self.perm[k]] = y[k];
        }
    }
}

// ---------------------------------------------------------------------------
// Simplex state over the augmented column set [structural | slack | artificial].

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Pos {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau<'a, S> {
    p: &'a LpProblem<S>,
    nv: usize,
    nr: usize,
    /// Artificial column signs, one per row.
    art_sign: Vec<S>,
    lower: Vec<S>,
    upper: Vec<S>,
    x: Vec<S>,
    pos: Vec<Pos>,
    basis: Vec<usize>,
}

impl<'a, S: Real> Tableau<'a, S> {
    fn n_cols(&self) -> usize {
        self.nv + 2 * self.nr
    }

    /// Entry (r, j) of the augmented constraint matrix [A | -I | diag(sign)].
    fn coeff(&self, r: usize, j: usize) -> S {
        if j < self.nv {
            self.p.eq_matrix[r * self.nv + j]
        } else if j < self.nv + self.nr {
            if j - self.nv == r {
                -S::one()
            } else {
                S::zero()
            }
        } else if j - self.nv - self.nr == r {
            self.art_sign[r]
        } else {
            S::zero()
        }
    }

    fn col_dot(&self, y: &[S], j: usize) -> S {
        if j < self.nv {
            let mut s = S::zero();
            for r in 0..self.nr {
                s = s + y[r] * self.p.eq_matrix[r * self.nv + j];
            }
            s
        } else if j < self.nv + self.nr {
            -y[j - self.nv]
        } else {
            y[j - self.nv - self.nr] * self.art_sign[j - self.nv - self.nr]
        }
    }

    fn factor_basis(&self) -> Option<Lu<S>> {
        let n = self.nr;
        let mut b = vec![S::zero(); n * n];
        for (slot, &j) in self.basis.iter().enumerate() {
            for r in 0..n {
                b[r + slot * n] = self.coeff(r, j);
            }
        }
        Lu::factor(&b, n)
    }

    /// Recompute basic values exactly: B x_B = -N x_N.
    fn refresh_basics(&mut self, lu: &Lu<S>) {
        let mut rhs = vec![S::zero(); self.nr];
        for j in 0..self.n_cols() {
            if matches!(self.pos[j], Pos::Basic(_)) || self.x[j] == S::zero() {
                continue;
            }
            let xj = self.x[j];
            for r in 0..self.nr {
                let a = self.coeff(r, j);
                if a != S::zero() {
                    rhs[r] = rhs[r] - a * xj;
                }
            }
        }
        lu.solve(&mut rhs);
        for (slot, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[slot];
        }
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
    SingularBasis,
}

fn run_phase<S: Real>(
    t: &mut Tableau<'_, S>,
    cost: &[S],
    tol: S,
    max_iter: usize,
    iters: &mut usize,
) -> PhaseEnd {
    let ray_tol = S::lit(1e-11);
    // Dantzig pricing with lowest-index tie-breaking; after a long degenerate
    // streak switch to pure Bland to rule out cycling.
    let mut bland = false;
    let mut degenerate_streak = 0usize;
    let streak_limit = 2 * (t.n_cols() + t.nr);
    loop {
        let lu = match t.factor_basis() {
            Some(lu) => lu,
            None => return PhaseEnd::SingularBasis,
        };
        t.refresh_basics(&lu);

        let mut y = vec![S::zero(); t.nr];
        for (slot, &j) in t.basis.iter().enumerate() {
            y[slot] = cost[j];
        }
        lu.solve_t(&mut y);

        let mut entering = None;
        let mut best_violation = tol;
        for j in 0..t.n_cols() {
            let up = match t.pos[j] {
                Pos::Basic(_) => continue,
                Pos::AtLower => true,
                Pos::AtUpper => false,
            };
            if t.upper[j] - t.lower[j] <= S::zero() {
                continue; // fixed variable
            }
            let z = cost[j] - t.col_dot(&y, j);
            let violation = if up { -z } else { z };
            if violation > best_violation {
                entering = Some((j, up));
                if bland {
                    break;
                }
                best_violation = violation;
            }
        }
        let (e, up) = match entering {
            Some(v) => v,
            None => return PhaseEnd::Optimal,
        };

        if *iters >= max_iter {
            return PhaseEnd::IterationLimit;
        }
        *iters += 1;

        // Direction of basic values as the entering variable moves by +t
        // (or -t when leaving its upper bound): x_B changes by -delta * t * d.
        let mut d = vec![S::zero(); t.nr];
        for r in 0..t.nr {
            d[r] = t.coeff(r, e);
        }
        lu.solve(&mut d);
        let delta = if up { S::one() } else { -S::one() };

        // Ratio test; Bland tie-break on the leaving variable index.
        let flip = t.upper[e] - t.lower[e]; // may be +inf
        let mut t_best = flip;
        let mut leave: Option<(usize, bool)> = None; // (slot, leaves_at_lower)
        for (slot, &bj) in t.basis.iter().enumerate() {
            let rate = -(delta * d[slot]); // d/dt of x[bj]
            let (limit, at_lower) = if rate > ray_tol {
                if t.upper[bj].is_finite() {
                    ((t.upper[bj] - t.x[bj]) / rate, false)
                } else {
                    continue;
                }
            } else if rate < -ray_tol {
                ((t.x[bj] - t.lower[bj]) / -rate, true)
            } else {
                continue;
            };
            let limit = limit.max(S::zero());
            let better = match leave {
                None => limit < t_best,
                Some((cur_slot, _)) => {
                    limit < t_best
                        || (limit == t_best && bj < t.basis[cur_slot])
                }
            };
            if better {
                t_best = limit;
                leave = Some((slot, at_lower));
            }
        }

        if t_best.is_infinite() {
            return PhaseEnd::Unbounded;
        }
        if t_best <= S::zero() {
            degenerate_streak += 1;
            if degenerate_streak > streak_limit {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
        }

        match leave {
            None => {
                // Bound flip, no basis change.
                t.x[e] = if up { t.upper[e] } else { t.lower[e] };
                t.pos[e] = if up { Pos::AtUpper } else { Pos::AtLower };
            }
            Some((slot, at_lower)) => {
                let b_out = t.basis[slot];
                t.x[e] = (if up { t.lower[e] } else { t.upper[e] }) + delta * t_best;
                t.x[b_out] = if at_lower { t.lower[b_out] } else { t.upper[b_out] };
                t.pos[b_out] = if at_lower { Pos::AtLower } else { Pos::AtUpper };
                t.pos[e] = Pos::Basic(slot);
                t.basis[slot] = e;
            }
        }
    }
}

/// Solve the LP. Deterministic: identical inputs produce bitwise-identical
/// outputs.
pub fn solve_lp<S: Real>(
    problem: &LpProblem<S>,
    opts: &SolverOptions<S>,
) -> Result<LpSolution<S>, LpError> {
    problem.validate()?;
    let nv = problem.n_vars();
    let nr = problem.n_rows();
    let max_iter = opts.max_iter.unwrap_or(10 * (nv + nr));
    let tol = opts.tol_feas;

    let n_cols = nv + 2 * nr;
    let mut lower = Vec::with_capacity(n_cols);
    let mut upper = Vec::with_capacity(n_cols);
    lower.extend_from_slice(&problem.lower);
    upper.extend_from_slice(&problem.upper);
    lower.extend_from_slice(&problem.eq_lo);
    upper.extend_from_slice(&problem.eq_hi);
    lower.extend(std::iter::repeat(S::zero()).take(nr));
    upper.extend(std::iter::repeat(S::infinity()).take(nr));

    let mut x = vec![S::zero(); n_cols];
    let mut pos = vec![Pos::AtLower; n_cols];
    for j in 0..nv {
        x[j] = problem.lower[j];
    }

    // Crash basis: slack where the all-at-lower activity is in range,
    // artificial otherwise.
    let mut art_sign = vec![S::one(); nr];
    let mut basis = Vec::with_capacity(nr);
    let mut any_artificial = false;
    for r in 0..nr {
        let mut act = S::zero();
        for j in 0..nv {
            act = act + problem.eq_matrix[r * nv + j] * x[j];
        }
        let (lo, hi) = (problem.eq_lo[r], problem.eq_hi[r]);
        let slack = nv + r;
        let art = nv + nr + r;
        if act >= lo && act <= hi {
            basis.push(slack);
            pos[slack] = Pos::Basic(r);
            x[slack] = act;
            x[art] = S::zero();
        } else {
            let s0 = if act < lo { lo } else { hi };
            x[slack] = s0;
            pos[slack] = if act < lo { Pos::AtLower } else { Pos::AtUpper };
            let resid = act - s0;
            art_sign[r] = if resid >= S::zero() { -S::one() } else { S::one() };
            // row: A x - s + sign * a = 0  =>  a = (s - A x) / sign = |resid|
            x[art] = resid.abs();
            basis.push(art);
            pos[art] = Pos::Basic(r);
            any_artificial = true;
        }
    }

    let mut t = Tableau { p: problem, nv, nr, art_sign, lower, upper, x, pos, basis };
    let mut iters = 0usize;

    let fail = |status: LpStatus, t: &Tableau<'_, S>, iters: usize| LpSolution {
        x: t.x[..nv].to_vec(),
        objective: dot(&problem.cost, &t.x[..nv]),
        status,
        primal_residual: S::nan(),
        dual_residual: S::nan(),
        complementarity: S::nan(),
        row_duals: vec![S::zero(); nr],
        iterations: iters,
    };

    // Phase 1: minimize the total artificial mass.
    if any_artificial {
        let mut phase1_cost = vec![S::zero(); n_cols];
        for c in phase1_cost[nv + nr..].iter_mut() {
            *c = S::one();
        }
        match run_phase(&mut t, &phase1_cost, tol, max_iter, &mut iters) {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded | PhaseEnd::SingularBasis => {
                return Ok(fail(LpStatus::IterationLimit, &t, iters))
            }
            PhaseEnd::IterationLimit => return Ok(fail(LpStatus::IterationLimit, &t, iters)),
        }
        let infeas: S = t.x[nv + nr..].iter().fold(S::zero(), |a, &v| a + v);
        if infeas > tol {
            return Ok(fail(LpStatus::Infeasible, &t, iters));
        }
        // Pin artificials at zero for phase 2.
        for r in 0..nr {
            t.upper[nv + nr + r] = S::zero();
        }
    } else {
        for r in 0..nr {
            t.upper[nv + nr + r] = S::zero();
        }
    }

    // Phase 2 on the true cost.
    let mut phase2_cost = vec![S::zero(); n_cols];
    phase2_cost[..nv].copy_from_slice(&problem.cost);
    let end = run_phase(&mut t, &phase2_cost, tol, max_iter, &mut iters);
    let status = match end {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => return Ok(fail(LpStatus::Unbounded, &t, iters)),
        PhaseEnd::IterationLimit | PhaseEnd::SingularBasis => {
            return Ok(fail(LpStatus::IterationLimit, &t, iters))
        }
    };

    // Final duals from the optimal basis.
    let mut row_duals = vec![S::zero(); nr];
    if let Some(lu) = t.factor_basis() {
        t.refresh_basics(&lu);
        let mut y = vec![S::zero(); nr];
        for (slot, &j) in t.basis.iter().enumerate() {
            y[slot] = phase2_cost[j];
        }
        lu.solve_t(&mut y);
        row_duals = y;
    }

    let x_out = t.x[..nv].to_vec();
    let (pr, dr, cg) = check_kkt(problem, &x_out, &row_duals)?;
    let status = if status == LpStatus::Optimal
        && !(pr <= opts.tol_feas && dr <= opts.tol_feas && cg <= opts.tol_gap)
    {
        // Could not certify optimality at the requested tolerances.
        LpStatus::IterationLimit
    } else {
        status
    };

    Ok(LpSolution {
        objective: dot(&problem.cost, &x_out),
        x: x_out,
        status,
        primal_residual: pr,
        dual_residual: dr,
        complementarity: cg,
        row_duals,
        iterations: iters,
    })
}

fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |s, (&x, &y)| s + x * y)
}

/// Max-norm KKT violations of a primal/dual pair: primal feasibility, dual
/// feasibility (reduced-cost signs against active bounds), and complementary
/// slackness. Row duals follow the convention `z = cost - eq_matrix^T duals`;
/// a row behaves like a slack variable with value `(eq_matrix x)_r`, bounds
/// `[eq_lo_r, eq_hi_r]` and reduced cost `duals_r`.
pub fn check_kkt<S: Real>(
    problem: &LpProblem<S>,
    x: &[S],
    duals: &[S],
) -> Result<(S, S, S), LpError> {
    let nv = problem.n_vars();
    let nr = problem.n_rows();
    if x.len() != nv || duals.len() != nr {
        return Err(LpError::DimensionMismatch(format!(
            "x has {} entries (want {nv}), duals {} (want {nr})",
            x.len(),
            duals.len()
        )));
    }

    let mut primal = S::zero();
    let mut dual = S::zero();
    let mut comp = S::zero();

    // Activity threshold for classifying a value as sitting on a bound.
    let act_tol = |v: S, b: S| (v - b).abs() <= S::lit(1e-6) * (S::one() + b.abs());

    let mut score = |val: S, lo: S, hi: S, z: S| {
        primal = primal.max(lo - val).max(val - hi);
        let at_lo = act_tol(val, lo);
        let at_hi = hi.is_finite() && act_tol(val, hi);
        let dviol = if at_lo && at_hi {
            S::zero()
        } else if at_lo {
            (-z).max(S::zero())
        } else if at_hi {
            z.max(S::zero())
        } else {
            z.abs()
        };
        dual = dual.max(dviol);
        let zp = z.max(S::zero());
        let zm = (-z).max(S::zero());
        comp = comp.max(zp * (val - lo).abs());
        if hi.is_finite() {
            comp = comp.max(zm * (hi - val).abs());
        }
    };

    for j in 0..nv {
        let mut z = problem.cost[j];
        for r in 0..nr {
            z = z - duals[r] * problem.eq_matrix[r * nv + j];
        }
        score(x[j], problem.lower[j], problem.upper[j], z);
    }
    for r in 0..nr {
        let act = dot(problem.row(r), x);
        score(act, problem.eq_lo[r], problem.eq_hi[r], duals[r]);
    }

    Ok((primal.max(S::zero()), dual, comp))
}
