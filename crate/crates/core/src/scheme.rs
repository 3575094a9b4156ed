//! Lax-Friedrichs time stepping: the measure-closure scheme, the stochastic
//! collocation reference scheme, and the time-step rules.

use crate::closure::{ClosureConfig, ClosureTemplate, YoungMeasureSlice};
use crate::error::{Error, Result};
use crate::field::MomentField;
use crate::grid::{Boundary, RandomGrid, SpatialGrid};
use crate::model::ModelSpec;
use crate::phase::PhaseGrid;
use crate::scalar::Real;
use crate::state::StateVec;
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    MeasureValued,
    Collocation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CflRule {
    /// Time step frozen from the initial data (the scalar experiments).
    Global,
    /// Recomputed each step from the current point values (the Euler runs).
    PerStepMax,
    /// Measure expectation rule from the current Young-measure slices.
    Measure,
}

/// Everything fixed over a run.
#[derive(Clone, Debug)]
pub struct SolverSetup<S> {
    pub model: ModelSpec<S>,
    pub sgrid: SpatialGrid<S>,
    pub rgrid: RandomGrid<S>,
    pub pgrid: PhaseGrid<S>,
    pub closure: ClosureConfig<S>,
}

#[derive(Clone, Debug)]
pub struct TraceRow<S> {
    pub step: usize,
    pub t: S,
    pub dt: S,
    /// `sum_{i,j} p0 dxi * measure_entropy` of the pre-step slices (MV only).
    pub total_entropy: Option<S>,
    pub wall_ms: f64,
}

/// Closure results for every cell of one time level, ghost columns included,
/// deduplicated by the moment rounded to 12 decimal digits.
pub struct ClosurePass<S> {
    n_x: usize,
    n_xi: usize,
    cell_unique: Vec<usize>,
    uniques: Vec<UniqueClosure<S>>,
}

pub struct UniqueClosure<S> {
    pub weights: Vec<S>,
    pub objective: S,
    pub speed: S,
    /// Flux expectation per flux branch of the model.
    pub flux: Vec<StateVec<S>>,
}

impl<S: Real> ClosurePass<S> {
    fn unique_at(&self, i: usize, je: usize) -> &UniqueClosure<S> {
        &self.uniques[self.cell_unique[i * (self.n_x + 2) + je]]
    }

    /// Slice at interior cell (i, j).
    pub fn slice(&self, i: usize, j: usize) -> YoungMeasureSlice<S> {
        YoungMeasureSlice { weights: self.unique_at(i, j + 1).weights.clone() }
    }

    pub fn objective(&self, i: usize, j: usize) -> S {
        self.unique_at(i, j + 1).objective
    }

    pub fn n_uniques(&self) -> usize {
        self.uniques.len()
    }

    /// `sum_{i,j} p0 dxi * objective` over interior cells.
    pub fn total_entropy(&self, rgrid: &RandomGrid<S>) -> S {
        let mut s = S::zero();
        for i in 0..self.n_xi {
            for j in 0..self.n_x {
                s = s + self.unique_at(i, j + 1).objective;
            }
        }
        s * rgrid.p0() * rgrid.dxi()
    }
}

/// Reusable per-run machinery: the LP template plus flux/speed tables over
/// the phase centers.
pub struct ClosureEngine<S> {
    template: ClosureTemplate<S>,
    flux_tab: Vec<Vec<StateVec<S>>>,
    sigma_tab: Vec<S>,
}

impl<S: Real> ClosureEngine<S> {
    pub fn new(setup: &SolverSetup<S>) -> Result<Self> {
        let template = ClosureTemplate::new(&setup.model, &setup.pgrid, &setup.closure)?;
        let flux_tab = (0..setup.model.flux_branches())
            .map(|b| {
                let x = setup.model.branch_position(b);
                setup.pgrid.centers().iter().map(|&u| setup.model.flux(u, x)).collect()
            })
            .collect();
        let sigma_tab =
            setup.pgrid.centers().iter().map(|&u| setup.model.spectral_radius(u)).collect();
        Ok(Self { template, flux_tab, sigma_tab })
    }

    fn solve_unique(&self, tmpl: &mut ClosureTemplate<S>, m: StateVec<S>) -> Result<UniqueClosure<S>> {
        let (slice, objective) = tmpl.solve(m)?;
        let du = tmpl.du();
        let mut speed = S::zero();
        let mut flux = vec![StateVec::zeros(m.dim()); self.flux_tab.len()];
        for (l, &w) in slice.weights.iter().enumerate() {
            if w != S::zero() {
                speed = speed + self.sigma_tab[l] * w;
                for (b, tab) in self.flux_tab.iter().enumerate() {
                    flux[b] = flux[b] + tab[l].scale(w);
                }
            }
        }
        speed = speed * du;
        for f in flux.iter_mut() {
            *f = f.scale(du);
        }
        Ok(UniqueClosure { weights: slice.weights, objective, speed, flux })
    }

    /// Solve the closure for every cell of `field` (ghosts included).
    pub fn pass(&self, field: &MomentField<S>, setup: &SolverSetup<S>) -> Result<ClosurePass<S>> {
        let n_x = field.n_x();
        let n_xi = field.n_xi();
        let boundary = setup.sgrid.boundary;

        let mut keys: HashMap<[i64; 2], usize> = HashMap::with_capacity(n_xi * (n_x + 2));
        let mut cell_unique = vec![0usize; n_xi * (n_x + 2)];
        let mut moments: Vec<StateVec<S>> = Vec::new();
        let mut first_cell: Vec<(usize, i64)> = Vec::new();
        for i in 0..n_xi {
            for je in 0..(n_x + 2) {
                let m = ext_moment(field, boundary, i, je);
                let rounded = round_moment(m);
                let next = moments.len();
                let idx = *keys.entry(moment_key(rounded)).or_insert_with(|| {
                    moments.push(rounded);
                    first_cell.push((i, je as i64 - 1));
                    next
                });
                cell_unique[i * (n_x + 2) + je] = idx;
            }
        }

        let results: Vec<Result<UniqueClosure<S>>> = moments
            .par_iter()
            .map_init(
                || self.template.clone(),
                |tmpl, &m| self.solve_unique(tmpl, m),
            )
            .collect();
        let mut uniques = Vec::with_capacity(results.len());
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(u) => uniques.push(u),
                Err(e) => {
                    let (i, j) = first_cell[k];
                    return Err(e.at_cell(i, j));
                }
            }
        }

        Ok(ClosurePass { n_x, n_xi, cell_unique, uniques })
    }
}

/// Moment of the extended cell `je` (0 and n_x + 1 are ghosts).
fn ext_moment<S: Real>(
    field: &MomentField<S>,
    boundary: Boundary,
    i: usize,
    je: usize,
) -> StateVec<S> {
    let n_x = field.n_x();
    let j = je as i64 - 1;
    let jj = match boundary {
        Boundary::Free => j.clamp(0, n_x as i64 - 1),
        Boundary::Periodic => (j + n_x as i64) % n_x as i64,
    };
    field.get(i, jj as usize)
}

/// Position of the extended cell used for flux evaluation: ghost centers for
/// free boundaries, wrapped centers for periodic ones.
fn ext_position<S: Real>(sgrid: &SpatialGrid<S>, je: usize) -> S {
    let j = je as i64 - 1;
    match sgrid.boundary {
        Boundary::Free => sgrid.center(j),
        Boundary::Periodic => sgrid.center((j + sgrid.n_x as i64) % sgrid.n_x as i64),
    }
}

fn round_moment<S: Real>(m: StateVec<S>) -> StateVec<S> {
    m.map(|c| {
        let r = (c.to_f64().unwrap() * 1e12).round() / 1e12;
        S::lit(r)
    })
}

fn moment_key<S: Real>(m: StateVec<S>) -> [i64; 2] {
    let enc = |k: usize| {
        if k < m.dim() {
            (m[k].to_f64().unwrap() * 1e12).round() as i64
        } else {
            0
        }
    };
    [enc(0), enc(1)]
}

/// One measure-closure Lax-Friedrichs step with a precomputed closure pass.
pub fn mv_step_with_pass<S: Real>(
    field: &MomentField<S>,
    pass: &ClosurePass<S>,
    setup: &SolverSetup<S>,
    dt: S,
) -> Result<MomentField<S>> {
    assert!(dt > S::zero(), "need dt > 0");
    let n_x = field.n_x();
    let n_xi = field.n_xi();
    let dx = setup.sgrid.dx();
    let lam = dt / (S::two() * dx);
    let branch: Vec<usize> = (0..n_x + 2)
        .map(|je| setup.model.flux_branch_of(ext_position(&setup.sgrid, je)))
        .collect();

    let mut out = field.clone();
    for i in 0..n_xi {
        for j in 0..n_x {
            let m_l = ext_moment(field, setup.sgrid.boundary, i, j);
            let m_r = ext_moment(field, setup.sgrid.boundary, i, j + 2);
            let f_l = pass.unique_at(i, j).flux[branch[j]];
            let f_r = pass.unique_at(i, j + 2).flux[branch[j + 2]];
            let new = (m_l + m_r).scale(S::half()) - (f_r - f_l).scale(lam);
            out.set(i, j, new);
        }
    }
    out.time = field.time + dt;
    if let Some((i, j)) = out.find_non_finite() {
        return Err(Error::NonFinite { i, j });
    }
    Ok(out)
}

/// One measure-closure Lax-Friedrichs step (solves the closures internally).
pub fn mv_step<S: Real>(
    field: &MomentField<S>,
    setup: &SolverSetup<S>,
    dt: S,
) -> Result<MomentField<S>> {
    let engine = ClosureEngine::new(setup)?;
    let pass = engine.pass(field, setup)?;
    mv_step_with_pass(field, &pass, setup, dt)
}

/// One stochastic-collocation Lax-Friedrichs step: the same stencil with the
/// exact flux at the point values.
pub fn collocation_step<S: Real>(
    field: &MomentField<S>,
    setup: &SolverSetup<S>,
    dt: S,
) -> Result<MomentField<S>> {
    assert!(dt > S::zero(), "need dt > 0");
    let n_x = field.n_x();
    let n_xi = field.n_xi();
    let dx = setup.sgrid.dx();
    let lam = dt / (S::two() * dx);
    let xs: Vec<S> = (0..n_x + 2).map(|je| ext_position(&setup.sgrid, je)).collect();

    let mut out = field.clone();
    for i in 0..n_xi {
        for j in 0..n_x {
            let m_l = ext_moment(field, setup.sgrid.boundary, i, j);
            let m_r = ext_moment(field, setup.sgrid.boundary, i, j + 2);
            let f_l = setup.model.flux(m_l, xs[j]);
            let f_r = setup.model.flux(m_r, xs[j + 2]);
            let new = (m_l + m_r).scale(S::half()) - (f_r - f_l).scale(lam);
            out.set(i, j, new);
        }
    }
    out.time = field.time + dt;
    if let Some((i, j)) = out.find_non_finite() {
        return Err(Error::NonFinite { i, j });
    }
    Ok(out)
}

fn speed_floor<S: Real>(smax: S) -> S {
    let floor = S::lit(1e-12);
    if smax < floor {
        log::warn!("max wave speed {smax} below floor; clamping to 1e-12");
        floor
    } else {
        smax
    }
}

/// `dt = cfl dx / max` over all grid samples of the spectral radius.
pub fn dt_global<S: Real>(field: &MomentField<S>, setup: &SolverSetup<S>, cfl: S) -> Result<S> {
    if !(cfl > S::zero() && cfl <= S::one()) {
        return Err(Error::Config(format!("CFL number {cfl} not in (0, 1]")));
    }
    let smax = speed_floor(field.max_wave_speed(&setup.model));
    Ok(cfl * setup.sgrid.dx() / smax)
}

/// Measure CFL rule: `dt = cfl dx / max_j { dxi p0 sum_i E_mu[sigma] }`.
pub fn dt_measure<S: Real>(pass: &ClosurePass<S>, setup: &SolverSetup<S>, cfl: S) -> Result<S> {
    if !(cfl > S::zero() && cfl <= S::one()) {
        return Err(Error::Config(format!("CFL number {cfl} not in (0, 1]")));
    }
    let w = setup.rgrid.dxi() * setup.rgrid.p0();
    let mut worst = S::zero();
    for j in 0..pass.n_x {
        let mut s = S::zero();
        for i in 0..pass.n_xi {
            s = s + pass.unique_at(i, j + 1).speed;
        }
        worst = worst.max(s * w);
    }
    Ok(cfl * setup.sgrid.dx() / speed_floor(worst))
}

/// Advance to `t_final`, clamping the last step to land exactly on it.
pub fn run<S: Real>(
    initial: &MomentField<S>,
    setup: &SolverSetup<S>,
    t_final: S,
    scheme: Scheme,
    cfl_rule: CflRule,
    cfl: S,
) -> Result<(MomentField<S>, Vec<TraceRow<S>>)> {
    if !(t_final > S::zero()) {
        return Err(Error::Config(format!("final time {t_final} must be positive")));
    }
    if scheme == Scheme::Collocation && cfl_rule == CflRule::Measure {
        return Err(Error::Config("measure CFL rule needs the mv scheme".into()));
    }
    let engine = match scheme {
        Scheme::MeasureValued => Some(ClosureEngine::new(setup)?),
        Scheme::Collocation => None,
    };
    let dt_frozen = match cfl_rule {
        CflRule::Global => Some(dt_global(initial, setup, cfl)?),
        _ => {
            // validate cfl up front
            let _ = dt_global(initial, setup, cfl)?;
            None
        }
    };

    let mut field = initial.clone();
    let mut trace = Vec::new();
    let mut step = 0usize;
    while field.time < t_final {
        let clock = Instant::now();
        step += 1;
        let pass = match &engine {
            Some(e) => Some(e.pass(&field, setup)?),
            None => None,
        };
        let dt_rule = match cfl_rule {
            CflRule::Global => dt_frozen.unwrap(),
            CflRule::PerStepMax => dt_global(&field, setup, cfl)?,
            CflRule::Measure => dt_measure(pass.as_ref().unwrap(), setup, cfl)?,
        };
        let remaining = t_final - field.time;
        let clamped = dt_rule >= remaining;
        let dt = if clamped { remaining } else { dt_rule };
        let entropy = pass.as_ref().map(|p| p.total_entropy(&setup.rgrid));
        field = match (&engine, &pass) {
            (Some(_), Some(p)) => mv_step_with_pass(&field, p, setup, dt)?,
            _ => collocation_step(&field, setup, dt)?,
        };
        if clamped {
            field.time = t_final;
        }
        trace.push(TraceRow {
            step,
            t: field.time,
            dt,
            total_entropy: entropy,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok((field, trace))
}

/// Outcome of a lock-stepped MV / collocation pair sharing the dt sequence.
pub struct PairOutcome<S> {
    pub mv: MomentField<S>,
    pub coll: MomentField<S>,
    pub mv_trace: Vec<TraceRow<S>>,
    /// Final-time closure pass of the MV field (for measure dumps).
    pub final_pass: ClosurePass<S>,
}

/// Run both schemes from the same initial data with a shared time-step
/// sequence. The per-step rule takes the max wave speed over both fields.
pub fn run_pair<S: Real>(
    initial: &MomentField<S>,
    setup: &SolverSetup<S>,
    t_final: S,
    cfl_rule: CflRule,
    cfl: S,
) -> Result<PairOutcome<S>> {
    if !(t_final > S::zero()) {
        return Err(Error::Config(format!("final time {t_final} must be positive")));
    }
    let engine = ClosureEngine::new(setup)?;
    let dt_frozen = match cfl_rule {
        CflRule::Global => Some(dt_global(initial, setup, cfl)?),
        _ => {
            let _ = dt_global(initial, setup, cfl)?;
            None
        }
    };

    let mut mv = initial.clone();
    let mut coll = initial.clone();
    let mut mv_trace = Vec::new();
    let mut step = 0usize;
    let mut pass = engine.pass(&mv, setup)?;
    loop {
        let clock = Instant::now();
        step += 1;
        let dt_rule = match cfl_rule {
            CflRule::Global => dt_frozen.unwrap(),
            CflRule::PerStepMax => {
                let s_mv = dt_global(&mv, setup, cfl)?;
                let s_coll = dt_global(&coll, setup, cfl)?;
                s_mv.min(s_coll)
            }
            CflRule::Measure => dt_measure(&pass, setup, cfl)?,
        };
        let remaining = t_final - mv.time;
        let clamped = dt_rule >= remaining;
        let dt = if clamped { remaining } else { dt_rule };
        let entropy = pass.total_entropy(&setup.rgrid);
        mv = mv_step_with_pass(&mv, &pass, setup, dt)?;
        coll = collocation_step(&coll, setup, dt)?;
        if clamped {
            mv.time = t_final;
            coll.time = t_final;
        }
        mv_trace.push(TraceRow {
            step,
            t: mv.time,
            dt,
            total_entropy: Some(entropy),
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        });
        pass = engine.pass(&mv, setup)?;
        if mv.time >= t_final {
            break;
        }
    }
    Ok(PairOutcome { mv, coll, mv_trace, final_pass: pass })
}
