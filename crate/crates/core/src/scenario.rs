//! The built-in experiment initial data and their default discretizations.

use crate::error::{Error, Result};
use crate::field::MomentField;
use crate::grid::{Boundary, RandomGrid, SpatialGrid};
use crate::model::{EntropyChoice, ModelSpec};
use crate::scalar::Real;
use crate::scheme::CflRule;
use crate::state::StateVec;

pub struct Scenario<S> {
    pub name: &'static str,
    pub model: ModelSpec<S>,
    /// Initial data u0(x, xi).
    pub u0: Box<dyn Fn(S, S) -> StateVec<S> + Send + Sync>,
    pub defaults: ScenarioDefaults<S>,
}

#[derive(Clone, Debug)]
pub struct ScenarioDefaults<S> {
    pub x_lo: S,
    pub x_hi: S,
    pub n_x: usize,
    pub xi_lo: S,
    pub xi_hi: S,
    pub n_xi: usize,
    /// Phase cells per state dimension.
    pub n_u: usize,
    pub t_final: S,
    pub cfl: S,
    pub cfl_rule: CflRule,
    pub lambda_f: S,
    pub entropy: EntropyChoice<S>,
    pub boundary: Boundary,
}

/// 1-forward Lax curve for isentropic Euler starting at `u_l`, pressure
/// `p(rho) = kappa rho^gamma`. The printed formulas, verbatim:
/// shock branch for s >= rho_l, rarefaction branch for 0 < s < rho_l.
pub fn lax_curve<S: Real>(s: S, u_l: StateVec<S>, gamma: S, kappa: S) -> StateVec<S> {
    assert!(s > S::zero(), "Lax curve parameter must be positive");
    let rho_l = u_l[0];
    assert!(rho_l > S::zero(), "left density must be positive");
    let p = |r: S| kappa * r.powf(gamma);
    if s >= rho_l {
        let rad = (s / rho_l) * (s - rho_l) * (p(s) - p(rho_l));
        StateVec::pair(s, s * rho_l - rad.max(S::zero()).sqrt())
    } else {
        StateVec::pair(s, s * rho_l - s * (s.ln() - rho_l.ln()))
    }
}

pub fn builtin_scenarios<S: Real>() -> Vec<Scenario<S>> {
    let gamma = S::lit(1.5);
    let kappa = S::one();
    vec![
        Scenario {
            name: "burgers-step-xi",
            model: ModelSpec::burgers(),
            u0: Box::new(|x, xi| {
                StateVec::scalar(if x >= S::zero() && x <= S::half() { xi } else { S::zero() })
            }),
            defaults: ScenarioDefaults {
                x_lo: S::zero(),
                x_hi: S::one(),
                n_x: 100,
                xi_lo: -S::one(),
                xi_hi: S::one(),
                n_xi: 5,
                n_u: 10,
                t_final: S::half(),
                cfl: S::lit(0.75),
                cfl_rule: CflRule::Global,
                lambda_f: S::one(),
                entropy: EntropyChoice::Quadratic,
                boundary: Boundary::Free,
            },
        },
        Scenario {
            name: "burgers-sin",
            model: ModelSpec::burgers(),
            u0: Box::new(|x, xi| {
                StateVec::scalar(xi * (S::two() * S::lit(std::f64::consts::PI) * x).sin())
            }),
            defaults: ScenarioDefaults {
                x_lo: S::zero(),
                x_hi: S::one(),
                n_x: 100,
                xi_lo: -S::one(),
                xi_hi: S::one(),
                n_xi: 10,
                n_u: 100,
                t_final: S::lit(0.25),
                cfl: S::lit(0.75),
                cfl_rule: CflRule::Global,
                lambda_f: S::one(),
                entropy: EntropyChoice::Quadratic,
                boundary: Boundary::Free,
            },
        },
        Scenario {
            name: "burgers-nonatomic",
            model: ModelSpec::burgers()
                .with_phase_box(StateVec::scalar(S::lit(-2.0)), StateVec::scalar(S::two())),
            u0: Box::new(|x, _| {
                StateVec::scalar(if x < S::half() { S::lit(1.5) } else { S::half() })
            }),
            defaults: ScenarioDefaults {
                x_lo: S::zero(),
                x_hi: S::one(),
                n_x: 100,
                xi_lo: -S::one(),
                xi_hi: S::one(),
                n_xi: 1,
                n_u: 100,
                t_final: S::lit(0.25),
                cfl: S::lit(0.75),
                cfl_rule: CflRule::Global,
                lambda_f: S::lit(0.05),
                entropy: EntropyChoice::Quadratic,
                boundary: Boundary::Free,
            },
        },
        Scenario {
            name: "euler-riemann",
            model: ModelSpec::isentropic_euler(gamma, kappa),
            u0: Box::new(move |x, xi| {
                let u_l = StateVec::pair(S::one(), S::one());
                if x < S::zero() {
                    u_l
                } else {
                    lax_curve(S::half() * xi + u_l[0], u_l, gamma, kappa)
                }
            }),
            defaults: ScenarioDefaults {
                x_lo: -S::one(),
                x_hi: S::one(),
                n_x: 100,
                xi_lo: -S::one(),
                xi_hi: S::one(),
                n_xi: 10,
                n_u: 25,
                t_final: S::lit(0.25),
                cfl: S::lit(0.75),
                cfl_rule: CflRule::PerStepMax,
                lambda_f: S::one(),
                entropy: EntropyChoice::KineticEuler { gamma, kappa },
                boundary: Boundary::Free,
            },
        },
        Scenario {
            name: "dflux-step",
            model: ModelSpec::discontinuous_flux(),
            u0: Box::new(|x, _| {
                StateVec::scalar(if x < S::zero() { S::lit(0.65) } else { S::lit(0.35) })
            }),
            defaults: ScenarioDefaults {
                x_lo: S::lit(-4.0),
                x_hi: S::lit(4.0),
                n_x: 100,
                xi_lo: -S::one(),
                xi_hi: S::one(),
                n_xi: 1,
                n_u: 50,
                t_final: S::two(),
                cfl: S::lit(0.75),
                cfl_rule: CflRule::Global,
                lambda_f: S::one(),
                entropy: EntropyChoice::Quadratic,
                boundary: Boundary::Free,
            },
        },
    ]
}

pub fn find_scenario<S: Real>(name: &str) -> Result<Scenario<S>> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            let names: Vec<_> = builtin_scenarios::<S>().iter().map(|s| s.name).collect();
            Error::Config(format!("unknown scenario '{name}'; known: {}", names.join(", ")))
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Evaluate the initial data at the cell centers.
    Midpoint,
    /// 3x3 tensor Gauss-Legendre cell average over (x, xi).
    GaussAverage,
}

/// Project the initial data onto conditional means per (xi, x) cell.
pub fn project_initial<S: Real>(
    scenario: &Scenario<S>,
    sgrid: &SpatialGrid<S>,
    rgrid: &RandomGrid<S>,
    projection: Projection,
) -> Result<MomentField<S>> {
    let dim = scenario.model.dim();
    let mut field = MomentField::new(rgrid.n_xi, sgrid.n_x, StateVec::zeros(dim));
    // 3-point Gauss-Legendre on [-1/2, 1/2]
    let g = S::lit(0.5 * (0.6f64).sqrt());
    let nodes = [-g, S::zero(), g];
    let weights = [S::lit(5.0 / 18.0), S::lit(8.0 / 18.0), S::lit(5.0 / 18.0)];

    let lo = scenario.model.phase_lo();
    let hi = scenario.model.phase_hi();
    for i in 0..rgrid.n_xi {
        let xi_c = rgrid.center(i);
        for j in 0..sgrid.n_x {
            let x_c = sgrid.center(j as i64);
            let v = match projection {
                Projection::Midpoint => (scenario.u0)(x_c, xi_c),
                Projection::GaussAverage => {
                    let mut acc = StateVec::zeros(dim);
                    for (a, &wx) in weights.iter().enumerate() {
                        for (b, &wxi) in weights.iter().enumerate() {
                            let x = x_c + nodes[a] * sgrid.dx();
                            let xi = xi_c + nodes[b] * rgrid.dxi();
                            acc = acc + (scenario.u0)(x, xi).scale(wx * wxi);
                        }
                    }
                    acc
                }
            };
            for k in 0..dim {
                if !(v[k] >= lo[k] && v[k] <= hi[k]) {
                    return Err(Error::Config(format!(
                        "initial datum {v:?} at xi-cell {i}, x-cell {j} lies outside the phase box"
                    )));
                }
            }
            field.set(i, j, v);
        }
    }
    Ok(field)
}
