//! Behavioral tests for the time steppers: wave speeds, conservation,
//! consistency between the two schemes, determinism, time-step rules.

use mvflux::closure::ClosureConfig;
use mvflux::field::MomentField;
use mvflux::grid::{Boundary, RandomGrid, SpatialGrid};
use mvflux::model::{EntropyChoice, ModelSpec};
use mvflux::phase::PhaseGrid;
use mvflux::scenario::{find_scenario, project_initial, Projection};
use mvflux::scheme::{
    collocation_step, dt_global, dt_measure, mv_step, run, run_pair, CflRule, ClosureEngine,
    Scheme, SolverSetup,
};
use mvflux::state::StateVec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn burgers_setup(n_x: usize, n_xi: usize, n_u: usize, boundary: Boundary) -> SolverSetup<f64> {
    let model = ModelSpec::burgers();
    let pgrid = PhaseGrid::new(model.phase_lo(), model.phase_hi(), &[n_u]);
    SolverSetup {
        model,
        sgrid: SpatialGrid::new(0.0, 1.0, n_x, boundary),
        rgrid: RandomGrid::new(-1.0, 1.0, n_xi),
        pgrid,
        closure: ClosureConfig {
            lambda_f: 1.0,
            relax_band: false,
            entropy: EntropyChoice::Quadratic,
        },
    }
}

#[test]
fn constant_field_is_a_fixed_point() {
    let setup = burgers_setup(16, 2, 20, Boundary::Free);
    let field = MomentField::new(2, 16, StateVec::scalar(0.7));
    let a = mv_step(&field, &setup, 0.01).unwrap();
    let b = collocation_step(&field, &setup, 0.01).unwrap();
    for j in 0..16 {
        for i in 0..2 {
            assert_eq!(a.get(i, j).value(), 0.7);
            assert_eq!(b.get(i, j).value(), 0.7);
        }
    }
}

/// Deterministic Riemann data 1.5 / 0.5: the shock travels at speed 1, so at
/// T = 0.25 the mid-value crossing sits at x ~ 0.75 (within 2 dx).
#[test]
fn riemann_shock_position() {
    let mut crossings = Vec::new();
    for scheme in [Scheme::MeasureValued, Scheme::Collocation] {
        let sc = find_scenario::<f64>("burgers-nonatomic").unwrap();
        let d = &sc.defaults;
        let setup = SolverSetup {
            model: sc.model.clone(),
            sgrid: SpatialGrid::new(d.x_lo, d.x_hi, d.n_x, d.boundary),
            rgrid: RandomGrid::new(d.xi_lo, d.xi_hi, d.n_xi),
            pgrid: PhaseGrid::new(sc.model.phase_lo(), sc.model.phase_hi(), &[d.n_u]),
            closure: ClosureConfig {
                lambda_f: 1.0, // atomic closure for the shock test
                relax_band: false,
                entropy: EntropyChoice::Quadratic,
            },
        };
        let initial = project_initial(&sc, &setup.sgrid, &setup.rgrid, Projection::Midpoint).unwrap();
        let (field, _) = run(&initial, &setup, 0.25, scheme, CflRule::Global, 0.75).unwrap();
        let mut crossing = None;
        for j in 0..field.n_x() - 1 {
            let (a, b) = (field.get(0, j).value(), field.get(0, j + 1).value());
            if (a - 1.0) * (b - 1.0) <= 0.0 && a != b {
                let frac = (a - 1.0) / (a - b);
                crossing = Some(setup.sgrid.center(j as i64) + frac * setup.sgrid.dx());
            }
        }
        let x = crossing.expect("no mid-value crossing found");
        assert!((x - 0.75).abs() <= 2.0 * setup.sgrid.dx(), "{scheme:?}: crossing at {x}");
        crossings.push(x);
    }
}

/// Grid-valued moments with the atomic equality closure: one mv step equals
/// one collocation step to 1e-8 per entry.
#[test]
fn dirac_consistency_single_step() {
    let model = ModelSpec::<f64>::burgers();
    // centers at the integers -4..=5
    let pgrid = PhaseGrid::new(StateVec::scalar(-4.5), StateVec::scalar(5.5), &[10]);
    let setup = SolverSetup {
        model,
        sgrid: SpatialGrid::new(0.0, 1.0, 12, Boundary::Free),
        rgrid: RandomGrid::new(-1.0, 1.0, 2),
        pgrid,
        closure: ClosureConfig {
            lambda_f: 1.0,
            relax_band: false,
            entropy: EntropyChoice::Quadratic,
        },
    };
    let mut field = MomentField::new(2, 12, StateVec::scalar(0.0));
    let vals = [0.0, 1.0, 2.0, 1.0, 0.0, -1.0, -2.0, 0.0, 2.0, 1.0, 1.0, 0.0];
    for i in 0..2 {
        for (j, &v) in vals.iter().enumerate() {
            field.set(i, j, StateVec::scalar(if i == 0 { v } else { -v }));
        }
    }
    let dt = dt_global(&field, &setup, 0.75).unwrap();
    let a = mv_step(&field, &setup, dt).unwrap();
    let b = collocation_step(&field, &setup, dt).unwrap();
    for (u, v) in a.values().iter().zip(b.values()) {
        assert!((u.value() - v.value()).abs() <= 1e-8);
    }
}

/// Periodic boundaries, equality closure: per-xi spatial sums telescope.
#[test]
fn periodic_conservation() {
    let setup = burgers_setup(32, 3, 24, Boundary::Periodic);
    let sc = find_scenario::<f64>("burgers-sin").unwrap();
    let mut field =
        project_initial(&sc, &setup.sgrid, &setup.rgrid, Projection::Midpoint).unwrap();
    let sums0 = field.spatial_sums();
    let dt = dt_global(&field, &setup, 0.75).unwrap();
    for _ in 0..25 {
        field = mv_step(&field, &setup, dt).unwrap();
    }
    for (s, s0) in field.spatial_sums().iter().zip(&sums0) {
        assert!((s.value() - s0.value()).abs() <= 1e-10);
    }
}

/// Lax-Friedrichs max principle for the collocation scheme on random data.
#[test]
fn collocation_max_principle() {
    let setup = burgers_setup(40, 4, 10, Boundary::Free);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut field = MomentField::new(4, 40, StateVec::scalar(0.0));
    for i in 0..4 {
        for j in 0..40 {
            field.set(i, j, StateVec::scalar(rng.gen_range(-1.0..1.0)));
        }
    }
    let (lo, hi) = field
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.value()), hi.max(v.value()))
        });
    let dt = dt_global(&field, &setup, 0.75).unwrap();
    for _ in 0..30 {
        field = collocation_step(&field, &setup, dt).unwrap();
        for v in field.values() {
            assert!(v.value() >= lo - 1e-12 && v.value() <= hi + 1e-12);
        }
    }
}

/// run() is bitwise reproducible despite internal parallelism.
#[test]
fn run_is_bitwise_deterministic() {
    let sc = find_scenario::<f64>("burgers-sin").unwrap();
    let setup = burgers_setup(24, 4, 30, Boundary::Free);
    let initial = project_initial(&sc, &setup.sgrid, &setup.rgrid, Projection::Midpoint).unwrap();
    let (a, _) = run(&initial, &setup, 0.1, Scheme::MeasureValued, CflRule::Global, 0.75).unwrap();
    let (b, _) = run(&initial, &setup, 0.1, Scheme::MeasureValued, CflRule::Global, 0.75).unwrap();
    for (u, v) in a.values().iter().zip(b.values()) {
        assert_eq!(u.value().to_bits(), v.value().to_bits());
    }
}

#[test]
fn dt_global_examples() {
    // Burgers with max |u0| = 1 on a dx = 0.01 grid: dt = 0.75 dx.
    let setup = burgers_setup(100, 1, 10, Boundary::Free);
    let mut field = MomentField::new(1, 100, StateVec::scalar(0.4));
    field.set(0, 3, StateVec::scalar(-1.0));
    let dt = dt_global(&field, &setup, 0.75).unwrap();
    assert!((dt - 0.0075).abs() <= 1e-15);

    // Euler at (1, 1): speed 1 + sqrt(1.5).
    let model = ModelSpec::isentropic_euler(1.5, 1.0);
    let pgrid = PhaseGrid::new(model.phase_lo(), model.phase_hi(), &[25, 25]);
    let esetup = SolverSetup {
        model,
        sgrid: SpatialGrid::new(-1.0, 1.0, 100, Boundary::Free),
        rgrid: RandomGrid::new(-1.0, 1.0, 1),
        pgrid,
        closure: ClosureConfig {
            lambda_f: 1.0,
            relax_band: false,
            entropy: EntropyChoice::KineticEuler { gamma: 1.5, kappa: 1.0 },
        },
    };
    let field = MomentField::new(1, 100, StateVec::pair(1.0, 1.0));
    let dt = dt_global(&field, &esetup, 0.75).unwrap();
    assert!((dt - 0.75 * 0.02 / (1.0 + 1.5f64.sqrt())).abs() <= 1e-15);

    // cfl out of range is a precondition violation
    assert!(dt_global(&field, &esetup, 0.0).is_err());
    assert!(dt_global(&field, &esetup, 1.5).is_err());
}

#[test]
fn dt_global_floors_zero_speed() {
    let setup = burgers_setup(10, 1, 10, Boundary::Free);
    let field = MomentField::new(1, 10, StateVec::scalar(0.0));
    let dt = dt_global(&field, &setup, 0.75).unwrap();
    assert!(dt >= 0.75 * 0.1 / 1e-12 * 0.999);
}

#[test]
fn dt_measure_examples() {
    // All slices Dirac at |u| = 1: the xi quadrature normalizes, dt = cfl dx.
    let model = ModelSpec::<f64>::burgers();
    let pgrid = PhaseGrid::new(StateVec::scalar(-4.5), StateVec::scalar(5.5), &[10]);
    let setup = SolverSetup {
        model,
        sgrid: SpatialGrid::new(0.0, 1.0, 10, Boundary::Free),
        rgrid: RandomGrid::new(-1.0, 1.0, 4),
        pgrid,
        closure: ClosureConfig {
            lambda_f: 1.0,
            relax_band: false,
            entropy: EntropyChoice::Quadratic,
        },
    };
    let mut field = MomentField::new(4, 10, StateVec::scalar(1.0));
    for i in 0..4 {
        for j in 0..10 {
            field.set(i, j, StateVec::scalar(if (i + j) % 2 == 0 { 1.0 } else { -1.0 }));
        }
    }
    let engine = ClosureEngine::new(&setup).unwrap();
    let pass = engine.pass(&field, &setup).unwrap();
    let dt = dt_measure(&pass, &setup, 0.75).unwrap();
    assert!((dt - 0.075).abs() <= 1e-12);

    // Single-xi Dirac at -3: dt = cfl dx / 3.
    let setup1 = SolverSetup { rgrid: RandomGrid::new(-1.0, 1.0, 1), ..setup.clone() };
    let field = MomentField::new(1, 10, StateVec::scalar(-3.0));
    let engine = ClosureEngine::new(&setup1).unwrap();
    let pass = engine.pass(&field, &setup1).unwrap();
    let dt = dt_measure(&pass, &setup1, 0.75).unwrap();
    assert!((dt - 0.025).abs() <= 1e-12);

    // Mixed half/half slice on {-1, 1} has E|u| = 1: same dt as a Dirac.
    let model = ModelSpec::<f64>::burgers();
    let pgrid2 = PhaseGrid::new(StateVec::scalar(-2.0), StateVec::scalar(2.0), &[2]);
    let setup2 = SolverSetup {
        model,
        sgrid: SpatialGrid::new(0.0, 1.0, 10, Boundary::Free),
        rgrid: RandomGrid::new(-1.0, 1.0, 1),
        pgrid: pgrid2,
        closure: ClosureConfig {
            lambda_f: 1.0,
            relax_band: false,
            entropy: EntropyChoice::Quadratic,
        },
    };
    let field = MomentField::new(1, 10, StateVec::scalar(0.0));
    let engine = ClosureEngine::new(&setup2).unwrap();
    let pass = engine.pass(&field, &setup2).unwrap();
    let dt = dt_measure(&pass, &setup2, 0.75).unwrap();
    assert!((dt - 0.075).abs() <= 1e-12);
}

#[test]
fn tiny_final_time_takes_one_clamped_step() {
    let setup = burgers_setup(16, 2, 10, Boundary::Free);
    let field = MomentField::new(2, 16, StateVec::scalar(0.5));
    let (out, trace) =
        run(&field, &setup, 1e-6, Scheme::MeasureValued, CflRule::Global, 0.75).unwrap();
    assert_eq!(trace.len(), 1);
    assert_eq!(out.time, 1e-6);
}

#[test]
fn measure_rule_rejects_collocation() {
    let setup = burgers_setup(16, 2, 10, Boundary::Free);
    let field = MomentField::new(2, 16, StateVec::scalar(0.5));
    assert!(run(&field, &setup, 0.1, Scheme::Collocation, CflRule::Measure, 0.75).is_err());
}

/// The closure-infeasible diagnostic names the first offending cell.
#[test]
fn infeasible_cell_is_reported() {
    let setup = burgers_setup(16, 2, 10, Boundary::Free);
    let mut field = MomentField::new(2, 16, StateVec::scalar(0.0));
    field.set(1, 7, StateVec::scalar(4.99)); // outside the reachable hull
    let err = mv_step(&field, &setup, 0.001).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("xi-cell 1") && msg.contains("x-cell 7"), "{msg}");
}

/// MV and collocation stay O(du) apart per step in band mode on smooth data.
#[test]
fn band_mode_single_step_stays_close() {
    let sc = find_scenario::<f64>("burgers-sin").unwrap();
    let mut setup = burgers_setup(50, 2, 200, Boundary::Free);
    setup.closure.relax_band = true;
    let initial = project_initial(&sc, &setup.sgrid, &setup.rgrid, Projection::Midpoint).unwrap();
    let dt = dt_global(&initial, &setup, 0.75).unwrap();
    let a = mv_step(&initial, &setup, dt).unwrap();
    let b = collocation_step(&initial, &setup, dt).unwrap();
    let du = setup.pgrid.spacing(0);
    let lam = dt / (2.0 * setup.sgrid.dx());
    // flux differences enter with the lam factor; Lip(f) <= 5 on the box
    let bound = 2.0 * lam * 5.0 * du + 1e-12;
    for (u, v) in a.values().iter().zip(b.values()) {
        assert!((u.value() - v.value()).abs() <= bound);
    }
}

/// Shared-dt pair driver agrees with individually run schemes under the
/// frozen global rule.
#[test]
fn pair_matches_individual_runs_under_global_rule() {
    let sc = find_scenario::<f64>("burgers-sin").unwrap();
    let setup = burgers_setup(30, 3, 40, Boundary::Free);
    let initial = project_initial(&sc, &setup.sgrid, &setup.rgrid, Projection::Midpoint).unwrap();
    let pair = run_pair(&initial, &setup, 0.2, CflRule::Global, 0.75).unwrap();
    let (mv, _) = run(&initial, &setup, 0.2, Scheme::MeasureValued, CflRule::Global, 0.75).unwrap();
    let (coll, _) = run(&initial, &setup, 0.2, Scheme::Collocation, CflRule::Global, 0.75).unwrap();
    for (u, v) in pair.mv.values().iter().zip(mv.values()) {
        assert_eq!(u.value().to_bits(), v.value().to_bits());
    }
    for (u, v) in pair.coll.values().iter().zip(coll.values()) {
        assert_eq!(u.value().to_bits(), v.value().to_bits());
    }
}
