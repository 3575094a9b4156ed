//! File emission, config round trips, and driver cross-checks.

use mvflux::field::MomentField;
use mvflux::harness::{
    compare_entropies, convergence_study, dump_measures, emit_outputs, l1_error, resolve,
    run_single, ConvergenceRow, EmitFlags, RunArtifacts, RunConfig, StudyAxis,
};
use mvflux::model::EntropyChoice;
use mvflux::scenario::{find_scenario, project_initial, Projection};
use mvflux::state::StateVec;
use std::fs;
use std::path::PathBuf;

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mvflux-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn sci_ok(tok: &str) -> bool {
    // lowercase scientific with 16 fractional digits: -1.2345678901234567e-12
    let rest = tok.strip_prefix('-').unwrap_or(tok);
    let (mantissa, exp) = match rest.split_once('e') {
        Some(p) => p,
        None => return false,
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some(p) => p,
        None => return false,
    };
    int.len() == 1
        && int.chars().all(|c| c.is_ascii_digit())
        && frac.len() == 16
        && frac.chars().all(|c| c.is_ascii_digit())
        && exp.strip_prefix('-').unwrap_or(exp).chars().all(|c| c.is_ascii_digit())
}

#[test]
fn field_and_trace_csv_formats() {
    let mut cfg = RunConfig::new("burgers-sin");
    cfg.n_x = Some(12);
    cfg.n_xi = Some(3);
    cfg.n_u = Some(20);
    cfg.t_final = Some(0.05);
    let r = resolve(&cfg).unwrap();
    let artifacts = run_single(&r).unwrap();
    let dir = tmp_dir("field-trace");
    let flags = EmitFlags { field_csv: true, trace_csv: true, measure_csv: true, ..Default::default() };
    let written = emit_outputs(&artifacts, &flags, &dir).unwrap();
    assert_eq!(written.len(), 3);

    let field = fs::read_to_string(dir.join("field.csv")).unwrap();
    let mut lines = field.lines();
    assert_eq!(lines.next().unwrap(), "x,xi,component,value");
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 12 * 3);
    // row-major over j then i: first 3 rows share x, cycle xi
    let first: Vec<Vec<&str>> = body[..3].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!(first[0][0], first[1][0]);
    assert_ne!(first[0][1], first[1][1]);
    assert_eq!(first[0][2], "1");
    for tok in [first[0][0], first[0][1], first[0][3]] {
        assert!(sci_ok(tok), "bad float token {tok}");
    }
    assert!(!field.contains('\r'));

    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "step,t,dt,total_entropy,wall_ms");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), artifacts.trace.len());
    let cols: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cols[0], "1");
    assert!(sci_ok(cols[1]) && sci_ok(cols[2]) && sci_ok(cols[3]));

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn measure_csv_dirac_case_has_one_row_per_cell() {
    // grid-valued moments + atomic equality closure -> exactly N_xi * N_x rows
    let mut cfg = RunConfig::new("burgers-step-xi");
    cfg.n_x = Some(10);
    cfg.n_xi = Some(4);
    cfg.n_u = Some(10);
    let r = resolve(&cfg).unwrap();
    // phase centers of [-5,5]/10 sit at half-integers; fill with one of them
    let field = MomentField::new(4, 10, StateVec::scalar(0.5));
    let dump = dump_measures(&field, &r.setup).unwrap();
    assert_eq!(dump.rows.len(), 4 * 10);

    let artifacts = RunArtifacts {
        field,
        sgrid: r.setup.sgrid,
        rgrid: r.setup.rgrid,
        trace: Vec::new(),
        measures: Some(dump),
        table: None,
    };
    let dir = tmp_dir("measure");
    let flags = EmitFlags { measure_csv: true, ..Default::default() };
    emit_outputs(&artifacts, &flags, &dir).unwrap();
    let text = fs::read_to_string(dir.join("measure.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,u1,weight");
    assert_eq!(lines.count(), 40);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn empty_emit_flags_write_nothing() {
    let mut cfg = RunConfig::new("burgers-sin");
    cfg.n_x = Some(12);
    cfg.n_xi = Some(2);
    cfg.n_u = Some(10);
    cfg.t_final = Some(0.02);
    let r = resolve(&cfg).unwrap();
    let artifacts = run_single(&r).unwrap();
    let dir = tmp_dir("empty");
    let written = emit_outputs(&artifacts, &EmitFlags::default(), &dir).unwrap();
    assert!(written.is_empty());
    assert!(!dir.exists());
}

#[test]
fn table_csv_round_trips_rates_to_formatting_precision() {
    let mut cfg = RunConfig::new("burgers-step-xi");
    cfg.n_xi = Some(3);
    cfg.n_u = Some(10);
    cfg.t_final = Some(0.1);
    let rows = convergence_study(StudyAxis::SpatialX, &[12, 18, 27], &cfg).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].rate.is_none() && rows[1].rate.is_some());

    let r = resolve(&cfg).unwrap();
    let artifacts = RunArtifacts {
        field: MomentField::new(3, r.setup.sgrid.n_x, StateVec::scalar(0.0)),
        sgrid: r.setup.sgrid,
        rgrid: r.setup.rgrid,
        trace: Vec::new(),
        measures: None,
        table: Some(rows.clone()),
    };
    let dir = tmp_dir("table");
    let flags = EmitFlags { table_csv: true, ..Default::default() };
    emit_outputs(&artifacts, &flags, &dir).unwrap();
    let text = fs::read_to_string(dir.join("table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "N,error,rate");
    let parsed: Vec<ConvergenceRow> = lines
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            ConvergenceRow {
                n: c[0].parse().unwrap(),
                error: c[1].parse().unwrap(),
                rate: if c[2].is_empty() { None } else { Some(c[2].parse().unwrap()) },
            }
        })
        .collect();
    // recompute rates from the parsed errors; must match the emitted ones
    for k in 1..parsed.len() {
        let recomputed = (parsed[k - 1].error / parsed[k].error).ln()
            / (parsed[k].n as f64 / parsed[k - 1].n as f64).ln();
        let emitted = parsed[k].rate.unwrap();
        assert!(
            (recomputed - emitted).abs() <= 1e-12 * emitted.abs().max(1.0),
            "row {k}: {recomputed} vs {emitted}"
        );
        assert!((emitted - rows[k].rate.unwrap()).abs() <= f64::EPSILON * 8.0);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn compare_with_one_entropy_equals_plain_run() {
    let mut cfg = RunConfig::new("dflux-step");
    cfg.n_x = Some(24);
    cfg.t_final = Some(0.5);
    let runs = compare_entropies(&cfg, &[EntropyChoice::Quadratic]).unwrap();
    assert_eq!(runs.len(), 1);
    let mut plain_cfg = cfg.clone();
    plain_cfg.entropy = Some("quadratic".into());
    let plain = run_single(&resolve(&plain_cfg).unwrap()).unwrap();
    for (u, v) in runs[0].1.field.values().iter().zip(plain.field.values()) {
        assert_eq!(u.value().to_bits(), v.value().to_bits());
    }
}

#[test]
fn compare_identical_entropies_is_deterministic() {
    let mut cfg = RunConfig::new("dflux-step");
    cfg.n_x = Some(24);
    cfg.t_final = Some(0.5);
    let runs =
        compare_entropies(&cfg, &[EntropyChoice::Quadratic, EntropyChoice::Quadratic]).unwrap();
    let (a, b) = (&runs[0].1, &runs[1].1);
    for (u, v) in a.field.values().iter().zip(b.field.values()) {
        assert_eq!(u.value().to_bits(), v.value().to_bits());
    }
    let d = l1_error(&a.field, &b.field, &a.sgrid, &a.rgrid).unwrap();
    assert_eq!(d.value(), 0.0);
}

#[test]
fn compare_entropy_rejects_systems() {
    let cfg = RunConfig::new("euler-riemann");
    assert!(compare_entropies(&cfg, &[EntropyChoice::KineticEuler { gamma: 1.5, kappa: 1.0 }])
        .is_err());
}

#[test]
fn gauss_projection_averages_the_step() {
    // the x = 0.5 jump cell of burgers-nonatomic: midpoint sees 1.5, the
    // 3-point Gauss average sees a mix
    let sc = find_scenario::<f64>("burgers-nonatomic").unwrap();
    let sgrid = mvflux::grid::SpatialGrid::new(0.0, 1.0, 9, mvflux::grid::Boundary::Free);
    let rgrid = mvflux::grid::RandomGrid::new(-1.0, 1.0, 1);
    let mid = project_initial(&sc, &sgrid, &rgrid, Projection::Midpoint).unwrap();
    let avg = project_initial(&sc, &sgrid, &rgrid, Projection::GaussAverage).unwrap();
    // cell 4 spans [4/9, 5/9]; its center is exactly the jump point 0.5,
    // where u0 takes the right value, while the Gauss nodes straddle the jump
    assert_eq!(mid.get(0, 4).value(), 0.5);
    let v = avg.get(0, 4).value();
    assert!(v > 0.6 && v < 1.5, "expected a mixed average, got {v}");
}
