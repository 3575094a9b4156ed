//! Experiment drivers: configuration, error metrics, convergence studies,
//! entropy comparisons and CSV emission.

use crate::closure::ClosureConfig;
use crate::error::{Error, Result};
use crate::field::MomentField;
use crate::grid::{Boundary, RandomGrid, SpatialGrid};
use crate::model::EntropyChoice;
use crate::phase::PhaseGrid;
use crate::scalar::Real;
use crate::scenario::{find_scenario, project_initial, Projection, Scenario};
use crate::scheme::{
    run, run_pair, CflRule, ClosureEngine, Scheme, SolverSetup, TraceRow,
};
use crate::state::StateVec;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// Configuration

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmitFlags {
    pub field_csv: bool,
    pub measure_csv: bool,
    pub trace_csv: bool,
    pub table_csv: bool,
}

impl EmitFlags {
    pub fn parse(s: &str) -> Result<Self> {
        let mut f = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "field" => f.field_csv = true,
                "measure" => f.measure_csv = true,
                "trace" => f.trace_csv = true,
                "table" => f.table_csv = true,
                other => return Err(Error::Config(format!("unknown emit flag '{other}'"))),
            }
        }
        Ok(f)
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.field_csv {
            parts.push("field");
        }
        if self.measure_csv {
            parts.push("measure");
        }
        if self.trace_csv {
            parts.push("trace");
        }
        if self.table_csv {
            parts.push("table");
        }
        parts.join(",")
    }
}

/// Scenario selection plus overrides. Unset fields fall back to the
/// scenario's defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub n_x: Option<usize>,
    pub n_xi: Option<usize>,
    pub n_u: Option<usize>,
    pub lambda_f: Option<f64>,
    pub cfl: Option<f64>,
    pub t_final: Option<f64>,
    pub entropy: Option<String>,
    pub relax_band: Option<bool>,
    pub boundary: Option<String>,
    pub scheme: Option<String>,
    pub cfl_rule: Option<String>,
    pub projection: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub emit: EmitFlags,
}

impl RunConfig {
    pub fn new(scenario: &str) -> Self {
        Self { scenario: scenario.into(), ..Default::default() }
    }

    /// Parse the flat `key=value` config format. Later keys win.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.apply(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Apply one key=value override.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
        }
        match key {
            "scenario" => self.scenario = value.to_string(),
            "nx" => self.n_x = Some(num(key, value)?),
            "nxi" => self.n_xi = Some(num(key, value)?),
            "nu" => self.n_u = Some(num(key, value)?),
            "lambda_f" => self.lambda_f = Some(num(key, value)?),
            "cfl" => self.cfl = Some(num(key, value)?),
            "t_final" => self.t_final = Some(num(key, value)?),
            "entropy" => self.entropy = Some(value.to_string()),
            "relax_band" => self.relax_band = Some(num(key, value)?),
            "boundary" => self.boundary = Some(value.to_string()),
            "scheme" => self.scheme = Some(value.to_string()),
            "cfl_rule" => self.cfl_rule = Some(value.to_string()),
            "projection" => self.projection = Some(value.to_string()),
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "emit" => self.emit = EmitFlags::parse(value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Inverse of [`RunConfig::from_config_str`]: emits only the set fields.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario={}", self.scenario);
        if let Some(v) = self.n_x {
            let _ = writeln!(s, "nx={v}");
        }
        if let Some(v) = self.n_xi {
            let _ = writeln!(s, "nxi={v}");
        }
        if let Some(v) = self.n_u {
            let _ = writeln!(s, "nu={v}");
        }
        if let Some(v) = self.lambda_f {
            let _ = writeln!(s, "lambda_f={v}");
        }
        if let Some(v) = self.cfl {
            let _ = writeln!(s, "cfl={v}");
        }
        if let Some(v) = self.t_final {
            let _ = writeln!(s, "t_final={v}");
        }
        if let Some(v) = &self.entropy {
            let _ = writeln!(s, "entropy={v}");
        }
        if let Some(v) = self.relax_band {
            let _ = writeln!(s, "relax_band={v}");
        }
        if let Some(v) = &self.boundary {
            let _ = writeln!(s, "boundary={v}");
        }
        if let Some(v) = &self.scheme {
            let _ = writeln!(s, "scheme={v}");
        }
        if let Some(v) = &self.cfl_rule {
            let _ = writeln!(s, "cfl_rule={v}");
        }
        if let Some(v) = &self.projection {
            let _ = writeln!(s, "projection={v}");
        }
        if let Some(v) = &self.out_dir {
            let _ = writeln!(s, "out={}", v.display());
        }
        if self.emit != EmitFlags::default() {
            let _ = writeln!(s, "emit={}", self.emit.render());
        }
        s
    }
}

pub fn parse_entropy(s: &str) -> Result<EntropyChoice<f64>> {
    match s {
        "quadratic" => Ok(EntropyChoice::Quadratic),
        "unit" => Ok(EntropyChoice::Unit),
        "kinetic-euler" => Ok(EntropyChoice::KineticEuler { gamma: 1.5, kappa: 1.0 }),
        other => {
            if let Some(c) = other.strip_prefix("shifted-abs:") {
                let c: f64 = c
                    .parse()
                    .map_err(|_| Error::Config(format!("bad shift in entropy '{other}'")))?;
                Ok(EntropyChoice::ShiftedAbs { c })
            } else {
                Err(Error::Config(format!(
                    "unknown entropy '{other}' (quadratic, unit, kinetic-euler, shifted-abs:<c>)"
                )))
            }
        }
    }
}

pub fn entropy_label(e: &EntropyChoice<f64>) -> String {
    match e {
        EntropyChoice::Quadratic => "quadratic".into(),
        EntropyChoice::Unit => "unit".into(),
        EntropyChoice::KineticEuler { .. } => "kinetic-euler".into(),
        EntropyChoice::ShiftedAbs { c } => format!("shifted-abs:{c}"),
    }
}

/// A fully validated run: the scenario plus the resolved discretization.
pub struct Resolved {
    pub scenario: Scenario<f64>,
    pub setup: SolverSetup<f64>,
    pub t_final: f64,
    pub cfl: f64,
    pub cfl_rule: CflRule,
    pub scheme: Scheme,
    pub projection: Projection,
}

pub fn resolve(cfg: &RunConfig) -> Result<Resolved> {
    if cfg.scenario.is_empty() {
        return Err(Error::Config("no scenario selected".into()));
    }
    let scenario = find_scenario::<f64>(&cfg.scenario)?;
    let d = scenario.defaults.clone();

    let n_x = cfg.n_x.unwrap_or(d.n_x);
    let n_xi = cfg.n_xi.unwrap_or(d.n_xi);
    let n_u = cfg.n_u.unwrap_or(d.n_u);
    if n_x < 3 {
        return Err(Error::Config(format!("nx = {n_x} too small (need >= 3)")));
    }
    if n_xi < 1 || n_u < 1 {
        return Err(Error::Config("counts must be >= 1".into()));
    }
    let lambda_f = cfg.lambda_f.unwrap_or(d.lambda_f);
    if !(lambda_f > 0.0 && lambda_f <= 1.0) {
        return Err(Error::Config(format!("lambda_f = {lambda_f} not in (0, 1]")));
    }
    let cfl = cfg.cfl.unwrap_or(d.cfl);
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Config(format!("cfl = {cfl} not in (0, 1]")));
    }
    let t_final = cfg.t_final.unwrap_or(d.t_final);
    if !(t_final > 0.0) {
        return Err(Error::Config(format!("t_final = {t_final} must be positive")));
    }
    let entropy = match &cfg.entropy {
        Some(s) => parse_entropy(s)?,
        None => d.entropy,
    };
    entropy.validate(&scenario.model).map_err(Error::Config)?;
    let boundary = match cfg.boundary.as_deref() {
        None => d.boundary,
        Some("free") => Boundary::Free,
        Some("periodic") => Boundary::Periodic,
        Some(other) => return Err(Error::Config(format!("unknown boundary '{other}'"))),
    };
    let scheme = match cfg.scheme.as_deref() {
        None | Some("mv") => Scheme::MeasureValued,
        Some("collocation") => Scheme::Collocation,
        Some(other) => return Err(Error::Config(format!("unknown scheme '{other}'"))),
    };
    let cfl_rule = match cfg.cfl_rule.as_deref() {
        None => d.cfl_rule,
        Some("global") => CflRule::Global,
        Some("per-step-max") => CflRule::PerStepMax,
        Some("measure") => CflRule::Measure,
        Some(other) => return Err(Error::Config(format!("unknown cfl rule '{other}'"))),
    };
    let projection = match cfg.projection.as_deref() {
        None | Some("midpoint") => Projection::Midpoint,
        Some("gauss") => Projection::GaussAverage,
        Some(other) => return Err(Error::Config(format!("unknown projection '{other}'"))),
    };

    let dim = scenario.model.dim();
    let sgrid = SpatialGrid::new(d.x_lo, d.x_hi, n_x, boundary);
    let rgrid = RandomGrid::new(d.xi_lo, d.xi_hi, n_xi);
    let pgrid = PhaseGrid::new(
        scenario.model.phase_lo(),
        scenario.model.phase_hi(),
        &vec![n_u; dim],
    );
    let closure = ClosureConfig {
        lambda_f,
        relax_band: cfg.relax_band.unwrap_or(false),
        entropy,
    };
    closure.validate(&pgrid)?;
    let setup = SolverSetup { model: scenario.model.clone(), sgrid, rgrid, pgrid, closure };
    Ok(Resolved { scenario, setup, t_final, cfl, cfl_rule, scheme, projection })
}

// ---------------------------------------------------------------------------
// Metrics

/// `dx dxi sum_{i,j} |a - b|`, componentwise.
pub fn l1_error<S: Real>(
    a: &MomentField<S>,
    b: &MomentField<S>,
    sgrid: &SpatialGrid<S>,
    rgrid: &RandomGrid<S>,
) -> Result<StateVec<S>> {
    if a.n_x() != b.n_x() || a.n_xi() != b.n_xi() || a.dim() != b.dim() {
        return Err(Error::GridMismatch(format!(
            "fields are {}x{} (n={}) vs {}x{} (n={})",
            a.n_xi(),
            a.n_x(),
            a.dim(),
            b.n_xi(),
            b.n_x(),
            b.dim()
        )));
    }
    if a.n_x() != sgrid.n_x || a.n_xi() != rgrid.n_xi {
        return Err(Error::GridMismatch("fields do not match the grids".into()));
    }
    let mut acc = StateVec::zeros(a.dim());
    for (va, vb) in a.values().iter().zip(b.values()) {
        acc = acc + (*va - *vb).abs();
    }
    Ok(acc.scale(sgrid.dx() * rgrid.dxi()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyAxis {
    SpatialX,
    RandomXi,
}

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    /// Defined from the second row on: `log(e_prev/e) / log(n/n_prev)`.
    pub rate: Option<f64>,
}

/// For each resolution, run the MV scheme against the collocation reference
/// on identical grids with a shared dt sequence; record the L1 distance at
/// the final time (first component for systems).
pub fn convergence_study(
    axis: StudyAxis,
    resolutions: &[usize],
    base: &RunConfig,
) -> Result<Vec<ConvergenceRow>> {
    if resolutions.is_empty() {
        return Err(Error::Config("no resolutions given".into()));
    }
    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("resolutions must be strictly increasing".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let mut cfg = base.clone();
        match axis {
            StudyAxis::SpatialX => cfg.n_x = Some(n),
            StudyAxis::RandomXi => cfg.n_xi = Some(n),
        }
        let r = resolve(&cfg)?;
        let initial = project_initial(&r.scenario, &r.setup.sgrid, &r.setup.rgrid, r.projection)?;
        let pair = run_pair(&initial, &r.setup, r.t_final, r.cfl_rule, r.cfl)?;
        let err = l1_error(&pair.mv, &pair.coll, &r.setup.sgrid, &r.setup.rgrid)?[0];
        let rate = rows.last().map(|prev: &ConvergenceRow| {
            (prev.error / err).ln() / (n as f64 / prev.n as f64).ln()
        });
        rows.push(ConvergenceRow { n, error: err, rate });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Artifacts and emission

#[derive(Clone, Debug)]
pub struct MeasureRow {
    pub x: f64,
    pub u: StateVec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, Default)]
pub struct MeasureDump {
    pub rows: Vec<MeasureRow>,
}

pub struct RunArtifacts {
    pub field: MomentField<f64>,
    pub sgrid: SpatialGrid<f64>,
    pub rgrid: RandomGrid<f64>,
    pub trace: Vec<TraceRow<f64>>,
    pub measures: Option<MeasureDump>,
    pub table: Option<Vec<ConvergenceRow>>,
}

/// Final-time Young measures, ordered j-major then i, weights above 1e-12.
pub fn dump_measures(field: &MomentField<f64>, setup: &SolverSetup<f64>) -> Result<MeasureDump> {
    let engine = ClosureEngine::new(setup)?;
    let pass = engine.pass(field, setup)?;
    let mut rows = Vec::new();
    for j in 0..field.n_x() {
        let x = setup.sgrid.center(j as i64);
        for i in 0..field.n_xi() {
            let slice = pass.slice(i, j);
            for (l, &w) in slice.weights.iter().enumerate() {
                if w > 1e-12 {
                    rows.push(MeasureRow { x, u: setup.pgrid.center(l), weight: w });
                }
            }
        }
    }
    Ok(MeasureDump { rows })
}

/// Execute a single configured run.
pub fn run_single(r: &Resolved) -> Result<RunArtifacts> {
    let initial = project_initial(&r.scenario, &r.setup.sgrid, &r.setup.rgrid, r.projection)?;
    let (field, trace) = run(&initial, &r.setup, r.t_final, r.scheme, r.cfl_rule, r.cfl)?;
    let measures = match r.scheme {
        Scheme::MeasureValued => Some(dump_measures(&field, &r.setup)?),
        Scheme::Collocation => None,
    };
    Ok(RunArtifacts {
        field,
        sgrid: r.setup.sgrid,
        rgrid: r.setup.rgrid,
        trace,
        measures,
        table: None,
    })
}

/// Run the MV scheme once per entropy with otherwise identical configuration.
pub fn compare_entropies(
    base: &RunConfig,
    entropies: &[EntropyChoice<f64>],
) -> Result<Vec<(EntropyChoice<f64>, RunArtifacts)>> {
    if entropies.is_empty() {
        return Err(Error::Config("no entropies given".into()));
    }
    let mut out = Vec::with_capacity(entropies.len());
    for &e in entropies {
        let mut cfg = base.clone();
        cfg.entropy = Some(entropy_label(&e));
        cfg.scheme = Some("mv".into());
        let r = resolve(&cfg)?;
        if r.setup.model.dim() != 1 {
            return Err(Error::Config("compare-entropy needs a scalar scenario".into()));
        }
        out.push((e, run_single(&r)?));
    }
    Ok(out)
}

/// 17 significant digits, lowercase scientific.
fn sci(v: f64) -> String {
    format!("{:.16e}", v)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    f.write_all(contents.as_bytes())
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Write the flagged CSV files into `dir`; returns the paths written.
pub fn emit_outputs(a: &RunArtifacts, flags: &EmitFlags, dir: &Path) -> Result<Vec<PathBuf>> {
    if *flags == EmitFlags::default() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();

    if flags.field_csv {
        let mut s = String::from("x,xi,component,value\n");
        for j in 0..a.field.n_x() {
            let x = a.sgrid.center(j as i64);
            for i in 0..a.field.n_xi() {
                let xi = a.rgrid.center(i);
                let v = a.field.get(i, j);
                for k in 0..a.field.dim() {
                    let _ = writeln!(s, "{},{},{},{}", sci(x), sci(xi), k + 1, sci(v[k]));
                }
            }
        }
        let path = dir.join("field.csv");
        write_file(&path, &s)?;
        written.push(path);
    }

    if flags.measure_csv {
        let dump = a.measures.as_ref().ok_or_else(|| {
            Error::Config("measure output requested but no measures available".into())
        })?;
        let dim = a.field.dim();
        let mut s = String::from(if dim == 1 { "x,u1,weight\n" } else { "x,u1,u2,weight\n" });
        for row in &dump.rows {
            let mut line = sci(row.x);
            for k in 0..dim {
                let _ = write!(line, ",{}", sci(row.u[k]));
            }
            let _ = writeln!(s, "{line},{}", sci(row.weight));
        }
        let path = dir.join("measure.csv");
        write_file(&path, &s)?;
        written.push(path);
    }

    if flags.trace_csv {
        let mut s = String::from("step,t,dt,total_entropy,wall_ms\n");
        for r in &a.trace {
            let entropy = r.total_entropy.map(sci).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{}", r.step, sci(r.t), sci(r.dt), entropy, sci(r.wall_ms));
        }
        let path = dir.join("trace.csv");
        write_file(&path, &s)?;
        written.push(path);
    }

    if flags.table_csv {
        let table = a
            .table
            .as_ref()
            .ok_or_else(|| Error::Config("table output requested but no table available".into()))?;
        let mut s = String::from("N,error,rate\n");
        for r in table {
            let rate = r.rate.map(sci).unwrap_or_default();
            let _ = writeln!(s, "{},{},{}", r.n, sci(r.error), rate);
        }
        let path = dir.join("table.csv");
        write_file(&path, &s)?;
        written.push(path);
    }

    Ok(written)
}

/// Write a convergence table on its own (the `converge-*` drivers).
pub fn write_table_csv(rows: &[ConvergenceRow], dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let mut s = String::from("N,error,rate\n");
    for r in rows {
        let rate = r.rate.map(sci).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", r.n, sci(r.error), rate);
    }
    let path = dir.join("table.csv");
    write_file(&path, &s)?;
    Ok(path)
}

/// Cap worker parallelism from `MVLP_THREADS` (0 or unset = automatic).
pub fn configure_threads_from_env() {
    if let Ok(v) = std::env::var("MVLP_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
