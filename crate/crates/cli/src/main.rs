//! `mvflux` command line: run the measure-closure and collocation solvers,
//! convergence studies and entropy comparisons, emitting CSV data files.

use clap::{Args, Parser, Subcommand};
use mvflux::harness::{
    self, compare_entropies, convergence_study, emit_outputs, entropy_label, l1_error,
    parse_entropy, resolve, run_single, EmitFlags, RunConfig, StudyAxis,
};
use mvflux::scenario::builtin_scenarios;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mvflux", version, about = "Measure-valued solver for random conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Flat key=value config file supplying defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name (see `list-scenarios`).
    #[arg(long)]
    scenario: Option<String>,
    /// Spatial cell count.
    #[arg(long)]
    nx: Option<usize>,
    /// Random-space cell count.
    #[arg(long)]
    nxi: Option<usize>,
    /// Phase cells per state dimension.
    #[arg(long)]
    nu: Option<usize>,
    /// Young-measure support cap factor in (0, 1].
    #[arg(long)]
    lambda_f: Option<f64>,
    /// CFL number in (0, 1].
    #[arg(long)]
    cfl: Option<f64>,
    /// Final time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Entropy: quadratic | unit | kinetic-euler | shifted-abs:<c>.
    #[arg(long)]
    entropy: Option<String>,
    /// Scheme: mv | collocation.
    #[arg(long)]
    scheme: Option<String>,
    /// Relax the moment rows to a +-spacing band.
    #[arg(long)]
    relax_band: Option<bool>,
    /// Boundary: free | periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// CFL rule: global | per-step-max | measure.
    #[arg(long)]
    cfl_rule: Option<String>,
    /// Initial projection: midpoint | gauss.
    #[arg(long)]
    projection: Option<String>,
    /// Output directory for emitted files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma list of outputs: field,measure,trace,table.
    #[arg(long)]
    emit: Option<String>,
}

impl CommonOpts {
    fn build_config(&self) -> Result<RunConfig, mvflux::Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| {
                    mvflux::Error::Io { path: path.clone(), source }
                })?;
                RunConfig::from_config_str(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.scenario {
            cfg.scenario = v.clone();
        }
        macro_rules! over {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    cfg.$field = Some(v.clone());
                }
            };
        }
        if let Some(v) = self.nx {
            cfg.n_x = Some(v);
        }
        if let Some(v) = self.nxi {
            cfg.n_xi = Some(v);
        }
        if let Some(v) = self.nu {
            cfg.n_u = Some(v);
        }
        if let Some(v) = self.lambda_f {
            cfg.lambda_f = Some(v);
        }
        if let Some(v) = self.cfl {
            cfg.cfl = Some(v);
        }
        if let Some(v) = self.t_final {
            cfg.t_final = Some(v);
        }
        if let Some(v) = self.relax_band {
            cfg.relax_band = Some(v);
        }
        over!(entropy);
        over!(scheme);
        over!(boundary);
        over!(cfl_rule);
        over!(projection);
        if let Some(v) = &self.out {
            cfg.out_dir = Some(v.clone());
        }
        if let Some(v) = &self.emit {
            cfg.emit = EmitFlags::parse(v)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme on one scenario.
    Run(CommonOpts),
    /// Convergence study refining the spatial grid.
    ConvergeX(ConvergeOpts),
    /// Convergence study refining the random-space grid.
    ConvergeXi(ConvergeOpts),
    /// Run the MV scheme once per entropy and report pairwise L1 distances.
    CompareEntropy(CompareOpts),
    /// List the built-in scenarios and their defaults.
    ListScenarios,
}

#[derive(Args)]
struct ConvergeOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Strictly increasing resolutions, e.g. 40,60,80.
    #[arg(long, value_delimiter = ',', required = true)]
    resolutions: Vec<usize>,
}

#[derive(Args)]
struct CompareOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Comma list of entropies to compare.
    #[arg(long, value_delimiter = ',', required = true)]
    entropies: Vec<String>,
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    harness::configure_threads_from_env();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), mvflux::Error> {
    match cli.command {
        Command::Run(opts) => {
            let cfg = opts.build_config()?;
            let r = resolve(&cfg)?;
            let artifacts = run_single(&r)?;
            let steps = artifacts.trace.len();
            println!(
                "{}: {} scheme, {} steps to t = {}",
                cfg.scenario,
                cfg.scheme.as_deref().unwrap_or("mv"),
                steps,
                artifacts.field.time
            );
            let written = emit_outputs(&artifacts, &cfg.emit, &out_dir(&cfg))?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::ConvergeX(opts) => converge(StudyAxis::SpatialX, opts),
        Command::ConvergeXi(opts) => converge(StudyAxis::RandomXi, opts),
        Command::CompareEntropy(opts) => {
            let cfg = opts.common.build_config()?;
            let entropies = opts
                .entropies
                .iter()
                .map(|s| parse_entropy(s))
                .collect::<Result<Vec<_>, _>>()?;
            let runs = compare_entropies(&cfg, &entropies)?;
            let base = out_dir(&cfg);
            for (entropy, artifacts) in &runs {
                let label = entropy_label(entropy).replace(':', "-");
                let dir = base.join(&label);
                let written = emit_outputs(artifacts, &cfg.emit, &dir)?;
                for p in written {
                    println!("wrote {}", p.display());
                }
            }
            for a in 0..runs.len() {
                for b in (a + 1)..runs.len() {
                    let (ea, ra) = &runs[a];
                    let (eb, rb) = &runs[b];
                    let d = l1_error(&ra.field, &rb.field, &ra.sgrid, &ra.rgrid)?;
                    println!(
                        "L1({}, {}) = {:e}",
                        entropy_label(ea),
                        entropy_label(eb),
                        d[0]
                    );
                }
            }
            Ok(())
        }
        Command::ListScenarios => {
            for s in builtin_scenarios::<f64>() {
                let d = &s.defaults;
                println!(
                    "{:18} model={:7} x=[{}, {}] nx={} nxi={} nu={} T={} lambda_f={} cfl_rule={:?}",
                    s.name,
                    s.model.name(),
                    d.x_lo,
                    d.x_hi,
                    d.n_x,
                    d.n_xi,
                    d.n_u,
                    d.t_final,
                    d.lambda_f,
                    d.cfl_rule
                );
            }
            Ok(())
        }
    }
}

fn converge(axis: StudyAxis, opts: ConvergeOpts) -> Result<(), mvflux::Error> {
    let cfg = opts.common.build_config()?;
    let rows = convergence_study(axis, &opts.resolutions, &cfg)?;
    println!("N,error,rate");
    for r in &rows {
        match r.rate {
            Some(rate) => println!("{},{:e},{:.4}", r.n, r.error, rate),
            None => println!("{},{:e},", r.n, r.error),
        }
    }
    if cfg.emit.table_csv {
        let path = harness::write_table_csv(&rows, &out_dir(&cfg))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
