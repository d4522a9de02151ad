use clap::{Args, Parser, Subcommand};
use iqi_core::analysis::{
    adiabatic_predictor, coarse_grain, find_t_iq, fit_envelope_power_law, fit_envelope_power_law_within, fit_relaxation, fit_scaling_law, fixed_rate_loci,
    limit_constant, physical_estimate, toulouse_constant, Decoherence, RatePoint, ScalingFit, LIMIT_CONSTANT_QUOTED,
};
use iqi_core::cache::cache_dir_from_env;
use iqi_harness::csvio::{read_summary, read_trajectory, write_coarse, Status};
use iqi_harness::plots::{emit_plot_data, locus_levels, Figure};
use iqi_harness::sweep::{default_workers, desk_base, desk_grid, SUMMARY_FILE};
use iqi_harness::{reproduce, run_simulation, run_sweep, HarnessError, Result, RunConfig, SweepSpec};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Long-time decoherence of a qubit in a sub-Ohmic bath (TCL2/TCL4).
///
/// Exit status: 0 success, 1 invalid input or configuration, 2 numerical failure.
/// Generator tables are cached in $IQI_CACHE_DIR when it is set.
#[derive(Parser)]
#[command(name = "iqi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration and write trajectory, coarse-grained data and manifest.
    Simulate(SimulateArgs),
    /// Run or resume a (s, λ²) sweep.
    Sweep(SweepArgs),
    /// Fit ω_IQ = ω₀(λ²/λ_c²)^{z/(1−s)} to a sweep summary.
    FitScaling(FitArgs),
    /// Closed-form adiabatic prediction of T_IQ.
    Adiabatic(ConfigArgs),
    /// Coarse-grain and fit an existing trajectory CSV.
    Analyze(AnalyzeArgs),
    /// Write plot data for one figure.
    EmitPlots(PlotArgs),
    /// ω_IQ in physical units from a scaling fit.
    PhysicalEstimate(PhysicalArgs),
}

/// Configuration layers, later winning: defaults, --preset, --config, --set, named flags.
#[derive(Args, Default)]
struct ConfigArgs {
    /// Start from a named preset (fig1, fig2).
    #[arg(long)]
    preset: Option<String>,
    /// key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set bath.s=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    lambda2: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    omega_c: Option<String>,
    /// 2 or 4.
    #[arg(long)]
    order: Option<String>,
    /// full, averaged, long_time or cutoff.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    /// Output directory (output.dir).
    #[arg(long)]
    out: Option<String>,
    /// Run name (output.name).
    #[arg(long)]
    name: Option<String>,
}

impl ConfigArgs {
    fn build(&self, default: RunConfig) -> Result<RunConfig> {
        let mut c = match &self.preset {
            Some(p) => RunConfig::preset(p)?,
            None => default,
        };
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        for a in &self.sets {
            c.set_assignment(a)?;
        }
        let named = [
            ("bath.s", &self.s),
            ("bath.lambda2", &self.lambda2),
            ("qubit.theta", &self.theta),
            ("bath.omega_c", &self.omega_c),
            ("run.order", &self.order),
            ("run.mode", &self.mode),
            ("run.t_end", &self.t_end),
            ("output.dir", &self.out),
            ("output.name", &self.name),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                c.set(k, v)?;
            }
        }
        Ok(c)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Re-run the configuration recorded in a manifest (with --out to redirect).
    #[arg(long, conflicts_with_all = ["preset", "config", "sets"])]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Base configuration; defaults to the desk-scale long-time base.
    #[command(flatten)]
    config: ConfigArgs,
    /// Sweep directory (summary.csv, sweep.json, points/).
    #[arg(long)]
    dir: PathBuf,
    /// Comma-separated s values (with --grid-lambda2; Cartesian product).
    #[arg(long, value_delimiter = ',')]
    grid_s: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    grid_lambda2: Vec<String>,
    /// Single point s:lambda2 (repeatable).
    #[arg(long = "point", value_name = "S:LAMBDA2")]
    points: Vec<String>,
    /// Concurrent grid points; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep directory or summary CSV.
    #[arg(long)]
    summary: PathBuf,
    /// Number of fixed-ω_IQ loci.
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trajectory CSV (t,rho22,re_rho12,im_rho12).
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long, default_value = "1")]
    delta: String,
    /// Golden-rule T1 guess for the relaxation fit.
    #[arg(long)]
    t1_guess: Option<String>,
    /// Fit the revival envelope over the last decade only.
    #[arg(long)]
    late_envelope: bool,
    /// Write the coarse-grained CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// fig1, fig2, fig3a, fig3b or fig4.
    #[arg(long)]
    figure: String,
    /// Run directory or manifest (fig1, fig2); sweep directory (fig3a, fig3b, fig4).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "plots")]
    out: PathBuf,
}

#[derive(Args)]
struct PhysicalArgs {
    #[arg(long)]
    s: String,
    #[arg(long)]
    lambda2: String,
    /// Qubit splitting Δ in Hz.
    #[arg(long)]
    delta_hz: String,
    /// Take the scaling law from a sweep's fit instead of the parameters below.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value = "6.29")]
    omega0: String,
    #[arg(long, default_value = "0.546")]
    lambda_c2: String,
    #[arg(long, default_value = "1.95")]
    z: String,
}

fn real(key: &str, text: &str) -> Result<f64> {
    iqi_harness::config::parse_real(key, text)
}

fn show(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.6e}"))
}

fn simulate(a: &SimulateArgs, cache: Option<&Path>) -> Result<()> {
    let out = match &a.from_manifest {
        Some(m) => reproduce(m, a.config.out.as_deref().map(Path::new), cache)?,
        None => run_simulation(&a.config.build(RunConfig::default())?, cache)?,
    };
    let s = &out.manifest.summary;
    println!("manifest      {}", out.manifest_path.display());
    println!("samples       {}", out.raw.len());
    println!("T1 (fit)      {}   golden rule {}", show(s.t1_fit), show(s.t1_golden_rule));
    println!("rho22 plateau {}   second order {}", show(s.rho22_plateau_fit), show(s.rho22_second_order));
    println!("T_IQ          {}   ({})", show(s.t_iq), s.decoherence.as_deref().unwrap_or("-"));
    println!("envelope k    {}", show(s.envelope_k));
    for n in &s.notes {
        println!("note          {n}");
    }
    Ok(())
}

fn sweep(a: &SweepArgs, cache: Option<&Path>) -> Result<()> {
    let base = a.config.build(desk_base())?;
    let mut grid = Vec::new();
    if !a.grid_s.is_empty() || !a.grid_lambda2.is_empty() {
        if a.grid_s.is_empty() || a.grid_lambda2.is_empty() {
            return Err(HarnessError::Config("--grid-s and --grid-lambda2 go together".into()));
        }
        for s in &a.grid_s {
            for l in &a.grid_lambda2 {
                grid.push((real("grid-s", s)?, real("grid-lambda2", l)?));
            }
        }
    }
    for p in &a.points {
        let (s, l) = p
            .split_once(':')
            .ok_or_else(|| HarnessError::Config(format!("--point expects S:LAMBDA2, got {p:?}")))?;
        grid.push((real("point", s)?, real("point", l)?));
    }
    if grid.is_empty() {
        grid = desk_grid();
    }
    let spec = SweepSpec {
        grid,
        base,
        dir: a.dir.clone(),
        workers: a.workers.unwrap_or_else(default_workers),
    };
    let out = run_sweep(&spec, cache)?;
    println!(
        "{} computed, {} already done; summary {}",
        out.computed,
        out.skipped,
        a.dir.join(SUMMARY_FILE).display()
    );
    for r in &out.records {
        println!("s={:<6} lambda2={:<10} {:<18} T_IQ={}", r.s, r.lambda2, r.status.as_str(), show(r.t_iq));
    }
    Ok(())
}

fn sweep_fit(summary: &Path) -> Result<(Vec<RatePoint>, ScalingFit)> {
    let path = if summary.is_dir() {
        summary.join(SUMMARY_FILE)
    } else {
        summary.to_path_buf()
    };
    let pts: Vec<RatePoint> = read_summary(&path)?
        .into_iter()
        .filter(|r| r.status == Status::Decohered)
        .filter_map(|r| {
            r.omega_iq.map(|w| RatePoint {
                s: r.s,
                lambda2: r.lambda2,
                omega_iq: w,
            })
        })
        .collect();
    let fit = fit_scaling_law(&pts)?;
    Ok((pts, fit))
}

fn fit_scaling(a: &FitArgs) -> Result<()> {
    let (pts, fit) = sweep_fit(&a.summary)?;
    let se = |i: usize| fit.covariance[i][i].max(0.0).sqrt();
    println!("points      {}", fit.points);
    println!("omega0      {:.6e}  (±{:.2}% )", fit.omega0, 100.0 * se(0));
    println!("lambda_c2   {:.6e}  (±{:.2}% )", fit.lambda_c2, 100.0 * se(1));
    println!("z           {:.6}  (±{:.4})", fit.z, se(2));
    println!("rms(ln w)   {:.3e}", fit.rms_log);
    println!(
        "limit const {:.4}  (quoted {LIMIT_CONSTANT_QUOTED})   Toulouse {:.4}",
        limit_constant(&iqi_core::Qubit::new(1.0, std::f64::consts::PI / 16.0)?),
        toulouse_constant()
    );
    match fixed_rate_loci(&pts, &locus_levels(&pts, a.levels)) {
        Ok(loci) => {
            for l in loci {
                println!(
                    "locus omega={:.3e}  points={}  R2={:.5}  lambda2(s=1)={:.4e}",
                    l.omega_iq,
                    l.points.len(),
                    l.r2,
                    l.lambda2_at_s1
                );
            }
        }
        Err(e) => println!("loci: {e}"),
    }
    Ok(())
}

fn adiabatic(a: &ConfigArgs) -> Result<()> {
    let c = a.build(RunConfig::default())?;
    c.validate()?;
    let p = adiabatic_predictor(&c.qubit()?, &c.bath()?)?;
    println!("drift          {:.6e}   T_IQ {:.6e}   omega_IQ {:.6e}", p.drift, p.t_iq, p.omega_iq());
    println!(
        "scaling limit  {:.6e}   T_IQ {:.6e}   omega_IQ {:.6e}",
        p.drift_scaling,
        p.t_iq_scaling,
        p.omega_iq_scaling()
    );
    Ok(())
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let delta = real("delta", &a.delta)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(HarnessError::Config("--delta must be positive".into()));
    }
    let raw = read_trajectory(&a.trajectory)?;
    let window = 2.0 * std::f64::consts::PI / delta;
    let cg = coarse_grain(&raw, window)?;
    if let Some(t1) = &a.t1_guess {
        let f = fit_relaxation(&raw, 1.0 / real("t1-guess", t1)?)?;
        println!("T1 (fit)    {:.6e}   plateau {:.6e}", f.t1, f.p_inf);
    }
    match find_t_iq(&cg)? {
        Decoherence::Decohered { t_iq, .. } => println!("T_IQ        {t_iq:.6e}"),
        Decoherence::NotYetDecohered => println!("T_IQ        not yet decohered"),
    }
    let t_end = raw.samples.last().map_or(0.0, |s| s.0);
    let env = if a.late_envelope {
        fit_envelope_power_law_within(&raw, delta, t_end / 10.0, t_end)
    } else {
        fit_envelope_power_law(&raw, delta)
    };
    match env {
        Ok(f) => println!("envelope k  {:.6}   c {:.6e}   peaks {}", f.k, f.c, f.peaks.len()),
        Err(e) => println!("envelope    {e}"),
    }
    if let Some(out) = &a.out {
        write_coarse(out, &raw, &cg)?;
        println!("wrote       {}", out.display());
    }
    Ok(())
}

fn physical(a: &PhysicalArgs) -> Result<()> {
    let s = real("s", &a.s)?;
    let lambda2 = real("lambda2", &a.lambda2)?;
    let delta_hz = real("delta-hz", &a.delta_hz)?;
    let fit = match &a.summary {
        Some(p) => sweep_fit(p)?.1,
        None => ScalingFit {
            omega0: real("omega0", &a.omega0)?,
            lambda_c2: real("lambda-c2", &a.lambda_c2)?,
            z: real("z", &a.z)?,
            covariance: vec![vec![0.0; 3]; 3],
            rms_log: 0.0,
            points: 0,
        },
    };
    let w = physical_estimate(&fit, s, lambda2, delta_hz)?;
    println!("omega_IQ/Delta  {:.6e}", fit.rate(s, lambda2));
    println!("omega_IQ [Hz]   {w:.6e}");
    println!("T_IQ [s]        {:.6e}", 1.0 / w);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cache = cache_dir_from_env();
    let cache = cache.as_deref();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, cache),
        Command::Sweep(a) => sweep(a, cache),
        Command::FitScaling(a) => fit_scaling(a),
        Command::Adiabatic(a) => adiabatic(a),
        Command::Analyze(a) => analyze(a),
        Command::EmitPlots(a) => a.figure.parse::<Figure>().and_then(|f| emit_plot_data(f, &a.input, &a.out)).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::PhysicalEstimate(a) => physical(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
