//! `mdp`: simulate hitting-time moderate deviations and evaluate the
//! associated rate functions.

mod config;
mod output;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdp_core::montecarlo::{rate_curve_from_deviations, scaled_deviations_with};
use mdp_core::rate_functions::{endpoint_infimum, verify_endpoint_infimum};
use mdp_core::{clt_check, lln_check, Execution, ExperimentConfig, PiecewisePath};

use config::{fmt_num, Resolved};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mdp", version, about = "Moderate deviations of random-walk hitting times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo tail rates of (n/a_n)(tau - r/mu) against mu^3 t^2/(2 sigma^2 r)
    RateCurve {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the raw scaled deviations to deviations.csv
        #[arg(long)]
        raw: bool,
    },
    /// Normal limit check for sqrt(n)(tau - r/mu)
    CltCheck(RunArgs),
    /// Median |tau - r/mu| over an increasing list of n
    LlnCheck(RunArgs),
    /// Legendre transform of the CGF at the configured x values
    Legendre(RunArgs),
    /// I_T and J_T of a piecewise-linear path, and the endpoint infimum
    PathRate {
        #[command(flatten)]
        run: RunArgs,
        /// Knot file with one `time value` pair per line
        #[arg(long, value_name = "FILE")]
        path: Option<PathBuf>,
        /// Endpoint constraint f(T) = A
        #[arg(long, num_args = 2, value_names = ["A", "T"], allow_negative_numbers = true)]
        endpoint: Option<Vec<f64>>,
    },
    /// Report whether the increment law satisfies the standing hypotheses
    Validate(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// key = value configuration file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a configuration key
    #[arg(long = "set", visible_alias = "overrides", value_name = "KEY=VALUE", num_args = 1..)]
    set: Vec<String>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Write an SVG plot next to the CSV
    #[arg(long)]
    plot: bool,
    /// Master seed (overrides MDP_SEED and the config file)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replications (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Start from a built-in configuration: example1 or example2
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

impl RunArgs {
    fn resolve(&self, command: &str) -> Result<Resolved, CliError> {
        let env_seed = std::env::var("MDP_SEED").ok();
        config::load(
            command,
            self.preset.as_deref(),
            self.config.as_deref(),
            env_seed.as_deref(),
            &self.set,
            self.seed,
        )?
        .resolve()
    }

    fn execution(&self) -> Execution {
        Execution::with_threads(self.threads)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn experiment(cfg: &Resolved) -> Result<ExperimentConfig, CliError> {
    let exp = ExperimentConfig {
        dist: cfg.dist.spec.clone(),
        n: cfg.n,
        r: cfg.r,
        an_exponent: cfg.exponent,
        replications: cfg.replications,
        t_grid: cfg.t_grid.clone(),
        horizon: cfg.horizon,
        master_seed: cfg.seed,
        tail: cfg.tail,
    };
    exp.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(exp)
}

fn cmd_rate_curve(run: &RunArgs, raw: bool) -> Result<(), CliError> {
    let cfg = run.resolve("rate-curve")?;
    let exp = experiment(&cfg)?;
    let started = std::time::Instant::now();
    let deviations = scaled_deviations_with(&exp, run.execution()).map_err(|e| CliError::Config(e.to_string()))?;
    let curve = rate_curve_from_deviations(&exp, &deviations).map_err(|e| CliError::Config(e.to_string()))?;
    let elapsed = started.elapsed();

    write_file(&run.out, "manifest.txt", &cfg.manifest("rate-curve"))?;
    let rows = curve.primary_rows();
    let csv = write_file(&run.out, "rate_curve.csv", &output::rate_curve_csv(rows))?;
    if exp.tail.includes_upper() && exp.tail.includes_lower() {
        write_file(&run.out, "rate_curve_lower.csv", &output::rate_curve_csv(&curve.lower))?;
    }
    if run.plot {
        let title = format!("{}, n={}, r={}, M={}", cfg.dist.label(), cfg.n, fmt_num(cfg.r), cfg.replications);
        write_file(&run.out, "rate_curve.svg", &svg::rate_curve_svg(rows, &title))?;
    }
    if raw {
        write_file(&run.out, "deviations.csv", &output::deviations_csv(&deviations))?;
    }
    let finite = rows.iter().filter(|r| r.empirical_rate.is_finite()).count();
    println!(
        "rate-curve: {} n={} a_n={:.4} r={} M={} censored={} rows={} finite_rows={} elapsed={:.2}s -> {}",
        cfg.dist.label(),
        cfg.n,
        exp.a_n(),
        fmt_num(cfg.r),
        cfg.replications,
        curve.meta.censored,
        rows.len(),
        finite,
        elapsed.as_secs_f64(),
        csv.display()
    );
    Ok(())
}

fn cmd_clt_check(run: &RunArgs) -> Result<(), CliError> {
    let cfg = run.resolve("clt-check")?;
    let rep = clt_check(&cfg.dist.spec, cfg.n, cfg.r, cfg.replications, cfg.seed, run.execution())
        .map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&run.out, "manifest.txt", &cfg.manifest("clt-check"))?;
    println!("distribution: {}", cfg.dist.label());
    println!("n: {}", cfg.n);
    println!("r: {}", fmt_num(cfg.r));
    println!("replications: {}", cfg.replications);
    println!("sample_mean: {}", fmt_num(rep.sample_mean));
    println!("sample_var: {}", fmt_num(rep.sample_var));
    println!("target_var: {}", fmt_num(rep.target_var));
    println!("ks_distance: {}", fmt_num(rep.ks_distance));
    println!("censored: {}", rep.censored);
    Ok(())
}

fn cmd_lln_check(run: &RunArgs) -> Result<(), CliError> {
    let cfg = run.resolve("lln-check")?;
    let rows = lln_check(&cfg.dist.spec, cfg.r, &cfg.n_list, cfg.replications, cfg.seed, run.execution())
        .map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&run.out, "manifest.txt", &cfg.manifest("lln-check"))?;
    let mut csv = String::from("n,median_abs_dev,censored\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.n, fmt_num(r.median_abs_dev), r.censored));
    }
    write_file(&run.out, "lln.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

fn cmd_legendre(run: &RunArgs) -> Result<(), CliError> {
    let cfg = run.resolve("legendre")?;
    let d = &cfg.dist.spec;
    write_file(&run.out, "manifest.txt", &cfg.manifest("legendre"))?;
    let mut csv = String::from("x,numeric,closed_form\n");
    for &x in &cfg.x {
        let numeric = match d.legendre_numeric(x) {
            Ok(v) => fmt_num(v),
            Err(e) => {
                eprintln!("warning: {e}");
                "nan".to_string()
            }
        };
        let closed = d.legendre_closed_form(x).map(fmt_num).unwrap_or_else(|| "-".into());
        csv.push_str(&format!("{},{numeric},{closed}\n", fmt_num(x)));
    }
    write_file(&run.out, "legendre.csv", &csv)?;
    println!("# {}", cfg.dist.label());
    print!("{csv}");
    Ok(())
}

fn cmd_path_rate(run: &RunArgs, path: Option<&Path>, endpoint: Option<&[f64]>) -> Result<(), CliError> {
    let mut cfg = run.resolve("path-rate")?;
    if let Some(p) = path {
        cfg.path = Some(p.to_path_buf());
    }
    if let Some(e) = endpoint {
        cfg.endpoint = Some((e[0], e[1]));
    }
    if cfg.path.is_none() && cfg.endpoint.is_none() {
        return Err(CliError::Config("path-rate needs --path FILE or --endpoint A T".into()));
    }
    let sigma2 = cfg.sigma2.unwrap_or(cfg.dist.spec.sigma2());
    write_file(&run.out, "manifest.txt", &cfg.manifest("path-rate"))?;
    println!("distribution: {}", cfg.dist.label());
    println!("sigma2: {}", fmt_num(sigma2));
    if let Some(p) = &cfg.path {
        let text = fs::read_to_string(p).map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
        let knots = output::parse_path_file(&text).map_err(CliError::Config)?;
        let path = PiecewisePath::new(knots).map_err(|e| CliError::Config(e.to_string()))?;
        let i_t = path.eval_i(sigma2).map_err(|e| CliError::Config(e.to_string()))?;
        let j_t = path.eval_j(&cfg.dist.spec).map_err(|e| CliError::Config(e.to_string()))?;
        println!("T: {}", fmt_num(path.horizon()));
        println!("f(T): {}", fmt_num(path.endpoint()));
        println!("I_T: {}", fmt_num(i_t));
        println!("J_T: {}", fmt_num(j_t));
    }
    if let Some((a, t)) = cfg.endpoint {
        let closed = endpoint_infimum(a, t, sigma2).map_err(|e| CliError::Config(e.to_string()))?;
        let optimized =
            verify_endpoint_infimum(a, t, sigma2, cfg.segments).map_err(|e| CliError::Config(e.to_string()))?;
        println!("endpoint: a={} T={} segments={}", fmt_num(a), fmt_num(t), cfg.segments);
        println!("endpoint_infimum: {}", fmt_num(closed));
        println!("verify_endpoint_infimum: {}", fmt_num(optimized));
    }
    Ok(())
}

fn cmd_validate(run: &RunArgs) -> Result<(), CliError> {
    let cfg = run.resolve("validate")?;
    let d = &cfg.dist.spec;
    let report = d.check_assumptions();
    write_file(&run.out, "manifest.txt", &cfg.manifest("validate"))?;
    let domain = d.domain();
    println!("distribution: {}", cfg.dist.label());
    println!("mu: {}", fmt_num(d.mu()));
    println!("sigma2: {}", fmt_num(d.sigma2()));
    println!("cgf_domain: ({}, {})", fmt_num(domain.lower), fmt_num(domain.upper));
    println!(
        "assumption1: {} ({})",
        if report.assumption1_holds { "holds" } else { "fails" },
        report.assumption1_detail
    );
    match report.assumption2_witness {
        Some(w) => println!(
            "assumption2: holds (witness search: theta={} v={} b={})",
            fmt_num(w.theta),
            fmt_num(w.v),
            fmt_num(w.b)
        ),
        None => println!("assumption2: no witness found (witness search over theta in 0.1..1.0, v in 1.1, 1.5, 2)"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::RateCurve { run, raw } => cmd_rate_curve(run, *raw),
        Command::CltCheck(run) => cmd_clt_check(run),
        Command::LlnCheck(run) => cmd_lln_check(run),
        Command::Legendre(run) => cmd_legendre(run),
        Command::PathRate { run, path, endpoint } => cmd_path_rate(run, path.as_deref(), endpoint.as_deref()),
        Command::Validate(run) => cmd_validate(run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mdp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
