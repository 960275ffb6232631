//! `rvegen`: generate, validate, voxelize and benchmark periodic RVE samples.
//!
//! Exit codes: 0 success, 1 validation found contacts, 2 configuration
//! error, 3 RSA stagnation, 4 MD non-convergence, 5 file or format error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rvegen_core::bench::{
    compare_crossover, run_scenario, write_crossover_csv, CrossoverSpec, Scenario,
};
use rvegen_core::error::{ConfigError, Error};
use rvegen_core::md::{init_overlapping, relax, write_trace, Integrator, MdParams};
use rvegen_core::rsa;
use rvegen_core::sample::{GenConfig, RveSample, Strategy};
use rvegen_core::voxel::{sidecar_path, total_overlap_mc, voxelize};

const EXIT_CONTACTS: u8 = 1;

#[derive(Parser)]
#[command(
    name = "rvegen",
    version,
    about = "Periodic sphere/cylinder RVE generator"
)]
struct Cli {
    /// Worker threads for data-parallel kernels.
    #[arg(long, global = true, env = "RVEGEN_THREADS")]
    threads: Option<usize>,
    /// Serial, order-fixed reductions everywhere.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sample by RSA or MD relaxation.
    Generate(Box<GenerateArgs>),
    /// Check a sample for contacts and optionally estimate overlap volume.
    Validate(ValidateArgs),
    /// Render a sample to a RAW material grid with a JSON sidecar.
    Voxelize(VoxelizeArgs),
    /// Run a timing scenario or an RSA/MD crossover sweep.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Rsa,
    Md,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "rsa")]
    method: Method,
    /// Base configuration file (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "fs")]
    f_s: Option<f64>,
    #[arg(long = "fc")]
    f_c: Option<f64>,
    #[arg(long = "ns")]
    n_s: Option<usize>,
    #[arg(long = "nc")]
    n_c: Option<usize>,
    /// Cylinder half-length over radius.
    #[arg(long)]
    aspect: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// cylinders-first, spheres-first or interleaved.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    #[arg(long)]
    max_attempts: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    md: MdArgs,
}

#[derive(Args)]
struct MdArgs {
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha_ber: Option<f64>,
    #[arg(long)]
    alpha_nh: Option<f64>,
    /// Absolute potential-energy threshold.
    #[arg(long)]
    e_stop: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    no_rescale: bool,
    #[arg(long)]
    no_nose_hoover: bool,
    #[arg(long, value_enum)]
    integrator: Option<IntegratorArg>,
    /// Energy trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    VelocityVerlet,
    Trapezoid,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Monte-Carlo points for the overlap estimate.
    #[arg(long)]
    mc_points: Option<u64>,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
}

#[derive(Args)]
struct VoxelizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 256)]
    res: usize,
    #[arg(long)]
    out: PathBuf,
    /// Per-phase fractions CSV.
    #[arg(long)]
    fractions: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scenario or crossover specification (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Per-run CSV (scenario) or crossover CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-cell summary CSV (scenario only).
    #[arg(long)]
    cells_out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BenchFile {
    Scenario(Scenario),
    Crossover(CrossoverSpec),
}

#[derive(Deserialize)]
struct ConfigFile {
    #[serde(flatten)]
    gen: PartialGen,
    #[serde(default)]
    md: Option<MdParams>,
}

#[derive(Deserialize, Default)]
struct PartialGen {
    f_s: Option<f64>,
    f_c: Option<f64>,
    n_s: Option<usize>,
    n_c: Option<usize>,
    aspect_ratio: Option<f64>,
    seed: Option<u64>,
    strategy: Option<Strategy>,
    time_budget: Option<f64>,
    max_attempts_per_object: Option<u64>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Geom(_) => 2,
        Error::Stagnation { .. } => 3,
        Error::NonConvergence { .. } | Error::BlowUp { .. } => 4,
        Error::Io(_) | Error::Parse(_) | Error::Csv(_) => 5,
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn build_config(a: &GenerateArgs) -> Result<(GenConfig, MdParams), Error> {
    let (base, md) = match &a.config {
        Some(p) => {
            let f: ConfigFile = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            (f.gen, f.md.unwrap_or_default())
        }
        None => (PartialGen::default(), MdParams::default()),
    };
    let need =
        |name: &str, v: Option<f64>| v.ok_or_else(|| ConfigError::new(format!("missing --{name}")));
    let f_s = need("fs", a.f_s.or(base.f_s))?;
    let f_c = need("fc", a.f_c.or(base.f_c))?;
    let n_s = a.n_s.or(base.n_s).unwrap_or(if f_s > 0.0 { 10 } else { 0 });
    let n_c = a.n_c.or(base.n_c).unwrap_or(if f_c > 0.0 { 10 } else { 0 });
    let aspect = a.aspect.or(base.aspect_ratio).unwrap_or(3.0);
    let mut cfg = GenConfig::new(
        f_s,
        f_c,
        n_s,
        n_c,
        aspect,
        a.seed.or(base.seed).unwrap_or(0),
    );
    if let Some(s) = a.strategy.or(base.strategy) {
        cfg = cfg.with_strategy(s);
    }
    if let Some(t) = a.time_budget.or(base.time_budget) {
        cfg = cfg.with_time_budget(t);
    }
    if let Some(m) = a.max_attempts.or(base.max_attempts_per_object) {
        cfg = cfg.with_max_attempts(m);
    }
    cfg.validate()?;

    let m = &a.md;
    let mut md = MdParams {
        time_budget: Some(cfg.time_budget),
        ..md
    };
    md.dt = m.dt.or(md.dt);
    md.beta = m.beta.unwrap_or(md.beta);
    md.alpha_ber = m.alpha_ber.unwrap_or(md.alpha_ber);
    md.alpha_nh = m.alpha_nh.unwrap_or(md.alpha_nh);
    md.e_stop = m.e_stop.or(md.e_stop);
    md.max_steps = m.max_steps.unwrap_or(md.max_steps);
    md.rescale &= !m.no_rescale;
    md.nh_enabled &= !m.no_nose_hoover;
    if let Some(i) = m.integrator {
        md.integrator = match i {
            IntegratorArg::VelocityVerlet => Integrator::VelocityVerlet,
            IntegratorArg::Trapezoid => Integrator::Trapezoid,
        };
    }
    md.validate()?;
    Ok((cfg, md))
}

fn generate(a: &GenerateArgs, parallel: bool) -> Result<u8, Error> {
    let (cfg, md) = build_config(a)?;
    let sample = match a.method {
        Method::Rsa => rsa::generate(&cfg)?,
        Method::Md => {
            let mut st = init_overlapping(&cfg)?;
            let params = MdParams { parallel, ..md };
            let result = relax(&mut st, &params);
            if let Some(path) = &a.md.trace {
                let trace = match &result {
                    Err(Error::NonConvergence { trace, .. }) => trace.as_slice(),
                    _ => st.trace.as_slice(),
                };
                write_trace(trace, create(path)?)?;
            }
            let report = result?;
            eprintln!(
                "relaxed in {} steps (dt {:e}, E_stop {:e})",
                report.steps, report.dt, report.e_stop
            );
            st.sample
        }
    };
    sample.save(&a.out)?;
    eprintln!(
        "wrote {} spheres and {} cylinders to {} (f_s {}, f_c {})",
        sample.spheres.len(),
        sample.cylinders.len(),
        a.out.display(),
        sample.sphere_fraction(),
        sample.cylinder_fraction()
    );
    Ok(0)
}

fn validate(a: &ValidateArgs, parallel: bool) -> Result<u8, Error> {
    let sample = RveSample::load(&a.input)?;
    let set = sample.periodic_set();
    let contacts = if parallel {
        set.all_contacts_par()
    } else {
        set.all_contacts()
    };
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &contacts {
        *by_kind.entry(c.kind().as_str()).or_default() += 1;
    }
    println!(
        "inclusions: {} spheres, {} cylinders",
        sample.spheres.len(),
        sample.cylinders.len()
    );
    println!("contacts: {}", contacts.len());
    for (k, n) in &by_kind {
        println!("  {k}: {n}");
    }
    for c in &contacts {
        println!(
            "  {} between {} and {} (image shift {:?})",
            c.kind().as_str(),
            c.first,
            c.second,
            c.shift
        );
    }
    if let Some(n) = a.mc_points {
        let est = total_overlap_mc(&sample, n, a.mc_seed);
        println!(
            "overlap volume: {:e} +- {:e} ({} points)",
            est.volume, est.std_err, est.samples
        );
    }
    Ok(if contacts.is_empty() {
        0
    } else {
        EXIT_CONTACTS
    })
}

fn voxelize_cmd(a: &VoxelizeArgs) -> Result<u8, Error> {
    let sample = RveSample::load(&a.input)?;
    let grid = voxelize(&sample, a.res)?;
    grid.save_raw(&a.out, sample.provenance, sample.seed)?;
    for (id, f) in grid.fractions() {
        println!("{id} {}: {f}", grid.legend[&id]);
    }
    if let Some(p) = &a.fractions {
        grid.write_fractions_csv(create(p)?)?;
    }
    eprintln!(
        "wrote {} and {}",
        a.out.display(),
        sidecar_path(&a.out).display()
    );
    Ok(0)
}

fn bench(a: &BenchArgs) -> Result<u8, Error> {
    let file: BenchFile = serde_json::from_str(&std::fs::read_to_string(&a.scenario)?)?;
    match file {
        BenchFile::Scenario(s) => {
            let result = run_scenario(&s)?;
            result.write_runs_csv(create(&a.out)?)?;
            if let Some(p) = &a.cells_out {
                result.write_cells_csv(create(p)?)?;
            }
            result.write_cells_csv(std::io::stdout())?;
        }
        BenchFile::Crossover(c) => {
            let rows = compare_crossover(&c)?;
            write_crossover_csv(&rows, create(&a.out)?)?;
            write_crossover_csv(&rows, std::io::stdout())?;
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let threads = if cli.deterministic {
        Some(1)
    } else {
        cli.threads
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(ConfigError::new("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::new(format!("thread pool: {e}")))?;
    }
    let parallel = !cli.deterministic && rayon::current_num_threads() > 1;
    match &cli.command {
        Command::Generate(a) => generate(a, parallel),
        Command::Validate(a) => validate(a, parallel),
        Command::Voxelize(a) => voxelize_cmd(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
