//! Timing sweeps over generation scenarios.
//!
//! Run `k` of a cell uses seed `seed_base + k`. Failures (stagnation,
//! non-convergence) are recorded, never propagated. Times cover generation
//! only, not serialization.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::md::{init_overlapping, relax, MdParams};
use crate::rsa;
use crate::sample::{GenConfig, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Rsa,
    Md,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Rsa => "rsa",
            Generator::Md => "md",
        }
    }
}

fn default_runs() -> usize {
    20
}

fn default_time_cap() -> f64 {
    50.0
}

/// One sweep: every `(f_s, f_c)` cell crossed with every aspect ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub generator: Generator,
    pub cells: Vec<[f64; 2]>,
    pub n_s: usize,
    pub n_c: usize,
    pub aspect_ratios: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Seconds per run.
    #[serde(default = "default_time_cap")]
    pub time_cap: f64,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub md: MdParams,
    /// Run cells concurrently. Each run stays single-threaded.
    #[serde(default)]
    pub parallel_cells: bool,
}

impl Scenario {
    pub fn new(
        generator: Generator,
        cells: Vec<[f64; 2]>,
        n_s: usize,
        n_c: usize,
        aspect_ratios: Vec<f64>,
    ) -> Self {
        Scenario {
            generator,
            cells,
            n_s,
            n_c,
            aspect_ratios,
            runs: default_runs(),
            time_cap: default_time_cap(),
            seed_base: 0,
            strategy: Strategy::default(),
            md: MdParams::default(),
            parallel_cells: false,
        }
    }

    /// Cartesian product of sphere and cylinder fractions.
    pub fn grid(f_s: &[f64], f_c: &[f64]) -> Vec<[f64; 2]> {
        f_s.iter()
            .flat_map(|&s| f_c.iter().map(move |&c| [s, c]))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.runs == 0 {
            return Err(ConfigError::new("runs must be at least 1"));
        }
        if !(self.time_cap > 0.0) {
            return Err(ConfigError::new("time cap must be positive"));
        }
        if self.aspect_ratios.is_empty() {
            return Err(ConfigError::new("at least one aspect ratio is required"));
        }
        for &[f_s, f_c] in &self.cells {
            if !(f_s + f_c < 1.0) {
                return Err(ConfigError::new(format!(
                    "cell ({f_s}, {f_c}) violates f_s + f_c < 1"
                )));
            }
        }
        self.md.validate()
    }

    /// Generation config of a cell; zero fractions drop their phase.
    pub fn config(&self, f_s: f64, f_c: f64, aspect: f64, seed: u64) -> GenConfig {
        let n_s = if f_s > 0.0 { self.n_s } else { 0 };
        let n_c = if f_c > 0.0 { self.n_c } else { 0 };
        GenConfig::new(f_s, f_c, n_s, n_c, aspect, seed)
            .with_strategy(self.strategy)
            .with_time_budget(self.time_cap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub seconds: f64,
    pub success: bool,
    /// `ok`, `stagnation`, `non-convergence`, `blow-up` or `config`.
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub f_s: f64,
    pub f_c: f64,
    pub aspect_ratio: f64,
    pub runs: Vec<RunRecord>,
}

impl CellResult {
    pub fn success_count(&self) -> usize {
        self.runs.iter().filter(|r| r.success).count()
    }

    /// Mean time of successful runs; `None` for an all-failed cell.
    pub fn mean_time(&self) -> Option<f64> {
        let ok: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.success)
            .map(|r| r.seconds)
            .collect();
        (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
    }

    /// Sample standard deviation of successful run times.
    pub fn std_time(&self) -> Option<f64> {
        let ok: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.success)
            .map(|r| r.seconds)
            .collect();
        if ok.len() < 2 {
            return None;
        }
        let m = ok.iter().sum::<f64>() / ok.len() as f64;
        Some((ok.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (ok.len() - 1) as f64).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub generator: Generator,
    pub strategy: Strategy,
    pub cells: Vec<CellResult>,
}

fn outcome_name(e: &Error) -> &'static str {
    match e {
        Error::Stagnation { .. } => "stagnation",
        Error::NonConvergence { .. } => "non-convergence",
        Error::BlowUp { .. } => "blow-up",
        Error::Config(_) => "config",
        _ => "error",
    }
}

/// One timed generation.
pub fn run_once(generator: Generator, config: &GenConfig, md: &MdParams) -> RunRecord {
    let start = Instant::now();
    let result = match generator {
        Generator::Rsa => rsa::generate(config).map(|_| ()),
        Generator::Md => {
            let params = MdParams {
                time_budget: Some(config.time_budget),
                ..md.clone()
            };
            init_overlapping(config)
                .and_then(|mut st| relax(&mut st, &params))
                .map(|_| ())
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    RunRecord {
        seed: config.seed,
        seconds,
        success: result.is_ok(),
        outcome: result.err().map_or("ok", |e| outcome_name(&e)).to_string(),
    }
}

pub fn run_scenario(s: &Scenario) -> Result<BenchResult> {
    s.validate()?;
    let jobs: Vec<(f64, f64, f64)> = s
        .cells
        .iter()
        .flat_map(|&[f_s, f_c]| s.aspect_ratios.iter().map(move |&a| (f_s, f_c, a)))
        .collect();
    let run_cell = |&(f_s, f_c, a): &(f64, f64, f64)| CellResult {
        f_s,
        f_c,
        aspect_ratio: a,
        runs: (0..s.runs as u64)
            .map(|k| run_once(s.generator, &s.config(f_s, f_c, a, s.seed_base + k), &s.md))
            .collect(),
    };
    let cells = if s.parallel_cells {
        jobs.par_iter().map(run_cell).collect()
    } else {
        jobs.iter().map(run_cell).collect()
    };
    Ok(BenchResult {
        generator: s.generator,
        strategy: s.strategy,
        cells,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v}"))
}

impl BenchResult {
    /// One row per run.
    pub fn write_runs_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "generator",
            "strategy",
            "f_s",
            "f_c",
            "aspect_ratio",
            "seed",
            "seconds",
            "success",
            "outcome",
        ])?;
        for c in &self.cells {
            for r in &c.runs {
                out.write_record([
                    self.generator.name().to_string(),
                    self.strategy.to_string(),
                    c.f_s.to_string(),
                    c.f_c.to_string(),
                    c.aspect_ratio.to_string(),
                    r.seed.to_string(),
                    r.seconds.to_string(),
                    r.success.to_string(),
                    r.outcome.clone(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// One row per cell; time columns are blank for all-failed cells.
    pub fn write_cells_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "generator",
            "strategy",
            "f_s",
            "f_c",
            "aspect_ratio",
            "runs",
            "successes",
            "mean_seconds",
            "std_seconds",
        ])?;
        for c in &self.cells {
            out.write_record([
                self.generator.name().to_string(),
                self.strategy.to_string(),
                c.f_s.to_string(),
                c.f_c.to_string(),
                c.aspect_ratio.to_string(),
                c.runs.len().to_string(),
                c.success_count().to_string(),
                opt(c.mean_time()),
                opt(c.std_time()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `start, start + step, ...` up to `stop` inclusive, each value rounded to
/// 12 decimals so that `0.1` is exactly the literal.
pub fn fraction_sweep(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// RSA versus MD on a one-parameter family of compositions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverSpec {
    /// Total volume fractions to visit.
    pub fractions: Vec<f64>,
    /// Part of each total given to spheres, in `[0, 1]`.
    #[serde(default)]
    pub sphere_share: f64,
    #[serde(default)]
    pub n_s: usize,
    pub n_c: usize,
    pub aspect_ratio: f64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_time_cap")]
    pub time_cap: f64,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default)]
    pub md: MdParams,
}

impl CrossoverSpec {
    /// Cylinders only, fraction step 0.01.
    pub fn cylinders_only(f_max: f64, n_c: usize, aspect_ratio: f64) -> Self {
        CrossoverSpec {
            fractions: fraction_sweep(0.01, f_max, 0.01),
            sphere_share: 0.0,
            n_s: 0,
            n_c,
            aspect_ratio,
            runs: default_runs(),
            time_cap: default_time_cap(),
            seed_base: 0,
            md: MdParams::default(),
        }
    }

    fn scenario(&self, generator: Generator) -> Scenario {
        let cells = self
            .fractions
            .iter()
            .map(|&f| [f * self.sphere_share, f * (1.0 - self.sphere_share)])
            .collect();
        Scenario {
            runs: self.runs,
            time_cap: self.time_cap,
            seed_base: self.seed_base,
            md: self.md.clone(),
            parallel_cells: true,
            ..Scenario::new(
                generator,
                cells,
                self.n_s,
                self.n_c,
                vec![self.aspect_ratio],
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub f: f64,
    pub rsa_mean: Option<f64>,
    pub md_mean: Option<f64>,
    pub rsa_success: f64,
    pub md_success: f64,
}

pub fn compare_crossover(spec: &CrossoverSpec) -> Result<Vec<CrossoverRow>> {
    if spec.fractions.is_empty() {
        return Ok(Vec::new());
    }
    if !(0.0..=1.0).contains(&spec.sphere_share) {
        return Err(ConfigError::new("sphere share must lie in [0, 1]").into());
    }
    let rsa = run_scenario(&spec.scenario(Generator::Rsa))?;
    let md = run_scenario(&spec.scenario(Generator::Md))?;
    let rate = |c: &CellResult| c.success_count() as f64 / c.runs.len() as f64;
    Ok(spec
        .fractions
        .iter()
        .zip(rsa.cells.iter().zip(&md.cells))
        .map(|(&f, (r, m))| CrossoverRow {
            f,
            rsa_mean: r.mean_time(),
            md_mean: m.mean_time(),
            rsa_success: rate(r),
            md_success: rate(m),
        })
        .collect())
}

/// Columns `f,rsa_mean,md_mean,rsa_success,md_success`; blank means.
pub fn write_crossover_csv<W: Write>(rows: &[CrossoverRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["f", "rsa_mean", "md_mean", "rsa_success", "md_success"])?;
    for r in rows {
        out.write_record([
            r.f.to_string(),
            opt(r.rsa_mean),
            opt(r.md_mean),
            r.rsa_success.to_string(),
            r.md_success.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
