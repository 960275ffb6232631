//! Generation configuration and the periodic sample it produces, with the
//! versioned JSON file format.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::geom::{Cylinder, Shape, Sphere};
use crate::periodic::{PeriodicSet, DOMAIN_EDGE};

pub const FORMAT_VERSION: u32 = 1;

/// Order in which RSA places the two phases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    CylindersFirst,
    SpheresFirst,
    /// Proportional alternation: the phase lagging behind its target share
    /// goes next.
    Interleaved,
}

impl FromStr for Strategy {
    type Err = ConfigError;
    fn from_str(s: &str) -> std::result::Result<Self, ConfigError> {
        match s {
            "cylinders-first" => Ok(Strategy::CylindersFirst),
            "spheres-first" => Ok(Strategy::SpheresFirst),
            "interleaved" => Ok(Strategy::Interleaved),
            _ => Err(ConfigError::new(format!(
                "unknown strategy {s:?} (expected cylinders-first, spheres-first or interleaved)"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::CylindersFirst => "cylinders-first",
            Strategy::SpheresFirst => "spheres-first",
            Strategy::Interleaved => "interleaved",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Rsa,
    Md,
    Manual,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Rsa => "rsa",
            Provenance::Md => "md",
            Provenance::Manual => "manual",
        })
    }
}

/// Target composition of a sample and RSA controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub f_s: f64,
    pub f_c: f64,
    pub n_s: usize,
    pub n_c: usize,
    /// Half-length over radius of every cylinder.
    pub aspect_ratio: f64,
    #[serde(default)]
    pub strategy: Strategy,
    pub seed: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts_per_object: u64,
    /// Seconds.
    #[serde(default = "default_time_budget")]
    pub time_budget: f64,
}

fn default_max_attempts() -> u64 {
    1_000_000
}

fn default_time_budget() -> f64 {
    50.0
}

impl GenConfig {
    pub fn new(f_s: f64, f_c: f64, n_s: usize, n_c: usize, aspect_ratio: f64, seed: u64) -> Self {
        GenConfig {
            f_s,
            f_c,
            n_s,
            n_c,
            aspect_ratio,
            strategy: Strategy::default(),
            seed,
            max_attempts_per_object: default_max_attempts(),
            time_budget: default_time_budget(),
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_time_budget(mut self, seconds: f64) -> Self {
        self.time_budget = seconds;
        self
    }

    pub fn with_max_attempts(mut self, attempts: u64) -> Self {
        self.max_attempts_per_object = attempts;
        self
    }

    /// Checks every invariant and returns `(r_s, r_c)`.
    pub fn validate(&self) -> Result<(Option<f64>, Option<f64>), ConfigError> {
        let finite = [self.f_s, self.f_c, self.aspect_ratio, self.time_budget];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::new(
                "fractions, aspect ratio and time budget must be finite",
            ));
        }
        if !(0.0..1.0).contains(&self.f_s) || !(0.0..1.0).contains(&self.f_c) {
            return Err(ConfigError::new("volume fractions must lie in [0, 1)"));
        }
        if self.f_s + self.f_c >= 1.0 {
            return Err(ConfigError::new(format!(
                "f_s + f_c = {} must be < 1",
                self.f_s + self.f_c
            )));
        }
        if self.time_budget <= 0.0 || self.max_attempts_per_object == 0 {
            return Err(ConfigError::new(
                "time budget and attempt cap must be positive",
            ));
        }
        let (r_s, r_c) =
            radii_from_fractions(self.f_s, self.f_c, self.n_s, self.n_c, self.aspect_ratio)?;
        if let Some(r) = r_s {
            if 2.0 * r >= DOMAIN_EDGE {
                return Err(ConfigError::new(format!(
                    "sphere diameter {} must be < 1",
                    2.0 * r
                )));
            }
        }
        if let Some(r) = r_c {
            let h = self.aspect_ratio * r;
            if 2.0 * r >= DOMAIN_EDGE || 2.0 * h >= DOMAIN_EDGE {
                return Err(ConfigError::new(format!(
                    "cylinder length {} and diameter {} must be < 1",
                    2.0 * h,
                    2.0 * r
                )));
            }
            let min_count = min_cylinder_count(self.f_c, self.aspect_ratio);
            if self.n_c < min_count {
                return Err(ConfigError::new(format!(
                    "n_c = {} is below the lower bound ceil(4/pi f_c a^2) = {min_count}",
                    self.n_c
                )));
            }
        }
        Ok((r_s, r_c))
    }
}

/// Fewest cylinders of aspect ratio `a` that fit fraction `f_c` in the unit
/// cell under `2 |l| < 1`.
pub fn min_cylinder_count(f_c: f64, a: f64) -> usize {
    ((4.0 / PI) * f_c * a * a - 1e-12).ceil().max(0.0) as usize
}

/// Radii that make `n` equal inclusions fill exactly the requested
/// fractions. A phase with zero fraction and zero count yields `None`.
pub fn radii_from_fractions(
    f_s: f64,
    f_c: f64,
    n_s: usize,
    n_c: usize,
    aspect_ratio: f64,
) -> Result<(Option<f64>, Option<f64>), ConfigError> {
    let r_s = match (f_s > 0.0, n_s > 0) {
        (true, true) => Some((3.0 * f_s / (4.0 * PI * n_s as f64)).cbrt()),
        (false, false) => None,
        (true, false) => return Err(ConfigError::new("f_s > 0 requires n_s > 0")),
        (false, true) => return Err(ConfigError::new("n_s > 0 requires f_s > 0")),
    };
    let r_c = match (f_c > 0.0, n_c > 0) {
        (true, true) => {
            if !(aspect_ratio > 0.0) {
                return Err(ConfigError::new("aspect ratio must be positive"));
            }
            Some((f_c / (2.0 * PI * aspect_ratio * n_c as f64)).cbrt())
        }
        (false, false) => None,
        (true, false) => return Err(ConfigError::new("f_c > 0 requires n_c > 0")),
        (false, true) => return Err(ConfigError::new("n_c > 0 requires f_c > 0")),
    };
    Ok((r_s, r_c))
}

/// A periodic unit-cell microstructure.
#[derive(Clone, Debug, PartialEq)]
pub struct RveSample {
    pub spheres: Vec<Sphere>,
    pub cylinders: Vec<Cylinder>,
    pub config: Option<GenConfig>,
    pub seed: u64,
    pub provenance: Provenance,
}

impl RveSample {
    pub fn new(
        spheres: Vec<Sphere>,
        cylinders: Vec<Cylinder>,
        provenance: Provenance,
        seed: u64,
    ) -> Self {
        RveSample {
            spheres,
            cylinders,
            config: None,
            seed,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.spheres.len() + self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inclusions in global index order: spheres, then cylinders.
    pub fn shapes(&self) -> Vec<Shape> {
        self.spheres
            .iter()
            .map(|&s| Shape::Sphere(s))
            .chain(self.cylinders.iter().map(|&c| Shape::Cylinder(c)))
            .collect()
    }

    pub fn periodic_set(&self) -> PeriodicSet {
        PeriodicSet::new(self.shapes())
    }

    pub fn sphere_fraction(&self) -> f64 {
        self.spheres.iter().map(Sphere::volume).sum()
    }

    pub fn cylinder_fraction(&self) -> f64 {
        self.cylinders.iter().map(Cylinder::volume).sum()
    }

    pub fn to_file(&self) -> SampleFile {
        SampleFile {
            version: FORMAT_VERSION,
            domain_edge: DOMAIN_EDGE,
            seed: self.seed,
            provenance: self.provenance,
            config: self.config.clone(),
            spheres: self.spheres.clone(),
            cylinders: self.cylinders.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("sample serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SampleFile = serde_json::from_str(text)?;
        file.into_sample()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form of [`RveSample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub version: u32,
    pub domain_edge: f64,
    pub seed: u64,
    pub provenance: Provenance,
    #[serde(default)]
    pub config: Option<GenConfig>,
    #[serde(default)]
    pub spheres: Vec<Sphere>,
    #[serde(default)]
    pub cylinders: Vec<Cylinder>,
}

impl SampleFile {
    pub fn into_sample(self) -> Result<RveSample> {
        if self.version != FORMAT_VERSION {
            return Err(ConfigError::new(format!(
                "unsupported sample format version {}",
                self.version
            ))
            .into());
        }
        if self.domain_edge != DOMAIN_EDGE {
            return Err(
                ConfigError::new("only the unit cell (domain_edge = 1) is supported").into(),
            );
        }
        for s in &self.spheres {
            Sphere::new(s.center, s.radius)?;
        }
        for c in &self.cylinders {
            Cylinder::new(c.center, c.radius, c.half_axis)?;
        }
        Ok(RveSample {
            spheres: self.spheres,
            cylinders: self.cylinders,
            config: self.config,
            seed: self.seed,
            provenance: self.provenance,
        })
    }
}
