//! Voxelization of a periodic sample and Monte-Carlo volume measurements.
//!
//! A voxel takes the id of the phase containing its center. Inclusions are
//! painted spheres first, cylinders second, so a cylinder wins a contested
//! voxel. Membership is closed and periodic.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Result};
use crate::geom::{Shape, Vec3};
use crate::intersect::OverlapEstimate;
use crate::sample::{Provenance, RveSample};

pub const MATRIX_ID: u8 = 0;
pub const SPHERE_ID: u8 = 1;
pub const CYLINDER_ID: u8 = 2;

pub fn default_legend() -> BTreeMap<u8, String> {
    BTreeMap::from([
        (MATRIX_ID, "matrix".to_string()),
        (SPHERE_ID, "sphere".to_string()),
        (CYLINDER_ID, "cylinder".to_string()),
    ])
}

/// Whether `p` lies in `shape`, boundary included. With `periodic`, every
/// lattice image of the shape is considered.
pub fn point_in(shape: &Shape, p: Vec3, periodic: bool) -> bool {
    if !periodic {
        return shape.contains(p);
    }
    image_count(shape, p) > 0
}

/// Number of lattice images of `shape` containing `p`.
fn image_count(shape: &Shape, p: Vec3) -> u32 {
    let c = shape.center();
    let r2 = shape.bounding_radius().powi(2);
    let d = p - c;
    let base = d.map(|x| x.round());
    let mut n = 0;
    for sx in -1..=1 {
        for sy in -1..=1 {
            for sz in -1..=1 {
                let s = base + Vec3::new(sx as f64, sy as f64, sz as f64);
                if (d - s).norm_squared() <= r2 && shape.contains(p - s) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Dense material-id grid, x fastest: `data[x + n * (y + n * z)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoxelGrid {
    pub resolution: usize,
    pub data: Vec<u8>,
    pub legend: BTreeMap<u8, String>,
}

/// Sidecar metadata stored next to a RAW grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub resolution: usize,
    pub order: String,
    pub legend: BTreeMap<u8, String>,
    pub provenance: Provenance,
    pub seed: u64,
}

impl VoxelGrid {
    pub fn empty(resolution: usize) -> Self {
        VoxelGrid {
            resolution,
            data: vec![MATRIX_ID; resolution.pow(3)],
            legend: default_legend(),
        }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.resolution * (y + self.resolution * z)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        self.data[self.index(x, y, z)]
    }

    /// Grid whose voxel `i + k` (mod resolution) holds this grid's voxel `i`.
    pub fn rolled(&self, k: [usize; 3]) -> VoxelGrid {
        let n = self.resolution;
        let mut out = VoxelGrid {
            resolution: n,
            data: vec![0; self.data.len()],
            legend: self.legend.clone(),
        };
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let j = out.index((x + k[0]) % n, (y + k[1]) % n, (z + k[2]) % n);
                    out.data[j] = self.get(x, y, z);
                }
            }
        }
        out
    }

    /// Fraction of voxels per legend id.
    pub fn fractions(&self) -> BTreeMap<u8, f64> {
        self.legend
            .keys()
            .map(|&id| (id, volume_fraction(self, id)))
            .collect()
    }

    pub fn header(&self, provenance: Provenance, seed: u64) -> GridHeader {
        GridHeader {
            resolution: self.resolution,
            order: "x-fastest".to_string(),
            legend: self.legend.clone(),
            provenance,
            seed,
        }
    }

    /// Writes `path` as raw bytes and `<path>.json` as its header.
    pub fn save_raw(
        &self,
        path: impl AsRef<Path>,
        provenance: Provenance,
        seed: u64,
    ) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, &self.data)?;
        let header = serde_json::to_string_pretty(&self.header(provenance, seed))?;
        std::fs::write(sidecar_path(path), header)?;
        Ok(())
    }

    pub fn load_raw(path: impl AsRef<Path>) -> Result<(VoxelGrid, GridHeader)> {
        let path = path.as_ref();
        let header: GridHeader =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        let data = std::fs::read(path)?;
        if data.len() != header.resolution.pow(3) {
            return Err(ConfigError::new(format!(
                "raw grid holds {} bytes, header resolution {} needs {}",
                data.len(),
                header.resolution,
                header.resolution.pow(3)
            ))
            .into());
        }
        Ok((
            VoxelGrid {
                resolution: header.resolution,
                data,
                legend: header.legend.clone(),
            },
            header,
        ))
    }

    /// CSV with columns `id,phase,fraction`.
    pub fn write_fractions_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "phase", "fraction"])?;
        for (id, f) in self.fractions() {
            out.write_record([id.to_string(), self.legend[&id].clone(), format!("{f}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn sidecar_path(raw: &Path) -> std::path::PathBuf {
    let mut s = raw.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Unwrapped voxel-index range covering `[lo, hi]` along one axis.
fn index_range(lo: f64, hi: f64, n: usize) -> std::ops::RangeInclusive<i64> {
    let nf = n as f64;
    let a = (lo * nf - 0.5).floor() as i64;
    let b = (hi * nf - 0.5).ceil() as i64;
    a..=b
}

struct Footprint {
    shape: Shape,
    id: u8,
    ranges: [std::ops::RangeInclusive<i64>; 3],
}

pub fn voxelize(sample: &RveSample, resolution: usize) -> Result<VoxelGrid> {
    if resolution == 0 {
        return Err(ConfigError::new("resolution must be at least 1").into());
    }
    let n = resolution;
    let nf = n as f64;
    let prints: Vec<Footprint> = sample
        .spheres
        .iter()
        .map(|s| (Shape::Sphere(*s), SPHERE_ID))
        .chain(
            sample
                .cylinders
                .iter()
                .map(|c| (Shape::Cylinder(*c), CYLINDER_ID)),
        )
        .map(|(shape, id)| {
            let c = shape.center();
            let e = shape.aabb_half_extent();
            let ranges = [0, 1, 2].map(|k| {
                index_range(
                    c.component(k) - e.component(k),
                    c.component(k) + e.component(k),
                    n,
                )
            });
            Footprint { shape, id, ranges }
        })
        .collect();

    let mut grid = VoxelGrid::empty(n);
    let wrap = |i: i64| i.rem_euclid(n as i64) as usize;
    let center = |i: i64| (i as f64 + 0.5) / nf;
    grid.data
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(z, slab)| {
            for fp in &prints {
                for zi in fp.ranges[2].clone().filter(|&zi| wrap(zi) == z) {
                    for yi in fp.ranges[1].clone() {
                        let row = wrap(yi) * n;
                        for xi in fp.ranges[0].clone() {
                            if fp
                                .shape
                                .contains(Vec3::new(center(xi), center(yi), center(zi)))
                            {
                                slab[row + wrap(xi)] = fp.id;
                            }
                        }
                    }
                }
            }
        });
    Ok(grid)
}

pub fn volume_fraction(grid: &VoxelGrid, id: u8) -> f64 {
    let count = grid.data.iter().filter(|&&v| v == id).count();
    count as f64 / grid.data.len() as f64
}

const MC_CHUNK: u64 = 4096;

/// Monte-Carlo estimate of the summed pairwise intersection volume over all
/// periodic images: each uniform point contributes `m(m-1)/2`, with `m`
/// the number of inclusion images containing it. Deterministic for a seed
/// regardless of thread count.
pub fn total_overlap_mc(sample: &RveSample, n_points: u64, seed: u64) -> OverlapEstimate {
    let n_points = n_points.max(1);
    let shapes = sample.shapes();
    let chunks = n_points.div_ceil(MC_CHUNK);
    let (sum, sum_sq, hits) = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = MC_CHUNK.min(n_points - k * MC_CHUNK);
            let (mut s, mut s2, mut h) = (0.0, 0.0, 0u64);
            for _ in 0..len {
                let p = Vec3::new(rng.random(), rng.random(), rng.random());
                let m: u32 = shapes.iter().map(|sh| image_count(sh, p)).sum();
                if m > 1 {
                    let v = (m * (m - 1) / 2) as f64;
                    s += v;
                    s2 += v * v;
                    h += 1;
                }
            }
            (s, s2, h)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0, 0u64), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = n_points as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    OverlapEstimate {
        volume: mean,
        std_err: (var / n).sqrt(),
        hits,
        samples: n_points,
    }
}
