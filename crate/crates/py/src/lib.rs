//! Python bindings. Vectors cross the boundary as 3-tuples of floats.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use rvegen_core::error::Error;
use rvegen_core::geom::{Cylinder, Sphere, Vec3};
use rvegen_core::md::{init_overlapping, relax, MdParams};
use rvegen_core::sample::{self, GenConfig, Provenance, RveSample, Strategy};
use rvegen_core::{rsa, voxel};

create_exception!(
    rvegen,
    StagnationError,
    PyRuntimeError,
    "RSA could not place every inclusion."
);
create_exception!(
    rvegen,
    NonConvergenceError,
    PyRuntimeError,
    "MD relaxation did not remove every contact."
);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Stagnation { .. } => StagnationError::new_err(msg),
        Error::NonConvergence { .. } | Error::BlowUp { .. } => NonConvergenceError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        Error::Config(_) | Error::Geom(_) | Error::Parse(_) | Error::Csv(_) => {
            PyValueError::new_err(msg)
        }
    }
}

type Triple = (f64, f64, f64);

fn vec3(t: Triple) -> Vec3 {
    Vec3::new(t.0, t.1, t.2)
}

fn triple(v: Vec3) -> Triple {
    (v.x, v.y, v.z)
}

fn strategy(s: &str) -> PyResult<Strategy> {
    s.parse()
        .map_err(|e: rvegen_core::error::ConfigError| PyValueError::new_err(e.to_string()))
}

/// A periodic unit-cell sample of spheres and cylinders.
#[pyclass(name = "Sample", module = "rvegen")]
pub struct PySample {
    inner: RveSample,
}

#[pymethods]
impl PySample {
    /// Spheres as `(center, radius)`, cylinders as `(center, radius, half_axis)`.
    #[new]
    #[pyo3(signature = (spheres=Vec::new(), cylinders=Vec::new()))]
    fn new(spheres: Vec<(Triple, f64)>, cylinders: Vec<(Triple, f64, Triple)>) -> PyResult<Self> {
        let geom = |e: rvegen_core::error::GeomError| PyValueError::new_err(e.to_string());
        let spheres = spheres
            .into_iter()
            .map(|(c, r)| Sphere::new(vec3(c), r).map_err(geom))
            .collect::<PyResult<_>>()?;
        let cylinders = cylinders
            .into_iter()
            .map(|(c, r, l)| Cylinder::new(vec3(c), r, vec3(l)).map_err(geom))
            .collect::<PyResult<_>>()?;
        Ok(PySample {
            inner: RveSample::new(spheres, cylinders, Provenance::Manual, 0),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RveSample::from_json(text)
            .map(|inner| PySample { inner })
            .map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        RveSample::load(path)
            .map(|inner| PySample { inner })
            .map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[getter]
    fn spheres(&self) -> Vec<(Triple, f64)> {
        self.inner
            .spheres
            .iter()
            .map(|s| (triple(s.center), s.radius))
            .collect()
    }

    #[getter]
    fn cylinders(&self) -> Vec<(Triple, f64, Triple)> {
        self.inner
            .cylinders
            .iter()
            .map(|c| (triple(c.center), c.radius, triple(c.half_axis)))
            .collect()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn provenance(&self) -> String {
        self.inner.provenance.to_string()
    }

    fn sphere_fraction(&self) -> f64 {
        self.inner.sphere_fraction()
    }

    fn cylinder_fraction(&self) -> f64 {
        self.inner.cylinder_fraction()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Every periodic contact as `(kind, first, second)`, inclusion indices
    /// counting spheres first.
    fn contacts(&self) -> Vec<(String, usize, usize)> {
        self.inner
            .periodic_set()
            .all_contacts()
            .into_iter()
            .map(|c| (c.kind().as_str().to_string(), c.first, c.second))
            .collect()
    }

    fn has_contacts(&self) -> bool {
        self.inner.periodic_set().has_contacts()
    }

    /// Material ids (0 matrix, 1 sphere, 2 cylinder), x fastest.
    fn voxelize<'py>(&self, py: Python<'py>, resolution: usize) -> PyResult<Bound<'py, PyBytes>> {
        let grid = voxel::voxelize(&self.inner, resolution).map_err(to_py)?;
        Ok(PyBytes::new(py, &grid.data))
    }

    /// Monte-Carlo summed pairwise overlap volume as `(volume, std_err)`.
    #[pyo3(signature = (n_points=100_000, seed=0))]
    fn overlap_volume(&self, n_points: u64, seed: u64) -> (f64, f64) {
        let e = voxel::total_overlap_mc(&self.inner, n_points, seed);
        (e.volume, e.std_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Sample(spheres={}, cylinders={}, f_s={:.6}, f_c={:.6}, provenance={})",
            self.inner.spheres.len(),
            self.inner.cylinders.len(),
            self.inner.sphere_fraction(),
            self.inner.cylinder_fraction(),
            self.inner.provenance
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    f_s: f64,
    f_c: f64,
    n_s: usize,
    n_c: usize,
    aspect_ratio: f64,
    seed: u64,
    strategy_name: &str,
    time_budget: f64,
) -> PyResult<GenConfig> {
    Ok(GenConfig::new(f_s, f_c, n_s, n_c, aspect_ratio, seed)
        .with_strategy(strategy(strategy_name)?)
        .with_time_budget(time_budget))
}

/// Random sequential adsorption.
#[pyfunction]
#[pyo3(signature = (f_s, f_c, n_s, n_c, aspect_ratio=3.0, seed=0, strategy="cylinders-first", time_budget=50.0, max_attempts=None))]
#[allow(clippy::too_many_arguments)]
fn generate_rsa(
    py: Python<'_>,
    f_s: f64,
    f_c: f64,
    n_s: usize,
    n_c: usize,
    aspect_ratio: f64,
    seed: u64,
    strategy: &str,
    time_budget: f64,
    max_attempts: Option<u64>,
) -> PyResult<PySample> {
    let mut cfg = config(
        f_s,
        f_c,
        n_s,
        n_c,
        aspect_ratio,
        seed,
        strategy,
        time_budget,
    )?;
    if let Some(m) = max_attempts {
        cfg = cfg.with_max_attempts(m);
    }
    py.detach(|| rsa::generate(&cfg))
        .map(|inner| PySample { inner })
        .map_err(to_py)
}

/// Overlapping random start relaxed by damped MD. Returns `(sample, steps)`.
#[pyfunction]
#[pyo3(signature = (f_s, f_c, n_s, n_c, aspect_ratio=3.0, seed=0, strategy="cylinders-first", time_budget=120.0, dt=None, beta=None, e_stop=None, max_steps=None, rescale=true))]
#[allow(clippy::too_many_arguments)]
fn generate_md(
    py: Python<'_>,
    f_s: f64,
    f_c: f64,
    n_s: usize,
    n_c: usize,
    aspect_ratio: f64,
    seed: u64,
    strategy: &str,
    time_budget: f64,
    dt: Option<f64>,
    beta: Option<f64>,
    e_stop: Option<f64>,
    max_steps: Option<usize>,
    rescale: bool,
) -> PyResult<(PySample, usize)> {
    let cfg = config(
        f_s,
        f_c,
        n_s,
        n_c,
        aspect_ratio,
        seed,
        strategy,
        time_budget,
    )?;
    let defaults = MdParams::default();
    let params = MdParams {
        dt,
        beta: beta.unwrap_or(defaults.beta),
        e_stop,
        max_steps: max_steps.unwrap_or(defaults.max_steps),
        rescale,
        time_budget: Some(time_budget),
        ..defaults
    };
    py.detach(|| {
        let mut st = init_overlapping(&cfg)?;
        let report = relax(&mut st, &params)?;
        Ok((PySample { inner: st.sample }, report.steps))
    })
    .map_err(to_py)
}

/// Radii `(r_s, r_c)` that fill the requested fractions exactly.
#[pyfunction]
fn radii_from_fractions(
    f_s: f64,
    f_c: f64,
    n_s: usize,
    n_c: usize,
    aspect_ratio: f64,
) -> PyResult<(Option<f64>, Option<f64>)> {
    sample::radii_from_fractions(f_s, f_c, n_s, n_c, aspect_ratio)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Smallest cylinder count compatible with the inclusion size limit.
#[pyfunction]
fn min_cylinder_count(f_c: f64, aspect_ratio: f64) -> usize {
    sample::min_cylinder_count(f_c, aspect_ratio)
}

#[pymodule]
fn rvegen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySample>()?;
    m.add_function(wrap_pyfunction!(generate_rsa, m)?)?;
    m.add_function(wrap_pyfunction!(generate_md, m)?)?;
    m.add_function(wrap_pyfunction!(radii_from_fractions, m)?)?;
    m.add_function(wrap_pyfunction!(min_cylinder_count, m)?)?;
    m.add("StagnationError", m.py().get_type::<StagnationError>())?;
    m.add(
        "NonConvergenceError",
        m.py().get_type::<NonConvergenceError>(),
    )?;
    Ok(())
}
