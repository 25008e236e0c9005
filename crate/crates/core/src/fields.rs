//! Dense scalar fields over the `(x₂, z″)` plane: ρ, `∂ρ/∂z″`, line slices
//! and enclosed probability.
//!
//! `z″` is proportional to elapsed time, so `∂ρ/∂z″` carries the same sign
//! field and zero set as `∂ρ/∂t`.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{lerp, GeometryError, Lattice, Region, SlitArray, ZSpacing};
use crate::kernels::{density_at, AmplitudeEvaluator, PointError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Evaluation(#[from] PointError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("finite-difference step h = {h} must satisfy 0 < h < {limit}")]
    BadStep { h: f64, limit: f64 },
    #[error("need {min} or more samples (got {n})")]
    TooFewSamples { n: usize, min: usize },
    #[error("Simpson's rule needs an even interval count (got {0})")]
    OddIntervals(usize),
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("fixed z'' must be finite and > 0 (got {0})")]
    BadSliceZ(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Density,
    DensityTimeDerivative,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Density => "density",
            FieldKind::DensityTimeDerivative => "drho_dz",
        }
    }
}

/// Field samples on a lattice, row-major with `x₂` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldGrid {
    pub lattice: Lattice,
    pub values: Vec<f64>,
    pub kind: FieldKind,
}

impl ScalarFieldGrid {
    pub fn region(&self) -> &Region {
        &self.lattice.region
    }

    pub fn nx(&self) -> usize {
        self.lattice.nx
    }

    pub fn nz(&self) -> usize {
        self.lattice.nz
    }

    pub fn log_z(&self) -> bool {
        self.lattice.z_spacing == ZSpacing::Log
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.lattice.nx + i]
    }

    /// The constant-`z″` row `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.lattice.nx;
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn abs_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(x₂, z″, value)` triples in storage order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| {
            let (x, z) = self.lattice.point(k);
            (x, z, v)
        })
    }
}

fn map_lattice<F>(lattice: &Lattice, f: F) -> Result<Vec<f64>, FieldError>
where
    F: Fn(f64, f64) -> Result<f64, FieldError> + Sync,
{
    (0..lattice.len())
        .into_par_iter()
        .map(|k| {
            let (x, z) = lattice.point(k);
            f(x, z)
        })
        .collect()
}

pub fn density_grid<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    lattice: &Lattice,
    evaluator: &E,
) -> Result<ScalarFieldGrid, FieldError> {
    let values = map_lattice(lattice, |x, z| Ok(density_at(slits, x, z, evaluator)?))?;
    Ok(ScalarFieldGrid {
        lattice: *lattice,
        values,
        kind: FieldKind::Density,
    })
}

/// Default central-difference step at `z″`.
pub fn default_step(zpp: f64) -> f64 {
    (1e-3 * zpp).max(1e-4)
}

/// Central difference `(ρ(x₂, z″ + h) − ρ(x₂, z″ − h)) / 2h`.
pub fn drho_dz_at<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    x2: f64,
    zpp: f64,
    h: f64,
    evaluator: &E,
) -> Result<f64, FieldError> {
    if !(h > 0.0 && h < zpp) {
        return Err(FieldError::BadStep { h, limit: zpp });
    }
    let up = density_at(slits, x2, zpp + h, evaluator)?;
    let down = density_at(slits, x2, zpp - h, evaluator)?;
    Ok((up - down) / (2.0 * h))
}

/// `∂ρ/∂z″` on the lattice. `h = None` uses [`default_step`] at every row;
/// any step must satisfy `0 < h < zpp_min/2`.
pub fn drho_dz_grid<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    lattice: &Lattice,
    h: Option<f64>,
    evaluator: &E,
) -> Result<ScalarFieldGrid, FieldError> {
    let limit = lattice.region.zpp_min / 2.0;
    let step_at = |z: f64| h.unwrap_or_else(|| default_step(z));
    // the default step grows more slowly than z″/2, so the first row decides
    let first = step_at(lattice.region.zpp_min);
    if !(first > 0.0 && first < limit) {
        return Err(FieldError::BadStep { h: first, limit });
    }
    let values = map_lattice(lattice, |x, z| drho_dz_at(slits, x, z, step_at(z), evaluator))?;
    Ok(ScalarFieldGrid {
        lattice: *lattice,
        values,
        kind: FieldKind::DensityTimeDerivative,
    })
}

/// Line along which [`slice_density`] samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceAxis {
    /// Constant `z″`; the range runs over `x₂`.
    FixedZ(f64),
    /// Constant `x₂`; the range runs over `z″`.
    FixedX(f64),
}

/// `n` evenly spaced samples `(coordinate, ρ)` from `lo` to `hi`.
pub fn slice_density<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    axis: SliceAxis,
    lo: f64,
    hi: f64,
    n: usize,
    evaluator: &E,
) -> Result<Vec<(f64, f64)>, FieldError> {
    if n < 2 {
        return Err(FieldError::TooFewSamples { n, min: 2 });
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(FieldError::BadInterval { lo, hi });
    }
    if let SliceAxis::FixedZ(z) = axis {
        if !(z.is_finite() && z > 0.0) {
            return Err(FieldError::BadSliceZ(z));
        }
    }
    if let SliceAxis::FixedX(_) = axis {
        if lo <= 0.0 {
            return Err(FieldError::BadInterval { lo, hi });
        }
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t = lerp(lo, hi, i, n);
            let (x, z) = match axis {
                SliceAxis::FixedZ(z) => (t, z),
                SliceAxis::FixedX(x) => (x, t),
            };
            Ok((t, density_at(slits, x, z, evaluator)?))
        })
        .collect()
}

/// Sum in a fixed balanced-tree order so the result does not depend on how
/// the terms were produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Composite Simpson integral of ρ over `[x_lo, x_hi]` at fixed `z″` with `n`
/// (even, ≥ 16) intervals. A zero-width interval gives 0.
pub fn enclosed_probability<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    zpp: f64,
    x_lo: f64,
    x_hi: f64,
    n: usize,
    evaluator: &E,
) -> Result<f64, FieldError> {
    if !(x_lo.is_finite() && x_hi.is_finite() && x_lo <= x_hi) {
        return Err(FieldError::BadInterval { lo: x_lo, hi: x_hi });
    }
    if n < 16 {
        return Err(FieldError::TooFewSamples { n, min: 16 });
    }
    if n % 2 == 1 {
        return Err(FieldError::OddIntervals(n));
    }
    if !(zpp.is_finite() && zpp > 0.0) {
        return Err(FieldError::BadSliceZ(zpp));
    }
    if x_lo == x_hi {
        return Ok(0.0);
    }
    let h = (x_hi - x_lo) / n as f64;
    let terms: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            Ok(w * density_at(slits, lerp(x_lo, x_hi, i, n + 1), zpp, evaluator)?)
        })
        .collect::<Result<_, FieldError>>()?;
    Ok(pairwise_sum(&terms) * h / 3.0)
}
