//! Aperture geometry, observation coordinates and the scaling map.
//!
//! Lengths are expressed in wavelengths. An aperture is a flat, strictly
//! increasing list of edges; slit `i` spans `[edges[2i], edges[2i + 1]]`.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("even, nonempty edge list required (got {0} edges)")]
    EdgeCount(usize),
    #[error("edge {index} is not finite")]
    NonFiniteEdge { index: usize },
    #[error("edges must be strictly increasing: edge {index} ({value}) <= previous ({previous})")]
    NotIncreasing { index: usize, value: f64, previous: f64 },
    #[error("observation distance z'' must be finite and > 0 (got {0})")]
    NonPositiveZ(f64),
    #[error("transverse position x2 must be finite (got {0})")]
    NonFiniteX(f64),
    #[error("source distance z' must be finite and > 0 (got {0})")]
    NonPositiveSourceDistance(f64),
    #[error("source position x0 must be finite (got {0})")]
    NonFiniteSource(f64),
    #[error("scale factor must be finite and > 0 (got {0})")]
    BadScale(f64),
    #[error("invalid region: {0}")]
    BadRegion(String),
    #[error("lattice needs nx, nz >= 2 (got {nx} x {nz})")]
    BadLattice { nx: usize, nz: usize },
}

/// Unit convention: every length is a multiple of the wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub lambda: f64,
}

impl WaveParams {
    pub const UNIT: WaveParams = WaveParams { lambda: 1.0 };
}

impl Default for WaveParams {
    fn default() -> Self {
        Self::UNIT
    }
}

/// Ordered slit edges on the aperture plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitArray {
    edges: Vec<f64>,
}

impl SlitArray {
    pub fn new(edges: Vec<f64>) -> Result<Self, GeometryError> {
        if edges.is_empty() || edges.len() % 2 != 0 {
            return Err(GeometryError::EdgeCount(edges.len()));
        }
        for (index, &e) in edges.iter().enumerate() {
            if !e.is_finite() {
                return Err(GeometryError::NonFiniteEdge { index });
            }
            if index > 0 && e <= edges[index - 1] {
                return Err(GeometryError::NotIncreasing {
                    index,
                    value: e,
                    previous: edges[index - 1],
                });
            }
        }
        Ok(Self { edges })
    }

    /// One slit of the given width centred at `center`.
    pub fn single(center: f64, width: f64) -> Result<Self, GeometryError> {
        Self::new(vec![center - width / 2.0, center + width / 2.0])
    }

    /// `count` slits of equal `width` whose centres are `pitch` apart,
    /// placed symmetrically about the origin.
    pub fn equal_pitch(count: usize, width: f64, pitch: f64) -> Result<Self, GeometryError> {
        let mut edges = Vec::with_capacity(2 * count);
        let offset = (count as f64 - 1.0) / 2.0;
        for i in 0..count {
            let c = (i as f64 - offset) * pitch;
            edges.push(c - width / 2.0);
            edges.push(c + width / 2.0);
        }
        Self::new(edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn slit_count(&self) -> usize {
        self.edges.len() / 2
    }

    /// `(lower, upper)` edge pairs.
    pub fn slits(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.edges.chunks_exact(2).map(|p| (p[0], p[1]))
    }

    /// Sign of edge `k` in the upper-minus-lower convention.
    pub fn edge_sign(k: usize) -> f64 {
        if k % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        self.slits().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn min_width(&self) -> f64 {
        self.slits().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    /// Mean centre-to-centre distance of neighbouring slits; `None` for a
    /// single slit.
    pub fn inter_slit_distance(&self) -> Option<f64> {
        let c = self.centers();
        if c.len() < 2 {
            return None;
        }
        Some((c[c.len() - 1] - c[0]) / (c.len() - 1) as f64)
    }

    /// Whether `e_k = -e_{2n+1-k}` holds within `tol`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let n = self.edges.len();
        (0..n).all(|k| (self.edges[k] + self.edges[n - 1 - k]).abs() <= tol)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            edges: self.edges.iter().map(|e| e * s).collect(),
        }
    }
}

/// A point `(x₂, z″)` behind the aperture; `z″ > 0` stands in for elapsed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    x2: f64,
    zpp: f64,
}

impl ObservationPoint {
    pub fn new(x2: f64, zpp: f64) -> Result<Self, GeometryError> {
        if !x2.is_finite() {
            return Err(GeometryError::NonFiniteX(x2));
        }
        if !(zpp.is_finite() && zpp > 0.0) {
            return Err(GeometryError::NonPositiveZ(zpp));
        }
        Ok(Self { x2, zpp })
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn zpp(&self) -> f64 {
        self.zpp
    }
}

/// Source leg of the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceConfig {
    /// `z′ → ∞`: the source term drops out of the phase.
    FarField,
    /// Point source at transverse position `x0`, distance `zp` before the aperture.
    Finite { x0: f64, zp: f64 },
}

impl SourceConfig {
    pub fn finite(x0: f64, zp: f64) -> Result<Self, GeometryError> {
        if !x0.is_finite() {
            return Err(GeometryError::NonFiniteSource(x0));
        }
        if !(zp.is_finite() && zp > 0.0) {
            return Err(GeometryError::NonPositiveSourceDistance(zp));
        }
        Ok(SourceConfig::Finite { x0, zp })
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            SourceConfig::FarField => Ok(()),
            SourceConfig::Finite { x0, zp } => Self::finite(x0, zp).map(|_| ()),
        }
    }
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig::FarField
    }
}

/// Rectangular viewing window in the `(x₂, z″)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x2_min: f64,
    pub x2_max: f64,
    pub zpp_min: f64,
    pub zpp_max: f64,
}

impl Region {
    pub fn new(x2_min: f64, x2_max: f64, zpp_min: f64, zpp_max: f64) -> Result<Self, GeometryError> {
        let r = Self {
            x2_min,
            x2_max,
            zpp_min,
            zpp_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let all_finite = [self.x2_min, self.x2_max, self.zpp_min, self.zpp_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(GeometryError::BadRegion("bounds must be finite".into()));
        }
        if self.x2_min >= self.x2_max {
            return Err(GeometryError::BadRegion(format!(
                "x2_min ({}) must be < x2_max ({})",
                self.x2_min, self.x2_max
            )));
        }
        if !(self.zpp_min > 0.0 && self.zpp_min < self.zpp_max) {
            return Err(GeometryError::BadRegion(format!(
                "need 0 < zpp_min ({}) < zpp_max ({})",
                self.zpp_min, self.zpp_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x2: f64, zpp: f64) -> bool {
        x2 >= self.x2_min && x2 <= self.x2_max && zpp >= self.zpp_min && zpp <= self.zpp_max
    }

    /// Image of this window under the scaling map with factor `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            x2_min: self.x2_min * s,
            x2_max: self.x2_max * s,
            zpp_min: self.zpp_min * s * s,
            zpp_max: self.zpp_max * s * s,
        }
    }
}

/// Spacing of lattice rows along `z″`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZSpacing {
    #[default]
    Uniform,
    Log,
}

/// `nx × nz` sample lattice over a [`Region`], uniform in `x₂`.
///
/// Endpoints are hit exactly, and `x(i) = -x(nx - 1 - i)` bit-for-bit on a
/// window symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub region: Region,
    pub nx: usize,
    pub nz: usize,
    pub z_spacing: ZSpacing,
}

impl Lattice {
    pub fn new(region: Region, nx: usize, nz: usize, z_spacing: ZSpacing) -> Result<Self, GeometryError> {
        region.validate()?;
        if nx < 2 || nz < 2 {
            return Err(GeometryError::BadLattice { nx, nz });
        }
        Ok(Self {
            region,
            nx,
            nz,
            z_spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        lerp(self.region.x2_min, self.region.x2_max, i, self.nx)
    }

    pub fn z(&self, j: usize) -> f64 {
        let r = &self.region;
        match self.z_spacing {
            ZSpacing::Uniform => lerp(r.zpp_min, r.zpp_max, j, self.nz),
            ZSpacing::Log => {
                if j == 0 {
                    r.zpp_min
                } else if j + 1 == self.nz {
                    r.zpp_max
                } else {
                    lerp(r.zpp_min.ln(), r.zpp_max.ln(), j, self.nz).exp()
                }
            }
        }
    }

    /// `(i, j)` of a row-major index with `x₂` fastest.
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn point(&self, index: usize) -> (f64, f64) {
        let (i, j) = self.coords(index);
        (self.x(i), self.z(j))
    }
}

/// `i`-th of `n` evenly spaced values from `a` to `b`, both ends exact.
pub fn lerp(a: f64, b: f64, i: usize, n: usize) -> f64 {
    let last = (n - 1) as f64;
    let i = i as f64;
    (a * (last - i) + b * i) / last
}

/// Scaling symmetry: edges and `x₂` scale by `s`, `z″` by `s²`.
pub fn scale_configuration(
    slits: &SlitArray,
    point: ObservationPoint,
    s: f64,
) -> Result<(SlitArray, ObservationPoint), GeometryError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(GeometryError::BadScale(s));
    }
    let point = ObservationPoint::new(point.x2 * s, point.zpp * s * s)?;
    Ok((slits.scaled(s), point))
}

/// Dimensionless edge offsets for one observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoordinate {
    /// `√(π/z″)(e − x₂)`, the ₁F₂ argument scale.
    pub q: f64,
    /// `√(2/z″)(e − x₂)`, the Fresnel-function argument.
    pub u: f64,
}

pub fn reduced_coordinates(slits: &SlitArray, point: ObservationPoint) -> Vec<ReducedCoordinate> {
    let q_scale = (PI / point.zpp).sqrt();
    let u_scale = (2.0 / point.zpp).sqrt();
    slits
        .edges()
        .iter()
        .map(|&e| {
            let d = e - point.x2;
            ReducedCoordinate {
                q: q_scale * d,
                u: u_scale * d,
            }
        })
        .collect()
}
