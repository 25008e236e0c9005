//! Null maps: where the probability density nearly vanishes.
//!
//! Densities are divided by a normalization (by default the largest ρ seen on
//! the sampled set) before they are compared against the threshold, so the
//! threshold is independent of each evaluator's dropped prefactor.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{GeometryError, Lattice, Region, SlitArray, ZSpacing};
use crate::kernels::{self, AmplitudeEvaluator, PointError};

pub const DEFAULT_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NullMapError {
    #[error(transparent)]
    Evaluation(#[from] PointError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("threshold must be finite and >= 0 (got {0})")]
    BadThreshold(f64),
    #[error("at least one sample required")]
    NoSamples,
    #[error("normalization must be finite and > 0 (got {0})")]
    BadNormalization(f64),
    #[error("transition detection needs at least 2 slits (got {0})")]
    TooFewSlits(usize),
    #[error("invalid setting: {0}")]
    BadSetting(String),
}

fn density_at<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    x2: f64,
    zpp: f64,
    evaluator: &E,
) -> Result<f64, NullMapError> {
    Ok(kernels::density_at(slits, x2, zpp, evaluator)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Grid,
    MonteCarlo,
}

impl Sampler {
    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Grid => "grid",
            Sampler::MonteCarlo => "montecarlo",
        }
    }
}

/// What ρ is divided by before thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Normalization {
    /// Largest ρ over every sample taken in the same call.
    #[default]
    SamplePeak,
    /// A fixed divisor; `Fixed(1.0)` thresholds the raw density.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullPoint {
    /// Lattice index (grid) or sample index (Monte-Carlo).
    pub index: u64,
    pub x2: f64,
    pub zpp: f64,
    /// Normalized density.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullMap {
    pub points: Vec<NullPoint>,
    pub threshold: f64,
    pub sampler: Sampler,
    pub seed: Option<u64>,
    pub samples_taken: u64,
    /// The divisor that was applied to ρ.
    pub normalization: f64,
    pub region: Region,
}

fn check_threshold(t: f64) -> Result<(), NullMapError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(NullMapError::BadThreshold(t))
    }
}

fn resolve_normalization(norm: Normalization, rho: &[f64]) -> Result<f64, NullMapError> {
    let value = match norm {
        Normalization::SamplePeak => rho.iter().copied().fold(0.0, f64::max),
        Normalization::Fixed(v) => v,
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(NullMapError::BadNormalization(value))
    }
}

/// ρ on every lattice point, row-major with `x₂` fastest.
pub(crate) fn lattice_densities<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    lattice: &Lattice,
    evaluator: &E,
) -> Result<Vec<f64>, NullMapError> {
    (0..lattice.len())
        .into_par_iter()
        .map(|k| {
            let (x, z) = lattice.point(k);
            density_at(slits, x, z, evaluator)
        })
        .collect()
}

/// Evaluates ρ on the lattice and keeps every point whose normalized density
/// is strictly below `threshold`.
pub fn scan_grid<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    lattice: &Lattice,
    threshold: f64,
    normalization: Normalization,
    evaluator: &E,
) -> Result<NullMap, NullMapError> {
    check_threshold(threshold)?;
    let rho = lattice_densities(slits, lattice, evaluator)?;
    let norm = resolve_normalization(normalization, &rho)?;
    let points = rho
        .iter()
        .enumerate()
        .filter_map(|(k, &r)| {
            let rho = r / norm;
            (rho < threshold).then(|| {
                let (x2, zpp) = lattice.point(k);
                NullPoint {
                    index: k as u64,
                    x2,
                    zpp,
                    rho,
                }
            })
        })
        .collect();
    Ok(NullMap {
        points,
        threshold,
        sampler: Sampler::Grid,
        seed: None,
        samples_taken: lattice.len() as u64,
        normalization: norm,
        region: lattice.region,
    })
}

/// Samples per generator seek. Part of the output contract: changing it
/// changes which point each index maps to.
const MC_CHUNK: u64 = 4096;

/// Uniform `[0, 1)` from the top 53 bits.
fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sample `j` as a pure function of `(seed, j)`: two 64-bit draws taken from
/// ChaCha8 keyed by `seed`, at word offset `4j` of its stream.
fn mc_chunk(seed: u64, first: u64, count: u64, region: &Region, spacing: ZSpacing) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(4 * first as u128);
    let (ln_lo, ln_hi) = (region.zpp_min.ln(), region.zpp_max.ln());
    (0..count)
        .map(|_| {
            let a = unit(rng.next_u64());
            let b = unit(rng.next_u64());
            let x = region.x2_min + (region.x2_max - region.x2_min) * a;
            let z = match spacing {
                ZSpacing::Uniform => region.zpp_min + (region.zpp_max - region.zpp_min) * b,
                ZSpacing::Log => (ln_lo + (ln_hi - ln_lo) * b).exp(),
            };
            (x.min(region.x2_max), z.clamp(region.zpp_min, region.zpp_max))
        })
        .collect()
}

/// Draws `n` points uniformly over `region` (uniform in `z″` or in `ln z″`)
/// and keeps those below `threshold`. The result depends only on
/// `(seed, n)` and the inputs, never on the number of worker threads.
pub fn sample_monte_carlo<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    region: &Region,
    z_spacing: ZSpacing,
    n: u64,
    threshold: f64,
    seed: u64,
    normalization: Normalization,
    evaluator: &E,
) -> Result<NullMap, NullMapError> {
    region.validate()?;
    check_threshold(threshold)?;
    if n == 0 {
        return Err(NullMapError::NoSamples);
    }
    let chunks = n.div_ceil(MC_CHUNK);
    let per_chunk: Vec<Vec<(f64, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * MC_CHUNK;
            let count = MC_CHUNK.min(n - first);
            mc_chunk(seed, first, count, region, z_spacing)
                .into_iter()
                .map(|(x, z)| density_at(slits, x, z, evaluator).map(|r| (x, z, r)))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let norm = match normalization {
        Normalization::SamplePeak => {
            let peak = per_chunk
                .iter()
                .flatten()
                .map(|s| s.2)
                .fold(0.0, f64::max);
            resolve_normalization(Normalization::Fixed(peak), &[])?
        }
        fixed => resolve_normalization(fixed, &[])?,
    };
    let points = per_chunk
        .iter()
        .flatten()
        .enumerate()
        .filter_map(|(j, &(x2, zpp, r))| {
            let rho = r / norm;
            (rho < threshold).then_some(NullPoint {
                index: j as u64,
                x2,
                zpp,
                rho,
            })
        })
        .collect();
    Ok(NullMap {
        points,
        threshold,
        sampler: Sampler::MonteCarlo,
        seed: Some(seed),
        samples_taken: n,
        normalization: norm,
        region: *region,
    })
}

/// Connected components of the retained grid points under 8-neighbour
/// linkage. Each cluster lists lattice indices in ascending order; clusters
/// are ordered by their smallest index.
pub fn grid_clusters(map: &NullMap, lattice: &Lattice) -> Vec<Vec<u64>> {
    use std::collections::HashMap;
    let slot: HashMap<u64, usize> = map.points.iter().enumerate().map(|(k, p)| (p.index, k)).collect();
    let mut label = vec![usize::MAX; map.points.len()];
    let mut clusters = Vec::new();
    let mut stack = Vec::new();
    for start in 0..map.points.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        label[start] = id;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let idx = map.points[k].index;
            members.push(idx);
            let (i, j) = lattice.coords(idx as usize);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= lattice.nx as i64 || nj >= lattice.nz as i64 {
                        continue;
                    }
                    let nidx = (nj as usize * lattice.nx + ni as usize) as u64;
                    if let Some(&nk) = slot.get(&nidx) {
                        if label[nk] == usize::MAX {
                            label[nk] = id;
                            stack.push(nk);
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    clusters
}

/// Which coordinates the descent may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefineAxes {
    #[default]
    Both,
    /// `z″` held fixed: minimum along a constant-`z″` line.
    TransverseOnly,
    /// `x₂` held fixed.
    AlongZ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub axes: RefineAxes,
    /// Starting `x₂` step; `None` picks `z″/(2·ISD)`, or width/10 for one slit.
    pub initial_step: Option<f64>,
    /// Stop once the step falls below this.
    pub min_step: f64,
    pub max_iterations: usize,
    /// Window the descent may not leave.
    pub bounds: Option<Region>,
    /// Try a Gauss–Newton step on ψ before each compass poll.
    pub gauss_newton: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            axes: RefineAxes::Both,
            initial_step: None,
            min_step: 1e-12,
            max_iterations: 200,
            bounds: None,
            gauss_newton: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineStop {
    StepBelowTolerance,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedMinimum {
    pub x2: f64,
    pub zpp: f64,
    /// Raw density at the final point.
    pub rho_min: f64,
    /// True when the step shrank below tolerance rather than hitting the
    /// iteration cap.
    pub converged: bool,
    pub stop: RefineStop,
    pub iterations: usize,
}

/// Local fringe-spacing estimate used as the default first step.
pub fn default_refine_step(slits: &SlitArray, zpp: f64) -> f64 {
    match slits.inter_slit_distance() {
        Some(isd) if isd > 0.0 => zpp / (2.0 * isd),
        _ => slits.min_width() / 10.0,
    }
}

/// Coordinate descent from `(x2_0, zpp_0)` with geometric step shrinkage.
///
/// Each iteration probes `±h` along every active axis and moves to the best
/// improving probe; when none improves, the step halves. The `z″` step is
/// `h·2z″/L` with `L` the slit spacing (or the aperture extent), so one step
/// moves the edge phases by similar amounts along either axis.
///
/// Near a zero of ψ the level sets of ρ are long thin ellipses and pure
/// axis moves crawl. With `gauss_newton` set, every iteration first tries
/// the least-squares step for `ψ = 0` from a finite-difference Jacobian of
/// the amplitude, capped at two compass steps, and keeps it only if ρ drops.
pub fn refine_minimum<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    x2_0: f64,
    zpp_0: f64,
    options: &RefineOptions,
    evaluator: &E,
) -> Result<RefinedMinimum, NullMapError> {
    let h0 = options.initial_step.unwrap_or_else(|| default_refine_step(slits, zpp_0));
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(NullMapError::BadSetting(format!("initial step must be > 0 (got {h0})")));
    }
    if !(options.min_step > 0.0) {
        return Err(NullMapError::BadSetting("min_step must be > 0".into()));
    }
    let edges = slits.edges();
    let extent = slits
        .inter_slit_distance()
        .unwrap_or(edges[edges.len() - 1] - edges[0]);
    let inside = |x: f64, z: f64| z > 0.0 && options.bounds.map_or(true, |b| b.contains(x, z));
    let (move_x, move_z) = match options.axes {
        RefineAxes::Both => (true, true),
        RefineAxes::TransverseOnly => (true, false),
        RefineAxes::AlongZ => (false, true),
    };
    let z_ratio = |z: f64| 2.0 * z / extent;
    let (mut x, mut z) = (x2_0, zpp_0);
    let mut rho = density_at(slits, x, z, evaluator)?;
    let mut h = h0;
    let mut iterations = 0;
    while h >= options.min_step && iterations < options.max_iterations {
        iterations += 1;
        let hz = h * z_ratio(z);
        if options.gauss_newton && rho > 0.0 {
            if let Some((nx, nz)) = gauss_newton_step(slits, x, z, h, hz, move_x, move_z, evaluator)? {
                if inside(nx, nz) {
                    let r = density_at(slits, nx, nz, evaluator)?;
                    if r < rho {
                        (rho, x, z) = (r, nx, nz);
                        continue;
                    }
                }
            }
        }
        let mut best = (rho, x, z);
        let mut probes = Vec::with_capacity(4);
        if move_x {
            probes.push((x + h, z));
            probes.push((x - h, z));
        }
        if move_z {
            probes.push((x, z + hz));
            probes.push((x, z - hz));
        }
        for (px, pz) in probes {
            if !inside(px, pz) {
                continue;
            }
            let r = density_at(slits, px, pz, evaluator)?;
            if r < best.0 {
                best = (r, px, pz);
            }
        }
        if best.0 < rho {
            (rho, x, z) = best;
        } else {
            h *= 0.5;
        }
    }
    let converged = h < options.min_step;
    Ok(RefinedMinimum {
        x2: x,
        zpp: z,
        rho_min: rho,
        converged,
        stop: if converged {
            RefineStop::StepBelowTolerance
        } else {
            RefineStop::IterationLimit
        },
        iterations,
    })
}

fn amplitude_at<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    x2: f64,
    zpp: f64,
    evaluator: &E,
) -> Result<Complex64, NullMapError> {
    Ok(kernels::amplitude_at(slits, x2, zpp, evaluator)?.into())
}

/// Longest Gauss–Newton move, in current compass steps per axis.
const GN_TRUST_STEPS: f64 = 2.0;

/// Least-squares solution of `ψ + J·d = 0` over the active axes, with `J`
/// from central differences of spacing `hx`, `hz`.
#[allow(clippy::too_many_arguments)]
fn gauss_newton_step<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    x: f64,
    z: f64,
    hx: f64,
    hz: f64,
    move_x: bool,
    move_z: bool,
    evaluator: &E,
) -> Result<Option<(f64, f64)>, NullMapError> {
    if hz >= z {
        return Ok(None);
    }
    let psi = amplitude_at(slits, x, z, evaluator)?;
    let gx = if move_x {
        (amplitude_at(slits, x + hx, z, evaluator)? - amplitude_at(slits, x - hx, z, evaluator)?) / (2.0 * hx)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let gz = if move_z {
        (amplitude_at(slits, x, z + hz, evaluator)? - amplitude_at(slits, x, z - hz, evaluator)?) / (2.0 * hz)
    } else {
        Complex64::new(0.0, 0.0)
    };
    // normal equations of the real 2x2 system [Re; Im] d = -[Re ψ; Im ψ]
    let a11 = gx.norm_sqr();
    let a22 = gz.norm_sqr();
    let a12 = gx.re * gz.re + gx.im * gz.im;
    let b1 = -(gx.re * psi.re + gx.im * psi.im);
    let b2 = -(gz.re * psi.re + gz.im * psi.im);
    let (dx, dz) = match (move_x, move_z) {
        (true, true) => {
            let det = a11 * a22 - a12 * a12;
            if !(det.is_normal() && det > 0.0) {
                return Ok(None);
            }
            ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
        }
        (true, false) if a11 > 0.0 => (b1 / a11, 0.0),
        (false, true) if a22 > 0.0 => (0.0, b2 / a22),
        _ => return Ok(None),
    };
    // stay local: a quasi-null's linearized zero can lie far out in the tail,
    // where ρ is smaller but the minimum is a different one
    let reach = (dx.abs() / hx).max(dz.abs() / hz);
    let shrink = if reach > GN_TRUST_STEPS { GN_TRUST_STEPS / reach } else { 1.0 };
    let (dx, dz) = (dx * shrink, dz * shrink);
    let (nx, nz) = (x + dx, z + dz);
    if !(nx.is_finite() && nz.is_finite()) || (dx == 0.0 && dz == 0.0) {
        return Ok(None);
    }
    Ok(Some((nx, nz)))
}

/// Knobs for [`detect_transition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionConfig {
    /// Log-spaced `z″` stations across the range.
    pub stations: usize,
    /// `x₂` samples per far-field minima spacing `z″/((N − 1)·ISD)`.
    pub samples_per_fringe: f64,
    /// A minimum counts as near-null when its refined ρ is below this
    /// fraction of the smaller neighbouring maximum.
    pub rel_threshold: f64,
    /// Far-field regime: observed/predicted count at least `1 − agreement`.
    pub agreement: f64,
    /// Near-field regime: observed/predicted count below this.
    pub near_field_level: f64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        Self {
            stations: 400,
            samples_per_fringe: 8.0,
            rel_threshold: 1e-2,
            agreement: 0.1,
            near_field_level: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionStation {
    pub zpp: f64,
    pub near_nulls: usize,
    /// Far-field minima count in the window, `(N − 1)·2·ISD²/z″`.
    pub predicted: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionBand {
    /// Last station below `z_hi` still in the near-field regime.
    pub z_lo: f64,
    /// First station from which every larger station agrees with the
    /// far-field count.
    pub z_hi: f64,
    pub stations: Vec<TransitionStation>,
}

/// Golden-section minimum of `f` on `[a, b]`, bracket shrunk to 1e-5 of
/// its initial width.
fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64, NullMapError>) -> Result<f64, NullMapError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let stop = 1e-5 * (b - a);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = fc.min(fd);
    while b - a > stop {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        best = best.min(fc).min(fd);
    }
    Ok(best)
}

/// Number of minima of `ρ(x₂)` at fixed `z″` in the window whose refined
/// value is below `rel` times the smaller adjacent discrete maximum.
fn count_near_nulls<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    zpp: f64,
    x_lo: f64,
    x_hi: f64,
    n: usize,
    rel: f64,
    samples_per_fringe: f64,
    evaluator: &E,
) -> Result<usize, NullMapError> {
    use crate::geometry::lerp;
    let slack = (std::f64::consts::FRAC_PI_2 / samples_per_fringe).sin().powi(2);
    let xs: Vec<f64> = (0..n).map(|i| lerp(x_lo, x_hi, i, n)).collect();
    let rho: Vec<f64> = xs.iter().map(|&x| density_at(slits, x, zpp, evaluator)).collect::<Result<_, _>>()?;
    let is_max = |i: usize| rho[i] > rho[i - 1] && rho[i] >= rho[i + 1];
    let maxima: Vec<usize> = (1..n - 1).filter(|&i| is_max(i)).collect();
    let mut count = 0;
    for i in 1..n - 1 {
        if !(rho[i] < rho[i - 1] && rho[i] <= rho[i + 1]) {
            continue;
        }
        let right = maxima.partition_point(|&m| m < i);
        let left_max = right.checked_sub(1).map(|k| rho[maxima[k]]);
        let right_max = maxima.get(right).map(|&m| rho[m]);
        let reference = match (left_max, right_max) {
            (Some(l), Some(r)) => l.min(r),
            (Some(v), None) | (None, Some(v)) => v,
            (None, None) => continue,
        };
        if rho[i] < rel * reference {
            count += 1;
            continue;
        }
        // Near a fringe minimum ρ ≈ m + (M − m)·sin²(π·δ/Λ) and the nearest
        // sample is within δ = Λ/(2·spf), so a sample far above that bound
        // cannot refine down to a near-null.
        if rho[i] > (rel + 2.0 * slack) * reference {
            continue;
        }
        let refined = golden_min(xs[i - 1], xs[i + 1], |x| density_at(slits, x, zpp, evaluator))?;
        if refined < rel * reference {
            count += 1;
        }
    }
    Ok(count)
}

/// Locates the `z″` band over which the near-null count of `ρ(x₂)` in the
/// window `|x₂ − centre| ≤ ISD` moves from the near-field regime to the
/// far-field fringe count.
///
/// `z_hi` is the smallest station from which every larger station is within
/// `agreement` of the prediction; `z_lo` is the largest station below it
/// whose ratio is under `near_field_level` (the first station if none is).
pub fn detect_transition<E: AmplitudeEvaluator>(
    slits: &SlitArray,
    zpp_min: f64,
    zpp_max: f64,
    config: &TransitionConfig,
    evaluator: &E,
) -> Result<TransitionBand, NullMapError> {
    let count = slits.slit_count();
    let isd = match slits.inter_slit_distance() {
        Some(d) if count >= 2 => d,
        _ => return Err(NullMapError::TooFewSlits(count)),
    };
    if !(zpp_min > 0.0 && zpp_min < zpp_max && zpp_max.is_finite()) {
        return Err(NullMapError::BadSetting(format!(
            "need 0 < zpp_min ({zpp_min}) < zpp_max ({zpp_max})"
        )));
    }
    if config.stations < 2 || !(config.samples_per_fringe >= 2.0) || !(config.rel_threshold > 0.0) {
        return Err(NullMapError::BadSetting(
            "transition config needs stations >= 2, samples_per_fringe >= 2, rel_threshold > 0".into(),
        ));
    }
    let edges = slits.edges();
    let centre = 0.5 * (edges[0] + edges[edges.len() - 1]);
    let lattice = Lattice::new(
        Region::new(centre - isd, centre + isd, zpp_min, zpp_max)?,
        2,
        config.stations,
        ZSpacing::Log,
    )?;
    let stations: Vec<TransitionStation> = (0..config.stations)
        .into_par_iter()
        .map(|j| {
            let zpp = lattice.z(j);
            // far-field minima spacing: N − 1 minima per period z″/ISD
            let spacing = zpp / ((count - 1) as f64 * isd);
            let n = ((2.0 * isd / spacing) * config.samples_per_fringe).ceil() as usize + 1;
            let near_nulls = count_near_nulls(
                slits,
                zpp,
                centre - isd,
                centre + isd,
                n.max(3),
                config.rel_threshold,
                config.samples_per_fringe,
                evaluator,
            )?;
            let predicted = (count - 1) as f64 * 2.0 * isd * isd / zpp;
            Ok(TransitionStation {
                zpp,
                near_nulls,
                predicted,
                ratio: near_nulls as f64 / predicted,
            })
        })
        .collect::<Result<_, NullMapError>>()?;
    let far = |s: &TransitionStation| (s.ratio - 1.0).abs() <= config.agreement;
    let mut hi = stations.len();
    while hi > 0 && far(&stations[hi - 1]) {
        hi -= 1;
    }
    if hi == stations.len() {
        return Err(NullMapError::BadSetting(
            "far-field regime not reached; extend zpp_max".into(),
        ));
    }
    let lo = stations[..hi]
        .iter()
        .rposition(|s| s.ratio < config.near_field_level)
        .unwrap_or(0);
    Ok(TransitionBand {
        z_lo: stations[lo].zpp,
        z_hi: stations[hi].zpp,
        stations,
    })
}
