//! Amplitude evaluators and the probability density.
//!
//! With the global `1/(ιλ)`, `1/√z′` and transverse-phase prefactors dropped,
//! the far-source amplitude is
//!
//! ```text
//! ψ(x₂, z″) = (1/√z″) ∫_slits exp{ιπ(x₁ − x₂)²/z″} dx₁
//! ```
//!
//! The three evaluators compute this same integral by different routes:
//!
//! * [`amplitude_quadrature`]: Gauss–Legendre panels sized by the phase change.
//! * [`amplitude_hypergeometric`]: `(1/√π) Σ ±[T₂(qᵢ) + ι T₁(qᵢ)]`.
//! * [`amplitude_fresnel`]: the Cornu chord sum `Σ ±[C(uᵢ) + ι S(uᵢ)]`.
//!
//! The quadrature and hypergeometric forms are equal; the Fresnel chord sum
//! is larger by exactly `√2` (the Jacobian of `u = √(2/z″)(x₁ − x₂)`).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{reduced_coordinates, GeometryError, ObservationPoint, SlitArray, SourceConfig};
use crate::specfun::{self, SpecFunError, T_SERIES_MAX_Q};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("edge offset q = {q} outside the series domain |q| <= {limit}; use the Fresnel evaluator")]
    SeriesDomain { q: f64, limit: f64 },
    #[error("quadrature failure: non-finite integrand near x1 = {x1}")]
    QuadratureFailure { x1: f64 },
    #[error("invalid quadrature spec: {0}")]
    BadQuadratureSpec(String),
    #[error("the hypergeometric and Fresnel evaluators only support a far-field source")]
    FiniteSourceUnsupported,
}

/// Wavefunction value, defined up to one global constant per evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexAmplitude {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmplitude {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.re * k, self.im * k)
    }
}

impl From<Complex64> for ComplexAmplitude {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl From<ComplexAmplitude> for Complex64 {
    fn from(a: ComplexAmplitude) -> Self {
        Complex64::new(a.re, a.im)
    }
}

/// `ρ = |ψ|²`.
pub fn probability_density(psi: ComplexAmplitude) -> f64 {
    psi.re * psi.re + psi.im * psi.im
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ₐᵇ f` for complex-valued `f`.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Complex64
    where
        F: FnMut(f64) -> Complex64,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel quadrature settings for the oscillatory kernel integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    points_per_panel: usize,
    max_phase_per_panel: f64,
    rule: Arc<GaussLegendre>,
}

impl QuadratureSpec {
    pub fn new(points_per_panel: usize, max_phase_per_panel: f64) -> Result<Self, KernelError> {
        if points_per_panel < 2 {
            return Err(KernelError::BadQuadratureSpec(format!(
                "points_per_panel must be >= 2 (got {points_per_panel})"
            )));
        }
        if !(max_phase_per_panel > 0.0 && max_phase_per_panel <= PI) {
            return Err(KernelError::BadQuadratureSpec(format!(
                "max_phase_per_panel must lie in (0, pi] (got {max_phase_per_panel})"
            )));
        }
        Ok(Self {
            points_per_panel,
            max_phase_per_panel,
            rule: Arc::new(GaussLegendre::new(points_per_panel)),
        })
    }

    pub fn points_per_panel(&self) -> usize {
        self.points_per_panel
    }

    pub fn max_phase_per_panel(&self) -> f64 {
        self.max_phase_per_panel
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::new(16, PI / 2.0).expect("default quadrature spec is valid")
    }
}

/// `φ(x) = curvature·(x − center)² + const`, the total kernel phase.
#[derive(Debug, Clone, Copy)]
struct QuadraticPhase {
    curvature: f64,
    center: f64,
}

impl QuadraticPhase {
    fn new(point: ObservationPoint, source: SourceConfig) -> Self {
        let inv_z = 1.0 / point.zpp();
        match source {
            SourceConfig::FarField => Self {
                curvature: PI * inv_z,
                center: point.x2(),
            },
            SourceConfig::Finite { x0, zp } => {
                let inv_zp = 1.0 / zp;
                Self {
                    curvature: PI * (inv_z + inv_zp),
                    center: (point.x2() * inv_z + x0 * inv_zp) / (inv_z + inv_zp),
                }
            }
        }
    }

    fn value(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.curvature * d * d
    }

    fn position(&self, phase: f64, side: f64) -> f64 {
        self.center + side * (phase / self.curvature).sqrt()
    }
}

/// Panel breakpoints on `[a, b]` such that the phase changes by at most
/// `max_phase` across each panel.
fn panel_breakpoints(a: f64, b: f64, phase: QuadraticPhase, max_phase: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(a);
    let c = phase.center;
    let mut pieces = [(a, b), (f64::NAN, f64::NAN)];
    if a < c && c < b {
        pieces = [(a, c), (c, b)];
    }
    for &(p, r) in pieces.iter().filter(|(p, _)| !p.is_nan()) {
        let side = if r <= c { -1.0 } else { 1.0 };
        let (fp, fr) = (phase.value(p), phase.value(r));
        let panels = ((fr - fp).abs() / max_phase).ceil().max(1.0) as usize;
        for k in 1..panels {
            let f = fp + (fr - fp) * k as f64 / panels as f64;
            out.push(phase.position(f, side));
        }
        out.push(r);
    }
}

/// Direct numerical integration of the kernel over the aperture.
pub fn amplitude_quadrature(
    slits: &SlitArray,
    point: ObservationPoint,
    source: SourceConfig,
    spec: &QuadratureSpec,
) -> Result<ComplexAmplitude, KernelError> {
    source.validate()?;
    let phase = QuadraticPhase::new(point, source);
    let (x2, z) = (point.x2(), point.zpp());
    let integrand = |x1: f64| {
        let d = x1 - x2;
        let mut arg = PI * d * d / z;
        if let SourceConfig::Finite { x0, zp } = source {
            let d0 = x1 - x0;
            arg += PI * d0 * d0 / zp;
        }
        let (s, c) = arg.sin_cos();
        Complex64::new(c, s)
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut breaks = Vec::new();
    for (a, b) in slits.slits() {
        panel_breakpoints(a, b, phase, spec.max_phase_per_panel, &mut breaks);
        for w in breaks.windows(2) {
            let part = spec.rule.integrate(w[0], w[1], integrand);
            if !(part.re.is_finite() && part.im.is_finite()) {
                return Err(KernelError::QuadratureFailure { x1: w[0] });
            }
            total += part;
        }
    }
    let psi = ComplexAmplitude::from(total / z.sqrt());
    if !psi.is_finite() {
        return Err(KernelError::QuadratureFailure { x1: x2 });
    }
    Ok(psi)
}

/// Cornu chord sum `Σ_slits [F(u_hi) − F(u_lo)]` with `F(u) = C(u) + ι S(u)`.
pub fn amplitude_fresnel(slits: &SlitArray, point: ObservationPoint) -> Result<ComplexAmplitude, KernelError> {
    let mut acc = ComplexAmplitude::ZERO;
    for (k, r) in reduced_coordinates(slits, point).iter().enumerate() {
        let (s, c) = specfun::fresnel(r.u)?;
        let sign = SlitArray::edge_sign(k);
        acc.re += sign * c;
        acc.im += sign * s;
    }
    Ok(acc)
}

/// `(1/√π) Σ ±[T₂(qᵢ) + ι T₁(qᵢ)]` via the ₁F₂ series; every |qᵢ| must be
/// within [`T_SERIES_MAX_Q`].
pub fn amplitude_hypergeometric(
    slits: &SlitArray,
    point: ObservationPoint,
) -> Result<ComplexAmplitude, KernelError> {
    let coords = reduced_coordinates(slits, point);
    if let Some(r) = coords.iter().find(|r| r.q.abs() > T_SERIES_MAX_Q) {
        return Err(KernelError::SeriesDomain {
            q: r.q,
            limit: T_SERIES_MAX_Q,
        });
    }
    let mut acc = ComplexAmplitude::ZERO;
    for (k, r) in coords.iter().enumerate() {
        let sign = SlitArray::edge_sign(k);
        acc.re += sign * specfun::t2_series(r.q)?;
        acc.im += sign * specfun::t1_series(r.q)?;
    }
    Ok(acc.scale(1.0 / PI.sqrt()))
}

/// An evaluator failure tagged with the point where it happened.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation failed at x2 = {x2}, z'' = {zpp}: {source}")]
pub struct PointError {
    pub x2: f64,
    pub zpp: f64,
    #[source]
    pub source: KernelError,
}

/// ψ at `(x2, zpp)`, with the location attached to any failure.
pub fn amplitude_at<E: AmplitudeEvaluator + ?Sized>(
    slits: &SlitArray,
    x2: f64,
    zpp: f64,
    evaluator: &E,
) -> Result<ComplexAmplitude, PointError> {
    let wrap = |source: KernelError| PointError { x2, zpp, source };
    let point = ObservationPoint::new(x2, zpp).map_err(|e| wrap(e.into()))?;
    evaluator.amplitude(slits, point).map_err(wrap)
}

/// ρ at `(x2, zpp)`, with the location attached to any failure.
pub fn density_at<E: AmplitudeEvaluator + ?Sized>(
    slits: &SlitArray,
    x2: f64,
    zpp: f64,
    evaluator: &E,
) -> Result<f64, PointError> {
    amplitude_at(slits, x2, zpp, evaluator).map(probability_density)
}

/// Anything that yields an amplitude at an observation point.
pub trait AmplitudeEvaluator: Sync {
    fn amplitude(&self, slits: &SlitArray, point: ObservationPoint) -> Result<ComplexAmplitude, KernelError>;

    fn density(&self, slits: &SlitArray, point: ObservationPoint) -> Result<f64, KernelError> {
        self.amplitude(slits, point).map(probability_density)
    }
}

/// Selectable evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    Quadrature { spec: QuadratureSpec, source: SourceConfig },
    Fresnel,
    Hypergeometric,
    /// Hypergeometric where every |qᵢ| ≤ 4, otherwise the Fresnel chord sum
    /// rescaled by `1/√2` so both branches share one normalization.
    Auto,
}

impl Evaluator {
    pub fn name(&self) -> &'static str {
        match self {
            Evaluator::Quadrature { .. } => "quadrature",
            Evaluator::Fresnel => "fresnel",
            Evaluator::Hypergeometric => "hypergeometric",
            Evaluator::Auto => "auto",
        }
    }
}

impl AmplitudeEvaluator for Evaluator {
    fn amplitude(&self, slits: &SlitArray, point: ObservationPoint) -> Result<ComplexAmplitude, KernelError> {
        match self {
            Evaluator::Quadrature { spec, source } => amplitude_quadrature(slits, point, *source, spec),
            Evaluator::Fresnel => amplitude_fresnel(slits, point),
            Evaluator::Hypergeometric => amplitude_hypergeometric(slits, point),
            Evaluator::Auto => match amplitude_hypergeometric(slits, point) {
                Err(KernelError::SeriesDomain { .. }) => {
                    amplitude_fresnel(slits, point).map(|a| a.scale(FRAC_1_SQRT_2))
                }
                other => other,
            },
        }
    }
}

impl<E: AmplitudeEvaluator + ?Sized> AmplitudeEvaluator for &E {
    fn amplitude(&self, slits: &SlitArray, point: ObservationPoint) -> Result<ComplexAmplitude, KernelError> {
        (**self).amplitude(slits, point)
    }
}

/// Complex constant `k` with `other ≈ k · reference`, taken at the sample
/// where `|reference|` is largest. `None` when the reference set is all zero.
pub fn matching_constant(reference: &[ComplexAmplitude], other: &[ComplexAmplitude]) -> Option<Complex64> {
    let (idx, best) = reference
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    if best.norm() == 0.0 {
        return None;
    }
    let r: Complex64 = (*best).into();
    let o: Complex64 = other.get(idx).copied()?.into();
    Some(o / r)
}
