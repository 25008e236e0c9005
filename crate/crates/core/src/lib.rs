//! Matter-wave amplitudes behind multi-slit apertures.
//!
//! The free-particle path-integral kernel reduces, for a far source, to a
//! Fresnel integral over the aperture. Three evaluators are provided
//! (panel quadrature, Fresnel functions, ₁F₂ series) and they agree with one
//! another exactly up to a known global constant. On top of them sit grid and
//! Monte-Carlo null-map samplers, local minimum refinement, braid/fringe
//! transition detection and dense ρ / ∂ρ/∂z″ fields.
//!
//! All lengths are in units of the wavelength (λ = 1).

pub mod export;
pub mod fields;
pub mod geometry;
pub mod kernels;
pub mod nullmap;
pub mod specfun;

mod ddouble;

pub use fields::{FieldError, FieldKind, ScalarFieldGrid, SliceAxis};
pub use geometry::{
    reduced_coordinates, scale_configuration, GeometryError, Lattice, ObservationPoint, Region,
    SlitArray, SourceConfig, WaveParams, ZSpacing,
};
pub use kernels::{
    amplitude_fresnel, amplitude_hypergeometric, amplitude_quadrature, probability_density,
    AmplitudeEvaluator, ComplexAmplitude, Evaluator, KernelError, PointError, QuadratureSpec,
};
pub use nullmap::{
    NullMap, NullMapError, NullPoint, RefineAxes, RefineOptions, RefinedMinimum, Sampler,
    TransitionBand, TransitionConfig,
};
