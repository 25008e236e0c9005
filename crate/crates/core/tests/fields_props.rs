use proptest::prelude::*;
use slitwave::fields::{
    default_step, density_grid, drho_dz_at, drho_dz_grid, enclosed_probability, pairwise_sum, slice_density,
    FieldError, FieldKind, SliceAxis,
};
use slitwave::geometry::{Lattice, ObservationPoint, Region, SlitArray, ZSpacing};
use slitwave::kernels::{
    amplitude_fresnel, density_at, AmplitudeEvaluator, ComplexAmplitude, Evaluator, KernelError, QuadratureSpec,
};
use slitwave::SourceConfig;

fn double_slit() -> SlitArray {
    SlitArray::new(vec![-2.1, -1.9, 1.9, 2.1]).unwrap()
}

#[test]
fn two_by_two_grid_matches_direct_calls() {
    let ds = double_slit();
    let lat = Lattice::new(Region::new(-1.0, 3.0, 0.5, 4.0).unwrap(), 2, 2, ZSpacing::Uniform).unwrap();
    let g = density_grid(&ds, &lat, &Evaluator::Fresnel).unwrap();
    assert_eq!(g.kind, FieldKind::Density);
    assert_eq!(g.values.len(), 4);
    for (k, (x, z)) in [(-1.0, 0.5), (3.0, 0.5), (-1.0, 4.0), (3.0, 4.0)].into_iter().enumerate() {
        assert_eq!(g.values[k], density_at(&ds, x, z, &Evaluator::Fresnel).unwrap());
    }
}

/// ψ that depends on `x₂` only.
struct FrozenInZ;

impl AmplitudeEvaluator for FrozenInZ {
    fn amplitude(&self, slits: &SlitArray, p: ObservationPoint) -> Result<ComplexAmplitude, KernelError> {
        amplitude_fresnel(slits, ObservationPoint::new(p.x2(), 3.0)?)
    }
}

#[test]
fn z_independent_field_has_zero_derivative() {
    let lat = Lattice::new(Region::new(-5.0, 5.0, 0.5, 10.0).unwrap(), 21, 11, ZSpacing::Log).unwrap();
    let g = drho_dz_grid(&double_slit(), &lat, None, &FrozenInZ).unwrap();
    assert_eq!(g.kind, FieldKind::DensityTimeDerivative);
    assert!(g.values.iter().all(|v| *v == 0.0));
}

#[test]
fn central_difference_is_second_order() {
    let ds = double_slit();
    for (x, z) in [(0.3, 5.0), (1.7, 2.0), (-3.0, 12.0)] {
        let h = 0.02 * z;
        let d = |h| drho_dz_at(&ds, x, z, h, &Evaluator::Fresnel).unwrap();
        let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
        let ratio = (d1 - d2) / (d2 - d3);
        assert!((ratio - 4.0).abs() <= 0.8, "({x}, {z}): Richardson ratio {ratio}");
    }
}

#[test]
fn derivative_step_is_validated() {
    let ds = double_slit();
    assert!(matches!(
        drho_dz_at(&ds, 0.0, 1.0, 1.0, &Evaluator::Fresnel),
        Err(FieldError::BadStep { .. })
    ));
    assert!(drho_dz_at(&ds, 0.0, 1.0, 0.0, &Evaluator::Fresnel).is_err());
    let lat = Lattice::new(Region::new(-1.0, 1.0, 0.2, 1.0).unwrap(), 3, 3, ZSpacing::Uniform).unwrap();
    assert!(matches!(
        drho_dz_grid(&ds, &lat, Some(0.1), &Evaluator::Fresnel),
        Err(FieldError::BadStep { h, limit }) if h == 0.1 && limit == 0.1
    ));
    assert!(drho_dz_grid(&ds, &lat, Some(0.099), &Evaluator::Fresnel).is_ok());
    assert_eq!(default_step(1.0), 1e-3);
    assert_eq!(default_step(0.01), 1e-4);
}

#[test]
fn central_slice_of_double_slit_is_four_single_slits() {
    let double = SlitArray::new(vec![-20.01, -19.99, 19.99, 20.01]).unwrap();
    let single = SlitArray::new(vec![19.99, 20.01]).unwrap();
    let d = slice_density(&double, SliceAxis::FixedX(0.0), 0.1, 100.0, 100, &Evaluator::Fresnel).unwrap();
    let s = slice_density(&single, SliceAxis::FixedX(0.0), 0.1, 100.0, 100, &Evaluator::Fresnel).unwrap();
    for ((zd, rd), (zs, rs)) in d.iter().zip(&s) {
        assert_eq!(zd, zs);
        assert!((rd - 4.0 * rs).abs() <= 1e-12 * rd.max(1e-300), "z'' = {zd}: {rd} vs 4·{rs}");
    }
}

#[test]
fn fixed_z_slice_is_even_for_symmetric_slits() {
    let ds = SlitArray::new(vec![-6.2, -5.8, -0.1, 0.1, 5.8, 6.2]).unwrap();
    for z in [0.3, 4.0, 90.0] {
        let rows = slice_density(&ds, SliceAxis::FixedZ(z), -15.0, 15.0, 301, &Evaluator::Fresnel).unwrap();
        let n = rows.len();
        let peak = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        for i in 0..n {
            assert_eq!(rows[i].0, -rows[n - 1 - i].0);
            assert!((rows[i].1 - rows[n - 1 - i].1).abs() <= 1e-12 * peak);
        }
    }
}

#[test]
fn far_field_minima_spacing_is_z_over_isd() {
    // ISD 4, z″ = 400: minima spacing 100, envelope width z″/w = 2000
    let ds = double_slit();
    let z = 400.0;
    let rows = slice_density(&ds, SliceAxis::FixedZ(z), -320.0, 320.0, 64_001, &Evaluator::Fresnel).unwrap();
    let minima: Vec<f64> = (1..rows.len() - 1)
        .filter(|&k| rows[k].1 < rows[k - 1].1 && rows[k].1 <= rows[k + 1].1)
        .map(|k| rows[k].0)
        .collect();
    assert!(minima.len() >= 5, "{minima:?}");
    let spacing = (minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64;
    let expected = z / 4.0;
    assert!((spacing / expected - 1.0).abs() <= 0.02, "spacing {spacing} vs {expected}");
}

#[test]
fn slice_arguments_are_validated() {
    let ds = double_slit();
    assert!(matches!(
        slice_density(&ds, SliceAxis::FixedZ(1.0), 0.0, 1.0, 1, &Evaluator::Fresnel),
        Err(FieldError::TooFewSamples { n: 1, min: 2 })
    ));
    assert!(matches!(
        slice_density(&ds, SliceAxis::FixedZ(0.0), 0.0, 1.0, 5, &Evaluator::Fresnel),
        Err(FieldError::BadSliceZ(_))
    ));
    assert!(slice_density(&ds, SliceAxis::FixedX(0.0), -1.0, 1.0, 5, &Evaluator::Fresnel).is_err());
    assert!(slice_density(&ds, SliceAxis::FixedZ(1.0), 2.0, 1.0, 5, &Evaluator::Fresnel).is_err());
}

#[test]
fn enclosed_probability_basics() {
    let ds = double_slit();
    let ev = Evaluator::Fresnel;
    assert_eq!(enclosed_probability(&ds, 3.0, 1.5, 1.5, 64, &ev).unwrap(), 0.0);
    let whole = enclosed_probability(&ds, 3.0, -4.0, 4.0, 4096, &ev).unwrap();
    let half = enclosed_probability(&ds, 3.0, 0.0, 4.0, 2048, &ev).unwrap();
    assert!((whole - 2.0 * half).abs() <= 1e-12 * whole);
    assert!(whole > 0.0);
    let fine = enclosed_probability(&ds, 3.0, -4.0, 4.0, 8192, &ev).unwrap();
    assert!((whole - fine).abs() <= 1e-8 * fine, "{whole} vs {fine}");
    assert!(matches!(enclosed_probability(&ds, 3.0, 0.0, 1.0, 17, &ev), Err(FieldError::OddIntervals(17))));
    assert!(matches!(
        enclosed_probability(&ds, 3.0, 0.0, 1.0, 8, &ev),
        Err(FieldError::TooFewSamples { n: 8, min: 16 })
    ));
    assert!(enclosed_probability(&ds, 3.0, 1.0, 0.0, 16, &ev).is_err());
    assert!(enclosed_probability(&ds, -3.0, 0.0, 1.0, 16, &ev).is_err());
}

#[test]
fn simpson_weights_and_pairwise_order() {
    // ρ from the frozen stub is a smooth function of x₂; compare against
    // the same Simpson weights applied by hand
    let ds = double_slit();
    let direct = enclosed_probability(&ds, 3.0, -1.0, 1.0, 16, &FrozenInZ).unwrap();
    let h = 2.0 / 16.0;
    let terms: Vec<f64> = (0..=16)
        .map(|i| {
            let w = if i == 0 || i == 16 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * density_at(&ds, -1.0 + i as f64 * h, 3.0, &FrozenInZ).unwrap()
        })
        .collect();
    let by_hand = pairwise_sum(&terms) * h / 3.0;
    assert!((direct - by_hand).abs() <= 1e-14 * by_hand);
    assert_eq!(pairwise_sum(&[]), 0.0);
    assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
}

#[test]
fn grid_mirror_symmetry() {
    let ds = SlitArray::new(vec![-4.05, -3.95, 3.95, 4.05]).unwrap();
    let lat = Lattice::new(Region::new(-12.0, 12.0, 0.5, 50.0).unwrap(), 101, 40, ZSpacing::Log).unwrap();
    let g = density_grid(&ds, &lat, &Evaluator::Fresnel).unwrap();
    let peak = g.max();
    for j in 0..g.nz() {
        let row = g.row(j);
        for i in 0..g.nx() {
            assert!((row[i] - row[g.nx() - 1 - i]).abs() <= 1e-12 * peak);
        }
    }
}

#[test]
fn scaled_grid_is_a_constant_multiple() {
    let ds = SlitArray::new(vec![-4.05, -3.95, 3.95, 4.05]).unwrap();
    let region = Region::new(-12.0, 12.0, 0.5, 50.0).unwrap();
    let ev = Evaluator::Quadrature {
        spec: QuadratureSpec::default(),
        source: SourceConfig::FarField,
    };
    for s in [0.1, 10.0, 100.0] {
        let a = density_grid(&ds, &Lattice::new(region, 30, 30, ZSpacing::Uniform).unwrap(), &ev).unwrap();
        let b = density_grid(&ds.scaled(s), &Lattice::new(region.scaled(s), 30, 30, ZSpacing::Uniform).unwrap(), &ev).unwrap();
        let peak = a.max();
        let k = b.max() / peak;
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((v / k - u).abs() <= 1e-9 * peak, "s = {s}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn density_grids_are_nonnegative(
        start in -10.0f64..10.0,
        gaps in prop::collection::vec(0.01f64..5.0, 2..=8),
        zpp_min in 0.01f64..10.0,
    ) {
        let mut e = start;
        let mut edges: Vec<f64> = gaps.iter().map(|g| { e += g; e }).collect();
        edges.truncate(edges.len() / 2 * 2);
        let slits = SlitArray::new(edges).unwrap();
        let lat = Lattice::new(Region::new(-20.0, 20.0, zpp_min, zpp_min * 50.0).unwrap(), 25, 10, ZSpacing::Log).unwrap();
        let g = density_grid(&slits, &lat, &Evaluator::Fresnel).unwrap();
        prop_assert!(g.values.iter().all(|v| *v >= 0.0 && v.is_finite()));
        prop_assert_eq!(g.values.len(), g.nx() * g.nz());
    }
}
