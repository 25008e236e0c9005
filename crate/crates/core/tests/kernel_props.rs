use num_complex::Complex64;
use proptest::prelude::*;
use slitwave::geometry::{scale_configuration, ObservationPoint, SlitArray, SourceConfig};
use slitwave::kernels::{
    amplitude_fresnel, amplitude_hypergeometric, amplitude_quadrature, matching_constant,
    probability_density, ComplexAmplitude, QuadratureSpec,
};
use std::f64::consts::PI;

/// A slit array plus points sharing one `z″`, every reduced offset within
/// `|q| ≤ 4`: edges sit at `|q| ≤ 3` from `centre`, points within `|q| ≤ 1`.
#[derive(Debug, Clone)]
struct Case {
    slits: SlitArray,
    zpp: f64,
    xs: Vec<f64>,
}

fn cases() -> impl Strategy<Value = Case> {
    (
        1usize..=3,
        prop::collection::vec(-3.0f64..3.0, 6),
        -20.0f64..20.0,
        0.05f64..200.0,
        prop::collection::vec(-1.0f64..1.0, 6),
    )
        .prop_filter_map("edges too close", |(n, mut qs, centre, zpp, offs)| {
            qs.truncate(2 * n);
            qs.sort_by(f64::total_cmp);
            if qs.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                return None;
            }
            let unit = (zpp / PI).sqrt();
            let slits = SlitArray::new(qs.iter().map(|q| centre + q * unit).collect()).ok()?;
            let xs = offs.iter().map(|o| centre + o * unit).collect();
            Some(Case { slits, zpp, xs })
        })
}

fn c(a: ComplexAmplitude) -> Complex64 {
    a.into()
}

/// Largest component deviation of `other / k` from `reference`, with `k`
/// matched at the largest reference sample.
fn matched_deviation(reference: &[ComplexAmplitude], other: &[ComplexAmplitude]) -> f64 {
    let k = matching_constant(reference, other).expect("nonzero reference");
    reference
        .iter()
        .zip(other)
        .map(|(r, o)| {
            let d = c(*o) / k - c(*r);
            d.re.abs().max(d.im.abs())
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluators_agree_up_to_one_constant(case in cases()) {
        let pts: Vec<_> = case.xs.iter().map(|&x| ObservationPoint::new(x, case.zpp).unwrap()).collect();
        let fres: Vec<_> = pts.iter().map(|p| amplitude_fresnel(&case.slits, *p).unwrap()).collect();
        let hyp: Vec<_> = pts.iter().map(|p| amplitude_hypergeometric(&case.slits, *p).unwrap()).collect();
        let spec = QuadratureSpec::default();
        let quad: Vec<_> = pts
            .iter()
            .map(|p| amplitude_quadrature(&case.slits, *p, SourceConfig::FarField, &spec).unwrap())
            .collect();
        prop_assume!(fres.iter().any(|a| a.norm() > 1e-3));
        prop_assert!(matched_deviation(&fres, &hyp) <= 1e-9);
        prop_assert!(matched_deviation(&fres, &quad) <= 1e-6);
    }

    #[test]
    fn symmetric_apertures_give_even_density(
        halves in prop::collection::vec(0.01f64..20.0, 1..=4),
        x2 in 0.0f64..30.0,
        zpp in 0.1f64..100.0,
    ) {
        // mirror the positive edges; an odd count puts one slit across the origin
        let mut pos = halves.clone();
        pos.sort_by(f64::total_cmp);
        pos.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mut edges: Vec<f64> = pos.iter().rev().map(|h| -h).collect();
        edges.extend(pos.iter().copied());
        let slits = SlitArray::new(edges).unwrap();
        prop_assert!(slits.is_mirror_symmetric(0.0));
        let rho = |x: f64| probability_density(amplitude_fresnel(&slits, ObservationPoint::new(x, zpp).unwrap()).unwrap());
        let (a, b) = (rho(x2), rho(-x2));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} {b}");
    }

    #[test]
    fn central_slice_is_twice_the_single_slit(
        centre in 0.5f64..50.0,
        half_width in 0.005f64..0.4,
        zpp in 0.05f64..200.0,
    ) {
        let w = half_width.min(0.9 * centre);
        let double = SlitArray::new(vec![-centre - w, -centre + w, centre - w, centre + w]).unwrap();
        let single = SlitArray::new(vec![centre - w, centre + w]).unwrap();
        let p = ObservationPoint::new(0.0, zpp).unwrap();
        let d = amplitude_fresnel(&double, p).unwrap();
        let s = amplitude_fresnel(&single, p).unwrap();
        prop_assert!((d.re - 2.0 * s.re).abs() <= 1e-12 && (d.im - 2.0 * s.im).abs() <= 1e-12);
    }
}

/// ρ(scaled)/ρ(original) at mapped points is one number along each row.
fn scale_ratio_spread(slits: &SlitArray, zpp: f64, s: f64, quadrature: bool) -> f64 {
    let spec = QuadratureSpec::default();
    let rho = |sl: &SlitArray, p: ObservationPoint| {
        let a = if quadrature {
            amplitude_quadrature(sl, p, SourceConfig::FarField, &spec).unwrap()
        } else {
            amplitude_fresnel(sl, p).unwrap()
        };
        probability_density(a)
    };
    let base: Vec<ObservationPoint> = (0..=120)
        .map(|i| ObservationPoint::new(-12.0 + 0.2 * i as f64, zpp).unwrap())
        .collect();
    let pairs: Vec<(f64, f64)> = base
        .iter()
        .map(|p| {
            let (ss, sp) = scale_configuration(slits, *p, s).unwrap();
            (rho(slits, *p), rho(&ss, sp))
        })
        .collect();
    let peak = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let ratios: Vec<f64> = pairs
        .iter()
        .filter(|p| p.0 > 1e-6 * peak)
        .map(|p| p.1 / p.0)
        .collect();
    let r0 = ratios[0];
    ratios.iter().map(|r| (r / r0 - 1.0).abs()).fold(0.0, f64::max)
}

#[test]
fn scaled_density_ratio_is_constant_along_rows() {
    let slits = SlitArray::new(vec![-4.05, -3.95, 3.95, 4.05]).unwrap();
    for s in [0.1, 10.0, 100.0] {
        for zpp in [0.5, 5.0, 50.0] {
            let fres = scale_ratio_spread(&slits, zpp, s, false);
            assert!(fres <= 1e-10, "fresnel s = {s}, z'' = {zpp}: {fres:e}");
        }
        let quad = scale_ratio_spread(&slits, 5.0, s, true);
        assert!(quad <= 1e-10, "quadrature s = {s}: {quad:e}");
    }
}

#[test]
fn density_is_finite_and_nonnegative_across_scales() {
    let slits = SlitArray::new(vec![-0.01, 0.01, 39.99, 40.01]).unwrap();
    for zpp in [1e-3, 0.1, 10.0, 1e3, 1e6] {
        for x2 in [-1e4, -40.0, 0.0, 20.0, 40.0, 1e4] {
            let a = amplitude_fresnel(&slits, ObservationPoint::new(x2, zpp).unwrap()).unwrap();
            assert!(a.is_finite());
            assert!(probability_density(a) >= 0.0);
        }
    }
}
