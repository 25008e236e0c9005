use proptest::prelude::*;
use slitwave::geometry::{Lattice, ObservationPoint, Region, SlitArray, ZSpacing};
use slitwave::kernels::{
    amplitude_fresnel, probability_density, AmplitudeEvaluator, ComplexAmplitude, Evaluator, KernelError,
};
use slitwave::nullmap::{
    detect_transition, grid_clusters, refine_minimum, sample_monte_carlo, scan_grid, Normalization,
    NullMap, NullMapError, NullPoint, RefineAxes, RefineOptions, Sampler, TransitionConfig,
};

fn double_slit() -> SlitArray {
    SlitArray::new(vec![-2.1, -1.9, 1.9, 2.1]).unwrap()
}

fn region() -> Region {
    Region::new(-6.0, 6.0, 1.0, 20.0).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_threshold_keeps_a_subset(t1 in 1e-8f64..1e-1, factor in 1.0f64..100.0, log_z in any::<bool>()) {
        let spacing = if log_z { ZSpacing::Log } else { ZSpacing::Uniform };
        let lat = Lattice::new(region(), 61, 40, spacing).unwrap();
        let t2 = t1 * factor;
        let small = scan_grid(&double_slit(), &lat, t1, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
        let large = scan_grid(&double_slit(), &lat, t2, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
        let big: std::collections::HashSet<u64> = large.points.iter().map(|p| p.index).collect();
        prop_assert!(small.points.iter().all(|p| big.contains(&p.index)));
        for p in &large.points {
            prop_assert!(p.rho < t2);
            prop_assert!(lat.region.contains(p.x2, p.zpp));
        }
    }

    #[test]
    fn montecarlo_threshold_inclusion_and_bounds(seed in any::<u64>(), t1 in 1e-6f64..1e-2) {
        let ds = double_slit();
        let run = |t| sample_monte_carlo(&ds, &region(), ZSpacing::Log, 3000, t, seed, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
        let (a, b) = (run(t1), run(10.0 * t1));
        let keep: std::collections::HashSet<u64> = b.points.iter().map(|p| p.index).collect();
        prop_assert!(a.points.iter().all(|p| keep.contains(&p.index)));
        prop_assert!(a.points.len() <= b.points.len());
        prop_assert!(b.points.windows(2).all(|w| w[0].index < w[1].index));
        for p in &b.points {
            prop_assert!(region().contains(p.x2, p.zpp) && p.rho < 10.0 * t1);
        }
    }
}

#[test]
fn zero_threshold_gives_an_empty_map() {
    let lat = Lattice::new(region(), 31, 31, ZSpacing::Uniform).unwrap();
    let map = scan_grid(&double_slit(), &lat, 0.0, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
    assert!(map.points.is_empty());
    assert_eq!(map.samples_taken, 961);
    assert!(matches!(
        scan_grid(&double_slit(), &lat, -1.0, Normalization::SamplePeak, &Evaluator::Fresnel),
        Err(NullMapError::BadThreshold(_))
    ));
}

#[test]
fn montecarlo_rejects_zero_samples_and_repeats_single_draws() {
    let ds = double_slit();
    let run = |n| sample_monte_carlo(&ds, &region(), ZSpacing::Uniform, n, 2.0, 9, Normalization::Fixed(1.0), &Evaluator::Fresnel);
    assert_eq!(run(0), Err(NullMapError::NoSamples));
    let (a, b) = (run(1).unwrap(), run(1).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.points.len(), 1);
    // sample j does not depend on how many samples follow it
    let long = run(5000).unwrap();
    assert_eq!(long.points[0], a.points[0]);
    assert_eq!(long.seed, Some(9));
    assert_eq!(long.sampler, Sampler::MonteCarlo);
}

#[test]
fn montecarlo_is_independent_of_thread_count() {
    let ds = double_slit();
    let run = || sample_monte_carlo(&ds, &region(), ZSpacing::Log, 20_000, 1e-3, 42, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
    let one = in_pool(1, run);
    let three = in_pool(3, run);
    let eight = in_pool(8, run);
    assert!(!one.points.is_empty());
    assert_eq!(one, three);
    assert_eq!(one, eight);
}

#[test]
fn montecarlo_fraction_matches_the_grid_estimate() {
    // same fixed divisor for both so they threshold the same field
    let ds = double_slit();
    let peak = {
        let lat = Lattice::new(region(), 241, 240, ZSpacing::Uniform).unwrap();
        let all = scan_grid(&ds, &lat, f64::MAX, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
        all.normalization
    };
    let norm = Normalization::Fixed(peak);
    let lat = Lattice::new(region(), 481, 480, ZSpacing::Uniform).unwrap();
    let threshold = 2e-2;
    let grid = scan_grid(&ds, &lat, threshold, norm, &Evaluator::Fresnel).unwrap();
    let p = grid.points.len() as f64 / grid.samples_taken as f64;
    let n = 200_000u64;
    let mc = sample_monte_carlo(&ds, &region(), ZSpacing::Uniform, n, threshold, 5, norm, &Evaluator::Fresnel).unwrap();
    let k = mc.points.len() as f64;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    assert!(p > 0.01 && p < 0.5, "grid fraction {p}");
    assert!((k - n as f64 * p).abs() <= 3.0 * sigma, "mc {k} vs grid {} (sigma {sigma})", n as f64 * p);
}

#[test]
fn symmetric_slits_give_mirrored_loci() {
    let ds = SlitArray::new(vec![-8.05, -7.95, -0.05, 0.05, 7.95, 8.05]).unwrap();
    assert!(ds.is_mirror_symmetric(0.0));
    let lat = Lattice::new(Region::new(-12.0, 12.0, 0.5, 40.0).unwrap(), 241, 120, ZSpacing::Log).unwrap();
    let map = scan_grid(&ds, &lat, 1e-2, Normalization::SamplePeak, &Evaluator::Fresnel).unwrap();
    assert!(map.points.len() > 50);
    let set: std::collections::HashSet<u64> = map.points.iter().map(|p| p.index).collect();
    // a lattice point qualifies with its mirror image unless ρ sits within
    // rounding of the threshold
    let mut unmatched = 0;
    for p in &map.points {
        let (i, j) = lat.coords(p.index as usize);
        let mirror = (j * lat.nx + (lat.nx - 1 - i)) as u64;
        if !set.contains(&mirror) {
            assert!((p.rho / map.threshold - 1.0).abs() < 1e-9, "unmatched point far from threshold: {p:?}");
            unmatched += 1;
        }
    }
    assert!(unmatched <= 2, "{unmatched}");
}

fn map_with(indices: &[u64], lat: &Lattice) -> NullMap {
    NullMap {
        points: indices
            .iter()
            .map(|&k| {
                let (x2, zpp) = lat.point(k as usize);
                NullPoint { index: k, x2, zpp, rho: 0.0 }
            })
            .collect(),
        threshold: 1.0,
        sampler: Sampler::Grid,
        seed: None,
        samples_taken: lat.len() as u64,
        normalization: 1.0,
        region: lat.region,
    }
}

#[test]
fn clusters_use_eight_neighbour_linkage() {
    let lat = Lattice::new(Region::new(0.0, 4.0, 1.0, 5.0).unwrap(), 5, 5, ZSpacing::Uniform).unwrap();
    // 0-6-12 is a diagonal chain, 4-9-14 a vertical run, 20 stands alone
    let map = map_with(&[0, 6, 12, 4, 20, 9, 14], &lat);
    let clusters = grid_clusters(&map, &lat);
    assert_eq!(clusters, vec![vec![0, 6, 12], vec![4, 9, 14], vec![20]]);
    // rows do not wrap: last column of row 0 and first of row 1 are far apart
    let wrap = map_with(&[4, 5], &lat);
    assert_eq!(grid_clusters(&wrap, &lat).len(), 2);
    assert!(grid_clusters(&map_with(&[], &lat), &lat).is_empty());
}

/// `ψ(x₂) − ψ(−x₂)`: odd in `x₂`, so it vanishes identically on `x₂ = 0`.
struct Antisymmetric;

impl AmplitudeEvaluator for Antisymmetric {
    fn amplitude(&self, slits: &SlitArray, p: ObservationPoint) -> Result<ComplexAmplitude, KernelError> {
        let a = amplitude_fresnel(slits, p)?;
        let b = amplitude_fresnel(slits, ObservationPoint::new(-p.x2(), p.zpp())?)?;
        Ok(ComplexAmplitude::new(a.re - b.re, a.im - b.im))
    }
}

#[test]
fn refine_finds_a_symmetry_forced_zero() {
    let ds = SlitArray::new(vec![-0.3, 0.5, 3.0, 3.4]).unwrap();
    for z in [0.5, 4.0, 30.0] {
        let m = refine_minimum(&ds, 0.037, z, &RefineOptions::default(), &Antisymmetric).unwrap();
        assert!(m.rho_min < 1e-20, "z'' = {z}: {m:?}");
    }
}

fn rho(slits: &SlitArray, x: f64, z: f64) -> f64 {
    probability_density(amplitude_fresnel(slits, ObservationPoint::new(x, z).unwrap()).unwrap())
}

#[test]
fn single_slit_minimum_is_small_but_finite() {
    let slit = SlitArray::single(0.0, 0.1).unwrap();
    let z = 10.0;
    // dense scan oracle: first local minimum of ρ(x₂) away from the centre,
    // near z″/w = 100 for this far-field slit
    let xs: Vec<f64> = (0..=30_000).map(|i| i as f64 * 1e-2).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| rho(&slit, x, z)).collect();
    let peak = vals[0];
    let k = (1..vals.len() - 1)
        .find(|&k| vals[k] < vals[k - 1] && vals[k] <= vals[k + 1])
        .expect("a side minimum");
    let opts = RefineOptions {
        axes: RefineAxes::TransverseOnly,
        ..RefineOptions::default()
    };
    let m = refine_minimum(&slit, xs[k], z, &opts, &Evaluator::Fresnel).unwrap();
    assert!(m.rho_min <= vals[k]);
    assert!((m.x2 - xs[k]).abs() < 2e-2, "{m:?} from {} (rho {:e})", xs[k], vals[k]);
    let ratio = m.rho_min / peak;
    assert!((1e-9..=1e-3).contains(&ratio), "{ratio:e}");
    assert!(m.converged);
    // rho_min is no larger than the neighbours one final step away
    for d in [-1e-9, 1e-9] {
        assert!(m.rho_min <= rho(&slit, m.x2 + d, z));
    }
}

#[test]
fn refine_never_increases_the_density() {
    let ds = double_slit();
    for (x, z) in [(0.9, 3.0), (-2.5, 7.0), (4.0, 15.0), (0.0, 1.2)] {
        let start = rho(&ds, x, z);
        for axes in [RefineAxes::Both, RefineAxes::TransverseOnly, RefineAxes::AlongZ] {
            for gauss_newton in [true, false] {
                let opts = RefineOptions { axes, gauss_newton, ..RefineOptions::default() };
                let m = refine_minimum(&ds, x, z, &opts, &Evaluator::Fresnel).unwrap();
                assert!(m.rho_min <= start);
                assert!(m.iterations <= opts.max_iterations);
                match axes {
                    RefineAxes::TransverseOnly => assert_eq!(m.zpp, z),
                    RefineAxes::AlongZ => assert_eq!(m.x2, x),
                    RefineAxes::Both => {}
                }
            }
        }
    }
}

#[test]
fn refine_respects_bounds() {
    let ds = double_slit();
    let b = Region::new(0.5, 1.5, 2.0, 4.0).unwrap();
    let opts = RefineOptions { bounds: Some(b), ..RefineOptions::default() };
    let m = refine_minimum(&ds, 1.0, 3.0, &opts, &Evaluator::Fresnel).unwrap();
    assert!(b.contains(m.x2, m.zpp));
}

#[test]
fn transition_needs_two_slits() {
    let single = SlitArray::single(0.0, 0.1).unwrap();
    let r = detect_transition(&single, 0.1, 100.0, &TransitionConfig::default(), &Evaluator::Fresnel);
    assert_eq!(r, Err(NullMapError::TooFewSlits(1)));
}

#[test]
fn transition_band_scales_with_s_squared() {
    let cfg = TransitionConfig { stations: 60, ..TransitionConfig::default() };
    let small = SlitArray::new(vec![-2.001, -1.999, 1.999, 2.001]).unwrap();
    let base = detect_transition(&small, 0.01, 1.0, &cfg, &Evaluator::Fresnel).unwrap();
    let s = 3.0;
    let scaled = detect_transition(&small.scaled(s), 0.01 * s * s, s * s, &cfg, &Evaluator::Fresnel).unwrap();
    for (a, b) in [(base.z_lo, scaled.z_lo), (base.z_hi, scaled.z_hi)] {
        assert!((b / (a * s * s) - 1.0).abs() <= 0.05, "{a} -> {b}");
    }
    assert!(base.z_lo < base.z_hi);
    assert_eq!(base.stations.len(), 60);
    // far above the band the observed count tracks the prediction
    let last = base.stations.last().unwrap();
    assert!((last.ratio - 1.0).abs() <= cfg.agreement);
}
