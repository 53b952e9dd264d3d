mod common;

use llf_core::convolution::{conv3_ref, Kernel3};
use llf_core::plane::{Plane, PlaneQ};
use llf_core::pyramid::*;
use proptest::prelude::*;
use rand::Rng;

fn plane_strategy() -> impl Strategy<Value = Plane> {
    (1usize..40, 1usize..40).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..1.0, w * h).prop_map(move |v| Plane::new(w, h, v).unwrap())
    })
}

proptest! {
    #[test]
    fn round_trip_identity(p in plane_strategy(), depth in 0usize..6) {
        let n = depth.min(max_levels(p.width(), p.height()) - 1);
        let pyr = laplacian_pyramid(&p, n).unwrap();
        prop_assert!(collapse(&pyr).unwrap().max_abs_diff(&p) <= 1e-6);
    }

    #[test]
    fn dimension_law(p in plane_strategy()) {
        let n = max_levels(p.width(), p.height());
        let g = gaussian_pyramid(&p, n).unwrap();
        for pair in g.levels().windows(2) {
            prop_assert_eq!(pair[1].width(), pair[0].width().div_ceil(2));
            prop_assert_eq!(pair[1].height(), pair[0].height().div_ceil(2));
        }
    }

    #[test]
    fn downsample_is_linear(p in plane_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let q = common::random_plane(&mut rng, p.width(), p.height());
        let k = Kernel3::default();
        let mix = Plane::from_fn(p.width(), p.height(), |x, y| a * p.get(x, y) + b * q.get(x, y));
        let lhs = downsample(&mix, &k);
        let (dp, dq) = (downsample(&p, &k), downsample(&q, &k));
        let rhs = Plane::from_fn(lhs.width(), lhs.height(), |x, y| a * dp.get(x, y) + b * dq.get(x, y));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-6);
    }

    #[test]
    fn fixed_point_round_trip_exact(seed in any::<u64>(), w in 1usize..40, h in 1usize..40) {
        let mut rng = common::rng(seed);
        let p = common::random_q(&mut rng, w, h);
        let n = max_levels(w, h) - 1;
        prop_assert_eq!(collapse(&laplacian_pyramid(&p, n).unwrap()).unwrap(), p);
    }
}

#[test]
fn dc_preserved_for_constant_and_smooth_planes() {
    let k = Kernel3::default();
    let c = Plane::filled(37, 21, 0.42);
    assert!((downsample(&c, &k).mean() - 0.42).abs() < 1e-3);
    let smooth = Plane::from_fn(64, 48, |x, y| 0.5 + 0.2 * (std::f64::consts::TAU * x as f64 / 32.0).sin() * (std::f64::consts::TAU * y as f64 / 24.0).cos());
    assert!((downsample(&smooth, &k).mean() - smooth.mean()).abs() < 1e-3);
}

#[test]
fn downsample_matches_convolve_then_decimate() {
    let mut rng = common::rng(11);
    let k = Kernel3::default();
    for _ in 0..30 {
        let (w, h) = (rng.gen_range(1..30), rng.gen_range(1..30));
        let p = common::random_plane(&mut rng, w, h);
        let oracle = conv3_ref(&p, &k);
        let d = downsample(&p, &k);
        for y in 0..d.height() {
            for x in 0..d.width() {
                assert_eq!(d.get(x, y), oracle.get(2 * x, 2 * y));
            }
        }
    }
}

#[test]
fn upsample_interpolates_straight_lines() {
    // a linear ramp sampled at even positions upsamples to the same ramp in the interior
    let k = Kernel3::default();
    let coarse = Plane::from_fn(8, 6, |x, y| 0.1 * (2 * x) as f64 + 0.05 * (2 * y) as f64);
    let up = upsample(&coarse, 16, 12, &k).unwrap();
    for y in 1..10 {
        for x in 1..14 {
            let expect = 0.1 * x as f64 + 0.05 * y as f64;
            assert!((up.get(x, y) - expect).abs() < 1e-12, "({x},{y})");
        }
    }
}

#[test]
fn laplacian_of_ramp_vanishes_in_interior() {
    let p = Plane::from_fn(32, 32, |x, y| 0.01 * x as f64 + 0.02 * y as f64);
    let pyr = laplacian_pyramid(&p, 2).unwrap();
    let band = &pyr.levels()[0];
    for y in 2..30 {
        for x in 2..30 {
            assert!(band.get(x, y).abs() < 1e-12);
        }
    }
}

#[test]
fn fixed_point_ops_track_reference() {
    let mut rng = common::rng(12);
    let k = Kernel3::default();
    for _ in 0..40 {
        let (w, h) = (rng.gen_range(2..30), rng.gen_range(2..30));
        let q = common::random_q(&mut rng, w, h);
        let f = q.dequantize();
        let dq = downsample_q(&q).dequantize();
        assert!(dq.max_abs_diff(&downsample(&f, &k)) < 12.0 / 256.0 / 255.0);
        let (uw, uh) = (2 * w - (w % 2), 2 * h);
        let uq = upsample_q(&q, uw, uh).unwrap().dequantize();
        assert!(uq.max_abs_diff(&upsample(&f, uw, uh, &k).unwrap()) < 12.0 / 256.0 / 255.0);
    }
}

#[test]
fn odd_dims_collapse_with_explicit_targets() {
    let mut rng = common::rng(13);
    let p: PlaneQ = common::random_q(&mut rng, 1, 1);
    let pyr = laplacian_pyramid(&p, 0).unwrap();
    assert_eq!(collapse(&pyr).unwrap(), p);
    let up = upsample(&Plane::filled(1, 1, 0.3), 2, 2, &Kernel3::default()).unwrap();
    assert!(up.max_abs_diff(&Plane::filled(2, 2, 0.3)) < 1e-15);
}
