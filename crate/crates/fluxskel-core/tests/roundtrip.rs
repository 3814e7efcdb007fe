//! Cross-module properties: generate flux from a skeleton, recover it, and
//! score the result; plus field-level invariants that tie the distance
//! transform, flux generation, and recovery together.

use fluxskel_core::eval::{f_measure, match_with_tolerance, MatchTolerance};
use fluxskel_core::fluxgen::{
    compute_context_flux, partition_regions, pixel_weights, ContextRadius, RegionLabel,
};
use fluxskel_core::raster::{BinaryMap, FluxField, GridDims};
use fluxskel_core::recover::{recover_skeleton, RecoveryParams};
use fluxskel_core::synth::{make_shape, ShapeKind, ShapeSpec};
use fluxskel_core::dt::euclidean_dt_with_labels;

fn round_trip_f(skeleton: &BinaryMap, r: usize) -> f64 {
    let flux = compute_context_flux(skeleton, ContextRadius::new(r).unwrap()).unwrap();
    let recovered = recover_skeleton(&flux, &RecoveryParams::default());
    let counts = match_with_tolerance(&recovered, skeleton, MatchTolerance::default()).unwrap();
    f_measure(counts.precision(), counts.recall())
}

#[test]
fn straight_line_round_trip() {
    let spec = ShapeSpec {
        dims: GridDims::new(300, 200),
        kind: ShapeKind::Line {
            from: (130, 100),
            to: (169, 100),
        },
        seed: 0,
    };
    let shape = make_shape(&spec).unwrap();
    assert_eq!(shape.skeleton.count_true(), 40);
    let f = round_trip_f(&shape.skeleton, 7);
    assert!(f >= 0.95, "line round-trip F = {f}");
}

#[test]
fn l_shaped_polyline_recovers_connected() {
    let spec = ShapeSpec {
        dims: GridDims::new(200, 200),
        kind: ShapeKind::Polyline {
            points: vec![(50, 150), (50, 60), (150, 60)],
        },
        seed: 0,
    };
    let shape = make_shape(&spec).unwrap();
    let flux = compute_context_flux(&shape.skeleton, ContextRadius::DEFAULT).unwrap();
    let recovered = recover_skeleton(&flux, &RecoveryParams::default());
    assert!(recovered.any());
    assert_eq!(component_count(&recovered), 1);
    let counts =
        match_with_tolerance(&recovered, &shape.skeleton, MatchTolerance::default()).unwrap();
    let f = f_measure(counts.precision(), counts.recall());
    assert!(f >= 0.9, "L round-trip F = {f}");
}

#[test]
fn ray_to_nearest_site_lands_on_skeleton() {
    let spec = ShapeSpec {
        dims: GridDims::new(96, 96),
        kind: ShapeKind::Polyline {
            points: vec![(20, 70), (40, 30), (80, 40)],
        },
        seed: 0,
    };
    let shape = make_shape(&spec).unwrap();
    let r = ContextRadius::DEFAULT;
    let partition = partition_regions(&shape.skeleton, r).unwrap();
    let flux = compute_context_flux(&shape.skeleton, r).unwrap();
    let (_, nearest) = euclidean_dt_with_labels(&shape.skeleton).unwrap();
    for y in 0..96 {
        for x in 0..96 {
            if partition.label(x, y) != RegionLabel::Context {
                continue;
            }
            let (nx, ny) = nearest.nearest_site(x, y).unwrap();
            let dist = (((nx as f64 - x as f64).powi(2)) + ((ny as f64 - y as f64).powi(2)))
                .sqrt();
            let (fx, fy) = flux.get(x, y);
            // Walking distance `dist` along the flux lands exactly on the
            // nearest skeleton pixel.
            let tx = x as f64 + dist * fx;
            let ty = y as f64 + dist * fy;
            assert!((tx - nx as f64).abs() < 1e-9, "at ({x},{y})");
            assert!((ty - ny as f64).abs() < 1e-9, "at ({x},{y})");
            assert!(shape.skeleton.get(nx, ny));
            assert!(dist <= r.get() as f64 + 1e-12);
        }
    }
}

#[test]
fn flux_translation_equivariance() {
    let dims = GridDims::new(80, 80);
    let mut skel = BinaryMap::new(dims);
    for i in 0..15 {
        skel.set(20 + i, 30 + i / 3, true);
    }
    let r = ContextRadius::DEFAULT;
    let flux = compute_context_flux(&skel, r).unwrap();

    let (sx, sy) = (9usize, 13usize);
    let mut shifted = BinaryMap::new(dims);
    for (x, y) in skel.iter_true() {
        shifted.set(x + sx, y + sy, true);
    }
    let flux_shifted = compute_context_flux(&shifted, r).unwrap();

    // Compare on the region where both are defined; padding keeps the
    // context disks away from the border.
    for y in 0..80 - sy {
        for x in 0..80 - sx {
            assert_eq!(
                flux.get(x, y),
                flux_shifted.get(x + sx, y + sy),
                "at ({x},{y})"
            );
        }
    }
}

#[test]
fn weight_mass_balances_on_random_shapes() {
    for seed in 0..6u64 {
        let spec = ShapeSpec {
            dims: GridDims::new(90, 70),
            kind: ShapeKind::BlobMask,
            seed,
        };
        let shape = make_shape(&spec).unwrap();
        let p = partition_regions(&shape.skeleton, ContextRadius::DEFAULT).unwrap();
        let w = pixel_weights(&p);
        let mut fg_mass = 0.0;
        let mut bg_mass = 0.0;
        for (i, l) in p.labels().iter().enumerate() {
            match l {
                RegionLabel::Background => bg_mass += w.values()[i],
                _ => fg_mass += w.values()[i],
            }
        }
        assert!(
            (fg_mass - bg_mass).abs() <= 1e-9 * bg_mass.max(1.0),
            "seed {seed}: fg {fg_mass} bg {bg_mass}"
        );
    }
}

#[test]
fn magnitude_negation_invariant() {
    let spec = ShapeSpec {
        dims: GridDims::new(64, 64),
        kind: ShapeKind::Line {
            from: (10, 32),
            to: (54, 32),
        },
        seed: 0,
    };
    let shape = make_shape(&spec).unwrap();
    let flux = compute_context_flux(&shape.skeleton, ContextRadius::DEFAULT).unwrap();
    let negated = FluxField::from_vectors(
        flux.dims(),
        flux.vectors().iter().map(|&(x, y)| (-x, -y)).collect(),
    );
    assert_eq!(flux.magnitude(), negated.magnitude());
    for v in flux.magnitude().values() {
        assert!(*v >= 0.0);
    }
}

#[test]
fn robustness_degrades_monotonically_with_noise() {
    use fluxskel_core::synth::{perturb_flux, PerturbSpec};
    let shape = make_shape(&ShapeSpec {
        dims: GridDims::new(200, 150),
        kind: ShapeKind::Line {
            from: (30, 75),
            to: (170, 75),
        },
        seed: 0,
    })
    .unwrap();
    let flux = compute_context_flux(&shape.skeleton, ContextRadius::DEFAULT).unwrap();
    let median_f = |sigma: f64| {
        let mut fs: Vec<f64> = (0..10u64)
            .map(|seed| {
                let degraded = perturb_flux(
                    &flux,
                    &PerturbSpec {
                        sigma,
                        seed,
                        ..PerturbSpec::default()
                    },
                );
                let rec = recover_skeleton(&degraded, &RecoveryParams::default());
                let c = match_with_tolerance(&rec, &shape.skeleton, MatchTolerance::default())
                    .unwrap();
                f_measure(c.precision(), c.recall())
            })
            .collect();
        fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        fs[fs.len() / 2]
    };
    assert!(median_f(0.0) >= median_f(0.5));
}

fn component_count(map: &BinaryMap) -> usize {
    let dims = map.dims();
    let mut seen = vec![false; dims.pixel_count()];
    let mut stack = Vec::new();
    let mut n = 0;
    for (sx, sy) in map.iter_true() {
        if seen[dims.index(sx, sy)] {
            continue;
        }
        n += 1;
        seen[dims.index(sx, sy)] = true;
        stack.push((sx, sy));
        while let Some((x, y)) = stack.pop() {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if dims.contains_signed(nx, ny) {
                        let (nx, ny) = (nx as usize, ny as usize);
                        if map.get(nx, ny) && !seen[dims.index(nx, ny)] {
                            seen[dims.index(nx, ny)] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    n
}
