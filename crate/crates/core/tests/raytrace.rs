mod common;

use std::f64::consts::PI;

use altocc_core::analytics::{PathlossExponents, RadioConfig};
use altocc_core::raytrace::{
    aggregate_power_site, curve_over_heights, empirical_plos, grid_visibility, los_visible, Building, BuildingMap,
    CircularGrid, Fading, Point3,
};
use altocc_core::LatLon;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORIGIN: LatLon = LatLon { lat: 0.0, lon: 0.0 };
const EXP: PathlossExponents = PathlossExponents::FREE_SPACE_AND_CUBIC;

fn block(rng: &mut ChaCha8Rng, spread: f64) -> Building {
    let c = (rng.random_range(-spread..spread), rng.random_range(-spread..spread));
    let (w, d) = (rng.random_range(4.0..30.0), rng.random_range(4.0..30.0));
    let (s, co) = rng.random_range(0.0..PI).sin_cos();
    let corners = [(-w, -d), (w, -d), (w, d), (-w, d)];
    Building::new(
        corners.iter().map(|&(x, y)| (c.0 + co * x - s * y, c.1 + s * x + co * y)).collect(),
        rng.random_range(5.0..60.0),
    )
    .unwrap()
}

fn random_map(seed: u64, n: usize, spread: f64) -> BuildingMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BuildingMap::new(ORIGIN, (0..n).map(|_| block(&mut rng, spread)).collect()).unwrap()
}

fn small_grid() -> CircularGrid {
    CircularGrid {
        radial_step: 10.0,
        azimuth_step: 4.0,
        max_radius: 300.0,
        center: (0.0, 0.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_the_receiver_never_loses_sight(
        seed in any::<u64>(),
        tx in (-200.0..200.0f64, -200.0..200.0f64, 0.0..3.0f64),
        rx in (-200.0..200.0f64, -200.0..200.0f64),
        low in 5.0..80.0f64,
        lift in 0.1..100.0f64,
    ) {
        let map = random_map(seed, 6, 150.0);
        let tx = Point3::new(tx.0, tx.1, tx.2);
        let below = los_visible(tx, Point3::new(rx.0, rx.1, low), &map).unwrap();
        let above = los_visible(tx, Point3::new(rx.0, rx.1, low + lift), &map).unwrap();
        prop_assert!(!below || above);
    }

    #[test]
    fn visibility_is_symmetric_in_its_endpoints(
        seed in any::<u64>(),
        a in (-200.0..200.0f64, -200.0..200.0f64, 0.0..80.0f64),
        b in (-200.0..200.0f64, -200.0..200.0f64, 0.0..80.0f64),
    ) {
        let map = random_map(seed, 6, 150.0);
        let (a, b) = (Point3::new(a.0, a.1, a.2), Point3::new(b.0, b.1, b.2));
        prop_assert_eq!(los_visible(a, b, &map).unwrap(), los_visible(b, a, &map).unwrap());
    }

    #[test]
    fn grid_heights_are_monotone(seed in any::<u64>()) {
        let map = random_map(seed, 8, 250.0);
        let grid = small_grid();
        let low = grid_visibility(&grid, 30.0, 0.0, &map).unwrap();
        let high = grid_visibility(&grid, 90.0, 0.0, &map).unwrap();
        for (l, h) in low.points.iter().zip(&high.points) {
            prop_assert!(!l.los || h.los, "point {}", l.point.index);
        }
        prop_assert!(high.los_count() >= low.los_count());
    }
}

#[test]
fn rotating_the_map_by_grid_steps_rotates_the_visibility() {
    let map = random_map(41, 10, 250.0);
    let grid = small_grid();
    let spokes = grid.spokes();
    let base = grid_visibility(&grid, 40.0, 0.0, &map).unwrap();
    for steps in [1usize, 7, 45] {
        let turned = map.rotated((4.0 * steps as f64).to_radians());
        let vis = grid_visibility(&grid, 40.0, 0.0, &turned).unwrap();
        let mut mismatches = 0;
        for p in &base.points {
            let ring = p.point.index / spokes;
            let spoke = (p.point.index % spokes + steps) % spokes;
            let q = &vis.points[ring * spokes + spoke];
            mismatches += (p.los != q.los || p.inside_building != q.inside_building) as usize;
        }
        assert_eq!(mismatches, 0, "rotation by {steps} steps");
        assert_eq!(vis.los_count(), base.los_count());
    }
}

#[test]
fn three_building_scene_matches_sampled_oracle() {
    let map = BuildingMap::new(
        ORIGIN,
        vec![
            Building::rectangle((40.0, -30.0), (90.0, 10.0), 25.0).unwrap(),
            Building::new(vec![(-120.0, 40.0), (-60.0, 60.0), (-80.0, 130.0), (-140.0, 100.0)], 45.0).unwrap(),
            // L-shaped, concave.
            Building::new(
                vec![(0.0, -200.0), (80.0, -200.0), (80.0, -170.0), (30.0, -170.0), (30.0, -110.0), (0.0, -110.0)],
                15.0,
            )
            .unwrap(),
        ],
    )
    .unwrap();
    let grid = CircularGrid {
        radial_step: 5.0,
        azimuth_step: 2.0,
        max_radius: 400.0,
        center: (0.0, 0.0),
    };
    for h in [20.0, 60.0, 150.0] {
        let vis = grid_visibility(&grid, h, 1.5, &map).unwrap();
        let rx = Point3::new(0.0, 0.0, h);
        let mut blocked = 0;
        for p in vis.active() {
            let tx = Point3::new(p.point.x, p.point.y, 1.5);
            let oracle = !common::sampled_blocked(tx, rx, &map, 10_000);
            assert_eq!(p.los, oracle, "H {h}, point {} at ({}, {})", p.point.index, p.point.x, p.point.y);
            blocked += (!p.los) as usize;
        }
        assert!(blocked > 50, "scene should hide part of the grid at H {h}");
        assert!(vis.points.iter().any(|p| p.inside_building && !p.los));
    }
}

/// Closed ring of overlapping wall segments between radii 200 and 210 m.
fn walled_city(height: f64) -> BuildingMap {
    let n = 72;
    let walls = (0..n)
        .map(|i| {
            let a0 = (i as f64 - 0.2) * 2.0 * PI / n as f64;
            let a1 = (i as f64 + 1.2) * 2.0 * PI / n as f64;
            let at = |r: f64, a: f64| (r * a.cos(), r * a.sin());
            Building::new(vec![at(200.0, a0), at(200.0, a1), at(210.0, a1), at(210.0, a0)], height).unwrap()
        })
        .collect();
    BuildingMap::new(ORIGIN, walls).unwrap()
}

#[test]
fn a_tall_wall_ring_hides_everything_outside() {
    let map = walled_city(500.0);
    let grid = CircularGrid {
        radial_step: 20.0,
        azimuth_step: 4.0,
        max_radius: 1000.0,
        center: (0.0, 0.0),
    };
    let vis = grid_visibility(&grid, 100.0, 0.0, &map).unwrap();
    for p in vis.active() {
        assert_eq!(p.los, p.point.ground_dist < 200.0, "point at {} m", p.point.ground_dist);
    }
    let plos = empirical_plos(&[vis], 50.0).unwrap();
    // 3-D distance 250 m at H = 100 m is a ground distance of 229 m.
    for (i, bin) in plos[0].bins.iter().enumerate().skip(5) {
        if let Some(b) = bin {
            assert_eq!(b.los, 0, "bin {i}");
        }
    }
    assert!(plos[0].bins[2].is_some_and(|b| b.probability() == 1.0));
}

#[test]
fn fading_averages_out_over_seeds() {
    let map = random_map(5, 10, 300.0);
    let grid = CircularGrid {
        radial_step: 20.0,
        azimuth_step: 8.0,
        max_radius: 600.0,
        center: (0.0, 0.0),
    };
    let radio = RadioConfig::baseline();
    let vis = grid_visibility(&grid, 60.0, 0.0, &map).unwrap();
    let plain = aggregate_power_site(&vis, &radio, &EXP, Fading::Off, 10.0).unwrap();
    let draws: Vec<f64> = (0..1000)
        .map(|seed| aggregate_power_site(&vis, &radio, &EXP, Fading::Rayleigh { seed }, 10.0).unwrap())
        .collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - plain).abs() < 3.0 * sd / n.sqrt(), "{mean} vs {plain}");
    assert_eq!(
        aggregate_power_site(&vis, &radio, &EXP, Fading::Rayleigh { seed: 3 }, 10.0).unwrap(),
        draws[3]
    );
}

#[test]
fn all_nlos_is_weaker_than_all_los() {
    let radio = RadioConfig::baseline();
    let grid = small_grid();
    let mut vis = grid_visibility(&grid, 50.0, 0.0, &BuildingMap::empty()).unwrap();
    assert_eq!(vis.los_count(), grid.len());
    let los = aggregate_power_site(&vis, &radio, &EXP, Fading::Off, 0.0).unwrap();
    vis.points.iter_mut().for_each(|p| p.los = false);
    let nlos = aggregate_power_site(&vis, &radio, &EXP, Fading::Off, 0.0).unwrap();
    assert!(nlos < los);
    let partial = aggregate_power_site(&grid_visibility(&grid, 50.0, 0.0, &random_map(9, 12, 250.0)).unwrap(), &radio, &EXP, Fading::Off, 0.0)
        .unwrap();
    assert!(partial < los);
}

#[test]
fn guard_radius_drops_near_points() {
    let radio = RadioConfig::baseline();
    let vis = grid_visibility(&small_grid(), 50.0, 0.0, &BuildingMap::empty()).unwrap();
    let all = aggregate_power_site(&vis, &radio, &EXP, Fading::Off, 0.0).unwrap();
    let far = aggregate_power_site(&vis, &radio, &EXP, Fading::Off, 100.0).unwrap();
    let near: f64 = vis
        .points
        .iter()
        .filter(|p| p.point.ground_dist < 100.0)
        .map(|p| radio.link_gain() * p.dist_3d.powi(-2))
        .sum();
    assert!(((all - far) - near).abs() < 1e-12 * all);
}

#[test]
fn site_curve_rises_when_walls_are_overflown() {
    let map = walled_city(40.0);
    let grid = CircularGrid {
        radial_step: 25.0,
        azimuth_step: 10.0,
        max_radius: 1000.0,
        center: (0.0, 0.0),
    };
    let curve = curve_over_heights(&grid, &map, &RadioConfig::baseline(), &EXP, &[20.0, 60.0, 100.0, 200.0], 250.0, 0.0).unwrap();
    assert_eq!(curve.label, "ray-trace");
    let p: Vec<f64> = curve.samples().iter().map(|s| s.1).collect();
    // Only points beyond the wall count; they come into view above it.
    assert!(p[1] > 10.0 * p[0] && p[2] > p[1], "{p:?}");
}
