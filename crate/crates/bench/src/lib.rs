//! Shared fixtures for the benchmarks.

use altocc_core::analytics::{PathlossExponents, RadioConfig, ScenarioGeometry};
use altocc_core::raytrace::{Building, BuildingMap};
use altocc_core::LatLon;

pub fn radio() -> RadioConfig {
    RadioConfig::baseline()
}

pub fn exponents() -> PathlossExponents {
    PathlossExponents::FREE_SPACE_AND_CUBIC
}

pub fn scenario(height: f64) -> ScenarioGeometry {
    ScenarioGeometry::new(height, 10.0, 4000.0, 0.005).expect("valid scenario")
}

/// A 9 x 9 block grid of 40 m buildings on 100 m centres, heights 10 to 50 m.
pub fn city() -> BuildingMap {
    let mut buildings = Vec::new();
    for i in -4i32..=4 {
        for j in -4..=4 {
            let (cx, cy) = (i as f64 * 100.0 + 50.0, j as f64 * 100.0 + 50.0);
            let h = 10.0 + ((i * 7 + j * 3).rem_euclid(5)) as f64 * 10.0;
            buildings.push(Building::rectangle((cx - 20.0, cy - 20.0), (cx + 20.0, cy + 20.0), h).expect("valid block"));
        }
    }
    BuildingMap::new(LatLon { lat: 0.0, lon: 0.0 }, buildings).expect("valid map")
}
