//! Local tangent-plane coordinates around a reference point.

use serde::{Deserialize, Serialize};

/// Mean Earth radius in metres.
pub const EARTH_RADIUS: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    /// Equirectangular projection of `p` to (east, north) metres from `self`.
    ///
    /// Accurate to well under a metre over a few kilometres at mid latitudes.
    pub fn to_local(self, p: LatLon) -> (f64, f64) {
        let lat0 = self.lat.to_radians();
        let x = (p.lon - self.lon).to_radians() * lat0.cos() * EARTH_RADIUS;
        let y = (p.lat - self.lat).to_radians() * EARTH_RADIUS;
        (x, y)
    }

    /// Inverse of [`LatLon::to_local`].
    pub fn from_local(self, x: f64, y: f64) -> LatLon {
        let lat0 = self.lat.to_radians();
        LatLon {
            lat: self.lat + (y / EARTH_RADIUS).to_degrees(),
            lon: self.lon + (x / (EARTH_RADIUS * lat0.cos())).to_degrees(),
        }
    }
}
