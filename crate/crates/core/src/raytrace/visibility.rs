//! Segment occlusion against extruded footprints.

use super::map::{Building, BuildingMap, Containment};
use super::RaytraceError;

/// Heights within this many metres of a roof count as grazing, which is LoS.
pub const GRAZE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// True when the segment `tx`→`rx` passes through no building volume.
///
/// Touching a wall, edge or roof without entering the interior counts as
/// visible.
pub fn los_visible(tx: Point3, rx: Point3, map: &BuildingMap) -> Result<bool, RaytraceError> {
    if tx == rx {
        return Err(RaytraceError::DegenerateSegment);
    }
    if [tx.x, tx.y, tx.z, rx.x, rx.y, rx.z].iter().any(|v| !v.is_finite()) {
        return Err(RaytraceError::NonFinite);
    }
    Ok(!map.buildings().iter().any(|b| blocks(b, &tx, &rx)))
}

fn blocks(b: &Building, p: &Point3, q: &Point3) -> bool {
    let h = b.height() - GRAZE_TOL;
    if p.z.min(q.z) >= h {
        return false;
    }
    let bb = &b.bounds;
    if p.x.max(q.x) < bb.min.0 || p.x.min(q.x) > bb.max.0 || p.y.max(q.y) < bb.min.1 || p.y.min(q.y) > bb.max.1 {
        return false;
    }

    let d = (q.x - p.x, q.y - p.y);
    let z_at = |t: f64| p.z + t * (q.z - p.z);
    let len2 = d.0 * d.0 + d.1 * d.1;
    if len2 == 0.0 {
        return b.contains((p.x, p.y)) == Containment::Inside && p.z.min(q.z) < h;
    }

    let mut ts = vec![0.0, 1.0];
    for (a, c) in b.edges() {
        let e = (c.0 - a.0, c.1 - a.1);
        let w = (a.0 - p.x, a.1 - p.y);
        let denom = d.0 * e.1 - d.1 * e.0;
        if denom != 0.0 {
            let t = (w.0 * e.1 - w.1 * e.0) / denom;
            let s = (w.0 * d.1 - w.1 * d.0) / denom;
            if (0.0..=1.0).contains(&s) && t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        } else if w.0 * d.1 - w.1 * d.0 == 0.0 {
            // Collinear edge: its endpoints bound the shared stretch.
            for v in [a, c] {
                let t = ((v.0 - p.x) * d.0 + (v.1 - p.y) * d.1) / len2;
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.windows(2).any(|w| {
        let mid = 0.5 * (w[0] + w[1]);
        let m = (p.x + mid * d.0, p.y + mid * d.1);
        b.contains(m) == Containment::Inside && z_at(w[0]).min(z_at(w[1])) < h
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raytrace::map::Building;

    fn one(b: Building) -> BuildingMap {
        BuildingMap::new(crate::geo::LatLon { lat: 0.0, lon: 0.0 }, vec![b]).unwrap()
    }

    #[test]
    fn empty_map_is_clear() {
        let m = BuildingMap::empty();
        assert!(los_visible(Point3::new(0.0, 0.0, 0.0), Point3::new(5.0, 5.0, 5.0), &m).unwrap());
    }

    #[test]
    fn zero_length_is_an_error() {
        let p = Point3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            los_visible(p, p, &BuildingMap::empty()),
            Err(RaytraceError::DegenerateSegment)
        ));
    }

    #[test]
    fn wall_blocks_low_path() {
        let m = one(Building::rectangle((40.0, -50.0), (60.0, 50.0), 20.0).unwrap());
        let ue = Point3::new(100.0, 0.0, 0.0);
        assert!(!los_visible(ue, Point3::new(0.0, 0.0, 10.0), &m).unwrap());
        assert!(los_visible(ue, Point3::new(0.0, 0.0, 100.0), &m).unwrap());
        // Passing beside the wall.
        assert!(los_visible(Point3::new(100.0, 60.0, 0.0), Point3::new(0.0, 60.0, 1.0), &m).unwrap());
    }

    #[test]
    fn running_along_a_wall_is_grazing() {
        let m = one(Building::rectangle((0.0, 0.0), (10.0, 10.0), 20.0).unwrap());
        assert!(los_visible(Point3::new(-5.0, 0.0, 1.0), Point3::new(15.0, 0.0, 1.0), &m).unwrap());
        assert!(los_visible(Point3::new(-5.0, 5.0, 20.0), Point3::new(15.0, 5.0, 20.0), &m).unwrap());
        assert!(!los_visible(Point3::new(-5.0, 5.0, 19.0), Point3::new(15.0, 5.0, 19.0), &m).unwrap());
    }

    #[test]
    fn vertical_segments() {
        let m = one(Building::rectangle((0.0, 0.0), (10.0, 10.0), 20.0).unwrap());
        assert!(los_visible(Point3::new(50.0, 50.0, 0.0), Point3::new(50.0, 50.0, 300.0), &m).unwrap());
        assert!(!los_visible(Point3::new(5.0, 5.0, 0.0), Point3::new(5.0, 5.0, 300.0), &m).unwrap());
        assert!(los_visible(Point3::new(5.0, 5.0, 20.0), Point3::new(5.0, 5.0, 300.0), &m).unwrap());
    }

    #[test]
    fn endpoint_inside_footprint_compares_heights() {
        let m = one(Building::rectangle((0.0, 0.0), (10.0, 10.0), 20.0).unwrap());
        // Rooftop transmitter looking down and away.
        assert!(los_visible(Point3::new(5.0, 5.0, 25.0), Point3::new(30.0, 5.0, 0.0), &m).unwrap());
        assert!(!los_visible(Point3::new(5.0, 5.0, 10.0), Point3::new(30.0, 5.0, 50.0), &m).unwrap());
    }

    #[test]
    fn concave_notch_is_open() {
        // U shape open to +y; a path through the notch is clear.
        let u = vec![
            (0.0, 0.0),
            (30.0, 0.0),
            (30.0, 30.0),
            (20.0, 30.0),
            (20.0, 10.0),
            (10.0, 10.0),
            (10.0, 30.0),
            (0.0, 30.0),
        ];
        let m = one(Building::new(u, 15.0).unwrap());
        assert!(los_visible(Point3::new(15.0, 12.0, 1.0), Point3::new(15.0, 100.0, 1.0), &m).unwrap());
        assert!(!los_visible(Point3::new(5.0, 12.0, 1.0), Point3::new(5.0, 100.0, 1.0), &m).unwrap());
    }
}
