//! Building footprints and the map file format.
//!
//! A map file is line oriented. Blank lines and lines starting with `#` are
//! ignored.
//!
//! ```text
//! altocc-map 1
//! origin 35.7796 -78.6382
//! frame local            # or: frame latlon
//! building 24.5
//! 0 0
//! 30 0
//! 30 20
//! 0 20
//! end
//! ```
//!
//! In the `local` frame vertices are east/north metres from the origin; in
//! the `latlon` frame they are `lat lon` degrees and are projected onto the
//! tangent plane at the origin.

use std::fmt::Write as _;
use std::path::Path;

use crate::geo::LatLon;

use super::RaytraceError;

/// Opening line, height and vertices of a block still being read.
type OpenBlock = (usize, f64, Vec<(f64, f64)>);

pub const MAP_HEADER: &str = "altocc-map 1";

/// Footprints must lie within this distance of the map origin, metres.
pub const MAX_EXTENT: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Aabb {
    pub min: (f64, f64),
    pub max: (f64, f64),
}

/// A flat-roofed vertical prism.
#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    footprint: Vec<(f64, f64)>,
    height: f64,
    pub(crate) bounds: Aabb,
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    cross(a, b, p) == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

/// Position of a point relative to a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Outside,
    Boundary,
    Inside,
}

impl Building {
    /// Builds a prism from a simple polygon. Clockwise input is reversed so
    /// the stored footprint is counterclockwise.
    pub fn new(mut footprint: Vec<(f64, f64)>, height: f64) -> Result<Self, RaytraceError> {
        if !(height.is_finite() && height > 0.0) {
            return Err(RaytraceError::BadBuilding(format!("height must be positive, got {height}")));
        }
        if footprint.len() > 3 && footprint.first() == footprint.last() {
            footprint.pop();
        }
        if footprint.len() < 3 {
            return Err(RaytraceError::BadBuilding(format!(
                "footprint needs at least 3 vertices, got {}",
                footprint.len()
            )));
        }
        if footprint.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(RaytraceError::BadBuilding("non-finite vertex".into()));
        }
        let n = footprint.len();
        for i in 0..n {
            let (a, b) = (footprint[i], footprint[(i + 1) % n]);
            if a == b {
                return Err(RaytraceError::BadBuilding(format!("repeated vertex at {i}")));
            }
            for j in i + 1..n {
                // Adjacent edges share a vertex by construction.
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (footprint[j], footprint[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(RaytraceError::BadBuilding(format!("edges {i} and {j} intersect")));
                }
            }
        }
        let area2: f64 = (0..n)
            .map(|i| {
                let (a, b) = (footprint[i], footprint[(i + 1) % n]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum();
        if area2 == 0.0 {
            return Err(RaytraceError::BadBuilding("footprint has zero area".into()));
        }
        if area2 < 0.0 {
            footprint.reverse();
        }
        let mut bounds = Aabb {
            min: (f64::INFINITY, f64::INFINITY),
            max: (f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for &(x, y) in &footprint {
            bounds.min = (bounds.min.0.min(x), bounds.min.1.min(y));
            bounds.max = (bounds.max.0.max(x), bounds.max.1.max(y));
        }
        Ok(Building {
            footprint,
            height,
            bounds,
        })
    }

    /// Axis-aligned box building.
    pub fn rectangle(min: (f64, f64), max: (f64, f64), height: f64) -> Result<Self, RaytraceError> {
        Building::new(vec![min, (max.0, min.1), max, (min.0, max.1)], height)
    }

    pub fn footprint(&self) -> &[(f64, f64)] {
        &self.footprint
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let n = self.footprint.len();
        (0..n).map(move |i| (self.footprint[i], self.footprint[(i + 1) % n]))
    }

    pub fn contains(&self, p: (f64, f64)) -> Containment {
        let b = &self.bounds;
        if p.0 < b.min.0 || p.0 > b.max.0 || p.1 < b.min.1 || p.1 > b.max.1 {
            return Containment::Outside;
        }
        let mut inside = false;
        for (a, c) in self.edges() {
            if on_segment(p, a, c) {
                return Containment::Boundary;
            }
            if (a.1 > p.1) != (c.1 > p.1) {
                let x = a.0 + (p.1 - a.1) * (c.0 - a.0) / (c.1 - a.1);
                if p.0 < x {
                    inside = !inside;
                }
            }
        }
        if inside {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Rotates the footprint about the local origin by `angle` radians.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let fp = self.footprint.iter().map(|&(x, y)| (c * x - s * y, s * x + c * y)).collect();
        Building::new(fp, self.height).expect("rotation preserves validity")
    }
}

/// Buildings in a local east/north frame anchored at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingMap {
    pub origin: LatLon,
    buildings: Vec<Building>,
}

impl BuildingMap {
    pub fn new(origin: LatLon, buildings: Vec<Building>) -> Result<Self, RaytraceError> {
        for (i, b) in buildings.iter().enumerate() {
            if let Some(&(x, y)) = b.footprint.iter().find(|p| p.0.hypot(p.1) > MAX_EXTENT) {
                return Err(RaytraceError::BadBuilding(format!(
                    "building {i}: vertex ({x}, {y}) is more than {MAX_EXTENT} m from the origin"
                )));
            }
        }
        Ok(BuildingMap { origin, buildings })
    }

    pub fn empty() -> Self {
        BuildingMap {
            origin: LatLon { lat: 0.0, lon: 0.0 },
            buildings: Vec::new(),
        }
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn rotated(&self, angle: f64) -> Self {
        BuildingMap {
            origin: self.origin,
            buildings: self.buildings.iter().map(|b| b.rotated(angle)).collect(),
        }
    }

    /// True if `p` lies inside or on the footprint of any building.
    pub fn covers(&self, p: (f64, f64)) -> bool {
        self.buildings.iter().any(|b| b.contains(p) != Containment::Outside)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAP_HEADER}");
        let _ = writeln!(s, "origin {} {}", self.origin.lat, self.origin.lon);
        let _ = writeln!(s, "frame local");
        for b in &self.buildings {
            let _ = writeln!(s, "building {}", b.height);
            for &(x, y) in &b.footprint {
                let _ = writeln!(s, "{x} {y}");
            }
            let _ = writeln!(s, "end");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, RaytraceError> {
        let err = |line: usize, msg: String| RaytraceError::MapSyntax { line, message: msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        match lines.next() {
            Some((_, l)) if l == MAP_HEADER => {}
            Some((n, l)) => return Err(err(n, format!("expected '{MAP_HEADER}', found '{l}'"))),
            None => return Err(err(0, "empty map file".into())),
        }
        let nums = |n: usize, parts: &[&str], want: usize| -> Result<Vec<f64>, RaytraceError> {
            if parts.len() != want {
                return Err(err(n, format!("expected {want} numbers, found {}", parts.len())));
            }
            parts
                .iter()
                .map(|p| p.parse::<f64>().map_err(|_| err(n, format!("not a number: '{p}'"))))
                .collect()
        };

        let mut origin = None;
        let mut latlon = false;
        let mut buildings = Vec::new();
        let mut current: Option<OpenBlock> = None;
        for (n, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match (parts[0], current.as_mut()) {
                ("end", Some(_)) => {
                    let (start, h, fp) = current.take().expect("checked");
                    let fp = match origin {
                        Some(o) if latlon => fp
                            .into_iter()
                            .map(|(lat, lon)| LatLon::to_local(o, LatLon { lat, lon }))
                            .collect(),
                        _ => fp,
                    };
                    buildings.push(Building::new(fp, h).map_err(|e| err(start, e.to_string()))?);
                }
                (_, Some((_, _, fp))) => {
                    let v = nums(n, &parts, 2)?;
                    fp.push((v[0], v[1]));
                }
                ("origin", None) => {
                    let v = nums(n, &parts[1..], 2)?;
                    origin = Some(LatLon { lat: v[0], lon: v[1] });
                }
                ("frame", None) => {
                    latlon = match parts.get(1).copied() {
                        Some("local") if parts.len() == 2 => false,
                        Some("latlon") if parts.len() == 2 => true,
                        _ => return Err(err(n, "frame must be 'local' or 'latlon'".into())),
                    };
                }
                ("building", None) => {
                    if origin.is_none() {
                        return Err(err(n, "'origin' must precede buildings".into()));
                    }
                    let v = nums(n, &parts[1..], 1)?;
                    current = Some((n, v[0], Vec::new()));
                }
                (other, None) => return Err(err(n, format!("unexpected '{other}'"))),
            }
        }
        if let Some((start, _, _)) = current {
            return Err(err(start, "building not closed by 'end'".into()));
        }
        let origin = origin.ok_or_else(|| err(0, "missing 'origin'".into()))?;
        BuildingMap::new(origin, buildings)
    }

    pub fn read(path: &Path) -> Result<Self, RaytraceError> {
        BuildingMap::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), RaytraceError> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_footprints() {
        assert!(Building::new(vec![(0.0, 0.0), (1.0, 0.0)], 5.0).is_err());
        assert!(Building::rectangle((0.0, 0.0), (1.0, 1.0), 0.0).is_err());
        let bowtie = vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(Building::new(bowtie, 5.0).is_err());
    }

    #[test]
    fn clockwise_is_normalized() {
        let b = Building::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)], 3.0).unwrap();
        assert_eq!(b.footprint()[1], (1.0, 1.0));
    }

    #[test]
    fn containment() {
        let b = Building::rectangle((0.0, 0.0), (10.0, 10.0), 3.0).unwrap();
        assert_eq!(b.contains((5.0, 5.0)), Containment::Inside);
        assert_eq!(b.contains((10.0, 5.0)), Containment::Boundary);
        assert_eq!(b.contains((0.0, 0.0)), Containment::Boundary);
        assert_eq!(b.contains((11.0, 5.0)), Containment::Outside);
    }

    #[test]
    fn text_round_trip() {
        let map = BuildingMap::new(
            LatLon { lat: 35.0, lon: -78.0 },
            vec![
                Building::rectangle((0.0, 0.0), (30.0, 20.0), 24.5).unwrap(),
                Building::new(vec![(50.0, 50.0), (60.0, 52.0), (55.0, 61.5)], 9.0).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(BuildingMap::from_text(&map.to_text()).unwrap(), map);
    }

    #[test]
    fn latlon_frame_is_projected() {
        let text = "altocc-map 1\norigin 0 0\nframe latlon\nbuilding 10\n0.001 0.001\n0.001 0.002\n0.002 0.002\nend\n";
        let map = BuildingMap::from_text(text).unwrap();
        let (x, y) = map.buildings()[0].footprint()[0];
        assert!((x - 111.195).abs() < 0.01 && (y - 111.195).abs() < 0.01, "{x} {y}");
    }

    #[test]
    fn syntax_errors_carry_line() {
        let e = BuildingMap::from_text("altocc-map 1\norigin 0 0\nbuilding 5\n0 0\n1 x\nend\n").unwrap_err();
        assert!(matches!(e, RaytraceError::MapSyntax { line: 5, .. }), "{e}");
        assert!(BuildingMap::from_text("altocc-map 2\n").is_err());
        let far = "altocc-map 1\norigin 0 0\nbuilding 5\n0 0\n20000 0\n0 1\nend\n";
        assert!(BuildingMap::from_text(far).is_err());
    }
}
