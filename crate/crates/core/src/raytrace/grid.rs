//! Circular receiver-centred grids of ground transmitters and site power.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::analytics::{PathlossExponents, RadioConfig};
use crate::curve::AltitudePowerCurve;

use super::map::BuildingMap;
use super::visibility::{los_visible, Point3};
use super::RaytraceError;

/// Polar grid of ground points around `center`.
///
/// Rings sit at `k · radial_step` for `k = 1..=max_radius / radial_step`,
/// each holding `360 / azimuth_step` points starting at azimuth 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularGrid {
    pub radial_step: f64,
    /// Degrees.
    pub azimuth_step: f64,
    pub max_radius: f64,
    pub center: (f64, f64),
}

impl Default for CircularGrid {
    fn default() -> Self {
        CircularGrid {
            radial_step: 20.0,
            azimuth_step: 4.0,
            max_radius: 2000.0,
            center: (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub ground_dist: f64,
}

fn whole(v: f64) -> Option<usize> {
    let r = v.round();
    ((v - r).abs() <= 1e-9 * v.abs().max(1.0) && r >= 1.0).then_some(r as usize)
}

impl CircularGrid {
    pub fn validate(&self) -> Result<(), RaytraceError> {
        let ok = self.radial_step > 0.0
            && self.azimuth_step > 0.0
            && self.max_radius > 0.0
            && whole(self.max_radius / self.radial_step).is_some()
            && whole(360.0 / self.azimuth_step).is_some();
        if !ok {
            return Err(RaytraceError::BadGrid(format!(
                "steps must divide the radius and 360 degrees: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn rings(&self) -> usize {
        whole(self.max_radius / self.radial_step).unwrap_or(0)
    }

    pub fn spokes(&self) -> usize {
        whole(360.0 / self.azimuth_step).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.rings() * self.spokes()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points ordered ring by ring, then by azimuth.
    pub fn points(&self) -> Vec<GridPoint> {
        let spokes = self.spokes();
        let mut out = Vec::with_capacity(self.len());
        for k in 1..=self.rings() {
            let r = k as f64 * self.radial_step;
            for j in 0..spokes {
                let (s, c) = (j as f64 * self.azimuth_step).to_radians().sin_cos();
                out.push(GridPoint {
                    index: out.len(),
                    x: self.center.0 + r * c,
                    y: self.center.1 + r * s,
                    ground_dist: r,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityPoint {
    pub point: GridPoint,
    pub dist_3d: f64,
    pub los: bool,
    /// On or inside a footprint; such points take no part in aggregation.
    pub inside_building: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityResult {
    pub uav_height: f64,
    pub ue_height: f64,
    pub points: Vec<VisibilityPoint>,
}

impl VisibilityResult {
    pub fn active(&self) -> impl Iterator<Item = &VisibilityPoint> {
        self.points.iter().filter(|p| !p.inside_building)
    }

    pub fn los_count(&self) -> usize {
        self.active().filter(|p| p.los).count()
    }
}

/// LoS flags between each grid point at `ue_height` and a receiver above the
/// grid centre.
pub fn grid_visibility(
    grid: &CircularGrid,
    uav_height: f64,
    ue_height: f64,
    map: &BuildingMap,
) -> Result<VisibilityResult, RaytraceError> {
    grid.validate()?;
    if !(uav_height.is_finite() && ue_height.is_finite() && uav_height > ue_height && ue_height >= 0.0) {
        return Err(RaytraceError::BadHeight(uav_height));
    }
    let rx = Point3::new(grid.center.0, grid.center.1, uav_height);
    let points = grid
        .points()
        .into_par_iter()
        .map(|p| {
            let tx = Point3::new(p.x, p.y, ue_height);
            let inside_building = map.covers((p.x, p.y));
            let los = !inside_building
                && los_visible(tx, rx, map).map_err(|e| RaytraceError::AtPoint {
                    index: p.index,
                    source: Box::new(e),
                })?;
            Ok(VisibilityPoint {
                point: p,
                dist_3d: tx.distance(&rx),
                los,
                inside_building,
            })
        })
        .collect::<Result<Vec<_>, RaytraceError>>()?;
    Ok(VisibilityResult {
        uav_height,
        ue_height,
        points,
    })
}

/// Fading setting for site power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    #[default]
    Off,
    /// Unit-mean exponential gains drawn in point order from this seed.
    Rayleigh { seed: u64 },
}

/// Aggregate power at the receiver, skipping points inside buildings and
/// points closer than `guard_radius` on the ground.
pub fn aggregate_power_site(
    result: &VisibilityResult,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    fading: Fading,
    guard_radius: f64,
) -> Result<f64, RaytraceError> {
    if result.points.is_empty() {
        return Err(RaytraceError::BadGrid("visibility result has no points".into()));
    }
    let mut rng = match fading {
        Fading::Off => None,
        Fading::Rayleigh { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut sum = 0.0;
    for p in &result.points {
        // One draw per grid point keeps the gains tied to point indices.
        let h: f64 = rng.as_mut().map_or(1.0, |r| Exp1.sample(r));
        if p.inside_building || p.point.ground_dist < guard_radius {
            continue;
        }
        let alpha = if p.los { exponents.alpha_los } else { exponents.alpha_nlos };
        sum += h * p.dist_3d.powf(-alpha);
    }
    Ok(radio.link_gain() * sum)
}

/// LoS share per 3-D distance bin at one receiver height.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPlos {
    pub uav_height: f64,
    pub bin_width: f64,
    /// `None` for bins with no grid points.
    pub bins: Vec<Option<PlosBin>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlosBin {
    pub los: usize,
    pub total: usize,
}

impl PlosBin {
    pub fn probability(&self) -> f64 {
        self.los as f64 / self.total as f64
    }
}

pub const DEFAULT_PLOS_BIN: f64 = 50.0;

pub fn empirical_plos(results: &[VisibilityResult], bin_width: f64) -> Result<Vec<EmpiricalPlos>, RaytraceError> {
    if results.is_empty() {
        return Err(RaytraceError::BadGrid("no visibility results".into()));
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(RaytraceError::BadGrid(format!("bin width must be positive, got {bin_width}")));
    }
    Ok(results
        .iter()
        .map(|r| {
            let max = r.active().map(|p| p.dist_3d).fold(0.0, f64::max);
            let mut bins: Vec<Option<PlosBin>> = vec![None; (max / bin_width).floor() as usize + 1];
            for p in r.active() {
                let bin = bins[(p.dist_3d / bin_width).floor() as usize].get_or_insert(PlosBin { los: 0, total: 0 });
                bin.total += 1;
                bin.los += p.los as usize;
            }
            EmpiricalPlos {
                uav_height: r.uav_height,
                bin_width,
                bins,
            }
        })
        .collect())
}

/// Writes `height_m,bin_lo_m,bin_hi_m,los,total,plos`; empty bins leave
/// `plos` blank.
pub fn write_empirical_plos<W: Write>(out: W, curves: &[EmpiricalPlos]) -> Result<(), RaytraceError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["height_m", "bin_lo_m", "bin_hi_m", "los", "total", "plos"])?;
    for c in curves {
        for (i, bin) in c.bins.iter().enumerate() {
            let lo = i as f64 * c.bin_width;
            let (los, total, p) = match bin {
                Some(b) => (b.los.to_string(), b.total.to_string(), b.probability().to_string()),
                None => ("0".into(), "0".into(), String::new()),
            };
            w.write_record([c.uav_height.to_string(), lo.to_string(), (lo + c.bin_width).to_string(), los, total, p])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Site power over a height ladder with fading off.
pub fn curve_over_heights(
    grid: &CircularGrid,
    map: &BuildingMap,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    heights: &[f64],
    guard_radius: f64,
    ue_height: f64,
) -> Result<AltitudePowerCurve, RaytraceError> {
    if heights.is_empty() || heights.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RaytraceError::BadGrid("heights must be non-empty and strictly increasing".into()));
    }
    let samples = heights
        .iter()
        .map(|&h| {
            let vis = grid_visibility(grid, h, ue_height, map)?;
            Ok((h, aggregate_power_site(&vis, radio, exponents, Fading::Off, guard_radius)?))
        })
        .collect::<Result<Vec<_>, RaytraceError>>()?;
    Ok(AltitudePowerCurve::new("ray-trace", samples)?)
}

/// Writes `point_index,x_m,y_m,dist_3d_m,los,inside_building`.
pub fn write_visibility<W: Write>(out: W, result: &VisibilityResult) -> Result<(), RaytraceError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["point_index", "x_m", "y_m", "dist_3d_m", "los", "inside_building"])?;
    for p in &result.points {
        w.write_record([
            p.point.index.to_string(),
            format!("{:.3}", p.point.x),
            format!("{:.3}", p.point.y),
            format!("{:.3}", p.dist_3d),
            (p.los as u8).to_string(),
            (p.inside_building as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
