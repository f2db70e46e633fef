//! Site-specific LoS from building footprints.

mod grid;
mod map;
mod visibility;

use thiserror::Error;

pub use grid::{
    aggregate_power_site, curve_over_heights, empirical_plos, grid_visibility, write_empirical_plos,
    write_visibility, CircularGrid, EmpiricalPlos, Fading, GridPoint, PlosBin, VisibilityPoint,
    VisibilityResult, DEFAULT_PLOS_BIN,
};
pub use map::{Building, BuildingMap, Containment, MAP_HEADER, MAX_EXTENT};
pub use visibility::{los_visible, Point3, GRAZE_TOL};

#[derive(Debug, Error)]
pub enum RaytraceError {
    #[error("invalid building: {0}")]
    BadBuilding(String),
    #[error("map line {line}: {message}")]
    MapSyntax { line: usize, message: String },
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("segment endpoint is not finite")]
    NonFinite,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("receiver height {0} must be finite and above the transmitters")]
    BadHeight(f64),
    #[error("grid point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<RaytraceError>,
    },
    #[error(transparent)]
    Curve(#[from] crate::curve::CurveError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
