//! Altitude-dependent aggregate received power from ground transmitters.
//!
//! The crate models the mean power an aerial receiver collects from a field
//! of ground transmitters as a function of its height, and provides several
//! ways to obtain it: closed forms built on incomplete gamma functions,
//! numerical quadrature, seeded Monte Carlo, ray tracing over a building
//! map, and a pipeline that reduces spectrum-analyzer sweeps to binned
//! measurements. All of them produce an [`AltitudePowerCurve`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod curve;
pub mod geo;
pub mod ingest;
pub mod los;
pub mod montecarlo;
mod optimize;
pub mod quad;
pub mod raytrace;
pub mod special;
pub mod units;

pub use analytics::{
    AnalyticsError, PathlossExponents, RadioConfig, ScenarioGeometry,
};
pub use curve::{AltitudePowerCurve, CurveError};
pub use geo::LatLon;
pub use los::{BreakpointLaws, BreakpointParams, EnvironmentTriple, LosError};
pub use montecarlo::{LinkLos, McEstimate, McOptions, MonteCarloError};
