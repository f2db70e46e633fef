//! Seeded Monte Carlo estimates of aggregate received power.
//!
//! Each trial places transmitters as a homogeneous Poisson point process in
//! the ring r0 ≤ r ≤ r_out, draws a LoS state per link from the exact LoS
//! model and a unit-mean exponential fading gain, and sums the link powers.
//!
//! Trial `i` draws from ChaCha8 stream `i` of the top-level seed, so results
//! are identical regardless of thread count or scheduling. Per-trial results
//! are reduced in trial order.
//!
//! Inside a trial the squared ground distances are generated in increasing
//! order as a one-dimensional Poisson process of rate λπ on [r0², r_out²]
//! (the image of a planar HPPP under r ↦ r²). This has the same law as
//! drawing a Poisson count and placing points by inverse CDF, and lets links
//! that share a building count be swept in contiguous runs. The placement
//! does not depend on the receiver height, so one trial serves every height
//! of a curve.

use std::f64::consts::PI;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{PathlossExponents, RadioConfig, ScenarioGeometry};
use crate::curve::{AltitudePowerCurve, CurveError};
use crate::geo::LatLon;
use crate::los::EnvironmentTriple;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Default density of extra random transmitters in hybrid runs, nodes/m².
pub const DEFAULT_EXTRA_DENSITY: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error("invalid {name}: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("heights must be non-empty and strictly increasing")]
    BadHeights,
    #[error("hybrid scenario needs fixed transmitters or a positive extra density")]
    EmptyHybrid,
    #[error("transmitter list: {0}")]
    Transmitters(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// How each link's LoS state is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkLos {
    /// Bernoulli with the exact environment model.
    Environment(EnvironmentTriple),
    AlwaysLos,
    AlwaysNlos,
}

impl LinkLos {
    pub fn probability(&self, height: f64, dist_3d: f64) -> f64 {
        match self {
            LinkLos::Environment(env) => env.product(height, env.building_index(dist_3d)),
            LinkLos::AlwaysLos => 1.0,
            LinkLos::AlwaysNlos => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub trials: usize,
    pub seed: u64,
    /// Unit-mean exponential fading on every link; off means h = 1.
    pub fading: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            trials: 10_000,
            seed: 0,
            fading: true,
        }
    }
}

/// Transmitter position on the ground relative to the receiver's foot point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingPoint {
    pub ground_dist: f64,
    pub azimuth: f64,
}

/// A realized link at a given receiver height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePlacement {
    pub ground_dist: f64,
    pub azimuth: f64,
    pub dist_3d: f64,
    pub los: bool,
    pub fading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialResult {
    pub trial_power: f64,
    pub ue_count: usize,
    pub los_count: usize,
}

/// Mean of the per-trial aggregate power at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub height: f64,
    pub mean: f64,
    pub std_error: f64,
    /// 95% normal-approximation half-width.
    pub half_width: f64,
    pub trials: usize,
    pub mean_ue_count: f64,
    pub mean_los_count: f64,
    /// Upper bound on the expected NLoS power from beyond the outer radius,
    /// C·R_out^{2−α_nlos}/(α_nlos − 2).
    pub tail_bound: f64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_ring(density: f64, guard: f64, outer: f64) -> Result<(), MonteCarloError> {
    if !(density.is_finite() && density >= 0.0) {
        return Err(MonteCarloError::Domain {
            name: "density",
            value: density,
        });
    }
    if !(guard.is_finite() && guard >= 0.0) {
        return Err(MonteCarloError::Domain {
            name: "guard_radius",
            value: guard,
        });
    }
    if !(outer.is_finite() && outer > guard) {
        return Err(MonteCarloError::Domain {
            name: "outer_radius",
            value: outer,
        });
    }
    Ok(())
}

/// Places a Poisson number of transmitters uniformly in the ring.
pub fn sample_ring(
    density: f64,
    guard_radius: f64,
    outer_radius: f64,
    seed: u64,
) -> Result<Vec<RingPoint>, MonteCarloError> {
    check_ring(density, guard_radius, outer_radius)?;
    let inner2 = guard_radius * guard_radius;
    let span = outer_radius * outer_radius - inner2;
    let mean = density * PI * span;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = rng_for(seed, 0);
    let count = Poisson::new(mean)
        .map_err(|_| MonteCarloError::Domain {
            name: "mean count",
            value: mean,
        })?
        .sample(&mut rng) as usize;
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            RingPoint {
                ground_dist: (u * span + inner2).sqrt(),
                azimuth: 2.0 * PI * v,
            }
        })
        .collect())
}

/// Draws LoS and fading for each point at receiver `height`.
pub fn realize_links(
    points: &[RingPoint],
    height: f64,
    los: &LinkLos,
    fading: bool,
    seed: u64,
) -> Vec<UePlacement> {
    let mut rng = rng_for(seed, 1);
    points
        .iter()
        .map(|p| {
            let dist_3d = p.ground_dist.hypot(height);
            let u: f64 = rng.random();
            let h = if fading { Exp1.sample(&mut rng) } else { 1.0 };
            UePlacement {
                ground_dist: p.ground_dist,
                azimuth: p.azimuth,
                dist_3d,
                los: u < los.probability(height, dist_3d),
                fading: h,
            }
        })
        .collect()
}

/// Per-link path gain d^{−α} evaluated from d².
#[derive(Debug, Clone, Copy)]
enum PathGain {
    Square,
    Cube,
    General(f64),
}

impl PathGain {
    fn new(alpha: f64) -> Self {
        if alpha == 2.0 {
            PathGain::Square
        } else if alpha == 3.0 {
            PathGain::Cube
        } else {
            PathGain::General(-0.5 * alpha)
        }
    }

    #[inline(always)]
    fn eval(self, d2: f64) -> f64 {
        match self {
            PathGain::Square => 1.0 / d2,
            PathGain::Cube => 1.0 / (d2 * d2.sqrt()),
            PathGain::General(e) => d2.powf(e),
        }
    }
}

/// Links per block; the block's arrays stay cache resident while it is
/// swept at every height.
const BLOCK: usize = 4096;

/// Squared ground distances as a Poisson process of rate λπ on [r0², r_out²].
struct RingStream {
    x: f64,
    hi: f64,
    rate: f64,
    done: bool,
}

impl RingStream {
    fn new(density: f64, inner: f64, outer: f64) -> Self {
        let rate = density * PI;
        RingStream {
            x: inner * inner,
            hi: outer * outer,
            rate,
            done: rate <= 0.0,
        }
    }
}

/// A run of links sorted by squared ground distance.
#[derive(Default)]
struct TrialLinks {
    r2: Vec<f64>,
    u: Vec<f64>,
    h: Vec<f64>,
}

impl TrialLinks {
    /// Draws the next block of at most [`BLOCK`] links from `stream`.
    fn refill(&mut self, rng: &mut ChaCha8Rng, stream: &mut RingStream, fading: bool) {
        self.r2.clear();
        self.u.clear();
        self.h.clear();
        while !stream.done && self.r2.len() < BLOCK {
            let gap: f64 = Exp1.sample(rng);
            stream.x += gap / stream.rate;
            if stream.x > stream.hi {
                stream.done = true;
                break;
            }
            self.r2.push(stream.x);
            self.u.push(rng.random());
            self.h.push(if fading { Exp1.sample(rng) } else { 1.0 });
        }
    }

    /// Sum of h·d^{−α} and LoS count at receiver height `height`.
    fn sweep(
        &self,
        height: f64,
        los: &LinkLos,
        gains: (PathGain, PathGain),
        table: &mut ProbabilityTable,
    ) -> (f64, usize) {
        let h2 = height * height;
        let n = self.r2.len();
        let mut sum = 0.0;
        let mut los_count = 0;
        let mut i = 0;
        while i < n {
            // Run of links sharing a LoS probability.
            let (p, end) = match los {
                LinkLos::Environment(env) => {
                    let m = env.building_index((self.r2[i] + h2).sqrt());
                    let next = env.index_threshold(m + 1);
                    let bound = next * next - h2;
                    let end = i + self.r2[i..].partition_point(|&x| x < bound);
                    (table.get(env, m), end.max(i + 1))
                }
                LinkLos::AlwaysLos => (1.0, n),
                LinkLos::AlwaysNlos => (0.0, n),
            };
            let (s, c) = match gains {
                (PathGain::Square, PathGain::Cube) => {
                    run_sum(&self.r2[i..end], &self.u[i..end], &self.h[i..end], h2, p, |d2| 1.0 / d2, |d2| {
                        1.0 / (d2 * d2.sqrt())
                    })
                }
                (l, nl) => run_sum(
                    &self.r2[i..end],
                    &self.u[i..end],
                    &self.h[i..end],
                    h2,
                    p,
                    |d2| l.eval(d2),
                    |d2| nl.eval(d2),
                ),
            };
            sum += s;
            los_count += c;
            i = end;
        }
        (sum, los_count)
    }
}

const LANES: usize = 8;

/// Sum of h·gain over one run. Lane-wise accumulators keep a fixed
/// summation order while letting the loop vectorize.
#[inline(always)]
fn run_sum<L: Fn(f64) -> f64, N: Fn(f64) -> f64>(
    r2: &[f64],
    u: &[f64],
    h: &[f64],
    h2: f64,
    p: f64,
    los_gain: L,
    nlos_gain: N,
) -> (f64, usize) {
    let mut acc = [0.0f64; LANES];
    let mut cnt = [0usize; LANES];
    let r2c = r2.chunks_exact(LANES);
    let uc = u.chunks_exact(LANES);
    let hc = h.chunks_exact(LANES);
    let (r2t, ut, ht) = (r2c.remainder(), uc.remainder(), hc.remainder());
    if p <= 0.0 {
        for (r2, h) in r2c.zip(hc) {
            for l in 0..LANES {
                acc[l] += h[l] * nlos_gain(r2[l] + h2);
            }
        }
    } else if p >= 1.0 {
        for (r2, h) in r2c.zip(hc) {
            for l in 0..LANES {
                acc[l] += h[l] * los_gain(r2[l] + h2);
                cnt[l] += 1;
            }
        }
    } else {
        for ((r2, u), h) in r2c.zip(uc).zip(hc) {
            for l in 0..LANES {
                let d2 = r2[l] + h2;
                let is_los = u[l] < p;
                cnt[l] += is_los as usize;
                acc[l] += h[l] * if is_los { los_gain(d2) } else { nlos_gain(d2) };
            }
        }
    }
    let mut sum = 0.0;
    let mut count = 0;
    for l in 0..LANES {
        sum += acc[l];
        count += cnt[l];
    }
    for ((&r2, &u), &h) in r2t.iter().zip(ut).zip(ht) {
        let d2 = r2 + h2;
        let is_los = u < p;
        count += is_los as usize;
        sum += h * if is_los { los_gain(d2) } else { nlos_gain(d2) };
    }
    (sum, count)
}

/// Memo of the exact LoS product by building index at one height.
struct ProbabilityTable {
    height: f64,
    values: Vec<f64>,
}

impl ProbabilityTable {
    fn new(height: f64) -> Self {
        ProbabilityTable {
            height,
            values: Vec::new(),
        }
    }

    fn get(&mut self, env: &EnvironmentTriple, m: i64) -> f64 {
        if m < 0 {
            return 1.0;
        }
        let idx = m as usize;
        while self.values.len() <= idx {
            let next = self.values.len() as i64;
            self.values.push(env.product(self.height, next));
        }
        self.values[idx]
    }
}

/// A transmitter at a known ground distance, always present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTransmitter {
    pub label: String,
    pub ground_dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedTransmitterSet {
    pub transmitters: Vec<FixedTransmitter>,
    /// Density of additional random transmitters, nodes/m².
    pub extra_density: f64,
}

impl FixedTransmitterSet {
    pub fn validate(&self) -> Result<(), MonteCarloError> {
        for t in &self.transmitters {
            if !(t.ground_dist.is_finite() && t.ground_dist > 0.0) {
                return Err(MonteCarloError::Domain {
                    name: "ground_dist",
                    value: t.ground_dist,
                });
            }
        }
        if !(self.extra_density.is_finite() && self.extra_density >= 0.0) {
            return Err(MonteCarloError::Domain {
                name: "extra_density",
                value: self.extra_density,
            });
        }
        if self.transmitters.is_empty() && self.extra_density == 0.0 {
            return Err(MonteCarloError::EmptyHybrid);
        }
        Ok(())
    }
}

/// Reads a transmitter list with columns `label,ground_distance_m` or
/// `label,lat,lon`; coordinates are resolved against `origin`.
pub fn read_fixed_transmitters<R: Read>(
    input: R,
    origin: Option<LatLon>,
) -> Result<Vec<FixedTransmitter>, MonteCarloError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let label_col = col("label").ok_or_else(|| {
        MonteCarloError::Transmitters("missing column 'label'".to_string())
    })?;
    let dist_col = col("ground_distance_m");
    let latlon = col("lat").zip(col("lon"));

    let parse = |field: Option<&str>, column: &str, line: usize| -> Result<f64, MonteCarloError> {
        let field = field.unwrap_or("");
        field.trim().parse::<f64>().map_err(|_| {
            MonteCarloError::Transmitters(format!("column '{column}' on record {line}: '{field}'"))
        })
    };

    let mut out = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let label = record.get(label_col).unwrap_or("").to_string();
        let ground_dist = match (dist_col, latlon) {
            (Some(c), _) => parse(record.get(c), "ground_distance_m", i + 1)?,
            (None, Some((la, lo))) => {
                let origin = origin.ok_or_else(|| {
                    MonteCarloError::Transmitters("lat/lon rows need a scenario origin".to_string())
                })?;
                let p = LatLon {
                    lat: parse(record.get(la), "lat", i + 1)?,
                    lon: parse(record.get(lo), "lon", i + 1)?,
                };
                let (x, y) = origin.to_local(p);
                x.hypot(y)
            }
            (None, None) => {
                return Err(MonteCarloError::Transmitters(
                    "missing column 'ground_distance_m' (or 'lat' and 'lon')".to_string(),
                ))
            }
        };
        out.push(FixedTransmitter { label, ground_dist });
    }
    Ok(out)
}

struct Engine<'a> {
    radio: &'a RadioConfig,
    exponents: PathlossExponents,
    los: LinkLos,
    opts: McOptions,
    density: f64,
    inner: f64,
    outer: f64,
    fixed: &'a [FixedTransmitter],
}

impl Engine<'_> {
    /// Runs all trials and returns `results[trial][height]`.
    fn run(&self, heights: &[f64]) -> Vec<Vec<TrialResult>> {
        let gains = (
            PathGain::new(self.exponents.alpha_los),
            PathGain::new(self.exponents.alpha_nlos),
        );
        let link_gain = self.radio.link_gain();
        (0..self.opts.trials as u64)
            .into_par_iter()
            .map_init(
                || {
                    let tables: Vec<ProbabilityTable> =
                        heights.iter().map(|&h| ProbabilityTable::new(h)).collect();
                    (TrialLinks::default(), tables)
                },
                |(links, tables), trial| {
                    let mut rng = rng_for(self.opts.seed, trial);
                    // Fixed transmitters draw first so their realizations do
                    // not depend on the random population.
                    let fixed: Vec<(f64, f64, f64)> = self
                        .fixed
                        .iter()
                        .map(|t| {
                            let u: f64 = rng.random();
                            let h = if self.opts.fading { Exp1.sample(&mut rng) } else { 1.0 };
                            (t.ground_dist * t.ground_dist, u, h)
                        })
                        .collect();
                    let mut totals = vec![(0.0, 0usize); heights.len()];
                    let mut ue_count = fixed.len();
                    let mut stream = RingStream::new(self.density, self.inner, self.outer);
                    while !stream.done {
                        links.refill(&mut rng, &mut stream, self.opts.fading);
                        ue_count += links.r2.len();
                        for ((&height, table), total) in heights.iter().zip(tables.iter_mut()).zip(&mut totals) {
                            let (sum, count) = links.sweep(height, &self.los, gains, table);
                            total.0 += sum;
                            total.1 += count;
                        }
                    }
                    heights
                        .iter()
                        .zip(totals)
                        .map(|(&height, (mut sum, mut los_count))| {
                            for &(r2, u, h) in &fixed {
                                let d2 = r2 + height * height;
                                let is_los = u < self.los.probability(height, d2.sqrt());
                                los_count += is_los as usize;
                                sum += h * if is_los { gains.0.eval(d2) } else { gains.1.eval(d2) };
                            }
                            TrialResult {
                                trial_power: link_gain * sum,
                                ue_count,
                                los_count,
                            }
                        })
                        .collect()
                },
            )
            .collect()
    }

    fn estimates(&self, heights: &[f64]) -> Vec<McEstimate> {
        let results = self.run(heights);
        let n = results.len() as f64;
        heights
            .iter()
            .enumerate()
            .map(|(j, &height)| {
                let mut sum = 0.0;
                let mut ues = 0.0;
                let mut los = 0.0;
                for trial in &results {
                    sum += trial[j].trial_power;
                    ues += trial[j].ue_count as f64;
                    los += trial[j].los_count as f64;
                }
                let mean = sum / n;
                let var = if results.len() > 1 {
                    results
                        .iter()
                        .map(|t| (t[j].trial_power - mean).powi(2))
                        .sum::<f64>()
                        / (n - 1.0)
                } else {
                    0.0
                };
                let std_error = (var / n).sqrt();
                McEstimate {
                    height,
                    mean,
                    std_error,
                    half_width: Z95 * std_error,
                    trials: results.len(),
                    mean_ue_count: ues / n,
                    mean_los_count: los / n,
                    tail_bound: self.tail_bound(height),
                }
            })
            .collect()
    }

    fn tail_bound(&self, height: f64) -> f64 {
        let a = self.exponents.alpha_nlos;
        if a <= 2.0 {
            return f64::INFINITY;
        }
        let r_out = self.outer.hypot(height);
        2.0 * PI * self.density * self.radio.link_gain() * r_out.powf(2.0 - a) / (a - 2.0)
    }
}

fn check_common(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    opts: &McOptions,
) -> Result<(), MonteCarloError> {
    let domain = |e: crate::analytics::AnalyticsError| match e {
        crate::analytics::AnalyticsError::Domain { name, value } => {
            MonteCarloError::Domain { name, value }
        }
        other => MonteCarloError::Transmitters(other.to_string()),
    };
    scenario.validate().map_err(domain)?;
    radio.validate().map_err(domain)?;
    exponents.validate().map_err(domain)?;
    if opts.trials == 0 {
        return Err(MonteCarloError::NoTrials);
    }
    Ok(())
}

fn check_heights(heights: &[f64]) -> Result<(), MonteCarloError> {
    if heights.is_empty()
        || heights.iter().any(|h| !(h.is_finite() && *h > 0.0))
        || heights.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(MonteCarloError::BadHeights);
    }
    Ok(())
}

/// Monte Carlo estimate at the scenario's height.
pub fn simulate_power(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    los: &LinkLos,
    opts: &McOptions,
) -> Result<McEstimate, MonteCarloError> {
    Ok(simulate_curve(scenario, radio, exponents, los, &[scenario.height], opts)?.remove(0))
}

/// Monte Carlo estimates at several heights from shared trial placements.
///
/// The estimate at each height is bit-identical to [`simulate_power`] at
/// that height with the same options.
pub fn simulate_curve(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    los: &LinkLos,
    heights: &[f64],
    opts: &McOptions,
) -> Result<Vec<McEstimate>, MonteCarloError> {
    check_common(scenario, radio, exponents, opts)?;
    check_heights(heights)?;
    let engine = Engine {
        radio,
        exponents: *exponents,
        los: *los,
        opts: *opts,
        density: scenario.density,
        inner: scenario.guard_radius,
        outer: scenario.outer_radius,
        fixed: &[],
    };
    Ok(engine.estimates(heights))
}

/// Fixed transmitters plus an HPPP of `fixed.extra_density` in the
/// scenario's ring; the scenario's own density is not used.
pub fn simulate_hybrid(
    fixed: &FixedTransmitterSet,
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    los: &LinkLos,
    heights: &[f64],
    opts: &McOptions,
) -> Result<Vec<McEstimate>, MonteCarloError> {
    check_common(scenario, radio, exponents, opts)?;
    check_heights(heights)?;
    fixed.validate()?;
    let engine = Engine {
        radio,
        exponents: *exponents,
        los: *los,
        opts: *opts,
        density: fixed.extra_density,
        inner: scenario.guard_radius,
        outer: scenario.outer_radius,
        fixed: &fixed.transmitters,
    };
    Ok(engine.estimates(heights))
}

/// Collects estimates into a curve of mean power.
pub fn estimates_curve(
    estimates: &[McEstimate],
    label: impl Into<String>,
) -> Result<AltitudePowerCurve, MonteCarloError> {
    Ok(AltitudePowerCurve::new(
        label,
        estimates.iter().map(|e| (e.height, e.mean)).collect(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radio() -> RadioConfig {
        RadioConfig::baseline()
    }

    #[test]
    fn zero_density_places_nothing() {
        assert!(sample_ring(0.0, 10.0, 4000.0, 7).unwrap().is_empty());
    }

    #[test]
    fn ring_points_within_bounds() {
        let pts = sample_ring(1e-4, 50.0, 500.0, 3).unwrap();
        assert!(!pts.is_empty());
        for p in pts {
            assert!((50.0..=500.0).contains(&p.ground_dist));
            assert!((0.0..2.0 * PI).contains(&p.azimuth));
        }
    }

    #[test]
    fn ring_rejects_bad_geometry() {
        assert!(sample_ring(1e-3, 100.0, 100.0, 0).is_err());
        assert!(sample_ring(-1.0, 0.0, 100.0, 0).is_err());
    }

    #[test]
    fn realized_links_respect_invariants() {
        let pts = sample_ring(1e-4, 10.0, 1000.0, 11).unwrap();
        let links = realize_links(&pts, 80.0, &LinkLos::Environment(EnvironmentTriple::URBAN), true, 11);
        for l in &links {
            assert!(l.dist_3d >= 80.0);
            assert!(l.fading >= 0.0);
        }
        let all = realize_links(&pts, 80.0, &LinkLos::AlwaysLos, false, 11);
        assert!(all.iter().all(|l| l.los && l.fading == 1.0));
    }

    #[test]
    fn single_trial_is_deterministic() {
        let s = ScenarioGeometry::new(100.0, 10.0, 1500.0, 0.002).unwrap();
        let o = McOptions {
            trials: 1,
            seed: 42,
            fading: true,
        };
        let los = LinkLos::Environment(EnvironmentTriple::URBAN);
        let e = PathlossExponents::FREE_SPACE_AND_CUBIC;
        let a = simulate_power(&s, &radio(), &e, &los, &o).unwrap();
        let b = simulate_power(&s, &radio(), &e, &los, &o).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.half_width, 0.0);
    }

    #[test]
    fn curve_matches_single_height_runs() {
        let s = ScenarioGeometry::new(50.0, 10.0, 1200.0, 0.001).unwrap();
        let o = McOptions {
            trials: 16,
            seed: 5,
            fading: true,
        };
        let los = LinkLos::Environment(EnvironmentTriple::URBAN);
        let e = PathlossExponents::FREE_SPACE_AND_CUBIC;
        let curve = simulate_curve(&s, &radio(), &e, &los, &[50.0, 150.0, 300.0], &o).unwrap();
        let single = simulate_power(&s.with_height(150.0), &radio(), &e, &los, &o).unwrap();
        assert_eq!(curve[1].mean.to_bits(), single.mean.to_bits());
    }

    #[test]
    fn sweep_matches_per_link_evaluation() {
        // The run-based sweep against a direct per-link sum of the same draws.
        let env = EnvironmentTriple::URBAN;
        let los = LinkLos::Environment(env);
        let mut rng = rng_for(9, 0);
        let mut links = TrialLinks::default();
        let mut stream = RingStream::new(0.0001, 10.0, 3000.0);
        links.refill(&mut rng, &mut stream, true);
        assert!(links.r2.len() > 1000 && stream.done);
        for height in [15.0, 90.0, 333.0] {
            let mut table = ProbabilityTable::new(height);
            let (sum, los_count) = links.sweep(height, &los, (PathGain::Square, PathGain::Cube), &mut table);
            let mut direct = 0.0;
            let mut direct_los = 0;
            for i in 0..links.r2.len() {
                let d = (links.r2[i] + height * height).sqrt();
                if links.u[i] < crate::los::plos_exact_3d(height, d, &env).unwrap() {
                    direct_los += 1;
                    direct += links.h[i] / (d * d);
                } else {
                    direct += links.h[i] / (d * d * d);
                }
            }
            assert_eq!(los_count, direct_los);
            assert!((sum - direct).abs() / direct < 1e-12);
        }
    }

    #[test]
    fn zero_trials_rejected() {
        let s = ScenarioGeometry::new(100.0, 10.0, 1500.0, 0.002).unwrap();
        let o = McOptions {
            trials: 0,
            ..McOptions::default()
        };
        assert!(matches!(
            simulate_power(&s, &radio(), &PathlossExponents::FREE_SPACE_AND_CUBIC, &LinkLos::AlwaysLos, &o),
            Err(MonteCarloError::NoTrials)
        ));
    }

    #[test]
    fn hybrid_single_fixed_transmitter_is_friis() {
        let fixed = FixedTransmitterSet {
            transmitters: vec![FixedTransmitter {
                label: "tower".into(),
                ground_dist: 1000.0,
            }],
            extra_density: 0.0,
        };
        let s = ScenarioGeometry::new(100.0, 0.0, 4000.0, 0.0).unwrap();
        let o = McOptions {
            trials: 3,
            seed: 1,
            fading: false,
        };
        let heights = [10.0, 100.0, 250.0];
        let est = simulate_hybrid(
            &fixed,
            &s,
            &radio(),
            &PathlossExponents::FREE_SPACE_AND_CUBIC,
            &LinkLos::AlwaysLos,
            &heights,
            &o,
        )
        .unwrap();
        for (e, h) in est.iter().zip(heights) {
            let expected = radio().link_gain() / (1000f64 * 1000.0 + h * h);
            assert!((e.mean - expected).abs() / expected < 1e-14);
        }
    }

    #[test]
    fn hybrid_requires_transmitters() {
        let fixed = FixedTransmitterSet {
            transmitters: vec![],
            extra_density: 0.0,
        };
        let s = ScenarioGeometry::new(100.0, 0.0, 4000.0, 0.0).unwrap();
        let err = simulate_hybrid(
            &fixed,
            &s,
            &radio(),
            &PathlossExponents::FREE_SPACE_AND_CUBIC,
            &LinkLos::AlwaysLos,
            &[10.0],
            &McOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, MonteCarloError::EmptyHybrid));
    }

    #[test]
    fn transmitter_csv_forms() {
        let by_dist = "label,ground_distance_m\na,1000\nb,250.5\n";
        let t = read_fixed_transmitters(by_dist.as_bytes(), None).unwrap();
        assert_eq!(t[1].ground_dist, 250.5);

        let origin = LatLon {
            lat: 35.78,
            lon: -78.67,
        };
        let by_coord = "label,lat,lon\nn,35.789,-78.67\n";
        let t = read_fixed_transmitters(by_coord.as_bytes(), Some(origin)).unwrap();
        assert!((t[0].ground_dist - 1000.0).abs() < 5.0, "{}", t[0].ground_dist);
        assert!(read_fixed_transmitters(by_coord.as_bytes(), None).is_err());

        let err = read_fixed_transmitters("label,ground_distance_m\na,far\n".as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("ground_distance_m"));
    }
}
