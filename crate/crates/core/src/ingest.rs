//! Spectrum sweeps and GPS logs to altitude-binned band power.
//!
//! Sweep files:
//!
//! ```text
//! # altocc-sweep 1
//! timestamp,freq_start_hz,bin_width_hz,bin_powers_w
//! 1700000000.0,2300000000,1000000,1e-12,3e-12,...
//! ```
//!
//! Every field after the third is one bin's linear power in watts, so rows
//! may differ in length. GPS files:
//!
//! ```text
//! # altocc-gps 1
//! timestamp,lat,lon,alt_m
//! ```
//!
//! `alt_m` is GPS altitude; the site elevation passed to [`read_gps`] is
//! subtracted to give height above ground.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{dbm_to_watts, watts_to_dbm};

pub const SWEEP_TAG: &str = "# altocc-sweep 1";
pub const GPS_TAG: &str = "# altocc-gps 1";
pub const SWEEP_COLUMNS: [&str; 4] = ["timestamp", "freq_start_hz", "bin_width_hz", "bin_powers_w"];
pub const GPS_COLUMNS: [&str; 4] = ["timestamp", "lat", "lon", "alt_m"];

/// One sweep takes roughly this long, seconds.
pub const DEFAULT_MAX_SKEW: f64 = 15.0;

/// The shipped band table.
pub const BUILTIN_BANDS: &str = include_str!("../data/bands.csv");

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}: expected version line '{expected}'")]
    Version { file: &'static str, expected: &'static str },
    #[error("{file}: expected columns {expected}, found '{found}'")]
    Header {
        file: &'static str,
        expected: String,
        found: String,
    },
    #[error("{file} line {line}, column '{column}': {message}")]
    Field {
        file: &'static str,
        line: u64,
        column: String,
        message: String,
    },
    #[error("band '{band}' does not overlap the sweep span [{start}, {end}) Hz")]
    NoOverlap { band: String, start: f64, end: f64 },
    #[error("{0} are not sorted by time")]
    NotSorted(&'static str),
    #[error("no sweep lies within {max_skew} s of a GPS fix ({dropped} dropped)")]
    EmptyJoin { max_skew: f64, dropped: usize },
    #[error("invalid {name}: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("invalid band '{0}': need f_low < f_high")]
    BadBand(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub timestamp: f64,
    pub freq_start: f64,
    pub bin_width: f64,
    pub bin_powers: Vec<f64>,
}

impl SweepRecord {
    pub fn freq_end(&self) -> f64 {
        self.freq_start + self.bin_width * self.bin_powers.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.freq_start + (i as f64 + 0.5) * self.bin_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    pub timestamp: f64,
    pub lat: f64,
    pub lon: f64,
    /// Metres above ground.
    pub altitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDef {
    pub name: String,
    #[serde(rename = "f_low_hz")]
    pub f_low: f64,
    #[serde(rename = "f_high_hz")]
    pub f_high: f64,
    pub direction: Direction,
}

impl BandDef {
    pub fn new(name: impl Into<String>, f_low: f64, f_high: f64, direction: Direction) -> Result<Self, IngestError> {
        let b = BandDef {
            name: name.into(),
            f_low,
            f_high,
            direction,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.f_low.is_finite() && self.f_high.is_finite() && self.f_low < self.f_high) {
            return Err(IngestError::BadBand(self.name.clone()));
        }
        Ok(())
    }
}

/// Reads a band table with columns `name,f_low_hz,f_high_hz,direction`.
pub fn read_bands<R: Read>(input: R) -> Result<Vec<BandDef>, IngestError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let band: BandDef = row?;
        band.validate()?;
        out.push(band);
    }
    Ok(out)
}

pub fn builtin_bands() -> Vec<BandDef> {
    read_bands(BUILTIN_BANDS.as_bytes()).expect("shipped band table parses")
}

fn expect_tag<R: BufRead>(input: &mut R, file: &'static str, tag: &'static str) -> Result<(), IngestError> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    if first.trim_end() != tag {
        return Err(IngestError::Version { file, expected: tag });
    }
    Ok(())
}

fn check_header(r: &mut csv::Reader<impl Read>, file: &'static str, expected: &[&str]) -> Result<(), IngestError> {
    let found = r.headers()?.clone();
    if found.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(IngestError::Header {
            file,
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn field(record: &csv::StringRecord, idx: usize, file: &'static str, column: &str) -> Result<f64, IngestError> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(idx).unwrap_or("");
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::Field {
        file,
        line,
        column: column.to_string(),
        message: format!("not a finite number: '{raw}'"),
    })
}

pub fn read_sweeps<R: Read>(input: R) -> Result<Vec<SweepRecord>, IngestError> {
    const FILE: &str = "sweep file";
    let mut input = BufReader::new(input);
    expect_tag(&mut input, FILE, SWEEP_TAG)?;
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    check_header(&mut r, FILE, &SWEEP_COLUMNS)?;
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |column: String, message: &str| IngestError::Field {
            file: FILE,
            line,
            column,
            message: message.to_string(),
        };
        let timestamp = field(&record, 0, FILE, "timestamp")?;
        let freq_start = field(&record, 1, FILE, "freq_start_hz")?;
        let bin_width = field(&record, 2, FILE, "bin_width_hz")?;
        if bin_width <= 0.0 {
            return Err(bad("bin_width_hz".into(), "must be positive"));
        }
        let mut bin_powers = Vec::with_capacity(record.len().saturating_sub(3));
        for i in 3..record.len() {
            let name = format!("bin_powers_w[{}]", i - 3);
            let p = field(&record, i, FILE, &name)?;
            if p < 0.0 {
                return Err(bad(name, "power must be non-negative"));
            }
            bin_powers.push(p);
        }
        if bin_powers.is_empty() {
            return Err(bad("bin_powers_w".into(), "record has no bins"));
        }
        out.push(SweepRecord {
            timestamp,
            freq_start,
            bin_width,
            bin_powers,
        });
    }
    Ok(out)
}

pub fn read_gps<R: Read>(input: R, site_elevation: f64) -> Result<Vec<GpsFix>, IngestError> {
    const FILE: &str = "GPS file";
    let mut input = BufReader::new(input);
    expect_tag(&mut input, FILE, GPS_TAG)?;
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, FILE, &GPS_COLUMNS)?;
    let mut out: Vec<GpsFix> = Vec::new();
    for record in r.records() {
        let record = record?;
        let fix = GpsFix {
            timestamp: field(&record, 0, FILE, "timestamp")?,
            lat: field(&record, 1, FILE, "lat")?,
            lon: field(&record, 2, FILE, "lon")?,
            altitude: field(&record, 3, FILE, "alt_m")? - site_elevation,
        };
        if out.last().is_some_and(|prev| fix.timestamp < prev.timestamp) {
            return Err(IngestError::NotSorted("GPS fixes"));
        }
        out.push(fix);
    }
    Ok(out)
}

pub fn write_sweeps<W: Write>(out: W, sweeps: &[SweepRecord]) -> Result<(), IngestError> {
    let mut out = out;
    writeln!(out, "{SWEEP_TAG}")?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for s in sweeps {
        let mut row = vec![s.timestamp.to_string(), s.freq_start.to_string(), s.bin_width.to_string()];
        row.extend(s.bin_powers.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gps<W: Write>(out: W, fixes: &[GpsFix], site_elevation: f64) -> Result<(), IngestError> {
    let mut out = out;
    writeln!(out, "{GPS_TAG}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GPS_COLUMNS)?;
    for f in fixes {
        w.write_record([
            f.timestamp.to_string(),
            f.lat.to_string(),
            f.lon.to_string(),
            (f.altitude + site_elevation).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Linear power of the bins whose centres fall in `[f_low, f_high)`.
pub fn band_power(record: &SweepRecord, band: &BandDef) -> Result<f64, IngestError> {
    let (start, end) = (record.freq_start, record.freq_end());
    if band.f_high <= start || band.f_low >= end {
        return Err(IngestError::NoOverlap {
            band: band.name.clone(),
            start,
            end,
        });
    }
    Ok(record
        .bin_powers
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let c = record.bin_center(i);
            c >= band.f_low && c < band.f_high
        })
        .map(|(_, &p)| p)
        .sum())
}

/// A sweep placed in space by the GPS log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinedSweep {
    pub sweep_index: usize,
    pub timestamp: f64,
    pub lat: f64,
    pub lon: f64,
    pub altitude: f64,
    /// Fixes used: the nearest one, plus the other bracketing fix when the
    /// position was interpolated.
    pub fixes: (usize, Option<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinResult {
    pub joined: Vec<JoinedSweep>,
    pub dropped: usize,
}

/// Pairs each sweep with the GPS log.
///
/// Sweeps whose nearest fix is more than `max_skew` seconds away are
/// dropped. When fixes on both sides lie within `max_skew`, the position is
/// interpolated linearly in time; otherwise the nearest fix is used.
/// Negative heights from GPS noise are clamped to zero.
pub fn time_join(sweeps: &[SweepRecord], fixes: &[GpsFix], max_skew: f64) -> Result<JoinResult, IngestError> {
    if !(max_skew.is_finite() && max_skew >= 0.0) {
        return Err(IngestError::Domain {
            name: "max_skew",
            value: max_skew,
        });
    }
    if sweeps.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(IngestError::NotSorted("sweeps"));
    }
    if fixes.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(IngestError::NotSorted("GPS fixes"));
    }
    let mut joined = Vec::new();
    let mut dropped = 0;
    for (sweep_index, s) in sweeps.iter().enumerate() {
        let t = s.timestamp;
        // First fix at or after t.
        let hi = fixes.partition_point(|f| f.timestamp < t);
        let before = hi.checked_sub(1).filter(|&i| t - fixes[i].timestamp <= max_skew);
        let after = (hi < fixes.len() && fixes[hi].timestamp - t <= max_skew).then_some(hi);
        let placed = match (before, after) {
            (Some(a), Some(b)) if fixes[b].timestamp > fixes[a].timestamp => {
                let (fa, fb) = (&fixes[a], &fixes[b]);
                let w = (t - fa.timestamp) / (fb.timestamp - fa.timestamp);
                let lerp = |x: f64, y: f64| x + (y - x) * w;
                let nearest = if t - fa.timestamp <= fb.timestamp - t { (a, b) } else { (b, a) };
                Some((
                    lerp(fa.lat, fb.lat),
                    lerp(fa.lon, fb.lon),
                    lerp(fa.altitude, fb.altitude),
                    (nearest.0, Some(nearest.1)),
                ))
            }
            (Some(i), _) | (None, Some(i)) => {
                let f = &fixes[i];
                Some((f.lat, f.lon, f.altitude, (i, None)))
            }
            (None, None) => None,
        };
        match placed {
            Some((lat, lon, altitude, fixes)) => joined.push(JoinedSweep {
                sweep_index,
                timestamp: t,
                lat,
                lon,
                altitude: altitude.max(0.0),
                fixes,
            }),
            None => dropped += 1,
        }
    }
    if joined.is_empty() {
        return Err(IngestError::EmptyJoin { max_skew, dropped });
    }
    Ok(JoinResult { joined, dropped })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltitudePowerPoint {
    pub altitude: f64,
    pub band: String,
    pub power: f64,
    pub timestamp: f64,
    pub sweep_index: usize,
    pub fixes: (usize, Option<usize>),
}

/// Band power for every joined sweep, grouped by band in table order.
/// Sweeps that do not cover a band contribute no point for it.
pub fn band_points(sweeps: &[SweepRecord], join: &JoinResult, bands: &[BandDef]) -> Vec<AltitudePowerPoint> {
    let mut out = Vec::new();
    for band in bands {
        for j in &join.joined {
            if let Ok(power) = band_power(&sweeps[j.sweep_index], band) {
                out.push(AltitudePowerPoint {
                    altitude: j.altitude,
                    band: band.name.clone(),
                    power,
                    timestamp: j.timestamp,
                    sweep_index: j.sweep_index,
                    fixes: j.fixes,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltitudeBin {
    pub band: String,
    pub low: f64,
    pub high: f64,
    pub median_dbm: f64,
    pub p25_dbm: f64,
    pub p75_dbm: f64,
    pub count: usize,
}

impl AltitudeBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.low + self.high)
    }
}

/// Quantile of sorted data with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi || sorted[lo] == f64::NEG_INFINITY {
        return sorted[lo];
    }
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median and quartiles of dBm power in altitude bins `[k·w, (k+1)·w)`,
/// per band in first-seen order. Empty bins are omitted.
pub fn altitude_binning(points: &[AltitudePowerPoint], bin_width: f64) -> Result<Vec<AltitudeBin>, IngestError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(IngestError::Domain {
            name: "bin_width",
            value: bin_width,
        });
    }
    let mut bands: Vec<&str> = Vec::new();
    for p in points {
        if !bands.contains(&p.band.as_str()) {
            bands.push(&p.band);
        }
    }
    let mut out = Vec::new();
    for band in bands {
        let mut keyed: Vec<(u64, f64)> = points
            .iter()
            .filter(|p| p.band == band)
            .map(|p| ((p.altitude / bin_width).floor() as u64, watts_to_dbm(p.power)))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for group in keyed.chunk_by(|a, b| a.0 == b.0) {
            let k = group[0].0;
            let values: Vec<f64> = group.iter().map(|g| g.1).collect();
            out.push(AltitudeBin {
                band: band.to_string(),
                low: k as f64 * bin_width,
                high: (k + 1) as f64 * bin_width,
                median_dbm: quantile(&values, 0.5),
                p25_dbm: quantile(&values, 0.25),
                p75_dbm: quantile(&values, 0.75),
                count: values.len(),
            });
        }
    }
    Ok(out)
}

pub const POINT_COLUMNS: [&str; 8] = [
    "timestamp",
    "altitude_m",
    "band",
    "power_w",
    "power_dbm",
    "sweep_index",
    "fix_a",
    "fix_b",
];

/// Per-sweep points; `fix_b` is blank when no interpolation took place.
pub fn write_points<W: Write>(out: W, points: &[AltitudePowerPoint]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POINT_COLUMNS)?;
    for p in points {
        w.write_record([
            format!("{:.3}", p.timestamp),
            format!("{:.3}", p.altitude),
            p.band.clone(),
            format!("{:.9e}", p.power),
            format!("{:.6}", watts_to_dbm(p.power)),
            p.sweep_index.to_string(),
            p.fixes.0.to_string(),
            p.fixes.1.map_or(String::new(), |i| i.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const BIN_COLUMNS: [&str; 7] = ["height_m", "power_w", "power_dbm", "model", "p25_dbm", "p75_dbm", "count"];

/// Binned curves in the shared curve layout plus quartile columns; the
/// height is the bin centre and the power is the median.
pub fn write_bins<W: Write>(out: W, bins: &[AltitudeBin]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BIN_COLUMNS)?;
    for b in bins {
        w.write_record([
            format!("{}", b.center()),
            format!("{:.9e}", dbm_to_watts(b.median_dbm)),
            format!("{:.6}", b.median_dbm),
            b.band.clone(),
            format!("{:.6}", b.p25_dbm),
            format!("{:.6}", b.p75_dbm),
            b.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(t: f64, start: f64, width: f64, powers: Vec<f64>) -> SweepRecord {
        SweepRecord {
            timestamp: t,
            freq_start: start,
            bin_width: width,
            bin_powers: powers,
        }
    }

    fn fix(t: f64, alt: f64) -> GpsFix {
        GpsFix {
            timestamp: t,
            lat: 35.0,
            lon: -78.0,
            altitude: alt,
        }
    }

    #[test]
    fn builtin_table_has_uplink_bands() {
        let bands = builtin_bands();
        let ul30 = bands.iter().find(|b| b.name == "UL 30").unwrap();
        assert_eq!((ul30.f_low, ul30.f_high), (2.305e9, 2.315e9));
        assert_eq!(bands.iter().filter(|b| b.direction == Direction::Uplink).count(), 6);
    }

    #[test]
    fn equal_bins_sum() {
        let s = sweep(0.0, 0.0, 10.0, vec![2.0; 10]);
        let b = BandDef::new("b", 20.0, 60.0, Direction::Uplink).unwrap();
        assert_eq!(band_power(&s, &b).unwrap(), 8.0);
        let outside = BandDef::new("o", 200.0, 300.0, Direction::Uplink).unwrap();
        assert!(matches!(band_power(&s, &outside), Err(IngestError::NoOverlap { .. })));
    }

    #[test]
    fn interpolated_altitude() {
        let j = time_join(&[sweep(5.0, 0.0, 1.0, vec![1.0])], &[fix(0.0, 0.0), fix(10.0, 100.0)], 15.0).unwrap();
        assert_eq!(j.joined[0].altitude, 50.0);
        assert_eq!(j.joined[0].fixes, (0, Some(1)));
    }

    #[test]
    fn distant_sweep_dropped() {
        let sweeps = [sweep(0.0, 0.0, 1.0, vec![1.0]), sweep(1000.0, 0.0, 1.0, vec![1.0])];
        let j = time_join(&sweeps, &[fix(0.0, 10.0)], 30.0).unwrap();
        assert_eq!((j.joined.len(), j.dropped), (1, 1));
        let err = time_join(&sweeps[1..], &[fix(0.0, 10.0)], 30.0).unwrap_err();
        assert!(matches!(err, IngestError::EmptyJoin { dropped: 1, .. }));
    }

    #[test]
    fn one_sided_uses_nearest() {
        let j = time_join(&[sweep(12.0, 0.0, 1.0, vec![1.0])], &[fix(0.0, 0.0), fix(10.0, 100.0)], 5.0).unwrap();
        assert_eq!(j.joined[0].altitude, 100.0);
        assert_eq!(j.joined[0].fixes, (1, None));
    }

    #[test]
    fn unsorted_inputs_rejected() {
        let s = [sweep(5.0, 0.0, 1.0, vec![1.0]), sweep(1.0, 0.0, 1.0, vec![1.0])];
        assert!(matches!(time_join(&s, &[fix(0.0, 0.0)], 15.0), Err(IngestError::NotSorted("sweeps"))));
    }

    #[test]
    fn binning_single_and_flat() {
        let p = |alt: f64, w: f64| AltitudePowerPoint {
            altitude: alt,
            band: "b".into(),
            power: w,
            timestamp: 0.0,
            sweep_index: 0,
            fixes: (0, None),
        };
        let one = altitude_binning(&[p(12.0, 1e-9)], 10.0).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].median_dbm - -60.0).abs() < 1e-12);
        assert_eq!((one[0].low, one[0].high), (10.0, 20.0));

        let flat: Vec<_> = (0..50).map(|i| p(i as f64 * 3.0, 1e-6)).collect();
        let bins = altitude_binning(&flat, 20.0).unwrap();
        assert!(bins.iter().all(|b| (b.median_dbm - -30.0).abs() < 1e-9));
    }

    #[test]
    fn quartiles_interpolate() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
    }

    #[test]
    fn file_round_trip() {
        let sweeps = vec![sweep(1.5, 7e8, 1e6, vec![1e-12, 0.0, 3.5e-11]), sweep(2.5, 7e8, 2e6, vec![4e-12])];
        let mut buf = Vec::new();
        write_sweeps(&mut buf, &sweeps).unwrap();
        assert_eq!(read_sweeps(&buf[..]).unwrap(), sweeps);

        let fixes = vec![fix(0.0, 12.0), fix(1.0, 15.5)];
        let mut buf = Vec::new();
        write_gps(&mut buf, &fixes, 100.0).unwrap();
        assert_eq!(read_gps(&buf[..], 100.0).unwrap(), fixes);
    }

    #[test]
    fn schema_errors_name_the_column() {
        let bad = format!("{SWEEP_TAG}\ntimestamp,freq_start_hz,bin_width_hz,bin_powers_w\n1,700e6,-1,0.1\n");
        assert!(read_sweeps(bad.as_bytes()).unwrap_err().to_string().contains("bin_width_hz"));
        let bad = format!("{GPS_TAG}\ntimestamp,lat,lon,alt\n");
        assert!(read_gps(bad.as_bytes(), 0.0).unwrap_err().to_string().contains("alt_m"));
        assert!(matches!(
            read_gps("timestamp,lat,lon,alt_m\n".as_bytes(), 0.0),
            Err(IngestError::Version { .. })
        ));
    }
}
