//! Altitude-dependent line-of-sight probability.
//!
//! Two models live here: the exact building-statistics product driven by an
//! environment triple (δ, β, γ), and the break-point exponential that makes
//! the aggregate-power integral tractable:
//!
//! ```text
//! Pr(R) = 1                      H ≤ R < R_bp
//!       = exp(−k (R − R_bp))     R ≥ R_bp
//! ```
//!
//! with the height laws k = μ/H and R_bp = κH. The fitting routines recover
//! (k, R_bp) per height and (μ, κ) across heights.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimize::{golden_section, nelder_mead};

/// Smallest decay rate the fit will report, 1/m.
pub const K_MIN: f64 = 1e-9;
/// Largest decay rate the fit will report, 1/m.
pub const K_MAX: f64 = 10.0;

/// Laws file format tag.
pub const LAWS_FORMAT: &str = "altocc-laws/1";

#[derive(Debug, Error)]
pub enum LosError {
    #[error("invalid {name}: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("3-D distance {dist} is below the receiver height {height}")]
    BelowHeight { dist: f64, height: f64 },
    #[error("distance grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("break-point fit did not converge at H = {height} m")]
    FitFailed { height: f64 },
    #[error("fit at H = {height} m failed: {source}")]
    AtHeight {
        height: f64,
        #[source]
        source: Box<LosError>,
    },
    #[error("laws file: {0}")]
    Io(#[from] std::io::Error),
    #[error("laws file: {0}")]
    Parse(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, LosError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(LosError::Domain { name, value })
    }
}

/// Environment statistics (δ, β, γ): the built-up area fraction, the number
/// of buildings per km², and the scale of the Rayleigh building-height
/// distribution in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentTriple {
    pub delta: f64,
    pub beta: f64,
    #[serde(rename = "gamma")]
    pub gamma_param: f64,
}

impl EnvironmentTriple {
    pub const URBAN: EnvironmentTriple = EnvironmentTriple {
        delta: 0.3,
        beta: 500.0,
        gamma_param: 15.0,
    };

    pub fn new(delta: f64, beta: f64, gamma_param: f64) -> Result<Self, LosError> {
        let env = EnvironmentTriple {
            delta,
            beta,
            gamma_param,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<(), LosError> {
        positive("delta", self.delta)?;
        positive("beta", self.beta)?;
        positive("gamma", self.gamma_param)?;
        Ok(())
    }

    /// Mean number of buildings crossed per kilometre of path.
    fn buildings_per_km(&self) -> f64 {
        (self.delta * self.beta).sqrt()
    }

    /// Index m of the last factor in the product at 3-D distance `dist`
    /// (metres); negative means no building is crossed.
    pub fn building_index(&self, dist: f64) -> i64 {
        (dist / 1000.0 * self.buildings_per_km() - 1.0).floor() as i64
    }

    /// 3-D distance (metres) at which the building index becomes `m`.
    pub fn index_threshold(&self, m: i64) -> f64 {
        (m as f64 + 1.0) * 1000.0 / self.buildings_per_km()
    }

    /// The product for a known building index.
    pub fn product(&self, height: f64, m: i64) -> f64 {
        if m < 0 {
            return 1.0;
        }
        let count = (m + 1) as f64;
        let two_gamma_sq = 2.0 * self.gamma_param * self.gamma_param;
        (0..=m)
            .map(|n| {
                let h = height - (n as f64 + 0.5) * height / count;
                1.0 - (-(h * h) / two_gamma_sq).exp()
            })
            .product()
    }
}

/// Decay rate k (1/m) and break-point distance R_bp (m) at one height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakpointParams {
    pub k: f64,
    pub r_bp: f64,
}

impl BreakpointParams {
    pub fn new(k: f64, r_bp: f64) -> Result<Self, LosError> {
        Ok(BreakpointParams {
            k: positive("k", k)?,
            r_bp: positive("r_bp", r_bp)?,
        })
    }

    /// The break-point model at 3-D distance `dist`.
    pub fn probability(&self, dist: f64) -> f64 {
        if dist < self.r_bp {
            1.0
        } else {
            (-self.k * (dist - self.r_bp)).exp()
        }
    }
}

/// Height laws k = μ/H, R_bp = κH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakpointLaws {
    pub mu: f64,
    pub kappa: f64,
}

impl BreakpointLaws {
    /// Values fitted for the urban triple.
    pub const URBAN: BreakpointLaws = BreakpointLaws {
        mu: 0.6,
        kappa: 1.38,
    };

    pub fn new(mu: f64, kappa: f64) -> Result<Self, LosError> {
        let laws = BreakpointLaws { mu, kappa };
        laws.validate()?;
        Ok(laws)
    }

    pub fn validate(&self) -> Result<(), LosError> {
        positive("mu", self.mu)?;
        if !(self.kappa.is_finite() && self.kappa >= 1.0) {
            return Err(LosError::Domain {
                name: "kappa",
                value: self.kappa,
            });
        }
        Ok(())
    }

    pub fn params_at(&self, height: f64) -> BreakpointParams {
        BreakpointParams {
            k: self.mu / height,
            r_bp: self.kappa * height,
        }
    }
}

/// Exact LoS probability for a ground transmitter at horizontal distance
/// `ground_dist` from a receiver at `height` (both metres).
///
/// The building count grows with the 3-D path length √(r² + H²).
pub fn plos_exact(height: f64, ground_dist: f64, env: &EnvironmentTriple) -> Result<f64, LosError> {
    positive("height", height)?;
    if !(ground_dist.is_finite() && ground_dist >= 0.0) {
        return Err(LosError::Domain {
            name: "ground distance",
            value: ground_dist,
        });
    }
    let dist = ground_dist.hypot(height);
    Ok(env.product(height, env.building_index(dist)))
}

/// [`plos_exact`] expressed in the 3-D distance R ≥ H.
pub fn plos_exact_3d(height: f64, dist: f64, env: &EnvironmentTriple) -> Result<f64, LosError> {
    positive("height", height)?;
    if !(dist >= height) {
        return Err(LosError::BelowHeight { dist, height });
    }
    Ok(env.product(height, env.building_index(dist)))
}

/// Break-point approximation with the height laws substituted.
pub fn plos_approx(dist: f64, height: f64, laws: &BreakpointLaws) -> Result<f64, LosError> {
    positive("height", height)?;
    if !(dist >= height) {
        return Err(LosError::BelowHeight { dist, height });
    }
    Ok(laws.params_at(height).probability(dist))
}

/// Default ground-distance grid for fitting: 0 to 3000 m in 10 m steps.
pub fn default_ground_grid() -> Vec<f64> {
    (0..=300).map(|i| i as f64 * 10.0).collect()
}

/// Default height grid for law fitting: 20 to 500 m in 20 m steps.
pub fn default_height_grid() -> Vec<f64> {
    (1..=25).map(|i| i as f64 * 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakpointFit {
    pub height: f64,
    pub params: BreakpointParams,
    pub rmse: f64,
}

/// Fits (k, R_bp) to the exact model sampled at the ground distances
/// `ground_grid`.
pub fn fit_breakpoint(
    height: f64,
    env: &EnvironmentTriple,
    ground_grid: &[f64],
) -> Result<BreakpointFit, LosError> {
    positive("height", height)?;
    env.validate()?;
    if ground_grid.is_empty() || ground_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LosError::BadGrid);
    }
    let samples = ground_grid
        .iter()
        .map(|&r| Ok((r.hypot(height), plos_exact(height, r, env)?)))
        .collect::<Result<Vec<_>, LosError>>()?;
    fit_breakpoint_samples(height, &samples)
}

fn sse(samples: &[(f64, f64)], k: f64, r_bp: f64) -> f64 {
    let params = BreakpointParams { k, r_bp };
    samples
        .iter()
        .map(|&(r, p)| {
            let e = params.probability(r) - p;
            e * e
        })
        .sum()
}

/// Fits the break-point model to `(3-D distance, probability)` samples by
/// least squares in the probability domain.
pub fn fit_breakpoint_samples(
    height: f64,
    samples: &[(f64, f64)],
) -> Result<BreakpointFit, LosError> {
    positive("height", height)?;
    if samples.is_empty() || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(LosError::BadGrid);
    }
    let r_min = samples[0].0;
    let r_max = samples[samples.len() - 1].0;
    let rmse = |k: f64, r_bp: f64| (sse(samples, k, r_bp) / samples.len() as f64).sqrt();

    // Plateau covers every sample: nothing to decay.
    if samples.iter().all(|&(_, p)| p >= 1.0 - 1e-12) {
        return Ok(BreakpointFit {
            height,
            params: BreakpointParams {
                k: K_MIN,
                r_bp: r_max,
            },
            rmse: rmse(K_MIN, r_max),
        });
    }

    // Start: last sample still at the plateau, and a log-linear tail slope.
    let r_bp0 = samples
        .iter()
        .filter(|&&(_, p)| p >= 0.99)
        .map(|&(r, _)| r)
        .fold(r_min, f64::max);
    let (num, den) = samples
        .iter()
        .filter(|&&(r, p)| r > r_bp0 && p > 1e-12)
        .fold((0.0, 0.0), |(n, d), &(r, p)| {
            let dr = r - r_bp0;
            (n - dr * p.ln(), d + dr * dr)
        });
    let k0 = if den > 0.0 {
        (num / den).clamp(K_MIN, K_MAX)
    } else {
        1.0 / height
    };

    let (ln_lo, ln_hi) = (K_MIN.ln(), K_MAX.ln());
    let best_k_for = |r_bp: f64| {
        let (ln_k, value) = golden_section(|lk| sse(samples, lk.exp(), r_bp), ln_lo, ln_hi, 1e-7);
        (ln_k.exp(), value)
    };

    // Profile the break-point over the sample distances: the loss is not
    // convex in R_bp, so a local search from one start can stall.
    let mut candidates: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|&(r, _)| r)
        .chain(std::iter::once(r_bp0))
        .map(|r_bp| {
            let (k, v) = best_k_for(r_bp);
            (k, r_bp, v)
        })
        .collect();
    candidates.push((k0, r_bp0, sse(samples, k0, r_bp0)));
    candidates.sort_by(|a, b| a.2.total_cmp(&b.2));

    let scale = height;
    let objective = |x: &[f64; 2]| {
        let k = x[0].exp();
        let r_bp = x[1] * scale;
        if !(K_MIN..=K_MAX).contains(&k) || r_bp < r_min || r_bp > r_max {
            return f64::INFINITY;
        }
        sse(samples, k, r_bp)
    };
    let mut best: Option<(f64, f64, f64)> = None;
    let mut any_converged = false;
    for &(k, r_bp, _) in candidates.iter().take(3) {
        let m = nelder_mead(
            objective,
            [k.ln(), r_bp / scale],
            [0.05, 0.01],
            1e-10,
            1e-16,
            20_000,
        );
        any_converged |= m.converged;
        if best.is_none_or(|b| m.value < b.2) {
            best = Some((m.x[0].exp(), m.x[1] * scale, m.value));
        }
    }
    let (k, r_bp, _) = best.expect("at least one candidate");
    if !any_converged || !k.is_finite() || !r_bp.is_finite() {
        return Err(LosError::FitFailed { height });
    }
    Ok(BreakpointFit {
        height,
        params: BreakpointParams { k, r_bp },
        rmse: rmse(k, r_bp),
    })
}

/// Result of regressing per-height fits onto the height laws.
#[derive(Debug, Clone, PartialEq)]
pub struct LawsFit {
    pub laws: BreakpointLaws,
    /// Standard deviation of k·H across heights.
    pub mu_spread: f64,
    /// Standard deviation of R_bp/H across heights.
    pub kappa_spread: f64,
    /// Root-mean-square of the per-height residual RMSEs.
    pub rmse: f64,
    pub per_height: Vec<BreakpointFit>,
}

/// Fits (μ, κ) for an environment over `heights`, sampling the exact model
/// on [`default_ground_grid`].
pub fn fit_laws(env: &EnvironmentTriple, heights: &[f64]) -> Result<LawsFit, LosError> {
    env.validate()?;
    let grid = default_ground_grid();
    fit_laws_by(heights, |h| fit_breakpoint(h, env, &grid))
}

/// Regresses per-height fits produced by `fit_at` onto the height laws:
/// μ is the mean of k·H, κ the mean of R_bp/H.
pub fn fit_laws_by<F>(heights: &[f64], fit_at: F) -> Result<LawsFit, LosError>
where
    F: Fn(f64) -> Result<BreakpointFit, LosError> + Sync,
{
    if heights.is_empty() {
        return Err(LosError::BadGrid);
    }
    for &h in heights {
        positive("height", h)?;
    }
    let per_height = heights
        .par_iter()
        .map(|&h| {
            fit_at(h).map_err(|e| LosError::AtHeight {
                height: h,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let n = per_height.len() as f64;
    let mus: Vec<f64> = per_height.iter().map(|f| f.params.k * f.height).collect();
    let kappas: Vec<f64> = per_height
        .iter()
        .map(|f| f.params.r_bp / f.height)
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let spread = |v: &[f64], m: f64| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    let mu = mean(&mus);
    let kappa = mean(&kappas);
    let rmse = (per_height.iter().map(|f| f.rmse * f.rmse).sum::<f64>() / n).sqrt();

    Ok(LawsFit {
        laws: BreakpointLaws { mu, kappa },
        mu_spread: spread(&mus, mu),
        kappa_spread: spread(&kappas, kappa),
        rmse,
        per_height,
    })
}

/// On-disk record of fitted laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawsFile {
    pub format: String,
    pub mu: f64,
    pub kappa: f64,
    pub env: EnvironmentTriple,
    pub rmse: f64,
}

impl LawsFile {
    pub fn new(laws: BreakpointLaws, env: EnvironmentTriple, rmse: f64) -> Self {
        LawsFile {
            format: LAWS_FORMAT.to_string(),
            mu: laws.mu,
            kappa: laws.kappa,
            env,
            rmse,
        }
    }

    pub fn laws(&self) -> BreakpointLaws {
        BreakpointLaws {
            mu: self.mu,
            kappa: self.kappa,
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("laws file serializes")
    }

    pub fn from_text(text: &str) -> Result<Self, LosError> {
        let file: LawsFile = toml::from_str(text).map_err(|e| LosError::Parse(e.to_string()))?;
        if file.format != LAWS_FORMAT {
            return Err(LosError::Parse(format!(
                "unsupported format '{}', expected '{LAWS_FORMAT}'",
                file.format
            )));
        }
        file.laws().validate()?;
        file.env.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, LosError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), LosError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const URBAN: EnvironmentTriple = EnvironmentTriple::URBAN;

    #[test]
    fn empty_product_near_receiver() {
        // 3-D distance under 1000/√150 ≈ 81.65 m crosses no building.
        assert_eq!(plos_exact(50.0, 10.0, &URBAN).unwrap(), 1.0);
        assert_eq!(plos_exact_3d(60.0, 60.0, &URBAN).unwrap(), 1.0);
    }

    #[test]
    fn direct_evaluation_at_one_kilometre() {
        // R = √(1000² + 100²) = 1004.99 m → m = floor(1.00499·√150 − 1) = 11.
        let p = plos_exact(100.0, 1000.0, &URBAN).unwrap();
        let mut expected = 1.0;
        for n in 0..12 {
            let h = 100.0 - (n as f64 + 0.5) * 100.0 / 12.0;
            expected *= 1.0 - (-(h * h) / 450.0).exp();
        }
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.005_515_012_602_905_281).abs() < 1e-12, "{p}");
    }

    #[test]
    fn vanishing_height_blocks_every_building() {
        let p = plos_exact(1e-6, 500.0, &URBAN).unwrap();
        assert!(p < 1e-12);
    }

    #[test]
    fn exact_3d_is_consistent() {
        let a = plos_exact_3d(120.0, 500.0, &URBAN).unwrap();
        let b = plos_exact(120.0, (500f64.powi(2) - 120f64.powi(2)).sqrt(), &URBAN).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            plos_exact_3d(120.0, 100.0, &URBAN),
            Err(LosError::BelowHeight { .. })
        ));
    }

    #[test]
    fn exact_domain_errors() {
        assert!(plos_exact(0.0, 10.0, &URBAN).is_err());
        assert!(plos_exact(-5.0, 10.0, &URBAN).is_err());
        assert!(plos_exact(10.0, -1.0, &URBAN).is_err());
        assert!(EnvironmentTriple::new(0.3, 0.0, 15.0).is_err());
    }

    #[test]
    fn approx_branches() {
        let laws = BreakpointLaws::URBAN;
        assert_eq!(plos_approx(138.0, 100.0, &laws).unwrap(), 1.0);
        assert_eq!(plos_approx(120.0, 100.0, &laws).unwrap(), 1.0);
        let p = plos_approx(238.0, 100.0, &laws).unwrap();
        assert!((p - (-0.6f64).exp()).abs() < 1e-12);
        assert!((p - 0.5488).abs() < 1e-4);
        assert!(plos_approx(90.0, 100.0, &laws).is_err());
    }

    #[test]
    fn exact_non_increasing_in_distance() {
        for h in [30.0, 100.0, 250.0] {
            let mut prev = 1.0;
            let mut r = h;
            while r < 3000.0 {
                let p = plos_exact_3d(h, r, &URBAN).unwrap();
                assert!(p <= prev + 1e-15, "H={h} R={r}");
                prev = p;
                r += 3.0;
            }
        }
    }

    #[test]
    fn plateau_everywhere_gives_max_breakpoint() {
        // δβ tiny: no building is ever crossed within the grid.
        let env = EnvironmentTriple::new(1e-6, 1e-6, 15.0).unwrap();
        let grid = default_ground_grid();
        let fit = fit_breakpoint(100.0, &env, &grid).unwrap();
        assert_eq!(fit.params.k, K_MIN);
        assert!((fit.params.r_bp - 3000f64.hypot(100.0)).abs() < 1e-9);
        assert_eq!(fit.rmse, 0.0);
    }

    #[test]
    fn synthetic_round_trip_recovers_parameters() {
        let truth = BreakpointParams::new(0.0123, 217.3).unwrap();
        let h = 150.0;
        let samples: Vec<_> = default_ground_grid()
            .iter()
            .map(|&r| {
                let d = r.hypot(h);
                (d, truth.probability(d))
            })
            .collect();
        let fit = fit_breakpoint_samples(h, &samples).unwrap();
        assert!((fit.params.k - truth.k).abs() / truth.k < 1e-6, "{fit:?}");
        assert!((fit.params.r_bp - truth.r_bp).abs() / truth.r_bp < 1e-6, "{fit:?}");
        assert!(fit.rmse < 1e-9);
    }

    #[test]
    fn synthetic_laws_round_trip() {
        let truth = BreakpointLaws::new(1.0, 2.0).unwrap();
        let grid = default_ground_grid();
        let fit = fit_laws_by(&[40.0, 90.0, 170.0, 320.0], |h| {
            let samples: Vec<_> = grid
                .iter()
                .map(|&r| {
                    let d = r.hypot(h);
                    (d, plos_approx(d, h, &truth).unwrap())
                })
                .collect();
            fit_breakpoint_samples(h, &samples)
        })
        .unwrap();
        assert!((fit.laws.mu - 1.0).abs() < 1e-6, "{:?}", fit.laws);
        assert!((fit.laws.kappa - 2.0).abs() < 1e-6, "{:?}", fit.laws);
    }

    #[test]
    fn single_height_laws_match_that_fit() {
        let fit = fit_laws(&URBAN, &[100.0]).unwrap();
        let one = fit_breakpoint(100.0, &URBAN, &default_ground_grid()).unwrap();
        assert!((fit.laws.mu - one.params.k * 100.0).abs() < 1e-12);
        assert!((fit.laws.kappa - one.params.r_bp / 100.0).abs() < 1e-12);
        assert_eq!(fit.mu_spread, 0.0);
    }

    #[test]
    fn urban_fit_at_100m_near_reported_laws() {
        let fit = fit_breakpoint(100.0, &URBAN, &default_ground_grid()).unwrap();
        let k_ref = 0.6 / 100.0;
        let rbp_ref = 138.0;
        assert!((fit.params.k - k_ref).abs() / k_ref < 0.15, "{fit:?}");
        assert!((fit.params.r_bp - rbp_ref).abs() / rbp_ref < 0.15, "{fit:?}");
    }

    #[test]
    fn fit_rejects_bad_grid() {
        assert!(matches!(
            fit_breakpoint(100.0, &URBAN, &[]),
            Err(LosError::BadGrid)
        ));
        assert!(matches!(
            fit_breakpoint(100.0, &URBAN, &[0.0, 10.0, 10.0]),
            Err(LosError::BadGrid)
        ));
    }

    #[test]
    fn fit_laws_attaches_height_to_errors() {
        let err = fit_laws_by(&[10.0, 20.0], |h| {
            if h > 15.0 {
                Err(LosError::FitFailed { height: h })
            } else {
                Ok(BreakpointFit {
                    height: h,
                    params: BreakpointParams { k: 0.1, r_bp: h },
                    rmse: 0.0,
                })
            }
        })
        .unwrap_err();
        assert!(matches!(err, LosError::AtHeight { height, .. } if height == 20.0));
    }

    #[test]
    fn laws_file_round_trip() {
        let file = LawsFile::new(BreakpointLaws::URBAN, URBAN, 0.031);
        let text = file.to_text();
        assert!(text.contains("mu = 0.6"));
        assert_eq!(LawsFile::from_text(&text).unwrap(), file);
        let bad = text.replace(LAWS_FORMAT, "altocc-laws/9");
        assert!(LawsFile::from_text(&bad).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_in_unit_interval(h in 0.5f64..800.0, r in 0.0f64..5000.0) {
            let p = plos_exact(h, r, &URBAN).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let q = plos_approx(r.hypot(h), h, &BreakpointLaws::URBAN).unwrap();
            prop_assert!((0.0..=1.0).contains(&q));
        }

        #[test]
        fn altitude_dominance_at_fixed_slant_distance(
            h in 1.0f64..400.0, dh in 0.0f64..100.0, extra in 0.0f64..3000.0
        ) {
            let dist = h + dh + extra;
            let low = plos_exact_3d(h, dist, &URBAN).unwrap();
            let high = plos_exact_3d(h + dh, dist, &URBAN).unwrap();
            prop_assert!(high >= low);
        }

        #[test]
        fn approx_non_increasing_in_distance(h in 1.0f64..500.0, a in 0.0f64..3000.0, b in 0.0f64..3000.0) {
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            let laws = BreakpointLaws::URBAN;
            prop_assert!(plos_approx(h + far, h, &laws).unwrap() <= plos_approx(h + near, h, &laws).unwrap());
        }
    }
}
