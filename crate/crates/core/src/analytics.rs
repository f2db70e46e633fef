//! Expected aggregate received power at an aerial receiver above an HPPP of
//! ground transmitters.
//!
//! Campbell's theorem turns the expected sum over the point process into
//!
//! ```text
//! E[P] = C ∫_{R0}^∞ [R^{1−α_los} Pr(R) + R^{1−α_nlos} (1 − Pr(R))] dR
//! C    = 2πλ · P_tx G_t G_r c² / ((4π)² f²),   R0 = √(H² + r0²)
//! ```
//!
//! For α_los = 2, α_nlos = 3 and the break-point LoS model the integral has
//! a closed form in Γ(0, ·) and Γ(−1, ·); [`expected_power_quadrature`]
//! evaluates the same integral numerically for arbitrary exponents and LoS
//! models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{AltitudePowerCurve, CurveError};
use crate::los::{BreakpointLaws, BreakpointParams, LosError};
use crate::quad::{integrate, QuadError, Tolerance};
use crate::special::{scaled_upper_gamma_neg1, scaled_upper_gamma_zero, SpecialError};
use crate::units::{db_to_linear, dbm_to_watts, SPEED_OF_LIGHT};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid {name}: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Los(#[from] LosError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("tail integral still contributing after {panels} panels (last panel/total = {achieved:e})")]
    TailNotConverged { panels: usize, achieved: f64 },
    #[error("quadrature reached relative error {achieved:e}, requested {requested:e}")]
    Tolerance { achieved: f64, requested: f64 },
}

fn check(name: &'static str, value: f64, ok: bool) -> Result<f64, AnalyticsError> {
    if ok && value.is_finite() {
        Ok(value)
    } else {
        Err(AnalyticsError::Domain { name, value })
    }
}

/// Transmitter and receiver link-budget parameters, all linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Transmit power, W.
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    /// Carrier frequency, Hz.
    pub carrier_freq: f64,
}

impl RadioConfig {
    pub fn new(
        tx_power: f64,
        tx_gain: f64,
        rx_gain: f64,
        carrier_freq: f64,
    ) -> Result<Self, AnalyticsError> {
        let radio = RadioConfig {
            tx_power,
            tx_gain,
            rx_gain,
            carrier_freq,
        };
        radio.validate()?;
        Ok(radio)
    }

    pub fn from_db(
        tx_power_dbm: f64,
        tx_gain_dbi: f64,
        rx_gain_dbi: f64,
        carrier_freq: f64,
    ) -> Result<Self, AnalyticsError> {
        Self::new(
            dbm_to_watts(tx_power_dbm),
            db_to_linear(tx_gain_dbi),
            db_to_linear(rx_gain_dbi),
            carrier_freq,
        )
    }

    /// 20 dBm, 10 dBi at both ends, 3.5 GHz.
    pub fn baseline() -> Self {
        Self::from_db(20.0, 10.0, 10.0, 3.5e9).expect("valid constants")
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        check("tx_power", self.tx_power, self.tx_power > 0.0)?;
        check("tx_gain", self.tx_gain, self.tx_gain > 0.0)?;
        check("rx_gain", self.rx_gain, self.rx_gain > 0.0)?;
        check("carrier_freq", self.carrier_freq, self.carrier_freq > 0.0)?;
        Ok(())
    }

    /// Received power at 1 m: P_tx G_t G_r c² / ((4π)² f²). Multiply by R^{−α}.
    pub fn link_gain(&self) -> f64 {
        let wavelength = SPEED_OF_LIGHT / self.carrier_freq;
        self.tx_power * self.tx_gain * self.rx_gain * (wavelength / (4.0 * PI)).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossExponents {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
}

impl PathlossExponents {
    pub const FREE_SPACE_AND_CUBIC: PathlossExponents = PathlossExponents {
        alpha_los: 2.0,
        alpha_nlos: 3.0,
    };

    pub fn new(alpha_los: f64, alpha_nlos: f64) -> Result<Self, AnalyticsError> {
        let e = PathlossExponents {
            alpha_los,
            alpha_nlos,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        check("alpha_los", self.alpha_los, self.alpha_los >= 2.0)?;
        check(
            "alpha_nlos",
            self.alpha_nlos,
            self.alpha_nlos >= self.alpha_los,
        )?;
        Ok(())
    }
}

/// Receiver height, guard zone and transmitter density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    /// Receiver height H, m.
    pub height: f64,
    /// Guard-zone radius r0, m.
    pub guard_radius: f64,
    /// Outer radius of the simulated ring, m. The analytic forms integrate to infinity.
    pub outer_radius: f64,
    /// Transmitter density λ, nodes/m².
    pub density: f64,
}

impl ScenarioGeometry {
    pub const DEFAULT_OUTER_RADIUS: f64 = 4000.0;

    pub fn new(
        height: f64,
        guard_radius: f64,
        outer_radius: f64,
        density: f64,
    ) -> Result<Self, AnalyticsError> {
        let s = ScenarioGeometry {
            height,
            guard_radius,
            outer_radius,
            density,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        check("height", self.height, self.height > 0.0)?;
        check("guard_radius", self.guard_radius, self.guard_radius >= 0.0)?;
        check(
            "outer_radius",
            self.outer_radius,
            self.outer_radius > self.guard_radius,
        )?;
        check("density", self.density, self.density >= 0.0)?;
        Ok(())
    }

    pub fn with_height(self, height: f64) -> Self {
        ScenarioGeometry { height, ..self }
    }

    /// R0 = √(H² + r0²), the nearest possible 3-D transmitter distance.
    pub fn nearest_distance(&self) -> f64 {
        self.height.hypot(self.guard_radius)
    }
}

/// C = 2πλ · link gain.
pub fn friis_constant(radio: &RadioConfig, density: f64) -> f64 {
    2.0 * PI * density * radio.link_gain()
}

/// Closed form for α_los = 2, α_nlos = 3 with the break-point LoS model.
///
/// When the guard zone pushes R0 beyond R_bp the plateau band is empty and
/// both integrals start at R0 inside the exponential regime.
pub fn expected_power_closed(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    params: &BreakpointParams,
) -> Result<f64, AnalyticsError> {
    scenario.validate()?;
    radio.validate()?;
    let c = friis_constant(radio, scenario.density);
    let k = check("k", params.k, params.k > 0.0)?;
    let r_bp = check("r_bp", params.r_bp, params.r_bp > 0.0)?;
    let r0 = scenario.nearest_distance();

    let braces = if r0 <= r_bp {
        let x = k * r_bp;
        (r_bp / r0).ln() + scaled_upper_gamma_zero(x)? + 1.0 / r_bp
            - k * scaled_upper_gamma_neg1(x)?
    } else {
        let y = k * r0;
        let shift = (-k * (r0 - r_bp)).exp();
        shift * scaled_upper_gamma_zero(y)? + 1.0 / r0 - k * shift * scaled_upper_gamma_neg1(y)?
    };
    Ok(c * braces)
}

/// Closed form with k = μ/H and R_bp = κH.
pub fn expected_power_altitude(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    laws: &BreakpointLaws,
) -> Result<f64, AnalyticsError> {
    laws.validate()?;
    expected_power_closed(scenario, radio, &laws.params_at(scenario.height))
}

/// Limit of [`expected_power_altitude`] as H → ∞: C·{ln κ + e^{μκ}Γ(0, μκ)}.
pub fn asymptote_power(
    radio: &RadioConfig,
    density: f64,
    laws: &BreakpointLaws,
) -> Result<f64, AnalyticsError> {
    laws.validate()?;
    let c = friis_constant(radio, density);
    Ok(c * (laws.kappa.ln() + scaled_upper_gamma_zero(laws.mu * laws.kappa)?))
}

/// The 1/H coefficient 1/κ − μ e^{μκ}Γ(−1, μκ) shared by the r0 = 0 and
/// r0 ≫ H forms.
pub fn inverse_height_coefficient(laws: &BreakpointLaws) -> Result<f64, AnalyticsError> {
    laws.validate()?;
    Ok(1.0 / laws.kappa - laws.mu * scaled_upper_gamma_neg1(laws.mu * laws.kappa)?)
}

/// No guard zone: the asymptote plus a positive 1/H term, so power falls
/// with height.
pub fn power_special_r0_zero(
    radio: &RadioConfig,
    density: f64,
    laws: &BreakpointLaws,
    height: f64,
) -> Result<f64, AnalyticsError> {
    check("height", height, height > 0.0)?;
    let c = friis_constant(radio, density);
    let limit = laws.kappa.ln() + scaled_upper_gamma_zero(laws.mu * laws.kappa)?;
    Ok(c * (limit + inverse_height_coefficient(laws)? / height))
}

/// Approximation for r0 ≫ H obtained by replacing R0 with r0 in the log term:
/// C·{ln H + ln(κ/r0) + e^{μκ}Γ(0, μκ) + coefficient/H}. Grows like C·ln H.
///
/// This extrapolates the plateau logarithm, so it turns negative whenever
/// κH < r0; [`expected_power_altitude`] handles that regime exactly.
pub fn power_special_r0_large(
    radio: &RadioConfig,
    density: f64,
    laws: &BreakpointLaws,
    height: f64,
    guard_radius: f64,
) -> Result<f64, AnalyticsError> {
    check("height", height, height > 0.0)?;
    check("guard_radius", guard_radius, guard_radius > 0.0)?;
    let c = friis_constant(radio, density);
    let braces = height.ln()
        + (laws.kappa / guard_radius).ln()
        + scaled_upper_gamma_zero(laws.mu * laws.kappa)?
        + inverse_height_coefficient(laws)? / height;
    Ok(c * braces)
}

/// Result of [`expected_power_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePower {
    pub watts: f64,
    /// Estimated relative error of the integral.
    pub rel_error: f64,
    /// Number of doubling panels integrated.
    pub panels: usize,
}

/// Requested relative accuracy of [`expected_power_quadrature`].
pub const QUADRATURE_REL_TOL: f64 = 1e-8;
const PANEL_REL_TOL: f64 = 1e-11;
const MAX_PANELS: usize = 90;
const QUIET_PANELS: usize = 3;

/// Numerical evaluation of the Campbell integral for any exponents and any
/// LoS probability `plos` of the 3-D distance.
///
/// The NLoS part is split as ∫R^{1−α_nlos} − ∫R^{1−α_nlos}Pr, the first term
/// analytic, so only terms weighted by Pr(R) are integrated. Integration runs
/// over doubling panels [R0·2ʲ, R0·2ʲ⁺¹] until three consecutive panels each
/// add less than 1e−16 of the accumulated value.
pub fn expected_power_quadrature<F>(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    plos: F,
) -> Result<QuadraturePower, AnalyticsError>
where
    F: Fn(f64) -> f64,
{
    scenario.validate()?;
    radio.validate()?;
    exponents.validate()?;
    let alpha_nlos = check("alpha_nlos", exponents.alpha_nlos, exponents.alpha_nlos > 2.0)?;
    let (e_los, e_nlos) = (1.0 - exponents.alpha_los, 1.0 - alpha_nlos);
    let c = friis_constant(radio, scenario.density);
    let r0 = scenario.nearest_distance();

    let nlos_all = r0.powf(2.0 - alpha_nlos) / (alpha_nlos - 2.0);
    let integrand = |r: f64| (r.powf(e_los) - r.powf(e_nlos)) * plos(r);

    let mut acc = 0.0;
    let mut err = 0.0;
    let mut quiet = 0;
    let mut a = r0;
    let mut last = f64::INFINITY;
    for panel in 1..=MAX_PANELS {
        let b = 2.0 * a;
        let floor = 1e-17 * (nlos_all + acc).abs();
        let q = integrate(
            integrand,
            a,
            b,
            Tolerance {
                rel: PANEL_REL_TOL,
                abs: floor,
                max_intervals: 50_000,
            },
        )?;
        acc += q.value;
        err += q.error;
        last = q.value.abs() / (nlos_all + acc).abs();
        quiet = if last <= 1e-16 { quiet + 1 } else { 0 };
        if quiet >= QUIET_PANELS {
            let total = nlos_all + acc;
            let rel_error = err / total.abs();
            if rel_error > QUADRATURE_REL_TOL {
                return Err(AnalyticsError::Tolerance {
                    achieved: rel_error,
                    requested: QUADRATURE_REL_TOL,
                });
            }
            return Ok(QuadraturePower {
                watts: c * total,
                rel_error,
                panels: panel,
            });
        }
        a = b;
    }
    Err(AnalyticsError::TailNotConverged {
        panels: MAX_PANELS,
        achieved: last,
    })
}

/// Closed-form curve over `heights` for fixed guard radius and density.
pub fn closed_form_curve(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    laws: &BreakpointLaws,
    heights: &[f64],
    label: impl Into<String>,
) -> Result<AltitudePowerCurve, AnalyticsError> {
    let samples = heights
        .iter()
        .map(|&h| Ok((h, expected_power_altitude(&scenario.with_height(h), radio, laws)?)))
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    Ok(AltitudePowerCurve::new(label, samples)?)
}

/// Quadrature curve over `heights`; `plos_at(h)` builds the LoS model for height h.
pub fn quadrature_curve<F, P>(
    scenario: &ScenarioGeometry,
    radio: &RadioConfig,
    exponents: &PathlossExponents,
    heights: &[f64],
    plos_at: F,
    label: impl Into<String>,
) -> Result<AltitudePowerCurve, AnalyticsError>
where
    F: Fn(f64) -> P,
    P: Fn(f64) -> f64,
{
    let samples = heights
        .iter()
        .map(|&h| {
            let q = expected_power_quadrature(&scenario.with_height(h), radio, exponents, plos_at(h))?;
            Ok((h, q.watts))
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    Ok(AltitudePowerCurve::new(label, samples)?)
}
