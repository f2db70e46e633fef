//! Upper incomplete gamma functions Γ(0, x) and Γ(−1, x).
//!
//! Γ(0, x) is the exponential integral E₁(x). It is evaluated by its power
//! series below x = 1 and by a modified Lentz continued fraction above.
//! Γ(−1, x) uses the recurrence Γ(0, x) = x⁻¹e⁻ˣ − Γ(−1, x) below x = 1,
//! where the x⁻¹e⁻ˣ term dominates, and its own continued fraction above,
//! where both recurrence terms shrink like e⁻ˣ and would cancel.
//!
//! The `scaled_*` variants return eˣ·Γ(s, x). The closed-form power
//! expressions only ever need these products, and computing them directly
//! avoids overflow of eˣ and underflow of Γ for large arguments.

use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
/// Below this, the recurrence for Γ(−1, x) is free of cancellation.
const SERIES_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialError {
    #[error("argument must be finite and positive, got {0}")]
    Domain(f64),
    #[error("series or continued fraction did not converge at x = {0}")]
    NoConvergence(f64),
    #[error("cancellation lost precision at x = {x}: result {value} vs leading term {leading}")]
    PrecisionLoss { x: f64, value: f64, leading: f64 },
}

/// A validated argument for Γ(0, x) and Γ(−1, x): finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GammaArg(f64);

impl GammaArg {
    pub fn new(x: f64) -> Result<Self, SpecialError> {
        if x.is_finite() && x > 0.0 {
            Ok(GammaArg(x))
        } else {
            Err(SpecialError::Domain(x))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Γ(0, x) = E₁(x) = ∫ₓ^∞ t⁻¹e⁻ᵗ dt.
///
/// Returns exactly 0.0 once the result leaves the normal f64 range.
pub fn upper_gamma_zero(x: f64) -> Result<f64, SpecialError> {
    let x = GammaArg::new(x)?.get();
    if x < SERIES_LIMIT {
        return e1_series(x);
    }
    Ok(flush_subnormal(e1_fraction_scaled(x)? * (-x).exp()))
}

/// Γ(−1, x) = ∫ₓ^∞ t⁻²e⁻ᵗ dt.
pub fn upper_gamma_neg1(x: f64) -> Result<f64, SpecialError> {
    let x = GammaArg::new(x)?.get();
    if x < SERIES_LIMIT {
        let leading = (-x).exp() / x;
        let value = leading - e1_series(x)?;
        return check_cancellation(x, value, leading);
    }
    Ok(flush_subnormal(neg1_fraction_scaled(x)? * (-x).exp()))
}

/// eˣ·Γ(0, x).
pub fn scaled_upper_gamma_zero(x: f64) -> Result<f64, SpecialError> {
    let x = GammaArg::new(x)?.get();
    if x < SERIES_LIMIT {
        return Ok(x.exp() * e1_series(x)?);
    }
    e1_fraction_scaled(x)
}

/// eˣ·Γ(−1, x).
pub fn scaled_upper_gamma_neg1(x: f64) -> Result<f64, SpecialError> {
    let x = GammaArg::new(x)?.get();
    if x < SERIES_LIMIT {
        let leading = 1.0 / x;
        let value = leading - x.exp() * e1_series(x)?;
        return check_cancellation(x, value, leading);
    }
    neg1_fraction_scaled(x)
}

/// −γ − ln x − Σ (−x)ⁿ/(n·n!)
fn e1_series(x: f64) -> Result<f64, SpecialError> {
    let mut sum = 0.0;
    let mut power_over_fact = 1.0;
    for n in 1..MAX_ITER {
        let nf = n as f64;
        power_over_fact *= -x / nf;
        let term = power_over_fact / nf;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            return Ok(-EULER_GAMMA - x.ln() - sum);
        }
    }
    Err(SpecialError::NoConvergence(x))
}

/// eˣE₁(x) = 1/(x+1− 1/(x+3− 4/(x+5− …))), modified Lentz.
fn e1_fraction_scaled(x: f64) -> Result<f64, SpecialError> {
    lentz(x, x + 1.0, |i| -(i * i))
}

/// eˣΓ(−1, x) = x⁻¹ · 1/(x+2− 2/(x+4− 6/(x+6− …))), the a = −1 case of
/// Γ(a, x) = e⁻ˣxᵃ · 1/(x+1−a− 1(1−a)/(x+3−a− …)).
fn neg1_fraction_scaled(x: f64) -> Result<f64, SpecialError> {
    Ok(lentz(x, x + 2.0, |i| -(i * (i + 1.0)))? / x)
}

/// Evaluates 1/(b₀ + a₁/(b₁ + a₂/(b₂ + …))) with bᵢ = b₀ + 2i.
fn lentz(x: f64, b0: f64, numerator: impl Fn(f64) -> f64) -> Result<f64, SpecialError> {
    let mut b = b0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = numerator(i as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(SpecialError::NoConvergence(x))
}

fn check_cancellation(x: f64, value: f64, leading: f64) -> Result<f64, SpecialError> {
    // Below x = 1 the result never drops under 40% of the leading term; this
    // guards against the branch limit being moved.
    if value <= 1e-6 * leading {
        Err(SpecialError::PrecisionLoss { x, value, leading })
    } else {
        Ok(value)
    }
}

fn flush_subnormal(v: f64) -> f64 {
    if v.is_normal() {
        v
    } else {
        0.0
    }
}
