//! Reference computations for integration tests, written without the
//! crate's own numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use altocc_core::raytrace::{Building, BuildingMap, Point3};

/// Adaptive Simpson with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Γ(s, x) for s ∈ {0, −1} by quadrature after t = x·eᵘ, which turns the
/// integrand into a smooth, doubly-exponentially decaying function.
pub fn upper_gamma_oracle(s: i32, x: f64) -> f64 {
    let f = |u: f64| {
        let t = x * u.exp();
        t.powi(s) * (-t).exp()
    };
    let u_max = (760.0 / x).ln().max(1.0);
    // A coarse composite rule sets the absolute tolerance.
    let n = 2000;
    let h = u_max / n as f64;
    let coarse: f64 = (0..n).map(|i| h * f((i as f64 + 0.5) * h)).sum();
    simpson(&f, 0.0, u_max, 1e-13 * coarse)
}

/// Independent copy of the exact LoS product.
pub fn plos_reference(height: f64, dist: f64, delta: f64, beta: f64, gamma: f64) -> f64 {
    let m = (dist / 1000.0 * (delta * beta).sqrt() - 1.0).floor();
    if m < 0.0 {
        return 1.0;
    }
    let mut p = 1.0;
    let mut n = 0.0;
    while n <= m {
        let h = height - (n + 0.5) * height / (m + 1.0);
        p *= 1.0 - (-(h * h) / (2.0 * gamma * gamma)).exp();
        n += 1.0;
    }
    p
}

fn power_integral(alpha: f64, a: f64, b: f64) -> f64 {
    if alpha == 2.0 {
        (b / a).ln()
    } else {
        (b.powf(2.0 - alpha) - a.powf(2.0 - alpha)) / (2.0 - alpha)
    }
}

/// Expected aggregate power of an HPPP on the ring r0 ≤ r ≤ r_out with the
/// exact LoS model, evaluated piecewise in closed form between the distances
/// where the building count changes.
#[allow(clippy::too_many_arguments)]
pub fn ring_power_exact(
    link_gain: f64,
    density: f64,
    height: f64,
    guard: f64,
    outer: f64,
    alpha_los: f64,
    alpha_nlos: f64,
    env: (f64, f64, f64),
) -> f64 {
    let (delta, beta, gamma) = env;
    let step = 1000.0 / (delta * beta).sqrt();
    let lo = guard.hypot(height);
    let hi = outer.hypot(height);
    let mut total = 0.0;
    let mut a = lo;
    let mut k = (lo / step).floor() as i64;
    while a < hi {
        k += 1;
        let b = (k as f64 * step).min(hi);
        if b <= a {
            continue;
        }
        let p = plos_reference(height, 0.5 * (a + b), delta, beta, gamma);
        total += p * power_integral(alpha_los, a, b) + (1.0 - p) * power_integral(alpha_nlos, a, b);
        a = b;
    }
    2.0 * PI * density * link_gain * total
}

/// Brute-force occlusion test. For each building, `n` points are sampled
/// on the part of the segment that lies inside the footprint's bounding box
/// and below the roof; the segment is blocked if any sample falls strictly
/// inside the footprint.
pub fn sampled_blocked(tx: Point3, rx: Point3, map: &BuildingMap, n: usize) -> bool {
    let at = |t: f64| (tx.x + t * (rx.x - tx.x), tx.y + t * (rx.y - tx.y), tx.z + t * (rx.z - tx.z));
    map.buildings().iter().any(|b| {
        let fp = b.footprint();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut clip = |p0: f64, d: f64, min: f64, max: f64| {
            if d == 0.0 {
                if p0 < min || p0 > max {
                    hi = -1.0;
                }
            } else {
                let (t0, t1) = ((min - p0) / d, (max - p0) / d);
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        };
        let xs = fp.iter().map(|p| p.0);
        let ys = fp.iter().map(|p| p.1);
        clip(tx.x, rx.x - tx.x, xs.clone().fold(f64::MAX, f64::min), xs.fold(f64::MIN, f64::max));
        clip(tx.y, rx.y - tx.y, ys.clone().fold(f64::MAX, f64::min), ys.fold(f64::MIN, f64::max));
        clip(tx.z, rx.z - tx.z, f64::MIN, b.height());
        hi > lo
            && (0..n).any(|i| {
                let t = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                let (x, y, z) = at(t);
                z < b.height() && strictly_inside(b, (x, y))
            })
    })
}

/// Even-odd rule, written separately from the crate's containment test.
fn strictly_inside(b: &Building, p: (f64, f64)) -> bool {
    let fp = b.footprint();
    let n = fp.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = fp[i];
        let (xj, yj) = fp[j];
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}
