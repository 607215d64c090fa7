//! Secrecy capacity of the degraded Poisson wiretap channel.
//!
//! Everything here is built from one functional. For a convex `f` on
//! `[0, 1]`, the two-point gap
//!
//! ```text
//! G_f(alpha) = alpha f(1) + (1 - alpha) f(0) - f(alpha)
//! ```
//!
//! is the Jensen gap of `f` under the `{0, 1}` input with on-probability
//! `alpha`. With `phi_u(x) = (a_u x + lambda_u) ln(a_u x + lambda_u)`:
//!
//! * single-channel capacity is `max_alpha G_phi(alpha)`;
//! * secrecy capacity is `max_alpha G_K(alpha)` where `K = phi_y - phi_z`
//!   is convex whenever the eavesdropper is degraded.
//!
//! The maximiser solves `K'(alpha) = K(1) - K(0)`; `K'` is strictly
//! increasing on strictly degraded channels, so bisection brackets it.

mod region;

pub use region::{
    max_equivocation, rate_at_alpha, region_boundary, region_contains, RegionPoint,
};

use serde::Serialize;

use crate::error::{check_nonnegative, check_positive, check_unit, Error, Result};
use crate::params::ChannelParams;

/// Default convergence tolerance of the duty-cycle solver.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Lower bracket used when `K'(0)` diverges.
const LOG_SINGULARITY_FLOOR: f64 = 1e-15;

const MAX_BISECTION_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Optimal duty cycle; `None` when the channels coincide and the
    /// secrecy capacity is zero for every input.
    pub alpha_star: Option<f64>,
    pub c_s: f64,
    pub c_main: f64,
    pub c_eaves: f64,
}

/// `v ln v` with `0 ln 0 = 0`.
pub(crate) fn xlnx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// `w ln v` with the `0^0 = 1` convention applied when `w = 0`.
fn weighted_ln(w: f64, v: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * v.ln()
    }
}

/// `(a x + lambda) ln(a x + lambda)`.
pub fn phi(a: f64, lambda: f64, x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(xlnx(a * x + lambda))
}

pub fn k_gap(p: &ChannelParams, x: f64) -> Result<f64> {
    Ok(phi(p.a_y(), p.lambda_y(), x)? - phi(p.a_z(), p.lambda_z(), x)?)
}

/// Analytic derivative of [`k_gap`].
///
/// Fails with [`Error::Divergent`] when a log argument vanishes, which
/// happens at `x = 0` with a zero dark current.
pub fn k_prime(p: &ChannelParams, x: f64) -> Result<f64> {
    check_unit("x", x)?;
    let arg_y = p.a_y() * x + p.lambda_y();
    let arg_z = p.a_z() * x + p.lambda_z();
    if arg_y == 0.0 || arg_z == 0.0 {
        return Err(Error::Divergent(x));
    }
    Ok(p.a_y() * arg_y.ln() + p.a_y() - p.a_z() * arg_z.ln() - p.a_z())
}

/// Closed-form second derivative of [`k_gap`]:
///
/// ```text
/// K''(x) = (a_z a_y (a_y - a_z) x + lambda_z a_y^2 - lambda_y a_z^2)
///          / ((a_y x + lambda_y)(a_z x + lambda_z))
/// ```
pub fn k_second(p: &ChannelParams, x: f64) -> Result<f64> {
    check_unit("x", x)?;
    let (ay, ly, az, lz) = (p.a_y(), p.lambda_y(), p.a_z(), p.lambda_z());
    let den = (ay * x + ly) * (az * x + lz);
    if den == 0.0 {
        return Err(Error::Divergent(x));
    }
    Ok((az * ay * (ay - az) * x + lz * ay * ay - ly * az * az) / den)
}

/// `phi_y - (a_y / a_z) phi_z`, convex on degraded channels.
pub fn pi_gap(p: &ChannelParams, x: f64) -> Result<f64> {
    Ok(phi(p.a_y(), p.lambda_y(), x)? - p.a_y() / p.a_z() * phi(p.a_z(), p.lambda_z(), x)?)
}

/// `alpha f(1) + (1 - alpha) f(0) - f(alpha)`.
pub fn two_point_gap<F>(f: F, alpha: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_unit("alpha", alpha)?;
    Ok(alpha * f(1.0)? + (1.0 - alpha) * f(0.0)? - f(alpha)?)
}

/// Root of an increasing function on `[lo, hi]` by bisection.
///
/// Stops when `|g(mid)| <= abs_tol`, when the bracket collapses to adjacent
/// floats, or after `MAX_BISECTION_ITERS` halvings.
fn bisect_increasing<G>(g: G, mut lo: f64, mut hi: f64, abs_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    if g(lo)? >= 0.0 {
        return Ok(lo);
    }
    if g(hi)? <= 0.0 {
        return Ok(hi);
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTION_ITERS {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid)?;
        if v.abs() <= abs_tol {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Optimal duty cycle: the unique root in `[0, 1]` of
/// `K'(alpha) = K(1) - K(0)`.
pub fn solve_alpha_star(p: &ChannelParams, tol: f64) -> Result<f64> {
    check_positive("tol", tol)?;
    if !p.is_strictly_degraded()? {
        return Err(Error::NotStrictlyDegraded);
    }
    let target = k_gap(p, 1.0)? - k_gap(p, 0.0)?;
    let scale = target.abs().max(1.0);
    let lo = match k_prime(p, 0.0) {
        Ok(_) => 0.0,
        Err(Error::Divergent(_)) => LOG_SINGULARITY_FLOOR,
        Err(e) => return Err(e),
    };
    bisect_increasing(|x| Ok(k_prime(p, x)? - target), lo, 1.0, tol * scale)
}

/// Log of both sides of the transcendental duty-cycle equation, differenced:
///
/// ```text
/// a_y ln(a_y a + l_y) - a_z ln(a_z a + l_z)
///   - [(a_z - a_y) + (a_y + l_y) ln(a_y + l_y) - (a_z + l_z) ln(a_z + l_z)
///      + l_z ln l_z - l_y ln l_y]
/// ```
///
/// Zero at the optimum. Written independently of [`k_prime`] so the two
/// characterisations can be checked against each other.
pub fn duty_cycle_equation_residual(p: &ChannelParams, alpha: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    let (ay, ly, az, lz) = (p.a_y(), p.lambda_y(), p.a_z(), p.lambda_z());
    let lhs = weighted_ln(ay, ay * alpha + ly) - weighted_ln(az, az * alpha + lz);
    let rhs = (az - ay) + xlnx(ay + ly) - xlnx(az + lz) + xlnx(lz) - xlnx(ly);
    Ok(lhs - rhs)
}

/// Closed-form secrecy capacity evaluated at a given duty cycle:
///
/// ```text
/// alpha (a_y - a_z) + ln(l_y^l_y / l_z^l_z)
///   + ln((a_z alpha + l_z)^l_z / (a_y alpha + l_y)^l_y)
/// ```
///
/// Only equals the capacity at the optimal `alpha`.
pub fn secrecy_capacity_closed_form(p: &ChannelParams, alpha: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    let (ay, ly, az, lz) = (p.a_y(), p.lambda_y(), p.a_z(), p.lambda_z());
    Ok(alpha * (ay - az) + xlnx(ly) - xlnx(lz) + weighted_ln(lz, az * alpha + lz)
        - weighted_ln(ly, ay * alpha + ly))
}

pub fn secrecy_capacity(p: &ChannelParams) -> Result<CapacityResult> {
    secrecy_capacity_with_tol(p, DEFAULT_TOL)
}

pub fn secrecy_capacity_with_tol(p: &ChannelParams, tol: f64) -> Result<CapacityResult> {
    p.require_degraded()?;
    let (_, c_main) = single_channel_capacity(p.a_y(), p.lambda_y())?;
    let (_, c_eaves) = single_channel_capacity(p.a_z(), p.lambda_z())?;
    if !p.is_strictly_degraded()? {
        return Ok(CapacityResult {
            alpha_star: None,
            c_s: 0.0,
            c_main,
            c_eaves,
        });
    }
    let alpha = solve_alpha_star(p, tol)?;
    let c_s = two_point_gap(|x| k_gap(p, x), alpha)?;
    let closed = secrecy_capacity_closed_form(p, alpha)?;
    debug_assert!(
        (c_s - closed).abs() <= 1e-8 * c_s.abs().max(1.0),
        "two-point gap {c_s} vs closed form {closed}"
    );
    Ok(CapacityResult {
        alpha_star: Some(alpha),
        c_s: c_s.max(0.0),
        c_main,
        c_eaves,
    })
}

/// Capacity of a single peak-limited Poisson channel `a x + lambda`:
/// returns `(alpha_opt, capacity)`, maximising `G_phi` numerically.
pub fn single_channel_capacity(a: f64, lambda: f64) -> Result<(f64, f64)> {
    check_positive("a", a)?;
    check_nonnegative("lambda", lambda)?;
    let f = |x| phi(a, lambda, x);
    let slope = f(1.0)? - f(0.0)?;
    let lo = if lambda == 0.0 { LOG_SINGULARITY_FLOOR } else { 0.0 };
    let alpha = bisect_increasing(
        |x| Ok(a * (a * x + lambda).ln() + a - slope),
        lo,
        1.0,
        DEFAULT_TOL * slope.abs().max(1.0),
    )?;
    Ok((alpha, two_point_gap(f, alpha)?))
}

/// Closed-form optimal duty cycle of a single channel with dark-to-gain
/// ratio `sigma = lambda / a`: `(1 + s)^(1 + s) / (e s^s) - s`.
pub fn optimal_duty_cycle(sigma: f64) -> Result<f64> {
    check_nonnegative("sigma", sigma)?;
    Ok((xlnx(1.0 + sigma) - xlnx(sigma) - 1.0).exp() - sigma)
}

/// Secrecy capacity when both channels share the same dark-to-gain ratio
/// `sigma`, i.e. the eavesdropper sees a pure thinning of the legitimate
/// stream:
///
/// ```text
/// (l_y - l_z) ((1 + 1/s)^(1 + s) / e - (1 + s) ln(1 + 1/s))
/// ```
///
/// With `sigma = 0` this reduces to `(a_y - a_z) / e`.
pub fn matched_ratio_secrecy_capacity(p: &ChannelParams) -> Result<f64> {
    p.require_degraded()?;
    let sigma_y = p.lambda_y() / p.a_y();
    let sigma_z = p.lambda_z() / p.a_z();
    if (sigma_y - sigma_z).abs() > 1e-12 * sigma_y.max(sigma_z).max(1.0) {
        return Err(Error::Invalid(format!(
            "dark-to-gain ratios differ: {sigma_y} vs {sigma_z}"
        )));
    }
    if sigma_y == 0.0 {
        return Ok((p.a_y() - p.a_z()) / std::f64::consts::E);
    }
    let s = sigma_y;
    let inv = 1.0 + 1.0 / s;
    let per_dark = ((1.0 + s) * inv.ln() - 1.0).exp() - (1.0 + s) * inv.ln();
    Ok((p.lambda_y() - p.lambda_z()) * per_dark)
}

/// Upper bound on the input/output mutual information (nats) of a channel
/// `a x + lambda` driven by independent `{0, 1}` inputs, one interval of
/// length `interval_len` per entry of `p_on`.
pub fn mi_upper_bound(p_on: &[f64], interval_len: f64, a: f64, lambda: f64) -> Result<f64> {
    check_positive("interval_len", interval_len)?;
    check_nonnegative("lambda", lambda)?;
    p_on.iter().try_fold(0.0, |acc, &q| {
        Ok(acc + interval_len * two_point_gap(|x| phi(a, lambda, x), q)?)
    })
}
