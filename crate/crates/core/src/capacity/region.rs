//! Rate-equivocation region.
//!
//! A pair `(R, d)` is achievable iff `d <= 1` and some duty cycle `alpha`
//! has `R <= G_phi_y(alpha)` and `R d <= G_K(alpha)`. The region is kept in
//! that existential form: per-alpha bound pairs on a grid plus a membership
//! test that refines the best grid cell.

use serde::Serialize;

use super::{k_gap, phi, two_point_gap};
use crate::error::{check_nonnegative, check_unit, Error, Result};
use crate::params::ChannelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub alpha: f64,
    /// Largest rate supported at this duty cycle.
    pub r_max: f64,
    /// Largest rate-equivocation product at this duty cycle.
    pub rd_max: f64,
}

/// `(G_phi_y(alpha), G_K(alpha))`.
pub fn rate_at_alpha(p: &ChannelParams, alpha: f64) -> Result<(f64, f64)> {
    check_unit("alpha", alpha)?;
    p.require_degraded()?;
    let r = two_point_gap(|x| phi(p.a_y(), p.lambda_y(), x), alpha)?;
    let rd = two_point_gap(|x| k_gap(p, x), alpha)?;
    Ok((r, rd))
}

fn grid(n_grid: usize) -> Result<impl Iterator<Item = f64>> {
    if n_grid < 2 {
        return Err(Error::Invalid(format!("n_grid must be >= 2, got {n_grid}")));
    }
    let last = (n_grid - 1) as f64;
    Ok((0..n_grid).map(move |i| i as f64 / last))
}

pub fn region_boundary(p: &ChannelParams, n_grid: usize) -> Result<Vec<RegionPoint>> {
    p.require_degraded()?;
    grid(n_grid)?
        .map(|alpha| {
            let (r_max, rd_max) = rate_at_alpha(p, alpha)?;
            Ok(RegionPoint {
                alpha,
                r_max,
                rd_max,
            })
        })
        .collect()
}

/// Best equivocation reachable at `rate` over the sampled duty cycles:
/// `min(1, max{rd_max / rate : r_max >= rate})`. `None` when no sample
/// supports the rate.
pub fn max_equivocation(points: &[RegionPoint], rate: f64) -> Option<f64> {
    if rate <= 0.0 {
        return points.iter().any(|pt| pt.r_max >= 0.0).then_some(1.0);
    }
    points
        .iter()
        .filter(|pt| pt.r_max >= rate)
        .map(|pt| (pt.rd_max / rate).min(1.0))
        .fold(None, |best, d| Some(best.map_or(d, |b: f64| b.max(d))))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_ITERS: usize = 80;

pub fn region_contains(
    p: &ChannelParams,
    r: f64,
    d: f64,
    n_grid: usize,
    tol: f64,
) -> Result<bool> {
    check_nonnegative("r", r)?;
    check_nonnegative("d", d)?;
    check_nonnegative("tol", tol)?;
    if d > 1.0 + tol {
        return Ok(false);
    }
    // Both bounds are concave in alpha, so their pointwise minimum is too.
    let slack = |alpha: f64| -> Result<f64> {
        let (r_bound, rd_bound) = rate_at_alpha(p, alpha)?;
        Ok((r_bound - r).min(rd_bound - r * d))
    };

    let alphas: Vec<f64> = grid(n_grid)?.collect();
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &a) in alphas.iter().enumerate() {
        let s = slack(a)?;
        if s >= -tol {
            return Ok(true);
        }
        if s > best.1 {
            best = (i, s);
        }
    }

    let (mut lo, mut hi) = (
        alphas[best.0.saturating_sub(1)],
        alphas[(best.0 + 1).min(alphas.len() - 1)],
    );
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (slack(x1)?, slack(x2)?);
    for _ in 0..GOLDEN_ITERS {
        if f1.max(f2) >= -tol {
            return Ok(true);
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = slack(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = slack(x1)?;
        }
    }
    Ok(f1.max(f2) >= -tol)
}
