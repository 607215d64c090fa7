//! Infinite-bandwidth Gaussian wiretap comparison.
//!
//! With noise levels `n1` (legitimate) and `n1 + n2` (eavesdropper) the
//! wideband secrecy capacity is `P / n1 - P / (n1 + n2)`. At finite
//! bandwidth `B` only a sandwich is available:
//!
//! ```text
//! B ln(1 + P/(B n1)) - B ln(1 + P/(B (n1 + n2)))  <=  C_s(B)  <=  B ln(1 + P/(B n~))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussian")]
pub struct GaussianParams {
    power: f64,
    n1: f64,
    n2: f64,
}

#[derive(Deserialize)]
struct RawGaussian {
    power: f64,
    n1: f64,
    n2: f64,
}

impl TryFrom<RawGaussian> for GaussianParams {
    type Error = Error;

    fn try_from(raw: RawGaussian) -> Result<Self> {
        GaussianParams::new(raw.power, raw.n1, raw.n2)
    }
}

impl GaussianParams {
    pub fn new(power: f64, n1: f64, n2: f64) -> Result<Self> {
        check_positive("power", power)?;
        check_positive("n1", n1)?;
        check_positive("n2", n2)?;
        Ok(Self { power, n1, n2 })
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn n1(&self) -> f64 {
        self.n1
    }

    pub fn n2(&self) -> f64 {
        self.n2
    }
}

/// `1 / (1/n1 - 1/(n1 + n2)) = n1 (n1 + n2) / n2`.
pub fn n_tilde(g: &GaussianParams) -> f64 {
    g.n1 * (g.n1 + g.n2) / g.n2
}

pub fn gaussian_cs_infinite(g: &GaussianParams) -> f64 {
    g.power / n_tilde(g)
}

/// `B ln(1 + P / (B n))`, computed without cancellation at large `B`.
fn wideband_rate(b: f64, power: f64, noise: f64) -> f64 {
    b * (power / (b * noise)).ln_1p()
}

/// Returns `(lower, upper)` bounds on the bandwidth-`b` secrecy capacity.
pub fn gaussian_cs_bounds_finite(g: &GaussianParams, b: f64) -> Result<(f64, f64)> {
    check_positive("bandwidth", b)?;
    let lower = wideband_rate(b, g.power, g.n1) - wideband_rate(b, g.power, g.n1 + g.n2);
    let upper = wideband_rate(b, g.power, n_tilde(g));
    Ok((lower, upper))
}
