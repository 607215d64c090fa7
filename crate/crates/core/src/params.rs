//! Physical channel parameters and the degradedness test.
//!
//! The legitimate receiver sees a doubly stochastic Poisson process with
//! intensity `a_y * x(t) + lambda_y`, the eavesdropper one with intensity
//! `a_z * x(t) + lambda_z`. The eavesdropper is stochastically degraded when
//! its stream can be produced from the legitimate one by adding independent
//! dark counts at rate `(a_y / a_z) * lambda_z - lambda_y` and then thinning
//! with keep probability `a_z / a_y`; that requires
//!
//! ```text
//! a_y >= a_z    and    lambda_y <= (a_y / a_z) * lambda_z
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, Error, Result};

/// Relative tolerance for the degradedness comparisons.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ChannelParams {
    a_y: f64,
    lambda_y: f64,
    a_z: f64,
    lambda_z: f64,
}

#[derive(Deserialize)]
struct RawParams {
    a_y: f64,
    lambda_y: f64,
    a_z: f64,
    lambda_z: f64,
}

impl TryFrom<RawParams> for ChannelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ChannelParams::new(raw.a_y, raw.lambda_y, raw.a_z, raw.lambda_z)
    }
}

impl ChannelParams {
    /// Validates field ranges only; the pair may or may not be degraded.
    pub fn new(a_y: f64, lambda_y: f64, a_z: f64, lambda_z: f64) -> Result<Self> {
        check_positive("a_y", a_y)?;
        check_nonnegative("lambda_y", lambda_y)?;
        check_positive("a_z", a_z)?;
        check_nonnegative("lambda_z", lambda_z)?;
        Ok(Self {
            a_y,
            lambda_y,
            a_z,
            lambda_z,
        })
    }

    /// Like [`ChannelParams::new`] but also rejects non-degraded pairs.
    pub fn degraded(a_y: f64, lambda_y: f64, a_z: f64, lambda_z: f64) -> Result<Self> {
        let p = Self::new(a_y, lambda_y, a_z, lambda_z)?;
        p.require_degraded()?;
        Ok(p)
    }

    pub fn a_y(&self) -> f64 {
        self.a_y
    }

    pub fn lambda_y(&self) -> f64 {
        self.lambda_y
    }

    pub fn a_z(&self) -> f64 {
        self.a_z
    }

    pub fn lambda_z(&self) -> f64 {
        self.lambda_z
    }

    pub fn is_degraded(&self) -> bool {
        self.is_degraded_with_tol(DEFAULT_REL_TOL)
    }

    pub fn is_degraded_with_tol(&self, rel_tol: f64) -> bool {
        // lambda_y <= (a_y / a_z) lambda_z, cross-multiplied.
        approx_ge(self.a_y, self.a_z, rel_tol)
            && approx_ge(self.a_y * self.lambda_z, self.lambda_y * self.a_z, rel_tol)
    }

    /// At least one of the two degradedness inequalities is strict.
    pub fn is_strictly_degraded(&self) -> Result<bool> {
        self.is_strictly_degraded_with_tol(DEFAULT_REL_TOL)
    }

    pub fn is_strictly_degraded_with_tol(&self, rel_tol: f64) -> Result<bool> {
        if !self.is_degraded_with_tol(rel_tol) {
            return Err(self.not_degraded());
        }
        let gains_equal = approx_eq(self.a_y, self.a_z, rel_tol);
        let darks_equal = approx_eq(self.a_y * self.lambda_z, self.lambda_y * self.a_z, rel_tol);
        Ok(!(gains_equal && darks_equal))
    }

    /// Rate of the independent homogeneous process added before thinning.
    pub fn auxiliary_dark_rate(&self) -> Result<f64> {
        self.require_degraded()?;
        let rate = self.a_y / self.a_z * self.lambda_z - self.lambda_y;
        // Within-tolerance negatives are boundary cases.
        Ok(rate.max(0.0))
    }

    /// Keep probability `a_z / a_y` of the thinning step.
    pub fn thinning_keep_prob(&self) -> Result<f64> {
        self.require_degraded()?;
        Ok((self.a_z / self.a_y).min(1.0))
    }

    pub(crate) fn require_degraded(&self) -> Result<()> {
        if self.is_degraded() {
            Ok(())
        } else {
            Err(self.not_degraded())
        }
    }

    fn not_degraded(&self) -> Error {
        let reason = if !approx_ge(self.a_y, self.a_z, DEFAULT_REL_TOL) {
            format!("a_y = {} < a_z = {}", self.a_y, self.a_z)
        } else {
            format!(
                "lambda_y = {} > (a_y/a_z) lambda_z = {}",
                self.lambda_y,
                self.a_y / self.a_z * self.lambda_z
            )
        };
        Error::NotDegraded(reason)
    }
}

/// Total function form of the degradedness test.
pub fn check_degraded(p: &ChannelParams) -> bool {
    p.is_degraded()
}

pub fn is_strictly_degraded(p: &ChannelParams) -> Result<bool> {
    p.is_strictly_degraded()
}

pub fn auxiliary_dark_rate(p: &ChannelParams) -> Result<f64> {
    p.auxiliary_dark_rate()
}

pub fn thinning_keep_prob(p: &ChannelParams) -> Result<f64> {
    p.thinning_keep_prob()
}

fn approx_ge(a: f64, b: f64, rel_tol: f64) -> bool {
    a >= b - rel_tol * a.abs().max(b.abs())
}

fn approx_eq(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}
