//! Doubly stochastic Poisson processes driven by piecewise-constant
//! intensities, and the superposition/thinning pipeline that turns the
//! legitimate receiver's stream into the eavesdropper's.
//!
//! Intervals are half-open `(start, end]`; arrivals never sit at time 0.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_nonnegative, check_positive, check_unit, Error, Result};
use crate::params::ChannelParams;

/// Peak-limited intensity waveform, constant on each segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWaveform")]
pub struct Waveform {
    horizon: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawWaveform {
    horizon: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawWaveform> for Waveform {
    type Error = Error;

    fn try_from(raw: RawWaveform) -> Result<Self> {
        Waveform::new(raw.horizon, raw.breakpoints, raw.values)
    }
}

impl Waveform {
    /// `breakpoints` must run strictly upward from 0 to `horizon` and hold
    /// one more entry than `values`.
    pub fn new(horizon: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_positive("horizon", horizon)?;
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidWaveform(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != horizon {
            return Err(Error::InvalidWaveform(
                "breakpoints must start at 0 and end at the horizon".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidWaveform(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidWaveform(format!(
                "value {v} violates the peak constraint [0, 1]"
            )));
        }
        Ok(Self {
            horizon,
            breakpoints,
            values,
        })
    }

    pub fn constant(horizon: f64, value: f64) -> Result<Self> {
        Self::new(horizon, vec![0.0, horizon], vec![value])
    }

    /// Equal-length slots, one per value.
    pub fn from_slots(horizon: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let breakpoints = equal_cuts(horizon, n);
        Self::new(horizon, breakpoints, values)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(start, end, value)` per segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    /// Fraction of the horizon spent at peak intensity.
    pub fn duty_cycle(&self) -> f64 {
        self.segments()
            .filter(|&(_, _, v)| v == 1.0)
            .map(|(s, e, _)| e - s)
            .sum::<f64>()
            / self.horizon
    }
}

/// `n + 1` cut points splitting `[0, horizon]` into equal slots; the last
/// one is the horizon exactly.
pub fn equal_cuts(horizon: f64, n: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    if let Some(last) = cuts.last_mut() {
        *last = horizon;
    }
    cuts
}

/// Sorted arrival instants of one realization on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalProcess {
    horizon: f64,
    times: Vec<f64>,
}

impl ArrivalProcess {
    pub fn new(horizon: f64, times: Vec<f64>) -> Result<Self> {
        check_positive("horizon", horizon)?;
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArrivals("times are not sorted".into()));
        }
        if let Some(t) = times.iter().find(|&&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::InvalidArrivals(format!(
                "time {t} outside (0, {horizon}]"
            )));
        }
        Ok(Self { horizon, times })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(horizon, Vec::new())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// One `time` column, one row per arrival.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time"])?;
        for t in &self.times {
            w.write_record([t.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

/// Uniform point in `(start, end]`.
fn uniform_in<R: Rng + ?Sized>(start: f64, end: f64, rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        let t = end - (end - start) * u;
        if t > start {
            return t;
        }
    }
}

/// Poisson arrivals with intensity `a * w(t) + lambda`.
///
/// Each segment gets a Poisson count with mean `(a x + lambda) L`, placed
/// uniformly in the segment and sorted.
pub fn sample_conditional_poisson<R: Rng + ?Sized>(
    w: &Waveform,
    a: f64,
    lambda: f64,
    rng: &mut R,
) -> Result<ArrivalProcess> {
    check_nonnegative("a", a)?;
    check_nonnegative("lambda", lambda)?;
    let mut times = Vec::new();
    for (start, end, x) in w.segments() {
        let n = poisson_count((a * x + lambda) * (end - start), rng);
        let first = times.len();
        times.extend((0..n).map(|_| uniform_in(start, end, rng)));
        times[first..].sort_by(f64::total_cmp);
    }
    Ok(ArrivalProcess {
        horizon: w.horizon,
        times,
    })
}

/// Homogeneous Poisson process of the given rate on `(0, horizon]`.
pub fn sample_homogeneous<R: Rng + ?Sized>(
    horizon: f64,
    rate: f64,
    rng: &mut R,
) -> Result<ArrivalProcess> {
    sample_conditional_poisson(&Waveform::constant(horizon, 0.0)?, 0.0, rate, rng)
}

/// Independently keeps each arrival with probability `keep_prob`; returns
/// `(kept, erased)`.
pub fn thin<R: Rng + ?Sized>(
    proc: &ArrivalProcess,
    keep_prob: f64,
    rng: &mut R,
) -> Result<(ArrivalProcess, ArrivalProcess)> {
    check_unit("keep_prob", keep_prob)?;
    let (kept, erased): (Vec<f64>, Vec<f64>) = proc
        .times
        .iter()
        .copied()
        .partition(|_| rng.random::<f64>() < keep_prob);
    Ok((
        ArrivalProcess {
            horizon: proc.horizon,
            times: kept,
        },
        ArrivalProcess {
            horizon: proc.horizon,
            times: erased,
        },
    ))
}

pub fn superpose(p1: &ArrivalProcess, p2: &ArrivalProcess) -> Result<ArrivalProcess> {
    if p1.horizon != p2.horizon {
        return Err(Error::HorizonMismatch {
            left: p1.horizon,
            right: p2.horizon,
        });
    }
    let mut times = Vec::with_capacity(p1.len() + p2.len());
    let (mut i, mut j) = (0, 0);
    while i < p1.len() && j < p2.len() {
        if p1.times[i] <= p2.times[j] {
            times.push(p1.times[i]);
            i += 1;
        } else {
            times.push(p2.times[j]);
            j += 1;
        }
    }
    times.extend_from_slice(&p1.times[i..]);
    times.extend_from_slice(&p2.times[j..]);
    Ok(ArrivalProcess {
        horizon: p1.horizon,
        times,
    })
}

/// Eavesdropper's observation from the legitimate one: add independent
/// dark counts at the auxiliary rate, then thin with keep probability
/// `a_z / a_y`.
pub fn degrade<R: Rng + ?Sized>(
    y: &ArrivalProcess,
    p: &ChannelParams,
    rng: &mut R,
) -> Result<ArrivalProcess> {
    let aux_rate = p.auxiliary_dark_rate()?;
    let keep = p.thinning_keep_prob()?;
    let extra = sample_homogeneous(y.horizon, aux_rate, rng)?;
    let merged = superpose(y, &extra)?;
    Ok(thin(&merged, keep, rng)?.0)
}

/// Arrivals per interval `(cuts[i], cuts[i + 1]]`.
pub fn count_in_intervals(proc: &ArrivalProcess, cuts: &[f64]) -> Result<Vec<usize>> {
    let in_range = cuts.iter().all(|&c| (0.0..=proc.horizon).contains(&c));
    if !in_range || cuts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedCuts {
            horizon: proc.horizon,
        });
    }
    let at_or_below = |c: f64| proc.times.partition_point(|&t| t <= c);
    Ok(cuts
        .windows(2)
        .map(|w| at_or_below(w[1]) - at_or_below(w[0]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn check_invariants(p: &ArrivalProcess) {
        assert!(p.times.windows(2).all(|w| w[0] <= w[1]));
        assert!(p.times.iter().all(|&t| t > 0.0 && t <= p.horizon));
    }

    #[test]
    fn waveform_validation() {
        assert!(Waveform::new(2.0, vec![0.0, 1.0, 2.0], vec![1.0, 0.0]).is_ok());
        assert!(Waveform::new(2.0, vec![0.0, 1.0, 2.0], vec![1.5, 0.0]).is_err());
        assert!(Waveform::new(2.0, vec![0.0, 1.0, 1.0, 2.0], vec![1.0, 0.0, 1.0]).is_err());
        assert!(Waveform::new(2.0, vec![0.0, 1.0, 1.9], vec![1.0, 0.0]).is_err());
        assert!(Waveform::new(2.0, vec![0.0, 2.0], vec![1.0, 0.0]).is_err());
        let w: Waveform =
            serde_json::from_str(r#"{"horizon":2,"breakpoints":[0,1,2],"values":[1,0]}"#).unwrap();
        assert_eq!(w.duty_cycle(), 0.5);
    }

    #[test]
    fn zero_intensity_is_empty() {
        let w = Waveform::constant(10.0, 0.0).unwrap();
        let mut rng = stream(1, 0);
        for _ in 0..100 {
            assert!(sample_conditional_poisson(&w, 3.0, 0.0, &mut rng).unwrap().is_empty());
        }
        assert!(sample_conditional_poisson(&w, -1.0, 0.0, &mut rng).is_err());
        assert!(sample_conditional_poisson(&w, 1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn samples_respect_invariants_and_seed() {
        let w = Waveform::from_slots(5.0, vec![1.0, 0.0, 0.5, 1.0, 0.0]).unwrap();
        let a = sample_conditional_poisson(&w, 4.0, 1.0, &mut stream(9, 2)).unwrap();
        let b = sample_conditional_poisson(&w, 4.0, 1.0, &mut stream(9, 2)).unwrap();
        check_invariants(&a);
        assert_eq!(a, b);
        assert!(a.times().iter().zip(b.times()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn thinning_extremes() {
        let w = Waveform::constant(10.0, 1.0).unwrap();
        let mut rng = stream(3, 0);
        let p = sample_conditional_poisson(&w, 2.0, 0.5, &mut rng).unwrap();
        let (kept, erased) = thin(&p, 1.0, &mut rng).unwrap();
        assert_eq!(kept, p);
        assert!(erased.is_empty());
        let (kept, erased) = thin(&p, 0.0, &mut rng).unwrap();
        assert!(kept.is_empty());
        assert_eq!(erased, p);
        let (kept, erased) = thin(&p, 0.3, &mut rng).unwrap();
        check_invariants(&kept);
        check_invariants(&erased);
        assert_eq!(superpose(&kept, &erased).unwrap(), p);
        assert!(thin(&p, 1.1, &mut rng).is_err());
    }

    #[test]
    fn superposition_basics() {
        let p = ArrivalProcess::new(3.0, vec![0.5, 1.0, 2.5]).unwrap();
        let q = ArrivalProcess::new(3.0, vec![0.7, 3.0]).unwrap();
        let e = ArrivalProcess::empty(3.0).unwrap();
        assert_eq!(superpose(&p, &e).unwrap(), p);
        let s = superpose(&p, &q).unwrap();
        assert_eq!(s.times(), &[0.5, 0.7, 1.0, 2.5, 3.0]);
        assert_eq!(s.len(), p.len() + q.len());
        let other = ArrivalProcess::empty(4.0).unwrap();
        assert!(matches!(superpose(&p, &other), Err(Error::HorizonMismatch { .. })));
    }

    #[test]
    fn degrade_identity_channel() {
        let w = Waveform::from_slots(4.0, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let p = ChannelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let mut rng = stream(5, 0);
        let y = sample_conditional_poisson(&w, 1.0, 1.0, &mut rng).unwrap();
        assert_eq!(degrade(&y, &p, &mut rng).unwrap(), y);
        let bad = ChannelParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(degrade(&y, &bad, &mut rng).is_err());
    }

    #[test]
    fn counting() {
        let e = ArrivalProcess::empty(2.0).unwrap();
        assert_eq!(count_in_intervals(&e, &[0.0, 1.0, 2.0]).unwrap(), vec![0, 0]);
        let p = ArrivalProcess::new(2.0, vec![0.5, 1.5, 1.6]).unwrap();
        assert_eq!(count_in_intervals(&p, &[0.0, 1.0, 2.0]).unwrap(), vec![1, 2]);
        // Right-closed intervals.
        let q = ArrivalProcess::new(2.0, vec![1.0, 2.0]).unwrap();
        assert_eq!(count_in_intervals(&q, &[0.0, 1.0, 2.0]).unwrap(), vec![1, 1]);
        assert!(count_in_intervals(&p, &[0.0, 1.5, 1.0]).is_err());
        assert!(count_in_intervals(&p, &[0.0, 2.5]).is_err());
    }

    #[test]
    fn arrival_validation_and_csv() {
        assert!(ArrivalProcess::new(1.0, vec![0.5, 0.2]).is_err());
        assert!(ArrivalProcess::new(1.0, vec![0.0]).is_err());
        assert!(ArrivalProcess::new(1.0, vec![1.0]).is_ok());
        let p = ArrivalProcess::new(2.0, vec![0.25, 1.5]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time\n0.25\n1.5\n");
    }

    #[test]
    fn equal_cuts_end_exactly() {
        let c = equal_cuts(1.0, 3);
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[3], 1.0);
    }
}
