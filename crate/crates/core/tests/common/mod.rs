//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics; the oracles are written
//! from the definitions so agreement is meaningful.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Smallest acceptable p-value for goodness-of-fit tests.
pub const P_MIN: f64 = 1e-3;
/// Band, in standard errors, for sample means.
pub const MEAN_BAND: f64 = 3.0;
/// Band, in standard errors, for sample covariances.
pub const COV_BAND: f64 = 4.0;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn xlnx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// `K(x)` straight from the definition.
pub fn k_ref(p: (f64, f64, f64, f64), x: f64) -> f64 {
    let (ay, ly, az, lz) = p;
    xlnx(ay * x + ly) - xlnx(az * x + lz)
}

/// Brute-force maximizer of `alpha K(1) + (1 - alpha) K(0) - K(alpha)` on
/// the uniform grid of `steps + 1` points. Returns `(alpha, gap)`.
pub fn grid_argmax_gap(p: (f64, f64, f64, f64), steps: u64) -> (f64, f64) {
    let (k0, k1) = (k_ref(p, 0.0), k_ref(p, 1.0));
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let a = i as f64 / steps as f64;
        let g = a * k1 + (1.0 - a) * k0 - k_ref(p, a);
        if g > best.1 {
            best = (a, g);
        }
    }
    best
}

/// All k-subsets of `0..m` in lexicographic order, by plain recursion.
pub fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Slot index of an arrival at time `t` for slots `((j-1) L, j L]`.
pub fn slot_of(t: f64, slot_len: f64, n_slots: usize) -> usize {
    ((t / slot_len).ceil() as usize).clamp(1, n_slots) - 1
}

/// Poisson log-likelihood of per-slot counts given per-slot means, up to
/// the factorial term. `-inf` when a zero-mean slot has arrivals.
pub fn poisson_loglik(counts: &[usize], means: &[f64]) -> f64 {
    counts
        .iter()
        .zip(means)
        .map(|(&c, &mu)| {
            if c == 0 {
                -mu
            } else if mu == 0.0 {
                f64::NEG_INFINITY
            } else {
                c as f64 * mu.ln() - mu
            }
        })
        .sum()
}

/// Exact ML row for a constant-weight code: argmax of the Poisson
/// likelihood, near-ties (within `1e-9` relative) to the smallest row.
pub fn ml_oracle(columns: &[Vec<usize>], m_rows: usize, counts: &[usize], mean_on: f64, mean_off: f64) -> usize {
    let ll: Vec<f64> = (0..m_rows)
        .map(|m| {
            let means: Vec<f64> = columns
                .iter()
                .map(|c| if c.contains(&m) { mean_on } else { mean_off })
                .collect();
            poisson_loglik(counts, &means)
        })
        .collect();
    let best = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-9 * best.abs().max(1.0);
    ll.iter().position(|&l| l >= best - tie).unwrap()
}

/// Plug-in Monte Carlo estimate of `I(U; Z)` in nats for the constant-weight
/// code with `n_messages` contiguous equal blocks of rows. Returns
/// `(mean, standard_error)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_leakage(
    m_rows: usize,
    k_ones: usize,
    horizon: f64,
    n_messages: usize,
    a_z: f64,
    lambda_z: f64,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let cols = k_subsets(m_rows, k_ones);
    let slot_len = horizon / cols.len() as f64;
    let (mean_on, mean_off) = ((a_z + lambda_z) * slot_len, lambda_z * slot_len);
    let block = m_rows / n_messages;
    let row_means: Vec<Vec<f64>> = (0..m_rows)
        .map(|m| {
            cols.iter()
                .map(|c| if c.contains(&m) { mean_on } else { mean_off })
                .collect()
        })
        .collect();
    let on = Poisson::new(mean_on).ok();
    let off = Poisson::new(mean_off).ok();
    let draw = |mu: f64, rng: &mut ChaCha8Rng| -> usize {
        let d = if mu == mean_on { &on } else { &off };
        d.as_ref().map_or(0, |d| d.sample(rng) as usize)
    };
    let (mut s, mut s2) = (0.0, 0.0);
    let mut counts = vec![0; cols.len()];
    for _ in 0..samples {
        let u = rng.random_range(0..n_messages);
        let row = u * block + rng.random_range(0..block);
        for (c, &mu) in counts.iter_mut().zip(&row_means[row]) {
            *c = draw(mu, rng);
        }
        let ll: Vec<f64> = row_means.iter().map(|m| poisson_loglik(&counts, m)).collect();
        let peak = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ll.iter().map(|l| (l - peak).exp()).collect();
        let total: f64 = w.iter().sum();
        let own: f64 = w[u * block..(u + 1) * block].iter().sum();
        let x = (own / total).ln() + (n_messages as f64).ln();
        s += x;
        s2 += x * x;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample chi-square homogeneity statistic for equal sample sizes.
/// Adjacent values are pooled until each bin holds at least 20 combined
/// observations. Returns `(statistic, degrees_of_freedom)`.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "equal sample sizes required");
    let mut hist: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for &x in a {
        hist.entry(x).or_default().0 += 1.0;
    }
    for &x in b {
        hist.entry(x).or_default().1 += 1.0;
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (_, (x, y)) in hist {
        acc.0 += x;
        acc.1 += y;
        if acc.0 + acc.1 >= 20.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    let stat = bins.iter().map(|(x, y)| (x - y).powi(2) / (x + y)).sum();
    (stat, (bins.len() - 1) as f64)
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Goodness of fit of observed category counts to a uniform law.
pub fn uniform_gof_pvalue(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    chi_square_sf(stat, (counts.len() - 1) as f64)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}
