//! Small-instance evaluation of Wyner wiretap codes.
//!
//! * legitimate-receiver error probability by Monte Carlo with Wilson
//!   score intervals;
//! * exact leakage `I(U; Z)` to the eavesdropper, using per-slot arrival
//!   counts as a sufficient statistic and enumerating count vectors over a
//!   truncated support with a rigorous bound on the neglected part;
//! * equivocation and the Fano-type leakage bound driven by the measured
//!   subcode error rate;
//! * CSV sweeps over grids of configurations.

use std::io::Write;
use std::ops::Range;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::mi_upper_bound;
use crate::error::{check_positive, check_unit, Error, Result};
use crate::params::ChannelParams;
use crate::pointprocess::{poisson_count, sample_conditional_poisson, Waveform};
use crate::rng::row_stream;
use crate::wyner::{encode_row, ml_decode_among, partition, SubcodePartition, WynerCode};

/// Largest number of count vectors enumerated by [`exact_leakage`].
pub const ATOM_BUDGET: f64 = 1e8;

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const MAX_EPSILON: f64 = 1e-3;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Stream purposes within a sweep row.
pub const PURPOSE_PE: u64 = 0;
pub const PURPOSE_SUBCODE: u64 = 1;
pub const PURPOSE_LEAKAGE: u64 = 2;

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ChannelParams,
    #[serde(rename = "m")]
    pub m_rows: usize,
    #[serde(rename = "k")]
    pub k_ones: usize,
    #[serde(rename = "t")]
    pub horizon: f64,
    pub n_messages: usize,
    pub trials: u64,
    /// Overrides the sweep's master seed for this row.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Total tail mass allowed outside the enumerated support.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must lie in (0, 1e-3]",
            });
        }
        Ok(())
    }

    /// Builds the code and its message partition.
    pub fn setup(&self) -> Result<(WynerCode, SubcodePartition)> {
        self.validate()?;
        let code = WynerCode::build(self.m_rows, self.k_ones, self.horizon)?;
        let part = partition(&code, self.n_messages)?;
        Ok((code, part))
    }
}

/// Monte Carlo probability with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbEstimate {
    pub events: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ProbEstimate {
    pub fn from_counts(events: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(events, trials, Z_95);
        Self {
            events,
            trials,
            estimate: events as f64 / trials as f64,
            lo,
            hi,
        }
    }

    /// Exactly known probability, zero-width interval.
    pub fn exact(p: f64) -> Self {
        Self {
            events: 0,
            trials: 0,
            estimate: p,
            lo: p,
            hi: p,
        }
    }

    /// Upper limit of the two-sided interval with normal quantile `z`.
    pub fn upper(&self, z: f64) -> f64 {
        if self.trials == 0 {
            self.hi
        } else {
            wilson_interval(self.events, self.trials, z).1
        }
    }
}

/// Wilson score interval for `events` successes out of `trials`.
pub fn wilson_interval(events: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if events == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if events == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

fn codeword_waveforms(code: &WynerCode) -> Result<Vec<Waveform>> {
    (0..code.m_rows()).map(|m| code.codeword_waveform(m)).collect()
}

/// Message error probability of the legitimate receiver.
pub fn estimate_pe<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Result<ProbEstimate> {
    let (code, part) = cfg.setup()?;
    let waveforms = codeword_waveforms(&code)?;
    let p = &cfg.params;
    let mut errors = 0;
    for _ in 0..cfg.trials {
        let message = rng.random_range(0..part.n_messages());
        let row = encode_row(&part, message, rng)?;
        let y = sample_conditional_poisson(&waveforms[row], p.a_y(), p.lambda_y(), rng)?;
        let decoded = ml_decode_among(&code, &y, 0..code.m_rows())?;
        if part.message_of(decoded) != message {
            errors += 1;
        }
    }
    Ok(ProbEstimate::from_counts(errors, cfg.trials))
}

fn subcode_trials<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    code: &WynerCode,
    part: &SubcodePartition,
    mut pick_message: impl FnMut(&mut R) -> usize,
    rng: &mut R,
) -> Result<ProbEstimate> {
    if part.block_size() == 1 {
        return Ok(ProbEstimate::exact(0.0));
    }
    let waveforms = codeword_waveforms(code)?;
    let p = &cfg.params;
    let mut errors = 0;
    for _ in 0..cfg.trials {
        let message = pick_message(rng);
        let block = part.block(message)?;
        let row = encode_row(part, message, rng)?;
        let z = sample_conditional_poisson(&waveforms[row], p.a_z(), p.lambda_z(), rng)?;
        if ml_decode_among(code, &z, block)? != row {
            errors += 1;
        }
    }
    Ok(ProbEstimate::from_counts(errors, cfg.trials))
}

/// Error rate of decoding the codeword within one message's subcode from
/// the eavesdropper's observation, the message being known.
pub fn subcode_error<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    message: usize,
    rng: &mut R,
) -> Result<ProbEstimate> {
    let (code, part) = cfg.setup()?;
    part.block(message)?;
    subcode_trials(cfg, &code, &part, |_| message, rng)
}

/// [`subcode_error`] averaged over a uniformly random message.
pub fn mean_subcode_error<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<ProbEstimate> {
    let (code, part) = cfg.setup()?;
    let n = part.n_messages();
    subcode_trials(cfg, &code, &part, |r: &mut R| r.random_range(0..n), rng)
}

/// Binary entropy in nats, `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() };
    h(p) + h(1.0 - p)
}

/// `r_z - (1/t) [ln m_z - (H(delta) + delta ln m_z)]`, in nats per unit
/// time: leakage rate bound of a code whose subcodes of size `m_z` are
/// decodable by the eavesdropper with error `delta`, given the rate bound
/// `r_z` on the codeword-level information reaching the eavesdropper.
pub fn fano_leakage_bound(r_z: f64, m_z: u64, delta: f64, t: f64) -> Result<f64> {
    check_unit("delta", delta)?;
    check_positive("t", t)?;
    if m_z == 0 {
        return Err(Error::Invalid("subcode size must be >= 1".into()));
    }
    let ln_m = (m_z as f64).ln();
    Ok(r_z - (ln_m - (binary_entropy(delta) + delta * ln_m)) / t)
}

/// Codeword-level information bound `I(X; Z)` (nats) for the whole
/// codebook under uniform codeword selection.
pub fn codebook_mi_bound(cfg: &ExperimentConfig) -> Result<f64> {
    let (code, _) = cfg.setup()?;
    let m = code.m_rows() as f64;
    let p_on: Vec<f64> = if code.is_dense() {
        (0..code.n_cols())
            .map(|n| code.column(n).len() as f64 / m)
            .collect()
    } else {
        // Every column has weight k.
        vec![code.k_ones() as f64 / m; code.n_cols() as usize]
    };
    mi_upper_bound(&p_on, code.slot_len(), cfg.params.a_z(), cfg.params.lambda_z())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageResult {
    /// Sum over the enumerated support; never exceeds the true leakage.
    pub leakage: f64,
    /// The true leakage lies in `[leakage, leakage + error_bound]`.
    pub error_bound: f64,
    /// `H(U | Z)` summed over the same support.
    pub conditional_entropy: f64,
    /// Probability mass of the enumerated support.
    pub captured_mass: f64,
    /// Analytic mass outside the support.
    pub residual_mass: f64,
    /// Largest per-slot count enumerated.
    pub max_count: usize,
    pub atoms: f64,
}

/// `Poisson(mean)` log-pmf table for counts `0..=max`.
fn ln_pmf_table(mean: f64, max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut ln_fact = 0.0;
    for c in 0..=max {
        if c > 0 {
            ln_fact += (c as f64).ln();
        }
        out.push(if mean == 0.0 {
            if c == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            c as f64 * mean.ln() - mean - ln_fact
        });
    }
    out
}

/// `P(N > c)` for `N ~ Poisson(mean)`, summed term by term.
fn poisson_upper_tail(mean: f64, c: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut ln_term = {
        let j = (c + 1) as f64;
        j * mean.ln() - mean - ln_gamma_int(c + 2)
    };
    let mut sum = 0.0;
    let mut j = c + 1;
    loop {
        let term = ln_term.exp();
        sum += term;
        if j as f64 > mean && term <= sum * 1e-17 {
            return sum;
        }
        j += 1;
        ln_term += mean.ln() - (j as f64).ln();
    }
}

/// `ln((n - 1)!)`.
fn ln_gamma_int(n: usize) -> f64 {
    (2..n).map(|i| (i as f64).ln()).sum()
}

/// Smallest `c` with `P(N > c) < target`.
fn truncation_point(mean: f64, target: f64) -> usize {
    let mut c = mean.floor() as usize;
    while poisson_upper_tail(mean, c) >= target {
        c += 1;
    }
    c
}

/// Exact `I(U; Z)` over the truncated count support.
///
/// Each slot's count is enumerated up to the smallest `c` whose Poisson
/// upper tail (at the larger of the two slot means) is below
/// `epsilon / n_cols`. Posteriors `P(u | z)` are exact at every enumerated
/// `z`, so the partial sum under-counts the true value by the neglected
/// atoms' contribution, each at most `ln(n_messages)` times its mass.
pub fn exact_leakage(cfg: &ExperimentConfig) -> Result<LeakageResult> {
    let (code, part) = cfg.setup()?;
    let n_slots = code.n_cols() as usize;
    let mean_off = cfg.params.lambda_z() * code.slot_len();
    let mean_on = (cfg.params.a_z() + cfg.params.lambda_z()) * code.slot_len();
    let max_count = truncation_point(mean_on, cfg.epsilon / n_slots as f64);
    let atoms = ((max_count + 1) as f64).powi(n_slots as i32);
    if atoms.is_nan() || atoms > ATOM_BUDGET {
        return Err(Error::BudgetExceeded {
            atoms,
            budget: ATOM_BUDGET,
        });
    }

    let pmf_on: Vec<f64> = ln_pmf_table(mean_on, max_count).iter().map(|l| l.exp()).collect();
    let pmf_off: Vec<f64> = ln_pmf_table(mean_off, max_count).iter().map(|l| l.exp()).collect();
    let m_rows = code.m_rows();
    let on: Vec<Vec<bool>> = (0..n_slots as u64)
        .map(|n| (0..m_rows).map(|m| code.entry(m, n)).collect())
        .collect();
    let blocks: Vec<Range<usize>> = (0..part.n_messages())
        .map(|u| part.block(u))
        .collect::<Result<_>>()?;

    let mut acc = Accumulator {
        row_weight: 1.0 / m_rows as f64,
        ln_messages: (part.n_messages() as f64).ln(),
        blocks: &blocks,
        joint: vec![0.0; blocks.len()],
        leakage: 0.0,
        cond_entropy: 0.0,
        mass: 0.0,
    };
    let mut levels = vec![vec![1.0; m_rows]; n_slots + 1];
    enumerate(&on, &pmf_on, &pmf_off, &mut levels, &mut acc);

    // Per-row outside mass, identical for every row of a constant-weight code
    // but computed per row anyway.
    let tail_on = poisson_upper_tail(mean_on, max_count);
    let tail_off = poisson_upper_tail(mean_off, max_count);
    let residual_mass = (0..m_rows)
        .map(|m| {
            let ln_inside: f64 = on
                .iter()
                .map(|col| (-if col[m] { tail_on } else { tail_off }).ln_1p())
                .sum();
            -ln_inside.exp_m1()
        })
        .sum::<f64>()
        / m_rows as f64;

    Ok(LeakageResult {
        leakage: acc.leakage.max(0.0),
        error_bound: residual_mass * acc.ln_messages,
        conditional_entropy: acc.cond_entropy,
        captured_mass: acc.mass,
        residual_mass,
        max_count,
        atoms,
    })
}

struct Accumulator<'a> {
    row_weight: f64,
    ln_messages: f64,
    blocks: &'a [Range<usize>],
    joint: Vec<f64>,
    leakage: f64,
    cond_entropy: f64,
    mass: f64,
}

impl Accumulator<'_> {
    fn leaf(&mut self, lik: &[f64]) {
        let mut total = 0.0;
        for (j, block) in self.joint.iter_mut().zip(self.blocks) {
            *j = lik[block.clone()].iter().sum::<f64>() * self.row_weight;
            total += *j;
        }
        if total <= 0.0 {
            return;
        }
        self.mass += total;
        for &j in &self.joint {
            if j > 0.0 {
                let ln_post = (j / total).ln();
                self.leakage += j * (ln_post + self.ln_messages);
                self.cond_entropy -= j * ln_post;
            }
        }
    }
}

/// Depth-first walk over count vectors; `levels[0]` holds the per-row
/// likelihood of the prefix enumerated so far.
fn enumerate(
    on: &[Vec<bool>],
    pmf_on: &[f64],
    pmf_off: &[f64],
    levels: &mut [Vec<f64>],
    acc: &mut Accumulator<'_>,
) {
    let (current, rest) = levels.split_first_mut().expect("one level per slot plus root");
    let Some((column, remaining)) = on.split_first() else {
        acc.leaf(current);
        return;
    };
    for c in 0..pmf_on.len() {
        let mut any = false;
        for (m, next) in rest[0].iter_mut().enumerate() {
            let p = if column[m] { pmf_on[c] } else { pmf_off[c] };
            *next = current[m] * p;
            any |= *next > 0.0;
        }
        if any {
            enumerate(remaining, pmf_on, pmf_off, rest, acc);
        }
    }
}

/// Monte Carlo estimate of `I(U; Z)` averaging the exact log-posterior
/// ratio over sampled `(u, z)`. Returns `(estimate, standard_error)`.
pub fn sampled_leakage<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let (code, part) = cfg.setup()?;
    if samples < 2 {
        return Err(Error::Invalid("need at least 2 samples".into()));
    }
    let n_slots = code.n_cols() as usize;
    let mean_off = cfg.params.lambda_z() * code.slot_len();
    let mean_on = (cfg.params.a_z() + cfg.params.lambda_z()) * code.slot_len();
    let ln_messages = (part.n_messages() as f64).ln();
    let on: Vec<Vec<bool>> = (0..n_slots as u64)
        .map(|n| (0..code.m_rows()).map(|m| code.entry(m, n)).collect())
        .collect();
    let mut counts = vec![0usize; n_slots];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let message = rng.random_range(0..part.n_messages());
        let row = encode_row(&part, message, rng)?;
        for (n, c) in counts.iter_mut().enumerate() {
            let mean = if on[n][row] { mean_on } else { mean_off };
            *c = poisson_count(mean, rng) as usize;
        }
        // Row log-likelihoods up to the common factorial term.
        let ln_lik: Vec<f64> = (0..code.m_rows())
            .map(|m| {
                on.iter()
                    .zip(&counts)
                    .map(|(col, &c)| {
                        let mean = if col[m] { mean_on } else { mean_off };
                        if c == 0 {
                            -mean
                        } else {
                            c as f64 * mean.ln() - mean
                        }
                    })
                    .sum()
            })
            .collect();
        let peak = ln_lik.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mass = |range: Range<usize>| -> f64 {
            ln_lik[range].iter().map(|l| (l - peak).exp()).sum()
        };
        let total: f64 = mass(0..code.m_rows());
        let own = mass(part.block(message)?);
        let x = (own / total).ln() + ln_messages;
        sum += x;
        sum_sq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivocation {
    pub value: f64,
    /// The unclamped value fell outside `[0, 1]`.
    pub clamped: bool,
}

/// `1 - leakage / ln(n_messages)`, clamped to `[0, 1]`.
pub fn equivocation_from_leakage(leakage: f64, n_messages: usize) -> Result<Equivocation> {
    if n_messages <= 1 {
        return Err(Error::SingleMessage);
    }
    let raw = 1.0 - leakage / (n_messages as f64).ln();
    let value = raw.clamp(0.0, 1.0);
    Ok(Equivocation {
        value,
        clamped: value != raw,
    })
}

pub fn equivocation(cfg: &ExperimentConfig) -> Result<Equivocation> {
    if cfg.n_messages <= 1 {
        return Err(Error::SingleMessage);
    }
    equivocation_from_leakage(exact_leakage(cfg)?.leakage, cfg.n_messages)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub pe: ProbEstimate,
    pub leakage_nats: f64,
    pub leakage_err: f64,
    /// `false` when the enumeration budget forced a sampled estimate;
    /// `leakage_err` is then three standard errors.
    pub leakage_exact: bool,
    pub equivocation: Option<Equivocation>,
    pub subcode_error: ProbEstimate,
    /// Codeword-level information bound, nats.
    pub mi_bound_nats: f64,
    /// Fano-type leakage bound, nats per unit time.
    pub fano_bound: f64,
    pub elapsed_secs: f64,
}

/// Runs every measurement for one configuration. Streams are drawn from
/// `(cfg.seed or master_seed, row)`.
pub fn run_experiment(cfg: &ExperimentConfig, master_seed: u64, row: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let (_, part) = cfg.setup()?;
    let seed = cfg.seed.unwrap_or(master_seed);

    let pe = estimate_pe(cfg, &mut row_stream(seed, row, PURPOSE_PE))?;
    let subcode = mean_subcode_error(cfg, &mut row_stream(seed, row, PURPOSE_SUBCODE))?;

    let (leakage, leakage_err, exact) = match exact_leakage(cfg) {
        Ok(l) => (l.leakage, l.error_bound, true),
        Err(Error::BudgetExceeded { .. }) => {
            let mut rng = row_stream(seed, row, PURPOSE_LEAKAGE);
            let (est, se) = sampled_leakage(cfg, cfg.trials.max(2), &mut rng)?;
            (est.max(0.0), 3.0 * se, false)
        }
        Err(e) => return Err(e),
    };
    let equivocation = match equivocation_from_leakage(leakage, part.n_messages()) {
        Ok(e) => Some(e),
        Err(Error::SingleMessage) => None,
        Err(e) => return Err(e),
    };
    let mi_bound = codebook_mi_bound(cfg)?;
    let fano = fano_leakage_bound(
        mi_bound / cfg.horizon,
        part.block_size() as u64,
        subcode.upper(Z_99),
        cfg.horizon,
    )?;
    Ok(ExperimentReport {
        pe,
        leakage_nats: leakage,
        leakage_err,
        leakage_exact: exact,
        equivocation,
        subcode_error: subcode,
        mi_bound_nats: mi_bound,
        fano_bound: fano,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub config: ExperimentConfig,
    pub outcome: std::result::Result<ExperimentReport, String>,
}

/// Runs every configuration (in parallel) and returns rows in input order.
/// A failing row records its error and the sweep continues.
pub fn run_sweep(grid: &[ExperimentConfig], master_seed: u64) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| SweepRow {
            config: *cfg,
            outcome: run_experiment(cfg, master_seed, i as u64).map_err(|e| e.to_string()),
        })
        .collect())
}

pub const SWEEP_COLUMNS: [&str; 18] = [
    "a_y",
    "lambda_y",
    "a_z",
    "lambda_z",
    "M",
    "k",
    "T",
    "n_messages",
    "trials",
    "pe",
    "pe_lo",
    "pe_hi",
    "leakage_nats",
    "leakage_err",
    "equivocation",
    "fano_bound",
    "leakage_exact",
    "error",
];

/// Writes sweep rows as CSV. Information quantities are divided by
/// `info_unit` (1 for nats, `ln 2` for bits).
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W, info_unit: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        let c = &row.config;
        let mut rec = vec![
            c.params.a_y().to_string(),
            c.params.lambda_y().to_string(),
            c.params.a_z().to_string(),
            c.params.lambda_z().to_string(),
            c.m_rows.to_string(),
            c.k_ones.to_string(),
            c.horizon.to_string(),
            c.n_messages.to_string(),
            c.trials.to_string(),
        ];
        match &row.outcome {
            Ok(r) => {
                rec.extend([
                    r.pe.estimate.to_string(),
                    r.pe.lo.to_string(),
                    r.pe.hi.to_string(),
                    (r.leakage_nats / info_unit).to_string(),
                    (r.leakage_err / info_unit).to_string(),
                    r.equivocation.map(|e| e.value.to_string()).unwrap_or_default(),
                    (r.fano_bound / info_unit).to_string(),
                    r.leakage_exact.to_string(),
                    String::new(),
                ]);
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), 8));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
