//! Constant-weight Wyner codes for the peak-limited Poisson channel.
//!
//! The code matrix has `M` rows and one column per `k`-subset of the rows,
//! in lexicographic subset order. `[0, T]` is cut into `C(M, k)` equal
//! slots and codeword `m` is on during slot `n` iff row `m` belongs to
//! subset `n`. Every codeword therefore has duty cycle `k / M`, and every
//! ordered pair of distinct rows disagrees in `C(M-2, k-1)` columns.
//!
//! Rows and messages are 0-based throughout.

use std::ops::Range;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointprocess::{count_in_intervals, equal_cuts, ArrivalProcess, Waveform};

/// Upper limit on `C(M, k)`.
pub const MAX_COLUMNS: u64 = 1 << 40;

/// Codes with at most this many columns keep a dense bit matrix; larger
/// ones recover columns from their lexicographic rank on demand.
pub const DENSE_COLUMN_LIMIT: u64 = 1 << 20;

/// `C(n, k)`, or `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Calls `visit(rank, subset)` for every `k`-subset of `0..m` in
/// lexicographic order.
pub fn for_each_k_subset(m: usize, k: usize, mut visit: impl FnMut(u64, &[usize])) {
    if k > m {
        return;
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut rank = 0u64;
    loop {
        visit(rank, &subset);
        rank += 1;
        // Rightmost position that can still advance.
        let Some(i) = (0..k).rev().find(|&i| subset[i] < m - k + i) else {
            return;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// The `rank`-th `k`-subset of `0..m` in lexicographic order.
pub fn unrank_k_subset(m: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    while out.len() < k {
        let left = (k - out.len()) as u64;
        let with_next = binomial((m - next - 1) as u64, left - 1).unwrap_or(u64::MAX);
        if rank < with_next {
            out.push(next);
        } else {
            rank -= with_next;
        }
        next += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major bits, `words_per_row` u64 words per row.
    Dense { words_per_row: usize, bits: Vec<u64> },
    Lazy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WynerCode {
    m_rows: usize,
    k_ones: usize,
    horizon: f64,
    n_cols: u64,
    slot_len: f64,
    storage: Storage,
}

/// Summary statistics printed by the command-line tool.
#[derive(Debug, Clone, Serialize)]
pub struct CodeSummary {
    pub m_rows: usize,
    pub k_ones: usize,
    pub horizon: f64,
    pub n_cols: u64,
    pub slot_len: f64,
    pub duty_cycle: f64,
    pub row_weight: u64,
    pub pairwise_overlap: f64,
    pub overlap_independent_limit: f64,
}

impl WynerCode {
    pub fn build(m_rows: usize, k_ones: usize, horizon: f64) -> Result<Self> {
        Self::build_with_dense_limit(m_rows, k_ones, horizon, DENSE_COLUMN_LIMIT)
    }

    pub fn build_with_dense_limit(
        m_rows: usize,
        k_ones: usize,
        horizon: f64,
        dense_limit: u64,
    ) -> Result<Self> {
        crate::error::check_positive("horizon", horizon)?;
        if k_ones == 0 || k_ones >= m_rows {
            return Err(Error::InvalidCode {
                m_rows,
                k_ones,
                reason: "need 1 <= k < M",
            });
        }
        let n_cols = binomial(m_rows as u64, k_ones as u64)
            .filter(|&n| n <= MAX_COLUMNS)
            .ok_or(Error::CodeTooLarge { m_rows, k_ones })?;
        let storage = if n_cols <= dense_limit {
            let words_per_row = (n_cols as usize).div_ceil(64);
            let mut bits = vec![0u64; words_per_row * m_rows];
            for_each_k_subset(m_rows, k_ones, |rank, subset| {
                let (word, bit) = ((rank / 64) as usize, rank % 64);
                for &row in subset {
                    bits[row * words_per_row + word] |= 1 << bit;
                }
            });
            Storage::Dense {
                words_per_row,
                bits,
            }
        } else {
            Storage::Lazy
        };
        Ok(Self {
            m_rows,
            k_ones,
            horizon,
            n_cols,
            slot_len: horizon / n_cols as f64,
            storage,
        })
    }

    pub fn m_rows(&self) -> usize {
        self.m_rows
    }

    pub fn k_ones(&self) -> usize {
        self.k_ones
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_cols(&self) -> u64 {
        self.n_cols
    }

    pub fn slot_len(&self) -> f64 {
        self.slot_len
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    fn check_row(&self, m: usize) -> Result<()> {
        if m < self.m_rows {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: m,
                limit: self.m_rows,
            })
        }
    }

    /// Matrix entry for row `m`, column `n`.
    pub fn entry(&self, m: usize, n: u64) -> bool {
        match &self.storage {
            Storage::Dense {
                words_per_row,
                bits,
            } => bits[m * words_per_row + (n / 64) as usize] >> (n % 64) & 1 == 1,
            Storage::Lazy => unrank_k_subset(self.m_rows, self.k_ones, n).contains(&m),
        }
    }

    /// Rows that are on in column `n`, ascending.
    pub fn column(&self, n: u64) -> Vec<usize> {
        match self.storage {
            Storage::Dense { .. } => (0..self.m_rows).filter(|&m| self.entry(m, n)).collect(),
            Storage::Lazy => unrank_k_subset(self.m_rows, self.k_ones, n),
        }
    }

    /// Number of ones in row `m`.
    pub fn row_weight(&self, m: usize) -> Result<u64> {
        self.check_row(m)?;
        Ok(match &self.storage {
            Storage::Dense {
                words_per_row,
                bits,
            } => bits[m * words_per_row..(m + 1) * words_per_row]
                .iter()
                .map(|w| w.count_ones() as u64)
                .sum(),
            Storage::Lazy => {
                binomial((self.m_rows - 1) as u64, (self.k_ones - 1) as u64).unwrap_or(0)
            }
        })
    }

    /// Slot boundaries `0, T/N, ..., T`.
    pub fn slot_cuts(&self) -> Vec<f64> {
        equal_cuts(self.horizon, self.n_cols as usize)
    }

    pub fn codeword_waveform(&self, m: usize) -> Result<Waveform> {
        self.check_row(m)?;
        let values = (0..self.n_cols)
            .map(|n| if self.entry(m, n) { 1.0 } else { 0.0 })
            .collect();
        Waveform::from_slots(self.horizon, values)
    }

    /// Fraction of columns where row `m` is on and row `other` is off.
    pub fn pairwise_overlap_fraction(&self, m: usize, other: usize) -> Result<f64> {
        self.check_row(m)?;
        self.check_row(other)?;
        if m == other {
            return Err(Error::Invalid("overlap needs two distinct rows".into()));
        }
        let count = match &self.storage {
            Storage::Dense {
                words_per_row,
                bits,
            } => {
                let a = &bits[m * words_per_row..(m + 1) * words_per_row];
                let b = &bits[other * words_per_row..(other + 1) * words_per_row];
                a.iter().zip(b).map(|(x, y)| (x & !y).count_ones() as u64).sum()
            }
            // Subsets containing m but not other.
            Storage::Lazy => {
                binomial((self.m_rows - 2) as u64, (self.k_ones - 1) as u64).unwrap_or(0)
            }
        };
        Ok(count as f64 / self.n_cols as f64)
    }

    pub fn summary(&self) -> CodeSummary {
        let alpha = self.k_ones as f64 / self.m_rows as f64;
        CodeSummary {
            m_rows: self.m_rows,
            k_ones: self.k_ones,
            horizon: self.horizon,
            n_cols: self.n_cols,
            slot_len: self.slot_len,
            duty_cycle: self.row_weight(0).unwrap_or(0) as f64 / self.n_cols as f64,
            row_weight: self.row_weight(0).unwrap_or(0),
            pairwise_overlap: self.pairwise_overlap_fraction(0, 1).unwrap_or(f64::NAN),
            overlap_independent_limit: alpha * (1.0 - alpha),
        }
    }

    /// Matrix rows as strings of `0`/`1`.
    pub fn dump_rows(&self) -> impl Iterator<Item = String> + '_ {
        (0..self.m_rows).map(move |m| {
            (0..self.n_cols)
                .map(|n| if self.entry(m, n) { '1' } else { '0' })
                .collect()
        })
    }

    /// `(slot, count)` for every slot holding at least one arrival.
    pub fn slot_counts(&self, arrivals: &ArrivalProcess) -> Result<Vec<(u64, usize)>> {
        let (h, t) = (self.horizon, arrivals.horizon());
        if (h - t).abs() > 1e-12 * h.max(t) {
            return Err(Error::HorizonMismatch { left: h, right: t });
        }
        if arrivals.is_empty() {
            return Ok(Vec::new());
        }
        if self.is_dense() {
            let counts = count_in_intervals(arrivals, &self.slot_cuts())?;
            return Ok(counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(n, c)| (n as u64, c))
                .collect());
        }
        let mut out: Vec<(u64, usize)> = Vec::new();
        for &time in arrivals.times() {
            let slot = self.slot_of(time);
            match out.last_mut() {
                Some((s, c)) if *s == slot => *c += 1,
                _ => out.push((slot, 1)),
            }
        }
        Ok(out)
    }

    fn cut(&self, i: u64) -> f64 {
        if i >= self.n_cols {
            self.horizon
        } else {
            self.horizon * i as f64 / self.n_cols as f64
        }
    }

    /// Slot `n` with `cut(n) < time <= cut(n + 1)`.
    fn slot_of(&self, time: f64) -> u64 {
        let guess = (time / self.horizon * self.n_cols as f64).ceil() as u64;
        let mut n = guess.saturating_sub(1).min(self.n_cols - 1);
        while n > 0 && time <= self.cut(n) {
            n -= 1;
        }
        while n + 1 < self.n_cols && time > self.cut(n + 1) {
            n += 1;
        }
        n
    }

    /// Arrival-count metric `Psi_m` for every row in `rows`.
    pub fn scores(&self, slot_counts: &[(u64, usize)], rows: Range<usize>) -> Vec<usize> {
        let mut psi = vec![0usize; rows.len()];
        for &(slot, count) in slot_counts {
            match self.storage {
                Storage::Dense { .. } => {
                    for (i, m) in rows.clone().enumerate() {
                        if self.entry(m, slot) {
                            psi[i] += count;
                        }
                    }
                }
                Storage::Lazy => {
                    for m in unrank_k_subset(self.m_rows, self.k_ones, slot) {
                        if rows.contains(&m) {
                            psi[m - rows.start] += count;
                        }
                    }
                }
            }
        }
        psi
    }
}

pub fn build_code(m_rows: usize, k_ones: usize, horizon: f64) -> Result<WynerCode> {
    WynerCode::build(m_rows, k_ones, horizon)
}

pub fn codeword_waveform(code: &WynerCode, m: usize) -> Result<Waveform> {
    code.codeword_waveform(m)
}

pub fn pairwise_overlap_fraction(code: &WynerCode, m: usize, other: usize) -> Result<f64> {
    code.pairwise_overlap_fraction(m, other)
}

/// Messages mapped to contiguous, equal-sized blocks of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcodePartition {
    n_messages: usize,
    block_size: usize,
}

impl SubcodePartition {
    pub fn n_messages(&self) -> usize {
        self.n_messages
    }

    /// Codewords per message.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block(&self, message: usize) -> Result<Range<usize>> {
        if message >= self.n_messages {
            return Err(Error::IndexOutOfRange {
                index: message,
                limit: self.n_messages,
            });
        }
        let start = message * self.block_size;
        Ok(start..start + self.block_size)
    }

    pub fn message_of(&self, row: usize) -> usize {
        row / self.block_size
    }
}

pub fn partition(code: &WynerCode, n_messages: usize) -> Result<SubcodePartition> {
    if n_messages == 0 || !code.m_rows.is_multiple_of(n_messages) {
        return Err(Error::Divisibility {
            n_messages,
            m_rows: code.m_rows,
        });
    }
    Ok(SubcodePartition {
        n_messages,
        block_size: code.m_rows / n_messages,
    })
}

/// Uniformly random row inside the message's block.
pub fn encode_row<R: Rng + ?Sized>(
    part: &SubcodePartition,
    message: usize,
    rng: &mut R,
) -> Result<usize> {
    let block = part.block(message)?;
    if block.len() == 1 {
        return Ok(block.start);
    }
    Ok(rng.random_range(block))
}

/// Stochastic encoder: returns the chosen row and its waveform.
pub fn encode<R: Rng + ?Sized>(
    code: &WynerCode,
    part: &SubcodePartition,
    message: usize,
    rng: &mut R,
) -> Result<(usize, Waveform)> {
    let row = encode_row(part, message, rng)?;
    Ok((row, code.codeword_waveform(row)?))
}

/// Smallest index attaining the largest score.
pub(crate) fn argmax_first(scores: &[usize]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Maximum-likelihood decoder: the row collecting the most arrivals in its
/// on-slots, ties to the smallest row.
pub fn ml_decode(code: &WynerCode, arrivals: &ArrivalProcess) -> Result<usize> {
    ml_decode_among(code, arrivals, 0..code.m_rows)
}

/// [`ml_decode`] restricted to a range of candidate rows.
pub fn ml_decode_among(
    code: &WynerCode,
    arrivals: &ArrivalProcess,
    rows: Range<usize>,
) -> Result<usize> {
    if rows.is_empty() || rows.end > code.m_rows {
        return Err(Error::IndexOutOfRange {
            index: rows.end,
            limit: code.m_rows,
        });
    }
    let counts = code.slot_counts(arrivals)?;
    Ok(rows.start + argmax_first(&code.scores(&counts, rows)))
}
