//! Closed-form sidelobe tail bounds and Monte Carlo tail estimates.
//!
//! Every bound is evaluated in log space; the probability is reported
//! together with its `log2`, since values such as `2^-480` underflow.

use std::io::Write;

use serde::Serialize;

use crate::correlation::Db;
use crate::error::{invalid, Error, Result};

/// Probabilities whose `log2` falls below this are reported as `0.0`.
const UNDERFLOW_LOG2: f64 = -996.578_428_466_208_7; // log2(1e-300)

/// z-score of a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A probability and its base-2 logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailProbability {
    pub prob: f64,
    pub log2: f64,
}

impl TailProbability {
    pub fn from_log2(log2: f64) -> Self {
        let log2 = log2.min(0.0);
        let prob = if log2 < UNDERFLOW_LOG2 { 0.0 } else { log2.exp2() };
        Self { prob, log2 }
    }

    /// `min(1, 2 exp(-c u^2))`.
    fn two_sided_gaussian(c: f64, u: f64) -> Self {
        Self::from_log2(1.0 - c * u * u / std::f64::consts::LN_2)
    }
}

/// Parameters of a tail bound. `K` values are in symbols and may be
/// fractional when the message does not fill whole symbols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBoundSpec {
    pub n: usize,
    pub k_i: f64,
    pub k_q: f64,
    pub lag: usize,
    pub b: f64,
    pub m_s_i: u32,
    pub m_s_q: u32,
}

impl TailBoundSpec {
    /// Single-radar spec for autocorrelation bounds.
    pub fn auto(n: usize, k: f64, lag: usize, b: f64, m_s: u32) -> Result<Self> {
        Self::cross(n, k, k, lag, b, m_s, m_s)
    }

    /// Two-radar spec for cross-correlation and OFDM interference bounds.
    pub fn cross(n: usize, k_i: f64, k_q: f64, lag: usize, b: f64, m_s_i: u32, m_s_q: u32) -> Result<Self> {
        let spec = Self {
            n,
            k_i,
            k_q,
            lag,
            b,
            m_s_i,
            m_s_q,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        for k in [self.k_i, self.k_q] {
            if !(k > 0.0 && k <= n) {
                return Err(invalid(format!("need 0 < K <= N, got K={k}, N={}", self.n)));
            }
        }
        if self.lag >= self.n {
            return Err(invalid(format!("lag {} outside 0..{}", self.lag, self.n)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(invalid(format!("boundedness constant must be positive, got {}", self.b)));
        }
        if self.m_s_i == 0 || self.m_s_q == 0 {
            return Err(invalid("bits per symbol must be positive"));
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        self.k_i / self.n as f64
    }

    fn with_lag(&self, lag: usize) -> Self {
        Self { lag, ..*self }
    }

    /// Exponent constant `c` of the autocorrelation bound `2 exp(-c u^2)`.
    pub fn autocorr_constant(&self) -> Result<f64> {
        let l = self.lag as f64;
        if self.lag == 0 {
            return Err(invalid("autocorrelation bound needs lag >= 1"));
        }
        let span = self.k_i - l;
        if span < 1.0 {
            return Err(invalid(format!("lag {} leaves K - l = {span} < 1", self.lag)));
        }
        let n = self.n as f64;
        let m_l = ((n - l) / span).ceil();
        Ok(n * n / (2.0 * self.b * self.b * m_l * m_l * span))
    }

    /// Exponent constant with `K̃ = max(K_i - l, K_q)`, `M̃ = ⌈(N-l)/K̃⌉`.
    pub fn crosscorr_constant(&self) -> f64 {
        let (n, l) = (self.n as f64, self.lag as f64);
        let k = (self.k_i - l).max(self.k_q);
        let m = ((n - l) / k).ceil();
        n * n / (2.0 * self.b * self.b * m * m * k)
    }

    /// Exponent constant with `K₀ = min(K_i, K_q)`, `M₀ = ⌈N/K₀⌉`.
    pub fn ofdm_constant(&self) -> f64 {
        let n = self.n as f64;
        let k = self.k_i.min(self.k_q);
        let m = (n / k).ceil();
        n * n / (2.0 * self.b * self.b * m * m * k)
    }
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("threshold must be positive, got {u}")))
    }
}

/// Upper bound on `P(|Re χ(l)| > u)`.
pub fn autocorr_tail_ub(spec: &TailBoundSpec, u: f64) -> Result<TailProbability> {
    check_u(u)?;
    Ok(TailProbability::two_sided_gaussian(spec.autocorr_constant()?, u))
}

/// Lower bound `2^(-m_s K)` on `P(|Re χ(l)| > u)` for small `u`.
pub fn autocorr_tail_lb(spec: &TailBoundSpec) -> TailProbability {
    TailProbability::from_log2(-(f64::from(spec.m_s_i) * spec.k_i))
}

/// Upper bound on `P(|Re ϱ(l)| > u)`.
pub fn crosscorr_tail_ub(spec: &TailBoundSpec, u: f64) -> Result<TailProbability> {
    check_u(u)?;
    Ok(TailProbability::two_sided_gaussian(spec.crosscorr_constant(), u))
}

/// Lower bound `2^-(m_si K_i + m_sq K_q)`.
pub fn crosscorr_tail_lb(spec: &TailBoundSpec) -> TailProbability {
    TailProbability::from_log2(-(f64::from(spec.m_s_i) * spec.k_i + f64::from(spec.m_s_q) * spec.k_q))
}

/// Upper bound on `P(|Re V[l]| > u)`; `b` is the ratio bound.
pub fn ofdm_tail_ub(spec: &TailBoundSpec, u: f64) -> Result<TailProbability> {
    check_u(u)?;
    Ok(TailProbability::two_sided_gaussian(spec.ofdm_constant(), u))
}

/// Lower bound on `P(|Re V[0]| > u)`, same constant as the cross case.
pub fn ofdm_tail_lb(spec: &TailBoundSpec) -> TailProbability {
    crosscorr_tail_lb(spec)
}

/// Threshold `u` solving `2 exp(-c u^2) = 1/2`, expressed as `-20 log10 u`.
pub fn median_db_from_constant(c: f64) -> Db {
    let u = (4f64.ln() / c).sqrt();
    Db(-20.0 * u.log10())
}

/// Bound-implied median PSLR, using the lag-1 autocorrelation constant.
pub fn median_pslr_from_bound(spec: &TailBoundSpec) -> Result<Db> {
    Ok(median_db_from_constant(spec.with_lag(1).autocorr_constant()?))
}

/// Bound-implied median cross-correlation suppression at lag 0.
pub fn median_crosscorr_from_bound(spec: &TailBoundSpec) -> Db {
    median_db_from_constant(spec.with_lag(0).crosscorr_constant())
}

/// Bound-implied median OFDM interference suppression.
pub fn median_ofdm_from_bound(spec: &TailBoundSpec) -> Db {
    median_db_from_constant(spec.ofdm_constant())
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    wilson_fraction(k as f64 / n as f64, n, z)
}

/// Wilson score interval around an observed fraction `p` of `n` trials.
pub fn wilson_fraction(p: f64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if p <= 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if p >= 1.0 { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub u: f64,
    pub exceed: u64,
    pub total: u64,
    pub prob: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Per-threshold exceedance counts; merging is associative so workers can
/// count independently.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCounts {
    grid: Vec<f64>,
    exceed: Vec<u64>,
    total: u64,
}

impl TailCounts {
    pub fn new(grid: &[f64]) -> Self {
        Self {
            grid: grid.to_vec(),
            exceed: vec![0; grid.len()],
            total: 0,
        }
    }

    pub fn add(&mut self, sample: f64) {
        let a = sample.abs();
        for (e, &u) in self.exceed.iter_mut().zip(&self.grid) {
            if a > u {
                *e += 1;
            }
        }
        self.total += 1;
    }

    pub fn merge(mut self, other: &TailCounts) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch("tail grids differ".into()));
        }
        self.exceed.iter_mut().zip(&other.exceed).for_each(|(a, b)| *a += b);
        self.total += other.total;
        Ok(self)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn estimates(&self, z: f64) -> Result<Vec<TailEstimate>> {
        if self.total == 0 {
            return Err(Error::Empty);
        }
        Ok(self
            .grid
            .iter()
            .zip(&self.exceed)
            .map(|(&u, &k)| {
                let (ci_lo, ci_hi) = wilson(k, self.total, z);
                TailEstimate {
                    u,
                    exceed: k,
                    total: self.total,
                    prob: k as f64 / self.total as f64,
                    ci_lo,
                    ci_hi,
                }
            })
            .collect())
    }
}

/// Fraction of `|sample| > u` per grid point with 95% Wilson intervals.
pub fn empirical_tail(samples: &[f64], u_grid: &[f64]) -> Result<Vec<TailEstimate>> {
    empirical_tail_z(samples, u_grid, Z95)
}

pub fn empirical_tail_z(samples: &[f64], u_grid: &[f64], z: f64) -> Result<Vec<TailEstimate>> {
    let mut counts = TailCounts::new(u_grid);
    samples.iter().for_each(|&s| counts.add(s));
    counts.estimates(z)
}

/// CSV with columns `N,dB`.
pub fn write_curve_csv<W: Write>(rows: &[(usize, Db)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["N", "dB"])?;
    for (n, db) in rows {
        w.write_record([n.to_string(), db.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `u,probability,log2`.
pub fn write_tail_csv<W: Write>(rows: &[(f64, TailProbability)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u", "probability", "log2"])?;
    for (u, p) in rows {
        w.serialize((u, p.prob, p.log2))?;
    }
    w.flush()?;
    Ok(())
}
