//! Aperiodic and periodic correlation, the OFDM interference IDFT and the
//! sidelobe metrics built on them.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fft;

/// Sidelobes below this magnitude count as exactly zero.
pub const ZERO_SIDELOBE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Auto,
    Cross,
    /// Circular correlation, lags `0..N`.
    Periodic,
    IdftRatio,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Fft,
    Direct,
}

/// A level in dB; `+∞` when there is nothing to measure.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Db(pub f64);

impl Db {
    /// `-20 log10(mag)`, saturating to `+∞` below [`ZERO_SIDELOBE`].
    pub fn attenuation(mag: f64) -> Self {
        if mag < ZERO_SIDELOBE {
            Db(f64::INFINITY)
        } else {
            Db(-20.0 * mag.log10())
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Db {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else {
            write!(f, "{:.4}", self.0)
        }
    }
}

/// Correlation values over a contiguous lag range, normalized by `1/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationProfile {
    kind: CorrelationKind,
    n: usize,
    first_lag: isize,
    values: Vec<Complex64>,
}

impl CorrelationProfile {
    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    /// Block length `N`.
    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn lags(&self) -> impl Iterator<Item = isize> + '_ {
        (0..self.values.len() as isize).map(move |i| i + self.first_lag)
    }

    pub fn iter(&self) -> impl Iterator<Item = (isize, Complex64)> + '_ {
        self.lags().zip(self.values.iter().copied())
    }

    /// Value at `lag`. Aperiodic profiles are zero outside `|l| < N`;
    /// periodic ones wrap modulo `N`.
    pub fn at(&self, lag: isize) -> Complex64 {
        let n = self.n as isize;
        match self.kind {
            CorrelationKind::Periodic | CorrelationKind::IdftRatio => {
                self.values[lag.rem_euclid(n) as usize]
            }
            CorrelationKind::Auto | CorrelationKind::Cross => {
                if lag.abs() >= n {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.values[(lag - self.first_lag) as usize]
                }
            }
        }
    }

    /// Largest magnitude over `l != 0`.
    pub fn max_sidelobe(&self) -> f64 {
        self.iter()
            .filter(|&(l, _)| l != 0)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest magnitude over every lag.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV with columns `lag,re,im,abs`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lag", "re", "im", "abs"])?;
        for (l, v) in self.iter() {
            w.serialize((l, v.re, v.im, v.norm()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_pair(s1: &[Complex64], s2: &[Complex64]) -> Result<usize> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::Empty);
    }
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "block lengths {} and {}",
            s1.len(),
            s2.len()
        )));
    }
    Ok(s1.len())
}

fn linear_direct(s1: &[Complex64], s2: &[Complex64]) -> Vec<Complex64> {
    let n = s1.len() as isize;
    let scale = 1.0 / n as f64;
    (-(n - 1)..n)
        .map(|l| {
            let lo = l.max(0);
            let hi = (n + l).min(n);
            (lo..hi)
                .map(|i| s1[i as usize] * s2[(i - l) as usize].conj())
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

fn linear_fft(s1: &[Complex64], s2: &[Complex64]) -> Vec<Complex64> {
    let n = s1.len();
    let len = 2 * n;
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    let mut b = a.clone();
    a[..n].copy_from_slice(s1);
    b[..n].copy_from_slice(s2);
    fft::forward(&mut a);
    fft::forward(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y.conj());
    fft::inverse(&mut a);
    let scale = 1.0 / (len as f64 * n as f64);
    (-(n as isize - 1)..n as isize)
        .map(|l| a[l.rem_euclid(len as isize) as usize] * scale)
        .collect()
}

fn linear(kind: CorrelationKind, s1: &[Complex64], s2: &[Complex64], method: Method) -> Result<CorrelationProfile> {
    let n = check_pair(s1, s2)?;
    let values = match method {
        Method::Direct => linear_direct(s1, s2),
        Method::Fft => linear_fft(s1, s2),
    };
    Ok(CorrelationProfile {
        kind,
        n,
        first_lag: -(n as isize - 1),
        values,
    })
}

/// `χ(l) = (1/N) Σ_n s[n] s*[n-l]` for `|l| < N`.
pub fn autocorr(s: &[Complex64], method: Method) -> Result<CorrelationProfile> {
    linear(CorrelationKind::Auto, s, s, method)
}

/// `ϱ(l) = (1/N) Σ_n s1[n] s2*[n-l]` for `|l| < N`.
pub fn crosscorr(s1: &[Complex64], s2: &[Complex64], method: Method) -> Result<CorrelationProfile> {
    linear(CorrelationKind::Cross, s1, s2, method)
}

/// Circular correlation `(1/N) Σ_n s1[n] s2*[(n-l) mod N]`, lags `0..N`.
pub fn periodic_variant(s1: &[Complex64], s2: &[Complex64], method: Method) -> Result<CorrelationProfile> {
    let n = check_pair(s1, s2)?;
    let scale = 1.0 / n as f64;
    let values = match method {
        Method::Direct => (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| s1[i] * s2[(i + n - l) % n].conj())
                    .sum::<Complex64>()
                    * scale
            })
            .collect(),
        Method::Fft => {
            let mut a = s1.to_vec();
            let mut b = s2.to_vec();
            fft::forward(&mut a);
            fft::forward(&mut b);
            a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y.conj());
            fft::inverse(&mut a);
            a.iter_mut().for_each(|v| *v *= scale * scale);
            a
        }
    };
    Ok(CorrelationProfile {
        kind: CorrelationKind::Periodic,
        n,
        first_lag: 0,
        values,
    })
}

/// `V[l] = (1/N) Σ_k (s_q[k]/s_i[k]) e^{j2πlk/N}`, lags `0..N`.
pub fn idft_ratio(s_i: &[Complex64], s_q: &[Complex64], method: Method) -> Result<CorrelationProfile> {
    let n = check_pair(s_i, s_q)?;
    if let Some(k) = s_i.iter().position(|v| v.norm_sqr() == 0.0) {
        return Err(Error::ZeroSymbol(k));
    }
    let ratio: Vec<Complex64> = s_q.iter().zip(s_i).map(|(q, i)| q / i).collect();
    let values = match method {
        Method::Fft => {
            let mut buf = ratio;
            fft::inverse_normalized(&mut buf);
            buf
        }
        Method::Direct => (0..n)
            .map(|l| {
                ratio
                    .iter()
                    .enumerate()
                    .map(|(k, r)| {
                        let phase = 2.0 * std::f64::consts::PI * ((l * k) % n) as f64 / n as f64;
                        r * Complex64::from_polar(1.0, phase)
                    })
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect(),
    };
    Ok(CorrelationProfile {
        kind: CorrelationKind::IdftRatio,
        n,
        first_lag: 0,
        values,
    })
}

/// Single-lag `(1/N) Σ_n s1[n] s2*[n-l]`, zero for `|l| >= N`.
pub fn crosscorr_at(s1: &[Complex64], s2: &[Complex64], lag: isize) -> Result<Complex64> {
    let n = check_pair(s1, s2)? as isize;
    if lag.abs() >= n {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sum: Complex64 = (lag.max(0)..(n + lag).min(n))
        .map(|i| s1[i as usize] * s2[(i - lag) as usize].conj())
        .sum();
    Ok(sum / n as f64)
}

/// Single-lag autocorrelation `χ(l)`.
pub fn autocorr_at(s: &[Complex64], lag: isize) -> Result<Complex64> {
    crosscorr_at(s, s, lag)
}

/// Single-lag `V[l]` of the OFDM interference IDFT.
pub fn idft_ratio_at(s_i: &[Complex64], s_q: &[Complex64], lag: usize) -> Result<Complex64> {
    let n = check_pair(s_i, s_q)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, (i, q)) in s_i.iter().zip(s_q).enumerate() {
        if i.norm_sqr() == 0.0 {
            return Err(Error::ZeroSymbol(k));
        }
        let phase = 2.0 * std::f64::consts::PI * ((lag * k) % n) as f64 / n as f64;
        sum += q / i * Complex64::from_polar(1.0, phase);
    }
    Ok(sum / n as f64)
}

/// Peak-to-sidelobe ratio `-20 log10 max_{l≠0} |χ(l)|` over the full lag range.
pub fn pslr(profile: &CorrelationProfile) -> Result<Db> {
    if profile.kind != CorrelationKind::Auto {
        return Err(invalid(format!("PSLR needs an auto profile, got {:?}", profile.kind)));
    }
    if profile.at(0).norm() == 0.0 {
        return Err(invalid("degenerate profile: χ(0) = 0"));
    }
    Ok(Db::attenuation(profile.max_sidelobe()))
}

/// Interference suppression `-20 log10 max_l |value|` over every lag.
pub fn suppression_metric(profile: &CorrelationProfile) -> Result<Db> {
    match profile.kind {
        CorrelationKind::Cross | CorrelationKind::IdftRatio => Ok(Db::attenuation(profile.max_abs())),
        k => Err(invalid(format!("suppression needs a cross or idft_ratio profile, got {k:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hand_block() -> Vec<Complex64> {
        vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 1.0)]
    }

    #[test]
    fn hand_computed_autocorr() {
        let s = hand_block();
        let p = autocorr(&s, Method::Fft).unwrap();
        // χ(0) = (1+1+1+2)/4
        assert_abs_diff_eq!(p.at(0).re, 1.25, epsilon = 1e-12);
        // χ(1) = (s1 s0* + s2 s1* + s3 s2*)/4 = (j + j + (-1-j))/4
        assert_abs_diff_eq!(p.at(1).re, -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.at(1).im, 0.25, epsilon = 1e-12);
        // χ(3) = s3 s0* / 4
        assert_abs_diff_eq!(p.at(3).re, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.at(3).im, 0.25, epsilon = 1e-12);
        assert_eq!(p.at(4), c(0.0, 0.0));
        assert_eq!(p.at(-7), c(0.0, 0.0));
        assert_eq!(p.values().len(), 7);
    }

    #[test]
    fn fft_matches_direct_on_hand_block() {
        let s = hand_block();
        let t = vec![c(0.5, -1.0), c(2.0, 0.0), c(0.0, -0.3), c(1.0, 1.0)];
        let pairs = [
            (autocorr(&s, Method::Fft), autocorr(&s, Method::Direct)),
            (crosscorr(&s, &t, Method::Fft), crosscorr(&s, &t, Method::Direct)),
            (periodic_variant(&s, &t, Method::Fft), periodic_variant(&s, &t, Method::Direct)),
            (idft_ratio(&s, &t, Method::Fft), idft_ratio(&s, &t, Method::Direct)),
        ];
        for (a, b) in pairs {
            let (a, b) = (a.unwrap(), b.unwrap());
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_lag_evaluators_match_profiles() {
        let s = hand_block();
        let t = vec![c(0.5, -1.0), c(2.0, 0.0), c(0.0, -0.3), c(1.0, 1.0)];
        let x = crosscorr(&s, &t, Method::Fft).unwrap();
        let v = idft_ratio(&s, &t, Method::Fft).unwrap();
        for l in -5..=5 {
            assert!((crosscorr_at(&s, &t, l).unwrap() - x.at(l)).norm() < 1e-12);
            assert!((autocorr_at(&s, l).unwrap() - autocorr(&s, Method::Direct).unwrap().at(l)).norm() < 1e-12);
        }
        for l in 0..4 {
            assert!((idft_ratio_at(&s, &t, l).unwrap() - v.at(l as isize)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_symmetry() {
        let p = autocorr(&hand_block(), Method::Direct).unwrap();
        for l in 1..4 {
            assert_eq!(p.at(-l), p.at(l).conj());
        }
    }

    #[test]
    fn cross_with_self_is_auto() {
        let s = hand_block();
        let a = autocorr(&s, Method::Fft).unwrap();
        let x = crosscorr(&s, &s, Method::Fft).unwrap();
        assert_eq!(a.values(), x.values());
    }

    #[test]
    fn periodic_lag_zero_and_wrap() {
        let s = hand_block();
        let t = vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        let p = periodic_variant(&s, &t, Method::Fft).unwrap();
        let a = crosscorr(&s, &t, Method::Fft).unwrap();
        assert!((p.at(0) - a.at(0)).norm() < 1e-12);
        assert_eq!(p.at(1), p.at(5));
        assert_eq!(p.at(-1), p.at(3));
        // circular lag 1 = aperiodic lag 1 + aperiodic lag -(N-1)
        assert!((p.at(1) - a.at(1) - a.at(-3)).norm() < 1e-12);
    }

    #[test]
    fn idft_ratio_of_identical_blocks_is_delta() {
        let s = hand_block();
        let v = idft_ratio(&s, &s, Method::Fft).unwrap();
        assert!((v.at(0) - c(1.0, 0.0)).norm() < 1e-12);
        for l in 1..4 {
            assert!(v.at(l).norm() < 1e-12);
        }
    }

    #[test]
    fn idft_ratio_guards_zero_symbol() {
        let mut s = hand_block();
        s[2] = c(0.0, 0.0);
        assert!(matches!(idft_ratio(&s, &hand_block(), Method::Fft), Err(Error::ZeroSymbol(2))));
    }

    #[test]
    fn pslr_of_delta_is_inf() {
        let mut s = vec![c(0.0, 0.0); 8];
        s[3] = c(8f64.sqrt(), 0.0);
        let db = pslr(&autocorr(&s, Method::Fft).unwrap()).unwrap();
        assert!(db.is_infinite());
        assert_eq!(db.to_string(), "inf");
    }

    #[test]
    fn pslr_rejects_wrong_kind_and_degenerate() {
        let s = hand_block();
        assert!(pslr(&crosscorr(&s, &s, Method::Fft).unwrap()).is_err());
        assert!(pslr(&autocorr(&[c(0.0, 0.0); 4], Method::Fft).unwrap()).is_err());
        assert!(suppression_metric(&autocorr(&s, Method::Fft).unwrap()).is_err());
    }

    #[test]
    fn suppression_of_identical_blocks_is_zero_db() {
        let s: Vec<_> = [1.0, -1.0, 1.0, 1.0].iter().map(|&x| c(x, 0.0)).collect();
        let db = suppression_metric(&crosscorr(&s, &s, Method::Fft).unwrap()).unwrap();
        assert_abs_diff_eq!(db.value(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(crosscorr(&hand_block(), &hand_block()[..3], Method::Fft).is_err());
        assert!(autocorr(&[], Method::Fft).is_err());
    }

    #[test]
    fn csv_export_columns() {
        let p = autocorr(&hand_block(), Method::Fft).unwrap();
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lag,re,im,abs"));
        assert_eq!(lines.count(), 7);
        assert!(text.contains("\n-3,"));
    }
}
