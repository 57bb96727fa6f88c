//! Receive chains producing range-Doppler maps.
//!
//! Every map is scaled by `1/N` in fast time and `1/M` in slow time, so a
//! unit-gain point target shows up as a unit-magnitude peak.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::scene::{encode_dump, FmcwParams, Grid, Waveform, MAP_MAGIC};

/// Scale factors applied along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub fast_time: f64,
    pub slow_time: f64,
}

/// `R[l, ν]` for `l ∈ 0..=n_max`, `ν ∈ 1..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeDopplerMap {
    waveform: Waveform,
    /// Rows are range bins, column `ν mod M` holds Doppler bin `ν`.
    grid: Grid,
    normalization: Normalization,
}

impl RangeDopplerMap {
    pub fn waveform(&self) -> Waveform {
        self.waveform
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn n_max(&self) -> usize {
        self.grid.rows() - 1
    }

    pub fn doppler_bins(&self) -> usize {
        self.grid.cols()
    }

    /// Value at range bin `l` and Doppler bin `ν ∈ 1..=M`.
    pub fn at(&self, l: usize, nu: usize) -> Complex64 {
        self.grid.get(l, nu % self.grid.cols())
    }

    pub fn magnitude(&self, l: usize, nu: usize) -> f64 {
        self.at(l, nu).norm()
    }

    /// `(l, ν, value)` over the whole map.
    pub fn bins(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let m = self.grid.cols();
        (0..=self.n_max()).flat_map(move |l| (1..=m).map(move |nu| (l, nu, self.at(l, nu))))
    }

    pub fn max_abs(&self) -> f64 {
        self.grid.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn energy(&self) -> f64 {
        self.grid.energy()
    }

    pub fn as_grid(&self) -> &Grid {
        &self.grid
    }

    /// CSV with columns `l,nu,db` where `db = 20 log10 |R|`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["l", "nu", "db"])?;
        for (l, nu, v) in self.bins() {
            w.serialize((l, nu, 20.0 * v.norm().log10()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Binary dump in the frame format, rows `0..=n_max`, column `ν mod M`.
    pub fn to_dump(&self) -> Result<Vec<u8>> {
        encode_dump(MAP_MAGIC, &self.grid)
    }
}

fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} vs {}×{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

fn check_n_max(n: usize, n_max: usize) -> Result<()> {
    if n_max >= n {
        return Err(invalid(format!("n_max {n_max} must be below N = {n}")));
    }
    Ok(())
}

/// Matched-filter bank `r[l, m] = (1/N) Σ_n y[n, m] x*[n-l, m]`, `l ∈ 0..=n_max`.
pub fn mf_bank(y: &Grid, x: &Grid, n_max: usize) -> Result<Grid> {
    check_same(y, x)?;
    let n = y.rows();
    check_n_max(n, n_max)?;
    let len = 2 * n;
    let scale = 1.0 / (len as f64 * n as f64);
    let mut out = Vec::with_capacity((n_max + 1) * y.cols());
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    let mut b = a.clone();
    for (yc, xc) in y.columns().zip(x.columns()) {
        a.fill(Complex64::new(0.0, 0.0));
        b.fill(Complex64::new(0.0, 0.0));
        a[..n].copy_from_slice(yc);
        b[..n].copy_from_slice(xc);
        fft::forward(&mut a);
        fft::forward(&mut b);
        a.iter_mut().zip(&b).for_each(|(p, q)| *p *= q.conj());
        fft::inverse(&mut a);
        out.extend(a[..=n_max].iter().map(|v| v * scale));
    }
    Grid::from_vec(n_max + 1, y.cols(), out)
}

/// Slow-time DFT of each range row, scaled by `1/M`.
fn slow_time_dft(r: &Grid, waveform: Waveform, fast_time: f64) -> Result<RangeDopplerMap> {
    let (rows, m) = (r.rows(), r.cols());
    let mut out = Grid::zeros(rows, m);
    let mut row = vec![Complex64::new(0.0, 0.0); m];
    let scale = 1.0 / m as f64;
    for l in 0..rows {
        row.iter_mut().enumerate().for_each(|(mi, v)| *v = r.get(l, mi));
        fft::forward(&mut row);
        for (k, v) in row.iter().enumerate() {
            out.column_mut(k)[l] = v * scale;
        }
    }
    Ok(RangeDopplerMap {
        waveform,
        grid: out,
        normalization: Normalization {
            fast_time,
            slow_time: scale,
        },
    })
}

/// Single-carrier map from matched-filter outputs (`N` is the block length).
pub fn sc_range_doppler(r: &Grid, n: usize) -> Result<RangeDopplerMap> {
    slow_time_dft(r, Waveform::SingleCarrier, 1.0 / n as f64)
}

/// Zero-forcing OFDM map: `Y/s`, IDFT over subcarriers, keep `l ≤ n_max`,
/// DFT over blocks.
pub fn ofdm_range_doppler(y: &Grid, s: &Grid, n_max: usize) -> Result<RangeDopplerMap> {
    check_same(y, s)?;
    let n = y.rows();
    check_n_max(n, n_max)?;
    let mut r = Vec::with_capacity((n_max + 1) * y.cols());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (mi, (yc, sc)) in y.columns().zip(s.columns()).enumerate() {
        for (k, ((b, yv), sv)) in buf.iter_mut().zip(yc).zip(sc).enumerate() {
            if sv.norm_sqr() == 0.0 {
                return Err(Error::ZeroSymbol(mi * n + k));
            }
            *b = yv / sv;
        }
        fft::inverse_normalized(&mut buf);
        r.extend_from_slice(&buf[..=n_max]);
    }
    slow_time_dft(&Grid::from_vec(n_max + 1, y.cols(), r)?, Waveform::Ofdm, 1.0 / n as f64)
}

/// Dechirp with the conjugate reference, rectangular-window range IDFT
/// (`1/N`), keep `l ≤ n_max`, slow-time DFT.
pub fn fmcw_range_doppler(y: &Grid, params: &FmcwParams, n_max: usize) -> Result<RangeDopplerMap> {
    let n = y.rows();
    if params.n != n || params.m != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "chirp {}×{} vs received {}×{}",
            params.n,
            params.m,
            n,
            y.cols()
        )));
    }
    check_n_max(n, n_max)?;
    let chirp = params.chirp();
    let mut r = Vec::with_capacity((n_max + 1) * y.cols());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for yc in y.columns() {
        buf.iter_mut()
            .zip(yc)
            .zip(&chirp)
            .for_each(|((b, v), c)| *b = v * c.conj());
        fft::inverse_normalized(&mut buf);
        r.extend_from_slice(&buf[..=n_max]);
    }
    slow_time_dft(&Grid::from_vec(n_max + 1, y.cols(), r)?, Waveform::Fmcw, 1.0 / n as f64)
}
