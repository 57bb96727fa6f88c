//! Frame synthesis and the radar channel.
//!
//! Slow-time index `m` is stored 0-based; the Doppler phase of bin `ν` at
//! block `m` is `exp(j2π ν m / M)`, so Doppler bins run over `1..=M` and a
//! stationary scatterer sits in bin `M`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    SingleCarrier,
    Ofdm,
    Fmcw,
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SingleCarrier => "single_carrier",
            Self::Ofdm => "ofdm",
            Self::Fmcw => "fmcw",
        })
    }
}

impl FromStr for Waveform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_carrier" | "sc" => Ok(Self::SingleCarrier),
            "ofdm" => Ok(Self::Ofdm),
            "fmcw" => Ok(Self::Fmcw),
            other => Err(invalid(format!("unknown waveform {other:?}"))),
        }
    }
}

/// Dense `N × M` complex array, one contiguous column per slow-time block.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    m: usize,
    data: Vec<Complex64>,
}

impl Grid {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![Complex64::new(0.0, 0.0); n * m],
        }
    }

    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let n = columns.first().ok_or(Error::Empty)?.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} among columns of length {n}",
                bad.len()
            )));
        }
        Ok(Self {
            n,
            m: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn from_vec(n: usize, m: usize, data: Vec<Complex64>) -> Result<Self> {
        if n.checked_mul(m) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {n}×{m} grid",
                data.len()
            )));
        }
        Ok(Self { n, m, data })
    }

    /// Fast-time length.
    pub fn rows(&self) -> usize {
        self.n
    }

    /// Slow-time length.
    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn column_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn columns_mut(&mut self) -> impl Iterator<Item = &mut [Complex64]> {
        self.data.chunks_exact_mut(self.n)
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.data[m * self.n + n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn mean_energy(&self) -> f64 {
        self.energy() / self.data.len() as f64
    }

    fn add_assign(&mut self, other: &Grid) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    fn same_shape(&self, other: &Grid) -> Result<()> {
        if (self.n, self.m) != (other.n, other.m) {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.n, self.m, other.n, other.m
            )));
        }
        Ok(())
    }
}

/// Linear chirp `x_r[n] = exp(jπ β n² / N)`, repeated identically in every block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FmcwParams {
    pub n: usize,
    pub m: usize,
    /// Swept bandwidth as a fraction of the sample rate.
    pub beta: f64,
}

impl FmcwParams {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m, beta: 1.0 }
    }

    pub fn chirp(&self) -> Vec<Complex64> {
        let n = self.n as f64;
        (0..self.n)
            .map(|i| {
                let i = i as f64;
                Complex64::from_polar(1.0, PI * self.beta * i * i / n)
            })
            .collect()
    }
}

/// Transmitted frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub waveform: Waveform,
    /// Time-domain samples `x[n, m]`.
    pub samples: Grid,
    /// Data symbols `s[n, m]` (`s[k, m]` for OFDM); `None` for FMCW.
    pub symbols: Option<Grid>,
}

impl Frame {
    pub fn n(&self) -> usize {
        self.samples.rows()
    }

    pub fn m(&self) -> usize {
        self.samples.cols()
    }
}

/// Single-carrier sends the symbols as is; OFDM sends `IDFT(s)` with `1/N` scaling.
pub fn synth_frame(blocks: &[Vec<Complex64>], waveform: Waveform) -> Result<Frame> {
    let symbols = Grid::from_columns(blocks)?;
    let samples = match waveform {
        Waveform::SingleCarrier => symbols.clone(),
        Waveform::Ofdm => {
            let mut g = symbols.clone();
            g.columns_mut().for_each(fft::inverse_normalized);
            g
        }
        Waveform::Fmcw => return Err(invalid("FMCW frames are built with synth_fmcw_frame")),
    };
    Ok(Frame {
        waveform,
        samples,
        symbols: Some(symbols),
    })
}

pub fn synth_fmcw_frame(params: &FmcwParams) -> Result<Frame> {
    if params.n == 0 || params.m == 0 {
        return Err(Error::Empty);
    }
    let chirp = params.chirp();
    Ok(Frame {
        waveform: Waveform::Fmcw,
        samples: Grid::from_columns(&vec![chirp; params.m])?,
        symbols: None,
    })
}

/// One propagation path: delay bin, Doppler bin in `1..=M`, complex gain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathGain {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub gain: Complex64,
}

impl PathGain {
    pub fn new(range_bin: usize, doppler_bin: usize, gain: f64) -> Self {
        Self {
            range_bin,
            doppler_bin,
            gain: Complex64::new(gain, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScene {
    pub targets: Vec<PathGain>,
    /// Paths from each interfering radar, direct path included.
    pub interference: Vec<Vec<PathGain>>,
    /// Time-domain noise variance `σ²`.
    pub noise_variance: f64,
    pub n_max: usize,
}

impl TargetScene {
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.n_max >= n {
            return Err(invalid(format!("n_max {} must be below N = {n}", self.n_max)));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(invalid(format!("noise variance {}", self.noise_variance)));
        }
        for t in &self.targets {
            if t.range_bin > self.n_max {
                return Err(invalid(format!("target range bin {} beyond n_max {}", t.range_bin, self.n_max)));
            }
        }
        for p in self.targets.iter().chain(self.interference.iter().flatten()) {
            if p.range_bin >= n {
                return Err(invalid(format!("range bin {} outside 0..{n}", p.range_bin)));
            }
            if p.doppler_bin == 0 || p.doppler_bin > m {
                return Err(invalid(format!("Doppler bin {} outside 1..={m}", p.doppler_bin)));
            }
        }
        Ok(())
    }

    /// Same scene with every path gain, targets and interference, scaled by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let scale = |p: &PathGain| PathGain {
            gain: p.gain * k,
            ..*p
        };
        Self {
            targets: self.targets.iter().map(scale).collect(),
            interference: self.interference.iter().map(|q| q.iter().map(scale).collect()).collect(),
            ..self.clone()
        }
    }

    pub fn without_interference(&self) -> Self {
        Self {
            interference: Vec::new(),
            ..self.clone()
        }
    }
}

fn doppler_phasors(doppler_bin: usize, m: usize) -> impl Iterator<Item = Complex64> {
    (0..m).map(move |mi| {
        let cycles = (doppler_bin * mi) % m;
        Complex64::from_polar(1.0, 2.0 * PI * cycles as f64 / m as f64)
    })
}

fn add_delayed(y: &mut Grid, x: &Grid, path: &PathGain) {
    let n = x.rows();
    let d = path.range_bin;
    for ((out, src), ph) in y
        .columns_mut()
        .zip(x.columns())
        .zip(doppler_phasors(path.doppler_bin, x.cols()))
    {
        let g = path.gain * ph;
        out[d..].iter_mut().zip(&src[..n - d]).for_each(|(o, s)| *o += g * s);
    }
}

/// Circularly-symmetric complex Gaussian noise with variance `σ²`.
pub fn awgn<R: Rng + ?Sized>(len: usize, variance: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(invalid(format!("noise variance must be non-negative, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); len]);
    }
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).map_err(|e| invalid(e.to_string()))?;
    Ok((0..len)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect())
}

fn check_interferers(own: &Grid, others: &[&Grid], scene: &TargetScene) -> Result<()> {
    scene.validate(own.rows(), own.cols())?;
    if others.len() != scene.interference.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} interfering frames for {} interference path lists",
            others.len(),
            scene.interference.len()
        )));
    }
    others.iter().try_for_each(|g| own.same_shape(g))
}

/// Time-domain received samples: delayed (zero-fill), Doppler-rotated
/// copies of the own frame and of each interferer's frame, plus noise.
/// Works for any waveform whose time samples are given.
pub fn apply_channel_sc<R: Rng + ?Sized>(
    own: &Frame,
    interferers: &[&Frame],
    scene: &TargetScene,
    rng: &mut R,
) -> Result<Grid> {
    let others: Vec<&Grid> = interferers.iter().map(|f| &f.samples).collect();
    check_interferers(&own.samples, &others, scene)?;
    let x = &own.samples;
    let mut y = Grid::zeros(x.rows(), x.cols());
    scene.targets.iter().for_each(|p| add_delayed(&mut y, x, p));
    for (xq, paths) in others.iter().zip(&scene.interference) {
        paths.iter().for_each(|p| add_delayed(&mut y, xq, p));
    }
    let noise = Grid::from_vec(x.rows(), x.cols(), awgn(x.rows() * x.cols(), scene.noise_variance, rng)?)?;
    y.add_assign(&noise);
    Ok(y)
}

fn add_phase_ramped(y: &mut Grid, s: &Grid, path: &PathGain) {
    let n = s.rows();
    let ramp: Vec<Complex64> = (0..n)
        .map(|k| {
            let cycles = (path.range_bin * k) % n;
            Complex64::from_polar(1.0, -2.0 * PI * cycles as f64 / n as f64)
        })
        .collect();
    for ((out, src), ph) in y
        .columns_mut()
        .zip(s.columns())
        .zip(doppler_phasors(path.doppler_bin, s.cols()))
    {
        let g = path.gain * ph;
        out.iter_mut()
            .zip(src)
            .zip(&ramp)
            .for_each(|((o, v), r)| *o += g * v * r);
    }
}

/// Frequency-domain OFDM return `Y[k, m]` from per-radar symbol grids.
/// Noise is i.i.d. per bin with variance `N σ²`, the DFT of time-domain
/// noise of variance `σ²`.
pub fn apply_channel_ofdm<R: Rng + ?Sized>(
    own: &Grid,
    interferers: &[&Grid],
    scene: &TargetScene,
    rng: &mut R,
) -> Result<Grid> {
    check_interferers(own, interferers, scene)?;
    let (n, m) = (own.rows(), own.cols());
    let mut y = Grid::zeros(n, m);
    scene.targets.iter().for_each(|p| add_phase_ramped(&mut y, own, p));
    for (sq, paths) in interferers.iter().zip(&scene.interference) {
        paths.iter().for_each(|p| add_phase_ramped(&mut y, sq, p));
    }
    let noise = Grid::from_vec(n, m, awgn(n * m, n as f64 * scene.noise_variance, rng)?)?;
    y.add_assign(&noise);
    Ok(y)
}

pub const FRAME_MAGIC: [u8; 8] = *b"CCSFRAME";
pub const MAP_MAGIC: [u8; 8] = *b"CCSRDMAP";
const HEADER_LEN: usize = 16;

/// Little-endian dump: 8-byte magic, `u32` rows, `u32` columns, then
/// interleaved `(re, im)` `f64` pairs column by column.
pub fn encode_dump(magic: [u8; 8], grid: &Grid) -> Result<Vec<u8>> {
    let rows = u32::try_from(grid.rows()).map_err(|_| invalid("row count exceeds u32"))?;
    let cols = u32::try_from(grid.cols()).map_err(|_| invalid("column count exceeds u32"))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.as_slice().len());
    out.extend_from_slice(&magic);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for v in grid.as_slice() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

/// Parses a dump written by [`encode_dump`], rejecting unknown magics,
/// empty dimensions and length mismatches.
pub fn decode_dump(bytes: &[u8]) -> Result<([u8; 8], Grid)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let magic: [u8; 8] = bytes[..8].try_into().expect("slice of length 8");
    if magic != FRAME_MAGIC && magic != MAP_MAGIC {
        return Err(Error::Format(format!("unknown magic {:?}", String::from_utf8_lossy(&magic))));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("slice of length 4")) as usize;
    let (rows, cols) = (word(8), word(12));
    if rows == 0 || cols == 0 {
        return Err(Error::Format(format!("empty {rows}×{cols} grid")));
    }
    let payload = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(16))
        .ok_or_else(|| Error::Format("grid size overflows".into()))?;
    if bytes.len() - HEADER_LEN != payload {
        return Err(Error::Format(format!(
            "payload is {} bytes, header implies {payload}",
            bytes.len() - HEADER_LEN
        )));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("slice of length 8"));
    let data = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
        .collect();
    Ok((magic, Grid::from_vec(rows, cols, data)?))
}
