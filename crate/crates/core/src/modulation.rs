//! Constellations, Gray mapping and the c.c.s block generator.
//!
//! Labelings follow the 3GPP TS 38.211 modulation-mapper tables (BPSK taken
//! as the real antipodal pair). Bit `b0` is the first bit of each group.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::{generate_message, make_interleaver, CodeConfig, Encoder, Permutation};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "256qam")]
    Qam256,
}

impl ConstellationKind {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Self::Bpsk => 1,
            Self::Qpsk => 2,
            Self::Qam16 => 4,
            Self::Qam256 => 8,
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bpsk => "bpsk",
            Self::Qpsk => "qpsk",
            Self::Qam16 => "16qam",
            Self::Qam256 => "256qam",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::Bpsk),
            "qpsk" => Ok(Self::Qpsk),
            "16qam" | "qam16" => Ok(Self::Qam16),
            "256qam" | "qam256" => Ok(Self::Qam256),
            other => Err(invalid(format!("unknown constellation {other:?}"))),
        }
    }
}

/// A Gray-labelled constellation; `points()[label]` is the symbol for the
/// bit group whose first bit is the label's most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
}

fn sign(b: u32) -> f64 {
    1.0 - 2.0 * f64::from(b)
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let m = kind.bits_per_symbol();
        let points = (0..1u32 << m)
            .map(|label| {
                let bit = |i: usize| (label >> (m - 1 - i)) & 1;
                match kind {
                    ConstellationKind::Bpsk => Complex64::new(sign(bit(0)), 0.0),
                    ConstellationKind::Qpsk => {
                        Complex64::new(sign(bit(0)), sign(bit(1))) / 2f64.sqrt()
                    }
                    ConstellationKind::Qam16 => {
                        let re = sign(bit(0)) * (2.0 - sign(bit(2)));
                        let im = sign(bit(1)) * (2.0 - sign(bit(3)));
                        Complex64::new(re, im) / 10f64.sqrt()
                    }
                    ConstellationKind::Qam256 => {
                        let axis = |a: usize, b: usize, c: usize, d: usize| {
                            sign(bit(a)) * (8.0 - sign(bit(b)) * (4.0 - sign(bit(c)) * (2.0 - sign(bit(d)))))
                        };
                        Complex64::new(axis(0, 2, 4, 6), axis(1, 3, 5, 7)) / 170f64.sqrt()
                    }
                }
            })
            .collect();
        Self { kind, points }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.kind.bits_per_symbol()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn mean(&self) -> Complex64 {
        self.points.iter().sum::<Complex64>() / self.points.len() as f64
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    pub fn max_magnitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn min_magnitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Maps bits to symbols, `m_s` bits per symbol.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let m = self.bits_per_symbol();
        if !bits.len().is_multiple_of(m) {
            return Err(invalid(format!(
                "{} bits not divisible by {m} bits/symbol",
                bits.len()
            )));
        }
        Ok(bits
            .chunks_exact(m)
            .map(|group| {
                let label = group.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
                self.points[label]
            })
            .collect())
    }
}

/// Bound `b` on `|Re{s[n] s*[n-l]}|`: the largest squared point magnitude.
pub fn product_bound_b(c: &Constellation) -> f64 {
    c.max_magnitude().powi(2)
}

/// Bound on `|s_num / s_den|` for symbols drawn from the two constellations.
pub fn ratio_bound_b(c_num: &Constellation, c_den: &Constellation) -> Result<f64> {
    let min = c_den.min_magnitude();
    if min == 0.0 {
        return Err(invalid("denominator constellation contains the origin"));
    }
    Ok(c_num.max_magnitude() / min)
}

/// One coded, interleaved, mapped symbol block.
#[derive(Clone, Debug, PartialEq)]
pub struct CcsBlock {
    pub symbols: Vec<Complex64>,
    pub code: CodeConfig,
    pub constellation: ConstellationKind,
    pub message_seed: u64,
}

impl CcsBlock {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Message length `K` in symbols; fractional when the message does not
    /// fill a whole number of symbols.
    pub fn message_symbols(&self) -> f64 {
        self.code.n_msg_bits as f64 / self.constellation.bits_per_symbol() as f64
    }
}

/// Reusable block generator around a built encoder.
#[derive(Clone, Debug)]
pub struct CcsGenerator {
    n_symbols: usize,
    encoder: Encoder,
    constellation: Constellation,
}

impl CcsGenerator {
    pub fn new(n_symbols: usize, encoder: Encoder, constellation: Constellation) -> Result<Self> {
        let cfg = encoder.config();
        if n_symbols == 0 || cfg.n_code_bits != n_symbols * constellation.bits_per_symbol() {
            return Err(Error::DimensionMismatch(format!(
                "{} code bits cannot fill {n_symbols} {} symbols",
                cfg.n_code_bits,
                constellation.kind()
            )));
        }
        Ok(Self {
            n_symbols,
            encoder,
            constellation,
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn code(&self) -> &CodeConfig {
        self.encoder.config()
    }

    /// Interleaver for a frame; identity when the config disables it.
    pub fn interleaver(&self, seed: u64) -> Result<Permutation> {
        let cfg = self.encoder.config();
        if cfg.interleave {
            make_interleaver(cfg.n_code_bits, cfg.n_msg_bits, seed)
        } else {
            Ok(Permutation::identity(cfg.n_code_bits))
        }
    }

    /// Message → systematic encode → interleave → map.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R, perm: &Permutation) -> Result<Vec<Complex64>> {
        let msg = generate_message(self.encoder.config().n_msg_bits, rng)?;
        let cw = self.encoder.encode_systematic(&msg)?;
        let interleaved = perm.apply(&cw)?;
        self.constellation.map_bits(interleaved.bits())
    }

    pub fn block(&self, message_seed: u64, perm: &Permutation) -> Result<CcsBlock> {
        let mut rng = ChaCha8Rng::seed_from_u64(message_seed);
        Ok(CcsBlock {
            symbols: self.generate(&mut rng, perm)?,
            code: self.encoder.config().clone(),
            constellation: self.constellation.kind(),
            message_seed,
        })
    }
}

/// One-shot pipeline: builds the encoder, draws the interleaver from the
/// config's seed and the message from `message_seed`.
pub fn generate_ccs_block(
    n_symbols: usize,
    code: &CodeConfig,
    constellation: &Constellation,
    message_seed: u64,
) -> Result<CcsBlock> {
    let gen = CcsGenerator::new(n_symbols, code.build()?, constellation.clone())?;
    let perm = gen.interleaver(code.interleaver_seed)?;
    gen.block(message_seed, &perm)
}
