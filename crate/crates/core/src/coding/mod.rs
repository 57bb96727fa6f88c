//! Message generation, channel encoders, interleaving and the closed-form
//! bit correlations of interleaved repetition codes.

mod gf2;
mod interleaver;
mod ldpc;
mod polar;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gf2::BitMatrix;
pub use interleaver::{make_interleaver, Permutation};
pub use ldpc::LdpcCode;
pub use polar::{polar_transform, PolarCode};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitRole {
    Message,
    Codeword,
    Interleaved,
}

/// A non-empty block of bits, each stored as a `0`/`1` byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitBlock {
    bits: Vec<u8>,
    role: BitRole,
}

impl BitBlock {
    pub fn new(bits: Vec<u8>, role: BitRole) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(invalid(format!("bit {i} is not 0 or 1")));
        }
        Ok(Self { bits, role })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn role(&self) -> BitRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch("xor of unequal blocks".into()));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect();
        BitBlock::new(bits, self.role)
    }
}

/// Draws `n_msg_bits` i.i.d. uniform bits.
pub fn generate_message<R: Rng + ?Sized>(n_msg_bits: usize, rng: &mut R) -> Result<BitBlock> {
    if n_msg_bits == 0 {
        return Err(invalid("message length must be positive"));
    }
    let mut bits = Vec::with_capacity(n_msg_bits);
    while bits.len() < n_msg_bits {
        let word: u64 = rng.random();
        let take = (n_msg_bits - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    BitBlock::new(bits, BitRole::Message)
}

/// Rate `1/γ` repetition code: `γ` back-to-back copies of the message.
pub fn encode_repetition(msg: &BitBlock, gamma: usize) -> Result<BitBlock> {
    if gamma == 0 {
        return Err(invalid("repetition factor must be at least 1"));
    }
    BitBlock::new(msg.bits().repeat(gamma), BitRole::Codeword)
}

/// Non-systematic polar encoding for a [`CodeConfig`] of kind `Polar`.
pub fn encode_polar(msg: &BitBlock, config: &CodeConfig) -> Result<BitBlock> {
    if config.kind != CodeKind::Polar {
        return Err(invalid("encode_polar called with a non-polar config"));
    }
    config.validate()?;
    PolarCode::new(config.n_code_bits, config.n_msg_bits)?.encode(msg)
}

/// Systematic LDPC encoding for a [`CodeConfig`] of kind `Ldpc`.
pub fn encode_ldpc(msg: &BitBlock, config: &CodeConfig) -> Result<BitBlock> {
    let CodeKind::Ldpc { seed } = config.kind else {
        return Err(invalid("encode_ldpc called with a non-LDPC config"));
    };
    config.validate()?;
    LdpcCode::random(config.n_code_bits, config.n_msg_bits, seed)?.encode(msg)
}

/// Code rate held as a ratio so fractional numerators like `682.5/1024`
/// survive exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CodeRate {
    num: f64,
    den: f64,
}

impl CodeRate {
    pub fn new(num: f64, den: f64) -> Result<Self> {
        if !(num.is_finite() && den.is_finite()) || num <= 0.0 || den <= 0.0 || num > den {
            return Err(invalid(format!("rate {num}/{den} is not in (0, 1]")));
        }
        Ok(Self { num, den })
    }

    pub fn one() -> Self {
        Self { num: 1.0, den: 1.0 }
    }

    pub fn value(&self) -> f64 {
        self.num / self.den
    }

    /// Message bits carried by a codeword of `n_code_bits`; the product must
    /// be an integer.
    pub fn message_bits(&self, n_code_bits: usize) -> Result<usize> {
        let exact = self.num * n_code_bits as f64 / self.den;
        let rounded = exact.round();
        if (exact - rounded).abs() > 1e-9 || rounded < 1.0 {
            return Err(invalid(format!(
                "rate {self} on {n_code_bits} code bits gives {exact} message bits"
            )));
        }
        Ok(rounded as usize)
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| invalid(format!("bad rate component {t:?}")))
        };
        CodeRate::new(parse(num)?, parse(den)?)
    }
}

impl TryFrom<String> for CodeRate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CodeRate> for String {
    fn from(r: CodeRate) -> String {
        r.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeKind {
    Uncoded,
    Repetition { gamma: usize },
    Polar,
    Ldpc { seed: u64 },
}

/// Encoder selection and dimensions at the bit level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeConfig {
    pub kind: CodeKind,
    pub n_code_bits: usize,
    pub n_msg_bits: usize,
    pub interleave: bool,
    pub interleaver_seed: u64,
}

impl CodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_msg_bits == 0 {
            return Err(invalid("message length must be positive"));
        }
        if self.n_msg_bits > self.n_code_bits {
            return Err(invalid("message longer than codeword"));
        }
        match self.kind {
            CodeKind::Uncoded if self.n_code_bits != self.n_msg_bits => {
                Err(invalid("uncoded config needs equal message and code lengths"))
            }
            CodeKind::Repetition { gamma } if gamma == 0 || self.n_code_bits != gamma * self.n_msg_bits => {
                Err(invalid("repetition code needs n_code_bits = γ·n_msg_bits with γ ≥ 1"))
            }
            CodeKind::Polar if !self.n_code_bits.is_power_of_two() => {
                Err(invalid("polar code length must be a power of two"))
            }
            CodeKind::Ldpc { .. } if self.n_msg_bits == self.n_code_bits => {
                Err(invalid("LDPC code needs at least one parity bit"))
            }
            _ => Ok(()),
        }
    }

    /// Constructs the systematic encoder. LDPC construction involves a GF(2)
    /// elimination, so build once and share.
    pub fn build(&self) -> Result<Encoder> {
        self.validate()?;
        let inner = match self.kind {
            CodeKind::Uncoded => EncoderKind::Uncoded,
            CodeKind::Repetition { gamma } => EncoderKind::Repetition { gamma },
            CodeKind::Polar => EncoderKind::Polar(PolarCode::new(self.n_code_bits, self.n_msg_bits)?),
            CodeKind::Ldpc { seed } => {
                EncoderKind::Ldpc(LdpcCode::random(self.n_code_bits, self.n_msg_bits, seed)?)
            }
        };
        Ok(Encoder {
            config: self.clone(),
            inner: Arc::new(inner),
        })
    }
}

#[derive(Debug)]
enum EncoderKind {
    Uncoded,
    Repetition { gamma: usize },
    Polar(PolarCode),
    Ldpc(LdpcCode),
}

/// A built systematic encoder; cheap to clone.
#[derive(Clone, Debug)]
pub struct Encoder {
    config: CodeConfig,
    inner: Arc<EncoderKind>,
}

impl Encoder {
    pub fn config(&self) -> &CodeConfig {
        &self.config
    }

    /// Encodes so that the first `n_msg_bits` codeword bits are the message.
    pub fn encode_systematic(&self, msg: &BitBlock) -> Result<BitBlock> {
        if msg.len() != self.config.n_msg_bits {
            return Err(Error::DimensionMismatch(format!(
                "encoder expects {} message bits, got {}",
                self.config.n_msg_bits,
                msg.len()
            )));
        }
        match &*self.inner {
            EncoderKind::Uncoded => BitBlock::new(msg.bits().to_vec(), BitRole::Codeword),
            EncoderKind::Repetition { gamma } => encode_repetition(msg, *gamma),
            EncoderKind::Polar(code) => code.encode_systematic(msg),
            EncoderKind::Ldpc(code) => code.encode(msg),
        }
    }

    pub fn ldpc(&self) -> Option<&LdpcCode> {
        match &*self.inner {
            EncoderKind::Ldpc(c) => Some(c),
            _ => None,
        }
    }

    pub fn polar(&self) -> Option<&PolarCode> {
        match &*self.inner {
            EncoderKind::Polar(c) => Some(c),
            _ => None,
        }
    }
}

/// Correlation coefficient between codeword bits `i < j` of a rate `1/γ`
/// repetition code over `k` message bits. With `interleaved`, the value is
/// the expectation over uniformly drawn systematic interleavers.
pub fn repetition_bit_correlation(
    i: usize,
    j: usize,
    k: usize,
    gamma: usize,
    interleaved: bool,
) -> Result<f64> {
    if k == 0 || gamma == 0 {
        return Err(invalid("K and γ must be positive"));
    }
    if i >= j {
        return Err(invalid(format!("need i < j, got i={i}, j={j}")));
    }
    if j >= gamma * k {
        return Err(invalid(format!("index {j} outside codeword of {} bits", gamma * k)));
    }
    if !interleaved {
        return Ok(if (j - i).is_multiple_of(k) { 1.0 } else { 0.0 });
    }
    let (g, kf) = (gamma as f64, k as f64);
    Ok(if j < k {
        0.0
    } else if i < k {
        (g - 1.0) / ((g - 1.0) * kf)
    } else {
        (g - 2.0) / ((g - 1.0) * kf - 1.0)
    })
}
