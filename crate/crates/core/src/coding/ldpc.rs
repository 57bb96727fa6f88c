//! Pseudo-random LDPC codes in systematic form.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gf2::{pack_bits, parity_of_and, BitMatrix};
use super::{BitBlock, BitRole};
use crate::error::{invalid, Error, Result};

const COLUMN_WEIGHT: usize = 3;
const MAX_CONSTRUCTION_ATTEMPTS: u64 = 32;

/// An LDPC code held as its parity-check matrix plus a systematic encoder.
///
/// Codewords are emitted in `column_order`: the information columns of `H`
/// first, then its pivot (parity) columns.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    h: BitMatrix,
    column_order: Vec<usize>,
    /// One packed row per parity bit over the message bits.
    parity_rows: Vec<Vec<u64>>,
}

impl LdpcCode {
    /// Builds a code from an explicit full-row-rank parity-check matrix.
    pub fn from_parity_check(h: BitMatrix) -> Result<Self> {
        let rows = h.rows();
        let n = h.cols();
        if rows >= n {
            return Err(invalid("parity-check matrix needs fewer rows than columns"));
        }
        let mut reduced = h.clone();
        let pivots = reduced.rref();
        if pivots.len() < rows {
            return Err(Error::RankDeficient {
                rank: pivots.len(),
                rows,
            });
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        // Row r of the RREF reads: c[pivot_r] = sum_t A[r][t] · c[info_t].
        let parity_rows = (0..rows)
            .map(|r| {
                let bits: Vec<u8> = info.iter().map(|&c| u8::from(reduced.get(r, c))).collect();
                pack_bits(&bits)
            })
            .collect();
        let mut column_order = info;
        column_order.extend_from_slice(&pivots);
        Ok(Self {
            h,
            column_order,
            parity_rows,
        })
    }

    /// Pseudo-random column-weight-3 code seeded by `seed`. Construction
    /// retries derived seeds when a draw comes out rank deficient.
    pub fn random(n_code_bits: usize, n_msg_bits: usize, seed: u64) -> Result<Self> {
        if n_msg_bits == 0 || n_msg_bits >= n_code_bits {
            return Err(invalid(format!(
                "LDPC needs 0 < k < n, got k={n_msg_bits}, n={n_code_bits}"
            )));
        }
        let rows = n_code_bits - n_msg_bits;
        let mut last_err = None;
        for attempt in 0..MAX_CONSTRUCTION_ATTEMPTS {
            let h = random_parity_check(rows, n_code_bits, seed.wrapping_add(attempt));
            match Self::from_parity_check(h) {
                Ok(code) => return Ok(code),
                Err(e @ Error::RankDeficient { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }

    pub fn len(&self) -> usize {
        self.h.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.h.cols() == 0
    }

    pub fn dimension(&self) -> usize {
        self.h.cols() - self.h.rows()
    }

    /// Parity-check matrix in the original (construction) column order.
    pub fn parity_check(&self) -> &BitMatrix {
        &self.h
    }

    /// Codeword position `i` corresponds to column `column_order()[i]` of `H`.
    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    pub fn encode(&self, msg: &BitBlock) -> Result<BitBlock> {
        let k = self.dimension();
        if msg.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "LDPC code expects {k} message bits, got {}",
                msg.len()
            )));
        }
        let packed = pack_bits(msg.bits());
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(msg.bits());
        out.extend(self.parity_rows.iter().map(|row| parity_of_and(row, &packed)));
        BitBlock::new(out, BitRole::Codeword)
    }

    /// `H·c` for a codeword given in systematic order.
    pub fn syndrome(&self, codeword: &[u8]) -> Vec<u8> {
        let mut natural = vec![0u8; self.len()];
        for (&b, &col) in codeword.iter().zip(&self.column_order) {
            natural[col] = b;
        }
        self.h.mul_vec(&natural)
    }
}

/// Column-weight-3 parity-check matrix with row degrees balanced to ±1.
///
/// Rows are handed out from a stream of shuffled row permutations, three
/// distinct rows per column, so every row is used before any row repeats.
fn random_parity_check(rows: usize, cols: usize, seed: u64) -> BitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = COLUMN_WEIGHT.min(rows);
    let mut h = BitMatrix::zeros(rows, cols);
    let mut stream: Vec<usize> = Vec::new();
    let mut cursor = 0;
    let refill = |stream: &mut Vec<usize>, cursor: &mut usize, rng: &mut ChaCha8Rng| {
        stream.drain(..*cursor);
        *cursor = 0;
        let mut perm: Vec<usize> = (0..rows).collect();
        perm.shuffle(rng);
        stream.extend(perm);
    };
    for c in 0..cols {
        let mut chosen = [usize::MAX; COLUMN_WEIGHT];
        let mut picked = 0;
        let mut deferred = Vec::new();
        while picked < weight {
            if cursor == stream.len() {
                refill(&mut stream, &mut cursor, &mut rng);
            }
            let r = stream[cursor];
            cursor += 1;
            if chosen[..picked].contains(&r) {
                deferred.push(r);
            } else {
                chosen[picked] = r;
                picked += 1;
            }
        }
        // deferred rows go back to the front of the stream
        for r in deferred.into_iter().rev() {
            cursor -= 1;
            stream[cursor] = r;
        }
        for &r in &chosen[..weight] {
            h.set(r, c, true);
        }
    }
    h
}
