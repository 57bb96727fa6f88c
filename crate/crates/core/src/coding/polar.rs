//! Polar codes with a Bhattacharyya-ranked frozen set.
//!
//! The transform used here is `x[j] = XOR_{i ⊆ j} u[i]` (subset order on
//! the binary expansions), i.e. the Kronecker power of `[[1,1],[0,1]]`
//! applied as `x = u·G`. Under this convention input 0 feeds every output
//! bit and is the most reliable synthetic channel.

use super::{BitBlock, BitRole};
use crate::error::{invalid, Error, Result};

/// Design erasure probability of the construction channel.
const DESIGN_ERASURE: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct PolarCode {
    n: usize,
    info: Vec<usize>,
    frozen: Vec<bool>,
}

impl PolarCode {
    pub fn new(n_code_bits: usize, n_msg_bits: usize) -> Result<Self> {
        if !n_code_bits.is_power_of_two() {
            return Err(invalid(format!(
                "polar code length {n_code_bits} is not a power of two"
            )));
        }
        if n_msg_bits > n_code_bits {
            return Err(invalid("polar message longer than codeword"));
        }
        let z = bhattacharyya(n_code_bits);
        let mut order: Vec<usize> = (0..n_code_bits).collect();
        // most reliable first; ties by index keep the choice deterministic
        order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
        let mut info: Vec<usize> = order[..n_msg_bits].to_vec();
        info.sort_unstable();
        let mut frozen = vec![true; n_code_bits];
        for &i in &info {
            frozen[i] = false;
        }
        Ok(Self {
            n: n_code_bits,
            info,
            frozen,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dimension(&self) -> usize {
        self.info.len()
    }

    /// Information (non-frozen) input positions, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    /// Plain (non-systematic) encoding: message bits are written to the
    /// information positions, frozen positions are zero, then the polar
    /// transform is applied.
    pub fn encode(&self, msg: &BitBlock) -> Result<BitBlock> {
        self.check_msg(msg)?;
        let mut u = vec![0u8; self.n];
        for (&pos, &b) in self.info.iter().zip(msg.bits()) {
            u[pos] = b;
        }
        polar_transform(&mut u);
        BitBlock::new(u, BitRole::Codeword)
    }

    /// Systematic encoding. The returned codeword lists the information
    /// positions first (ascending) followed by the frozen positions, so its
    /// first `k` bits equal the message.
    ///
    /// Uses the encode / re-freeze / encode construction, which is exact
    /// because the information set is closed under taking subsets.
    pub fn encode_systematic(&self, msg: &BitBlock) -> Result<BitBlock> {
        self.check_msg(msg)?;
        let mut v = vec![0u8; self.n];
        for (&pos, &b) in self.info.iter().zip(msg.bits()) {
            v[pos] = b;
        }
        polar_transform(&mut v);
        for (bit, &f) in v.iter_mut().zip(&self.frozen) {
            if f {
                *bit = 0;
            }
        }
        polar_transform(&mut v);
        let mut out = Vec::with_capacity(self.n);
        out.extend(self.info.iter().map(|&i| v[i]));
        if out.as_slice() != msg.bits() {
            return Err(Error::InvalidParameter(
                "polar information set is not subset-closed".into(),
            ));
        }
        out.extend((0..self.n).filter(|&i| self.frozen[i]).map(|i| v[i]));
        BitBlock::new(out, BitRole::Codeword)
    }

    /// Maps a systematic-order codeword back to natural transform order.
    pub fn systematic_to_natural(&self, cw: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; self.n];
        let order = self
            .info
            .iter()
            .copied()
            .chain((0..self.n).filter(|&i| self.frozen[i]));
        for (&b, pos) in cw.iter().zip(order) {
            out[pos] = b;
        }
        out
    }

    fn check_msg(&self, msg: &BitBlock) -> Result<()> {
        if msg.len() != self.info.len() {
            return Err(Error::DimensionMismatch(format!(
                "polar code expects {} message bits, got {}",
                self.info.len(),
                msg.len()
            )));
        }
        Ok(())
    }
}

/// In-place polar transform; an involution over GF(2).
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for start in (0..n).step_by(2 * half) {
            for i in start..start + half {
                bits[i + half] ^= bits[i];
            }
        }
        half *= 2;
    }
}

/// Bhattacharyya parameters of the synthetic channels over a BEC, indexed
/// in this module's transform convention.
fn bhattacharyya(n: usize) -> Vec<f64> {
    // Standard-order recursion (x = u·F^{⊗m}, F = [[1,0],[1,1]]): the most
    // significant index bit selects the first split, 0 → degraded branch.
    let mut z = vec![DESIGN_ERASURE];
    while z.len() < n {
        let mut next = Vec::with_capacity(z.len() * 2);
        for &v in &z {
            next.push(2.0 * v - v * v);
            next.push(v * v);
        }
        z = next;
    }
    // Our kernel is the index-reversed conjugate of the standard one.
    z.reverse();
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(bits: &[u8]) -> BitBlock {
        BitBlock::new(bits.to_vec(), BitRole::Message).unwrap()
    }

    #[test]
    fn rate_one_kernel_example() {
        let code = PolarCode::new(4, 4).unwrap();
        let cw = code.encode(&block(&[1, 0, 0, 0])).unwrap();
        assert_eq!(cw.bits(), &[1, 1, 1, 1]);
    }

    #[test]
    fn transform_is_involution() {
        let mut v = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let orig = v.clone();
        polar_transform(&mut v);
        polar_transform(&mut v);
        assert_eq!(v, orig);
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(PolarCode::new(12, 4).is_err());
    }

    #[test]
    fn info_set_is_subset_closed() {
        let code = PolarCode::new(256, 60).unwrap();
        for &j in code.info_positions() {
            // every i ⊆ j must be informative too
            let mut sub = j;
            loop {
                sub = sub.wrapping_sub(1) & j;
                assert!(!code.is_frozen(sub), "{sub} ⊆ {j} frozen");
                if sub == 0 {
                    break;
                }
            }
        }
        assert_eq!(code.info_positions()[0], 0);
    }

    #[test]
    fn systematic_codeword_is_a_polar_codeword() {
        let code = PolarCode::new(64, 20).unwrap();
        let msg: Vec<u8> = (0..20).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let cw = code.encode_systematic(&block(&msg)).unwrap();
        assert_eq!(&cw.bits()[..20], msg.as_slice());
        let mut natural = code.systematic_to_natural(cw.bits());
        polar_transform(&mut natural);
        for (i, bit) in natural.iter().enumerate() {
            if code.is_frozen(i) {
                assert_eq!(*bit, 0, "frozen input {i} nonzero");
            }
        }
    }
}
