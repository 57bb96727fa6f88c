use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BitBlock, BitRole};
use crate::error::{invalid, Error, Result};

/// Bit permutation `π`: bit `k` of the input lands at position `π(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &p in &map {
            if p >= map.len() || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("permutation map is not a bijection"));
            }
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &p) in self.map.iter().enumerate() {
            inv[p] = k;
        }
        Self { map: inv }
    }

    pub fn apply_slice<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != self.map.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} applied to {} items",
                self.map.len(),
                input.len()
            )));
        }
        let mut out = vec![T::default(); input.len()];
        for (&v, &p) in input.iter().zip(&self.map) {
            out[p] = v;
        }
        Ok(out)
    }

    pub fn apply(&self, block: &BitBlock) -> Result<BitBlock> {
        BitBlock::new(self.apply_slice(block.bits())?, BitRole::Interleaved)
    }
}

/// Random interleaver that leaves the systematic prefix `0..n_msg_bits` in
/// place and draws a uniform permutation of the remaining positions.
pub fn make_interleaver(n_code_bits: usize, n_msg_bits: usize, seed: u64) -> Result<Permutation> {
    if n_msg_bits > n_code_bits {
        return Err(invalid(format!(
            "systematic prefix {n_msg_bits} exceeds codeword length {n_code_bits}"
        )));
    }
    let mut map: Vec<usize> = (0..n_code_bits).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    map[n_msg_bits..].shuffle(&mut rng);
    Ok(Permutation { map })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_prefix_gives_identity() {
        assert_eq!(make_interleaver(9, 9, 3).unwrap(), Permutation::identity(9));
    }

    #[test]
    fn prefix_fixed_tail_permuted() {
        for seed in 0..50 {
            let p = make_interleaver(6, 3, seed).unwrap();
            assert_eq!(&p.map()[..3], &[0, 1, 2]);
            let mut tail = p.map()[3..].to_vec();
            tail.sort_unstable();
            assert_eq!(tail, vec![3, 4, 5]);
        }
    }

    #[test]
    fn inverse_undoes_apply() {
        let p = make_interleaver(40, 10, 11).unwrap();
        let data: Vec<u32> = (0..40).map(|i| i * 3 + 1).collect();
        let there = p.apply_slice(&data).unwrap();
        let back = p.inverse().apply_slice(&there).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::from_map(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_map(vec![0, 3, 1]).is_err());
        assert!(make_interleaver(3, 4, 0).is_err());
    }
}
