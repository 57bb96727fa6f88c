//! Dense bit-packed GF(2) matrices.

/// Row-major GF(2) matrix, each row packed into `u64` words (bit `c % 64`
/// of word `c / 64` holds column `c`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words;
        let (lo, hi) = self.data.split_at_mut(a.max(b) * w);
        lo[a.min(b) * w..(a.min(b) + 1) * w].swap_with_slice(&mut hi[..w]);
    }

    /// `row[dst] ^= row[src]`
    fn xor_row(&mut self, src: usize, dst: usize) {
        let w = self.words;
        if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            for (d, s) in hi[..w].iter_mut().zip(&lo[src * w..(src + 1) * w]) {
                *d ^= s;
            }
        } else {
            let (lo, hi) = self.data.split_at_mut(src * w);
            for (d, s) in lo[dst * w..(dst + 1) * w].iter_mut().zip(&hi[..w]) {
                *d ^= s;
            }
        }
    }

    /// Reduces the matrix in place to reduced row-echelon form and returns
    /// the pivot columns. Row `i < rank` ends with its leading one at
    /// `pivots[i]`; rows past the rank are zero.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, rank);
            for r in 0..self.rows {
                if r != rank && self.get(r, c) {
                    self.xor_row(rank, r);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        let packed = pack_bits(v);
        (0..self.rows)
            .map(|r| parity_of_and(self.row(r), &packed))
            .collect()
    }
}

/// Packs 0/1 bytes into little-endian `u64` words.
pub fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 64] |= u64::from(b & 1) << (i % 64);
    }
    out
}

#[inline]
pub fn parity_of_and(a: &[u64], b: &[u64]) -> u8 {
    let ones: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
    (ones & 1) as u8
}
