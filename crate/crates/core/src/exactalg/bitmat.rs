//! Bit-packed matrices over 𝔽₂: 64 columns per word, XOR row reduction.

/// A dense 𝔽₂ matrix; row-major, each row packed into ⌈cols/64⌉ words.
#[derive(Debug, Clone)]
pub struct BitMat {
    pub rows: usize,
    pub cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        BitMat {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        let w = r * self.words_per_row + c / 64;
        if bit {
            self.data[w] |= 1 << (c % 64);
        } else {
            self.data[w] &= !(1 << (c % 64));
        }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// Build from a list of rows given as 0/1 iterators.
    pub fn from_rows<I, J>(cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = J>,
        J: IntoIterator<Item = bool>,
    {
        let rows: Vec<Vec<bool>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
        let mut m = BitMat::zero(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &b) in r.iter().enumerate() {
                if b {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Row-reduction rank.
    pub fn rank(&self) -> usize {
        self.clone().eliminate(None)
    }

    /// Basis of the left kernel: each returned mask m (bit i = row i) gives a
    /// nonzero combination of rows summing to zero. Row count must be ≤ 64·4.
    pub fn left_kernel_basis(&self) -> Vec<Vec<u64>> {
        let mut hist: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                let mut h = vec![0u64; self.rows.div_ceil(64).max(1)];
                h[i / 64] |= 1 << (i % 64);
                h
            })
            .collect();
        let mut m = self.clone();
        let mut kernel = Vec::new();
        let mut pivot_rows: Vec<usize> = Vec::new();
        let mut pivot_cols: Vec<usize> = Vec::new();
        for r in 0..m.rows {
            // Reduce row r against existing pivots.
            for (&pr, &pc) in pivot_rows.iter().zip(pivot_cols.iter()) {
                if m.get(r, pc) {
                    let (a, b) = split_rows(&mut m.data, m.words_per_row, r, pr);
                    for (x, y) in a.iter_mut().zip(b.iter()) {
                        *x ^= *y;
                    }
                    let (ha, hb) = split_vecs(&mut hist, r, pr);
                    for (x, y) in ha.iter_mut().zip(hb.iter()) {
                        *x ^= *y;
                    }
                }
            }
            match (0..m.cols).find(|&c| m.get(r, c)) {
                Some(c) => {
                    pivot_rows.push(r);
                    pivot_cols.push(c);
                }
                None => kernel.push(hist[r].clone()),
            }
        }
        kernel
    }

    fn eliminate(&mut self, mut history: Option<&mut Vec<Vec<u64>>>) -> usize {
        let mut rank = 0;
        let mut pivot_row = 0;
        for c in 0..self.cols {
            // First nonzero pivot in column order (deterministic).
            let Some(p) = (pivot_row..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, pivot_row);
            if let Some(h) = history.as_deref_mut() {
                h.swap(p, pivot_row);
            }
            for r in 0..self.rows {
                if r != pivot_row && self.get(r, c) {
                    let (a, b) = split_rows(&mut self.data, self.words_per_row, r, pivot_row);
                    for (x, y) in a.iter_mut().zip(b.iter()) {
                        *x ^= *y;
                    }
                    if let Some(h) = history.as_deref_mut() {
                        let (ha, hb) = split_vecs(h, r, pivot_row);
                        for (x, y) in ha.iter_mut().zip(hb.iter()) {
                            *x ^= *y;
                        }
                    }
                }
            }
            rank += 1;
            pivot_row += 1;
            if pivot_row == self.rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words_per_row {
            self.data.swap(a * self.words_per_row + w, b * self.words_per_row + w);
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(|&w| w == 0)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Entrywise reduction of an integer matrix mod 2.
    pub fn from_zmat(m: &super::ZMat) -> Self {
        use num::Integer;
        let mut out = BitMat::zero(m.rows, m.cols);
        for r in 0..m.rows {
            for c in 0..m.cols {
                if m[(r, c)].is_odd() {
                    out.set(r, c, true);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn add(&self, other: &BitMat) -> BitMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(other.data.iter()) {
            *x ^= *y;
        }
        out
    }

    /// Matrix product over 𝔽₂: row r of the result is the XOR of the rows of
    /// `other` selected by the set bits of row r of `self`.
    pub fn mul(&self, other: &BitMat) -> BitMat {
        assert_eq!(self.cols, other.rows);
        let mut out = BitMat::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let dst = r * out.words_per_row;
                    let src = k * other.words_per_row;
                    for w in 0..out.words_per_row {
                        out.data[dst + w] ^= other.data[src + w];
                    }
                }
            }
        }
        out
    }

    /// The matrix entries flattened row-major into a single bit row.
    pub fn flatten_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.get(r, c));
            }
        }
        out
    }
}

fn split_rows(data: &mut [u64], wpr: usize, r: usize, p: usize) -> (&mut [u64], &[u64]) {
    assert_ne!(r, p);
    if r < p {
        let (lo, hi) = data.split_at_mut(p * wpr);
        (&mut lo[r * wpr..(r + 1) * wpr], &hi[..wpr])
    } else {
        let (lo, hi) = data.split_at_mut(r * wpr);
        (&mut hi[..wpr], &lo[p * wpr..(p + 1) * wpr])
    }
}

fn split_vecs(v: &mut [Vec<u64>], r: usize, p: usize) -> (&mut Vec<u64>, &Vec<u64>) {
    assert_ne!(r, p);
    if r < p {
        let (lo, hi) = v.split_at_mut(p);
        (&mut lo[r], &hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(r);
        (&mut hi[0], &lo[p])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_small() {
        let m = BitMat::from_rows(3, vec![
            vec![true, false, true],
            vec![true, false, true],
            vec![false, true, false],
        ]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn left_kernel() {
        let m = BitMat::from_rows(3, vec![
            vec![true, false, true],
            vec![false, true, false],
            vec![true, true, true],
        ]);
        let k = m.left_kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][0], 0b111); // rows 0+1+2 = 0
    }
}
