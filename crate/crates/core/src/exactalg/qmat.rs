//! Dense rational matrices: deterministic reduced row echelon form, kernels,
//! exact solves and inverses.

use super::{AlgError, Int, Rat, ZMat};
use num::{Integer, One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        QMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_zmat(m: &ZMat) -> Self {
        QMat {
            rows: m.rows,
            cols: m.cols,
            data: m.rows_iter().flatten().map(|x| Rat::from(x.clone())).collect(),
        }
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut out = QMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let t = a * b;
                        out[(i, j)] += t;
                    }
                }
            }
        }
        out
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    /// Pivoting is deterministic: first nonzero entry in column order.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..self.cols {
            let Some(p) = (pr..self.rows).find(|&r| !self[(r, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(p, pr);
            let inv = self[(pr, c)].recip();
            for j in c..self.cols {
                let t = &self[(pr, j)] * &inv;
                self[(pr, j)] = t;
            }
            for r in 0..self.rows {
                if r != pr && !self[(r, c)].is_zero() {
                    let f = self[(r, c)].clone();
                    for j in c..self.cols {
                        let t = &f * &self[(pr, j)];
                        self[(r, j)] -= t;
                    }
                }
            }
            pivots.push(c);
            pr += 1;
            if pr == self.rows {
                break;
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel {v : M·v = 0}; count = cols − rank.
    pub fn right_kernel_basis(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut basis = Vec::new();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(i, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left kernel {v : v·M = 0}.
    pub fn left_kernel_basis(&self) -> Vec<Vec<Rat>> {
        self.transpose().right_kernel_basis()
    }

    /// Solve self·X = b for all columns of b at once; None if inconsistent.
    pub fn solve_matrix(&self, b: &QMat) -> Option<QMat> {
        assert_eq!(self.rows, b.rows);
        let mut aug = QMat::zero(self.rows, self.cols + b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..b.cols {
                aug[(i, self.cols + j)] = b[(i, j)].clone();
            }
        }
        let pivots = aug.rref();
        // Any pivot in the RHS block means inconsistency.
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = QMat::zero(self.cols, b.cols);
        for (i, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x[(pc, j)] = aug[(i, self.cols + j)].clone();
            }
        }
        // Verify exactly (guards against under-determined systems silently
        // picking a particular solution — fine — but the product must match).
        if &self.mul(&x) != b {
            return None;
        }
        Some(x)
    }

    pub fn solve_right(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        let bm = QMat::from_rows(b.iter().map(|x| vec![x.clone()]).collect());
        let x = self.solve_matrix(&bm)?;
        Some((0..self.cols).map(|i| x[(i, 0)].clone()).collect())
    }

    /// Solve x·self = b for a row vector b.
    pub fn solve_left(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        self.transpose().solve_right(b)
    }

    pub fn inverse(&self) -> Result<QMat, AlgError> {
        if self.rows != self.cols {
            return Err(AlgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        self.solve_matrix(&QMat::identity(self.rows)).ok_or(AlgError::Singular)
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> Int {
        let mut l = Int::one();
        for x in &self.data {
            l = l.lcm(x.denom());
        }
        l
    }

    /// Scale by `den` and return the integer matrix; panics if not integral.
    pub fn to_zmat_scaled(&self, den: &Int) -> ZMat {
        let mut out = ZMat::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = &self[(i, j)] * Rat::from(den.clone());
                assert!(v.is_integer(), "matrix entry not integral after scaling");
                out[(i, j)] = v.to_integer();
            }
        }
        out
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

impl QMat {
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

#[cfg(test)]
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        assert!(QMat::identity(3).right_kernel_basis().is_empty());
        assert_eq!(QMat::zero(1, 3).right_kernel_basis().len(), 3);
        let m = QMat::from_zmat(&ZMat::from_i64(&[&[1, 1, 0], &[0, 0, 1]]));
        let k = m.right_kernel_basis();
        assert_eq!(k.len(), 1);
        // proportional to (1, -1, 0)
        assert_eq!(k[0][0], -k[0][1].clone());
        assert!(k[0][2].is_zero());
        for v in &k {
            let vm = QMat::from_rows(v.iter().map(|x| vec![x.clone()]).collect());
            assert!(m.mul(&vm).is_zero());
        }
    }

    #[test]
    fn inverse_and_solve() {
        let m = QMat::from_zmat(&ZMat::from_i64(&[&[2, 1], &[1, 1]]));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
        let b = vec![rat(3, 1), rat(2, 1)];
        let x = m.solve_right(&b).unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(1, 1)]);
        let singular = QMat::from_zmat(&ZMat::from_i64(&[&[1, 2], &[2, 4]]));
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn rank_drop_mod_ell() {
        // rank over Q >= rank mod ell, on a handful of small matrices.
        let mats = [
            ZMat::from_i64(&[&[2, 4], &[1, 3]]),
            ZMat::from_i64(&[&[6, 2], &[3, 9]]),
            ZMat::from_i64(&[&[5, 10, 15], &[1, 2, 3], &[0, 5, 0]]),
        ];
        for m in &mats {
            let qr = QMat::from_zmat(m).rank();
            for ell in [2u64, 3, 5, 7] {
                assert!(m.rank_mod(ell).unwrap() <= qr);
            }
        }
    }
}
