//! Dense integer matrices: multiplication, fraction-free rank/determinant,
//! characteristic polynomial, Hermite normal form with unimodular transform,
//! saturated kernels, and rank modulo a prime.
//!
//! Vectors act on the right throughout the crate: v ↦ v·A, so the i-th row of
//! an operator matrix is the image of the i-th basis vector.

use super::{AlgError, BitMat, Fp, Int, ZPoly};
use num::traits::Euclid;
use num::{Integer, One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Int>,
}

impl ZMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        ZMat {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        ZMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Int::from(x)).collect())
                .collect(),
        )
    }

    pub fn row(&self, r: usize) -> &[Int] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[Int]> {
        (0..self.rows).map(|r| self.row(r))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> ZMat {
        let mut t = ZMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = ZMat::zero(self.rows, other.cols);
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

    pub fn add(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(other.data.iter()) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(other.data.iter()) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, s: &Int) -> ZMat {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= s;
        }
        out
    }

    /// v·A for a row vector v.
    pub fn apply_left(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Int::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    out[j] += vi * a;
                }
            }
        }
        out
    }

    pub fn flatten(&self) -> Vec<Int> {
        self.data.clone()
    }

    pub fn trace(&self) -> Int {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)].clone()).sum()
    }

    /// Rank of the matrix reduced mod ℓ. For ℓ = 2 a bit-packed elimination
    /// is used; it is property-tested to agree with the generic path.
    pub fn rank_mod(&self, ell: u64) -> Result<usize, AlgError> {
        let fp = Fp::new(ell)?;
        if ell == 2 {
            let m = BitMat::from_rows(
                self.cols,
                self.rows_iter()
                    .map(|r| r.iter().map(|x| x.is_odd()).collect::<Vec<_>>()),
            );
            return Ok(m.rank());
        }
        Ok(self.rank_mod_generic(fp))
    }

    pub fn rank_mod_generic(&self, fp: Fp) -> usize {
        let mut m: Vec<Vec<u64>> = self
            .rows_iter()
            .map(|r| r.iter().map(|x| fp.reduce(x)).collect())
            .collect();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| m[r][c] != 0) else {
                continue;
            };
            m.swap(p, rank);
            let inv = fp.inv(m[rank][c]).expect("pivot invertible");
            for j in c..self.cols {
                m[rank][j] = fp.mul(m[rank][j], inv);
            }
            for r in 0..self.rows {
                if r != rank && m[r][c] != 0 {
                    let f = m[r][c];
                    for j in c..self.cols {
                        let t = fp.mul(f, m[rank][j]);
                        m[r][j] = fp.sub(m[r][j], t);
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Rank over ℚ via fraction-free echelon.
    pub fn rank(&self) -> usize {
        let mut ech = ZEchelon::new(self.cols);
        for r in self.rows_iter() {
            ech.insert(r.to_vec());
        }
        ech.rank()
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn det(&self) -> Result<Int, AlgError> {
        if self.rows != self.cols {
            return Err(AlgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut m: Vec<Vec<Int>> = self.rows_iter().map(|r| r.to_vec()).collect();
        let mut sign = 1i32;
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                    return Ok(Int::zero());
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    let (q, r) = t.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    m[i][j] = q;
                }
                m[i][k] = Int::zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        Ok(if sign < 0 { -d } else { d })
    }

    /// Characteristic polynomial, monic of degree n, by the
    /// Faddeev–LeVerrier recurrence (all divisions exact over ℤ).
    pub fn charpoly(&self) -> Result<ZPoly, AlgError> {
        if self.rows != self.cols {
            return Err(AlgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut coeffs = vec![Int::zero(); n + 1];
        coeffs[n] = Int::one(); // x^n
        let mut m = self.clone(); // M_1 = A
        for k in 1..=n {
            let (c, rem) = (-m.trace()).div_rem(&Int::from(k as i64));
            debug_assert!(rem.is_zero(), "Faddeev-LeVerrier division must be exact");
            coeffs[n - k] = c.clone();
            if k < n {
                let mut shifted = m.clone();
                for i in 0..n {
                    shifted[(i, i)] += &c;
                }
                m = self.mul(&shifted);
            }
        }
        Ok(ZPoly::new(coeffs))
    }

    /// Row Hermite normal form together with a unimodular U with U·A = H.
    /// H is in row-echelon shape with positive pivots and entries above each
    /// pivot reduced into [0, pivot).
    pub fn hnf_with_transform(&self) -> (ZMat, ZMat) {
        let mut h: Vec<Vec<Int>> = self.rows_iter().map(|r| r.to_vec()).collect();
        let mut u: Vec<Vec<Int>> = (0..self.rows)
            .map(|i| {
                let mut r = vec![Int::zero(); self.rows];
                r[i] = Int::one();
                r
            })
            .collect();
        let mut pivot_row = 0;
        for c in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            // Clear column c below pivot_row by gcd steps.
            loop {
                let mut best: Option<usize> = None;
                for r in pivot_row..self.rows {
                    if !h[r][c].is_zero()
                        && best.map_or(true, |b| h[r][c].abs() < h[b][c].abs())
                    {
                        best = Some(r);
                    }
                }
                let Some(b) = best else { break };
                h.swap(pivot_row, b);
                u.swap(pivot_row, b);
                let mut again = false;
                for r in pivot_row + 1..self.rows {
                    if !h[r][c].is_zero() {
                        let q = div_round(&h[r][c], &h[pivot_row][c]);
                        row_submul(&mut h, r, pivot_row, &q);
                        row_submul(&mut u, r, pivot_row, &q);
                        if !h[r][c].is_zero() {
                            again = true;
                        }
                    }
                }
                if !again {
                    break;
                }
            }
            if h[pivot_row][c].is_zero() {
                continue;
            }
            if h[pivot_row][c].is_negative() {
                row_negate(&mut h, pivot_row);
                row_negate(&mut u, pivot_row);
            }
            // Reduce entries above the pivot into [0, pivot).
            for r in 0..pivot_row {
                if !h[r][c].is_zero() {
                    let q = h[r][c].div_euclid(&h[pivot_row][c]);
                    row_submul(&mut h, r, pivot_row, &q);
                    row_submul(&mut u, r, pivot_row, &q);
                }
            }
            pivot_row += 1;
        }
        (ZMat::from_rows(h), ZMat::from_rows(u))
    }

    pub fn hnf(&self) -> ZMat {
        self.hnf_with_transform().0
    }

    /// The unique solution x of x·A = b for a square invertible A, found by
    /// solving modulo word-size primes, Chinese remaindering, and rational
    /// reconstruction. The result is verified exactly over ℚ before it is
    /// returned, so reconstruction never produces a silently wrong answer.
    /// Full rank modulo any single prime certifies invertibility; None means
    /// A could not be certified invertible (in particular whenever A is
    /// singular, since it is then singular modulo every prime).
    pub fn solve_left_invertible(&self, b: &[super::Rat]) -> Option<Vec<super::Rat>> {
        use super::Rat;
        assert_eq!(self.rows, self.cols, "square system required");
        let n = self.rows;
        assert_eq!(b.len(), n);
        if n == 0 {
            return Some(Vec::new());
        }
        // Clear denominators: solve y·A = D·b over ℤ-residues, return y/D.
        let mut d = Int::one();
        for x in b {
            d = d.lcm(x.denom());
        }
        let b_int: Vec<Int> = b
            .iter()
            .map(|x| (x * Rat::from(d.clone())).to_integer())
            .collect();

        let mut modulus = Int::one();
        let mut residues = vec![Int::zero(); n];
        let mut ell = 0xffff_fffbu64; // largest prime below 2^32
        let mut misses = 0usize;
        let mut successes = 0usize;
        for _ in 0..1000 {
            while !super::is_prime(ell) {
                ell -= 2;
            }
            let fp = Fp { ell };
            match self.solve_left_mod(&b_int, fp) {
                None => {
                    misses += 1;
                    if successes == 0 && misses >= 20 {
                        return None;
                    }
                }
                Some(sol) => {
                    successes += 1;
                    if modulus.is_one() {
                        for (ri, si) in residues.iter_mut().zip(sol.iter()) {
                            *ri = Int::from(*si);
                        }
                        modulus = Int::from(ell);
                    } else {
                        // CRT: y ← y + M·((s − y)·M⁻¹ mod ℓ).
                        let m_inv = super::inv_mod(fp.reduce(&modulus), ell).unwrap();
                        for (ri, si) in residues.iter_mut().zip(sol.iter()) {
                            let delta = fp.mul(fp.sub(*si, fp.reduce(ri)), m_inv);
                            *ri += &modulus * Int::from(delta);
                        }
                        modulus *= Int::from(ell);
                    }
                    if let Some(y) = reconstruct_vec(&residues, &modulus) {
                        // Exact check of y·A = b_int on a common denominator.
                        let mut yden = Int::one();
                        for x in &y {
                            yden = yden.lcm(x.denom());
                        }
                        let y_int: Vec<Int> = y
                            .iter()
                            .map(|x| (x * Rat::from(yden.clone())).to_integer())
                            .collect();
                        let prod = self.apply_left(&y_int);
                        if prod
                            .iter()
                            .zip(b_int.iter())
                            .all(|(l, r)| *l == r * &yden)
                        {
                            let dr = Rat::from(d.clone());
                            return Some(y.into_iter().map(|x| x / &dr).collect());
                        }
                    }
                }
            }
            ell -= 2;
        }
        None
    }

    /// Solve x·A ≡ b (mod ℓ) for square A; None when A is singular mod ℓ.
    fn solve_left_mod(&self, b: &[Int], fp: Fp) -> Option<Vec<u64>> {
        let n = self.rows;
        // x·A = b is Aᵀ·xᵀ = bᵀ; augmented elimination on Aᵀ.
        let mut m: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut row: Vec<u64> = (0..n).map(|j| fp.reduce(&self[(j, i)])).collect();
                row.push(fp.reduce(&b[i]));
                row
            })
            .collect();
        for c in 0..n {
            let pivot = (c..n).find(|&r| m[r][c] != 0)?;
            m.swap(c, pivot);
            let inv = fp.inv(m[c][c]).unwrap();
            for j in c..=n {
                m[c][j] = fp.mul(m[c][j], inv);
            }
            for r in 0..n {
                if r != c && m[r][c] != 0 {
                    let f = m[r][c];
                    for j in c..=n {
                        let t = fp.mul(f, m[c][j]);
                        m[r][j] = fp.sub(m[r][j], t);
                    }
                }
            }
        }
        Some((0..n).map(|i| m[i][n]).collect())
    }

    /// Saturated basis of the left kernel {v ∈ ℤ^rows : v·A = 0}: the rows of
    /// the unimodular transform that correspond to zero rows of the HNF.
    pub fn left_kernel_saturated(&self) -> ZMat {
        let (h, u) = self.hnf_with_transform();
        let mut rows = Vec::new();
        for r in 0..self.rows {
            if h.row(r).iter().all(|x| x.is_zero()) {
                rows.push(u.row(r).to_vec());
            }
        }
        ZMat::from_rows(rows)
    }
}

impl std::ops::Index<(usize, usize)> for ZMat {
    type Output = Int;
    fn index(&self, (r, c): (usize, usize)) -> &Int {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ZMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Int {
        &mut self.data[r * self.cols + c]
    }
}

fn row_submul(m: &mut [Vec<Int>], r: usize, p: usize, q: &Int) {
    if q.is_zero() {
        return;
    }
    let prow = m[p].clone();
    for (x, y) in m[r].iter_mut().zip(prow.iter()) {
        *x -= q * y;
    }
}

fn row_negate(m: &mut [Vec<Int>], r: usize) {
    for x in m[r].iter_mut() {
        *x = -x.clone();
    }
}

/// Quotient rounding toward the nearest integer (keeps HNF entries small).
fn div_round(a: &Int, b: &Int) -> Int {
    let (q, r) = a.div_rem(b);
    let two_r: Int = &r * Int::from(2);
    if two_r.abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Rational reconstruction of every coordinate, or None if any fails.
fn reconstruct_vec(residues: &[Int], modulus: &Int) -> Option<Vec<super::Rat>> {
    residues
        .iter()
        .map(|r| rational_reconstruct(r, modulus))
        .collect()
}

/// n/d with n ≡ a·d (mod m), |n| and |d| below √(m/2). Candidates only; the
/// caller must verify the reconstructed solution exactly.
fn rational_reconstruct(a: &Int, m: &Int) -> Option<super::Rat> {
    let bound = (m / Int::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.rem_euclid(m));
    let (mut t0, mut t1) = (Int::zero(), Int::one());
    if r1 <= bound {
        return Some(super::Rat::from(r1));
    }
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        (r0, r1) = (r1, r2);
        (t0, t1) = (t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if t1.is_negative() {
        r1 = -r1;
        t1 = -t1;
    }
    Some(super::Rat::new(r1, t1))
}

/// Incremental fraction-free echelon over ℤ of row vectors; rows are kept
/// primitive (content 1, leading entry positive), pivots in column order.
#[derive(Debug, Clone)]
pub struct ZEchelon {
    cols: usize,
    rows: Vec<Vec<Int>>,
    pivots: Vec<usize>,
}

impl ZEchelon {
    pub fn new(cols: usize) -> Self {
        ZEchelon { cols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce v against the current rows (fraction-free); the result is zero
    /// iff v lies in the ℚ-span of the inserted rows.
    pub fn reduce(&self, mut v: Vec<Int>) -> Vec<Int> {
        assert_eq!(v.len(), self.cols);
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            if !v[p].is_zero() {
                let a = row[p].clone();
                let b = v[p].clone();
                let g = a.gcd(&b);
                let (a, b) = (a / &g, b / &g);
                for (x, y) in v.iter_mut().zip(row.iter()) {
                    *x = &*x * &a - &b * y;
                }
            }
        }
        v
    }

    /// Insert a row; returns true if it was independent of the current span.
    pub fn insert(&mut self, v: Vec<Int>) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let mut content = Int::zero();
        for x in v.iter() {
            content = content.gcd(x);
        }
        if v[p].is_negative() {
            content = -content;
        }
        for x in v.iter_mut() {
            *x /= &content;
        }
        let at = self.pivots.iter().position(|&q| q > p).unwrap_or(self.pivots.len());
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_mod_examples() {
        let id = ZMat::identity(2);
        assert_eq!(id.rank_mod(3).unwrap(), 2);
        assert_eq!(ZMat::zero(3, 3).rank_mod(5).unwrap(), 0);
        let m = ZMat::from_i64(&[&[2, 4], &[1, 2]]);
        assert_eq!(m.rank_mod(2).unwrap(), 1);
        assert_eq!(m.rank_mod(3).unwrap(), 1);
        assert!(m.rank_mod(4).is_err());
    }

    #[test]
    fn charpoly_examples() {
        let id = ZMat::identity(2);
        assert_eq!(id.charpoly().unwrap().coeffs(), &[Int::from(1), Int::from(-2), Int::from(1)]);
        let z = ZMat::zero(3, 3);
        let zp: Vec<Int> = vec![0.into(), 0.into(), 0.into(), 1.into()];
        assert_eq!(z.charpoly().unwrap().coeffs(), &zp[..]);
        let swap = ZMat::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(swap.charpoly().unwrap().coeffs(), &[Int::from(-1), Int::from(0), Int::from(1)]);
    }

    #[test]
    fn cayley_hamilton() {
        let m = ZMat::from_i64(&[&[2, -1, 0], &[3, 4, 1], &[0, 5, -2]]);
        let p = m.charpoly().unwrap();
        assert!(p.eval_matrix(&m).is_zero());
    }

    #[test]
    fn hnf_properties() {
        let m = ZMat::from_i64(&[&[4, 6], &[2, 2], &[8, 10]]);
        let (h, u) = m.hnf_with_transform();
        assert_eq!(u.mul(&m), h);
        // U unimodular.
        assert_eq!(u.det().unwrap().abs(), Int::one());
        // Pivots positive, echelon shape.
        assert_eq!(h[(0, 0)], Int::from(2));
    }

    #[test]
    fn left_kernel_saturated_is_saturated() {
        // Rows: (2,4),(1,2),(3,6): left kernel rank 2, saturated.
        let m = ZMat::from_i64(&[&[2, 4], &[1, 2], &[3, 6]]);
        let k = m.left_kernel_saturated();
        assert_eq!(k.rows, 2);
        assert!(k.mul(&m).is_zero());
    }

    #[test]
    fn echelon_rank_matches_rank_mod_bound() {
        let m = ZMat::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(m.rank(), 2);
        assert!(m.rank_mod(2).unwrap() <= 2);
    }

    #[test]
    fn modular_solve() {
        use super::super::Rat;
        let a = ZMat::from_i64(&[&[2, 1, 0], &[-3, 7, 5], &[0, 11, -4]]);
        let b: Vec<Rat> = [1i64, -2, 3]
            .iter()
            .map(|&x| Rat::new(Int::from(x), Int::from(6)))
            .collect();
        let x = a.solve_left_invertible(&b).unwrap();
        // Verify independently: x·A = b.
        let mut den = Int::one();
        for v in &x {
            den = den.lcm(v.denom());
        }
        let xi: Vec<Int> = x.iter().map(|v| (v * Rat::from(den.clone())).to_integer()).collect();
        let prod = a.apply_left(&xi);
        for (l, r) in prod.iter().zip(b.iter()) {
            assert_eq!(Rat::new(l.clone(), den.clone()), r * Rat::from(Int::one()));
        }
        // Singular matrices are reported, not mis-solved.
        let s = ZMat::from_i64(&[&[1, 2], &[2, 4]]);
        let b2 = vec![Rat::from(Int::one()), Rat::from(Int::zero())];
        assert!(s.solve_left_invertible(&b2).is_none());
    }

    #[test]
    fn det_bareiss() {
        let m = ZMat::from_i64(&[&[3, 1], &[4, 2]]);
        assert_eq!(m.det().unwrap(), Int::from(2));
        let s = ZMat::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det().unwrap(), Int::zero());
    }
}
