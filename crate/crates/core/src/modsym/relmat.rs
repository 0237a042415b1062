//! Integer matrix with a single global denominator. Operators on the
//! relative modular-symbol space are rational but with a small common
//! denominator, and BigInt arithmetic is markedly faster than BigRational,
//! so products and sums are carried out on the numerator matrices.

use crate::exactalg::{Int, QMat, Rat, ZMat};
use num::{Integer, One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelMat {
    pub num: ZMat,
    pub den: Int,
}

impl RelMat {
    pub fn new(num: ZMat, den: Int) -> Self {
        assert!(den.is_positive());
        RelMat { num, den }.normalized()
    }

    pub fn identity(n: usize) -> Self {
        RelMat { num: ZMat::identity(n), den: Int::one() }
    }

    fn normalized(mut self) -> Self {
        let mut g = self.den.clone();
        for r in 0..self.num.rows {
            for c in 0..self.num.cols {
                g = g.gcd(&self.num[(r, c)]);
                if g.is_one() {
                    return self;
                }
            }
        }
        if g.is_zero() {
            return self;
        }
        for r in 0..self.num.rows {
            for c in 0..self.num.cols {
                let q = &self.num[(r, c)] / &g;
                self.num[(r, c)] = q;
            }
        }
        self.den = &self.den / &g;
        self
    }

    pub fn mul(&self, other: &RelMat) -> RelMat {
        RelMat::new(self.num.mul(&other.num), &self.den * &other.den)
    }

    pub fn add(&self, other: &RelMat) -> RelMat {
        let l = self.den.lcm(&other.den);
        let a = self.num.scale(&(&l / &self.den));
        let b = other.num.scale(&(&l / &other.den));
        RelMat::new(a.add(&b), l)
    }

    pub fn sub(&self, other: &RelMat) -> RelMat {
        let l = self.den.lcm(&other.den);
        let a = self.num.scale(&(&l / &self.den));
        let b = other.num.scale(&(&l / &other.den));
        RelMat::new(a.sub(&b), l)
    }

    /// self − s·identity.
    pub fn sub_scalar(&self, s: &Int) -> RelMat {
        let mut num = self.num.clone();
        let t: Int = s * &self.den;
        for i in 0..num.rows {
            num[(i, i)] -= &t;
        }
        RelMat::new(num, self.den.clone())
    }

    pub fn scale_int(&self, s: &Int) -> RelMat {
        RelMat::new(self.num.scale(s), self.den.clone())
    }

    pub fn to_qmat(&self) -> QMat {
        let mut out = QMat::zero(self.num.rows, self.num.cols);
        for i in 0..self.num.rows {
            for j in 0..self.num.cols {
                out[(i, j)] = Rat::new(self.num[(i, j)].clone(), self.den.clone());
            }
        }
        out
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Row vector image v ↦ v·A, numerator arithmetic.
    pub fn apply_left_num(&self, v: &[Int]) -> Vec<Int> {
        self.num.apply_left(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        let m = RelMat::new(ZMat::from_i64(&[&[2, 4], &[6, 8]]), Int::from(6));
        assert_eq!(m.den, Int::from(3));
        assert_eq!(m.num, ZMat::from_i64(&[&[1, 2], &[3, 4]]));
    }

    #[test]
    fn arithmetic() {
        let a = RelMat::new(ZMat::from_i64(&[&[1, 0], &[0, 2]]), Int::from(2));
        let b = RelMat::identity(2);
        assert_eq!(a.add(&b).to_qmat()[(0, 0)], Rat::new(3.into(), 2.into()));
        assert_eq!(a.mul(&b), a);
        assert_eq!(a.sub_scalar(&Int::from(1)).to_qmat()[(1, 1)], Rat::from(Int::from(0)));
    }
}
