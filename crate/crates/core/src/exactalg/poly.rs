//! Minimal univariate polynomial arithmetic over ℤ and ℚ: evaluation at a
//! matrix, derivatives, monic gcd and squarefree parts. No factorization.

use super::{Int, QMat, Rat, ZMat};
use num::{One, Zero};

/// Polynomial over ℤ, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZPoly {
    coeffs: Vec<Int>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<Int>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Int::zero());
        }
        ZPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Horner evaluation at a square integer matrix.
    pub fn eval_matrix(&self, m: &ZMat) -> ZMat {
        assert_eq!(m.rows, m.cols);
        let n = m.rows;
        let mut acc = ZMat::zero(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m);
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    pub fn to_qpoly(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| Rat::from(c.clone())).collect())
    }
}

impl std::fmt::Display for ZPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Polynomial over ℚ, coefficients ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<Rat>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rat::zero());
        }
        QPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() == 1 {
            return QPoly::new(vec![Rat::zero()]);
        }
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from(Int::from(i as i64)))
                .collect(),
        )
    }

    fn monic(&self) -> QPoly {
        let lead = self.coeffs.last().unwrap();
        if lead.is_zero() || lead.is_one() {
            return self.clone();
        }
        let inv = lead.recip();
        QPoly::new(self.coeffs.iter().map(|c| c * &inv).collect())
    }

    /// Remainder of self divided by d (d nonzero).
    fn rem(&self, d: &QPoly) -> QPoly {
        assert!(!d.is_zero());
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let dl = d.coeffs.last().unwrap().clone();
        while r.len() > dd && !(r.len() == 1 && r[0].is_zero()) {
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap() / &dl;
            if f.is_zero() {
                r.pop();
                continue;
            }
            for i in 0..=dd {
                let t = &f * &d.coeffs[i];
                r[shift + i] -= t;
            }
            while r.len() > 1 && r.last().unwrap().is_zero() {
                r.pop();
            }
            if r.len() <= dd {
                break;
            }
        }
        QPoly::new(r)
    }

    /// Exact quotient (panics if division is not exact).
    pub fn div_exact(&self, d: &QPoly) -> QPoly {
        assert!(!d.is_zero());
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let dl = d.coeffs.last().unwrap().clone();
        let mut q = vec![Rat::zero(); self.degree().saturating_sub(dd) + 1];
        while r.len() > dd || (r.len() == dd + 1) {
            if r.len() < dd + 1 {
                break;
            }
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap() / &dl;
            q[shift] = f.clone();
            for i in 0..=dd {
                let t = &f * &d.coeffs[i];
                r[shift + i] -= t;
            }
            while r.len() > 1 && r.last().unwrap().is_zero() {
                r.pop();
            }
            if r.len() == 1 && r[0].is_zero() {
                break;
            }
            if r.len() <= dd {
                break;
            }
        }
        assert!(r.iter().all(|c| c.is_zero()), "polynomial division not exact");
        QPoly::new(q)
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Squarefree part: self / gcd(self, self′), monic.
    pub fn squarefree_part(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.monic();
        }
        self.div_exact(&g).monic()
    }

    /// Horner evaluation at a square rational matrix.
    pub fn eval_qmat(&self, m: &QMat) -> QMat {
        assert_eq!(m.rows, m.cols);
        let n = m.rows;
        let mut acc = QMat::zero(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m);
            for i in 0..n {
                acc[(i, i)] += c.clone();
            }
        }
        acc
    }
}

/// Characteristic polynomial of a rational square matrix
/// (Faddeev–LeVerrier over ℚ).
pub fn charpoly_qmat(m: &QMat) -> QPoly {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    let mut acc = m.clone();
    for k in 1..=n {
        let mut tr = Rat::zero();
        for i in 0..n {
            tr += acc[(i, i)].clone();
        }
        let c = -tr / Rat::from(Int::from(k as i64));
        coeffs[n - k] = c.clone();
        if k < n {
            let mut shifted = acc.clone();
            for i in 0..n {
                shifted[(i, i)] += c.clone();
            }
            acc = m.mul(&shifted);
        }
    }
    QPoly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn q(n: i64) -> Rat {
        Rat::from(Int::from(n))
    }

    #[test]
    fn squarefree() {
        // (x-1)^2 (x-2) -> (x-1)(x-2) = x^2 - 3x + 2
        let p = QPoly::new(vec![q(-2), q(5), q(-4), q(1)]);
        let sf = p.squarefree_part();
        assert_eq!(sf.coeffs(), &[q(2), q(-3), q(1)]);
    }

    #[test]
    fn gcd_monic() {
        let a = QPoly::new(vec![q(-1), q(0), q(1)]); // x^2-1
        let b = QPoly::new(vec![q(-1), q(1)]); // x-1
        assert_eq!(a.gcd(&b).coeffs(), &[q(-1), q(1)]);
    }

    #[test]
    fn charpoly_rational_matches_integer() {
        let m = ZMat::from_i64(&[&[0, 1], &[1, 0]]);
        let q1 = charpoly_qmat(&QMat::from_zmat(&m));
        let z = m.charpoly().unwrap().to_qpoly();
        assert_eq!(q1, z);
    }

    #[test]
    fn display_zpoly() {
        let p = ZPoly::new(vec![Int::from(-3), Int::zero(), Int::one()]);
        assert_eq!(p.to_string(), "1*x^2 + -3");
    }
}
