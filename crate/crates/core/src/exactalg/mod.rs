//! Exact arithmetic substrate: big integers and rationals, prime fields,
//! binary fields 𝔽_{2^k}, and dense exact linear algebra.
//!
//! All elimination is deterministic (first nonzero pivot in column order) so
//! that every basis the rest of the crate derives from a matrix is
//! reproducible bit for bit.

mod fp;
mod gf2k;
mod bitmat;
mod zmat;
mod qmat;
mod poly;

pub use fp::{Fp, FpElt};
pub use gf2k::{BinaryField, BinaryFieldElt};
pub use bitmat::BitMat;
pub use zmat::ZMat;
pub use qmat::QMat;
pub use poly::{charpoly_qmat, QPoly, ZPoly};

use thiserror::Error;

/// Arbitrary-precision integer used throughout.
pub type Int = num::BigInt;
/// Arbitrary-precision rational used throughout.
pub type Rat = num::BigRational;

#[derive(Debug, Error)]
pub enum AlgError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial of degree {0} is not irreducible over F2")]
    ReducibleModulus(u16),
    #[error("binary field degree {0} out of supported range 1..=8")]
    BadDegree(u32),
}

/// Deterministic structural hash (FNV-1a, 64 bit) used for cache headers.
/// Not cryptographic; only guards against stale or truncated cache files.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Trial-division primality for the small moduli used in this crate.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Modular inverse of `a` mod `m` (m need not be prime; `a` must be a unit).
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd_u64(b, a % b) }
}
