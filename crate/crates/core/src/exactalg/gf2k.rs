//! Binary fields 𝔽_{2^k}, k ≤ 8, in polynomial basis.
//!
//! Elements are bit patterns (bit i = coefficient of x^i) reduced modulo a
//! fixed irreducible polynomial of degree k. The per-degree default moduli
//! are recorded in one table so serialized elements are reproducible; a
//! custom modulus (e.g. x⁶+x⁵+1 instead of x⁶+x+1) may be selected where a
//! computation needs to name elements by a specific minimal polynomial.

use super::AlgError;

/// Minimal-weight irreducible modulus per degree, bit i = coeff of x^i.
const DEFAULT_MODULUS: [u16; 9] = [
    0,      // degree 0: unused
    0b11,   // x + 1
    0b111,  // x² + x + 1
    0b1011, // x³ + x + 1
    0b1_0011,      // x⁴ + x + 1
    0b10_0101,     // x⁵ + x² + 1
    0b100_0011,    // x⁶ + x + 1
    0b1000_0011,   // x⁷ + x + 1
    0b1_0001_1011, // x⁸ + x⁴ + x³ + x + 1
];

/// The field 𝔽_{2^k} for a fixed irreducible modulus of degree k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    pub k: u32,
    pub modulus: u16,
}

/// An element of some 𝔽_{2^k}; plain ops live on [`BinaryField`].
pub type BinaryFieldElt = u8;

/// Polynomial degree of a nonzero bit pattern.
fn deg(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Remainder of polynomial division over 𝔽₂.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = deg(b);
    while a != 0 && deg(a) >= db {
        a ^= b << (deg(a) - db);
    }
    a
}

/// Irreducibility over 𝔽₂ by trial division (degrees here are tiny).
fn is_irreducible(f: u32) -> bool {
    let d = deg(f);
    if d == 0 {
        return false;
    }
    for g in 2u32..(1u32 << (d / 2 + 1)) {
        if deg(g) >= 1 && deg(g) <= d / 2 && poly_rem(f, g) == 0 {
            return false;
        }
    }
    true
}

impl BinaryField {
    /// Field with the conventional modulus for degree `k`.
    pub fn new(k: u32) -> Result<Self, AlgError> {
        if !(1..=8).contains(&k) {
            return Err(AlgError::BadDegree(k));
        }
        Self::with_modulus(k, DEFAULT_MODULUS[k as usize])
    }

    /// Field with an explicitly chosen irreducible modulus of degree `k`.
    pub fn with_modulus(k: u32, modulus: u16) -> Result<Self, AlgError> {
        if !(1..=8).contains(&k) {
            return Err(AlgError::BadDegree(k));
        }
        if deg(modulus as u32) != k || !is_irreducible(modulus as u32) {
            return Err(AlgError::ReducibleModulus(modulus));
        }
        Ok(BinaryField { k, modulus })
    }

    pub fn order(&self) -> u64 {
        1u64 << self.k
    }

    /// All field elements in a fixed order (0, 1, x, x+1, ...).
    pub fn elements(&self) -> impl Iterator<Item = BinaryFieldElt> {
        (0..(1u16 << self.k)).map(|x| x as u8)
    }

    pub fn zero(&self) -> BinaryFieldElt {
        0
    }

    pub fn one(&self) -> BinaryFieldElt {
        1
    }

    pub fn add(&self, a: BinaryFieldElt, b: BinaryFieldElt) -> BinaryFieldElt {
        a ^ b
    }

    pub fn mul(&self, a: BinaryFieldElt, b: BinaryFieldElt) -> BinaryFieldElt {
        // Carry-less multiply then reduce; operands fit well inside u32.
        let mut acc: u32 = 0;
        let (a, b) = (a as u32, b as u32);
        for i in 0..self.k {
            if (b >> i) & 1 == 1 {
                acc ^= a << i;
            }
        }
        poly_rem(acc, self.modulus as u32) as u8
    }

    pub fn pow(&self, mut a: BinaryFieldElt, mut e: u64) -> BinaryFieldElt {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: BinaryFieldElt) -> Option<BinaryFieldElt> {
        if a == 0 {
            return None;
        }
        Some(self.pow(a, (1u64 << self.k) - 2))
    }

    pub fn div(&self, a: BinaryFieldElt, b: BinaryFieldElt) -> BinaryFieldElt {
        self.mul(a, self.inv(b).expect("division by zero in binary field"))
    }

    /// The Frobenius a ↦ a².
    pub fn frob(&self, a: BinaryFieldElt) -> BinaryFieldElt {
        self.mul(a, a)
    }

    /// Evaluate a polynomial with 𝔽₂ coefficients (bit i = coeff of x^i).
    pub fn eval_f2_poly(&self, poly: u64, a: BinaryFieldElt) -> BinaryFieldElt {
        let mut acc = self.zero();
        for i in (0..64).rev() {
            acc = self.mul(acc, a);
            if (poly >> i) & 1 == 1 {
                acc = self.add(acc, self.one());
            }
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: BinaryFieldElt) -> u64 {
        assert!(a != 0);
        let mut x = a;
        let mut n = 1;
        while x != self.one() {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli_are_irreducible() {
        for k in 1..=8 {
            BinaryField::new(k).unwrap();
        }
    }

    #[test]
    fn alternative_degree6_modulus() {
        // x⁶+x⁵+1 is the other naming convention used for 𝔽_{2⁶} here.
        BinaryField::with_modulus(6, 0b110_0001).unwrap();
        assert!(BinaryField::with_modulus(6, 0b100_0001).is_err()); // x⁶+1 = (x+1)⁶·…
    }

    #[test]
    fn field_axioms_spot_check() {
        for field in [
            BinaryField::new(6).unwrap(),
            BinaryField::with_modulus(6, 0b110_0001).unwrap(),
            BinaryField::new(8).unwrap(),
        ] {
            for a in field.elements() {
                let a = a as u8;
                // a^(2^k) = a for all a.
                assert_eq!(field.pow(a, field.order()), a);
                for b in field.elements().step_by(3) {
                    let b = b as u8;
                    for c in [1u8, 7, 13] {
                        // distributivity
                        assert_eq!(
                            field.mul(a, field.add(b, c)),
                            field.add(field.mul(a, b), field.mul(a, c))
                        );
                        // associativity
                        assert_eq!(
                            field.mul(field.mul(a, b), c),
                            field.mul(a, field.mul(b, c))
                        );
                    }
                }
                if a != 0 {
                    assert_eq!(field.mul(a, field.inv(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn frobenius_has_order_k() {
        let f = BinaryField::new(6).unwrap();
        for a in f.elements() {
            let a = a as u8;
            let mut x = a;
            for _ in 0..6 {
                x = f.frob(x);
            }
            assert_eq!(x, a);
        }
        // Frobenius order is exactly 6: some element is moved by frob^3.
        assert!(f.elements().any(|a| {
            let mut x = a as u8;
            for _ in 0..3 {
                x = f.frob(x);
            }
            x != a as u8
        }));
    }

    #[test]
    fn multiplicative_group_of_f64() {
        let f = BinaryField::new(6).unwrap();
        let mut max_order = 0;
        for a in f.elements().skip(1) {
            let o = f.mult_order(a as u8);
            assert_eq!(63 % o, 0);
            max_order = max_order.max(o);
        }
        assert_eq!(max_order, 63);
    }
}
