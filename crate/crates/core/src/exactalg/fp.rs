//! Prime fields 𝔽_ℓ for small ℓ, with u64 residues.

use super::{inv_mod, is_prime, AlgError};

/// The field 𝔽_ℓ. Cheap to copy; element operations take the field by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp {
    pub ell: u64,
}

/// A residue in [0, ℓ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpElt {
    pub value: u64,
    pub modulus: u64,
}

impl Fp {
    pub fn new(ell: u64) -> Result<Fp, AlgError> {
        if !is_prime(ell) {
            return Err(AlgError::NotPrime(ell));
        }
        Ok(Fp { ell })
    }

    pub fn elt(&self, v: i64) -> FpElt {
        FpElt {
            value: v.rem_euclid(self.ell as i64) as u64,
            modulus: self.ell,
        }
    }

    pub fn reduce(&self, v: &super::Int) -> u64 {
        use num::traits::Euclid;
        use num::ToPrimitive;
        let m: super::Int = super::Int::from(self.ell);
        v.rem_euclid(&m).to_u64().expect("residue fits in u64")
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.ell
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.ell - b % self.ell) % self.ell
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.ell as u128) as u64
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        inv_mod(a, self.ell)
    }
}

impl FpElt {
    pub fn fp(&self) -> Fp {
        Fp { ell: self.modulus }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_modulus() {
        assert!(Fp::new(6).is_err());
        assert!(Fp::new(1).is_err());
        assert!(Fp::new(2).is_ok());
    }

    #[test]
    fn field_ops() {
        let f = Fp::new(7).unwrap();
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.inv(3), Some(5));
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.elt(-1).value, 6);
    }
}
