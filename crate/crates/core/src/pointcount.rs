//! Emptiness tests for Y₁(p)(𝔽_{ℓ^d}) by elementary arithmetic on the
//! possible orders of elliptic curves over 𝔽_{ℓ^d}, together with the
//! cusp-rationality condition on X₁(p) and the combined exception lists
//! used as condition 3 by the exclusion criteria.
//!
//! All comparisons against half powers ℓ^{d/2} are done by squaring both
//! sides; there is no floating point here.

use crate::exactalg::{is_prime, Int};
use num::{Integer, One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointCountError {
    /// The emptiness statement is simply false for p = 2 and 3; p must be
    /// at least 5.
    SmallPrime(u64),
    /// p and ℓ must be distinct primes.
    BadPair(u64, u64),
    BadDegree(u64),
}

impl std::fmt::Display for PointCountError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointCountError::SmallPrime(p) => {
                write!(f, "p = {p} is not covered: statement 1 is false for p = 2 or 3")
            }
            PointCountError::BadPair(p, ell) => {
                write!(f, "p = {p}, l = {ell} must be distinct primes")
            }
            PointCountError::BadDegree(d) => write!(f, "degree {d} out of range"),
        }
    }
}

impl std::error::Error for PointCountError {}

/// Outcome of the five order conditions at (p, ℓ, d).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaterhouseReport {
    pub p: u64,
    pub ell: u64,
    pub d: u64,
    /// Conditions (1)–(5); Y₁(p)(𝔽_{ℓ^d}) is empty iff all five hold.
    pub conditions: [bool; 5],
    /// Condition (1) rules out every ordinary order divisible by p, so if
    /// it holds while the set is nonempty, every point of Y₁(p)(𝔽_{ℓ^d})
    /// is supersingular. Reporting only; never used in the logic.
    pub supersingular_only: bool,
}

impl WaterhouseReport {
    pub fn empty(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }
}

fn check_inputs(p: u64, ell: u64, d: u64) -> Result<(), PointCountError> {
    if p < 5 {
        return Err(PointCountError::SmallPrime(p));
    }
    if !is_prime(p) || !is_prime(ell) || p == ell {
        return Err(PointCountError::BadPair(p, ell));
    }
    if d == 0 {
        return Err(PointCountError::BadDegree(d));
    }
    Ok(())
}

/// Evaluates the five conditions characterising Y₁(p)(𝔽_{ℓ^d}) = ∅ for
/// distinct primes p ≥ 5 and ℓ:
///
/// 1. p divides no n with |n − ℓ^d − 1| < 2ℓ^{d/2} and gcd(n−1, ℓ) = 1;
/// 2. if d is even, p ∤ ℓ^d + 1 ± 2ℓ^{d/2};
/// 3. if d is even and ℓ ≢ 1 mod 3, p ∤ ℓ^d + 1 ± ℓ^{d/2};
/// 4. if d is odd and ℓ ∈ {2, 3}, p ∤ ℓ^d + 1 ± ℓ^{(d+1)/2};
/// 5. if d is odd or ℓ ≢ 1 mod 4, p ∤ ℓ^d + 1.
pub fn waterhouse_report(p: u64, ell: u64, d: u64) -> Result<WaterhouseReport, PointCountError> {
    check_inputs(p, ell, d)?;
    let q = Int::from(ell).pow(d as u32); // l^d
    let qp1 = &q + Int::one();
    let pz = Int::from(p);

    // (1): scan the multiples of p in the open interval of radius 2·l^{d/2}
    // around l^d + 1; the strict bound |n − l^d − 1| < 2·l^{d/2} is tested
    // as (n − l^d − 1)² < 4·l^d.
    let four_q = Int::from(4) * &q;
    let mut cond1 = true;
    // widest possible radius: 2·l^{d/2} <= 2·l^{ceil(d/2)}
    let radius = Int::from(2) * Int::from(ell).pow(d.div_ceil(2) as u32);
    let lo = &qp1 - &radius;
    let mut k = if lo.is_positive() {
        // first multiple of p at or above lo
        (&lo + &pz - Int::one()).div_floor(&pz)
    } else {
        Int::one()
    };
    loop {
        let n = &k * &pz;
        if &n > &(&qp1 + &radius) {
            break;
        }
        let diff = &n - &qp1;
        if &diff * &diff < four_q {
            // gcd(n-1, l) = 1 amounts to l not dividing n-1, l being prime
            let nm1 = &n - Int::one();
            if !nm1.mod_floor(&Int::from(ell)).is_zero() {
                cond1 = false;
            }
        }
        k += Int::one();
    }

    let divides = |x: &Int| x.mod_floor(&pz).is_zero();
    let half = if d % 2 == 0 {
        Some(Int::from(ell).pow((d / 2) as u32))
    } else {
        None
    };
    let cond2 = match &half {
        Some(h) if d % 2 == 0 => {
            let t = Int::from(2) * h;
            !divides(&(&qp1 + &t)) && !divides(&(&qp1 - &t))
        }
        _ => true,
    };
    let cond3 = match &half {
        Some(h) if ell % 3 != 1 => !divides(&(&qp1 + h)) && !divides(&(&qp1 - h)),
        _ => true,
    };
    let cond4 = if d % 2 == 1 && (ell == 2 || ell == 3) {
        let h = Int::from(ell).pow(((d + 1) / 2) as u32);
        !divides(&(&qp1 + &h)) && !divides(&(&qp1 - &h))
    } else {
        true
    };
    let cond5 = if d % 2 == 1 || ell % 4 != 1 {
        !divides(&qp1)
    } else {
        true
    };

    let conditions = [cond1, cond2, cond3, cond4, cond5];
    let empty = conditions.iter().all(|&c| c);
    Ok(WaterhouseReport {
        p,
        ell,
        d,
        conditions,
        supersingular_only: cond1 && !empty,
    })
}

/// True iff Y₁(p)(𝔽_{ℓ^d}) = ∅.
pub fn waterhouse_empty(p: u64, ell: u64, d: u64) -> Result<bool, PointCountError> {
    Ok(waterhouse_report(p, ell, d)?.empty())
}

/// True iff the (p−1)/2 cusps of X₁(p) defined over the real cyclotomic
/// field stay out of 𝔽_{ℓ^d}: they appear exactly when p | ℓ^d − 1 or
/// p | ℓ^d + 1.
pub fn cusp_field_condition(p: u64, ell: u64, d: u64) -> bool {
    let q = Int::from(ell).pow(d as u32);
    let pz = Int::from(p);
    !(&q - Int::one()).mod_floor(&pz).is_zero() && !(&q + Int::one()).mod_floor(&pz).is_zero()
}

/// The full requirement at (p, ℓ, d): for every d′ ≤ d, no non-cuspidal
/// points and no extra cusps over 𝔽_{ℓ^{d′}}, so that
/// X₁(p)(𝔽_{ℓ^{d′}}) consists exactly of the reductions of the rational
/// cusps.
pub fn x1_only_rational_cusps(p: u64, ell: u64, d: u64) -> Result<bool, PointCountError> {
    for dp in 1..=d {
        if !waterhouse_empty(p, ell, dp)? || !cusp_field_condition(p, ell, dp) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Primes p ≤ p_max (p ≥ 5, p ≠ ℓ) at which `x1_only_rational_cusps`
/// FAILS — the exceptions that the degree-d criteria must route around.
pub fn condition3_exceptions(d: u64, ell: u64, p_max: u64) -> Result<Vec<u64>, PointCountError> {
    if !(1..=7).contains(&d) {
        return Err(PointCountError::BadDegree(d));
    }
    let mut out = Vec::new();
    for p in 5..=p_max {
        if !is_prime(p) || p == ell {
            continue;
        }
        if !x1_only_rational_cusps(p, ell, d)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Exact form of the a-priori guarantee: for p > (ℓ^{d/2} + 1)² the
/// combined condition holds for every d′ ≤ d. The comparison squares the
/// half power: p > ℓ^d + 2ℓ^{d/2} + 1 ⟺ (p − ℓ^d − 1)² > 4ℓ^d with
/// p − ℓ^d − 1 > 0.
pub fn apriori_bound_holds(p: u64, ell: u64, d: u64) -> bool {
    let q = Int::from(ell).pow(d as u32);
    let gap = Int::from(p) - &q - Int::one();
    gap.is_positive() && &gap * &gap > Int::from(4) * &q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::BinaryField;
    use std::collections::BTreeSet;

    #[test]
    fn order_73_anchor_values() {
        // Y₁(73)(𝔽_{2^d}) is empty for d <= 5 and supersingular-only at
        // d = 6 (the order 65 + 8 = 73 is supersingular).
        for d in 1..=5 {
            assert!(waterhouse_empty(73, 2, d).unwrap(), "d={d}");
        }
        let r = waterhouse_report(73, 2, 6).unwrap();
        assert!(!r.empty());
        assert!(r.supersingular_only);
        // The cusps of X₁(73) stay rational over 𝔽_{2^d} for d <= 6.
        for d in 1..=6 {
            assert!(cusp_field_condition(73, 2, d), "d={d}");
        }
        assert!(!cusp_field_condition(7, 2, 3)); // 7 | 2^3 - 1
        assert!(!cusp_field_condition(5, 2, 4)); // 5 | 2^4 + 1
        assert!(!waterhouse_empty(13, 2, 3).unwrap());
        assert!(waterhouse_report(3, 2, 1).is_err());
        assert!(waterhouse_report(11, 11, 1).is_err());
    }

    #[test]
    fn exception_lists() {
        let ex = |d: u64| condition3_exceptions(d, 2, 300).unwrap();
        // d = 3: fine for p >= 11 except 13.
        let e3: Vec<u64> = ex(3).into_iter().filter(|&p| p >= 11).collect();
        assert_eq!(e3, vec![13]);
        // d = 4: fine for p >= 19.
        let e4: Vec<u64> = ex(4).into_iter().filter(|&p| p >= 19).collect();
        assert!(e4.is_empty());
        // d = 5: fine for p >= 23 except 31, 41.
        let e5: Vec<u64> = ex(5).into_iter().filter(|&p| p >= 23).collect();
        assert_eq!(e5, vec![31, 41]);
        // d = 6: fine for p >= 23 except 29, 31, 37, 41, 73.
        let e6: Vec<u64> = ex(6).into_iter().filter(|&p| p >= 23).collect();
        assert_eq!(e6, vec![29, 31, 37, 41, 73]);
        // d = 7: fine exactly for p in {47, 53} and p >= 79, p != 113, 127.
        let bad7: BTreeSet<u64> = ex(7).into_iter().collect();
        for p in (5..300u64).filter(|&p| is_prime(p)) {
            let good = p == 47 || p == 53 || (p >= 79 && p != 113 && p != 127);
            assert_eq!(!bad7.contains(&p), good, "p={p}");
        }
        assert!(condition3_exceptions(8, 2, 100).is_err());
    }

    #[test]
    fn apriori_bound() {
        // Beyond (2^{d/2}+1)² everything passes, for a sample of primes.
        for d in 3..=7u64 {
            let mut checked = 0;
            let mut p = 5;
            while checked < 50 {
                if is_prime(p) && apriori_bound_holds(p, 2, d) {
                    assert!(x1_only_rational_cusps(p, 2, d).unwrap(), "p={p} d={d}");
                    checked += 1;
                }
                p += 2;
            }
        }
        // Boundary sanity: (2^3+1)... for d = 6 the bound is (2^3+1)² = 81.
        assert!(!apriori_bound_holds(81, 2, 6));
        assert!(apriori_bound_holds(83, 2, 6));
    }

    /// All achievable orders of smooth general-Weierstrass curves over
    /// 𝔽_{2^k}, by full enumeration of coefficients and points.
    fn curve_orders_char2(k: u32) -> BTreeSet<u64> {
        let f = BinaryField::new(k).unwrap();
        let els: Vec<u8> = f.elements().collect();
        let mut orders = BTreeSet::new();
        for &a1 in &els {
            for &a2 in &els {
                for &a3 in &els {
                    for &a4 in &els {
                        for &a6 in &els {
                            // char-2 discriminant via b-invariants
                            let b2 = f.mul(a1, a1);
                            let b4 = f.mul(a1, a3);
                            let b6 = f.mul(a3, a3);
                            let b8 = f.add(
                                f.add(f.mul(b2, a6), f.mul(f.mul(a1, a3), a4)),
                                f.add(f.mul(a2, b6), f.mul(a4, a4)),
                            );
                            let disc = f.add(
                                f.add(f.mul(f.mul(b2, b2), b8), f.mul(b6, b6)),
                                f.mul(f.mul(b2, b4), b6),
                            );
                            if disc == 0 {
                                continue;
                            }
                            let mut count = 1u64; // point at infinity
                            for &x in &els {
                                for &y in &els {
                                    let lhs = f.add(
                                        f.mul(y, y),
                                        f.add(f.mul(f.mul(a1, x), y), f.mul(a3, y)),
                                    );
                                    let rhs = f.add(
                                        f.add(f.mul(f.mul(x, x), x), f.mul(f.mul(a2, x), x)),
                                        f.add(f.mul(a4, x), a6),
                                    );
                                    if lhs == rhs {
                                        count += 1;
                                    }
                                }
                            }
                            orders.insert(count);
                        }
                    }
                }
            }
        }
        orders
    }

    #[test]
    fn brute_force_oracle_agreement() {
        // Y₁(p)(𝔽_{2^d}) is nonempty iff some curve order is divisible by
        // p (p >= 5 then guarantees a point of exact order p).
        for d in 1..=3u32 {
            let orders = curve_orders_char2(d);
            for p in (5..=31u64).filter(|&p| is_prime(p)) {
                let nonempty = orders.iter().any(|&n| n % p == 0);
                assert_eq!(
                    waterhouse_empty(p, 2, d as u64).unwrap(),
                    !nonempty,
                    "p={p} d={d}"
                );
            }
        }
    }
}
