//! The deterministic family X_n of integer matrices of determinant n used
//! for the Hecke action on Manin symbols:
//!
//!   X_n = { [[a,b],[c,d]] : ad − bc = n, a > b ≥ 0, d > c ≥ 0 }.
//!
//! T_n x_{(u,v)} = Σ_{M ∈ X_n} x_{(u,v)·M}, with terms where (u,v)·M ≡ (0,0)
//! mod p omitted (possible only when p | n). The same quadruples with the
//! extra constraint c > 0 are the index set of the explicit λ-sum for
//! (T_r − σ₁(r))e, which anchors the correctness of the family.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// All matrices [a, b, c, d] of determinant n with a > b ≥ 0, d > c ≥ 0,
/// in deterministic order.
pub fn family(n: u64) -> Arc<Vec<[u64; 4]>> {
    static CACHE: Lazy<Mutex<HashMap<u64, Arc<Vec<[u64; 4]>>>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(v) = CACHE.lock().unwrap().get(&n) {
        return v.clone();
    }
    let v = Arc::new(enumerate(n));
    CACHE.lock().unwrap().insert(n, v.clone());
    v
}

fn enumerate(n: u64) -> Vec<[u64; 4]> {
    assert!(n >= 1);
    let mut out = Vec::new();
    for a in 1..=n {
        // b ≤ a−1, c ≤ d−1 force a + d ≤ n + 1.
        for d in 1..=(n + 1 - a) {
            if a * d < n {
                continue;
            }
            let bc = a * d - n;
            if bc == 0 {
                for c in 0..d {
                    out.push([a, 0, c, d]);
                }
                for b in 1..a {
                    out.push([a, b, 0, d]);
                }
            } else {
                for b in 1..a {
                    if bc % b == 0 {
                        let c = bc / b;
                        if c < d {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_constraints() {
        for n in 1..=30 {
            for m in family(n).iter() {
                let [a, b, c, d] = *m;
                assert_eq!(a as i64 * d as i64 - b as i64 * c as i64, n as i64);
                assert!(a > b);
                assert!(d > c);
            }
        }
    }

    #[test]
    fn small_families() {
        assert_eq!(family(1).as_slice(), &[[1, 0, 0, 1]]);
        assert_eq!(family(2).len(), 4);
    }
}
