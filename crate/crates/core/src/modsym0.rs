//! Modular symbols for Γ₀(p), p prime: the relative homology of X₀(p) with
//! respect to the cusps, its cuspidal subspace, λ-symbols, Hecke operators,
//! the intersection pairing and the winding element.
//!
//! λ(k) := {0, 1/k} for k ≢ 0 mod p, and λ(0) := {0,∞}. In Manin symbols
//! λ(k) is the class of the projective pair (k : 1). The λ(k) with k ≢ 0
//! are cuspidal and generate the full homology of the curve; λ(0) spans the
//! rank-1 boundary quotient.

use crate::exactalg::{Int, QMat, Rat, ZMat};
use crate::modsym::{merel, Canon, Engine, RelMat};
use num::Zero;
use once_cell::sync::OnceCell;

pub use crate::modsym::engine::{Cusp, CuspPt, EngineError as SpaceError};

pub struct Space {
    eng: Engine,
    winding: OnceCell<Vec<Rat>>,
    lambda_span: OnceCell<QMat>,
}

impl Space {
    /// Builds the level-p presentation. Composite levels are rejected.
    pub fn build(p: u64) -> Result<Space, SpaceError> {
        Ok(Space {
            eng: Engine::new(p, Canon::Projective, &[])?,
            winding: OnceCell::new(),
            lambda_span: OnceCell::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.eng.p
    }

    /// Dimension of the relative space: 2·genus + #cusps − 1.
    pub fn dim(&self) -> usize {
        self.eng.dim()
    }

    pub fn cuspidal_rank(&self) -> usize {
        self.eng.cuspidal_rank()
    }

    /// Rows of the integral cuspidal basis in ambient coordinates, suitable
    /// as `pairing` arguments.
    pub fn cuspidal_basis(&self) -> Vec<Vec<Rat>> {
        let q = self.eng.cuspidal.to_qmat();
        (0..self.cuspidal_rank()).map(|i| q.row(i).to_vec()).collect()
    }

    pub fn genus(&self) -> usize {
        self.eng.genus
    }

    pub(crate) fn engine(&self) -> &Engine {
        &self.eng
    }

    /// λ(k) as a vector on the relative basis.
    pub fn lambda(&self, k: u64) -> Vec<Rat> {
        self.eng.genvec(k % self.eng.p, 1)
    }

    /// {from, to} expanded through the Manin trick.
    pub fn path(&self, from: CuspPt, to: CuspPt) -> Vec<Rat> {
        self.eng.path(from, to)
    }

    pub fn boundary(&self, v: &[Rat]) -> Vec<Rat> {
        self.eng.boundary_of_vec(v)
    }

    pub fn is_cuspidal(&self, v: &[Rat]) -> bool {
        self.eng.is_cuspidal(v)
    }

    /// T_n on the relative space (row-vector convention: v ↦ v·T).
    pub fn hecke(&self, n: u64) -> QMat {
        self.eng.hecke_relative(n).to_qmat()
    }

    pub(crate) fn hecke_rel(&self, n: u64) -> RelMat {
        self.eng.hecke_relative(n)
    }

    /// T_n restricted to the integral cuspidal basis.
    pub fn hecke_cuspidal(&self, n: u64) -> Result<ZMat, SpaceError> {
        self.eng.restrict_cuspidal(&self.eng.hecke_relative(n))
    }

    /// The explicit value of (T_r − σ₁(r))·e as a sum of λ-symbols over the
    /// quadruples a > b ≥ 0, d > c > 0, ad − bc = r. Requires r < p so that
    /// every c, d in the sum is a unit mod p. The λ-argument normalization
    /// (d·c⁻¹, not c·d⁻¹) is the one that matches the Hecke matrices: the
    /// identity T_r·e − σ₁(r)·e = merel_ire(r) is tested exactly against
    /// independently computed T_r for many (p, r).
    pub fn merel_ire(&self, r: u64) -> Result<Vec<Rat>, SpaceError> {
        let p = self.eng.p;
        if r == 0 || r >= p {
            return Err(SpaceError::IndexRange(r, p));
        }
        let mut acc = vec![Rat::zero(); self.dim()];
        for m in merel::family(r).iter() {
            let [_, _, c, d] = *m;
            if c == 0 {
                continue;
            }
            let k = (d % p) * crate::exactalg::inv_mod(c % p, p).unwrap() % p;
            for (x, y) in acc.iter_mut().zip(self.lambda(k)) {
                *x -= y;
            }
        }
        Ok(acc)
    }

    /// The winding element e := (T₂ − 3)⁻¹ · merel_ire(2). T₂ − 3 is
    /// invertible on the cuspidal space because every weight-2 eigenvalue
    /// satisfies a₂² ≤ 8 < 9; a singular system here is an internal error.
    pub fn winding_element(&self) -> Result<Vec<Rat>, SpaceError> {
        if let Some(e) = self.winding.get() {
            return Ok(e.clone());
        }
        let e = self.compute_winding()?;
        Ok(self.winding.get_or_init(|| e).clone())
    }

    fn compute_winding(&self) -> Result<Vec<Rat>, SpaceError> {
        if self.cuspidal_rank() == 0 {
            return Ok(vec![Rat::zero(); self.dim()]);
        }
        let v = self.merel_ire(2)?;
        let vc = self.eng.cusp_coords(&v)?;
        let t2m3 = self.eng.hecke_relative(2).sub_scalar(&Int::from(3));
        let x = self.eng.restrict_cuspidal(&t2m3)?;
        let Some(ec) = x.solve_left_invertible(&vc) else {
            return Err(SpaceError::Internal(
                "T2 - 3 singular on the cuspidal space".into(),
            ));
        };
        Ok(self.eng.rel_from_cusp(&ec))
    }

    /// Matrix whose rows are λ(1), …, λ(p−1); they span the cuspidal space.
    fn lambda_rows(&self) -> &QMat {
        self.lambda_span.get_or_init(|| {
            QMat::from_rows((1..self.eng.p).map(|k| self.lambda(k)).collect())
        })
    }

    /// Intersection pairing on cuspidal vectors, extended bilinearly from
    /// λ(k) • λ(k′) = H(k′−k) − H(k′−k*) − H(k′*−k) + H(k′*−k*) with H the
    /// half-at-zero step function and kk* ≡ −1 mod p, 1 ≤ k* < p. Integer on
    /// integral homology classes, rational in general.
    ///
    /// The sign (equivalently, the orientation of the curve) is normalized
    /// so that the closed-form intersection numbers of winding-ideal
    /// elements against λ(k) hold verbatim with the Hecke action
    /// T_n(c:d) = Σ_M (c:d)·M used throughout this crate; the opposite
    /// orientation goes with the transposed Hecke convention.
    pub fn pairing(&self, v: &[Rat], w: &[Rat]) -> Result<Rat, SpaceError> {
        if !self.is_cuspidal(v) || !self.is_cuspidal(w) {
            return Err(SpaceError::NotCuspidal);
        }
        let lam = self.lambda_rows();
        let x = lam.solve_left(v).ok_or(SpaceError::NotCuspidal)?;
        let y = lam.solve_left(w).ok_or(SpaceError::NotCuspidal)?;
        let p = self.eng.p;
        let mut acc = Rat::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let h2 = lambda_pair_twice(p, i as u64 + 1, j as u64 + 1);
                if h2 != 0 {
                    acc += xi * yj * Rat::new(Int::from(h2), Int::from(2));
                }
            }
        }
        Ok(acc)
    }
}

/// k ↦ k* with kk* ≡ −1 mod p, 1 ≤ k* < p.
fn k_star(p: u64, k: u64) -> u64 {
    (p - crate::exactalg::inv_mod(k, p).unwrap()) % p
}

/// 2·(λ(k) • λ(k′)); doubling keeps the half-integer steps of H in ℤ.
/// Intersection number λ(k) • λ(k′) by the step-function formula. The
/// half-integer contributions always cancel in pairs; this is asserted.
pub fn lambda_pairing(p: u64, k: u64, kp: u64) -> i64 {
    let twice = lambda_pair_twice(p, k, kp);
    assert_eq!(twice % 2, 0, "half-integers must cancel");
    twice / 2
}

fn lambda_pair_twice(p: u64, k: u64, kp: u64) -> i64 {
    let ks = k_star(p, k) as i64;
    let kps = k_star(p, kp) as i64;
    let (k, kp) = (k as i64, kp as i64);
    // 2H(x) = sgn(x) + 1; the four constants cancel.
    (kp - k).signum() - (kp - ks).signum() - (kps - k).signum() + (kps - ks).signum()
}

/// Geometric oracle for λ(k) • λ(k′): C_{k′} • C_k where C_k is the chord of
/// the unit circle from the p-th root of unity at k to the one at k*, with
/// the orientation chosen to match [`Space::pairing`] (the chord through
/// −1, 1 against the one through −i, i meets with sign −1). Zero when the
/// chords share their endpoint set or either chord degenerates.
pub fn chord_intersection(p: u64, k: u64, kp: u64) -> i64 {
    let (ks, kps) = (k_star(p, k), k_star(p, kp));
    if k == ks || kp == kps {
        return 0;
    }
    if (k == kp && ks == kps) || (k == kps && ks == kp) {
        return 0;
    }
    // A = C_{k'}: a → b, B = C_k: c → d, all four endpoints distinct.
    let (a, b, c, d) = (kp, kps, k, ks);
    let in_arc = |x: u64| (x + p - a) % p < (b + p - a) % p && x != a;
    match (in_arc(c), in_arc(d)) {
        (true, false) => -1,
        (false, true) => 1,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{One, Signed};

    fn s(p: u64) -> Space {
        Space::build(p).unwrap()
    }

    #[test]
    fn build_contract() {
        assert!(Space::build(12).is_err());
        assert_eq!(s(11).cuspidal_rank(), 2);
        assert_eq!(s(2).cuspidal_rank(), 0);
        assert_eq!(s(37).cuspidal_rank(), 4);
    }

    #[test]
    fn lambda_boundary() {
        let sp = s(11);
        assert!(!sp.is_cuspidal(&sp.lambda(0)));
        for k in 1..11 {
            assert!(sp.is_cuspidal(&sp.lambda(k)), "k = {k}");
        }
        // λ(k) + λ(k*) = 0.
        for p in [11u64, 13, 17] {
            let sp = s(p);
            for k in 1..p {
                let sum: Vec<Rat> = sp
                    .lambda(k)
                    .iter()
                    .zip(sp.lambda(k_star(p, k)))
                    .map(|(a, b)| a + b)
                    .collect();
                assert!(sum.iter().all(|x| x.is_zero()), "p={p} k={k}");
            }
        }
    }

    #[test]
    fn path_examples() {
        let sp = s(13);
        assert_eq!(sp.path(CuspPt::finite(0, 1), CuspPt::Infinity), sp.lambda(0));
        for k in 1..13 {
            assert_eq!(
                sp.path(CuspPt::finite(0, 1), CuspPt::finite(1, k)),
                sp.lambda(k as u64),
                "k = {k}"
            );
        }
    }

    #[test]
    fn merel_ire_values() {
        let sp = s(11);
        assert!(matches!(sp.merel_ire(11), Err(SpaceError::IndexRange(11, 11))));
        let r1 = sp.merel_ire(1).unwrap();
        assert!(r1.iter().all(|x| x.is_zero()));
        // r = 2: single quadruple (1,0,1,2) contributing −λ(2). Ground truth
        // by cosets: (T₂ − 3){0,∞} = {1/2,∞} − {0,∞} = −{0,1/2} = −λ(2).
        let r2 = sp.merel_ire(2).unwrap();
        let expect: Vec<Rat> = sp.lambda(2).iter().map(|x| -x).collect();
        assert_eq!(r2, expect);
        assert_eq!(
            r2,
            sp.path(CuspPt::finite(1, 2), CuspPt::finite(0, 1)),
            "matches the path computation of -{{0,1/2}}"
        );
    }

    #[test]
    fn merel_consistency_small() {
        // T_r e − σ₁(r) e = merel_ire(r) as exact rational vectors.
        for p in [11u64, 17, 31] {
            let sp = s(p);
            let e = sp.winding_element().unwrap();
            for r in 1..=8u64 {
                let tr = sp.hecke(r);
                let te = QMat::from_rows(vec![e.clone()]).mul(&tr);
                let sigma: i64 = (1..=r as i64).filter(|x| r as i64 % x == 0).sum();
                let rhs = sp.merel_ire(r).unwrap();
                for j in 0..sp.dim() {
                    let lhs = &te[(0, j)] - &e[j] * Rat::from(Int::from(sigma));
                    assert_eq!(lhs, rhs[j], "p={p} r={r} coord {j}");
                }
            }
        }
    }

    #[test]
    fn winding_contract() {
        for p in [2u64, 3, 5, 7, 13] {
            assert!(s(p).winding_element().unwrap().iter().all(|x| x.is_zero()));
        }
        let sp = s(11);
        let e = sp.winding_element().unwrap();
        assert!(e.iter().any(|x| !x.is_zero()));
        assert!(sp.is_cuspidal(&e));
        // Agreement with the generic engine construction.
        let w = sp.eng.winding().unwrap();
        assert_eq!(e, w.e_rel);
        // (p−1)·e integral for p = 11, 37, 67.
        for p in [11u64, 37, 67] {
            let sp = s(p);
            let e = sp.winding_element().unwrap();
            let pm1 = Rat::from(Int::from(p - 1));
            for x in &e {
                assert!((x * &pm1).is_integer(), "p = {p}");
            }
        }
    }

    #[test]
    fn pairing_contract() {
        let sp = s(11);
        let v = sp.lambda(3);
        assert!(sp.pairing(&v, &v).unwrap().is_zero());
        assert!(sp.pairing(&sp.lambda(0), &v).is_err());
        // λ(k) • λ(k*) = 0 and antisymmetry.
        for k in 1..11u64 {
            let a = sp.lambda(k);
            let b = sp.lambda(k_star(11, k));
            assert!(sp.pairing(&a, &b).unwrap().is_zero());
            for kp in 1..11u64 {
                let c = sp.lambda(kp);
                let x = sp.pairing(&a, &c).unwrap();
                let y = sp.pairing(&c, &a).unwrap();
                assert_eq!(x, -y);
            }
        }
    }

    #[test]
    fn h_formula_matches_chords() {
        for p in [5u64, 7, 11, 13, 17] {
            for k in 1..p {
                for kp in 1..p {
                    let h2 = lambda_pair_twice(p, k, kp);
                    assert_eq!(h2 % 2, 0, "half-integers must cancel");
                    assert_eq!(
                        h2 / 2,
                        chord_intersection(p, k, kp),
                        "p={p} k={k} k'={kp}"
                    );
                }
            }
        }
    }


    #[test]
    fn gram_determinant_unimodular() {
        // Pairing Gram matrix on the integral cuspidal basis of X₀(11).
        let sp = s(11);
        let basis = sp.eng.cuspidal.to_qmat();
        let n = sp.cuspidal_rank();
        let mut gram = ZMat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                let val = sp
                    .pairing(basis.row(i), basis.row(j))
                    .unwrap();
                assert!(val.is_integer());
                gram[(i, j)] = val.to_integer();
            }
        }
        assert_eq!(gram.det().unwrap().abs(), Int::one());
    }
}
