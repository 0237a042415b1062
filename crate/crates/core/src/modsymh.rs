//! Modular symbols for X_H = X₁(p)/H, where H is a subgroup of
//! (ℤ/pℤ)*/{±1}: diamond operators, Hecke operators, the cusps above ∞,
//! ordered sums of ∞-cusps, and the Γ_H winding element.
//!
//! Symbols are pairs (c, d) modulo the scalar action of ±H. Taking H to be
//! the full unit group recovers X₀(p); the trivial H gives X₁(p).

use crate::exactalg::{gcd_u64, Int, QMat, QPoly, Rat, ZMat};
use crate::modsym::{Canon, Engine};
#[cfg(test)]
use crate::modsym::RelMat;
use num::One;
use once_cell::sync::OnceCell;
use std::collections::BTreeSet;

pub use crate::modsym::engine::{Cusp, CuspPt, EngineError as SpaceHError};

pub struct SpaceH {
    eng: Engine,
    h_gens: Vec<u64>,
    winding: OnceCell<WindingH>,
}

/// The Γ_H winding element together with how it was obtained.
#[derive(Clone)]
pub struct WindingH {
    /// e on the relative basis; cuspidal (boundary 0).
    pub e: Vec<Rat>,
    /// Which T_q had f(T_q) invertible on the cuspidal subspace.
    pub q_used: u64,
    /// Whether the full boundary characteristic polynomial was needed
    /// (the squarefree part is tried first).
    pub used_full_charpoly: bool,
    /// Least D ≥ 1 with D·e integral on the relative basis.
    pub denominator: Int,
}

/// A degree-d formal sum n₀c₀ + … + n_i c_i of distinct ∞-cusps with
/// n₀ ≥ … ≥ n_i ≥ 1. Stored canonically: multiplicities non-increasing and,
/// within a block of equal multiplicities, cusp labels increasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderedCuspSum {
    /// (multiplicity, ∞-cusp label) terms in canonical order.
    pub terms: Vec<(u64, u64)>,
}

impl OrderedCuspSum {
    fn new(mut terms: Vec<(u64, u64)>) -> OrderedCuspSum {
        terms.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        OrderedCuspSum { terms }
    }

    pub fn degree(&self) -> u64 {
        self.terms.iter().map(|t| t.0).sum()
    }
}

impl SpaceH {
    /// Builds the presentation at prime level p ≥ 5 for the subgroup
    /// generated by `h_gens` (an empty list gives X₁(p), generators covering
    /// all units give X₀(p)).
    pub fn build(p: u64, h_gens: &[u64]) -> Result<SpaceH, SpaceHError> {
        let mut gens: Vec<u64> = h_gens.iter().map(|&g| g % p).collect();
        gens.sort_unstable();
        gens.dedup();
        Ok(SpaceH {
            eng: Engine::new(p, Canon::OrbitMin, &gens)?,
            h_gens: gens,
            winding: OnceCell::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.eng.p
    }

    /// Sorted, deduplicated generators of H as passed in.
    pub fn h_gens(&self) -> &[u64] {
        &self.h_gens
    }

    pub fn dim(&self) -> usize {
        self.eng.dim()
    }

    pub fn cuspidal_rank(&self) -> usize {
        self.eng.cuspidal_rank()
    }

    pub fn genus(&self) -> usize {
        self.eng.genus
    }

    pub(crate) fn engine(&self) -> &Engine {
        &self.eng
    }

    pub fn path(&self, from: CuspPt, to: CuspPt) -> Vec<Rat> {
        self.eng.path(from, to)
    }

    pub fn zero_inf(&self) -> Vec<Rat> {
        self.eng.zero_inf()
    }

    pub fn boundary(&self, v: &[Rat]) -> Vec<Rat> {
        self.eng.boundary_of_vec(v)
    }

    pub fn is_cuspidal(&self, v: &[Rat]) -> bool {
        self.eng.is_cuspidal(v)
    }

    /// T_n on the relative space (row-vector convention).
    pub fn hecke(&self, n: u64) -> QMat {
        self.eng.hecke_relative(n).to_qmat()
    }

    #[cfg(test)]
    pub(crate) fn hecke_rel(&self, n: u64) -> RelMat {
        self.eng.hecke_relative(n)
    }

    pub fn hecke_cuspidal(&self, n: u64) -> Result<ZMat, SpaceHError> {
        self.eng.restrict_cuspidal(&self.eng.hecke_relative(n))
    }

    /// ⟨n⟩ on the relative space; n must be a unit mod p.
    pub fn diamond(&self, n: u64) -> QMat {
        self.eng.diamond_relative(n).to_qmat()
    }

    #[cfg(test)]
    pub(crate) fn diamond_rel(&self, n: u64) -> RelMat {
        self.eng.diamond_relative(n)
    }

    pub fn diamond_cuspidal(&self, n: u64) -> Result<ZMat, SpaceHError> {
        self.eng.restrict_cuspidal(&self.eng.diamond_relative(n))
    }

    /// The cusps of X_H above ∞ ∈ X₀(p), labelled by their unit orbit
    /// representatives. There are (p−1)/#{±H} of them and the diamond group
    /// permutes them simply transitively; the cusp ∞ itself is label 1.
    pub fn infinity_cusps(&self) -> Vec<u64> {
        let mut out: BTreeSet<u64> = BTreeSet::new();
        for u in 1..self.eng.p {
            out.insert(self.eng.orbit_min_unit(u));
        }
        out.into_iter().collect()
    }

    /// Action of ⟨n⟩ on the ∞-cusp with label u. The symbol (0, d) has
    /// boundary term Inf(d⁻¹) and ⟨n⟩ sends it to (0, nd), so the label map
    /// is u ↦ n⁻¹·u.
    pub fn diamond_on_infinity_cusp(&self, n: u64, u: u64) -> u64 {
        let ninv = crate::exactalg::inv_mod(n % self.eng.p, self.eng.p)
            .expect("diamond index must be a unit");
        self.eng.orbit_min_unit((ninv % self.eng.p) * (u % self.eng.p) % self.eng.p)
    }

    /// All ordered sums of ∞-cusps of degree d, without quotienting by
    /// diamond translation.
    pub fn enumerate_ordered_cusp_sums_raw(&self, d: u64) -> Vec<OrderedCuspSum> {
        assert!(d >= 1);
        let cusps = self.infinity_cusps();
        let mut out = Vec::new();
        for part in partitions(d) {
            assign_cusps(&part, &cusps, 0, &mut Vec::new(), &mut out);
        }
        out.sort();
        out
    }

    /// Ordered sums of degree d up to simultaneous diamond translation. The
    /// representative of each class is the lexicographically least translate,
    /// which always carries the cusp ∞ (label 1) with maximal multiplicity.
    pub fn enumerate_ordered_cusp_sums(&self, d: u64) -> Vec<OrderedCuspSum> {
        let mut seen: BTreeSet<OrderedCuspSum> = BTreeSet::new();
        for s in self.enumerate_ordered_cusp_sums_raw(d) {
            seen.insert(self.translation_minimum(&s));
        }
        seen.into_iter().collect()
    }

    /// Least canonical form among all diamond translates of the sum.
    pub fn translation_minimum(&self, s: &OrderedCuspSum) -> OrderedCuspSum {
        let mut best: Option<OrderedCuspSum> = None;
        for t in self.infinity_cusps() {
            let moved = OrderedCuspSum::new(
                s.terms
                    .iter()
                    .map(|&(n, u)| (n, self.diamond_on_infinity_cusp(t, u)))
                    .collect(),
            );
            if best.as_ref().map_or(true, |b| moved < *b) {
                best = Some(moved);
            }
        }
        best.unwrap()
    }

    /// The winding element e of X_H: with f the (squarefree, by preference)
    /// characteristic polynomial of T_q on the boundary quotient, f(T_q)·{0,∞}
    /// is cuspidal and e is the unique cuspidal solution of
    /// e·f(T_q) = f(T_q)·{0,∞}. Invertibility of f(T_q) on the cuspidal
    /// subspace is certified, never assumed; q runs through 2, 3, 5, … and
    /// exhaustion is an explicit error.
    pub fn winding_element(&self) -> Result<&WindingH, SpaceHError> {
        if let Some(w) = self.winding.get() {
            return Ok(w);
        }
        let w = self.eng.winding()?;
        let mut den = Int::one();
        for x in &w.e_rel {
            den = num::integer::lcm(den, x.denom().clone());
        }
        Ok(self.winding.get_or_init(|| WindingH {
            e: w.e_rel,
            q_used: w.q_used,
            used_full_charpoly: w.used_full_charpoly,
            denominator: den,
        }))
    }

    /// Characteristic polynomial of T_n on the cuspidal subspace.
    pub fn cuspidal_charpoly(&self, n: u64) -> Result<QPoly, SpaceHError> {
        let m = self.hecke_cuspidal(n)?;
        Ok(m.charpoly()
            .map_err(|e| SpaceHError::Internal(format!("charpoly: {e}")))?
            .to_qpoly())
    }
}

/// Partitions of d into non-increasing positive parts.
fn partitions(d: u64) -> Vec<Vec<u64>> {
    fn go(rem: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rem.min(max)).rev() {
            cur.push(part);
            go(rem - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, d, &mut Vec::new(), &mut out);
    out
}

/// Assigns distinct cusps to the parts of a fixed partition. Parts of equal
/// size are interchangeable, so within such a block the cusps are chosen as
/// an increasing sequence.
fn assign_cusps(
    part: &[u64],
    cusps: &[u64],
    idx: usize,
    chosen: &mut Vec<(u64, u64)>,
    out: &mut Vec<OrderedCuspSum>,
) {
    if idx == part.len() {
        out.push(OrderedCuspSum::new(chosen.clone()));
        return;
    }
    let same_block = idx > 0 && part[idx - 1] == part[idx];
    for &c in cusps {
        if same_block && c <= chosen.last().unwrap().1 {
            continue;
        }
        if chosen.iter().any(|&(_, u)| u == c) {
            continue;
        }
        chosen.push((part[idx], c));
        assign_cusps(part, cusps, idx + 1, chosen, out);
        chosen.pop();
    }
}

/// Units 1..p coprime to p generate the full group iff their ±H-closure does;
/// convenience for building the X₀ model through the same interface.
pub fn full_group_gens(p: u64) -> Vec<u64> {
    (2..p).filter(|&g| gcd_u64(g, p) == 1).collect()
}
