//! The torsion-killing operator t₂ and the mod-2 linear independence checks.
//!
//! Independence of Hecke operators in 𝕋 ⊗ 𝔽₂ is tested through their action
//! on cuspidal homology mod 2. The representation need not be faithful, so a
//! passing test proves independence while a failing test proves nothing;
//! callers must map failure to "inconclusive", never to a negative claim.

use super::annihilator::HeckeElement;
use super::{CriterionError, Level};
use crate::exactalg::{is_prime, BitMat, Int, ZMat};
use crate::modsymh::SpaceH;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankEvidence {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub ell: u64,
}

/// t₂ = T_q − ⟨q⟩ − q, which kills rational torsion of order coprime to q;
/// on X₀ the diamond is the identity so this is T_q − q − 1.
pub fn t2_element(level: &Level, q: u64) -> Result<HeckeElement, CriterionError> {
    if q == 2 || q == level.p() || !is_prime(q) {
        return Err(CriterionError::Range("t2 needs a prime q outside {2, p}"));
    }
    let n = level.cuspidal_rank();
    let tq = level.hecke(q)?;
    Ok(match level {
        Level::X0(_) => HeckeElement {
            name: format!("T{q}-{}", q + 1),
            matrix: tq.sub(&ZMat::identity(n).scale(&Int::from(q + 1))),
        },
        Level::H(_) => HeckeElement {
            name: format!("T{q}-<{q}>-{q}"),
            matrix: tq
                .sub(&level.diamond(q)?)
                .sub(&ZMat::identity(n).scale(&Int::from(q))),
        },
    })
}

fn stacked_rank(ops: &[BitMat]) -> (usize, usize, usize) {
    let cols = ops[0].rows * ops[0].cols;
    let m = BitMat::from_rows(cols, ops.iter().map(|o| o.flatten_bits()));
    (ops.len(), cols, m.rank())
}

/// T₁t, …, T_dt independent mod 2 on X₀(p). Sufficient-only: see module doc.
pub fn kamienny_check_x0(
    level: &Level,
    d: u64,
    t: &ZMat,
) -> Result<(bool, RankEvidence), CriterionError> {
    if 2 * d >= level.p() {
        return Err(CriterionError::Range("need 2d < p"));
    }
    let bt = BitMat::from_zmat(t);
    let ops: Vec<BitMat> = (1..=d)
        .map(|i| Ok(BitMat::from_zmat(&level.hecke(i)?).mul(&bt)))
        .collect::<Result<_, CriterionError>>()?;
    let (rows, cols, rank) = stacked_rank(&ops);
    let ok = rank == d as usize;
    Ok((ok, RankEvidence { label: "T_1 t .. T_d t".into(), rows, cols, rank, ell: 2 }))
}

/// Kamienny's criterion for X_H, checked for every ordered sum of ∞-cusps of
/// degree d up to diamond translation: for the sum Σ n_j·c_j the operators
/// {T_i⟨u_j⟩t : i ≤ n_j} must be independent mod 2, where u_j is the label
/// of c_j (so that ⟨u_j⟩c_j = ∞).
pub fn kamienny_check_h(
    sph: &SpaceH,
    level: &Level,
    d: u64,
    t: &ZMat,
) -> Result<(bool, Vec<RankEvidence>), CriterionError> {
    if 2 * d >= level.p() {
        return Err(CriterionError::Range("need 2d < p"));
    }
    let bt = BitMat::from_zmat(t);
    let hecke_bits: Vec<BitMat> = (1..=d)
        .map(|i| Ok(BitMat::from_zmat(&level.hecke(i)?)))
        .collect::<Result<_, CriterionError>>()?;
    let mut diamond_t: std::collections::BTreeMap<u64, BitMat> = Default::default();
    let sums = sph.enumerate_ordered_cusp_sums(d);
    let mut min_rank = d as usize;
    let mut first_failure: Option<String> = None;
    for sum in &sums {
        let mut ops = Vec::with_capacity(d as usize);
        for &(mult, u) in &sum.terms {
            let dt = diamond_t
                .entry(u)
                .or_insert_with(|| BitMat::from_zmat(&level.diamond(u).unwrap()).mul(&bt));
            for i in 1..=mult {
                ops.push(hecke_bits[i as usize - 1].mul(dt));
            }
        }
        let (_, _, rank) = stacked_rank(&ops);
        if rank < min_rank {
            min_rank = rank;
            if first_failure.is_none() {
                first_failure = Some(format!("{sum:?}"));
            }
        }
    }
    let ok = min_rank == d as usize;
    let label = match first_failure {
        None => format!("{} ordered cusp sums, all of full rank", sums.len()),
        Some(s) => format!("{} ordered cusp sums, first failing {s}", sums.len()),
    };
    let ev = RankEvidence {
        label,
        rows: d as usize,
        cols: level.cuspidal_rank() * level.cuspidal_rank(),
        rank: min_rank,
        ell: 2,
    };
    Ok((ok, vec![ev]))
}

/// Dependency-weight variant: with D the ∞-cusp labels (1 ∈ D), for every
/// ⌈d/2⌉ ≤ r ≤ d the operators indexed by
/// D_r = {(1,i) : d−r < i ≤ r} ∪ {(k,i) : 1 ≤ i ≤ d−r, k ∈ D}
/// must admit no mod-2 dependence involving d or fewer of them. Passing here
/// implies the full ordered-cusp-sum check passes: a sum with leading
/// multiplicity n₁ ≥ ⌈d/2⌉ is covered by D_{n₁}, and one with n₁ ≤ ⌊d/2⌋ has
/// every multiplicity ≤ n₁ and is covered by D_{d−n₁}, whose index is again
/// at least ⌈d/2⌉. Starting the scan any lower only adds spurious index sets
/// that no ordered sum requires.
pub fn kamienny_check_h_fast(
    sph: &SpaceH,
    level: &Level,
    d: u64,
    t: &ZMat,
) -> Result<(bool, Vec<RankEvidence>), CriterionError> {
    if 2 * d >= level.p() {
        return Err(CriterionError::Range("need 2d < p"));
    }
    let bt = BitMat::from_zmat(t);
    let labels = sph.infinity_cusps();
    let diamond_t: Vec<(u64, BitMat)> = labels
        .iter()
        .map(|&u| Ok((u, BitMat::from_zmat(&level.diamond(u)?).mul(&bt))))
        .collect::<Result<_, CriterionError>>()?;
    let hecke_bits: Vec<BitMat> = (1..=d)
        .map(|i| Ok(BitMat::from_zmat(&level.hecke(i)?)))
        .collect::<Result<_, CriterionError>>()?;
    let op_of = |k: u64, i: u64| -> BitMat {
        let dt = &diamond_t.iter().find(|(u, _)| *u == k).unwrap().1;
        hecke_bits[i as usize - 1].mul(dt)
    };

    let mut evidence = Vec::new();
    let mut ok = true;
    for r in (d + 1) / 2..=d {
        let mut index: BTreeSet<(u64, u64)> = BTreeSet::new();
        for i in (d - r + 1)..=r {
            index.insert((1, i));
        }
        for &k in &labels {
            for i in 1..=(d - r) {
                index.insert((k, i));
            }
        }
        let ops: Vec<BitMat> = index.iter().map(|&(k, i)| op_of(k, i)).collect();
        let cols = level.cuspidal_rank() * level.cuspidal_rank();
        let stacked = BitMat::from_rows(cols, ops.iter().map(|o| o.flatten_bits()));
        let rank = stacked.rank();
        let kernel = stacked.left_kernel_basis();
        let dim = kernel.len();
        let mut min_weight: Option<u32> = None;
        if dim > 24 {
            // Too many dependencies to enumerate; treat as a failed check.
            ok = false;
            evidence.push(RankEvidence {
                label: format!("D_{r}: dependency space dimension {dim} too large"),
                rows: ops.len(),
                cols,
                rank,
                ell: 2,
            });
            continue;
        }
        for mask in 1u64..(1 << dim) {
            let mut combined = vec![0u64; kernel.first().map_or(0, |k| k.len())];
            for (b, basis_vec) in kernel.iter().enumerate() {
                if (mask >> b) & 1 == 1 {
                    for (x, y) in combined.iter_mut().zip(basis_vec.iter()) {
                        *x ^= *y;
                    }
                }
            }
            let weight: u32 = combined.iter().map(|w| w.count_ones()).sum();
            min_weight = Some(min_weight.map_or(weight, |m| m.min(weight)));
            if weight as u64 <= d {
                ok = false;
            }
        }
        evidence.push(RankEvidence {
            label: match min_weight {
                None => format!("D_{r}: no dependencies"),
                Some(w) => format!("D_{r}: minimum dependency weight {w}"),
            },
            rows: ops.len(),
            cols,
            rank,
            ell: 2,
        });
    }
    Ok((ok, evidence))
}
