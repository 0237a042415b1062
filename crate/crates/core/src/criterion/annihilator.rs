//! Materialization of the Hecke algebra on the cuspidal subspace and the
//! exact linear algebra behind the t₁ search: the annihilator of the winding
//! element and the annihilator of that annihilator.

use super::{CriterionError, Level};
use crate::exactalg::{Int, Rat, ZMat};
use num::{Integer, One, Zero};

/// A named Hecke operator given by its integral matrix on the cuspidal basis
/// (row-vector convention: vectors act from the left).
#[derive(Debug, Clone)]
pub struct HeckeElement {
    pub name: String,
    pub matrix: ZMat,
}

/// A certified ℚ-basis of the Hecke algebra 𝕋_ℚ at one level.
///
/// The elements are of the form ⟨u⟩T_i, whose span is closed under
/// multiplication and exhausts 𝕋_ℚ as i grows. Certification works through
/// a probe vector v: the images v·⟨u⟩T_i can only underestimate the rank of
/// the span, and dim 𝕋_ℚ equals the genus at prime level, so once the probe
/// images reach that rank the list is a basis and t ↦ v·t is injective.
pub struct HeckeLattice {
    pub basis: Vec<HeckeElement>,
    /// Largest Hecke index scanned.
    pub gen_bound: u64,
    /// The certifying probe vector.
    pub probe: Vec<Rat>,
}

/// Incremental row reduction over ℚ, deterministic pivot order.
struct RowReducer {
    rows: Vec<Vec<Rat>>,
    pivots: Vec<usize>,
}

impl RowReducer {
    fn new() -> Self {
        RowReducer { rows: Vec::new(), pivots: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces v against the stored rows; keeps it (and returns true) if a
    /// nonzero remainder survives.
    fn try_add(&mut self, mut v: Vec<Rat>) -> bool {
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            if !v[p].is_zero() {
                let f = &v[p] / &row[p];
                for (x, y) in v.iter_mut().zip(row.iter()) {
                    *x -= &f * y;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push(v);
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }
}

fn row_times_zmat(v: &[Rat], m: &ZMat) -> Vec<Rat> {
    assert_eq!(v.len(), m.rows);
    let mut out = vec![Rat::zero(); m.cols];
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for j in 0..m.cols {
            if !m[(i, j)].is_zero() {
                out[j] += x * Rat::from(m[(i, j)].clone());
            }
        }
    }
    out
}

/// Divides an integer matrix by the gcd of its entries.
fn primitive_part(m: ZMat) -> ZMat {
    let mut g = Int::zero();
    'scan: for r in m.rows_iter() {
        for x in r {
            g = g.gcd(x);
            if g.is_one() {
                break 'scan;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return m;
    }
    let rows = m
        .rows_iter()
        .map(|r| r.iter().map(|x| x / &g).collect())
        .collect();
    ZMat::from_rows(rows)
}

/// Clears denominators and divides out the content, preserving the line.
fn primitive_int_coords(x: &[Rat]) -> Vec<Int> {
    let mut den = Int::one();
    for v in x {
        den = den.lcm(v.denom());
    }
    let ints: Vec<Int> = x.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    let mut g = Int::zero();
    for v in &ints {
        g = g.gcd(v);
    }
    if g.is_zero() || g.is_one() {
        return ints;
    }
    ints.into_iter().map(|v| v / &g).collect()
}

fn combo(basis: &[HeckeElement], coeffs: &[Int]) -> ZMat {
    let n = basis[0].matrix.rows;
    let mut acc = ZMat::zero(n, n);
    for (c, b) in coeffs.iter().zip(basis.iter()) {
        if !c.is_zero() {
            acc = acc.add(&b.matrix.scale(c));
        }
    }
    acc
}

/// Builds a certified basis of 𝕋_ℚ from the operators ⟨u⟩T_i.
///
/// Scanning starts from i = 1 and stops as soon as the probe rank reaches
/// the genus; the scan is abandoned (and the next probe tried) once it has
/// passed ⌈p/6⌉ + 2 without rank growth over two consecutive indices.
pub fn hecke_lattice(level: &Level) -> Result<HeckeLattice, CriterionError> {
    let n = level.cuspidal_rank();
    let g = level.genus();
    if g == 0 {
        return Ok(HeckeLattice { basis: Vec::new(), gen_bound: 0, probe: Vec::new() });
    }
    let reps = level.reps();
    let diamonds: Vec<ZMat> = reps
        .iter()
        .map(|&u| level.diamond(u))
        .collect::<Result<_, _>>()?;
    let b0 = level.p().div_ceil(6) + 2;

    let mut probes: Vec<Vec<Rat>> = Vec::new();
    for j in 0..n.min(3) {
        let mut v = vec![Rat::zero(); n];
        v[j] = Rat::one();
        probes.push(v);
    }
    probes.push(vec![Rat::one(); n]);
    probes.push((0..n).map(|j| Rat::from(Int::from(1 + (j as i64 % 5)))).collect());

    let mut best_reached = 0usize;
    for probe in probes {
        let probe_rows: Vec<Vec<Rat>> = diamonds
            .iter()
            .zip(reps.iter())
            .map(|(dm, &u)| if u == 1 { probe.clone() } else { row_times_zmat(&probe, dm) })
            .collect();
        let mut red = RowReducer::new();
        let mut basis: Vec<HeckeElement> = Vec::new();
        let mut stale = 0u32;
        let mut i = 0u64;
        loop {
            i += 1;
            let ti = level.hecke(i)?;
            let before = red.rank();
            for ((vd, dm), &u) in probe_rows.iter().zip(diamonds.iter()).zip(reps.iter()) {
                if red.try_add(row_times_zmat(vd, &ti)) {
                    let m = if u == 1 { ti.clone() } else { dm.mul(&ti) };
                    let name = if u == 1 { format!("T{i}") } else { format!("<{u}>T{i}") };
                    basis.push(HeckeElement { name, matrix: m });
                }
                if red.rank() == g {
                    break;
                }
            }
            if red.rank() == g {
                return Ok(HeckeLattice { basis, gen_bound: i, probe });
            }
            stale = if red.rank() == before { stale + 1 } else { 0 };
            if i >= b0 && stale >= 2 {
                break;
            }
        }
        best_reached = best_reached.max(red.rank());
    }
    Err(CriterionError::SpanNotCertified { p: level.p(), reached: best_reached, genus: g })
}

/// The annihilator 𝒜_e = {s ∈ 𝕋_ℚ : e·s = 0} and its annihilator
/// {t ∈ 𝕋_ℚ : t·s = 0 for all s ∈ 𝒜_e}, both as integral matrices.
pub struct Annihilator {
    pub ae_basis: Vec<HeckeElement>,
    pub ann_basis: Vec<HeckeElement>,
}

pub fn winding_annihilator(
    level: &Level,
    lattice: &HeckeLattice,
    e: &[Rat],
) -> Result<Annihilator, CriterionError> {
    let _ = level;
    let basis = &lattice.basis;
    if basis.is_empty() {
        return Ok(Annihilator { ae_basis: Vec::new(), ann_basis: Vec::new() });
    }
    let e_rows: Vec<Vec<Rat>> = basis.iter().map(|b| row_times_zmat(e, &b.matrix)).collect();
    let kernel = crate::exactalg::QMat::from_rows(e_rows).left_kernel_basis();

    let mut ae_basis = Vec::new();
    for x in &kernel {
        let xi = primitive_int_coords(x);
        let s = primitive_part(combo(basis, &xi));
        if !s.is_zero() {
            ae_basis.push(HeckeElement { name: format!("ae[{}]", ae_basis.len()), matrix: s });
        }
    }

    if ae_basis.is_empty() {
        // e is not annihilated by anything: every Hecke operator factors
        // through the winding quotient, so the annihilator is all of 𝕋.
        return Ok(Annihilator { ae_basis, ann_basis: basis.to_vec() });
    }

    // t·s = 0 is tested through the probe: v·(s·t) = (v·s)·t, and t ↦ v·t
    // is injective by the lattice certificate, so the kernel below is exact.
    let probe_images: Vec<Vec<Rat>> = ae_basis
        .iter()
        .map(|s| row_times_zmat(&lattice.probe, &s.matrix))
        .collect();
    let rows: Vec<Vec<Rat>> = basis
        .iter()
        .map(|b| {
            let mut row = Vec::new();
            for u in &probe_images {
                row.extend(row_times_zmat(u, &b.matrix));
            }
            row
        })
        .collect();
    let kernel = crate::exactalg::QMat::from_rows(rows).left_kernel_basis();
    let mut ann_basis = Vec::new();
    for y in &kernel {
        let yi = primitive_int_coords(y);
        let t = primitive_part(combo(basis, &yi));
        if t.is_zero() {
            continue;
        }
        // Hard exactness check, independent of the probe argument above.
        for s in &ae_basis {
            assert!(
                t.mul(&s.matrix).is_zero(),
                "annihilator candidate fails exact product check"
            );
        }
        ann_basis.push(HeckeElement { name: format!("ann[{}]", ann_basis.len()), matrix: t });
    }
    Ok(Annihilator { ae_basis, ann_basis })
}

/// Deterministic t₁ candidates: the annihilator basis first, then signed
/// pairwise combinations, truncated to `budget`. Every candidate is an
/// integer combination of exactly verified annihilators, hence itself kills
/// 𝒜_e; the zero element is never emitted.
pub fn t1_candidates(ann: &Annihilator, budget: usize) -> Vec<HeckeElement> {
    let mut out: Vec<HeckeElement> = Vec::new();
    for b in &ann.ann_basis {
        if out.len() >= budget {
            return out;
        }
        out.push(b.clone());
    }
    let k = ann.ann_basis.len();
    'outer: for i in 0..k {
        for j in (i + 1)..k {
            for (sign, op) in [(1i64, "+"), (-1, "-")] {
                if out.len() >= budget {
                    break 'outer;
                }
                let m = ann.ann_basis[i]
                    .matrix
                    .add(&ann.ann_basis[j].matrix.scale(&Int::from(sign)));
                let m = primitive_part(m);
                if m.is_zero() {
                    continue;
                }
                out.push(HeckeElement {
                    name: format!("{}{}{}", ann.ann_basis[i].name, op, ann.ann_basis[j].name),
                    matrix: m,
                });
            }
        }
    }
    out
}
