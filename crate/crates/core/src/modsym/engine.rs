//! Presentation engine: symbols, relations, boundary, cuspidal lattice,
//! Hecke/diamond operators and the winding element, for either symbol
//! normalization (projective Γ₀ or ±H-scalar Γ_H).

use super::{merel, RelMat};
use crate::exactalg::{charpoly_qmat, inv_mod, is_prime, Int, QMat, Rat, ZMat};
use num::{Integer, One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("level {0} is not prime")]
    CompositeLevel(u64),
    #[error("level {0} below the supported minimum {1}")]
    LevelTooSmall(u64, u64),
    #[error("winding element unavailable: f(T_q) singular on the cuspidal space for q in {0:?}")]
    WindingUnavailable(Vec<u64>),
    #[error("vector is not cuspidal")]
    NotCuspidal,
    #[error("index {0} out of range at level {1}")]
    IndexRange(u64, u64),
    #[error("internal consistency: {0}")]
    Internal(String),
}

/// Symbol normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canon {
    /// Projective (c:d): representative (c·d⁻¹ mod p, 1), or (1,0) if p | d.
    Projective,
    /// (c,d) modulo the scalar action of the subgroup in `Engine::scalars`;
    /// representative is the lexicographically least orbit element.
    OrbitMin,
}

/// A cusp class of the curve: above ∞ ∈ X₀(p) (p divides the denominator) or
/// above 0, labelled by the canonical ±H-orbit representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cusp {
    Inf(u64),
    Zero(u64),
}

/// A point of P¹(ℚ) used as a path endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspPt {
    Infinity,
    /// num/den in lowest terms, den > 0.
    Finite(i64, i64),
}

impl CuspPt {
    pub fn finite(num: i64, den: i64) -> CuspPt {
        assert!(den != 0, "finite cusp point needs a nonzero denominator");
        let g = crate::exactalg::gcd_u64(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -g } else { g };
        CuspPt::Finite(num / s, den / s)
    }
}

pub struct Winding {
    /// e in coordinates on the cuspidal basis.
    pub e_cusp: Vec<Rat>,
    /// e in coordinates on the relative basis.
    pub e_rel: Vec<Rat>,
    /// Which Hecke index q was used for the boundary-eigenvalue polynomial.
    pub q_used: u64,
    /// Whether the full (non-squarefree) characteristic polynomial was needed.
    pub used_full_charpoly: bool,
}

pub struct Engine {
    pub p: u64,
    pub canon: Canon,
    /// The scalar group ±H (all units for the projective model).
    pub scalars: Vec<u64>,
    pub syms: Vec<(u64, u64)>,
    pub index: HashMap<(u64, u64), usize>,
    /// Fixed classes of the order-2 / order-3 relation letters (elliptic
    /// point counts for the index/ramification genus formula).
    pub nu2: usize,
    pub nu3: usize,
    /// Symbol index of each free-basis coordinate.
    pub basis_syms: Vec<usize>,
    /// Image of every symbol in the free basis: gen_num[i] / gen_den.
    pub gen_num: Vec<Vec<Int>>,
    pub gen_den: Int,
    pub cusps: Vec<Cusp>,
    /// Boundary of the free generators, m × #cusps.
    pub boundary_free: ZMat,
    /// Integral basis of the cuspidal lattice, 2·genus rows in relative
    /// coordinates (num/den).
    pub cuspidal: RelMat,
    pub genus: usize,
    cusp_rref: QMat,
    cusp_rref_pivots: Vec<usize>,
    quot_cols: Vec<usize>,
    /// Inverse of the pivot-column block of the cuspidal basis.
    cusp_block_inv: QMat,
    hecke_memo: Mutex<HashMap<u64, RelMat>>,
}

/// Multiplicative closure of the generators together with −1, inside
/// (ℤ/pℤ)*.
fn scalar_subgroup(p: u64, h_gens: &[u64]) -> Vec<u64> {
    let mut set: BTreeSet<u64> = BTreeSet::new();
    set.insert(1);
    set.insert(p - 1);
    for &g in h_gens {
        let g = g % p;
        assert!(g != 0, "subgroup generator must be a unit");
        set.insert(g);
    }
    loop {
        let mut grew = false;
        let cur: Vec<u64> = set.iter().copied().collect();
        for &a in &cur {
            for &b in &cur {
                if set.insert((a * b) % p) {
                    grew = true;
                }
            }
        }
        if !grew {
            return set.into_iter().collect();
        }
    }
}

fn canon_pair_raw(p: u64, canon: Canon, scalars: &[u64], c: u64, d: u64) -> (u64, u64) {
    let (c, d) = (c % p, d % p);
    debug_assert!(c != 0 || d != 0);
    match canon {
        Canon::Projective => {
            if d != 0 {
                let dinv = inv_mod(d, p).expect("unit mod prime");
                ((c * dinv) % p, 1)
            } else {
                (1, 0)
            }
        }
        Canon::OrbitMin => scalars
            .iter()
            .map(|&s| ((s * c) % p, (s * d) % p))
            .min()
            .unwrap(),
    }
}

/// (c,d)·S with S = [[0,−1],[1,0]]: (d, −c).
fn act_s(p: u64, (c, d): (u64, u64)) -> (u64, u64) {
    (d, (p - c % p) % p)
}

/// (c,d)·T with T = [[0,−1],[1,−1]]: (d, −c−d).
fn act_t(p: u64, (c, d): (u64, u64)) -> (u64, u64) {
    (d, (2 * p - c - d) % p)
}

impl Engine {
    pub fn new(p: u64, canon: Canon, h_gens: &[u64]) -> Result<Engine, EngineError> {
        if !is_prime(p) {
            return Err(EngineError::CompositeLevel(p));
        }
        let min_level = match canon {
            Canon::Projective => 2,
            Canon::OrbitMin => 5,
        };
        if p < min_level {
            return Err(EngineError::LevelTooSmall(p, min_level));
        }
        let scalars: Vec<u64> = match canon {
            Canon::Projective => (1..p).collect(),
            Canon::OrbitMin => scalar_subgroup(p, h_gens),
        };

        // Canonical symbol list in sorted order.
        let mut sym_set: BTreeSet<(u64, u64)> = BTreeSet::new();
        match canon {
            Canon::Projective => {
                for c in 0..p {
                    sym_set.insert((c, 1));
                }
                sym_set.insert((1, 0));
            }
            Canon::OrbitMin => {
                for c in 0..p {
                    for d in 0..p {
                        if c == 0 && d == 0 {
                            continue;
                        }
                        sym_set.insert(canon_pair_raw(p, canon, &scalars, c, d));
                    }
                }
            }
        }
        let syms: Vec<(u64, u64)> = sym_set.into_iter().collect();
        let n = syms.len();
        let index: HashMap<(u64, u64), usize> =
            syms.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let canon_idx =
            |(c, d): (u64, u64)| -> usize { index[&canon_pair_raw(p, canon, &scalars, c, d)] };

        // Two-term folding: each S-orbit {s, sS} becomes one variable with
        // x_{sS} = −x_s, or zero when S fixes the class.
        let mut nu2 = 0usize;
        let mut var_of: Vec<Option<(usize, i64)>> = vec![None; n]; // (var, sign)
        let mut var_syms: Vec<usize> = Vec::new();
        for i in 0..n {
            if var_of[i].is_some() {
                continue;
            }
            let j = canon_idx(act_s(p, syms[i]));
            if j == i {
                nu2 += 1;
                var_of[i] = Some((usize::MAX, 0)); // class is zero over ℚ
            } else {
                let v = var_syms.len();
                var_syms.push(i);
                var_of[i] = Some((v, 1));
                var_of[j] = Some((v, -1));
            }
        }
        let n_vars = var_syms.len();

        // Three-term relations, one per T-orbit, folded onto the variables.
        let mut nu3 = 0usize;
        let mut seen_t = vec![false; n];
        let mut rel_rows: Vec<Vec<(usize, i64)>> = Vec::new();
        for i in 0..n {
            if seen_t[i] {
                continue;
            }
            let j = canon_idx(act_t(p, syms[i]));
            let k = canon_idx(act_t(p, syms[j]));
            let orbit: Vec<usize> = if j == i { vec![i] } else { vec![i, j, k] };
            if j == i {
                nu3 += 1;
            }
            let mut coeffs: BTreeMap<usize, i64> = BTreeMap::new();
            for &s in &orbit {
                seen_t[s] = true;
                let (v, sg) = var_of[s].unwrap();
                if sg != 0 {
                    *coeffs.entry(v).or_insert(0) += sg;
                }
            }
            coeffs.retain(|_, c| *c != 0);
            if !coeffs.is_empty() {
                rel_rows.push(coeffs.into_iter().collect());
            }
        }

        // Sparse reduced echelon of the relation system.
        let (pivot_map, free_vars) = sparse_rref(n_vars, rel_rows);
        let m = free_vars.len();
        let free_pos: HashMap<usize, usize> =
            free_vars.iter().enumerate().map(|(f, &v)| (v, f)).collect();

        // Images of the variables in the free basis.
        let mut den = Int::one();
        for row in pivot_map.values() {
            for coeff in row.values() {
                den = den.lcm(coeff.denom());
            }
        }
        let mut var_img: Vec<Vec<Int>> = Vec::with_capacity(n_vars);
        for v in 0..n_vars {
            let mut img = vec![Int::zero(); m];
            if let Some(&f) = free_pos.get(&v) {
                img[f] = den.clone();
            } else if let Some(row) = pivot_map.get(&v) {
                for (&c, coeff) in row {
                    let scaled = coeff * Rat::from(den.clone());
                    debug_assert!(scaled.is_integer());
                    img[free_pos[&c]] = -scaled.to_integer();
                }
            } else {
                unreachable!("variable neither free nor pivot");
            }
            var_img.push(img);
        }
        let gen_num: Vec<Vec<Int>> = (0..n)
            .map(|i| {
                let (v, sg) = var_of[i].unwrap();
                match sg {
                    0 => vec![Int::zero(); m],
                    1 => var_img[v].clone(),
                    _ => var_img[v].iter().map(|x| -x.clone()).collect(),
                }
            })
            .collect();
        let basis_syms: Vec<usize> = free_vars.iter().map(|&v| var_syms[v]).collect();

        // Cusp classes, in a fixed sorted order.
        let orbit_min = |a: u64| -> u64 {
            scalars.iter().map(|&s| (s * a) % p).min().unwrap()
        };
        let unit_reps: BTreeSet<u64> = (1..p).map(orbit_min).collect();
        let mut cusps: Vec<Cusp> = unit_reps.iter().map(|&u| Cusp::Inf(u)).collect();
        cusps.extend(unit_reps.iter().map(|&u| Cusp::Zero(u)));
        let cusp_index: HashMap<Cusp, usize> =
            cusps.iter().enumerate().map(|(i, &c)| (c, i)).collect();

        let mut engine = Engine {
            p,
            canon,
            scalars,
            syms,
            index,
            nu2,
            nu3,
            basis_syms,
            gen_num,
            gen_den: den,
            cusps,
            boundary_free: ZMat::zero(0, 0),
            cuspidal: RelMat::identity(0),
            genus: 0,
            cusp_rref: QMat::zero(0, 0),
            cusp_rref_pivots: Vec::new(),
            quot_cols: Vec::new(),
            cusp_block_inv: QMat::zero(0, 0),
            hecke_memo: Mutex::new(HashMap::new()),
        };

        let mut boundary = ZMat::zero(m, engine.cusps.len());
        for f in 0..m {
            let (c, d) = engine.syms[engine.basis_syms[f]];
            let (plus, minus) = engine.boundary_of_sym(c, d);
            boundary[(f, cusp_index[&plus])] += 1;
            boundary[(f, cusp_index[&minus])] -= 1;
        }
        engine.boundary_free = boundary;
        engine.finish_construction()?;
        Ok(engine)
    }

    /// Derived data: integral cuspidal lattice and solver blocks. The genus
    /// is cross-checked against the index/ramification formula.
    fn finish_construction(&mut self) -> Result<(), EngineError> {
        let m = self.dim();
        // ℤ-span of all symbol images (contains the unit lattice den·ℤ^m).
        let span = ZMat::from_rows(self.gen_num.clone()).hnf();
        let mut span_rows: Vec<Vec<Int>> = Vec::new();
        for r in 0..span.rows {
            if !span.row(r).iter().all(|x| x.is_zero()) {
                span_rows.push(span.row(r).to_vec());
            }
        }
        if span_rows.len() != m {
            return Err(EngineError::Internal(
                "symbol images do not span the quotient".into(),
            ));
        }
        let lat = ZMat::from_rows(span_rows);
        // Boundary of the lattice basis rows; integral since each symbol
        // image has boundary ±(cusp difference).
        let b_num = lat.mul(&self.boundary_free);
        let mut b_int = ZMat::zero(m, self.cusps.len());
        for i in 0..m {
            for j in 0..self.cusps.len() {
                let (q, r) = b_num[(i, j)].div_rem(&self.gen_den);
                if !r.is_zero() {
                    return Err(EngineError::Internal(
                        "lattice boundary is not integral".into(),
                    ));
                }
                b_int[(i, j)] = q;
            }
        }
        let kernel = b_int.left_kernel_saturated();
        let knum = if kernel.rows == 0 {
            ZMat::zero(0, m)
        } else {
            kernel.mul(&lat)
        };
        let cuspidal = RelMat::new(knum, self.gen_den.clone());
        let rank = cuspidal.num.rows;
        if rank % 2 != 0 {
            return Err(EngineError::Internal("odd cuspidal rank".into()));
        }
        // Index/ramification genus formula, exact cross-check.
        let mu = self.syms.len() as i64;
        let g12 = 12 + mu - 3 * self.nu2 as i64 - 4 * self.nu3 as i64
            - 6 * self.cusps.len() as i64;
        if g12 % 12 != 0 || g12 / 12 != (rank / 2) as i64 {
            return Err(EngineError::Internal(format!(
                "cuspidal rank {} disagrees with the genus formula value {}/12",
                rank, g12
            )));
        }
        self.genus = rank / 2;
        self.cuspidal = cuspidal;

        let c_q = self.cuspidal.to_qmat();
        let mut rref = c_q.clone();
        let pivots = rref.rref();
        if pivots.len() != rank {
            return Err(EngineError::Internal("cuspidal basis not independent".into()));
        }
        let mut block = QMat::zero(rank, rank);
        for i in 0..rank {
            for (j, &col) in pivots.iter().enumerate() {
                block[(i, j)] = c_q[(i, col)].clone();
            }
        }
        let block_inv = block
            .inverse()
            .map_err(|_| EngineError::Internal("cuspidal pivot block singular".into()))?;
        let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
        self.quot_cols = (0..m).filter(|c| !pivot_set.contains(c)).collect();
        self.cusp_rref = rref;
        self.cusp_rref_pivots = pivots;
        self.cusp_block_inv = block_inv;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.basis_syms.len()
    }

    pub fn cuspidal_rank(&self) -> usize {
        self.cuspidal.num.rows
    }

    pub fn canon_pair(&self, c: u64, d: u64) -> (u64, u64) {
        canon_pair_raw(self.p, self.canon, &self.scalars, c, d)
    }

    pub fn sym_index(&self, c: u64, d: u64) -> usize {
        self.index[&self.canon_pair(c, d)]
    }

    /// Image of the symbol class of (c,d) in the free basis, as rationals.
    pub fn genvec(&self, c: u64, d: u64) -> Vec<Rat> {
        let i = self.sym_index(c, d);
        self.gen_num[i]
            .iter()
            .map(|x| Rat::new(x.clone(), self.gen_den.clone()))
            .collect()
    }

    /// Canonical orbit representative of a unit (cusp labelling).
    pub fn orbit_min_unit(&self, a: u64) -> u64 {
        let a = a % self.p;
        debug_assert!(a != 0);
        self.scalars.iter().map(|&s| (s * a) % self.p).min().unwrap()
    }

    /// The two boundary terms [γ∞] − [γ0] of a symbol class.
    pub fn boundary_of_sym(&self, c: u64, d: u64) -> (Cusp, Cusp) {
        let p = self.p;
        let (c, d) = (c % p, d % p);
        let plus = if c == 0 {
            Cusp::Inf(self.orbit_min_unit(inv_mod(d, p).unwrap()))
        } else {
            Cusp::Zero(self.orbit_min_unit(c))
        };
        let minus = if d == 0 {
            Cusp::Inf(self.orbit_min_unit(inv_mod(c, p).unwrap()))
        } else {
            Cusp::Zero(self.orbit_min_unit(d))
        };
        (plus, minus)
    }

    pub fn boundary_of_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.dim());
        let mut out = vec![Rat::zero(); self.cusps.len()];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cusps.len() {
                let b = &self.boundary_free[(i, j)];
                if !b.is_zero() {
                    out[j] += vi * Rat::from(b.clone());
                }
            }
        }
        out
    }

    pub fn is_cuspidal(&self, v: &[Rat]) -> bool {
        self.boundary_of_vec(v).iter().all(|x| x.is_zero())
    }

    /// Coordinates of a cuspidal vector on the cuspidal basis.
    pub fn cusp_coords(&self, v: &[Rat]) -> Result<Vec<Rat>, EngineError> {
        let g2 = self.cuspidal_rank();
        let c_q = self.cuspidal.to_qmat();
        // x = v_J · (C_J)⁻¹, then verify x·C = v.
        let mut vj = QMat::zero(1, g2);
        for (j, &col) in self.cusp_rref_pivots.iter().enumerate() {
            vj[(0, j)] = v[col].clone();
        }
        let x = vj.mul(&self.cusp_block_inv);
        let back = x.mul(&c_q);
        for j in 0..self.dim() {
            if back[(0, j)] != v[j] {
                return Err(EngineError::NotCuspidal);
            }
        }
        Ok((0..g2).map(|j| x[(0, j)].clone()).collect())
    }

    pub fn rel_from_cusp(&self, x: &[Rat]) -> Vec<Rat> {
        let c_q = self.cuspidal.to_qmat();
        let xm = QMat::from_rows(vec![x.to_vec()]);
        let v = xm.mul(&c_q);
        (0..self.dim()).map(|j| v[(0, j)].clone()).collect()
    }

    // ------------------------------------------------------------------
    // Operators
    // ------------------------------------------------------------------

    /// T_n on the relative space by direct summation over the fixed
    /// determinant-n family (reference implementation, used for primes).
    pub fn hecke_relative_direct(&self, n: u64) -> RelMat {
        let fam = merel::family(n);
        let m = self.dim();
        let p = self.p;
        let mut rows: Vec<Vec<Int>> = Vec::with_capacity(m);
        for &si in &self.basis_syms {
            let (c, d) = self.syms[si];
            let mut acc = vec![Int::zero(); m];
            for mat in fam.iter() {
                let [a, b, cm, dm] = *mat;
                let c2 = (c * (a % p) + d * (cm % p)) % p;
                let d2 = (c * (b % p) + d * (dm % p)) % p;
                if c2 == 0 && d2 == 0 {
                    continue; // only possible when p | n
                }
                let gv = &self.gen_num[self.sym_index(c2, d2)];
                for (x, y) in acc.iter_mut().zip(gv.iter()) {
                    *x += y;
                }
            }
            rows.push(acc);
        }
        RelMat::new(ZMat::from_rows(rows), self.gen_den.clone())
    }

    /// Diamond operator ⟨n⟩ (scalar action on symbols; identity on the
    /// projective model).
    pub fn diamond_relative(&self, n: u64) -> RelMat {
        let n = n % self.p;
        assert!(n != 0, "diamond index must be a unit");
        if self.canon == Canon::Projective {
            return RelMat::identity(self.dim());
        }
        let m = self.dim();
        let mut rows = Vec::with_capacity(m);
        for &si in &self.basis_syms {
            let (c, d) = self.syms[si];
            rows.push(self.gen_num[self.sym_index((n * c) % self.p, (n * d) % self.p)].clone());
        }
        RelMat::new(ZMat::from_rows(rows), self.gen_den.clone())
    }

    /// T_n via multiplicativity and the prime-power recursion
    /// T_{q^{k}} = T_{q^{k-1}}T_q − q⟨q⟩T_{q^{k-2}} (q ≠ p); memoized.
    pub fn hecke_relative(&self, n: u64) -> RelMat {
        if let Some(m) = self.hecke_memo.lock().unwrap().get(&n) {
            return m.clone();
        }
        let result = self.hecke_relative_uncached(n);
        self.hecke_memo.lock().unwrap().insert(n, result.clone());
        result
    }

    /// Snapshot of the memoized relative Hecke matrices (cache export).
    pub fn hecke_snapshot(&self) -> Vec<(u64, RelMat)> {
        let memo = self.hecke_memo.lock().unwrap();
        let mut out: Vec<(u64, RelMat)> = memo.iter().map(|(k, v)| (*k, v.clone())).collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }

    pub fn hecke_preload(&self, entries: Vec<(u64, RelMat)>) {
        let mut memo = self.hecke_memo.lock().unwrap();
        for (n, m) in entries {
            memo.insert(n, m);
        }
    }

    fn hecke_relative_uncached(&self, n: u64) -> RelMat {
        assert!(n >= 1);
        if n == 1 {
            return RelMat::identity(self.dim());
        }
        // Split off one full prime power.
        let q = smallest_prime_factor(n);
        let mut qe = q;
        let mut rest = n / q;
        while rest % q == 0 {
            qe *= q;
            rest /= q;
        }
        if rest > 1 {
            return self.hecke_relative(qe).mul(&self.hecke_relative(rest));
        }
        // n = q^e
        if n == q {
            return self.hecke_relative_direct(q);
        }
        if q == self.p {
            // U_p is multiplicative without correction term.
            return self.hecke_relative(n / q).mul(&self.hecke_relative(q));
        }
        let t_prev = self.hecke_relative(n / q);
        let t_q = self.hecke_relative(q);
        let t_prev2 = self.hecke_relative(n / (q * q));
        let correction = self
            .diamond_relative(q)
            .mul(&t_prev2)
            .scale_int(&Int::from(q));
        t_prev.mul(&t_q).sub(&correction)
    }

    /// Restrict a relative operator to the cuspidal lattice basis; the
    /// result is asserted to be an integer matrix and verified exactly.
    pub fn restrict_cuspidal(&self, a: &RelMat) -> Result<ZMat, EngineError> {
        let g2 = self.cuspidal_rank();
        let ca_num = self.cuspidal.num.mul(&a.num);
        let den: Int = &self.cuspidal.den * &a.den;
        // X = (CA)_J (C_J)⁻¹
        let mut caj = QMat::zero(g2, g2);
        for i in 0..g2 {
            for (j, &col) in self.cusp_rref_pivots.iter().enumerate() {
                caj[(i, j)] = Rat::new(ca_num[(i, col)].clone(), den.clone());
            }
        }
        let x = caj.mul(&self.cusp_block_inv);
        if !x.is_integral() {
            return Err(EngineError::Internal(
                "cuspidal restriction is not integral".into(),
            ));
        }
        let xz = x.to_zmat_scaled(&Int::one());
        // Verify X·C = C·A exactly on numerators: X·C_num·a_den = C_num·A_num.
        if xz.mul(&self.cuspidal.num).scale(&a.den) != ca_num {
            return Err(EngineError::Internal(
                "cuspidal restriction failed verification".into(),
            ));
        }
        Ok(xz)
    }

    /// Induced matrix on the boundary quotient (relative / cuspidal).
    pub fn quotient_matrix(&self, a: &RelMat) -> QMat {
        let q = self.quot_cols.len();
        let mut out = QMat::zero(q, q);
        for (i, &f) in self.quot_cols.iter().enumerate() {
            // Row f of A, reduced modulo the cuspidal row space.
            let mut v: Vec<Rat> = (0..self.dim())
                .map(|j| Rat::new(a.num[(f, j)].clone(), a.den.clone()))
                .collect();
            for (r, &pc) in self.cusp_rref_pivots.iter().enumerate() {
                if !v[pc].is_zero() {
                    let coeff = v[pc].clone();
                    for j in 0..self.dim() {
                        let t = &coeff * &self.cusp_rref[(r, j)];
                        v[j] -= t;
                    }
                }
            }
            for (jq, &col) in self.quot_cols.iter().enumerate() {
                out[(i, jq)] = v[col].clone();
            }
        }
        out
    }

    // ------------------------------------------------------------------
    // Paths and the winding element
    // ------------------------------------------------------------------

    /// The class of {0, ∞} in the relative space.
    pub fn zero_inf(&self) -> Vec<Rat> {
        self.genvec(0, 1)
    }

    /// The class of {∞, t} via the continued-fraction expansion of t:
    /// with convergents p_k/q_k of t, the k-th term is the symbol
    /// (q_k, (−1)^{k+1} q_{k−1}), the bottom row of a determinant-1 matrix
    /// sending {0,∞} to {p_{k−1}/q_{k−1}, p_k/q_k}.
    pub fn path_from_inf(&self, t: CuspPt) -> Vec<Rat> {
        let CuspPt::Finite(num, den) = t else {
            return vec![Rat::zero(); self.dim()];
        };
        assert!(den > 0, "normalized cusp point");
        let mut digits: Vec<i128> = Vec::new();
        let (mut a, mut b) = (num as i128, den as i128);
        while b != 0 {
            let q = a.div_euclid(b);
            digits.push(q);
            let r = a - q * b;
            a = b;
            b = r;
        }
        let p = self.p as i128;
        let mut acc = vec![Rat::zero(); self.dim()];
        let (mut q_km2, mut q_km1): (i128, i128) = (1, 0); // q_{-2}, q_{-1}
        for (k, &ak) in digits.iter().enumerate() {
            let qk = ak * q_km1 + q_km2;
            let sign: i128 = if k % 2 == 0 { -1 } else { 1 }; // (−1)^{k+1}
            let c = qk.rem_euclid(p) as u64;
            let d = (sign * q_km1).rem_euclid(p) as u64;
            for (x, y) in acc.iter_mut().zip(self.genvec(c, d)) {
                *x += y;
            }
            q_km2 = q_km1;
            q_km1 = qk;
        }
        acc
    }

    pub fn path(&self, from: CuspPt, to: CuspPt) -> Vec<Rat> {
        let a = self.path_from_inf(to);
        let b = self.path_from_inf(from);
        a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
    }

    /// Winding element: with f the squarefree characteristic polynomial of
    /// T_q on the boundary quotient, f(T_q)·{0,∞} is cuspidal and e solves
    /// e·f(T_q) = f(T_q)·{0,∞} with f(T_q) invertible on the cuspidal
    /// subspace (checked, not assumed). Falls back along q = 2, 3, 5, …
    pub fn winding(&self) -> Result<Winding, EngineError> {
        if self.cuspidal_rank() == 0 {
            return Ok(Winding {
                e_cusp: Vec::new(),
                e_rel: vec![Rat::zero(); self.dim()],
                q_used: 2,
                used_full_charpoly: false,
            });
        }
        let mut tried = Vec::new();
        for q in [2u64, 3, 5, 7, 11, 13] {
            if q == self.p {
                continue;
            }
            tried.push(q);
            let a = self.hecke_relative(q);
            let abar = self.quotient_matrix(&a);
            let full = charpoly_qmat(&abar);
            for (f, used_full) in [(full.squarefree_part(), false), (full.clone(), true)] {
                let v = self.apply_poly_vec(&f, &a, &self.zero_inf());
                if !self.is_cuspidal(&v) {
                    continue;
                }
                let v_cusp = self.cusp_coords(&v)?;
                let x = self.restrict_cuspidal(&a)?;
                // e·f(X) = v with f(X) = M/den: solve e·M = den·v modularly
                // (certifies invertibility and verifies the solution exactly).
                let (fm, fden) = eval_qpoly_zmat_parts(&f, &x);
                let target: Vec<Rat> = v_cusp
                    .iter()
                    .map(|w| w * Rat::from(fden.clone()))
                    .collect();
                let Some(e_cusp) = fm.solve_left_invertible(&target) else {
                    continue;
                };
                let e_rel = self.rel_from_cusp(&e_cusp);
                return Ok(Winding {
                    e_cusp,
                    e_rel,
                    q_used: q,
                    used_full_charpoly: used_full,
                });
            }
        }
        Err(EngineError::WindingUnavailable(tried))
    }

    /// v ↦ v·f(A) by Horner on the row vector.
    pub fn apply_poly_vec(&self, f: &crate::exactalg::QPoly, a: &RelMat, v: &[Rat]) -> Vec<Rat> {
        let m = self.dim();
        let a_q = a.to_qmat();
        let mut acc = vec![Rat::zero(); m];
        for c in f.coeffs().iter().rev() {
            // acc = acc·A + c·v
            let am = QMat::from_rows(vec![acc]).mul(&a_q);
            acc = (0..m).map(|j| &am[(0, j)] + c * &v[j]).collect();
        }
        acc
    }
}

/// Sparse deterministic reduced echelon over ℚ. Rows are sparse coefficient
/// lists on `n_vars` columns. Pivot choice: among live rows the one with the
/// fewest entries (ties: earliest creation), then within it the column held
/// by the fewest rows (ties: smallest column). Retired pivot rows keep being
/// reduced by later pivots, so the final pivot rows are fully reduced.
/// Returns (pivot column → its reduced row on free columns, free columns).
#[allow(clippy::type_complexity)]
fn sparse_rref(
    n_vars: usize,
    rows_in: Vec<Vec<(usize, i64)>>,
) -> (HashMap<usize, HashMap<usize, Rat>>, Vec<usize>) {
    let mut rows: Vec<Option<HashMap<usize, Rat>>> = rows_in
        .into_iter()
        .map(|r| {
            Some(
                r.into_iter()
                    .map(|(c, x)| (c, Rat::from(Int::from(x))))
                    .collect::<HashMap<usize, Rat>>(),
            )
        })
        .collect();
    let n_rows = rows.len();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_vars];
    for (i, row) in rows.iter().enumerate() {
        for &c in row.as_ref().unwrap().keys() {
            col_rows[c].insert(i);
        }
    }
    // (nnz, row) ordering for pivot-row selection.
    let mut live: BTreeSet<(usize, usize)> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.as_ref().unwrap().is_empty())
        .map(|(i, r)| (r.as_ref().unwrap().len(), i))
        .collect();
    for (i, row) in rows.iter_mut().enumerate() {
        if row.as_ref().unwrap().is_empty() {
            *row = None;
            let _ = i;
        }
    }
    let mut pivot_col_of_row: Vec<Option<usize>> = vec![None; n_rows];
    let mut pivot_cols: BTreeSet<usize> = BTreeSet::new();

    while let Some(&(_, ri)) = live.iter().next() {
        live.remove(&(rows[ri].as_ref().unwrap().len(), ri));
        // Choose the sparsest column of this row.
        let pc = rows[ri]
            .as_ref()
            .unwrap()
            .keys()
            .map(|&c| (col_rows[c].len(), c))
            .min()
            .unwrap()
            .1;
        // Normalize the pivot row.
        {
            let row = rows[ri].as_mut().unwrap();
            let inv = row[&pc].recip();
            for v in row.values_mut() {
                *v = &*v * &inv;
            }
        }
        // Eliminate pc from every other row holding it (live or retired).
        let holders: Vec<usize> = col_rows[pc].iter().copied().filter(|&r| r != ri).collect();
        let pivot_row = rows[ri].as_ref().unwrap().clone();
        for r in holders {
            let was_live = pivot_col_of_row[r].is_none();
            if was_live {
                live.remove(&(rows[r].as_ref().unwrap().len(), r));
            }
            let coeff = rows[r].as_ref().unwrap()[&pc].clone();
            let row = rows[r].as_mut().unwrap();
            for (&c, pv) in &pivot_row {
                let delta = &coeff * pv;
                let entry = row.entry(c).or_insert_with(Rat::zero);
                *entry -= delta;
                if entry.is_zero() {
                    row.remove(&c);
                    col_rows[c].remove(&r);
                } else if c != pc {
                    col_rows[c].insert(r);
                }
            }
            debug_assert!(!rows[r].as_ref().unwrap().contains_key(&pc));
            if was_live {
                if rows[r].as_ref().unwrap().is_empty() {
                    rows[r] = None;
                } else {
                    live.insert((rows[r].as_ref().unwrap().len(), r));
                }
            }
        }
        col_rows[pc].clear();
        col_rows[pc].insert(ri);
        pivot_col_of_row[ri] = Some(pc);
        pivot_cols.insert(pc);
    }

    let free_vars: Vec<usize> = (0..n_vars).filter(|c| !pivot_cols.contains(c)).collect();
    let mut pivot_map = HashMap::new();
    for (ri, pc) in pivot_col_of_row.iter().enumerate() {
        if let Some(pc) = pc {
            let mut row = rows[ri].take().unwrap();
            let lead = row.remove(pc).unwrap();
            debug_assert!(lead.is_one());
            debug_assert!(row.keys().all(|c| !pivot_cols.contains(c)));
            pivot_map.insert(*pc, row);
        }
    }
    (pivot_map, free_vars)
}

/// f(X) for f ∈ ℚ[x] and X an integer matrix, as (numerator matrix, global
/// denominator): scale f to integer coefficients, Horner over ℤ.
pub(crate) fn eval_qpoly_zmat_parts(f: &crate::exactalg::QPoly, x: &ZMat) -> (ZMat, Int) {
    let mut den = Int::one();
    for c in f.coeffs() {
        den = den.lcm(c.denom());
    }
    let coeffs: Vec<Int> = f
        .coeffs()
        .iter()
        .map(|c| (c * Rat::from(den.clone())).to_integer())
        .collect();
    let n = x.rows;
    let mut acc = ZMat::zero(n, n);
    for c in coeffs.iter().rev() {
        acc = acc.mul(x);
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    (acc, den)
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x0(p: u64) -> Engine {
        Engine::new(p, Canon::Projective, &[]).unwrap()
    }

    #[test]
    fn cuspidal_ranks_match_known_genera() {
        for (p, genus) in [(2, 0), (3, 0), (5, 0), (7, 0), (11, 1), (13, 0), (37, 2), (67, 5)] {
            let e = x0(p);
            assert_eq!(e.genus, genus, "p = {p}");
            assert_eq!(e.cuspidal_rank(), 2 * genus);
            assert_eq!(e.dim(), 2 * genus + e.cusps.len() - 1);
            assert_eq!(e.cusps.len(), 2);
        }
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(matches!(
            Engine::new(12, Canon::Projective, &[]),
            Err(EngineError::CompositeLevel(12))
        ));
        assert!(matches!(
            Engine::new(3, Canon::OrbitMin, &[]),
            Err(EngineError::LevelTooSmall(3, 5))
        ));
    }

    #[test]
    fn manin_relations_hold_in_quotient() {
        for eng in [x0(11), x0(13), Engine::new(13, Canon::OrbitMin, &[]).unwrap()] {
            let p = eng.p;
            for &s in &eng.syms {
                let v = eng.genvec(s.0, s.1);
                let vs = eng.genvec(act_s(p, s).0, act_s(p, s).1);
                for (a, b) in v.iter().zip(vs.iter()) {
                    assert!((a + b).is_zero(), "2-term relation violated at {s:?}");
                }
                let t1 = act_t(p, s);
                let t2 = act_t(p, t1);
                let vt = eng.genvec(t1.0, t1.1);
                let vt2 = eng.genvec(t2.0, t2.1);
                for ((a, b), c) in v.iter().zip(vt.iter()).zip(vt2.iter()) {
                    assert!((&(a + b) + c).is_zero(), "3-term relation violated at {s:?}");
                }
            }
        }
    }

    #[test]
    fn gamma_h_ranks() {
        // X₁(13) has genus 2; trivial H means scalars = {±1}.
        let e = Engine::new(13, Canon::OrbitMin, &[]).unwrap();
        assert_eq!(e.cuspidal_rank(), 4);
        assert_eq!(e.cusps.len(), 12);
        // Full group collapses to the projective model.
        let gens: Vec<u64> = vec![2]; // 2 generates (ℤ/13ℤ)*
        let f = Engine::new(13, Canon::OrbitMin, &gens).unwrap();
        let g = x0(13);
        assert_eq!(f.dim(), g.dim());
        assert_eq!(f.cuspidal_rank(), g.cuspidal_rank());
    }

    #[test]
    fn path_identities() {
        let e = x0(11);
        // path(0,∞) = λ(0) = class of (0:1).
        let p0inf = e.path(CuspPt::finite(0, 1), CuspPt::Infinity);
        assert_eq!(p0inf, e.genvec(0, 1));
        // path(x,x) = 0.
        let same = e.path(CuspPt::finite(3, 7), CuspPt::finite(3, 7));
        assert!(same.iter().all(|x| x.is_zero()));
        // path(0, 1/k) = λ(k), i.e. the class of (k:1).
        for k in 1..11 {
            let lam = e.path(CuspPt::finite(0, 1), CuspPt::finite(1, k));
            assert_eq!(lam, e.genvec(k as u64, 1), "k = {k}");
        }
        // Additivity: path(x,y) + path(y,z) = path(x,z).
        let (x, y, z) = (CuspPt::finite(1, 3), CuspPt::finite(2, 5), CuspPt::Infinity);
        let lhs: Vec<Rat> = e
            .path(x, y)
            .iter()
            .zip(e.path(y, z).iter())
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(lhs, e.path(x, z));
    }

    #[test]
    fn hecke_commutes_and_recursion() {
        for eng in [x0(11), x0(13)] {
            let t2 = eng.hecke_relative(2);
            let t3 = eng.hecke_relative(3);
            assert_eq!(t2.mul(&t3), t3.mul(&t2));
            assert_eq!(t2.mul(&t3), eng.hecke_relative(6));
            // T₄ = T₂² − 2T₁ at level p ∤ 2 (trivial diamond).
            let t4 = eng.hecke_relative(4);
            let id2 = RelMat::identity(eng.dim()).scale_int(&Int::from(2));
            assert_eq!(t4, t2.mul(&t2).sub(&id2));
        }
    }

    #[test]
    fn boundary_equivariance() {
        // boundary ∘ T_n = (induced T_n) ∘ boundary: verified by checking
        // that T_n preserves the cuspidal subspace and that the boundary of
        // T_n{0,∞} is σ₁(n)·boundary({0,∞}) for n < p.
        let e = x0(11);
        for n in 2..6u64 {
            let t = e.hecke_relative(n);
            let v = e.zero_inf();
            let tv_m = QMat::from_rows(vec![v.clone()]).mul(&t.to_qmat());
            let tv: Vec<Rat> = (0..e.dim()).map(|j| tv_m[(0, j)].clone()).collect();
            let sigma: i64 = (1..=n as i64).filter(|d| n as i64 % d == 0).sum();
            let bv = e.boundary_of_vec(&v);
            let btv = e.boundary_of_vec(&tv);
            for (a, b) in btv.iter().zip(bv.iter()) {
                assert_eq!(a, &(b * Rat::from(Int::from(sigma))));
            }
        }
    }

    #[test]
    fn winding_at_11() {
        let e = x0(11);
        let w = e.winding().unwrap();
        assert_eq!(w.q_used, 2);
        assert!(!w.used_full_charpoly);
        assert!(e.is_cuspidal(&w.e_rel));
        assert!(w.e_rel.iter().any(|x| !x.is_zero()));
        // Defining property: e·(T₂ − 3) = (T₂ − 3)·{0,∞}.
        let t2 = e.hecke_relative(2).sub_scalar(&Int::from(3)).to_qmat();
        let lhs = QMat::from_rows(vec![w.e_rel.clone()]).mul(&t2);
        let rhs = QMat::from_rows(vec![e.zero_inf()]).mul(&t2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn winding_zero_in_genus_zero() {
        for p in [2u64, 3, 5, 7, 13] {
            let e = x0(p);
            let w = e.winding().unwrap();
            assert!(w.e_rel.iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    #[ignore = "timing probe, run manually with --release"]
    fn winding_stage_probe() {
        let e = Engine::new(43, Canon::OrbitMin, &[]).unwrap();
        let t = std::time::Instant::now();
        let a = e.hecke_relative(2);
        println!("hecke: {:?}", t.elapsed());
        let t = std::time::Instant::now();
        let abar = e.quotient_matrix(&a);
        println!("quotient ({}x{}): {:?}", abar.rows, abar.cols, t.elapsed());
        let t = std::time::Instant::now();
        let full = charpoly_qmat(&abar);
        println!("charpoly (deg {}): {:?}", full.degree(), t.elapsed());
        let t = std::time::Instant::now();
        let f = full.squarefree_part();
        println!("squarefree (deg {}): {:?}", f.degree(), t.elapsed());
        let t = std::time::Instant::now();
        let v = e.apply_poly_vec(&f, &a, &e.zero_inf());
        println!("apply_poly_vec: {:?}", t.elapsed());
        let t = std::time::Instant::now();
        let vc = e.cusp_coords(&v).unwrap();
        println!("cusp_coords: {:?}", t.elapsed());
        let t = std::time::Instant::now();
        let x = e.restrict_cuspidal(&a).unwrap();
        println!("restrict: {:?}", t.elapsed());
        let t = std::time::Instant::now();
        let (fm, fden) = eval_qpoly_zmat_parts(&f, &x);
        println!("eval_qpoly_zmat: {:?}", t.elapsed());
        let t = std::time::Instant::now();
        let target: Vec<Rat> = vc.iter().map(|w| w * Rat::from(fden.clone())).collect();
        let _e = fm.solve_left_invertible(&target).unwrap();
        println!("solve: {:?}", t.elapsed());
    }

    #[test]
    #[ignore = "timing probe, run manually with --release"]
    fn build_timing_probe() {
        for (label, p, canon, gens) in [
            ("x0(499)", 499u64, Canon::Projective, vec![]),
            ("x1(43)", 43, Canon::OrbitMin, vec![]),
            ("xh(73,<10>)", 73, Canon::OrbitMin, vec![10u64]),
        ] {
            let t0 = std::time::Instant::now();
            let e = Engine::new(p, canon, &gens).unwrap();
            let built = t0.elapsed();
            let t1 = std::time::Instant::now();
            let w = e.winding().unwrap();
            println!(
                "{label}: dim {} genus {} build {:?} winding {:?} (q={}, full={})",
                e.dim(),
                e.genus,
                built,
                t1.elapsed(),
                w.q_used,
                w.used_full_charpoly
            );
        }
    }

    #[test]
    fn diamond_representation() {
        let e = Engine::new(13, Canon::OrbitMin, &[]).unwrap();
        let d2 = e.diamond_relative(2);
        let d3 = e.diamond_relative(3);
        assert_eq!(d2.mul(&d3), e.diamond_relative(6));
        assert_eq!(e.diamond_relative(1), RelMat::identity(e.dim()));
        // ⟨n⟩ has finite order dividing #((ℤ/pℤ)*/±H) = 6.
        let mut acc = d2.clone();
        for _ in 1..6 {
            acc = acc.mul(&d2);
        }
        assert_eq!(acc, RelMat::identity(e.dim()));
        // T₄ = T₂² − 2⟨2⟩.
        let t2 = e.hecke_relative(2);
        let t4 = e.hecke_relative(4);
        assert_eq!(t4, t2.mul(&t2).sub(&d2.scale_int(&Int::from(2))));
    }
}
