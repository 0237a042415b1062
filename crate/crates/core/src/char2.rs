//! Elliptic curves over 𝔽_{2^k} in general Weierstrass form, the Tate
//! normal form E_{b,c}: y² + (1−c)xy − by = x³ − bx², and the analysis of
//! the 24 supersingular parameters with a point of order 73 over 𝔽_{2⁶}
//! together with the ⟨10⟩ diamond orbit structure.

use crate::exactalg::{BinaryField, BinaryFieldElt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Char2Error {
    /// The discriminant vanishes.
    Singular,
    /// Tate normalization needs a point of order at least 4.
    OrderTooSmall,
    NotOnCurve,
    Internal(String),
}

impl std::fmt::Display for Char2Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Char2Error::Singular => write!(f, "singular curve"),
            Char2Error::OrderTooSmall => write!(f, "point order must be at least 4"),
            Char2Error::NotOnCurve => write!(f, "point not on the curve"),
            Char2Error::Internal(m) => write!(f, "internal: {m}"),
        }
    }
}

impl std::error::Error for Char2Error {}

/// A point on a Weierstrass curve, affine or at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pt {
    Infinity,
    Affine(BinaryFieldElt, BinaryFieldElt),
}

/// y² + a₁xy + a₃y = x³ + a₂x² + a₄x + a₆ over a fixed 𝔽_{2^k}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Curve {
    pub f: BinaryField,
    pub a1: BinaryFieldElt,
    pub a2: BinaryFieldElt,
    pub a3: BinaryFieldElt,
    pub a4: BinaryFieldElt,
    pub a6: BinaryFieldElt,
}

impl Curve {
    pub fn new(
        f: BinaryField,
        a: [BinaryFieldElt; 5],
    ) -> Result<Curve, Char2Error> {
        let c = Curve {
            f,
            a1: a[0],
            a2: a[1],
            a3: a[2],
            a4: a[3],
            a6: a[4],
        };
        if c.discriminant() == 0 {
            return Err(Char2Error::Singular);
        }
        Ok(c)
    }

    /// The Tate curve E_{b,c}: in characteristic 2 the equation
    /// y² + (1−c)xy − by = x³ − bx² has (a₁,a₂,a₃,a₄,a₆) = (1+c, b, b, 0, 0)
    /// and carries the marked point (0,0).
    pub fn tate(f: BinaryField, b: BinaryFieldElt, c: BinaryFieldElt) -> Result<Curve, Char2Error> {
        Curve::new(f, [f.add(f.one(), c), b, b, 0, 0])
    }

    /// Characteristic-2 discriminant via the b-invariants: with b₂ = a₁²,
    /// b₄ = a₁a₃, b₆ = a₃², b₈ = a₁²a₆ + a₁a₃a₄ + a₂a₃² + a₄², it is
    /// b₂²b₈ + b₆² + b₂b₄b₆.
    pub fn discriminant(&self) -> BinaryFieldElt {
        let f = &self.f;
        let b2 = f.mul(self.a1, self.a1);
        let b4 = f.mul(self.a1, self.a3);
        let b6 = f.mul(self.a3, self.a3);
        let b8 = f.add(
            f.add(f.mul(b2, self.a6), f.mul(f.mul(self.a1, self.a3), self.a4)),
            f.add(f.mul(self.a2, b6), f.mul(self.a4, self.a4)),
        );
        f.add(
            f.add(f.mul(f.mul(b2, b2), b8), f.mul(b6, b6)),
            f.mul(f.mul(b2, b4), b6),
        )
    }

    pub fn contains(&self, p: Pt) -> bool {
        let Pt::Affine(x, y) = p else { return true };
        let f = &self.f;
        let lhs = f.add(
            f.mul(y, y),
            f.add(f.mul(f.mul(self.a1, x), y), f.mul(self.a3, y)),
        );
        let rhs = f.add(
            f.add(f.mul(f.mul(x, x), x), f.mul(f.mul(self.a2, x), x)),
            f.add(f.mul(self.a4, x), self.a6),
        );
        lhs == rhs
    }

    pub fn neg(&self, p: Pt) -> Pt {
        match p {
            Pt::Infinity => Pt::Infinity,
            Pt::Affine(x, y) => Pt::Affine(
                x,
                self.f
                    .add(y, self.f.add(self.f.mul(self.a1, x), self.a3)),
            ),
        }
    }

    pub fn add_pts(&self, p: Pt, q: Pt) -> Pt {
        let f = &self.f;
        let (x1, y1) = match p {
            Pt::Infinity => return q,
            Pt::Affine(x, y) => (x, y),
        };
        let (x2, y2) = match q {
            Pt::Infinity => return p,
            Pt::Affine(x, y) => (x, y),
        };
        let lambda = if x1 != x2 {
            // chord
            f.div(f.add(y1, y2), f.add(x1, x2))
        } else {
            if self.neg(p) == q {
                return Pt::Infinity;
            }
            // tangent: (x₁² + a₄ + a₁y₁)/(a₁x₁ + a₃); the denominator is
            // nonzero because p is not 2-torsion here
            let den = f.add(f.mul(self.a1, x1), self.a3);
            f.div(f.add(f.add(f.mul(x1, x1), self.a4), f.mul(self.a1, y1)), den)
        };
        let nu = f.add(y1, f.mul(lambda, x1));
        let x3 = f.add(
            f.add(f.mul(lambda, lambda), f.mul(self.a1, lambda)),
            f.add(self.a2, f.add(x1, x2)),
        );
        let y3 = f.add(
            f.mul(f.add(lambda, self.a1), x3),
            f.add(nu, self.a3),
        );
        Pt::Affine(x3, y3)
    }

    pub fn mul_pt(&self, n: u64, p: Pt) -> Pt {
        let mut acc = Pt::Infinity;
        let mut base = p;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add_pts(acc, base);
            }
            base = self.add_pts(base, base);
            n >>= 1;
        }
        acc
    }

    /// Least n ≥ 1 with nP = ∞, or None if it exceeds `bound`.
    pub fn point_order(&self, p: Pt, bound: u64) -> Option<u64> {
        let mut acc = p;
        for n in 1..=bound {
            if acc == Pt::Infinity {
                return Some(n);
            }
            acc = self.add_pts(acc, p);
        }
        if acc == Pt::Infinity {
            Some(bound)
        } else {
            None
        }
    }

    /// #E(𝔽_{2^k}) by full enumeration.
    pub fn group_order(&self) -> u64 {
        let mut count = 1; // infinity
        for x in self.f.elements() {
            for y in self.f.elements() {
                if self.contains(Pt::Affine(x, y)) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// j-invariant of E_{b,c} in characteristic 2: (c+1)¹² / Δ_{b,c}. Zero
/// exactly when c = 1, which is also exactly the supersingular case.
pub fn j_invariant(
    f: BinaryField,
    b: BinaryFieldElt,
    c: BinaryFieldElt,
) -> Result<BinaryFieldElt, Char2Error> {
    let e = Curve::tate(f, b, c)?;
    let num = f.pow(f.add(c, f.one()), 12);
    Ok(f.div(num, e.discriminant()))
}

/// Unique (b, c) with (E, P) ≅ (E_{b,c}, (0,0)), for P of order ≥ 4:
/// translate P to the origin, shear away the x-coefficient, then rescale.
/// Every intermediate is verified by re-substitution.
pub fn tate_normalize(
    e: &Curve,
    p: Pt,
) -> Result<(BinaryFieldElt, BinaryFieldElt), Char2Error> {
    let f = e.f;
    if !e.contains(p) {
        return Err(Char2Error::NotOnCurve);
    }
    match e.point_order(p, 4) {
        Some(n) if n <= 3 => return Err(Char2Error::OrderTooSmall),
        _ => {}
    }
    let Pt::Affine(r, t) = p else {
        return Err(Char2Error::OrderTooSmall);
    };
    // x -> x + r, y -> y + t moves P to (0,0)
    let a1 = e.a1;
    let a2 = f.add(e.a2, r);
    let a3 = f.add(e.a3, f.mul(r, a1));
    let a4 = f.add(f.add(e.a4, f.mul(t, a1)), f.mul(r, r));
    let a6 = f.add(
        f.add(
            f.add(e.a6, f.mul(r, e.a4)),
            f.add(f.mul(f.mul(r, r), e.a2), f.mul(f.mul(r, r), r)),
        ),
        f.add(f.add(f.mul(t, e.a3), f.mul(t, t)), f.mul(f.mul(r, t), a1)),
    );
    if a6 != 0 {
        return Err(Char2Error::Internal("translation did not zero a6".into()));
    }
    // a3 = 0 would make (0,0) 2-torsion, excluded by the order check
    if a3 == 0 {
        return Err(Char2Error::OrderTooSmall);
    }
    // y -> y + s·x with s = a4/a3 zeroes a4
    let s = f.div(a4, a3);
    let a2 = f.add(a2, f.add(f.mul(s, a1), f.mul(s, s)));
    // a2 = 0 would correspond to order 3
    if a2 == 0 {
        return Err(Char2Error::OrderTooSmall);
    }
    // x -> u²x, y -> u³y with u = a3/a2 equalizes a2 and a3
    let u = f.div(a3, a2);
    let b = f.div(a2, f.mul(u, u));
    let c = f.add(f.one(), f.div(a1, u));
    let check = Curve::tate(f, b, c)?;
    if !check.contains(Pt::Affine(0, 0)) {
        return Err(Char2Error::Internal("normal form lost the point".into()));
    }
    Ok((b, c))
}

/// Outcome of the order-73 scan over 𝔽_{2⁶}.
pub struct Orbit73Report {
    /// The 24 parameters b with c = 1 and (0,0) of order 73.
    pub params: Vec<BinaryFieldElt>,
    /// Frobenius orbits of the parameters (four orbits of six).
    pub orbits: Vec<Vec<BinaryFieldElt>>,
    /// The permutation that ⟨10⟩ induces on the orbits.
    pub diamond_10: Vec<usize>,
    /// Point count of E_{b,1}(𝔽_{2⁶}) (the same for every parameter) and
    /// the Frobenius trace 2⁶ + 1 − #E derived from it.
    pub curve_order: u64,
    pub frobenius_trace: i64,
}

/// All b ∈ 𝔽_{2⁶} such that (0,0) has order 73 on E_{b,1}.
pub fn find_73_parameters(f: BinaryField) -> Vec<BinaryFieldElt> {
    assert_eq!(f.k, 6);
    let mut out = Vec::new();
    for b in f.elements() {
        if b == 0 {
            continue; // Δ = 0
        }
        let Ok(e) = Curve::tate(f, b, f.one()) else {
            continue;
        };
        if e.point_order(Pt::Affine(0, 0), 100) == Some(73) {
            out.push(b);
        }
    }
    out
}

/// Partition of a set of field elements into Frobenius orbits {a, a², a⁴, …}.
pub fn frobenius_orbits(f: BinaryField, set: &[BinaryFieldElt]) -> Vec<Vec<BinaryFieldElt>> {
    let mut remaining: Vec<BinaryFieldElt> = set.to_vec();
    let mut orbits = Vec::new();
    while let Some(&start) = remaining.first() {
        let mut orbit = vec![start];
        let mut x = f.frob(start);
        while x != start {
            orbit.push(x);
            x = f.frob(x);
        }
        remaining.retain(|e| !orbit.contains(e));
        orbits.push(orbit);
    }
    orbits
}

/// The ⟨n⟩ diamond action on a Tate parameter with c = 1: replace the
/// marked point by n·(0,0) and renormalize.
pub fn diamond_on_parameter(
    f: BinaryField,
    b: BinaryFieldElt,
    n: u64,
) -> Result<(BinaryFieldElt, BinaryFieldElt), Char2Error> {
    let e = Curve::tate(f, b, f.one())?;
    tate_normalize(&e, e.mul_pt(n, Pt::Affine(0, 0)))
}

/// Runs the full 𝔽_{2⁶} analysis: 24 parameters, 4 Frobenius orbits of 6,
/// and the induced ⟨10⟩ action on the orbits (a 4-cycle).
pub fn diamond_orbit_73(f: BinaryField) -> Result<Orbit73Report, Char2Error> {
    let params = find_73_parameters(f);
    if params.len() != 24 {
        return Err(Char2Error::Internal(format!(
            "expected 24 parameters, found {}",
            params.len()
        )));
    }
    let orbits = frobenius_orbits(f, &params);
    if orbits.len() != 4 || orbits.iter().any(|o| o.len() != 6) {
        return Err(Char2Error::Internal(
            "expected 4 Frobenius orbits of size 6".into(),
        ));
    }
    let orbit_of = |x: BinaryFieldElt| -> Option<usize> {
        orbits.iter().position(|o| o.contains(&x))
    };
    let mut diamond_10 = Vec::with_capacity(4);
    for o in &orbits {
        let mut images = Vec::new();
        for &b in o {
            let (b2, c2) = diamond_on_parameter(f, b, 10)?;
            if c2 != f.one() {
                return Err(Char2Error::Internal("diamond left the c = 1 family".into()));
            }
            let Some(idx) = orbit_of(b2) else {
                return Err(Char2Error::Internal("diamond image not a parameter".into()));
            };
            images.push(idx);
        }
        images.dedup();
        if images.len() != 1 {
            return Err(Char2Error::Internal(
                "diamond action not well defined on orbits".into(),
            ));
        }
        diamond_10.push(images[0]);
    }
    let curve_order = Curve::tate(f, params[0], f.one())?.group_order();
    for &b in &params {
        if Curve::tate(f, b, f.one())?.group_order() != curve_order {
            return Err(Char2Error::Internal("inconsistent curve orders".into()));
        }
    }
    Ok(Orbit73Report {
        params,
        orbits,
        diamond_10,
        curve_order,
        frobenius_trace: 64 + 1 - curve_order as i64,
    })
}

/// The degree-24 polynomial whose roots are the order-73 parameters, as
/// 𝔽₂ coefficient bitmasks of its four sextic factors:
/// b⁶+b+1, b⁶+b³+1, b⁶+b⁵+b²+b+1, b⁶+b⁵+b⁴+b+1.
pub const SEXTIC_FACTORS: [u64; 4] = [0b100_0011, 0b100_1001, 0b110_0111, 0b111_0011];
