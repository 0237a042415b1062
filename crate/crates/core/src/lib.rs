//! Exact-arithmetic machinery for certifying upper bounds on the prime
//! torsion of elliptic curves over number fields of small degree d.
//!
//! The library is organised bottom-up:
//!
//! * [`exactalg`] — arbitrary-precision linear algebra over ℤ, ℚ, 𝔽_ℓ and
//!   𝔽_{2^k}: fraction-free elimination, Hermite normal form, saturated
//!   kernels, characteristic polynomials, bit-packed 𝔽₂ matrices.
//! * [`modsym0`] / [`modsymh`] — Manin-symbol presentations of the relative
//!   homology of X₀(p) and of X_H = X₁(p)/H, with Hecke and diamond
//!   operators, boundary maps, the intersection pairing and the winding
//!   element.
//! * [`closedform`] — the elementary closed forms for intersection numbers
//!   I_r e • λ(k) and I′_r e • {0, a/c}, the ε/R-matrix rank tables over 𝔽₃,
//!   and the exact asymptotic inequality gate.
//! * [`pointcount`] — emptiness tests for Y₁(p)(𝔽_{ℓ^d}) by elementary
//!   arithmetic on Frobenius traces, plus cusp-rationality conditions.
//! * [`char2`] — elliptic curves over 𝔽_{2^k} in general Weierstrass form,
//!   Tate normal form, and the order-73 analysis over 𝔽_{2⁶}.
//! * [`criterion`] — winding-ideal annihilators t₁, torsion killers t₂, and
//!   the formal-immersion rank checks assembled into exclusion certificates.
//!
//! No floating point is used anywhere: every comparison involving square
//! roots is done by comparing squares of integers.

pub mod exactalg;
pub mod modsym0;
pub mod modsymh;
pub mod closedform;
pub mod pointcount;
pub mod char2;
pub mod criterion;
pub mod cache;

mod modsym;

pub use exactalg::{Int, Rat};
