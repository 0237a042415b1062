//! Shared Manin-symbol engine.
//!
//! A symbol is a pair (c, d) ∈ (ℤ/pℤ)² \ {(0,0)} taken modulo a
//! normalization (projective for the Γ₀ model, modulo the scalar action of
//! ±H for the Γ_H model). The free ℚ-vector space on the symbols modulo the
//! two relations
//!
//!   x + xS = 0,          S = [[0,-1],[1,0]]   (right action on (c,d))
//!   x + xT + xT² = 0,    T = [[0,-1],[1,-1]]
//!
//! is the relative homology of the modular curve (homology relative to the
//! cusps). The symbol (c:d) corresponds to the geodesic path γ{0,∞} for any
//! γ ∈ SL₂(ℤ) with bottom row ≡ (c,d); its boundary is [γ∞] − [γ0], and the
//! cuspidal subspace (the kernel of the boundary map) is H₁ of the curve,
//! of rank 2·genus.
//!
//! The engine computes, exactly over ℚ with an integral-lattice refinement:
//! the quotient presentation, the boundary map, an integral basis of the
//! cuspidal lattice (saturated kernel of the boundary inside the ℤ-span of
//! the symbol images), Hecke operators T_n via a fixed deterministic family
//! of determinant-n integer matrices, diamond operators, and the winding
//! element.

pub(crate) mod engine;
pub(crate) mod merel;
pub(crate) mod relmat;

pub(crate) use engine::{Canon, Engine};
pub(crate) use relmat::RelMat;
