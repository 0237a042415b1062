//! Rank criteria for excluding a prime p from the torsion range of degree-d
//! number fields: winding-ideal annihilators (t₁), the Eichler-Shimura
//! torsion killer (t₂), mod-2 independence checks on the homology
//! representation, and the certificate-producing exclusion pipeline.

mod annihilator;
mod checks;

pub use annihilator::{hecke_lattice, t1_candidates, winding_annihilator, Annihilator, HeckeLattice};
pub use checks::{
    kamienny_check_h, kamienny_check_h_fast, kamienny_check_x0, t2_element, RankEvidence,
};

use crate::exactalg::{is_prime, Rat, ZMat};
use crate::modsym0::Space;
use crate::modsymh::SpaceH;
use crate::pointcount;
use num::Zero;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CriterionError {
    Range(&'static str),
    /// No probe vector exhibited the full Hecke algebra; nothing emitted from
    /// such a level can be trusted, so this is an error, not a verdict.
    SpanNotCertified { p: u64, reached: usize, genus: usize },
    Space(String),
}

impl std::fmt::Display for CriterionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionError::Range(m) => write!(f, "{m}"),
            CriterionError::SpanNotCertified { p, reached, genus } => write!(
                f,
                "hecke span at level {p} only certified to rank {reached} of {genus}"
            ),
            CriterionError::Space(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CriterionError {}

/// Which modular curve the exclusion argument runs on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    X0,
    /// X_H = X₁(p)/H with the given diamond generators; empty = trivial H.
    XH { h_gens: Vec<u64> },
}

/// A curve level with its modular symbol space, seen uniformly: diamond
/// operators on X₀ are the identity and its single ∞-cusp has label 1.
pub enum Level {
    X0(Space),
    H(SpaceH),
}

impl Level {
    pub fn build(p: u64, model: &Model) -> Result<Level, CriterionError> {
        match model {
            Model::X0 => Space::build(p)
                .map(Level::X0)
                .map_err(|e| CriterionError::Space(format!("{e:?}"))),
            Model::XH { h_gens } => SpaceH::build(p, h_gens)
                .map(Level::H)
                .map_err(|e| CriterionError::Space(format!("{e:?}"))),
        }
    }

    pub fn p(&self) -> u64 {
        match self {
            Level::X0(s) => s.p(),
            Level::H(s) => s.p(),
        }
    }

    pub fn genus(&self) -> usize {
        match self {
            Level::X0(s) => s.genus(),
            Level::H(s) => s.genus(),
        }
    }

    pub fn cuspidal_rank(&self) -> usize {
        match self {
            Level::X0(s) => s.cuspidal_rank(),
            Level::H(s) => s.cuspidal_rank(),
        }
    }

    pub fn hecke(&self, n: u64) -> Result<ZMat, CriterionError> {
        match self {
            Level::X0(s) => s.hecke_cuspidal(n).map_err(|e| CriterionError::Space(format!("{e:?}"))),
            Level::H(s) => s.hecke_cuspidal(n).map_err(|e| CriterionError::Space(format!("{e:?}"))),
        }
    }

    pub fn diamond(&self, u: u64) -> Result<ZMat, CriterionError> {
        match self {
            Level::X0(_) => Ok(ZMat::identity(self.cuspidal_rank())),
            Level::H(s) => s.diamond_cuspidal(u).map_err(|e| CriterionError::Space(format!("{e:?}"))),
        }
    }

    /// ∞-cusp labels, which double as representatives of the diamond group.
    pub fn reps(&self) -> Vec<u64> {
        match self {
            Level::X0(_) => vec![1],
            Level::H(s) => s.infinity_cusps(),
        }
    }

    /// The winding element in cuspidal coordinates (row-vector convention).
    pub fn winding(&self) -> Result<Vec<Rat>, CriterionError> {
        let eng = match self {
            Level::X0(s) => s.engine(),
            Level::H(s) => s.engine(),
        };
        Ok(eng
            .winding()
            .map_err(|e| CriterionError::Space(format!("{e:?}")))?
            .e_cusp
            .clone())
    }
}

/// Search envelope for the exclusion pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcludeOptions {
    pub model: Model,
    /// Use the dependency-weight variant instead of enumerating cusp sums.
    pub fast: bool,
    pub t1_budget: usize,
    pub t2_primes: Vec<u64>,
}

impl Default for ExcludeOptions {
    fn default() -> Self {
        ExcludeOptions {
            model: Model::X0,
            fast: false,
            t1_budget: 40,
            t2_primes: vec![3, 5, 7, 11, 13, 17, 19],
        }
    }
}

/// Only two verdicts exist. There is deliberately no way to state that p
/// does admit torsion in degree d: a failed check proves nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Excluded,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCountEvidence {
    pub ok: bool,
    /// Per degree d' ≤ d: (d', no curve with a p-torsion point over 𝔽_{2^d'},
    /// non-rational cusps stay non-rational over 𝔽_{2^d'}).
    pub per_degree: Vec<(u64, bool, bool)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionEvidence {
    pub t1: String,
    pub t2: String,
    pub ranks: Vec<RankEvidence>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExclusionCertificate {
    pub format: String,
    pub p: u64,
    pub d: u64,
    pub model: Model,
    pub variant: String,
    pub hecke_bound: u64,
    pub t1_budget: usize,
    pub t2_primes: Vec<u64>,
    pub point_counts: PointCountEvidence,
    pub criterion: Option<CriterionEvidence>,
    pub criterion_ok: bool,
    pub verdict: Verdict,
    pub failing_condition: Option<String>,
    pub notes: Vec<String>,
}

const NOTE_ONE_SIDED: &str = "independence is tested through the homology representation mod 2, \
     which is sufficient but not necessary; a failed test is never evidence of torsion";
const NOTE_HEADLINE: &str = "exclusion covers the rank criteria and point counts only; \
     degree-bound statements additionally rest on rank-zero quotient inputs not computed here";

/// Runs the full exclusion argument for one (p, d) pair and returns a
/// self-contained certificate. The verdict is Excluded only when a valid
/// (t₁, t₂) pair passes the independence check and the point-count
/// preconditions hold for every degree up to d.
pub fn exclude_prime(
    p: u64,
    d: u64,
    opts: &ExcludeOptions,
) -> Result<ExclusionCertificate, CriterionError> {
    exclude_prime_hooked(p, d, opts, |_| {}, |_| {})
}

/// Like [`exclude_prime`], with callbacks around the expensive phase: `warm`
/// runs right after the modular symbol space is built (cache preload) and
/// `cool` after the search finishes (cache export). Neither runs when the
/// cheap preconditions already settle the verdict.
pub fn exclude_prime_hooked(
    p: u64,
    d: u64,
    opts: &ExcludeOptions,
    warm: impl FnOnce(&Level),
    cool: impl FnOnce(&Level),
) -> Result<ExclusionCertificate, CriterionError> {
    if !is_prime(p) {
        return Err(CriterionError::Range("p must be prime"));
    }
    if !(3..=7).contains(&d) {
        return Err(CriterionError::Range("d must be between 3 and 7"));
    }
    let variant = match (&opts.model, opts.fast) {
        (Model::X0, _) => "x0",
        (Model::XH { .. }, false) => "full",
        (Model::XH { .. }, true) => "fast",
    };
    let mut cert = ExclusionCertificate {
        format: "exclusion-certificate/1".into(),
        p,
        d,
        model: opts.model.clone(),
        variant: variant.into(),
        hecke_bound: 0,
        t1_budget: opts.t1_budget,
        t2_primes: opts.t2_primes.clone(),
        point_counts: PointCountEvidence { ok: false, per_degree: Vec::new() },
        criterion: None,
        criterion_ok: false,
        verdict: Verdict::Inconclusive,
        failing_condition: None,
        notes: vec![NOTE_ONE_SIDED.into(), NOTE_HEADLINE.into()],
    };

    if 2 * d >= p {
        cert.failing_condition = Some("level too small: need 2d < p".into());
        return Ok(cert);
    }

    // Point-count preconditions first; they are cheap and their failure makes
    // the expensive search pointless.
    let mut pc_ok = true;
    for dp in 1..=d {
        let empty = pointcount::waterhouse_empty(p, 2, dp)
            .map_err(|e| CriterionError::Space(format!("{e}")))?;
        let cusp = pointcount::cusp_field_condition(p, 2, dp);
        pc_ok &= empty && cusp;
        cert.point_counts.per_degree.push((dp, empty, cusp));
    }
    cert.point_counts.ok = pc_ok;
    if !pc_ok {
        cert.failing_condition = Some("point count precondition failed".into());
        return Ok(cert);
    }

    let level = Level::build(p, &opts.model)?;
    warm(&level);
    let result = run_criterion_search(&level, d, opts, &mut cert);
    cool(&level);
    result?;
    Ok(cert)
}

fn run_criterion_search(
    level: &Level,
    d: u64,
    opts: &ExcludeOptions,
    cert: &mut ExclusionCertificate,
) -> Result<(), CriterionError> {
    let e = level.winding()?;
    if e.iter().all(|x| x.is_zero()) {
        cert.failing_condition = Some("winding element is zero".into());
        return Ok(());
    }
    let lattice = hecke_lattice(level)?;
    cert.hecke_bound = lattice.gen_bound;
    let ann = winding_annihilator(level, &lattice, &e)?;
    let candidates = t1_candidates(&ann, opts.t1_budget);
    if candidates.is_empty() {
        cert.failing_condition = Some("no winding annihilator candidates".into());
        return Ok(());
    }

    for t1 in &candidates {
        for &q in &opts.t2_primes {
            if q == level.p() || q == 2 || !is_prime(q) {
                continue;
            }
            let t2 = t2_element(level, q)?;
            let t = t1.matrix.mul(&t2.matrix);
            let (ok, ranks) = match level {
                Level::X0(_) => {
                    let (ok, ev) = kamienny_check_x0(level, d, &t)?;
                    (ok, vec![ev])
                }
                Level::H(sph) => {
                    if opts.fast {
                        kamienny_check_h_fast(sph, level, d, &t)?
                    } else {
                        kamienny_check_h(sph, level, d, &t)?
                    }
                }
            };
            if ok {
                cert.criterion = Some(CriterionEvidence {
                    t1: t1.name.clone(),
                    t2: t2.name.clone(),
                    ranks,
                });
                cert.criterion_ok = true;
                cert.verdict = Verdict::Excluded;
                return Ok(());
            }
        }
    }
    cert.failing_condition = Some("no (t1, t2) pair passed the independence check".into());
    Ok(())
}

#[cfg(test)]
mod tests;
