use super::*;
use crate::exactalg::{Int, ZMat};
use crate::modsymh::full_group_gens;
use num::Zero;

fn x0(p: u64) -> Level {
    Level::build(p, &Model::X0).unwrap()
}

fn xh(p: u64, gens: &[u64]) -> Level {
    Level::build(p, &Model::XH { h_gens: gens.to_vec() }).unwrap()
}

#[test]
fn t2_contract() {
    let lv = x0(11);
    let t2 = t2_element(&lv, 3).unwrap();
    let expect = lv.hecke(3).unwrap().sub(&ZMat::identity(2).scale(&Int::from(4)));
    assert_eq!(t2.matrix, expect);
    assert!(t2_element(&lv, 2).is_err());
    assert!(t2_element(&lv, 11).is_err());
    assert!(t2_element(&lv, 9).is_err());

    let lh = xh(17, &[]);
    let t2 = t2_element(&lh, 3).unwrap();
    let n = lh.cuspidal_rank();
    let expect = lh
        .hecke(3)
        .unwrap()
        .sub(&lh.diamond(3).unwrap())
        .sub(&ZMat::identity(n).scale(&Int::from(3)));
    assert_eq!(t2.matrix, expect);
}

#[test]
fn annihilator_degenerate_level() {
    // X₀(11): one-dimensional Hecke algebra, nonzero winding element, so
    // nothing annihilates e and the annihilator of that is everything.
    let lv = x0(11);
    let lat = hecke_lattice(&lv).unwrap();
    assert_eq!(lat.basis.len(), 1);
    assert_eq!(lat.basis[0].name, "T1");
    assert_eq!(lat.basis[0].matrix, ZMat::identity(2));
    let e = lv.winding().unwrap();
    assert!(e.iter().any(|x| !x.is_zero()));
    let ann = winding_annihilator(&lv, &lat, &e).unwrap();
    assert!(ann.ae_basis.is_empty());
    assert_eq!(ann.ann_basis.len(), 1);
    let cands = t1_candidates(&ann, 40);
    assert_eq!(cands[0].matrix, ZMat::identity(2));
}

#[test]
fn annihilator_split_level() {
    // X₀(37): the algebra splits in two one-dimensional pieces, the winding
    // element lives on exactly one of them.
    let lv = x0(37);
    let lat = hecke_lattice(&lv).unwrap();
    assert_eq!(lat.basis.len(), lv.genus());
    let e = lv.winding().unwrap();
    let ann = winding_annihilator(&lv, &lat, &e).unwrap();
    assert_eq!(ann.ae_basis.len(), 1);
    assert_eq!(ann.ann_basis.len(), 1);
    // Double-annihilator containment, exact products both ways.
    for t in &ann.ann_basis {
        for s in &ann.ae_basis {
            assert!(t.matrix.mul(&s.matrix).is_zero());
            assert!(s.matrix.mul(&t.matrix).is_zero());
        }
    }
    // Candidates annihilate A_e and never include zero.
    for c in t1_candidates(&ann, 40) {
        assert!(!c.matrix.is_zero());
        for s in &ann.ae_basis {
            assert!(c.matrix.mul(&s.matrix).is_zero(), "candidate {}", c.name);
        }
    }
}

#[test]
fn full_subgroup_matches_x0() {
    // With H the full unit group X_H is X₀(p); the cusp-sum checker sees a
    // single sum d·∞ and must agree with the X₀ checker.
    let p = 23;
    let lv = x0(p);
    let lh = xh(p, &full_group_gens(p));
    let Level::H(sph) = &lh else { unreachable!() };
    for d in 1..=3u64 {
        for q in [3u64, 5, 7] {
            let t0 = t2_element(&lv, q).unwrap();
            let th = t2_element(&lh, q).unwrap();
            let (a, _) = kamienny_check_x0(&lv, d, &t0.matrix).unwrap();
            let (b, _) = kamienny_check_h(sph, &lh, d, &th.matrix).unwrap();
            assert_eq!(a, b, "d={d} q={q}");
        }
    }
}

#[test]
fn fast_implies_full_small() {
    for p in [11u64, 17, 19] {
        for gens in [vec![], full_group_gens(p)] {
            let lh = xh(p, &gens);
            let Level::H(sph) = &lh else { unreachable!() };
            for d in 1..=3u64 {
                if 2 * d >= p {
                    continue;
                }
                for q in [3u64, 5] {
                    let t2 = t2_element(&lh, q).unwrap();
                    for t in [t2.matrix.clone(), lh.hecke(2).unwrap().mul(&t2.matrix)] {
                        let (fast, _) = kamienny_check_h_fast(sph, &lh, d, &t).unwrap();
                        if fast {
                            let (full, _) = kamienny_check_h(sph, &lh, d, &t).unwrap();
                            assert!(full, "p={p} d={d} q={q} gens={gens:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn exclusion_verdicts() {
    let opts = ExcludeOptions::default();
    // 13 lies in the degree-3 torsion range; the point counts refuse it.
    let c = exclude_prime(13, 3, &opts).unwrap();
    assert_eq!(c.verdict, Verdict::Inconclusive);
    assert!(c.failing_condition.unwrap().contains("point count"));
    // 7 already fails at degree 1 (the cusp field condition: 7 | 2³ − 1).
    let c = exclude_prime(7, 3, &opts).unwrap();
    assert_eq!(c.verdict, Verdict::Inconclusive);
    // 73 at degree 6 is the supersingular exception.
    let c = exclude_prime(73, 6, &opts).unwrap();
    assert_eq!(c.verdict, Verdict::Inconclusive);
    assert!(!c.point_counts.ok);
    // Invalid inputs are errors, not verdicts.
    assert!(exclude_prime(9, 3, &opts).is_err());
    assert!(exclude_prime(11, 8, &opts).is_err());
}

#[test]
fn exclusion_x0_degree7() {
    let opts = ExcludeOptions::default();
    let c = exclude_prime(197, 7, &opts).unwrap();
    assert_eq!(c.verdict, Verdict::Excluded);
    assert!(c.point_counts.ok && c.criterion_ok);
    let ev = c.criterion.as_ref().unwrap();
    assert_eq!(ev.ranks[0].rank, 7);
    // Determinism: replaying produces a byte-identical certificate.
    let again = exclude_prime(197, 7, &opts).unwrap();
    assert_eq!(
        serde_json::to_string(&c).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    // Round trip.
    let back: ExclusionCertificate =
        serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back.verdict, Verdict::Excluded);
    assert_eq!(back.p, 197);
}

#[test]
fn exclusion_xmu_degree3() {
    // Degree 3 on X_H with trivial H: 19 is past the degree-3 torsion range
    // and the fast checker should find a passing pair.
    let opts = ExcludeOptions {
        model: Model::XH { h_gens: vec![] },
        fast: true,
        ..ExcludeOptions::default()
    };
    let c = exclude_prime(19, 3, &opts).unwrap();
    assert_eq!(c.verdict, Verdict::Excluded, "{:?}", c.failing_condition);
}
