use std::time::Instant;

use cml4::scalar::rat;
use cml4::verify::{
    check_invariance, check_invariance_full, check_piece, disjointness_a_s, proposition_report, stabilizer_report,
    RegionName, SymmetryVerdict,
};

fn route(rep: &cml4::verify::InvarianceReport, member: &str, branch: &str) -> String {
    rep.piece(member, branch).and_then(|p| p.target()).unwrap_or("-").to_string()
}

#[test]
fn a_routing_at_41() {
    let t = Instant::now();
    let rep = check_invariance(RegionName::A, &rat(41, 100)).unwrap();
    eprintln!("{:?}", rep.routing());
    assert!(rep.holds);
    assert!(rep.reduced);
    assert_eq!(rep.checked_members, ["P1", "P2"]);
    assert!(rep.reduction.iter().all(|r| r.stabilizes));
    let expected = [
        ("P1", "1b", "P2"),
        ("P1", "4a", "P1"),
        ("P2", "3a", "P2"),
        ("P2", "3b", "S3(P1)"),
        ("P2", "3c", "P1"),
        ("P2", "4a", "P2"),
        ("P2", "4b", "S4(P1)"),
        ("P2", "4c", "S3S4(P1)"),
    ];
    for (m, b, target) in expected {
        assert_eq!(route(&rep, m, b), target, "{m} ∩ {b}");
    }
    assert_eq!(rep.pieces.len(), expected.len());
    eprintln!("A at 41/100: {:?}", t.elapsed());
}

#[test]
fn a_fails_at_39_on_p1_4a() {
    let rep = check_invariance(RegionName::A, &rat(39, 100)).unwrap();
    assert!(!rep.holds);
    let v = rep.violations.iter().find(|v| v.member == "P1" && v.branch == "4a").expect("P1 ∩ 4a leaves A");
    assert_eq!(v.target.as_deref(), Some("P1"));
    // p + q ≥ 1 − p* with p* = 161/444 at 39/100.
    assert!(v.failed.iter().any(|f| f == "p+q >= 283/444"), "{:?}", v.failed);
    assert_eq!(rep.violations.len(), 1);
}

#[test]
fn s_routing_at_32_and_failure_at_28() {
    let rep = check_invariance(RegionName::S, &rat(32, 100)).unwrap();
    assert!(rep.holds);
    for (b, target) in [("1e", "S3S1(P0)"), ("4b", "S5(P0)"), ("5b", "S2(P0)"), ("8b", "S4S1(P0)")] {
        assert_eq!(route(&rep, "P0", b), target);
    }
    let bad = check_invariance(RegionName::S, &rat(28, 100)).unwrap();
    assert!(!bad.holds);
    assert!(!bad.torus_faithful);
}

#[test]
fn reduced_and_full_checks_agree() {
    for eps in [rat(41, 100), rat(39, 100)] {
        let r = check_invariance(RegionName::A, &eps).unwrap();
        let f = check_invariance_full(RegionName::A, &eps).unwrap();
        assert_eq!(r.holds, f.holds);
        assert_eq!(f.checked_members.len(), 6);
    }
}

#[test]
fn sub_threshold_routing_boundary() {
    for b in ["3a", "4a"] {
        assert!(check_piece(RegionName::A, "P2", b, RegionName::P2, &rat(36, 100)).unwrap().contained);
        assert!(!check_piece(RegionName::A, "P2", b, RegionName::P2, &rat(35, 100)).unwrap().contained);
    }
}

#[test]
fn propositions() {
    let t = Instant::now();
    let r1 = proposition_report(1, &rat(41, 100)).unwrap();
    assert!(r1.verdict, "{:?}", r1.checks);
    eprintln!("prop1 41/100: {:?}", t.elapsed());
    let r1b = proposition_report(1, &rat(39, 100)).unwrap();
    assert!(!r1b.verdict);
    assert!(r1b.profile_as_stated);
    assert!(!r1b.invariance.holds);
    let t = Instant::now();
    let r2 = proposition_report(2, &rat(32, 100)).unwrap();
    assert!(r2.verdict, "{:?}", r2.checks);
    assert!(r2.symmetry_profile.values().all(|v| *v == SymmetryVerdict::Equal));
    eprintln!("prop2 32/100: {:?}", t.elapsed());
    assert!(!proposition_report(2, &rat(28, 100)).unwrap().verdict);
}

#[test]
fn a_and_s_disjoint() {
    assert!(disjointness_a_s(&rat(41, 100)).unwrap());
    assert!(disjointness_a_s(&rat(45, 100)).unwrap());
}

#[test]
fn stabilizer_of_a() {
    let s = stabilizer_report(RegionName::A, &rat(41, 100)).unwrap();
    eprintln!("{:?}", s);
    assert_eq!(s.group_order, 48);
    assert_eq!(s.orbit_size, 6);
    assert_eq!(s.stabilizer_order, 8);
}
