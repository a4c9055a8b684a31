//! Acceptance criteria 1–9: one PASS/FAIL line each, with the measured time
//! against its budget. Exits non-zero when any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use cml4::dynamics::{branch_table, g3_step_formula};
use cml4::explore::{simulate, SimulationConfig, StartMode};
use cml4::geometry::{regions_disjoint, DEFAULT_SHIFT_RANGE};
use cml4::lorenz::{mixing_components, p_star, third_iterate_condition, Interval, LorenzMap};
use cml4::scalar::{int, parse_scalar, rat, Scalar};
use cml4::symmetry::{check_equivariance, generator, generators, parse_word, SymmetryGroup};
use cml4::verify::{
    build_region, check_piece, critical_values, disjointness_a_s, stabilizer_report, RegionName, RADICAL_TOL,
};

/// Agreement of the closed-form constants with independent double formulas.
const CONSTANT_TOL: f64 = 1e-9;
/// Number of random rational couplings for the Lorenz period-two check.
const LORENZ_SAMPLES: usize = 20;
/// Random points per generator and coupling value for equivariance.
const EQUIVARIANCE_SAMPLES: usize = 10_000;
const SIM_ORBITS: usize = 100;
const SIM_BURN_IN: u64 = 10_000;
const SIM_TAIL: u64 = 100_000;
const SIM_SEED: u64 = 42;
/// Required fraction of random orbits with tails inside 𝒮 at 0.32; 0.25 must fall below it.
const S_TAIL_FRACTION: f64 = 0.99;

struct Verdict {
    ok: bool,
    detail: String,
}

fn check(cond: bool, failures: &mut Vec<String>, what: impl Into<String>) {
    if !cond {
        failures.push(what.into());
    }
}

fn verdict(failures: Vec<String>, detail: String) -> Verdict {
    if failures.is_empty() {
        Verdict { ok: true, detail }
    } else {
        Verdict { ok: false, detail: format!("{detail}; failed: {}", failures.join("; ")) }
    }
}

fn cml4(args: &[&str]) -> (Option<i32>, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_cml4")).args(args).output().expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), v)
}

fn labels(v: &Value) -> Vec<String> {
    v.as_array().map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect()).unwrap_or_default()
}

fn route(rep: &Value, member: &str, branch: &str) -> String {
    rep["invariance"]["pieces"]
        .as_array()
        .into_iter()
        .flatten()
        .find(|p| p["member"] == member && p["branch"] == branch)
        .and_then(|p| p["containment"]["member"].as_str())
        .unwrap_or("-")
        .to_string()
}

fn point(v: &Value) -> Option<[Scalar; 3]> {
    let xs: Vec<Scalar> = labels(v).iter().filter_map(|s| parse_scalar(s).ok()).collect();
    xs.try_into().ok()
}

fn criterion_1() -> Verdict {
    let mut f = Vec::new();
    let (code, rep) = cml4(&["verify", "prop1", "--eps", "41/100", "--quiet"]);
    check(code == Some(0) && rep["verdict"] == true, &mut f, "prop1 at 41/100 not exit 0 / true");
    check(labels(&rep["intersection_pattern"]["P1"]) == ["1b", "4a"], &mut f, "P1 pattern");
    check(labels(&rep["intersection_pattern"]["P2"]) == ["3a", "3b", "3c", "4a", "4b", "4c"], &mut f, "P2 pattern");
    let routing = [
        ("P1", "1b", "P2"),
        ("P1", "4a", "P1"),
        ("P2", "3a", "P2"),
        ("P2", "3b", "S3(P1)"),
        ("P2", "3c", "P1"),
        ("P2", "4a", "P2"),
        ("P2", "4b", "S4(P1)"),
        ("P2", "4c", "S3S4(P1)"),
    ];
    for (m, b, t) in routing {
        check(route(&rep, m, b) == t, &mut f, format!("{m} ∩ {b} should land in {t}"));
    }
    check(rep["invariance"]["pieces"].as_array().map(Vec::len) == Some(routing.len()), &mut f, "piece count");
    for i in 0..7 {
        let want = if i == 3 || i == 4 { "equal" } else { "disjoint" };
        check(rep["symmetry_profile"][format!("S{i}")] == want, &mut f, format!("S{i} profile"));
    }
    let certs = rep["certificates"].as_array().cloned().unwrap_or_default();
    check(certs.len() == 6 && certs.iter().all(|c| c["holds"] == true), &mut f, "separating planes");

    let eps = rat(39, 100);
    let (code, bad) = cml4(&["verify", "prop1", "--eps", "39/100", "--quiet"]);
    check(code == Some(1) && bad["checks"]["invariance"] == false, &mut f, "prop1 at 39/100 not exit 1");
    check(bad["checks"]["symmetry_profile"] == true, &mut f, "profile at 39/100");
    let mut witnessed = false;
    if let Some(v) = bad["invariance"]["violations"].as_array().and_then(|a| a.first()) {
        let a = build_region(RegionName::A, &eps).expect("A builds");
        if let (Some(w), Some(pre), Some(b)) =
            (point(&v["witness"]), point(&v["preimage"]), v["branch"].as_str().and_then(|b| branch_table().get(b)))
        {
            let r = DEFAULT_SHIFT_RANGE;
            let inside = a.region.members.iter().any(|m| {
                (-r..=r).any(|i| {
                    (-r..=r).any(|j| {
                        (-r..=r).any(|k| {
                            let y: Vec<Scalar> = [i, j, k].iter().zip(&w).map(|(s, x)| x - int(*s)).collect();
                            m.polyhedron.contains(&y)
                        })
                    })
                })
            });
            let lift: Vec<i64> = v["lift"].as_array().into_iter().flatten().filter_map(Value::as_i64).collect();
            let local: Vec<Scalar> = pre.iter().zip(&lift).map(|(x, s)| x - int(*s)).collect();
            let member = a.region.member(v["member"].as_str().unwrap_or("")).map(|m| m.polyhedron.contains(&pre));
            witnessed = !inside
                && b.domain.contains(&local)
                && member == Some(true)
                && b.apply(&pre, &eps).iter().zip(&w).all(|(x, y)| x == y);
        }
    }
    check(witnessed, &mut f, "exact witness at 39/100");
    verdict(f, "prop1 holds at 41/100, fails at 39/100 with an exact witness; zero tolerance".into())
}

fn criterion_2() -> Verdict {
    let mut f = Vec::new();
    let cv = critical_values(1e-12);
    let b = &cv.eps_star;
    check(b.lo >= rat(397, 1000) && b.hi <= rat(398, 1000), &mut f, "bracket outside [0.397, 0.398]");
    check((cv.radical_corrected - b.value).abs() <= RADICAL_TOL, &mut f, "radical vs bisection");
    let s17 = 17f64.sqrt();
    check((cv.eps_star2.value - (5.0 - s17) / 2.0).abs() <= CONSTANT_TOL, &mut f, "eps**");
    check(cv.eps_star2.decimal.starts_with("0.43844"), &mut f, "eps** digits");
    check((cv.eps_b.value - (7.0 - s17) / 8.0).abs() <= CONSTANT_TOL, &mut f, "eps_B");
    check(cv.eps_b.decimal.starts_with("0.35961"), &mut f, "eps_B digits");
    check((cv.eps_n[0].value - (1.0 - 2f64.sqrt() / 2.0)).abs() <= CONSTANT_TOL, &mut f, "eps_1");
    check(cv.eps_n[0].decimal.starts_with("0.29289"), &mut f, "eps_1 digits");
    check(cv.ordering_holds, &mut f, "ordering");
    verdict(
        f,
        format!(
            "eps* ~ {:.10}, radical within {RADICAL_TOL:e} (cube-root argument 2/(43-3√177); \
             1/(43-3√177) instead gives {:.4}); constants within {CONSTANT_TOL:e}",
            b.value, cv.radical_uncorrected
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut f = Vec::new();
    for b in ["3a", "4a"] {
        for (eps, want) in [(rat(36, 100), true), (rat(35, 100), false)] {
            match check_piece(RegionName::A, "P2", b, RegionName::P2, &eps) {
                Ok(p) => check(p.contained == want, &mut f, format!("P2 ∩ {b} at {eps}")),
                Err(e) => f.push(format!("P2 ∩ {b} at {eps}: {e}")),
            }
        }
    }
    verdict(f, "G(P2∩3a), G(P2∩4a) ⊆ P2 at 36/100, not at 35/100; exact".into())
}

fn criterion_4() -> Verdict {
    let mut f = Vec::new();
    let (code, rep) = cml4(&["verify", "prop2", "--eps", "32/100", "--quiet"]);
    check(code == Some(0) && rep["verdict"] == true, &mut f, "prop2 at 32/100 not exit 0 / true");
    check(labels(&rep["intersection_pattern"]["P0"]) == ["1e", "4b", "5b", "8b"], &mut f, "P0 pattern");
    for (b, t) in [("1e", "S3S1(P0)"), ("4b", "S5(P0)"), ("5b", "S2(P0)"), ("8b", "S4S1(P0)")] {
        check(route(&rep, "P0", b) == t, &mut f, format!("P0 ∩ {b} should land in {t}"));
    }
    for i in 0..7 {
        check(rep["symmetry_profile"][format!("S{i}")] == "equal", &mut f, format!("S{i} profile"));
    }
    let (code, bad) = cml4(&["verify", "prop2", "--eps", "28/100", "--quiet"]);
    check(code == Some(1) && bad["checks"]["invariance"] == false, &mut f, "prop2 at 28/100 not exit 1");
    verdict(f, "prop2 holds at 32/100, fails at 28/100; exact".into())
}

fn criterion_5() -> Verdict {
    let mut f = Vec::new();
    for eps in [rat(41, 100), rat(45, 100)] {
        check(disjointness_a_s(&eps).unwrap_or(false), &mut f, format!("A, S overlap at {eps}"));
    }
    let a = build_region(RegionName::A, &rat(41, 100)).expect("A builds").region;
    check(!regions_disjoint(&a, &a, DEFAULT_SHIFT_RANGE).unwrap_or(true), &mut f, "A vs A");
    verdict(f, "A ∩ S has measure zero at 41/100 and 45/100; exact".into())
}

fn criterion_6() -> Verdict {
    let mut f = Vec::new();
    let group = SymmetryGroup::full();
    check(group.order() == 48, &mut f, format!("group order {}", group.order()));
    for (w, i) in [("S2S1S2", 4), ("S3S1S3", 5), ("S3S2S3", 6)] {
        check(parse_word(w).is_some_and(|s| s == generator(i)), &mut f, format!("S{i} = {w}"));
    }
    let gens = generators();
    check(gens.iter().all(|s| gens[0].compose(s) == s.compose(&gens[0])), &mut f, "S0 central");
    check(gens.iter().all(|s| s.compose(s).is_identity()), &mut f, "involutions");
    match stabilizer_report(RegionName::A, &rat(41, 100)) {
        Ok(r) => {
            check(r.orbit_size == 6, &mut f, format!("orbit size {}", r.orbit_size));
            check(r.stabilizer_order == 8, &mut f, format!("stabilizer order {}", r.stabilizer_order));
        }
        Err(e) => f.push(e.to_string()),
    }
    verdict(f, "|group| = 48, relations hold, 6 images of A, stabilizer of order 8; exact".into())
}

fn criterion_7() -> Verdict {
    let mut f = Vec::new();
    let table = branch_table();
    let mut compared = 0;
    for (k, eps) in [rat(1, 10), rat(41, 100)].into_iter().enumerate() {
        for (i, s) in generators().iter().enumerate() {
            let r = check_equivariance(s, &eps, EQUIVARIANCE_SAMPLES, (100 * k + i) as u64);
            check(r.failed == 0 && r.passed + r.skipped == EQUIVARIANCE_SAMPLES, &mut f, format!("{} at {eps}", r.symmetry));
            check(r.skipped * 100 < EQUIVARIANCE_SAMPLES, &mut f, format!("{} skipped {}", r.symmetry, r.skipped));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7 + k as u64);
        for _ in 0..EQUIVARIANCE_SAMPLES {
            let x: [Scalar; 3] = std::array::from_fn(|_| rat(rng.gen_range(1..1009), 1009));
            if let Ok(y) = table.g3_step_table(&x, &eps) {
                check(y == g3_step_formula(&x, &eps), &mut f, format!("two paths differ at {x:?}"));
                compared += 1;
            }
        }
    }
    let total = table.branches().iter().try_fold(int(0), |acc, b| b.domain.volume().map(|v| acc + v));
    check(total.as_ref().ok() == Some(&int(1)), &mut f, "domain volumes");
    verdict(
        f,
        format!("S∘G = G∘S on {EQUIVARIANCE_SAMPLES} points per generator and eps; formula = table on {compared}; volumes sum to 1"),
    )
}

fn criterion_8() -> Verdict {
    let mut f = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..LORENZ_SAMPLES {
        let eps = rat(rng.gen_range(1..500), 1000);
        let ps = p_star(&eps);
        check(LorenzMap::new(eps.clone()).eval(&ps).ok() == Some(int(1) - &ps), &mut f, format!("L(p*) at {eps}"));
    }
    let eps = rat(2, 5);
    let iv = |a: Scalar, b: Scalar| Interval::new(a, b);
    match mixing_components(&eps) {
        Ok(c) => {
            check(
                c.c1 == [iv(rat(1, 5), rat(272, 1000)), iv(rat(728, 1000), rat(4, 5))]
                    && c.c2 == [iv(rat(44, 100), rat(56, 100))],
                &mut f,
                "component endpoints",
            );
            check(c.cycle_holds(&LorenzMap::new(eps)).unwrap_or(false), &mut f, "cycle");
        }
        Err(e) => f.push(e.to_string()),
    }
    check(third_iterate_condition(&rat(32, 100)) == Ok(true), &mut f, "L³ condition at 32/100");
    check(third_iterate_condition(&rat(28, 100)) == Ok(false), &mut f, "L³ condition at 28/100");
    verdict(f, format!("L(p*) = 1-p* at {LORENZ_SAMPLES} couplings; components and cycle at 2/5; L³ test at 32/100, 28/100"))
}

fn criterion_9() -> Verdict {
    let mut f = Vec::new();
    let cfg = |eps| SimulationConfig {
        eps,
        steps: SIM_BURN_IN + SIM_TAIL,
        burn_in: SIM_BURN_IN,
        orbit_count: SIM_ORBITS,
        rng_seed: SIM_SEED,
        ..Default::default()
    };
    let frac = |eps: f64, start: StartMode, pick: fn(&cml4::explore::OccupancyRecord) -> bool| {
        simulate(&cfg(eps), &start).map(|r| r.iter().filter(|x| pick(x)).count() as f64 / r.len() as f64)
    };
    let a = frac(0.41, StartMode::Inside(RegionName::A), |r| r.frac_a == 1.0);
    let s32 = frac(0.32, StartMode::Uniform, |r| r.tail_in_s());
    let s25 = frac(0.25, StartMode::Uniform, |r| r.tail_in_s());
    match (&a, &s32, &s25) {
        (Ok(a), Ok(s32), Ok(s25)) => {
            check(*a == 1.0, &mut f, format!("A occupancy {a}"));
            check(*s32 >= S_TAIL_FRACTION, &mut f, format!("tail in S at 0.32: {s32}"));
            check(*s25 < S_TAIL_FRACTION, &mut f, format!("tail in S at 0.25: {s25}"));
        }
        _ => f.push(format!("simulation error: {a:?} {s32:?} {s25:?}")),
    }
    let show = |r: &Result<f64, _>| r.as_ref().map_or("err".to_string(), |v| format!("{v:.2}"));
    verdict(
        f,
        format!(
            "{SIM_ORBITS} orbits, seed {SIM_SEED}, burn-in {SIM_BURN_IN}, tail {SIM_TAIL}: A occupancy {} at 0.41, \
             tail in S {} at 0.32 (>= {S_TAIL_FRACTION}), {} at 0.25 (< {S_TAIL_FRACTION})",
            show(&a),
            show(&s32),
            show(&s25)
        ),
    )
}

type Criterion = fn() -> Verdict;

fn main() {
    let criteria: [(u32, Criterion, u64); 9] = [
        (1, criterion_1, 20),
        (2, criterion_2, 1),
        (3, criterion_3, 5),
        (4, criterion_4, 20),
        (5, criterion_5, 5),
        (6, criterion_6, 10),
        (7, criterion_7, 30),
        (8, criterion_8, 5),
        (9, criterion_9, 120),
    ];
    let mut failed = 0;
    for (n, run, budget) in criteria {
        let t = Instant::now();
        let v = run();
        let took = t.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let ok = v.ok && in_time;
        failed += (!ok) as usize;
        println!(
            "criterion {n}: {} ({:.2}s of {budget}s{}) {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
