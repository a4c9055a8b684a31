use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use cml4::dynamics::branch_table;
use cml4::explore::{self, FaceInvariance, ScanSummary};
use cml4::geometry::Region;
use cml4::lorenz::{at_least_critical, mixing_components, p_star, third_iterate_condition, LorenzMap};
use cml4::scalar::{format_scalar, int, to_f64, Scalar};
use cml4::symmetry::{check_equivariance, generator, generators, parse_word, SymmetryGroup};
use cml4::verify::{self, RegionName};

use crate::{Ctx, FacesArgs, Outcome, VerifyTarget};

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Verdicts always go to stdout as JSON; `--quiet` only drops the stderr line.
pub fn verify(ctx: &Ctx, target: VerifyTarget, eps: &Scalar, region: RegionName, full: bool) -> Result<Outcome> {
    let e = format_scalar(eps);
    match target {
        VerifyTarget::Prop1 | VerifyTarget::Prop2 => {
            let which = if matches!(target, VerifyTarget::Prop1) { 1 } else { 2 };
            let mut rep = verify::proposition_report(which, eps)?;
            if full {
                let name = if which == 1 { RegionName::A } else { RegionName::S };
                rep.invariance = verify::check_invariance_full(name, eps)?;
                rep.checks.insert("invariance".into(), rep.invariance.holds);
                rep.verdict = rep.checks.values().all(|&v| v);
            }
            print_json(&rep)?;
            let failed: Vec<&str> = rep.checks.iter().filter(|(_, v)| !**v).map(|(k, _)| k.as_str()).collect();
            ctx.note(format!(
                "prop{which} at eps = {e}: {}{}",
                if rep.verdict { "holds" } else { "fails" },
                if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
            ));
            for v in &rep.invariance.violations {
                ctx.note(format!(
                    "  {} ∩ {} (lift {:?}) leaves {}: {}",
                    v.member,
                    v.branch,
                    v.lift,
                    v.target.as_deref().unwrap_or("nothing"),
                    v.failed.join(", ")
                ));
            }
            if !rep.torus_faithful {
                ctx.note("  the tables are not torus-faithful at this eps; the verdict is advisory");
            }
            Ok(Outcome::from_bool(rep.verdict))
        }
        VerifyTarget::Disjoint => {
            let disjoint = verify::disjointness_a_s(eps)?;
            print_json(&json!({ "eps": e, "disjoint": disjoint }))?;
            ctx.note(format!("A and S at eps = {e}: {}", if disjoint { "disjoint" } else { "overlap" }));
            Ok(Outcome::from_bool(disjoint))
        }
        VerifyTarget::Stabilizer => {
            let rep = verify::stabilizer_report(region, eps)?;
            print_json(&rep)?;
            ctx.note(format!(
                "{region}: group order {}, orbit size {}, stabilizer order {}",
                rep.group_order, rep.orbit_size, rep.stabilizer_order
            ));
            Ok(Outcome::Pass)
        }
    }
}

pub fn critical_values(ctx: &Ctx, tol: f64) -> Result<Outcome> {
    let cv = verify::critical_values(tol);
    if ctx.json {
        print_json(&cv)?;
    } else {
        println!("{cv}");
    }
    Ok(Outcome::from_bool(cv.radical_agrees && cv.ordering_holds))
}

pub fn summary_line(s: &ScanSummary) -> String {
    format!(
        "eps {:.6}: {} orbits, tail in S {:.3}, tail in A family {:.3}, mean escape {}",
        s.eps,
        s.orbits,
        s.tail_in_s,
        s.tail_in_a_family,
        s.mean_escape_step.map_or("-".to_string(), |m| format!("{m:.1}"))
    )
}

pub fn summaries_csv(s: &[ScanSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in s {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct FaceOutput<'a> {
    face: String,
    eps: String,
    fixed_coordinate_preserved: bool,
    candidates: &'a [explore::FaceCandidate],
    #[serde(skip_serializing_if = "Option::is_none")]
    orbits: Option<&'a [explore::FaceOrbit]>,
    exact_checks: Vec<(String, FaceInvariance)>,
}

pub fn faces(ctx: &Ctx, a: FacesArgs) -> Result<Outcome> {
    let cfg = explore::SimulationConfig {
        eps: to_f64(&a.eps),
        steps: a.steps,
        burn_in: a.burn_in,
        orbit_count: a.orbits,
        rng_seed: a.seed,
        ..Default::default()
    };
    let rep = explore::face_dynamics(a.face, &cfg)?;
    let mut checks = Vec::new();
    if let Some(path) = &a.polygon {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let region = Region::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        if region.dim() != Some(2) {
            bail!("{} must hold a nonempty region of dimension 2", path.display());
        }
        checks.push((region.label.clone(), explore::face_polygon_invariance(a.face, &region, &a.eps)?));
    }
    if let Some(name) = a.section {
        let built = verify::build_region(name, &a.eps)?;
        let section = explore::restrict_region(&built.region, a.face)?;
        if section.members.is_empty() {
            bail!("{name} does not meet the face {} in a polygon", a.face);
        }
        checks.push((section.label.clone(), explore::face_polygon_invariance(a.face, &section, &a.eps)?));
    }
    let ok = rep.fixed_coordinate_preserved && checks.iter().all(|(_, c)| c.holds);
    if ctx.json {
        print_json(&FaceOutput {
            face: a.face.to_string(),
            eps: format_scalar(&a.eps),
            fixed_coordinate_preserved: rep.fixed_coordinate_preserved,
            candidates: &rep.candidates,
            orbits: a.orbits_detail.then_some(&rep.orbits[..]),
            exact_checks: checks,
        })?;
    } else {
        println!("face {} at eps = {}", a.face, format_scalar(&a.eps));
        println!("fixed coordinate preserved: {}", rep.fixed_coordinate_preserved);
        println!("{} tail hull(s):", rep.candidates.len());
        for c in &rep.candidates {
            println!(
                "  area {:.5}  centroid ({:.4}, {:.4})  {} vertices  orbits {:?}",
                c.area,
                c.centroid[0],
                c.centroid[1],
                c.hull.len(),
                c.orbit_ids
            );
        }
        for (label, c) in &checks {
            let bad = c.pieces.iter().filter(|p| !p.containment.is_contained()).count();
            println!("{label}: invariant {} ({} pieces, {bad} escaping)", c.holds, c.pieces.len());
        }
    }
    Ok(Outcome::from_bool(ok))
}

#[derive(Serialize)]
struct DomainRow {
    label: &'static str,
    cube: u8,
    inequalities: Vec<String>,
    offset: [i64; 3],
    volume: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    image: Option<Vec<String>>,
}

pub fn domain_table(ctx: &Ctx, eps: Option<&Scalar>) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut total = int(0);
    for b in branch_table().branches() {
        let v = b.domain.volume()?;
        total += &v;
        rows.push(DomainRow {
            label: b.label,
            cube: b.cube,
            inequalities: b.inequalities.iter().map(|q| q.to_string()).collect(),
            offset: b.offset,
            volume: format_scalar(&v),
            image: eps.map(|e| b.image(e).halfspaces().iter().map(|h| h.to_string()).collect()),
        });
    }
    let ok = total == int(1);
    if ctx.json {
        print_json(&json!({ "branches": rows, "total_volume": format_scalar(&total) }))?;
    } else {
        for r in &rows {
            println!("{:>3}  cube {}  c = {:?}  vol {:>8}  {}", r.label, r.cube, r.offset, r.volume, r.inequalities.join(", "));
            if let Some(img) = &r.image {
                println!("       image: {}", img.join(", "));
            }
        }
        println!("total volume {}", format_scalar(&total));
    }
    Ok(Outcome::from_bool(ok))
}

pub fn symmetry_table(ctx: &Ctx, eps: &Scalar, samples: usize, seed: u64) -> Result<Outcome> {
    let group = SymmetryGroup::full();
    let gens = generators();
    let word_is = |w: &str, i: usize| parse_word(w).is_some_and(|s| s == generator(i));
    let relations = vec![
        ("S4 = S2S1S2".to_string(), word_is("S2S1S2", 4)),
        ("S5 = S3S1S3".to_string(), word_is("S3S1S3", 5)),
        ("S6 = S3S2S3".to_string(), word_is("S3S2S3", 6)),
        ("S0 central".to_string(), gens.iter().all(|s| gens[0].compose(s) == s.compose(&gens[0]))),
        ("generators are involutions".to_string(), gens.iter().all(|s| s.compose(s).is_identity())),
    ];
    let equivariance: Vec<_> =
        gens.iter().enumerate().map(|(i, s)| check_equivariance(s, eps, samples, seed + i as u64)).collect();
    let ok = relations.iter().all(|(_, v)| *v) && equivariance.iter().all(|r| r.holds());
    if ctx.json {
        print_json(&json!({
            "generators": gens,
            "group_order": group.order(),
            "relations": relations.iter().map(|(k, v)| json!({ "relation": k, "holds": v })).collect::<Vec<_>>(),
            "eps": format_scalar(eps),
            "equivariance": equivariance,
        }))?;
    } else {
        for s in &gens {
            println!("{}: {:?} + {:?}", s.name, s.matrix, s.translation);
        }
        println!("group order {}", group.order());
        for (k, v) in &relations {
            println!("{k}: {v}");
        }
        for r in &equivariance {
            println!(
                "{} commutes with the map at eps = {}: {} passed, {} failed, {} singular",
                r.symmetry,
                format_scalar(eps),
                r.passed,
                r.failed,
                r.skipped
            );
        }
    }
    Ok(Outcome::from_bool(ok))
}

pub fn lorenz(ctx: &Ctx, eps: &Scalar, from: Option<&Scalar>, n: usize) -> Result<Outcome> {
    if !(*eps > int(0) && *eps < Scalar::new(1.into(), 2.into())) {
        bail!("eps must lie in (0, 1/2)");
    }
    let l = LorenzMap::new(eps.clone());
    let ps = p_star(eps);
    let lp = l.eval(&ps)?;
    let period_two = lp == int(1) - &ps;
    let comps = mixing_components(eps).ok();
    let cycle = comps.as_ref().map(|c| c.cycle_holds(&l)).transpose()?;
    let third = third_iterate_condition(eps)?;
    let above: Vec<bool> = (1..=4).map(|k| at_least_critical(eps, k)).collect();
    let orbit = match from {
        Some(v) => Some((0..=n).map(|k| l.iterate(v, k).map(|x| format_scalar(&x))).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    if ctx.json {
        print_json(&json!({
            "eps": format_scalar(eps),
            "domain": [format_scalar(&l.domain().lo), format_scalar(&l.domain().hi)],
            "p_star": format_scalar(&ps),
            "L_p_star": format_scalar(&lp),
            "period_two": period_two,
            "mixing_components": comps,
            "cycle_holds": cycle,
            "third_iterate_condition": third,
            "at_least_eps_n": above,
            "orbit": orbit,
        }))?;
    } else {
        let d = l.domain();
        println!("domain [{}, {}]", format_scalar(&d.lo), format_scalar(&d.hi));
        println!("p* = {}  L(p*) = {}  period two: {period_two}", format_scalar(&ps), format_scalar(&lp));
        match &comps {
            Some(c) => {
                let show = |v: &[cml4::lorenz::Interval]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ∪ ");
                println!("C1 = {}", show(&c.c1));
                println!("C2 = {}", show(&c.c2));
                println!("cycle L(C1) ⊆ C2, L(C2) ⊆ C1: {}", cycle.unwrap_or(false));
            }
            None => println!("eps outside [eps_1, eps_2): no two-component decomposition"),
        }
        println!("L³(1−ε/2) ≤ L(1−ε/2): {third}");
        for (k, a) in above.iter().enumerate() {
            println!("eps ≥ eps_{}: {a}", k + 1);
        }
        if let Some(o) = &orbit {
            for (k, x) in o.iter().enumerate() {
                println!("L^{k} = {x}");
            }
        }
    }
    Ok(Outcome::from_bool(period_two && cycle.unwrap_or(true)))
}
