use cml4::dynamics::{branch_table, full_step, g3_step_formula, reduce_coordinates, LinearForm};
use cml4::scalar::{rat, to_f64, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rational(rng: &mut ChaCha8Rng, den: i64) -> Scalar {
    rat(rng.gen_range(0..den), den)
}

fn torus_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let d = (a[i] - b[i]).abs();
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}

fn near_singular(x: &[f64; 3], margin: f64) -> bool {
    LinearForm::ALL.iter().any(|f| {
        let w = f.eval(x) - 0.5;
        (w - w.round()).abs() < margin
    })
}

#[test]
fn reduction_semiconjugates_the_four_site_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps = rat(41, 100);
    let mut checked = 0;
    while checked < 1000 {
        let x: Vec<Scalar> = (0..4).map(|_| random_rational(&mut rng, 9973)).collect();
        let red = reduce_coordinates(&x).unwrap();
        if branch_table().classify(&red.point).is_err() {
            continue;
        }
        let lhs = reduce_coordinates(&full_step(&x, &eps)).unwrap().point;
        assert_eq!(lhs, g3_step_formula(&red.point, &eps));
        assert_eq!(lhs, branch_table().g3_step_table(&red.point, &eps).unwrap());
        checked += 1;
    }
}

const ORBITS: usize = 1000;

#[test]
fn double_orbits_track_exact_orbits() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eps = rat(41, 100);
    let table = branch_table();
    let mut compared = 0usize;
    for _ in 0..ORBITS {
        let mut exact: [Scalar; 3] = std::array::from_fn(|_| random_rational(&mut rng, 1_000_003));
        let mut float = exact.clone().map(|v| to_f64(&v));
        for _ in 0..100 {
            if near_singular(&float, 1e-6) {
                break;
            }
            let b = table.classify(&exact).expect("nonsingular");
            assert_eq!(b.label, table.classify_f64(&float).unwrap().label);
            exact = table.g3_step_table(&exact, &eps).unwrap();
            float = table.g3_step_table_f64(&float, 0.41).unwrap();
            let e = exact.clone().map(|v| to_f64(&v));
            assert!(torus_distance(&e, &float) <= 1e-6, "{e:?} vs {float:?}");
            compared += 1;
        }
    }
    assert!(compared > ORBITS * 50, "only {compared} steps compared");
}
