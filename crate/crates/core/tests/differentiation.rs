mod common;

use common::{coord_names, random_expr, random_point};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weakcontact::expr::parse_expr;
use weakcontact::jet::{DerivativeTable, JetSpace};
use weakcontact::scalar::Smooth;
use weakcontact::Params;

const H: f64 = 1e-5;
const REL: f64 = 1e-6;

fn central_difference(e: &weakcontact::Expr, p: &[f64], k: usize) -> f64 {
    let params = Params::new();
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[k] += H;
    minus[k] -= H;
    (e.eval_coords(&plus, &params).unwrap() - e.eval_coords(&minus, &params).unwrap()) / (2.0 * H)
}

#[test]
fn symbolic_derivatives_match_central_differences_on_100_seeded_expressions() {
    let names = coord_names();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let text = random_expr(&mut rng, 4);
        let e = parse_expr(&text, &names, &[]).unwrap_or_else(|err| panic!("case {case}: {text}: {err}"));
        let p = random_point(&mut rng);
        for k in 0..3 {
            let sym = e.diff_index(k).eval_coords(&p, &Params::new()).unwrap();
            let fd = central_difference(&e, &p, k);
            let rel = (sym - fd).abs() / sym.abs().max(1.0);
            worst = worst.max(rel);
            assert!(rel <= REL, "case {case} ∂_{k} of {text} at {p:?}: symbolic {sym}, difference {fd}");
        }
    }
    assert!(worst.is_finite());
}

#[test]
fn jets_carry_the_symbolic_second_derivatives() {
    let names = coord_names();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let space = JetSpace::shared(3);
    for _ in 0..30 {
        let text = random_expr(&mut rng, 3);
        let e = parse_expr(&text, &names, &[]).unwrap();
        let p = random_point(&mut rng);
        let jet = DerivativeTable::new(&e, space.clone(), 3).jet_at(&p, &Params::new()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let sym = e.diff_index(i).diff_index(j).eval_coords(&p, &Params::new()).unwrap();
                let from_jet = jet.partial(i).partial(j).value();
                assert!((sym - from_jet).abs() <= 1e-10 * sym.abs().max(1.0), "{text}: {sym} vs {from_jet}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>()) {
        let names = coord_names();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = parse_expr(&random_expr(&mut rng, 4), &names, &[]).unwrap();
        let again = parse_expr(&e.to_string(), &names, &[]).unwrap();
        prop_assert_eq!(&again, &e);
    }

    #[test]
    fn derivative_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let names = coord_names();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = parse_expr(&random_expr(&mut rng, 3), &names, &[]).unwrap();
        let v = parse_expr(&random_expr(&mut rng, 3), &names, &[]).unwrap();
        let p = random_point(&mut rng);
        let params = Params::new();
        let combo = u.scale(a).add(&v.scale(b));
        let lhs = combo.diff_index(0).eval_coords(&p, &params).unwrap();
        let rhs = a * u.diff_index(0).eval_coords(&p, &params).unwrap() + b * v.diff_index(0).eval_coords(&p, &params).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn mixed_partials_commute(seed in any::<u64>()) {
        let names = coord_names();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = parse_expr(&random_expr(&mut rng, 3), &names, &[]).unwrap();
        let p = random_point(&mut rng);
        let params = Params::new();
        let xy = e.diff_index(0).diff_index(1).eval_coords(&p, &params).unwrap();
        let yx = e.diff_index(1).diff_index(0).eval_coords(&p, &params).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-9 * xy.abs().max(1.0));
    }
}
