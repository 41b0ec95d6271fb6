#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use weakcontact::structure::LocalGeometry;
use weakcontact::{Point, WacsBundle};

pub const COORDS: [&str; 3] = ["x", "y", "z"];

pub fn coord_names() -> Vec<String> {
    COORDS.iter().map(|s| s.to_string()).collect()
}

/// Random expression text in `x, y, z`, smooth on all of ℝ³.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => COORDS[rng.gen_range(0..3)].to_string(),
            1 => format!("{:.3}", rng.gen_range(-2.0..2.0)),
            _ => format!("{:.2}*{}", rng.gen_range(0.5..1.5), COORDS[rng.gen_range(0..3)]),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..10) {
        0 => format!("({a}) + ({})", random_expr(rng, depth - 1)),
        1 => format!("({a}) - ({})", random_expr(rng, depth - 1)),
        2 | 3 => format!("({a}) * ({})", random_expr(rng, depth - 1)),
        4 => format!("({a}) / (2 + cos({}))", random_expr(rng, depth - 1)),
        5 => format!("exp(0.3*({a}))"),
        6 => format!("sin({a})"),
        7 => format!("cos({a})"),
        8 => format!("sqrt(1 + ({a})^2)"),
        _ => format!("log(3 + sin({a}))"),
    }
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect()
}

pub fn geometry(bundle: &WacsBundle, points: usize, seed: u64) -> (Vec<Point>, Vec<LocalGeometry>) {
    let pts = bundle.sample_points(points, seed).expect("sampling");
    let geos = bundle.locals(&pts).expect("local geometry");
    (pts, geos)
}

/// Largest absolute entry.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
