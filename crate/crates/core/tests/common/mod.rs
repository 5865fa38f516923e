#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wforge_core::config::SurfaceConfig;
use wforge_core::immersion::immerse;
use wforge_core::weierstrass::{WeierstrassData, R3};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn preset(name: &str) -> (SurfaceConfig, WeierstrassData) {
    let cfg = SurfaceConfig::preset(name).unwrap();
    let d = cfg.check().unwrap();
    (cfg, d)
}

#[derive(Clone, Copy)]
pub struct ExprOptions {
    pub conjugates: bool,
    pub transcendental: bool,
}

fn constant(rng: &mut StdRng) -> String {
    let re = (rng.gen_range(-1.5f64..1.5) * 8.0).round() / 8.0;
    if rng.gen_bool(0.3) {
        let im = (rng.gen_range(-1.0f64..1.0) * 8.0).round() / 8.0;
        format!("({re} + {im}*i)")
    } else {
        format!("{re}")
    }
}

fn leaf(rng: &mut StdRng, o: ExprOptions) -> String {
    match rng.gen_range(0..4) {
        0 | 1 => "z".into(),
        2 if o.conjugates => "zbar".into(),
        _ => constant(rng),
    }
}

/// Random expression source. Denominators are shifted away from zero and
/// transcendental nodes are limited to entire functions.
pub fn random_expr(rng: &mut StdRng, depth: u32, o: ExprOptions) -> String {
    if depth == 0 {
        return leaf(rng, o);
    }
    let sub = |rng: &mut StdRng| random_expr(rng, depth - 1, o);
    let kinds = if o.transcendental { 8 } else { 6 };
    match rng.gen_range(0..kinds + usize::from(o.conjugates)) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 | 3 => format!("({} * {})", sub(rng), sub(rng)),
        4 => format!("({} / (3 + {}))", sub(rng), leaf(rng, o)),
        5 => format!("({})^{}", sub(rng), rng.gen_range(2..4)),
        6 => format!("{}({})", ["exp", "sin", "cos"][rng.gen_range(0..3)], sub(rng)),
        7 => format!("-({})", sub(rng)),
        _ => format!("{}({})", ["conj", "re", "im"][rng.gen_range(0..3)], sub(rng)),
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut StdRng, radius: f64) -> Complex64 {
    loop {
        let z = c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() <= radius {
            return z;
        }
    }
}

/// Central-difference Wirtinger derivatives `(f_z, f_zbar)`.
pub fn fd_wirtinger(f: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> (Complex64, Complex64) {
    // fourth-order central differences
    let d = |step: Complex64| (8.0 * (f(z + step) - f(z - step)) - (f(z + 2.0 * step) - f(z - 2.0 * step))) / (12.0 * h);
    let (fx, fy) = (d(c(h, 0.0)), d(c(0.0, h)));
    (0.5 * (fx - I * fy), 0.5 * (fx + I * fy))
}

pub fn sub3(a: &R3, b: &R3) -> R3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: &R3, s: f64) -> R3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3(a: &R3, b: &R3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &R3, b: &R3) -> R3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3r(a: &R3) -> f64 {
    dot3(a, a).sqrt()
}

/// Finite-difference jet of the integrated immersion at `z`: first and
/// second partials from a 3x3 stencil of step `h`.
pub struct Jet {
    pub phi: R3,
    pub x: R3,
    pub y: R3,
    pub xx: R3,
    pub xy: R3,
    pub yy: R3,
}

pub fn immersion_jet(d: &WeierstrassData, basepoint: Complex64, z: Complex64, h: f64) -> Jet {
    let mut pts = Vec::new();
    for j in -1..=1 {
        for k in -1..=1 {
            pts.push(z + c(k as f64 * h, j as f64 * h));
        }
    }
    let p = immerse(d, basepoint, [0.0; 3], &pts, 1e-13).unwrap();
    let at = |k: i32, j: i32| p[((j + 1) * 3 + (k + 1)) as usize];
    let comb = |f: &dyn Fn(usize) -> f64| [f(0), f(1), f(2)];
    Jet {
        phi: at(0, 0),
        x: comb(&|i| (at(1, 0)[i] - at(-1, 0)[i]) / (2.0 * h)),
        y: comb(&|i| (at(0, 1)[i] - at(0, -1)[i]) / (2.0 * h)),
        xx: comb(&|i| (at(1, 0)[i] - 2.0 * at(0, 0)[i] + at(-1, 0)[i]) / (h * h)),
        yy: comb(&|i| (at(0, 1)[i] - 2.0 * at(0, 0)[i] + at(0, -1)[i]) / (h * h)),
        xy: comb(&|i| (at(1, 1)[i] - at(1, -1)[i] - at(-1, 1)[i] + at(-1, -1)[i]) / (4.0 * h * h)),
    }
}

/// Mean and Gaussian curvature from the first and second fundamental forms
/// of the jet, using the normal `n`.
pub fn shape_operator(j: &Jet, n: &R3) -> (f64, f64) {
    let (e, f, g) = (dot3(&j.x, &j.x), dot3(&j.x, &j.y), dot3(&j.y, &j.y));
    let (l, m, nn) = (dot3(&j.xx, n), dot3(&j.xy, n), dot3(&j.yy, n));
    let det = e * g - f * f;
    let h = (e * nn - 2.0 * f * m + g * l) / (2.0 * det);
    let k = (l * nn - m * m) / det;
    (h, k)
}
