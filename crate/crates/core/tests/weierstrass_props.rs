mod common;


use common::{c, cross3, dot3, immersion_jet, norm3r, preset, random_expr, rng, ExprOptions};
use proptest::prelude::*;
use wforge_core::config::PRESETS;
use wforge_core::parse;
use wforge_core::weierstrass::{
    gauss_map, isotropy, norm3_sqr, to_cp1, to_sphere, validate, veronese, Cp1Point, Domain, munu_from_omega,
    Tolerances, WeierstrassData,
};

const HOLO: ExprOptions = ExprOptions {
    conjugates: false,
    transcendental: true,
};

fn square() -> Domain {
    Domain::rectangle(c(-1.0, -1.0), c(1.0, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn munu_data_is_isotropic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = parse(&format!("exp({})", random_expr(&mut r, 2, HOLO))).unwrap();
        let nu = parse(&random_expr(&mut r, 3, HOLO)).unwrap();
        let d = WeierstrassData::munu(mu, nu, square()).unwrap();
        for z in d.domain().samples(32) {
            let w = d.omega(z).unwrap();
            let n2 = norm3_sqr(&w);
            prop_assume!(n2.is_finite() && n2 < 1e12);
            prop_assert!(isotropy(&w).norm() <= 1e-10 * n2);
        }
    }

    #[test]
    fn nu_plus_times_nu_minus_is_minus_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let nu = parse(&random_expr(&mut r, 3, HOLO)).unwrap();
        let d = WeierstrassData::munu(parse("1 + z^2/4").unwrap(), nu, square()).unwrap();
        for z in d.domain().samples(16) {
            let m = munu_from_omega(&d, z).unwrap();
            if let (Some(a), Some(b)) = (m.nu_minus, m.nu_plus) {
                prop_assume!(a.norm() < 1e5 && b.norm() < 1e5);
                prop_assert!((a * b + 1.0).norm() <= 1e-10, "{a} {b} {}", (a*b+1.0).norm());
            }
        }
    }

    #[test]
    fn cp1_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6, scale in -6i32..6) {
        let z = c(re, im) * 10f64.powi(scale) / 1e6;
        prop_assume!(z.norm() <= 1e6);
        let back = match to_cp1(to_sphere(Cp1Point::Finite(z))).unwrap() {
            Cp1Point::Finite(w) => w,
            Cp1Point::Infinity => panic!("finite point sent to infinity"),
        };
        prop_assert!((back - z).norm() <= 1e-12 * (1.0 + z.norm()), "{z} -> {back}");
    }

    #[test]
    fn veronese_is_isotropic(a in -10f64..10., b in -10f64..10., e in -10f64..10., f in -10f64..10.) {
        let (z0, z1) = (c(a, b), c(e, f));
        let s = z0.norm_sqr() + z1.norm_sqr();
        prop_assert!(isotropy(&veronese(z0, z1)).norm() <= 1e-14 * s * s);
    }
}

#[test]
fn cp1_infinity() {
    assert_eq!(to_sphere(Cp1Point::Infinity), [0.0, 0.0, 1.0]);
    assert_eq!(to_cp1([0.0, 0.0, 1.0]).unwrap(), Cp1Point::Infinity);
    assert!(to_cp1([0.0, 0.0, 2.0]).is_err());
}

#[test]
fn presets_are_isotropic_and_valid() {
    for name in PRESETS {
        let (cfg, d) = preset(name);
        let r = validate(&d, 4096, &cfg.tolerances);
        assert!(r.pass, "{name}: {:?}", r.reasons);
        assert!(r.max_isotropy_residual <= 1e-10, "{name}");
    }
}

#[test]
fn catenoid_recovery_example() {
    // mu = -2/z^2, nu = z at z = 1
    let d = WeierstrassData::munu(parse("-2/z^2").unwrap(), parse("z").unwrap(), square()).unwrap();
    let w = d.omega(c(1.0, 0.0)).unwrap();
    let want = [c(0.0, 0.0), c(0.0, -2.0), c(-2.0, 0.0)];
    for i in 0..3 {
        assert!((w[i] - want[i]).norm() < 1e-15);
    }
    // independent evaluation of each component
    let z = c(0.3, -0.8);
    let mu = -2.0 / (z * z);
    let w = d.omega(z).unwrap();
    assert!((w[0] - 0.5 * (1.0 - z * z) * mu).norm() < 1e-13);
    assert!((w[1] - c(0.0, 0.5) * (1.0 + z * z) * mu).norm() < 1e-13);
    assert!((w[2] - z * mu).norm() < 1e-13);
}

#[test]
fn gauss_map_matches_tangent_cross_product() {
    for name in PRESETS {
        let (cfg, d) = preset(name);
        for z in cfg.domain.samples(20) {
            let jet = immersion_jet(&d, cfg.basepoint, z, 1e-4);
            let n = cross3(&jet.x, &jet.y);
            let n = [n[0] / norm3r(&n), n[1] / norm3r(&n), n[2] / norm3r(&n)];
            let eta = gauss_map(&d, z).unwrap();
            let err = norm3r(&common::sub3(&eta, &n));
            assert!(err <= 1e-5, "{name} at {z}: {err}");
        }
    }
}

#[test]
fn order_condition_failures_are_reported() {
    // nu = 1/z^2 needs ord(mu) = 4
    let dom = square().with_puncture(c(0.0, 0.0), 2).with_margin(0.1);
    let d = WeierstrassData::munu(parse("z^2").unwrap(), parse("1/z^2").unwrap(), dom).unwrap();
    let r = validate(&d, 256, &Tolerances::default());
    assert!(!r.pass);
    assert!(!r.punctures[0].condition_ok);
    let dom = square().with_puncture(c(0.0, 0.0), 2).with_margin(0.1);
    let d = WeierstrassData::munu(parse("z^4").unwrap(), parse("1/z^2").unwrap(), dom).unwrap();
    assert!(validate(&d, 256, &Tolerances::default()).pass);
}

#[test]
fn sphere_gauss_map_is_inward() {
    let (cfg, d) = preset("sphere");
    for z in cfg.domain.samples(50) {
        let phi = wforge_core::immersion::immerse(&d, cfg.basepoint, cfg.base_value, &[z], 1e-12).unwrap()[0];
        assert!((norm3r(&phi) - 1.0).abs() < 1e-9);
        let eta = gauss_map(&d, z).unwrap();
        assert!((dot3(&eta, &phi) + 1.0).abs() < 1e-9);
    }
}
