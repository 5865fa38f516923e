mod common;

use std::f64::consts::TAU;

use common::{c, preset};
use num_complex::Complex64;
use proptest::prelude::*;
use wforge_core::expr::{wirtinger, Wrt};
use wforge_core::parse;
use wforge_core::paths::{
    integrability_residual, integrate_form, integrate_omega, periods, LoopSpec, PathSpec,
};
use wforge_core::weierstrass::{Domain, Tolerances, WeierstrassData};

const TOL: f64 = 1e-10;

fn integrate1(src: &str, path: &PathSpec) -> Complex64 {
    let e = parse(src).unwrap();
    integrate_form(&|z| Ok([e.eval(z)?]), path, TOL).unwrap()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reversal_negates(ax in -1.0f64..1.0, ay in -1.0f64..1.0, bx in -1.0f64..1.0, by in -1.0f64..1.0,
                        cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
        let p = PathSpec::polyline(vec![c(ax, ay), c(bx, by), c(cx, cy)]).unwrap();
        let f = "exp(z) * zbar + z^3";
        let a = integrate1(f, &p);
        let b = integrate1(f, &p.reversed());
        prop_assert!((a + b).norm() <= 2.0 * TOL);
    }

    #[test]
    fn concatenation_adds(ax in -1.0f64..1.0, ay in -1.0f64..1.0, r in 0.2f64..0.9, t0 in 0.0f64..6.0, t1 in -6.0f64..6.0) {
        let center = c(ax, ay);
        let arc = PathSpec::arc(center, r, t0, t1);
        let seg = PathSpec::segment(arc.end(), c(0.0, 0.0));
        let chain = PathSpec::Chain { parts: vec![arc.clone(), seg.clone()] };
        let f = "sin(z) + re(z)^2";
        let whole = integrate1(f, &chain);
        let sum = integrate1(f, &arc) + integrate1(f, &seg);
        prop_assert!((whole - sum).norm() <= 2.0 * TOL);
    }

    #[test]
    fn exact_forms_have_zero_periods(k in 1i32..5, x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let g = parse(&format!("exp(z) * z^{k} + 1/z^{k}")).unwrap();
        let dg = wirtinger(&g, Wrt::Z).unwrap();
        let loop_ = LoopSpec::circle("c", c(x, y), 1.5);
        let p = integrate_form(&|z| Ok([dg.eval(z)?]), &loop_.path, TOL).unwrap()[0];
        prop_assert!(p.norm() <= TOL, "{p}");
    }
}

#[test]
fn homotopic_loops_agree() {
    let dom = Domain::rectangle(c(-2.0, -2.0), c(2.0, 2.0))
        .with_puncture(c(0.0, 0.0), 0)
        .with_margin(0.1);
    let d = WeierstrassData::munu(parse("exp(z)/z^2").unwrap(), parse("z + 1/z").unwrap(), dom).unwrap();
    let circle = LoopSpec::circle("circle", c(0.0, 0.0), 1.0);
    let square = LoopSpec::polygon("square", vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0)]).unwrap();
    let a = integrate_omega(&d, &circle.path, TOL).unwrap();
    let b = integrate_omega(&d, &square.path, TOL).unwrap();
    for i in 0..3 {
        assert!((a[i] - b[i]).norm() <= 2.0 * TOL, "{:?} {:?}", a, b);
    }
}

#[test]
fn contractible_loop_of_holomorphic_data() {
    let (_, d) = preset("enneper");
    let l = LoopSpec::circle("c", c(0.1, 0.0), 0.5);
    let p = integrate_omega(&d, &l.path, TOL).unwrap();
    assert!(p.iter().all(|x| x.norm() <= TOL));
}

#[test]
fn catenoid_and_helicoid_periods() {
    let (cfg, d) = preset("catenoid");
    let r = periods(&d, &[LoopSpec::circle("unit", c(0.0, 0.0), 1.0)], &cfg.tolerances).unwrap();
    assert!(r.period_condition);
    let p = r.loops[0].period;
    // residue of w3 = dz/z
    assert!((p[2] - c(0.0, TAU)).norm() <= 1e-8);
    assert!(p[0].norm() <= 1e-8 && p[1].norm() <= 1e-8);

    let (cfg, h) = preset("helicoid");
    let r = periods(&h, &cfg.loops().unwrap(), &cfg.tolerances).unwrap();
    assert!(!r.period_condition);
    assert!((r.loops[0].period[2] - c(0.0, -1.0) * c(0.0, TAU)).norm() <= 1e-8);
}

#[test]
fn spec_catenoid_constant_residue() {
    // mu = -2/z^2 gives w3 = -2 dz/z with period -4πi
    let dom = Domain::rectangle(c(-2.0, -2.0), c(2.0, 2.0))
        .with_puncture(c(0.0, 0.0), 0)
        .with_margin(0.1);
    let d = WeierstrassData::munu(parse("-2/z^2").unwrap(), parse("z").unwrap(), dom).unwrap();
    let r = periods(&d, &[LoopSpec::circle("unit", c(0.0, 0.0), 1.0)], &Tolerances::default()).unwrap();
    assert!((r.loops[0].period[2] - c(0.0, -2.0 * TAU)).norm() <= 1e-8);
}

#[test]
fn blocked_loop_is_an_error() {
    let (_, d) = preset("catenoid");
    let l = LoopSpec::circle("tight", c(0.0, 0.0), 0.05);
    assert!(integrate_omega(&d, &l.path, TOL).is_err());
}

#[test]
fn integrability_examples() {
    let (_, enneper) = preset("enneper");
    assert_eq!(integrability_residual(&enneper, 16).unwrap(), 0.0);
    let (_, sphere) = preset("sphere");
    assert!(integrability_residual(&sphere, 64).unwrap() <= 1e-8);
    let w = enneper.exprs().clone().map(|e| {
        wforge_core::ComplexExpr::mul(&e, &parse("1 + 0.1*re(z)").unwrap())
    });
    let pert = WeierstrassData::omega_triple(w, enneper.domain().clone()).unwrap();
    assert!(integrability_residual(&pert, 16).unwrap() > 1e-3);
}
