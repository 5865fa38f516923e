mod common;

use common::{c, preset, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use wforge_core::config::PRESETS;
use wforge_core::parse;
use wforge_core::paths::{integrability_residual, periods, LoopSpec};
use wforge_core::spinor::{
    act_data, act_spinor, default_chart, dirac, so3_shadow, spinor_from_weierstrass, spinor_integrability_residual,
    spinor_period_check, weierstrass_from_spinor, Chart, MoebiusAction, SpinorRep,
};
use wforge_core::weierstrass::{norm3, WeierstrassData};
use wforge_core::ComplexExpr;

fn unit_quaternion(seed: u64) -> MoebiusAction {
    let mut r = rng(seed);
    let v: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let t = r.gen_range(0.5..2.0) / n;
    MoebiusAction::quaternion(c(v[0] * t, v[1] * t), c(v[2] * t, v[3] * t)).unwrap()
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn spinor_for(name: &str) -> (WeierstrassData, SpinorRep) {
    let (_, d) = preset(name);
    let ch = default_chart(d.domain()).unwrap();
    let sp = spinor_from_weierstrass(&d, ch, ch.center()).unwrap();
    (d, sp)
}

#[test]
fn round_trip_and_norm_identity_on_presets() {
    for name in PRESETS {
        let (d, sp) = spinor_for(name);
        for z in sp.chart.as_domain(d.domain().pole_margin).samples(200) {
            if !d.domain().is_admissible(z) {
                continue;
            }
            let w = d.omega(z).unwrap();
            let back = weierstrass_from_spinor(&sp, z).unwrap();
            let n = norm3(&w);
            for i in 0..3 {
                assert!((w[i] - back[i]).norm() <= 1e-12 * (1.0 + n), "{name} {z}");
            }
            let (u, v) = sp.uv(z).unwrap();
            assert!((n - 2f64.sqrt() * (u.norm_sqr() + v.norm_sqr())).abs() <= 1e-10 * (1.0 + n));
        }
    }
}

#[test]
fn continuation_is_continuous() {
    // neighbouring points get neighbouring spinors, not opposite signs
    for name in PRESETS {
        let (_, sp) = spinor_for(name);
        let (a, b) = (sp.chart.min, sp.chart.max);
        let mut prev = sp.uv(a).unwrap();
        for k in 1..=400 {
            let z = a + (b - a) * (k as f64 / 400.0);
            let cur = sp.uv(z).unwrap();
            let jump = ((cur.0 - prev.0).norm_sqr() + (cur.1 - prev.1).norm_sqr()).sqrt();
            let size = (prev.0.norm_sqr() + prev.1.norm_sqr()).sqrt();
            assert!(jump < 0.5 * size, "{name} at {z}");
            prev = cur;
        }
    }
}

#[test]
fn catenoid_slit_chart_squares() {
    let (d, sp) = spinor_for("catenoid");
    let pts = sp.chart.as_domain(0.0).samples(100);
    assert_eq!(pts.len(), 100);
    for z in pts {
        let (u, _) = sp.uv(z).unwrap();
        let w = d.omega(z).unwrap();
        let mu_minus = w[0] - c(0.0, 1.0) * w[1];
        assert!((u * u - 0.5 * mu_minus).norm() <= 1e-12 * (1.0 + mu_minus.norm()));
    }
}

#[test]
fn sign_flip_reconstructs_same_triple() {
    let (_, sp) = spinor_for("enneper");
    let neg = act_spinor(&sp, &MoebiusAction::identity().neg());
    for z in [c(0.1, 0.2), c(-0.7, 0.4)] {
        assert_eq!(weierstrass_from_spinor(&sp, z).unwrap(), weierstrass_from_spinor(&neg, z).unwrap());
    }
}

#[test]
fn holomorphic_spinors_are_dirac_null() {
    for name in ["plane", "enneper", "catenoid", "order-demo"] {
        let (d, sp) = spinor_for(name);
        for z in sp.chart.as_domain(d.domain().pole_margin).samples(20) {
            let (a, b) = dirac(&sp, z).unwrap();
            assert!(a.norm() <= 1e-10 && b.norm() <= 1e-10);
        }
        assert!(spinor_integrability_residual(&sp, 16).unwrap() <= 1e-10);
    }
}

#[test]
fn spinor_periods() {
    let (_, sp) = spinor_for("catenoid");
    let loops = [LoopSpec::circle("unit", c(0.0, 0.0), 1.0)];
    assert!(spinor_period_check(&sp, &loops, 1e-11, 1e-8).unwrap().pass);
    let (_, sp) = spinor_for("helicoid");
    assert!(!spinor_period_check(&sp, &loops, 1e-11, 1e-8).unwrap().pass);

    let (_, sp) = spinor_for("enneper");
    let small = [LoopSpec::circle("small", c(0.1, 0.0), 0.5)];
    let r = spinor_period_check(&sp, &small, 1e-11, 1e-8).unwrap();
    let l = &r.loops[0];
    assert!(l.uu.norm() <= 1e-10 && l.vv.norm() <= 1e-10 && l.uv.norm() <= 1e-10);
}

#[test]
fn integrability_levels_agree() {
    for name in PRESETS {
        let (d, sp) = spinor_for(name);
        let a = integrability_residual(&d, 32).unwrap();
        let b = spinor_integrability_residual(&sp, 32).unwrap();
        assert!(a <= 1e-8 && b <= 1e-8, "{name}: {a} {b}");
    }
    // Enneper times (1 + 0.1 re z)
    let (_, e) = preset("enneper");
    let w = e.exprs().clone().map(|x| ComplexExpr::mul(&x, &parse("1 + 0.1*re(z)").unwrap()));
    let pert = WeierstrassData::omega_triple(w, e.domain().clone()).unwrap();
    let ch = Chart::new(c(-1.0, -1.0), c(1.0, 1.0)).unwrap();
    let sp = spinor_from_weierstrass(&pert, ch, c(0.0, 0.0)).unwrap();
    let a = integrability_residual(&pert, 32).unwrap();
    let b = spinor_integrability_residual(&sp, 32).unwrap();
    assert!(a > 1e-3 && b > 1e-3, "{a} {b}");
    assert!(a <= b * (1.0 + 1e-12) && b <= 2f64.sqrt() * a * (1.0 + 1e-12), "{a} {b}");
}

#[test]
fn exprs_spinor_matches_derivation() {
    // integrability computed from the spinor pair must equal the triple-level
    // residual built from the Veronese triple of the same pair
    let u = parse("1 + 0.3*zbar").unwrap();
    let v = parse("z + 0.2*z*zbar").unwrap();
    let ch = Chart::new(c(-0.5, -0.5), c(0.5, 0.5)).unwrap();
    let sp = SpinorRep::from_exprs(u.clone(), v.clone(), ch);
    let w = {
        use ComplexExpr as E;
        let (uu, vv) = (E::mul(&u, &u), E::mul(&v, &v));
        [E::sub(&uu, &vv), E::mul(&E::lit(c(0.0, 1.0)), &E::add(&uu, &vv)), E::mul(&E::real(2.0), &E::mul(&u, &v))]
    };
    let d = WeierstrassData::omega_triple(w, ch.as_domain(0.01)).unwrap();
    let a = integrability_residual(&d, 16).unwrap();
    let b = spinor_integrability_residual(&sp, 16).unwrap();
    assert!(a > 1e-2);
    assert!(a <= b * (1.0 + 1e-12) && b <= 2f64.sqrt() * a * (1.0 + 1e-12), "{a} {b}");
}

#[test]
fn dilation_scales_triple() {
    let (_, d) = preset("sphere");
    for t in [0.5, 1.7] {
        let dt = act_data(&d, &MoebiusAction::new(c(t, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(t, 0.0)).unwrap()).unwrap();
        let z = c(0.3, -0.2);
        let (a, b) = (d.omega(z).unwrap(), dt.omega(z).unwrap());
        for i in 0..3 {
            assert!((b[i] - t * t * a[i]).norm() <= 1e-14 * (1.0 + a[i].norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn shadow_is_a_similarity(seed in any::<u64>()) {
        let t = unit_quaternion(seed);
        let m = so3_shadow(&t).unwrap();
        let s = t.a.norm_sqr() + t.c.norm_sqr();
        for i in 0..3 {
            for j in 0..3 {
                let g: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let want = if i == j { s * s } else { 0.0 };
                prop_assert!((g - want).abs() <= 1e-12 * (1.0 + s * s));
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        prop_assert!(det > 0.0);
    }

    #[test]
    fn shadow_is_a_homomorphism(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (unit_quaternion(s1), unit_quaternion(s2));
        let lhs = so3_shadow(&a.mul(&b)).unwrap();
        let rhs = matmul(&so3_shadow(&a).unwrap(), &so3_shadow(&b).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((lhs[i][j] - rhs[i][j]).abs() <= 1e-10);
            }
        }
        prop_assert_eq!(so3_shadow(&a).unwrap(), so3_shadow(&a.neg()).unwrap());
    }

    #[test]
    fn action_is_equivariant(seed in any::<u64>()) {
        let t = unit_quaternion(seed);
        let m = so3_shadow(&t).unwrap();
        for name in ["enneper", "catenoid", "sphere"] {
            let (cfg, d) = preset(name);
            let dt = act_data(&d, &t).unwrap();
            for z in cfg.domain.samples(16) {
                let (w, wt) = (d.omega(z).unwrap(), dt.omega(z).unwrap());
                let n = norm3(&w);
                for i in 0..3 {
                    let want: Complex64 = (0..3).map(|j| m[i][j] * w[j]).sum();
                    prop_assert!((wt[i] - want).norm() <= 1e-12 * (1.0 + n * n), "{name}");
                }
            }
            // spinor action gives the same triple
            let ch = default_chart(d.domain()).unwrap();
            let sp = act_spinor(&spinor_from_weierstrass(&d, ch, ch.center()).unwrap(), &t);
            let z = ch.center() + c(0.01, 0.02);
            let (a, b) = (weierstrass_from_spinor(&sp, z).unwrap(), dt.omega(z).unwrap());
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).norm() <= 1e-12 * (1.0 + norm3(&b)));
            }
        }
    }

    #[test]
    fn quaternions_preserve_periods_and_integrability(seed in any::<u64>()) {
        let t = unit_quaternion(seed);
        let (cfg, d) = preset("catenoid");
        let dt = act_data(&d, &t).unwrap();
        prop_assert!(periods(&dt, &cfg.loops().unwrap(), &cfg.tolerances).unwrap().period_condition);
        let size = t.a.norm_sqr() + t.c.norm_sqr();
        let (_, s) = preset("sphere");
        let after = integrability_residual(&act_data(&s, &t).unwrap(), 16).unwrap();
        prop_assert!(after <= 1e-8 * size);
        let (_, e) = preset("enneper");
        let w = e.exprs().clone().map(|x| ComplexExpr::mul(&x, &parse("1 + 0.1*re(z)").unwrap()));
        let pert = WeierstrassData::omega_triple(w, e.domain().clone()).unwrap();
        let base = integrability_residual(&pert, 16).unwrap();
        let after = integrability_residual(&act_data(&pert, &t).unwrap(), 16).unwrap();
        prop_assert!(after <= 2.0 * base * size);
    }
}
