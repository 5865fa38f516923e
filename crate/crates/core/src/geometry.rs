//! Metric, Hopf differential and curvatures evaluated directly from the data.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::exec;
use crate::weierstrass::{gauss_from_triple, norm3_sqr, WeierstrassData, C3, R3};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometrySample {
    pub z: Complex64,
    /// Conformal factor: the induced metric is `lambda (dx^2 + dy^2)`.
    pub lambda: f64,
    pub eta: R3,
    /// Coefficient of the Hopf differential against `dz^2`.
    pub q: Complex64,
    pub h: f64,
    pub k: f64,
    pub umbilic: bool,
    /// Largest imaginary part of the codifferential, zero for integrable data.
    pub h_leak: f64,
}

impl GeometrySample {
    /// Norm of the Hopf differential in an orthonormal frame.
    pub fn q_norm(&self) -> f64 {
        q_norm(self.q, self.lambda)
    }
}

/// `||q|| = 2|q| / ||w||^2 = |q| / lambda`.
fn q_norm(q: Complex64, lambda: f64) -> f64 {
    q.norm() / lambda
}

pub fn induced_metric_from(w: &C3) -> f64 {
    0.5 * norm3_sqr(w)
}

/// Hopf coefficient from the triple and its `z` derivative, using the chart
/// with the larger `|mu|`.
pub fn hopf_from(w: &C3, wz: &C3) -> Complex64 {
    let mu_m = w[0] - I * w[1];
    let mu_p = w[0] + I * w[1];
    if mu_m.norm() >= mu_p.norm() {
        let dmu = wz[0] - I * wz[1];
        w[2] * dmu / mu_m - wz[2]
    } else {
        let dmu = wz[0] + I * wz[1];
        wz[2] - w[2] * dmu / mu_p
    }
}

/// Both chart formulas, for overlap checks: `(U-, U+)`.
pub fn hopf_both_charts(w: &C3, wz: &C3) -> (Complex64, Complex64) {
    let mu_m = w[0] - I * w[1];
    let mu_p = w[0] + I * w[1];
    let qm = w[2] * (wz[0] - I * wz[1]) / mu_m - wz[2];
    let qp = wz[2] - w[2] * (wz[0] + I * wz[1]) / mu_p;
    (qm, qp)
}

/// `H = -<d*w, eta>` with `d*w = -2 w_zbar / ||w||^2`; returns `(H, leak)`.
pub fn mean_from(w: &C3, wzb: &C3, eta: &R3) -> (f64, f64) {
    let n2 = norm3_sqr(w);
    let mut h = 0.0;
    let mut leak = 0.0f64;
    for i in 0..3 {
        h += 2.0 * wzb[i].re * eta[i] / n2;
        leak = leak.max(2.0 * wzb[i].im.abs() / n2);
    }
    (h, leak)
}

pub fn induced_metric(d: &WeierstrassData, z: Complex64) -> Result<f64> {
    Ok(induced_metric_from(&d.omega(z)?))
}

pub fn hopf_differential(d: &WeierstrassData, z: Complex64) -> Result<Complex64> {
    Ok(hopf_from(&d.omega(z)?, &d.omega_z(z)?))
}

pub fn mean_curvature(d: &WeierstrassData, z: Complex64) -> Result<f64> {
    Ok(sample(d, z, 0.0)?.h)
}

pub fn gaussian_curvature(d: &WeierstrassData, z: Complex64) -> Result<f64> {
    Ok(sample(d, z, 0.0)?.k)
}

/// All pointwise quantities at `z`. `umbilic_tol` bounds `||q||`.
pub fn sample(d: &WeierstrassData, z: Complex64, umbilic_tol: f64) -> Result<GeometrySample> {
    let w = d.omega(z)?;
    let wz = d.omega_z(z)?;
    let wzb = d.omega_zbar(z)?;
    let eta = gauss_from_triple(&w, z)?;
    let lambda = induced_metric_from(&w);
    let q = hopf_from(&w, &wz);
    let (h, h_leak) = mean_from(&w, &wzb, &eta);
    let qn = q_norm(q, lambda);
    Ok(GeometrySample {
        z,
        lambda,
        eta,
        q,
        h,
        k: h * h - qn * qn,
        umbilic: qn <= umbilic_tol,
        h_leak,
    })
}

pub fn sample_all(d: &WeierstrassData, points: &[Complex64], umbilic_tol: f64) -> Result<Vec<GeometrySample>> {
    exec::try_map(points, |&z| sample(d, z, umbilic_tol))
}

/// Points where `||q|| <= tol`.
pub fn umbilics(d: &WeierstrassData, points: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    Ok(sample_all(d, points, tol)?
        .into_iter()
        .filter(|s| s.umbilic)
        .map(|s| s.z)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::weierstrass::Domain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn munu(mu: &str, nu: &str) -> WeierstrassData {
        let dom = Domain::rectangle(c(-1.0, -1.0), c(1.0, 1.0));
        WeierstrassData::munu(parse(mu).unwrap(), parse(nu).unwrap(), dom).unwrap()
    }

    #[test]
    fn enneper_values() {
        let d = munu("2", "z");
        let s = sample(&d, c(0.0, 0.0), 1e-9).unwrap();
        assert_eq!(s.lambda, 1.0);
        assert!((s.q - c(-2.0, 0.0)).norm() < 1e-15);
        assert!((s.k + 4.0).abs() < 1e-14);
        assert_eq!(s.h, 0.0);
        assert!(!s.umbilic);
        let q = hopf_differential(&d, c(0.3, -0.7)).unwrap();
        assert!((q - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn plane_is_flat() {
        let d = munu("1", "0");
        let s = sample(&d, c(0.5, 0.5), 1e-12).unwrap();
        assert_eq!(s.q, c(0.0, 0.0));
        assert_eq!(s.k, 0.0);
        assert!(s.umbilic);
    }

    #[test]
    fn umbilic_at_zero_of_q() {
        // q = -mu nu' = -2z
        let d = munu("1", "z^2");
        let pts = [c(0.0, 0.0), c(0.5, 0.0), c(0.0, -0.5)];
        assert_eq!(umbilics(&d, &pts, 1e-12).unwrap(), vec![c(0.0, 0.0)]);
        let q = hopf_differential(&d, c(0.5, 0.0)).unwrap();
        assert!((q - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn charts_agree_on_overlap() {
        let d = munu("1 + z", "exp(z)");
        for z in [c(0.2, 0.1), c(-0.4, 0.6)] {
            let (a, b) = hopf_both_charts(&d.omega(z).unwrap(), &d.omega_z(z).unwrap());
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }
}
