//! Weierstrass data on a punctured planar domain.
//!
//! Data is stored as the coefficient triple `w = (w1, w2, w3)` of the
//! (1,0)-forms against `dz`. The `(mu, nu)` variant keeps its pair and builds
//! the triple from `w = ((1 - nu^2)/2, i(1 + nu^2)/2, nu) mu`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::expr::{order_at, wirtinger, ComplexExpr, Wrt};

pub type C3 = [Complex64; 3];
pub type R3 = [f64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Number of nodes of the Cauchy-integral extension at removable points.
const EXTENSION_NODES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DomainKind {
    Rectangle { min: Complex64, max: Complex64 },
    Annulus { center: Complex64, inner: f64, outer: f64 },
}

/// A declared special point. `nu_pole_order > 0` marks a point of the surface
/// where `nu` has a pole of that order; `0` marks a hole of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub point: Complex64,
    #[serde(default)]
    pub nu_pole_order: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default)]
    pub punctures: Vec<Puncture>,
    pub pole_margin: f64,
}

impl Domain {
    /// Checks the shape and puncture invariants. Annulus punctures may also lie
    /// in the inner hole.
    pub fn new(kind: DomainKind, punctures: Vec<Puncture>, pole_margin: f64) -> Result<Self> {
        let d = Domain {
            kind,
            punctures,
            pole_margin,
        };
        d.check()?;
        Ok(d)
    }

    pub fn rectangle(min: Complex64, max: Complex64) -> Self {
        Domain {
            kind: DomainKind::Rectangle { min, max },
            punctures: Vec::new(),
            pole_margin: 1e-3,
        }
    }

    pub fn annulus(center: Complex64, inner: f64, outer: f64) -> Self {
        Domain {
            kind: DomainKind::Annulus { center, inner, outer },
            punctures: Vec::new(),
            pole_margin: 1e-3,
        }
    }

    pub fn with_puncture(mut self, point: Complex64, nu_pole_order: u32) -> Self {
        self.punctures.push(Puncture { point, nu_pole_order });
        self
    }

    pub fn with_margin(mut self, pole_margin: f64) -> Self {
        self.pole_margin = pole_margin;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.pole_margin > 0.0 && self.pole_margin.is_finite()) {
            return Err(Error::Invalid("pole_margin must be positive".into()));
        }
        match self.kind {
            DomainKind::Rectangle { min, max } => {
                if !(min.re < max.re && min.im < max.im) {
                    return Err(Error::Invalid("rectangle needs min < max in both axes".into()));
                }
                for p in &self.punctures {
                    let inside = p.point.re > min.re
                        && p.point.re < max.re
                        && p.point.im > min.im
                        && p.point.im < max.im;
                    if !inside {
                        return Err(Error::Invalid(format!("puncture {} outside the rectangle", p.point)));
                    }
                }
            }
            DomainKind::Annulus { center, inner, outer } => {
                if !(inner >= 0.0 && inner < outer && outer.is_finite()) {
                    return Err(Error::Invalid("annulus needs 0 <= inner < outer".into()));
                }
                for p in &self.punctures {
                    if (p.point - center).norm() >= outer {
                        return Err(Error::Invalid(format!("puncture {} outside the annulus", p.point)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Point lies in the closed region (ignoring punctures).
    pub fn contains(&self, z: Complex64) -> bool {
        const SLACK: f64 = 1e-12;
        match self.kind {
            DomainKind::Rectangle { min, max } => {
                z.re >= min.re - SLACK && z.re <= max.re + SLACK && z.im >= min.im - SLACK && z.im <= max.im + SLACK
            }
            DomainKind::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                r >= inner * (1.0 - SLACK) && r <= outer * (1.0 + SLACK)
            }
        }
    }

    /// Distance to the nearest puncture.
    pub fn puncture_distance(&self, z: Complex64) -> f64 {
        self.punctures
            .iter()
            .map(|p| (z - p.point).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// In the region and at least `pole_margin` from every puncture.
    pub fn is_admissible(&self, z: Complex64) -> bool {
        self.contains(z) && self.puncture_distance(z) >= self.pole_margin * (1.0 - 1e-12)
    }

    /// Deterministic low-discrepancy sample of admissible points. Rectangles
    /// are sampled uniformly, annuli uniformly in area.
    pub fn samples(&self, n: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n);
        let mut k = 1u64;
        let max_tries = 64 * n as u64 + 64;
        while out.len() < n && k < max_tries {
            let (s, t) = (halton(k, 2), halton(k, 3));
            k += 1;
            let z = match self.kind {
                DomainKind::Rectangle { min, max } => {
                    Complex64::new(min.re + s * (max.re - min.re), min.im + t * (max.im - min.im))
                }
                DomainKind::Annulus { center, inner, outer } => {
                    let r = (inner * inner + s * (outer * outer - inner * inner)).sqrt();
                    center + Complex64::from_polar(r, TAU * t)
                }
            };
            if self.is_admissible(z) {
                out.push(z);
            }
        }
        out
    }

    /// Punctures `z` is close enough to for the removable extension.
    fn removable_near(&self, z: Complex64) -> Option<Complex64> {
        let radius = 0.5 * self.pole_margin;
        self.punctures
            .iter()
            .filter(|p| p.nu_pole_order > 0)
            .find(|p| (z - p.point).norm() <= 0.25 * radius)
            .map(|p| p.point)
    }
}

/// Radical inverse of `k` in the given base.
pub fn halton(mut k: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub quadrature: f64,
    pub isotropy: f64,
    pub nonvanish: f64,
    pub period: f64,
    pub integrability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-10,
            isotropy: 1e-10,
            nonvanish: 1e-8,
            period: 1e-8,
            integrability: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Repr {
    MuNu { mu: ComplexExpr, nu: ComplexExpr },
    OmegaTriple,
}

#[derive(Clone, Debug)]
struct Derivs {
    w_z: Option<[ComplexExpr; 3]>,
    w_zbar: Option<[ComplexExpr; 3]>,
}

/// Weierstrass data with its domain.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    repr: Repr,
    w: [ComplexExpr; 3],
    domain: Domain,
    derivs: Derivs,
}

fn triple_derivs(w: &[ComplexExpr; 3]) -> Derivs {
    let take = |which| -> Option<[ComplexExpr; 3]> {
        let a = wirtinger(&w[0], which).ok()?;
        let b = wirtinger(&w[1], which).ok()?;
        let c = wirtinger(&w[2], which).ok()?;
        Some([a, b, c])
    };
    Derivs {
        w_z: take(Wrt::Z),
        w_zbar: take(Wrt::Zbar),
    }
}

/// `((1 - nu^2)/2, i(1 + nu^2)/2, nu) mu` as expressions.
pub fn munu_triple(mu: &ComplexExpr, nu: &ComplexExpr) -> [ComplexExpr; 3] {
    use ComplexExpr as E;
    let one = E::real(1.0);
    let half = E::real(0.5);
    let nu2 = E::pow(nu, 2);
    let w1 = E::mul(&E::mul(&half, &E::sub(&one, &nu2)), mu);
    let w2 = E::mul(&E::mul(&E::lit(Complex64::new(0.0, 0.5)), &E::add(&one, &nu2)), mu);
    let w3 = E::mul(nu, mu);
    [w1, w2, w3]
}

impl WeierstrassData {
    /// Holomorphic `(mu, nu)` data. Both expressions must be free of `zbar`.
    pub fn munu(mu: ComplexExpr, nu: ComplexExpr, domain: Domain) -> Result<Self> {
        if !mu.is_holomorphic() || !nu.is_holomorphic() {
            return Err(Error::NotHolomorphic);
        }
        domain.check()?;
        let w = munu_triple(&mu, &nu);
        let derivs = triple_derivs(&w);
        Ok(WeierstrassData {
            repr: Repr::MuNu { mu, nu },
            w,
            domain,
            derivs,
        })
    }

    /// General triple, possibly depending on `zbar`.
    pub fn omega_triple(w: [ComplexExpr; 3], domain: Domain) -> Result<Self> {
        domain.check()?;
        let derivs = triple_derivs(&w);
        Ok(WeierstrassData {
            repr: Repr::OmegaTriple,
            w,
            domain,
            derivs,
        })
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_munu(&self) -> bool {
        matches!(self.repr, Repr::MuNu { .. })
    }

    /// Coefficient expressions of the triple.
    pub fn exprs(&self) -> &[ComplexExpr; 3] {
        &self.w
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        domain.check()?;
        let mut d = self.clone();
        d.domain = domain;
        Ok(d)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.w.iter().all(|e| e.is_holomorphic())
    }

    /// Data multiplied by a complex constant. `(mu, nu)` data scales `mu`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let k = ComplexExpr::lit(c);
        match &self.repr {
            Repr::MuNu { mu, nu } => {
                WeierstrassData::munu(ComplexExpr::mul(&k, mu), nu.clone(), self.domain.clone())
                    .expect("scaling keeps holomorphy")
            }
            Repr::OmegaTriple => {
                let w = self.w.clone().map(|e| ComplexExpr::mul(&k, &e));
                WeierstrassData::omega_triple(w, self.domain.clone()).expect("domain already checked")
            }
        }
    }

    fn eval3(&self, exprs: &[ComplexExpr; 3], z: Complex64) -> Result<C3> {
        Ok([exprs[0].eval(z)?, exprs[1].eval(z)?, exprs[2].eval(z)?])
    }

    fn guarded(&self, z: Complex64, direct: Result<C3>, deriv: bool, exprs: &[ComplexExpr; 3]) -> Result<C3> {
        let finite = matches!(&direct, Ok(v) if v.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        if finite {
            return direct;
        }
        if matches!(direct, Err(Error::PoleSignal)) || direct.is_ok() {
            if let (true, Some(p)) = (self.is_holomorphic(), self.domain.removable_near(z)) {
                return self.cauchy_extension(exprs, p, z, deriv);
            }
        }
        match direct {
            Ok(_) => Err(Error::PoleSignal),
            Err(e) => Err(e),
        }
    }

    /// Values (or derivatives) of a holomorphic triple near a removable point
    /// from the Cauchy integral over a circle around it.
    fn cauchy_extension(&self, exprs: &[ComplexExpr; 3], p: Complex64, z: Complex64, deriv: bool) -> Result<C3> {
        let rho = 0.5 * self.domain.pole_margin;
        let mut acc = [ZERO; 3];
        for k in 0..EXTENSION_NODES {
            let e = Complex64::from_polar(1.0, TAU * k as f64 / EXTENSION_NODES as f64);
            let zeta = p + rho * e;
            let f = self.eval3(exprs, zeta)?;
            let d = zeta - z;
            let weight = if deriv { rho * e / (d * d) } else { rho * e / d };
            for i in 0..3 {
                acc[i] += f[i] * weight;
            }
        }
        Ok(acc.map(|a| a / EXTENSION_NODES as f64))
    }

    /// Triple at `z`. Holomorphic data is extended by continuity across
    /// declared points where `nu` has a pole.
    pub fn omega(&self, z: Complex64) -> Result<C3> {
        if !self.is_holomorphic() && self.domain.puncture_distance(z) < self.domain.pole_margin * (1.0 - 1e-9) {
            return Err(Error::PoleSignal);
        }
        self.guarded(z, self.eval3(&self.w, z), false, &self.w)
    }

    /// `d/dz` of the triple.
    pub fn omega_z(&self, z: Complex64) -> Result<C3> {
        match &self.derivs.w_z {
            Some(dw) => {
                if self.is_holomorphic() {
                    let direct = self.eval3(dw, z);
                    let finite = matches!(&direct, Ok(v) if v.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
                    if !finite {
                        if let Some(p) = self.domain.removable_near(z) {
                            return self.cauchy_extension(&self.w, p, z, true);
                        }
                    }
                    direct
                } else {
                    self.eval3(dw, z)
                }
            }
            None => Ok(self.fd_wirtinger(z)?.0),
        }
    }

    /// `d/dzbar` of the triple; exactly zero for holomorphic data.
    pub fn omega_zbar(&self, z: Complex64) -> Result<C3> {
        if self.is_holomorphic() {
            return Ok([ZERO; 3]);
        }
        match &self.derivs.w_zbar {
            Some(dw) => self.eval3(dw, z),
            None => Ok(self.fd_wirtinger(z)?.1),
        }
    }

    /// Central differences in x and y with step `1e-5 (1 + |z|)`.
    fn fd_wirtinger(&self, z: Complex64) -> Result<(C3, C3)> {
        let h = 1e-5 * (1.0 + z.norm());
        let xp = self.eval3(&self.w, z + h)?;
        let xm = self.eval3(&self.w, z - h)?;
        let yp = self.eval3(&self.w, z + I * h)?;
        let ym = self.eval3(&self.w, z - I * h)?;
        let mut dz = [ZERO; 3];
        let mut dzb = [ZERO; 3];
        for i in 0..3 {
            let fx = (xp[i] - xm[i]) / (2.0 * h);
            let fy = (yp[i] - ym[i]) / (2.0 * h);
            dz[i] = 0.5 * (fx - I * fy);
            dzb[i] = 0.5 * (fx + I * fy);
        }
        Ok((dz, dzb))
    }
}

pub fn norm3_sqr(w: &C3) -> f64 {
    w[0].norm_sqr() + w[1].norm_sqr() + w[2].norm_sqr()
}

pub fn norm3(w: &C3) -> f64 {
    norm3_sqr(w).sqrt()
}

pub fn isotropy(w: &C3) -> Complex64 {
    w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
}

/// Evaluates `(mu, nu)` data through the recovery formula.
pub fn omega_from_munu(d: &WeierstrassData, z: Complex64) -> Result<C3> {
    if !d.is_munu() {
        return Err(Error::Invalid("expected (mu, nu) data".into()));
    }
    d.omega(z)
}

/// `mu_-`, `nu_-`, `mu_+`, `nu_+` at a point. A `nu` is `None` where its
/// `mu` vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuNuValues {
    pub mu_minus: Complex64,
    pub nu_minus: Option<Complex64>,
    pub mu_plus: Complex64,
    pub nu_plus: Option<Complex64>,
}

impl MuNuValues {
    pub fn from_triple(w: &C3, z: Complex64) -> Result<Self> {
        let mu_minus = w[0] - I * w[1];
        let mu_plus = w[0] + I * w[1];
        let scale = norm3(w);
        let small = |m: Complex64| m.norm() <= 1e-12 * scale || m.norm() < crate::expr::POLE_THRESHOLD;
        if small(mu_minus) && small(mu_plus) {
            return Err(Error::BothMuVanish(z));
        }
        let nu = |m: Complex64| if small(m) { None } else { Some(w[2] / m) };
        Ok(MuNuValues {
            mu_minus,
            nu_minus: nu(mu_minus),
            mu_plus,
            nu_plus: nu(mu_plus),
        })
    }
}

/// For `(mu, nu)` data the pair is evaluated directly, with `mu_+ = -mu nu^2`
/// and `nu_+ = -1/nu`; elsewhere, and where direct evaluation fails, it is
/// read off the triple.
pub fn munu_from_omega(d: &WeierstrassData, z: Complex64) -> Result<MuNuValues> {
    if let Repr::MuNu { mu, nu } = &d.repr {
        if let (Ok(m), Ok(n)) = (mu.eval(z), nu.eval(z)) {
            if m.is_finite() && n.is_finite() && m != ZERO {
                return Ok(MuNuValues {
                    mu_minus: m,
                    nu_minus: Some(n),
                    mu_plus: -m * n * n,
                    nu_plus: (n != ZERO).then(|| -1.0 / n),
                });
            }
        }
    }
    MuNuValues::from_triple(&d.omega(z)?, z)
}

/// Gauss map from a triple: the `nu_-` formula where `|mu_-| >= |mu_+|`, the
/// equivalent `nu_+` formula otherwise.
pub fn gauss_from_triple(w: &C3, z: Complex64) -> Result<R3> {
    let m = MuNuValues::from_triple(w, z)?;
    if m.mu_minus.norm() >= m.mu_plus.norm() {
        let nu = m.nu_minus.expect("larger mu is nonzero");
        let r2 = nu.norm_sqr();
        Ok([2.0 * nu.re / (r2 + 1.0), 2.0 * nu.im / (r2 + 1.0), (r2 - 1.0) / (r2 + 1.0)])
    } else {
        let nu = m.nu_plus.expect("larger mu is nonzero");
        let r2 = nu.norm_sqr();
        Ok([-2.0 * nu.re / (1.0 + r2), 2.0 * nu.im / (1.0 + r2), (1.0 - r2) / (1.0 + r2)])
    }
}

pub fn gauss_map(d: &WeierstrassData, z: Complex64) -> Result<R3> {
    gauss_from_triple(&d.omega(z)?, z)
}

/// A point of the projective line in the affine chart `[1 : z]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cp1Point {
    Finite(Complex64),
    Infinity,
}

/// Inverse stereographic projection from the north pole.
pub fn to_sphere(p: Cp1Point) -> R3 {
    match p {
        Cp1Point::Infinity => [0.0, 0.0, 1.0],
        Cp1Point::Finite(z) => {
            let r2 = z.norm_sqr();
            if !r2.is_finite() {
                return [0.0, 0.0, 1.0];
            }
            let d = r2 + 1.0;
            [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
        }
    }
}

/// Stereographic projection from the north pole.
pub fn to_cp1(x: R3) -> Result<Cp1Point> {
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NonUnitInput(n));
    }
    let [x1, x2, x3] = x.map(|c| c / n);
    if x3 <= 0.0 {
        Ok(Cp1Point::Finite(Complex64::new(x1, x2) / (1.0 - x3)))
    } else {
        let den = Complex64::new(x1, -x2);
        if den.norm() == 0.0 {
            Ok(Cp1Point::Infinity)
        } else {
            Ok(Cp1Point::Finite((1.0 + x3) / den))
        }
    }
}

/// The Veronese map onto the isotropic conic.
pub fn veronese(z0: Complex64, z1: Complex64) -> C3 {
    [z0 * z0 - z1 * z1, I * (z0 * z0 + z1 * z1), 2.0 * z0 * z1]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PunctureCheck {
    pub point: Complex64,
    pub declared_order: u32,
    pub ord_mu: Option<i32>,
    pub ord_nu: Option<i32>,
    pub condition_ok: bool,
    pub excluded: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_isotropy_residual: f64,
    pub min_omega_norm: f64,
    pub punctures: Vec<PunctureCheck>,
    pub pass: bool,
    pub reasons: Vec<String>,
    pub notes: Vec<String>,
}

/// Checks isotropy and nonvanishing on `samples` quasi-random points and,
/// for `(mu, nu)` data, the order condition at every declared puncture.
pub fn validate(d: &WeierstrassData, samples: usize, tol: &Tolerances) -> ValidationReport {
    let pts = d.domain.samples(samples.max(1));
    let evals = exec::map(&pts, |&z| d.omega(z).map(|w| (isotropy(&w).norm(), norm3(&w))));
    let mut reasons = Vec::new();
    let mut notes = Vec::new();
    let mut max_iso = 0.0f64;
    let mut min_norm = f64::INFINITY;
    for (z, r) in pts.iter().zip(&evals) {
        match r {
            Ok((iso, n)) => {
                let rel = if *n > 0.0 { iso / (n * n) } else { f64::INFINITY };
                max_iso = max_iso.max(rel);
                min_norm = min_norm.min(*n);
            }
            Err(e) => {
                if reasons.len() < 8 {
                    reasons.push(format!("evaluation failed at {z}: {e}"));
                }
                min_norm = 0.0;
            }
        }
    }
    if pts.is_empty() {
        reasons.push("no admissible sample points".into());
    }
    if max_iso > tol.isotropy {
        reasons.push(format!("isotropy residual {max_iso:.3e} exceeds {:.1e}", tol.isotropy));
    }
    if min_norm < tol.nonvanish {
        reasons.push(format!("|w| drops to {min_norm:.3e}, below {:.1e}", tol.nonvanish));
    }

    let mut checks = Vec::new();
    for p in &d.domain.punctures {
        let mut c = PunctureCheck {
            point: p.point,
            declared_order: p.nu_pole_order,
            ord_mu: None,
            ord_nu: None,
            condition_ok: true,
            excluded: p.nu_pole_order == 0,
            note: String::new(),
        };
        match &d.repr {
            Repr::MuNu { mu, nu } => {
                let om = order_at(mu, p.point);
                let on = order_at(nu, p.point);
                c.ord_mu = om.as_ref().ok().map(|o| o.order);
                c.ord_nu = on.as_ref().ok().map(|o| o.order);
                if c.excluded {
                    c.note = "puncture excluded from M".into();
                } else {
                    let m = p.nu_pole_order as i32;
                    match (&om, &on) {
                        (Ok(a), Ok(b)) => {
                            c.condition_ok = b.order == -m && a.order == 2 * m;
                            if !c.condition_ok {
                                c.note = format!(
                                    "expected ord(mu) = {}, ord(nu) = {}; found {}, {}",
                                    2 * m,
                                    -m,
                                    a.order,
                                    b.order
                                );
                                reasons.push(format!("order condition fails at {}", p.point));
                            } else {
                                c.note = "ord(mu) = -2 ord(nu)".into();
                            }
                        }
                        (Err(e), _) | (_, Err(e)) => {
                            c.condition_ok = false;
                            c.note = format!("order estimate failed: {e}");
                            reasons.push(format!("order estimate failed at {}", p.point));
                        }
                    }
                }
            }
            Repr::OmegaTriple => {
                if c.excluded {
                    c.note = "puncture excluded from M".into();
                } else {
                    c.note = "order checks apply to (mu, nu) data only".into();
                }
            }
        }
        checks.push(c);
    }
    if !d.is_holomorphic() {
        notes.push("data depends on zbar; no extension inside pole_margin".into());
    }
    ValidationReport {
        samples: pts.len(),
        max_isotropy_residual: max_iso,
        min_omega_norm: min_norm,
        punctures: checks,
        pass: reasons.is_empty(),
        reasons,
        notes,
    }
}
