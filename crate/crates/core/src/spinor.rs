//! Spinor pairs `(u, v)` against the frame `sqrt(dz)`, the coordinate Dirac
//! operator, and the `GL(2, C)` action with its `R+ x SO(3)` shadow.
//!
//! The triple is recovered as `w = (u^2 - v^2, i(u^2 + v^2), 2uv)`, so
//! `mu_- = 2u^2`, `mu_+ = -2v^2` and `w3 = 2uv`.
//!
//! # Integrability in spinor form
//!
//! Write `A = u u_zbar`, `B = v v_zbar`, `C = u_zbar v + u v_zbar`. Then
//! `w_zbar = (2(A - B), 2i(A + B), 2C)` and the triple is integrable iff
//! every `w_zbar` component is real, that is iff
//!
//! * `A + conj(B) = 0` (its real part is `Re(A + B)`, its imaginary part
//!   `Im(A - B)`), and
//! * `Im C = 0`.
//!
//! The residual reported is `4 max(|A + conj B|, |Im C|)`. The triple-level
//! residual equals `4 max(|Re E|, |Im E|, |Im C|)` with `E = A + conj B`, so
//! the two agree within a factor `sqrt 2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::expr::{wirtinger, ComplexExpr, Wrt};
use crate::paths::{integrate_form, sample_grid, LoopSpec};
use crate::weierstrass::{norm3, veronese, Domain, DomainKind, WeierstrassData, C3};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const CONTINUATION_STEPS: usize = 64;

/// A closed axis-aligned rectangle, used as a simply connected chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Chart {
    pub min: Complex64,
    pub max: Complex64,
}

impl Chart {
    pub fn new(min: Complex64, max: Complex64) -> Result<Self> {
        if !(min.re < max.re && min.im < max.im) {
            return Err(Error::Invalid("chart needs min < max in both axes".into()));
        }
        Ok(Chart { min, max })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.min.re && z.re <= self.max.re && z.im >= self.min.im && z.im <= self.max.im
    }

    pub fn center(&self) -> Complex64 {
        0.5 * (self.min + self.max)
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        let x = p.re.clamp(self.min.re, self.max.re);
        let y = p.im.clamp(self.min.im, self.max.im);
        (Complex64::new(x, y) - p).norm()
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            self.min,
            Complex64::new(self.max.re, self.min.im),
            self.max,
            Complex64::new(self.min.re, self.max.im),
        ]
    }

    /// Chart-restricted domain used for sampling.
    pub fn as_domain(&self, margin: f64) -> Domain {
        Domain::rectangle(self.min, self.max).with_margin(margin)
    }
}

/// A chart inside the domain that avoids its holes: the rectangle itself
/// when it has no domain punctures, otherwise the part to the right of the
/// rightmost one; for an annulus, a rectangle to the right of the hole.
pub fn default_chart(domain: &Domain) -> Result<Chart> {
    match domain.kind {
        DomainKind::Rectangle { min, max } => {
            let holes: Vec<f64> = domain
                .punctures
                .iter()
                .filter(|p| p.nu_pole_order == 0)
                .map(|p| p.point.re + domain.pole_margin)
                .collect();
            if holes.is_empty() {
                return Chart::new(min, max);
            }
            let left = holes.into_iter().fold(f64::NEG_INFINITY, f64::max) + domain.pole_margin;
            Chart::new(Complex64::new(left, min.im), max)
        }
        DomainKind::Annulus { center, inner, outer } => {
            let h = 0.5 * (outer - inner);
            let x1 = (outer * outer - h * h).sqrt();
            let x0 = inner.max(domain.pole_margin);
            Chart::new(center + Complex64::new(x0, -h), center + Complex64::new(x1, h))
        }
    }
}

/// Checks that the chart lies in the domain and contains no hole.
fn check_chart(domain: &Domain, chart: &Chart) -> Result<()> {
    for p in &domain.punctures {
        if p.nu_pole_order == 0 && chart.distance_to(p.point) < domain.pole_margin {
            return Err(Error::NotSimplyConnected(p.point));
        }
    }
    match domain.kind {
        DomainKind::Rectangle { .. } => {
            if chart.corners().iter().any(|&c| !domain.contains(c)) {
                return Err(Error::Invalid("chart leaves the domain".into()));
            }
        }
        DomainKind::Annulus { center, inner, outer } => {
            if chart.distance_to(center) < inner {
                return Err(Error::NotSimplyConnected(center));
            }
            if chart.corners().iter().any(|&c| (c - center).norm() > outer) {
                return Err(Error::Invalid("chart leaves the domain".into()));
            }
        }
    }
    Ok(())
}

/// A 2x2 complex matrix `[[a, b], [c, d]]` acting on `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MoebiusAction {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusAction {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let t = MoebiusAction { a, b, c, d };
        let scale = [a, b, c, d].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if !(t.det().norm() > 1e-14 * scale) {
            return Err(Error::SingularMatrix);
        }
        Ok(t)
    }

    /// The quaternion `[[p, -conj q], [q, conj p]]`.
    pub fn quaternion(p: Complex64, q: Complex64) -> Result<Self> {
        Self::new(p, -q.conj(), q, p.conj())
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        MoebiusAction {
            a: one,
            b: ZERO,
            c: ZERO,
            d: one,
        }
    }

    /// Quaternion whose shadow is the rotation by `angle` about a
    /// coordinate axis (`'x'`, `'y'` or `'z'`).
    pub fn rotation(axis: char, angle: f64) -> Result<Self> {
        let (p, q) = match axis {
            'z' => (Complex64::from_polar(1.0, -0.5 * angle), ZERO),
            'y' => {
                let s = -0.5 * angle;
                (Complex64::new(s.cos(), 0.0), Complex64::new(s.sin(), 0.0))
            }
            'x' => {
                let s = 0.5 * angle;
                (Complex64::new(s.cos(), 0.0), Complex64::new(0.0, s.sin()))
            }
            other => return Err(Error::Invalid(format!("unknown rotation axis `{other}`"))),
        };
        Self::quaternion(p, q)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        MoebiusAction {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn neg(&self) -> Self {
        MoebiusAction {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn is_quaternionic(&self) -> bool {
        let scale = 1.0 + self.a.norm() + self.c.norm();
        (self.d - self.a.conj()).norm() <= 1e-12 * scale && (self.b + self.c.conj()).norm() <= 1e-12 * scale
    }

    /// Quaternion parameters `(p, q)` of `[[p, -conj q], [q, conj p]]`.
    pub fn quaternion_params(&self) -> Result<(Complex64, Complex64)> {
        if !self.is_quaternionic() {
            return Err(Error::NotQuaternionic);
        }
        Ok((self.a, self.c))
    }

    pub fn apply(&self, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
        (self.a * u + self.b * v, self.c * u + self.d * v)
    }

    /// Complex 3x3 matrix `M` with `w_T = M w` for the transformed pair.
    pub fn triple_matrix(&self) -> [[Complex64; 3]; 3] {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        // u^2 = (w1 - i w2)/2, v^2 = -(w1 + i w2)/2, uv = w3/2
        let uu = [Complex64::new(0.5, 0.0), -0.5 * I, ZERO];
        let vv = [Complex64::new(-0.5, 0.0), -0.5 * I, ZERO];
        let uv = [ZERO, ZERO, Complex64::new(0.5, 0.0)];
        let comb = |x: Complex64, y: Complex64, z: Complex64| -> [Complex64; 3] {
            [0, 1, 2].map(|j| x * uu[j] + y * uv[j] + z * vv[j])
        };
        let ut2 = comb(a * a, 2.0 * a * b, b * b);
        let vt2 = comb(c * c, 2.0 * c * d, d * d);
        let utvt = comb(a * c, a * d + b * c, b * d);
        [
            [0, 1, 2].map(|j| ut2[j] - vt2[j]),
            [0, 1, 2].map(|j| I * (ut2[j] + vt2[j])),
            [0, 1, 2].map(|j| 2.0 * utvt[j]),
        ]
    }
}

/// The real 3x3 matrix by which a quaternionic action moves the triple.
pub fn so3_shadow(t: &MoebiusAction) -> Result<[[f64; 3]; 3]> {
    let (a, b) = t.quaternion_params()?;
    let s = a * a - b * b;
    let p = a * a + b * b;
    let ab_bar = a.conj() * b;
    let ab = a * b;
    Ok([
        [s.re, s.im, -2.0 * ab_bar.re],
        [-p.im, p.re, -2.0 * ab_bar.im],
        [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()],
    ])
}

#[derive(Clone, Debug)]
enum Source {
    Exprs {
        u: ComplexExpr,
        v: ComplexExpr,
        dz: Option<[ComplexExpr; 2]>,
        dzbar: Option<[ComplexExpr; 2]>,
    },
    Weierstrass {
        data: WeierstrassData,
        anchor: (Complex64, Complex64),
    },
    Transformed {
        inner: Box<SpinorRep>,
        t: MoebiusAction,
    },
}

/// Coefficients `(u, v)` of a spinor pair on a chart.
#[derive(Clone, Debug)]
pub struct SpinorRep {
    source: Source,
    pub chart: Chart,
    pub branch_base: Complex64,
}

/// Local square roots: `u = sqrt(mu_-/2)` when `|mu_-| >= |mu_+|`, otherwise
/// `v = sqrt(-mu_+/2)`; the other coefficient follows from `uv = w3/2`.
fn local_pair(w: &C3) -> Result<(Complex64, Complex64)> {
    let mu_m = w[0] - I * w[1];
    let mu_p = w[0] + I * w[1];
    if mu_m.norm() >= mu_p.norm() {
        let u = (0.5 * mu_m).sqrt();
        if u == ZERO {
            return Err(Error::BranchAnchorInvalid("mu+ and mu- both vanish".into()));
        }
        Ok((u, w[2] / (2.0 * u)))
    } else {
        let v = (-0.5 * mu_p).sqrt();
        Ok((w[2] / (2.0 * v), v))
    }
}

fn pair_dist(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    ((a.0 - b.0).norm_sqr() + (a.1 - b.1).norm_sqr()).sqrt()
}

fn pair_norm(a: (Complex64, Complex64)) -> f64 {
    (a.0.norm_sqr() + a.1.norm_sqr()).sqrt()
}

impl SpinorRep {
    /// Spinor pair given by expressions.
    pub fn from_exprs(u: ComplexExpr, v: ComplexExpr, chart: Chart) -> Self {
        let pair = |w| -> Option<[ComplexExpr; 2]> { Some([wirtinger(&u, w).ok()?, wirtinger(&v, w).ok()?]) };
        let (dz, dzbar) = (pair(Wrt::Z), pair(Wrt::Zbar));
        SpinorRep {
            source: Source::Exprs { u, v, dz, dzbar },
            branch_base: chart.center(),
            chart,
        }
    }

    fn check_in_chart(&self, z: Complex64) -> Result<()> {
        let slack = 1e-12 * (1.0 + z.norm());
        if self.chart.distance_to(z) > slack {
            return Err(Error::Invalid(format!("{z} lies outside the spinor chart")));
        }
        Ok(())
    }

    /// `(u, v)` at `z`. Square roots are continued along the segment from the
    /// branch base, choosing at each step the sign closest to the previous pair.
    pub fn uv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        match &self.source {
            Source::Exprs { u, v, .. } => Ok((u.eval(z)?, v.eval(z)?)),
            Source::Weierstrass { data, anchor } => {
                self.check_in_chart(z)?;
                let base = self.branch_base;
                if z == base {
                    return Ok(*anchor);
                }
                let mut prev = *anchor;
                let mut t0 = 0.0;
                for k in 1..=CONTINUATION_STEPS {
                    let t1 = k as f64 / CONTINUATION_STEPS as f64;
                    prev = continue_step(data, base, z, t0, t1, prev, 0)?;
                    t0 = t1;
                }
                Ok(prev)
            }
            Source::Transformed { inner, t } => {
                let (u, v) = inner.uv(z)?;
                Ok(t.apply(u, v))
            }
        }
    }

    /// `(u, v)` and their derivatives with respect to `which`.
    fn with_derivs(&self, z: Complex64, which: Wrt) -> Result<((Complex64, Complex64), (Complex64, Complex64))> {
        match &self.source {
            Source::Exprs { u, v, dz, dzbar } => {
                let pair = (u.eval(z)?, v.eval(z)?);
                let ds = match which {
                    Wrt::Z => dz,
                    Wrt::Zbar => dzbar,
                };
                let d = match ds {
                    Some([du, dv]) => (du.eval(z)?, dv.eval(z)?),
                    None => {
                        let h = 1e-5 * (1.0 + z.norm());
                        let fx_u = (u.eval(z + h)? - u.eval(z - h)?) / (2.0 * h);
                        let fy_u = (u.eval(z + I * h)? - u.eval(z - I * h)?) / (2.0 * h);
                        let fx_v = (v.eval(z + h)? - v.eval(z - h)?) / (2.0 * h);
                        let fy_v = (v.eval(z + I * h)? - v.eval(z - I * h)?) / (2.0 * h);
                        let s = if which == Wrt::Z { -I } else { I };
                        (0.5 * (fx_u + s * fy_u), 0.5 * (fx_v + s * fy_v))
                    }
                };
                Ok((pair, d))
            }
            Source::Weierstrass { data, .. } => {
                let (u, v) = self.uv(z)?;
                let dw = match which {
                    Wrt::Z => data.omega_z(z)?,
                    Wrt::Zbar => data.omega_zbar(z)?,
                };
                let (du, dv) = if u.norm() >= v.norm() {
                    let du = (dw[0] - I * dw[1]) / (4.0 * u);
                    (du, (0.5 * dw[2] - du * v) / u)
                } else {
                    let dv = -(dw[0] + I * dw[1]) / (4.0 * v);
                    ((0.5 * dw[2] - dv * u) / v, dv)
                };
                Ok(((u, v), (du, dv)))
            }
            Source::Transformed { inner, t } => {
                let ((u, v), (du, dv)) = inner.with_derivs(z, which)?;
                Ok((t.apply(u, v), t.apply(du, dv)))
            }
        }
    }

    /// `u^2`, `v^2` and `uv`, which are single valued.
    pub fn quadratic(&self, z: Complex64) -> Result<[Complex64; 3]> {
        match &self.source {
            Source::Weierstrass { data, .. } => {
                let w = data.omega(z)?;
                Ok([0.5 * (w[0] - I * w[1]), -0.5 * (w[0] + I * w[1]), 0.5 * w[2]])
            }
            Source::Transformed { inner, t } => {
                let [uu, vv, uv] = inner.quadratic(z)?;
                Ok([
                    t.a * t.a * uu + 2.0 * t.a * t.b * uv + t.b * t.b * vv,
                    t.c * t.c * uu + 2.0 * t.c * t.d * uv + t.d * t.d * vv,
                    t.a * t.c * uu + (t.a * t.d + t.b * t.c) * uv + t.b * t.d * vv,
                ])
            }
            Source::Exprs { .. } => {
                let (u, v) = self.uv(z)?;
                Ok([u * u, v * v, u * v])
            }
        }
    }

    /// Domain on which the quadratic forms may be integrated.
    fn form_domain(&self) -> Option<&Domain> {
        match &self.source {
            Source::Weierstrass { data, .. } => Some(data.domain()),
            Source::Transformed { inner, .. } => inner.form_domain(),
            Source::Exprs { .. } => None,
        }
    }
}

fn continue_step(
    data: &WeierstrassData,
    base: Complex64,
    z: Complex64,
    t0: f64,
    t1: f64,
    prev: (Complex64, Complex64),
    depth: u32,
) -> Result<(Complex64, Complex64)> {
    let p = base + (z - base) * t1;
    let cand = local_pair(&data.omega(p)?)?;
    let flipped = (-cand.0, -cand.1);
    let (d1, d2) = (pair_dist(cand, prev), pair_dist(flipped, prev));
    let (best, dist) = if d1 <= d2 { (cand, d1) } else { (flipped, d2) };
    if dist <= 0.5 * pair_norm(prev) || depth >= 16 {
        return Ok(best);
    }
    let tm = 0.5 * (t0 + t1);
    let mid = continue_step(data, base, z, t0, tm, prev, depth + 1)?;
    continue_step(data, base, z, tm, t1, mid, depth + 1)
}

/// Spinor pair of the data on a simply connected chart, with the principal
/// square root at `branch_base`.
pub fn spinor_from_weierstrass(d: &WeierstrassData, chart: Chart, branch_base: Complex64) -> Result<SpinorRep> {
    check_chart(d.domain(), &chart)?;
    if !chart.contains(branch_base) {
        return Err(Error::BranchAnchorInvalid(format!("{branch_base} is outside the chart")));
    }
    let w = d
        .omega(branch_base)
        .map_err(|e| Error::BranchAnchorInvalid(format!("data cannot be evaluated at {branch_base}: {e}")))?;
    let anchor = local_pair(&w)?;
    Ok(SpinorRep {
        source: Source::Weierstrass {
            data: d.clone(),
            anchor,
        },
        chart,
        branch_base,
    })
}

/// `w = (u^2 - v^2, i(u^2 + v^2), 2uv)` at `z`.
pub fn weierstrass_from_spinor(sp: &SpinorRep, z: Complex64) -> Result<C3> {
    let (u, v) = sp.uv(z)?;
    Ok(veronese(u, v))
}

/// `(u_zbar, v_zbar) / ||w||`: coefficients against `sqrt(dzbar)`.
pub fn dirac(sp: &SpinorRep, z: Complex64) -> Result<(Complex64, Complex64)> {
    let ((u, v), (du, dv)) = sp.with_derivs(z, Wrt::Zbar)?;
    let n = norm3(&veronese(u, v));
    Ok((du / n, dv / n))
}

/// The conjugate operator `f sqrt(dzbar) -> (f_z / ||w||) sqrt(dz)`.
pub fn dirac_bar(sp: &SpinorRep, z: Complex64) -> Result<(Complex64, Complex64)> {
    let ((u, v), (du, dv)) = sp.with_derivs(z, Wrt::Z)?;
    let n = norm3(&veronese(u, v));
    Ok((du / n, dv / n))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinorLoopPeriod {
    pub label: String,
    pub uu: Complex64,
    pub vv: Complex64,
    pub uv: Complex64,
    /// `|conj(∮u^2) - ∮v^2|`.
    pub conj_defect: f64,
    pub re_uv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinorPeriodReport {
    pub loops: Vec<SpinorLoopPeriod>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Periods of `u^2 dz`, `v^2 dz` and `uv dz`. Passes when `∮v^2` is the
/// conjugate of `∮u^2` and `∮uv` is imaginary, within `tol`.
pub fn spinor_period_check(sp: &SpinorRep, loops: &[LoopSpec], quad_tol: f64, tol: f64) -> Result<SpinorPeriodReport> {
    let out = exec::try_map(loops, |l| {
        if let Some(dom) = sp.form_domain() {
            l.path.check_clearance(dom)?;
        }
        let [uu, vv, uv] = integrate_form(&|z| sp.quadratic(z), &l.path, quad_tol)?;
        Ok::<_, Error>(SpinorLoopPeriod {
            label: l.label.clone(),
            uu,
            vv,
            uv,
            conj_defect: (uu.conj() - vv).norm(),
            re_uv: uv.re.abs(),
        })
    })?;
    let pass = out.iter().all(|l| l.conj_defect <= tol && l.re_uv <= tol);
    Ok(SpinorPeriodReport {
        loops: out,
        tolerance: tol,
        pass,
    })
}

/// `4 max(|A + conj B|, |Im C|)` per point, see the module docs.
pub fn spinor_integrability_at(sp: &SpinorRep, z: Complex64) -> Result<f64> {
    let ((u, v), (du, dv)) = sp.with_derivs(z, Wrt::Zbar)?;
    let a = u * du;
    let b = v * dv;
    let c = du * v + u * dv;
    Ok(4.0 * (a + b.conj()).norm().max(c.im.abs()))
}

/// Largest spinor integrability residual over an `n` x `n` grid of the chart.
pub fn spinor_integrability_residual(sp: &SpinorRep, n: usize) -> Result<f64> {
    let mut dom = sp.chart.as_domain(1e-3);
    if let Some(d) = sp.form_domain() {
        dom.punctures = d.punctures.clone();
        dom.pole_margin = d.pole_margin;
    }
    let pts = sample_grid(&dom, n);
    let vals = exec::try_map(&pts, |&z| spinor_integrability_at(sp, z))?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Transformed spinor pair `(a u + b v, c u + d v)`.
pub fn act_spinor(sp: &SpinorRep, t: &MoebiusAction) -> SpinorRep {
    SpinorRep {
        chart: sp.chart,
        branch_base: sp.branch_base,
        source: Source::Transformed {
            inner: Box::new(sp.clone()),
            t: *t,
        },
    }
}

/// Transformed data: the triple of the transformed spinor pair, written in
/// closed form as a linear combination of the original triple.
pub fn act_data(d: &WeierstrassData, t: &MoebiusAction) -> Result<WeierstrassData> {
    MoebiusAction::new(t.a, t.b, t.c, t.d)?;
    let m = t.triple_matrix();
    let w = d.exprs();
    let rows = m.map(|row| {
        let mut acc: Option<ComplexExpr> = None;
        for j in 0..3 {
            if row[j] == ZERO {
                continue;
            }
            let term = ComplexExpr::mul(&ComplexExpr::lit(row[j]), &w[j]);
            acc = Some(match acc {
                None => term,
                Some(s) => ComplexExpr::add(&s, &term),
            });
        }
        acc.unwrap_or_else(|| ComplexExpr::real(0.0))
    });
    WeierstrassData::omega_triple(rows, d.domain().clone())
}
