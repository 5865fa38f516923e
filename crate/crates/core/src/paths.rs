//! Contour integration of (1,0)-forms and the period and integrability checks.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::weierstrass::{Domain, DomainKind, Tolerances, WeierstrassData, C3};

const I: Complex64 = Complex64::new(0.0, 1.0);
pub const MAX_DEPTH: u32 = 40;

/// A piecewise smooth contour. Orientation follows parameter order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PathSpec {
    Polyline { vertices: Vec<Complex64> },
    Arc { center: Complex64, radius: f64, start: f64, end: f64 },
    Chain { parts: Vec<PathSpec> },
}

impl PathSpec {
    pub fn segment(a: Complex64, b: Complex64) -> Self {
        PathSpec::Polyline { vertices: vec![a, b] }
    }

    pub fn polyline(vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Invalid("polyline needs at least two vertices".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("consecutive polyline vertices coincide".into()));
        }
        Ok(PathSpec::Polyline { vertices })
    }

    pub fn arc(center: Complex64, radius: f64, start: f64, end: f64) -> Self {
        PathSpec::Arc { center, radius, start, end }
    }

    pub fn start(&self) -> Complex64 {
        match self {
            PathSpec::Polyline { vertices } => vertices[0],
            PathSpec::Arc { center, radius, start, .. } => center + Complex64::from_polar(*radius, *start),
            PathSpec::Chain { parts } => parts.first().map(|p| p.start()).unwrap_or_default(),
        }
    }

    pub fn end(&self) -> Complex64 {
        match self {
            PathSpec::Polyline { vertices } => *vertices.last().unwrap(),
            PathSpec::Arc { center, radius, end, .. } => center + Complex64::from_polar(*radius, *end),
            PathSpec::Chain { parts } => parts.last().map(|p| p.end()).unwrap_or_default(),
        }
    }

    pub fn reversed(&self) -> Self {
        match self {
            PathSpec::Polyline { vertices } => PathSpec::Polyline {
                vertices: vertices.iter().rev().copied().collect(),
            },
            PathSpec::Arc { center, radius, start, end } => PathSpec::Arc {
                center: *center,
                radius: *radius,
                start: *end,
                end: *start,
            },
            PathSpec::Chain { parts } => PathSpec::Chain {
                parts: parts.iter().rev().map(|p| p.reversed()).collect(),
            },
        }
    }

    /// Smooth pieces in order.
    fn pieces(&self, out: &mut Vec<Piece>) {
        match self {
            PathSpec::Polyline { vertices } => {
                for w in vertices.windows(2) {
                    if w[0] != w[1] {
                        out.push(Piece::Segment(w[0], w[1]));
                    }
                }
            }
            PathSpec::Arc { center, radius, start, end } => {
                if start != end {
                    out.push(Piece::Arc(*center, *radius, *start, *end));
                }
            }
            PathSpec::Chain { parts } => parts.iter().for_each(|p| p.pieces(out)),
        }
    }

    /// Smallest distance from the path to `p`.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        let mut ps = Vec::new();
        self.pieces(&mut ps);
        ps.iter().map(|pc| pc.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Points along the path, `per_piece` + 1 per smooth piece.
    pub fn trace(&self, per_piece: usize) -> Vec<Complex64> {
        let mut ps = Vec::new();
        self.pieces(&mut ps);
        let mut out = Vec::new();
        for pc in ps {
            for k in 0..=per_piece {
                out.push(pc.at(k as f64 / per_piece as f64));
            }
        }
        out
    }

    /// Checks that the path stays in the domain and keeps `pole_margin` from
    /// every puncture.
    pub fn check_clearance(&self, domain: &Domain) -> Result<()> {
        let blocked = |reason: String| Error::PathBlocked {
            from: self.start(),
            to: self.end(),
            reason,
        };
        for p in &domain.punctures {
            let d = self.distance_to(p.point);
            if d < domain.pole_margin * (1.0 - 1e-9) {
                return Err(blocked(format!(
                    "passes within {d:.3e} of the puncture {} (margin {})",
                    p.point, domain.pole_margin
                )));
            }
        }
        if let DomainKind::Annulus { center, inner, .. } = domain.kind {
            if self.distance_to(center) < inner * (1.0 - 1e-9) {
                return Err(blocked("enters the inner disk of the annulus".into()));
            }
        }
        if let Some(z) = self.trace(64).into_iter().find(|z| !domain.contains(*z)) {
            return Err(blocked(format!("leaves the domain near {z}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Segment(Complex64, Complex64),
    Arc(Complex64, f64, f64, f64),
}

impl Piece {
    fn at(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Segment(a, b) => a + (b - a) * s,
            Piece::Arc(c, r, t0, t1) => c + Complex64::from_polar(r, t0 + (t1 - t0) * s),
        }
    }

    fn distance_to(&self, p: Complex64) -> f64 {
        match *self {
            Piece::Segment(a, b) => {
                let d = b - a;
                let s = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (a + d * s - p).norm()
            }
            Piece::Arc(c, r, t0, t1) => {
                let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                let ends = (self.at(0.0) - p).norm().min((self.at(1.0) - p).norm());
                let v = p - c;
                if v.norm() == 0.0 {
                    return r;
                }
                let ang = v.arg();
                // is some representative of ang + 2 pi k inside [lo, hi]?
                let k = ((lo - ang) / TAU).ceil();
                if ang + k * TAU <= hi {
                    (v.norm() - r).abs()
                } else {
                    ends
                }
            }
        }
    }

    /// Parameter interval, tangent map and starting panel count.
    fn integrand_setup(&self) -> (f64, f64, usize) {
        match *self {
            Piece::Segment(..) => (0.0, 1.0, 4),
            Piece::Arc(_, _, t0, t1) => (t0, t1, ((t1 - t0).abs() / FRAC_PI_4).ceil().max(1.0) as usize),
        }
    }

    fn point_and_tangent(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            Piece::Segment(a, b) => (a + (b - a) * t, b - a),
            Piece::Arc(c, r, _, _) => {
                let e = Complex64::from_polar(r, t);
                (c + e, I * e)
            }
        }
    }
}

/// A closed contour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub label: String,
    pub path: PathSpec,
}

impl LoopSpec {
    /// Full counterclockwise circle.
    pub fn circle(label: impl Into<String>, center: Complex64, radius: f64) -> Self {
        LoopSpec {
            label: label.into(),
            path: PathSpec::arc(center, radius, 0.0, TAU),
        }
    }

    /// Closed polygon through `vertices`; the first vertex is appended at the end.
    pub fn polygon(label: impl Into<String>, mut vertices: Vec<Complex64>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Invalid("polygon needs at least three vertices".into()));
        }
        vertices.push(vertices[0]);
        Ok(LoopSpec {
            label: label.into(),
            path: PathSpec::polyline(vertices)?,
        })
    }
}

/// One counterclockwise circle around each puncture. A puncture in the hole
/// of an annulus gets the circle through the middle of the annulus.
pub fn puncture_loops(domain: &Domain) -> Vec<LoopSpec> {
    domain
        .punctures
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let label = format!("around #{k} ({}, {})", p.point.re, p.point.im);
            if let DomainKind::Annulus { center, inner, outer } = domain.kind {
                if (p.point - center).norm() < inner {
                    return LoopSpec::circle(label, center, 0.5 * (inner + outer));
                }
            }
            let others = domain
                .punctures
                .iter()
                .filter(|q| q.point != p.point)
                .map(|q| (q.point - p.point).norm())
                .fold(f64::INFINITY, f64::min);
            let r = (2.0 * domain.pole_margin).min(0.5 * others);
            LoopSpec::circle(label, p.point, r)
        })
        .collect()
}

fn max_abs<const K: usize>(v: &[Complex64; K]) -> f64 {
    v.iter()
        .map(|c| if c.re.is_finite() && c.im.is_finite() { c.norm() } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

struct Simpson<'a, F, const K: usize> {
    f: &'a F,
    piece: Piece,
}

impl<F, const K: usize> Simpson<'_, F, K>
where
    F: Fn(Complex64) -> Result<[Complex64; K]>,
{
    fn g(&self, t: f64) -> Result<[Complex64; K]> {
        let (z, dz) = self.piece.point_and_tangent(t);
        let v = (self.f)(z)?;
        Ok(v.map(|c| c * dz))
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        a: f64,
        b: f64,
        fa: [Complex64; K],
        fm: [Complex64; K],
        fb: [Complex64; K],
        whole: [Complex64; K],
        tol: f64,
        depth: u32,
    ) -> Result<[Complex64; K]> {
        let m = 0.5 * (a + b);
        // each half is weighted by its own width so a child's estimate matches
        // the parent's value for it exactly
        let (hl, hr) = (m - a, b - m);
        let flm = self.g(0.5 * (a + m))?;
        let frm = self.g(0.5 * (m + b))?;
        let mut left = [Complex64::default(); K];
        let mut right = [Complex64::default(); K];
        let mut delta = [Complex64::default(); K];
        for i in 0..K {
            left[i] = (fa[i] + 4.0 * flm[i] + fm[i]) * (hl / 6.0);
            right[i] = (fm[i] + 4.0 * frm[i] + fb[i]) * (hr / 6.0);
            delta[i] = left[i] + right[i] - whole[i];
        }
        if max_abs(&delta) <= 15.0 * tol {
            let mut out = [Complex64::default(); K];
            for i in 0..K {
                out[i] = left[i] + right[i] + delta[i] / 15.0;
            }
            return Ok(out);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::MaxDepthExceeded(MAX_DEPTH));
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        let mut out = l;
        for i in 0..K {
            out[i] += r[i];
        }
        Ok(out)
    }
}

/// Integrates `f(z) dz` along the path with adaptive Simpson quadrature and
/// Richardson correction. `tol` bounds the estimated absolute error per
/// component.
pub fn integrate_form<F, const K: usize>(f: &F, path: &PathSpec, tol: f64) -> Result<[Complex64; K]>
where
    F: Fn(Complex64) -> Result<[Complex64; K]>,
{
    if !(tol > 0.0) {
        return Err(Error::Invalid("quadrature tolerance must be positive".into()));
    }
    let mut pieces = Vec::new();
    path.pieces(&mut pieces);
    let panels: usize = pieces.iter().map(|p| p.integrand_setup().2).sum();
    let panel_tol = tol / panels.max(1) as f64;
    let mut total = [Complex64::default(); K];
    for piece in pieces {
        let (t0, t1, n) = piece.integrand_setup();
        let s = Simpson { f, piece };
        for j in 0..n {
            let a = t0 + (t1 - t0) * j as f64 / n as f64;
            let b = if j + 1 == n { t1 } else { t0 + (t1 - t0) * (j + 1) as f64 / n as f64 };
            let fa = s.g(a)?;
            let fb = s.g(b)?;
            let fm = s.g(0.5 * (a + b))?;
            let mut whole = [Complex64::default(); K];
            for i in 0..K {
                whole[i] = (fa[i] + 4.0 * fm[i] + fb[i]) * ((b - a) / 6.0);
            }
            let v = s.refine(a, b, fa, fm, fb, whole, panel_tol, 0)?;
            for i in 0..K {
                total[i] += v[i];
            }
        }
    }
    Ok(total)
}

/// Integral of the data's triple along a path, after the clearance check.
pub fn integrate_omega(d: &WeierstrassData, path: &PathSpec, tol: f64) -> Result<C3> {
    path.check_clearance(d.domain())?;
    integrate_form(&|z| d.omega(z), path, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopPeriod {
    pub label: String,
    pub period: C3,
    pub re_abs: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodReport {
    pub loops: Vec<LoopPeriod>,
    pub max_re: f64,
    pub tolerance: f64,
    pub period_condition: bool,
}

/// Integrates the triple over every loop; the condition holds when all
/// real parts are within `tol.period`.
pub fn periods(d: &WeierstrassData, loops: &[LoopSpec], tol: &Tolerances) -> Result<PeriodReport> {
    let results = exec::try_map(loops, |l| {
        let p = integrate_omega(d, &l.path, tol.quadrature)?;
        Ok::<_, Error>(LoopPeriod {
            label: l.label.clone(),
            period: p,
            re_abs: p.map(|c| c.re.abs()),
        })
    })?;
    let max_re = results
        .iter()
        .flat_map(|l| l.re_abs)
        .fold(0.0, f64::max);
    Ok(PeriodReport {
        period_condition: max_re <= tol.period,
        max_re,
        tolerance: tol.period,
        loops: results,
    })
}

/// Grid of admissible points: `n` x `n` for rectangles, `n` radii by `n`
/// angles for annuli.
pub fn sample_grid(domain: &Domain, n: usize) -> Vec<Complex64> {
    let n = n.max(1);
    let lerp = |a: f64, b: f64, k: usize| if n == 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let z = match domain.kind {
                DomainKind::Rectangle { min, max } => Complex64::new(lerp(min.re, max.re, k), lerp(min.im, max.im, j)),
                DomainKind::Annulus { center, inner, outer } => {
                    center + Complex64::from_polar(lerp(inner, outer, j), TAU * k as f64 / n as f64)
                }
            };
            if domain.is_admissible(z) {
                pts.push(z);
            }
        }
    }
    pts
}

/// Largest `|Re dw|` against `dx ^ dy` over an `n` x `n` grid.
///
/// With `dw = w_zbar dzbar ^ dz` and `dzbar ^ dz = 2i dx ^ dy`, the
/// coefficient is `2i w_zbar`, whose real part is `-2 Im w_zbar`.
pub fn integrability_residual(d: &WeierstrassData, grid_samples: usize) -> Result<f64> {
    if d.is_holomorphic() {
        return Ok(0.0);
    }
    let pts = sample_grid(d.domain(), grid_samples);
    let vals = exec::try_map(&pts, |&z| {
        let dzb = d.omega_zbar(z)?;
        Ok::<_, Error>(dzb.iter().map(|c| 2.0 * c.im.abs()).fold(0.0, f64::max))
    })?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}
