//! The immersion `phi = Re ∫ w`, the null curve `∫ w`, and the associate family.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::mesh::ParamGrid;
use crate::paths::{integrate_form, integrate_omega, PathSpec};
use crate::weierstrass::{Domain, DomainKind, WeierstrassData, C3, R3};

const ZERO3: C3 = [Complex64::new(0.0, 0.0); 3];

fn blocked(from: Complex64, to: Complex64, reason: impl Into<String>) -> Error {
    Error::PathBlocked {
        from,
        to,
        reason: reason.into(),
    }
}

/// Straight path from `from` to `to`, detouring counterclockwise along the
/// boundary circle of every puncture disk (radius `pole_margin`) and of the
/// inner disk of an annulus that the segment crosses.
pub fn route(domain: &Domain, from: Complex64, to: Complex64) -> Result<PathSpec> {
    if from == to {
        return Ok(PathSpec::Polyline { vertices: vec![from, to] });
    }
    let mut disks: Vec<(Complex64, f64)> = domain.punctures.iter().map(|p| (p.point, domain.pole_margin)).collect();
    if let DomainKind::Annulus { center, inner, .. } = domain.kind {
        if inner > 0.0 {
            disks.push((center, inner));
        }
    }
    let nested: Vec<bool> = disks
        .iter()
        .map(|&(c, r)| disks.iter().any(|&(c2, r2)| (c, r) != (c2, r2) && (c - c2).norm() + r <= r2))
        .collect();
    let disks: Vec<(Complex64, f64)> = disks.into_iter().zip(nested).filter(|(_, n)| !n).map(|(d, _)| d).collect();
    let dir = to - from;
    let a = dir.norm_sqr();
    let mut crossings = Vec::new();
    for (c, rho) in disks {
        let rel = from - c;
        let b = 2.0 * (rel * dir.conj()).re;
        let cc = rel.norm_sqr() - rho * rho;
        let disc = b * b - 4.0 * a * cc;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let (s1, s2) = ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a));
        if s2 <= 0.0 || s1 >= 1.0 {
            continue;
        }
        let inside = |z: Complex64| (z - c).norm() < rho * (1.0 - 1e-9);
        if (s1 < 0.0 && inside(from)) || (s2 > 1.0 && inside(to)) {
            return Err(blocked(from, to, format!("endpoint inside the disk of radius {rho} at {c}")));
        }
        crossings.push((s1.max(0.0), s2.min(1.0), c, rho));
    }
    if crossings.is_empty() {
        return Ok(PathSpec::segment(from, to));
    }
    crossings.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut parts = Vec::new();
    let mut cursor = from;
    for (s1, s2, c, rho) in crossings {
        let p1 = from + dir * s1;
        let p2 = from + dir * s2;
        if (p1 - cursor).norm() > 0.0 {
            parts.push(PathSpec::segment(cursor, p1));
        }
        let t1 = (p1 - c).arg();
        let t2 = t1 + ((p2 - c).arg() - t1).rem_euclid(TAU);
        parts.push(PathSpec::arc(c, rho, t1, t2));
        cursor = p2;
    }
    if (to - cursor).norm() > 0.0 {
        parts.push(PathSpec::segment(cursor, to));
    }
    let path = PathSpec::Chain { parts };
    path.check_clearance(domain)
        .map_err(|e| blocked(from, to, format!("no admissible detour: {e}")))?;
    Ok(path)
}

/// `∫ w` from the basepoint to every target along [`route`].
pub fn null_curve(d: &WeierstrassData, basepoint: Complex64, targets: &[Complex64], tol: f64) -> Result<Vec<C3>> {
    exec::try_map(targets, |&t| {
        if t == basepoint {
            return Ok(ZERO3);
        }
        let path = route(d.domain(), basepoint, t)?;
        integrate_form(&|z| d.omega(z), &path, tol)
    })
}

fn real_part(base: &R3, f: &C3) -> R3 {
    [base[0] + f[0].re, base[1] + f[1].re, base[2] + f[2].re]
}

/// `phi(p) = base_value + Re ∫ w` from the basepoint to every target.
pub fn immerse(
    d: &WeierstrassData,
    basepoint: Complex64,
    base_value: R3,
    targets: &[Complex64],
    tol: f64,
) -> Result<Vec<R3>> {
    Ok(null_curve(d, basepoint, targets, tol)?
        .iter()
        .map(|f| real_part(&base_value, f))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct GridImmersion {
    /// `∫ w` from the basepoint, per grid vertex.
    pub null: Vec<C3>,
    /// `base_value + Re ∫ w`.
    pub positions: Vec<R3>,
    /// Largest `|Re ∮ w|` over grid cells.
    pub max_cycle_defect: f64,
    /// Largest jump between the two copies of a polar seam.
    pub seam_defect: Option<f64>,
    pub components: usize,
}

/// Integrates over a grid: one quadrature per edge, accumulated along a
/// breadth-first spanning tree rooted at the vertex nearest the basepoint.
pub fn immerse_grid(
    d: &WeierstrassData,
    grid: &ParamGrid,
    basepoint: Complex64,
    base_value: R3,
    tol: f64,
) -> Result<GridImmersion> {
    let n = grid.points.len();
    let edge_vals = exec::try_map(&grid.edges, |e| integrate_omega(d, &e.path, tol))?;

    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    for (k, e) in grid.edges.iter().enumerate() {
        adj[e.a].push((e.b, k, true));
        adj[e.b].push((e.a, k, false));
    }

    let mut null = vec![ZERO3; n];
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        // collect the component, then root it at the vertex nearest the basepoint
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &(w, _, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        let root = *comp
            .iter()
            .min_by(|&&x, &&y| {
                (grid.points[x] - basepoint)
                    .norm()
                    .total_cmp(&(grid.points[y] - basepoint).norm())
            })
            .expect("component is nonempty");
        null[root] = null_curve(d, basepoint, &[grid.points[root]], tol)?[0];
        let mut done = vec![false; n];
        done[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, k, forward) in &adj[v] {
                if done[w] {
                    continue;
                }
                done[w] = true;
                let iv = &edge_vals[k];
                for i in 0..3 {
                    null[w][i] = if forward { null[v][i] + iv[i] } else { null[v][i] - iv[i] };
                }
                queue.push_back(w);
            }
        }
    }

    let mut max_cycle_defect = 0.0f64;
    for cell in &grid.cell_edges {
        let mut s = ZERO3;
        for &(k, forward) in cell {
            for i in 0..3 {
                if forward {
                    s[i] += edge_vals[k][i];
                } else {
                    s[i] -= edge_vals[k][i];
                }
            }
        }
        max_cycle_defect = s.iter().map(|c| c.re.abs()).fold(max_cycle_defect, f64::max);
    }

    let seam_defect = if grid.seam.is_empty() {
        None
    } else {
        Some(
            grid.seam
                .iter()
                .flat_map(|&(a, b)| (0..3).map(move |i| (a, b, i)))
                .map(|(a, b, i)| (null[b][i].re - null[a][i].re).abs())
                .fold(0.0, f64::max),
        )
    };

    Ok(GridImmersion {
        positions: null.iter().map(|f| real_part(&base_value, f)).collect(),
        null,
        max_cycle_defect,
        seam_defect,
        components,
    })
}

/// Adjoint data `-i w`. Requires holomorphic data.
pub fn adjoint(d: &WeierstrassData) -> Result<WeierstrassData> {
    if !d.is_holomorphic() {
        return Err(Error::NotHolomorphic);
    }
    Ok(d.scaled(Complex64::new(0.0, -1.0)))
}

/// `e^{-i theta}`, exact at multiples of a quarter turn.
fn unit_phase(theta: f64) -> Complex64 {
    let q = theta / FRAC_PI_2;
    let k = q.round();
    if (q - k).abs() <= 4.0 * f64::EPSILON * q.abs().max(1.0) {
        return match (k as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
    }
    Complex64::from_polar(1.0, -theta)
}

/// Member `e^{-i theta} w` of the associate family.
pub fn associate_family(d: &WeierstrassData, theta: f64) -> Result<WeierstrassData> {
    if !d.is_holomorphic() {
        return Err(Error::NotHolomorphic);
    }
    let c = unit_phase(theta);
    if c == Complex64::new(1.0, 0.0) {
        return Ok(d.clone());
    }
    Ok(d.scaled(c))
}
