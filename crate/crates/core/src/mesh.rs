//! Parameter grids, triangulated surface meshes and their OBJ/CSV export.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::sample_all;
use crate::immersion::immerse_grid;
use crate::paths::PathSpec;
use crate::weierstrass::{Domain, DomainKind, WeierstrassData, R3};

/// Weld tolerance in parameter space.
pub const WELD_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GridEdge {
    pub a: usize,
    pub b: usize,
    /// Path from `a` to `b`.
    pub path: PathSpec,
}

/// A sampled domain. Only vertices used by kept cells are stored.
#[derive(Clone, Debug)]
pub struct ParamGrid {
    pub nx: usize,
    pub ny: usize,
    pub polar: bool,
    pub points: Vec<Complex64>,
    /// Lattice coordinates `(i, j)` of every stored vertex.
    pub lattice: Vec<(usize, usize)>,
    /// Kept cells, counterclockwise.
    pub cells: Vec<[usize; 4]>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<GridEdge>,
    /// Per cell, its boundary edges with orientation (`true` when the edge
    /// runs from `a` to `b` along the counterclockwise boundary).
    pub cell_edges: Vec<[(usize, bool); 4]>,
    /// Pairs `(j = 0 vertex, j = ny copy)` along the seam of a polar grid.
    pub seam: Vec<(usize, usize)>,
}

impl ParamGrid {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }
}

fn lerp(a: f64, b: f64, k: usize, n: usize) -> f64 {
    if k + 1 == n {
        b
    } else {
        a + (b - a) * k as f64 / (n - 1) as f64
    }
}

/// Samples the domain on a regular grid: `nx` x `ny` vertices for a
/// rectangle, `nx` radii by `ny` angular cells for an annulus (with a
/// duplicated seam column). Cells within `pole_margin` of a puncture are
/// dropped and each quad is split along its shorter diagonal.
pub fn sample_domain(domain: &Domain, nx: usize, ny: usize) -> Result<ParamGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Invalid("grid needs nx, ny >= 2".into()));
    }
    domain.check()?;
    let (cols, polar) = match domain.kind {
        DomainKind::Rectangle { .. } => (ny, false),
        DomainKind::Annulus { .. } => (ny + 1, true),
    };
    let lattice_point = |i: usize, j: usize| -> Complex64 {
        match domain.kind {
            DomainKind::Rectangle { min, max } => Complex64::new(lerp(min.re, max.re, i, nx), lerp(min.im, max.im, j, ny)),
            DomainKind::Annulus { center, inner, outer } => {
                let j = if j == ny { 0 } else { j };
                center + Complex64::from_polar(lerp(inner, outer, i, nx), TAU * j as f64 / ny as f64)
            }
        }
    };
    let edge_path = |i0: usize, j0: usize, i1: usize, j1: usize| -> PathSpec {
        let (a, b) = (lattice_point(i0, j0), lattice_point(i1, j1));
        match domain.kind {
            DomainKind::Annulus { center, inner, outer } if i0 == i1 => {
                let r = lerp(inner, outer, i0, nx);
                let t0 = TAU * j0 as f64 / ny as f64;
                let t1 = TAU * j1 as f64 / ny as f64;
                PathSpec::arc(center, r, t0, t1)
            }
            _ => PathSpec::segment(a, b),
        }
    };

    let blocked_cell = |i: usize, j: usize| -> bool {
        if domain.punctures.is_empty() {
            return false;
        }
        let sides = [
            edge_path(i, j, i + 1, j),
            edge_path(i + 1, j, i + 1, j + 1),
            edge_path(i, j + 1, i + 1, j + 1),
            edge_path(i, j, i, j + 1),
        ];
        domain.punctures.iter().any(|p| {
            let inside = match domain.kind {
                DomainKind::Rectangle { .. } => {
                    let (a, b) = (lattice_point(i, j), lattice_point(i + 1, j + 1));
                    p.point.re >= a.re && p.point.re <= b.re && p.point.im >= a.im && p.point.im <= b.im
                }
                DomainKind::Annulus { center, inner, outer } => {
                    let v = p.point - center;
                    let (r0, r1) = (lerp(inner, outer, i, nx), lerp(inner, outer, i + 1, nx));
                    let t = v.arg().rem_euclid(TAU);
                    let (t0, t1) = (TAU * j as f64 / ny as f64, TAU * (j + 1) as f64 / ny as f64);
                    v.norm() >= r0 && v.norm() <= r1 && t >= t0 && t <= t1
                }
            };
            inside || sides.iter().any(|s| s.distance_to(p.point) < domain.pole_margin)
        })
    };

    let mut kept = Vec::new();
    for j in 0..cols - 1 {
        for i in 0..nx - 1 {
            if !blocked_cell(i, j) {
                kept.push((i, j));
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut points = Vec::new();
    let mut lattice = Vec::new();
    let mut vid = |i: usize, j: usize, points: &mut Vec<Complex64>, lattice: &mut Vec<(usize, usize)>| -> usize {
        *index.entry((i, j)).or_insert_with(|| {
            points.push(lattice_point(i, j));
            lattice.push((i, j));
            points.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(kept.len());
    for &(i, j) in &kept {
        let v0 = vid(i, j, &mut points, &mut lattice);
        let v1 = vid(i + 1, j, &mut points, &mut lattice);
        let v2 = vid(i + 1, j + 1, &mut points, &mut lattice);
        let v3 = vid(i, j + 1, &mut points, &mut lattice);
        cells.push([v0, v1, v2, v3]);
    }

    let mut triangles = Vec::with_capacity(2 * cells.len());
    for c in &cells {
        let [v0, v1, v2, v3] = *c;
        if (points[v0] - points[v2]).norm() <= (points[v1] - points[v3]).norm() {
            triangles.push([v0, v1, v2]);
            triangles.push([v0, v2, v3]);
        } else {
            triangles.push([v0, v1, v3]);
            triangles.push([v1, v2, v3]);
        }
    }

    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut cell_edges = Vec::with_capacity(cells.len());
    for (c, &(i, j)) in cells.iter().zip(&kept) {
        let lat = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let mut ce = [(0usize, true); 4];
        for s in 0..4 {
            let (u, v) = (c[s], c[(s + 1) % 4]);
            let (lu, lv) = (lat[s], lat[(s + 1) % 4]);
            // store edges in increasing lattice order so arcs run counterclockwise
            let (a, b, la, lb) = if lu <= lv { (u, v, lu, lv) } else { (v, u, lv, lu) };
            let k = *edge_index.entry((a, b)).or_insert_with(|| {
                edges.push(GridEdge {
                    a,
                    b,
                    path: edge_path(la.0, la.1, lb.0, lb.1),
                });
                edges.len() - 1
            });
            ce[s] = (k, a == u);
        }
        cell_edges.push(ce);
    }

    let mut seam = Vec::new();
    if polar {
        for i in 0..nx {
            if let (Some(&a), Some(&b)) = (index.get(&(i, 0)), index.get(&(i, ny))) {
                seam.push((a, b));
            }
        }
    }

    Ok(ParamGrid {
        nx,
        ny,
        polar,
        points,
        lattice,
        cells,
        triangles,
        edges,
        cell_edges,
        seam,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MeshMeta {
    pub name: String,
    pub basepoint: Complex64,
    pub theta: f64,
    pub max_cycle_defect: f64,
    pub seam_defect: Option<f64>,
    pub welded: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<R3>,
    pub normals: Vec<R3>,
    pub faces: Vec<[usize; 3]>,
    pub z: Vec<Complex64>,
    pub lambda: Vec<f64>,
    pub h: Vec<f64>,
    pub k: Vec<f64>,
    pub abs_q: Vec<f64>,
    pub umbilic: Vec<bool>,
    pub meta: MeshMeta,
}

fn sub(a: &R3, b: &R3) -> R3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &R3, b: &R3) -> R3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &R3, b: &R3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SurfaceMesh {
    /// Checks index ranges, degenerate faces, normal lengths and attribute sizes.
    pub fn check(&self) -> Result<()> {
        let n = self.vertices.len();
        for f in &self.faces {
            if f.iter().any(|&v| v >= n) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Invalid(format!("bad face {f:?}")));
            }
        }
        if self.normals.iter().any(|v| (dot(v, v).sqrt() - 1.0).abs() > 1e-8) {
            return Err(Error::Invalid("normal is not unit".into()));
        }
        let lens = [
            self.normals.len(),
            self.z.len(),
            self.lambda.len(),
            self.h.len(),
            self.k.len(),
            self.abs_q.len(),
            self.umbilic.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::Invalid("attribute length differs from vertex count".into()));
        }
        Ok(())
    }

    /// Fraction of faces whose geometric normal has positive dot product with
    /// the stored normal at all three corners.
    pub fn normal_consistency(&self) -> f64 {
        if self.faces.is_empty() {
            return 1.0;
        }
        let good = self
            .faces
            .iter()
            .filter(|f| {
                let [a, b, c] = f.map(|v| self.vertices[v]);
                let n = cross(&sub(&b, &a), &sub(&c, &a));
                f.iter().all(|&v| dot(&n, &self.normals[v]) > 0.0)
            })
            .count();
        good as f64 / self.faces.len() as f64
    }
}

/// Integrates the data over the grid and attaches pointwise geometry. A polar
/// seam is welded when its jump is within `seam_tol`, and left cut otherwise.
pub fn build_mesh(
    d: &WeierstrassData,
    grid: &ParamGrid,
    basepoint: Complex64,
    base_value: R3,
    tol: f64,
    seam_tol: f64,
) -> Result<SurfaceMesh> {
    let imm = immerse_grid(d, grid, basepoint, base_value, tol)?;
    let geo = sample_all(d, &grid.points, 1e-8)?;

    let welded = matches!(imm.seam_defect, Some(s) if s <= seam_tol);
    let mut remap: Vec<usize> = (0..grid.points.len()).collect();
    if welded {
        for &(a, b) in &grid.seam {
            if (grid.points[a] - grid.points[b]).norm() <= WELD_TOL {
                remap[b] = a;
            }
        }
    }
    // compact the surviving vertices
    let mut new_index = vec![usize::MAX; remap.len()];
    let mut order = Vec::new();
    for v in 0..remap.len() {
        if remap[v] == v {
            new_index[v] = order.len();
            order.push(v);
        }
    }
    let faces: Vec<[usize; 3]> = grid
        .triangles
        .iter()
        .map(|t| t.map(|v| new_index[remap[v]]))
        .filter(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2])
        .collect();

    let mesh = SurfaceMesh {
        vertices: order.iter().map(|&v| imm.positions[v]).collect(),
        normals: order.iter().map(|&v| geo[v].eta).collect(),
        faces,
        z: order.iter().map(|&v| grid.points[v]).collect(),
        lambda: order.iter().map(|&v| geo[v].lambda).collect(),
        h: order.iter().map(|&v| geo[v].h).collect(),
        k: order.iter().map(|&v| geo[v].k).collect(),
        abs_q: order.iter().map(|&v| geo[v].q.norm()).collect(),
        umbilic: order.iter().map(|&v| geo[v].umbilic).collect(),
        meta: MeshMeta {
            basepoint,
            max_cycle_defect: imm.max_cycle_defect,
            seam_defect: imm.seam_defect,
            welded,
            ..MeshMeta::default()
        },
    };
    mesh.check()?;
    Ok(mesh)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `v`, `vn` and `f i//i` lines with 17 significant digits.
pub fn export_obj(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut body = String::new();
    if !mesh.meta.name.is_empty() {
        body.push_str(&format!("o {}\n", mesh.meta.name));
    }
    for v in &mesh.vertices {
        body.push_str(&format!("v {:.16e} {:.16e} {:.16e}\n", v[0], v[1], v[2]));
    }
    for n in &mesh.normals {
        body.push_str(&format!("vn {:.16e} {:.16e} {:.16e}\n", n[0], n[1], n[2]));
    }
    for f in &mesh.faces {
        let [a, b, c] = f.map(|i| i + 1);
        body.push_str(&format!("f {a}//{a} {b}//{b} {c}//{c}\n"));
    }
    w.write_all(body.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// One row per vertex under the header
/// `re_z,im_z,x,y,z,lambda,H,K,absq,umbilic`.
pub fn export_csv(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Invalid(format!("csv: {other:?}")),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(to_err)?;
    w.write_record(["re_z", "im_z", "x", "y", "z", "lambda", "H", "K", "absq", "umbilic"])
        .map_err(to_err)?;
    for v in 0..mesh.vertices.len() {
        let p = mesh.vertices[v];
        w.write_record([
            mesh.z[v].re.to_string(),
            mesh.z[v].im.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            p[2].to_string(),
            mesh.lambda[v].to_string(),
            mesh.h[v].to_string(),
            mesh.k[v].to_string(),
            mesh.abs_q[v].to_string(),
            mesh.umbilic[v].to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
