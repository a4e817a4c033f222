//! Free boundary minimal surfaces of the unit ball with closed-form geometry,
//! plus synthetic meshes of prescribed topology.
//!
//! The catenoid is the chart `X(t, θ) = c (cosh t cos θ, cosh t sin θ, t)` on
//! `[−t₀, t₀] × [0, 2π)`. It meets the unit sphere orthogonally exactly when
//! the conormal `X_t` is parallel to `X` at `t = ±t₀`, i.e. `t₀ tanh t₀ = 1`,
//! and `c` rescales so that `|X| = 1` there.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{Matrix2, Matrix3};

use crate::error::SurfaceError;
use crate::mesh::{refine, Point3, Projector, SurfaceMesh};

pub const MIN_RESOLUTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenoidParams {
    /// Neck scale `c`.
    pub neck: f64,
    /// Chart half-height `t₀`.
    pub t0: f64,
}

/// Root of `t tanh t = 1` on `[1, 2]` by bisection, to 1e-14.
pub fn critical_catenoid() -> CatenoidParams {
    let f = |t: f64| t * t.tanh() - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t0 = 0.5 * (lo + hi);
    let neck = 1.0 / (t0.cosh().powi(2) + t0 * t0).sqrt();
    CatenoidParams { neck, t0 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticSurface {
    /// Equatorial unit disk in `z = 0`; chart `(r, θ)`.
    Disk,
    /// Critical catenoid; chart `(t, θ)`.
    Catenoid(CatenoidParams),
}

/// Exact first- and second-order data at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartFrame {
    pub position: Point3,
    pub normal: Point3,
    /// Orthonormal tangent basis along the chart directions.
    pub tangents: [Point3; 2],
    /// Shape operator `S(X) = −(D_X N)ᵀ` in the tangent basis.
    pub shape: Matrix2<f64>,
    /// `‖A‖² = tr(SᵀS)`.
    pub a2: f64,
}

impl ChartFrame {
    /// The shape operator as an ambient 3×3 map that annihilates the normal.
    pub fn shape_ambient(&self) -> Matrix3<f64> {
        let [e1, e2] = self.tangents;
        let mut m = Matrix3::zeros();
        for (i, ei) in [e1, e2].iter().enumerate() {
            for (j, ej) in [e1, e2].iter().enumerate() {
                m += self.shape[(i, j)] * ei * ej.transpose();
            }
        }
        m
    }

    pub fn principal_curvatures(&self) -> (f64, f64) {
        let e = self.shape.symmetric_eigenvalues();
        (e[0].min(e[1]), e[0].max(e[1]))
    }
}

impl AnalyticSurface {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticSurface::Disk => "disk",
            AnalyticSurface::Catenoid(_) => "catenoid",
        }
    }

    pub fn chart_bounds(&self) -> (f64, f64) {
        match self {
            AnalyticSurface::Disk => (0.0, 1.0),
            AnalyticSurface::Catenoid(p) => (-p.t0, p.t0),
        }
    }

    fn check_domain(&self, a: f64, b: f64) -> Result<(), SurfaceError> {
        let (lo, hi) = self.chart_bounds();
        if !(a >= lo - 1e-12 && a <= hi + 1e-12) || !b.is_finite() {
            return Err(SurfaceError::OutsideChart(a, b));
        }
        Ok(())
    }

    pub fn chart(&self, a: f64, b: f64) -> Result<Point3, SurfaceError> {
        self.check_domain(a, b)?;
        Ok(self.chart_unchecked(a, b))
    }

    fn chart_unchecked(&self, a: f64, theta: f64) -> Point3 {
        match self {
            AnalyticSurface::Disk => Point3::new(a * theta.cos(), a * theta.sin(), 0.0),
            AnalyticSurface::Catenoid(p) => {
                let ch = a.cosh();
                p.neck * Point3::new(ch * theta.cos(), ch * theta.sin(), a)
            }
        }
    }

    /// Chart coordinates of a point on (or near) the surface.
    pub fn chart_coords(&self, p: &Point3) -> (f64, f64) {
        let theta = p.y.atan2(p.x);
        match self {
            AnalyticSurface::Disk => (p.x.hypot(p.y), theta),
            AnalyticSurface::Catenoid(c) => ((p.z / c.neck).clamp(-c.t0, c.t0), theta),
        }
    }

    /// Exact normal, shape operator and `‖A‖²` at a chart point.
    pub fn analytic_frame(&self, a: f64, theta: f64) -> Result<ChartFrame, SurfaceError> {
        self.check_domain(a, theta)?;
        let position = self.chart_unchecked(a, theta);
        Ok(match self {
            AnalyticSurface::Disk => ChartFrame {
                position,
                normal: Point3::z(),
                tangents: [Point3::x(), Point3::y()],
                shape: Matrix2::zeros(),
                a2: 0.0,
            },
            AnalyticSurface::Catenoid(p) => {
                let (ch, sh) = (a.cosh(), a.sinh());
                let (ct, st) = (theta.cos(), theta.sin());
                let e_t = Point3::new(sh * ct, sh * st, 1.0) / ch;
                let e_th = Point3::new(-st, ct, 0.0);
                // N = e_t × e_θ; S(e_t) = −k e_t and S(e_θ) = k e_θ.
                let normal = e_t.cross(&e_th);
                let k = 1.0 / (p.neck * ch * ch);
                ChartFrame {
                    position,
                    normal,
                    tangents: [e_t, e_th],
                    shape: Matrix2::new(-k, 0.0, 0.0, k),
                    a2: 2.0 * k * k,
                }
            }
        })
    }

    /// Frame at the chart point nearest to `p`.
    pub fn frame_at(&self, p: &Point3) -> ChartFrame {
        let (a, b) = self.chart_coords(p);
        let (lo, hi) = self.chart_bounds();
        self.analytic_frame(a.clamp(lo, hi), b).expect("clamped into the chart")
    }

    /// Outward unit conormal at a boundary chart point.
    pub fn conormal(&self, a: f64, theta: f64) -> Result<Point3, SurfaceError> {
        let f = self.analytic_frame(a, theta)?;
        Ok(match self {
            AnalyticSurface::Disk => f.position.normalize(),
            AnalyticSurface::Catenoid(_) => a.signum() * f.tangents[0],
        })
    }

    /// Worst value of `1 − |⟨X, η⟩| / (|X||η|)` over `samples` boundary points
    /// per boundary curve.
    pub fn free_boundary_residual(&self, samples: usize) -> f64 {
        let (_, hi) = self.chart_bounds();
        let edges: Vec<f64> = match self {
            AnalyticSurface::Disk => vec![hi],
            AnalyticSurface::Catenoid(p) => vec![-p.t0, p.t0],
        };
        let mut worst = 0.0f64;
        for a in edges {
            for i in 0..samples {
                let th = TAU * i as f64 / samples as f64;
                let x = self.chart_unchecked(a, th);
                let eta = self.conormal(a, th).expect("boundary sample");
                worst = worst.max(1.0 - x.dot(&eta).abs() / (x.norm() * eta.norm()));
            }
        }
        worst
    }

    /// Sidecar metadata, one `key = value` per line.
    pub fn metadata(&self, resolution: usize) -> String {
        let mut s = String::new();
        writeln!(s, "kind = {}", self.name()).unwrap();
        if let AnalyticSurface::Catenoid(p) = self {
            writeln!(s, "c = {:.17e}", p.neck).unwrap();
            writeln!(s, "t0 = {:.17e}", p.t0).unwrap();
        }
        writeln!(s, "resolution = {resolution}").unwrap();
        s
    }
}

impl Projector for AnalyticSurface {
    fn project(&self, p: &Point3, on_boundary: bool) -> Option<Point3> {
        if !p.iter().all(|x| x.is_finite()) {
            return None;
        }
        match self {
            AnalyticSurface::Disk => {
                let q = Point3::new(p.x, p.y, 0.0);
                if on_boundary {
                    let r = q.norm();
                    (r > 1e-12).then(|| q / r)
                } else {
                    Some(q)
                }
            }
            AnalyticSurface::Catenoid(c) => {
                if p.x.hypot(p.y) < 1e-12 {
                    return None;
                }
                let mut t = (p.z / c.neck).clamp(-c.t0, c.t0);
                if on_boundary {
                    t = c.t0.copysign(t);
                }
                Some(self.chart_unchecked(t, p.y.atan2(p.x)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Disk,
    Catenoid,
    Synthetic { genus: usize, boundaries: usize },
}

impl SurfaceKind {
    pub fn label(&self) -> String {
        match self {
            SurfaceKind::Disk => "disk".into(),
            SurfaceKind::Catenoid => "catenoid".into(),
            SurfaceKind::Synthetic { genus, boundaries } => format!("synthetic-g{genus}-k{boundaries}"),
        }
    }
}

/// Builds the level-0 mesh of a surface family.
///
/// * disk: `resolution` concentric rings, ring `i` carrying `6i` vertices;
/// * catenoid: `resolution` cells across `t`, square cells in the conformal chart;
/// * synthetic: planar (g = 0), toroidal (g = 1) or voxel (g ≥ 2) surfaces
///   with `k` holes. These carry no minimality claim.
pub fn make_surface(
    kind: SurfaceKind,
    resolution: usize,
) -> Result<(SurfaceMesh, Option<AnalyticSurface>), SurfaceError> {
    if resolution < MIN_RESOLUTION {
        return Err(SurfaceError::Resolution { got: resolution, min: MIN_RESOLUTION });
    }
    match kind {
        SurfaceKind::Disk => Ok((disk_mesh(resolution)?, Some(AnalyticSurface::Disk))),
        SurfaceKind::Catenoid => {
            let p = critical_catenoid();
            Ok((catenoid_mesh(p, resolution)?, Some(AnalyticSurface::Catenoid(p))))
        }
        SurfaceKind::Synthetic { genus, boundaries } => {
            if boundaries == 0 {
                return Err(SurfaceError::NoBoundary);
            }
            let mesh = match genus {
                0 => holed_strip(boundaries - 1, resolution, StripMap::Plane)?,
                1 => holed_strip(boundaries, resolution, StripMap::Torus)?,
                g => voxel_surface(g, boundaries, resolution)?,
            };
            Ok((mesh, None))
        }
    }
}

/// The level-`level` mesh: [`make_surface`] followed by `level` midpoint
/// refinements, new vertices projected back onto the analytic surface.
pub fn refined_surface(
    kind: SurfaceKind,
    resolution: usize,
    level: usize,
) -> Result<(SurfaceMesh, Option<AnalyticSurface>), SurfaceError> {
    let (mut mesh, analytic) = make_surface(kind, resolution)?;
    for _ in 0..level {
        mesh = refine(&mesh, analytic.as_ref().map(|a| a as &dyn Projector))?;
    }
    Ok((mesh, analytic))
}

fn disk_mesh(rings: usize) -> Result<SurfaceMesh, SurfaceError> {
    let mut vertices = vec![Point3::zeros()];
    let mut ring_start = vec![0usize];
    for i in 1..=rings {
        ring_start.push(vertices.len());
        let n = 6 * i;
        let r = i as f64 / rings as f64;
        for j in 0..n {
            let th = TAU * j as f64 / n as f64;
            vertices.push(Point3::new(r * th.cos(), r * th.sin(), 0.0));
        }
    }
    let mut triangles = Vec::new();
    for i in 1..=rings {
        let (na, nb) = (if i == 1 { 1 } else { 6 * (i - 1) }, 6 * i);
        let (sa, sb) = (ring_start[i - 1], ring_start[i]);
        let inner = |a: usize| sa + a % na;
        let outer = |b: usize| sb + b % nb;
        if na == 1 {
            for b in 0..nb {
                triangles.push([sa, outer(b), outer(b + 1)]);
            }
            continue;
        }
        // March both rings by angle, emitting one triangle per step.
        let (mut a, mut b) = (0usize, 0usize);
        while a < na || b < nb {
            let next_a = (a + 1) as f64 / na as f64;
            let next_b = (b + 1) as f64 / nb as f64;
            if b < nb && (a == na || next_b <= next_a) {
                triangles.push([inner(a), outer(b), outer(b + 1)]);
                b += 1;
            } else {
                triangles.push([inner(a), outer(b), inner(a + 1)]);
                a += 1;
            }
        }
    }
    Ok(SurfaceMesh::new(vertices, triangles)?)
}

fn catenoid_mesh(p: CatenoidParams, nt: usize) -> Result<SurfaceMesh, SurfaceError> {
    let surf = AnalyticSurface::Catenoid(p);
    let ntheta = ((nt as f64 * PI / p.t0).round() as usize).max(MIN_RESOLUTION);
    let mut vertices = Vec::with_capacity((nt + 1) * ntheta);
    for i in 0..=nt {
        let t = -p.t0 + 2.0 * p.t0 * i as f64 / nt as f64;
        for j in 0..ntheta {
            vertices.push(surf.chart_unchecked(t, TAU * j as f64 / ntheta as f64));
        }
    }
    let id = |i: usize, j: usize| i * ntheta + j % ntheta;
    let mut triangles = Vec::with_capacity(2 * nt * ntheta);
    for i in 0..nt {
        for j in 0..ntheta {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(SurfaceMesh::new(vertices, triangles)?)
}

#[derive(Clone, Copy)]
enum StripMap {
    Plane,
    Torus,
}

const TORUS_MAJOR: f64 = 0.6;
const TORUS_MINOR: f64 = 0.3;

/// A strip of rectangular cells, each with a round hole, meshed by rays from
/// the hole to the cell perimeter. For the plane the strip is open; for the
/// torus it is periodic in both directions. A plane strip with zero holes is
/// a single structured square.
fn holed_strip(holes: usize, res: usize, map: StripMap) -> Result<SurfaceMesh, SurfaceError> {
    let (len_y, periodic) = match map {
        StripMap::Plane => (1.0, false),
        StripMap::Torus => (TAU * TORUS_MINOR, true),
    };
    let cells = holes.max(1);
    let len_x = match map {
        StripMap::Plane => cells as f64,
        StripMap::Torus => TAU * TORUS_MAJOR,
    };
    let w = len_x / cells as f64;
    let m_v = res;
    let m_u = ((res as f64 * w / len_y).round() as usize).max(2);
    let rings = (res / 2).max(2);

    let mut param: Vec<(f64, f64)> = Vec::new();
    let mut lookup: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertex = |x: f64, y: f64| -> usize {
        let (mut x, mut y) = (x, y);
        if periodic {
            x = x.rem_euclid(len_x);
            y = y.rem_euclid(len_y);
            if (len_x - x) < 1e-9 {
                x = 0.0;
            }
            if (len_y - y) < 1e-9 {
                y = 0.0;
            }
        }
        let key = ((x * 1e8).round() as i64, (y * 1e8).round() as i64);
        *lookup.entry(key).or_insert_with(|| {
            param.push((x, y));
            param.len() - 1
        })
    };

    let mut triangles = Vec::new();
    for cell in 0..cells {
        let x0 = cell as f64 * w;
        if holes == 0 {
            let ids: Vec<Vec<usize>> = (0..=m_v)
                .map(|j| (0..=m_u).map(|i| vertex(x0 + w * i as f64 / m_u as f64, len_y * j as f64 / m_v as f64)).collect())
                .collect();
            for j in 0..m_v {
                for i in 0..m_u {
                    triangles.push([ids[j][i], ids[j][i + 1], ids[j + 1][i + 1]]);
                    triangles.push([ids[j][i], ids[j + 1][i + 1], ids[j + 1][i]]);
                }
            }
            continue;
        }
        // Perimeter points counter-clockwise from the lower-left corner.
        let mut perim = Vec::new();
        for i in 0..m_u {
            perim.push((x0 + w * i as f64 / m_u as f64, 0.0));
        }
        for j in 0..m_v {
            perim.push((x0 + w, len_y * j as f64 / m_v as f64));
        }
        for i in 0..m_u {
            perim.push((x0 + w - w * i as f64 / m_u as f64, len_y));
        }
        for j in 0..m_v {
            perim.push((x0, len_y - len_y * j as f64 / m_v as f64));
        }
        let (cx, cy) = (x0 + 0.5 * w, 0.5 * len_y);
        let rho = 0.3 * w.min(len_y);
        let n = perim.len();
        let ids: Vec<Vec<usize>> = (0..=rings)
            .map(|l| {
                let s = l as f64 / rings as f64;
                perim
                    .iter()
                    .map(|&(qx, qy)| {
                        let (dx, dy) = (qx - cx, qy - cy);
                        let d = dx.hypot(dy);
                        let (ax, ay) = (cx + rho * dx / d, cy + rho * dy / d);
                        if l == rings {
                            vertex(qx, qy)
                        } else {
                            vertex(ax + s * (qx - ax), ay + s * (qy - ay))
                        }
                    })
                    .collect()
            })
            .collect();
        for l in 0..rings {
            for j in 0..n {
                let jn = (j + 1) % n;
                triangles.push([ids[l][j], ids[l + 1][j], ids[l + 1][jn]]);
                triangles.push([ids[l][j], ids[l + 1][jn], ids[l][jn]]);
            }
        }
    }

    let vertices = param
        .iter()
        .map(|&(x, y)| match map {
            StripMap::Plane => {
                let s = 1.6 / len_x.max(len_y);
                Point3::new(s * (x - 0.5 * len_x), s * (y - 0.5 * len_y), 0.0)
            }
            StripMap::Torus => {
                let (u, v) = (x / TORUS_MAJOR, y / TORUS_MINOR);
                let rr = TORUS_MAJOR + TORUS_MINOR * v.cos();
                Point3::new(rr * u.cos(), rr * u.sin(), TORUS_MINOR * v.sin())
            }
        })
        .collect();
    Ok(SurfaceMesh::new(vertices, triangles)?)
}

/// Boundary of a one-voxel-thick slab with `genus` tunnels, each voxel face
/// split into `res × res` quads, with `holes` single quads removed on the top
/// face.
fn voxel_surface(genus: usize, holes: usize, res: usize) -> Result<SurfaceMesh, SurfaceError> {
    let nx = 2 * genus + 1;
    let ny = 3;
    let solid = |x: i64, y: i64, z: i64| -> bool {
        if z != 0 || x < 0 || y < 0 || x >= nx as i64 || y >= ny as i64 {
            return false;
        }
        !(y == 1 && x % 2 == 1)
    };
    let n = res as i64;
    let mut lookup: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut lattice: Vec<(i64, i64, i64)> = Vec::new();
    let mut vid = |p: (i64, i64, i64)| -> usize {
        *lookup.entry(p).or_insert_with(|| {
            lattice.push(p);
            lattice.len() - 1
        })
    };
    let mut triangles = Vec::new();
    let mut top_quads: Vec<((i64, i64), [usize; 4])> = Vec::new();
    let dirs: [(i64, i64, i64); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
    for x in 0..nx as i64 {
        for y in 0..ny as i64 {
            if !solid(x, y, 0) {
                continue;
            }
            for &d in &dirs {
                if solid(x + d.0, y + d.1, d.2) {
                    continue;
                }
                // Face of voxel (x, y, 0) with outward normal d. Pick two
                // in-face axes (a, b) with a × b = d.
                let (a, b) = match d {
                    (1, 0, 0) => ((0, 1, 0), (0, 0, 1)),
                    (-1, 0, 0) => ((0, 0, 1), (0, 1, 0)),
                    (0, 1, 0) => ((0, 0, 1), (1, 0, 0)),
                    (0, -1, 0) => ((1, 0, 0), (0, 0, 1)),
                    (0, 0, 1) => ((1, 0, 0), (0, 1, 0)),
                    _ => ((0, 1, 0), (1, 0, 0)),
                };
                let origin = (
                    x * n + if d.0 > 0 { n } else { 0 },
                    y * n + if d.1 > 0 { n } else { 0 },
                    if d.2 > 0 { n } else { 0 },
                );
                let at = |i: i64, j: i64| {
                    (
                        origin.0 + a.0 * i + b.0 * j,
                        origin.1 + a.1 * i + b.1 * j,
                        origin.2 + a.2 * i + b.2 * j,
                    )
                };
                for i in 0..n {
                    for j in 0..n {
                        let q = [vid(at(i, j)), vid(at(i + 1, j)), vid(at(i + 1, j + 1)), vid(at(i, j + 1))];
                        if d == (0, 0, 1) && i == n / 2 && j == n / 2 {
                            top_quads.push(((x, y), q));
                        }
                        triangles.push([q[0], q[1], q[2]]);
                        triangles.push([q[0], q[2], q[3]]);
                    }
                }
            }
        }
    }
    // Remove the central quad of `holes` distinct top voxel faces.
    top_quads.sort_by_key(|&((x, y), _)| (y, x));
    if holes > top_quads.len() {
        return Err(SurfaceError::Resolution { got: holes, min: top_quads.len() });
    }
    let mut removed = Vec::new();
    let stride = top_quads.len() / holes;
    for h in 0..holes {
        let q = top_quads[h * stride].1;
        removed.push([q[0], q[1], q[2]]);
        removed.push([q[0], q[2], q[3]]);
    }
    triangles.retain(|t| !removed.contains(t));

    let span = (nx.max(ny) as f64) * n as f64;
    let centre = (nx as f64 * n as f64 / 2.0, ny as f64 * n as f64 / 2.0, n as f64 / 2.0);
    let scale = 1.6 / span;
    let vertices = lattice
        .iter()
        .map(|&(x, y, z)| {
            Point3::new(
                scale * (x as f64 - centre.0),
                scale * (y as f64 - centre.1),
                scale * (z as f64 - centre.2),
            )
        })
        .collect();
    Ok(SurfaceMesh::new(vertices, triangles)?)
}
