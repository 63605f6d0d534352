//! Nodal lattice in a plane orthogonal to the demolding direction.

use nalgebra::Unit;

use super::PlanError;
use crate::mesh::{Aabb, Point, TriangleMesh, Vector};

/// Distance of the grid plane beyond the part along +D_d, mm.
pub const PLANE_OFFSET: f64 = 1.0;

/// Right-handed orthonormal frame `(u, v, d)` with `d` the demolding direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub u: Vector,
    pub v: Vector,
    pub d: Vector,
}

impl Frame {
    /// `u` is derived from the world axis least aligned with `d` (lowest index
    /// on ties), so `+Z` yields `u = +X, v = +Y` and `+X` yields `u = +Y, v = +Z`.
    pub fn new(d: &Unit<Vector>) -> Self {
        let d = d.into_inner();
        let k = (0..3)
            .min_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()).then(a.cmp(&b)))
            .unwrap();
        let axis = Vector::ith(k, 1.0);
        let u = (axis - d * axis.dot(&d)).normalize();
        let v = d.cross(&u);
        Frame { u, v, d }
    }

    pub fn to_plane(&self, p: &Point) -> [f64; 2] {
        [p.coords.dot(&self.u), p.coords.dot(&self.v)]
    }

    pub fn height(&self, p: &Point) -> f64 {
        p.coords.dot(&self.d)
    }

    pub fn to_world(&self, a: f64, b: f64, h: f64) -> Point {
        Point::from(self.u * a + self.v * b + self.d * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub i: u32,
    pub j: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalGrid {
    pub frame: Frame,
    pub spacing: f64,
    /// Lattice coordinates along `u`, ascending, last clamped to the footprint max.
    pub a: Vec<f64>,
    /// Lattice coordinates along `v`.
    pub b: Vec<f64>,
    /// Plane height along `d` where node rays start.
    pub height: f64,
}

impl NodalGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.a.len(), self.b.len())
    }

    pub fn len(&self) -> usize {
        self.a.len() * self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node ids in lexicographic `(i, j)` order.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.a.len() as u32 {
            for j in 0..self.b.len() as u32 {
                out.push(NodeId { i, j });
            }
        }
        out
    }

    pub fn plane(&self, node: NodeId) -> [f64; 2] {
        [self.a[node.i as usize], self.b[node.j as usize]]
    }

    pub fn world(&self, node: NodeId) -> Point {
        let [a, b] = self.plane(node);
        self.frame.to_world(a, b, self.height)
    }
}

fn lattice(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let extent = hi - lo;
    let steps = (extent / spacing + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=steps).map(|k| (lo + k as f64 * spacing).min(hi)).collect();
    let last = *out.last().unwrap();
    if hi - last > 1e-9 * extent.abs().max(spacing) {
        out.push(hi);
    } else {
        *out.last_mut().unwrap() = hi;
    }
    out
}

/// Lattice over the box footprint, anchored at its min corner, inclusive of the max edge.
pub fn build_grid(aabb: &Aabb, demold_dir: &Unit<Vector>, spacing: f64) -> Result<NodalGrid, PlanError> {
    if !spacing.is_finite() || spacing <= 0.0 {
        return Err(PlanError::BadSpacing(spacing));
    }
    let frame = Frame::new(demold_dir);
    let corners = aabb.corners();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut top = f64::NEG_INFINITY;
    for c in &corners {
        let q = frame.to_plane(c);
        for k in 0..2 {
            lo[k] = lo[k].min(q[k]);
            hi[k] = hi[k].max(q[k]);
        }
        top = top.max(frame.height(c));
    }
    let scale = aabb.diagonal().max(1e-300);
    if (0..2).any(|k| hi[k] - lo[k] <= 1e-12 * scale) {
        return Err(PlanError::DegenerateFootprint);
    }
    Ok(NodalGrid {
        frame,
        spacing,
        a: lattice(lo[0], hi[0], spacing),
        b: lattice(lo[1], hi[1], spacing),
        height: top + PLANE_OFFSET,
    })
}

/// `m` in-plane points at angles `2πk/m` on the circle of radius `r_gate` around `center`.
pub fn ring_points(center: [f64; 2], r_gate: f64, m: usize) -> Vec<[f64; 2]> {
    (0..m)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / m as f64;
            [r_gate * theta.cos() + center[0], r_gate * theta.sin() + center[1]]
        })
        .collect()
}

/// `max(bbox_diagonal / 200, 5th percentile of nonzero edge lengths)`.
pub fn default_spacing(mesh: &TriangleMesh) -> f64 {
    let diag = mesh.bounding_box().diagonal();
    let mut edges = mesh.edge_lengths();
    if edges.is_empty() {
        return diag / 200.0;
    }
    edges.sort_by(f64::total_cmp);
    let p5 = edges[(0.05 * (edges.len() - 1) as f64).floor() as usize];
    (diag / 200.0).max(p5)
}
