//! Ray casting against the part surface.
//!
//! Triangle tests use the watertight formulation (shear the triangle into ray
//! space, evaluate the three edge functions with a consistent orientation), so
//! a ray through a shared edge or vertex is reported by at least one of the
//! adjacent facets and never slips between them.

mod bvh;

use nalgebra::Unit;

use crate::mesh::{Point, TriangleMesh, Vector};

pub use bvh::{Bvh, BvhNode, LEAF_SIZE};

/// Rays running parallel to a facet plane within this bound miss it.
pub const PARALLEL_EPS: f64 = 1e-12;
/// Hits closer than this along the ray are the same hit.
pub const DEDUP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point,
    direction: Unit<Vector>,
}

impl Ray {
    /// Normalizes `direction`; returns `None` for a zero or non-finite vector.
    pub fn new(origin: Point, direction: Vector) -> Option<Self> {
        if !direction.iter().all(|c| c.is_finite()) {
            return None;
        }
        Unit::try_new(direction, 1e-300).map(|direction| Ray { origin, direction })
    }

    pub fn from_unit(origin: Point, direction: Unit<Vector>) -> Self {
        Ray { origin, direction }
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn at(&self, t: f64) -> Point {
        self.origin + self.direction.as_ref() * t
    }
}

/// Orientation of the hit facet relative to the incoming ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Facing {
    /// normal · direction < 0: the facet faces the ray origin.
    Front,
    /// normal · direction > 0.
    Back,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub facet: u32,
    /// Distance along the ray, mm.
    pub t: f64,
    pub point: Point,
    pub facing: Facing,
}

impl Hit {
    /// True when `self` should be preferred as the nearest hit: smaller `t`,
    /// then smaller facet index.
    pub fn precedes(&self, other: &Hit) -> bool {
        (self.t, self.facet) < (other.t, other.facet)
    }
}

/// Nearest-hit query interface shared by the accelerated and brute-force paths.
pub trait RayCaster: Sync {
    fn nearest_hit(&self, ray: &Ray) -> Option<Hit>;
}

/// Intersects one facet. `normal` is the facet's unit normal.
pub fn intersect_triangle(ray: &Ray, tri: &[Point; 3], normal: &Vector, facet: u32) -> Option<Hit> {
    let d = ray.direction();
    let alignment = normal.dot(d);
    if alignment.abs() < PARALLEL_EPS {
        return None;
    }

    let kz = d.iamax();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if d[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = d[kx] / d[kz];
    let sy = d[ky] / d[kz];
    let sz = 1.0 / d[kz];

    let a = tri[0] - ray.origin;
    let b = tri[1] - ray.origin;
    let c = tri[2] - ray.origin;
    let (ax, ay) = (a[kx] - sx * a[kz], a[ky] - sy * a[kz]);
    let (bx, by) = (b[kx] - sx * b[kz], b[ky] - sy * b[kz]);
    let (cx, cy) = (c[kx] - sx * c[kz], c[ky] - sy * c[kz]);

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;
    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 {
        return None;
    }
    let t_scaled = u * (sz * a[kz]) + v * (sz * b[kz]) + w * (sz * c[kz]);
    let t = t_scaled / det;
    if t.is_nan() || t < 0.0 {
        return None;
    }
    Some(Hit {
        facet,
        t,
        point: ray.at(t),
        facing: if alignment < 0.0 { Facing::Front } else { Facing::Back },
    })
}

/// Every intersection with the mesh, sorted by `(t, facet)`, with hits whose
/// `t` lies within [`DEDUP_EPS`] of the previous kept hit removed.
pub fn ray_all_hits_bruteforce(mesh: &TriangleMesh, ray: &Ray) -> Vec<Hit> {
    let mut hits: Vec<Hit> = mesh
        .triangles()
        .enumerate()
        .filter_map(|(f, tri)| intersect_triangle(ray, &tri, &mesh.normal(f), f as u32))
        .collect();
    hits.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.facet.cmp(&b.facet)));
    let mut out: Vec<Hit> = Vec::with_capacity(hits.len());
    for h in hits {
        match out.last() {
            Some(prev) if h.t - prev.t <= DEDUP_EPS => {}
            _ => out.push(h),
        }
    }
    out
}

/// Brute-force caster: first element of [`ray_all_hits_bruteforce`].
pub struct BruteForce<'a>(pub &'a TriangleMesh);

impl RayCaster for BruteForce<'_> {
    fn nearest_hit(&self, ray: &Ray) -> Option<Hit> {
        ray_all_hits_bruteforce(self.0, ray).into_iter().next()
    }
}
