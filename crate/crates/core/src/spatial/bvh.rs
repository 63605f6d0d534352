//! Bounding volume hierarchy over mesh facets.
//!
//! Construction is a deterministic median split on the longest axis of the
//! centroid bounds, ordering facets by `(centroid coordinate, facet index)`.
//! Nodes are stored flat; the tree is immutable once built.

use std::cmp::Ordering;

use super::{intersect_triangle, Hit, Ray, RayCaster};
use crate::mesh::{Aabb, Point, TriangleMesh, Vector};

pub const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BvhNode {
    Leaf { bounds: Aabb, start: u32, count: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl BvhNode {
    pub fn bounds(&self) -> &Aabb {
        match self {
            BvhNode::Leaf { bounds, .. } | BvhNode::Inner { bounds, .. } => bounds,
        }
    }
}

pub struct Bvh<'a> {
    mesh: &'a TriangleMesh,
    nodes: Vec<BvhNode>,
    /// Facet indices, grouped by leaf.
    order: Vec<u32>,
    /// Absolute padding applied to node boxes during traversal.
    pad: f64,
}

impl<'a> Bvh<'a> {
    pub fn build(mesh: &'a TriangleMesh) -> Self {
        let n = mesh.facet_count();
        let mut items: Vec<(u32, Point, Aabb)> = mesh
            .triangles()
            .enumerate()
            .map(|(f, tri)| {
                let centroid = Point::from((tri[0].coords + tri[1].coords + tri[2].coords) / 3.0);
                (f as u32, centroid, Aabb::from_points(&tri))
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * n.div_ceil(LEAF_SIZE));
        build_node(&mut items, 0, &mut nodes);
        let order = items.iter().map(|it| it.0).collect();
        let bb = mesh.bounding_box();
        let scale = bb.min.coords.amax().max(bb.max.coords.amax()).max(bb.diagonal());
        Bvh {
            mesh,
            nodes,
            order,
            pad: 1e-9 * (1.0 + scale),
        }
    }

    pub fn mesh(&self) -> &TriangleMesh {
        self.mesh
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn root_bounds(&self) -> &Aabb {
        self.nodes[0].bounds()
    }

    /// Facet indices stored in a leaf.
    pub fn leaf_facets(&self, node: &BvhNode) -> &[u32] {
        match *node {
            BvhNode::Leaf { start, count, .. } => &self.order[start as usize..(start + count) as usize],
            BvhNode::Inner { .. } => &[],
        }
    }

    fn entry(&self, bounds: &Aabb, ray: &Ray, inv: &Vector) -> Option<f64> {
        let mut t_min = 0.0f64;
        let mut t_max = f64::INFINITY;
        for k in 0..3 {
            let lo = bounds.min[k] - self.pad;
            let hi = bounds.max[k] + self.pad;
            let o = ray.origin[k];
            if ray.direction()[k] == 0.0 {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let (mut t0, mut t1) = ((lo - o) * inv[k], (hi - o) * inv[k]);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_min = t_min.max(t0);
            t_max = t_max.min(t1 * (1.0 + 4.0 * f64::EPSILON));
            if t_min > t_max {
                return None;
            }
        }
        Some(t_min)
    }
}

fn build_node(items: &mut [(u32, Point, Aabb)], offset: u32, nodes: &mut Vec<BvhNode>) -> u32 {
    let bounds = items.iter().fold(Aabb::empty(), |acc, it| acc.union(&it.2));
    let index = nodes.len() as u32;
    if items.len() <= LEAF_SIZE {
        nodes.push(BvhNode::Leaf {
            bounds,
            start: offset,
            count: items.len() as u32,
        });
        return index;
    }
    let axis = Aabb::from_points(items.iter().map(|it| &it.1)).longest_axis();
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.1[axis].total_cmp(&b.1[axis]).then(a.0.cmp(&b.0)));
    // placeholder, patched once both children exist
    nodes.push(BvhNode::Leaf {
        bounds,
        start: 0,
        count: 0,
    });
    let (lo, hi) = items.split_at_mut(mid);
    let left = build_node(lo, offset, nodes);
    let right = build_node(hi, offset + mid as u32, nodes);
    nodes[index as usize] = BvhNode::Inner { bounds, left, right };
    index
}

impl RayCaster for Bvh<'_> {
    fn nearest_hit(&self, ray: &Ray) -> Option<Hit> {
        let inv = ray.direction().map(|c| 1.0 / c);
        let mut best: Option<Hit> = None;
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        if let Some(t) = self.entry(self.nodes[0].bounds(), ray, &inv) {
            stack.push((0, t));
        }
        while let Some((id, entry)) = stack.pop() {
            // equal entry still visited so ties resolve to the lower facet index
            if best.is_some_and(|b| entry > b.t) {
                continue;
            }
            match self.nodes[id as usize] {
                ref leaf @ BvhNode::Leaf { .. } => {
                    for &f in self.leaf_facets(leaf) {
                        let tri = self.mesh.triangle(f as usize);
                        if let Some(hit) = intersect_triangle(ray, &tri, &self.mesh.normal(f as usize), f) {
                            if best.is_none_or(|b| hit.precedes(&b)) {
                                best = Some(hit);
                            }
                        }
                    }
                }
                BvhNode::Inner { left, right, .. } => {
                    let l = self
                        .entry(self.nodes[left as usize].bounds(), ray, &inv)
                        .map(|t| (left, t));
                    let r = self
                        .entry(self.nodes[right as usize].bounds(), ray, &inv)
                        .map(|t| (right, t));
                    match (l, r) {
                        (Some(a), Some(b)) => {
                            // push the farther child first
                            if a.1.partial_cmp(&b.1) == Some(Ordering::Less) {
                                stack.push(b);
                                stack.push(a);
                            } else {
                                stack.push(a);
                                stack.push(b);
                            }
                        }
                        (Some(a), None) | (None, Some(a)) => stack.push(a),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }
}
