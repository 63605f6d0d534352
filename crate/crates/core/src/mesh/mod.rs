//! Triangle mesh container, bounding boxes and mesh validation.
//!
//! All coordinates are millimetres. STL carries no unit information, so no
//! conversion or autodetection is attempted.

mod stl;
mod weld;

use std::collections::HashSet;

use nalgebra::{Point3, Vector3};

pub use stl::{parse_stl, write_stl_ascii, write_stl_binary};
pub use weld::{weld_vertices, EdgeKey, WeldedMesh, DEFAULT_WELD_TOLERANCE};

pub type Point = Point3<f64>;
pub type Vector = Vector3<f64>;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("binary STL truncated: header declares {declared} facets ({expected} bytes) but input has {actual} bytes")]
    Truncated {
        declared: u32,
        expected: usize,
        actual: usize,
    },
    #[error(
        "binary STL length mismatch: header declares {declared} facets ({expected} bytes) but input has {actual} bytes"
    )]
    LengthMismatch {
        declared: u32,
        expected: usize,
        actual: usize,
    },
    #[error("ASCII STL syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("input is neither binary STL nor ASCII STL")]
    UnknownFormat,
    #[error("mesh has no facets")]
    Empty,
    #[error("non-finite coordinate in vertex {vertex}")]
    NonFinite { vertex: usize },
    #[error("facet {facet} references vertex {index} but mesh has {count} vertices")]
    BadIndex { facet: usize, index: u32, count: usize },
    #[error("no usable area: all {0} facets are degenerate")]
    NoUsableArea(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Axis-aligned bounding box. Zero extent along any axis is allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        let mut bb = Aabb::empty();
        for p in points {
            bb.grow(p);
        }
        bb
    }

    pub fn grow(&mut self, p: &Point) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn extent(&self) -> Vector {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn center(&self) -> Point {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn corners(&self) -> [Point; 8] {
        let (a, b) = (self.min, self.max);
        [
            Point::new(a.x, a.y, a.z),
            Point::new(b.x, a.y, a.z),
            Point::new(a.x, b.y, a.z),
            Point::new(b.x, b.y, a.z),
            Point::new(a.x, a.y, b.z),
            Point::new(b.x, a.y, b.z),
            Point::new(a.x, b.y, b.z),
            Point::new(b.x, b.y, b.z),
        ]
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }
}

/// Discrete part surface: shared vertex list plus indexed triangular facets.
///
/// Invariants enforced by [`TriangleMesh::new`]: at least one facet, every
/// index in range, every coordinate finite. The mesh is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    facets: Vec<[u32; 3]>,
    normals: Vec<Vector>,
}

impl TriangleMesh {
    /// Builds a mesh, deriving facet normals from the vertex winding.
    pub fn new(vertices: Vec<Point>, facets: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let normals = vec![Vector::zeros(); facets.len()];
        Self::with_normals(vertices, facets, normals)
    }

    /// Builds a mesh with advisory per-facet normals.
    ///
    /// A facet normal is replaced by the winding normal whenever the facet
    /// has nonzero area. Degenerate facets keep the supplied normal when it is
    /// unit length, otherwise they get the zero vector.
    pub fn with_normals(
        vertices: Vec<Point>,
        facets: Vec<[u32; 3]>,
        mut normals: Vec<Vector>,
    ) -> Result<Self, MeshError> {
        if facets.is_empty() {
            return Err(MeshError::Empty);
        }
        assert_eq!(normals.len(), facets.len(), "one normal per facet");
        if let Some(vertex) = vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(MeshError::NonFinite { vertex });
        }
        for (facet, f) in facets.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(MeshError::BadIndex {
                    facet,
                    index,
                    count: vertices.len(),
                });
            }
        }
        for (f, n) in facets.iter().zip(normals.iter_mut()) {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            if len > 0.0 && len.is_finite() {
                *n = cross / len;
            } else if !(n.iter().all(|c| c.is_finite()) && (n.norm() - 1.0).abs() < 1e-4) {
                *n = Vector::zeros();
            }
        }
        Ok(TriangleMesh {
            vertices,
            facets,
            normals,
        })
    }

    /// Builds a vertex soup: three fresh vertices per triangle.
    pub fn from_triangles(triangles: &[[Point; 3]]) -> Result<Self, MeshError> {
        let vertices: Vec<Point> = triangles.iter().flatten().copied().collect();
        let facets = (0..triangles.len() as u32)
            .map(|i| [3 * i, 3 * i + 1, 3 * i + 2])
            .collect();
        Self::new(vertices, facets)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[[u32; 3]] {
        &self.facets
    }

    /// Unit facet normal, or zero for a degenerate facet without a usable file normal.
    pub fn normal(&self, facet: usize) -> Vector {
        self.normals[facet]
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn triangle(&self, facet: usize) -> [Point; 3] {
        self.facets[facet].map(|i| self.vertices[i as usize])
    }

    pub fn triangles(&self) -> impl ExactSizeIterator<Item = [Point; 3]> + '_ {
        (0..self.facets.len()).map(|f| self.triangle(f))
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Rigidly or affinely maps every vertex; normals are re-derived.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<Self, MeshError> {
        let vertices = self.vertices.iter().map(f).collect();
        Self::with_normals(vertices, self.facets.clone(), self.normals.clone())
    }

    pub fn translated(&self, t: &Vector) -> Self {
        self.map_vertices(|p| p + t).expect("translation keeps mesh valid")
    }

    /// Concatenates two meshes, re-indexing the second.
    pub fn merged(&self, other: &TriangleMesh) -> Self {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut facets = self.facets.clone();
        facets.extend(other.facets.iter().map(|f| f.map(|i| i + offset)));
        let mut normals = self.normals.clone();
        normals.extend_from_slice(&other.normals);
        TriangleMesh {
            vertices,
            facets,
            normals,
        }
    }

    /// Reorders facets; `order[k]` is the source facet of output facet `k`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.facets.len());
        TriangleMesh {
            vertices: self.vertices.clone(),
            facets: order.iter().map(|&i| self.facets[i]).collect(),
            normals: order.iter().map(|&i| self.normals[i]).collect(),
        }
    }

    /// Lengths of all nonzero facet edges (each facet contributes three).
    pub fn edge_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.facets.len() * 3);
        for [a, b, c] in self.triangles() {
            for len in [(b - a).norm(), (c - b).norm(), (a - c).norm()] {
                if len > 0.0 {
                    out.push(len);
                }
            }
        }
        out
    }
}

/// Componentwise min/max over all vertices.
pub fn bounding_box(mesh: &TriangleMesh) -> Aabb {
    mesh.bounding_box()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub facet_count: usize,
    pub vertex_count: usize,
    /// Indices of zero-area facets. They stay in the mesh with zero weight.
    pub degenerate_facets: Vec<usize>,
    pub duplicate_facets: usize,
    pub non_finite_values: usize,
}

impl ValidationReport {
    pub fn degenerate_count(&self) -> usize {
        self.degenerate_facets.len()
    }
}

/// True when the facet's cross product vanishes relative to its edge scale.
pub fn is_degenerate(tri: &[Point; 3]) -> bool {
    let [a, b, c] = tri;
    let e0 = b - a;
    let e1 = c - a;
    let scale = e0.norm_squared().max(e1.norm_squared()).max((c - b).norm_squared());
    let cross = e0.cross(&e1).norm();
    scale == 0.0 || cross <= 1e-12 * scale
}

pub fn validate_mesh(mesh: &TriangleMesh) -> Result<ValidationReport, MeshError> {
    let non_finite_values = mesh
        .vertices()
        .iter()
        .flat_map(|v| v.iter())
        .filter(|c| !c.is_finite())
        .count();
    let mut degenerate_facets = Vec::new();
    let mut seen = HashSet::with_capacity(mesh.facet_count());
    let mut duplicate_facets = 0;
    for (i, tri) in mesh.triangles().enumerate() {
        if is_degenerate(&tri) {
            degenerate_facets.push(i);
        }
        let mut key = tri.map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]);
        key.sort_unstable();
        if !seen.insert(key) {
            duplicate_facets += 1;
        }
    }
    if degenerate_facets.len() == mesh.facet_count() {
        return Err(MeshError::NoUsableArea(mesh.facet_count()));
    }
    Ok(ValidationReport {
        facet_count: mesh.facet_count(),
        vertex_count: mesh.vertices().len(),
        degenerate_facets,
        duplicate_facets,
        non_finite_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn cube_validates_clean() {
        let cube = shapes::unit_cube();
        let report = validate_mesh(&cube).unwrap();
        assert_eq!(report.facet_count, 12);
        assert_eq!(report.degenerate_count(), 0);
        assert_eq!(report.duplicate_facets, 0);
    }

    #[test]
    fn collinear_facet_is_flagged_not_fatal() {
        let cube = shapes::unit_cube();
        let line = TriangleMesh::from_triangles(&[[
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 1.0),
            Point::new(2.0, 2.0, 2.0),
        ]])
        .unwrap();
        let report = validate_mesh(&cube.merged(&line)).unwrap();
        assert_eq!(report.degenerate_facets, vec![12]);
    }

    #[test]
    fn all_degenerate_is_fatal() {
        let mesh = TriangleMesh::from_triangles(&[
            [Point::origin(), Point::new(1.0, 1.0, 1.0), Point::new(2.0, 2.0, 2.0)],
            [Point::origin(), Point::origin(), Point::new(0.0, 0.0, 3.0)],
        ])
        .unwrap();
        assert!(matches!(validate_mesh(&mesh), Err(MeshError::NoUsableArea(2))));
    }

    #[test]
    fn duplicate_facets_counted() {
        let tri = [Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let rotated = [tri[1], tri[2], tri[0]];
        let mesh = TriangleMesh::from_triangles(&[tri, rotated]).unwrap();
        assert_eq!(validate_mesh(&mesh).unwrap().duplicate_facets, 1);
    }

    #[test]
    fn bounding_boxes() {
        let cube = shapes::unit_cube();
        let bb = bounding_box(&cube);
        assert_eq!(bb.min, Point::origin());
        assert_eq!(bb.max, Point::new(1.0, 1.0, 1.0));

        let tri =
            TriangleMesh::from_triangles(&[[Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)]])
                .unwrap();
        let bb = bounding_box(&tri);
        assert_eq!(bb.min, Point::origin());
        assert_eq!(bb.max, Point::new(1.0, 1.0, 0.0));

        let moved = bounding_box(&cube.translated(&Vector::new(10.0, 0.0, 0.0)));
        assert_eq!(moved.min, Point::new(10.0, 0.0, 0.0));
        assert_eq!(moved.max, Point::new(11.0, 1.0, 1.0));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(TriangleMesh::new(vec![], vec![]), Err(MeshError::Empty)));
        let verts = vec![
            Point::origin(),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, f64::NAN, 0.0),
        ];
        assert!(matches!(
            TriangleMesh::new(verts, vec![[0, 1, 2]]),
            Err(MeshError::NonFinite { vertex: 2 })
        ));
        let verts = vec![Point::origin(), Point::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            TriangleMesh::new(verts, vec![[0, 1, 2]]),
            Err(MeshError::BadIndex { index: 2, .. })
        ));
    }

    #[test]
    fn winding_normal_overrides_file_normal() {
        let verts = vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let mesh = TriangleMesh::with_normals(verts, vec![[0, 1, 2]], vec![Vector::new(0.0, 0.0, -1.0)]).unwrap();
        assert_eq!(mesh.normal(0), Vector::new(0.0, 0.0, 1.0));
    }
}
