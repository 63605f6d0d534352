//! Deterministic mesh generators used for fixtures, benchmarks and the gate marker.
//!
//! All generators emit triangle soups (three vertices per facet) with
//! outward-facing winding unless noted.

use std::collections::HashMap;

use crate::mesh::{Point, TriangleMesh, Vector};

#[derive(Default)]
struct Soup {
    tris: Vec<[Point; 3]>,
}

impl Soup {
    /// Quad split along (a, c), flipped if needed so the winding normal agrees with `outward`.
    fn quad(&mut self, a: Point, b: Point, c: Point, d: Point, outward: Vector) {
        let n = (b - a).cross(&(c - a));
        if n.dot(&outward) >= 0.0 {
            self.tris.push([a, b, c]);
            self.tris.push([a, c, d]);
        } else {
            self.tris.push([a, c, b]);
            self.tris.push([a, d, c]);
        }
    }

    fn tri(&mut self, a: Point, b: Point, c: Point, outward: Vector) {
        if (b - a).cross(&(c - a)).dot(&outward) >= 0.0 {
            self.tris.push([a, b, c]);
        } else {
            self.tris.push([a, c, b]);
        }
    }

    fn build(self) -> TriangleMesh {
        TriangleMesh::from_triangles(&self.tris).expect("generated mesh is valid")
    }
}

fn p(x: f64, y: f64, z: f64) -> Point {
    Point::new(x, y, z)
}

fn box_faces(soup: &mut Soup, min: Point, max: Point, skip_top: bool) {
    let (x0, y0, z0) = (min.x, min.y, min.z);
    let (x1, y1, z1) = (max.x, max.y, max.z);
    soup.quad(p(x0, y0, z0), p(x0, y1, z0), p(x1, y1, z0), p(x1, y0, z0), -Vector::z());
    if !skip_top {
        soup.quad(p(x0, y0, z1), p(x1, y0, z1), p(x1, y1, z1), p(x0, y1, z1), Vector::z());
    }
    soup.quad(p(x0, y0, z0), p(x1, y0, z0), p(x1, y0, z1), p(x0, y0, z1), -Vector::y());
    soup.quad(p(x0, y1, z0), p(x0, y1, z1), p(x1, y1, z1), p(x1, y1, z0), Vector::y());
    soup.quad(p(x0, y0, z0), p(x0, y0, z1), p(x0, y1, z1), p(x0, y1, z0), -Vector::x());
    soup.quad(p(x1, y0, z0), p(x1, y1, z0), p(x1, y1, z1), p(x1, y0, z1), Vector::x());
}

/// Closed box with 12 facets.
pub fn box_mesh(min: Point, max: Point) -> TriangleMesh {
    let mut soup = Soup::default();
    box_faces(&mut soup, min, max, false);
    soup.build()
}

pub fn unit_cube() -> TriangleMesh {
    box_mesh(Point::origin(), p(1.0, 1.0, 1.0))
}

/// Unit cube without its top face (10 facets).
pub fn open_unit_box() -> TriangleMesh {
    let mut soup = Soup::default();
    box_faces(&mut soup, Point::origin(), p(1.0, 1.0, 1.0), true);
    soup.build()
}

/// Flat plate `[0,width] x [0,depth] x [0,thickness]`.
pub fn plate(width: f64, depth: f64, thickness: f64) -> TriangleMesh {
    box_mesh(Point::origin(), p(width, depth, thickness))
}

/// Plate with a square through-hole spanning `[lo,hi]` on both x and y (32 facets).
pub fn plate_with_hole(width: f64, depth: f64, thickness: f64, lo: f64, hi: f64) -> TriangleMesh {
    assert!(0.0 < lo && lo < hi && hi < width.min(depth));
    let mut soup = Soup::default();
    for (z, n) in [(thickness, Vector::z()), (0.0, -Vector::z())] {
        soup.quad(p(0.0, 0.0, z), p(width, 0.0, z), p(hi, lo, z), p(lo, lo, z), n);
        soup.quad(p(width, 0.0, z), p(width, depth, z), p(hi, hi, z), p(hi, lo, z), n);
        soup.quad(p(width, depth, z), p(0.0, depth, z), p(lo, hi, z), p(hi, hi, z), n);
        soup.quad(p(0.0, depth, z), p(0.0, 0.0, z), p(lo, lo, z), p(lo, hi, z), n);
    }
    let t = thickness;
    // outer walls
    soup.quad(
        p(0.0, 0.0, 0.0),
        p(width, 0.0, 0.0),
        p(width, 0.0, t),
        p(0.0, 0.0, t),
        -Vector::y(),
    );
    soup.quad(
        p(0.0, depth, 0.0),
        p(0.0, depth, t),
        p(width, depth, t),
        p(width, depth, 0.0),
        Vector::y(),
    );
    soup.quad(
        p(0.0, 0.0, 0.0),
        p(0.0, 0.0, t),
        p(0.0, depth, t),
        p(0.0, depth, 0.0),
        -Vector::x(),
    );
    soup.quad(
        p(width, 0.0, 0.0),
        p(width, depth, 0.0),
        p(width, depth, t),
        p(width, 0.0, t),
        Vector::x(),
    );
    // hole walls face into the hole
    soup.quad(p(lo, lo, 0.0), p(hi, lo, 0.0), p(hi, lo, t), p(lo, lo, t), Vector::y());
    soup.quad(p(lo, hi, 0.0), p(lo, hi, t), p(hi, hi, t), p(hi, hi, 0.0), -Vector::y());
    soup.quad(p(lo, lo, 0.0), p(lo, lo, t), p(lo, hi, t), p(lo, hi, 0.0), Vector::x());
    soup.quad(p(hi, lo, 0.0), p(hi, hi, 0.0), p(hi, hi, t), p(hi, lo, t), -Vector::x());
    soup.build()
}

/// Two-level stepped block: a tall section on `x < split` and a thin one beyond.
pub fn stepped_block(length: f64, width: f64, split: f64, tall: f64, thin: f64) -> TriangleMesh {
    let mut soup = Soup::default();
    box_faces(&mut soup, Point::origin(), p(split, width, tall), false);
    box_faces(&mut soup, p(split, 0.0, 0.0), p(length, width, thin), false);
    soup.build()
}

/// Closed slab whose top is the height field
/// `z = base + height * sin(pi x / size) * sin(pi y / size)` sampled on an
/// `n x n` quad grid. Facet count is `4 n^2 + 8 n`.
pub fn tessellated_dome(n: usize, size: f64, height: f64) -> TriangleMesh {
    assert!(n >= 1);
    let base = 2.0;
    let step = size / n as f64;
    let coord = |i: usize| if i == n { size } else { i as f64 * step };
    let top = |i: usize, j: usize| {
        let (x, y) = (coord(i), coord(j));
        let s = (std::f64::consts::PI * x / size).sin() * (std::f64::consts::PI * y / size).sin();
        p(x, y, base + height * s.max(0.0))
    };
    let bottom = |i: usize, j: usize| p(coord(i), coord(j), 0.0);
    let mut soup = Soup::default();
    for i in 0..n {
        for j in 0..n {
            soup.quad(top(i, j), top(i + 1, j), top(i + 1, j + 1), top(i, j + 1), Vector::z());
            soup.quad(
                bottom(i, j),
                bottom(i + 1, j),
                bottom(i + 1, j + 1),
                bottom(i, j + 1),
                -Vector::z(),
            );
        }
    }
    for k in 0..n {
        soup.quad(bottom(k, 0), bottom(k + 1, 0), top(k + 1, 0), top(k, 0), -Vector::y());
        soup.quad(bottom(k, n), bottom(k + 1, n), top(k + 1, n), top(k, n), Vector::y());
        soup.quad(bottom(0, k), bottom(0, k + 1), top(0, k + 1), top(0, k), -Vector::x());
        soup.quad(bottom(n, k), bottom(n, k + 1), top(n, k + 1), top(n, k), Vector::x());
    }
    soup.build()
}

/// Indexed icosphere. Each subdivision level quadruples the 20 base facets.
pub fn icosphere(center: Point, radius: f64, subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vector>| -> u32 {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push((verts[a as usize] + verts[b as usize]).normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for f in &mut faces {
        let [a, b, c] = f.map(|i| verts[i as usize]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }
    let points = verts.iter().map(|v| center + v * radius).collect();
    TriangleMesh::new(points, faces).expect("icosphere is valid")
}

/// Single triangle, convenient for intersection tests.
pub fn single_triangle(a: Point, b: Point, c: Point) -> TriangleMesh {
    let mut soup = Soup::default();
    let n = (b - a).cross(&(c - a));
    soup.tri(a, b, c, n);
    soup.build()
}
