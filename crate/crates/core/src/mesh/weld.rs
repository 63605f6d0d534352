//! Vertex welding on a spatial hash plus edge-to-facet adjacency.

use std::collections::{BTreeMap, HashMap};

use super::{Point, TriangleMesh, Vector};

pub const DEFAULT_WELD_TOLERANCE: f64 = 1e-6;

/// Undirected edge with the smaller vertex index first.
pub type EdgeKey = (u32, u32);

#[derive(Debug, Clone)]
pub struct WeldedMesh {
    pub vertices: Vec<Point>,
    pub facets: Vec<[u32; 3]>,
    /// Maps each edge to the facets using it, in facet-index order.
    pub edges: BTreeMap<EdgeKey, Vec<u32>>,
    /// `remap[i]` is the welded index of source vertex `i`.
    pub remap: Vec<u32>,
}

impl WeldedMesh {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Winding normal of a welded facet (zero when degenerate).
    pub fn facet_normal(&self, facet: usize) -> Vector {
        let [a, b, c] = self.facets[facet].map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a)).try_normalize(0.0).unwrap_or_else(Vector::zeros)
    }
}

/// Merges vertices closer than `tolerance`.
///
/// Vertices are visited in index order; each one joins the nearest existing
/// representative within `tolerance` (lowest index on ties) or becomes a new
/// representative. Representatives keep their original position, so no vertex
/// moves by more than `tolerance`. With `tolerance == 0` only bit-identical
/// positions merge.
pub fn weld_vertices(mesh: &TriangleMesh, tolerance: f64) -> WeldedMesh {
    assert!(tolerance >= 0.0, "weld tolerance must be non-negative");
    let source = mesh.vertices();
    let mut vertices: Vec<Point> = Vec::new();
    let mut remap = Vec::with_capacity(source.len());

    if tolerance == 0.0 {
        let mut exact: HashMap<[u64; 3], u32> = HashMap::new();
        for p in source {
            let key = [p.x, p.y, p.z].map(|c| (c + 0.0).to_bits());
            let id = *exact.entry(key).or_insert_with(|| {
                vertices.push(*p);
                (vertices.len() - 1) as u32
            });
            remap.push(id);
        }
    } else {
        let cell_of = |p: &Point| -> [i64; 3] { [p.x, p.y, p.z].map(|c| (c / tolerance).floor() as i64) };
        let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for p in source {
            let cell = cell_of(p);
            let mut best: Option<(f64, u32)> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let key = [cell[0] + dx, cell[1] + dy, cell[2] + dz];
                        let Some(bucket) = grid.get(&key) else { continue };
                        for &rep in bucket {
                            let d = (vertices[rep as usize] - p).norm();
                            if d <= tolerance && best.is_none_or(|(bd, bi)| (d, rep) < (bd, bi)) {
                                best = Some((d, rep));
                            }
                        }
                    }
                }
            }
            let id = match best {
                Some((_, rep)) => rep,
                None => {
                    vertices.push(*p);
                    let id = (vertices.len() - 1) as u32;
                    grid.entry(cell).or_default().push(id);
                    id
                }
            };
            remap.push(id);
        }
    }

    let facets: Vec<[u32; 3]> = mesh.facets().iter().map(|f| f.map(|i| remap[i as usize])).collect();
    let mut edges: BTreeMap<EdgeKey, Vec<u32>> = BTreeMap::new();
    for (fi, f) in facets.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if a == b {
                continue;
            }
            let list = edges.entry((a.min(b), a.max(b))).or_default();
            if list.last() != Some(&(fi as u32)) {
                list.push(fi as u32);
            }
        }
    }
    WeldedMesh {
        vertices,
        facets,
        edges,
        remap,
    }
}
