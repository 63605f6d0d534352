//! Surface mass properties by superposition of facet contributions.
//!
//! The part centroid is the area-weighted mean of facet centroids. This is
//! the centroid of the triangulated shell, not of the enclosed volume: for
//! parts with non-uniform wall thickness it differs from the physical centre
//! of mass, and no correction is applied.

use crate::mesh::{Point, TriangleMesh, Vector};
use crate::parallel::Parallelism;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MassError {
    #[error("mesh has zero total surface area")]
    ZeroArea,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetProperties {
    /// mm²
    pub area: f64,
    pub centroid: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterOfMass {
    pub point: Point,
    /// Total surface area, mm².
    pub total_area: f64,
}

/// Triangle area: half the norm of the cross product of two edge vectors.
pub fn facet_area(v1: &Point, v2: &Point, v3: &Point) -> f64 {
    0.5 * (v2 - v1).cross(&(v3 - v1)).norm()
}

pub fn facet_centroid(v1: &Point, v2: &Point, v3: &Point) -> Point {
    Point::from((v1.coords + v2.coords + v3.coords) / 3.0)
}

pub fn facet_properties(tri: &[Point; 3]) -> FacetProperties {
    FacetProperties {
        area: facet_area(&tri[0], &tri[1], &tri[2]),
        centroid: facet_centroid(&tri[0], &tri[1], &tri[2]),
    }
}

pub fn mesh_center_of_mass(mesh: &TriangleMesh) -> Result<CenterOfMass, MassError> {
    mesh_center_of_mass_with(mesh, Parallelism::Sequential)
}

/// Same result under every policy: partial sums are taken over fixed-size
/// facet chunks and folded in chunk order.
pub fn mesh_center_of_mass_with(mesh: &TriangleMesh, par: Parallelism) -> Result<CenterOfMass, MassError> {
    let partials = par.map_chunks(mesh.facet_count(), |range| {
        let mut moment = Vector::zeros();
        let mut area = 0.0;
        for f in range {
            let props = facet_properties(&mesh.triangle(f));
            moment += props.centroid.coords * props.area;
            area += props.area;
        }
        (moment, area)
    });
    let (moment, total_area) = partials
        .into_iter()
        .fold((Vector::zeros(), 0.0), |(m, a), (pm, pa)| (m + pm, a + pa));
    if total_area.is_nan() || total_area <= 0.0 {
        return Err(MassError::ZeroArea);
    }
    Ok(CenterOfMass {
        point: Point::from(moment / total_area),
        total_area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z)
    }

    #[test]
    fn areas() {
        assert_eq!(facet_area(&p(0.0, 0.0, 0.0), &p(3.0, 0.0, 0.0), &p(0.0, 4.0, 0.0)), 6.0);
        assert_eq!(facet_area(&p(0.0, 0.0, 0.0), &p(1.0, 1.0, 1.0), &p(2.0, 2.0, 2.0)), 0.0);
        assert_eq!(facet_area(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(0.0, 1.0, 0.0)), 0.5);
    }

    #[test]
    fn centroids() {
        let c = facet_centroid(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(0.0, 1.0, 0.0));
        assert_relative_eq!(c, p(1.0 / 3.0, 1.0 / 3.0, 0.0));

        let s = 3f64.sqrt() / 2.0;
        let c = facet_centroid(&p(1.0, 0.0, 0.0), &p(-0.5, s, 0.0), &p(-0.5, -s, 0.0));
        assert_relative_eq!(c, Point::origin(), epsilon = 1e-15);

        let t = Vector::new(5.0, -2.0, 7.5);
        let tri = [p(0.3, 0.1, 2.0), p(4.0, 1.0, -1.0), p(2.0, 9.0, 0.5)];
        let moved = facet_centroid(&(tri[0] + t), &(tri[1] + t), &(tri[2] + t));
        assert_relative_eq!(moved, facet_centroid(&tri[0], &tri[1], &tri[2]) + t, epsilon = 1e-12);
    }

    #[test]
    fn cube_and_open_box() {
        let cm = mesh_center_of_mass(&shapes::unit_cube()).unwrap();
        assert_relative_eq!(cm.point, p(0.5, 0.5, 0.5), max_relative = 1e-9);
        assert_relative_eq!(cm.total_area, 6.0);

        let cm = mesh_center_of_mass(&shapes::open_unit_box()).unwrap();
        assert_relative_eq!(cm.point, p(0.5, 0.5, 0.4), max_relative = 1e-9);
    }

    #[test]
    fn zero_area_rejected() {
        let mesh = crate::mesh::TriangleMesh::from_triangles(&[[Point::origin(), p(1.0, 1.0, 1.0), p(2.0, 2.0, 2.0)]])
            .unwrap();
        assert_eq!(mesh_center_of_mass(&mesh), Err(MassError::ZeroArea));
    }

    #[test]
    fn degenerate_facets_carry_no_weight() {
        let cube = shapes::unit_cube();
        let junk =
            crate::mesh::TriangleMesh::from_triangles(&[[p(9.0, 9.0, 9.0), p(10.0, 10.0, 10.0), p(11.0, 11.0, 11.0)]])
                .unwrap();
        let a = mesh_center_of_mass(&cube).unwrap();
        let b = mesh_center_of_mass(&cube.merged(&junk)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn policies_agree_bitwise() {
        let mesh = shapes::tessellated_dome(60, 80.0, 9.0);
        let seq = mesh_center_of_mass_with(&mesh, Parallelism::Sequential).unwrap();
        for par in [Parallelism::Auto, Parallelism::Threads(2), Parallelism::Threads(8)] {
            let got = par.install(|| mesh_center_of_mass_with(&mesh, par).unwrap());
            assert_eq!(got, seq);
        }
    }

    fn arb_mesh() -> impl Strategy<Value = crate::mesh::TriangleMesh> {
        prop::collection::vec(prop::array::uniform3(prop::array::uniform3(-50.0f64..50.0)), 1..40).prop_filter_map(
            "needs area",
            |tris| {
                let tris: Vec<[Point; 3]> = tris.iter().map(|t| t.map(Point::from)).collect();
                let mesh = crate::mesh::TriangleMesh::from_triangles(&tris).ok()?;
                mesh_center_of_mass(&mesh).ok().filter(|c| c.total_area > 1e-3)?;
                Some(mesh)
            },
        )
    }

    fn close(a: &Point, b: &Point, scale: f64) -> bool {
        (a - b).amax() <= 1e-9 * scale.max(1.0)
    }

    proptest! {
        #[test]
        fn translation_equivariant(mesh in arb_mesh(), t in prop::array::uniform3(-1.0e3f64..1.0e3)) {
            let t = Vector::from(t);
            let a = mesh_center_of_mass(&mesh).unwrap().point;
            let b = mesh_center_of_mass(&mesh.translated(&t)).unwrap().point;
            prop_assert!(close(&(a + t), &b, (a + t).coords.amax()));
        }

        #[test]
        fn rotation_equivariant(mesh in arb_mesh(), axis in prop::array::uniform3(-1.0f64..1.0), angle in 0.0f64..std::f64::consts::TAU) {
            let Some(axis) = Unit::try_new(Vector::from(axis), 1e-3) else { return Ok(()) };
            let r = Rotation3::from_axis_angle(&axis, angle);
            let a = mesh_center_of_mass(&mesh).unwrap().point;
            let b = mesh_center_of_mass(&mesh.map_vertices(|p| r * p).unwrap()).unwrap().point;
            prop_assert!(close(&(r * a), &b, 50.0));
        }

        #[test]
        fn scale_covariant(mesh in arb_mesh(), s in 0.01f64..100.0) {
            let a = mesh_center_of_mass(&mesh).unwrap().point;
            let b = mesh_center_of_mass(&mesh.map_vertices(|p| p * s).unwrap()).unwrap().point;
            prop_assert!(close(&(a * s), &b, 50.0 * s));
        }

        #[test]
        fn permutation_invariant(mesh in arb_mesh(), seed in any::<u64>()) {
            let mut order: Vec<usize> = (0..mesh.facet_count()).collect();
            let mut state = seed | 1;
            for i in (1..order.len()).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                order.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let a = mesh_center_of_mass(&mesh).unwrap().point;
            let b = mesh_center_of_mass(&mesh.permuted(&order)).unwrap().point;
            prop_assert!(close(&a, &b, 50.0));
        }

        #[test]
        fn inside_bounding_box(mesh in arb_mesh()) {
            let c = mesh_center_of_mass(&mesh).unwrap().point;
            let bb = mesh.bounding_box();
            for k in 0..3 {
                prop_assert!(c[k] >= bb.min[k] - 1e-9 && c[k] <= bb.max[k] + 1e-9);
            }
        }
    }
}
