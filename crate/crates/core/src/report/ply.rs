//! Binary little-endian PLY with per-vertex colour: the part plus a gate marker sphere.

use super::{PlanOutcome, ReportError};
use crate::mesh::TriangleMesh;
use crate::shapes::icosphere;

pub const PART_COLOR: [u8; 3] = [180, 180, 180];
pub const MARKER_COLOR: [u8; 3] = [220, 30, 30];
/// One subdivision of the icosahedron: 80 facets.
pub const MARKER_SUBDIVISIONS: u32 = 1;

/// Part mesh plus an icosphere of radius `R_gate` centred on the gate point.
pub fn export_marked_geometry(mesh: &TriangleMesh, outcome: &PlanOutcome) -> Result<Vec<u8>, ReportError> {
    let plan = match outcome {
        PlanOutcome::Planned(plan) => plan,
        PlanOutcome::Infeasible { total_nodes, .. } => {
            return Err(ReportError::Infeasible {
                total_nodes: *total_nodes,
            })
        }
    };
    let marker = icosphere(plan.gate_point, plan.sizing.r_gate, MARKER_SUBDIVISIONS);
    let parts = [(mesh, PART_COLOR), (&marker, MARKER_COLOR)];

    let vertex_count: usize = parts.iter().map(|(m, _)| m.vertices().len()).sum();
    let face_count: usize = parts.iter().map(|(m, _)| m.facet_count()).sum();
    let header = format!(
        "ply\nformat binary_little_endian 1.0\ncomment moldgate part with gate marker\n\
         element vertex {vertex_count}\nproperty float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n\
         element face {face_count}\nproperty list uchar int vertex_indices\nend_header\n"
    );
    let mut out = Vec::with_capacity(header.len() + vertex_count * 15 + face_count * 13);
    out.extend_from_slice(header.as_bytes());
    for (m, color) in &parts {
        for v in m.vertices() {
            for c in [v.x, v.y, v.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
            out.extend_from_slice(color);
        }
    }
    let mut base = 0i32;
    for (m, _) in &parts {
        for f in m.facets() {
            out.push(3);
            for &i in f {
                out.extend_from_slice(&(base + i as i32).to_le_bytes());
            }
        }
        base += m.vertices().len() as i32;
    }
    Ok(out)
}
