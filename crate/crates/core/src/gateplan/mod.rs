//! Gate location on the part surface.
//!
//! A lattice of candidate nodes is laid over the part footprint in a plane
//! orthogonal to the demolding direction. Each node, together with a ring of
//! gate-radius points around it, is projected onto the part along `-D_d`.
//! Nodes whose whole ring lands on the same front-facing surface are
//! feasible; the feasible surface point nearest to the area-weighted part
//! centroid becomes the gate. In aesthetic mode the gate is instead the
//! parting-line point nearest to the centroid.
//!
//! Tie-breaking is fully specified so plans are reproducible: 3D distance to
//! the centroid, then planar node distance to the projected centroid, then
//! lexicographic `(i, j)`. Parting-line ties go to the lexicographically
//! smallest point. Distances within [`TIE_TOLERANCE`] (relative, floored at
//! 1 mm) of the minimum are ties.

mod evaluate;
mod grid;
mod parting;

use std::collections::BTreeMap;

use nalgebra::Unit;

use crate::mass::{mesh_center_of_mass_with, CenterOfMass, MassError};
use crate::mesh::{validate_mesh, weld_vertices, MeshError, Point, TriangleMesh, Vector, DEFAULT_WELD_TOLERANCE};
use crate::parallel::Parallelism;
use crate::rheology::{pressure_drop, size_gate, GateSizing, MaterialParams, RheologyError};
use crate::spatial::Bvh;

pub use evaluate::{
    evaluate_grid, evaluate_node, rejection_histogram, select_gate, selection_key, NodeContext, NodeEvaluation,
    RejectionReason,
};
pub use grid::{build_grid, default_spacing, ring_points, Frame, NodalGrid, NodeId, PLANE_OFFSET};
pub use parting::{
    classify, nearest_candidate, parse_polyline, parting_line_candidates, polyline_candidates, sample_segments,
    silhouette_edges, Visibility, VISIBILITY_EPS,
};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("R_gate must be smaller than part thickness (R_gate = {r_gate:.4} mm, thickness H = {thickness} mm)")]
    ThicknessViolation { r_gate: f64, thickness: f64 },
    #[error(
        "no valid gate location: all {total_nodes} nodes rejected ({})",
        format_histogram(rejections)
    )]
    NoFeasibleGate {
        total_nodes: usize,
        rejections: BTreeMap<RejectionReason, usize>,
    },
    #[error("part footprint orthogonal to the demolding direction is degenerate")]
    DegenerateFootprint,
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("invalid plan configuration: {0}")]
    BadConfig(String),
    #[error("aesthetic mode unavailable: no silhouette edges with respect to the demolding direction")]
    NoSilhouette,
    #[error("parting-line file line {line}: {message}")]
    BadPolyline { line: usize, message: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Mass(#[from] MassError),
    #[error(transparent)]
    Rheology(#[from] RheologyError),
}

/// Relative tolerance under which two selection distances count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub(crate) fn within_tie(value: f64, best: f64) -> bool {
    value <= best + TIE_TOLERANCE * best.max(1.0)
}

fn format_histogram(h: &BTreeMap<RejectionReason, usize>) -> String {
    h.iter()
        .map(|(r, n)| format!("{}: {n}", r.as_str()))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Ring-depth coherence policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DepthCheck {
    /// Tolerance equals the part thickness.
    #[default]
    Thickness,
    /// Explicit tolerance, mm.
    Tolerance(f64),
    /// Only hit/miss and facing are checked.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GateMode {
    Standard,
    Aesthetic,
}

impl GateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GateMode::Standard => "standard",
            GateMode::Aesthetic => "aesthetic",
        }
    }
}

/// Unit demolding direction `D_d`.
pub type Direction = Unit<Vector>;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanConfig {
    pub demold_dir: Direction,
    /// Lattice spacing in mm; `None` selects [`default_spacing`].
    pub grid_spacing: Option<f64>,
    pub ring_samples: usize,
    /// Part thickness H, mm.
    pub thickness: f64,
    pub aesthetic: bool,
    pub depth_check: DepthCheck,
    /// Width/height ratio of an equivalent rectangular gate, when requested.
    pub rect_aspect: Option<f64>,
    /// Overrides the silhouette approximation in aesthetic mode.
    pub parting_line: Option<Vec<Point>>,
    pub parallelism: Parallelism,
}

pub const DEFAULT_RING_SAMPLES: usize = 16;
pub const DEFAULT_RECT_ASPECT: f64 = 4.0;

impl PlanConfig {
    pub fn new(thickness: f64) -> Self {
        PlanConfig {
            demold_dir: Vector::z_axis(),
            grid_spacing: None,
            ring_samples: DEFAULT_RING_SAMPLES,
            thickness,
            aesthetic: false,
            depth_check: DepthCheck::Thickness,
            rect_aspect: None,
            parting_line: None,
            parallelism: Parallelism::Auto,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::BadConfig(m.to_string()));
        if !self.thickness.is_finite() || self.thickness <= 0.0 {
            return bad("thickness must be positive");
        }
        if self.ring_samples < 8 {
            return bad("ring sample count must be at least 8");
        }
        if (self.demold_dir.norm() - 1.0).abs() > 1e-12 {
            return bad("demolding direction must be a unit vector");
        }
        if let Some(s) = self.grid_spacing {
            if !s.is_finite() || s <= 0.0 {
                return Err(PlanError::BadSpacing(s));
            }
        }
        if let DepthCheck::Tolerance(t) = self.depth_check {
            if t.is_nan() || t < 0.0 {
                return bad("depth coherence tolerance must be non-negative");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartingSource {
    Silhouette,
    Polyline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatePlan {
    pub mode: GateMode,
    pub center_of_mass: CenterOfMass,
    /// Injection point on the part surface, mm.
    pub gate_point: Point,
    pub distance_to_cm: f64,
    pub sizing: GateSizing,
    pub chosen_node: Option<NodeId>,
    pub spacing: f64,
    pub grid_shape: Option<(usize, usize)>,
    pub total_nodes: usize,
    pub feasible_nodes: usize,
    pub rejections: BTreeMap<RejectionReason, usize>,
    pub parting_source: Option<PartingSource>,
    pub parting_candidates: usize,
    /// Farthest-vertex flow length proxy L, mm.
    pub flow_length: f64,
    /// Cavity pressure drop estimate, MPa.
    pub pressure_drop: f64,
    pub thickness: f64,
}

/// Upper-bound proxy for the melt flow length: farthest mesh vertex from the gate.
pub fn flow_length_proxy(mesh: &TriangleMesh, gate_point: &Point) -> f64 {
    mesh.vertices()
        .iter()
        .map(|v| (v - gate_point).norm())
        .fold(0.0, f64::max)
}

pub fn plan_gate(mesh: &TriangleMesh, material: &MaterialParams, config: &PlanConfig) -> Result<GatePlan, PlanError> {
    config.validate()?;
    let par = config.parallelism;
    par.install(|| plan_inner(mesh, material, config, par))
}

fn plan_inner(
    mesh: &TriangleMesh,
    material: &MaterialParams,
    config: &PlanConfig,
    par: Parallelism,
) -> Result<GatePlan, PlanError> {
    validate_mesh(mesh)?;
    let cm = mesh_center_of_mass_with(mesh, par)?;
    let sizing = size_gate(material, config.rect_aspect)?;
    if sizing.r_gate >= config.thickness {
        return Err(PlanError::ThicknessViolation {
            r_gate: sizing.r_gate,
            thickness: config.thickness,
        });
    }
    let spacing = config.grid_spacing.unwrap_or_else(|| default_spacing(mesh));

    let mut plan = GatePlan {
        mode: GateMode::Standard,
        center_of_mass: cm,
        gate_point: cm.point,
        distance_to_cm: 0.0,
        sizing,
        chosen_node: None,
        spacing,
        grid_shape: None,
        total_nodes: 0,
        feasible_nodes: 0,
        rejections: BTreeMap::new(),
        parting_source: None,
        parting_candidates: 0,
        flow_length: 0.0,
        pressure_drop: 0.0,
        thickness: config.thickness,
    };

    if config.aesthetic {
        let (candidates, source) = match &config.parting_line {
            Some(poly) => (polyline_candidates(poly, spacing), PartingSource::Polyline),
            None => {
                let welded = weld_vertices(mesh, DEFAULT_WELD_TOLERANCE);
                (
                    parting_line_candidates(&welded, &config.demold_dir, spacing)?,
                    PartingSource::Silhouette,
                )
            }
        };
        let (point, dist) = nearest_candidate(&candidates, &cm.point).ok_or(PlanError::NoSilhouette)?;
        plan.mode = GateMode::Aesthetic;
        plan.gate_point = point;
        plan.distance_to_cm = dist;
        plan.parting_source = Some(source);
        plan.parting_candidates = candidates.len();
    } else {
        let grid = build_grid(&mesh.bounding_box(), &config.demold_dir, spacing)?;
        let bvh = Bvh::build(mesh);
        let ctx = NodeContext {
            grid: &grid,
            r_gate: sizing.r_gate,
            thickness: config.thickness,
            ring_samples: config.ring_samples,
            depth: config.depth_check,
            center_of_mass: cm.point,
        };
        let evaluations = evaluate_grid(&bvh, &ctx, par);
        let chosen = select_gate(&evaluations, &grid, &cm.point)?;
        plan.gate_point = chosen.surface_point.expect("feasible node has a surface point");
        plan.distance_to_cm = chosen.distance_to_cm.expect("feasible node has a distance");
        plan.chosen_node = Some(chosen.node);
        plan.grid_shape = Some(grid.shape());
        plan.total_nodes = evaluations.len();
        plan.feasible_nodes = evaluations.iter().filter(|e| e.feasible()).count();
        plan.rejections = rejection_histogram(&evaluations);
    }

    plan.flow_length = flow_length_proxy(mesh, &plan.gate_point);
    plan.pressure_drop = pressure_drop(material.mu_opt, plan.flow_length, sizing.v_bar, config.thickness)?;
    Ok(plan)
}

#[cfg(test)]
mod tests;
