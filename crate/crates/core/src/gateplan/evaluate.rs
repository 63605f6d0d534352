//! Per-node feasibility and nearest-to-centroid selection.

use std::collections::BTreeMap;

use nalgebra::Unit;
use serde::Serialize;

use super::grid::{ring_points, NodalGrid, NodeId};
use super::{within_tie, DepthCheck, PlanError};
use crate::mesh::Point;
use crate::parallel::Parallelism;
use crate::spatial::{Facing, Hit, Ray, RayCaster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionReason {
    /// The node ray misses the part.
    FootprintMiss,
    /// At least one ring ray misses the part.
    RingMiss,
    /// The first surface under the node faces away from the demolding side.
    BackFacing,
    /// Ring hits are not within the depth tolerance of the node hit.
    DepthIncoherent,
    /// The gate radius is not smaller than the part thickness.
    ThicknessViolation,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::FootprintMiss => "footprint-miss",
            RejectionReason::RingMiss => "ring-miss",
            RejectionReason::BackFacing => "back-facing",
            RejectionReason::DepthIncoherent => "depth-incoherent",
            RejectionReason::ThicknessViolation => "thickness-violation",
        }
    }
}

/// Inputs shared by every node evaluation.
#[derive(Debug, Clone, Copy)]
pub struct NodeContext<'g> {
    pub grid: &'g NodalGrid,
    pub r_gate: f64,
    pub thickness: f64,
    pub ring_samples: usize,
    pub depth: DepthCheck,
    pub center_of_mass: Point,
}

impl NodeContext<'_> {
    fn depth_tolerance(&self) -> Option<f64> {
        match self.depth {
            DepthCheck::Thickness => Some(self.thickness),
            DepthCheck::Tolerance(t) => Some(t),
            DepthCheck::Off => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEvaluation {
    pub node: NodeId,
    /// Node position in grid-plane coordinates.
    pub plane: [f64; 2],
    pub node_hit: Option<Hit>,
    /// Min and max ray depth over the ring hits, when every ring ray hit.
    pub ring_depth: Option<(f64, f64)>,
    pub rejection: Option<RejectionReason>,
    /// First surface point under the node; set iff feasible.
    pub surface_point: Option<Point>,
    /// 3D distance from `surface_point` to the part centroid; set iff feasible.
    pub distance_to_cm: Option<f64>,
}

impl NodeEvaluation {
    pub fn feasible(&self) -> bool {
        self.rejection.is_none()
    }

    fn rejected(node: NodeId, plane: [f64; 2], node_hit: Option<Hit>, reason: RejectionReason) -> Self {
        NodeEvaluation {
            node,
            plane,
            node_hit,
            ring_depth: None,
            rejection: Some(reason),
            surface_point: None,
            distance_to_cm: None,
        }
    }
}

/// Casts the node ray and its ring rays along `-D_d` and classifies the node.
///
/// Checks run in order: thickness guard, node hit, front-facing first hit,
/// every ring ray hits, ring depths within tolerance of the node depth.
pub fn evaluate_node(caster: &dyn RayCaster, ctx: &NodeContext, node: NodeId) -> NodeEvaluation {
    let grid = ctx.grid;
    let plane = grid.plane(node);
    if ctx.r_gate >= ctx.thickness {
        return NodeEvaluation::rejected(node, plane, None, RejectionReason::ThicknessViolation);
    }
    let down = Unit::new_unchecked(-grid.frame.d);
    let cast = |a: f64, b: f64| caster.nearest_hit(&Ray::from_unit(grid.frame.to_world(a, b, grid.height), down));

    let Some(hit) = cast(plane[0], plane[1]) else {
        return NodeEvaluation::rejected(node, plane, None, RejectionReason::FootprintMiss);
    };
    if hit.facing != Facing::Front {
        return NodeEvaluation::rejected(node, plane, Some(hit), RejectionReason::BackFacing);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for q in ring_points(plane, ctx.r_gate, ctx.ring_samples) {
        let Some(ring_hit) = cast(q[0], q[1]) else {
            return NodeEvaluation::rejected(node, plane, Some(hit), RejectionReason::RingMiss);
        };
        lo = lo.min(ring_hit.t);
        hi = hi.max(ring_hit.t);
    }
    if let Some(tol) = ctx.depth_tolerance() {
        if (hit.t - lo).abs() > tol || (hi - hit.t).abs() > tol {
            let mut eval = NodeEvaluation::rejected(node, plane, Some(hit), RejectionReason::DepthIncoherent);
            eval.ring_depth = Some((lo, hi));
            return eval;
        }
    }
    NodeEvaluation {
        node,
        plane,
        node_hit: Some(hit),
        ring_depth: Some((lo, hi)),
        rejection: None,
        surface_point: Some(hit.point),
        distance_to_cm: Some((hit.point - ctx.center_of_mass).norm()),
    }
}

/// Evaluates every grid node; output is in node-id order under any policy.
pub fn evaluate_grid(caster: &dyn RayCaster, ctx: &NodeContext, par: Parallelism) -> Vec<NodeEvaluation> {
    let nodes = ctx.grid.nodes();
    par.map(&nodes, |&node| evaluate_node(caster, ctx, node))
}

/// Full ordering key: 3D distance, planar distance to the projected centroid, then `(i, j)`.
pub fn selection_key(eval: &NodeEvaluation, cm_plane: [f64; 2]) -> Option<(f64, f64, NodeId)> {
    let dist = eval.distance_to_cm?;
    let planar = (eval.plane[0] - cm_plane[0]).hypot(eval.plane[1] - cm_plane[1]);
    Some((dist, planar, eval.node))
}

/// Feasible node nearest to the centroid.
///
/// Distances within [`TIE_TOLERANCE`](super::TIE_TOLERANCE) of the minimum are treated as equal so
/// that rounding in the centroid does not break geometric symmetry; such ties
/// fall through to the planar distance and then to `(i, j)`.
pub fn select_gate<'e>(
    evaluations: &'e [NodeEvaluation],
    grid: &NodalGrid,
    center_of_mass: &Point,
) -> Result<&'e NodeEvaluation, PlanError> {
    let cm_plane = grid.frame.to_plane(center_of_mass);
    let keyed: Vec<((f64, f64, NodeId), &NodeEvaluation)> = evaluations
        .iter()
        .filter_map(|e| selection_key(e, cm_plane).map(|k| (k, e)))
        .collect();
    let best_dist = keyed.iter().map(|(k, _)| k.0).fold(f64::INFINITY, f64::min);
    let near: Vec<_> = keyed.iter().filter(|(k, _)| within_tie(k.0, best_dist)).collect();
    let best_planar = near.iter().map(|(k, _)| k.1).fold(f64::INFINITY, f64::min);
    near.into_iter()
        .filter(|(k, _)| within_tie(k.1, best_planar))
        .min_by_key(|(k, _)| k.2)
        .map(|(_, e)| *e)
        .ok_or_else(|| PlanError::NoFeasibleGate {
            total_nodes: evaluations.len(),
            rejections: rejection_histogram(evaluations),
        })
}

pub fn rejection_histogram(evaluations: &[NodeEvaluation]) -> BTreeMap<RejectionReason, usize> {
    let mut hist = BTreeMap::new();
    for r in evaluations.iter().filter_map(|e| e.rejection) {
        *hist.entry(r).or_insert(0) += 1;
    }
    hist
}
