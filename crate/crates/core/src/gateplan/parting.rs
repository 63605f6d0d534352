//! Parting-line candidates for gates with aesthetic requirements.
//!
//! The parting line is approximated by silhouette edges with respect to the
//! demolding direction: edges shared by a visible facet (`n · D_d > ε`) and a
//! non-visible one (hidden or vertical). A user-supplied polyline can replace
//! the approximation.

use nalgebra::Unit;

use super::{within_tie, PlanError};
use crate::mesh::{Point, Vector, WeldedMesh};

/// Facet classification threshold on `n · D_d`.
pub const VISIBILITY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Visible,
    Hidden,
    Vertical,
}

pub fn classify(normal: &Vector, demold_dir: &Unit<Vector>) -> Visibility {
    let s = normal.dot(demold_dir);
    if s > VISIBILITY_EPS {
        Visibility::Visible
    } else if s < -VISIBILITY_EPS {
        Visibility::Hidden
    } else {
        Visibility::Vertical
    }
}

/// Silhouette edges as point pairs, in edge-key order.
pub fn silhouette_edges(welded: &WeldedMesh, demold_dir: &Unit<Vector>) -> Vec<[Point; 2]> {
    let vis: Vec<Visibility> = (0..welded.facets.len())
        .map(|f| classify(&welded.facet_normal(f), demold_dir))
        .collect();
    welded
        .edges
        .iter()
        .filter(|(_, facets)| {
            let visible = facets.iter().any(|&f| vis[f as usize] == Visibility::Visible);
            let other = facets.iter().any(|&f| vis[f as usize] != Visibility::Visible);
            visible && other
        })
        .map(|(&(a, b), _)| [welded.vertices[a as usize], welded.vertices[b as usize]])
        .collect()
}

/// Points along each segment at arc-length steps of `spacing`, plus both endpoints.
/// The result is sorted lexicographically by coordinates with exact duplicates removed.
pub fn sample_segments(segments: &[[Point; 2]], spacing: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for [a, b] in segments {
        let len = (b - a).norm();
        out.push(*a);
        if len > 0.0 {
            let mut k = 1usize;
            while (k as f64) * spacing < len {
                out.push(a + (b - a) * ((k as f64 * spacing) / len));
                k += 1;
            }
        }
        out.push(*b);
    }
    out.sort_by(lex_cmp);
    out.dedup();
    out
}

pub fn lex_cmp(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
}

pub fn parting_line_candidates(
    welded: &WeldedMesh,
    demold_dir: &Unit<Vector>,
    spacing: f64,
) -> Result<Vec<Point>, PlanError> {
    let edges = silhouette_edges(welded, demold_dir);
    if edges.is_empty() {
        return Err(PlanError::NoSilhouette);
    }
    Ok(sample_segments(&edges, spacing))
}

/// Parses a polyline: one `x y z` triple per line; blank lines and `#` comments are skipped.
pub fn parse_polyline(text: &str) -> Result<Vec<Point>, PlanError> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        match values {
            Ok(v) if v.len() == 3 && v.iter().all(|c| c.is_finite()) => points.push(Point::new(v[0], v[1], v[2])),
            _ => {
                return Err(PlanError::BadPolyline {
                    line: idx + 1,
                    message: format!("expected three finite numbers, got '{line}'"),
                })
            }
        }
    }
    if points.is_empty() {
        return Err(PlanError::BadPolyline {
            line: 0,
            message: "polyline has no points".into(),
        });
    }
    Ok(points)
}

/// Samples an open or closed (first == last) polyline.
pub fn polyline_candidates(points: &[Point], spacing: f64) -> Vec<Point> {
    if points.len() == 1 {
        return points.to_vec();
    }
    let segments: Vec<[Point; 2]> = points.windows(2).map(|w| [w[0], w[1]]).collect();
    sample_segments(&segments, spacing)
}

/// Candidate nearest to `target`; ties (see [`TIE_TOLERANCE`](super::TIE_TOLERANCE)) go to the
/// lexicographically smallest point.
pub fn nearest_candidate(candidates: &[Point], target: &Point) -> Option<(Point, f64)> {
    let best = candidates
        .iter()
        .map(|p| (p - target).norm())
        .fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .map(|p| (*p, (p - target).norm()))
        .filter(|(_, d)| within_tie(*d, best))
        .min_by(|a, b| lex_cmp(&a.0, &b.0))
}
