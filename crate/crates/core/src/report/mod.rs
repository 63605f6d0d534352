//! Canonical JSON reports and marked-geometry export.
//!
//! Reports are JSON objects with sorted keys, two-space indentation and
//! scalar arrays kept on one line. Lengths are rounded to 4 decimals,
//! pressures to 3, so two runs on the same input differ only in
//! `duration_s`.

mod ply;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::gateplan::{DepthCheck, GatePlan, PlanConfig, PlanError, RejectionReason};
use crate::mesh::{Point, TriangleMesh};
use crate::rheology::{size_gate, MaterialParams};

pub use ply::{export_marked_geometry, MARKER_COLOR, MARKER_SUBDIVISIONS, PART_COLOR};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "moldgate";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot export marked geometry: no feasible gate ({total_nodes} nodes rejected)")]
    Infeasible { total_nodes: usize },
}

/// Result of a planning run as far as reporting is concerned.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Planned(GatePlan),
    Infeasible {
        total_nodes: usize,
        rejections: BTreeMap<RejectionReason, usize>,
    },
}

impl PlanOutcome {
    /// Splits "no feasible node" from genuine input errors.
    pub fn from_result(result: Result<GatePlan, PlanError>) -> Result<Self, PlanError> {
        match result {
            Ok(plan) => Ok(PlanOutcome::Planned(plan)),
            Err(PlanError::NoFeasibleGate {
                total_nodes,
                rejections,
            }) => Ok(PlanOutcome::Infeasible {
                total_nodes,
                rejections,
            }),
            Err(e) => Err(e),
        }
    }

    pub fn plan(&self) -> Option<&GatePlan> {
        match self {
            PlanOutcome::Planned(p) => Some(p),
            PlanOutcome::Infeasible { .. } => None,
        }
    }
}

/// Run context echoed into the report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub input_path: String,
    /// Lowercase hex SHA-256 of the input file bytes.
    pub input_sha256: String,
    pub facet_count: usize,
    pub material: MaterialParams,
    pub config: PlanConfig,
    pub duration_s: f64,
}

impl ReportMetadata {
    pub fn new(
        input_path: impl Into<String>,
        input_bytes: &[u8],
        mesh: &TriangleMesh,
        material: &MaterialParams,
        config: &PlanConfig,
    ) -> Self {
        ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_path: input_path.into(),
            input_sha256: sha256_hex(input_bytes),
            facet_count: mesh.facet_count(),
            material: material.clone(),
            config: config.clone(),
            duration_s: 0.0,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

fn rounded(x: f64, decimals: i32) -> Value {
    let scale = 10f64.powi(decimals);
    let r = (x * scale).round() / scale;
    // avoid printing -0.0
    let r = if r == 0.0 { 0.0 } else { r };
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

fn length(x: f64) -> Value {
    rounded(x, 4)
}

fn point(p: &Point) -> Value {
    Value::Array(vec![length(p.x), length(p.y), length(p.z)])
}

fn histogram(h: &BTreeMap<RejectionReason, usize>) -> Value {
    let map: Map<String, Value> = h.iter().map(|(r, n)| (r.as_str().to_string(), json!(n))).collect();
    Value::Object(map)
}

fn units() -> Value {
    json!({
        "C_CM": "mm",
        "C_pointfill": "mm",
        "R_gate": "mm",
        "distance_to_cm": "mm",
        "duration_s": "s",
        "flow_length": "mm",
        "pressure_drop": "MPa",
        "rect_gate": "mm",
        "spacing": "mm",
        "surface_area": "mm^2",
        "thickness": "mm",
        "v_bar": "mm/s",
    })
}

fn config_echo(cfg: &PlanConfig) -> Value {
    let d = cfg.demold_dir.into_inner();
    let (depth, tol) = match cfg.depth_check {
        DepthCheck::Thickness => ("thickness", Value::Null),
        DepthCheck::Tolerance(t) => ("tolerance", length(t)),
        DepthCheck::Off => ("off", Value::Null),
    };
    json!({
        "demold_dir": [rounded(d.x, 12), rounded(d.y, 12), rounded(d.z, 12)],
        "grid_spacing": cfg.grid_spacing.map_or(Value::Null, length),
        "ring_samples": cfg.ring_samples,
        "thickness": length(cfg.thickness),
        "aesthetic": cfg.aesthetic,
        "depth_check": depth,
        "depth_tolerance": tol,
        "rect_aspect": cfg.rect_aspect.map_or(Value::Null, |k| rounded(k, 4)),
        "parting_line": cfg.parting_line.as_ref().map_or(Value::Null, |pts| {
            Value::Array(pts.iter().map(point).collect())
        }),
    })
}

fn material_echo(m: &MaterialParams) -> Value {
    serde_json::to_value(m).expect("material parameters serialize")
}

fn sizing_fields(doc: &mut Map<String, Value>, v_bar: f64, r_gate: f64, rect: Option<(f64, f64)>) {
    doc.insert("R_gate".into(), length(r_gate));
    doc.insert("v_bar".into(), length(v_bar));
    doc.insert(
        "rect_gate".into(),
        rect.map_or(Value::Null, |(w, h)| json!({ "width": length(w), "height": length(h) })),
    );
}

/// Builds the report as a JSON value; see [`render_report`] for the text form.
pub fn report_value(outcome: &PlanOutcome, meta: &ReportMetadata) -> Value {
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert(
        "tool".into(),
        json!({ "name": TOOL_NAME, "version": meta.tool_version }),
    );
    doc.insert(
        "input".into(),
        json!({ "path": meta.input_path, "sha256": meta.input_sha256, "facets": meta.facet_count }),
    );
    doc.insert("material".into(), material_echo(&meta.material));
    doc.insert("config".into(), config_echo(&meta.config));
    doc.insert("units".into(), units());
    doc.insert("duration_s".into(), rounded(meta.duration_s, 3));

    match outcome {
        PlanOutcome::Planned(plan) => {
            doc.insert("status".into(), json!("ok"));
            doc.insert("mode".into(), json!(plan.mode.as_str()));
            doc.insert("C_CM".into(), point(&plan.center_of_mass.point));
            doc.insert("surface_area".into(), rounded(plan.center_of_mass.total_area, 4));
            doc.insert("C_pointfill".into(), point(&plan.gate_point));
            doc.insert("distance_to_cm".into(), length(plan.distance_to_cm));
            let s = &plan.sizing;
            sizing_fields(&mut doc, s.v_bar, s.r_gate, s.rectangular.map(|r| (r.width, r.height)));
            doc.insert("pressure_drop".into(), rounded(plan.pressure_drop, 3));
            doc.insert("flow_length".into(), length(plan.flow_length));
            doc.insert("flow_length_kind".into(), json!("farthest-vertex upper-bound proxy"));
            doc.insert("spacing".into(), length(plan.spacing));
            doc.insert(
                "nodes".into(),
                json!({
                    "grid": plan.grid_shape.map_or(Value::Null, |(a, b)| json!([a, b])),
                    "total": plan.total_nodes,
                    "feasible": plan.feasible_nodes,
                    "chosen": plan.chosen_node.map_or(Value::Null, |n| json!([n.i, n.j])),
                    "rejections": histogram(&plan.rejections),
                }),
            );
            doc.insert(
                "parting_line".into(),
                match &plan.parting_source {
                    None => Value::Null,
                    Some(src) => json!({
                        "source": match src {
                            crate::gateplan::PartingSource::Silhouette => "silhouette",
                            crate::gateplan::PartingSource::Polyline => "polyline",
                        },
                        "candidates": plan.parting_candidates,
                    }),
                },
            );
        }
        PlanOutcome::Infeasible {
            total_nodes,
            rejections,
        } => {
            doc.insert("status".into(), json!("infeasible"));
            doc.insert(
                "message".into(),
                json!(format!("no valid gate location: all {total_nodes} nodes rejected")),
            );
            if let Ok(s) = size_gate(&meta.material, meta.config.rect_aspect) {
                sizing_fields(&mut doc, s.v_bar, s.r_gate, s.rectangular.map(|r| (r.width, r.height)));
            }
            doc.insert(
                "nodes".into(),
                json!({ "total": total_nodes, "feasible": 0, "rejections": histogram(rejections) }),
            );
        }
    }
    Value::Object(doc)
}

/// Canonical text form of the report, newline terminated.
pub fn render_report(outcome: &PlanOutcome, meta: &ReportMetadata) -> String {
    let mut out = String::new();
    write_value(&report_value(outcome, meta), 0, &mut out);
    out.push('\n');
    out
}

/// The report text with the `duration_s` line removed, for comparing runs.
pub fn without_duration(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"duration_s\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&item.to_string());
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*key], indent + 1, out);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
