//! Injection gate sizing and placement on triangulated parts.
//!
//! The pipeline reads an STL surface, computes its area-weighted centroid,
//! sizes a circular gate from power-law melt parameters and projects a node
//! lattice along the demolding direction to find the feasible surface point
//! nearest to the centroid.
//!
//! ```
//! use moldgate_core::gateplan::{plan_gate, PlanConfig};
//! use moldgate_core::rheology::MaterialDatabase;
//! use moldgate_core::shapes;
//!
//! let part = shapes::plate(100.0, 100.0, 2.0);
//! let pp = MaterialDatabase::default().get("PP").unwrap().clone();
//! let cfg = PlanConfig { grid_spacing: Some(10.0), ..PlanConfig::new(2.0) };
//! let plan = plan_gate(&part, &pp, &cfg).unwrap();
//! assert_eq!(plan.gate_point, moldgate_core::mesh::Point::new(50.0, 50.0, 2.0));
//! ```

pub mod gateplan;
pub mod mass;
pub mod mesh;
pub mod parallel;
pub mod report;
pub mod rheology;
pub mod shapes;
pub mod spatial;

pub use gateplan::{plan_gate, GatePlan, PlanConfig, PlanError};
pub use mesh::{parse_stl, Point, TriangleMesh, Vector};
pub use parallel::Parallelism;
pub use report::{export_marked_geometry, render_report, PlanOutcome, ReportMetadata};
pub use rheology::{MaterialDatabase, MaterialParams};
