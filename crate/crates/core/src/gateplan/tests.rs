use super::*;
use crate::mass::mesh_center_of_mass;
use crate::rheology::MaterialDatabase;
use crate::shapes;
use crate::spatial::{BruteForce, RayCaster};
use approx::assert_abs_diff_eq;

fn pp() -> MaterialParams {
    MaterialDatabase::default().get("PP").unwrap().clone()
}

fn plate() -> TriangleMesh {
    shapes::plate(100.0, 100.0, 2.0)
}

fn holed() -> TriangleMesh {
    shapes::plate_with_hole(100.0, 100.0, 2.0, 35.0, 65.0)
}

fn config(spacing: f64) -> PlanConfig {
    PlanConfig {
        grid_spacing: Some(spacing),
        ..PlanConfig::new(2.0)
    }
}

fn context<'g>(grid: &'g NodalGrid, mesh: &TriangleMesh, r_gate: f64) -> NodeContext<'g> {
    NodeContext {
        grid,
        r_gate,
        thickness: 2.0,
        ring_samples: 16,
        depth: DepthCheck::Thickness,
        center_of_mass: mesh_center_of_mass(mesh).unwrap().point,
    }
}

/// Grid with hand-picked node coordinates over the plate plane at z = 3.
fn custom_grid(a: Vec<f64>, b: Vec<f64>) -> NodalGrid {
    NodalGrid {
        frame: Frame::new(&Vector::z_axis()),
        spacing: 1.0,
        a,
        b,
        height: 3.0,
    }
}

fn node_at(grid: &NodalGrid, x: f64, y: f64) -> NodeId {
    let i = grid.a.iter().position(|&v| v == x).unwrap() as u32;
    let j = grid.b.iter().position(|&v| v == y).unwrap() as u32;
    NodeId { i, j }
}

#[test]
fn plate_center_feasible() {
    let mesh = plate();
    let grid = custom_grid(vec![-10.0, 50.0], vec![50.0]);
    let ctx = context(&grid, &mesh, 1.4);
    let bvh = Bvh::build(&mesh);
    let e = evaluate_node(&bvh, &ctx, node_at(&grid, 50.0, 50.0));
    assert!(e.feasible());
    assert_eq!(e.surface_point, Some(Point::new(50.0, 50.0, 2.0)));
    assert_eq!(e.ring_depth, Some((1.0, 1.0)));
    assert_abs_diff_eq!(e.distance_to_cm.unwrap(), 1.0, epsilon = 1e-12);

    let e = evaluate_node(&bvh, &ctx, node_at(&grid, -10.0, 50.0));
    assert_eq!(e.rejection, Some(RejectionReason::FootprintMiss));
    assert!(e.surface_point.is_none() && e.distance_to_cm.is_none());
}

// Expected outcomes confirmed with the brute-force intersector over all facets.
#[test]
fn plate_with_hole_nodes() {
    let mesh = holed();
    let grid = custom_grid(vec![50.0], vec![35.0, 50.0, 30.0]);
    let ctx = context(&grid, &mesh, 1.4);
    let brute = BruteForce(&mesh);
    let bvh = Bvh::build(&mesh);
    for caster in [&brute as &dyn RayCaster, &bvh] {
        let e = evaluate_node(caster, &ctx, node_at(&grid, 50.0, 50.0));
        assert_eq!(e.rejection, Some(RejectionReason::FootprintMiss));
        let e = evaluate_node(caster, &ctx, node_at(&grid, 50.0, 35.0));
        assert_eq!(e.rejection, Some(RejectionReason::RingMiss));
        assert!(e.node_hit.is_some(), "node on the hole rim still hits the top face");
        let e = evaluate_node(caster, &ctx, node_at(&grid, 50.0, 30.0));
        assert!(e.feasible());
    }
}

#[test]
fn open_box_floor_is_back_facing() {
    let mesh = shapes::open_unit_box();
    let grid = custom_grid(vec![0.5], vec![0.5]);
    let ctx = NodeContext {
        thickness: 0.5,
        ..context(&grid, &mesh, 0.1)
    };
    let e = evaluate_node(&Bvh::build(&mesh), &ctx, NodeId { i: 0, j: 0 });
    assert_eq!(e.rejection, Some(RejectionReason::BackFacing));
}

#[test]
fn step_edge_is_depth_incoherent() {
    // tall section (z = 10) for x < 50, thin (z = 2) beyond
    let mesh = shapes::stepped_block(100.0, 40.0, 50.0, 10.0, 2.0);
    let mut grid = custom_grid(vec![49.5, 30.0], vec![20.0]);
    grid.height = 11.0;
    let bvh = Bvh::build(&mesh);
    let ctx = context(&grid, &mesh, 1.4);
    let e = evaluate_node(&bvh, &ctx, node_at(&grid, 49.5, 20.0));
    assert_eq!(e.rejection, Some(RejectionReason::DepthIncoherent));
    let (lo, hi) = e.ring_depth.unwrap();
    assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(hi, 9.0, epsilon = 1e-12);
    assert!(evaluate_node(&bvh, &ctx, node_at(&grid, 30.0, 20.0)).feasible());

    let strict = NodeContext {
        depth: DepthCheck::Off,
        ..ctx
    };
    assert!(evaluate_node(&bvh, &strict, node_at(&grid, 49.5, 20.0)).feasible());
}

#[test]
fn thickness_guard_in_evaluation() {
    let mesh = plate();
    let grid = custom_grid(vec![50.0], vec![50.0]);
    let ctx = context(&grid, &mesh, 2.0);
    let e = evaluate_node(&Bvh::build(&mesh), &ctx, NodeId { i: 0, j: 0 });
    assert_eq!(e.rejection, Some(RejectionReason::ThicknessViolation));
}

#[test]
fn select_on_symmetric_plate() {
    let mesh = plate();
    let grid = build_grid(&mesh.bounding_box(), &Vector::z_axis(), 10.0).unwrap();
    let ctx = context(&grid, &mesh, 1.4254);
    let evals = evaluate_grid(&Bvh::build(&mesh), &ctx, Parallelism::Sequential);
    let chosen = select_gate(&evals, &grid, &ctx.center_of_mass).unwrap();
    assert_eq!(chosen.node, NodeId { i: 5, j: 5 });
    assert_abs_diff_eq!(chosen.distance_to_cm.unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn select_single_feasible() {
    let mesh = plate();
    let grid = custom_grid(vec![-10.0, 20.0], vec![-5.0, 70.0]);
    let ctx = context(&grid, &mesh, 1.4);
    let evals = evaluate_grid(&Bvh::build(&mesh), &ctx, Parallelism::Sequential);
    assert_eq!(evals.iter().filter(|e| e.feasible()).count(), 1);
    let chosen = select_gate(&evals, &grid, &ctx.center_of_mass).unwrap();
    assert_eq!(chosen.plane, [20.0, 70.0]);
}

// Exhaustive evaluation of every node with the brute-force intersector.
#[test]
fn plate_with_hole_four_way_tie() {
    let mesh = holed();
    let grid = build_grid(&mesh.bounding_box(), &Vector::z_axis(), 5.0).unwrap();
    let ctx = context(&grid, &mesh, 1.4254);
    let evals = evaluate_grid(&BruteForce(&mesh), &ctx, Parallelism::Sequential);
    let best = evals
        .iter()
        .filter_map(|e| e.distance_to_cm)
        .fold(f64::INFINITY, f64::min);
    let mut ties: Vec<[f64; 2]> = evals
        .iter()
        .filter(|e| e.distance_to_cm.is_some_and(|d| d - best <= 1e-12))
        .map(|e| e.plane)
        .collect();
    ties.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    assert_eq!(ties, vec![[30.0, 50.0], [50.0, 30.0], [50.0, 70.0], [70.0, 50.0]]);
    assert_abs_diff_eq!(best, 401f64.sqrt(), epsilon = 1e-12);
    let chosen = select_gate(&evals, &grid, &ctx.center_of_mass).unwrap();
    assert_eq!(chosen.node, NodeId { i: 6, j: 10 });
    assert_eq!(chosen.surface_point, Some(Point::new(30.0, 50.0, 2.0)));
}

#[test]
fn no_feasible_node_reports_histogram() {
    let mesh = plate();
    let grid = custom_grid(vec![-10.0, 110.0], vec![0.0]);
    let ctx = context(&grid, &mesh, 1.4);
    let evals = evaluate_grid(&Bvh::build(&mesh), &ctx, Parallelism::Sequential);
    match select_gate(&evals, &grid, &ctx.center_of_mass) {
        Err(PlanError::NoFeasibleGate {
            total_nodes,
            rejections,
        }) => {
            assert_eq!(total_nodes, 2);
            assert_eq!(rejections[&RejectionReason::FootprintMiss], 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn flow_length_examples() {
    let l = flow_length_proxy(&plate(), &Point::new(50.0, 50.0, 2.0));
    assert_abs_diff_eq!(l, (50f64 * 50.0 * 2.0 + 4.0).sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(l, 70.7390, epsilon = 1e-4);

    let tri = shapes::single_triangle(Point::origin(), Point::new(3.0, 0.0, 0.0), Point::new(0.0, 6.0, 0.0));
    let c = Point::new(1.0, 2.0, 0.0);
    assert_abs_diff_eq!(flow_length_proxy(&tri, &c), (1.0f64 + 16.0).sqrt(), epsilon = 1e-12);
}

#[test]
fn central_gate_shortens_flow_on_convex_parts() {
    for mesh in [
        plate(),
        shapes::box_mesh(Point::origin(), Point::new(20.0, 20.0, 20.0)),
        shapes::icosphere(Point::new(5.0, 5.0, 5.0), 4.0, 2),
    ] {
        let spacing = mesh.bounding_box().extent().x / 10.0;
        let mut cfg = config(spacing);
        cfg.thickness = 1e3;
        let plan = plan_gate(&mesh, &pp(), &cfg).unwrap();
        let bb = mesh.bounding_box();
        for corner in bb.corners().iter().filter(|c| c.z == bb.max.z) {
            assert!(plan.flow_length <= flow_length_proxy(&mesh, corner) + 1e-12);
        }
    }
}

#[test]
fn plan_symmetric_plate() {
    let plan = plan_gate(&plate(), &pp(), &config(10.0)).unwrap();
    assert_eq!(plan.gate_point, Point::new(50.0, 50.0, 2.0));
    assert_eq!(plan.chosen_node, Some(NodeId { i: 5, j: 5 }));
    assert_eq!(plan.grid_shape, Some((11, 11)));
    assert_abs_diff_eq!(plan.sizing.r_gate, 1.42545, epsilon = 1e-5);
    assert_abs_diff_eq!(plan.flow_length, 70.73896, epsilon = 1e-5);
    // 12 μ L v̄ / H² evaluated independently in SI
    let expect = 12.0 * 9.88 * 0.07073895673530957 * 2.1341639745917705 / 0.002f64.powi(2) * 1e-6;
    assert_abs_diff_eq!(plan.pressure_drop, expect, epsilon = 1e-9);
    assert_eq!(plan.total_nodes, 121);
    assert_eq!(plan.feasible_nodes + plan.rejections.values().sum::<usize>(), 121);
}

#[test]
fn plan_thickness_violation() {
    let mut cfg = config(10.0);
    cfg.thickness = 1.0;
    let err = plan_gate(&plate(), &pp(), &cfg).unwrap_err();
    assert!(matches!(err, PlanError::ThicknessViolation { .. }));
    assert!(err.to_string().contains("R_gate must be smaller than part thickness"));
}

#[test]
fn plan_aesthetic_lands_on_rim() {
    let mut cfg = config(10.0);
    cfg.aesthetic = true;
    let plan = plan_gate(&plate(), &pp(), &cfg).unwrap();
    assert_eq!(plan.mode, GateMode::Aesthetic);
    assert_eq!(plan.gate_point, Point::new(0.0, 50.0, 2.0));
    assert_eq!(plan.parting_source, Some(PartingSource::Silhouette));
    assert!(plan.chosen_node.is_none());
}

#[test]
fn plan_aesthetic_polyline_override() {
    let mut cfg = config(10.0);
    cfg.aesthetic = true;
    cfg.parting_line = Some(vec![Point::new(0.0, 0.0, 1.0), Point::new(100.0, 0.0, 1.0)]);
    let plan = plan_gate(&plate(), &pp(), &cfg).unwrap();
    assert_eq!(plan.gate_point, Point::new(50.0, 0.0, 1.0));
    assert_eq!(plan.parting_source, Some(PartingSource::Polyline));
}

#[test]
fn plan_rejects_bad_config() {
    let mut cfg = config(10.0);
    cfg.ring_samples = 4;
    assert!(matches!(plan_gate(&plate(), &pp(), &cfg), Err(PlanError::BadConfig(_))));
    let mut cfg = config(-1.0);
    cfg.grid_spacing = Some(-1.0);
    assert!(matches!(
        plan_gate(&plate(), &pp(), &cfg),
        Err(PlanError::BadSpacing(_))
    ));
}

#[test]
fn plan_is_deterministic_across_parallelism() {
    let mesh = shapes::tessellated_dome(40, 80.0, 10.0);
    let mut cfg = config(2.0);
    cfg.thickness = 3.0;
    cfg.parallelism = Parallelism::Sequential;
    let reference = plan_gate(&mesh, &pp(), &cfg).unwrap();
    for par in [Parallelism::Auto, Parallelism::Threads(2), Parallelism::Threads(8)] {
        cfg.parallelism = par;
        assert_eq!(plan_gate(&mesh, &pp(), &cfg).unwrap(), reference);
    }
}

#[test]
fn translation_moves_gate_rigidly() {
    let mesh = holed();
    let t = Vector::new(12.5, -40.25, 7.0);
    let a = plan_gate(&mesh, &pp(), &config(5.0)).unwrap();
    let b = plan_gate(&mesh.translated(&t), &pp(), &config(5.0)).unwrap();
    assert!((a.center_of_mass.point + t - b.center_of_mass.point).norm() <= 1e-6);
    assert!((a.gate_point + t - b.gate_point).norm() <= 1e-6);
}

fn argmin_set(mesh: &TriangleMesh, spacing: f64) -> Vec<Point> {
    let grid = build_grid(&mesh.bounding_box(), &Vector::z_axis(), spacing).unwrap();
    let ctx = context(&grid, mesh, 1.4254);
    let evals = evaluate_grid(&Bvh::build(mesh), &ctx, Parallelism::Sequential);
    let best = evals
        .iter()
        .filter_map(|e| e.distance_to_cm)
        .fold(f64::INFINITY, f64::min);
    evals
        .iter()
        .filter(|e| e.distance_to_cm.is_some_and(|d| d - best <= 1e-9))
        .map(|e| e.surface_point.unwrap())
        .collect()
}

#[test]
fn quarter_turn_maps_argmin_set() {
    // asymmetric part on a square footprint: thin plate with a raised block
    let base = shapes::box_mesh(Point::origin(), Point::new(100.0, 100.0, 2.0));
    let block = shapes::box_mesh(Point::new(10.0, 60.0, 0.0), Point::new(40.0, 90.0, 6.0));
    let mesh = base.merged(&block);
    let turn = |p: &Point| Point::new(100.0 - p.y, p.x, p.z);
    let rotated = mesh.map_vertices(turn).unwrap();
    let mut expect: Vec<Point> = argmin_set(&mesh, 5.0).iter().map(turn).collect();
    let mut got = argmin_set(&rotated, 5.0);
    let sort = |v: &mut Vec<Point>| v.sort_by(parting::lex_cmp);
    sort(&mut expect);
    sort(&mut got);
    assert!(!got.is_empty());
    assert_eq!(got.len(), expect.len());
    for (g, e) in got.iter().zip(&expect) {
        assert!((g - e).norm() <= 1e-9, "{g} vs {e}");
    }
}

#[test]
fn halving_spacing_never_worsens_beyond_a_diagonal() {
    let meshes = [
        holed(),
        shapes::tessellated_dome(24, 60.0, 8.0),
        shapes::stepped_block(100.0, 40.0, 50.0, 10.0, 2.0),
    ];
    for mesh in meshes {
        for coarse in [10.0, 7.0, 4.0] {
            let mut cfg = config(coarse);
            cfg.thickness = 2.0;
            let a = plan_gate(&mesh, &pp(), &cfg).unwrap();
            cfg.grid_spacing = Some(coarse / 2.0);
            let b = plan_gate(&mesh, &pp(), &cfg).unwrap();
            assert!(b.distance_to_cm <= a.distance_to_cm + coarse * 2f64.sqrt());
        }
    }
}

#[test]
fn optimality_against_rescan() {
    let mesh = shapes::tessellated_dome(16, 50.0, 6.0);
    let cfg = config(2.5);
    let plan = plan_gate(&mesh, &pp(), &cfg).unwrap();
    let grid = build_grid(&mesh.bounding_box(), &cfg.demold_dir, 2.5).unwrap();
    let ctx = context(&grid, &mesh, plan.sizing.r_gate);
    let evals = evaluate_grid(&BruteForce(&mesh), &ctx, Parallelism::Sequential);
    for e in evals.iter().filter(|e| e.feasible()) {
        assert!(plan.distance_to_cm <= e.distance_to_cm.unwrap());
    }
}
