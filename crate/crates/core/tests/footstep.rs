use ibplan::biclique::{biclique_cover, merge_cover, FiniteElementGraph};
use ibplan::cdc::conflict_graph;
use ibplan::formulation::{big_m_values, footstep_model, Assignment, FootstepParams};
use ibplan::geometry::{constrained_delaunay, Environment, Point2};
use ibplan::partition::partition_from_cdt;
use ibplan::solver::{solve_milp, Limits, MilpStatus};

fn analytic_params() -> FootstepParams {
    FootstepParams {
        steps: 4,
        start: Point2::new(0.1, 0.1),
        goal: Point2::new(0.9, 0.9),
        reach_radius: 1.0,
        lateral_offset: 0.0,
        w_used: 0.0,
        ..FootstepParams::default()
    }
}

#[test]
fn empty_square_l1_path_length() {
    let env = Environment::unit(vec![]);
    let p = partition_from_cdt(&constrained_delaunay(&env).unwrap()).unwrap();
    let cdc = p.cdc();
    let cover = merge_cover(&biclique_cover(&FiniteElementGraph::from_cdc(&cdc)), &conflict_graph(&cdc));
    let data = big_m_values(&p.halfspaces(), &env.bounds);
    let params = analytic_params();
    for assignment in [Assignment::Ib(&cover), Assignment::BigM(&data)] {
        let m = footstep_model(&env, &p, assignment, &params).unwrap();
        let r = solve_milp(&m, Limits::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        let obj = r.objective.unwrap();
        assert!((obj - 1.6).abs() < 1e-6, "objective {obj}");
        let x = r.values.unwrap();
        assert!(m.max_violation(&x) < 1e-6);
        assert!(m.max_fractionality(&x) < 1e-6);
    }
}

#[test]
fn single_step_at_goal_costs_nothing() {
    let env = Environment::unit(vec![]);
    let p = partition_from_cdt(&constrained_delaunay(&env).unwrap()).unwrap();
    let data = big_m_values(&p.halfspaces(), &env.bounds);
    let params = FootstepParams { steps: 1, start: Point2::new(0.3, 0.6), goal: Point2::new(0.3, 0.6), ..FootstepParams::default() };
    let m = footstep_model(&env, &p, Assignment::BigM(&data), &params).unwrap();
    let r = solve_milp(&m, Limits::default()).unwrap();
    assert_eq!(r.status, MilpStatus::Optimal);
    assert!(r.objective.unwrap().abs() < 1e-9);
}
