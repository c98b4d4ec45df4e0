use cableplan::candidates::enumerate_candidates;
use cableplan::farm::{CostModel, PlanningConfig, SolverParams};
use cableplan::fixtures::published_grid;
use cableplan::model::build_milp;
use cableplan::siting::place_substations;
use cableplan::simplex::{solve_lp, LpProblem};
use cableplan::solver::solve_milp;
use std::time::Instant;

fn main() {
    let config = PlanningConfig::default();
    let farm = published_grid();
    let sited = place_substations(&farm, 1, &config).unwrap();
    let graph = enumerate_candidates(&sited, &config).unwrap();
    println!("edges: {}, crossings: {}", graph.edges.len(), graph.crossings.len());
    let cost_model = CostModel::default();
    let (model, varmap) = build_milp(&graph, &config, &cost_model).unwrap();
    println!("columns: {}, rows: {}", model.columns.len(), model.rows.len());
    let t = Instant::now();
    let root = solve_lp(&model, None);
    println!("root LP: {:?} obj {:.3} iters {} in {:.2}s", root.status, root.objective, root.iterations, t.elapsed().as_secs_f64());

    let params = SolverParams { time_limit_s: 120.0, gap_tol: 0.05, ..Default::default() };
    let t = Instant::now();
    let mut last = None;
    let mut sink = |s: &cableplan::solver::SolveStats| { last = Some(*s); };
    match solve_milp(&model, &varmap, &graph, &config, &params, Some(&mut sink)) {
        Ok((plan, stats)) => {
            let report = cableplan::evaluate::cost_breakdown(&plan, &graph, &config, &cost_model).unwrap();
            println!("solve: inc {:.2} bound {:.2} gap {:.4} nodes {} in {:.1}s", stats.incumbent, stats.bound, stats.gap, stats.nodes_explored, t.elapsed().as_secs_f64());
            println!("plan: {} cables, {:.2} km, inv {:.2} mY, loss {:.4}%", plan.chosen.len(), report.cable_length, report.investment, report.loss_rate);
        }
        Err(e) => println!("unsolved: {e}"),
    }
    let _ = LpProblem::from_model(&model);
}
