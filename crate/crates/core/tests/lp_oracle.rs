//! Cross-checks the in-repo simplex against an unrelated LP solver on a
//! batch of randomized bounded problems.

use cableplan::model::{Column, MilpModel, Row, RowSense};
use cableplan::simplex::{solve_lp, LpStatus};

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn random_model(rng: &mut XorShift, n: usize, m: usize, feasible_bias: bool) -> MilpModel {
    let mut columns = Vec::new();
    for j in 0..n {
        let lo = rng.next() * 6.0 - 3.0;
        let hi = lo + rng.next() * 4.0 + 0.05;
        columns.push(Column {
            name: format!("x{j}"),
            lower: lo,
            upper: hi,
            integral: false,
            objective: rng.next() * 4.0 - 2.0,
        });
    }
    let mid: Vec<f64> = columns.iter().map(|c| (c.lower + c.upper) / 2.0).collect();
    let mut rows = Vec::new();
    for i in 0..m {
        let density_cut = 0.35;
        let coeffs: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| {
                let a = rng.next() * 4.0 - 2.0;
                (rng.next() > density_cut).then_some((j, a))
            })
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        let activity: f64 = coeffs.iter().map(|&(j, a)| a * mid[j]).sum();
        let sense = match i % 3 {
            0 => RowSense::Le,
            1 => RowSense::Ge,
            _ => RowSense::Eq,
        };
        let rhs = if feasible_bias {
            match sense {
                RowSense::Le => activity + rng.next(),
                RowSense::Ge => activity - rng.next(),
                RowSense::Eq => activity,
            }
        } else {
            activity + rng.next() * 6.0 - 3.0
        };
        rows.push(Row {
            name: format!("r{i}"),
            coeffs,
            sense,
            rhs,
        });
    }
    MilpModel {
        name: "rand".to_string(),
        columns,
        rows,
    }
}

fn minilp_solve(model: &MilpModel) -> Option<f64> {
    let mut problem = minilp::Problem::new(minilp::OptimizationDirection::Minimize);
    let vars: Vec<minilp::Variable> = model
        .columns
        .iter()
        .map(|c| problem.add_var(c.objective, (c.lower, c.upper)))
        .collect();
    for row in &model.rows {
        let expr: Vec<(minilp::Variable, f64)> =
            row.coeffs.iter().map(|&(j, a)| (vars[j], a)).collect();
        let op = match row.sense {
            RowSense::Le => minilp::ComparisonOp::Le,
            RowSense::Ge => minilp::ComparisonOp::Ge,
            RowSense::Eq => minilp::ComparisonOp::Eq,
        };
        problem.add_constraint(&expr, op, row.rhs);
    }
    match problem.solve() {
        Ok(solution) => Some(solution.objective()),
        Err(_) => None,
    }
}

#[test]
fn objectives_match_external_solver_on_feasible_batch() {
    let mut rng = XorShift(0xDEADBEEFCAFEF00D);
    let mut solved = 0;
    for case in 0..120 {
        let n = 2 + case % 9;
        let m = 1 + case % 7;
        let model = random_model(&mut rng, n, m, true);
        let ours = solve_lp(&model, None);
        let theirs = minilp_solve(&model);
        match (ours.status, theirs) {
            (LpStatus::Optimal, Some(obj)) => {
                let scale = 1.0 + obj.abs();
                assert!(
                    (ours.objective - obj).abs() / scale < 1e-6,
                    "case {case}: ours {} vs oracle {obj}",
                    ours.objective
                );
                solved += 1;
            }
            (LpStatus::Infeasible, None) => {}
            (s, t) => panic!("case {case}: status disagreement {s:?} vs {t:?}"),
        }
    }
    assert!(solved > 80, "only {solved} optimal cases; batch too degenerate");
}

#[test]
fn statuses_match_external_solver_on_adversarial_batch() {
    let mut rng = XorShift(0x0123456789ABCDEF);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..120 {
        let n = 2 + case % 6;
        let m = 1 + case % 8;
        let model = random_model(&mut rng, n, m, false);
        let ours = solve_lp(&model, None);
        let theirs = minilp_solve(&model);
        match (ours.status, theirs) {
            (LpStatus::Optimal, Some(obj)) => {
                let scale = 1.0 + obj.abs();
                assert!(
                    (ours.objective - obj).abs() / scale < 1e-6,
                    "case {case}: ours {} vs oracle {obj}",
                    ours.objective
                );
                optimal += 1;
            }
            (LpStatus::Infeasible, None) => infeasible += 1,
            (s, t) => panic!("case {case}: status disagreement {s:?} vs {t:?}"),
        }
    }
    assert!(optimal > 20 && infeasible > 20, "{optimal} optimal / {infeasible} infeasible");
}
