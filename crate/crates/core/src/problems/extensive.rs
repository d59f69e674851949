use super::TwoStageProblem;
use crate::lp::LpInstance;
use crate::mip::MipInstance;

/// The deterministic equivalent: first-stage binaries plus one copy of the
/// recourse variables per scenario, weighted by its probability.
///
/// Variables are ordered `x` first, then scenario blocks in index order.
pub fn extensive_form(problem: &TwoStageProblem) -> MipInstance {
    let n1 = problem.num_first_stage();
    let offsets: Vec<usize> = problem
        .scenarios
        .iter()
        .scan(n1, |acc, s| {
            let start = *acc;
            *acc += s.recourse.num_vars();
            Some(start)
        })
        .collect();
    let total = n1 + problem
        .scenarios
        .iter()
        .map(|s| s.recourse.num_vars())
        .sum::<usize>();

    let mut objective = vec![0.0; total];
    objective[..n1].copy_from_slice(&problem.first_stage_cost);
    for (s, &off) in problem.scenarios.iter().zip(&offsets) {
        for (j, q) in s.recourse.cost.iter().enumerate() {
            objective[off + j] = s.probability * q;
        }
    }
    let mut lp = LpInstance::new(objective);
    for j in 0..n1 {
        lp.set_bounds(j, 0.0, 1.0);
    }
    for (s, &off) in problem.scenarios.iter().zip(&offsets) {
        let r = &s.recourse;
        for (((w, &rel), t), &h) in r
            .matrix
            .iter()
            .zip(&r.relations)
            .zip(&r.technology)
            .zip(&s.rhs)
        {
            let mut row = vec![0.0; total];
            row[..n1].copy_from_slice(t);
            row[off..off + w.len()].copy_from_slice(w);
            lp.add_row(row, rel, h);
        }
    }
    MipInstance::new(lp, (0..n1).collect())
}
