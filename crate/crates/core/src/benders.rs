//! Benders decomposition with optimality cuts only (complete recourse).
//!
//! Each iteration solves the relaxed master problem (RMP)
//!
//! ```text
//! min c·x + Σ_ω p_ω θ_ω   s.t.  θ_ω >= π^T (h_ω - T_ω x)   for every cut π of ω
//!                               θ_ω >= θ_lower_ω,  x binary
//! ```
//!
//! then every scenario subproblem at the master solution, updates the
//! bounds and adds the selected violated cuts. [`run_classic_bd`] adds all
//! of them; the learning variant in [`crate::learnbd`] plugs a classifier
//! into the same loop through [`CutSelector`].

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{dot, LpInstance, Relation};
use crate::mip::{solve_mip_from, MipInstance, MipStatus};
use crate::problems::TwoStageProblem;

/// A cut is violated only if its violation exceeds this.
pub const VIOLATION_TOL: f64 = 1e-6;
/// Coefficient tolerance for treating two cuts as identical.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// Features of a candidate cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutObservation {
    /// `π^T (h - T x̂) - θ̂_ω`
    pub violation: f64,
    /// Cuts already generated by the same scenario.
    pub count: usize,
}

impl CutObservation {
    pub fn features(&self) -> [f64; 2] {
        [self.violation, self.count as f64]
    }
}

/// `θ_ω >= rhs - coeffs·x`, i.e. `θ_ω >= π^T (h_ω - T_ω x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub scenario: usize,
    pub duals: Vec<f64>,
    /// `T_ω^T π`
    pub coeffs: Vec<f64>,
    /// `h_ω^T π`
    pub rhs: f64,
    pub observation: CutObservation,
    pub iteration: usize,
}

impl Cut {
    /// Right-hand side of the cut at `x`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.rhs - dot(&self.coeffs, x)
    }

    fn same_as(&self, other: &Cut) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= DUPLICATE_TOL * a.abs().max(b.abs()).max(1.0);
        self.scenario == other.scenario
            && close(self.rhs, other.rhs)
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(&a, &b)| close(a, b))
    }
}

pub fn make_cut(
    problem: &TwoStageProblem,
    scenario: usize,
    duals: Vec<f64>,
    observation: CutObservation,
    iteration: usize,
) -> Cut {
    let s = &problem.scenarios[scenario];
    let rhs = dot(&s.rhs, &duals);
    let mut coeffs = vec![0.0; problem.num_first_stage()];
    for (t_row, &pi) in s.recourse.technology.iter().zip(&duals) {
        if pi == 0.0 {
            continue;
        }
        for (g, &t) in coeffs.iter_mut().zip(t_row) {
            *g += t * pi;
        }
    }
    Cut {
        scenario,
        duals,
        coeffs,
        rhs,
        observation,
        iteration,
    }
}

/// Violation of `cut` at the master point `(x, θ)`.
pub fn violation(cut: &Cut, x: &[f64], theta: &[f64]) -> f64 {
    cut.value_at(x) - theta[cut.scenario]
}

/// Relative gap in percent, `100 (ub - lb) / lb`.
///
/// A zero lower bound gives 0 when the bounds coincide and infinity
/// otherwise; a negative one uses `|lb|` as denominator.
pub fn compute_gap(ub: f64, lb: f64) -> f64 {
    let diff = ub - lb;
    if lb.abs() < 1e-9 {
        return if diff.abs() < 1e-9 { 0.0 } else { f64::INFINITY };
    }
    if diff == 0.0 {
        return 0.0;
    }
    100.0 * diff / lb.abs()
}

/// Cuts per scenario, without duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutPool {
    cuts: Vec<Vec<Cut>>,
}

impl CutPool {
    pub fn new(scenarios: usize) -> Self {
        CutPool {
            cuts: vec![Vec::new(); scenarios],
        }
    }

    /// Returns `false` when an identical cut is already present.
    pub fn insert(&mut self, cut: Cut) -> bool {
        let pool = &mut self.cuts[cut.scenario];
        if pool.iter().any(|c| c.same_as(&cut)) {
            return false;
        }
        pool.push(cut);
        true
    }

    pub fn scenario(&self, w: usize) -> &[Cut] {
        &self.cuts[w]
    }

    pub fn len(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cut> {
        self.cuts.iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmpSolution {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub objective: f64,
    /// Branch-and-bound nodes (1 for the relaxation).
    pub nodes: usize,
}

/// The RMP over `pool`. With `relax` the binaries are relaxed to `[0, 1]`.
pub fn solve_rmp(problem: &TwoStageProblem, pool: &CutPool, relax: bool) -> Result<RmpSolution> {
    solve_rmp_from(problem, pool, relax, None)
}

/// The RMP, with branch and bound started from the master point that pairs
/// `x_start` with the smallest feasible θ.
pub fn solve_rmp_from(
    problem: &TwoStageProblem,
    pool: &CutPool,
    relax: bool,
    x_start: Option<&[f64]>,
) -> Result<RmpSolution> {
    let n1 = problem.num_first_stage();
    let ns = problem.num_scenarios();
    let mut objective = problem.first_stage_cost.clone();
    objective.extend(problem.scenarios.iter().map(|s| s.probability));
    let mut lp = LpInstance::new(objective);
    for j in 0..n1 {
        lp.set_bounds(j, 0.0, 1.0);
    }
    for w in 0..ns {
        lp.set_bounds(n1 + w, problem.theta_lower[w], f64::INFINITY);
    }
    for cut in pool.iter() {
        let mut row = cut.coeffs.clone();
        row.resize(n1 + ns, 0.0);
        row[n1 + cut.scenario] = 1.0;
        lp.add_row(row, Relation::Ge, cut.rhs);
    }
    let (values, objective, nodes) = if relax {
        let sol = crate::lp::solve_lp(&lp)?;
        match sol.status {
            crate::lp::LpStatus::Optimal => (sol.primal, sol.objective, 1),
            crate::lp::LpStatus::Infeasible => return Err(Error::MasterInfeasible),
            crate::lp::LpStatus::Unbounded => return Err(Error::Unbounded),
        }
    } else {
        let start = x_start.map(|x| {
            let mut point = x.to_vec();
            point.extend_from_slice(&problem.theta_lower);
            for cut in pool.iter() {
                let v = &mut point[n1 + cut.scenario];
                *v = v.max(cut.value_at(x));
            }
            point
        });
        let sol = solve_mip_from(&MipInstance::new(lp, (0..n1).collect()), start.as_deref())?;
        if sol.status == MipStatus::Infeasible {
            return Err(Error::MasterInfeasible);
        }
        (sol.incumbent, sol.objective, sol.nodes)
    };
    Ok(RmpSolution {
        x: values[..n1].to_vec(),
        theta: values[n1..].to_vec(),
        objective,
        nodes,
    })
}

/// Recourse value `ζ_ω = Q_ω(x)` and the row duals `π_ω` at `x`.
pub fn solve_subproblem(
    problem: &TwoStageProblem,
    scenario: usize,
    x: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let sol = problem.solve_recourse(scenario, x)?;
    Ok((sol.duals, sol.value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub max_iterations: usize,
    /// Wall-clock limit on the whole run.
    pub time_limit: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iterations: 10_000,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendersConfig {
    /// Stop once the gap in percent is at most this.
    pub tolerance_pct: f64,
    pub limits: Limits,
    /// Solve the master as an LP relaxation.
    pub relax_master: bool,
}

impl BendersConfig {
    pub fn new(tolerance_pct: f64) -> Self {
        BendersConfig {
            tolerance_pct,
            limits: Limits::default(),
            relax_master: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    /// Iteration or time limit reached.
    Limit,
    /// The gap is open but the selector refused every violated cut.
    Stalled,
}

/// One row of the per-iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iter: usize,
    pub lb: f64,
    pub ub: f64,
    pub gap_pct: f64,
    pub cuts_added: usize,
    pub cuts_total: usize,
    pub rmp_time_s: f64,
    pub cum_rmp_time_s: f64,
    pub sp_time_s: f64,
    pub cum_sp_time_s: f64,
    /// Scenarios whose cut was violated this iteration.
    pub cuts_violated: usize,
    pub delta_value: Option<f64>,
    pub retrain_count: Option<usize>,
}

pub const LOG_HEADER: [&str; 10] = [
    "iter",
    "lb",
    "ub",
    "gap_pct",
    "cuts_added",
    "cuts_total",
    "rmp_time_s",
    "cum_rmp_time_s",
    "sp_time_s",
    "cum_sp_time_s",
];

pub const LEARN_LOG_EXTRA: [&str; 2] = ["delta_value", "retrain_count"];

/// Writes the log as CSV; `learn_columns` appends `delta_value,retrain_count`.
pub fn write_log_csv<W: Write>(log: &[IterationLog], out: W, learn_columns: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = LOG_HEADER.to_vec();
    if learn_columns {
        header.extend(LEARN_LOG_EXTRA);
    }
    w.write_record(&header)?;
    for row in log {
        let mut rec = vec![
            row.iter.to_string(),
            row.lb.to_string(),
            row.ub.to_string(),
            row.gap_pct.to_string(),
            row.cuts_added.to_string(),
            row.cuts_total.to_string(),
            row.rmp_time_s.to_string(),
            row.cum_rmp_time_s.to_string(),
            row.sp_time_s.to_string(),
            row.cum_sp_time_s.to_string(),
        ];
        if learn_columns {
            rec.push(row.delta_value.map_or(String::new(), |d| d.to_string()));
            rec.push(row.retrain_count.map_or(String::new(), |r| r.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BendersState {
    pub pool: CutPool,
    /// Cuts added per scenario so far.
    pub counts: Vec<usize>,
    /// Number of RMP solves so far.
    pub iteration: usize,
    pub lb: f64,
    pub ub: f64,
    /// Master solution of the latest iteration.
    pub x_hat: Vec<f64>,
    pub theta_hat: Vec<f64>,
    /// First-stage point attaining `ub`.
    pub best_x: Vec<f64>,
    pub log: Vec<IterationLog>,
    pub cum_rmp_time: Duration,
    pub cum_sp_time: Duration,
}

impl BendersState {
    pub fn new(problem: &TwoStageProblem) -> Self {
        BendersState {
            pool: CutPool::new(problem.num_scenarios()),
            counts: vec![0; problem.num_scenarios()],
            iteration: 0,
            lb: f64::NEG_INFINITY,
            ub: f64::INFINITY,
            x_hat: Vec::new(),
            theta_hat: Vec::new(),
            best_x: Vec::new(),
            log: Vec::new(),
            cum_rmp_time: Duration::ZERO,
            cum_sp_time: Duration::ZERO,
        }
    }

    pub fn gap_pct(&self) -> f64 {
        compute_gap(self.ub, self.lb)
    }
}

/// A violated cut offered to a [`CutSelector`].
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub scenario: usize,
    pub duals: Vec<f64>,
    /// `ζ_ω`
    pub value: f64,
    /// Violation and the scenario's cut count before this iteration.
    pub observation: CutObservation,
}

/// Decides which violated cuts enter the master problem.
pub trait CutSelector {
    /// Indices into `candidates`. `gap_open` is false when the run is about
    /// to stop anyway.
    fn select(&mut self, candidates: &[Candidate], gap_open: bool) -> Result<Vec<usize>>;

    /// Extra log columns for the current iteration.
    fn log_extras(&self) -> (Option<f64>, Option<usize>) {
        (None, None)
    }
}

/// Adds every violated cut.
#[derive(Debug, Clone, Copy, Default)]
pub struct AddAll;

impl CutSelector for AddAll {
    fn select(&mut self, candidates: &[Candidate], _gap_open: bool) -> Result<Vec<usize>> {
        Ok((0..candidates.len()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BendersRun {
    pub status: RunStatus,
    /// Best first-stage point found (attains the upper bound).
    pub x: Vec<f64>,
    /// Upper bound `c·x + Σ p_ω Q_ω(x)` of `x`.
    pub objective: f64,
    pub lower_bound: f64,
    pub gap_pct: f64,
    pub iterations: usize,
    pub cuts_total: usize,
    pub state: BendersState,
}

/// Classic Benders decomposition: every violated cut is added.
pub fn run_classic_bd(problem: &TwoStageProblem, config: &BendersConfig) -> Result<BendersRun> {
    run_with_selector(problem, config, &mut AddAll)
}

/// The decomposition loop shared by both methods.
pub fn run_with_selector(
    problem: &TwoStageProblem,
    config: &BendersConfig,
    selector: &mut dyn CutSelector,
) -> Result<BendersRun> {
    if !(config.tolerance_pct > 0.0) {
        return crate::error::input_err("gap tolerance must be positive");
    }
    problem.validate()?;
    let started = Instant::now();
    let mut state = BendersState::new(problem);
    let ns = problem.num_scenarios();

    let status = loop {
        let t = state.iteration;
        let tick = Instant::now();
        let start = (!state.x_hat.is_empty()).then_some(state.x_hat.as_slice());
        let rmp = solve_rmp_from(problem, &state.pool, config.relax_master, start)?;
        let rmp_time = tick.elapsed();
        state.cum_rmp_time += rmp_time;
        state.lb = state.lb.max(rmp.objective);
        let rmp_nodes = rmp.nodes;

        let results: Vec<Result<(Vec<f64>, f64, Duration)>> = (0..ns)
            .into_par_iter()
            .map(|w| {
                let tick = Instant::now();
                let (duals, value) = solve_subproblem(problem, w, &rmp.x)?;
                Ok((duals, value, tick.elapsed()))
            })
            .collect();
        let mut sp_time = Duration::ZERO;
        let mut upper = dot(&problem.first_stage_cost, &rmp.x);
        let mut candidates = Vec::new();
        for (w, res) in results.into_iter().enumerate() {
            let (duals, value, elapsed) = res?;
            sp_time += elapsed;
            upper += problem.scenarios[w].probability * value;
            let vl = value - rmp.theta[w];
            if vl > VIOLATION_TOL {
                candidates.push(Candidate {
                    scenario: w,
                    duals,
                    value,
                    observation: CutObservation {
                        violation: vl,
                        count: state.counts[w],
                    },
                });
            }
        }
        state.cum_sp_time += sp_time;
        if upper < state.ub {
            state.ub = upper;
            state.best_x = rmp.x.clone();
        }
        state.x_hat = rmp.x;
        state.theta_hat = rmp.theta;

        let gap = state.gap_pct();
        let gap_open = gap > config.tolerance_pct;
        let selected = if candidates.is_empty() {
            Vec::new()
        } else {
            selector.select(&candidates, gap_open)?
        };
        let mut added = 0usize;
        for &i in &selected {
            let c = &candidates[i];
            let cut = make_cut(problem, c.scenario, c.duals.clone(), c.observation, t);
            if state.pool.insert(cut) {
                state.counts[c.scenario] += 1;
                added += 1;
            }
        }
        let (delta_value, retrain_count) = selector.log_extras();
        state.log.push(IterationLog {
            iter: t,
            lb: state.lb,
            ub: state.ub,
            gap_pct: gap,
            cuts_added: added,
            cuts_total: state.pool.len(),
            rmp_time_s: rmp_time.as_secs_f64(),
            cum_rmp_time_s: state.cum_rmp_time.as_secs_f64(),
            sp_time_s: sp_time.as_secs_f64(),
            cum_sp_time_s: state.cum_sp_time.as_secs_f64(),
            cuts_violated: candidates.len(),
            delta_value,
            retrain_count,
        });
        state.iteration += 1;
        log::debug!(
            "iter {t}: lb {} ub {} gap {gap:.6}% added {added}/{} nodes {}",
            state.lb,
            state.ub,
            candidates.len(),
            rmp_nodes
        );

        if !gap_open || candidates.is_empty() {
            break RunStatus::Converged;
        }
        if added == 0 {
            break RunStatus::Stalled;
        }
        if state.iteration >= config.limits.max_iterations {
            break RunStatus::Limit;
        }
        if config
            .limits
            .time_limit
            .is_some_and(|limit| started.elapsed() >= limit)
        {
            break RunStatus::Limit;
        }
    };

    Ok(BendersRun {
        status,
        x: state.best_x.clone(),
        objective: state.ub,
        lower_bound: state.lb,
        gap_pct: state.gap_pct(),
        iterations: state.iteration,
        cuts_total: state.pool.len(),
        state,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::problems::{Recourse, Scenario};
    use std::sync::Arc;

    /// min x + Q(x),  Q(x) = min 3y s.t. y >= 1 - x,  x binary
    pub(crate) fn toy() -> TwoStageProblem {
        let recourse = Arc::new(Recourse {
            cost: vec![3.0],
            matrix: vec![vec![1.0]],
            relations: vec![Relation::Ge],
            technology: vec![vec![1.0]],
        });
        TwoStageProblem::new(
            "toy",
            vec![1.0],
            vec![Scenario {
                probability: 1.0,
                rhs: vec![1.0],
                recourse,
            }],
            vec![0.0],
        )
        .unwrap()
    }

    fn obs() -> CutObservation {
        CutObservation {
            violation: 0.0,
            count: 0,
        }
    }

    #[test]
    fn empty_master_is_zero() {
        let p = toy();
        let rmp = solve_rmp(&p, &CutPool::new(1), false).unwrap();
        assert_eq!(rmp.x, vec![0.0]);
        assert_eq!(rmp.theta, vec![0.0]);
        assert_eq!(rmp.objective, 0.0);
    }

    #[test]
    fn master_with_one_cut() {
        let p = toy();
        let mut pool = CutPool::new(1);
        let (duals, value) = solve_subproblem(&p, 0, &[0.0]).unwrap();
        assert_eq!(value, 3.0);
        let cut = make_cut(&p, 0, duals, obs(), 0);
        // θ >= 3 - 3x
        assert_eq!(cut.rhs, 3.0);
        assert_eq!(cut.coeffs, vec![3.0]);
        assert!(pool.insert(cut.clone()));
        let rmp = solve_rmp(&p, &pool, false).unwrap();
        assert_eq!(rmp.x, vec![1.0]);
        assert!(rmp.theta[0].abs() < 1e-12);
        assert!((rmp.objective - 1.0).abs() < 1e-12);

        // The same cut again is discarded and changes nothing.
        assert!(!pool.insert(cut));
        assert_eq!(pool.len(), 1);
        let again = solve_rmp(&p, &pool, false).unwrap();
        assert_eq!(again.objective, rmp.objective);
    }

    #[test]
    fn redundant_cut_leaves_master_value() {
        let p = toy();
        let mut pool = CutPool::new(1);
        let (duals, _) = solve_subproblem(&p, 0, &[0.0]).unwrap();
        pool.insert(make_cut(&p, 0, duals, obs(), 0));
        let before = solve_rmp(&p, &pool, false).unwrap().objective;
        // θ >= 1 - 3x is implied by θ >= 3 - 3x.
        pool.insert(Cut {
            scenario: 0,
            duals: vec![],
            coeffs: vec![3.0],
            rhs: 1.0,
            observation: obs(),
            iteration: 1,
        });
        assert_eq!(solve_rmp(&p, &pool, false).unwrap().objective, before);
    }

    #[test]
    fn cut_formula_examples() {
        let p = toy();
        let zero = make_cut(&p, 0, vec![0.0], obs(), 0);
        assert_eq!(zero.rhs, 0.0);
        assert_eq!(zero.coeffs, vec![0.0]);
        assert_eq!(zero.value_at(&[1.0]), 0.0);
    }

    #[test]
    fn violation_examples() {
        let cut = Cut {
            scenario: 0,
            duals: vec![1.0],
            coeffs: vec![0.0],
            rhs: 4.0,
            observation: obs(),
            iteration: 0,
        };
        assert_eq!(violation(&cut, &[1.0], &[0.0]), 4.0);
        assert_eq!(violation(&cut, &[1.0], &[4.0]), 0.0);
        assert_eq!(violation(&cut, &[1.0], &[10.0]), -6.0);
    }

    #[test]
    fn gap_examples() {
        assert_eq!(compute_gap(110.0, 100.0), 10.0);
        assert_eq!(compute_gap(5.0, 5.0), 0.0);
        assert_eq!(compute_gap(3.0, 1.0), 200.0);
        assert_eq!(compute_gap(0.0, 0.0), 0.0);
        assert_eq!(compute_gap(3.0, 0.0), f64::INFINITY);
        assert_eq!(compute_gap(-1.0, -2.0), 50.0);
    }

    #[test]
    fn toy_trace() {
        let p = toy();
        let run = run_classic_bd(&p, &BendersConfig::new(0.01)).unwrap();
        assert_eq!(run.status, RunStatus::Converged);
        assert_eq!(run.iterations, 2);
        assert_eq!(run.cuts_total, 1);
        let log = &run.state.log;
        assert_eq!((log[0].lb, log[0].ub), (0.0, 3.0));
        assert_eq!(log[0].cuts_added, 1);
        assert!((log[1].lb - 1.0).abs() < 1e-12);
        assert!((log[1].ub - 1.0).abs() < 1e-12);
        assert_eq!(log[1].gap_pct, 0.0);
        assert_eq!(run.x, vec![1.0]);
    }

    #[test]
    fn zero_recourse_converges_immediately() {
        let recourse = Arc::new(Recourse {
            cost: vec![0.0],
            matrix: vec![vec![1.0]],
            relations: vec![Relation::Ge],
            technology: vec![vec![1.0]],
        });
        let p = TwoStageProblem::new(
            "free",
            vec![2.0],
            vec![Scenario {
                probability: 1.0,
                rhs: vec![1.0],
                recourse,
            }],
            vec![0.0],
        )
        .unwrap();
        let run = run_classic_bd(&p, &BendersConfig::new(0.01)).unwrap();
        assert_eq!(run.iterations, 1);
        assert_eq!(run.cuts_total, 0);
        assert_eq!(run.objective, 0.0);
    }

    #[test]
    fn log_csv_header() {
        let run = run_classic_bd(&toy(), &BendersConfig::new(0.01)).unwrap();
        let mut buf = Vec::new();
        write_log_csv(&run.state.log, &mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "iter,lb,ub,gap_pct,cuts_added,cuts_total,rmp_time_s,cum_rmp_time_s,sp_time_s,cum_sp_time_s\n"
        ));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn iteration_limit() {
        let p = toy();
        let mut config = BendersConfig::new(0.01);
        config.limits.max_iterations = 1;
        let run = run_classic_bd(&p, &config).unwrap();
        assert_eq!(run.status, RunStatus::Limit);
        assert_eq!(run.iterations, 1);
        assert!(run_classic_bd(&p, &BendersConfig::new(0.0)).is_err());
    }
}
