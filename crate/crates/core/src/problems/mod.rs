//! Two-stage stochastic programs with binary first stage and LP recourse.
//!
//! Every scenario carries recourse data in the form
//! `min q·y  s.t.  W y (rel) h - T x,  y >= 0`; the first stage is
//! `min c·x + Σ_ω p_ω Q_ω(x)` over binary `x`.

mod cflp;
mod cmnd;
mod extensive;
mod scenarios;

use std::sync::Arc;

use crate::error::{input_err, Error, Result};
use crate::lp::{solve_lp, LpInstance, LpStatus, Relation};

pub use cflp::{
    build_cflp, parse_orlib_cap, write_orlib_cap, CflpData, CflpGenerator, TransferStats,
    DEFAULT_PENALTY_FACTOR,
};
pub use cmnd::{
    build_cmnd, parse_cmnd, write_cmnd, CmndArc, CmndCommodity, CmndData, CmndGenerator,
    DEFAULT_PENALTY_MULTIPLIER,
};
pub use extensive::extensive_form;
pub use scenarios::{clamp_demand, sample_scenarios, ScenarioSet};

/// Second-stage data shared by scenarios that differ only in `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recourse {
    /// `q`, one entry per recourse variable.
    pub cost: Vec<f64>,
    /// `W`, one dense row per recourse constraint.
    pub matrix: Vec<Vec<f64>>,
    pub relations: Vec<Relation>,
    /// `T`, one dense row (over first-stage variables) per recourse constraint.
    pub technology: Vec<Vec<f64>>,
}

impl Recourse {
    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub probability: f64,
    /// `h`
    pub rhs: Vec<f64>,
    pub recourse: Arc<Recourse>,
}

/// Optimal value and row duals of one recourse LP.
#[derive(Debug, Clone, PartialEq)]
pub struct RecourseSolution {
    pub value: f64,
    pub duals: Vec<f64>,
    pub primal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageProblem {
    pub name: String,
    /// `c`; every first-stage variable is binary.
    pub first_stage_cost: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    /// Lower bound on each `θ_ω` in the master problem.
    pub theta_lower: Vec<f64>,
}

impl TwoStageProblem {
    pub fn new(
        name: impl Into<String>,
        first_stage_cost: Vec<f64>,
        scenarios: Vec<Scenario>,
        theta_lower: Vec<f64>,
    ) -> Result<Self> {
        let p = TwoStageProblem {
            name: name.into(),
            first_stage_cost,
            scenarios,
            theta_lower,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn num_first_stage(&self) -> usize {
        self.first_stage_cost.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n1 = self.num_first_stage();
        if self.scenarios.is_empty() {
            return input_err("problem has no scenarios");
        }
        if self.theta_lower.len() != self.scenarios.len() {
            return input_err("one theta lower bound per scenario required");
        }
        if self.first_stage_cost.iter().any(|v| !v.is_finite()) {
            return input_err("first-stage cost must be finite");
        }
        let mut total = 0.0;
        for (w, s) in self.scenarios.iter().enumerate() {
            let r = &s.recourse;
            let m = r.num_rows();
            if s.rhs.len() != m || r.relations.len() != m || r.technology.len() != m {
                return input_err(format!("scenario {w}: recourse row counts disagree"));
            }
            if r.matrix.iter().any(|row| row.len() != r.num_vars()) {
                return input_err(format!("scenario {w}: W rows must match q length"));
            }
            if r.technology.iter().any(|row| row.len() != n1) {
                return input_err(format!("scenario {w}: T rows must match first-stage size"));
            }
            if !(s.probability >= 0.0) {
                return input_err(format!("scenario {w}: negative probability"));
            }
            total += s.probability;
        }
        if (total - 1.0).abs() > 1e-9 {
            return input_err(format!("scenario probabilities sum to {total}"));
        }
        Ok(())
    }

    /// `h_ω - T_ω x`
    pub fn effective_rhs(&self, scenario: usize, x: &[f64]) -> Vec<f64> {
        let s = &self.scenarios[scenario];
        s.rhs
            .iter()
            .zip(&s.recourse.technology)
            .map(|(h, t)| h - crate::lp::dot(t, x))
            .collect()
    }

    /// The recourse LP of scenario `scenario` at first-stage point `x`.
    pub fn recourse_lp(&self, scenario: usize, x: &[f64]) -> LpInstance {
        let s = &self.scenarios[scenario];
        let r = &s.recourse;
        let mut lp = LpInstance::new(r.cost.clone());
        for ((row, &rel), rhs) in r
            .matrix
            .iter()
            .zip(&r.relations)
            .zip(self.effective_rhs(scenario, x))
        {
            lp.add_row(row.clone(), rel, rhs);
        }
        lp
    }

    /// `Q_ω(x)` with the row duals of the recourse LP.
    pub fn solve_recourse(&self, scenario: usize, x: &[f64]) -> Result<RecourseSolution> {
        let lp = self.recourse_lp(scenario, x);
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(RecourseSolution {
                value: sol.objective,
                duals: sol.duals,
                primal: sol.primal,
            }),
            LpStatus::Infeasible => Err(Error::RecourseInfeasible(scenario)),
            LpStatus::Unbounded => Err(Error::RecourseUnbounded(scenario)),
        }
    }

    /// `c·x + Σ_ω p_ω Q_ω(x)`
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let mut total = crate::lp::dot(&self.first_stage_cost, x);
        for w in 0..self.num_scenarios() {
            total += self.scenarios[w].probability * self.solve_recourse(w, x)?.value;
        }
        Ok(total)
    }

    /// Minimum of [`Self::evaluate`] over all binary points. Exponential; test use only.
    pub fn brute_force(&self) -> Result<(Vec<f64>, f64)> {
        let n = self.num_first_stage();
        if n > 20 {
            return input_err("brute force limited to 20 binaries");
        }
        let mut best = (Vec::new(), f64::INFINITY);
        for mask in 0u64..(1u64 << n) {
            let x: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
            let v = self.evaluate(&x)?;
            if v < best.1 {
                best = (x, v);
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min x + Q(x),  Q(x) = min 3y s.t. y >= 1 - x
    fn toy() -> TwoStageProblem {
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

    #[test]
    fn recourse_values_of_toy() {
        let p = toy();
        assert_eq!(p.solve_recourse(0, &[0.0]).unwrap().value, 3.0);
        assert_eq!(p.solve_recourse(0, &[1.0]).unwrap().value, 0.0);
        let (x, v) = p.brute_force().unwrap();
        assert_eq!(x, vec![1.0]);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn validation_catches_bad_probabilities() {
        let mut p = toy();
        p.scenarios[0].probability = 0.5;
        assert!(p.validate().is_err());
        let mut p = toy();
        p.theta_lower.clear();
        assert!(p.validate().is_err());
    }
}
