//! Dense linear programming with row duals.
//!
//! An [`LpInstance`] is converted to the canonical form
//! `min c·z  s.t.  A z >= b, z >= 0` by shifting bounds, splitting free
//! variables, turning finite upper bounds into rows and eliminating fixed
//! variables. The canonical problem is then solved either directly or through
//! its dual, whichever gives the smaller tableau. Both routes recover the
//! primal point and the row duals.

mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use simplex::{solve_standard, StandardLp, StdOutcome};

pub use simplex::{FEAS_TOL as FEASIBILITY_TOL, OPT_TOL as OPTIMALITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min objective·x` over linear rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// `(lower, upper)`; infinite values mean no bound.
    pub bounds: Vec<(f64, f64)>,
}

impl LpInstance {
    /// Variables default to `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpInstance {
            objective,
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return input_err(format!(
                "{} bounds given for {} variables",
                self.bounds.len(),
                n
            ));
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return input_err("objective has non-finite coefficients");
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return input_err(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                ));
            }
            if row.coeffs.iter().any(|v| !v.is_finite()) || !row.rhs.is_finite() {
                return input_err(format!("row {i} has non-finite data"));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return input_err(format!("variable {j} has invalid bounds [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Row activity `coeffs·x` for every row.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(&r.coeffs, x)).collect()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, act) in self.rows.iter().zip(self.activities(x)) {
            let v = match row.relation {
                Relation::Le => act - row.rhs,
                Relation::Ge => row.rhs - act,
                Relation::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&(lo, hi), &xj) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - xj).max(xj - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One dual per row: `>= 0` for `Ge` rows, `<= 0` for `Le` rows.
    pub duals: Vec<f64>,
    /// `objective - A^T duals`; nonzero only for variables at a bound.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn with_status(status: LpStatus, n: usize, m: usize) -> Self {
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Optimal => 0.0,
        };
        LpSolution {
            status,
            primal: vec![0.0; n],
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            objective,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Which tableau the solver works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Pick the smaller of the primal and dual tableaus.
    #[default]
    Auto,
    Primal,
    Dual,
}

pub fn solve_lp(lp: &LpInstance) -> Result<LpSolution> {
    solve_lp_with(lp, Route::Auto)
}

pub fn solve_lp_with(lp: &LpInstance, route: Route) -> Result<LpSolution> {
    lp.validate()?;
    let canon = Canonical::build(lp);
    let use_dual = match route {
        Route::Auto => canon.n < canon.m,
        Route::Primal => false,
        Route::Dual => true,
    };
    let outcome = if use_dual {
        match canon.solve_dual_route()? {
            // The dual being infeasible leaves the primal status ambiguous.
            CanonOutcome::DualInfeasible => canon.solve_primal_route()?,
            other => other,
        }
    } else {
        canon.solve_primal_route()?
    };
    Ok(canon.recover(lp, outcome))
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    Fixed(f64),
    /// `x = offset + sign * z[col]`
    Shifted { col: usize, offset: f64, sign: f64 },
    /// `x = z[pos] - z[neg]`
    Free { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy)]
enum RowMap {
    Ge(usize),
    Le(usize),
    Eq(usize, usize),
}

enum CanonOutcome {
    Optimal { z: Vec<f64>, y: Vec<f64> },
    Infeasible,
    Unbounded,
    DualInfeasible,
}

/// `min c·z + constant  s.t.  A z >= b, z >= 0`.
struct Canonical {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    var_map: Vec<VarMap>,
    row_map: Vec<RowMap>,
}

impl Canonical {
    fn build(lp: &LpInstance) -> Self {
        let mut var_map = Vec::with_capacity(lp.num_vars());
        let mut n = 0usize;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for &(lo, hi) in &lp.bounds {
            let map = if lo == hi {
                VarMap::Fixed(lo)
            } else if lo.is_finite() {
                let col = n;
                n += 1;
                if hi.is_finite() {
                    upper_rows.push((col, hi - lo));
                }
                VarMap::Shifted {
                    col,
                    offset: lo,
                    sign: 1.0,
                }
            } else if hi.is_finite() {
                let col = n;
                n += 1;
                VarMap::Shifted {
                    col,
                    offset: hi,
                    sign: -1.0,
                }
            } else {
                let pos = n;
                n += 2;
                VarMap::Free { pos, neg: pos + 1 }
            };
            var_map.push(map);
        }

        let mut c = vec![0.0; n];
        for (map, &cj) in var_map.iter().zip(&lp.objective) {
            match *map {
                VarMap::Fixed(_) => {}
                VarMap::Shifted { col, sign, .. } => c[col] += sign * cj,
                VarMap::Free { pos, neg } => {
                    c[pos] += cj;
                    c[neg] -= cj;
                }
            }
        }

        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut m = 0usize;
        let mut row_map = Vec::with_capacity(lp.num_rows());
        let mut push_row = |coeffs: &[f64], rhs: f64, scale: f64, a: &mut Vec<f64>, b: &mut Vec<f64>| {
            a.extend(coeffs.iter().map(|v| v * scale));
            b.push(rhs * scale);
            m += 1;
            m - 1
        };
        let mut buf = vec![0.0; n];
        for row in &lp.rows {
            buf.iter_mut().for_each(|v| *v = 0.0);
            let mut rhs = row.rhs;
            for (map, &aij) in var_map.iter().zip(&row.coeffs) {
                if aij == 0.0 {
                    continue;
                }
                match *map {
                    VarMap::Fixed(v) => rhs -= aij * v,
                    VarMap::Shifted { col, offset, sign } => {
                        rhs -= aij * offset;
                        buf[col] += sign * aij;
                    }
                    VarMap::Free { pos, neg } => {
                        buf[pos] += aij;
                        buf[neg] -= aij;
                    }
                }
            }
            let map = match row.relation {
                Relation::Ge => RowMap::Ge(push_row(&buf, rhs, 1.0, &mut a, &mut b)),
                Relation::Le => RowMap::Le(push_row(&buf, rhs, -1.0, &mut a, &mut b)),
                Relation::Eq => {
                    let k1 = push_row(&buf, rhs, 1.0, &mut a, &mut b);
                    let k2 = push_row(&buf, rhs, -1.0, &mut a, &mut b);
                    RowMap::Eq(k1, k2)
                }
            };
            row_map.push(map);
        }
        for (col, width) in upper_rows {
            buf.iter_mut().for_each(|v| *v = 0.0);
            buf[col] = 1.0;
            push_row(&buf, width, -1.0, &mut a, &mut b);
        }

        Canonical {
            m,
            n,
            a,
            b,
            c,
            var_map,
            row_map,
        }
    }

    /// `A z - s = b`, rows with negative `b` flipped so their surplus is basic.
    fn solve_primal_route(&self) -> Result<CanonOutcome> {
        let (m, n) = (self.m, self.n);
        let cols = n + m;
        let mut a = vec![0.0; m * cols];
        let mut b = vec![0.0; m];
        let mut hint = vec![None; m];
        let mut sign = vec![1.0; m];
        for i in 0..m {
            let s = if self.b[i] < 0.0 { -1.0 } else { 1.0 };
            sign[i] = s;
            let src = &self.a[i * n..(i + 1) * n];
            let dst = &mut a[i * cols..(i + 1) * cols];
            for (d, &v) in dst[..n].iter_mut().zip(src) {
                *d = s * v;
            }
            dst[n + i] = -s;
            b[i] = s * self.b[i];
            if s < 0.0 {
                hint[i] = Some(n + i);
            }
        }
        let mut c = self.c.clone();
        c.resize(cols, 0.0);
        let std = StandardLp {
            m,
            n: cols,
            a,
            b,
            c,
            basis_hint: hint,
        };
        Ok(match solve_standard(&std)? {
            StdOutcome::Optimal { x, duals } => CanonOutcome::Optimal {
                z: x[..n].to_vec(),
                y: duals.iter().zip(&sign).map(|(w, s)| (w * s).max(0.0)).collect(),
            },
            StdOutcome::Infeasible => CanonOutcome::Infeasible,
            StdOutcome::Unbounded => CanonOutcome::Unbounded,
        })
    }

    /// `min -b·y  s.t.  A^T y + t = c, y, t >= 0`.
    fn solve_dual_route(&self) -> Result<CanonOutcome> {
        let (m, n) = (self.m, self.n);
        let cols = m + n;
        let mut a = vec![0.0; n * cols];
        let mut b = vec![0.0; n];
        let mut hint = vec![None; n];
        let mut sign = vec![1.0; n];
        for j in 0..n {
            let s = if self.c[j] < 0.0 { -1.0 } else { 1.0 };
            sign[j] = s;
            let dst = &mut a[j * cols..(j + 1) * cols];
            for i in 0..m {
                dst[i] = s * self.a[i * n + j];
            }
            dst[m + j] = s;
            b[j] = s * self.c[j];
            if s > 0.0 {
                hint[j] = Some(m + j);
            }
        }
        let mut c: Vec<f64> = self.b.iter().map(|v| -v).collect();
        c.resize(cols, 0.0);
        let std = StandardLp {
            m: n,
            n: cols,
            a,
            b,
            c,
            basis_hint: hint,
        };
        Ok(match solve_standard(&std)? {
            StdOutcome::Optimal { x, duals } => CanonOutcome::Optimal {
                z: duals.iter().zip(&sign).map(|(w, s)| (-w * s).max(0.0)).collect(),
                y: x[..m].to_vec(),
            },
            StdOutcome::Unbounded => CanonOutcome::Infeasible,
            StdOutcome::Infeasible => CanonOutcome::DualInfeasible,
        })
    }

    fn recover(&self, lp: &LpInstance, outcome: CanonOutcome) -> LpSolution {
        let (z, y) = match outcome {
            CanonOutcome::Optimal { z, y } => (z, y),
            CanonOutcome::Infeasible => {
                return LpSolution::with_status(LpStatus::Infeasible, lp.num_vars(), lp.num_rows())
            }
            CanonOutcome::Unbounded | CanonOutcome::DualInfeasible => {
                return LpSolution::with_status(LpStatus::Unbounded, lp.num_vars(), lp.num_rows())
            }
        };
        let primal: Vec<f64> = self
            .var_map
            .iter()
            .map(|map| match *map {
                VarMap::Fixed(v) => v,
                VarMap::Shifted { col, offset, sign } => offset + sign * z[col],
                VarMap::Free { pos, neg } => z[pos] - z[neg],
            })
            .collect();
        let duals: Vec<f64> = self
            .row_map
            .iter()
            .map(|map| match *map {
                RowMap::Ge(k) => y[k],
                RowMap::Le(k) => -y[k],
                RowMap::Eq(k1, k2) => y[k1] - y[k2],
            })
            .collect();
        let mut reduced_costs = lp.objective.clone();
        for (row, &yi) in lp.rows.iter().zip(&duals) {
            if yi == 0.0 {
                continue;
            }
            for (r, &aij) in reduced_costs.iter_mut().zip(&row.coeffs) {
                *r -= yi * aij;
            }
        }
        let objective = dot(&lp.objective, &primal);
        LpSolution {
            status: LpStatus::Optimal,
            primal,
            duals,
            reduced_costs,
            objective,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dual objective `duals·rhs + Σ_j r_j x_j`, where the bound term only
/// involves variables resting at a bound.
pub fn dual_objective(lp: &LpInstance, sol: &LpSolution) -> f64 {
    let rows: f64 = lp.rows.iter().zip(&sol.duals).map(|(r, y)| r.rhs * y).sum();
    let bounds: f64 = sol
        .reduced_costs
        .iter()
        .zip(&sol.primal)
        .map(|(r, x)| r * x)
        .sum();
    rows + bounds
}
