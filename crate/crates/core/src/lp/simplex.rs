//! Dense tableau simplex for `min c·x  s.t.  A x = b, x >= 0` with `b >= 0`.
//!
//! Two phases. Rows without a usable identity column receive an artificial
//! variable. Artificial columns stay in the tableau after phase one so the
//! row duals can be read off their reduced costs.

use crate::error::{Error, Result};

/// Reduced-cost tolerance for optimality.
pub const OPT_TOL: f64 = 1e-9;
/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;

pub(crate) struct StandardLp {
    pub m: usize,
    pub n: usize,
    /// Row-major `m x n`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Column usable as the initial basic variable of each row. It must be a
    /// unit column with `+1` in that row.
    pub basis_hint: Vec<Option<usize>>,
}

#[derive(Debug)]
pub(crate) enum StdOutcome {
    Optimal { x: Vec<f64>, duals: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    m: usize,
    /// Structural columns (excluding artificials).
    n: usize,
    /// Total columns (structural + artificial).
    cols: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Column that formed the identity in each row at the start.
    init_col: Vec<usize>,
    d: Vec<f64>,
    max_iter: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &StandardLp) -> Self {
        let m = lp.m;
        let n = lp.n;
        let n_art = lp.basis_hint.iter().filter(|h| h.is_none()).count();
        let cols = n + n_art;
        let width = cols + 1;
        let mut t = vec![0.0; m * width];
        let mut basis = Vec::with_capacity(m);
        let mut next_art = n;
        for i in 0..m {
            let row = &mut t[i * width..(i + 1) * width];
            row[..n].copy_from_slice(&lp.a[i * n..(i + 1) * n]);
            row[cols] = lp.b[i];
            match lp.basis_hint[i] {
                Some(j) => basis.push(j),
                None => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
        }
        let init_col = basis.clone();
        Tableau {
            m,
            n,
            cols,
            width,
            t,
            basis,
            init_col,
            d: vec![0.0; cols],
            max_iter: 50 * (m + cols) + 1000,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.cols]
    }

    /// Reduced costs `c - c_B B^{-1} A` for the cost vector `cost` (over all columns).
    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.width..i * self.width + self.cols];
            for (dj, &aij) in self.d.iter_mut().zip(row) {
                *dj -= cb * aij;
            }
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let piv = self.t[p * w + q];
        {
            let row = &mut self.t[p * w..(p + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(p * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            row[q] = 0.0;
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for (dj, &pv) in self.d.iter_mut().zip(prow[..self.cols].iter()) {
                *dj -= dq * pv;
            }
            self.d[q] = 0.0;
        }
        self.basis[p] = q;
    }

    /// Runs primal simplex over the columns `0..enter_limit`.
    fn run(&mut self, enter_limit: usize) -> Result<PhaseEnd> {
        let degenerate_cap = 2 * (self.m + self.cols);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut is_basic = vec![false; self.cols];
        for &j in &self.basis {
            is_basic[j] = true;
        }
        for _ in 0..self.max_iter {
            let q = if bland {
                (0..enter_limit).find(|&j| !is_basic[j] && self.d[j] < -OPT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..enter_limit {
                    if is_basic[j] {
                        continue;
                    }
                    let dj = self.d[j];
                    if dj < -OPT_TOL && best.is_none_or(|(_, bd)| dj < bd) {
                        best = Some((j, dj));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(q) = q else {
                return Ok(PhaseEnd::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let aiq = self.at(i, q);
                if aiq <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / aiq;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        let tie = (ratio - r).abs() <= 1e-12 * (1.0 + r.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[k]
                            } else {
                                aiq > self.at(k, q)
                            }
                        } else {
                            ratio < r
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
            let Some((p, ratio)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };

            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > degenerate_cap {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            is_basic[self.basis[p]] = false;
            is_basic[q] = true;
            self.pivot(p, q);
        }
        Err(Error::IterationLimit)
    }
}

pub(crate) fn solve_standard(lp: &StandardLp) -> Result<StdOutcome> {
    debug_assert_eq!(lp.a.len(), lp.m * lp.n);
    let mut tab = Tableau::build(lp);
    let n = tab.n;
    let cols = tab.cols;

    if cols > n {
        let mut phase1_cost = vec![0.0; cols];
        for c in phase1_cost.iter_mut().skip(n) {
            *c = 1.0;
        }
        tab.price(&phase1_cost);
        // Phase one is bounded below by zero.
        let _ = tab.run(cols)?;
        let infeas: f64 = (0..tab.m)
            .filter(|&i| tab.basis[i] >= n)
            .map(|i| tab.rhs(i))
            .sum();
        let scale = lp.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if infeas > FEAS_TOL * scale {
            return Ok(StdOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..tab.m {
            if tab.basis[i] < n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let v = tab.at(i, j).abs();
                if v > PIVOT_TOL && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let w = tab.width;
                tab.t[i * w + cols] = 0.0;
                tab.pivot(i, j);
            }
        }
        for i in 0..tab.m {
            let w = tab.width;
            if tab.t[i * w + cols] < 0.0 {
                tab.t[i * w + cols] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.c);
    tab.price(&cost);
    if let PhaseEnd::Unbounded = tab.run(n)? {
        return Ok(StdOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for i in 0..tab.m {
        let j = tab.basis[i];
        if j < n {
            x[j] = tab.rhs(i).max(0.0);
        }
    }
    let duals = tab
        .init_col
        .iter()
        .map(|&j| cost[j] - tab.d[j])
        .collect();
    Ok(StdOutcome::Optimal { x, duals })
}
