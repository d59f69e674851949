//! Capacitated facility location with lost sales.
//!
//! First stage opens facilities; the recourse ships `y_ij` from open
//! facility `i` to customer `j` and pays a penalty on unmet demand `α_j`:
//!
//! ```text
//! Q(x) = min Σ c_ij y_ij + Σ ρ_j α_j
//!        Σ_j y_ij          <= u_i x_i     (capacity, one per facility)
//!        Σ_i y_ij + α_j    >= d_j         (demand, one per customer)
//! ```

use std::sync::Arc;

use rand::Rng;

use super::{Recourse, Scenario, ScenarioSet, TwoStageProblem};
use crate::error::{input_err, Error, Result};
use crate::lp::Relation;
use crate::seed;

/// Lost-sale penalty assigned to parsed customers, as a multiple of their
/// most expensive unit transport cost.
pub const DEFAULT_PENALTY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CflpData {
    pub capacities: Vec<f64>,
    pub setup_costs: Vec<f64>,
    /// Nominal demand per customer.
    pub demands: Vec<f64>,
    /// Lost-sale penalty per customer.
    pub penalties: Vec<f64>,
    /// `unit_costs[i][j]`, facility `i` to customer `j`.
    pub unit_costs: Vec<Vec<f64>>,
}

impl CflpData {
    pub fn num_facilities(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_customers(&self) -> usize {
        self.demands.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (nw, nf) = (self.num_facilities(), self.num_customers());
        if nw == 0 || nf == 0 {
            return input_err("facility location needs at least one facility and customer");
        }
        if self.setup_costs.len() != nw || self.penalties.len() != nf {
            return input_err("facility/customer attribute lengths disagree");
        }
        if self.unit_costs.len() != nw || self.unit_costs.iter().any(|r| r.len() != nf) {
            return input_err(format!("unit cost matrix must be {nw} x {nf}"));
        }
        let all = self
            .capacities
            .iter()
            .chain(&self.setup_costs)
            .chain(&self.demands)
            .chain(&self.penalties)
            .chain(self.unit_costs.iter().flatten());
        for v in all {
            if !v.is_finite() || *v < 0.0 {
                return input_err("facility location data must be finite and nonnegative");
            }
        }
        Ok(())
    }

    /// Replaces every penalty with `factor * max_i c_ij`.
    pub fn with_penalty_factor(mut self, factor: f64) -> Self {
        self.penalties = default_penalties(&self.unit_costs, self.num_customers(), factor);
        self
    }

    pub fn transfer_stats(&self) -> TransferStats {
        let nw = self.num_facilities() as f64;
        let nf = self.num_customers() as f64;
        let mean_cost = self.unit_costs.iter().flatten().sum::<f64>() / (nw * nf);
        let mean_setup = self.setup_costs.iter().sum::<f64>() / nw;
        let total_demand: f64 = self.demands.iter().sum();
        TransferStats {
            violation_scale: total_demand * mean_cost / mean_setup,
            count_scale: nw * nf,
        }
    }
}

/// Divisors that put cut features of differently sized facility location
/// instances on a common scale.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransferStats {
    /// `Σ_j d_j · mean(c) / mean(k)`
    pub violation_scale: f64,
    /// `|W| · |F|`
    pub count_scale: f64,
}

fn default_penalties(unit_costs: &[Vec<f64>], nf: usize, factor: f64) -> Vec<f64> {
    (0..nf)
        .map(|j| factor * unit_costs.iter().map(|r| r[j]).fold(0.0, f64::max))
        .collect()
}

pub fn build_cflp(data: &CflpData, scenarios: &ScenarioSet) -> Result<TwoStageProblem> {
    data.validate()?;
    scenarios.validate()?;
    let (nw, nf) = (data.num_facilities(), data.num_customers());
    if scenarios.dimension() != nf {
        return input_err(format!(
            "scenario demand dimension {} differs from {nf} customers",
            scenarios.dimension()
        ));
    }
    let n2 = nw * nf + nf;
    let y = |i: usize, j: usize| i * nf + j;
    let alpha = |j: usize| nw * nf + j;

    let mut cost = vec![0.0; n2];
    for i in 0..nw {
        for j in 0..nf {
            cost[y(i, j)] = data.unit_costs[i][j];
        }
    }
    for j in 0..nf {
        cost[alpha(j)] = data.penalties[j];
    }

    let mut matrix = Vec::with_capacity(nw + nf);
    let mut relations = Vec::with_capacity(nw + nf);
    let mut technology = Vec::with_capacity(nw + nf);
    for i in 0..nw {
        let mut row = vec![0.0; n2];
        for j in 0..nf {
            row[y(i, j)] = 1.0;
        }
        let mut t = vec![0.0; nw];
        t[i] = -data.capacities[i];
        matrix.push(row);
        relations.push(Relation::Le);
        technology.push(t);
    }
    for j in 0..nf {
        let mut row = vec![0.0; n2];
        for i in 0..nw {
            row[y(i, j)] = 1.0;
        }
        row[alpha(j)] = 1.0;
        matrix.push(row);
        relations.push(Relation::Ge);
        technology.push(vec![0.0; nw]);
    }
    let recourse = Arc::new(Recourse {
        cost,
        matrix,
        relations,
        technology,
    });

    let scenario_list = scenarios
        .demands
        .iter()
        .zip(&scenarios.probabilities)
        .map(|(d, &p)| {
            let mut rhs = vec![0.0; nw];
            rhs.extend_from_slice(d);
            Scenario {
                probability: p,
                rhs,
                recourse: Arc::clone(&recourse),
            }
        })
        .collect::<Vec<_>>();
    let count = scenario_list.len();
    TwoStageProblem::new(
        format!("cflp-{nw}x{nf}"),
        data.setup_costs.clone(),
        scenario_list,
        vec![0.0; count],
    )
}

struct Tokens<'a> {
    iter: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let iter = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
        Tokens {
            iter: Box::new(iter),
            last_line: 0,
        }
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        match self.iter.next() {
            None => Err(Error::Parse {
                line: self.last_line.max(1),
                msg: format!("unexpected end of input, expected {what}"),
            }),
            Some((line, tok)) => {
                self.last_line = line;
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("expected {what}, found {tok:?}"),
                    })
            }
        }
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let line_before = self.last_line;
        let v = self.number(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::Parse {
                line: self.last_line.max(line_before),
                msg: format!("{what} must be a nonnegative integer"),
            });
        }
        Ok(v as usize)
    }
}

/// Parses the OR-Library `cap` format.
///
/// Tokens: `m n`, then `m` pairs `capacity fixed_cost`, then for each
/// customer its demand followed by `m` allocation costs. An allocation cost
/// covers the customer's whole demand and is divided by it to get a unit
/// cost. Penalties default to [`DEFAULT_PENALTY_FACTOR`] times the
/// customer's largest unit cost.
pub fn parse_orlib_cap(text: &str) -> Result<CflpData> {
    let mut tok = Tokens::new(text);
    let m = tok.count("facility count")?;
    let n = tok.count("customer count")?;
    if m == 0 || n == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "facility and customer counts must be positive".into(),
        });
    }
    let mut capacities = Vec::with_capacity(m);
    let mut setup_costs = Vec::with_capacity(m);
    for _ in 0..m {
        capacities.push(tok.number("capacity")?);
        setup_costs.push(tok.number("fixed cost")?);
    }
    let mut demands = Vec::with_capacity(n);
    let mut unit_costs = vec![vec![0.0; n]; m];
    for j in 0..n {
        let d = tok.number("demand")?;
        let demand_line = tok.last_line;
        for row in unit_costs.iter_mut() {
            let cost = tok.number("allocation cost")?;
            row[j] = if d == 0.0 {
                if cost != 0.0 {
                    return Err(Error::Parse {
                        line: demand_line,
                        msg: format!("customer {j} has zero demand but nonzero allocation cost"),
                    });
                }
                0.0
            } else {
                cost / d
            };
        }
        demands.push(d);
    }
    let data = CflpData {
        penalties: default_penalties(&unit_costs, n, DEFAULT_PENALTY_FACTOR),
        capacities,
        setup_costs,
        demands,
        unit_costs,
    };
    data.validate().map_err(|e| Error::Parse {
        line: tok.last_line,
        msg: e.to_string(),
    })?;
    Ok(data)
}

/// Inverse of [`parse_orlib_cap`] (penalties are not part of the format).
pub fn write_orlib_cap(data: &CflpData) -> String {
    let mut out = format!("{} {}\n", data.num_facilities(), data.num_customers());
    for (u, k) in data.capacities.iter().zip(&data.setup_costs) {
        out.push_str(&format!("{u} {k}\n"));
    }
    for (j, d) in data.demands.iter().enumerate() {
        out.push_str(&format!("{d}\n"));
        let costs: Vec<String> = data
            .unit_costs
            .iter()
            .map(|row| (row[j] * d).to_string())
            .collect();
        out.push_str(&costs.join(" "));
        out.push('\n');
    }
    out
}

/// Random instances on the unit square: unit cost grows with distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CflpGenerator {
    pub facilities: usize,
    pub customers: usize,
    pub capacity: f64,
    pub setup_cost: f64,
    pub demand_range: (f64, f64),
    /// Unit cost is `1 + cost_per_distance * distance`.
    pub cost_per_distance: f64,
    pub penalty_factor: f64,
}

impl CflpGenerator {
    /// Dimensions, capacity and setup cost of OR-Library set IV (cap41).
    pub fn cap41_like() -> Self {
        CflpGenerator {
            facilities: 16,
            customers: 50,
            capacity: 5000.0,
            setup_cost: 7500.0,
            demand_range: (200.0, 2000.0),
            cost_per_distance: 20.0,
            penalty_factor: DEFAULT_PENALTY_FACTOR,
        }
    }

    /// A small instance whose capacity is loose enough that a few
    /// facilities serve all demand.
    pub fn small(facilities: usize, customers: usize) -> Self {
        CflpGenerator {
            facilities,
            customers,
            capacity: 30.0 * customers as f64 / 2.0,
            setup_cost: 40.0,
            demand_range: (5.0, 25.0),
            cost_per_distance: 10.0,
            penalty_factor: 3.0,
        }
    }

    pub fn generate(&self, seed: u64) -> CflpData {
        let mut rng = seed::rng(seed);
        let fac: Vec<(f64, f64)> = (0..self.facilities)
            .map(|_| (rng.random(), rng.random()))
            .collect();
        let cus: Vec<(f64, f64)> = (0..self.customers)
            .map(|_| (rng.random(), rng.random()))
            .collect();
        let (lo, hi) = self.demand_range;
        let demands: Vec<f64> = (0..self.customers)
            .map(|_| (lo + (hi - lo) * rng.random::<f64>()).round())
            .collect();
        let unit_costs: Vec<Vec<f64>> = fac
            .iter()
            .map(|&(fx, fy)| {
                cus.iter()
                    .map(|&(cx, cy)| {
                        let dist = ((fx - cx).powi(2) + (fy - cy).powi(2)).sqrt();
                        ((1.0 + self.cost_per_distance * dist) * 100.0).round() / 100.0
                    })
                    .collect()
            })
            .collect();
        // Setup costs vary by up to +-20% around the nominal value.
        let setup_costs = (0..self.facilities)
            .map(|_| (self.setup_cost * (0.8 + 0.4 * rng.random::<f64>())).round())
            .collect();
        CflpData {
            capacities: vec![self.capacity; self.facilities],
            setup_costs,
            penalties: default_penalties(&unit_costs, self.customers, self.penalty_factor),
            demands,
            unit_costs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::extensive_form;

    fn one_by_one(setup: f64) -> CflpData {
        CflpData {
            capacities: vec![10.0],
            setup_costs: vec![setup],
            demands: vec![4.0],
            penalties: vec![5.0],
            unit_costs: vec![vec![1.0]],
        }
    }

    fn enumerate(p: &TwoStageProblem) -> f64 {
        let (_, v) = p.brute_force().unwrap();
        v
    }

    #[test]
    fn tiny_instance_opens_facility() {
        let data = one_by_one(5.0);
        let set = ScenarioSet::uniform(vec![vec![4.0]]).unwrap();
        let p = build_cflp(&data, &set).unwrap();
        assert_eq!(enumerate(&p), 9.0);
        let sol = crate::mip::solve_mip(&extensive_form(&p)).unwrap();
        assert!((sol.objective - 9.0).abs() < 1e-9);
        assert_eq!(sol.incumbent[0], 1.0);
    }

    #[test]
    fn expensive_facility_stays_closed() {
        let data = one_by_one(100.0);
        let set = ScenarioSet::uniform(vec![vec![4.0]]).unwrap();
        let p = build_cflp(&data, &set).unwrap();
        assert_eq!(enumerate(&p), 20.0);
        let sol = crate::mip::solve_mip(&extensive_form(&p)).unwrap();
        assert!((sol.objective - 20.0).abs() < 1e-9);
        assert_eq!(sol.incumbent[0], 0.0);
    }

    #[test]
    fn zero_demand_has_zero_recourse() {
        let data = one_by_one(5.0);
        let set = ScenarioSet::uniform(vec![vec![0.0]]).unwrap();
        let p = build_cflp(&data, &set).unwrap();
        for x in [0.0, 1.0] {
            assert_eq!(p.solve_recourse(0, &[x]).unwrap().value, 0.0);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let data = one_by_one(5.0);
        let set = ScenarioSet::uniform(vec![vec![1.0, 2.0]]).unwrap();
        assert!(build_cflp(&data, &set).is_err());
    }

    #[test]
    fn parse_small_cap_file() {
        let text = "2 1\n10 5\n10 7\n4\n4 8\n";
        let d = parse_orlib_cap(text).unwrap();
        assert_eq!(d.capacities, vec![10.0, 10.0]);
        assert_eq!(d.setup_costs, vec![5.0, 7.0]);
        assert_eq!(d.demands, vec![4.0]);
        assert_eq!(d.unit_costs, vec![vec![1.0], vec![2.0]]);
        assert_eq!(d.penalties, vec![20.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(parse_orlib_cap(""), Err(Error::Parse { .. })));
        match parse_orlib_cap("2 1\n10 5\n10 x\n4\n4 8\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_orlib_cap("2 1\n10 5\n10 7\n4\n4") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        match parse_orlib_cap("1 1\n10 5\n0\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_demand_zero_cost_gives_zero_unit_cost() {
        let d = parse_orlib_cap("1 2\n10 5\n0\n0\n3\n6\n").unwrap();
        assert_eq!(d.unit_costs, vec![vec![0.0, 2.0]]);
    }

    #[test]
    fn write_then_parse() {
        let d = CflpGenerator::small(3, 4).generate(9);
        let back = parse_orlib_cap(&write_orlib_cap(&d)).unwrap();
        assert_eq!(back.capacities, d.capacities);
        assert_eq!(back.demands, d.demands);
        for (a, b) in back.unit_costs.iter().flatten().zip(d.unit_costs.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_stats_formula() {
        let d = CflpData {
            capacities: vec![1.0, 1.0],
            setup_costs: vec![2.0, 6.0],
            demands: vec![10.0, 30.0, 60.0],
            penalties: vec![0.0; 3],
            unit_costs: vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]],
        };
        let s = d.transfer_stats();
        // 100 * 2 / 4
        assert_eq!(s.violation_scale, 50.0);
        assert_eq!(s.count_scale, 6.0);
    }
}
