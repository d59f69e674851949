//! Fixed-charge capacitated multicommodity network design with unmet demand.
//!
//! First stage installs arcs. The recourse routes each commodity and may
//! leave demand unmet at cost `B` per unit. With `d_i^k = v_k` at the
//! commodity's origin, `-v_k` at its destination and zero elsewhere, the
//! flow rows read
//!
//! ```text
//! Σ_{(i,j)} y_ij^k - Σ_{(j,i)} y_ji^k - α_i^k <= d_i^k      (i ∈ N, k ∈ K)
//! Σ_k y_ij^k <= u_ij x_ij                                  ((i,j) ∈ A)
//! ```
//!
//! so the destination must receive `v_k - α` units. Written this way
//! (outflow minus inflow) the rows force delivery; with inflow minus outflow
//! and the same `d` they would not.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Recourse, Scenario, ScenarioSet, TwoStageProblem};
use crate::error::{input_err, Result};
use crate::lp::Relation;
use crate::seed;

/// Default `B` is this multiple of the largest unit routing cost.
pub const DEFAULT_PENALTY_MULTIPLIER: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmndArc {
    pub tail: usize,
    pub head: usize,
    pub capacity: f64,
    pub fixed_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmndCommodity {
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmndData {
    pub nodes: usize,
    pub arcs: Vec<CmndArc>,
    pub commodities: Vec<CmndCommodity>,
    /// `unit_costs[a][k]`
    pub unit_costs: Vec<Vec<f64>>,
    /// Cost per unit of unmet demand.
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum UnitCosts {
    PerArc(Vec<f64>),
    PerArcCommodity(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CmndFile {
    nodes: usize,
    arcs: Vec<CmndArc>,
    commodities: Vec<CmndCommodity>,
    unit_costs: UnitCosts,
    #[serde(rename = "penalty_B", default, skip_serializing_if = "Option::is_none")]
    penalty_b: Option<f64>,
}

impl CmndData {
    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_commodities(&self) -> usize {
        self.commodities.len()
    }

    pub fn nominal_demands(&self) -> Vec<f64> {
        self.commodities.iter().map(|c| c.demand).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return input_err("network has no nodes");
        }
        for (a, arc) in self.arcs.iter().enumerate() {
            if arc.tail >= self.nodes || arc.head >= self.nodes {
                return input_err(format!("arc {a} references a missing node"));
            }
            if !(arc.capacity >= 0.0 && arc.fixed_cost >= 0.0)
                || !arc.capacity.is_finite()
                || !arc.fixed_cost.is_finite()
            {
                return input_err(format!("arc {a} needs finite nonnegative capacity and cost"));
            }
        }
        for (k, c) in self.commodities.iter().enumerate() {
            if c.origin >= self.nodes || c.destination >= self.nodes {
                return input_err(format!("commodity {k} references a missing node"));
            }
            if c.origin == c.destination {
                return input_err(format!("commodity {k} has identical origin and destination"));
            }
            if !(c.demand >= 0.0) || !c.demand.is_finite() {
                return input_err(format!("commodity {k} has an invalid demand"));
            }
        }
        if self.unit_costs.len() != self.arcs.len()
            || self
                .unit_costs
                .iter()
                .any(|r| r.len() != self.commodities.len())
        {
            return input_err("unit cost table must be arcs x commodities");
        }
        if self
            .unit_costs
            .iter()
            .flatten()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return input_err("unit costs must be finite and nonnegative");
        }
        if !(self.penalty > 0.0) || !self.penalty.is_finite() {
            return input_err("unmet-demand penalty must be positive");
        }
        Ok(())
    }
}

fn default_penalty(unit_costs: &[Vec<f64>]) -> f64 {
    let max = unit_costs.iter().flatten().fold(0.0, |a: f64, &b| a.max(b));
    DEFAULT_PENALTY_MULTIPLIER * if max > 0.0 { max } else { 1.0 }
}

/// Reads the JSON instance format.
pub fn parse_cmnd(text: &str) -> Result<CmndData> {
    let file: CmndFile = serde_json::from_str(text)?;
    let nk = file.commodities.len();
    let unit_costs = match file.unit_costs {
        UnitCosts::PerArc(v) => v.into_iter().map(|c| vec![c; nk]).collect(),
        UnitCosts::PerArcCommodity(t) => t,
    };
    let penalty = file.penalty_b.unwrap_or_else(|| default_penalty(&unit_costs));
    let data = CmndData {
        nodes: file.nodes,
        arcs: file.arcs,
        commodities: file.commodities,
        unit_costs,
        penalty,
    };
    data.validate()?;
    Ok(data)
}

pub fn write_cmnd(data: &CmndData) -> Result<String> {
    let file = CmndFile {
        nodes: data.nodes,
        arcs: data.arcs.clone(),
        commodities: data.commodities.clone(),
        unit_costs: UnitCosts::PerArcCommodity(data.unit_costs.clone()),
        penalty_b: Some(data.penalty),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn build_cmnd(data: &CmndData, scenarios: &ScenarioSet) -> Result<TwoStageProblem> {
    data.validate()?;
    scenarios.validate()?;
    let (nn, na, nk) = (data.nodes, data.num_arcs(), data.num_commodities());
    if scenarios.dimension() != nk {
        return input_err(format!(
            "scenario demand dimension {} differs from {nk} commodities",
            scenarios.dimension()
        ));
    }
    let n2 = na * nk + nn * nk;
    let y = |a: usize, k: usize| a * nk + k;
    let alpha = |i: usize, k: usize| na * nk + i * nk + k;

    let mut cost = vec![0.0; n2];
    for a in 0..na {
        for k in 0..nk {
            cost[y(a, k)] = data.unit_costs[a][k];
        }
    }
    for i in 0..nn {
        for k in 0..nk {
            cost[alpha(i, k)] = data.penalty;
        }
    }

    let mut matrix = Vec::with_capacity(nn * nk + na);
    let mut relations = Vec::with_capacity(nn * nk + na);
    let mut technology = Vec::with_capacity(nn * nk + na);
    for i in 0..nn {
        for k in 0..nk {
            let mut row = vec![0.0; n2];
            for (a, arc) in data.arcs.iter().enumerate() {
                if arc.tail == i {
                    row[y(a, k)] += 1.0;
                }
                if arc.head == i {
                    row[y(a, k)] -= 1.0;
                }
            }
            row[alpha(i, k)] = -1.0;
            matrix.push(row);
            relations.push(Relation::Le);
            technology.push(vec![0.0; na]);
        }
    }
    for (a, arc) in data.arcs.iter().enumerate() {
        let mut row = vec![0.0; n2];
        for k in 0..nk {
            row[y(a, k)] = 1.0;
        }
        let mut t = vec![0.0; na];
        t[a] = -arc.capacity;
        matrix.push(row);
        relations.push(Relation::Le);
        technology.push(t);
    }
    let recourse = Arc::new(Recourse {
        cost,
        matrix,
        relations,
        technology,
    });

    let scenario_list: Vec<Scenario> = scenarios
        .demands
        .iter()
        .zip(&scenarios.probabilities)
        .map(|(v, &p)| {
            let mut rhs = vec![0.0; nn * nk + na];
            for (k, c) in data.commodities.iter().enumerate() {
                rhs[c.origin * nk + k] += v[k];
                rhs[c.destination * nk + k] -= v[k];
            }
            Scenario {
                probability: p,
                rhs,
                recourse: Arc::clone(&recourse),
            }
        })
        .collect();
    let count = scenario_list.len();
    TwoStageProblem::new(
        format!("cmnd-{nn}n{na}a{nk}k"),
        data.arcs.iter().map(|a| a.fixed_cost).collect(),
        scenario_list,
        vec![0.0; count],
    )
}

/// Random networks with distinct directed arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct CmndGenerator {
    pub nodes: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub capacity_range: (f64, f64),
    pub fixed_cost_range: (f64, f64),
    pub unit_cost_range: (f64, f64),
    pub demand_range: (f64, f64),
    /// `B` as a multiple of the largest unit cost.
    pub penalty_multiplier: f64,
}

impl CmndGenerator {
    pub fn small(nodes: usize, arcs: usize, commodities: usize) -> Self {
        CmndGenerator {
            nodes,
            arcs,
            commodities,
            capacity_range: (10.0, 40.0),
            fixed_cost_range: (20.0, 80.0),
            unit_cost_range: (1.0, 10.0),
            demand_range: (5.0, 20.0),
            penalty_multiplier: 20.0,
        }
    }

    pub fn generate(&self, seed: u64) -> CmndData {
        let mut rng = seed::rng(seed);
        let max_arcs = self.nodes * self.nodes.saturating_sub(1);
        let target = self.arcs.min(max_arcs);
        let mut seen = HashSet::new();
        let mut arcs = Vec::with_capacity(target);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| {
            (lo + (hi - lo) * rng.random::<f64>()).round()
        };
        while arcs.len() < target {
            let tail = rng.random_range(0..self.nodes);
            let head = rng.random_range(0..self.nodes);
            if tail == head || !seen.insert((tail, head)) {
                continue;
            }
            arcs.push(CmndArc {
                tail,
                head,
                capacity: draw(&mut rng, self.capacity_range),
                fixed_cost: draw(&mut rng, self.fixed_cost_range),
            });
        }
        let mut commodities = Vec::with_capacity(self.commodities);
        while commodities.len() < self.commodities && self.nodes > 1 {
            let origin = rng.random_range(0..self.nodes);
            let destination = rng.random_range(0..self.nodes);
            if origin == destination {
                continue;
            }
            commodities.push(CmndCommodity {
                origin,
                destination,
                demand: draw(&mut rng, self.demand_range),
            });
        }
        let unit_costs: Vec<Vec<f64>> = (0..arcs.len())
            .map(|_| {
                let c = draw(&mut rng, self.unit_cost_range);
                vec![c; commodities.len()]
            })
            .collect();
        let max = unit_costs.iter().flatten().fold(1.0, |a: f64, &b| a.max(b));
        CmndData {
            nodes: self.nodes,
            arcs,
            commodities,
            unit_costs,
            penalty: self.penalty_multiplier * max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::solve_mip;
    use crate::problems::extensive_form;

    fn single_arc(penalty: f64, demand: f64) -> (CmndData, ScenarioSet) {
        let data = CmndData {
            nodes: 2,
            arcs: vec![CmndArc {
                tail: 0,
                head: 1,
                capacity: 10.0,
                fixed_cost: 5.0,
            }],
            commodities: vec![CmndCommodity {
                origin: 0,
                destination: 1,
                demand,
            }],
            unit_costs: vec![vec![1.0]],
            penalty,
        };
        let set = ScenarioSet::uniform(vec![vec![demand]]).unwrap();
        (data, set)
    }

    #[test]
    fn single_arc_is_installed_when_penalty_is_high() {
        let (data, set) = single_arc(100.0, 4.0);
        let p = build_cmnd(&data, &set).unwrap();
        let (x, v) = p.brute_force().unwrap();
        assert_eq!((x, v), (vec![1.0], 9.0));
        let sol = solve_mip(&extensive_form(&p)).unwrap();
        assert!((sol.objective - 9.0).abs() < 1e-9);
    }

    #[test]
    fn single_arc_skipped_when_penalty_is_low() {
        let (data, set) = single_arc(1.0, 4.0);
        let p = build_cmnd(&data, &set).unwrap();
        let (x, v) = p.brute_force().unwrap();
        assert_eq!((x, v), (vec![0.0], 4.0));
        let sol = solve_mip(&extensive_form(&p)).unwrap();
        assert!((sol.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn zero_demand_installs_nothing() {
        let (data, set) = single_arc(100.0, 0.0);
        let p = build_cmnd(&data, &set).unwrap();
        let sol = solve_mip(&extensive_form(&p)).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.incumbent[0], 0.0);
    }

    #[test]
    fn json_formats() {
        let text = r#"{
            "nodes": 2,
            "arcs": [{"tail": 0, "head": 1, "capacity": 10, "fixed_cost": 5}],
            "commodities": [{"origin": 0, "destination": 1, "demand": 4}],
            "unit_costs": [2.0]
        }"#;
        let d = parse_cmnd(text).unwrap();
        assert_eq!(d.unit_costs, vec![vec![2.0]]);
        assert_eq!(d.penalty, 2.0e4);

        let back = parse_cmnd(&write_cmnd(&d).unwrap()).unwrap();
        assert_eq!(back, d);

        let bad = text.replace("\"head\": 1", "\"head\": 7");
        assert!(parse_cmnd(&bad).is_err());
        let same = text.replace("\"destination\": 1", "\"destination\": 0");
        assert!(parse_cmnd(&same).is_err());
    }

    #[test]
    fn generator_respects_limits() {
        let d = CmndGenerator::small(4, 8, 3).generate(1);
        assert!(d.validate().is_ok());
        assert_eq!(d.num_arcs(), 8);
        assert_eq!(d.num_commodities(), 3);
        let d = CmndGenerator::small(3, 100, 2).generate(1);
        assert_eq!(d.num_arcs(), 6);
    }
}
