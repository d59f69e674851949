//! Offline cut sampling.
//!
//! Each path starts from an empty master problem and adds one violated cut
//! per step, drawn from a randomly chosen scenario. A step records the
//! cut's violation, how many cuts its scenario had produced before, and the
//! change in master objective the cut caused (the performance index, PI).
//! Labels are derived later for any threshold Δ, see [`transform_labels`].

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benders::{
    make_cut, solve_rmp, solve_subproblem, CutObservation, CutPool, VIOLATION_TOL,
};
use crate::error::{input_err, Result};
use crate::problems::TwoStageProblem;
use crate::seed;

/// PI values below this count as zero in the label rule.
pub const PI_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub path: usize,
    pub step: usize,
    #[serde(rename = "VL")]
    pub violation: f64,
    #[serde(rename = "NC")]
    pub count: usize,
    #[serde(rename = "PI")]
    pub pi: f64,
    /// The path ended before reaching its requested length.
    pub truncated: bool,
}

impl TrainingRow {
    pub fn observation(&self) -> CutObservation {
        CutObservation {
            violation: self.violation,
            count: self.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub observation: CutObservation,
    pub label: i8,
    pub delta: f64,
}

impl LabeledRow {
    pub fn features(&self) -> [f64; 2] {
        self.observation.features()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Config {
    /// Number of paths, K.
    pub paths: usize,
    /// Steps per path, N.
    pub steps: usize,
    pub seed: u64,
    /// Solve the path masters as LP relaxations.
    pub relax_master: bool,
}

impl Phase1Config {
    /// Two paths of `2 |Ω|` steps each.
    pub fn defaults_for(problem: &TwoStageProblem, seed: u64) -> Self {
        Phase1Config {
            paths: 2,
            steps: 2 * problem.num_scenarios(),
            seed,
            relax_master: false,
        }
    }
}

/// Raw sampled rows, ordered by path then step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RowStore {
    pub rows: Vec<TrainingRow>,
}

/// Rows labeled for one Δ, with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    pub rows: Vec<LabeledRow>,
    pub problem: String,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
}

impl RowStore {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labeled(&self, delta: f64) -> Vec<LabeledRow> {
        transform_labels(&self.rows, delta)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(["path", "step", "VL", "NC", "PI", "truncated"])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in r.deserialize() {
            let row: TrainingRow = rec?;
            if !row.violation.is_finite() || !(row.pi >= 0.0) {
                return input_err(format!(
                    "row {} of path {} has invalid VL or PI",
                    row.step, row.path
                ));
            }
            rows.push(row);
        }
        Ok(RowStore { rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// One path of at most `steps` rows. The path index is stored in each row.
pub fn sample_cut_path(
    problem: &TwoStageProblem,
    steps: usize,
    seed: u64,
    path: usize,
    relax_master: bool,
) -> Result<Vec<TrainingRow>> {
    let mut rows = Vec::with_capacity(steps);
    if steps == 0 {
        return Ok(rows);
    }
    let mut rng = seed::rng(seed);
    let ns = problem.num_scenarios();
    let mut pool = CutPool::new(ns);
    let mut counts = vec![0usize; ns];
    let mut rmp = solve_rmp(problem, &pool, relax_master)?;
    let mut order: Vec<usize> = (0..ns).collect();

    'steps: for step in 0..steps {
        order.shuffle(&mut rng);
        for &w in &order {
            let (duals, value) = solve_subproblem(problem, w, &rmp.x)?;
            let vl = value - rmp.theta[w];
            if vl <= VIOLATION_TOL {
                continue;
            }
            let observation = CutObservation {
                violation: vl,
                count: counts[w],
            };
            pool.insert(make_cut(problem, w, duals, observation, step));
            counts[w] += 1;
            let next = solve_rmp(problem, &pool, relax_master)?;
            rows.push(TrainingRow {
                path,
                step,
                violation: vl,
                count: observation.count,
                pi: (next.objective - rmp.objective).abs(),
                truncated: false,
            });
            rmp = next;
            continue 'steps;
        }
        // No scenario yields a violated cut: the problem is solved.
        for row in &mut rows {
            row.truncated = true;
        }
        break;
    }
    Ok(rows)
}

/// K independent paths, each with a stream derived from `config.seed`.
pub fn run_phase1(problem: &TwoStageProblem, config: &Phase1Config) -> Result<RowStore> {
    if config.paths == 0 || config.steps == 0 {
        return input_err("phase 1 needs at least one path and one step");
    }
    let paths: Vec<Result<Vec<TrainingRow>>> = (0..config.paths)
        .into_par_iter()
        .map(|k| {
            sample_cut_path(
                problem,
                config.steps,
                seed::derive(config.seed, k as u64),
                k,
                config.relax_master,
            )
        })
        .collect();
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(p?);
    }
    Ok(RowStore { rows })
}

/// Label of a row with index `pi` followed by `next`.
pub fn label_for(pi: f64, next: f64, delta: f64) -> i8 {
    if next < PI_EPS {
        return if pi < PI_EPS { -1 } else { 1 };
    }
    if pi / next < delta {
        -1
    } else {
        1
    }
}

/// The last row of each path gets +1; row n gets −1 iff `PI_n / PI_{n+1} < Δ`.
pub fn transform_labels(rows: &[TrainingRow], delta: f64) -> Vec<LabeledRow> {
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let label = match rows.get(i + 1) {
            Some(next) if next.path == row.path => label_for(row.pi, next.pi, delta),
            _ => 1,
        };
        out.push(LabeledRow {
            observation: row.observation(),
            label,
            delta,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benders::tests::toy;
    use crate::problems::{build_cflp, sample_scenarios, CflpGenerator};

    fn rows_from(pis: &[f64]) -> Vec<TrainingRow> {
        pis.iter()
            .enumerate()
            .map(|(n, &pi)| TrainingRow {
                path: 0,
                step: n,
                violation: 1.0,
                count: 0,
                pi,
                truncated: false,
            })
            .collect()
    }

    fn labels(pis: &[f64], delta: f64) -> Vec<i8> {
        transform_labels(&rows_from(pis), delta)
            .iter()
            .map(|r| r.label)
            .collect()
    }

    #[test]
    fn label_examples() {
        assert_eq!(labels(&[10.0, 5.0, 5.0], 1.2), vec![1, -1, 1]);
        assert_eq!(labels(&[10.0, 5.0, 5.0], 0.9), vec![1, 1, 1]);
        assert_eq!(labels(&[3.0, 0.0, 0.0], 1.2), vec![1, -1, 1]);
        assert!(labels(&[], 1.0).is_empty());
    }

    #[test]
    fn labels_reset_per_path() {
        let mut rows = rows_from(&[1.0, 4.0, 1.0, 4.0]);
        rows[2].path = 1;
        rows[3].path = 1;
        let l: Vec<i8> = transform_labels(&rows, 1.0).iter().map(|r| r.label).collect();
        assert_eq!(l, vec![-1, 1, -1, 1]);
    }

    #[test]
    fn toy_single_step() {
        let rows = sample_cut_path(&toy(), 1, 7, 0, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].violation, 3.0);
        assert_eq!(rows[0].count, 0);
        assert!((rows[0].pi - 1.0).abs() < 1e-12);
        assert!(!rows[0].truncated);
        assert!(sample_cut_path(&toy(), 0, 7, 0, false).unwrap().is_empty());
    }

    #[test]
    fn toy_truncates() {
        let rows = sample_cut_path(&toy(), 5, 7, 0, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].truncated);
    }

    #[test]
    fn paths_have_expected_size_and_are_deterministic() {
        let data = CflpGenerator::small(3, 5).generate(11);
        let set = sample_scenarios(&data.demands, 0.2, 4, 3).unwrap();
        let p = build_cflp(&data, &set).unwrap();
        let config = Phase1Config {
            paths: 2,
            steps: 3,
            seed: 5,
            relax_master: false,
        };
        let a = run_phase1(&p, &config).unwrap();
        let b = run_phase1(&p, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert!(a.rows.iter().all(|r| r.pi >= 0.0 && r.violation > VIOLATION_TOL));

        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("path,step,VL,NC,PI,truncated\n"));
        assert_eq!(RowStore::read_csv(&buf[..]).unwrap(), a);
    }

    #[test]
    fn defaults() {
        let c = Phase1Config::defaults_for(&toy(), 1);
        assert_eq!((c.paths, c.steps), (2, 2));
    }
}
