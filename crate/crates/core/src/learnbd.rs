//! Benders decomposition that only adds cuts a classifier labels +1.
//!
//! When no violated cut is accepted while the gap is still open, the
//! classifier moves to the next (smaller) threshold Δ of its schedule and
//! the same candidates are classified again, without a new master solve.
//! Once the schedule is exhausted the run falls back to adding every
//! violated cut, unless the fallback is disabled.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::benders::{
    run_with_selector, BendersConfig, BendersRun, Candidate, CutObservation, CutSelector,
    IterationLog,
};
use crate::error::{input_err, Result};
use crate::phase1::RowStore;
use crate::problems::{TransferStats, TwoStageProblem};
use crate::svm::{grid_search_features, scale_features_transfer, train_detailed, SvmModel, SvmParams};

/// Strictly decreasing thresholds Δ with a cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSchedule {
    values: Vec<f64>,
    index: usize,
}

impl DeltaSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return input_err("empty delta schedule");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return input_err("delta values must be finite");
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return input_err("delta schedule must be strictly decreasing");
        }
        Ok(DeltaSchedule { values, index: 0 })
    }

    /// 1.20, 1.19, ..., 0.70
    pub fn standard() -> Self {
        let values = (0..=50).map(|i| f64::from(120 - i) / 100.0).collect();
        DeltaSchedule { values, index: 0 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `None` once exhausted.
    pub fn current(&self) -> Option<f64> {
        self.values.get(self.index).copied()
    }

    /// Moves to the next value; `false` when there is none.
    pub fn advance(&mut self) -> bool {
        if self.index < self.values.len() {
            self.index += 1;
        }
        self.index < self.values.len()
    }

    pub fn is_exhausted(&self) -> bool {
        self.index >= self.values.len()
    }
}

pub trait CutClassifier {
    /// Threshold in use, `None` when the schedule is exhausted.
    fn delta(&self) -> Option<f64>;
    /// One label per observation.
    fn classify(&mut self, observations: &[CutObservation]) -> Result<Vec<i8>>;
    /// Moves to the next threshold; `false` when none is left.
    fn advance(&mut self) -> Result<bool>;
    /// Time spent training models so far.
    fn training_time(&self) -> Duration {
        Duration::ZERO
    }
}

/// Labels everything the same; walks its schedule on `advance`.
#[derive(Debug, Clone)]
pub struct ConstantClassifier {
    pub label: i8,
    pub schedule: DeltaSchedule,
}

impl ConstantClassifier {
    pub fn accept_all() -> Self {
        ConstantClassifier {
            label: 1,
            schedule: DeltaSchedule::standard(),
        }
    }

    pub fn reject_all() -> Self {
        ConstantClassifier {
            label: -1,
            schedule: DeltaSchedule::standard(),
        }
    }
}

impl CutClassifier for ConstantClassifier {
    fn delta(&self) -> Option<f64> {
        self.schedule.current()
    }

    fn classify(&mut self, observations: &[CutObservation]) -> Result<Vec<i8>> {
        Ok(vec![self.label; observations.len()])
    }

    fn advance(&mut self) -> Result<bool> {
        Ok(self.schedule.advance())
    }
}

/// How the SVM hyperparameters are chosen for each Δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamChoice {
    Fixed(SvmParams),
    Grid {
        c: Vec<f64>,
        gamma: Vec<f64>,
        folds: usize,
        standardize: bool,
    },
}

/// Feature rescaling between a training and a target problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub source: TransferStats,
    pub target: TransferStats,
}

/// SVM trained lazily from phase-1 rows, one cached model per Δ.
#[derive(Debug, Clone)]
pub struct SvmCutClassifier {
    rows: Arc<RowStore>,
    schedule: DeltaSchedule,
    params: ParamChoice,
    transfer: Option<Transfer>,
    models: HashMap<usize, SvmModel>,
    training_time: Duration,
}

impl SvmCutClassifier {
    pub fn new(rows: Arc<RowStore>, schedule: DeltaSchedule, params: ParamChoice) -> Result<Self> {
        if rows.is_empty() {
            return input_err("phase-1 rows required");
        }
        Ok(SvmCutClassifier {
            rows,
            schedule,
            params,
            transfer: None,
            models: HashMap::new(),
            training_time: Duration::ZERO,
        })
    }

    pub fn with_transfer(mut self, transfer: Transfer) -> Self {
        self.transfer = Some(transfer);
        self.models.clear();
        self
    }

    fn features(&self, obs: &CutObservation, stats: Option<&TransferStats>) -> Result<[f64; 2]> {
        match stats {
            Some(s) => scale_features_transfer(obs, s),
            None => Ok(obs.features()),
        }
    }

    fn train(&self, delta: f64) -> Result<SvmModel> {
        let raw = self.rows.labeled(delta);
        let source = self.transfer.as_ref().map(|t| &t.source);
        let mut feats = Vec::with_capacity(raw.len());
        for r in &raw {
            feats.push(self.features(&r.observation, source)?.to_vec());
        }
        let labels: Vec<i8> = raw.iter().map(|r| r.label).collect();
        let params = match &self.params {
            ParamChoice::Fixed(p) => *p,
            ParamChoice::Grid {
                c,
                gamma,
                folds,
                standardize,
            } => {
                let choice = grid_search_features(&feats, &labels, c, gamma, *folds, *standardize)?;
                SvmParams {
                    c: choice.c,
                    gamma: choice.gamma,
                    standardize: *standardize,
                }
            }
        };
        Ok(train_detailed(&feats, &labels, &params)?.model)
    }

    /// The model for the current Δ, training it on first use.
    pub fn current_model(&mut self) -> Result<Option<&SvmModel>> {
        let Some(delta) = self.schedule.current() else {
            return Ok(None);
        };
        let idx = self.schedule.index();
        if !self.models.contains_key(&idx) {
            let tick = Instant::now();
            let model = self.train(delta)?;
            self.training_time += tick.elapsed();
            log::debug!("trained classifier for delta {delta}");
            self.models.insert(idx, model);
        }
        Ok(self.models.get(&idx))
    }

    pub fn schedule(&self) -> &DeltaSchedule {
        &self.schedule
    }
}

impl CutClassifier for SvmCutClassifier {
    fn delta(&self) -> Option<f64> {
        self.schedule.current()
    }

    fn classify(&mut self, observations: &[CutObservation]) -> Result<Vec<i8>> {
        let target = self.transfer.map(|t| t.target);
        let Some(model) = self.current_model()?.cloned() else {
            return input_err("delta schedule exhausted");
        };
        observations
            .iter()
            .map(|o| {
                let f = self.features(o, target.as_ref())?;
                Ok(model.predict(&f)?.0)
            })
            .collect()
    }

    fn advance(&mut self) -> Result<bool> {
        Ok(self.schedule.advance())
    }

    fn training_time(&self) -> Duration {
        self.training_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnBdConfig {
    pub benders: BendersConfig,
    /// Add every violated cut once the schedule is exhausted.
    pub fallback: bool,
}

impl LearnBdConfig {
    pub fn new(tolerance_pct: f64) -> Self {
        LearnBdConfig {
            benders: BendersConfig::new(tolerance_pct),
            fallback: true,
        }
    }
}

/// Consecutive iterations run with the same Δ (`None` in fallback mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpan {
    pub delta: Option<f64>,
    pub first_iter: usize,
    pub last_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnBdResult {
    pub run: BendersRun,
    /// Threshold changes made during the run.
    pub retrain_count: usize,
    pub delta_trace: Vec<DeltaSpan>,
    /// First iteration that added all violated cuts after exhaustion.
    pub fallback_from: Option<usize>,
    pub training_time: Duration,
}

/// Groups the log's `delta_value` column into spans.
pub fn delta_trace(log: &[IterationLog]) -> Vec<DeltaSpan> {
    let mut spans: Vec<DeltaSpan> = Vec::new();
    for row in log {
        match spans.last_mut() {
            Some(s) if s.delta == row.delta_value => s.last_iter = row.iter,
            _ => spans.push(DeltaSpan {
                delta: row.delta_value,
                first_iter: row.iter,
                last_iter: row.iter,
            }),
        }
    }
    spans
}

struct Selector<'a> {
    classifier: &'a mut dyn CutClassifier,
    fallback: bool,
    fallback_from: Option<usize>,
    retrains: usize,
    iteration: usize,
}

impl CutSelector for Selector<'_> {
    fn select(&mut self, candidates: &[Candidate], gap_open: bool) -> Result<Vec<usize>> {
        let iteration = self.iteration;
        self.iteration += 1;
        let all: Vec<usize> = (0..candidates.len()).collect();
        if self.fallback_from.is_some() {
            return Ok(all);
        }
        let obs: Vec<CutObservation> = candidates.iter().map(|c| c.observation).collect();
        loop {
            if self.classifier.delta().is_none() {
                if self.fallback && gap_open {
                    self.fallback_from = Some(iteration);
                    return Ok(all);
                }
                return Ok(Vec::new());
            }
            let labels = self.classifier.classify(&obs)?;
            let chosen: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 0)
                .map(|(i, _)| i)
                .collect();
            if !chosen.is_empty() || !gap_open {
                return Ok(chosen);
            }
            self.classifier.advance()?;
            self.retrains += 1;
        }
    }

    fn log_extras(&self) -> (Option<f64>, Option<usize>) {
        let delta = if self.fallback_from.is_some() {
            None
        } else {
            self.classifier.delta()
        };
        (delta, Some(self.retrains))
    }
}

/// Runs the learning variant with any classifier.
pub fn run_learnbd(
    problem: &TwoStageProblem,
    classifier: &mut dyn CutClassifier,
    config: &LearnBdConfig,
) -> Result<LearnBdResult> {
    let mut selector = Selector {
        classifier,
        fallback: config.fallback,
        fallback_from: None,
        retrains: 0,
        iteration: 0,
    };
    let run = run_with_selector(problem, &config.benders, &mut selector)?;
    let retrain_count = selector.retrains;
    let fallback_from = selector.fallback_from;
    let training_time = selector.classifier.training_time();
    Ok(LearnBdResult {
        delta_trace: delta_trace(&run.state.log),
        run,
        retrain_count,
        fallback_from,
        training_time,
    })
}

/// Trains SVMs from `rows` down `schedule` and runs the learning variant.
pub fn run_learnbd_svm(
    problem: &TwoStageProblem,
    rows: Arc<RowStore>,
    schedule: DeltaSchedule,
    params: ParamChoice,
    config: &LearnBdConfig,
) -> Result<LearnBdResult> {
    let mut classifier = SvmCutClassifier::new(rows, schedule, params)?;
    run_learnbd(problem, &mut classifier, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benders::run_classic_bd;
    use crate::benders::tests::toy;
    use crate::phase1::{run_phase1, Phase1Config};

    #[test]
    fn schedule_basics() {
        let s = DeltaSchedule::standard();
        assert_eq!(s.values().len(), 51);
        assert_eq!(s.values()[0], 1.2);
        assert_eq!(s.values()[1], 1.19);
        assert_eq!(*s.values().last().unwrap(), 0.7);
        assert!(DeltaSchedule::new(vec![]).is_err());
        assert!(DeltaSchedule::new(vec![1.0, 1.0]).is_err());
        let mut t = DeltaSchedule::new(vec![1.0, 0.5]).unwrap();
        assert!(t.advance());
        assert_eq!(t.current(), Some(0.5));
        assert!(!t.advance());
        assert!(t.is_exhausted());
        assert!(!t.advance());
    }

    #[test]
    fn accept_all_matches_classic() {
        let p = toy();
        let config = LearnBdConfig::new(0.01);
        let bd = run_classic_bd(&p, &config.benders).unwrap();
        let lb = run_learnbd(&p, &mut ConstantClassifier::accept_all(), &config).unwrap();
        assert_eq!(lb.run.state.pool, bd.state.pool);
        assert_eq!(lb.run.iterations, bd.iterations);
        assert_eq!(lb.retrain_count, 0);
    }

    #[test]
    fn reject_all_falls_back() {
        let p = toy();
        let lb = run_learnbd(&p, &mut ConstantClassifier::reject_all(), &LearnBdConfig::new(0.01)).unwrap();
        assert!((lb.run.objective - 1.0).abs() < 1e-9);
        assert_eq!(lb.fallback_from, Some(0));
        assert_eq!(lb.retrain_count, 51);
        assert_eq!(lb.delta_trace[0].delta, None);

        let mut config = LearnBdConfig::new(0.01);
        config.fallback = false;
        let stalled = run_learnbd(&p, &mut ConstantClassifier::reject_all(), &config).unwrap();
        assert_eq!(stalled.run.status, crate::benders::RunStatus::Stalled);
    }

    #[test]
    fn toy_with_trained_classifier() {
        let p = toy();
        let rows = run_phase1(&p, &Phase1Config::defaults_for(&p, 3)).unwrap();
        let res = run_learnbd_svm(
            &p,
            Arc::new(rows),
            DeltaSchedule::standard(),
            ParamChoice::Fixed(SvmParams::new(10.0, 1.0)),
            &LearnBdConfig::new(0.01),
        )
        .unwrap();
        assert!((res.run.objective - 1.0).abs() < 1e-9);
        assert!(res.run.gap_pct <= 0.01);
    }

    #[test]
    fn missing_rows() {
        let err = SvmCutClassifier::new(
            Arc::new(RowStore::default()),
            DeltaSchedule::standard(),
            ParamChoice::Fixed(SvmParams::new(1.0, 1.0)),
        )
        .unwrap_err();
        assert!(err.to_string().contains("phase-1 rows required"));
    }

    #[test]
    fn trace_groups_runs() {
        let mk = |iter, d| IterationLog {
            iter,
            lb: 0.0,
            ub: 0.0,
            gap_pct: 0.0,
            cuts_added: 0,
            cuts_total: 0,
            rmp_time_s: 0.0,
            cum_rmp_time_s: 0.0,
            sp_time_s: 0.0,
            cum_sp_time_s: 0.0,
            cuts_violated: 0,
            delta_value: d,
            retrain_count: None,
        };
        let log = vec![mk(0, Some(1.2)), mk(1, Some(1.2)), mk(2, Some(1.1)), mk(3, None)];
        let t = delta_trace(&log);
        assert_eq!(t.len(), 3);
        assert_eq!((t[0].first_iter, t[0].last_iter), (0, 1));
        assert_eq!(t[2].delta, None);
    }
}
