//! Soft-margin SVM with an RBF kernel, trained on the dual by SMO.
//!
//! The dual is
//!
//! ```text
//! max Σ a_d − ½ Σ Σ l_d l_e a_d a_e K(o_d, o_e)   s.t.  Σ a_d l_d = 0,  0 <= a_d <= C
//! ```
//!
//! and a point is classified by the sign of `u = Σ_s l_s a_s K(o, o_s) + b`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benders::CutObservation;
use crate::error::{input_err, Result};
use crate::phase1::LabeledRow;
use crate::problems::TransferStats;

/// Stopping tolerance on the maximal KKT violation.
pub const SMO_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 100_000;
const TAU: f64 = 1e-12;

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return input_err(format!("kernel dimension mismatch: {} vs {}", a.len(), b.len()));
    }
    Ok(kernel(a, b, gamma))
}

fn kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn hinge_loss(u: f64, label: i8) -> f64 {
    (1.0 - f64::from(label) * u).max(0.0)
}

/// Per-feature z-score transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(features: &[Vec<f64>]) -> Self {
        let dim = features.first().map_or(0, Vec::len);
        let n = features.len() as f64;
        let mut mean = vec![0.0; dim];
        for f in features {
            for (m, v) in mean.iter_mut().zip(f) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; dim];
        for f in features {
            for ((s, v), m) in std.iter_mut().zip(f).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in &mut std {
            *s = s.sqrt();
            if !(*s > 0.0) {
                *s = 1.0;
            }
        }
        Scaler { mean, std }
    }

    pub fn apply(&self, o: &[f64]) -> Vec<f64> {
        o.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Standardize features before training.
    pub standardize: bool,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        SvmParams {
            c,
            gamma,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub dim: usize,
    /// Support vectors, already scaled.
    pub support: Vec<Vec<f64>>,
    /// `l_s a_s` per support vector.
    pub beta: Vec<f64>,
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    pub scaler: Option<Scaler>,
    /// Set when training data had a single class.
    pub constant: Option<i8>,
}

/// A trained model together with the full dual solution.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub model: SvmModel,
    /// One coefficient per training point, in input order.
    pub alphas: Vec<f64>,
    pub dual_objective: f64,
    pub updates: usize,
}

impl SvmModel {
    /// Raw score `u`.
    pub fn decision(&self, o: &[f64]) -> Result<f64> {
        if o.len() != self.dim {
            return input_err(format!(
                "model expects {} features, got {}",
                self.dim,
                o.len()
            ));
        }
        if let Some(l) = self.constant {
            return Ok(f64::from(l));
        }
        let x = match &self.scaler {
            Some(s) => s.apply(o),
            None => o.to_vec(),
        };
        Ok(self
            .support
            .iter()
            .zip(&self.beta)
            .map(|(sv, beta)| beta * kernel(&x, sv, self.gamma))
            .sum::<f64>()
            + self.b)
    }

    /// Label and raw score; a zero score is labeled +1.
    pub fn predict(&self, o: &[f64]) -> Result<(i8, f64)> {
        let u = self.decision(o)?;
        Ok((if u >= 0.0 { 1 } else { -1 }, u))
    }

    pub fn predict_observation(&self, obs: &CutObservation) -> Result<i8> {
        Ok(self.predict(&obs.features())?.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SvmModel = serde_json::from_str(text)?;
        if model.support.len() != model.beta.len()
            || model.support.iter().any(|s| s.len() != model.dim)
        {
            return input_err("inconsistent model file");
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_input(features: &[Vec<f64>], labels: &[i8], params: &SvmParams) -> Result<usize> {
    if features.is_empty() {
        return input_err("no training data");
    }
    if features.len() != labels.len() {
        return input_err("features and labels differ in length");
    }
    if !(params.c > 0.0) || !params.c.is_finite() || !(params.gamma > 0.0) || !params.gamma.is_finite() {
        return input_err("C and gamma must be positive and finite");
    }
    let dim = features[0].len();
    for f in features {
        if f.len() != dim {
            return input_err("training points differ in dimension");
        }
        if f.iter().any(|v| !v.is_finite()) {
            return input_err("non-finite feature value");
        }
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return input_err("labels must be +1 or -1");
    }
    Ok(dim)
}

/// Trains on labeled cut observations.
pub fn train_svm(data: &[LabeledRow], params: &SvmParams) -> Result<SvmModel> {
    let features: Vec<Vec<f64>> = data.iter().map(|r| r.features().to_vec()).collect();
    let labels: Vec<i8> = data.iter().map(|r| r.label).collect();
    Ok(train_detailed(&features, &labels, params)?.model)
}

pub fn train_detailed(features: &[Vec<f64>], labels: &[i8], params: &SvmParams) -> Result<TrainOutput> {
    let dim = check_input(features, labels, params)?;
    let n = features.len();
    let scaler = params.standardize.then(|| Scaler::fit(features));
    let x: Vec<Vec<f64>> = match &scaler {
        Some(s) => features.iter().map(|f| s.apply(f)).collect(),
        None => features.to_vec(),
    };

    if labels.iter().all(|&l| l == labels[0]) {
        return Ok(TrainOutput {
            model: SvmModel {
                dim,
                support: Vec::new(),
                beta: Vec::new(),
                b: f64::from(labels[0]),
                gamma: params.gamma,
                c: params.c,
                scaler,
                constant: Some(labels[0]),
            },
            alphas: vec![0.0; n],
            dual_objective: 0.0,
            updates: 0,
        });
    }

    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let c = params.c;
    // Q_ij = y_i y_j K_ij
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = y[i] * y[j] * kernel(&x[i], &x[j], params.gamma);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let mut a = vec![0.0; n];
    // Gradient of ½ aᵀQa − Σa.
    let mut g = vec![-1.0; n];
    let mut updates = 0usize;
    let max_updates = MAX_SWEEPS.saturating_mul(n.max(1));

    loop {
        // i: maximal violator; j: best second-order gain against i.
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            let up = (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
            if up && -y[t] * g[t] > gmax {
                gmax = -y[t] * g[t];
                i = t;
            }
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            let low = (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);
            if !low {
                continue;
            }
            let v = -y[t] * g[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let diff = gmax - v;
                let curv = (q[i * n + i] + q[t * n + t] - 2.0 * y[i] * y[t] * q[i * n + t]).max(TAU);
                let gain = -diff * diff / curv;
                if gain < best_gain {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin <= SMO_TOL || updates >= max_updates {
            if updates >= max_updates {
                log::warn!("SMO stopped at the update limit with violation {}", gmax - gmin);
            }
            break;
        }
        updates += 1;

        let (old_i, old_j) = (a[i], a[j]);
        let qij = q[i * n + j];
        if y[i] != y[j] {
            let quad = (q[i * n + i] + q[j * n + j] + 2.0 * qij).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let quad = (q[i * n + i] + q[j * n + j] - 2.0 * qij).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }
        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        for t in 0..n {
            g[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }

    // Intercept: average over free vectors, else the midpoint of the
    // interval left open by the bounded ones.
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * g[t];
        let at_upper = a[t] >= c;
        let at_lower = a[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    let b = -rho;

    let dual_objective = a.iter().zip(&g).map(|(ai, gi)| ai * (gi - 1.0)).sum::<f64>() * -0.5;
    let mut support = Vec::new();
    let mut beta = Vec::new();
    for t in 0..n {
        if a[t] > 0.0 {
            support.push(x[t].clone());
            beta.push(y[t] * a[t]);
        }
    }
    Ok(TrainOutput {
        model: SvmModel {
            dim,
            support,
            beta,
            b,
            gamma: params.gamma,
            c,
            scaler,
            constant: None,
        },
        alphas: a,
        dual_objective,
        updates,
    })
}

/// Percentage of rows whose predicted label matches.
pub fn accuracy(model: &SvmModel, data: &[LabeledRow]) -> Result<f64> {
    if data.is_empty() {
        return input_err("accuracy of an empty data set");
    }
    let mut hits = 0usize;
    for row in data {
        if model.predict(&row.features())?.0 == row.label {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / data.len() as f64)
}

/// Fold index per row; each class is dealt round-robin on its own.
pub fn stratified_folds(labels: &[i8], folds: usize) -> Vec<usize> {
    let mut next = [0usize; 2];
    labels
        .iter()
        .map(|&l| {
            let k = usize::from(l > 0);
            let f = next[k] % folds;
            next[k] += 1;
            f
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridChoice {
    pub c: f64,
    pub gamma: f64,
    /// Mean validation accuracy in percent.
    pub accuracy: f64,
}

/// Cross-validated choice of `(C, γ)` on labeled cut rows.
pub fn grid_search(
    data: &[LabeledRow],
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    standardize: bool,
) -> Result<GridChoice> {
    let features: Vec<Vec<f64>> = data.iter().map(|r| r.features().to_vec()).collect();
    let labels: Vec<i8> = data.iter().map(|r| r.label).collect();
    grid_search_features(&features, &labels, c_grid, gamma_grid, folds, standardize)
}

/// Cross-validated choice of `(C, γ)`. Ties go to the smaller C, then the
/// smaller γ.
pub fn grid_search_features(
    features: &[Vec<f64>],
    labels: &[i8],
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    standardize: bool,
) -> Result<GridChoice> {
    if folds < 2 {
        return input_err("grid search needs at least two folds");
    }
    if features.len() < folds {
        return input_err(format!("{} rows are too few for {folds} folds", features.len()));
    }
    if features.len() != labels.len() {
        return input_err("features and labels differ in length");
    }
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return input_err("empty parameter grid");
    }
    let mut cs = c_grid.to_vec();
    cs.sort_by(f64::total_cmp);
    let mut gs = gamma_grid.to_vec();
    gs.sort_by(f64::total_cmp);
    let assignment = stratified_folds(labels, folds);

    let points: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| gs.iter().map(move |&g| (c, g)))
        .collect();
    let scores: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(c, gamma)| {
            let params = SvmParams { c, gamma, standardize };
            let mut total = 0.0;
            let mut used = 0usize;
            for f in 0..folds {
                let mut train_x = Vec::new();
                let mut train_y = Vec::new();
                let mut valid = Vec::new();
                for ((x, &l), &k) in features.iter().zip(labels).zip(&assignment) {
                    if k == f {
                        valid.push((x, l));
                    } else {
                        train_x.push(x.clone());
                        train_y.push(l);
                    }
                }
                if valid.is_empty() {
                    continue;
                }
                let model = train_detailed(&train_x, &train_y, &params)?.model;
                let mut hits = 0usize;
                for (x, l) in &valid {
                    if model.predict(x)?.0 == *l {
                        hits += 1;
                    }
                }
                total += 100.0 * hits as f64 / valid.len() as f64;
                used += 1;
            }
            Ok(total / used as f64)
        })
        .collect();

    let mut best: Option<GridChoice> = None;
    for (&(c, gamma), score) in points.iter().zip(scores) {
        let accuracy = score?;
        if best.is_none_or(|b| accuracy > b.accuracy + 1e-12) {
            best = Some(GridChoice { c, gamma, accuracy });
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Cut features rescaled for use on another problem: VL by
/// `Σ_j d̄_j c̄ / k̄` and NC by `|W||F|`.
pub fn scale_features_transfer(obs: &CutObservation, stats: &TransferStats) -> Result<[f64; 2]> {
    if !(stats.violation_scale.abs() > 0.0) || !(stats.count_scale.abs() > 0.0) {
        return input_err("zero transfer scale");
    }
    Ok([
        obs.violation / stats.violation_scale,
        obs.count as f64 / stats.count_scale,
    ])
}
