use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use learnbd::benders::{run_classic_bd, write_log_csv, BendersConfig, BendersRun, Limits};
use learnbd::learnbd::{
    run_learnbd, DeltaSchedule, DeltaSpan, LearnBdConfig, ParamChoice, SvmCutClassifier, Transfer,
};
use learnbd::phase1::{run_phase1, Phase1Config, RowStore};
use learnbd::problems::{
    build_cflp, build_cmnd, parse_cmnd, parse_orlib_cap, sample_scenarios, write_cmnd,
    write_orlib_cap, CflpData, CflpGenerator, CmndData, CmndGenerator, ScenarioSet,
    TransferStats, DEFAULT_PENALTY_FACTOR,
};
use learnbd::svm::{accuracy, grid_search, train_svm, SvmModel, SvmParams};
use learnbd::{seed, TwoStageProblem};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const DEFAULT_TOL: f64 = 0.01;
pub const DEFAULT_C: f64 = 10.0;
pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_SCENARIOS: usize = 20;
pub const DEFAULT_SIGMA: f64 = 0.1;

pub enum Instance {
    Cflp(CflpData),
    Cmnd(CmndData),
}

impl Instance {
    pub fn nominal(&self) -> Vec<f64> {
        match self {
            Instance::Cflp(d) => d.demands.clone(),
            Instance::Cmnd(d) => d.nominal_demands(),
        }
    }

    pub fn build(&self, set: &ScenarioSet) -> Result<TwoStageProblem> {
        Ok(match self {
            Instance::Cflp(d) => build_cflp(d, set)?,
            Instance::Cmnd(d) => build_cmnd(d, set)?,
        })
    }

    pub fn transfer_stats(&self) -> Option<TransferStats> {
        match self {
            Instance::Cflp(d) => Some(d.transfer_stats()),
            Instance::Cmnd(_) => None,
        }
    }

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let (path, text) = match self {
            Instance::Cflp(d) => (dir.join("instance.txt"), write_orlib_cap(d)),
            Instance::Cmnd(d) => (dir.join("instance.json"), write_cmnd(d)?),
        };
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn load_instance(path: &Path, kind: Option<&str>, penalty_factor: Option<f64>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    let kind = kind.unwrap_or_else(|| {
        if path.extension().is_some_and(|e| e == "json") {
            "cmnd"
        } else {
            "cflp"
        }
    });
    Ok(match kind {
        "cmnd" => Instance::Cmnd(
            parse_cmnd(&text).with_context(|| format!("parsing {}", path.display()))?,
        ),
        _ => {
            let data = parse_orlib_cap(&text).with_context(|| format!("parsing {}", path.display()))?;
            Instance::Cflp(match penalty_factor {
                Some(f) => data.with_penalty_factor(f),
                None => data,
            })
        }
    })
}

/// The configured instance, loaded or generated, and its display name.
pub fn instance(cfg: &ExperimentConfig) -> Result<(Instance, String)> {
    let p = &cfg.problem;
    if let Some(path) = &p.instance {
        let inst = load_instance(path, p.kind.as_deref(), p.penalty_factor)?;
        let name = p.name.clone().unwrap_or_else(|| {
            path.file_stem()
                .map_or("instance".into(), |s| s.to_string_lossy().into_owned())
        });
        return Ok((inst, name));
    }
    let gen_seed = seed::derive(cfg.seed(), 0);
    match p.kind.as_deref().unwrap_or("cflp") {
        "cmnd" => {
            let g = CmndGenerator::small(
                p.nodes.unwrap_or(5),
                p.arcs.unwrap_or(10),
                p.commodities.unwrap_or(3),
            );
            let name = p.name.clone().unwrap_or_else(|| {
                format!("cmnd-{}-{}-{}-s{}", g.nodes, g.arcs, g.commodities, cfg.seed())
            });
            Ok((Instance::Cmnd(g.generate(gen_seed)), name))
        }
        _ => {
            let mut g = CflpGenerator::cap41_like();
            if let Some(f) = p.facilities {
                g.facilities = f;
            }
            if let Some(c) = p.customers {
                g.customers = c;
            }
            g.penalty_factor = p.penalty_factor.unwrap_or(DEFAULT_PENALTY_FACTOR);
            let name = p.name.clone().unwrap_or_else(|| {
                format!("cflp-{}x{}-s{}", g.facilities, g.customers, cfg.seed())
            });
            Ok((Instance::Cflp(g.generate(gen_seed)), name))
        }
    }
}

pub fn scenarios(cfg: &ExperimentConfig, inst: &Instance) -> Result<ScenarioSet> {
    let s = &cfg.scenarios;
    if let Some(path) = &s.file {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        return ScenarioSet::read_csv(file).with_context(|| format!("reading {}", path.display()));
    }
    Ok(sample_scenarios(
        &inst.nominal(),
        s.sigma.unwrap_or(DEFAULT_SIGMA),
        s.count.unwrap_or(DEFAULT_SCENARIOS),
        s.seed.unwrap_or_else(|| seed::derive(cfg.seed(), 1)),
    )?)
}

pub fn generate(cfg: &ExperimentConfig) -> Result<()> {
    let (inst, name) = instance(cfg)?;
    let set = scenarios(cfg, &inst)?;
    let dir = cfg.out_dir()?;
    let path = inst.write(&dir)?;
    let spath = dir.join("scenarios.csv");
    set.write_csv(File::create(&spath)?)?;
    println!(
        "{name}: wrote {} and {} ({} scenarios)",
        path.display(),
        spath.display(),
        set.len()
    );
    Ok(())
}

pub fn phase1(cfg: &ExperimentConfig) -> Result<()> {
    let (inst, name) = instance(cfg)?;
    let problem = inst.build(&scenarios(cfg, &inst)?)?;
    let t = &cfg.training;
    let mut p1 = Phase1Config::defaults_for(&problem, t.seed.unwrap_or_else(|| seed::derive(cfg.seed(), 2)));
    if let Some(k) = t.paths {
        p1.paths = k;
    }
    if let Some(n) = t.steps {
        p1.steps = n;
    }
    p1.relax_master = t.relax_master.unwrap_or(false);
    let rows = run_phase1(&problem, &p1)?;
    let path = t.rows.clone().unwrap_or_else(|| cfg.out.clone().unwrap_or_default().join("rows.csv"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    rows.save(&path)?;
    println!(
        "{name}: {} rows from {} paths of length {} -> {}",
        rows.len(),
        p1.paths,
        p1.steps,
        path.display()
    );
    Ok(())
}

fn require_rows(cfg: &ExperimentConfig) -> Result<RowStore> {
    let Some(path) = &cfg.training.rows else {
        bail!("phase-1 rows required (--rows)");
    };
    let rows = RowStore::load(path).with_context(|| format!("reading rows {}", path.display()))?;
    if rows.is_empty() {
        bail!("phase-1 rows required ({} is empty)", path.display());
    }
    Ok(rows)
}

fn schedule(cfg: &ExperimentConfig) -> Result<DeltaSchedule> {
    Ok(match &cfg.classifier.deltas {
        Some(d) => DeltaSchedule::new(d.clone())?,
        None => DeltaSchedule::standard(),
    })
}

fn param_choice(cfg: &ExperimentConfig) -> ParamChoice {
    let c = &cfg.classifier;
    let standardize = c.standardize.unwrap_or(true);
    match (&c.grid_c, &c.grid_gamma) {
        (Some(cs), Some(gs)) => ParamChoice::Grid {
            c: cs.clone(),
            gamma: gs.clone(),
            folds: c.folds.unwrap_or(DEFAULT_FOLDS),
            standardize,
        },
        _ => ParamChoice::Fixed(SvmParams {
            c: c.c.unwrap_or(DEFAULT_C),
            gamma: c.gamma.unwrap_or(DEFAULT_GAMMA),
            standardize,
        }),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainRow {
    delta: f64,
    c: f64,
    gamma: f64,
    cv_accuracy: Option<f64>,
    train_accuracy: f64,
    support_vectors: usize,
    positives: usize,
    rows: usize,
    model: String,
}

pub fn model_file_name(delta: f64) -> String {
    format!("model_delta_{delta:.4}.json")
}

pub fn train(cfg: &ExperimentConfig) -> Result<()> {
    let rows = require_rows(cfg)?;
    let sched = schedule(cfg)?;
    let choice = param_choice(cfg);
    let dir = cfg.out_dir()?;
    let mut w = csv::Writer::from_path(dir.join("train_summary.csv"))?;
    for &delta in sched.values() {
        let data = rows.labeled(delta);
        let (params, cv) = match &choice {
            ParamChoice::Fixed(p) => (*p, None),
            ParamChoice::Grid {
                c,
                gamma,
                folds,
                standardize,
            } => {
                let g = grid_search(&data, c, gamma, *folds, *standardize)?;
                (
                    SvmParams {
                        c: g.c,
                        gamma: g.gamma,
                        standardize: *standardize,
                    },
                    Some(g.accuracy),
                )
            }
        };
        let model = train_svm(&data, &params)?;
        let acc = accuracy(&model, &data)?;
        let file = model_file_name(delta);
        model.save(dir.join(&file))?;
        println!(
            "delta {delta}: C {} gamma {} train accuracy {acc:.2}%{}",
            params.c,
            params.gamma,
            cv.map_or(String::new(), |v| format!(" cv {v:.2}%"))
        );
        w.serialize(TrainRow {
            delta,
            c: params.c,
            gamma: params.gamma,
            cv_accuracy: cv,
            train_accuracy: acc,
            support_vectors: model.beta.len(),
            positives: data.iter().filter(|r| r.label > 0).count(),
            rows: data.len(),
            model: file,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EvalRow {
    set: String,
    delta: f64,
    rows: usize,
    accuracy: f64,
}

pub fn eval(cfg: &ExperimentConfig) -> Result<()> {
    let Some(model_path) = &cfg.eval.model else {
        bail!("eval needs a model (--model)");
    };
    let Some(delta) = cfg.eval.delta else {
        bail!("eval needs the labeling threshold (--delta)");
    };
    let model = SvmModel::load(model_path)
        .with_context(|| format!("reading model {}", model_path.display()))?;
    let mut sets: Vec<PathBuf> = cfg.training.rows.iter().cloned().collect();
    sets.extend(cfg.eval.sets.iter().flatten().cloned());
    if sets.is_empty() {
        bail!("eval needs at least one row set (--rows or --set)");
    }
    let dir = cfg.out_dir()?;
    let mut w = csv::Writer::from_path(dir.join("accuracy.csv"))?;
    for path in sets {
        let rows = RowStore::load(&path).with_context(|| format!("reading {}", path.display()))?;
        let data = rows.labeled(delta);
        let acc = accuracy(&model, &data)?;
        println!("{}: {acc:.2}% of {} rows", path.display(), data.len());
        w.serialize(EvalRow {
            set: path.display().to_string(),
            delta,
            rows: data.len(),
            accuracy: acc,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub method: String,
    pub iterations: usize,
    pub gap_pct: f64,
    pub cuts_total: usize,
    pub cum_rmp_time_s: f64,
}

#[derive(Debug, Serialize)]
struct SolutionFile<'a> {
    instance: &'a str,
    method: &'a str,
    status: String,
    objective: f64,
    lower_bound: f64,
    gap_pct: f64,
    iterations: usize,
    cuts_total: usize,
    x: &'a [f64],
    retrain_count: Option<usize>,
    fallback_from: Option<usize>,
    delta_trace: Option<&'a [DeltaSpan]>,
}

pub fn solve(cfg: &ExperimentConfig) -> Result<()> {
    let method = cfg.solve.method.clone().unwrap_or_else(|| "bd".into());
    // Checked before any work so a missing row store fails fast.
    let rows = if method == "learnbd" {
        Some(require_rows(cfg)?)
    } else {
        None
    };
    let (inst, name) = instance(cfg)?;
    let problem = inst.build(&scenarios(cfg, &inst)?)?;
    let benders = BendersConfig {
        tolerance_pct: cfg.solve.tol.unwrap_or(DEFAULT_TOL),
        limits: Limits {
            max_iterations: cfg.solve.max_iterations.unwrap_or(Limits::default().max_iterations),
            time_limit: cfg.solve.time_limit.map(Duration::from_secs_f64),
        },
        relax_master: false,
    };
    let dir = cfg.out_dir()?;

    let (run, learn): (BendersRun, Option<_>) = match rows {
        None => (run_classic_bd(&problem, &benders)?, None),
        Some(rows) => {
            let mut classifier =
                SvmCutClassifier::new(Arc::new(rows), schedule(cfg)?, param_choice(cfg))?;
            if let Some(src) = &cfg.training.source_instance {
                let source = load_instance(src, None, cfg.problem.penalty_factor)?
                    .transfer_stats()
                    .ok_or_else(|| anyhow!("transfer scaling needs CFLP instances"))?;
                let target = inst
                    .transfer_stats()
                    .ok_or_else(|| anyhow!("transfer scaling needs CFLP instances"))?;
                classifier = classifier.with_transfer(Transfer { source, target });
            }
            let config = LearnBdConfig {
                benders,
                fallback: cfg.solve.fallback.unwrap_or(true),
            };
            let res = run_learnbd(&problem, &mut classifier, &config)?;
            let extra = (res.retrain_count, res.fallback_from, res.delta_trace);
            (res.run, Some(extra))
        }
    };

    write_log_csv(&run.state.log, File::create(dir.join("log.csv"))?, learn.is_some())?;
    let summary = SummaryRow {
        instance: name.clone(),
        method: method.clone(),
        iterations: run.iterations,
        gap_pct: run.gap_pct,
        cuts_total: run.cuts_total,
        cum_rmp_time_s: run.state.cum_rmp_time.as_secs_f64(),
    };
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.serialize(&summary)?;
    w.flush()?;
    let solution = SolutionFile {
        instance: &name,
        method: &method,
        status: format!("{:?}", run.status),
        objective: run.objective,
        lower_bound: run.lower_bound,
        gap_pct: run.gap_pct,
        iterations: run.iterations,
        cuts_total: run.cuts_total,
        x: &run.x,
        retrain_count: learn.as_ref().map(|l| l.0),
        fallback_from: learn.as_ref().and_then(|l| l.1),
        delta_trace: learn.as_ref().map(|l| l.2.as_slice()),
    };
    std::fs::write(dir.join("solution.json"), serde_json::to_string_pretty(&solution)?)?;
    println!(
        "{name} {method}: {:?} objective {} gap {}% iterations {} cuts {}",
        run.status, run.objective, run.gap_pct, run.iterations, run.cuts_total
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
struct LogRow {
    iter: usize,
    gap_pct: f64,
    cuts_added: usize,
    cuts_total: usize,
    cum_rmp_time_s: f64,
    cum_sp_time_s: f64,
}

#[derive(Debug, Serialize)]
struct PanelRow<'a> {
    instance: &'a str,
    method: &'a str,
    iter: usize,
    gap_pct: f64,
    cum_rmp_time_s: f64,
    cuts_total: usize,
    cum_sp_time_s: f64,
}

pub fn report(cfg: &ExperimentConfig) -> Result<()> {
    let runs = cfg.report.runs.clone().unwrap_or_default();
    if runs.is_empty() {
        bail!("report needs at least one run directory (--run)");
    }
    let dir = cfg.out_dir()?;
    let mut table = csv::Writer::from_path(dir.join("comparison.csv"))?;
    let mut panels = csv::Writer::from_path(dir.join("panels.csv"))?;
    for run in runs {
        let summary: SummaryRow = csv::Reader::from_path(run.join("summary.csv"))
            .with_context(|| format!("reading {}", run.join("summary.csv").display()))?
            .deserialize()
            .next()
            .ok_or_else(|| anyhow!("{} has no summary row", run.display()))??;
        let log: Vec<LogRow> = csv::Reader::from_path(run.join("log.csv"))
            .with_context(|| format!("reading {}", run.join("log.csv").display()))?
            .deserialize()
            .collect::<std::result::Result<_, _>>()?;
        let Some(last) = log.last() else {
            bail!("{} has an empty log", run.display());
        };
        // Totals come from the per-iteration log.
        let cuts: usize = log.iter().map(|r| r.cuts_added).sum();
        if cuts != summary.cuts_total || log.len() != summary.iterations {
            bail!("{}: summary disagrees with its log", run.display());
        }
        table.serialize(SummaryRow {
            instance: summary.instance.clone(),
            method: summary.method.clone(),
            iterations: log.len(),
            gap_pct: last.gap_pct,
            cuts_total: cuts,
            cum_rmp_time_s: last.cum_rmp_time_s,
        })?;
        for r in &log {
            panels.serialize(PanelRow {
                instance: &summary.instance,
                method: &summary.method,
                iter: r.iter,
                gap_pct: r.gap_pct,
                cum_rmp_time_s: r.cum_rmp_time_s,
                cuts_total: r.cuts_total,
                cum_sp_time_s: r.cum_sp_time_s,
            })?;
        }
    }
    table.flush()?;
    panels.flush()?;
    println!("wrote {}", dir.join("comparison.csv").display());
    Ok(())
}
