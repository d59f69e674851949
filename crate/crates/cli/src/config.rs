//! Experiment configuration: a TOML file whose fields can all be
//! overridden from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub problem: ProblemSection,
    pub scenarios: ScenarioSection,
    pub training: TrainingSection,
    pub classifier: ClassifierSection,
    pub solve: SolveSection,
    pub eval: EvalSection,
    pub report: ReportSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    /// "cflp" or "cmnd"; inferred from the instance file when absent.
    pub kind: Option<String>,
    pub instance: Option<PathBuf>,
    pub name: Option<String>,
    pub facilities: Option<usize>,
    pub customers: Option<usize>,
    pub nodes: Option<usize>,
    pub arcs: Option<usize>,
    pub commodities: Option<usize>,
    pub penalty_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub file: Option<PathBuf>,
    pub count: Option<usize>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub rows: Option<PathBuf>,
    pub relax_master: Option<bool>,
    /// Instance the rows were sampled on; enables feature transfer scaling.
    pub source_instance: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub grid_c: Option<Vec<f64>>,
    pub grid_gamma: Option<Vec<f64>>,
    pub folds: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub standardize: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub time_limit: Option<f64>,
    pub max_iterations: Option<usize>,
    pub fallback: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub model: Option<PathBuf>,
    pub delta: Option<f64>,
    pub sets: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub runs: Option<Vec<PathBuf>>,
}

/// Flags shared by every subcommand. Any flag given wins over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML experiment file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Top-level seed; per-stage seeds are derived from it
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Problem family: cflp or cmnd
    #[arg(long)]
    pub kind: Option<String>,
    /// Instance file (OR-Library cap format or CMND JSON)
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub facilities: Option<usize>,
    #[arg(long)]
    pub customers: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub arcs: Option<usize>,
    #[arg(long)]
    pub commodities: Option<usize>,
    /// CFLP unmet-demand penalty as a multiple of the largest unit cost
    #[arg(long)]
    pub penalty_factor: Option<f64>,

    /// Scenario CSV
    #[arg(long)]
    pub scenarios: Option<PathBuf>,
    /// Number of scenarios to sample when no scenario file is given
    #[arg(long)]
    pub num_scenarios: Option<usize>,
    /// Demand standard deviation as a fraction of the mean
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Phase-1 sampling paths (K)
    #[arg(long)]
    pub paths: Option<usize>,
    /// Steps per sampling path (N)
    #[arg(long)]
    pub steps: Option<usize>,
    /// Phase-1 row CSV
    #[arg(long)]
    pub rows: Option<PathBuf>,
    /// Solve sampling masters as LP relaxations
    #[arg(long)]
    pub relax_master: bool,
    /// Instance the rows were sampled on (enables transfer scaling)
    #[arg(long)]
    pub source_instance: Option<PathBuf>,

    /// SVM penalty C
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// RBF kernel parameter
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Grid search as "C1,C2,...:g1,g2,..."
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Comma-separated decreasing Δ values
    #[arg(long)]
    pub delta_list: Option<String>,
    /// Train on raw, unstandardized features
    #[arg(long)]
    pub no_standardize: bool,

    /// bd or learnbd
    #[arg(long)]
    pub method: Option<String>,
    /// Optimality gap tolerance in percent
    #[arg(long)]
    pub tol: Option<f64>,
    /// Wall-clock limit in seconds
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Stop instead of adding every violated cut once Δ runs out
    #[arg(long)]
    pub no_fallback: bool,

    /// Model file for eval
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Δ used to label rows for eval
    #[arg(long)]
    pub delta: Option<f64>,
    /// Validation row CSVs for eval (repeatable)
    #[arg(long = "set")]
    pub sets: Vec<PathBuf>,
    /// Run directories for report (repeatable)
    #[arg(long = "run")]
    pub runs: Vec<PathBuf>,
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad number {s:?}")))
        .collect()
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// The file named by `--config` (if any) with the flags applied on top.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, f: &Flags) -> Result<()> {
        set(&mut self.seed, f.seed);
        set(&mut self.out, f.out.clone());
        let p = &mut self.problem;
        set(&mut p.kind, f.kind.clone());
        set(&mut p.instance, f.instance.clone());
        set(&mut p.facilities, f.facilities);
        set(&mut p.customers, f.customers);
        set(&mut p.nodes, f.nodes);
        set(&mut p.arcs, f.arcs);
        set(&mut p.commodities, f.commodities);
        set(&mut p.penalty_factor, f.penalty_factor);
        let s = &mut self.scenarios;
        set(&mut s.file, f.scenarios.clone());
        set(&mut s.count, f.num_scenarios);
        set(&mut s.sigma, f.sigma);
        let t = &mut self.training;
        set(&mut t.paths, f.paths);
        set(&mut t.steps, f.steps);
        set(&mut t.rows, f.rows.clone());
        set(&mut t.source_instance, f.source_instance.clone());
        if f.relax_master {
            t.relax_master = Some(true);
        }
        let c = &mut self.classifier;
        set(&mut c.c, f.c);
        set(&mut c.gamma, f.gamma);
        set(&mut c.folds, f.folds);
        if let Some(g) = &f.grid {
            let Some((cs, gs)) = g.split_once(':') else {
                bail!("--grid expects \"C1,C2,...:g1,g2,...\"");
            };
            c.grid_c = Some(parse_list(cs)?);
            c.grid_gamma = Some(parse_list(gs)?);
        }
        if let Some(d) = &f.delta_list {
            c.deltas = Some(parse_list(d)?);
        }
        if f.no_standardize {
            c.standardize = Some(false);
        }
        let v = &mut self.solve;
        set(&mut v.method, f.method.clone());
        set(&mut v.tol, f.tol);
        set(&mut v.time_limit, f.time_limit);
        set(&mut v.max_iterations, f.max_iterations);
        if f.no_fallback {
            v.fallback = Some(false);
        }
        set(&mut self.eval.model, f.model.clone());
        set(&mut self.eval.delta, f.delta);
        if !f.sets.is_empty() {
            self.eval.sets = Some(f.sets.clone());
        }
        if !f.runs.is_empty() {
            self.report.runs = Some(f.runs.clone());
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(tol) = self.solve.tol {
            if !(tol > 0.0) {
                bail!("tolerance must be positive");
            }
        }
        if let Some(t) = self.solve.time_limit {
            if !(t > 0.0) {
                bail!("time limit must be positive");
            }
        }
        if self.solve.max_iterations == Some(0) {
            bail!("iteration limit must be positive");
        }
        if let Some(m) = &self.solve.method {
            if m != "bd" && m != "learnbd" {
                bail!("unknown method {m:?}; expected bd or learnbd");
            }
        }
        if let Some(k) = &self.problem.kind {
            if k != "cflp" && k != "cmnd" {
                bail!("unknown problem kind {k:?}; expected cflp or cmnd");
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Cli {
        #[command(flatten)]
        flags: Flags,
    }

    #[test]
    fn flags_override_file() {
        let mut cfg: ExperimentConfig = toml::from_str(
            "seed = 3\n[solve]\nmethod = \"bd\"\ntol = 0.5\n[classifier]\ndeltas = [1.2, 1.1]\n",
        )
        .unwrap();
        let cli = Cli::parse_from(["x", "--tol", "0.01", "--delta-list", "1.0,0.9", "--grid", "1,10:0.5"]);
        cfg.apply(&cli.flags).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.solve.tol, Some(0.01));
        assert_eq!(cfg.solve.method.as_deref(), Some("bd"));
        assert_eq!(cfg.classifier.deltas, Some(vec![1.0, 0.9]));
        assert_eq!(cfg.classifier.grid_c, Some(vec![1.0, 10.0]));
        assert_eq!(cfg.classifier.grid_gamma, Some(vec![0.5]));
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ExperimentConfig::default();
        cfg.solve.tol = Some(0.0);
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.solve.method = Some("cplex".into());
        assert!(cfg.validate().is_err());
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1").is_err());
    }
}
