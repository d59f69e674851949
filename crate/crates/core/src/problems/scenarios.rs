use std::io::{Read, Write};

use rand_distr::{Distribution, Normal};

use crate::error::{input_err, Error, Result};
use crate::seed;

/// Demand realizations with their probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub demands: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
    pub seed: Option<u64>,
    pub sigma_ratio: Option<f64>,
}

/// Negative demand draws are stored as zero.
pub fn clamp_demand(raw: f64) -> f64 {
    raw.max(0.0)
}

/// Independent `Normal(nominal, sigma_ratio * nominal)` draws per entry,
/// clamped at zero, each scenario with probability `1 / count`.
pub fn sample_scenarios(
    nominal: &[f64],
    sigma_ratio: f64,
    count: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if count == 0 {
        return input_err("scenario count must be positive");
    }
    if !(sigma_ratio >= 0.0) || !sigma_ratio.is_finite() {
        return input_err("sigma ratio must be a finite nonnegative number");
    }
    if nominal.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return input_err("nominal demands must be finite and nonnegative");
    }
    let mut rng = seed::rng(seed);
    let mut demands = Vec::with_capacity(count);
    for _ in 0..count {
        let row = nominal
            .iter()
            .map(|&mean| {
                let sd = sigma_ratio * mean;
                if sd == 0.0 {
                    mean
                } else {
                    // sd is finite and positive here.
                    let dist = Normal::new(mean, sd).expect("valid normal");
                    clamp_demand(dist.sample(&mut rng))
                }
            })
            .collect();
        demands.push(row);
    }
    Ok(ScenarioSet {
        demands,
        probabilities: vec![1.0 / count as f64; count],
        seed: Some(seed),
        sigma_ratio: Some(sigma_ratio),
    })
}

impl ScenarioSet {
    /// Equally likely scenarios.
    pub fn uniform(demands: Vec<Vec<f64>>) -> Result<Self> {
        let n = demands.len();
        if n == 0 {
            return input_err("scenario set is empty");
        }
        let set = ScenarioSet {
            demands,
            probabilities: vec![1.0 / n as f64; n],
            seed: None,
            sigma_ratio: None,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.demands.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.demands.is_empty() {
            return input_err("scenario set is empty");
        }
        if self.probabilities.len() != self.demands.len() {
            return input_err("one probability per scenario required");
        }
        let dim = self.dimension();
        for (w, d) in self.demands.iter().enumerate() {
            if d.len() != dim {
                return input_err(format!("scenario {w} has {} demands, expected {dim}", d.len()));
            }
            if d.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return input_err(format!("scenario {w} has a negative or non-finite demand"));
            }
        }
        if self.probabilities.iter().any(|p| !(*p >= 0.0)) {
            return input_err("probabilities must be nonnegative");
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 * self.len() as f64 {
            return input_err(format!("probabilities sum to {total}"));
        }
        Ok(())
    }

    /// Each scenario repeated `times` times at `p / times`.
    pub fn duplicated(&self, times: usize) -> Self {
        let mut demands = Vec::with_capacity(self.len() * times);
        let mut probabilities = Vec::with_capacity(self.len() * times);
        for (d, &p) in self.demands.iter().zip(&self.probabilities) {
            for _ in 0..times {
                demands.push(d.clone());
                probabilities.push(p / times as f64);
            }
        }
        ScenarioSet {
            demands,
            probabilities,
            seed: self.seed,
            sigma_ratio: self.sigma_ratio,
        }
    }

    /// One row per scenario: demands `d0..`, then `probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.dimension()).map(|j| format!("d{j}")).collect();
        header.push("probability".into());
        w.write_record(&header)?;
        for (d, p) in self.demands.iter().zip(&self.probabilities) {
            let mut rec: Vec<String> = d.iter().map(|v| v.to_string()).collect();
            rec.push(p.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut demands = Vec::new();
        let mut probabilities = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let mut vals = Vec::with_capacity(rec.len());
            for field in rec.iter() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("not a number: {field:?}"),
                })?;
                vals.push(v);
            }
            let Some(p) = vals.pop() else {
                return Err(Error::Parse {
                    line,
                    msg: "empty record".into(),
                });
            };
            demands.push(vals);
            probabilities.push(p);
        }
        let set = ScenarioSet {
            demands,
            probabilities,
            seed: None,
            sigma_ratio: None,
        };
        set.validate()?;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_reproduces_nominal() {
        let set = sample_scenarios(&[3.0, 0.0, 7.5], 0.0, 4, 11).unwrap();
        assert_eq!(set.len(), 4);
        for d in &set.demands {
            assert_eq!(d, &vec![3.0, 0.0, 7.5]);
        }
        assert_eq!(set.probabilities, vec![0.25; 4]);
    }

    #[test]
    fn negative_draws_are_clamped() {
        assert_eq!(clamp_demand(-4.0), 0.0);
        assert_eq!(clamp_demand(2.5), 2.5);
        let set = sample_scenarios(&[1.0], 10.0, 500, 3).unwrap();
        assert!(set.demands.iter().all(|d| d[0] >= 0.0));
        assert!(set.demands.iter().any(|d| d[0] == 0.0));
    }

    #[test]
    fn sample_mean_is_close_to_nominal() {
        // sd of the mean estimator = 10 / sqrt(10000) = 0.1; 3 sd = 0.3.
        let set = sample_scenarios(&[100.0], 0.1, 10_000, 2024).unwrap();
        let mean: f64 = set.demands.iter().map(|d| d[0]).sum::<f64>() / 10_000.0;
        assert!((mean - 100.0).abs() < 1.0, "mean {mean}");
    }

    #[test]
    fn zero_count_rejected() {
        assert!(sample_scenarios(&[1.0], 0.1, 0, 0).is_err());
        assert!(sample_scenarios(&[1.0], -0.1, 3, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let set = sample_scenarios(&[10.0, 20.0], 0.2, 3, 5).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("d0,d1,probability\n"));
        let back = ScenarioSet::read_csv(&buf[..]).unwrap();
        assert_eq!(back.demands, set.demands);
        assert_eq!(back.probabilities, set.probabilities);
    }

    #[test]
    fn csv_rejects_garbage() {
        let text = "d0,probability\nabc,1\n";
        assert!(matches!(
            ScenarioSet::read_csv(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
