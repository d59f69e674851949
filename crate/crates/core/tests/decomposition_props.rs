use std::sync::Arc;

use learnbd::benders::{run_classic_bd, BendersConfig, BendersRun};
use learnbd::learnbd::{
    run_learnbd, run_learnbd_svm, ConstantClassifier, DeltaSchedule, LearnBdConfig, ParamChoice,
};
use learnbd::mip::{solve_mip, MipStatus};
use learnbd::phase1::{run_phase1, transform_labels, Phase1Config};
use learnbd::problems::{
    build_cflp, build_cmnd, extensive_form, sample_scenarios, CflpGenerator, CmndGenerator,
};
use learnbd::svm::SvmParams;
use learnbd::TwoStageProblem;
use proptest::prelude::*;

const TOL_PCT: f64 = 1e-4;

fn cflp(f: usize, c: usize, omega: usize, seed: u64) -> TwoStageProblem {
    let data = CflpGenerator::small(f, c).generate(seed);
    let sc = sample_scenarios(&data.demands, 0.2, omega, seed + 1).unwrap();
    build_cflp(&data, &sc).unwrap()
}

fn cmnd(n: usize, a: usize, k: usize, omega: usize, seed: u64) -> TwoStageProblem {
    let data = CmndGenerator::small(n, a, k).generate(seed);
    let sc = sample_scenarios(&data.nominal_demands(), 0.2, omega, seed + 1).unwrap();
    build_cmnd(&data, &sc).unwrap()
}

fn instance() -> impl Strategy<Value = TwoStageProblem> {
    prop_oneof![
        (1usize..=4, 1usize..=5, 1usize..=4, 0u64..10_000).prop_map(|(f, c, o, s)| cflp(f, c, o, s)),
        (3usize..=4, 3usize..=6, 1usize..=3, 1usize..=3, 0u64..10_000)
            .prop_map(|(n, a, k, o, s)| cmnd(n, a, k, o, s)),
    ]
}

fn optimum(problem: &TwoStageProblem) -> f64 {
    let sol = solve_mip(&extensive_form(problem)).unwrap();
    assert_eq!(sol.status, MipStatus::Optimal);
    sol.objective
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

/// LB never falls, UB never rises, LB ≤ UB, and LB ≤ z* ≤ UB.
fn check_bounds(run: &BendersRun, z: f64) -> Result<(), TestCaseError> {
    let log = &run.state.log;
    let slack = 1e-7 * z.abs().max(1.0);
    for w in log.windows(2) {
        prop_assert!(w[1].lb >= w[0].lb - slack);
        prop_assert!(w[1].ub <= w[0].ub + slack);
    }
    for row in log {
        prop_assert!(row.lb <= row.ub + slack);
        prop_assert!(row.lb <= z + slack, "lb {} above optimum {}", row.lb, z);
        prop_assert!(row.ub >= z - slack, "ub {} below optimum {}", row.ub, z);
        prop_assert!(row.cuts_added <= row.cuts_violated);
    }
    let total: usize = log.iter().map(|r| r.cuts_added).sum();
    prop_assert_eq!(total, run.cuts_total);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classic_matches_extensive_form(problem in instance()) {
        let z = optimum(&problem);
        let run = run_classic_bd(&problem, &BendersConfig::new(TOL_PCT)).unwrap();
        prop_assert!(close(run.objective, z), "bd {} vs {}", run.objective, z);
        prop_assert!(close(problem.evaluate(&run.x).unwrap(), run.objective));
        check_bounds(&run, z)?;
    }

    #[test]
    fn learning_variant_matches_extensive_form(problem in instance(), seed in 0u64..1000) {
        let z = optimum(&problem);
        let rows = run_phase1(&problem, &Phase1Config::defaults_for(&problem, seed)).unwrap();
        prop_assume!(!rows.is_empty());
        let res = run_learnbd_svm(
            &problem,
            Arc::new(rows),
            DeltaSchedule::standard(),
            ParamChoice::Fixed(SvmParams::new(10.0, 1.0)),
            &LearnBdConfig::new(TOL_PCT),
        )
        .unwrap();
        prop_assert!(close(res.run.objective, z), "learnbd {} vs {}", res.run.objective, z);
        check_bounds(&res.run, z)?;
    }

    #[test]
    fn accept_all_reproduces_classic(problem in instance()) {
        let classic = run_classic_bd(&problem, &BendersConfig::new(TOL_PCT)).unwrap();
        let learned = run_learnbd(&problem, &mut ConstantClassifier::accept_all(), &LearnBdConfig::new(TOL_PCT)).unwrap();
        prop_assert_eq!(learned.run.iterations, classic.iterations);
        prop_assert_eq!(learned.run.cuts_total, classic.cuts_total);
        prop_assert_eq!(learned.retrain_count, 0);
        let a: Vec<_> = classic.state.pool.iter().map(|c| (c.scenario, c.iteration, c.rhs, c.coeffs.clone())).collect();
        let b: Vec<_> = learned.run.state.pool.iter().map(|c| (c.scenario, c.iteration, c.rhs, c.coeffs.clone())).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phase1_rows_are_well_formed(problem in instance(), seed in 0u64..1000, paths in 1usize..4) {
        let mut cfg = Phase1Config::defaults_for(&problem, seed);
        cfg.paths = paths;
        let rows = run_phase1(&problem, &cfg).unwrap();
        prop_assert_eq!(&rows, &run_phase1(&problem, &cfg).unwrap());
        for k in 0..paths {
            let path: Vec<_> = rows.rows.iter().filter(|r| r.path == k).collect();
            prop_assert!(path.len() <= cfg.steps);
            for (i, r) in path.iter().enumerate() {
                prop_assert_eq!(r.step, i);
                prop_assert!(r.pi >= 0.0 && r.pi.is_finite());
                prop_assert!(r.violation > 1e-6);
                prop_assert!(r.count <= i);
            }
        }
        for delta in [0.7, 1.0, 1.2] {
            let once = transform_labels(&rows.rows, delta);
            prop_assert_eq!(&once, &transform_labels(&rows.rows, delta));
            prop_assert!(once.iter().all(|r| r.label == 1 || r.label == -1));
        }
    }
}
