mod common;

use common::{brute_force_optimum, tiny_instance, TinyShape};
use ots_core::baselines::{greedy_schedule, random_schedule};
use ots_core::generator::{generate, GeneratorParams, TsFamily};
use ots_core::oracle::{oracle_optimum, OracleLimits};
use ots_core::rng::RngStream;
use ots_core::{
    parse_instance, parse_schedule, solve, validate_schedule, write_instance, write_schedule, OtsInstance, Outcome,
    Schedule, SolveParams, SolveReport, Strategy,
};
use proptest::prelude::*;

fn small_instance(seed: u64) -> OtsInstance {
    tiny_instance(
        &mut RngStream::new(seed),
        TinyShape {
            max_tests: 7,
            max_machines: 3,
            max_resources: 3,
            max_duration: 12,
        },
    )
}

fn check_report(inst: &OtsInstance, report: &SolveReport) -> Result<(), TestCaseError> {
    for pair in report.stream.windows(2) {
        prop_assert!(pair[1].makespan < pair[0].makespan);
        prop_assert!(pair[1].t_ms >= pair[0].t_ms);
    }
    match &report.best {
        Some(best) => {
            prop_assert!(validate_schedule(inst, best).is_empty());
            prop_assert!(best.makespan() >= inst.makespan_lower_bound());
            prop_assert_eq!(report.last().map(|p| p.makespan), Some(best.makespan()));
        }
        None => prop_assert!(report.stream.is_empty()),
    }
    Ok(())
}

fn check_baseline(inst: &OtsInstance, s: &Schedule) -> Result<(), TestCaseError> {
    prop_assert!(validate_schedule(inst, s).is_empty());
    prop_assert_eq!(s.entries().len(), inst.len());
    prop_assert!(s.makespan() >= inst.makespan_lower_bound());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_output_is_valid(seed in any::<u64>(), naive in any::<bool>()) {
        let inst = small_instance(seed);
        let strategy = if naive { Strategy::NaiveLeftmost } else { Strategy::DurationSplitting };
        let mut params = SolveParams::new(10_000).with_strategy(strategy);
        params.node_limit = Some(2_000);
        let report = solve(&inst, &params);
        prop_assert!(report.best.is_some());
        check_report(&inst, &report)?;
    }

    #[test]
    fn baselines_are_valid(seed in any::<u64>()) {
        let inst = small_instance(seed);
        check_baseline(&inst, &greedy_schedule(&inst))?;
        check_baseline(&inst, &random_schedule(&inst, &mut RngStream::new(seed)))?;
    }

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let inst = small_instance(seed);
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn schedule_files_round_trip(seed in any::<u64>()) {
        let inst = small_instance(seed);
        let s = greedy_schedule(&inst);
        let text = write_schedule(&s, None);
        let (back, meta) = parse_schedule(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(meta.status, "unknown");
        prop_assert_eq!(write_schedule(&back, None), text);
    }
}

#[test]
fn optimum_agrees_with_two_oracles() {
    let shape = TinyShape {
        max_tests: 5,
        max_machines: 2,
        max_resources: 2,
        max_duration: 5,
    };
    for seed in 0..120u64 {
        let inst = tiny_instance(&mut RngStream::new(seed), shape);
        let brute = brute_force_optimum(&inst);
        let oracle = oracle_optimum(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(oracle.makespan, brute, "seed {seed}: oracle");
        assert!(validate_schedule(&inst, &oracle.witness).is_empty());
        for strategy in [Strategy::DurationSplitting, Strategy::NaiveLeftmost] {
            let report = solve(&inst, &SolveParams::new(10_000).with_strategy(strategy));
            assert_eq!(report.outcome, Outcome::OptimalProved, "seed {seed} {strategy:?}");
            assert_eq!(report.best.unwrap().makespan(), brute, "seed {seed} {strategy:?}");
        }
    }
}

#[test]
fn cap_below_optimum_is_infeasible() {
    for seed in 0..40u64 {
        let inst = small_instance(seed);
        let opt = oracle_optimum(
            &inst,
            &OracleLimits {
                max_duration: 12,
                ..OracleLimits::default()
            },
        )
        .unwrap()
        .makespan;
        let mut params = SolveParams::new(10_000);
        params.makespan_cap = Some(opt - 1);
        assert_eq!(solve(&inst, &params).outcome, Outcome::InfeasibleProved, "seed {seed}");
        params.makespan_cap = Some(opt);
        let report = solve(&inst, &params);
        assert_eq!(report.outcome, Outcome::OptimalProved, "seed {seed}");
        assert_eq!(report.best.unwrap().makespan(), opt);
    }
}

#[test]
fn generated_instances_solve_validly() {
    for (family, r) in [(1, 3), (1, 10), (2, 5), (3, 3)] {
        let inst = generate(&GeneratorParams::for_family(TsFamily::new(family).unwrap(), r, 99)).unwrap();
        let mut params = SolveParams::new(2_000);
        params.node_limit = Some(3_000);
        let report = solve(&inst, &params);
        let best = report.best.expect("first solution within the node limit");
        assert!(validate_schedule(&inst, &best).is_empty());
        assert!(best.makespan() >= inst.makespan_lower_bound());
        assert!(validate_schedule(&inst, &greedy_schedule(&inst)).is_empty());
    }
}

#[test]
fn contract_is_respected() {
    let inst = generate(&GeneratorParams::for_family(TsFamily::new(5).unwrap(), 5, 3)).unwrap();
    let report = solve(&inst, &SolveParams::new(300));
    assert!(report.t_total_ms <= 300 + 100, "took {} ms", report.t_total_ms);
    assert!(report.best.is_some());
}
