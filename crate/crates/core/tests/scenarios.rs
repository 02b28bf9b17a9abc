use proptest::prelude::*;
use resilience::scenario::population_study;
use resilience::{
    run_monte_carlo, run_monte_carlo_with, run_simulation, run_simulation_with, Metric, RunOptions, Scenario, SeedSpec,
    SharingOrder, StateVar,
};

const STORM: &str = r#"
[simulation]
horizon = 40

[community.north]
population = 4
M_E = 0.5

[community.north.agent.1]
M_C = 1

[event.storm]
community = "north"
start = 10
Q_s = 0
Z = 0.9

[event.storm.initial]
M_E = 0.95
"#;

fn health(run: &resilience::Trajectory, step: usize) -> f64 {
    run.steps[step].communities[0].mean(Metric::PhysicalHealth)
}

#[test]
fn events_strike_at_their_start_step() {
    let s = Scenario::parse(STORM).unwrap();
    let run = run_simulation(&s, SeedSpec::new(0, 0)).unwrap();
    // initial overrides are applied before the start step is recorded
    assert!((run.steps[10].communities[0].mean(Metric::Fear) - 0.95).abs() < 1e-12);
    assert!(run.steps[9].communities[0].mean(Metric::Fear) < 0.95);

    let mut calm = s.clone();
    calm.events.clear();
    let quiet = run_simulation(&calm, SeedSpec::new(0, 0)).unwrap();
    for k in 0..=10 {
        assert_eq!(health(&run, k), health(&quiet, k), "step {k}");
    }
    assert!(health(&run, 40) < health(&quiet, 40));
}

#[test]
fn agent_overrides_reach_the_right_agent() {
    let s = Scenario::parse(STORM).unwrap();
    let run = run_simulation_with(&s, SeedSpec::new(0, 0), RunOptions { dump_agents: true }).unwrap();
    let first: Vec<_> = run.agents.unwrap().into_iter().filter(|r| r.step == 0).collect();
    assert_eq!(first[0].state.get(StateVar::Cooperation).get(), 1.0);
    assert_eq!(first[1].state.get(StateVar::Cooperation).get(), 0.5);
}

#[test]
fn horizon_changes_move_and_drop_events() {
    let s = Scenario::parse(STORM).unwrap();
    assert!(s.clone().with_horizon(5).events.is_empty());
    let longer = s.clone().with_horizon(100);
    assert_eq!(longer.events[0].end, 100);
    let shorter = s.with_horizon(20);
    assert_eq!((shorter.events[0].start, shorter.events[0].end), (10, 20));
}

#[test]
fn rendered_scenarios_reproduce_the_same_run() {
    let s = Scenario::parse(STORM).unwrap();
    let again = Scenario::parse(&s.render()).unwrap();
    let a = run_simulation(&s, SeedSpec::new(3, 1)).unwrap();
    let b = run_simulation(&again, SeedSpec::new(3, 1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.fingerprint, s.fingerprint());
}

#[test]
fn both_sharing_orders_conserve_der() {
    for order in [SharingOrder::Before, SharingOrder::After] {
        let mut s = resilience::scenario::case_study_1("sharing").unwrap().remove(1).scenario.with_horizon(30);
        s.sharing = order;
        let run = run_simulation(&s, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(run.sharing_onset(), Some(0), "{order:?}");
        assert!(run.sharing.iter().all(|r| r.max_imbalance < 1e-12));
    }
}

#[test]
fn ensembles_ignore_thread_count() {
    let s = population_study(30, 0.9).unwrap().with_horizon(25);
    let wide = run_monte_carlo(&s, 6, 11).unwrap();
    let narrow = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_monte_carlo(&s, 6, 11).unwrap());
    assert_eq!(wide, narrow);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn means_stay_in_the_unit_interval_and_experience_never_drops(
        seed in any::<u64>(),
        population in 2usize..40,
        empathy in 0.0f64..1.0,
    ) {
        let s = population_study(population, empathy).unwrap().with_horizon(30);
        let e = run_monte_carlo_with(&s, 2, seed, RunOptions { dump_agents: true }).unwrap();
        for step in &e.summary {
            for m in Metric::ALL {
                let x = step.communities[0].mean(m);
                prop_assert!((0.0..=1.0).contains(&x), "{m} = {x}");
            }
        }
        let dump = e.runs[0].agents.as_ref().unwrap();
        for a in 0..population {
            let path: Vec<f64> =
                dump.iter().filter(|r| r.agent == a).map(|r| r.state.experience.get()).collect();
            prop_assert!(path.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
