//! Replications and ensembles.
//!
//! A replication draws its whole initial condition from one random stream,
//! in this order: every agent (communities in order, agents in order, the
//! variables in [`StateVar::ALL`] order), then each community's baseline
//! `Z`, `Q_s` and `Q_e`, then the empathy weights, then a random news tone.
//! Each step `k = 0..=horizon` then runs
//!
//! 1. disasters starting at `k` are realized and conditions updated,
//! 2. DERs are reset to their nominal output and shared,
//! 3. `Q_total` is computed and the step is recorded,
//! 4. unless `k` is the last step, agents react to media and conditions.
//!
//! With [`SharingOrder::After`] step 2 moves behind step 4, so agents see
//! the previous step's allocation.

use std::ops::Range;

use rayon::prelude::*;

use crate::agent::{AgentState, StateVar};
use crate::dynamics::{step_population, Exposure};
use crate::error::{Error, Result};
use crate::infrastructure::{share_electricity, total_electricity, EventSchedule, InfrastructureState};
use crate::metrics::{aggregate_ensemble, CommunityMetrics, StepMetrics};
use crate::network::EmpathyNetwork;
use crate::random::{sample_truncated_gaussian, standard_normal, SeedSpec, SimRng};
use crate::scenario::{Scenario, SharingOrder};
use crate::unit::UnitValue;

/// Optional outputs of a replication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep every agent's state at every step.
    pub dump_agents: bool,
}

/// DER moved by one sharing round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharingRecord {
    pub step: usize,
    pub transferred: f64,
    /// Largest change of any component's DER total; zero up to rounding.
    pub max_imbalance: f64,
}

/// One agent at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentRecord {
    pub step: usize,
    pub community: usize,
    /// Index within the community.
    pub agent: usize,
    pub state: AgentState,
    pub q_total: UnitValue,
}

/// Recorded history of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub fingerprint: String,
    pub replication_index: u64,
    /// `horizon + 1` entries; entry 0 is the initial condition.
    pub steps: Vec<StepMetrics>,
    pub sharing: Vec<SharingRecord>,
    pub agents: Option<Vec<AgentRecord>>,
}

impl Trajectory {
    /// First step at which any DER changed hands.
    pub fn sharing_onset(&self) -> Option<usize> {
        self.sharing.iter().find(|r| r.transferred > 0.0).map(|r| r.step)
    }
}

/// Replications of one scenario and their pointwise statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub runs: Vec<Trajectory>,
    /// Per step and community: mean and spread of the community means.
    pub summary: Vec<StepMetrics>,
}

struct World {
    agents: Vec<AgentState>,
    ranges: Vec<Range<usize>>,
    community_of: Vec<usize>,
    network: EmpathyNetwork,
    schedule: EventSchedule,
    media: crate::media::MediaProfile,
}

fn initialize(s: &Scenario, rng: &mut SimRng) -> Result<World> {
    let mut agents = Vec::with_capacity(s.population());
    let mut ranges = Vec::with_capacity(s.communities.len());
    let mut community_of = Vec::with_capacity(s.population());
    for (ci, c) in s.communities.iter().enumerate() {
        let start = agents.len();
        let prosumers = c.prosumers();
        for k in 0..c.population {
            let mut a = AgentState::uniform(UnitValue::ZERO);
            for var in StateVar::ALL {
                a.set(var, sample_truncated_gaussian(c.agent_init(k, var), rng));
            }
            a.is_prosumer = k < prosumers;
            if !a.is_prosumer {
                a.set(StateVar::Der, UnitValue::ZERO);
            }
            agents.push(a);
            community_of.push(ci);
        }
        ranges.push(start..agents.len());
    }
    let baseline: Vec<InfrastructureState> = s
        .communities
        .iter()
        .map(|c| InfrastructureState {
            injury: sample_truncated_gaussian(c.injury, rng),
            services: sample_truncated_gaussian(c.services, rng),
            utility: sample_truncated_gaussian(c.utility, rng),
        })
        .collect();
    let sizes: Vec<usize> = s.communities.iter().map(|c| c.population).collect();
    let network = EmpathyNetwork::sample(&sizes, |a, b| s.empathy.block(a, b), rng);
    let media = s.media.realize(rng);
    let ids: Vec<String> = s.communities.iter().map(|c| c.id.clone()).collect();
    let schedule = EventSchedule::new(&ids, ranges.clone(), baseline, &agents, &s.events)?;
    Ok(World { agents, ranges, community_of, network, schedule, media })
}

/// Runs one replication.
pub fn run_simulation(scenario: &Scenario, seed: SeedSpec) -> Result<Trajectory> {
    run_simulation_with(scenario, seed, RunOptions::default())
}

pub fn run_simulation_with(scenario: &Scenario, seed: SeedSpec, options: RunOptions) -> Result<Trajectory> {
    scenario.validate()?;
    let s = scenario;
    let mut rng = seed.rng();
    let World { mut agents, ranges, community_of, network, mut schedule, media } = initialize(s, &mut rng)?;

    let n = agents.len();
    let mut steps = Vec::with_capacity(s.horizon + 1);
    let mut sharing = Vec::with_capacity(s.horizon + 1);
    let mut dump = options.dump_agents.then(|| Vec::with_capacity(n * (s.horizon + 1)));
    let mut q_total = vec![UnitValue::ZERO; n];
    let mut exposures = Vec::with_capacity(n);

    let share = |agents: &mut [AgentState], step: usize, sharing: &mut Vec<SharingRecord>| {
        for a in agents.iter_mut() {
            a.der_fraction = a.der_nominal;
        }
        let out = share_electricity(agents, network.components(), &s.energy);
        sharing.push(SharingRecord { step, transferred: out.transferred, max_imbalance: out.max_imbalance });
    };

    if s.sharing == SharingOrder::After {
        share(&mut agents, 0, &mut sharing);
    }
    for k in 0..=s.horizon {
        let infra = schedule.apply_events(k, &mut agents, &mut rng);
        if s.sharing == SharingOrder::Before {
            share(&mut agents, k, &mut sharing);
        }
        for (i, a) in agents.iter().enumerate() {
            q_total[i] = total_electricity(infra[community_of[i]].utility, a.der_fraction, &s.energy);
        }

        let mut record = StepMetrics { communities: Vec::with_capacity(ranges.len()) };
        for r in &ranges {
            record.communities.push(CommunityMetrics::from_agents(
                &agents[r.clone()],
                &q_total[r.clone()],
                &s.weights,
            )?);
        }
        steps.push(record);
        if let Some(dump) = dump.as_mut() {
            for (ci, r) in ranges.iter().enumerate() {
                for (j, i) in r.clone().enumerate() {
                    dump.push(AgentRecord { step: k, community: ci, agent: j, state: agents[i], q_total: q_total[i] });
                }
            }
        }

        if k == s.horizon {
            break;
        }
        let signal = media.signal(k)?;
        exposures.clear();
        exposures.extend((0..n).map(|i| {
            let c = &infra[community_of[i]];
            Exposure { injury: c.injury, services: c.services, q_total: q_total[i] }
        }));
        agents = step_population(&agents, &network, signal, &exposures, &s.params)?;
        if s.params.noise_std > 0.0 {
            add_noise(&mut agents, s.params.noise_std, &mut rng);
        }
        if s.sharing == SharingOrder::After {
            share(&mut agents, k + 1, &mut sharing);
        }
    }

    Ok(Trajectory {
        fingerprint: s.fingerprint(),
        replication_index: seed.replication_index,
        steps,
        sharing,
        agents: dump,
    })
}

fn add_noise(agents: &mut [AgentState], std: f64, rng: &mut SimRng) {
    let vars = [StateVar::Fear, StateVar::Risk, StateVar::InfoSeeking, StateVar::Cooperation, StateVar::Flexibility];
    for a in agents {
        for var in vars {
            let x = a.get(var).get() + std * standard_normal(rng);
            a.set(var, UnitValue::saturate(x));
        }
    }
}

/// Runs replications `0..n` with seeds derived from `base_seed`, in parallel.
///
/// Replication `r` is the same whatever `n` is, and the result does not
/// depend on the number of threads.
pub fn run_monte_carlo(scenario: &Scenario, n: usize, base_seed: u64) -> Result<Ensemble> {
    run_monte_carlo_with(scenario, n, base_seed, RunOptions::default())
}

pub fn run_monte_carlo_with(scenario: &Scenario, n: usize, base_seed: u64, options: RunOptions) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::config("an ensemble needs at least one replication"));
    }
    scenario.validate()?;
    let runs: Vec<Trajectory> = (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let opts = RunOptions { dump_agents: options.dump_agents && r == 0 };
            run_simulation_with(scenario, SeedSpec::new(base_seed, r), opts)
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&[StepMetrics]> = runs.iter().map(|t| t.steps.as_slice()).collect();
    let summary = aggregate_ensemble(&refs)?;
    Ok(Ensemble { runs, summary })
}
