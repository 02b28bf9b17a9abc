//! Critical infrastructure: injury, emergency services, utility power and
//! distributed energy resources (DERs), plus the disasters that disrupt them.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentState, StateVar};
use crate::error::{Error, Result};
use crate::random::{sample_truncated_gaussian, GaussianSpec, SimRng};
use crate::unit::{clamp_unit, UnitValue};

/// Conditions a community faces at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfrastructureState {
    /// Injury factor `Z` of the disaster.
    pub injury: UnitValue,
    /// Help available from emergency services, `Q_s`.
    pub services: UnitValue,
    /// Fraction of demand the utility can serve, `Q_e`.
    pub utility: UnitValue,
}

/// A disaster striking one community over an inclusive window of steps.
///
/// Each override is sampled once, at `start`, and held for the window.
/// `initial_state` values are drawn per member agent and written into the
/// agents' state once, at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisasterEvent {
    pub community: String,
    pub start: usize,
    pub end: usize,
    pub injury: Option<GaussianSpec>,
    pub services: Option<GaussianSpec>,
    pub utility: Option<GaussianSpec>,
    /// Nominal DER availability of the community's prosumers.
    pub der: Option<GaussianSpec>,
    pub initial_state: Vec<(StateVar, GaussianSpec)>,
}

impl DisasterEvent {
    pub fn new(community: impl Into<String>, start: usize, end: usize) -> Self {
        DisasterEvent {
            community: community.into(),
            start,
            end,
            injury: None,
            services: None,
            utility: None,
            der: None,
            initial_state: Vec::new(),
        }
    }
}

/// Severity profile of one disaster type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisasterProfile {
    pub disaster_type: String,
    pub injury_factor: UnitValue,
    pub initial_fear: UnitValue,
    /// Availability of utility electricity during the disaster.
    pub availability_electricity: UnitValue,
    /// Availability of emergency services during the disaster.
    pub availability_emergency: UnitValue,
}

/// How an agent's one unit of electricity demand is supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    /// Share of demand served by the utility.
    pub w_utility: f64,
    /// Share of demand served by DERs.
    pub w_der: f64,
    /// Minimum cooperation for an agent to give away surplus DER power.
    pub share_threshold: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig { w_utility: 0.8, w_der: 0.2, share_threshold: 0.5 }
    }
}

impl EnergyConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.w_utility, self.w_der, self.share_threshold].iter().all(|x| x.is_finite());
        if !finite || self.w_utility < 0.0 || self.w_der < 0.0 {
            return Err(Error::config("energy weights must be finite and >= 0"));
        }
        if (self.w_utility + self.w_der - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!(
                "energy weights must sum to 1 (w_utility {} + w_der {})",
                self.w_utility, self.w_der
            )));
        }
        if !(0.0..=1.0).contains(&self.share_threshold) {
            return Err(Error::config("energy share_threshold must be in [0, 1]"));
        }
        Ok(())
    }
}

fn emdat_ratio(what: &str, count: f64, max: f64) -> Result<UnitValue> {
    if !count.is_finite() || !max.is_finite() {
        return Err(Error::NonFinite("EM-DAT count"));
    }
    if max <= 0.0 {
        return Err(Error::data(format!("maximum {what} must be positive, got {max}")));
    }
    if count < 0.0 || count > max {
        return Err(Error::data(format!("{what} {count} must lie in [0, {max}]")));
    }
    clamp_unit(0.5 + count / (2.0 * max))
}

/// Injury factor of a disaster type: `0.5 + deaths / (2·max_deaths)`.
pub fn injury_factor_from_emdat(deaths: f64, max_deaths: f64) -> Result<UnitValue> {
    emdat_ratio("deaths", deaths, max_deaths)
}

/// Initial fear of a disaster type: `0.5 + affected / (2·max_affected)`.
pub fn fear_from_emdat(affected: f64, max_affected: f64) -> Result<UnitValue> {
    emdat_ratio("people affected", affected, max_affected)
}

/// Fraction of an agent's demand that is served: `w_utility·Q_e + w_der·Q_DER`.
pub fn total_electricity(utility: UnitValue, der: UnitValue, config: &EnergyConfig) -> UnitValue {
    UnitValue::saturate(config.w_utility * utility.get() + config.w_der * der.get())
}

/// Result of one sharing round.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SharingOutcome {
    /// Total DER fraction moved from donors to recipients.
    pub transferred: f64,
    /// Largest `|Σ before − Σ after|` of DER over any component.
    pub max_imbalance: f64,
}

/// Redistributes `der_fraction` within each empathy component.
///
/// With `m` the component mean, members above `m` whose cooperation reaches
/// the share threshold donate their surplus and members below `m` receive in
/// proportion to their deficit. Nobody crosses `m`, and when willing surplus
/// falls short of the deficit every transfer is scaled down by the same
/// factor. The component total is preserved.
pub fn share_electricity(
    agents: &mut [AgentState],
    components: &[Vec<usize>],
    config: &EnergyConfig,
) -> SharingOutcome {
    let mut outcome = SharingOutcome::default();
    for comp in components.iter().filter(|c| c.len() > 1) {
        let before: f64 = comp.iter().map(|&i| agents[i].der_fraction.get()).sum();
        let mean = before / comp.len() as f64;
        let mut surplus = 0.0;
        let mut deficit = 0.0;
        for &i in comp {
            let a = &agents[i];
            let q = a.der_fraction.get();
            if q > mean && a.cooperation.get() >= config.share_threshold {
                surplus += q - mean;
            } else if q < mean {
                deficit += mean - q;
            }
        }
        let moved = surplus.min(deficit);
        if moved <= 0.0 {
            continue;
        }
        let give = moved / surplus;
        let take = moved / deficit;
        for &i in comp {
            let a = &mut agents[i];
            let q = a.der_fraction.get();
            let next = if q > mean && a.cooperation.get() >= config.share_threshold {
                q - (q - mean) * give
            } else if q < mean {
                q + (mean - q) * take
            } else {
                q
            };
            a.der_fraction = UnitValue::saturate(next);
        }
        let after: f64 = comp.iter().map(|&i| agents[i].der_fraction.get()).sum();
        outcome.transferred += moved;
        outcome.max_imbalance = outcome.max_imbalance.max((before - after).abs());
    }
    outcome
}

#[derive(Debug, Clone, PartialEq)]
struct Realized {
    injury: Option<UnitValue>,
    services: Option<UnitValue>,
    utility: Option<UnitValue>,
    /// One entry per community member, prosumer or not.
    der: Option<Vec<UnitValue>>,
}

#[derive(Debug, Clone, PartialEq)]
struct ScheduledEvent {
    community: usize,
    event: DisasterEvent,
    realized: Option<Realized>,
}

/// Tracks baseline conditions and disasters across one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSchedule {
    baseline: Vec<InfrastructureState>,
    members: Vec<Range<usize>>,
    baseline_der: Vec<UnitValue>,
    events: Vec<ScheduledEvent>,
}

impl EventSchedule {
    /// `community_ids[c]` names the community whose agents occupy
    /// `members[c]`; `baseline[c]` holds outside any disaster.
    pub fn new(
        community_ids: &[String],
        members: Vec<Range<usize>>,
        baseline: Vec<InfrastructureState>,
        agents: &[AgentState],
        events: &[DisasterEvent],
    ) -> Result<Self> {
        if community_ids.len() != members.len() || members.len() != baseline.len() {
            return Err(Error::config("event schedule: community dimensions disagree"));
        }
        let mut scheduled: Vec<ScheduledEvent> = Vec::with_capacity(events.len());
        for (k, ev) in events.iter().enumerate() {
            let community = community_ids.iter().position(|id| *id == ev.community).ok_or_else(|| {
                Error::config(format!("event {k}: unknown community `{}`", ev.community))
            })?;
            if ev.start > ev.end {
                return Err(Error::config(format!("event {k}: start {} after end {}", ev.start, ev.end)));
            }
            if ev.initial_state.iter().any(|(v, _)| *v == StateVar::Der) {
                return Err(Error::config(format!("event {k}: set Q_DER through `der`, not initial state")));
            }
            if let Some(other) =
                scheduled.iter().position(|s| s.community == community && s.event.start == ev.start)
            {
                return Err(Error::config(format!(
                    "events {other} and {k} both start at step {} in community `{}`",
                    ev.start, ev.community
                )));
            }
            scheduled.push(ScheduledEvent { community, event: ev.clone(), realized: None });
        }
        Ok(EventSchedule {
            baseline,
            members,
            baseline_der: agents.iter().map(|a| a.der_nominal).collect(),
            events: scheduled,
        })
    }

    /// Conditions per community at step `t`.
    ///
    /// Events starting at `t` are realized first, in declaration order: their
    /// `Z`, `Q_s`, `Q_e` draws, then one DER draw per member, then the
    /// initial-state draws per member in variable order. Where several events
    /// cover a community, the one with the latest start wins. Prosumers'
    /// nominal DER follows the winning event or reverts to baseline.
    pub fn apply_events(
        &mut self,
        t: usize,
        agents: &mut [AgentState],
        rng: &mut SimRng,
    ) -> Vec<InfrastructureState> {
        for sched in self.events.iter_mut().filter(|s| s.event.start == t && s.realized.is_none()) {
            let ev = &sched.event;
            let draw = |spec: Option<GaussianSpec>, rng: &mut SimRng| {
                spec.map(|s| sample_truncated_gaussian(s, rng))
            };
            let injury = draw(ev.injury, rng);
            let services = draw(ev.services, rng);
            let utility = draw(ev.utility, rng);
            let range = self.members[sched.community].clone();
            let der = ev
                .der
                .map(|s| range.clone().map(|_| sample_truncated_gaussian(s, rng)).collect());
            let mut overrides = ev.initial_state.clone();
            overrides.sort_by_key(|(v, _)| *v);
            for i in range {
                for (var, spec) in &overrides {
                    agents[i].set(*var, sample_truncated_gaussian(*spec, rng));
                }
            }
            sched.realized = Some(Realized { injury, services, utility, der });
        }

        let mut states = self.baseline.clone();
        for (c, state) in states.iter_mut().enumerate() {
            let active = self
                .events
                .iter()
                .filter(|s| s.community == c && s.event.start <= t && t <= s.event.end)
                .max_by_key(|s| s.event.start)
                .and_then(|s| s.realized.as_ref());
            let range = self.members[c].clone();
            match active {
                Some(r) => {
                    state.injury = r.injury.unwrap_or(state.injury);
                    state.services = r.services.unwrap_or(state.services);
                    state.utility = r.utility.unwrap_or(state.utility);
                    for (k, i) in range.enumerate() {
                        let der = match &r.der {
                            Some(d) if agents[i].is_prosumer => d[k],
                            _ => self.baseline_der[i],
                        };
                        if agents[i].der_nominal != der {
                            agents[i].set(StateVar::Der, der);
                        }
                    }
                }
                None => {
                    for i in range {
                        if agents[i].der_nominal != self.baseline_der[i] {
                            agents[i].set(StateVar::Der, self.baseline_der[i]);
                        }
                    }
                }
            }
        }
        states
    }
}

#[cfg(test)]
#[allow(clippy::single_range_in_vec_init)]
mod tests {
    use super::*;
    use crate::random::SeedSpec;

    fn u(x: f64) -> UnitValue {
        UnitValue::new(x).unwrap()
    }

    #[test]
    fn emdat_formulas() {
        assert_eq!(injury_factor_from_emdat(1234.0, 1234.0).unwrap().get(), 1.0);
        assert_eq!(injury_factor_from_emdat(0.0, 1234.0).unwrap().get(), 0.5);
        assert_eq!(injury_factor_from_emdat(500.0, 1000.0).unwrap().get(), 0.75);
        assert_eq!(fear_from_emdat(7.0, 7.0).unwrap().get(), 1.0);
        assert_eq!(fear_from_emdat(0.0, 7.0).unwrap().get(), 0.5);
        // Drought: affected / max ≈ 0.67746
        let f = fear_from_emdat(0.67746 * 1e6, 1e6).unwrap().get();
        assert!((f - 0.83873).abs() < 1e-10);
    }

    #[test]
    fn emdat_errors() {
        assert!(injury_factor_from_emdat(11.0, 10.0).is_err());
        assert!(injury_factor_from_emdat(1.0, 0.0).is_err());
        assert!(fear_from_emdat(-1.0, 10.0).is_err());
        assert!(fear_from_emdat(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn electricity_mix() {
        let cfg = EnergyConfig::default();
        assert_eq!(total_electricity(u(1.0), u(1.0), &cfg).get(), 1.0);
        assert!((total_electricity(u(0.5), u(1.0), &cfg).get() - 0.6).abs() < 1e-15);
        assert_eq!(total_electricity(u(0.0), u(0.0), &cfg).get(), 0.0);
    }

    #[test]
    fn energy_config_validation() {
        assert!(EnergyConfig::default().validate().is_ok());
        let bad = EnergyConfig { w_utility: 0.7, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    fn agents_with(der: &[f64], coop: &[f64]) -> Vec<AgentState> {
        der.iter()
            .zip(coop)
            .map(|(&d, &c)| {
                let mut a = AgentState::uniform(u(0.5));
                a.set(StateVar::Der, u(d));
                a.cooperation = u(c);
                a.is_prosumer = d > 0.0;
                a
            })
            .collect()
    }

    fn ders(agents: &[AgentState]) -> Vec<f64> {
        agents.iter().map(|a| a.der_fraction.get()).collect()
    }

    #[test]
    fn sharing_equalizes_cooperative_group() {
        let mut agents = agents_with(&[0.0, 0.5, 1.0], &[0.9; 3]);
        let out = share_electricity(&mut agents, &[vec![0, 1, 2]], &EnergyConfig::default());
        assert_eq!(ders(&agents), vec![0.5, 0.5, 0.5]);
        assert_eq!(out.transferred, 0.5);
        assert_eq!(out.max_imbalance, 0.0);
    }

    #[test]
    fn selfish_donor_keeps_surplus() {
        let mut agents = agents_with(&[0.0, 0.5, 1.0], &[0.9, 0.9, 0.2]);
        let out = share_electricity(&mut agents, &[vec![0, 1, 2]], &EnergyConfig::default());
        assert_eq!(ders(&agents), vec![0.0, 0.5, 1.0]);
        assert_eq!(out.transferred, 0.0);
    }

    #[test]
    fn singleton_is_untouched() {
        let mut agents = agents_with(&[0.3], &[1.0]);
        share_electricity(&mut agents, &[vec![0]], &EnergyConfig::default());
        assert_eq!(ders(&agents), vec![0.3]);
    }

    #[test]
    fn partial_surplus_is_scaled() {
        // mean 0.5; willing surplus 0.2 (agent 3), deficit 0.6; agent 2 is
        // unwilling and keeps its 0.9.
        let mut agents = agents_with(&[0.2, 0.2, 0.9, 0.7], &[0.9, 0.9, 0.1, 0.9]);
        let out = share_electricity(&mut agents, &[vec![0, 1, 2, 3]], &EnergyConfig::default());
        let d = ders(&agents);
        assert!((out.transferred - 0.2).abs() < 1e-15);
        assert!((d[0] - 0.3).abs() < 1e-12 && (d[1] - 0.3).abs() < 1e-12);
        assert_eq!(d[2], 0.9);
        assert!((d[3] - 0.5).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn sharing_conserves_and_respects_mean(
            der in proptest::collection::vec(0.0f64..=1.0, 1..12),
            coop in proptest::collection::vec(0.0f64..=1.0, 12),
        ) {
            let n = der.len();
            let mut agents = agents_with(&der, &coop[..n]);
            let before: f64 = der.iter().sum();
            let mean = before / n as f64;
            let out = share_electricity(&mut agents, &[(0..n).collect()], &EnergyConfig::default());
            let after: f64 = agents.iter().map(|a| a.der_fraction.get()).sum();
            proptest::prop_assert!((before - after).abs() < 1e-12);
            proptest::prop_assert!(out.max_imbalance < 1e-12);
            for (a, &d0) in agents.iter().zip(&der) {
                let d1 = a.der_fraction.get();
                if d0 > mean { proptest::prop_assert!(d1 >= mean - 1e-12 && d1 <= d0); }
                if d0 < mean { proptest::prop_assert!(d1 <= mean + 1e-12 && d1 >= d0); }
            }
        }
    }

    fn baseline() -> InfrastructureState {
        InfrastructureState { injury: u(0.01), services: u(0.9), utility: u(0.9) }
    }

    #[test]
    fn events_override_within_window() {
        let ids = vec!["C1".to_string(), "C5".to_string()];
        let mut agents = agents_with(&[0.9, 0.9, 0.8, 0.8], &[0.5; 4]);
        let mut outage = DisasterEvent::new("C5", 100, 300);
        outage.utility = Some(GaussianSpec::constant(0.0));
        let mut quake = DisasterEvent::new("C1", 0, 300);
        quake.services = Some(GaussianSpec::constant(0.0));
        quake.utility = Some(GaussianSpec::constant(0.0));
        quake.injury = Some(GaussianSpec::new(0.9, 0.1).unwrap());
        quake.der = Some(GaussianSpec::constant(0.5));
        let mut sched = EventSchedule::new(
            &ids,
            vec![0..2, 2..4],
            vec![baseline(); 2],
            &agents,
            &[quake, outage],
        )
        .unwrap();
        let mut rng = SeedSpec::new(0, 0).rng();

        let s0 = sched.apply_events(0, &mut agents, &mut rng);
        assert_eq!(s0[0].services.get(), 0.0);
        assert_eq!(s0[0].utility.get(), 0.0);
        assert_eq!(s0[1], baseline());
        assert_eq!(agents[0].der_nominal.get(), 0.5);
        assert_eq!(agents[2].der_nominal.get(), 0.8);

        let z0 = s0[0].injury;
        let s99 = sched.apply_events(99, &mut agents, &mut rng);
        assert_eq!(s99[0].injury, z0, "overrides are held, not resampled");
        assert_eq!(s99[1].utility.get(), 0.9);

        let s100 = sched.apply_events(100, &mut agents, &mut rng);
        assert_eq!(s100[1].utility.get(), 0.0);
        assert_eq!(s100[1].services.get(), 0.9);

        // after the window everything reverts
        let s301 = sched.apply_events(301, &mut agents, &mut rng);
        assert_eq!(s301, vec![baseline(); 2]);
        assert_eq!(agents[0].der_nominal.get(), 0.9);
    }

    #[test]
    fn latest_event_wins_and_equal_starts_rejected() {
        let ids = vec!["A".to_string()];
        let mut agents = agents_with(&[0.5], &[0.5]);
        let mut first = DisasterEvent::new("A", 0, 50);
        first.services = Some(GaussianSpec::constant(0.2));
        let mut second = DisasterEvent::new("A", 10, 20);
        second.services = Some(GaussianSpec::constant(0.7));
        let mut sched = EventSchedule::new(
            &ids,
            vec![0..1],
            vec![baseline()],
            &agents,
            &[first.clone(), second.clone()],
        )
        .unwrap();
        let mut rng = SeedSpec::new(0, 0).rng();
        let services: Vec<f64> = (0..30)
            .map(|t| sched.apply_events(t, &mut agents, &mut rng)[0].services.get())
            .collect();
        assert_eq!(services[5], 0.2);
        assert_eq!(services[15], 0.7);
        assert_eq!(services[25], 0.2);

        second.start = 0;
        let err = EventSchedule::new(&ids, vec![0..1], vec![baseline()], &agents, &[first, second]);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn initial_state_applied_once() {
        let ids = vec!["A".to_string()];
        let mut agents = agents_with(&[0.5, 0.5], &[0.5, 0.5]);
        let mut ev = DisasterEvent::new("A", 3, 10);
        ev.initial_state.push((StateVar::Fear, GaussianSpec::constant(0.9)));
        let mut sched =
            EventSchedule::new(&ids, vec![0..2], vec![baseline()], &agents, &[ev]).unwrap();
        let mut rng = SeedSpec::new(0, 0).rng();
        sched.apply_events(2, &mut agents, &mut rng);
        assert_eq!(agents[0].fear.get(), 0.5);
        sched.apply_events(3, &mut agents, &mut rng);
        assert_eq!(agents[0].fear.get(), 0.9);
        agents[0].fear = u(0.1);
        sched.apply_events(4, &mut agents, &mut rng);
        assert_eq!(agents[0].fear.get(), 0.1);
    }

    #[test]
    fn unknown_community_rejected() {
        let agents = agents_with(&[0.5], &[0.5]);
        let ev = DisasterEvent::new("nowhere", 0, 1);
        let res = EventSchedule::new(&["A".into()], vec![0..1], vec![baseline()], &agents, &[ev]);
        assert!(res.is_err());
    }
}
