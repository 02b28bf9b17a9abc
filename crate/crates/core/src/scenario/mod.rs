//! Experiment descriptions: communities, empathy, media, disasters and
//! parameters, plus the built-in case studies and the disaster catalog.

mod builtin;
mod catalog;
mod config;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::StateVar;
use crate::dynamics::DynamicsParams;
use crate::error::{Error, Result};
use crate::infrastructure::{DisasterEvent, EnergyConfig};
use crate::media::MediaProfile;
use crate::metrics::WellBeingWeights;
use crate::random::GaussianSpec;
use crate::unit::UnitValue;

pub use builtin::{
    builtin, builtin_names, case_study_1, case_study_2, emdat_scenario, population_study, Variant,
    POPULATION_GRID,
};
pub use catalog::{bundled_catalog, load_disaster_catalog, Catalog, BUNDLED_CATALOG};

/// When DER sharing happens relative to the dynamics within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharingOrder {
    /// Share, then let agents react to the shared supply.
    #[default]
    Before,
    /// Agents react to last step's allocation; sharing follows the update.
    After,
}

/// One community and the distributions its agents are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunitySpec {
    pub id: String,
    pub population: usize,
    /// Initial distribution of each [`StateVar`], indexed in `StateVar::ALL` order.
    pub init: [GaussianSpec; 9],
    /// Leading share of the agents that own DERs; the rest have none.
    pub prosumer_fraction: UnitValue,
    /// Conditions outside any disaster, drawn once per replication.
    pub injury: GaussianSpec,
    pub services: GaussianSpec,
    pub utility: GaussianSpec,
    /// Per-agent replacements of `init`, keyed by 0-based agent index.
    pub agents: BTreeMap<usize, BTreeMap<StateVar, GaussianSpec>>,
}

impl CommunitySpec {
    /// Default community: mental variables 0.5, full flexibility, health and
    /// DER access, `Z = 1`, `Q_s = 1`, `Q_e = 0.5`.
    pub fn table_one(id: impl Into<String>, population: usize) -> Self {
        let c = GaussianSpec::constant;
        let mut init = [c(0.5); 9];
        init[StateVar::Flexibility as usize] = c(1.0);
        init[StateVar::PhysicalHealth as usize] = c(1.0);
        init[StateVar::Der as usize] = c(1.0);
        CommunitySpec {
            id: id.into(),
            population,
            init,
            prosumer_fraction: UnitValue::ONE,
            injury: c(1.0),
            services: c(1.0),
            utility: c(0.5),
            agents: BTreeMap::new(),
        }
    }

    pub fn init(&self, var: StateVar) -> GaussianSpec {
        self.init[var as usize]
    }

    pub fn set_init(&mut self, var: StateVar, spec: GaussianSpec) {
        self.init[var as usize] = spec;
    }

    /// Distribution of `var` for agent `k` (0-based).
    pub fn agent_init(&self, k: usize, var: StateVar) -> GaussianSpec {
        self.agents.get(&k).and_then(|m| m.get(&var)).copied().unwrap_or(self.init(var))
    }

    pub fn set_agent(&mut self, k: usize, var: StateVar, spec: GaussianSpec) {
        self.agents.entry(k).or_default().insert(var, spec);
    }

    /// Number of agents with DER access: `round(prosumer_fraction·population)`.
    pub fn prosumers(&self) -> usize {
        (self.prosumer_fraction.get() * self.population as f64).round() as usize
    }
}

/// Empathy distributions between (and within) communities.
///
/// Blocks are keyed by community index with `a ≤ b`. A missing diagonal
/// block means full empathy, `γ = 1`; a missing off-diagonal block means none.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpathySpec {
    pub blocks: BTreeMap<(usize, usize), GaussianSpec>,
}

impl EmpathySpec {
    pub fn set(&mut self, a: usize, b: usize, spec: GaussianSpec) {
        self.blocks.insert((a.min(b), a.max(b)), spec);
    }

    /// Distribution of `γ` between members of `a` and `b`, `None` for no edges.
    pub fn block(&self, a: usize, b: usize) -> Option<GaussianSpec> {
        match self.blocks.get(&(a.min(b), a.max(b))) {
            Some(spec) if spec.is_zero() => None,
            Some(spec) => Some(*spec),
            None if a == b => Some(GaussianSpec::constant(1.0)),
            None => None,
        }
    }
}

/// A complete, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub sharing: SharingOrder,
    pub params: DynamicsParams,
    pub energy: EnergyConfig,
    pub weights: WellBeingWeights,
    pub media: MediaProfile,
    pub communities: Vec<CommunitySpec>,
    pub empathy: EmpathySpec,
    pub events: Vec<DisasterEvent>,
}

impl Default for Scenario {
    /// The nine-agent community: three areas of three agents.
    fn default() -> Self {
        Scenario {
            horizon: 300,
            replications: 100,
            seed: 0,
            sharing: SharingOrder::Before,
            params: DynamicsParams::default(),
            energy: EnergyConfig::default(),
            weights: WellBeingWeights::default(),
            media: MediaProfile::constant(UnitValue::ONE, UnitValue::ZERO),
            communities: (1..=3).map(|k| CommunitySpec::table_one(format!("area{k}"), 3)).collect(),
            empathy: EmpathySpec::default(),
            events: Vec::new(),
        }
    }
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Self> {
        config::parse(text)
    }

    /// Canonical document; `Scenario::parse(&s.render())` gives back `s`.
    pub fn render(&self) -> String {
        config::render(self)
    }

    /// Hex SHA-256 of the canonical document.
    pub fn fingerprint(&self) -> String {
        Sha256::digest(self.render().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Sets one numeric field addressed by a dotted path such as
    /// `community.1.M_C.mean` or `params.diffusion`, then revalidates.
    ///
    /// Communities may be named by id or by 1-based position. A trailing
    /// `.mean` or `.std` selects half of a distribution.
    pub fn set_path(&mut self, path: &str, value: f64) -> Result<()> {
        *self = config::set_path(self, path, value)?;
        Ok(())
    }

    pub fn population(&self) -> usize {
        self.communities.iter().map(|c| c.population).sum()
    }

    pub fn community_index(&self, id: &str) -> Option<usize> {
        self.communities.iter().position(|c| c.id == id)
    }

    /// Changes the horizon. Events running to the old horizon run to the new
    /// one, windows are clipped and events starting past the end are dropped.
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        let old = self.horizon;
        self.events.retain(|e| e.start <= horizon);
        for e in &mut self.events {
            if e.end == old || e.end > horizon {
                e.end = horizon;
            }
        }
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("simulation.horizon must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::config("simulation.replications must be at least 1"));
        }
        self.params.validate()?;
        self.energy.validate()?;
        self.weights.validate()?;
        self.media.validate()?;
        if self.communities.is_empty() {
            return Err(Error::config("scenario has no communities"));
        }
        for (k, c) in self.communities.iter().enumerate() {
            if c.id.is_empty() || c.id.contains([':', '.']) {
                return Err(Error::config(format!("community {}: id `{}` must be non-empty without `:` or `.`", k + 1, c.id)));
            }
            if self.communities[..k].iter().any(|o| o.id == c.id) {
                return Err(Error::config(format!("community `{}` declared twice", c.id)));
            }
            if c.population == 0 {
                return Err(Error::config(format!("community.{}.population must be at least 1", c.id)));
            }
            if let Some((&a, _)) = c.agents.iter().find(|(&a, _)| a >= c.population) {
                return Err(Error::config(format!(
                    "community.{}.agent.{} is beyond the population of {}",
                    c.id,
                    a + 1,
                    c.population
                )));
            }
        }
        let n = self.communities.len();
        if let Some(&(a, b)) = self.empathy.blocks.keys().find(|(a, b)| *b >= n || a > b) {
            return Err(Error::config(format!("empathy block ({a}, {b}) is out of range")));
        }
        for (k, ev) in self.events.iter().enumerate() {
            let name = k + 1;
            if self.community_index(&ev.community).is_none() {
                return Err(Error::config(format!("event.{name}: unknown community `{}`", ev.community)));
            }
            if ev.start > ev.end {
                return Err(Error::config(format!("event.{name}: start {} is after end {}", ev.start, ev.end)));
            }
            if ev.end > self.horizon {
                return Err(Error::config(format!(
                    "event.{name}: end {} exceeds the horizon {}",
                    ev.end, self.horizon
                )));
            }
            if ev.initial_state.iter().any(|(v, _)| *v == StateVar::Der) {
                return Err(Error::config(format!("event.{name}: set Q_DER directly, not under initial")));
            }
            if let Some(j) =
                self.events[..k].iter().position(|o| o.community == ev.community && o.start == ev.start)
            {
                return Err(Error::config(format!(
                    "event.{} and event.{name} both start at step {} in `{}`",
                    j + 1,
                    ev.start,
                    ev.community
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_case_study_1() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.population(), 9);
        assert_eq!(s.communities[0].init(StateVar::Fear), GaussianSpec::constant(0.5));
        assert_eq!(s.communities[0].utility, GaussianSpec::constant(0.5));
        assert_eq!(s.empathy.block(0, 0), Some(GaussianSpec::constant(1.0)));
        assert_eq!(s.empathy.block(0, 1), None);
    }

    #[test]
    fn zero_block_has_no_edges() {
        let mut e = EmpathySpec::default();
        e.set(1, 1, GaussianSpec::constant(0.0));
        e.set(2, 0, GaussianSpec::constant(0.3));
        assert_eq!(e.block(1, 1), None);
        assert_eq!(e.block(0, 2), Some(GaussianSpec::constant(0.3)));
    }

    #[test]
    fn horizon_change_clips_events() {
        let mut s = Scenario::default();
        s.events.push(DisasterEvent::new("area1", 0, 300));
        s.events.push(DisasterEvent::new("area2", 50, 120));
        s.events.push(DisasterEvent::new("area3", 200, 250));
        let short = s.clone().with_horizon(100);
        assert_eq!(short.events.len(), 2);
        assert_eq!((short.events[0].end, short.events[1].end), (100, 100));
        short.validate().unwrap();
        let long = s.with_horizon(500);
        assert_eq!(long.events[0].end, 500);
        assert_eq!(long.events[1].end, 120);
    }

    #[test]
    fn validation_errors() {
        let mut s = Scenario::default();
        s.events.push(DisasterEvent::new("area1", 0, 301));
        assert!(s.validate().is_err());
        s.events[0].end = 300;
        s.events.push(DisasterEvent::new("area1", 0, 10));
        assert!(s.validate().unwrap_err().to_string().contains("both start"));
        s.events.pop();
        s.events.push(DisasterEvent::new("nowhere", 0, 10));
        assert!(s.validate().unwrap_err().to_string().contains("unknown community"));

        let mut s = Scenario::default();
        s.communities[1].id = "area1".into();
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.communities[0].set_agent(3, StateVar::Fear, GaussianSpec::constant(0.1));
        assert!(s.validate().is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = Scenario::default();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
        b.seed = 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
