//! Well-being and resilience measures, per agent, per community and over an
//! ensemble of replications.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::AgentState;
use crate::error::{Error, Result};
use crate::unit::UnitValue;

/// Weights of mental well-being's components and of the resilience mix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellBeingWeights {
    /// Weight on calm, `1 − E`.
    pub calm: f64,
    pub flexibility: f64,
    pub cooperation: f64,
    pub experience: f64,
    pub mental: f64,
    pub physical: f64,
}

impl Default for WellBeingWeights {
    fn default() -> Self {
        WellBeingWeights {
            calm: 0.25,
            flexibility: 0.25,
            cooperation: 0.25,
            experience: 0.25,
            mental: 0.5,
            physical: 0.5,
        }
    }
}

impl WellBeingWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.calm, self.flexibility, self.cooperation, self.experience, self.mental, self.physical];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config("well-being weights must be finite and >= 0"));
        }
        let mental = self.calm + self.flexibility + self.cooperation + self.experience;
        if (mental - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("mental well-being weights sum to {mental}, not 1")));
        }
        if (self.mental + self.physical - 1.0).abs() > 1e-12 {
            return Err(Error::config("resilience weights mental + physical must sum to 1"));
        }
        Ok(())
    }
}

/// Weighted mean of `1 − E`, `F`, `C` and `L`.
pub fn mental_wellbeing(s: &AgentState, w: &WellBeingWeights) -> UnitValue {
    UnitValue::saturate(
        w.calm * (1.0 - s.fear.get())
            + w.flexibility * s.flexibility.get()
            + w.cooperation * s.cooperation.get()
            + w.experience * s.experience.get(),
    )
}

pub fn physical_wellbeing(s: &AgentState) -> UnitValue {
    s.physical_health
}

fn composite(s: &AgentState, w: &WellBeingWeights) -> f64 {
    w.mental * mental_wellbeing(s, w).get() + w.physical * physical_wellbeing(s).get()
}

/// Community mean of the mental/physical blend.
pub fn community_resilience(states: &[AgentState], w: &WellBeingWeights) -> Result<UnitValue> {
    if states.is_empty() {
        return Err(Error::config("resilience of an empty community"));
    }
    let mut values: Vec<f64> = states.iter().map(|s| composite(s, w)).collect();
    Ok(UnitValue::saturate(stable_mean(&mut values)))
}

/// Quantities recorded per community and step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Fear,
    Risk,
    InfoSeeking,
    Cooperation,
    Flexibility,
    Experience,
    PhysicalHealth,
    QTotal,
    MentalWb,
    PhysicalWb,
    Resilience,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::Fear,
        Metric::Risk,
        Metric::InfoSeeking,
        Metric::Cooperation,
        Metric::Flexibility,
        Metric::Experience,
        Metric::PhysicalHealth,
        Metric::QTotal,
        Metric::MentalWb,
        Metric::PhysicalWb,
        Metric::Resilience,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Fear => "fear",
            Metric::Risk => "risk",
            Metric::InfoSeeking => "info_seeking",
            Metric::Cooperation => "cooperation",
            Metric::Flexibility => "flexibility",
            Metric::Experience => "experience",
            Metric::PhysicalHealth => "physical_health",
            Metric::QTotal => "q_total",
            Metric::MentalWb => "mental_wb",
            Metric::PhysicalWb => "physical_wb",
            Metric::Resilience => "resilience",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn of(self, s: &AgentState, q_total: UnitValue, w: &WellBeingWeights) -> f64 {
        match self {
            Metric::Fear => s.fear.get(),
            Metric::Risk => s.risk.get(),
            Metric::InfoSeeking => s.info_seeking.get(),
            Metric::Cooperation => s.cooperation.get(),
            Metric::Flexibility => s.flexibility.get(),
            Metric::Experience => s.experience.get(),
            Metric::PhysicalHealth => s.physical_health.get(),
            Metric::QTotal => q_total.get(),
            Metric::MentalWb => mental_wellbeing(s, w).get(),
            Metric::PhysicalWb => physical_wellbeing(s).get(),
            Metric::Resilience => composite(s, w),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown metric `{s}`")))
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Order-independent: values are summed in sorted order.
    pub fn of(values: &mut [f64]) -> Stat {
        if values.is_empty() {
            return Stat::default();
        }
        let mean = stable_mean(values);
        if values[0] == values[values.len() - 1] {
            // sorted, so every value is equal; rounding must not invent spread
            return Stat { mean: values[0], std: 0.0 };
        }
        let mut dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = stable_mean(&mut dev);
        Stat { mean, std: var.sqrt() }
    }

    /// Same as [`Stat::of`] but summing in the given order.
    fn in_order(values: &[f64]) -> Stat {
        if values.is_empty() {
            return Stat::default();
        }
        let n = values.len() as f64;
        if values.iter().all(|&v| v == values[0]) {
            return Stat { mean: values[0], std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// All metrics of one community at one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommunityMetrics {
    values: [Stat; 11],
}

impl CommunityMetrics {
    /// Statistics across the community's agents.
    pub fn from_agents(
        agents: &[AgentState],
        q_total: &[UnitValue],
        w: &WellBeingWeights,
    ) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::config("metrics of an empty community"));
        }
        if agents.len() != q_total.len() {
            return Err(Error::config("metrics: agent and q_total counts differ"));
        }
        let mut out = CommunityMetrics::default();
        let mut buf = Vec::with_capacity(agents.len());
        for m in Metric::ALL {
            buf.clear();
            buf.extend(agents.iter().zip(q_total).map(|(s, q)| m.of(s, *q, w)));
            out.values[m.index()] = Stat::in_order(&buf);
        }
        Ok(out)
    }

    pub fn get(&self, m: Metric) -> Stat {
        self.values[m.index()]
    }

    pub fn mean(&self, m: Metric) -> f64 {
        self.values[m.index()].mean
    }

    pub fn set(&mut self, m: Metric, s: Stat) {
        self.values[m.index()] = s;
    }
}

/// Metrics of every community at one step, in scenario order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepMetrics {
    pub communities: Vec<CommunityMetrics>,
}

/// Pointwise statistics across replications of each community mean.
///
/// The result's `std` is the spread of the community mean between
/// replications, not within a community. Replication order does not affect
/// a single bit of the output.
pub fn aggregate_ensemble(runs: &[&[StepMetrics]]) -> Result<Vec<StepMetrics>> {
    let first = runs.first().ok_or_else(|| Error::config("aggregate of zero replications"))?;
    let shape: Vec<usize> = first.iter().map(|s| s.communities.len()).collect();
    for (r, run) in runs.iter().enumerate() {
        if run.len() != shape.len()
            || run.iter().zip(&shape).any(|(s, &n)| s.communities.len() != n)
        {
            return Err(Error::config(format!("replication {r} has a different shape")));
        }
    }
    let mut buf = Vec::with_capacity(runs.len());
    let mut out = Vec::with_capacity(shape.len());
    for (t, &n) in shape.iter().enumerate() {
        let mut step = StepMetrics { communities: vec![CommunityMetrics::default(); n] };
        for (c, cm) in step.communities.iter_mut().enumerate() {
            for m in Metric::ALL {
                buf.clear();
                buf.extend(runs.iter().map(|run| run[t].communities[c].mean(m)));
                cm.set(m, Stat::of(&mut buf));
            }
        }
        out.push(step);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(x: f64) -> UnitValue {
        UnitValue::new(x).unwrap()
    }

    fn table_one() -> AgentState {
        let mut s = AgentState::uniform(u(0.5));
        s.flexibility = UnitValue::ONE;
        s.physical_health = UnitValue::ONE;
        s
    }

    #[test]
    fn mental_examples() {
        let w = WellBeingWeights::default();
        let mut best = AgentState::uniform(UnitValue::ONE);
        best.fear = UnitValue::ZERO;
        assert_eq!(mental_wellbeing(&best, &w).get(), 1.0);
        let mut worst = AgentState::uniform(UnitValue::ZERO);
        worst.fear = UnitValue::ONE;
        assert_eq!(mental_wellbeing(&worst, &w).get(), 0.0);
        assert_eq!(mental_wellbeing(&table_one(), &w).get(), 0.625);
    }

    #[test]
    fn physical_is_health() {
        let mut s = table_one();
        assert_eq!(physical_wellbeing(&s).get(), 1.0);
        s.physical_health = u(0.938);
        assert_eq!(physical_wellbeing(&s).get(), 0.938);
    }

    #[test]
    fn resilience_examples() {
        let w = WellBeingWeights::default();
        let mut best = AgentState::uniform(UnitValue::ONE);
        best.fear = UnitValue::ZERO;
        assert_eq!(community_resilience(&[best; 3], &w).unwrap().get(), 1.0);
        assert_eq!(community_resilience(&[table_one(); 3], &w).unwrap().get(), 0.8125);
        let mut worst = AgentState::uniform(UnitValue::ZERO);
        worst.fear = UnitValue::ONE;
        assert_eq!(community_resilience(&[best, worst], &w).unwrap().get(), 0.5);
        assert!(community_resilience(&[], &w).is_err());
    }

    #[test]
    fn weights_validate() {
        assert!(WellBeingWeights::default().validate().is_ok());
        let bad = WellBeingWeights { calm: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
    }

    fn single(values: &[f64]) -> Vec<StepMetrics> {
        values
            .iter()
            .map(|&v| {
                let mut cm = CommunityMetrics::default();
                cm.set(Metric::Fear, Stat { mean: v, std: 0.0 });
                StepMetrics { communities: vec![cm] }
            })
            .collect()
    }

    #[test]
    fn ensemble_examples() {
        let a = single(&[0.4, 0.3]);
        let b = single(&[0.6, 0.3]);
        let one = aggregate_ensemble(&[&a]).unwrap();
        assert_eq!(one[0].communities[0].get(Metric::Fear), Stat { mean: 0.4, std: 0.0 });
        let same = aggregate_ensemble(&[&a, &a]).unwrap();
        assert_eq!(same[1].communities[0].get(Metric::Fear).std, 0.0);
        let two = aggregate_ensemble(&[&a, &b]).unwrap();
        let s = two[0].communities[0].get(Metric::Fear);
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert!((s.std - 0.1).abs() < 1e-15);
        assert!(aggregate_ensemble(&[&a, &single(&[0.1])]).is_err());
        assert!(aggregate_ensemble(&[]).is_err());
    }

    fn arb_state() -> impl Strategy<Value = AgentState> {
        prop::array::uniform8(0.0f64..=1.0).prop_map(|v| {
            let mut s = AgentState::uniform(UnitValue::ZERO);
            s.fear = u(v[0]);
            s.risk = u(v[1]);
            s.info_seeking = u(v[2]);
            s.cooperation = u(v[3]);
            s.openness = u(v[4]);
            s.experience = u(v[5]);
            s.flexibility = u(v[6]);
            s.physical_health = u(v[7]);
            s
        })
    }

    proptest! {
        #[test]
        fn mental_monotone(s in arb_state(), d in 0.0f64..0.5) {
            let w = WellBeingWeights::default();
            let base = mental_wellbeing(&s, &w).get();
            let mut t = s;
            t.fear = UnitValue::saturate(s.fear.get() + d);
            prop_assert!(mental_wellbeing(&t, &w).get() <= base + 1e-15);
            for f in [
                |s: &mut AgentState, d: f64| s.flexibility = UnitValue::saturate(s.flexibility.get() + d),
                |s: &mut AgentState, d: f64| s.cooperation = UnitValue::saturate(s.cooperation.get() + d),
                |s: &mut AgentState, d: f64| s.experience = UnitValue::saturate(s.experience.get() + d),
            ] {
                let mut t = s;
                f(&mut t, d);
                prop_assert!(mental_wellbeing(&t, &w).get() >= base - 1e-15);
            }
        }

        #[test]
        fn resilience_permutation_invariant(
            states in prop::collection::vec(arb_state(), 1..12), rot in 0usize..12,
        ) {
            let w = WellBeingWeights::default();
            let mut rotated = states.clone();
            let k = rot % states.len();
            rotated.rotate_left(k);
            let a = community_resilience(&states, &w).unwrap();
            let b = community_resilience(&rotated, &w).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a.get()));
        }

        #[test]
        fn community_metrics_in_range(states in prop::collection::vec(arb_state(), 1..12)) {
            let w = WellBeingWeights::default();
            let q = vec![u(0.7); states.len()];
            let cm = CommunityMetrics::from_agents(&states, &q, &w).unwrap();
            for m in Metric::ALL {
                let s = cm.get(m);
                prop_assert!((0.0..=1.0).contains(&s.mean));
                prop_assert!(s.std >= 0.0);
            }
        }

        #[test]
        fn ensemble_order_invariant(
            values in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 3), 1..8),
            rot in 0usize..8,
        ) {
            let runs: Vec<Vec<StepMetrics>> = values.iter().map(|v| single(v)).collect();
            let mut refs: Vec<&[StepMetrics]> = runs.iter().map(|r| r.as_slice()).collect();
            let a = aggregate_ensemble(&refs).unwrap();
            let k = rot % refs.len();
            refs.rotate_left(k);
            let b = aggregate_ensemble(&refs).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn identical_values_have_no_spread(x in 0.0f64..1.0, n in 1usize..200) {
            let mut v = vec![x; n];
            prop_assert_eq!(Stat::of(&mut v), Stat { mean: x, std: 0.0 });
            prop_assert_eq!(Stat::in_order(&v), Stat { mean: x, std: 0.0 });
        }
    }
}
