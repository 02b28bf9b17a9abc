//! Named scenarios for the reference experiments.
//!
//! Case study 1 is the nine-agent community of three areas; case study 2 is
//! the society of six communities. Sweeps such as `case1:flexibility` yield
//! several labelled variants that are run side by side.

use super::catalog::bundled_catalog;
use super::{CommunitySpec, Scenario};
use crate::agent::StateVar;
use crate::error::{Error, Result};
use crate::infrastructure::{DisasterEvent, DisasterProfile};
use crate::media::{MediaKind, MediaProfile, PositiveFraction};
use crate::random::GaussianSpec;
use crate::unit::UnitValue;

/// One labelled scenario of a named experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub scenario: Scenario,
}

impl Variant {
    fn new(label: impl Into<String>, scenario: Scenario) -> Self {
        Variant { label: label.into(), scenario }
    }
}

/// Populations of the population/empathy grid; each is run with
/// empathy 0.2 and 0.9.
pub const POPULATION_GRID: [usize; 6] = [3, 6, 20, 50, 60, 500];
const EMPATHY_GRID: [f64; 2] = [0.2, 0.9];

const CASE1: [&str; 17] = [
    "default",
    "flexibility",
    "cooperation",
    "experience",
    "coop-exp",
    "sharing",
    "services",
    "services-baseline",
    "services-drop",
    "injury-high",
    "news-positive",
    "media",
    "media-constant",
    "media-sudden",
    "media-gradual",
    "empathy",
    "empathy-low",
];

fn c(x: f64) -> GaussianSpec {
    GaussianSpec::constant(x)
}

fn n(mean: f64, std: f64) -> GaussianSpec {
    GaussianSpec::new(mean, std).expect("literal spec")
}

fn unit(x: f64) -> UnitValue {
    UnitValue::new(x).expect("literal unit value")
}

fn set_all(s: &mut Scenario, var: StateVar, spec: GaussianSpec) {
    for community in &mut s.communities {
        community.set_init(var, spec);
    }
}

fn sweep(var: StateVar, values: &[f64]) -> Vec<Variant> {
    values
        .iter()
        .map(|&x| {
            let mut s = Scenario::default();
            set_all(&mut s, var, c(x));
            Variant::new(format!("{}={x}", var.key()), s)
        })
        .collect()
}

fn services_baseline() -> Scenario {
    let mut s = Scenario::default();
    for area in &mut s.communities {
        area.services = c(1.0);
        area.injury = c(0.1);
    }
    s
}

/// The three agents of every area get `values[k]` for each variable in `vars`.
fn per_agent(s: &mut Scenario, vars: &[StateVar], values: [f64; 3]) {
    for area in &mut s.communities {
        for (k, &x) in values.iter().enumerate() {
            for &var in vars {
                area.set_agent(k, var, c(x));
            }
        }
    }
}

fn empathy_variant(gamma: f64) -> Scenario {
    let mut s = Scenario::default();
    let vars = [
        StateVar::Fear,
        StateVar::Risk,
        StateVar::InfoSeeking,
        StateVar::Cooperation,
        StateVar::Openness,
        StateVar::Experience,
        StateVar::Flexibility,
        StateVar::PhysicalHealth,
        StateVar::Der,
    ];
    per_agent(&mut s, &vars, [0.0, 0.5, 1.0]);
    for a in 0..s.communities.len() {
        s.empathy.set(a, a, c(gamma));
    }
    s
}

/// Case study 1: nine agents in three areas facing a hurricane.
pub fn case_study_1(variant: &str) -> Result<Vec<Variant>> {
    let one = |label: &str, s: Scenario| Ok(vec![Variant::new(label, s)]);
    match variant {
        "default" => one("default", Scenario::default()),
        "flexibility" => Ok(sweep(StateVar::Flexibility, &[0.0, 0.5, 1.0])),
        "cooperation" => Ok(sweep(StateVar::Cooperation, &[0.0, 0.5, 1.0])),
        "experience" => Ok(sweep(StateVar::Experience, &[0.0, 0.5, 1.0])),
        "coop-exp" => Ok([(1.0, 0.0), (0.5, 0.5), (1.0, 1.0)]
            .into_iter()
            .map(|(coop, exp)| {
                let mut s = Scenario::default();
                set_all(&mut s, StateVar::Cooperation, c(coop));
                set_all(&mut s, StateVar::Experience, c(exp));
                Variant::new(format!("M_C={coop} M_L={exp}"), s)
            })
            .collect()),
        "sharing" => Ok([0.2, 0.9]
            .into_iter()
            .map(|coop| {
                let mut s = Scenario::default();
                set_all(&mut s, StateVar::Cooperation, c(coop));
                per_agent(&mut s, &[StateVar::Der], [0.0, 0.5, 1.0]);
                Variant::new(format!("M_C={coop}"), s)
            })
            .collect()),
        "services-baseline" => one(variant, services_baseline()),
        "services-drop" => {
            let mut s = services_baseline();
            for area in &s.communities {
                let mut e = DisasterEvent::new(area.id.clone(), 100, s.horizon);
                e.services = Some(c(0.1));
                s.events.push(e);
            }
            one(variant, s)
        }
        "injury-high" => {
            let mut s = services_baseline();
            s.communities.iter_mut().for_each(|a| a.injury = c(0.9));
            one(variant, s)
        }
        "news-positive" => {
            let mut s = services_baseline();
            s.media = MediaProfile::constant(UnitValue::ONE, unit(0.9));
            one(variant, s)
        }
        "services" => ["services-baseline", "services-drop", "injury-high", "news-positive"]
            .into_iter()
            .map(|v| case_study_1(v).map(|mut vs| vs.remove(0)))
            .collect(),
        "media-constant" => one(variant, Scenario::default()),
        "media-sudden" | "media-gradual" => {
            let kind = if variant == "media-sudden" { MediaKind::SUDDEN } else { MediaKind::GRADUAL };
            let media = MediaProfile::new(kind, PositiveFraction::Fixed(UnitValue::ZERO))?;
            one(variant, Scenario { media, ..Scenario::default() })
        }
        "media" => ["media-constant", "media-sudden", "media-gradual"]
            .into_iter()
            .map(|v| case_study_1(v).map(|mut vs| vs.remove(0)))
            .collect(),
        "empathy" => Ok(vec![
            Variant::new("gamma=0.2", empathy_variant(0.2)),
            Variant::new("gamma=1", empathy_variant(1.0)),
        ]),
        "empathy-low" => one("gamma=0.2", empathy_variant(0.2)),
        other => Err(Error::config(format!(
            "unknown case study 1 variant `{other}`; expected one of {}",
            CASE1.join(", ")
        ))),
    }
}

/// Community `k` (1-based) of case study 2, before any disaster.
fn society_community(k: usize) -> CommunitySpec {
    let population = [150, 250, 135, 450, 500, 120][k - 1];
    let mut spec = CommunitySpec::table_one(format!("C{k}"), population);
    let (risk, fear, health) = match k {
        1 => (n(0.8, 0.1), n(0.98, 0.02), n(0.5, 0.1)),
        2 => (n(0.7, 0.1), n(0.1, 0.1), n(0.98, 0.02)),
        _ => (n(0.1, 0.1), n(0.1, 0.1), n(0.98, 0.02)),
    };
    spec.set_init(StateVar::Risk, risk);
    spec.set_init(StateVar::InfoSeeking, risk);
    spec.set_init(StateVar::Fear, fear);
    spec.set_init(StateVar::PhysicalHealth, health);
    for var in [StateVar::Flexibility, StateVar::Experience, StateVar::Cooperation] {
        spec.set_init(var, n(0.5, 0.1));
    }
    spec.set_init(StateVar::Openness, c(0.5));
    spec.set_init(StateVar::Der, n(0.9, 0.1));
    spec.injury = n(0.01, 0.01);
    spec.services = n(0.9, 0.1);
    spec.utility = n(0.9, 0.1);
    spec
}

fn society_media() -> MediaProfile {
    MediaProfile::new(MediaKind::Constant { n: 1.0 }, PositiveFraction::Random(n(0.5, 0.1)))
        .expect("valid media")
}

/// The severe disaster striking community 1 for the whole run.
fn community_one_disaster(horizon: usize) -> DisasterEvent {
    let mut e = DisasterEvent::new("C1", 0, horizon);
    e.injury = Some(n(0.9, 0.1));
    e.services = Some(c(0.0));
    e.utility = Some(c(0.0));
    e.der = Some(n(0.5, 0.1));
    e
}

/// Case study 2: six communities, examples 1 to 3.
pub fn case_study_2(example: u8) -> Result<Scenario> {
    if !(1..=3).contains(&example) {
        return Err(Error::config(format!("case study 2 has examples 1 to 3, not {example}")));
    }
    let mut s = Scenario {
        communities: (1..=6).map(society_community).collect(),
        media: society_media(),
        ..Scenario::default()
    };
    for a in 0..6 {
        s.empathy.set(a, a, n(0.9, 0.1));
    }
    s.empathy.set(0, 1, n(0.9, 0.1));
    s.events.push(community_one_disaster(s.horizon));
    match example {
        2 => {
            let mut e = DisasterEvent::new("C5", 0, s.horizon);
            e.injury = Some(n(0.1, 0.1));
            for var in [StateVar::Fear, StateVar::Risk, StateVar::InfoSeeking] {
                e.initial_state.push((var, n(0.9, 0.1)));
            }
            s.events.push(e);
        }
        3 => {
            let mut e = DisasterEvent::new("C5", 100, s.horizon);
            e.utility = Some(c(0.0));
            s.events.push(e);
        }
        _ => {}
    }
    s.validate()?;
    Ok(s)
}

/// A single community shaped like community 1 of case study 2, hit by the
/// same disaster, with `population` agents and intra-community empathy
/// `N(empathy_mean, 0.1²)`.
pub fn population_study(population: usize, empathy_mean: f64) -> Result<Scenario> {
    let mut community = society_community(1);
    community.population = population;
    let mut s = Scenario { communities: vec![community], media: society_media(), ..Scenario::default() };
    s.empathy.set(0, 0, GaussianSpec::new(empathy_mean, 0.1)?);
    s.events.push(community_one_disaster(s.horizon));
    s.validate()?;
    Ok(s)
}

/// Community 1 of case study 2 facing a disaster type from the catalog.
pub fn emdat_scenario(profile: &DisasterProfile) -> Scenario {
    let mut community = society_community(1);
    community.set_init(StateVar::Fear, n(profile.initial_fear.get(), 0.02));
    let mut s = Scenario { communities: vec![community], media: society_media(), ..Scenario::default() };
    s.empathy.set(0, 0, n(0.9, 0.1));
    let mut e = DisasterEvent::new("C1", 0, s.horizon);
    e.injury = Some(c(profile.injury_factor.get()));
    e.utility = Some(c(profile.availability_electricity.get()));
    e.services = Some(c(profile.availability_emergency.get()));
    s.events.push(e);
    s
}

/// Every accepted name of [`builtin`], with parameterised forms shown once.
pub fn builtin_names() -> Vec<String> {
    let mut names: Vec<String> = CASE1.iter().map(|v| format!("case1:{v}")).collect();
    names.extend((1..=3).map(|k| format!("case2:example{k}")));
    names.push("population".into());
    names.push("population:<size>:<empathy>".into());
    names.push("emdat".into());
    names.extend(bundled_catalog().keys().map(|t| format!("emdat:{t}")));
    names
}

/// Resolves a built-in scenario name to its variants.
pub fn builtin(name: &str) -> Result<Vec<Variant>> {
    let (family, rest) = name.split_once(':').unwrap_or((name, ""));
    match family {
        "case1" => case_study_1(if rest.is_empty() { "default" } else { rest }),
        "case2" => {
            let k = rest
                .strip_prefix("example")
                .and_then(|k| k.parse::<u8>().ok())
                .ok_or_else(|| Error::config(format!("unknown case study 2 scenario `{name}`")))?;
            Ok(vec![Variant::new(format!("example{k}"), case_study_2(k)?)])
        }
        "population" if rest.is_empty() => {
            let mut out = Vec::new();
            for &emp in &EMPATHY_GRID {
                for &pop in &POPULATION_GRID {
                    out.push(Variant::new(format!("pop={pop} gamma={emp}"), population_study(pop, emp)?));
                }
            }
            Ok(out)
        }
        "population" => {
            let (pop, emp) = rest
                .split_once(':')
                .ok_or_else(|| Error::config(format!("expected population:<size>:<empathy>, got `{name}`")))?;
            let pop: usize = pop.parse().map_err(|_| Error::config(format!("bad population `{pop}`")))?;
            let emp: f64 = emp.parse().map_err(|_| Error::config(format!("bad empathy `{emp}`")))?;
            Ok(vec![Variant::new(format!("pop={pop} gamma={emp}"), population_study(pop, emp)?)])
        }
        "emdat" => {
            let catalog = bundled_catalog();
            if rest.is_empty() {
                return Ok(catalog.values().map(|p| Variant::new(p.disaster_type.clone(), emdat_scenario(p))).collect());
            }
            let profile = catalog
                .values()
                .find(|p| p.disaster_type.eq_ignore_ascii_case(rest))
                .ok_or_else(|| {
                    let known: Vec<&str> = catalog.keys().map(String::as_str).collect();
                    Error::config(format!("unknown disaster type `{rest}`; known types: {}", known.join(", ")))
                })?;
            Ok(vec![Variant::new(profile.disaster_type.clone(), emdat_scenario(profile))])
        }
        _ => Err(Error::config(format!("unknown built-in scenario `{name}`"))),
    }
}
