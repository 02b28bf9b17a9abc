//! Scenario documents.
//!
//! A scenario is a TOML document with the sections `simulation`, `params`,
//! `energy`, `weights`, `media`, `community.<id>`, `empathy` and
//! `event.<name>`. Every section and key is optional; omitted values take the
//! defaults and an empty document is the nine-agent case study.
//! Distributions are written as a bare number (a constant) or a
//! `[mean, std]` pair.
//!
//! ```toml
//! [simulation]
//! horizon = 300
//! replications = 100
//! seed = 0
//! sharing = "before"
//!
//! [media]
//! kind = "gaussian-pulse"
//! positive = [0.5, 0.1]
//!
//! [community.north]
//! population = 20
//! M_E = [0.9, 0.1]
//! Q_e = 0.5
//!
//! [community.north.agent.1]
//! M_C = 1
//!
//! [empathy]
//! "north:north" = [0.9, 0.1]
//!
//! [event.storm]
//! community = "north"
//! start = 100
//! Z = 0.9
//! Q_s = 0.1
//!
//! [event.storm.initial]
//! M_E = [0.9, 0.1]
//! ```

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{CommunitySpec, EmpathySpec, Scenario, SharingOrder};
use crate::agent::StateVar;
use crate::dynamics::DynamicsParams;
use crate::error::{Error, Result};
use crate::infrastructure::{DisasterEvent, EnergyConfig};
use crate::media::{MediaKind, MediaProfile, PositiveFraction};
use crate::metrics::WellBeingWeights;
use crate::random::GaussianSpec;
use crate::unit::UnitValue;

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    simulation: SimulationSection,
    #[serde(default)]
    params: DynamicsParams,
    #[serde(default)]
    energy: EnergyConfig,
    #[serde(default)]
    weights: WellBeingWeights,
    #[serde(default)]
    media: MediaSection,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    community: IndexMap<String, CommunitySection>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    empathy: IndexMap<String, GaussianSpec>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    event: IndexMap<String, EventSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulationSection {
    horizon: usize,
    replications: usize,
    seed: SeedRepr,
    sharing: SharingOrder,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection { horizon: 300, replications: 100, seed: SeedRepr::Number(0), sharing: SharingOrder::Before }
    }
}

/// TOML integers stop at `i64::MAX`; larger seeds are written as strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum SeedRepr {
    Number(u64),
    Text(String),
}

impl SeedRepr {
    fn from_seed(seed: u64) -> Self {
        if seed <= i64::MAX as u64 {
            SeedRepr::Number(seed)
        } else {
            SeedRepr::Text(seed.to_string())
        }
    }

    fn seed(&self) -> Result<u64> {
        match self {
            SeedRepr::Number(n) => Ok(*n),
            SeedRepr::Text(s) => {
                s.parse().map_err(|_| Error::config(format!("simulation.seed `{s}` is not an unsigned integer")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KindName {
    #[default]
    Constant,
    DampedExponential,
    GaussianPulse,
}

/// A bare number is a fixed tone; a pair is drawn once per replication.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum PositiveRepr {
    Fixed(f64),
    Random([f64; 2]),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediaSection {
    #[serde(default)]
    kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positive: Option<PositiveRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positive_schedule: Option<Vec<UnitValue>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CommunitySection {
    population: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prosumer_fraction: Option<UnitValue>,
    #[serde(flatten)]
    values: IndexMap<String, GaussianSpec>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    agent: IndexMap<String, IndexMap<String, GaussianSpec>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventSection {
    community: String,
    start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end: Option<usize>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    injury: Option<GaussianSpec>,
    #[serde(rename = "Q_s", default, skip_serializing_if = "Option::is_none")]
    services: Option<GaussianSpec>,
    #[serde(rename = "Q_e", default, skip_serializing_if = "Option::is_none")]
    utility: Option<GaussianSpec>,
    #[serde(rename = "Q_DER", default, skip_serializing_if = "Option::is_none")]
    der: Option<GaussianSpec>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    initial: IndexMap<String, GaussianSpec>,
}

fn toml_error(e: impl std::fmt::Display) -> Error {
    Error::config(e.to_string().trim_end().to_string())
}

pub(super) fn parse(text: &str) -> Result<Scenario> {
    let doc: Document = toml::from_str(text).map_err(toml_error)?;
    let scenario = from_document(doc)?;
    scenario.validate()?;
    Ok(scenario)
}

pub(super) fn render(s: &Scenario) -> String {
    toml::to_string(&to_document(s)).expect("scenario documents always serialize")
}

fn from_document(doc: Document) -> Result<Scenario> {
    let defaults = Scenario::default();
    let communities = if doc.community.is_empty() {
        defaults.communities
    } else {
        doc.community.into_iter().map(|(id, c)| community_from(id, c)).collect::<Result<_>>()?
    };

    let mut empathy = EmpathySpec::default();
    for (key, spec) in doc.empathy {
        let (a, b) = key
            .split_once(':')
            .ok_or_else(|| Error::config(format!("empathy key `{key}` must look like `a:b`")))?;
        let find = |id: &str| {
            communities
                .iter()
                .position(|c| c.id == id)
                .ok_or_else(|| Error::config(format!("empathy.\"{key}\": unknown community `{id}`")))
        };
        let (a, b) = (find(a)?, find(b)?);
        if empathy.blocks.contains_key(&(a.min(b), a.max(b))) {
            return Err(Error::config(format!("empathy.\"{key}\" repeats an earlier block")));
        }
        empathy.set(a, b, spec);
    }

    let horizon = doc.simulation.horizon;
    let events = doc
        .event
        .into_iter()
        .map(|(name, e)| {
            let mut ev = DisasterEvent::new(e.community, e.start, e.end.unwrap_or(horizon));
            ev.injury = e.injury;
            ev.services = e.services;
            ev.utility = e.utility;
            ev.der = e.der;
            for (key, spec) in e.initial {
                let var: StateVar = key
                    .parse()
                    .map_err(|_| Error::config(format!("event.{name}.initial: unknown variable `{key}`")))?;
                ev.initial_state.push((var, spec));
            }
            Ok(ev)
        })
        .collect::<Result<_>>()?;

    Ok(Scenario {
        horizon,
        replications: doc.simulation.replications,
        seed: doc.simulation.seed.seed()?,
        sharing: doc.simulation.sharing,
        params: doc.params,
        energy: doc.energy,
        weights: doc.weights,
        media: media_from(doc.media)?,
        communities,
        empathy,
        events,
    })
}

fn community_from(id: String, c: CommunitySection) -> Result<CommunitySpec> {
    let mut spec = CommunitySpec::table_one(id.clone(), c.population);
    if let Some(p) = c.prosumer_fraction {
        spec.prosumer_fraction = p;
    }
    for (key, g) in c.values {
        match key.as_str() {
            "Z" => spec.injury = g,
            "Q_s" => spec.services = g,
            "Q_e" => spec.utility = g,
            other => {
                let var: StateVar = other
                    .parse()
                    .map_err(|_| Error::config(format!("community.{id}: unknown key `{other}`")))?;
                spec.set_init(var, g);
            }
        }
    }
    for (k, values) in c.agent {
        let index: usize = k
            .parse()
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| Error::config(format!("community.{id}.agent.{k}: agents are numbered from 1")))?;
        for (key, g) in values {
            let var: StateVar = key
                .parse()
                .map_err(|_| Error::config(format!("community.{id}.agent.{k}: unknown variable `{key}`")))?;
            spec.set_agent(index - 1, var, g);
        }
    }
    Ok(spec)
}

fn media_from(m: MediaSection) -> Result<MediaProfile> {
    let unused = |names: &[(&str, Option<f64>)]| -> Result<()> {
        match names.iter().find(|(_, v)| v.is_some()) {
            Some((name, _)) => Err(Error::config(format!("media.{name} does not apply to kind {:?}", m.kind))),
            None => Ok(()),
        }
    };
    let kind = match m.kind {
        KindName::Constant => {
            unused(&[("a", m.a), ("b", m.b), ("c", m.c), ("t0", m.t0), ("w", m.w)])?;
            MediaKind::Constant { n: m.n.unwrap_or(1.0) }
        }
        KindName::DampedExponential => {
            unused(&[("n", m.n), ("t0", m.t0), ("w", m.w)])?;
            let MediaKind::DampedExponential { a, b, c } = MediaKind::SUDDEN else { unreachable!() };
            MediaKind::DampedExponential { a: m.a.unwrap_or(a), b: m.b.unwrap_or(b), c: m.c.unwrap_or(c) }
        }
        KindName::GaussianPulse => {
            unused(&[("n", m.n), ("b", m.b)])?;
            let MediaKind::GaussianPulse { a, t0, w, c } = MediaKind::GRADUAL else { unreachable!() };
            MediaKind::GaussianPulse {
                a: m.a.unwrap_or(a),
                t0: m.t0.unwrap_or(t0),
                w: m.w.unwrap_or(w),
                c: m.c.unwrap_or(c),
            }
        }
    };
    let positive = match (m.positive, m.positive_schedule) {
        (Some(_), Some(_)) => {
            return Err(Error::config("media.positive and media.positive_schedule are exclusive"))
        }
        (None, Some(s)) => PositiveFraction::Schedule(s),
        (Some(PositiveRepr::Fixed(x)), None) => PositiveFraction::Fixed(
            UnitValue::new(x).map_err(|_| Error::config(format!("media.positive = {x} must be in [0, 1]")))?,
        ),
        (Some(PositiveRepr::Random([mean, std])), None) => {
            PositiveFraction::Random(GaussianSpec::new(mean, std)?)
        }
        (None, None) => PositiveFraction::Fixed(UnitValue::ZERO),
    };
    let profile = MediaProfile { t_scale: m.t_scale.unwrap_or(kind.default_t_scale()), kind, positive };
    profile.validate()?;
    Ok(profile)
}

fn to_document(s: &Scenario) -> Document {
    let community = s
        .communities
        .iter()
        .map(|c| {
            let mut values: IndexMap<String, GaussianSpec> =
                StateVar::ALL.iter().map(|&v| (v.key().to_string(), c.init(v))).collect();
            values.insert("Z".into(), c.injury);
            values.insert("Q_s".into(), c.services);
            values.insert("Q_e".into(), c.utility);
            let agent = c
                .agents
                .iter()
                .map(|(k, m)| {
                    ((k + 1).to_string(), m.iter().map(|(v, g)| (v.key().to_string(), *g)).collect())
                })
                .collect();
            let section = CommunitySection {
                population: c.population,
                prosumer_fraction: Some(c.prosumer_fraction),
                values,
                agent,
            };
            (c.id.clone(), section)
        })
        .collect();

    let empathy = s
        .empathy
        .blocks
        .iter()
        .map(|(&(a, b), g)| (format!("{}:{}", s.communities[a].id, s.communities[b].id), *g))
        .collect();

    let event = s
        .events
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let section = EventSection {
                community: e.community.clone(),
                start: e.start,
                end: Some(e.end),
                injury: e.injury,
                services: e.services,
                utility: e.utility,
                der: e.der,
                initial: e.initial_state.iter().map(|(v, g)| (v.key().to_string(), *g)).collect(),
            };
            ((k + 1).to_string(), section)
        })
        .collect();

    Document {
        simulation: SimulationSection {
            horizon: s.horizon,
            replications: s.replications,
            seed: SeedRepr::from_seed(s.seed),
            sharing: s.sharing,
        },
        params: s.params,
        energy: s.energy,
        weights: s.weights,
        media: media_to(&s.media),
        community,
        empathy,
        event,
    }
}

fn media_to(p: &MediaProfile) -> MediaSection {
    let mut m = MediaSection { t_scale: Some(p.t_scale), ..Default::default() };
    match p.kind {
        MediaKind::Constant { n } => {
            m.kind = KindName::Constant;
            m.n = Some(n);
        }
        MediaKind::DampedExponential { a, b, c } => {
            m.kind = KindName::DampedExponential;
            (m.a, m.b, m.c) = (Some(a), Some(b), Some(c));
        }
        MediaKind::GaussianPulse { a, t0, w, c } => {
            m.kind = KindName::GaussianPulse;
            (m.a, m.t0, m.w, m.c) = (Some(a), Some(t0), Some(w), Some(c));
        }
    }
    match &p.positive {
        PositiveFraction::Fixed(x) => m.positive = Some(PositiveRepr::Fixed(x.get())),
        PositiveFraction::Random(g) => m.positive = Some(PositiveRepr::Random([g.mean(), g.std()])),
        PositiveFraction::Schedule(s) => m.positive_schedule = Some(s.clone()),
    }
    m
}

pub(super) fn set_path(s: &Scenario, path: &str, value: f64) -> Result<Scenario> {
    if !value.is_finite() {
        return Err(Error::NonFinite("override value"));
    }
    let mut table: toml::Table = toml::from_str(&render(s)).map_err(toml_error)?;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("malformed path `{path}`")));
    }
    set_in(&mut table, &parts, value, path)?;
    parse(&toml::to_string(&table).map_err(toml_error)?)
}

fn unresolved(path: &str) -> Error {
    Error::config(format!("path `{path}` does not name a numeric setting"))
}

fn set_in(table: &mut toml::Table, parts: &[&str], value: f64, path: &str) -> Result<()> {
    let key = if table.contains_key(parts[0]) {
        parts[0].to_string()
    } else {
        // 1-based position among the entries
        parts[0]
            .parse::<usize>()
            .ok()
            .and_then(|k| k.checked_sub(1))
            .and_then(|k| table.keys().nth(k).cloned())
            .ok_or_else(|| unresolved(path))?
    };
    let slot = table.get_mut(&key).ok_or_else(|| unresolved(path))?;
    match (parts.len(), slot) {
        (1, slot @ toml::Value::Integer(_)) => {
            if value.fract() != 0.0 || value < 0.0 || value > i64::MAX as f64 {
                return Err(Error::config(format!("`{path}` takes a non-negative integer, got {value}")));
            }
            *slot = toml::Value::Integer(value as i64);
        }
        (1, slot @ toml::Value::Float(_)) => *slot = toml::Value::Float(value),
        (_, toml::Value::Table(inner)) if parts.len() > 1 => set_in(inner, &parts[1..], value, path)?,
        (2, slot) => {
            let (mean, std) = match slot {
                toml::Value::Float(x) => (*x, 0.0),
                toml::Value::Integer(x) => (*x as f64, 0.0),
                toml::Value::Array(a) if a.len() == 2 => {
                    let num = |v: &toml::Value| match v {
                        toml::Value::Float(x) => Some(*x),
                        toml::Value::Integer(x) => Some(*x as f64),
                        _ => None,
                    };
                    (num(&a[0]).ok_or_else(|| unresolved(path))?, num(&a[1]).ok_or_else(|| unresolved(path))?)
                }
                _ => return Err(unresolved(path)),
            };
            let scalar = !matches!(slot, toml::Value::Array(_));
            *slot = match parts[1] {
                "mean" if scalar => toml::Value::Float(value),
                "mean" => toml::Value::Array(vec![value.into(), std.into()]),
                "std" => toml::Value::Array(vec![mean.into(), value.into()]),
                _ => return Err(unresolved(path)),
            };
        }
        _ => return Err(unresolved(path)),
    }
    Ok(())
}
