use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::unit::UnitValue;

/// Mental and physical state of one individual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub fear: UnitValue,
    pub risk: UnitValue,
    pub info_seeking: UnitValue,
    pub cooperation: UnitValue,
    pub openness: UnitValue,
    pub experience: UnitValue,
    pub flexibility: UnitValue,
    pub physical_health: UnitValue,
    /// DER availability after this step's sharing.
    pub der_fraction: UnitValue,
    /// DER availability the agent generates on its own, before sharing.
    pub der_nominal: UnitValue,
    pub is_prosumer: bool,
}

impl AgentState {
    /// Default-style state with every variable set to `x` and no DER access.
    pub fn uniform(x: UnitValue) -> Self {
        AgentState {
            fear: x,
            risk: x,
            info_seeking: x,
            cooperation: x,
            openness: x,
            experience: x,
            flexibility: x,
            physical_health: x,
            der_fraction: UnitValue::ZERO,
            der_nominal: UnitValue::ZERO,
            is_prosumer: false,
        }
    }

    pub fn get(&self, var: StateVar) -> UnitValue {
        match var {
            StateVar::Fear => self.fear,
            StateVar::Risk => self.risk,
            StateVar::InfoSeeking => self.info_seeking,
            StateVar::Cooperation => self.cooperation,
            StateVar::Openness => self.openness,
            StateVar::Experience => self.experience,
            StateVar::Flexibility => self.flexibility,
            StateVar::PhysicalHealth => self.physical_health,
            StateVar::Der => self.der_nominal,
        }
    }

    /// Sets one variable. Setting [`StateVar::Der`] resets both DER fields.
    pub fn set(&mut self, var: StateVar, value: UnitValue) {
        match var {
            StateVar::Fear => self.fear = value,
            StateVar::Risk => self.risk = value,
            StateVar::InfoSeeking => self.info_seeking = value,
            StateVar::Cooperation => self.cooperation = value,
            StateVar::Openness => self.openness = value,
            StateVar::Experience => self.experience = value,
            StateVar::Flexibility => self.flexibility = value,
            StateVar::PhysicalHealth => self.physical_health = value,
            StateVar::Der => {
                self.der_nominal = value;
                self.der_fraction = value;
            }
        }
    }
}

/// The per-agent variables that can be initialised from a distribution.
///
/// The declaration order is the order in which an agent's initial values
/// are drawn from the random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateVar {
    #[serde(rename = "M_E")]
    Fear,
    #[serde(rename = "M_R")]
    Risk,
    #[serde(rename = "M_B")]
    InfoSeeking,
    #[serde(rename = "M_C")]
    Cooperation,
    #[serde(rename = "M_O")]
    Openness,
    #[serde(rename = "M_L")]
    Experience,
    #[serde(rename = "M_F")]
    Flexibility,
    #[serde(rename = "P")]
    PhysicalHealth,
    #[serde(rename = "Q_DER")]
    Der,
}

impl StateVar {
    pub const ALL: [StateVar; 9] = [
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

    /// Key used in scenario files.
    pub fn key(self) -> &'static str {
        match self {
            StateVar::Fear => "M_E",
            StateVar::Risk => "M_R",
            StateVar::InfoSeeking => "M_B",
            StateVar::Cooperation => "M_C",
            StateVar::Openness => "M_O",
            StateVar::Experience => "M_L",
            StateVar::Flexibility => "M_F",
            StateVar::PhysicalHealth => "P",
            StateVar::Der => "Q_DER",
        }
    }
}

impl fmt::Display for StateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for StateVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        StateVar::ALL
            .into_iter()
            .find(|v| v.key() == s)
            .ok_or_else(|| Error::config(format!("unknown state variable `{s}`")))
    }
}
