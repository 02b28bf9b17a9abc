//! Seedable multi-agent simulator of community resilience under disasters.
//!
//! Agents carry mental state (fear, risk perception, information seeking,
//! cooperation, openness, experience, flexibility) and physical health. They
//! influence each other through an empathy network, react to mass media and
//! to disasters that disrupt emergency services and the power supply, and
//! share distributed energy resources with empathetic neighbours.
//!
//! ```
//! use resilience::{run_simulation, Scenario, SeedSpec, Metric};
//!
//! let scenario = Scenario::parse("[simulation]\nhorizon = 5\n").unwrap();
//! let run = run_simulation(&scenario, SeedSpec::new(0, 0)).unwrap();
//! assert_eq!(run.steps.len(), 6);
//! let fear = run.steps[1].communities[0].mean(Metric::Fear);
//! assert!((fear - 0.527_333_333).abs() < 1e-9);
//! ```

pub mod agent;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod infrastructure;
pub mod media;
pub mod metrics;
pub mod network;
pub mod random;
pub mod scenario;
pub mod unit;

pub use agent::{AgentState, StateVar};
pub use dynamics::{step_population, DynamicsParams, Exposure};
pub use engine::{
    run_monte_carlo, run_monte_carlo_with, run_simulation, run_simulation_with, Ensemble, RunOptions, Trajectory,
};
pub use error::{Error, Result};
pub use infrastructure::{
    fear_from_emdat, injury_factor_from_emdat, share_electricity, total_electricity, DisasterEvent,
    DisasterProfile, EnergyConfig, InfrastructureState,
};
pub use media::{media_signal, MediaKind, MediaProfile, MediaSample, PositiveFraction};
pub use metrics::{aggregate_ensemble, CommunityMetrics, Metric, Stat, StepMetrics, WellBeingWeights};
pub use network::EmpathyNetwork;
pub use random::{GaussianSpec, SeedSpec};
pub use scenario::{Scenario, SharingOrder};
pub use unit::UnitValue;

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
}
