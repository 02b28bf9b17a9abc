//! Per-step update of every agent's mental and physical state.
//!
//! All rules read the step-`t` snapshot and produce step `t+1`; none of them
//! sees another agent's updated value, so the result does not depend on the
//! order agents are visited in. Every rule has the shape
//! `x′ = clamp(x + gain·drive)`.
//!
//! Shared terms, for agent `i`:
//!
//! * `Ê`: empathy-weighted mean of the neighbours' fear (own fear if none),
//! * `S = N·(1 − 2N⁺)`: signed media stimulus, zero for balanced coverage,
//! * `T = w_Z·Z + w_P·(1−P) + w_Q·(1−Q_total) + w_S·(1−Q_s)`: threat,
//! * `D = (F + C + L)/3`: damping by flexibility, cooperation and experience,
//! * `A = Σⱼ γᵢⱼCⱼ / (Σⱼ γᵢⱼCⱼ + k_A)`: mutual aid from cooperative,
//!   empathetic neighbours.

use serde::{Deserialize, Serialize};

use crate::agent::AgentState;
use crate::error::{Error, Result};
use crate::media::MediaSample;
use crate::network::EmpathyNetwork;
use crate::unit::UnitValue;

/// Coefficients of the update rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsParams {
    pub gain_fear: f64,
    pub gain_risk: f64,
    pub gain_info: f64,
    pub gain_cooperation: f64,
    pub gain_flexibility: f64,
    pub gain_experience: f64,
    pub gain_physical: f64,
    /// λ: pull of fear towards the neighbours' fear.
    pub diffusion: f64,
    /// μ: weight of the signed media stimulus on fear.
    pub media: f64,
    /// ν: weight of the threat on fear.
    pub threat: f64,
    /// κ: damping of fear by `D`.
    pub damping: f64,
    pub threat_injury: f64,
    pub threat_health: f64,
    pub threat_power: f64,
    pub threat_services: f64,
    /// θ_E: fear above which risk perception is driven upward.
    pub fear_threshold: f64,
    /// Openness at or above which an agent counts as optimistic.
    pub optimism_threshold: f64,
    pub risk_media: f64,
    /// ρ_L. Positive means experience lowers risk perception; may be negative.
    pub risk_experience: f64,
    pub risk_cooperation: f64,
    /// β_L: experience damping of information seeking.
    pub info_experience: f64,
    /// δ_C: relaxation of cooperation when fear is low.
    pub cooperation_decay: f64,
    /// c_FC: pull of flexibility towards cooperation.
    pub flexibility_from_cooperation: f64,
    /// c_CF: pull of cooperation towards flexibility.
    pub cooperation_from_flexibility: f64,
    /// r_S: recovery of health supported by emergency services.
    pub service_recovery: f64,
    /// d_Z: health damage per unit injury factor.
    pub injury_damage: f64,
    /// d_Q: health damage per unit of unserved electricity.
    pub power_damage: f64,
    /// r_A: recovery of health supported by neighbours' aid.
    pub aid_recovery: f64,
    /// k_A: aid half-saturation, in units of `Σⱼ γᵢⱼCⱼ`.
    pub aid_saturation: f64,
    /// Standard deviation of optional per-step noise on E, R, B, C and F.
    pub noise_std: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            gain_fear: 0.1,
            gain_risk: 0.1,
            gain_info: 0.2,
            gain_cooperation: 0.1,
            gain_flexibility: 0.1,
            gain_experience: 0.1,
            gain_physical: 0.1,
            diffusion: 0.5,
            media: 0.3,
            threat: 0.4,
            damping: 0.5,
            threat_injury: 0.25,
            threat_health: 0.25,
            threat_power: 0.25,
            threat_services: 0.25,
            fear_threshold: 0.5,
            optimism_threshold: 0.5,
            risk_media: 0.3,
            risk_experience: 0.25,
            risk_cooperation: 0.25,
            info_experience: 0.25,
            cooperation_decay: 0.3,
            flexibility_from_cooperation: 0.2,
            cooperation_from_flexibility: 0.2,
            service_recovery: 0.5,
            injury_damage: 0.5,
            power_damage: 0.3,
            aid_recovery: 0.5,
            aid_saturation: 5.0,
            noise_std: 0.0,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        let gains = [
            ("gain_fear", self.gain_fear),
            ("gain_risk", self.gain_risk),
            ("gain_info", self.gain_info),
            ("gain_cooperation", self.gain_cooperation),
            ("gain_flexibility", self.gain_flexibility),
            ("gain_experience", self.gain_experience),
            ("gain_physical", self.gain_physical),
        ];
        for (name, g) in gains {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::config(format!("params.{name} = {g} must be in (0, 1]")));
            }
        }
        let weights = [
            ("diffusion", self.diffusion),
            ("media", self.media),
            ("threat", self.threat),
            ("damping", self.damping),
            ("threat_injury", self.threat_injury),
            ("threat_health", self.threat_health),
            ("threat_power", self.threat_power),
            ("threat_services", self.threat_services),
            ("risk_media", self.risk_media),
            ("risk_cooperation", self.risk_cooperation),
            ("info_experience", self.info_experience),
            ("cooperation_decay", self.cooperation_decay),
            ("flexibility_from_cooperation", self.flexibility_from_cooperation),
            ("cooperation_from_flexibility", self.cooperation_from_flexibility),
            ("service_recovery", self.service_recovery),
            ("injury_damage", self.injury_damage),
            ("power_damage", self.power_damage),
            ("aid_recovery", self.aid_recovery),
            ("aid_saturation", self.aid_saturation),
            ("noise_std", self.noise_std),
        ];
        for (name, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::config(format!("params.{name} = {w} must be finite and >= 0")));
            }
        }
        if !self.risk_experience.is_finite() {
            return Err(Error::config("params.risk_experience must be finite"));
        }
        if !(self.fear_threshold > 0.0 && self.fear_threshold < 1.0) {
            return Err(Error::config(format!(
                "params.fear_threshold = {} must be in (0, 1)",
                self.fear_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.optimism_threshold) {
            return Err(Error::config("params.optimism_threshold must be in [0, 1]"));
        }
        Ok(())
    }
}

/// What the infrastructure offers one agent at this step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exposure {
    pub injury: UnitValue,
    pub services: UnitValue,
    /// Served fraction of demand, utility plus DER.
    pub q_total: UnitValue,
}

/// Aggregates of an agent's empathy neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighborhood {
    /// `Ê`: empathy-weighted mean fear of the neighbours.
    pub mean_fear: UnitValue,
    /// `Σⱼ γᵢⱼCⱼ`.
    pub support: f64,
}

impl Neighborhood {
    /// An agent without empathetic neighbours.
    pub fn alone(state: &AgentState) -> Self {
        Neighborhood { mean_fear: state.fear, support: 0.0 }
    }
}

/// `S = N·(1 − 2N⁺)`.
pub fn media_stimulus(media: MediaSample) -> f64 {
    media.n.get() * (1.0 - 2.0 * media.n_pos.get())
}

/// `T`, the perceived threat.
pub fn threat(state: &AgentState, exposure: &Exposure, p: &DynamicsParams) -> f64 {
    p.threat_injury * exposure.injury.get()
        + p.threat_health * (1.0 - state.physical_health.get())
        + p.threat_power * (1.0 - exposure.q_total.get())
        + p.threat_services * (1.0 - exposure.services.get())
}

/// `D = (F + C + L)/3`.
pub fn damping(state: &AgentState) -> f64 {
    (state.flexibility.get() + state.cooperation.get() + state.experience.get()) / 3.0
}

/// `A`, the fraction of full neighbourly aid an agent receives.
pub fn aid(support: f64, p: &DynamicsParams) -> f64 {
    if support > 0.0 {
        support / (support + p.aid_saturation)
    } else {
        0.0
    }
}

#[inline]
fn relax(x: UnitValue, gain: f64, drive: f64) -> UnitValue {
    UnitValue::saturate(x.get() + gain * drive)
}

/// `E′ = E + α_E[λ(Ê − E) + μS + νT − κDE]`.
pub fn update_fear(
    s: &AgentState,
    nb: &Neighborhood,
    media: MediaSample,
    exposure: &Exposure,
    p: &DynamicsParams,
) -> UnitValue {
    let e = s.fear.get();
    let drive = p.diffusion * (nb.mean_fear.get() - e) + p.media * media_stimulus(media)
        + p.threat * threat(s, exposure, p)
        - p.damping * damping(s) * e;
    relax(s.fear, p.gain_fear, drive)
}

/// `R′ = R + α_R[1{E>θ_E}(E−θ_E)(1−R) + ρ_N·N(1−N⁺)(1−R) − ρ_L·L·R − ρ_C·C·R]`.
pub fn update_risk(s: &AgentState, media: MediaSample, p: &DynamicsParams) -> UnitValue {
    let (e, r) = (s.fear.get(), s.risk.get());
    let alarm = if e > p.fear_threshold { (e - p.fear_threshold) * (1.0 - r) } else { 0.0 };
    let informed = p.risk_media * media.n.get() * (1.0 - media.n_pos.get()) * (1.0 - r);
    let drive = alarm + informed
        - p.risk_experience * s.experience.get() * r
        - p.risk_cooperation * s.cooperation.get() * r;
    relax(s.risk, p.gain_risk, drive)
}

/// `B′ = B + α_B[(R − B) − β_L·L·B]`.
pub fn update_info_seeking(s: &AgentState, p: &DynamicsParams) -> UnitValue {
    let b = s.info_seeking.get();
    let drive = (s.risk.get() - b) - p.info_experience * s.experience.get() * b;
    relax(s.info_seeking, p.gain_info, drive)
}

/// `C′ = C + α_C[E(1−C) − δ_C(1−E)C + c_CF(F − C)]`.
pub fn update_cooperation(s: &AgentState, p: &DynamicsParams) -> UnitValue {
    let (e, c) = (s.fear.get(), s.cooperation.get());
    let drive = e * (1.0 - c) - p.cooperation_decay * (1.0 - e) * c
        + p.cooperation_from_flexibility * (s.flexibility.get() - c);
    relax(s.cooperation, p.gain_cooperation, drive)
}

/// `F′ = F + α_F[opt·E(1−F) − (1−opt)·E·F + c_FC(C − F)]`.
///
/// Fear makes optimists (`O ≥ optimism_threshold`) more flexible and everyone
/// else less.
pub fn update_flexibility(s: &AgentState, p: &DynamicsParams) -> UnitValue {
    let (e, f) = (s.fear.get(), s.flexibility.get());
    let fear_effect =
        if s.openness.get() >= p.optimism_threshold { e * (1.0 - f) } else { -e * f };
    let drive = fear_effect + p.flexibility_from_cooperation * (s.cooperation.get() - f);
    relax(s.flexibility, p.gain_flexibility, drive)
}

/// `L′ = L + α_L·B(1 − L)`; never decreases.
pub fn update_experience(s: &AgentState, p: &DynamicsParams) -> UnitValue {
    let l = s.experience.get();
    relax(s.experience, p.gain_experience, s.info_seeking.get() * (1.0 - l))
}

/// `P′ = P + α_P[(r_S·Q_s + r_A·A)(1−P) − d_Z·Z·P − d_Q(1−Q_total)P]`.
pub fn update_physical(
    s: &AgentState,
    exposure: &Exposure,
    support: f64,
    p: &DynamicsParams,
) -> UnitValue {
    let h = s.physical_health.get();
    let recovery = p.service_recovery * exposure.services.get() + p.aid_recovery * aid(support, p);
    let drive = recovery * (1.0 - h)
        - p.injury_damage * exposure.injury.get() * h
        - p.power_damage * (1.0 - exposure.q_total.get()) * h;
    relax(s.physical_health, p.gain_physical, drive)
}

/// Applies all seven rules to one agent.
pub fn step_agent(
    s: &AgentState,
    nb: &Neighborhood,
    media: MediaSample,
    exposure: &Exposure,
    p: &DynamicsParams,
) -> AgentState {
    AgentState {
        fear: update_fear(s, nb, media, exposure, p),
        risk: update_risk(s, media, p),
        info_seeking: update_info_seeking(s, p),
        cooperation: update_cooperation(s, p),
        flexibility: update_flexibility(s, p),
        experience: update_experience(s, p),
        physical_health: update_physical(s, exposure, nb.support, p),
        ..*s
    }
}

/// Advances every agent one step, synchronously.
pub fn step_population(
    states: &[AgentState],
    network: &EmpathyNetwork,
    media: MediaSample,
    exposures: &[Exposure],
    p: &DynamicsParams,
) -> Result<Vec<AgentState>> {
    if states.len() != network.len() || states.len() != exposures.len() {
        return Err(Error::config(format!(
            "step_population: {} agents, {} network nodes, {} exposures",
            states.len(),
            network.len(),
            exposures.len()
        )));
    }
    let fear: Vec<f64> = states.iter().map(|s| s.fear.get()).collect();
    let coop: Vec<f64> = states.iter().map(|s| s.cooperation.get()).collect();
    let sums = network.neighbor_sums(&fear, &coop)?;
    Ok(states
        .iter()
        .zip(exposures)
        .enumerate()
        .map(|(i, (s, x))| {
            let strength = network.strength(i);
            let mean_fear = if strength > 0.0 {
                UnitValue::saturate(sums[i].fear / strength)
            } else {
                s.fear
            };
            let nb = Neighborhood { mean_fear, support: sums[i].cooperation };
            step_agent(s, &nb, media, x, p)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::StateVar;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn u(x: f64) -> UnitValue {
        UnitValue::new(x).unwrap()
    }

    /// Defaults: mental variables 0.5, F = P = Q_DER = 1, Q_e = 0.5, Q_s = 1,
    /// Z = 1, N = 1, N⁺ = 0.
    fn table_one() -> (AgentState, Exposure, MediaSample) {
        let mut s = AgentState::uniform(u(0.5));
        s.flexibility = UnitValue::ONE;
        s.physical_health = UnitValue::ONE;
        s.set(StateVar::Der, UnitValue::ONE);
        s.is_prosumer = true;
        // 0.8·0.5 + 0.2·1
        let x = Exposure { injury: UnitValue::ONE, services: UnitValue::ONE, q_total: u(0.6) };
        let m = MediaSample { n: UnitValue::ONE, n_pos: UnitValue::ZERO };
        (s, x, m)
    }

    fn quiet() -> (Exposure, MediaSample) {
        (
            Exposure { injury: UnitValue::ZERO, services: UnitValue::ONE, q_total: UnitValue::ONE },
            MediaSample { n: UnitValue::ZERO, n_pos: UnitValue::ZERO },
        )
    }

    #[test]
    fn fear_examples() {
        let p = DynamicsParams::default();
        let (mut s, x, m) = table_one();
        let nb = Neighborhood::alone(&s);
        // T = 0.25·1 + 0.25·0.4 = 0.35, D = 2/3
        let expected = 0.5 + 0.1 * (0.3 + 0.4 * 0.35 - 0.5 * (2.0 / 3.0) * 0.5);
        assert_abs_diff_eq!(update_fear(&s, &nb, m, &x, &p).get(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.527_333_333_333, epsilon = 1e-12);

        let good_news = MediaSample { n_pos: UnitValue::ONE, ..m };
        assert_abs_diff_eq!(
            update_fear(&s, &nb, good_news, &x, &p).get(),
            0.467_333_333_333,
            epsilon = 1e-12
        );

        s.fear = UnitValue::ZERO;
        s.flexibility = UnitValue::ZERO;
        s.physical_health = UnitValue::ONE;
        let (qx, qm) = quiet();
        assert_eq!(update_fear(&s, &Neighborhood::alone(&s), qm, &qx, &p).get(), 0.0);
    }

    #[test]
    fn risk_examples() {
        let p = DynamicsParams::default();
        let (mut s, _, m) = table_one();
        assert_abs_diff_eq!(update_risk(&s, m, &p).get(), 0.5025, epsilon = 1e-15);

        let none = MediaSample { n: UnitValue::ZERO, n_pos: UnitValue::ZERO };
        s.fear = UnitValue::ONE;
        s.experience = UnitValue::ZERO;
        s.cooperation = UnitValue::ZERO;
        assert_abs_diff_eq!(update_risk(&s, none, &p).get(), 0.525, epsilon = 1e-15);

        let zero = AgentState::uniform(UnitValue::ZERO);
        assert_eq!(update_risk(&zero, none, &p).get(), 0.0);
    }

    #[test]
    fn info_seeking_examples() {
        let p = DynamicsParams::default();
        let (s, _, _) = table_one();
        assert_abs_diff_eq!(update_info_seeking(&s, &p).get(), 0.4875, epsilon = 1e-15);

        let mut t = AgentState::uniform(UnitValue::ZERO);
        t.risk = UnitValue::ONE;
        assert_abs_diff_eq!(update_info_seeking(&t, &p).get(), 0.2, epsilon = 1e-15);

        t.info_seeking = UnitValue::ONE;
        assert_eq!(update_info_seeking(&t, &p).get(), 1.0);
    }

    #[test]
    fn cooperation_examples() {
        let p = DynamicsParams::default();
        let (s, _, _) = table_one();
        assert_abs_diff_eq!(update_cooperation(&s, &p).get(), 0.5275, epsilon = 1e-15);

        assert_eq!(update_cooperation(&AgentState::uniform(UnitValue::ZERO), &p).get(), 0.0);

        // E = 0, F = C: pure decay C(1 − α_C·δ_C)
        let mut t = AgentState::uniform(u(0.6));
        t.fear = UnitValue::ZERO;
        assert_abs_diff_eq!(update_cooperation(&t, &p).get(), 0.6 * (1.0 - 0.1 * 0.3), epsilon = 1e-15);
    }

    #[test]
    fn flexibility_examples() {
        let p = DynamicsParams::default();
        let (s, _, _) = table_one();
        assert_abs_diff_eq!(update_flexibility(&s, &p).get(), 0.99, epsilon = 1e-15);

        let mut pessimist = AgentState::uniform(u(0.5));
        pessimist.openness = u(0.2);
        pessimist.fear = UnitValue::ONE;
        assert_abs_diff_eq!(update_flexibility(&pessimist, &p).get(), 0.45, epsilon = 1e-15);

        let mut calm = AgentState::uniform(u(0.3));
        calm.fear = UnitValue::ZERO;
        assert_eq!(update_flexibility(&calm, &p).get(), 0.3);
    }

    #[test]
    fn experience_examples() {
        let p = DynamicsParams::default();
        let (s, _, _) = table_one();
        assert_abs_diff_eq!(update_experience(&s, &p).get(), 0.525, epsilon = 1e-15);
        let mut full = s;
        full.experience = UnitValue::ONE;
        assert_eq!(update_experience(&full, &p).get(), 1.0);
        let mut idle = s;
        idle.info_seeking = UnitValue::ZERO;
        assert_eq!(update_experience(&idle, &p).get(), 0.5);
    }

    #[test]
    fn physical_examples() {
        let p = DynamicsParams::default();
        let (s, x, _) = table_one();
        assert_abs_diff_eq!(update_physical(&s, &x, 0.0, &p).get(), 0.938, epsilon = 1e-15);
        // full health is unaffected by aid
        assert_abs_diff_eq!(update_physical(&s, &x, 10.0, &p).get(), 0.938, epsilon = 1e-15);

        let (qx, _) = quiet();
        let mut t = s;
        assert_eq!(update_physical(&t, &qx, 0.0, &p).get(), 1.0);
        t.physical_health = u(0.5);
        assert_abs_diff_eq!(update_physical(&t, &qx, 0.0, &p).get(), 0.525, epsilon = 1e-15);
        // aid adds r_A·A·(1−P)·α_P
        let a = aid(5.0, &p);
        assert_eq!(a, 0.5);
        assert_abs_diff_eq!(
            update_physical(&t, &qx, 5.0, &p).get(),
            0.525 + 0.1 * 0.5 * 0.5 * 0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn media_sign() {
        let half = MediaSample { n: UnitValue::ONE, n_pos: u(0.5) };
        assert_eq!(media_stimulus(half), 0.0);
        let good = MediaSample { n: UnitValue::ONE, n_pos: u(0.7) };
        assert!(media_stimulus(good) < 0.0);
    }

    fn table_one_population(n: usize) -> (Vec<AgentState>, EmpathyNetwork, Vec<Exposure>, MediaSample) {
        let (s, x, m) = table_one();
        let matrix: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        (vec![s; n], EmpathyNetwork::from_dense(&matrix).unwrap(), vec![x; n], m)
    }

    #[test]
    fn symmetric_population_matches_single_agent() {
        let p = DynamicsParams::default();
        let (states, net, xs, m) = table_one_population(3);
        let next = step_population(&states, &net, m, &xs, &p).unwrap();
        for a in &next {
            assert_abs_diff_eq!(a.fear.get(), 0.527_333_333_333_333, epsilon = 1e-12);
            assert_abs_diff_eq!(a.risk.get(), 0.5025, epsilon = 1e-15);
            assert_abs_diff_eq!(a.info_seeking.get(), 0.4875, epsilon = 1e-15);
            assert_abs_diff_eq!(a.cooperation.get(), 0.5275, epsilon = 1e-15);
            assert_abs_diff_eq!(a.flexibility.get(), 0.99, epsilon = 1e-15);
            assert_abs_diff_eq!(a.experience.get(), 0.525, epsilon = 1e-15);
            assert_abs_diff_eq!(a.physical_health.get(), 0.938, epsilon = 1e-15);
        }
    }

    #[test]
    fn quiescent_population_is_fixed() {
        let p = DynamicsParams::default();
        let mut s = AgentState::uniform(UnitValue::ZERO);
        s.physical_health = UnitValue::ONE;
        let (x, m) = quiet();
        let states = vec![s; 4];
        let next =
            step_population(&states, &EmpathyNetwork::isolated(4), m, &[x; 4], &p).unwrap();
        assert_eq!(next, states);
    }

    #[test]
    fn dimension_mismatch() {
        let p = DynamicsParams::default();
        let (states, net, xs, m) = table_one_population(3);
        assert!(step_population(&states[..2], &net, m, &xs[..2], &p).is_err());
        assert!(step_population(&states, &net, m, &xs[..2], &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(DynamicsParams::default().validate().is_ok());
        let bad = DynamicsParams { gain_fear: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = DynamicsParams { fear_threshold: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let signed = DynamicsParams { risk_experience: -0.25, ..Default::default() };
        assert!(signed.validate().is_ok());
    }

    fn arb_state() -> impl Strategy<Value = AgentState> {
        prop::array::uniform9(0.0f64..=1.0).prop_map(|v| {
            let mut s = AgentState::uniform(UnitValue::ZERO);
            for (var, x) in StateVar::ALL.into_iter().zip(v) {
                s.set(var, UnitValue::new(x).unwrap());
            }
            s
        })
    }

    fn arb_exposure() -> impl Strategy<Value = Exposure> {
        (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(z, s, q)| Exposure {
            injury: UnitValue::new(z).unwrap(),
            services: UnitValue::new(s).unwrap(),
            q_total: UnitValue::new(q).unwrap(),
        })
    }

    proptest! {
        #[test]
        fn updates_stay_in_unit_interval(
            s in arb_state(), x in arb_exposure(), n in 0.0f64..=1.0, np in 0.0f64..=1.0,
            ehat in 0.0f64..=1.0, support in 0.0f64..50.0,
        ) {
            let p = DynamicsParams::default();
            let m = MediaSample { n: u(n), n_pos: u(np) };
            let nb = Neighborhood { mean_fear: u(ehat), support };
            let next = step_agent(&s, &nb, m, &x, &p);
            for var in StateVar::ALL {
                let v = next.get(var).get();
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(next.experience >= s.experience);
        }

        #[test]
        fn fear_monotone_in_damping_and_threat(
            s in arb_state(), x in arb_exposure(), bump in 0.0f64..0.5,
        ) {
            let p = DynamicsParams::default();
            let m = MediaSample { n: UnitValue::ONE, n_pos: UnitValue::ZERO };
            let nb = Neighborhood::alone(&s);
            let base = update_fear(&s, &nb, m, &x, &p).get();

            for var in [StateVar::Flexibility, StateVar::Cooperation, StateVar::Experience] {
                let mut t = s;
                t.set(var, UnitValue::saturate(s.get(var).get() + bump));
                prop_assert!(update_fear(&t, &nb, m, &x, &p).get() <= base + 1e-15);
            }
            let worse = [
                Exposure { injury: UnitValue::saturate(x.injury.get() + bump), ..x },
                Exposure { q_total: UnitValue::saturate(x.q_total.get() - bump), ..x },
                Exposure { services: UnitValue::saturate(x.services.get() - bump), ..x },
            ];
            for w in worse {
                prop_assert!(update_fear(&s, &nb, m, &w, &p).get() >= base - 1e-15);
            }
        }

        #[test]
        fn population_step_is_order_independent(
            seed_states in prop::collection::vec(arb_state(), 2..7),
            rot in 1usize..6,
        ) {
            let p = DynamicsParams::default();
            let n = seed_states.len();
            let matrix: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 0.3 + 0.1 * ((i + j) % 3) as f64 }).collect())
                .collect();
            let net = EmpathyNetwork::from_dense(&matrix).unwrap();
            let (x, _) = quiet();
            let m = MediaSample { n: UnitValue::ONE, n_pos: u(0.2) };
            let xs = vec![x; n];
            let next = step_population(&seed_states, &net, m, &xs, &p).unwrap();

            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let permuted: Vec<AgentState> = perm.iter().map(|&i| seed_states[i]).collect();
            let pmatrix: Vec<Vec<f64>> =
                perm.iter().map(|&i| perm.iter().map(|&j| matrix[i][j]).collect()).collect();
            let pnet = EmpathyNetwork::from_dense(&pmatrix).unwrap();
            let pnext = step_population(&permuted, &pnet, m, &xs, &p).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                for var in StateVar::ALL {
                    prop_assert!((pnext[k].get(var).get() - next[i].get(var).get()).abs() < 1e-12);
                }
            }
        }
    }
}
