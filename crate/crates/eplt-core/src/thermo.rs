//! Thermodynamic calculus for the thermalization race: δ-thermalization
//! times, quench energies, finite-twirl iteration counts and the speed-up
//! conditions they imply.
//!
//! Divergent quantities (the quench-energy pole, the δ → 0 limit) are
//! returned as the explicit `f64::INFINITY` sentinel rather than produced by
//! floating-point overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::sup_norm;
use crate::states::DensityOperator;

/// Parameters of a thermalization-race scenario.
///
/// `tau_gamma` and `tau_eta` are the relaxation timescales toward the thermal
/// and the quenched state, `t_unitary` is the wall-clock cost of one twirl
/// factor, `delta` the target accuracy, `p_min` the smallest thermal
/// population and `d` the local dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupScenario {
    pub tau_gamma: f64,
    pub tau_eta: f64,
    pub t_unitary: f64,
    pub delta: f64,
    pub p_min: f64,
    pub d: usize,
}

impl SpeedupScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_gamma > 0.0 && self.tau_eta > 0.0 && self.t_unitary > 0.0) {
            return Err(Error::InvalidParameter("all timescales must be > 0".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {} outside (0, 1)", self.delta)));
        }
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!("local dimension {} < 2", self.d)));
        }
        if !(self.p_min > 0.0 && self.p_min <= 1.0 / self.d as f64 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "p_min {} outside (0, 1/{}]",
                self.p_min, self.d
            )));
        }
        Ok(())
    }

    fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }
}

/// `‖ρ − γ‖_sup ≤ δ` (inclusive).
pub fn delta_thermalizes(lhs: &DensityOperator, gamma: &DensityOperator, delta: f64) -> Result<bool> {
    if lhs.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimensions {} and {}",
            lhs.dim(),
            gamma.dim()
        )));
    }
    Ok(sup_norm(&(lhs.matrix() - gamma.matrix())) <= delta)
}

/// Time for exponential relaxation with timescale `tau` to bring a state at
/// sup-distance `distance` within `delta` of the target:
/// `τ·ln(distance/δ)`, clamped at 0 once already δ-close, `+∞` as `δ → 0`.
pub fn partial_thermalization_time_from_distance(distance: f64, delta: f64, tau: f64) -> f64 {
    if delta <= 0.0 {
        return if distance > 0.0 { f64::INFINITY } else { 0.0 };
    }
    if distance <= delta {
        return 0.0;
    }
    tau * (distance / delta).ln()
}

/// [`partial_thermalization_time_from_distance`] for explicit states.
pub fn partial_thermalization_time(
    rho: &DensityOperator,
    gamma: &DensityOperator,
    delta: f64,
    tau: f64,
) -> Result<f64> {
    if rho.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimensions {} and {}",
            rho.dim(),
            gamma.dim()
        )));
    }
    Ok(partial_thermalization_time_from_distance(
        sup_norm(&(rho.matrix() - gamma.matrix())),
        delta,
        tau,
    ))
}

/// Upper bound on the δ-thermalization time of the quench protocol:
/// `t_twirl + τ_η·ln(1/(d·P_min))`, independent of the input state and of δ.
pub fn eplt_time_bound(scenario: &SpeedupScenario, t_twirl: f64) -> Result<f64> {
    scenario.validate()?;
    Ok(t_twirl + scenario.tau_eta * (1.0 / (scenario.d as f64 * scenario.p_min)).ln())
}

/// Quenched gap for a qubit with Hamiltonian gap `e` at temperature `kt`:
/// the new gap whose thermal state is the quenched state at strength
/// `epsilon`. Diverges (`+∞`) at `ε* = 2·e^{−E/kT}/Z` where the quenched
/// ground state becomes pure.
pub fn quench_energy(e: f64, kt: f64, epsilon: f64) -> Result<f64> {
    if !(kt > 0.0) {
        return Err(Error::InvalidParameter(format!("kT {kt} must be > 0")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange { epsilon, max: 1.0 });
    }
    let z = 1.0 + (-e / kt).exp();
    let eps_star = 2.0 * (-e / kt).exp() / z;
    // the pole itself is a semantic outcome, not an overflow
    if epsilon >= eps_star * (1.0 - 1e-12) {
        return Ok(f64::INFINITY);
    }
    let numerator = 2.0 - epsilon * z * (e / kt).exp();
    let denominator = 2.0 - epsilon * z;
    Ok(e - kt * (numerator / denominator).ln())
}

/// The paper-style ceiling: smallest integer **strictly larger** than `x`
/// (differs from `ceil` at integers).
fn strict_ceiling(x: f64) -> i64 {
    let rounded = x.round();
    if (x - rounded).abs() < 1e-9 {
        rounded as i64 + 1
    } else {
        x.ceil() as i64
    }
}

/// Number of random-unitary factors needed so the finite twirl
/// δ-thermalizes every input: `⌈8·log₂(d²·P_min·√2/δ)⌉` under the
/// strictly-larger ceiling convention, floored at 0.
pub fn required_twirl_factors(scenario: &SpeedupScenario) -> Result<u64> {
    scenario.validate()?;
    let d2 = (scenario.d * scenario.d) as f64;
    let x = 8.0 * (d2 * scenario.p_min * 2f64.sqrt() / scenario.delta).log2();
    Ok(strict_ceiling(x).max(0) as u64)
}

/// Chebyshev tail bound for the finite-twirl error: the probability that
/// `‖T − T^{(N)}‖²_sup` exceeds its mean bound `2^{−N}` by more than `slack`
/// is below `1/(slack²·2^N)` (capped at 1).
pub fn chebyshev_tail(n_factors: u32, slack: f64) -> Result<f64> {
    if n_factors == 0 {
        return Err(Error::InvalidParameter("need at least one twirl factor".into()));
    }
    if !(slack > 0.0) {
        return Err(Error::InvalidParameter(format!("slack {slack} must be > 0")));
    }
    Ok((1.0 / (slack * slack * 2f64.powi(n_factors as i32))).min(1.0))
}

/// Success probability of the finite-twirl protocol at the canonical slack
/// `λ = 2^{−N/4}`: `1 − 2^{−N/2}`.
pub fn twirl_success_probability(n_factors: u64) -> Result<f64> {
    let tail = chebyshev_tail(
        u32::try_from(n_factors).map_err(|_| Error::InvalidParameter("factor count overflow".into()))?,
        2f64.powf(-(n_factors as f64) / 4.0),
    )?;
    Ok(1.0 - tail)
}

/// Speed-up is guaranteed for small enough δ iff the thermal relaxation is
/// slower than `8/ln 2 ≈ 11.5416` twirl factors.
pub fn speedup_condition(scenario: &SpeedupScenario) -> Result<bool> {
    scenario.validate()?;
    Ok(scenario.tau_gamma > scenario.t_unitary * 8.0 / 2f64.ln())
}

/// The state-distance threshold above which the finite-twirl protocol beats
/// plain relaxation at accuracy δ: `f·δ^{1 − (t_U/τ_γ)(8/ln 2)}` with
/// `f = (dP_min)^{−τ_η/τ_γ}·e^{t_U/τ_γ}·(d²P_min√2)^{(t_U/τ_γ)(8/ln 2)}`.
pub fn speedup_state_threshold(scenario: &SpeedupScenario) -> Result<f64> {
    scenario.validate()?;
    let d = scenario.d as f64;
    let ratio = scenario.t_unitary / scenario.tau_gamma;
    let rate = ratio * 8.0 / 2f64.ln();
    let f = (d * scenario.p_min).powf(-scenario.tau_eta / scenario.tau_gamma)
        * ratio.exp()
        * (d * d * scenario.p_min * 2f64.sqrt()).powf(rate);
    Ok(f * scenario.delta.powf(1.0 - rate))
}

/// Full comparison record between plain relaxation and the finite-twirl
/// protocol at one accuracy δ.
#[derive(Debug, Clone, Serialize)]
pub struct RaceReport {
    /// `‖ρ − γ‖_sup` of the race's initial state.
    pub distance: f64,
    pub delta: f64,
    /// Plain-relaxation time to δ-thermality.
    pub t_partial: f64,
    /// Input-independent bound for the ideal (infinite-design) protocol;
    /// `t_twirl` may be `+∞`.
    pub t_eplt_bound: f64,
    /// Factors used by the finite twirl at this δ.
    pub n_factors: u64,
    /// Realized finite-twirl protocol time `τ_η·ln(1/(dP_min)) + N_δ·t_U`.
    pub t_eplt_finite: f64,
    /// Whether the finite-twirl protocol wins at this δ.
    pub eplt_wins: bool,
    /// Accuracy below which the finite-twirl protocol always wins for this
    /// state; `None` when no crossover exists (e.g. `ρ = γ` or no speed-up).
    pub crossover_delta: Option<f64>,
    pub state_threshold: f64,
    pub success_probability: f64,
    pub speedup_condition: bool,
}

/// Race the finite-twirl protocol against plain exponential relaxation for
/// a concrete initial state.
pub fn race_report(
    scenario: &SpeedupScenario,
    rho: &DensityOperator,
    gamma: &DensityOperator,
    t_twirl: f64,
) -> Result<RaceReport> {
    if rho.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimensions {} and {}",
            rho.dim(),
            gamma.dim()
        )));
    }
    race_report_from_distance(scenario, sup_norm(&(rho.matrix() - gamma.matrix())), t_twirl)
}

/// [`race_report`] with the initial sup-distance given directly.
pub fn race_report_from_distance(
    scenario: &SpeedupScenario,
    distance: f64,
    t_twirl: f64,
) -> Result<RaceReport> {
    scenario.validate()?;
    if !(0.0..=1.0 + 1e-12).contains(&distance) {
        return Err(Error::InvalidParameter(format!("distance {distance} outside [0, 1]")));
    }
    let finite_time = |delta: f64| -> Result<(u64, f64)> {
        let s = scenario.with_delta(delta);
        let n = required_twirl_factors(&s)?;
        let base = scenario.tau_eta * (1.0 / (scenario.d as f64 * scenario.p_min)).ln();
        Ok((n, base + n as f64 * scenario.t_unitary))
    };
    let (n_factors, t_eplt_finite) = finite_time(scenario.delta)?;
    let t_partial =
        partial_thermalization_time_from_distance(distance, scenario.delta, scenario.tau_gamma);
    let eplt_wins = t_eplt_finite < t_partial;
    let speedup = speedup_condition(scenario)?;

    // Bisection on ln δ for the unique winner flip, when one exists.
    let crossover_delta = if distance <= 0.0 || !speedup {
        None
    } else {
        let pt = |delta: f64| {
            partial_thermalization_time_from_distance(distance, delta, scenario.tau_gamma)
        };
        let eplt_beats = |delta: f64| -> Result<bool> { Ok(finite_time(delta)?.1 < pt(delta)) };
        // bracket: walk down from δ where relaxation trivially wins
        let mut hi = distance.min(0.999);
        let mut lo = hi;
        let mut found = false;
        for _ in 0..2000 {
            lo /= 2.0;
            if lo <= f64::MIN_POSITIVE * 1e10 {
                break;
            }
            if eplt_beats(lo)? {
                found = true;
                break;
            }
            hi = lo;
        }
        if found {
            let (mut ulo, mut uhi) = (lo.ln(), hi.ln());
            while uhi - ulo > 1e-6 {
                let mid = 0.5 * (ulo + uhi);
                if eplt_beats(mid.exp())? {
                    ulo = mid;
                } else {
                    uhi = mid;
                }
            }
            Some((0.5 * (ulo + uhi)).exp())
        } else {
            None
        }
    };

    Ok(RaceReport {
        distance,
        delta: scenario.delta,
        t_partial,
        t_eplt_bound: eplt_time_bound(scenario, t_twirl)?,
        n_factors,
        t_eplt_finite,
        eplt_wins,
        crossover_delta,
        state_threshold: speedup_state_threshold(scenario)?,
        success_probability: twirl_success_probability(n_factors)?,
        speedup_condition: speedup,
    })
}
