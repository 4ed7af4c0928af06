use std::collections::BTreeSet;

use num_traits::Zero;

use super::{check_len, check_step_divides, lattice_step, min_positive_level, positive_indices};
use crate::backwards::RandomSet;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::system::{indicator, positive_part, DrivingMap, FiniteCyclicSystem, StateLattice};

/// Per-sample service `σ(ω) ≥ 0` and inter-arrival `ξ(ω) > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossParams {
    pub service: Vec<Rational>,
    pub interarrival: Vec<Rational>,
}

impl LossParams {
    pub fn new(service: Vec<Rational>, interarrival: Vec<Rational>) -> Result<Self> {
        if service.len() != interarrival.len() {
            return Err(Error::InvalidParams("service and inter-arrival lengths differ".into()));
        }
        if service.iter().any(|s| *s < Rational::zero()) {
            return Err(Error::InvalidParams("service times must be nonnegative".into()));
        }
        if interarrival.iter().any(|x| *x <= Rational::zero()) {
            return Err(Error::InvalidParams("inter-arrival times must be positive".into()));
        }
        Ok(Self { service, interarrival })
    }

    fn check_against(&self, system: &FiniteCyclicSystem) -> Result<()> {
        check_len(system, "service", &self.service)?;
        check_len(system, "inter-arrival", &self.interarrival)
    }

    pub fn max_service(&self) -> Rational {
        self.service.iter().copied().max().unwrap_or_default()
    }
}

/// Derived quantities of the loss queue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossReport {
    pub step: Rational,
    /// `A_ω = {i > 0 : σ(θ^{-i}ω) − Σ_{j ≤ i} ξ(θ^{-j}ω) > 0}`: customers that
    /// may still be in service at time 0 if they found the system empty.
    pub busy: Vec<Vec<usize>>,
    /// `γ(ω) = max A_ω`, `0` when `A_ω` is empty.
    pub gamma: Vec<usize>,
    /// `g = min{n > 0 : P(γ ≤ n) > 0}`.
    pub g: usize,
    /// `B_ω = {[σ(θ^{-i}ω) − Σ_{j ≤ i} ξ(θ^{-j}ω)]⁺ : i = 1..g}`.
    pub busy_values: Vec<BTreeSet<Rational>>,
}

impl LossReport {
    /// `B` as a random set of lattice states; values off the lattice are dropped.
    pub fn busy_value_states(&self, lattice: &StateLattice) -> RandomSet {
        RandomSet::new(
            self.busy_values
                .iter()
                .map(|vals| vals.iter().filter_map(|v| lattice.state_of(v)).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct LossModel {
    pub lattice: StateLattice,
    pub map: DrivingMap,
    pub report: LossReport,
    /// `L_α ∩ [0, max σ]` at every sample.
    pub default_g: RandomSet,
}

/// Loss queue on `L_α ∩ [0, x_max]` with `α = gcd(σ, ξ)` and `x_max`
/// defaulting to `max σ`.
pub fn build_loss(system: &FiniteCyclicSystem, params: &LossParams, x_max: Option<Rational>) -> Result<LossModel> {
    params.check_against(system)?;
    let step = lattice_step(&params.service, &params.interarrival)?;
    build_loss_with_step(system, params, step, x_max)
}

/// As [`build_loss`] on a caller-chosen step, which must divide every `σ` and `ξ`.
pub fn build_loss_with_step(
    system: &FiniteCyclicSystem,
    params: &LossParams,
    step: Rational,
    x_max: Option<Rational>,
) -> Result<LossModel> {
    params.check_against(system)?;
    check_step_divides(&step, &params.service, "service")?;
    check_step_divides(&step, &params.interarrival, "inter-arrival")?;
    let x_max = x_max.unwrap_or_else(|| params.max_service());
    let lattice = StateLattice::new(step, x_max)?;
    let sigma = &params.service;
    let xi = &params.interarrival;
    let map = DrivingMap::from_rule(system, &lattice, |w, x| {
        positive_part(x + sigma[w.0] * indicator(x.is_zero()) - xi[w.0])
    })?;

    let busy: Vec<Vec<usize>> = system.samples().map(|w| positive_indices(system, sigma, xi, w)).collect();
    let gamma: Vec<usize> = busy.iter().map(|a| a.last().copied().unwrap_or(0)).collect();
    let g = min_positive_level(&gamma);
    let busy_values = system
        .samples()
        .map(|w| {
            let mut cumulative = Rational::zero();
            (1..=g)
                .map(|i| {
                    let v = system.shift(w, -(i as i64));
                    cumulative += xi[v.0];
                    positive_part(sigma[v.0] - cumulative)
                })
                .collect()
        })
        .collect();

    let top = lattice.range(&Rational::zero(), &params.max_service());
    let default_g = RandomSet::new(vec![top; system.period()]);
    Ok(LossModel {
        report: LossReport {
            step,
            busy,
            gamma,
            g,
            busy_values,
        },
        lattice,
        map,
        default_g,
    })
}
