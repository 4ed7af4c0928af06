//! Single-server queues driven by a cyclic base: the loss queue G/G/1/1 and
//! the queue with impatient customers, their derived quantities, Flipo's
//! index recursion and perfect sampling for the i.i.d. case.
//!
//! Workload seen by an arriving customer, `σ` service, `ξ` inter-arrival,
//! `D` patience:
//!
//! ```text
//! loss        φ_ω(x) = [x + σ(ω)·1{x = 0}    − ξ(ω)]⁺
//! impatience  φ_ω(x) = [x + σ(ω)·1{x ≤ D(ω)} − ξ(ω)]⁺
//! ```

mod cftp;
mod flipo;
mod impatience;
mod loss;

pub use cftp::{cftp_estimate, cftp_sample, CftpConfig, CftpEstimate, CftpSample, DiscreteDistribution};
pub use flipo::{flipo_compare, FlipoRun};
pub use impatience::{
    build_impatience, build_impatience_with_step, cargo_check, envelopes, CardinalBounds, CargoVerdict, Envelopes,
    ImpatienceModel, ImpatienceParams, ImpatienceReport,
};
pub use loss::{build_loss, build_loss_with_step, LossModel, LossParams, LossReport};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{rational_gcd, Rational};
use crate::system::{FiniteCyclicSystem, Sample};

/// Exact lattice step `α`: the gcd of all service and inter-arrival values.
pub fn lattice_step(service: &[Rational], interarrival: &[Rational]) -> Result<Rational> {
    rational_gcd(service.iter().chain(interarrival))
        .ok_or_else(|| Error::InvalidParams("lattice step is zero (all values vanish)".into()))
}

fn check_len(system: &FiniteCyclicSystem, name: &str, values: &[Rational]) -> Result<()> {
    if values.len() != system.period() {
        return Err(Error::InvalidParams(format!(
            "{name} has {} values for a period of {}",
            values.len(),
            system.period()
        )));
    }
    Ok(())
}

fn check_step_divides(step: &Rational, values: &[Rational], name: &str) -> Result<()> {
    if step <= &Rational::zero() {
        return Err(Error::InvalidLattice("step must be positive".into()));
    }
    if values.iter().any(|v| !(v / step).is_integer()) {
        return Err(Error::InvalidLattice(format!("{name} values are not multiples of the step")));
    }
    Ok(())
}

/// `(i, v(θ^{-i}ω) − Σ_{j=1}^{i} ξ(θ^{-j}ω))` for `i = 1, 2, …`, stopping at
/// the first `i` whose cumulative inter-arrival reaches `max v`. Every later
/// term is strictly negative, so suprema and positive-index sets over all
/// `i ≥ 1` are exactly those over the returned prefix.
pub(crate) fn backward_terms(
    system: &FiniteCyclicSystem,
    values: &[Rational],
    interarrival: &[Rational],
    sample: Sample,
) -> Vec<(usize, Rational)> {
    let ceiling = values.iter().copied().max().unwrap_or_default();
    let mut out = Vec::new();
    let mut cumulative = Rational::zero();
    let mut i = 0usize;
    loop {
        i += 1;
        let w = system.shift(sample, -(i as i64));
        cumulative += interarrival[w.0];
        out.push((i, values[w.0] - cumulative));
        if cumulative >= ceiling {
            return out;
        }
    }
}

/// Indices `i ≥ 1` with positive backward term.
pub(crate) fn positive_indices(
    system: &FiniteCyclicSystem,
    values: &[Rational],
    interarrival: &[Rational],
    sample: Sample,
) -> Vec<usize> {
    backward_terms(system, values, interarrival, sample)
        .into_iter()
        .filter(|(_, t)| *t > Rational::zero())
        .map(|(i, _)| i)
        .collect()
}

/// `[max_{i ≥ 1} (v(θ^{-i}ω) − Σ_{j ≤ i} ξ(θ^{-j}ω))]⁺`.
pub(crate) fn backward_sup(
    system: &FiniteCyclicSystem,
    values: &[Rational],
    interarrival: &[Rational],
    sample: Sample,
) -> Rational {
    backward_terms(system, values, interarrival, sample)
        .into_iter()
        .map(|(_, t)| t)
        .fold(Rational::zero(), Rational::max)
}

/// `min{n > 0 : P(v ≤ n) > 0}` on the uniform finite base.
pub(crate) fn min_positive_level(values: &[usize]) -> usize {
    values.iter().copied().min().unwrap_or(0).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn backward_terms_stop_once_drift_dominates() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let sigma = [r(1, 1), r(11, 2)];
        let xi = [r(1, 1), r(1, 1)];
        let terms = backward_terms(&sys, &sigma, &xi, Sample(0));
        assert_eq!(terms.len(), 6);
        assert_eq!(terms[0], (1, r(9, 2)));
        assert_eq!(terms[4], (5, r(1, 2)));
        assert_eq!(positive_indices(&sys, &sigma, &xi, Sample(0)), vec![1, 3, 5]);
        assert_eq!(positive_indices(&sys, &sigma, &xi, Sample(1)), vec![2, 4]);
        assert_eq!(backward_sup(&sys, &sigma, &xi, Sample(1)), r(7, 2));
    }

    #[test]
    fn step_is_gcd_of_service_and_interarrival() {
        assert_eq!(lattice_step(&[r(1, 2), r(3, 2)], &[r(1, 1)]).unwrap(), r(1, 2));
        assert_eq!(lattice_step(&[r(3, 1), r(2, 1)], &[r(1, 1)]).unwrap(), r(1, 1));
        assert!(lattice_step(&[r(0, 1)], &[r(0, 1)]).is_err());
    }
}
