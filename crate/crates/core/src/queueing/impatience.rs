use num_traits::Zero;

use super::{
    backward_sup, check_len, check_step_divides, lattice_step, min_positive_level, positive_indices, LossParams,
};
use crate::backwards::RandomSet;
use crate::error::{Error, Result};
use crate::rational::{ceil_int, floor_int, rational_gcd, Rational};
use crate::system::{indicator, positive_part, DrivingMap, FiniteCyclicSystem, StateLattice};

/// Loss-queue parameters plus a per-sample patience `D(ω) ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpatienceParams {
    pub service: Vec<Rational>,
    pub interarrival: Vec<Rational>,
    pub patience: Vec<Rational>,
}

impl ImpatienceParams {
    pub fn new(service: Vec<Rational>, interarrival: Vec<Rational>, patience: Vec<Rational>) -> Result<Self> {
        let loss = LossParams::new(service, interarrival)?;
        if patience.len() != loss.service.len() {
            return Err(Error::InvalidParams("patience length differs from service length".into()));
        }
        if patience.iter().any(|d| *d < Rational::zero()) {
            return Err(Error::InvalidParams("patience times must be nonnegative".into()));
        }
        Ok(Self {
            service: loss.service,
            interarrival: loss.interarrival,
            patience,
        })
    }

    pub fn loss(&self) -> LossParams {
        LossParams {
            service: self.service.clone(),
            interarrival: self.interarrival.clone(),
        }
    }

    fn check_against(&self, system: &FiniteCyclicSystem) -> Result<()> {
        check_len(system, "service", &self.service)?;
        check_len(system, "inter-arrival", &self.interarrival)?;
        check_len(system, "patience", &self.patience)
    }

    fn combined(&self, f: impl Fn(Rational, Rational) -> Rational) -> Vec<Rational> {
        self.service.iter().zip(&self.patience).map(|(s, d)| f(*s, *d)).collect()
    }

    /// `max_ω (σ(ω) + D(ω))`, the default upper end of the state space.
    pub fn default_x_max(&self) -> Rational {
        self.combined(|s, d| s + d).into_iter().max().unwrap_or_default()
    }
}

/// Upper bounds on the cardinal `c`, all expressed as state counts.
///
/// Each per-sample bound is valid on an event of positive probability, hence
/// everywhere since `c` is deterministic; on the finite base that means the
/// minimum over the samples where the event holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalBounds {
    /// `⌊max_{i ≤ p} (σ ∨ D)(θ^{-i}ω) / α⌋ + 1` over samples with `ρ ≤ p`.
    pub max_sd: i64,
    /// `Σ_{j ≤ p} σ(θ^{-j}ω) / α + 1` over samples with `ρ ≤ p`.
    pub sum_p: i64,
    /// `(max_{i ≤ p} σ(θ^{-i}ω) + Σ_{j ≤ t} σ(θ^{-j}ω)) / α + 1` over samples
    /// with `ρ ≤ p` and `τ⁻ ≤ t`; `None` when no sample has both.
    pub max_plus_sum: Option<i64>,
    /// Minimum of the three bounds above.
    pub combined: i64,
    /// `min_ω ⌊W(ω) / α⌋ + 1` with `W(ω) = max_{i ∈ B_ω} (σ(θ^{-i}ω) + Σ_{j ∈ A_ω, j < i} σ(θ^{-j}ω))`,
    /// the largest workload the customers possibly present at time 0 can carry.
    pub general: i64,
    /// `s̄ · min(t + 1, p) + 1`.
    pub sbar_tp: i64,
    /// `max(1, ⌈s̄ (E[D] + E[ξ]) / E[ξ]⌉)`.
    pub etoile: i64,
    /// `⌊max σ ∨ max D⌋ + 1` with σ and D read in time units.
    pub sd_time: i64,
    /// `max(s̄, d̄) + 1` with s̄ and d̄ read as lattice counts.
    pub sd_count: i64,
}

impl CardinalBounds {
    /// Every emitted bound with its label, in a fixed order.
    pub fn labeled(&self) -> Vec<(&'static str, Option<i64>)> {
        vec![
            ("max_sd", Some(self.max_sd)),
            ("sum_p", Some(self.sum_p)),
            ("max_plus_sum", self.max_plus_sum),
            ("combined", Some(self.combined)),
            ("general", Some(self.general)),
            ("sbar_tp", Some(self.sbar_tp)),
            ("etoile", Some(self.etoile)),
            ("sd_time", Some(self.sd_time)),
            ("sd_count", Some(self.sd_count)),
        ]
    }

    /// Labels of the bounds that `c` exceeds.
    pub fn violated_by(&self, c: usize) -> Vec<&'static str> {
        self.labeled()
            .into_iter()
            .filter(|(_, b)| b.is_some_and(|b| (c as i64) > b))
            .map(|(name, _)| name)
            .collect()
    }
}

/// `E[D]` against `E[ξ(θ^{-1}·) Card A]`, both exact uniform averages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CargoVerdict {
    pub expected_patience: Rational,
    pub weighted_waiting: Rational,
    /// Strict inequality `E[D] > E[ξ∘θ^{-1} · Card A]`.
    pub holds: bool,
    pub etoile: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpatienceReport {
    pub params: ImpatienceParams,
    pub step: Rational,
    /// Loynes solution of `χ`.
    pub y: Vec<Rational>,
    /// Loynes solution of `ψ`.
    pub z: Vec<Rational>,
    /// `A_ω`: customers possibly waiting at time 0.
    pub waiting: Vec<Vec<usize>>,
    pub tau_minus: Vec<usize>,
    pub tau_plus: Vec<usize>,
    /// `B_ω`: customers possibly in the system at time 0.
    pub present: Vec<Vec<usize>>,
    pub rho: Vec<usize>,
    pub p: usize,
    pub t: usize,
    pub s_under: i64,
    pub s_bar: i64,
    pub d_bar: i64,
    /// `M(ω) = σ(θ^{-ρ}ω) + Σ_{j ∈ A_ω} σ(θ^{-j}ω)`, with the first term `0` when `B_ω` is empty.
    /// Not an upper bound on `H_ω` in general: the customer in service need not be `C_{-ρ}`.
    pub m: Vec<Rational>,
    /// `W(ω)`, see [`CardinalBounds::general`].
    pub max_workload: Vec<Rational>,
    pub bounds: CardinalBounds,
    pub cargo: CargoVerdict,
}

#[derive(Debug, Clone)]
pub struct ImpatienceModel {
    pub lattice: StateLattice,
    pub map: DrivingMap,
    pub report: ImpatienceReport,
    /// `L_α ∩ [Y(ω), Z(ω)]`.
    pub default_g: RandomSet,
}

fn impatience_rule(params: &ImpatienceParams) -> impl Fn(crate::system::Sample, Rational) -> Rational + '_ {
    |w, x| {
        let i = w.0;
        positive_part(x + params.service[i] * indicator(x <= params.patience[i]) - params.interarrival[i])
    }
}

/// Impatience queue on `L_α ∩ [0, x_max]`, `α = gcd(σ, ξ)`, `x_max`
/// defaulting to `max (σ + D)`.
pub fn build_impatience(
    system: &FiniteCyclicSystem,
    params: &ImpatienceParams,
    x_max: Option<Rational>,
) -> Result<ImpatienceModel> {
    params.check_against(system)?;
    let step = lattice_step(&params.service, &params.interarrival)?;
    build_impatience_with_step(system, params, step, x_max)
}

/// As [`build_impatience`] on a caller-chosen step dividing every `σ` and `ξ`.
pub fn build_impatience_with_step(
    system: &FiniteCyclicSystem,
    params: &ImpatienceParams,
    step: Rational,
    x_max: Option<Rational>,
) -> Result<ImpatienceModel> {
    params.check_against(system)?;
    check_step_divides(&step, &params.service, "service")?;
    check_step_divides(&step, &params.interarrival, "inter-arrival")?;
    let x_max = x_max.unwrap_or_else(|| params.default_x_max());
    let lattice = StateLattice::new(step, x_max)?;
    let map = DrivingMap::from_rule(system, &lattice, impatience_rule(params))?;
    let report = impatience_report(system, params, step)?;
    let default_g = RandomSet::new(
        system
            .samples()
            .map(|w| lattice.range(&report.y[w.0], &report.z[w.0]))
            .collect(),
    );
    Ok(ImpatienceModel {
        lattice,
        map,
        report,
        default_g,
    })
}

fn impatience_report(system: &FiniteCyclicSystem, params: &ImpatienceParams, step: Rational) -> Result<ImpatienceReport> {
    let sigma = &params.service;
    let xi = &params.interarrival;
    let d = &params.patience;
    let k = system.period();
    let shifted = |w: crate::system::Sample, i: usize| system.shift(w, -(i as i64)).0;

    let lower = params.combined(|s, d| s.min(d));
    let upper = params.combined(|s, d| s + d);
    let y: Vec<Rational> = system.samples().map(|w| backward_sup(system, &lower, xi, w)).collect();
    let z: Vec<Rational> = system.samples().map(|w| backward_sup(system, &upper, xi, w)).collect();

    let waiting: Vec<Vec<usize>> = system.samples().map(|w| positive_indices(system, d, xi, w)).collect();
    let present: Vec<Vec<usize>> = system.samples().map(|w| positive_indices(system, &upper, xi, w)).collect();
    let tau_minus: Vec<usize> = waiting.iter().map(|a| a.last().copied().unwrap_or(0)).collect();
    let rho: Vec<usize> = present.iter().map(|b| b.last().copied().unwrap_or(0)).collect();
    let tau_plus: Vec<usize> = system
        .samples()
        .map(|w| {
            let mut total = Rational::zero();
            let mut i = 0usize;
            loop {
                total += xi[system.shift(w, i as i64).0];
                i += 1;
                if total >= d[w.0] {
                    return i;
                }
            }
        })
        .collect();
    let p = min_positive_level(&rho);
    let t = min_positive_level(&tau_minus);

    let max_sigma = sigma.iter().copied().max().unwrap_or_default();
    let min_sigma = sigma.iter().copied().min().unwrap_or_default();
    let max_d = d.iter().copied().max().unwrap_or_default();
    let s_under = ceil_int(&(min_sigma / step));
    let s_bar = ceil_int(&(max_sigma / step));
    let d_bar = ceil_int(&(max_d / step));

    let m: Vec<Rational> = system
        .samples()
        .map(|w| {
            let head = if rho[w.0] == 0 { Rational::zero() } else { sigma[shifted(w, rho[w.0])] };
            waiting[w.0].iter().fold(head, |acc, &j| acc + sigma[shifted(w, j)])
        })
        .collect();

    let max_workload: Vec<Rational> = system
        .samples()
        .map(|w| {
            present[w.0]
                .iter()
                .map(|&i| {
                    let queue = waiting[w.0].iter().filter(|&&j| j < i);
                    queue.fold(sigma[shifted(w, i)], |acc, &j| acc + sigma[shifted(w, j)])
                })
                .max()
                .unwrap_or_default()
        })
        .collect();

    let counts = |x: Rational| floor_int(&(x / step)) + 1;
    let window_max = |w, vals: &[Rational], n: usize| (1..=n).map(|i| vals[shifted(w, i)]).max().unwrap_or_default();
    let window_sum = |w, n: usize| (1..=n).fold(Rational::zero(), |acc, j| acc + sigma[shifted(w, j)]);
    let sd = params.combined(|s, d| s.max(d));
    let eligible: Vec<_> = system.samples().filter(|w| rho[w.0] <= p).collect();
    let max_sd = eligible.iter().map(|&w| counts(window_max(w, &sd, p))).min();
    let sum_p = eligible.iter().map(|&w| counts(window_sum(w, p))).min();
    let max_plus_sum = eligible
        .iter()
        .filter(|w| tau_minus[w.0] <= t)
        .map(|&w| counts(window_max(w, sigma, p) + window_sum(w, t)))
        .min();
    let (max_sd, sum_p) = match (max_sd, sum_p) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Internal("no sample satisfies rho <= p".into())),
    };
    let combined = max_plus_sum.map_or(max_sd.min(sum_p), |b| b.min(max_sd).min(sum_p));
    let general = max_workload.iter().map(|v| counts(*v)).min().unwrap_or(1);
    let sbar_tp = s_bar * ((t + 1).min(p) as i64) + 1;

    let kr = Rational::from_integer(k as i64);
    let mean = |vals: &[Rational]| vals.iter().fold(Rational::zero(), |a, v| a + v) / kr;
    let expected_patience = mean(d);
    let mean_xi = mean(xi);
    let weighted: Vec<Rational> = system
        .samples()
        .map(|w| xi[shifted(w, 1)] * Rational::from_integer(waiting[w.0].len() as i64))
        .collect();
    let weighted_waiting = mean(&weighted);
    let etoile = ceil_int(&(Rational::from_integer(s_bar) * (expected_patience + mean_xi) / mean_xi)).max(1);
    let cargo = CargoVerdict {
        holds: expected_patience > weighted_waiting,
        expected_patience,
        weighted_waiting,
        etoile,
    };
    let sd_time = floor_int(&max_sigma.max(max_d)) + 1;
    let sd_count = s_bar.max(d_bar) + 1;

    Ok(ImpatienceReport {
        params: params.clone(),
        step,
        y,
        z,
        waiting,
        tau_minus,
        tau_plus,
        present,
        rho,
        p,
        t,
        s_under,
        s_bar,
        d_bar,
        m,
        max_workload,
        bounds: CardinalBounds {
            max_sd,
            sum_p,
            max_plus_sum,
            combined,
            general,
            sbar_tp,
            etoile,
            sd_time,
            sd_count,
        },
        cargo,
    })
}

/// Both sides of `E[D] > E[ξ∘θ^{-1} · Card A]` and the derived bound.
pub fn cargo_check(report: &ImpatienceReport) -> CargoVerdict {
    report.cargo.clone()
}

/// The exact map between its two monotone envelopes on a common lattice.
#[derive(Debug, Clone)]
pub struct Envelopes {
    /// `L_α'` with `α' = gcd(α, D)`.
    pub lattice: StateLattice,
    /// `χ_ω(x) = [x ∨ (σ ∧ D) − ξ]⁺`.
    pub lower: DrivingMap,
    pub exact: DrivingMap,
    /// `ψ_ω(x) = [x ∨ (σ + D) − ξ]⁺`.
    pub upper: DrivingMap,
}

/// Builds `χ`, `φ`, `ψ` on the lattice refined so that `D` values are states.
pub fn envelopes(system: &FiniteCyclicSystem, params: &ImpatienceParams, x_max: Option<Rational>) -> Result<Envelopes> {
    params.check_against(system)?;
    let alpha = lattice_step(&params.service, &params.interarrival)?;
    let step = rational_gcd(std::iter::once(&alpha).chain(&params.patience)).unwrap_or(alpha);
    let x_max = x_max.unwrap_or_else(|| params.default_x_max());
    let lattice = StateLattice::new(step, x_max)?;
    let sigma = &params.service;
    let xi = &params.interarrival;
    let d = &params.patience;
    let lower = DrivingMap::from_rule(system, &lattice, |w, x| {
        positive_part(x.max(sigma[w.0].min(d[w.0])) - xi[w.0])
    })?;
    let upper = DrivingMap::from_rule(system, &lattice, |w, x| positive_part(x.max(sigma[w.0] + d[w.0]) - xi[w.0]))?;
    let exact = DrivingMap::from_rule(system, &lattice, impatience_rule(params))?;
    Ok(Envelopes {
        lattice,
        lower,
        exact,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queueing::build_loss;
    use crate::rational::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn params(sigma: [&str; 2], d: [&str; 2]) -> ImpatienceParams {
        ImpatienceParams::new(sigma.map(q).to_vec(), vec![q("1"); 2], d.map(q).to_vec()).unwrap()
    }

    #[test]
    fn example_three_report() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let model = build_impatience(&sys, &params(["0.5", "1.5"], ["1.51", "2.01"]), None).unwrap();
        let r = &model.report;
        assert_eq!(r.step, q("0.5"));
        assert_eq!(r.y, vec![q("0.5"), q("0")]);
        assert_eq!(r.z, vec![q("2.51"), q("1.51")]);
        assert_eq!(r.waiting, vec![vec![1], vec![1, 2]]);
        assert_eq!(r.present, vec![vec![1, 2, 3], vec![1, 2]]);
        assert_eq!((r.t, r.p), (1, 2));
        assert_eq!(r.bounds.sd_time, 3);
        let g: Vec<Vec<Rational>> = model
            .default_g
            .sets()
            .iter()
            .map(|s| s.iter().map(|x| model.lattice.value(*x)).collect())
            .collect();
        assert_eq!(g[0], ["0.5", "1", "1.5", "2", "2.5"].map(q).to_vec());
        assert_eq!(g[1], ["0", "0.5", "1", "1.5"].map(q).to_vec());
        let cargo = cargo_check(r);
        assert_eq!(cargo.expected_patience, q("1.76"));
        assert_eq!(cargo.weighted_waiting, q("1.5"));
        assert!(cargo.holds);
    }

    #[test]
    fn example_four_report() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let model = build_impatience(&sys, &params(["3", "2"], ["3.01", "1.99"]), None).unwrap();
        let r = &model.report;
        assert_eq!(r.step, q("1"));
        assert_eq!(r.y, vec![q("1"), q("2")]);
        assert_eq!(r.z, vec![q("4.01"), q("5.01")]);
        assert_eq!(r.waiting, vec![vec![1, 2], vec![1, 3]]);
        assert_eq!(r.present, vec![vec![1, 2, 3, 4, 6], vec![1, 2, 3, 5]]);
        assert_eq!((r.t, r.p), (2, 5));
        assert_eq!(r.bounds.sd_time, 4);
        assert_eq!(r.cargo.expected_patience, q("2.5"));
        // Card A = 2 at both samples, so the inequality is strict: 2.5 > 2
        assert_eq!(r.cargo.weighted_waiting, q("2"));
        assert!(r.cargo.holds);
    }

    #[test]
    fn zero_patience_is_the_loss_queue() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let imp = build_impatience(&sys, &params(["1", "5.5"], ["0", "0"]), None).unwrap();
        let loss = build_loss(&sys, &imp.report.params.loss(), None).unwrap();
        assert_eq!(imp.lattice, loss.lattice);
        assert_eq!(imp.map, loss.map);
        let cargo = cargo_check(&imp.report);
        assert_eq!(cargo.expected_patience, Rational::zero());
        assert_eq!(cargo.weighted_waiting, Rational::zero());
        assert!(!cargo.holds);
    }

    #[test]
    fn envelopes_live_on_refined_lattice() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let env = envelopes(&sys, &params(["0.5", "1.5"], ["1.51", "2.01"]), None).unwrap();
        assert_eq!(env.lattice.step(), q("0.01"));
        assert!(env.lattice.state_of(&q("2.51")).is_some());
    }

    #[test]
    fn tau_plus_counts_arrivals_within_patience() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let model = build_impatience(&sys, &params(["0.5", "1.5"], ["1.51", "2.01"]), None).unwrap();
        assert_eq!(model.report.tau_plus, vec![2, 3]);
    }
}
