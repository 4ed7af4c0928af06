use std::collections::BTreeSet;

use num_traits::Zero;

use super::{build_loss, LossModel, LossParams};
use crate::backwards::{backwards_run, default_max_sweeps, BackwardsRun, RandomSet};
use crate::error::Result;
use crate::rational::Rational;
use crate::system::{DrivingMap, FiniteCyclicSystem, Sample, State, StateLattice};

/// The loss queue described through the index of the last customer who
/// found the server idle, next to the workload description it projects onto.
#[derive(Debug, Clone)]
pub struct FlipoRun {
    pub loss: LossModel,
    pub loss_run: BackwardsRun,
    /// `ℓ_ω` on `{0, …, γ_max + 1}`; state `i` is index `i`.
    pub index_map: DrivingMap,
    /// Backwards scheme for `ℓ` started from the whole index set.
    pub index_run: BackwardsRun,
    /// `(i, F_ω(i))` for `i ∈ Ĥ_ω`, with `F_ω(i) = Φ^i_ω(0)` on the loss map.
    pub projection: Vec<Vec<(usize, State)>>,
    /// `F_ω(Ĥ_ω)`.
    pub image: RandomSet,
    /// `F_ω(Ĥ_ω) = H_ω`, per sample.
    pub surjective: Vec<bool>,
}

impl FlipoRun {
    pub fn is_surjective(&self) -> bool {
        self.surjective.iter().all(|s| *s)
    }

    /// `Ĥ_ω` as plain indices.
    pub fn index_limit(&self, sample: Sample) -> Vec<usize> {
        self.index_run.limit().get(sample).iter().map(|s| s.0).collect()
    }
}

/// Index recursion `ℓ_ω(i) = i + 1` when customer `C_{-(i+1)}`, seen from
/// `θω`, entered an empty system and may still be in service, else `0`.
///
/// The same rule applies at `i = 0`: the customer arriving at `ω` becomes
/// index `1` at `θω` exactly when `1 ∈ A_{θω}`.
pub fn flipo_compare(system: &FiniteCyclicSystem, params: &LossParams) -> Result<FlipoRun> {
    let loss = build_loss(system, params, None)?;
    let loss_run = backwards_run(&loss.map, &loss.default_g, default_max_sweeps(&loss.map, &loss.default_g))?;

    let busy: Vec<BTreeSet<usize>> = loss.report.busy.iter().map(|a| a.iter().copied().collect()).collect();
    let gamma_max = loss.report.gamma.iter().copied().max().unwrap_or(0);
    let index_lattice = StateLattice::new(Rational::from_integer(1), Rational::from_integer(gamma_max as i64 + 1))?;
    let tables = system
        .samples()
        .map(|w| {
            let next = &busy[system.shift(w, 1).0];
            index_lattice
                .states()
                .map(|i| if next.contains(&(i.0 + 1)) { State(i.0 + 1) } else { State(0) })
                .collect()
        })
        .collect();
    let index_map = DrivingMap::from_tables(system, &index_lattice, tables)?;
    let full = RandomSet::full(&index_map);
    let index_run = backwards_run(&index_map, &full, default_max_sweeps(&index_map, &full))?;

    let mut projection = Vec::with_capacity(system.period());
    let mut image_sets = Vec::with_capacity(system.period());
    let mut surjective = Vec::with_capacity(system.period());
    let zero = loss
        .lattice
        .state_of(&Rational::zero())
        .expect("the workload lattice contains 0");
    for w in system.samples() {
        let mut pairs = Vec::new();
        for i in index_run.limit().get(w) {
            pairs.push((i.0, loss.map.backward_value(w, zero, i.0)?));
        }
        let image: BTreeSet<State> = pairs.iter().map(|(_, x)| *x).collect();
        surjective.push(&image == loss_run.limit().get(w));
        projection.push(pairs);
        image_sets.push(image);
    }
    Ok(FlipoRun {
        loss,
        loss_run,
        index_map,
        index_run,
        projection,
        image: RandomSet::new(image_sets),
        surjective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn params(sigma: [&str; 2]) -> LossParams {
        LossParams::new(
            sigma.iter().map(|s| parse_rational(s).unwrap()).collect(),
            vec![Rational::from_integer(1); 2],
        )
        .unwrap()
    }

    fn values(run: &FlipoRun, w: usize) -> Vec<Rational> {
        run.image.get(Sample(w)).iter().map(|x| run.loss.lattice.value(*x)).collect()
    }

    #[test]
    fn example_two_indices() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let run = flipo_compare(&sys, &params(["1.2", "1.7"])).unwrap();
        assert_eq!(run.index_limit(Sample(0)), vec![0, 1]);
        assert_eq!(run.index_limit(Sample(1)), vec![0, 1]);
        assert!(run.is_surjective());
        assert_eq!(values(&run, 0), vec![Rational::zero(), Rational::new(7, 10)]);
        assert_eq!(values(&run, 1), vec![Rational::zero(), Rational::new(1, 5)]);
    }

    #[test]
    fn example_one_indices() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let run = flipo_compare(&sys, &params(["1", "5.5"])).unwrap();
        assert_eq!(run.index_limit(Sample(0)), vec![1, 3, 5]);
        assert!(run.is_surjective());
        assert_eq!(values(&run, 0), vec![Rational::new(1, 2), Rational::new(5, 2), Rational::new(9, 2)]);
    }

    #[test]
    fn idle_server_projects_to_zero() {
        let sys = FiniteCyclicSystem::with_period(2).unwrap();
        let run = flipo_compare(&sys, &params(["0", "0"])).unwrap();
        assert_eq!(run.index_limit(Sample(0)), vec![0]);
        assert_eq!(run.projection[0], vec![(0, State(0))]);
        assert!(run.is_surjective());
    }
}
