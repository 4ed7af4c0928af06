use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::{floor_int, rational_gcd, Rational};

/// Finite-support law with exact rational probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDistribution {
    atoms: Vec<(Rational, Rational)>,
}

impl DiscreteDistribution {
    /// Atoms `(value, probability)`; probabilities must be positive and sum to one.
    pub fn new(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParams("distribution has no atoms".into()));
        }
        if atoms.iter().any(|(_, p)| *p <= Rational::zero()) {
            return Err(Error::InvalidParams("probabilities must be positive".into()));
        }
        let total = atoms.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
        if total != Rational::one() {
            return Err(Error::InvalidParams(format!("probabilities sum to {total}, not 1")));
        }
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (v, p) in atoms {
            *merged.entry(v).or_default() += p;
        }
        Ok(Self {
            atoms: merged.into_iter().collect(),
        })
    }

    pub fn point(value: Rational) -> Self {
        Self {
            atoms: vec![(value, Rational::one())],
        }
    }

    pub fn uniform(values: &[Rational]) -> Result<Self> {
        let p = Rational::new(1, values.len().max(1) as i64);
        Self::new(values.iter().map(|v| (*v, p)).collect())
    }

    pub fn atoms(&self) -> &[(Rational, Rational)] {
        &self.atoms
    }

    pub fn min(&self) -> Rational {
        self.atoms[0].0
    }

    pub fn max(&self) -> Rational {
        self.atoms[self.atoms.len() - 1].0
    }

    /// Integer weights proportional to the probabilities.
    fn weights(&self) -> Vec<u64> {
        let lcm = self.atoms.iter().fold(1i64, |acc, (_, p)| num_integer::lcm(acc, *p.denom()));
        self.atoms
            .iter()
            .map(|(_, p)| (p * Rational::from_integer(lcm)).to_integer() as u64)
            .collect()
    }
}

/// Independent i.i.d. service, inter-arrival and patience sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftpConfig {
    pub service: DiscreteDistribution,
    pub interarrival: DiscreteDistribution,
    pub patience: DiscreteDistribution,
    /// Largest horizon tried; doubling stops once it would be exceeded.
    pub horizon_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CftpSample {
    /// Common value of `Φ^n` over the start set, when it coupled.
    pub value: Option<Rational>,
    /// Last horizon tried.
    pub horizon: usize,
}

impl CftpSample {
    pub fn coupled(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftpEstimate {
    pub replications: usize,
    pub coupled: usize,
    /// Counts of coupled values.
    pub distribution: BTreeMap<Rational, usize>,
    pub max_horizon: usize,
    /// `P(σ < ξ) > 0`, i.e. `min σ < max ξ`.
    pub condition_holds: bool,
    pub samples: Vec<CftpSample>,
}

impl CftpEstimate {
    /// Empirical probabilities over coupled replications.
    pub fn frequencies(&self) -> Vec<(Rational, Rational)> {
        let n = self.coupled.max(1) as i64;
        self.distribution
            .iter()
            .map(|(v, c)| (*v, Rational::new(*c as i64, n)))
            .collect()
    }
}

/// Integer form of the model on `L_α ∩ [0, max σ + max D]`.
struct Kernel {
    step: Rational,
    cap: usize,
    top: i64,
    service: Vec<i64>,
    interarrival: Vec<i64>,
    patience: Vec<i64>,
    service_idx: WeightedIndex<u64>,
    interarrival_idx: WeightedIndex<u64>,
    patience_idx: WeightedIndex<u64>,
}

#[derive(Clone, Copy)]
struct Noise {
    service: i64,
    interarrival: i64,
    patience: i64,
}

impl Kernel {
    fn new(config: &CftpConfig) -> Result<Self> {
        if config.horizon_cap == 0 {
            return Err(Error::InvalidParams("horizon cap must be at least 1".into()));
        }
        if config.service.min() < Rational::zero() || config.patience.min() < Rational::zero() {
            return Err(Error::InvalidParams("service and patience must be nonnegative".into()));
        }
        if config.interarrival.min() <= Rational::zero() {
            return Err(Error::InvalidParams("inter-arrival times must be positive".into()));
        }
        let values = config.service.atoms().iter().chain(config.interarrival.atoms()).map(|(v, _)| v);
        let step = rational_gcd(values).ok_or_else(|| Error::InvalidParams("lattice step is zero".into()))?;
        let counts = |d: &DiscreteDistribution| d.atoms().iter().map(|(v, _)| floor_int(&(v / step))).collect();
        let weights = |d: &DiscreteDistribution| {
            WeightedIndex::new(d.weights()).map_err(|e| Error::InvalidParams(format!("bad weights: {e}")))
        };
        Ok(Self {
            step,
            cap: config.horizon_cap,
            top: floor_int(&((config.service.max() + config.patience.max()) / step)),
            service: counts(&config.service),
            interarrival: counts(&config.interarrival),
            // x ≤ D on the lattice is x/α ≤ ⌊D/α⌋
            patience: counts(&config.patience),
            service_idx: weights(&config.service)?,
            interarrival_idx: weights(&config.interarrival)?,
            patience_idx: weights(&config.patience)?,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Noise {
        Noise {
            service: self.service[self.service_idx.sample(rng)],
            interarrival: self.interarrival[self.interarrival_idx.sample(rng)],
            patience: self.patience[self.patience_idx.sample(rng)],
        }
    }

    fn apply(&self, x: i64, n: &Noise) -> i64 {
        let load = if x <= n.patience { n.service } else { 0 };
        (x + load - n.interarrival).max(0)
    }

    fn run(&self, seed: u64, stream: u64) -> CftpSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        // noise[i] drives the step from time -(i+1) to -i
        let mut noise: Vec<Noise> = Vec::new();
        let mut horizon = 1usize;
        loop {
            while noise.len() < horizon {
                noise.push(self.draw(&mut rng));
            }
            let mut states: Vec<i64> = (0..=self.top).collect();
            for n in noise[..horizon].iter().rev() {
                for x in states.iter_mut() {
                    *x = self.apply(*x, n);
                }
                states.sort_unstable();
                states.dedup();
            }
            if states.len() == 1 {
                return CftpSample {
                    value: Some(self.step * Rational::from_integer(states[0])),
                    horizon,
                };
            }
            match horizon.checked_mul(2) {
                Some(next) if next <= self.cap => horizon = next,
                _ => return CftpSample { value: None, horizon },
            }
        }
    }
}

/// One perfect sample: horizons `1, 2, 4, …` up to the cap, reusing the
/// noise already drawn for each time index.
pub fn cftp_sample(config: &CftpConfig, seed: u64) -> Result<CftpSample> {
    let kernel = Kernel::new(config)?;
    Ok(kernel.run(seed, 0))
}

/// `replications` independent samples, replication `r` using stream `r` of
/// the generator seeded with `seed`. Results do not depend on `jobs`.
pub fn cftp_estimate(config: &CftpConfig, replications: usize, seed: u64, jobs: usize) -> Result<CftpEstimate> {
    let kernel = Kernel::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let samples: Vec<CftpSample> = pool.install(|| {
        (0..replications as u64)
            .into_par_iter()
            .map(|r| kernel.run(seed, r))
            .collect()
    });
    let mut distribution = BTreeMap::new();
    for v in samples.iter().filter_map(|s| s.value) {
        *distribution.entry(v).or_insert(0usize) += 1;
    }
    Ok(CftpEstimate {
        replications,
        coupled: samples.iter().filter(|s| s.coupled()).count(),
        distribution,
        max_horizon: samples.iter().map(|s| s.horizon).max().unwrap_or(0),
        condition_holds: config.service.min() < config.interarrival.max(),
        samples,
    })
}
